#include <cstdio>

int main() {
    std::puts("offgrid: subcommands not wired yet");
    return 2;
}
