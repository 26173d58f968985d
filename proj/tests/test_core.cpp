#include <catch2/catch_amalgamated.hpp>

#include "offgrid/annihilation.hpp"
#include "offgrid/bessel.hpp"
#include "offgrid/core.hpp"
#include "offgrid/fft.hpp"
#include "offgrid/rng.hpp"
#include "offgrid/trigpoly.hpp"

using namespace offgrid;

TEST_CASE("index rect geometry") {
    IndexRect g = centered(65, 65);
    CHECK(g.kmin.x == -32);
    CHECK(g.cardinality() == 65 * 65);
    CHECK(g.contains({32, -32}));
    CHECK_FALSE(g.contains({33, 0}));

    IndexRect lam = centered(7, 7);
    IndexRect valid = contract(g, lam);
    CHECK(valid.dims.x == 59);
    CHECK(valid.dims.y == 59);
    // every shift l in the contraction keeps l - k inside gamma for k in lambda
    for (std::int64_t t : {std::int64_t{0}, valid.cardinality() - 1}) {
        Index2 l = valid.k_at(t);
        CHECK(g.contains({l.x - lam.kmin.x, l.y - lam.kmin.y}));
        CHECK(g.contains({l.x - (lam.kmin.x + lam.dims.x - 1),
                          l.y - (lam.kmin.y + lam.dims.y - 1)}));
    }

    IndexRect d = dilate(lam, lam);
    CHECK(d.dims.x == 13);
    CHECK(d.kmin.x == -6);
}

TEST_CASE("row-major indexing round trip") {
    IndexRect r{{-3, -2}, {7, 5}};
    for (std::int64_t t = 0; t < r.cardinality(); ++t)
        CHECK(r.index_of(r.k_at(t)) == t);
}

TEST_CASE("minimal square sampling grid") {
    CHECK(min_square_grid(6, 6) == 11);
    CHECK(min_square_grid(2, 2) == 4);
    CHECK(min_square_grid(4, 4) == 8);
}

TEST_CASE("splitmix64 stream is pinned") {
    Rng rng(1);
    CHECK(rng.next_u64() == 10451216379200822465ULL);
    Rng r2(1);
    // bounded draws stay below the bound and are deterministic
    for (int i = 0; i < 100; ++i) CHECK(r2.bounded(48) < 48);
}

TEST_CASE("first kind Bessel order one") {
    CHECK(bessel_j1(1.0) == Catch::Approx(0.4400505857).epsilon(1e-9));
    CHECK(bessel_j1(5.0) == Catch::Approx(-0.3275791376).epsilon(1e-9));
    CHECK(bessel_j1(-1.0) == Catch::Approx(-0.4400505857).epsilon(1e-9));
    // jinc limit at zero and continuity near it
    CHECK(jinc(0.0) == Catch::Approx(kPi));
    CHECK(jinc(1e-9) == Catch::Approx(kPi).epsilon(1e-9));
}

TEST_CASE("fft round trip and dft embedding") {
    const int nx = 16, ny = 12;
    Rng rng(7);
    std::vector<cd> a(static_cast<std::size_t>(nx) * ny);
    for (auto& v : a) v = {rng.next_double() - 0.5, rng.next_double() - 0.5};
    std::vector<cd> b = a;
    fft2(b, nx, ny);
    ifft2(b, nx, ny);
    double err = 0;
    for (std::size_t i = 0; i < a.size(); ++i) err = std::max(err, std::abs(a[i] - b[i]));
    CHECK(err < 1e-12);
}

TEST_CASE("grid evaluation matches direct summation") {
    CoefficientGrid c(centered(5, 3));
    Rng rng(3);
    for (auto& v : c.values) v = {rng.next_double() - 0.5, rng.next_double() - 0.5};
    TrigPoly mu(c.support);
    mu.c = c.values;
    auto g = grid_evaluate(mu, 8, 8);
    for (int ix = 0; ix < 8; ++ix)
        for (int iy = 0; iy < 8; ++iy) {
            cd direct = evaluate(mu, ix / 8.0, iy / 8.0);
            CHECK(std::abs(g.at(ix, iy) - direct) < 1e-10);
        }
}

TEST_CASE("coefficient multiply is polynomial product") {
    CoefficientGrid a(centered(3, 3)), b(centered(3, 3));
    Rng rng(11);
    for (auto& v : a.values) v = {rng.next_double() - 0.5, rng.next_double() - 0.5};
    for (auto& v : b.values) v = {rng.next_double() - 0.5, rng.next_double() - 0.5};
    TrigPoly pa(a.support), pb(b.support);
    pa.c = a.values;
    pb.c = b.values;
    TrigPoly prod = multiply(pa, pb);
    CHECK(prod.support.dims.x == 5);
    for (double x : {0.13, 0.77})
        for (double y : {0.4, 0.91}) {
            cd lhs = evaluate(prod, x, y);
            cd rhs = evaluate(pa, x, y) * evaluate(pb, x, y);
            CHECK(std::abs(lhs - rhs) < 1e-10);
        }
}

TEST_CASE("annihilation matrix dimensions") {
    CoefficientGrid f(centered(11, 11));
    for (auto& v : f.values) v = 1.0;
    AnnihilationMatrix t = build_annihilation_matrix(f, centered(7, 7));
    CHECK(t.rows() == 50);
    CHECK(t.cols() == 49);

    CoefficientGrid z(centered(128, 128));
    AnnihilationMatrix tz = build_annihilation_matrix(z, centered(64, 64));
    CHECK(tz.rows() == 8450);
    CHECK(tz.cols() == 4096);
    CHECK(tz.m.isZero(0.0));
}

TEST_CASE("annihilation matrix rejects empty contraction") {
    CoefficientGrid f(centered(5, 5));
    CHECK_THROWS_AS(build_annihilation_matrix(f, centered(7, 7)), ValidationError);
}

TEST_CASE("matrix product equals valid convolution of weighted samples") {
    IndexRect gamma = centered(9, 9);
    IndexRect lam = centered(3, 3);
    CoefficientGrid f(gamma);
    Rng rng(5);
    for (auto& v : f.values) v = {rng.next_double() - 0.5, rng.next_double() - 0.5};
    CoefficientGrid c(lam);
    for (auto& v : c.values) v = {rng.next_double() - 0.5, rng.next_double() - 0.5};

    AnnihilationMatrix t = build_annihilation_matrix(f, lam);
    Eigen::VectorXcd cv(lam.cardinality());
    for (std::int64_t i = 0; i < lam.cardinality(); ++i) cv(i) = c.values[static_cast<std::size_t>(i)];
    Eigen::VectorXcd prod = t.m * cv;

    IndexRect valid = contract(gamma, lam);
    for (std::int64_t r = 0; r < valid.cardinality(); ++r) {
        Index2 l = valid.k_at(r);
        cd accx = 0, accy = 0;
        for (std::int64_t i = 0; i < lam.cardinality(); ++i) {
            Index2 k = lam.k_at(i);
            Index2 d{l.x - k.x, l.y - k.y};
            cd w = f.at(d) * c.values[static_cast<std::size_t>(i)];
            accx += kJ * (2.0 * kPi * double(d.x)) * w;
            accy += kJ * (2.0 * kPi * double(d.y)) * w;
        }
        CHECK(std::abs(prod(r) - accx) < 1e-10);
        CHECK(std::abs(prod(valid.cardinality() + r) - accy) < 1e-10);
    }
}

TEST_CASE("adjoint pairing of the lifting") {
    IndexRect gamma = centered(8, 7);
    IndexRect lam = centered(3, 4);
    Rng rng(9);
    CoefficientGrid x(gamma);
    for (auto& v : x.values) v = {rng.next_double() - 0.5, rng.next_double() - 0.5};
    AnnihilationMatrix tx = build_annihilation_matrix(x, lam);
    Eigen::MatrixXcd y = Eigen::MatrixXcd::NullaryExpr(
        tx.rows(), tx.cols(), [&](Eigen::Index, Eigen::Index) {
            return cd{rng.next_double() - 0.5, rng.next_double() - 0.5};
        });
    cd lhs = (tx.m.conjugate().cwiseProduct(y)).sum();
    CoefficientGrid aty = annihilation_adjoint(y, gamma, lam);
    cd rhs = 0;
    for (std::size_t i = 0; i < aty.values.size(); ++i)
        rhs += std::conj(x.values[i]) * aty.values[i];
    CHECK(std::abs(lhs - rhs) < 1e-9);
}

TEST_CASE("lifting normal operator is diagonal") {
    IndexRect gamma = centered(7, 7);
    IndexRect lam = centered(3, 3);
    std::vector<double> diag = annihilation_diag(gamma, lam);
    for (std::int64_t t : {std::int64_t{0}, std::int64_t{24}, std::int64_t{30}, gamma.cardinality() - 1}) {
        CoefficientGrid onehot(gamma);
        onehot.values[static_cast<std::size_t>(t)] = 1.0;
        AnnihilationMatrix tm = build_annihilation_matrix(onehot, lam);
        CoefficientGrid back = annihilation_adjoint(tm.m, gamma, lam);
        for (std::int64_t i = 0; i < gamma.cardinality(); ++i) {
            cd expect = (i == t) ? cd(diag[static_cast<std::size_t>(i)]) : cd(0);
            CHECK(std::abs(back.values[static_cast<std::size_t>(i)] - expect) < 1e-9);
        }
    }
    // DC entry carries zero weight
    CHECK(diag[static_cast<std::size_t>(gamma.index_of({0, 0}))] == 0.0);
}

TEST_CASE("default model order heuristic") {
    auto [lam1, r1] = default_model_order({100, 100});
    CHECK(lam1.x == 50);
    CHECK(r1 == 1250);
    auto [lam2, r2] = default_model_order({128, 128});
    CHECK(lam2.x == 64);
    CHECK(r2 == 2048);
    auto [lam3, r3] = default_model_order({4, 4});
    CHECK(lam3.x == 2);
    CHECK(r3 == 2);
    CHECK_THROWS_AS(default_model_order({3, 4}), ValidationError);
}

TEST_CASE("nullspace of a rank deficient matrix") {
    // A = outer products leaving a known 2-dim nullspace in C^5
    const int m = 5;
    Eigen::MatrixXcd basis = Eigen::MatrixXcd::Random(m, 3);
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(basis);
    Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(m, 3);
    AnnihilationMatrix t;
    t.gamma = centered(5, 1);
    t.lambda = centered(3, 1);
    t.shifts = contract(t.gamma, t.lambda);
    t.m = Eigen::MatrixXcd::Random(6, 3) * q.adjoint();

    AnnihilatingSubspace d = estimate_nullspace_tol(t, 1e-8);
    REQUIRE(d.filter_count() == 2);
    CHECK((d.basis.adjoint() * d.basis - Eigen::MatrixXcd::Identity(2, 2)).norm() < 1e-10);
    CHECK((t.m * d.basis).norm() < 1e-8 * t.m.norm());

    AnnihilatingSubspace dr = estimate_nullspace_rank(t, 3);
    CHECK(dr.filter_count() == 2);
    CHECK_THROWS_AS(estimate_nullspace_rank(t, 5), ValidationError);
}
