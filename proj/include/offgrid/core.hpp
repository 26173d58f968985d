// Core lattice/grid types shared by every stage: rectangular index sets on Z^2,
// complex coefficient grids indexed by them, and trigonometric polynomials.
#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace offgrid {

using cd = std::complex<double>;
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cd kJ{0.0, 1.0};

// Input/config problems (CLI exit code 2).
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Numerical failures (CLI exit code 3).
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Index2 {
  long x = 0;
  long y = 0;
  friend Index2 operator+(Index2 a, Index2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Index2 operator-(Index2 a, Index2 b) { return {a.x - b.x, a.y - b.y}; }
  friend bool operator==(Index2 a, Index2 b) { return a.x == b.x && a.y == b.y; }
};

// Rectangle {kmin.x .. kmin.x+dims.x-1} x {kmin.y .. kmin.y+dims.y-1}.
// Storage order everywhere: row-major with x outer, y inner.
struct IndexRect {
  Index2 kmin;
  Index2 dims;

  long cardinality() const { return dims.x * dims.y; }
  bool contains(Index2 k) const {
    return k.x >= kmin.x && k.x < kmin.x + dims.x && k.y >= kmin.y &&
           k.y < kmin.y + dims.y;
  }
  long index_of(Index2 k) const {
    return (k.x - kmin.x) * dims.y + (k.y - kmin.y);
  }
  Index2 k_at(long i) const {
    return {kmin.x + i / dims.y, kmin.y + i % dims.y};
  }
  friend bool operator==(const IndexRect& a, const IndexRect& b) {
    return a.kmin == b.kmin && a.dims == b.dims;
  }
};

// Centered rectangle; odd dims give kmin = -(dims-1)/2, even dims kmin = -dims/2.
inline IndexRect centered(long nx, long ny) {
  if (nx < 1 || ny < 1) throw ValidationError("centered: dims must be positive");
  return {{-(nx / 2), -(ny / 2)}, {nx, ny}};
}

// Minkowski sum a + b.
inline IndexRect dilate(const IndexRect& a, const IndexRect& b) {
  return {a.kmin + b.kmin, {a.dims.x + b.dims.x - 1, a.dims.y + b.dims.y - 1}};
}

// Contraction gamma:lambda, the shifts l with l - k in gamma for all k in
// lambda; lower corner gamma.kmin + lambda.kmax, extents gamma - lambda + 1.
inline IndexRect contract(const IndexRect& gamma, const IndexRect& lambda) {
  if (gamma.dims.x < lambda.dims.x || gamma.dims.y < lambda.dims.y)
    throw ValidationError("contract: empty contraction");
  return {{gamma.kmin.x + lambda.kmin.x + lambda.dims.x - 1,
           gamma.kmin.y + lambda.kmin.y + lambda.dims.y - 1},
          {gamma.dims.x - lambda.dims.x + 1, gamma.dims.y - lambda.dims.y + 1}};
}

// Complex values over an IndexRect.
struct CoefficientGrid {
  IndexRect support;
  std::vector<cd> values;

  CoefficientGrid() : support{{0, 0}, {1, 1}}, values(1) {}
  explicit CoefficientGrid(const IndexRect& s)
      : support(s), values(static_cast<size_t>(s.cardinality())) {}

  cd& at(Index2 k) { return values[static_cast<size_t>(support.index_of(k))]; }
  cd at(Index2 k) const {
    return values[static_cast<size_t>(support.index_of(k))];
  }
};

// Trigonometric polynomial mu(r) = sum_k c[k] exp(j 2 pi k.r) on [0,1]^2.
struct TrigPoly {
  IndexRect support;
  std::vector<cd> c;

  TrigPoly() : support{{0, 0}, {1, 1}}, c(1) {}
  explicit TrigPoly(const IndexRect& s)
      : support(s), c(static_cast<size_t>(s.cardinality())) {}

  // Degree (K, L): extents minus one of the tightest rectangle holding the
  // nonzero coefficients.
  std::pair<long, long> degree(double tol = 0.0) const {
    long x0 = support.dims.x, x1 = -1, y0 = support.dims.y, y1 = -1;
    for (long ix = 0; ix < support.dims.x; ++ix)
      for (long iy = 0; iy < support.dims.y; ++iy)
        if (std::abs(c[static_cast<size_t>(ix * support.dims.y + iy)]) > tol) {
          x0 = std::min(x0, ix);
          x1 = std::max(x1, ix);
          y0 = std::min(y0, iy);
          y1 = std::max(y1, iy);
        }
    if (x1 < 0) return {0, 0};
    return {x1 - x0, y1 - y0};
  }

  bool is_hermitian(double tol = 1e-10) const {
    for (long ix = 0; ix < support.dims.x; ++ix)
      for (long iy = 0; iy < support.dims.y; ++iy) {
        Index2 k{support.kmin.x + ix, support.kmin.y + iy};
        Index2 nk{-k.x, -k.y};
        cd ck = c[static_cast<size_t>(ix * support.dims.y + iy)];
        if (!support.contains(nk)) {
          if (std::abs(ck) > tol) return false;
          continue;
        }
        cd cnk = c[static_cast<size_t>(support.index_of(nk))];
        if (std::abs(ck - std::conj(cnk)) > tol) return false;
      }
    return true;
  }
};

inline cd evaluate(const TrigPoly& mu, double x, double y) {
  cd acc = 0.0;
  for (long ix = 0; ix < mu.support.dims.x; ++ix) {
    long kx = mu.support.kmin.x + ix;
    for (long iy = 0; iy < mu.support.dims.y; ++iy) {
      long ky = mu.support.kmin.y + iy;
      double ph = 2.0 * kPi * (kx * x + ky * y);
      acc += mu.c[static_cast<size_t>(ix * mu.support.dims.y + iy)] *
             cd{std::cos(ph), std::sin(ph)};
    }
  }
  return acc;
}

// Real or complex spatial samples on a uniform grid over [0,1]^2; pixel (m,n)
// sits at (m/dims.x, n/dims.y), row-major x outer.
template <typename T>
struct Grid2 {
  long nx = 0, ny = 0;
  std::vector<T> v;

  Grid2() = default;
  Grid2(long nx_, long ny_) : nx(nx_), ny(ny_), v(static_cast<size_t>(nx_ * ny_)) {}
  T& at(long ix, long iy) { return v[static_cast<size_t>(ix * ny + iy)]; }
  T at(long ix, long iy) const { return v[static_cast<size_t>(ix * ny + iy)]; }
};

using ImageGrid = Grid2<double>;
using ImageGridC = Grid2<cd>;

}  // namespace offgrid
