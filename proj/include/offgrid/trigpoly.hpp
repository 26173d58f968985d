// Trigonometric polynomial gridding and zero-set topology: sampling on uniform
// grids via zero-padded inverse DFT and sign-component labeling of the
// complement of the zero set.
#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>

#include "offgrid/core.hpp"
#include "offgrid/fft.hpp"

namespace offgrid {

// mu sampled at r = (m/nx, n/ny). The backward DFT of the frequency-placed
// coefficients is exactly the defining sum, so no scale factor appears.
inline ImageGridC grid_evaluate(const TrigPoly& mu, long nx, long ny) {
  if (nx < mu.support.dims.x || ny < mu.support.dims.y)
    throw ValidationError("grid_evaluate: grid smaller than support (aliasing)");
  CoefficientGrid g(mu.support);
  g.values = mu.c;
  std::vector<cd> a = embed_dft(g, nx, ny);
  ifft2_unnormalized(a, nx, ny);
  ImageGridC out(nx, ny);
  out.v = std::move(a);
  return out;
}

struct LabelGrid {
  long nx = 0, ny = 0;
  std::vector<int> labels;  // 0 = zero band, regions numbered from 1
  int component_count = 0;

  int at(long ix, long iy) const {
    return labels[static_cast<size_t>(ix * ny + iy)];
  }
};

namespace detail {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int a) {
    while (parent[static_cast<size_t>(a)] != a) {
      parent[static_cast<size_t>(a)] =
          parent[static_cast<size_t>(parent[static_cast<size_t>(a)])];
      a = parent[static_cast<size_t>(a)];
    }
    return a;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[static_cast<size_t>(std::max(a, b))] = std::min(a, b);
  }
};

}  // namespace detail

// Sign-consistent 4-connected components of {mu != 0} on the sample grid.
// Pixels with |mu| <= zero_band * max|mu| get label 0. Components are numbered
// by first encounter in storage order (x outer, y inner).
inline LabelGrid rasterize_regions(const TrigPoly& mu, long nx, long ny,
                                   double zero_band = 1e-3, bool wrap = false) {
  if (!mu.is_hermitian())
    throw ValidationError("rasterize_regions: polynomial is not real-valued");
  ImageGridC vals = grid_evaluate(mu, nx, ny);
  double vmax = 0.0;
  for (const cd& z : vals.v) vmax = std::max(vmax, std::abs(z.real()));
  double band = zero_band * vmax;

  std::vector<signed char> sgn(static_cast<size_t>(nx * ny));
  for (size_t i = 0; i < sgn.size(); ++i) {
    double v = vals.v[i].real();
    sgn[i] = std::abs(v) <= band ? 0 : (v > 0 ? 1 : -1);
  }

  detail::UnionFind uf(static_cast<size_t>(nx * ny));
  auto id = [ny](long ix, long iy) { return static_cast<int>(ix * ny + iy); };
  for (long ix = 0; ix < nx; ++ix)
    for (long iy = 0; iy < ny; ++iy) {
      signed char s = sgn[static_cast<size_t>(id(ix, iy))];
      if (s == 0) continue;
      if (ix + 1 < nx && sgn[static_cast<size_t>(id(ix + 1, iy))] == s)
        uf.unite(id(ix, iy), id(ix + 1, iy));
      if (iy + 1 < ny && sgn[static_cast<size_t>(id(ix, iy + 1))] == s)
        uf.unite(id(ix, iy), id(ix, iy + 1));
      if (wrap && ix + 1 == nx && sgn[static_cast<size_t>(id(0, iy))] == s)
        uf.unite(id(ix, iy), id(0, iy));
      if (wrap && iy + 1 == ny && sgn[static_cast<size_t>(id(ix, 0))] == s)
        uf.unite(id(ix, iy), id(ix, 0));
    }

  LabelGrid out;
  out.nx = nx;
  out.ny = ny;
  out.labels.assign(static_cast<size_t>(nx * ny), 0);
  std::vector<int> remap(static_cast<size_t>(nx * ny), -1);
  int next = 0;
  for (long ix = 0; ix < nx; ++ix)
    for (long iy = 0; iy < ny; ++iy) {
      size_t i = static_cast<size_t>(id(ix, iy));
      if (sgn[i] == 0) continue;
      int root = uf.find(static_cast<int>(i));
      if (remap[static_cast<size_t>(root)] < 0)
        remap[static_cast<size_t>(root)] = ++next;
      out.labels[i] = remap[static_cast<size_t>(root)];
    }
  out.component_count = next;
  return out;
}

// Coefficient-domain product (support dilation, coefficient convolution).
inline TrigPoly multiply(const TrigPoly& a, const TrigPoly& b) {
  TrigPoly p(dilate(a.support, b.support));
  for (long ix = 0; ix < a.support.dims.x; ++ix)
    for (long iy = 0; iy < a.support.dims.y; ++iy) {
      cd ca = a.c[static_cast<size_t>(ix * a.support.dims.y + iy)];
      if (ca == cd{}) continue;
      Index2 ka{a.support.kmin.x + ix, a.support.kmin.y + iy};
      for (long jx = 0; jx < b.support.dims.x; ++jx)
        for (long jy = 0; jy < b.support.dims.y; ++jy) {
          cd cb = b.c[static_cast<size_t>(jx * b.support.dims.y + jy)];
          if (cb == cd{}) continue;
          Index2 kb{b.support.kmin.x + jx, b.support.kmin.y + jy};
          p.c[static_cast<size_t>(p.support.index_of(ka + kb))] += ca * cb;
        }
    }
  return p;
}

// Minimal square sampling grid for exact edge recovery at degree (K, L): the
// smallest odd n with 2 (n - K) (n - L) >= (K + 1)(L + 1) - 1 and n > K, L.
inline long min_square_grid(long K, long L) {
  for (long n = std::max(K, L) + 1;; n += 1) {
    if (2 * (n - K) * (n - L) >= (K + 1) * (L + 1) - 1) return n;
  }
}

}  // namespace offgrid
