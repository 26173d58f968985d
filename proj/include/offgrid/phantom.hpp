// Phantom synthesis: Fourier samples of piecewise constant images whose edges
// are trigonometric curves (exact run-length summation of the rasterized
// Riemann DFT) or ellipse unions (closed-form jinc transform), plus the
// sampling-side utilities: noise injection, derivative weighting, and
// magnitude-image phase correction.
#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "offgrid/bessel.hpp"
#include "offgrid/core.hpp"
#include "offgrid/fft.hpp"
#include "offgrid/rng.hpp"
#include "offgrid/trigpoly.hpp"

namespace offgrid {

struct TrigCurvePhantom {
  TrigPoly mu;                  // real-valued curve polynomial (edge set)
  std::vector<cd> amplitudes;   // one per region label of rasterize_regions
  Index2 raster_dims{4096, 4096};
};

struct Ellipse {
  double cx = 0.0, cy = 0.0;    // center in [0,1]^2
  double ax = 0.0, ay = 0.0;    // semi-axes
  double angle_rad = 0.0;       // CCW rotation
  cd amplitude{1.0, 0.0};
};

struct EllipsePhantom {
  std::vector<Ellipse> ellipses;  // overlaps add
};

namespace detail {

struct IncDsu {
  std::vector<int> p;
  int add() {
    p.push_back(static_cast<int>(p.size()));
    return static_cast<int>(p.size()) - 1;
  }
  int find(int a) {
    while (p[static_cast<size_t>(a)] != a) {
      p[static_cast<size_t>(a)] = p[static_cast<size_t>(p[static_cast<size_t>(a)])];
      a = p[static_cast<size_t>(a)];
    }
    return a;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) p[static_cast<size_t>(std::max(a, b))] = std::min(a, b);
  }
};

// Roots on the unit circle of sum_j a[j] z^j, returned as sorted x = arg/2pi
// in [0,1). Companion-matrix eigenvalues after trimming negligible leading and
// trailing coefficients.
inline std::vector<double> circle_roots(const std::vector<cd>& a,
                                        double tol = 1e-6) {
  double scale = 0.0;
  for (const cd& z : a) scale = std::max(scale, std::abs(z));
  if (scale == 0.0) return {};
  long lo = 0, hi = static_cast<long>(a.size()) - 1;
  while (hi > lo && std::abs(a[static_cast<size_t>(hi)]) <= 1e-12 * scale) --hi;
  while (lo < hi && std::abs(a[static_cast<size_t>(lo)]) <= 1e-12 * scale) ++lo;
  long deg = hi - lo;
  if (deg <= 0) return {};
  Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(deg, deg);
  for (long i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
  for (long i = 0; i < deg; ++i)
    comp(i, deg - 1) = -a[static_cast<size_t>(lo + i)] / a[static_cast<size_t>(hi)];
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp, false);
  std::vector<double> xs;
  for (long i = 0; i < deg; ++i) {
    cd z = es.eigenvalues()(i);
    if (std::abs(std::abs(z) - 1.0) < tol) {
      double x = std::arg(z) / (2.0 * kPi);
      x -= std::floor(x);
      xs.push_back(x);
    }
  }
  std::sort(xs.begin(), xs.end());
  return xs;
}

struct RowRuns {
  std::vector<double> starts, ends;  // ends[i] may exceed 1 (wrap run)
  std::vector<signed char> signs;
  std::vector<int> ids;              // dsu node per run
};

struct SweepLabels {
  std::vector<RowRuns> rows;
  IncDsu dsu;
  std::vector<int> region_of;  // dsu root -> region index, -1 elsewhere
  int region_count = 0;
  long Ry = 0;
};

inline bool circ_overlap(double s1, double e1, double s2, double e2,
                         double tol) {
  for (double sh : {-1.0, 0.0, 1.0})
    if (s1 - tol < e2 + sh + tol && s2 + sh - tol < e1 + tol) return true;
  return false;
}

// Decompose each row y = iy/Ry into maximal constant-sign x-runs and join
// sign-matching overlapping runs of consecutive rows (torus in both axes).
// Region indices follow first appearance in pixel storage order, so the run
// containing x = 0 is visited first within a row.
inline SweepLabels sweep_label_runs(const TrigPoly& mu, long Ry,
                                    double root_tol = 1e-6) {
  const IndexRect& s = mu.support;
  SweepLabels sw;
  sw.Ry = Ry;
  sw.rows.reserve(static_cast<size_t>(Ry));
  std::vector<cd> rowc(static_cast<size_t>(s.dims.x));
  double tol = 0.25 / static_cast<double>(Ry);
  for (long iy = 0; iy < Ry; ++iy) {
    double y = static_cast<double>(iy) / static_cast<double>(Ry);
    for (long ix = 0; ix < s.dims.x; ++ix) {
      cd acc = 0.0;
      for (long jy = 0; jy < s.dims.y; ++jy) {
        double ph = 2.0 * kPi * static_cast<double>(s.kmin.y + jy) * y;
        acc += mu.c[static_cast<size_t>(ix * s.dims.y + jy)] *
               cd{std::cos(ph), std::sin(ph)};
      }
      rowc[static_cast<size_t>(ix)] = acc;
    }
    std::vector<double> xs = circle_roots(rowc, root_tol);
    RowRuns rr;
    if (xs.empty()) {
      rr.starts = {0.0};
      rr.ends = {1.0};
    } else {
      rr.starts = xs;
      rr.ends.assign(xs.begin() + 1, xs.end());
      rr.ends.push_back(xs.front() + 1.0);
    }
    for (size_t i = 0; i < rr.starts.size(); ++i) {
      double mid = 0.5 * (rr.starts[i] + rr.ends[i]);
      mid -= std::floor(mid);
      cd v = 0.0;
      for (long ix = 0; ix < s.dims.x; ++ix) {
        double ph = 2.0 * kPi * static_cast<double>(s.kmin.x + ix) * mid;
        v += rowc[static_cast<size_t>(ix)] * cd{std::cos(ph), std::sin(ph)};
      }
      rr.signs.push_back(v.real() > 0 ? 1 : -1);
      rr.ids.push_back(sw.dsu.add());
    }
    if (iy > 0) {
      const RowRuns& pr = sw.rows.back();
      for (size_t i = 0; i < rr.starts.size(); ++i)
        for (size_t j = 0; j < pr.starts.size(); ++j)
          if (rr.signs[i] == pr.signs[j] &&
              circ_overlap(rr.starts[i], rr.ends[i], pr.starts[j], pr.ends[j],
                           tol))
            sw.dsu.unite(rr.ids[i], pr.ids[j]);
    }
    sw.rows.push_back(std::move(rr));
  }
  const RowRuns& first = sw.rows.front();
  const RowRuns& last = sw.rows.back();
  for (size_t i = 0; i < first.starts.size(); ++i)
    for (size_t j = 0; j < last.starts.size(); ++j)
      if (first.signs[i] == last.signs[j] &&
          circ_overlap(first.starts[i], first.ends[i], last.starts[j],
                       last.ends[j], tol))
        sw.dsu.unite(first.ids[i], last.ids[j]);

  sw.region_of.assign(sw.dsu.p.size(), -1);
  for (const RowRuns& rr : sw.rows) {
    size_t n = rr.ids.size();
    for (size_t t = 0; t < n; ++t) {
      // wrap run (contains pixel 0) first, then left-to-right
      size_t i = (n > 1) ? (t == 0 ? n - 1 : t - 1) : t;
      int root = sw.dsu.find(rr.ids[i]);
      if (sw.region_of[static_cast<size_t>(root)] < 0)
        sw.region_of[static_cast<size_t>(root)] = sw.region_count++;
    }
  }
  return sw;
}

inline int locate_region(SweepLabels& sw, double px, double py) {
  double fy = py - std::floor(py);
  long iy = static_cast<long>(fy * static_cast<double>(sw.Ry)) % sw.Ry;
  const RowRuns& rr = sw.rows[static_cast<size_t>(iy)];
  double x = px - std::floor(px);
  for (size_t i = 0; i < rr.starts.size(); ++i)
    if ((rr.starts[i] <= x && x < rr.ends[i]) ||
        (rr.starts[i] <= x + 1.0 && x + 1.0 < rr.ends[i]))
      return sw.region_of[static_cast<size_t>(sw.dsu.find(rr.ids[i]))];
  return sw.region_of[static_cast<size_t>(sw.dsu.find(rr.ids.back()))];
}

// DFT over gamma of the piecewise constant raster: pixel (m, n) at
// (m/Rx, n/Ry) takes the amplitude of the run containing m/Rx. Each run
// contributes a closed-form geometric series per kx, so the full Rx x Ry
// raster is never materialized.
inline CoefficientGrid run_samples(SweepLabels& sw,
                                   const std::vector<cd>& region_amp, long Rx,
                                   const IndexRect& gamma) {
  CoefficientGrid out(gamma);
  long nkx = gamma.dims.x, nky = gamma.dims.y;
  std::vector<cd> row(static_cast<size_t>(nkx));
  std::vector<cd> wden(static_cast<size_t>(nkx));
  for (long ix = 0; ix < nkx; ++ix) {
    double ph = -2.0 * kPi * static_cast<double>(gamma.kmin.x + ix) /
                static_cast<double>(Rx);
    wden[static_cast<size_t>(ix)] = 1.0 - cd{std::cos(ph), std::sin(ph)};
  }
  for (long iy = 0; iy < sw.Ry; ++iy) {
    RowRuns& rr = sw.rows[static_cast<size_t>(iy)];
    std::fill(row.begin(), row.end(), cd{});
    for (size_t r = 0; r < rr.starts.size(); ++r) {
      long p = static_cast<long>(std::ceil(rr.starts[r] * Rx));
      long q = static_cast<long>(std::ceil(rr.ends[r] * Rx));
      if (q <= p) continue;
      cd a = region_amp[static_cast<size_t>(
          sw.region_of[static_cast<size_t>(sw.dsu.find(rr.ids[r]))])];
      for (long ix = 0; ix < nkx; ++ix) {
        long kx = gamma.kmin.x + ix;
        if (kx == 0) {
          row[static_cast<size_t>(ix)] += a * static_cast<double>(q - p);
        } else {
          double pp = -2.0 * kPi * static_cast<double>(kx) *
                      static_cast<double>(p) / static_cast<double>(Rx);
          double pq = -2.0 * kPi * static_cast<double>(kx) *
                      static_cast<double>(q) / static_cast<double>(Rx);
          row[static_cast<size_t>(ix)] +=
              a * (cd{std::cos(pp), std::sin(pp)} - cd{std::cos(pq), std::sin(pq)}) /
              wden[static_cast<size_t>(ix)];
        }
      }
    }
    for (long jy = 0; jy < nky; ++jy) {
      double ph = -2.0 * kPi * static_cast<double>(gamma.kmin.y + jy) *
                  static_cast<double>(iy) / static_cast<double>(sw.Ry);
      cd ey{std::cos(ph), std::sin(ph)};
      for (long ix = 0; ix < nkx; ++ix)
        out.values[static_cast<size_t>(ix * nky + jy)] +=
            ey * row[static_cast<size_t>(ix)];
    }
  }
  double norm = 1.0 / (static_cast<double>(Rx) * static_cast<double>(sw.Ry));
  for (cd& z : out.values) z *= norm;
  return out;
}

}  // namespace detail

// Low-pass Fourier samples of the phantom on gamma: the raster_dims point
// rasterization's Riemann DFT, evaluated exactly through per-row run sums.
// Amplitudes bind to regions through the label order of rasterize_regions.
inline CoefficientGrid trig_phantom_samples(const TrigCurvePhantom& p,
                                            const IndexRect& gamma) {
  long ext_x = gamma.dims.x, ext_y = gamma.dims.y;
  if (p.raster_dims.x < 8 * ext_x || p.raster_dims.y < 8 * ext_y)
    throw ValidationError(
        "trig_phantom_samples: UndersampledRaster (need raster_dims >= 8x "
        "gamma extents)");
  if (!p.mu.is_hermitian())
    throw ValidationError("trig_phantom_samples: curve polynomial not real");

  detail::SweepLabels sw = detail::sweep_label_runs(p.mu, p.raster_dims.y);
  if (static_cast<size_t>(sw.region_count) != p.amplitudes.size())
    throw ValidationError(
        "trig_phantom_samples: AmplitudeCountMismatch (regions " +
        std::to_string(sw.region_count) + ", amplitudes " +
        std::to_string(p.amplitudes.size()) + ")");

  // Representative interior point per label from a coarse raster; the sweep
  // region holding that point inherits the label's amplitude.
  long bx = std::min<long>(1024, p.raster_dims.x);
  long by = std::min<long>(1024, p.raster_dims.y);
  LabelGrid labs = rasterize_regions(p.mu, bx, by, 1e-3, true);
  if (static_cast<size_t>(labs.component_count) != p.amplitudes.size())
    throw ValidationError(
        "trig_phantom_samples: AmplitudeCountMismatch (labels " +
        std::to_string(labs.component_count) + ", amplitudes " +
        std::to_string(p.amplitudes.size()) + ")");
  ImageGridC vals = grid_evaluate(p.mu, bx, by);
  std::vector<long> best_pix(p.amplitudes.size(), -1);
  std::vector<double> best_val(p.amplitudes.size(), -1.0);
  for (long ix = 0; ix < bx; ++ix)
    for (long iy = 0; iy < by; ++iy) {
      int lab = labs.at(ix, iy);
      if (lab == 0) continue;
      double v = std::abs(vals.at(ix, iy).real());
      if (v > best_val[static_cast<size_t>(lab - 1)]) {
        best_val[static_cast<size_t>(lab - 1)] = v;
        best_pix[static_cast<size_t>(lab - 1)] = ix * by + iy;
      }
    }
  std::vector<cd> region_amp(p.amplitudes.size());
  std::vector<bool> claimed(p.amplitudes.size(), false);
  for (size_t lab = 0; lab < p.amplitudes.size(); ++lab) {
    long pix = best_pix[lab];
    int reg = detail::locate_region(
        sw, static_cast<double>(pix / by) / static_cast<double>(bx),
        static_cast<double>(pix % by) / static_cast<double>(by));
    if (claimed[static_cast<size_t>(reg)])
      throw ValidationError(
          "trig_phantom_samples: region correspondence is ambiguous");
    claimed[static_cast<size_t>(reg)] = true;
    region_amp[static_cast<size_t>(reg)] = p.amplitudes[lab];
  }
  return detail::run_samples(sw, region_amp, p.raster_dims.x, gamma);
}

// Closed-form samples: each ellipse contributes
// amplitude * ax * ay * jinc(|k'|) * exp(-j 2 pi k.center), k' the frequency
// rotated into the ellipse frame and scaled by the semi-axes.
inline CoefficientGrid ellipse_phantom_samples(const EllipsePhantom& p,
                                               const IndexRect& gamma) {
  for (const Ellipse& e : p.ellipses)
    if (!(e.ax > 0.0) || !(e.ay > 0.0))
      throw ValidationError("ellipse_phantom_samples: semi-axes must be > 0");
  CoefficientGrid out(gamma);
  for (long i = 0; i < gamma.cardinality(); ++i) {
    Index2 k = gamma.k_at(i);
    cd acc = 0.0;
    for (const Ellipse& e : p.ellipses) {
      double c = std::cos(e.angle_rad), s = std::sin(e.angle_rad);
      double k1 = (k.x * c + k.y * s) * e.ax;
      double k2 = (-k.x * s + k.y * c) * e.ay;
      double q = std::sqrt(k1 * k1 + k2 * k2);
      double ph = -2.0 * kPi * (k.x * e.cx + k.y * e.cy);
      acc += e.amplitude * e.ax * e.ay * jinc(q) * cd{std::cos(ph), std::sin(ph)};
    }
    out.values[static_cast<size_t>(i)] = acc;
  }
  return out;
}

// Adds circular complex Gaussian noise renormalized so the sample SNR equals
// snr_db exactly. An infinite snr_db is the no-noise sentinel.
inline CoefficientGrid add_noise(const CoefficientGrid& b, double snr_db,
                                 std::uint64_t seed) {
  if (std::isinf(snr_db)) return b;
  if (std::isnan(snr_db)) throw ValidationError("add_noise: snr_db not finite");
  Rng rng(seed);
  std::vector<cd> noise(b.values.size());
  double nn = 0.0, bb = 0.0;
  for (size_t i = 0; i < noise.size(); ++i) {
    auto [g1, g2] = rng.gauss_pair();
    noise[i] = cd{g1, g2};
    nn += std::norm(noise[i]);
    bb += std::norm(b.values[i]);
  }
  double scale =
      std::sqrt(bb) * std::pow(10.0, -snr_db / 20.0) / std::sqrt(nn);
  CoefficientGrid out = b;
  for (size_t i = 0; i < noise.size(); ++i) out.values[i] += scale * noise[i];
  return out;
}

// Spectral derivative weighting: gx[k] = j 2 pi kx f[k], gy likewise.
inline std::pair<CoefficientGrid, CoefficientGrid> derivative_weight(
    const CoefficientGrid& f) {
  CoefficientGrid gx(f.support), gy(f.support);
  for (long i = 0; i < f.support.cardinality(); ++i) {
    Index2 k = f.support.k_at(i);
    gx.values[static_cast<size_t>(i)] =
        kJ * (2.0 * kPi * static_cast<double>(k.x)) * f.values[static_cast<size_t>(i)];
    gy.values[static_cast<size_t>(i)] =
        kJ * (2.0 * kPi * static_cast<double>(k.y)) * f.values[static_cast<size_t>(i)];
  }
  return {std::move(gx), std::move(gy)};
}

// Magnitude-image projection: zero-pad, invert, take moduli, re-transform,
// restrict. Removes smooth phase from complex-valued acquisitions.
inline CoefficientGrid phase_correct(const CoefficientGrid& b,
                                     Index2 pad_dims) {
  if (pad_dims.x < b.support.dims.x || pad_dims.y < b.support.dims.y)
    throw ValidationError("phase_correct: pad_dims smaller than support");
  std::vector<cd> a = embed_dft(b, pad_dims.x, pad_dims.y);
  ifft2_unnormalized(a, pad_dims.x, pad_dims.y);
  for (cd& z : a) z = std::abs(z);
  fft2(a, pad_dims.x, pad_dims.y);
  double norm = 1.0 / (static_cast<double>(pad_dims.x) *
                       static_cast<double>(pad_dims.y));
  for (cd& z : a) z *= norm;
  return extract_dft(a, pad_dims.x, pad_dims.y, b.support);
}

}  // namespace offgrid
