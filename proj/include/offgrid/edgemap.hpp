#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "offgrid/annihilation.hpp"
#include "offgrid/core.hpp"
#include "offgrid/fft.hpp"
#include "offgrid/trigpoly.hpp"

namespace offgrid {

// Nonnegative spatial weights sampled from the edge polynomial.
using EdgeWeightGrid = ImageGrid;

// Coefficients of the squared edge polynomial: the sum over subspace columns
// of the autocorrelation of each filter, supported on the difference set of
// the filter support. Computed by gridding each filter, accumulating squared
// modulus, and one forward transform of the power grid.
inline TrigPoly sos_coefficients(const AnnihilatingSubspace& d) {
    if (d.filter_count() < 1) throw ValidationError("EmptySubspace: no filters");
    const IndexRect lam = d.lambda;
    const int nx = 2 * static_cast<int>(lam.dims.x);
    const int ny = 2 * static_cast<int>(lam.dims.y);

    std::vector<double> power(static_cast<std::size_t>(nx) * ny, 0.0);
    for (int i = 0; i < d.filter_count(); ++i) {
        CoefficientGrid f = filter_grid(d, i);
        std::vector<cd> v = embed_dft(f, nx, ny);
        ifft2_unnormalized(v, nx, ny);
        for (std::size_t t = 0; t < power.size(); ++t) power[t] += std::norm(v[t]);
    }

    std::vector<cd> spec(power.begin(), power.end());
    fft2(spec, nx, ny);
    const double inv = 1.0 / (static_cast<double>(nx) * ny);
    for (auto& z : spec) z *= inv;

    IndexRect diff{{-(lam.dims.x - 1), -(lam.dims.y - 1)},
                   {2 * lam.dims.x - 1, 2 * lam.dims.y - 1}};
    CoefficientGrid c = extract_dft(spec, nx, ny, diff);
    TrigPoly out(diff);
    out.c = std::move(c.values);
    return out;
}

// Samples of the squared edge polynomial, clamped nonnegative; optionally
// scaled so the maximum equals one.
inline EdgeWeightGrid sos_grid(const AnnihilatingSubspace& d, Index2 grid_dims,
                               bool normalize = false) {
    TrigPoly sos = sos_coefficients(d);
    if (grid_dims.x < sos.support.dims.x || grid_dims.y < sos.support.dims.y)
        throw ValidationError("GridTooSmall: grid must cover the difference-set support");

    ImageGridC g = grid_evaluate(sos, grid_dims.x, grid_dims.y);
    EdgeWeightGrid w(grid_dims.x, grid_dims.y);
    double mx = 0.0;
    for (std::size_t t = 0; t < w.v.size(); ++t) {
        const double val = std::max(0.0, g.v[t].real());
        w.v[t] = val;
        mx = std::max(mx, val);
    }
    if (normalize && mx > 0.0)
        for (auto& val : w.v) val /= mx;
    return w;
}

// Norm of the projection of the steering vector at r onto the subspace;
// equals sqrt of the squared edge polynomial at r. The steering phase is
// conjugate to the evaluation convention so the identity holds exactly.
inline double music_projection(const AnnihilatingSubspace& d, double x, double y) {
    const int r = d.filter_count();
    if (r == 0) return 0.0;
    const IndexRect lam = d.lambda;
    Eigen::VectorXcd e(lam.cardinality());
    for (std::int64_t t = 0; t < lam.cardinality(); ++t) {
        const Index2 k = lam.k_at(t);
        const double ph = -2.0 * kPi * (k.x * x + k.y * y);
        e(t) = cd{std::cos(ph), std::sin(ph)};
    }
    return (d.basis.adjoint() * e).norm();
}

}  // namespace offgrid
