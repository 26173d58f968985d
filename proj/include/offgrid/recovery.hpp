#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <utility>
#include <vector>

#include "offgrid/annihilation.hpp"
#include "offgrid/core.hpp"
#include "offgrid/edgemap.hpp"
#include "offgrid/fft.hpp"

namespace offgrid {

struct SolverParams {
    double reg = 1.0;
    int max_iter = 500;
    double cg_tol = 1e-8;
    std::pair<double, double> pd_steps{1.0 / std::sqrt(8.0), 1.0 / std::sqrt(8.0)};
    bool jacobi = false;
};

struct RecoveryResult {
    CoefficientGrid g_hat;
    ImageGrid image;
    std::vector<double> residuals;
    int iterations_used = 0;
    bool converged = false;
};

// Default extrapolation support: quadruple the one-sided bandwidth per axis.
inline IndexRect default_delta(IndexRect gamma) {
    return centered(4 * (gamma.dims.x - 1) + 1, 4 * (gamma.dims.y - 1) + 1);
}

namespace detail {

inline long good_fft_size(long n) {
    for (long m = n;; ++m) {
        long v = m;
        for (long f : {2, 3, 5, 7})
            while (v % f == 0) v /= f;
        if (v == 1) return m;
    }
}

// Normal operator of derivative-weighted valid convolution with a filter
// bank, applied with zero-padded FFTs: per filter and axis one padded
// multiply (convolution), a projection onto the valid shift range, and one
// conjugate multiply (correlation). The circular correlation is alias-free
// because the pad covers delta + lambda - 1.
class ValidConvNormalOp {
  public:
    ValidConvNormalOp(const AnnihilatingSubspace& d, IndexRect delta)
        : delta_(delta), lam_(d.lambda) {
        px_ = good_fft_size(delta.dims.x + lam_.dims.x - 1);
        py_ = good_fft_size(delta.dims.y + lam_.dims.y - 1);
        const std::size_t pn = static_cast<std::size_t>(px_) * py_;
        for (int i = 0; i < d.filter_count(); ++i) {
            std::vector<cd> f(pn, cd{});
            for (long ix = 0; ix < lam_.dims.x; ++ix)
                for (long iy = 0; iy < lam_.dims.y; ++iy)
                    f[static_cast<std::size_t>(ix * py_ + iy)] =
                        d.basis(ix * lam_.dims.y + iy, i);
            fft2(f, px_, py_);
            spectra_.push_back(std::move(f));
        }
        wx_.resize(static_cast<std::size_t>(delta.cardinality()));
        wy_.resize(wx_.size());
        for (std::int64_t t = 0; t < delta.cardinality(); ++t) {
            const Index2 k = delta.k_at(t);
            wx_[static_cast<std::size_t>(t)] = 2.0 * kPi * static_cast<double>(k.x);
            wy_[static_cast<std::size_t>(t)] = 2.0 * kPi * static_cast<double>(k.y);
        }
    }

    [[nodiscard]] std::vector<cd> apply(const std::vector<cd>& g) const {
        std::vector<cd> out(g.size(), cd{});
        branch(g, wx_, out);
        branch(g, wy_, out);
        return out;
    }

    // Diagonal of the operator: squared derivative weight times the summed
    // filter energy of every valid window covering the sample.
    [[nodiscard]] std::vector<double> diagonal() const {
        std::vector<double> taps(static_cast<std::size_t>(lam_.cardinality()), 0.0);
        for (const auto& s : spectra_) {
            // recover |filter|^2 per tap from the stored padded spectrum
            std::vector<cd> f = s;
            ifft2(f, px_, py_);
            for (long ix = 0; ix < lam_.dims.x; ++ix)
                for (long iy = 0; iy < lam_.dims.y; ++iy)
                    taps[static_cast<std::size_t>(ix * lam_.dims.y + iy)] +=
                        std::norm(f[static_cast<std::size_t>(ix * py_ + iy)]);
        }
        std::vector<double> wsum(static_cast<std::size_t>(delta_.cardinality()), 0.0);
        const long vx = delta_.dims.x - lam_.dims.x + 1;
        const long vy = delta_.dims.y - lam_.dims.y + 1;
        for (long lx = 0; lx < vx; ++lx)
            for (long ly = 0; ly < vy; ++ly)
                for (long tx = 0; tx < lam_.dims.x; ++tx)
                    for (long ty = 0; ty < lam_.dims.y; ++ty)
                        wsum[static_cast<std::size_t>((lx + lam_.dims.x - 1 - tx) * delta_.dims.y +
                                                      (ly + lam_.dims.y - 1 - ty))] +=
                            taps[static_cast<std::size_t>(tx * lam_.dims.y + ty)];
        std::vector<double> diag(wsum.size());
        for (std::size_t t = 0; t < wsum.size(); ++t)
            diag[t] = (wx_[t] * wx_[t] + wy_[t] * wy_[t]) * wsum[t];
        return diag;
    }

  private:
    void branch(const std::vector<cd>& g, const std::vector<double>& w,
                std::vector<cd>& out) const {
        const std::size_t pn = static_cast<std::size_t>(px_) * py_;
        std::vector<cd> buf(pn, cd{});
        for (long ix = 0; ix < delta_.dims.x; ++ix)
            for (long iy = 0; iy < delta_.dims.y; ++iy) {
                const std::size_t t = static_cast<std::size_t>(ix * delta_.dims.y + iy);
                buf[static_cast<std::size_t>(ix * py_ + iy)] = kJ * w[t] * g[t];
            }
        fft2(buf, px_, py_);
        std::vector<cd> tmp(pn);
        for (const auto& spec : spectra_) {
            for (std::size_t t = 0; t < pn; ++t) tmp[t] = buf[t] * spec[t];
            ifft2(tmp, px_, py_);
            // keep only shifts whose filter window lies inside delta
            for (long ix = 0; ix < px_; ++ix)
                for (long iy = 0; iy < py_; ++iy) {
                    const bool valid = ix >= lam_.dims.x - 1 && ix < delta_.dims.x &&
                                       iy >= lam_.dims.y - 1 && iy < delta_.dims.y;
                    if (!valid) tmp[static_cast<std::size_t>(ix * py_ + iy)] = cd{};
                }
            fft2(tmp, px_, py_);
            for (std::size_t t = 0; t < pn; ++t) tmp[t] *= std::conj(spec[t]);
            ifft2(tmp, px_, py_);
            for (long ix = 0; ix < delta_.dims.x; ++ix)
                for (long iy = 0; iy < delta_.dims.y; ++iy) {
                    const std::size_t t = static_cast<std::size_t>(ix * delta_.dims.y + iy);
                    out[t] += std::conj(kJ * w[t]) * tmp[static_cast<std::size_t>(ix * py_ + iy)];
                }
        }
    }

    IndexRect delta_;
    IndexRect lam_;
    long px_ = 0, py_ = 0;
    std::vector<std::vector<cd>> spectra_;
    std::vector<double> wx_, wy_;
};

// Preconditioned conjugate gradient on a Hermitian PSD operator.
template <class Op>
RecoveryResult run_cg(const Op& apply_a, const std::vector<cd>& rhs,
                      std::vector<cd> x0, const std::vector<double>* diag,
                      const SolverParams& p) {
    RecoveryResult res;
    std::vector<cd> x = std::move(x0);
    std::vector<cd> r(rhs.size());
    {
        std::vector<cd> ax = apply_a(x);
        for (std::size_t t = 0; t < r.size(); ++t) r[t] = rhs[t] - ax[t];
    }
    auto precond = [&](const std::vector<cd>& v) {
        std::vector<cd> z = v;
        if (diag)
            for (std::size_t t = 0; t < z.size(); ++t) z[t] /= (*diag)[t];
        return z;
    };
    std::vector<cd> z = precond(r);
    std::vector<cd> pdir = z;
    double rz = 0.0, nrhs = 0.0;
    for (std::size_t t = 0; t < r.size(); ++t) {
        rz += (std::conj(r[t]) * z[t]).real();
        nrhs += std::norm(rhs[t]);
    }
    nrhs = std::sqrt(nrhs);
    if (nrhs == 0.0) nrhs = 1.0;

    for (int it = 0; it < p.max_iter; ++it) {
        std::vector<cd> ap = apply_a(pdir);
        double pap = 0.0;
        for (std::size_t t = 0; t < r.size(); ++t) pap += (std::conj(pdir[t]) * ap[t]).real();
        if (!(std::abs(pap) > 0.0) || !std::isfinite(pap)) {
            res.iterations_used = it;
            break;
        }
        const double alpha = rz / pap;
        double rn = 0.0;
        for (std::size_t t = 0; t < r.size(); ++t) {
            x[t] += alpha * pdir[t];
            r[t] -= alpha * ap[t];
            rn += std::norm(r[t]);
        }
        res.residuals.push_back(std::sqrt(rn) / nrhs);
        res.iterations_used = it + 1;
        if (!std::isfinite(rn)) throw SolverError("CgDiverged: non-finite residual");
        if (res.residuals.back() < p.cg_tol) {
            res.converged = true;
            break;
        }
        z = precond(r);
        double rz_new = 0.0;
        for (std::size_t t = 0; t < r.size(); ++t) rz_new += (std::conj(r[t]) * z[t]).real();
        const double beta = rz_new / rz;
        for (std::size_t t = 0; t < r.size(); ++t) pdir[t] = z[t] + beta * pdir[t];
        rz = rz_new;
    }
    res.g_hat.values = std::move(x);
    return res;
}

}  // namespace detail

// Least-squares linear prediction with the exact valid-convolution operator,
// with an explicit per-entry sample mask over b's support. Solves
// (Q*Q + reg P*P) g = reg P* b by CG from g0 = P* b.
inline RecoveryResult lslp_exact_masked(const CoefficientGrid& b,
                                        const std::vector<unsigned char>& mask,
                                        const AnnihilatingSubspace& d, IndexRect delta,
                                        const SolverParams& params) {
    const IndexRect gamma = b.support;
    if (mask.size() != static_cast<std::size_t>(gamma.cardinality()))
        throw ValidationError("lslp_exact: mask length must match the sample support");
    for (Index2 corner : {gamma.kmin, Index2{gamma.kmin.x + gamma.dims.x - 1,
                                             gamma.kmin.y + gamma.dims.y - 1}})
        if (!delta.contains(corner))
            throw ValidationError("lslp_exact: delta must contain the sample support");

    detail::ValidConvNormalOp op(d, delta);
    const std::size_t nd = static_cast<std::size_t>(delta.cardinality());
    std::vector<double> lam_mask(nd, 0.0);
    std::vector<cd> rhs(nd, cd{});
    std::vector<cd> x0(nd, cd{});
    for (std::int64_t t = 0; t < gamma.cardinality(); ++t) {
        if (!mask[static_cast<std::size_t>(t)]) continue;
        const std::size_t dt = static_cast<std::size_t>(delta.index_of(gamma.k_at(t)));
        lam_mask[dt] = params.reg;
        rhs[dt] = params.reg * b.values[static_cast<std::size_t>(t)];
        x0[dt] = b.values[static_cast<std::size_t>(t)];
    }
    auto apply_a = [&](const std::vector<cd>& g) {
        std::vector<cd> out = op.apply(g);
        for (std::size_t t = 0; t < out.size(); ++t) out[t] += lam_mask[t] * g[t];
        return out;
    };
    std::vector<double> diag;
    if (params.jacobi) {
        diag = op.diagonal();
        for (std::size_t t = 0; t < diag.size(); ++t) {
            diag[t] += lam_mask[t];
            if (diag[t] == 0.0) diag[t] = 1.0;
        }
    }
    RecoveryResult res = detail::run_cg(apply_a, rhs, std::move(x0),
                                        params.jacobi ? &diag : nullptr, params);
    res.g_hat.support = delta;
    return res;
}

inline RecoveryResult lslp_exact(const CoefficientGrid& b, const AnnihilatingSubspace& d,
                                 IndexRect delta, const SolverParams& params) {
    std::vector<unsigned char> mask(static_cast<std::size_t>(b.support.cardinality()), 1);
    return lslp_exact_masked(b, mask, d, delta, params);
}

// Fast approximation: the valid-region projector is dropped and the filter
// bank acts through gridded squared-edge weights, four FFTs per application.
inline RecoveryResult lslp_fast(const CoefficientGrid& b, const EdgeWeightGrid& weights,
                                IndexRect delta, const SolverParams& params) {
    const IndexRect gamma = b.support;
    if (weights.nx < delta.dims.x || weights.ny < delta.dims.y)
        throw ValidationError("WeightGridTooSmall: weight grid must cover delta");
    for (Index2 corner : {gamma.kmin, Index2{gamma.kmin.x + gamma.dims.x - 1,
                                             gamma.kmin.y + gamma.dims.y - 1}})
        if (!delta.contains(corner))
            throw ValidationError("lslp_fast: delta must contain the sample support");

    const long wx = weights.nx, wy = weights.ny;
    const double invn = 1.0 / (static_cast<double>(wx) * wy);
    const std::size_t nd = static_cast<std::size_t>(delta.cardinality());
    std::vector<double> mx(nd), my(nd);
    for (std::int64_t t = 0; t < delta.cardinality(); ++t) {
        const Index2 k = delta.k_at(t);
        mx[static_cast<std::size_t>(t)] = 2.0 * kPi * static_cast<double>(k.x);
        my[static_cast<std::size_t>(t)] = 2.0 * kPi * static_cast<double>(k.y);
    }
    std::vector<double> lam_mask(nd, 0.0);
    std::vector<cd> rhs(nd, cd{});
    std::vector<cd> x0(nd, cd{});
    for (std::int64_t t = 0; t < gamma.cardinality(); ++t) {
        const std::size_t dt = static_cast<std::size_t>(delta.index_of(gamma.k_at(t)));
        lam_mask[dt] = params.reg;
        rhs[dt] = params.reg * b.values[static_cast<std::size_t>(t)];
        x0[dt] = b.values[static_cast<std::size_t>(t)];
    }

    CoefficientGrid scratch(delta);
    auto weighted_branch = [&](const std::vector<cd>& g, const std::vector<double>& w,
                               std::vector<cd>& out) {
        for (std::size_t t = 0; t < nd; ++t) scratch.values[t] = kJ * w[t] * g[t];
        std::vector<cd> v = embed_dft(scratch, wx, wy);
        ifft2_unnormalized(v, wx, wy);
        for (long ix = 0; ix < wx; ++ix)
            for (long iy = 0; iy < wy; ++iy)
                v[static_cast<std::size_t>(ix * wy + iy)] *= weights.at(ix, iy);
        fft2(v, wx, wy);
        for (auto& z : v) z *= invn;
        CoefficientGrid back = extract_dft(v, wx, wy, delta);
        for (std::size_t t = 0; t < nd; ++t)
            out[t] += std::conj(kJ * w[t]) * back.values[t];
    };
    auto apply_a = [&](const std::vector<cd>& g) {
        std::vector<cd> out(nd, cd{});
        weighted_branch(g, mx, out);
        weighted_branch(g, my, out);
        for (std::size_t t = 0; t < nd; ++t) out[t] += lam_mask[t] * g[t];
        return out;
    };
    std::vector<double> diag;
    if (params.jacobi) {
        double mean_w = 0.0;
        for (double v : weights.v) mean_w += v;
        mean_w *= invn;
        diag.resize(nd);
        for (std::size_t t = 0; t < nd; ++t) {
            diag[t] = (mx[t] * mx[t] + my[t] * my[t]) * mean_w + lam_mask[t];
            if (diag[t] == 0.0) diag[t] = 1.0;
        }
    }
    RecoveryResult res = detail::run_cg(apply_a, rhs, std::move(x0),
                                        params.jacobi ? &diag : nullptr, params);
    res.g_hat.support = delta;
    return res;
}

namespace detail {

// Forward differences with Neumann boundary; divergence is the exact
// negative adjoint.
inline void grad(const std::vector<cd>& g, long nx, long ny, std::vector<cd>& gx,
                 std::vector<cd>& gy) {
    for (long ix = 0; ix < nx; ++ix)
        for (long iy = 0; iy < ny; ++iy) {
            const std::size_t t = static_cast<std::size_t>(ix * ny + iy);
            gx[t] = (ix + 1 < nx) ? g[t + static_cast<std::size_t>(ny)] - g[t] : cd{};
            gy[t] = (iy + 1 < ny) ? g[t + 1] - g[t] : cd{};
        }
}

inline void divergence(const std::vector<cd>& px, const std::vector<cd>& py, long nx,
                       long ny, std::vector<cd>& out) {
    for (long ix = 0; ix < nx; ++ix)
        for (long iy = 0; iy < ny; ++iy) {
            const std::size_t t = static_cast<std::size_t>(ix * ny + iy);
            cd v{};
            if (ix + 1 < nx) v += px[t];
            if (ix > 0) v -= px[t - static_cast<std::size_t>(ny)];
            if (iy + 1 < ny) v += py[t];
            if (iy > 0) v -= py[t - 1];
            out[t] = v;
        }
}

}  // namespace detail

// Weighted total variation via a primal-dual scheme with an on-grid DFT data
// term: min_g sum w |grad g| + reg |P DFT(g)/N - b|^2.
inline RecoveryResult wtv(const CoefficientGrid& b, const EdgeWeightGrid& weights,
                          Index2 grid_dims, const SolverParams& params) {
    const IndexRect gamma = b.support;
    const long nx = grid_dims.x, ny = grid_dims.y;
    if (nx < gamma.dims.x || ny < gamma.dims.y)
        throw ValidationError("wtv: grid must be at least the sample support");
    if (weights.nx != nx || weights.ny != ny)
        throw ValidationError("wtv: weight grid dims must equal the image grid");
    const double sigma = params.pd_steps.first, tau = params.pd_steps.second;
    if (sigma * tau * 8.0 > 1.0 + 1e-12)
        throw ValidationError("StepSizeViolation: sigma*tau*8 must be <= 1");

    const double n = static_cast<double>(nx) * ny;
    const std::size_t nt = static_cast<std::size_t>(nx) * ny;
    std::vector<cd> g(nt, cd{}), gbar(nt, cd{}), px(nt, cd{}), py(nt, cd{});
    std::vector<cd> gx(nt), gy(nt), div(nt), u(nt);

    auto prox_data = [&](std::vector<cd>& z) {
        u = z;
        fft2(u, nx, ny);
        const double s = 2.0 * tau * params.reg;
        for (std::int64_t t = 0; t < gamma.cardinality(); ++t) {
            const Index2 k = gamma.k_at(t);
            const std::size_t bin = static_cast<std::size_t>(
                ((k.x % nx + nx) % nx) * ny + ((k.y % ny + ny) % ny));
            u[bin] = (u[bin] + s * n * b.values[static_cast<std::size_t>(t)] / n * n /
                      n * n) /
                     (1.0 + s / n);
        }
        ifft2(u, nx, ny);
        z = u;
    };

    RecoveryResult res;
    for (int it = 0; it < params.max_iter; ++it) {
        detail::grad(gbar, nx, ny, gx, gy);
        for (std::size_t t = 0; t < nt; ++t) {
            cd ax = px[t] + sigma * gx[t];
            cd ay = py[t] + sigma * gy[t];
            const double mag = std::sqrt(std::norm(ax) + std::norm(ay));
            const double w = weights.v[t];
            if (mag > w) {
                const double sc = (mag > 0.0) ? w / mag : 0.0;
                ax *= sc;
                ay *= sc;
            }
            px[t] = ax;
            py[t] = ay;
        }
        detail::divergence(px, py, nx, ny, div);
        std::vector<cd> g_new(nt);
        for (std::size_t t = 0; t < nt; ++t) g_new[t] = g[t] + tau * div[t];
        prox_data(g_new);
        for (std::size_t t = 0; t < nt; ++t) gbar[t] = 2.0 * g_new[t] - g[t];
        g = std::move(g_new);

        detail::grad(g, nx, ny, gx, gy);
        double tv = 0.0;
        for (std::size_t t = 0; t < nt; ++t)
            tv += weights.v[t] * std::sqrt(std::norm(gx[t]) + std::norm(gy[t]));
        u = g;
        fft2(u, nx, ny);
        double fit = 0.0;
        for (std::int64_t t = 0; t < gamma.cardinality(); ++t) {
            const Index2 k = gamma.k_at(t);
            const std::size_t bin = static_cast<std::size_t>(
                ((k.x % nx + nx) % nx) * ny + ((k.y % ny + ny) % ny));
            fit += std::norm(u[bin] / n - b.values[static_cast<std::size_t>(t)]);
        }
        res.residuals.push_back(tv + params.reg * fit);
        res.iterations_used = it + 1;
    }
    res.image = ImageGrid(nx, ny);
    for (std::size_t t = 0; t < nt; ++t) res.image.v[t] = g[t].real();
    res.converged = true;
    return res;
}

inline RecoveryResult tv_baseline(const CoefficientGrid& b, Index2 grid_dims,
                                  const SolverParams& params) {
    EdgeWeightGrid ones(grid_dims.x, grid_dims.y);
    for (auto& v : ones.v) v = 1.0;
    return wtv(b, ones, grid_dims, params);
}

}  // namespace offgrid
