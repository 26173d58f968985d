#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "offgrid/core.hpp"

namespace offgrid {

// Dense annihilation system [T_x; T_y]. Row block ordering: all x-derivative
// rows first, then all y-derivative rows. Within a block, shifts l run
// row-major over gamma:lambda (x outer, y fastest); patch entries k run
// row-major over lambda. Row l, column k holds j*2pi*(l-k) .x_or_y * f[l-k],
// so matrix * vec(filter) is the valid-region convolution of the filter with
// the derivative-weighted samples.
struct AnnihilationMatrix {
    Eigen::MatrixXcd m;
    IndexRect gamma;
    IndexRect lambda;
    IndexRect shifts;  // contract(gamma, lambda)

    [[nodiscard]] long rows() const { return m.rows(); }
    [[nodiscard]] long cols() const { return m.cols(); }
};

struct AnnihilatingSubspace {
    IndexRect lambda;
    Eigen::MatrixXcd basis;            // M x R, orthonormal columns
    Eigen::VectorXd singular_values;   // full spectrum, descending

    [[nodiscard]] int filter_count() const { return static_cast<int>(basis.cols()); }
};

// Column i of the subspace reshaped onto its filter support.
inline CoefficientGrid filter_grid(const AnnihilatingSubspace& d, int i) {
    if (i < 0 || i >= d.filter_count())
        throw ValidationError("filter_grid: column index out of range");
    CoefficientGrid g(d.lambda);
    for (std::int64_t t = 0; t < d.lambda.cardinality(); ++t)
        g.values[static_cast<std::size_t>(t)] = d.basis(t, i);
    return g;
}

inline AnnihilationMatrix build_annihilation_matrix(const CoefficientGrid& f_hat,
                                                    IndexRect lambda) {
    const IndexRect gamma = f_hat.support;
    const IndexRect shifts = contract(gamma, lambda);
    if (shifts.dims.x <= 0 || shifts.dims.y <= 0)
        throw ValidationError("EmptyContraction: lambda does not fit inside the sample support");

    const std::int64_t n = shifts.cardinality();
    const std::int64_t m = lambda.cardinality();
    AnnihilationMatrix t;
    t.gamma = gamma;
    t.lambda = lambda;
    t.shifts = shifts;
    t.m = Eigen::MatrixXcd::Zero(2 * n, m);

    for (std::int64_t row = 0; row < n; ++row) {
        const Index2 l = shifts.k_at(row);
        for (std::int64_t col = 0; col < m; ++col) {
            const Index2 k = lambda.k_at(col);
            const Index2 d{l.x - k.x, l.y - k.y};
            const cd v = f_hat.at(d);
            t.m(row, col) = kJ * (2.0 * kPi * static_cast<double>(d.x)) * v;
            t.m(n + row, col) = kJ * (2.0 * kPi * static_cast<double>(d.y)) * v;
        }
    }
    return t;
}

// Adjoint of the lifting g -> T(g) in the Frobenius inner product: patch
// entries are accumulated per sample index, then scaled by the conjugated
// derivative weight of that index (x block and y block separately).
inline CoefficientGrid annihilation_adjoint(const Eigen::MatrixXcd& y,
                                            IndexRect gamma, IndexRect lambda) {
    const IndexRect shifts = contract(gamma, lambda);
    const std::int64_t n = shifts.cardinality();
    const std::int64_t m = lambda.cardinality();
    if (y.rows() != 2 * n || y.cols() != m)
        throw ValidationError("annihilation_adjoint: matrix shape does not match gamma/lambda");

    CoefficientGrid outx(gamma);
    CoefficientGrid outy(gamma);
    for (std::int64_t row = 0; row < n; ++row) {
        const Index2 l = shifts.k_at(row);
        for (std::int64_t col = 0; col < m; ++col) {
            const Index2 k = lambda.k_at(col);
            const Index2 d{l.x - k.x, l.y - k.y};
            const std::size_t idx = static_cast<std::size_t>(gamma.index_of(d));
            outx.values[idx] += y(row, col);
            outy.values[idx] += y(n + row, col);
        }
    }
    CoefficientGrid out(gamma);
    for (std::int64_t t = 0; t < gamma.cardinality(); ++t) {
        const Index2 k = gamma.k_at(t);
        const cd wx = std::conj(kJ * (2.0 * kPi * static_cast<double>(k.x)));
        const cd wy = std::conj(kJ * (2.0 * kPi * static_cast<double>(k.y)));
        const std::size_t idx = static_cast<std::size_t>(t);
        out.values[idx] = wx * outx.values[idx] + wy * outy.values[idx];
    }
    return out;
}

// Diagonal of T*T on the sample grid: mult(k) * (2pi)^2 * (kx^2 + ky^2),
// where mult(k) counts (shift, patch-entry) pairs hitting sample k.
inline std::vector<double> annihilation_diag(IndexRect gamma, IndexRect lambda) {
    const IndexRect shifts = contract(gamma, lambda);
    std::vector<double> mult(static_cast<std::size_t>(gamma.cardinality()), 0.0);
    for (std::int64_t row = 0; row < shifts.cardinality(); ++row) {
        const Index2 l = shifts.k_at(row);
        for (std::int64_t col = 0; col < lambda.cardinality(); ++col) {
            const Index2 k = lambda.k_at(col);
            mult[static_cast<std::size_t>(gamma.index_of({l.x - k.x, l.y - k.y}))] += 1.0;
        }
    }
    std::vector<double> diag(mult.size());
    const double w = 4.0 * kPi * kPi;
    for (std::int64_t t = 0; t < gamma.cardinality(); ++t) {
        const Index2 k = gamma.k_at(t);
        const double k2 = static_cast<double>(k.x) * k.x + static_cast<double>(k.y) * k.y;
        diag[static_cast<std::size_t>(t)] = mult[static_cast<std::size_t>(t)] * w * k2;
    }
    return diag;
}

namespace detail {

inline AnnihilatingSubspace nullspace_from_svd(const AnnihilationMatrix& t, std::int64_t rank) {
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(t.m, Eigen::ComputeFullV);
    const std::int64_t m = t.cols();
    AnnihilatingSubspace d;
    d.lambda = t.lambda;
    d.singular_values = svd.singularValues();
    d.basis = svd.matrixV().rightCols(m - rank);
    return d;
}

}  // namespace detail

// rank = assumed rank of the matrix; the trailing M - rank right singular
// vectors form the subspace basis.
inline AnnihilatingSubspace estimate_nullspace_rank(const AnnihilationMatrix& t,
                                                    std::int64_t rank) {
    if (rank < 0 || rank >= t.cols())
        throw ValidationError("RankTooLarge: rank must satisfy 0 <= rank < cols");
    return detail::nullspace_from_svd(t, rank);
}

// Keeps right singular vectors with sigma_i <= rel_tol * sigma_max.
inline AnnihilatingSubspace estimate_nullspace_tol(const AnnihilationMatrix& t,
                                                   double rel_tol) {
    if (!(rel_tol > 0.0) || !(rel_tol < 1.0))
        throw ValidationError("estimate_nullspace_tol: rel_tol must lie in (0,1)");
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(t.m, Eigen::ComputeFullV);
    const Eigen::VectorXd& s = svd.singularValues();
    const double cut = rel_tol * (s.size() > 0 ? s(0) : 0.0);
    std::int64_t rank = 0;
    while (rank < s.size() && s(rank) > cut) ++rank;
    AnnihilatingSubspace d;
    d.lambda = t.lambda;
    d.singular_values = s;
    d.basis = svd.matrixV().rightCols(t.cols() - rank);
    return d;
}

inline AnnihilatingSubspace estimate_nullspace(const AnnihilationMatrix& t) {
    return estimate_nullspace_tol(t, 1e-4);
}

// Heuristic model order: filter support = half the sample support per axis,
// assumed rank = half the filter coefficient count.
inline std::pair<Index2, std::int64_t> default_model_order(Index2 gamma_dims) {
    if (gamma_dims.x < 4 || gamma_dims.y < 4)
        throw ValidationError("default_model_order: sample support must be at least 4x4");
    const Index2 lam{gamma_dims.x / 2, gamma_dims.y / 2};
    return {lam, (lam.x * lam.y) / 2};
}

// Alternating minimization for min_{g,X, rank X <= r} |g-b|^2 + reg*|T(g)-X|^2:
// (i) X = rank-r SVD truncation of T(g); (ii) elementwise quadratic update
// g = (b + reg*T*(X)) / (1 + reg*diag(T*T)). The DC sample has zero diagonal
// weight and zero adjoint weight, so its update is g[0,0] = b[0,0].
inline std::pair<CoefficientGrid, std::vector<double>> structured_lowrank_denoise(
    const CoefficientGrid& b, IndexRect lambda, std::int64_t rank, double reg, int iters) {
    if (rank < 1) throw ValidationError("structured_lowrank_denoise: rank must be >= 1");
    if (!(reg > 0.0)) throw ValidationError("structured_lowrank_denoise: reg must be positive");
    if (iters < 1) throw ValidationError("structured_lowrank_denoise: iters must be >= 1");

    const IndexRect gamma = b.support;
    const std::vector<double> diag = annihilation_diag(gamma, lambda);
    CoefficientGrid g = b;
    std::vector<double> cost;
    cost.reserve(static_cast<std::size_t>(iters));

    AnnihilationMatrix t = build_annihilation_matrix(g, lambda);
    for (int it = 0; it < iters; ++it) {
        Eigen::BDCSVD<Eigen::MatrixXcd> svd(t.m, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const std::int64_t keep = std::min<std::int64_t>(rank, svd.singularValues().size());
        const Eigen::MatrixXcd x = svd.matrixU().leftCols(keep) *
                                   svd.singularValues().head(keep).asDiagonal() *
                                   svd.matrixV().leftCols(keep).adjoint();

        const CoefficientGrid tx = annihilation_adjoint(x, gamma, lambda);
        for (std::int64_t i = 0; i < gamma.cardinality(); ++i) {
            const std::size_t idx = static_cast<std::size_t>(i);
            g.values[idx] = (b.values[idx] + reg * tx.values[idx]) / (1.0 + reg * diag[idx]);
        }

        t = build_annihilation_matrix(g, lambda);
        double fit = 0.0;
        for (std::size_t i = 0; i < g.values.size(); ++i)
            fit += std::norm(g.values[i] - b.values[i]);
        cost.push_back(fit + reg * (t.m - x).squaredNorm());
    }
    return {std::move(g), std::move(cost)};
}

}  // namespace offgrid
