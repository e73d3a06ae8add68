#include "spod/prox.hpp"

#include <cmath>

#include <Eigen/SVD>

#include "spod/errors.hpp"

namespace spod {

namespace {

using Svd = Eigen::BDCSVD<Matrix>;

Svd thin_svd(const Eigen::Ref<const Matrix>& x, bool with_vectors) {
    if (!x.allFinite())
        throw NumericalError("SVD: input contains non-finite entries");
    const unsigned options = with_vectors ? (Eigen::ComputeThinU | Eigen::ComputeThinV) : 0u;
    Svd svd(x, options);
    if (svd.info() != Eigen::Success)
        throw NumericalError("SVD: decomposition failed");
    return svd;
}

}  // namespace

bool SingularSpectrum::is_sorted() const {
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        if (!(values[i] >= 0.0)) return false;
        if (i > 0 && values[i] > values[i - 1]) return false;
    }
    return true;
}

Matrix soft_threshold(const Eigen::Ref<const Matrix>& x, double tau) {
    if (!(tau >= 0.0))
        throw DomainError("soft_threshold: threshold must be non-negative");
    return x.unaryExpr([tau](double v) {
        const double mag = std::abs(v) - tau;
        return mag > 0.0 ? std::copysign(mag, v) : 0.0;
    });
}

SvtResult svt(const Eigen::Ref<const Matrix>& x, double tau, double rank_rel_tol) {
    if (!(tau >= 0.0))
        throw DomainError("svt: threshold must be non-negative");
    const Svd svd = thin_svd(x, true);

    SvtResult out;
    out.spectrum_before.values = svd.singularValues();
    out.spectrum_after.values = (out.spectrum_before.values.array() - tau).cwiseMax(0.0).matrix();

    // Thresholded values are exactly zero, so the kept block is a prefix.
    Eigen::Index keep = 0;
    while (keep < out.spectrum_after.values.size() && out.spectrum_after.values[keep] > 0.0) ++keep;

    out.matrix = svd.matrixU().leftCols(keep) *
                 out.spectrum_after.values.head(keep).asDiagonal() *
                 svd.matrixV().leftCols(keep).transpose();
    out.rank_after = estimate_rank(out.spectrum_after, rank_rel_tol);
    return out;
}

SingularSpectrum singular_values(const Eigen::Ref<const Matrix>& x) {
    return SingularSpectrum{thin_svd(x, false).singularValues()};
}

double nuclear_norm(const Eigen::Ref<const Matrix>& x) {
    if (x.size() == 0) return 0.0;
    return singular_values(x).values.sum();
}

double l1_norm(const Eigen::Ref<const Matrix>& x) { return x.cwiseAbs().sum(); }

Eigen::Index estimate_rank(const SingularSpectrum& spectrum, double rel_tol) {
    if (!(rel_tol > 0.0))
        throw DomainError("estimate_rank: relative tolerance must be positive");
    if (!spectrum.is_sorted())
        throw ContractError("estimate_rank: spectrum must be non-negative and non-increasing");
    const double lead = spectrum.leading();
    if (lead == 0.0) return 0;
    const double cutoff = rel_tol * lead;
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < spectrum.values.size(); ++i)
        if (spectrum.values[i] > cutoff) ++rank;
    return rank;
}

}  // namespace spod
