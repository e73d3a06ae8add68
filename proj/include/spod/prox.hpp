#pragma once

#include <Eigen/Dense>

#include "spod/grid_transport.hpp"

namespace spod {

/// Default relative tolerance for counting singular values as nonzero.
inline constexpr double kDefaultRankRelTol = 1e-7;

/// Non-increasing, non-negative singular values.
struct SingularSpectrum {
    Vector values;

    double leading() const { return values.size() > 0 ? values[0] : 0.0; }
    bool is_sorted() const;
};

struct SvtResult {
    Matrix matrix;
    SingularSpectrum spectrum_before;
    SingularSpectrum spectrum_after;
    Eigen::Index rank_after = 0;
};

/// Elementwise sgn(x) * max(0, |x| - tau).
Matrix soft_threshold(const Eigen::Ref<const Matrix>& x, double tau);

/// Proximal operator of tau * nuclear norm: soft-thresholds the thin SVD
/// spectrum and reassembles. rank_after counts with kDefaultRankRelTol.
SvtResult svt(const Eigen::Ref<const Matrix>& x, double tau, double rank_rel_tol = kDefaultRankRelTol);

/// Thin SVD spectrum of x.
SingularSpectrum singular_values(const Eigen::Ref<const Matrix>& x);

double nuclear_norm(const Eigen::Ref<const Matrix>& x);
double l1_norm(const Eigen::Ref<const Matrix>& x);

/// Count of sigma_i > rel_tol * sigma_1 (0 for an all-zero spectrum).
/// Throws ContractError on unsorted or negative input.
Eigen::Index estimate_rank(const SingularSpectrum& spectrum, double rel_tol = kDefaultRankRelTol);

}  // namespace spod
