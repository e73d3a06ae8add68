#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace spod {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Number of nodes in the interpolation stencil (degree 5 Lagrange).
inline constexpr int kStencilSize = 6;

/// Offset of the leftmost stencil node relative to floor(target index).
inline constexpr int kStencilLeft = -2;

/// Uniform periodic 1D grid. Point i sits at x_min + i * dx.
struct SpatialGrid {
    Eigen::Index m_points = 0;
    double x_min = 0.0;
    double dx = 1.0;
    bool periodic = true;

    /// M points uniformly spanning [a, b) with the right endpoint excluded.
    static SpatialGrid uniform(Eigen::Index m, double a, double b);

    double coordinate(Eigen::Index i) const { return x_min + static_cast<double>(i) * dx; }
    double length() const { return static_cast<double>(m_points) * dx; }

    /// Throws DomainError unless dx > 0, M >= kStencilSize and the grid is periodic.
    void validate() const;
};

/// Space-time data: column n is the state at times[n].
struct SnapshotMatrix {
    Matrix values;
    SpatialGrid grid;
    std::vector<double> times;

    void validate() const;
    Eigen::Index rows() const { return values.rows(); }
    Eigen::Index cols() const { return values.cols(); }
};

/// Six-point stencil: node base_index + j (mod M) carries weights[j].
struct StencilWeights {
    Eigen::Index base_index = 0;
    std::array<double, kStencilSize> weights{};
};

/// Lagrange basis values on nodes {-2,-1,0,1,2,3} evaluated at f in [0,1).
std::array<double, kStencilSize> lagrange_weights(double f);

/// Stencil that evaluates a periodic grid function at the (possibly
/// fractional, possibly out of range) index `target`. Targets within a few
/// ulps of an integer snap to it so lattice shifts stay exact permutations.
StencilWeights stencil_at(double target, Eigen::Index m_points);

/// out[m] = q(x_m - delta), interpolated with periodic wrap.
Vector apply_shift(const Eigen::Ref<const Vector>& q, double delta, const SpatialGrid& grid);

/// Shift trajectory of one co-moving frame, stored in physical units.
class TransportOperator {
public:
    TransportOperator() = default;
    TransportOperator(std::vector<double> shifts, SpatialGrid grid);

    std::span<const double> shifts() const { return shifts_; }
    const SpatialGrid& grid() const { return grid_; }
    std::size_t size() const { return shifts_.size(); }

    /// Column n becomes q(x - shifts[n]).
    Matrix forward(const Eigen::Ref<const Matrix>& q) const;
    /// Column n becomes q(x + shifts[n]). Also used as the adjoint surrogate.
    Matrix backward(const Eigen::Ref<const Matrix>& q) const;

private:
    Matrix apply(const Eigen::Ref<const Matrix>& q, double sign) const;

    std::vector<double> shifts_;
    SpatialGrid grid_;
};

Matrix transport_forward(const Eigen::Ref<const Matrix>& q, const TransportOperator& op);
Matrix transport_backward(const Eigen::Ref<const Matrix>& q, const TransportOperator& op);

}  // namespace spod
