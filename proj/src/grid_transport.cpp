#include "spod/grid_transport.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "spod/errors.hpp"

namespace spod {

SpatialGrid SpatialGrid::uniform(Eigen::Index m, double a, double b) {
    if (m <= 0 || !(b > a))
        throw DomainError("SpatialGrid::uniform: need m > 0 and b > a");
    return SpatialGrid{m, a, (b - a) / static_cast<double>(m), true};
}

void SpatialGrid::validate() const {
    if (!(dx > 0.0) || !std::isfinite(dx))
        throw DomainError("SpatialGrid: lattice spacing must be positive and finite");
    if (m_points < kStencilSize)
        throw DomainError("SpatialGrid: need at least " + std::to_string(kStencilSize) +
                          " points for the interpolation stencil, got " + std::to_string(m_points));
    if (!periodic)
        throw DomainError("SpatialGrid: only periodic grids are supported");
}

void SnapshotMatrix::validate() const {
    grid.validate();
    if (values.rows() != grid.m_points)
        throw ShapeError("SnapshotMatrix: row count does not match grid size");
    if (static_cast<std::size_t>(values.cols()) != times.size())
        throw ShapeError("SnapshotMatrix: column count does not match number of time samples");
    for (std::size_t n = 1; n < times.size(); ++n)
        if (!(times[n] > times[n - 1]))
            throw DomainError("SnapshotMatrix: time samples must be strictly increasing");
    if (!values.allFinite())
        throw DomainError("SnapshotMatrix: values must be finite");
}

std::array<double, kStencilSize> lagrange_weights(double f) {
    if (!(f >= 0.0 && f < 1.0))
        throw DomainError("lagrange_weights: fractional offset must lie in [0,1)");
    // Product form with the common factors pulled out; nodes are -2..3.
    const double fm2 = f + 2.0, fm1 = f + 1.0, f0 = f, f1 = f - 1.0, f2 = f - 2.0, f3 = f - 3.0;
    return {
        -(fm1 * f0 * f1 * f2 * f3) / 120.0,
        (fm2 * f0 * f1 * f2 * f3) / 24.0,
        -(fm2 * fm1 * f1 * f2 * f3) / 12.0,
        (fm2 * fm1 * f0 * f2 * f3) / 12.0,
        -(fm2 * fm1 * f0 * f1 * f3) / 24.0,
        (fm2 * fm1 * f0 * f1 * f2) / 120.0,
    };
}

StencilWeights stencil_at(double target, Eigen::Index m_points) {
    if (!std::isfinite(target))
        throw DomainError("stencil_at: non-finite target index");
    const double m = static_cast<double>(m_points);
    double wrapped = std::fmod(target, m);
    if (wrapped < 0.0) wrapped += m;

    const double nearest = std::round(wrapped);
    const double snap_tol = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(target));
    double base = 0.0;
    double frac = 0.0;
    if (std::abs(wrapped - nearest) <= snap_tol) {
        base = nearest;
    } else {
        base = std::floor(wrapped);
        frac = wrapped - base;
        if (frac >= 1.0) {  // round-off at the upper edge
            base += 1.0;
            frac = 0.0;
        }
    }
    auto ibase = static_cast<Eigen::Index>(base) % m_points;

    StencilWeights sw;
    sw.base_index = ((ibase + kStencilLeft) % m_points + m_points) % m_points;
    sw.weights = lagrange_weights(frac);
    return sw;
}

Vector apply_shift(const Eigen::Ref<const Vector>& q, double delta, const SpatialGrid& grid) {
    if (!(grid.dx > 0.0) || !std::isfinite(grid.dx) || grid.m_points <= 0 || !grid.periodic)
        throw DomainError("apply_shift: need a periodic grid with positive spacing");
    if (q.size() != grid.m_points)
        throw ShapeError("apply_shift: vector length does not match grid size");
    if (!std::isfinite(delta))
        throw DomainError("apply_shift: non-finite shift");

    const Eigen::Index m_points = grid.m_points;
    const double offset = delta / grid.dx;
    Vector out(m_points);
    // Every output point shares the same fractional part, so one stencil
    // evaluated at index 0 serves the whole column.
    const StencilWeights sw = stencil_at(-offset, m_points);
    // Whole-cell shifts are plain rolls and work on any grid; interpolation
    // needs the full stencil.
    if (m_points < kStencilSize && sw.weights[-kStencilLeft] != 1.0) grid.validate();
    for (Eigen::Index m = 0; m < m_points; ++m) {
        double acc = 0.0;
        Eigen::Index idx = (sw.base_index + m) % m_points;
        for (int j = 0; j < kStencilSize; ++j) {
            acc += sw.weights[j] * q[idx];
            if (++idx == m_points) idx = 0;
        }
        out[m] = acc;
    }
    return out;
}

TransportOperator::TransportOperator(std::vector<double> shifts, SpatialGrid grid)
    : shifts_(std::move(shifts)), grid_(grid) {
    grid_.validate();
    for (double s : shifts_)
        if (!std::isfinite(s)) throw DomainError("TransportOperator: non-finite shift");
}

Matrix TransportOperator::apply(const Eigen::Ref<const Matrix>& q, double sign) const {
    if (q.rows() != grid_.m_points)
        throw ShapeError("transport: matrix rows (" + std::to_string(q.rows()) +
                         ") do not match grid size (" + std::to_string(grid_.m_points) + ")");
    if (static_cast<std::size_t>(q.cols()) != shifts_.size())
        throw ShapeError("transport: matrix columns (" + std::to_string(q.cols()) +
                         ") do not match shift samples (" + std::to_string(shifts_.size()) + ")");
    Matrix out(q.rows(), q.cols());
    for (Eigen::Index n = 0; n < q.cols(); ++n)
        out.col(n) = apply_shift(q.col(n), sign * shifts_[static_cast<std::size_t>(n)], grid_);
    return out;
}

Matrix TransportOperator::forward(const Eigen::Ref<const Matrix>& q) const { return apply(q, 1.0); }

Matrix TransportOperator::backward(const Eigen::Ref<const Matrix>& q) const { return apply(q, -1.0); }

Matrix transport_forward(const Eigen::Ref<const Matrix>& q, const TransportOperator& op) {
    return op.forward(q);
}

Matrix transport_backward(const Eigen::Ref<const Matrix>& q, const TransportOperator& op) {
    return op.backward(q);
}

}  // namespace spod
