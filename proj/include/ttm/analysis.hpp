#pragma once

#include <optional>
#include <span>
#include <vector>

#include "ttm/liouville.hpp"

namespace ttm {

struct EquilibriumReport {
    Matrix rho_eq;
    std::size_t settled_at = 0;
    /// Largest elementwise range over any trailing window from settled_at on.
    double residual = 0.0;
};

/// Earliest step m such that every window of `window` consecutive states
/// starting at or after m has elementwise range below tol. The returned state
/// is the average over the final window. Throws NotSettled otherwise.
EquilibriumReport detect_equilibrium(std::span<const Matrix> traj, double tol, std::size_t window);

/// exp(-beta H) / Z.
Matrix canonical_state(const Matrix& h, double beta);

struct DeviationMeasurement {
    double theta = 0.0;
    Eigen::Vector3d canonical_axis;
    Eigen::Vector3d equilibrium_axis;
};

/// theta = arccos |n_eq . n_c| in [0, pi/2]; DegenerateState if either Bloch vector vanishes.
DeviationMeasurement noncanonical_angle(const Matrix& rho_eq, const Matrix& rho_c);

struct OscillationMetrics {
    std::size_t sign_changes = 0;
    /// Exponential envelope rate fitted to local extrema; empty when fewer than two extrema exist.
    std::optional<double> envelope_decay_rate;
    double asymptote = 0.0;
};

/// Zero crossings of (series - asymptote) and an exponential fit to the
/// extrema of |series - asymptote|. Deviations within 1e-3 of the peak
/// deviation are treated as zero, so numerical jitter around the asymptote is
/// not counted. The asymptote defaults to the mean of the last 10% of samples.
OscillationMetrics oscillation_metrics(std::span<const double> series, double dt = 1.0,
                                       std::optional<double> asymptote = std::nullopt);

}  // namespace ttm
