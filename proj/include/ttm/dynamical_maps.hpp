#pragma once

#include <vector>

#include "ttm/generators.hpp"
#include "ttm/liouville.hpp"

namespace ttm {

/// E_0 .. E_n with rho(t_k) = E_k rho(0); E_0 is the identity.
class DynamicalMapSequence {
public:
    DynamicalMapSequence() = default;
    /// Throws ValidationError if maps.front() is not exactly the identity.
    DynamicalMapSequence(TimeGrid grid, std::vector<SuperOperator> maps);

    Eigen::Index dim() const noexcept { return maps_.empty() ? 0 : maps_.front().hilbert_dim(); }
    const TimeGrid& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return maps_.size(); }
    const SuperOperator& operator[](std::size_t k) const { return maps_.at(k); }
    const std::vector<SuperOperator>& maps() const noexcept { return maps_; }

private:
    TimeGrid grid_;
    std::vector<SuperOperator> maps_;
};

/// Column (i*D + j) of E_k is vec(rho^{(ij)}(t_k)).
DynamicalMapSequence extract_maps(const BasisTrajectorySet& trajs);

struct MapDiagnostics {
    double trace_defect = 0.0;
    double hermiticity_defect = 0.0;
    /// Smallest eigenvalue of the Choi matrix sum_ij |i><j| (x) E(|i><j|).
    double choi_min_eigenvalue = 0.0;
};

struct MapValidationReport {
    std::vector<MapDiagnostics> per_step;
    double max_trace_defect = 0.0;
    double max_hermiticity_defect = 0.0;
    double min_choi_eigenvalue = 0.0;
};

MapDiagnostics diagnose_map(const SuperOperator& map);
MapValidationReport validate_maps(const DynamicalMapSequence& maps);

/// Row-major Choi matrix: C[(i*D+n), (j*D+m)] = E(|i><j|)_{nm}.
Matrix choi_matrix(const SuperOperator& map);

}  // namespace ttm
