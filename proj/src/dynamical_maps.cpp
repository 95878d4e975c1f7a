#include "ttm/dynamical_maps.hpp"

#include <algorithm>
#include <limits>

#include <Eigen/Eigenvalues>

#include "ttm/errors.hpp"

namespace ttm {

DynamicalMapSequence::DynamicalMapSequence(TimeGrid grid, std::vector<SuperOperator> maps)
    : grid_(grid), maps_(std::move(maps)) {
    if (maps_.empty()) {
        throw ValidationError("dynamical map sequence is empty");
    }
    const Eigen::Index n = maps_.front().liouville_dim();
    if (maps_.front().matrix() != Matrix::Identity(n, n)) {
        throw ValidationError("E_0 must be the identity");
    }
    for (const auto& m : maps_) {
        if (m.liouville_dim() != n) {
            throw DimensionError("dynamical maps have inconsistent dimensions");
        }
    }
}

DynamicalMapSequence extract_maps(const BasisTrajectorySet& trajs) {
    const Eigen::Index d = trajs.dim();
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            if (trajs.frame(i, j, 0) != BasisElement{d, i, j}.matrix()) {
                throw ValidationError("trajectory set does not start from the canonical basis");
            }
        }
    }
    std::vector<SuperOperator> maps;
    maps.reserve(trajs.grid().n_frames());
    const Eigen::Index d2 = d * d;
    for (std::size_t k = 0; k < trajs.grid().n_frames(); ++k) {
        Matrix e(d2, d2);
        for (Eigen::Index a = 0; a < d2; ++a) {
            e.col(a) = vectorize(trajs.frame(a / d, a % d, k));
        }
        maps.emplace_back(std::move(e), SuperOpKind::map);
    }
    return DynamicalMapSequence(trajs.grid(), std::move(maps));
}

Matrix choi_matrix(const SuperOperator& map) {
    const Eigen::Index d = map.hilbert_dim();
    const Matrix& s = map.matrix();
    Matrix choi(d * d, d * d);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            for (Eigen::Index n = 0; n < d; ++n) {
                for (Eigen::Index m = 0; m < d; ++m) {
                    choi(i * d + n, j * d + m) = s(n * d + m, i * d + j);
                }
            }
        }
    }
    return choi;
}

MapDiagnostics diagnose_map(const SuperOperator& map) {
    const Eigen::Index d = map.hilbert_dim();
    const Matrix& s = map.matrix();
    MapDiagnostics diag;
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            const Eigen::Index col = i * d + j;
            Complex tr = 0.0;
            for (Eigen::Index n = 0; n < d; ++n) {
                tr += s(n * d + n, col);
            }
            diag.trace_defect = std::max(diag.trace_defect, std::abs(tr - (i == j ? 1.0 : 0.0)));
            // E(|j><i|) must equal E(|i><j|)^dagger.
            const Matrix out_ij = devectorize(s.col(col));
            const Matrix out_ji = devectorize(s.col(j * d + i));
            diag.hermiticity_defect =
                std::max(diag.hermiticity_defect, (out_ji - out_ij.adjoint()).cwiseAbs().maxCoeff());
        }
    }
    const Matrix choi = choi_matrix(map);
    const Matrix herm = 0.5 * (choi + choi.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(herm, Eigen::EigenvaluesOnly);
    diag.choi_min_eigenvalue = es.eigenvalues().minCoeff();
    return diag;
}

MapValidationReport validate_maps(const DynamicalMapSequence& maps) {
    MapValidationReport report;
    report.min_choi_eigenvalue = std::numeric_limits<double>::infinity();
    report.per_step.reserve(maps.size());
    for (const auto& m : maps.maps()) {
        const auto diag = diagnose_map(m);
        report.max_trace_defect = std::max(report.max_trace_defect, diag.trace_defect);
        report.max_hermiticity_defect = std::max(report.max_hermiticity_defect, diag.hermiticity_defect);
        report.min_choi_eigenvalue = std::min(report.min_choi_eigenvalue, diag.choi_min_eigenvalue);
        report.per_step.push_back(diag);
    }
    return report;
}

}  // namespace ttm
