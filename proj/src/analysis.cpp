#include "ttm/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "ttm/errors.hpp"

namespace ttm {

namespace {

double window_range(std::span<const Matrix> traj, std::size_t start, std::size_t window) {
    const Matrix& first = traj[start];
    Eigen::MatrixXd re_min = first.real(), re_max = first.real();
    Eigen::MatrixXd im_min = first.imag(), im_max = first.imag();
    for (std::size_t k = start + 1; k < start + window; ++k) {
        re_min = re_min.cwiseMin(traj[k].real());
        re_max = re_max.cwiseMax(traj[k].real());
        im_min = im_min.cwiseMin(traj[k].imag());
        im_max = im_max.cwiseMax(traj[k].imag());
    }
    return std::max((re_max - re_min).maxCoeff(), (im_max - im_min).maxCoeff());
}

}  // namespace

EquilibriumReport detect_equilibrium(std::span<const Matrix> traj, double tol, std::size_t window) {
    if (window < 2) {
        throw ValidationError("equilibrium window must span at least 2 states");
    }
    if (traj.size() < window) {
        throw NotSettled("trajectory shorter than the equilibrium window", std::numeric_limits<double>::infinity());
    }
    const std::size_t last = traj.size() - window;
    std::vector<double> ranges(last + 1);
    for (std::size_t k = 0; k <= last; ++k) {
        ranges[k] = window_range(traj, k, window);
    }
    if (!(ranges[last] < tol)) {
        std::ostringstream msg;
        msg << "trajectory not settled: final window range " << ranges[last] << " >= tol " << tol;
        throw NotSettled(msg.str(), ranges[last]);
    }
    std::size_t m = last;
    while (m > 0 && ranges[m - 1] < tol) {
        --m;
    }
    EquilibriumReport report;
    report.settled_at = m;
    report.residual = *std::max_element(ranges.begin() + static_cast<std::ptrdiff_t>(m), ranges.end());
    report.rho_eq = Matrix::Zero(traj.front().rows(), traj.front().cols());
    for (std::size_t k = last; k < traj.size(); ++k) {
        report.rho_eq += traj[k];
    }
    report.rho_eq /= static_cast<double>(window);
    return report;
}

Matrix canonical_state(const Matrix& h, double beta) {
    if (!(beta > 0.0)) {
        throw ValidationError("inverse temperature must be positive");
    }
    if (!is_hermitian(h)) {
        throw ValidationError("canonical state requires a Hermitian Hamiltonian");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    const Eigen::VectorXd e = es.eigenvalues();
    const Eigen::VectorXd w = (-beta * (e.array() - e.minCoeff())).exp().matrix();
    const Eigen::VectorXcd p = (w / w.sum()).cast<Complex>();
    Matrix rho = es.eigenvectors() * p.asDiagonal() * es.eigenvectors().adjoint();
    return 0.5 * (rho + rho.adjoint());
}

DeviationMeasurement noncanonical_angle(const Matrix& rho_eq, const Matrix& rho_c) {
    const auto eq = bloch_axis(rho_eq);
    const auto c = bloch_axis(rho_c);
    if (!eq || !c) {
        throw DegenerateState("state with vanishing Bloch vector has no eigenbasis axis");
    }
    DeviationMeasurement out;
    out.equilibrium_axis = *eq;
    out.canonical_axis = *c;
    out.theta = std::acos(std::clamp(std::abs(eq->dot(*c)), 0.0, 1.0));
    return out;
}

OscillationMetrics oscillation_metrics(std::span<const double> series, double dt, std::optional<double> asymptote) {
    if (series.size() < 8) {
        throw ValidationError("oscillation metrics need at least 8 samples");
    }
    OscillationMetrics out;
    if (asymptote) {
        out.asymptote = *asymptote;
    } else {
        const std::size_t tail = std::max<std::size_t>(1, series.size() / 10);
        double sum = 0.0;
        for (std::size_t k = series.size() - tail; k < series.size(); ++k) {
            sum += series[k];
        }
        out.asymptote = sum / static_cast<double>(tail);
    }
    std::vector<double> dev(series.size());
    double peak = 0.0;
    for (std::size_t k = 0; k < series.size(); ++k) {
        dev[k] = series[k] - out.asymptote;
        peak = std::max(peak, std::abs(dev[k]));
    }
    if (peak == 0.0) {
        return out;
    }
    const double floor = 1e-3 * peak;

    int last_sign = 0;
    for (double v : dev) {
        if (std::abs(v) <= floor) {
            continue;
        }
        const int s = v > 0.0 ? 1 : -1;
        if (last_sign != 0 && s != last_sign) {
            ++out.sign_changes;
        }
        last_sign = s;
    }

    std::vector<double> ts, logs;
    for (std::size_t k = 1; k + 1 < dev.size(); ++k) {
        const double a = std::abs(dev[k]);
        if (a > floor && a >= std::abs(dev[k - 1]) && a > std::abs(dev[k + 1])) {
            ts.push_back(dt * static_cast<double>(k));
            logs.push_back(std::log(a));
        }
    }
    if (ts.size() >= 2) {
        const double n = static_cast<double>(ts.size());
        double st = 0, sl = 0, stt = 0, stl = 0;
        for (std::size_t i = 0; i < ts.size(); ++i) {
            st += ts[i];
            sl += logs[i];
            stt += ts[i] * ts[i];
            stl += ts[i] * logs[i];
        }
        const double denom = n * stt - st * st;
        if (denom > 0.0) {
            out.envelope_decay_rate = -(n * stl - st * sl) / denom;
        }
    }
    return out;
}

}  // namespace ttm
