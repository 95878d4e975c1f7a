#include "ttm/heom.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "ttm/errors.hpp"

namespace ttm::heom {

std::vector<BathExponent> drude_lorentz_exponents(double lambda, double gamma, double beta, int n_matsubara) {
    std::vector<BathExponent> exps;
    exps.reserve(static_cast<std::size_t>(n_matsubara) + 1);
    exps.push_back({Complex(lambda * gamma / std::tan(beta * gamma / 2.0), -lambda * gamma), gamma});
    for (int k = 1; k <= n_matsubara; ++k) {
        const double nu = 2.0 * std::numbers::pi * k / beta;
        if (std::abs(nu - gamma) < 1e-8 * gamma) {
            throw ConfigurationError("Matsubara frequency coincides with the Drude cutoff (beta*gamma = 2*pi*k)");
        }
        exps.push_back({Complex(4.0 * lambda * gamma * nu / (beta * (nu * nu - gamma * gamma)), 0.0), nu});
    }
    return exps;
}

double matsubara_residual(double lambda, double gamma, double beta, int n_matsubara) {
    // sum_{k>=1} c_k / nu_k = 2 lambda / (beta gamma) - lambda cot(beta gamma / 2)
    double delta = 2.0 * lambda / (beta * gamma) - lambda / std::tan(beta * gamma / 2.0);
    const auto exps = drude_lorentz_exponents(lambda, gamma, beta, n_matsubara);
    for (std::size_t k = 1; k < exps.size(); ++k) {
        delta -= exps[k].c.real() / exps[k].nu;
    }
    return delta;
}

HierarchyIndex::HierarchyIndex(int n_modes, int depth) : n_modes_(n_modes), depth_(depth) {
    if (n_modes < 1 || depth < 0) {
        throw ValidationError("hierarchy needs at least one mode and a nonnegative depth");
    }
    std::vector<int> current(static_cast<std::size_t>(n_modes), 0);
    // Lexicographic enumeration of all multi-indices with |n| <= depth.
    auto recurse = [&](auto&& self, int mode, int remaining) -> void {
        if (mode == n_modes_) {
            nodes_.push_back(current);
            return;
        }
        for (int v = 0; v <= remaining; ++v) {
            current[static_cast<std::size_t>(mode)] = v;
            self(self, mode + 1, remaining - v);
        }
        current[static_cast<std::size_t>(mode)] = 0;
    };
    recurse(recurse, 0, depth);

    std::map<std::vector<int>, long> lookup;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        lookup.emplace(nodes_[i], static_cast<long>(i));
    }
    raise_.assign(nodes_.size() * static_cast<std::size_t>(n_modes), -1);
    lower_.assign(nodes_.size() * static_cast<std::size_t>(n_modes), -1);
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        for (int k = 0; k < n_modes; ++k) {
            auto up = nodes_[i];
            ++up[static_cast<std::size_t>(k)];
            if (auto it = lookup.find(up); it != lookup.end()) {
                raise_[i * n_modes + k] = it->second;
            }
            if (nodes_[i][static_cast<std::size_t>(k)] > 0) {
                auto down = nodes_[i];
                --down[static_cast<std::size_t>(k)];
                lower_[i * n_modes + k] = lookup.at(down);
            }
        }
    }
}

namespace {

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

void add_block(kernels::CsrBuilder& builder, const Matrix& block, Eigen::Index row_in_block, Eigen::Index col_offset) {
    for (Eigen::Index c = 0; c < block.cols(); ++c) {
        builder.add(col_offset + c, block(row_in_block, c));
    }
}

}  // namespace

kernels::CsrMatrix build_generator(const Matrix& h, const Matrix& q, const std::vector<BathExponent>& exps,
                                   double residual, const HierarchyIndex& index) {
    const Eigen::Index d = h.rows();
    const Eigen::Index d2 = d * d;
    if (static_cast<int>(exps.size()) != index.n_modes()) {
        throw DimensionError("hierarchy mode count differs from bath exponent count");
    }
    const Complex im(0.0, 1.0);
    const Matrix id = Matrix::Identity(d, d);
    const Matrix lh = commutator_superop(h);
    const Matrix lq = commutator_superop(q);
    const Matrix left_q = kron(q, id);
    const Matrix right_q = kron(id, q.transpose());
    const Matrix base = -im * lh - residual * lq * lq;

    const auto n_nodes = static_cast<Eigen::Index>(index.size());
    kernels::CsrBuilder builder(n_nodes * d2);
    std::vector<Matrix> raise_blocks(exps.size());
    std::vector<Matrix> lower_blocks(exps.size());
    for (std::size_t n = 0; n < index.size(); ++n) {
        const auto& multi = index.node(n);
        double damping = 0.0;
        for (std::size_t k = 0; k < exps.size(); ++k) {
            damping += multi[k] * exps[k].nu;
            const double ck = std::abs(exps[k].c);
            raise_blocks[k] = -im * std::sqrt((multi[k] + 1) * ck) * lq;
            if (multi[k] > 0) {
                lower_blocks[k] = -im * std::sqrt(multi[k] / ck) * (exps[k].c * left_q - std::conj(exps[k].c) * right_q);
            }
        }
        const Matrix diag = base - damping * Matrix::Identity(d2, d2);
        for (Eigen::Index a = 0; a < d2; ++a) {
            add_block(builder, diag, a, static_cast<Eigen::Index>(n) * d2);
            for (int k = 0; k < index.n_modes(); ++k) {
                const long up = index.raise(n, k);
                if (up >= 0) {
                    add_block(builder, raise_blocks[static_cast<std::size_t>(k)], a, up * d2);
                }
                const long down = index.lower(n, k);
                if (down >= 0) {
                    add_block(builder, lower_blocks[static_cast<std::size_t>(k)], a, down * d2);
                }
            }
            builder.finish_row();
        }
    }
    return std::move(builder).build();
}

std::vector<Matrix> propagate_maps(const kernels::CsrMatrix& generator, Eigen::Index hilbert_dim,
                                   const TimeGrid& grid, double integrator_dt, kernels::Exec exec) {
    const Eigen::Index d2 = hilbert_dim * hilbert_dim;
    if (generator.rows % d2 != 0 || generator.rows != generator.cols) {
        throw DimensionError("generator size is not a multiple of the Liouville dimension");
    }
    // Classical RK4 is stable for |h * eig| up to about 2.8; the Gershgorin row
    // bound caps the spectral radius, so deep tiers and high Matsubara
    // frequencies shrink the step automatically.
    double radius = 0.0;
    for (Eigen::Index r = 0; r < generator.rows; ++r) {
        double row = 0.0;
        for (auto p = generator.row_ptr[r]; p < generator.row_ptr[r + 1]; ++p) {
            row += std::abs(generator.values[static_cast<std::size_t>(p)]);
        }
        radius = std::max(radius, row);
    }
    const double h_max = radius > 0.0 ? std::min(integrator_dt, 2.5 / radius) : integrator_dt;
    const auto substeps = static_cast<std::size_t>(std::ceil(grid.dt / h_max - 1e-9));
    const double h = grid.dt / static_cast<double>(substeps);

    Matrix x = Matrix::Zero(generator.rows, d2);
    x.topRows(d2).setIdentity();
    Matrix k1, k2, k3, k4, stage;

    std::vector<Matrix> maps;
    maps.reserve(grid.n_frames());
    maps.push_back(x.topRows(d2));
    for (std::size_t step = 1; step <= grid.n_steps; ++step) {
        for (std::size_t sub = 0; sub < substeps; ++sub) {
            kernels::spmm(generator, x, k1, exec);
            kernels::axpy(x, h / 2.0, k1, stage, exec);
            kernels::spmm(generator, stage, k2, exec);
            kernels::axpy(x, h / 2.0, k2, stage, exec);
            kernels::spmm(generator, stage, k3, exec);
            kernels::axpy(x, h, k3, stage, exec);
            kernels::spmm(generator, stage, k4, exec);
            kernels::axpy(x, h / 6.0, k1, x, exec);
            kernels::axpy(x, h / 3.0, k2, x, exec);
            kernels::axpy(x, h / 3.0, k3, x, exec);
            kernels::axpy(x, h / 6.0, k4, x, exec);
        }
        const double peak = x.cwiseAbs().maxCoeff();
        if (!std::isfinite(peak) || peak > 1e6) {
            std::ostringstream msg;
            msg << "HEOM integration diverged at grid step " << step << " (t = " << grid.time(step)
                << ", max |entry| = " << peak << ")";
            throw DivergenceError(msg.str(), step);
        }
        maps.push_back(x.topRows(d2));
    }
    return maps;
}

}  // namespace ttm::heom
