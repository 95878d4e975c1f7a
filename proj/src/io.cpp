#include "ttm/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include "ttm/errors.hpp"

namespace ttm::io {

namespace {

const Json& require(const Json& j, const std::string& key, const std::string& path) {
    if (!j.is_object()) {
        throw SchemaError("expected an object", path);
    }
    auto it = j.find(key);
    if (it == j.end()) {
        throw SchemaError("missing required field", path.empty() ? key : path + "." + key);
    }
    return *it;
}

double require_number(const Json& j, const std::string& key, const std::string& path) {
    const Json& v = require(j, key, path);
    if (!v.is_number()) {
        throw SchemaError("expected a number", path + "." + key);
    }
    return v.get<double>();
}

std::size_t require_count(const Json& j, const std::string& key, const std::string& path) {
    const Json& v = require(j, key, path);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
        throw SchemaError("expected a non-negative integer", path + "." + key);
    }
    return v.get<std::size_t>();
}

std::string require_string(const Json& j, const std::string& key, const std::string& path) {
    const Json& v = require(j, key, path);
    if (!v.is_string()) {
        throw SchemaError("expected a string", path + "." + key);
    }
    return v.get<std::string>();
}

const Json& require_array(const Json& j, const std::string& key, const std::string& path) {
    const Json& v = require(j, key, path);
    if (!v.is_array()) {
        throw SchemaError("expected an array", path + "." + key);
    }
    return v;
}

struct Header {
    std::string kind;
    Eigen::Index dim = 0;
    double dt = 0.0;
    std::size_t n_steps = 0;
};

Json make_header(const std::string& kind, Eigen::Index dim, double dt, std::size_t n_steps) {
    Json h = Json::object();
    h["format_version"] = kFormatVersion;
    h["kind"] = kind;
    h["dim"] = dim;
    h["dt"] = dt;
    h["n_steps"] = n_steps;
    h["vectorization"] = kVectorization;
    h["units"] = kUnits;
    return h;
}

Header read_header(const Json& doc, const std::string& expected_kind) {
    const Json& h = require(doc, "header", "");
    const Json& version = require(h, "format_version", "header");
    if (!version.is_number_integer() || version.get<int>() != kFormatVersion) {
        throw SchemaError("unsupported format version", "header.format_version");
    }
    Header out;
    out.kind = require_string(h, "kind", "header");
    if (out.kind != expected_kind) {
        throw SchemaError("expected kind '" + expected_kind + "', found '" + out.kind + "'", "header.kind");
    }
    const std::size_t dim = require_count(h, "dim", "header");
    if (dim < 1) {
        throw SchemaError("dimension must be at least 1", "header.dim");
    }
    out.dim = static_cast<Eigen::Index>(dim);
    out.dt = require_number(h, "dt", "header");
    if (!(out.dt > 0.0) || !std::isfinite(out.dt)) {
        throw SchemaError("time step must be positive", "header.dt");
    }
    out.n_steps = require_count(h, "n_steps", "header");
    if (require_string(h, "vectorization", "header") != kVectorization) {
        throw SchemaError("only row-major vectorization is supported", "header.vectorization");
    }
    return out;
}

Json model_of(const Json& doc) {
    auto it = doc.find("model");
    if (it == doc.end()) {
        return Json::object();
    }
    if (!it->is_object()) {
        throw SchemaError("expected an object", "model");
    }
    return *it;
}

void check_shape(const Matrix& m, Eigen::Index dim, const std::string& field) {
    if (m.rows() != dim || m.cols() != dim) {
        throw SchemaError("matrix shape does not match header dimension", field);
    }
}

}  // namespace

Json matrix_to_json(const Matrix& m) {
    Json rows = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            row.push_back(Json::array({m(r, c).real(), m(r, c).imag()}));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const Json& j, const std::string& field) {
    if (!j.is_array() || j.empty()) {
        throw SchemaError("expected a non-empty array of rows", field);
    }
    const auto rows = static_cast<Eigen::Index>(j.size());
    if (!j[0].is_array()) {
        throw SchemaError("expected an array of [re, im] pairs", field + "[0]");
    }
    const auto cols = static_cast<Eigen::Index>(j[0].size());
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const Json& row = j[static_cast<std::size_t>(r)];
        const std::string row_field = field + "[" + std::to_string(r) + "]";
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
            throw SchemaError("ragged matrix row", row_field);
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            const Json& z = row[static_cast<std::size_t>(c)];
            if (!z.is_array() || z.size() != 2 || !z[0].is_number() || !z[1].is_number()) {
                throw SchemaError("expected [re, im]", row_field + "[" + std::to_string(c) + "]");
            }
            m(r, c) = Complex(z[0].get<double>(), z[1].get<double>());
        }
    }
    return m;
}

Json to_json(const TrajectoryFile& f) {
    const auto& set = f.set;
    Json doc = Json::object();
    doc["header"] = make_header("trajectory", set.dim(), set.grid().dt, set.grid().n_steps);
    doc["model"] = f.model;
    Json trajs = Json::array();
    for (Eigen::Index i = 0; i < set.dim(); ++i) {
        for (Eigen::Index j = 0; j < set.dim(); ++j) {
            Json t = Json::object();
            t["basis"] = Json::array({i, j});
            Json frames = Json::array();
            for (const Matrix& m : set.trajectory(i, j)) {
                frames.push_back(matrix_to_json(m));
            }
            t["frames"] = std::move(frames);
            trajs.push_back(std::move(t));
        }
    }
    doc["basis_trajectories"] = std::move(trajs);
    return doc;
}

TrajectoryFile trajectory_from_json(const Json& j) {
    const Header h = read_header(j, "trajectory");
    const Json& trajs = require_array(j, "basis_trajectories", "");
    const auto d = h.dim;
    if (trajs.size() != static_cast<std::size_t>(d * d)) {
        throw SchemaError("expected dim^2 basis trajectories", "basis_trajectories");
    }
    std::vector<std::vector<Matrix>> frames(static_cast<std::size_t>(d * d));
    std::vector<bool> seen(frames.size(), false);
    for (std::size_t t = 0; t < trajs.size(); ++t) {
        const std::string path = "basis_trajectories[" + std::to_string(t) + "]";
        const Json& basis = require_array(trajs[t], "basis", path);
        if (basis.size() != 2 || !basis[0].is_number_integer() || !basis[1].is_number_integer()) {
            throw SchemaError("expected [i, j]", path + ".basis");
        }
        const auto bi = basis[0].get<long long>();
        const auto bj = basis[1].get<long long>();
        if (bi < 0 || bj < 0 || bi >= d || bj >= d) {
            throw SchemaError("basis index out of range", path + ".basis");
        }
        const auto a = static_cast<std::size_t>(bi * d + bj);
        if (seen[a]) {
            throw SchemaError("duplicate basis trajectory", path + ".basis");
        }
        seen[a] = true;
        const Json& fr = require_array(trajs[t], "frames", path);
        if (fr.size() != h.n_steps + 1) {
            throw SchemaError("expected n_steps + 1 frames", path + ".frames");
        }
        frames[a].reserve(fr.size());
        for (std::size_t k = 0; k < fr.size(); ++k) {
            const std::string field = path + ".frames[" + std::to_string(k) + "]";
            Matrix m = matrix_from_json(fr[k], field);
            check_shape(m, d, field);
            frames[a].push_back(std::move(m));
        }
    }
    TrajectoryFile out{BasisTrajectorySet(d, TimeGrid(h.dt, h.n_steps), std::move(frames)), model_of(j)};
    return out;
}

Json to_json(const PropagatedFile& f) {
    const Eigen::Index d = f.initial.rows();
    Json doc = Json::object();
    doc["header"] = make_header("trajectory", d, f.grid.dt, f.grid.n_steps);
    doc["model"] = f.model;
    doc["initial"] = matrix_to_json(f.initial);
    Json frames = Json::array();
    for (const Matrix& m : f.frames) {
        frames.push_back(matrix_to_json(m));
    }
    doc["frames"] = std::move(frames);
    doc["summary"] = f.summary;
    return doc;
}

PropagatedFile propagated_from_json(const Json& j) {
    const Header h = read_header(j, "trajectory");
    PropagatedFile out;
    out.grid = TimeGrid(h.dt, h.n_steps);
    out.initial = matrix_from_json(require(j, "initial", ""), "initial");
    check_shape(out.initial, h.dim, "initial");
    const Json& fr = require_array(j, "frames", "");
    if (fr.size() != h.n_steps + 1) {
        throw SchemaError("expected n_steps + 1 frames", "frames");
    }
    for (std::size_t k = 0; k < fr.size(); ++k) {
        const std::string field = "frames[" + std::to_string(k) + "]";
        out.frames.push_back(matrix_from_json(fr[k], field));
        check_shape(out.frames.back(), h.dim, field);
    }
    out.model = model_of(j);
    if (auto it = j.find("summary"); it != j.end()) {
        out.summary = *it;
    }
    return out;
}

Json to_json(const TensorFile& f) {
    const auto& ts = f.tensors;
    Json doc = Json::object();
    doc["header"] = make_header("tensors", ts.dim(), ts.dt(), ts.size());
    doc["model"] = f.model;
    doc["cutoff_k"] = ts.size();
    doc["learned_count"] = f.learned_count;
    doc["cutoff_policy"] = f.cutoff_policy;
    doc["assumed_tti"] = ts.assumed_tti();
    doc["truncation_error"] = f.truncation_error ? Json(*f.truncation_error) : Json(nullptr);
    doc["markovianity_profile"] = f.markovianity_profile;
    Json tensors = Json::array();
    for (const auto& t : ts.tensors()) {
        tensors.push_back(matrix_to_json(t.matrix()));
    }
    doc["tensors"] = std::move(tensors);
    return doc;
}

TensorFile tensors_from_json(const Json& j) {
    const Header h = read_header(j, "tensors");
    const std::size_t k = require_count(j, "cutoff_k", "");
    if (k != h.n_steps || k < 1) {
        throw SchemaError("cutoff_k must equal header.n_steps and be at least 1", "cutoff_k");
    }
    const Json& arr = require_array(j, "tensors", "");
    if (arr.size() != k) {
        throw SchemaError("expected cutoff_k tensors", "tensors");
    }
    const Eigen::Index n = h.dim * h.dim;
    std::vector<SuperOperator> tensors;
    tensors.reserve(k);
    for (std::size_t s = 0; s < k; ++s) {
        const std::string field = "tensors[" + std::to_string(s) + "]";
        Matrix m = matrix_from_json(arr[s], field);
        if (m.rows() != n || m.cols() != n) {
            throw SchemaError("tensor shape does not match dim^2", field);
        }
        tensors.emplace_back(std::move(m), SuperOpKind::tensor);
    }
    TensorFile out;
    bool tti = true;
    if (auto it = j.find("assumed_tti"); it != j.end()) {
        if (!it->is_boolean()) {
            throw SchemaError("expected a boolean", "assumed_tti");
        }
        tti = it->get<bool>();
    }
    out.tensors = TransferTensorSequence(h.dt, std::move(tensors), tti);
    out.learned_count = j.contains("learned_count") ? require_count(j, "learned_count", "") : k;
    if (auto it = j.find("cutoff_policy"); it != j.end() && it->is_string()) {
        out.cutoff_policy = it->get<std::string>();
    }
    if (auto it = j.find("truncation_error"); it != j.end() && !it->is_null()) {
        if (!it->is_number()) {
            throw SchemaError("expected a number or null", "truncation_error");
        }
        out.truncation_error = it->get<double>();
    }
    if (auto it = j.find("markovianity_profile"); it != j.end()) {
        if (!it->is_array()) {
            throw SchemaError("expected an array", "markovianity_profile");
        }
        for (std::size_t s = 0; s < it->size(); ++s) {
            if (!(*it)[s].is_number()) {
                throw SchemaError("expected a number", "markovianity_profile[" + std::to_string(s) + "]");
            }
            out.markovianity_profile.push_back((*it)[s].get<double>());
        }
    }
    out.model = model_of(j);
    return out;
}

Json read_json(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ValidationError("cannot open " + path.string());
    }
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(std::string("malformed JSON in ") + path.string() + ": " + e.what(),
                          "byte " + std::to_string(e.byte));
    }
}

std::string document_kind(const Json& j) {
    const Json& h = require(j, "header", "");
    return require_string(h, "kind", "header");
}

void write_atomic(const std::filesystem::path& path, const std::string& contents) {
    std::random_device rd;
    std::filesystem::path tmp = path;
    tmp += ".tmp" + std::to_string(rd());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw ValidationError("cannot write " + tmp.string());
        }
        out << contents;
        out.flush();
        if (!out) {
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw ValidationError("write failed for " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw ValidationError("cannot move output into place at " + path.string());
    }
}

void write_json(const std::filesystem::path& path, const Json& j) {
    write_atomic(path, j.dump(1) + "\n");
}

std::string format_number(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string element_label_text(const ElementLabel& l) {
    std::ostringstream s;
    s << l.from.first + 1 << l.from.second + 1 << "->" << l.to.first + 1 << l.to.second + 1;
    return s.str();
}

ElementLabel parse_element_label(const std::string& text, Eigen::Index dim) {
    // Digits are single characters, so this notation covers D <= 9.
    if (dim > 9) {
        throw ValidationError("element labels support dimensions up to 9");
    }
    const auto arrow = text.find("->");
    if (arrow != 2 || text.size() != 6) {
        throw ValidationError("element label must look like 11->22, got '" + text + "'");
    }
    auto digit = [&](char c) {
        if (c < '1' || c > '9' || c - '0' > dim) {
            throw RangeError("element label index out of range: '" + text + "'");
        }
        return static_cast<Eigen::Index>(c - '1');
    };
    ElementLabel l;
    l.from = {digit(text[0]), digit(text[1])};
    l.to = {digit(text[4]), digit(text[5])};
    return l;
}

std::string format_kernel_table(const KernelTable& table) {
    std::ostringstream s;
    s << "# kind=kernel format_version=" << kFormatVersion << " dt=" << format_number(table.dt)
      << " units=energy^2 (hbar=1, energy in J)\n";
    s << "# K_s sits at lag t=(s-1)*dt\n";
    s << "# s,t";
    for (const auto& l : table.labels) {
        const std::string name = element_label_text(l);
        s << ",re[" << name << "],im[" << name << "]";
    }
    s << "\n";
    for (Eigen::Index r = 0; r < table.values.rows(); ++r) {
        s << r + 1 << "," << format_number(table.dt * static_cast<double>(r));
        for (Eigen::Index c = 0; c < table.values.cols(); ++c) {
            s << "," << format_number(table.values(r, c).real()) << "," << format_number(table.values(r, c).imag());
        }
        s << "\n";
    }
    return s.str();
}

std::string format_sweep_table(const std::vector<SweepRow>& rows) {
    std::ostringstream s;
    s << "# kind=sweep format_version=" << kFormatVersion << " theta in radians\n";
    s << "# lambda,temperature,theta,settled_at,residual,status\n";
    for (const auto& r : rows) {
        s << format_number(r.lambda) << "," << format_number(r.temperature) << ","
          << (r.settled ? format_number(r.theta) : std::string("nan")) << "," << r.settled_at << ","
          << format_number(r.residual) << "," << (r.settled ? "settled" : "not_settled") << "\n";
    }
    return s.str();
}

}  // namespace ttm::io
