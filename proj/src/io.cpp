#include "datadiss/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace datadiss {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    return out;
}

std::ifstream open_in(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot read " + path.string());
    }
    return in;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) {
            cell.pop_back();
        }
        cells.push_back(cell);
    }
    return cells;
}

double parse_double(const std::string& s, const fs::path& path, int line_no) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used == s.size()) {
            return v;
        }
    } catch (const std::exception&) {
    }
    throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": not a number: '" + s + "'");
}

// Columns named in `header` after the leading `k`, as one vector each.
std::vector<Vector> read_columns(const fs::path& path, const std::vector<std::string>& header) {
    std::ifstream in = open_in(path);
    std::string line;
    if (!std::getline(in, line) || split(line) != header) {
        std::string expected;
        for (const auto& h : header) {
            expected += (expected.empty() ? "" : ",") + h;
        }
        throw std::runtime_error(path.string() + ": expected header '" + expected + "'");
    }
    std::vector<std::vector<double>> cols(header.size() - 1);
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") {
            continue;
        }
        const auto cells = split(line);
        if (cells.size() != header.size()) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": expected "
                                     + std::to_string(header.size()) + " columns");
        }
        if (parse_double(cells[0], path, line_no) != static_cast<double>(cols[0].size())) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": sample index out of order");
        }
        for (std::size_t c = 1; c < cells.size(); ++c) {
            cols[c - 1].push_back(parse_double(cells[c], path, line_no));
        }
    }
    if (cols[0].empty()) {
        throw std::runtime_error(path.string() + ": no samples");
    }
    std::vector<Vector> out;
    for (const auto& c : cols) {
        out.emplace_back(Eigen::Map<const Vector>(c.data(), static_cast<Eigen::Index>(c.size())));
    }
    return out;
}

Matrix matrix_from_json(const json& j, const char* name) {
    if (!j.is_array() || j.empty() || !j[0].is_array()) {
        throw std::invalid_argument(std::string("state-space field ") + name + " must be a nested array");
    }
    Matrix m(j.size(), j[0].size());
    for (std::size_t r = 0; r < j.size(); ++r) {
        if (j[r].size() != j[0].size()) {
            throw std::invalid_argument(std::string("state-space field ") + name + " has ragged rows");
        }
        for (std::size_t c = 0; c < j[r].size(); ++c) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
        }
    }
    return m;
}

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            row.push_back(m(r, c));
        }
        rows.push_back(row);
    }
    return rows;
}

InnerSolver inner_from_string(const std::string& s) {
    if (s == "cutting_plane") {
        return InnerSolver::cutting_plane;
    }
    if (s == "direct_search") {
        return InnerSolver::direct_search;
    }
    throw std::invalid_argument("unknown inner solver '" + s + "' (expected cutting_plane or direct_search)");
}

json solver_to_json(const SolverOptions& o) {
    json j = {
        {"max_iters", o.max_iters},
        {"eps", o.eps},
        {"stagnation_tol", o.stagnation_tol},
        {"inner", o.inner == InnerSolver::cutting_plane ? "cutting_plane" : "direct_search"},
        {"search_radius", o.search_radius},
        {"inner_iters", o.inner_iters},
        {"stop_at_first_feasible", o.stop_at_first_feasible},
    };
    if (o.p0) {
        j["p0"] = vector_to_json(*o.p0);
    }
    return j;
}

SolverOptions solver_from_json(const json& j) {
    SolverOptions o;
    o.max_iters = j.value("max_iters", o.max_iters);
    o.eps = j.value("eps", o.eps);
    o.stagnation_tol = j.value("stagnation_tol", o.stagnation_tol);
    o.inner = inner_from_string(j.value("inner", std::string("cutting_plane")));
    o.search_radius = j.value("search_radius", o.search_radius);
    o.inner_iters = j.value("inner_iters", o.inner_iters);
    o.stop_at_first_feasible = j.value("stop_at_first_feasible", o.stop_at_first_feasible);
    if (j.contains("p0")) {
        o.p0 = vector_from_json(j.at("p0"));
    }
    return o;
}

} // namespace

std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_trajectory_csv(const fs::path& path, const Trajectory& traj) {
    std::ofstream out = open_out(path);
    out << "k,u,y\n";
    for (int k = 0; k < traj.size(); ++k) {
        out << k << ',' << format_double(traj.u(k)) << ',' << format_double(traj.y(k)) << '\n';
    }
}

Trajectory read_trajectory_csv(const fs::path& path) {
    auto cols = read_columns(path, {"k", "u", "y"});
    return Trajectory(std::move(cols[0]), std::move(cols[1]));
}

void write_controller_csv(const fs::path& path, const ImpulseResponse& a) {
    std::ofstream out = open_out(path);
    out << "k,a\n";
    for (int k = 0; k < a.size(); ++k) {
        out << k << ',' << format_double(a.a(k)) << '\n';
    }
}

ImpulseResponse read_controller_csv(const fs::path& path) {
    return ImpulseResponse(read_columns(path, {"k", "a"})[0]);
}

fs::path sidecar_path(const fs::path& controller_csv) {
    fs::path p = controller_csv;
    return p.replace_extension(".json");
}

void write_controller_sidecar(const fs::path& path, const ControllerSidecar& sidecar) {
    json j = {{"basis", sidecar.basis}, {"labels", sidecar.labels}, {"p", vector_to_json(sidecar.p)}};
    if (sidecar.basis == "pi") {
        j["Ts"] = sidecar.sampling_time;
    }
    std::ofstream out = open_out(path);
    out << j.dump(2) << '\n';
}

ControllerSidecar read_controller_sidecar(const fs::path& path) {
    std::ifstream in = open_in(path);
    const json j = json::parse(in);
    ControllerSidecar s;
    s.basis = j.at("basis").get<std::string>();
    s.labels = j.value("labels", std::vector<std::string>{});
    s.p = vector_from_json(j.at("p"));
    s.sampling_time = j.value("Ts", 0.0);
    return s;
}

Vector read_reference_csv(const fs::path& path) {
    return read_columns(path, {"k", "r"})[0];
}

void write_response_csv(const fs::path& path, const Vector& r, const Vector& output, const std::string& output_name) {
    if (r.size() != output.size()) {
        throw std::invalid_argument("write_response_csv: reference and output lengths differ");
    }
    std::ofstream out = open_out(path);
    out << "k,r," << output_name << '\n';
    for (Eigen::Index k = 0; k < r.size(); ++k) {
        out << k << ',' << format_double(r(k)) << ',' << format_double(output(k)) << '\n';
    }
}

void write_magnitude_csv(const fs::path& path, const std::vector<MagnitudeRow>& rows) {
    std::ofstream out = open_out(path);
    out << "omega,mag_Se,mag_Su,bound_We_inv,bound_Wu_inv\n";
    for (const auto& r : rows) {
        out << format_double(r.omega) << ',' << format_double(r.mag_se) << ',' << format_double(r.mag_su) << ','
            << format_double(r.bound_we_inv) << ',' << format_double(r.bound_wu_inv) << '\n';
    }
}

StateSpace state_space_from_json(const json& j) {
    return StateSpace(matrix_from_json(j.at("A"), "A"), matrix_from_json(j.at("B"), "B"),
                      matrix_from_json(j.at("C"), "C"), j.value("D", 0.0));
}

json state_space_to_json(const StateSpace& sys) {
    return {{"A", matrix_to_json(sys.A)}, {"B", matrix_to_json(sys.B)}, {"C", matrix_to_json(sys.C)}, {"D", sys.D}};
}

StateSpace read_state_space(const fs::path& path) {
    std::ifstream in = open_in(path);
    return state_space_from_json(json::parse(in));
}

ControllerBasis BasisConfig::build(int horizon) const {
    return kind == BasisKind::pi ? pi_basis(horizon, sampling_time) : fir_basis(horizon, taps);
}

void RunConfig::validate() const {
    if (order_bound < 1 || order_bound > nu || nu >= depth) {
        throw std::invalid_argument("config requires 1 <= n_bound <= nu < L (got n_bound=" + std::to_string(order_bound)
                                    + ", nu=" + std::to_string(nu) + ", L=" + std::to_string(depth) + ")");
    }
    for (const auto& spec : specs) {
        if (spec.delta > 0.0) {
            throw std::invalid_argument("config: delta must be <= 0");
        }
    }
    if (small_gain && small_gain->bound && !(*small_gain->bound > 0.0)) {
        throw std::invalid_argument("config: small_gain.c must be positive");
    }
}

json supply_to_json(const SupplyRate& sr) {
    return {{"Q", sr.Q}, {"S", sr.S}, {"R", sr.R}};
}

SupplyRate supply_from_json(const json& j) {
    return {j.at("Q").get<double>(), j.at("S").get<double>(), j.at("R").get<double>()};
}

Vector filter_from_json(const json& j, int horizon) {
    if (j.is_array()) {
        return vector_from_json(j);
    }
    const double gain = j.at("gain").get<double>();
    const double pole = j.at("pole").get<double>();
    const int length = j.value("length", horizon);
    Vector w(length);
    for (int k = 0; k < length; ++k) {
        w(k) = gain * (1.0 - pole) * std::pow(pole, k);
    }
    return w;
}

json vector_to_json(const Vector& v) {
    return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Vector vector_from_json(const json& j) {
    const auto values = j.get<std::vector<double>>();
    return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

RunConfig run_config_from_json(const json& j) {
    RunConfig c;
    c.depth = j.at("L").get<int>();
    c.nu = j.at("nu").get<int>();
    c.order_bound = j.value("n_bound", c.nu);
    const int horizon = c.depth - c.nu;
    for (const auto& s : j.value("specs", json::array())) {
        DissipativitySpec spec;
        spec.channel = channel_from_string(s.at("channel").get<std::string>());
        spec.sr = supply_from_json(s.at("supply"));
        if (s.contains("filter")) {
            spec.filter = filter_from_json(s.at("filter"), horizon);
        }
        spec.delta = s.value("delta", 0.0);
        c.specs.push_back(std::move(spec));
    }
    for (const auto& s : j.value("open_loop", json::array())) {
        c.open_loop.push_back(supply_from_json(s));
    }
    if (j.contains("basis")) {
        const auto& b = j.at("basis");
        const auto kind = b.at("kind").get<std::string>();
        if (kind == "pi") {
            c.basis.kind = BasisKind::pi;
            c.basis.sampling_time = b.value("Ts", kTwoTankSamplingTime);
        } else if (kind == "fir") {
            c.basis.kind = BasisKind::fir;
            c.basis.taps = b.at("taps").get<int>();
        } else {
            throw std::invalid_argument("unknown basis kind '" + kind + "' (expected pi or fir)");
        }
    }
    if (j.contains("solver")) {
        c.solver = solver_from_json(j.at("solver"));
    }
    if (j.contains("small_gain")) {
        SmallGainConfig sg;
        if (j.at("small_gain").contains("c")) {
            sg.bound = j.at("small_gain").at("c").get<double>();
        }
        c.small_gain = sg;
    }
    c.seed = j.value("seed", c.seed);
    c.validate();
    return c;
}

json run_config_to_json(const RunConfig& c) {
    json specs = json::array();
    for (const auto& s : c.specs) {
        json js = {{"channel", std::string(to_string(s.channel))}, {"supply", supply_to_json(s.sr)}, {"delta", s.delta}};
        if (s.filter) {
            js["filter"] = vector_to_json(*s.filter);
        }
        specs.push_back(js);
    }
    json open_loop = json::array();
    for (const auto& sr : c.open_loop) {
        open_loop.push_back(supply_to_json(sr));
    }
    json basis = c.basis.kind == BasisKind::pi ? json{{"kind", "pi"}, {"Ts", c.basis.sampling_time}}
                                               : json{{"kind", "fir"}, {"taps", c.basis.taps}};
    json j = {{"L", c.depth},      {"nu", c.nu},   {"n_bound", c.order_bound},
              {"specs", specs},    {"basis", basis}, {"solver", solver_to_json(c.solver)},
              {"seed", c.seed}};
    if (!open_loop.empty()) {
        j["open_loop"] = open_loop;
    }
    if (c.small_gain) {
        j["small_gain"] = c.small_gain->bound ? json{{"c", *c.small_gain->bound}} : json::object();
    }
    return j;
}

RunConfig read_run_config(const fs::path& path) {
    std::ifstream in = open_in(path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(path.string() + ": invalid JSON: " + e.what());
    }
    return run_config_from_json(j);
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out = open_out(path);
    out << text;
}

} // namespace datadiss
