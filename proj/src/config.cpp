#include "scqa/config.hpp"

#include <json.hpp>

#include <atomic>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "scqa/fock_oracle.hpp"

namespace scqa {

using nlohmann::json;

// --- symbol literals ----------------------------------------------------------

std::string symbol_to_json(const PolySymbol& A) {
    std::string out = "[";
    bool first = true;
    auto emit = [&](const MultiIndex& alpha, Complex c, int grade) {
        if (!first) out += ", ";
        first = false;
        out += "{\"exponents\": [";
        for (std::size_t i = 0; i < alpha.size(); ++i) {
            if (i) out += ", ";
            out += std::to_string(alpha[i]);
        }
        out += "], \"re\": " + format_double(c.real());
        out += ", \"im\": " + format_double(c.imag());
        if (grade > 0) out += ", \"hbar_grade\": " + std::to_string(grade);
        out += "}";
    };
    for (const auto& [alpha, c] : A.terms()) emit(alpha, c, 0);
    for (const auto& [g, map] : A.higher_grades())
        for (const auto& [alpha, c] : map) emit(alpha, c, g);
    return out + "]";
}

namespace {

PolySymbol symbol_from_json(const json& j) {
    if (!j.is_array() || j.empty())
        throw ConfigError("symbol literal must be a non-empty array of term records");
    int nvars = -1;
    PolySymbol out;
    for (const json& rec : j) {
        if (!rec.is_object() || !rec.contains("exponents"))
            throw ConfigError("symbol term record needs an 'exponents' array");
        MultiIndex alpha;
        for (const json& e : rec.at("exponents")) {
            const int v = e.get<int>();
            if (v < 0) throw ConfigError("symbol exponents must be non-negative");
            alpha.push_back(v);
        }
        if (nvars < 0) {
            nvars = static_cast<int>(alpha.size());
            if (nvars < 2 || nvars % 2 != 0)
                throw ConfigError("symbol exponent tuples must have even length 2n");
            out = PolySymbol(nvars);
        } else if (static_cast<int>(alpha.size()) != nvars) {
            throw ConfigError("symbol exponent tuples must all have the same length");
        }
        const double re = rec.value("re", 0.0);
        const double im = rec.value("im", 0.0);
        const int grade = rec.value("hbar_grade", 0);
        if (grade < 0) throw ConfigError("hbar_grade must be non-negative");
        out.add_term(alpha, Complex(re, im), grade);
    }
    return out;
}

} // namespace

PolySymbol symbol_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& ex) {
        throw ConfigError(std::string("symbol literal: ") + ex.what());
    }
    return symbol_from_json(j);
}

// --- deterministic JSON emitter -------------------------------------------------

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
    return buf;
}

JsonValue JsonValue::number(double v) {
    JsonValue j;
    j.kind_ = Kind::Number;
    j.num_ = v;
    return j;
}
JsonValue JsonValue::integer(long long v) {
    JsonValue j;
    j.kind_ = Kind::Integer;
    j.int_ = v;
    return j;
}
JsonValue JsonValue::boolean(bool v) {
    JsonValue j;
    j.kind_ = Kind::Boolean;
    j.bool_ = v;
    return j;
}
JsonValue JsonValue::string(std::string v) {
    JsonValue j;
    j.kind_ = Kind::String;
    j.str_ = std::move(v);
    return j;
}
JsonValue JsonValue::array(std::vector<JsonValue> items) {
    JsonValue j;
    j.kind_ = Kind::Array;
    j.items_ = std::move(items);
    return j;
}
JsonValue JsonValue::object() {
    return JsonValue{};
}

void JsonValue::push_back(JsonValue v) {
    if (kind_ != Kind::Array) throw Error("JsonValue::push_back on non-array");
    items_.push_back(std::move(v));
}

void JsonValue::set(const std::string& key, JsonValue v) {
    if (kind_ != Kind::Object) throw Error("JsonValue::set on non-object");
    fields_.emplace_back(key, std::move(v));
}

void JsonValue::write(std::string& out, int indent, int depth) const {
    const std::string pad(static_cast<std::size_t>(indent) * depth, ' ');
    const std::string pad1(static_cast<std::size_t>(indent) * (depth + 1), ' ');
    switch (kind_) {
    case Kind::Number:
        out += format_double(num_);
        break;
    case Kind::Integer:
        out += std::to_string(int_);
        break;
    case Kind::Boolean:
        out += bool_ ? "true" : "false";
        break;
    case Kind::String: {
        out += '"';
        for (char c : str_) {
            if (c == '"' || c == '\\') out += '\\';
            out += c;
        }
        out += '"';
        break;
    }
    case Kind::Array: {
        if (items_.empty()) {
            out += "[]";
            break;
        }
        out += "[\n";
        for (std::size_t i = 0; i < items_.size(); ++i) {
            out += pad1;
            items_[i].write(out, indent, depth + 1);
            if (i + 1 < items_.size()) out += ',';
            out += '\n';
        }
        out += pad + "]";
        break;
    }
    case Kind::Object: {
        if (fields_.empty()) {
            out += "{}";
            break;
        }
        out += "{\n";
        for (std::size_t i = 0; i < fields_.size(); ++i) {
            out += pad1 + '"' + fields_[i].first + "\": ";
            fields_[i].second.write(out, indent, depth + 1);
            if (i + 1 < fields_.size()) out += ',';
            out += '\n';
        }
        out += pad + "}";
        break;
    }
    }
}

std::string JsonValue::dump(int indent) const {
    std::string out;
    write(out, indent, 0);
    out += '\n';
    return out;
}

JsonValue matrix_to_json(const Eigen::MatrixXd& M) {
    JsonValue rows = JsonValue::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        JsonValue row = JsonValue::array();
        for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(JsonValue::number(M(i, j)));
        rows.push_back(std::move(row));
    }
    return rows;
}

JsonValue vector_to_json(const Eigen::VectorXd& v) {
    JsonValue arr = JsonValue::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(JsonValue::number(v(i)));
    return arr;
}

// --- config parsing -------------------------------------------------------------

namespace {

Eigen::VectorXd vector_from_json(const json& j) {
    Eigen::VectorXd v(j.size());
    Eigen::Index i = 0;
    for (const json& e : j) v(i++) = e.get<double>();
    return v;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
    if (!j.is_array() || j.empty()) throw ConfigError("expected a matrix (array of rows)");
    const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
    const Eigen::Index cols = static_cast<Eigen::Index>(j.at(0).size());
    Eigen::MatrixXd M(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        if (static_cast<Eigen::Index>(j.at(i).size()) != cols)
            throw ConfigError("matrix rows have unequal lengths");
        for (Eigen::Index k = 0; k < cols; ++k) M(i, k) = j.at(i).at(k).get<double>();
    }
    return M;
}

StateSpec parse_state(const json& j, int modes) {
    StateSpec spec;
    spec.family = j.value("family", std::string("vacuum"));
    spec.mean = Eigen::VectorXd::Zero(2 * modes);
    if (j.contains("mean")) {
        spec.mean = vector_from_json(j.at("mean"));
        if (spec.mean.size() != 2 * modes)
            throw ConfigError("initial_state.mean: wrong length for " + std::to_string(modes) +
                              " mode(s)");
    }
    spec.r = j.value("r", 0.0);
    spec.nu = j.value("nu", 0.0);
    if (j.contains("cov")) spec.cov = matrix_from_json(j.at("cov"));
    if (spec.family == "custom" && spec.cov.size() == 0)
        throw ConfigError("initial_state: custom family needs a 'cov' matrix");
    return spec;
}

FieldProfile parse_field(const json& j) {
    FieldProfile field;
    if (j.contains("impulses")) {
        for (const json& p : j.at("impulses"))
            field.impulses.push_back({p.at("time").get<double>(), p.at("area").get<double>()});
    } else {
        field.t0 = j.value("t0", 0.0);
        field.dt = j.at("dt").get<double>();
        if (field.dt <= 0.0) throw ConfigError("field.dt must be positive");
        for (const json& v : j.at("values")) field.values.push_back(v.get<double>());
    }
    return field;
}

ResponseSpec parse_response(const json& j, int modes) {
    ResponseSpec spec;
    spec.order = j.value("order", 1);
    if (spec.order < 1) throw ConfigError("response.order must be at least 1");
    if (j.contains("interaction")) {
        spec.kind = InteractionKind::Polynomial;
        spec.interaction = symbol_from_json(j.at("interaction"));
    } else if (j.contains("exponential")) {
        spec.kind = InteractionKind::Exponential;
        for (const json& a : j.at("exponential")) {
            Eigen::VectorXd v = vector_from_json(a);
            if (v.size() != 2 * modes)
                throw ConfigError("response.exponential: vector length must be 2n");
            spec.exp_vectors.push_back(std::move(v));
        }
        if (static_cast<int>(spec.exp_vectors.size()) != spec.order + 1)
            throw ConfigError("response.exponential: need order + 1 vectors");
    } else {
        throw ConfigError("response: need 'interaction' or 'exponential'");
    }
    if (j.contains("times")) {
        for (const json& tuple : j.at("times")) {
            std::vector<double> ts;
            for (const json& t : tuple) ts.push_back(t.get<double>());
            if (static_cast<int>(ts.size()) != spec.order + 1)
                throw ConfigError("response.times: each tuple needs order + 1 entries");
            spec.time_tuples.push_back(std::move(ts));
        }
    }
    if (j.contains("grid")) {
        const json& g = j.at("grid");
        spec.grid_t_max = g.at("t_max").get<double>();
        spec.grid_points = g.at("points").get<int>();
        if (spec.grid_points < 2) throw ConfigError("response.grid.points must be at least 2");
        if (g.contains("tail"))
            for (const json& t : g.at("tail")) spec.grid_tail.push_back(t.get<double>());
        if (static_cast<int>(spec.grid_tail.size()) != spec.order)
            throw ConfigError("response.grid.tail: need 'order' fixed trailing times");
    }
    if (spec.time_tuples.empty() && !spec.grid_t_max)
        throw ConfigError("response: need 'times' or 'grid'");
    if (j.contains("equilibrium") && j.at("equilibrium").contains("m_init"))
        spec.equilibrium_m_init = matrix_from_json(j.at("equilibrium").at("m_init"));
    return spec;
}

} // namespace

GaussianState StateSpec::build(double hbar, int modes) const {
    Eigen::VectorXd mu = mean.size() == 2 * modes ? mean : Eigen::VectorXd::Zero(2 * modes);
    const double half = hbar / 2.0;
    if (family == "vacuum" || family == "coherent") {
        return GaussianState(mu, half * Eigen::MatrixXd::Identity(2 * modes, 2 * modes), hbar);
    }
    if (family == "squeezed") {
        if (modes != 1) throw ConfigError("squeezed family is single-mode");
        Eigen::MatrixXd M(2, 2);
        M << half * std::exp(2.0 * r), 0.0, 0.0, half * std::exp(-2.0 * r);
        return GaussianState(mu, M, hbar);
    }
    if (family == "thermal") {
        if (nu < half) throw ConfigError("thermal family needs nu >= hbar/2");
        return GaussianState(mu, nu * Eigen::MatrixXd::Identity(2 * modes, 2 * modes), hbar);
    }
    if (family == "custom") {
        return GaussianState(mu, cov, hbar);
    }
    throw ConfigError("unknown state family '" + family + "'");
}

ExperimentConfig parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& ex) {
        throw ConfigError(std::string("config parse: ") + ex.what());
    }

    ExperimentConfig cfg;
    cfg.config_hash = fnv1a_hex(text);
    try {
        cfg.hbar = j.value("hbar", 1.0);
        if (cfg.hbar <= 0.0) throw ConfigError("hbar must be positive");
        if (!j.contains("hamiltonian")) throw ConfigError("config needs a 'hamiltonian' symbol");
        cfg.hamiltonian = symbol_from_json(j.at("hamiltonian"));
        cfg.modes = cfg.hamiltonian.nvars() / 2;

        if (j.contains("initial_state"))
            cfg.initial_state = parse_state(j.at("initial_state"), cfg.modes);
        else
            cfg.initial_state.mean = Eigen::VectorXd::Zero(2 * cfg.modes);

        if (j.contains("integrator")) {
            const json& g = j.at("integrator");
            cfg.integrator.step = g.value("step", 1e-3);
            if (cfg.integrator.step <= 0.0) throw ConfigError("integrator.step must be positive");
            cfg.integrator.symplectic_tol = g.value("symplectic_tol", kSymplecticTol);
            cfg.integrator.conservation_tol = g.value("conservation_tol", 1e-6);
            if (cfg.integrator.symplectic_tol <= 0.0 || cfg.integrator.conservation_tol <= 0.0)
                throw ConfigError("integrator tolerances must be positive");
            cfg.integrator.record_every = g.value("record_every", 1);
            if (g.contains("trace_orders")) {
                cfg.integrator.trace_orders.clear();
                for (const json& m : g.at("trace_orders"))
                    cfg.integrator.trace_orders.push_back(m.get<int>());
            }
            const std::string closure = g.value("closure", std::string("wick"));
            if (closure == "wick")
                cfg.integrator.closure = Closure::Wick;
            else if (closure == "wavepacket")
                cfg.integrator.closure = Closure::WavePacket;
            else
                throw ConfigError("integrator.closure must be 'wick' or 'wavepacket'");
        }

        if (j.contains("evolve")) cfg.evolve_t_end = j.at("evolve").at("t_end").get<double>();
        if (j.contains("response")) cfg.response = parse_response(j.at("response"), cfg.modes);
        if (j.contains("field")) cfg.field = parse_field(j.at("field"));
        if (j.contains("t_grid")) {
            const json& g = j.at("t_grid");
            const double t0 = g.value("t0", 0.0);
            const double dt = g.at("dt").get<double>();
            const int points = g.at("points").get<int>();
            if (dt <= 0.0 || points < 1) throw ConfigError("t_grid needs dt > 0, points >= 1");
            for (int i = 0; i < points; ++i) cfg.polarization_grid.push_back(t0 + i * dt);
        }
        if (j.contains("oracle")) cfg.oracle_dim = j.at("oracle").value("dim", 60);
        if (j.contains("compare")) {
            const json& g = j.at("compare");
            CompareSpec spec;
            spec.t_end = g.value("t_end", 5.0);
            spec.sample_every = g.value("sample_every", 100);
            spec.mean_tol = g.value("mean_tol", 1e-6);
            spec.cov_tol = g.value("cov_tol", 1e-6);
            spec.response_tol = g.value("response_tol", 1e-6);
            if (spec.mean_tol <= 0.0 || spec.cov_tol <= 0.0 || spec.response_tol <= 0.0)
                throw ConfigError("compare tolerances must be positive");
            cfg.compare = spec;
        }
        if (j.contains("stationary")) {
            const json& g = j.at("stationary");
            StationaryOptions opts;
            opts.alpha = g.value("alpha", 0.5);
            opts.tol = g.value("tol", 1e-10);
            opts.max_iterations = g.value("max_iter", 500);
            if (opts.tol <= 0.0) throw ConfigError("stationary.tol must be positive");
            cfg.stationary = opts;
            if (g.contains("m_init")) cfg.stationary_m_init = matrix_from_json(g.at("m_init"));
        }
        if (j.contains("hbar_sequence"))
            for (const json& h : j.at("hbar_sequence"))
                cfg.hbar_sequence.push_back(h.get<double>());
    } catch (const json::exception& ex) {
        throw ConfigError(std::string("config: ") + ex.what());
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

// --- job runners ------------------------------------------------------------------

namespace {

void write_file(const std::string& path, const std::string& content) {
    std::filesystem::create_directories(std::filesystem::path(path).parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write output file '" + path + "'");
    out << content;
}

JsonValue metadata_json(const ExperimentConfig& cfg) {
    JsonValue meta = JsonValue::object();
    meta.set("tool_version", JsonValue::string(kToolVersion));
    meta.set("config_hash", JsonValue::string(cfg.config_hash));
    return meta;
}

std::string trajectory_csv(const Trajectory& traj, const std::vector<int>& trace_orders) {
    if (traj.samples.empty()) throw Error("trajectory_csv: empty trajectory");
    const int vars = static_cast<int>(traj.samples.front().mean.size());

    std::string out = "t";
    for (int i = 0; i < vars; ++i)
        for (int j = 0; j < vars; ++j)
            out += ",lambda_" + std::to_string(i) + std::to_string(j);
    for (int i = 0; i < vars; ++i) out += ",delta_" + std::to_string(i);
    for (int i = 0; i < vars; ++i) out += ",mean_" + std::to_string(i);
    for (int i = 0; i < vars; ++i)
        for (int j = i; j < vars; ++j) out += ",cov_" + std::to_string(i) + std::to_string(j);
    out += ",energy,detM";
    for (int m : trace_orders) out += ",L" + std::to_string(m);
    out += ",sympl_residual\n";

    for (const TrajectorySample& s : traj.samples) {
        out += format_double(s.t);
        for (int i = 0; i < vars; ++i)
            for (int j = 0; j < vars; ++j) out += "," + format_double(s.prop.lambda(i, j));
        for (int i = 0; i < vars; ++i) out += "," + format_double(s.prop.delta(i));
        for (int i = 0; i < vars; ++i) out += "," + format_double(s.mean(i));
        for (int i = 0; i < vars; ++i)
            for (int j = i; j < vars; ++j) out += "," + format_double(s.cov(i, j));
        out += "," + format_double(s.energy);
        out += "," + format_double(s.invariants.detM);
        for (int m : trace_orders) out += "," + format_double(s.invariants.L.at(m));
        out += "," + format_double(s.symplectic_residual);
        out += "\n";
    }
    return out;
}

JsonValue invariants_json(const InvariantsRecord& rec) {
    JsonValue inv = JsonValue::object();
    inv.set("detM", JsonValue::number(rec.detM));
    JsonValue L = JsonValue::object();
    for (const auto& [m, v] : rec.L) L.set("L" + std::to_string(m), JsonValue::number(v));
    inv.set("L", std::move(L));
    inv.set("dcoeffs", vector_to_json(rec.dcoeffs));
    return inv;
}

GaussianState response_equilibrium(const ExperimentConfig& cfg, const ResponseSpec& spec) {
    Eigen::MatrixXd M_init;
    if (spec.equilibrium_m_init) {
        M_init = *spec.equilibrium_m_init;
    } else {
        M_init = 0.5 * cfg.hbar * Eigen::MatrixXd::Identity(2 * cfg.modes, 2 * cfg.modes);
    }
    return stationary_solve(cfg.hamiltonian, M_init, cfg.hbar);
}

ResponseRequest make_request(const ExperimentConfig& cfg, const ResponseSpec& spec,
                             const GaussianState& eq, const std::vector<double>& times) {
    ResponseRequest req{spec.order,
                        times,
                        spec.kind,
                        spec.kind == InteractionKind::Polynomial ? spec.interaction
                                                                 : PolySymbol(2 * cfg.modes),
                        spec.exp_vectors,
                        cfg.hamiltonian,
                        eq};
    return req;
}

} // namespace

int run_evolve(const ExperimentConfig& cfg, const std::string& out_dir, int /*threads*/,
               bool verbose) {
    if (!cfg.evolve_t_end) throw ConfigError("evolve: config needs an 'evolve.t_end' block");
    const GaussianState state0 = cfg.initial_state.build(cfg.hbar, cfg.modes);

    JsonValue diag = JsonValue::object();
    diag.set("metadata", metadata_json(cfg));
    int code = 0;
    try {
        const Trajectory traj = integrate(cfg.hamiltonian, state0, *cfg.evolve_t_end,
                                          cfg.integrator);
        const ConservationReport report = conservation_monitor(traj);
        write_file(out_dir + "/trajectory.csv",
                   trajectory_csv(traj, cfg.integrator.trace_orders));

        diag.set("t_end", JsonValue::number(*cfg.evolve_t_end));
        diag.set("samples", JsonValue::integer(static_cast<long long>(traj.samples.size())));
        diag.set("energy_drift", JsonValue::number(report.energy_drift));
        diag.set("detM_drift", JsonValue::number(report.detM_drift));
        JsonValue L = JsonValue::object();
        for (const auto& [m, v] : report.L_drift)
            L.set("L" + std::to_string(m), JsonValue::number(v));
        diag.set("L_drift", std::move(L));
        diag.set("dcoeff_drift", JsonValue::number(report.dcoeff_drift));
        diag.set("max_symplectic_residual", JsonValue::number(report.max_symplectic_residual));
        diag.set("initial_invariants", invariants_json(traj.samples.front().invariants));
        diag.set("status", JsonValue::string("ok"));
    } catch (const SymplecticDrift& ex) {
        diag.set("status", JsonValue::string("symplectic_drift"));
        diag.set("error", JsonValue::string(ex.what()));
        code = 3;
    } catch (const ConservationDrift& ex) {
        diag.set("status", JsonValue::string("conservation_drift"));
        diag.set("error", JsonValue::string(ex.what()));
        code = 3;
    }
    write_file(out_dir + "/diagnostics.json", diag.dump());
    if (verbose) std::fprintf(stderr, "evolve: wrote %s/trajectory.csv\n", out_dir.c_str());
    return code;
}

int run_respond(const ExperimentConfig& cfg, const std::string& out_dir, int threads,
                bool verbose) {
    if (!cfg.response) throw ConfigError("respond: config needs a 'response' block");
    const ResponseSpec& spec = *cfg.response;
    const GaussianState eq = response_equilibrium(cfg, spec);

    std::vector<std::vector<double>> tuples = spec.time_tuples;
    if (spec.grid_t_max) {
        const double dt = *spec.grid_t_max / (spec.grid_points - 1);
        for (int i = 0; i < spec.grid_points; ++i) {
            std::vector<double> tuple{i * dt};
            tuple.insert(tuple.end(), spec.grid_tail.begin(), spec.grid_tail.end());
            tuples.push_back(std::move(tuple));
        }
    }

    std::vector<Complex> values(tuples.size());
    {
        std::vector<std::thread> pool;
        std::atomic<std::size_t> next{0};
        const int nthreads = std::max(1, std::min<int>(threads, static_cast<int>(tuples.size())));
        auto work = [&] {
            for (std::size_t i = next.fetch_add(1); i < tuples.size(); i = next.fetch_add(1)) {
                ResponseRequest req = make_request(cfg, spec, eq, tuples[i]);
                values[i] = response_S(req);
            }
        };
        if (nthreads == 1) {
            work();
        } else {
            for (int w = 0; w < nthreads; ++w) pool.emplace_back(work);
            for (std::thread& th : pool) th.join();
        }
    }

    JsonValue out = JsonValue::object();
    out.set("order", JsonValue::integer(spec.order));
    out.set("hbar", JsonValue::number(cfg.hbar));
    out.set("kind", JsonValue::string(spec.kind == InteractionKind::Polynomial
                                          ? "polynomial"
                                          : "exponential"));
    JsonValue times = JsonValue::array();
    for (const auto& tuple : tuples) {
        JsonValue tj = JsonValue::array();
        for (double t : tuple) tj.push_back(JsonValue::number(t));
        times.push_back(std::move(tj));
    }
    out.set("times", std::move(times));
    JsonValue re = JsonValue::array(), im = JsonValue::array();
    for (Complex v : values) {
        re.push_back(JsonValue::number(v.real()));
        im.push_back(JsonValue::number(v.imag()));
    }
    out.set("values_re", std::move(re));
    out.set("values_im", std::move(im));

    // For a Hermitian interaction, i^N S is real; report the worst residual.
    Complex iN(1.0, 0.0);
    for (int k = 0; k < spec.order; ++k) iN *= Complex(0.0, 1.0);
    double imag_residual = 0.0, scale = 0.0;
    for (Complex v : values) {
        imag_residual = std::max(imag_residual, std::abs((iN * v).imag()));
        scale = std::max(scale, std::abs(v));
    }
    out.set("i_pow_N_imag_residual", JsonValue::number(imag_residual));
    out.set("max_abs_value", JsonValue::number(scale));

    JsonValue eqj = JsonValue::object();
    eqj.set("mean", vector_to_json(eq.mean()));
    eqj.set("cov", matrix_to_json(eq.cov()));
    eqj.set("stationary_residual",
            JsonValue::number(stationary_residual(cfg.hamiltonian, eq)));
    out.set("equilibrium", std::move(eqj));

    if (!cfg.hbar_sequence.empty() && !tuples.empty()) {
        // probe the tuple with the strongest response; degenerate tuples
        // (coincident times) would fit a meaningless leading order
        std::size_t pick = 0;
        for (std::size_t i = 1; i < values.size(); ++i)
            if (std::abs(values[i]) > std::abs(values[pick])) pick = i;
        ResponseRequest req = make_request(cfg, spec, eq, tuples[pick]);
        const ClassicalLimitReport probe = classical_limit_probe(req, cfg.hbar_sequence);
        JsonValue picked = JsonValue::array();
        for (double t : tuples[pick]) picked.push_back(JsonValue::number(t));
        JsonValue pj = JsonValue::object();
        JsonValue hbars = JsonValue::array(), pre = JsonValue::array(), pim = JsonValue::array();
        for (std::size_t i = 0; i < probe.hbars.size(); ++i) {
            hbars.push_back(JsonValue::number(probe.hbars[i]));
            pre.push_back(JsonValue::number(probe.values[i].real()));
            pim.push_back(JsonValue::number(probe.values[i].imag()));
        }
        pj.set("times", std::move(picked));
        pj.set("hbars", std::move(hbars));
        pj.set("values_re", std::move(pre));
        pj.set("values_im", std::move(pim));
        pj.set("fitted_order", JsonValue::number(probe.fitted_order));
        pj.set("limit_power", JsonValue::integer(probe.limit_power));
        pj.set("limit_re", JsonValue::number(probe.limit_estimate.real()));
        pj.set("limit_im", JsonValue::number(probe.limit_estimate.imag()));
        pj.set("verdict", JsonValue::string(probe.bounded ? "bounded" : "divergent"));
        out.set("classical_limit", std::move(pj));
    }

    out.set("metadata", metadata_json(cfg));
    write_file(out_dir + "/response.json", out.dump());

    if (cfg.field) {
        if (cfg.polarization_grid.empty())
            throw ConfigError("respond: a field profile needs a 't_grid' output grid");
        ResponseRequest req_template =
            make_request(cfg, spec, eq,
                         std::vector<double>(static_cast<std::size_t>(spec.order) + 1, 0.0));
        const std::vector<double> P =
            polarization(req_template, *cfg.field, cfg.polarization_grid, threads);
        std::string csv = "t,P\n";
        for (std::size_t i = 0; i < P.size(); ++i)
            csv += format_double(cfg.polarization_grid[i]) + "," + format_double(P[i]) + "\n";
        write_file(out_dir + "/polarization.csv", csv);
    }
    if (verbose) std::fprintf(stderr, "respond: wrote %s/response.json\n", out_dir.c_str());
    return 0;
}

int run_compare(const ExperimentConfig& cfg, const std::string& out_dir, int /*threads*/,
                bool verbose) {
    if (!cfg.compare) throw ConfigError("compare: config needs a 'compare' block");
    if (cfg.modes != 1) throw UnsupportedDim("compare: the Fock oracle is single-mode");
    const CompareSpec& spec = *cfg.compare;
    const GaussianState state0 = cfg.initial_state.build(cfg.hbar, cfg.modes);
    const int d = cfg.oracle_dim;

    IntegratorOptions iopts = cfg.integrator;
    iopts.record_every = spec.sample_every;
    const Trajectory traj = integrate(cfg.hamiltonian, state0, spec.t_end, iopts);

    const FockOperator Hop = weyl_quantize(cfg.hamiltonian, d, cfg.hbar);
    const FockState rho0 = gaussian_to_fock(state0, d);
    const FockOperator P = momentum_op(d, cfg.hbar);
    const FockOperator X = position_op(d, cfg.hbar);
    const FockOperator P2{d, P.mat * P.mat, cfg.hbar};
    const FockOperator X2{d, X.mat * X.mat, cfg.hbar};
    const FockOperator PX{d, 0.5 * (P.mat * X.mat + X.mat * P.mat), cfg.hbar};

    double max_mean_err = 0.0, max_cov_err = 0.0;
    JsonValue rows = JsonValue::array();
    for (const TrajectorySample& s : traj.samples) {
        const FockState rho_t = oracle_evolve(Hop, rho0, s.t);
        Eigen::VectorXd mean_o(2);
        mean_o << oracle_expect(P, rho_t).real(), oracle_expect(X, rho_t).real();
        Eigen::MatrixXd cov_o(2, 2);
        cov_o(0, 0) = oracle_expect(P2, rho_t).real() - mean_o(0) * mean_o(0);
        cov_o(1, 1) = oracle_expect(X2, rho_t).real() - mean_o(1) * mean_o(1);
        cov_o(0, 1) = cov_o(1, 0) = oracle_expect(PX, rho_t).real() - mean_o(0) * mean_o(1);

        const double mean_err = (s.mean - mean_o).cwiseAbs().maxCoeff();
        const double cov_err = (s.cov - cov_o).cwiseAbs().maxCoeff();
        max_mean_err = std::max(max_mean_err, mean_err);
        max_cov_err = std::max(max_cov_err, cov_err);

        JsonValue row = JsonValue::object();
        row.set("t", JsonValue::number(s.t));
        row.set("mean_error", JsonValue::number(mean_err));
        row.set("cov_error", JsonValue::number(cov_err));
        rows.push_back(std::move(row));
    }

    const bool pass = max_mean_err <= spec.mean_tol && max_cov_err <= spec.cov_tol;
    JsonValue out = JsonValue::object();
    out.set("oracle_dim", JsonValue::integer(d));
    out.set("t_end", JsonValue::number(spec.t_end));
    out.set("max_mean_error", JsonValue::number(max_mean_err));
    out.set("max_cov_error", JsonValue::number(max_cov_err));
    out.set("mean_tol", JsonValue::number(spec.mean_tol));
    out.set("cov_tol", JsonValue::number(spec.cov_tol));
    out.set("pass", JsonValue::boolean(pass));
    out.set("per_time", std::move(rows));
    out.set("metadata", metadata_json(cfg));
    write_file(out_dir + "/compare.json", out.dump());
    if (verbose)
        std::fprintf(stderr, "compare: max mean err %.3e, max cov err %.3e\n", max_mean_err,
                     max_cov_err);
    return pass ? 0 : 3;
}

int run_stationary(const ExperimentConfig& cfg, const std::string& out_dir, int /*threads*/,
                   bool verbose) {
    StationaryOptions opts = cfg.stationary.value_or(StationaryOptions{});
    Eigen::MatrixXd M_init =
        cfg.stationary_m_init.value_or(Eigen::MatrixXd(0.5 * cfg.hbar *
                                                       Eigen::MatrixXd::Identity(2 * cfg.modes,
                                                                                 2 * cfg.modes)));
    const GaussianState eq = stationary_solve(cfg.hamiltonian, M_init, cfg.hbar, opts);

    JsonValue out = JsonValue::object();
    out.set("hbar", JsonValue::number(cfg.hbar));
    out.set("mean", vector_to_json(eq.mean()));
    out.set("cov", matrix_to_json(eq.cov()));
    out.set("residual", JsonValue::number(stationary_residual(cfg.hamiltonian, eq)));
    out.set("energy", JsonValue::number(energy(cfg.hamiltonian, eq)));
    out.set("metadata", metadata_json(cfg));
    write_file(out_dir + "/stationary.json", out.dump());
    if (verbose) std::fprintf(stderr, "stationary: wrote %s/stationary.json\n", out_dir.c_str());
    return 0;
}

int run_invariants(const ExperimentConfig& cfg, const std::string& out_dir, int /*threads*/,
                   bool verbose) {
    const GaussianState state = cfg.initial_state.build(cfg.hbar, cfg.modes);
    const InvariantsRecord rec =
        universal_invariants(state.cov(), cfg.integrator.trace_orders);

    JsonValue out = JsonValue::object();
    out.set("hbar", JsonValue::number(cfg.hbar));
    out.set("cov", matrix_to_json(state.cov()));
    out.set("invariants", invariants_json(rec));
    out.set("metadata", metadata_json(cfg));
    write_file(out_dir + "/invariants.json", out.dump());
    if (verbose) std::fprintf(stderr, "invariants: wrote %s/invariants.json\n", out_dir.c_str());
    return 0;
}

} // namespace scqa
