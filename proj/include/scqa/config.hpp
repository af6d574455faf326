#ifndef SCQA_CONFIG_HPP
#define SCQA_CONFIG_HPP

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "scqa/dynamics.hpp"
#include "scqa/poly_symbol.hpp"
#include "scqa/response.hpp"

namespace scqa {

inline constexpr const char* kToolVersion = "0.1.0";

// --- canonical JSON encoding of polynomial symbols --------------------------
//
// A symbol literal is a list of term records
//   {"exponents": [a_1, ..., a_2n], "re": <real>, "im": <imag>, "hbar_grade": k}
// with "im" defaulting to 0 and "hbar_grade" to 0.

std::string symbol_to_json(const PolySymbol& A);
PolySymbol symbol_from_json_text(const std::string& text);

// --- deterministic JSON output ----------------------------------------------
//
// Output files must be byte-identical for identical configs: object keys keep
// insertion order and every number is printed with 17 significant digits.

class JsonValue {
public:
    static JsonValue number(double v);
    static JsonValue integer(long long v);
    static JsonValue boolean(bool v);
    static JsonValue string(std::string v);
    static JsonValue array(std::vector<JsonValue> items = {});
    static JsonValue object();

    void push_back(JsonValue v);                     // arrays
    void set(const std::string& key, JsonValue v);   // objects

    std::string dump(int indent = 2) const;

private:
    enum class Kind { Number, Integer, Boolean, String, Array, Object };
    Kind kind_ = Kind::Object;
    double num_ = 0.0;
    long long int_ = 0;
    bool bool_ = false;
    std::string str_;
    std::vector<JsonValue> items_;
    std::vector<std::pair<std::string, JsonValue>> fields_;

    void write(std::string& out, int indent, int depth) const;
};

JsonValue matrix_to_json(const Eigen::MatrixXd& M);
JsonValue vector_to_json(const Eigen::VectorXd& v);

std::string format_double(double v); // %.17g
std::string fnv1a_hex(const std::string& bytes);

// --- experiment configuration -----------------------------------------------

struct StateSpec {
    std::string family = "vacuum"; // vacuum|coherent|squeezed|thermal|custom
    Eigen::VectorXd mean;          // defaults to zeros
    double r = 0.0;                // squeezed
    double nu = 0.0;               // thermal
    Eigen::MatrixXd cov;           // custom

    GaussianState build(double hbar, int modes) const;
};

struct ResponseSpec {
    int order = 1;
    InteractionKind kind = InteractionKind::Polynomial;
    PolySymbol interaction;
    std::vector<Eigen::VectorXd> exp_vectors;
    std::vector<std::vector<double>> time_tuples; // explicit tuples, or
    std::optional<double> grid_t_max;             // tau_1 sweep with fixed tail
    int grid_points = 0;
    std::vector<double> grid_tail;
    std::optional<Eigen::MatrixXd> equilibrium_m_init;
};

struct CompareSpec {
    double t_end = 5.0;
    int sample_every = 100;
    double mean_tol = 1e-6;
    double cov_tol = 1e-6;
    double response_tol = 1e-6;
};

struct ExperimentConfig {
    double hbar = 1.0;
    int modes = 1;
    PolySymbol hamiltonian;
    StateSpec initial_state;
    IntegratorOptions integrator;
    std::optional<double> evolve_t_end;
    std::optional<ResponseSpec> response;
    std::optional<FieldProfile> field;
    std::vector<double> polarization_grid;
    int oracle_dim = 60;
    std::optional<CompareSpec> compare;
    std::optional<StationaryOptions> stationary;
    std::optional<Eigen::MatrixXd> stationary_m_init;
    std::vector<double> hbar_sequence;

    std::string config_hash; // FNV-1a of the raw config bytes
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// --- job runners --------------------------------------------------------------
//
// Each runner writes its artifacts under out_dir and returns a process exit
// code: 0 success, 2 config error, 3 numerical-tolerance failure,
// 4 truncation failure.

int run_evolve(const ExperimentConfig& config, const std::string& out_dir, int threads,
               bool verbose);
int run_respond(const ExperimentConfig& config, const std::string& out_dir, int threads,
                bool verbose);
int run_compare(const ExperimentConfig& config, const std::string& out_dir, int threads,
                bool verbose);
int run_stationary(const ExperimentConfig& config, const std::string& out_dir, int threads,
                   bool verbose);
int run_invariants(const ExperimentConfig& config, const std::string& out_dir, int threads,
                   bool verbose);

} // namespace scqa

#endif
