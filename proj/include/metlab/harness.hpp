#pragma once

#include "metlab/io.hpp"
#include "metlab/kingman.hpp"
#include "metlab/oseledets.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace metlab {

struct GroundTruth {
    std::vector<double> mu;  // exponents repeated by multiplicity, −∞ allowed
    std::vector<double> lambda;
    std::vector<int> m;
    std::vector<Mat> E;                // fast-space bases, when closed form
    std::optional<Mat> projection;     // Π of the first level, when closed form
    std::vector<double> mu_mc;         // strong-law average along the orbit of the initial point
    std::string note;
};

struct Params {
    std::int64_t n_max = 1000;
    int k_max = 0;
    std::optional<double> eps;
    std::vector<Mode> modes{Mode::forward, Mode::backward, Mode::window, Mode::balanced};
    std::vector<std::uint64_t> seeds;
    double tolerance = 0.05;
    int instances = 200;
    double gap_threshold = 0.1;
    int L_target = 0;
    Selection selection = Selection::optimized;
};

struct ScenarioSpec {
    int schema = 1;
    std::string name;
    io::json cocycle;
    std::string experiment = "spectrum";  // spectrum | decompose | kingman_compare | verify_lemmas
    Params params;
    std::optional<GroundTruth> truth;
};

const std::vector<std::string>& catalog_names();
// Throws std::invalid_argument for names outside the catalog.
ScenarioSpec build_scenario(const std::string& name, std::uint64_t seed);

io::json to_json(const ScenarioSpec& s);
ScenarioSpec spec_from_json(const io::json& j);

struct Check {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct Report {
    std::string scenario_digest;
    std::string experiment;
    io::json results;
    std::vector<Check> checks;
    bool pass = false;
    double runtime_s = 0.0;
    io::json versions;
    std::map<std::string, std::vector<TracePoint>> traces;
};

struct RunOptions {
    int threads = 1;
};

Report run(const ScenarioSpec& spec, const RunOptions& opt = {});

io::json to_json(const Report& r);
Report report_from_json(const io::json& j);
// digest of everything except runtime
std::string payload_digest(const Report& r);

// "n,value" header, then one row per point with 17 significant digits, LF.
// Throws std::out_of_range for an unknown trace id.
std::string emit_plotdata(const Report& r, const std::string& trace_id);

// report.json plus <trace>.csv for every trace
void write_report(const Report& r, const std::string& dir);

// The acceptance suite as named checks, numbered 1..11.
inline constexpr int kCriteria = 11;
std::string criterion_name(int id);
Check run_criterion(int id, const RunOptions& opt = {});

}  // namespace metlab
