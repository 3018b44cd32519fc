#include "metlab/harness.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

using metlab::io::json;

namespace {

struct Common {
    std::string scenario;
    std::string catalog;
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> n_max;
    std::string out;
    int threads = 0;
};

void add_common(CLI::App* sub, Common& c) {
    auto* s = sub->add_option("--scenario", c.scenario, "scenario JSON file");
    auto* k = sub->add_option("--catalog", c.catalog, "catalog scenario name");
    s->excludes(k);
    sub->add_option("--seed", c.seed, "seed (u64)");
    sub->add_option("--n-max", c.n_max, "horizon")->check(CLI::PositiveNumber);
    sub->add_option("--out", c.out, "directory for report.json and trace CSVs");
    sub->add_option("--threads", c.threads, "worker threads (default: METLAB_THREADS or 1)")->check(CLI::NonNegativeNumber);
}

int threads_from(const Common& c) {
    if (c.threads > 0) return c.threads;
    if (const char* env = std::getenv("METLAB_THREADS")) {
        int t = std::atoi(env);
        if (t > 0) return t;
    }
    return 1;
}

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

metlab::ScenarioSpec load(const Common& c, const std::string& experiment) {
    metlab::ScenarioSpec spec;
    if (!c.scenario.empty()) {
        std::ifstream f(c.scenario);
        if (!f) throw UsageError("cannot open scenario file " + c.scenario);
        try {
            spec = metlab::spec_from_json(json::parse(f));
        } catch (const json::exception& e) {
            throw UsageError(std::string("invalid scenario: ") + e.what());
        } catch (const std::invalid_argument& e) {
            throw UsageError(std::string("invalid scenario: ") + e.what());
        }
        if (c.seed) {
            spec.params.seeds = {*c.seed};
            spec.cocycle["seed"] = *c.seed;
        }
    } else if (!c.catalog.empty()) {
        try {
            spec = metlab::build_scenario(c.catalog, c.seed.value_or(1));
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
    } else {
        throw UsageError("one of --scenario or --catalog is required");
    }
    if (c.n_max) spec.params.n_max = *c.n_max;
    if (!experiment.empty()) spec.experiment = experiment;
    return spec;
}

int finish(const metlab::Report& r, const Common& c) {
    for (const auto& ch : r.checks)
        std::printf("%s %s%s%s\n", ch.pass ? "PASS" : "FAIL", ch.name.c_str(), ch.detail.empty() ? "" : ": ",
                    ch.detail.c_str());
    if (r.results.contains("spectrum")) std::printf("mu = %s\n", r.results["spectrum"]["mu"].dump().c_str());
    if (!c.out.empty()) {
        metlab::write_report(r, c.out);
        std::printf("report written to %s\n", c.out.c_str());
    }
    std::printf("digest %s  runtime %.3f s\n", metlab::payload_digest(r).c_str(), r.runtime_s);
    return r.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"metlab: Oseledets decompositions of matrix cocycles"};
    app.require_subcommand(1);

    Common spectrum_opt, decompose_opt, kingman_opt, verify_opt;
    auto* spectrum = app.add_subcommand("spectrum", "Lyapunov spectrum from the growth of exterior powers");
    add_common(spectrum, spectrum_opt);
    auto* decompose = app.add_subcommand("decompose", "full fast/slow decomposition with deflation");
    add_common(decompose, decompose_opt);
    auto* kingman = app.add_subcommand("kingman", "compare the four subadditive estimators on log-norm");
    add_common(kingman, kingman_opt);

    auto* verify = app.add_subcommand("verify", "operator inequality checks, or acceptance criteria");
    add_common(verify, verify_opt);
    std::string criterion;
    int instances = 200;
    verify->add_option("--criterion", criterion, "criterion number 1..11, or 'all'");
    verify->add_option("--instances", instances, "random instances for the inequality checks")
        ->check(CLI::PositiveNumber);

    auto* plotdata = app.add_subcommand("plotdata", "print one trace of a report as CSV");
    std::string report_path, trace_id;
    plotdata->add_option("--report", report_path, "report.json")->required();
    plotdata->add_option("--trace", trace_id, "trace id")->required();

    auto* catalog = app.add_subcommand("catalog", "list catalog scenarios or print one as JSON");
    std::string catalog_name;
    std::uint64_t catalog_seed = 1;
    catalog->add_option("name", catalog_name);
    catalog->add_option("--seed", catalog_seed);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*spectrum) {
            auto spec = load(spectrum_opt, "spectrum");
            return finish(metlab::run(spec, {threads_from(spectrum_opt)}), spectrum_opt);
        }
        if (*decompose) {
            auto spec = load(decompose_opt, "decompose");
            return finish(metlab::run(spec, {threads_from(decompose_opt)}), decompose_opt);
        }
        if (*kingman) {
            auto spec = load(kingman_opt, "kingman_compare");
            return finish(metlab::run(spec, {threads_from(kingman_opt)}), kingman_opt);
        }
        if (*verify) {
            if (!criterion.empty()) {
                int lo = 1, hi = metlab::kCriteria;
                if (criterion != "all") {
                    try {
                        lo = hi = std::stoi(criterion);
                    } catch (const std::exception&) {
                        throw UsageError("--criterion expects 1.." + std::to_string(metlab::kCriteria) + " or all");
                    }
                    if (lo < 1 || lo > metlab::kCriteria) throw UsageError("--criterion out of range");
                }
                bool all = true;
                for (int id = lo; id <= hi; ++id) {
                    auto ch = metlab::run_criterion(id, {threads_from(verify_opt)});
                    std::printf("%s %d %s: %s\n", ch.pass ? "PASS" : "FAIL", id, ch.name.c_str(), ch.detail.c_str());
                    std::fflush(stdout);
                    all = all && ch.pass;
                }
                return all ? 0 : 1;
            }
            metlab::ScenarioSpec spec;
            if (!verify_opt.scenario.empty() || !verify_opt.catalog.empty()) {
                spec = load(verify_opt, "verify_lemmas");
            } else {
                spec.name = "verify_lemmas";
                spec.experiment = "verify_lemmas";
                spec.params.seeds = {verify_opt.seed.value_or(1)};
            }
            spec.params.instances = instances;
            return finish(metlab::run(spec), verify_opt);
        }
        if (*plotdata) {
            std::ifstream f(report_path);
            if (!f) throw UsageError("cannot open report " + report_path);
            metlab::Report r;
            try {
                r = metlab::report_from_json(json::parse(f));
            } catch (const json::exception& e) {
                throw UsageError(std::string("invalid report: ") + e.what());
            }
            try {
                std::cout << metlab::emit_plotdata(r, trace_id);
            } catch (const std::out_of_range& e) {
                throw UsageError(e.what());
            }
            return 0;
        }
        if (*catalog) {
            if (catalog_name.empty()) {
                for (const auto& n : metlab::catalog_names()) std::printf("%s\n", n.c_str());
                return 0;
            }
            try {
                std::cout << metlab::to_json(metlab::build_scenario(catalog_name, catalog_seed)).dump(2) << '\n';
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
            return 0;
        }
    } catch (const UsageError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "failed: %s\n", e.what());
        return 1;
    }
    return 2;
}
