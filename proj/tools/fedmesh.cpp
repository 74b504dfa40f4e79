// fedmesh: run federation scenarios, granularity sweeps and oracle suites.
#include "fedmesh/errors.hpp"
#include "fedmesh/event_loop.hpp"
#include "fedmesh/experiments.hpp"
#include "fedmesh/oracle.hpp"
#include "fedmesh/scenario.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#ifndef FEDMESH_SCENARIO_DIR
#define FEDMESH_SCENARIO_DIR "scenarios"
#endif

namespace fs = std::filesystem;
using namespace fedmesh;

namespace {

enum Exit { kOk = 0, kInvalid = 2, kIo = 3, kInternal = 4, kStranded = 5 };

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A bare name such as "melbourne-5" falls back to the bundled scenarios.
fs::path resolve(const std::string& arg) {
    fs::path p(arg);
    if (fs::exists(p)) return p;
    for (fs::path dir : {fs::path(FEDMESH_SCENARIO_DIR)}) {
        if (fs::exists(dir / arg)) return dir / arg;
        if (fs::exists(dir / (arg + ".scn"))) return dir / (arg + ".scn");
    }
    return p;
}

std::string read_file(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    if (!f) throw IoError(fmt::format("cannot read {}", p.string()));
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::optional<Scenario> load(const std::string& arg, int& code) {
    const auto path = resolve(arg);
    auto parsed = parse_scenario(read_file(path));
    if (!parsed.diagnostics.empty()) {
        for (const auto& d : parsed.diagnostics) std::cerr << path.string() << ":" << d.to_string() << "\n";
        code = kInvalid;
        return std::nullopt;
    }
    return parsed.scenario;
}

fs::path out_dir(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("FEDMESH_OUT"); env && *env) return env;
    return "out";
}

int report_stranded(const experiments::RunOutput& out) {
    if (out.summary.stranded_claims.empty()) return kOk;
    std::cerr << out.summary.stranded_claims.size() << " stranded claims:\n";
    for (const auto& id : out.summary.stranded_claims) std::cerr << "  " << id << "\n";
    return kStranded;
}

int cmd_validate(const std::string& file) {
    int code = kOk;
    if (!load(file, code)) return code;
    std::cout << "ok\n";
    return kOk;
}

int cmd_run(const std::string& file, std::optional<std::uint64_t> seed, const std::string& out, const std::string& fmt_name) {
    int code = kOk;
    auto s = load(file, code);
    if (!s) return code;
    const auto result = experiments::run_scenario(*s, seed);
    const auto dir = out_dir(out);
    experiments::write_run(dir, result, fmt_name == "json" ? experiments::Format::Json : experiments::Format::Csv);
    spdlog::info("{} events, ended at {} ms, outputs in {}", result.summary.events, result.summary.end_time_ms,
                 dir.string());
    return report_stranded(result);
}

int cmd_sweep(const std::string& file, const std::string& model_name, const std::string& out) {
    int code = kOk;
    auto s = load(file, code);
    if (!s) return code;
    const auto model = *workload::parse_model(model_name);
    const auto result = experiments::run_sweep(*s);
    const auto dir = out_dir(out);
    experiments::write_sweep(dir, result, model);
    for (const auto& run : result.runs) {
        spdlog::info("seed {}: {} events, ended at {} ms", run.seed, run.summary.events, run.summary.end_time_ms);
        if (int rc = report_stranded(run)) return rc;
    }
    return kOk;
}

int cmd_oracle(std::uint64_t trials, std::optional<std::size_t> dims, std::uint64_t seed) {
    using namespace oracle;
    std::vector<SuiteResult> suites;
    const std::vector<std::size_t> dim_list = dims ? std::vector<std::size_t>{*dims} : std::vector<std::size_t>{2, 3, 4};
    for (auto d : dim_list) suites.push_back(rendezvous_suite(trials, d, seed, Exec::Parallel));
    suites.push_back(rendezvous_exhaustive_2d());
    const auto small = std::max<std::uint64_t>(1, trials / 10);
    suites.push_back(allocation_suite(small, seed, Exec::Parallel));
    suites.push_back(routing_suite(small, 64, seed, Exec::Parallel));
    bool ok = true;
    for (const auto& s : suites) {
        std::cout << fmt::format("{:<26} trials={:<7} failures={:<4} interesting={}\n", s.name, s.trials, s.failures,
                                 s.interesting);
        if (!s.ok()) std::cout << "  first failure: " << s.first_failure << "\n";
        ok = ok && s.ok();
    }
    std::cout << (ok ? "PASS" : "FAIL") << "\n";
    return ok ? kOk : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Federated cloud scheduling simulator"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string level = "warn";
    app.add_option("--log-level", level, "error|warn|info|trace")
        ->check(CLI::IsMember({"error", "warn", "info", "trace"}));

    std::string file, out, format = "csv", model;
    std::optional<std::uint64_t> seed;

    auto* validate = app.add_subcommand("validate", "Check a scenario file");
    validate->add_option("file", file, "Scenario file or bundled scenario name")->required();

    auto* run = app.add_subcommand("run", "Run a scenario to quiescence");
    run->add_option("file", file)->required();
    run->add_option("--seed", seed, "Override the scenario seed");
    run->add_option("--out", out, "Output directory (default $FEDMESH_OUT or ./out)");
    run->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}));

    auto* sweep = app.add_subcommand("sweep", "Run the 5x5..13x13 granularity sweep");
    sweep->add_option("file", file)->required();
    sweep->add_option("--model", model)->required()->check(CLI::IsMember({"task", "thread"}));
    sweep->add_option("--out", out);

    std::uint64_t trials = 10000, oracle_seed = 1;
    std::optional<std::size_t> dims;
    auto* orc = app.add_subcommand("oracle", "Brute-force equivalence suites");
    orc->add_option("--trials", trials)->check(CLI::PositiveNumber);
    orc->add_option("--dims", dims)->check(CLI::Range(1, 6));
    orc->add_option("--seed", oracle_seed);

    CLI11_PARSE(app, argc, argv);

    auto logger = spdlog::stderr_color_mt("fedmesh");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::from_str(level));

    try {
        if (*validate) return cmd_validate(file);
        if (*run) return cmd_run(file, seed, out, format);
        if (*sweep) return cmd_sweep(file, model, out);
        return cmd_oracle(trials, dims, oracle_seed);
    } catch (const IoError& e) {
        spdlog::error("{}", e.what());
        return kIo;
    } catch (const std::filesystem::filesystem_error& e) {
        spdlog::error("{}", e.what());
        return kIo;
    } catch (const std::ios_base::failure& e) {
        spdlog::error("write failed: {}", e.what());
        return kIo;
    } catch (const InvalidArgument& e) {
        spdlog::error("{}", e.what());
        return kInvalid;
    } catch (const std::exception& e) {
        // Handler failures, consistency errors and inbox overflow.
        spdlog::error("internal failure: {}", e.what());
        return kInternal;
    }
}
