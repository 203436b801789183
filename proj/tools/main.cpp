#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "inject_sim/errors.hpp"
#include "inject_sim/experiment.hpp"
#include "inject_sim/protocol.hpp"

namespace {

using namespace inject;

void setup_logging() {
    auto logger = spdlog::stderr_color_mt("inject-sim");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::warn);
    if (const char* lvl = std::getenv("INJECT_SIM_LOG")) {
        spdlog::set_level(spdlog::level::from_str(lvl));
    }
}

SimulationConfig config_or_default(const std::string& path) {
    return path.empty() ? SimulationConfig{} : load_config(path);
}

int report(const ExperimentResult& r, const std::filesystem::path& out) {
    nlohmann::json j;
    j["out"] = out.string();
    if (!r.peak_R.empty()) {
        j["peak_R"] = r.peak_R;
    } else {
        j["mise"] = r.summary.mise;
        j["rms"] = r.summary.rms;
        j["accumulated_reward"] = r.summary.accumulated_reward;
        j["decisions"] = r.decisions;
    }
    j["t_max_hr"] = r.summary.t_max_hr;
    std::cout << j.dump() << std::endl;
    if (r.summary.aborted) {
        std::cerr << "error: run aborted: " << r.summary.error << "\n";
        return 3;
    }
    return 0;
}

std::vector<double> parse_times(const std::string& s) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const std::size_t end = s.find(',', start);
        const std::string tok = s.substr(start, end == std::string::npos ? std::string::npos : end - start);
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (tok.empty() || used != tok.size()) throw ConfigError("--times: '" + tok + "' is not a number");
        out.push_back(v);
        if (end == std::string::npos) break;
        start = end + 1;
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    setup_logging();
    CLI::App app{"Reservoir injection simulator with seismicity-rate tracking control"};
    app.require_subcommand(1);

    std::string config, out, actions, run_dir, times, record;
    std::optional<double> t_end;
    std::optional<std::uint64_t> seed;
    std::optional<int> tcp;

    auto add_run_opts = [&](CLI::App* sub) {
        sub->add_option("--config", config, "JSON configuration file (defaults if omitted)")->check(CLI::ExistingFile);
        sub->add_option("--out", out, "output directory")->required();
        sub->add_option("--t-end", t_end, "horizon [hr], overrides run.t_end_hr");
        sub->add_option("--seed", seed, "seed, overrides run.seed");
    };

    auto* demo = app.add_subcommand("demo-nocontrol", "single central well at constant flux, no controller");
    add_run_opts(demo);
    auto* fixed = app.add_subcommand("run-fixed", "closed loop with the configured fixed gains");
    add_run_opts(fixed);
    auto* eval = app.add_subcommand("eval-policy", "closed loop replaying a decision_index,a1,a2,a3 trace");
    add_run_opts(eval);
    eval->add_option("--actions", actions, "action trace CSV")->required();
    auto* serve = app.add_subcommand("serve-env", "serve the environment protocol on stdio or TCP");
    serve->add_option("--config", config, "JSON configuration file (defaults if omitted)")->check(CLI::ExistingFile);
    serve->add_option("--tcp", tcp, "listen on 127.0.0.1:PORT (0 = any free port)");
    serve->add_option("--record", record, "write each finished episode under this directory");
    auto* exportf = app.add_subcommand("export-fields", "write pressure snapshots of a run as CSV grids");
    exportf->add_option("--run", run_dir, "run output directory")->required()->check(CLI::ExistingDirectory);
    exportf->add_option("--times", times, "comma-separated snapshot times [hr]")->required();
    exportf->add_option("--out", out, "destination directory (default: the run directory)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*demo || *fixed || *eval) {
            ExperimentOptions opts;
            opts.kind = *demo ? ExperimentKind::NoControl : *fixed ? ExperimentKind::FixedGain : ExperimentKind::Replay;
            opts.out_dir = out;
            opts.t_end_hr = t_end;
            opts.seed = seed;
            if (*eval) opts.actions = actions;
            const SimulationConfig cfg = config_or_default(config);
            return report(run_experiment(cfg, opts), opts.out_dir);
        }
        if (*serve) {
            const SimulationConfig cfg = config_or_default(config);
            std::optional<std::filesystem::path> rec;
            if (!record.empty()) rec = record;
            if (tcp) {
                serve_tcp(cfg, *tcp, rec, std::cout);
            } else {
                ProtocolSession session(cfg, rec);
                serve_stream(session, std::cin, std::cout);
            }
            return 0;
        }
        if (*exportf) {
            const auto written = export_fields(run_dir, parse_times(times), out.empty() ? run_dir : out);
            for (const auto& p : written) std::cout << p.string() << "\n";
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
