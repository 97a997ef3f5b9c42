// Command line front end: subcommand dispatch, config-file merging, and the
// mapping from exception categories to process exit codes.

#include "commands.hpp"

#include "gmbridge/errors.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace {

using gmb::cli::RunConfig;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;       // bad flags, bad config, bad input files
constexpr int kExitMath = 3;        // impossible event, numeric breakdown
// verification failures exit with 4 (returned by cmd_verify directly)

double parse_number(const std::string& text, const std::string& what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("cannot parse " + what + ": '" + text + "'");
    }
    while (used < text.size() && std::isspace(static_cast<unsigned char>(text[used])))
        ++used;
    if (used != text.size())
        throw std::invalid_argument("trailing characters in " + what + ": '" + text + "'");
    return v;
}

// Accepts "0.5,0.8" and the more explicit "t=0.5,x=0.8".
std::pair<double, double> parse_obs_pair(const std::string& text) {
    const auto comma = text.find(',');
    if (comma == std::string::npos)
        throw std::invalid_argument("--obs expects 't,value', got '" + text + "'");
    auto strip = [](std::string part, const char* key) {
        const auto eq = part.find('=');
        if (eq == std::string::npos) return part;
        const std::string name = part.substr(0, eq);
        if (name != key)
            throw std::invalid_argument("--obs expects keys t and x, got '" + name + "'");
        return part.substr(eq + 1);
    };
    const double t = parse_number(strip(text.substr(0, comma), "t"), "observation time");
    const double x = parse_number(strip(text.substr(comma + 1), "x"), "observation value");
    return {t, x};
}

// Option handles needed to decide whether a flag was given explicitly; flags
// always win over config-file values.
struct OptionRefs {
    CLI::Option* model = nullptr;
    CLI::Option* tau = nullptr;
    CLI::Option* grid = nullptr;
    CLI::Option* paths = nullptr;
    CLI::Option* seed = nullptr;
    CLI::Option* out = nullptr;
    CLI::Option* obs = nullptr;
    CLI::Option* obs_csv = nullptr;
    CLI::Option* predict = nullptr;
    CLI::Option* survival = nullptr;
    CLI::Option* check = nullptr;
};

bool unset(const CLI::Option* option) {
    return option == nullptr || option->count() == 0;
}

void apply_config_file(const std::string& path, RunConfig& config, const OptionRefs& refs) {
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("cannot open config file " + path);
    json file;
    try {
        file = json::parse(in);
    } catch (const json::exception& e) {
        throw std::invalid_argument("config file " + path + ": " + e.what());
    }
    if (!file.is_object())
        throw std::invalid_argument("config file " + path + " must hold a JSON object");

    static const std::vector<std::string> known = {
        "model", "tau", "grid", "paths", "seed",     "out",
        "obs",   "obs_csv", "predict", "survival", "check"};
    for (const auto& [key, value] : file.items()) {
        (void)value;
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw std::invalid_argument("config file " + path + ": unknown key '" + key + "'");
    }

    try {
        if (file.contains("model") && unset(refs.model))
            config.model_spec = file.at("model").get<std::string>();
        if (file.contains("tau") && unset(refs.tau)) {
            const auto& tau = file.at("tau");
            config.tau_spec = tau.is_string() ? tau.get<std::string>() : tau.dump();
        }
        if (file.contains("grid") && unset(refs.grid))
            config.grid_spec = file.at("grid").get<std::string>();
        if (file.contains("paths") && unset(refs.paths))
            config.n_paths = file.at("paths").get<std::size_t>();
        if (file.contains("seed") && unset(refs.seed))
            config.seed = file.at("seed").get<std::uint64_t>();
        if (file.contains("out") && unset(refs.out))
            config.out = file.at("out").get<std::string>();
        if (file.contains("obs") && unset(refs.obs)) {
            for (const auto& entry : file.at("obs")) {
                if (entry.is_array() && entry.size() == 2)
                    config.observations.emplace_back(entry.at(0).get<double>(),
                                                     entry.at(1).get<double>());
                else if (entry.is_object())
                    config.observations.emplace_back(entry.at("t").get<double>(),
                                                     entry.at("x").get<double>());
                else
                    throw std::invalid_argument(
                        "config obs entries must be [t, x] pairs or {\"t\":., \"x\":.}");
            }
        }
        if (file.contains("obs_csv") && unset(refs.obs_csv))
            config.obs_csv = file.at("obs_csv").get<std::string>();
        if (file.contains("predict") && unset(refs.predict))
            config.predict_u = file.at("predict").get<double>();
        if (file.contains("survival") && unset(refs.survival))
            config.survival = file.at("survival").get<std::vector<double>>();
        if (file.contains("check") && unset(refs.check))
            config.check = file.at("check").get<std::string>();
    } catch (const json::exception& e) {
        throw std::invalid_argument("config file " + path + ": " + e.what());
    }
}

struct SubcommandState {
    RunConfig config;
    OptionRefs refs;
    std::string config_path;
    std::vector<std::string> obs_raw;
    double predict_value = 0.0;
};

void add_model_options(CLI::App& sub, SubcommandState& state) {
    state.refs.model =
        sub.add_option("--model", state.config.model_spec,
                       "covariance model: brownian | scaled-brownian:sigma2=V | "
                       "ou:theta=V,sigma=V | table:FILE.csv");
    state.refs.tau =
        sub.add_option("--tau", state.config.tau_spec,
                       "pinning-time law: atoms:T=W,... | exp:RATE | uniform:A,B "
                       "| inline JSON ({\"kind\": ...})");
    sub.add_option("--config", state.config_path,
                   "JSON file with defaults for the options above; explicit flags win");
    state.refs.out = sub.add_option("--out", state.config.out, "output file (default: stdout)");
}

void finish_parse(SubcommandState& state) {
    for (const auto& raw : state.obs_raw)
        state.config.observations.push_back(parse_obs_pair(raw));
    if (state.refs.predict != nullptr && state.refs.predict->count() > 0)
        state.config.predict_u = state.predict_value;
    if (!state.config_path.empty())
        apply_config_file(state.config_path, state.config, state.refs);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gauss-Markov bridges with a randomly located pinning time"};
    app.set_version_flag("--version", "gmbridge 1.0.0");
    app.require_subcommand(1);

    SubcommandState sim, post, verify;

    CLI::App* sim_cmd = app.add_subcommand(
        "simulate", "draw bridge paths on a grid and write them as CSV");
    add_model_options(*sim_cmd, sim);
    sim.refs.grid = sim_cmd->add_option("--grid", sim.config.grid_spec,
                                        "evaluation grid START:END:STEP");
    sim.refs.paths = sim_cmd->add_option("--paths", sim.config.n_paths, "number of paths");
    sim.refs.seed = sim_cmd->add_option("--seed", sim.config.seed, "base RNG seed");

    CLI::App* post_cmd = app.add_subcommand(
        "posterior", "exact conditional law of the pinning time given observations");
    add_model_options(*post_cmd, post);
    post.refs.obs = post_cmd->add_option("--obs", post.obs_raw,
                                         "observation 't,value' (repeatable)");
    post.refs.obs_csv = post_cmd->add_option("--obs-csv", post.config.obs_csv,
                                             "CSV file of observations (t,value)");
    post.refs.predict = post_cmd->add_option("--predict", post.predict_value,
                                             "also report the predictive law at this time");
    post.refs.survival = post_cmd->add_option("--survival", post.config.survival,
                                              "report P(tau > s) at this s (repeatable)");

    CLI::App* verify_cmd = app.add_subcommand(
        "verify", "run the internal consistency checks and report JSON");
    add_model_options(*verify_cmd, verify);
    verify.refs.paths =
        verify_cmd->add_option("--paths", verify.config.n_paths, "Monte Carlo sample size");
    verify.refs.seed = verify_cmd->add_option("--seed", verify.config.seed, "base RNG seed");
    verify.refs.check = verify_cmd->add_option(
        "--check", verify.config.check,
        "run only checks whose name starts with this prefix");
    verify.config.n_paths = 200000;

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (sim_cmd->parsed()) {
            finish_parse(sim);
            return gmb::cli::cmd_simulate(sim.config);
        }
        if (post_cmd->parsed()) {
            finish_parse(post);
            return gmb::cli::cmd_posterior(post.config);
        }
        finish_parse(verify);
        return gmb::cli::cmd_verify(verify.config);
    } catch (const gmb::precondition_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitMath;
    } catch (const gmb::numeric_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitMath;
    } catch (const gmb::integrity_error& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitMath;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << '\n';
        return 1;
    }
}
