#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace gmb::cli {

struct RunConfig {
    std::string model_spec = "brownian";
    std::string tau_spec = "atoms:1=0.5,2=0.5";
    std::string grid_spec = "0:2:0.01";
    std::size_t n_paths = 100;
    std::uint64_t seed = 1;
    std::string out;                                   // empty: stdout
    std::vector<std::pair<double, double>> observations;
    std::string obs_csv;
    std::vector<double> survival;                      // P(tau > s) to report
    std::optional<double> predict_u;
    std::string check;                                 // verify: filter by prefix
};

int cmd_simulate(const RunConfig& config);
int cmd_posterior(const RunConfig& config);
int cmd_verify(const RunConfig& config);

} // namespace gmb::cli
