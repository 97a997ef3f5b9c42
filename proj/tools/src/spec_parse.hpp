#pragma once

#include "gmbridge/covariance_model.hpp"
#include "gmbridge/length_law.hpp"

#include <string>
#include <vector>

namespace gmb::cli {

/// Forms: "brownian", "scaled-brownian:sigma2=0.5", "ou:theta=1.0,sigma=1.0",
/// "table:path/to/file.csv".
CovarianceModel parse_model_spec(const std::string& spec);

/// Forms: "atoms:1=0.5,2=0.5", "exp:1.0", "uniform:1,2", or a JSON object
/// (anything starting with '{') in the length-law schema.
LengthLaw parse_tau_spec(const std::string& spec);

/// Form: "start:end:step", end included when it sits on the step lattice.
std::vector<double> parse_grid_spec(const std::string& spec);

} // namespace gmb::cli
