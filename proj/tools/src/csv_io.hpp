#pragma once

#include "gmbridge/bayes_engine.hpp"
#include "gmbridge/random_bridge.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace gmb::cli {

/// Shortest decimal form that parses back to the same double (17 significant
/// digits); exact zeros print as "0" so the pinned state survives I/O.
std::string format_double(double v);

/// Schema: path_id,t,value,tau with one row per (path, grid point).
void write_paths_csv(std::ostream& out, const std::vector<BridgePath>& paths);
std::vector<BridgePath> read_paths_csv(std::istream& in);

/// Schema: t,value.
std::vector<Observation> read_observations_csv(std::istream& in);

} // namespace gmb::cli
