#pragma once

#include "gmbridge/det_bridge.hpp"
#include "gmbridge/length_law.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace gmb {

/// One sampled trajectory of the random-length bridge on a grid.
/// Invariants: values[k] == 0.0 (bitwise) for every grid[k] >= tau, and
/// values[0] == 0.0 when grid[0] == 0. The zero set therefore decides the
/// event {tau <= t} exactly, with no tolerance.
struct BridgePath {
    std::vector<double> grid;
    std::vector<double> values;
    double tau;
    std::uint64_t seed;
    std::uint64_t path_index;
};

/// Draws tau from the law, then the bridge pinned at tau on the grid.
/// tau is used as the exact continuous pinning time, never snapped to the
/// grid. Each path consumes an independent stream derived from
/// (seed, path_index), so results do not depend on batching.
std::vector<BridgePath> sample_random_bridge(const CovarianceModel& m,
                                             const LengthLaw& law,
                                             const std::vector<double>& grid,
                                             std::size_t n_paths,
                                             std::uint64_t seed);

/// Index of the first grid point >= tau, recovered from the zero pattern of
/// the values; std::nullopt when the path has not stopped inside the grid.
/// A zero pattern inconsistent with the stored tau raises integrity_error.
std::optional<std::size_t> zero_set_detector(const BridgePath& path);

} // namespace gmb
