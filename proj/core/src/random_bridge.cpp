#include "gmbridge/random_bridge.hpp"
#include "gmbridge/errors.hpp"
#include "gmbridge/rng.hpp"

#include <algorithm>
#include <stdexcept>

namespace gmb {

std::vector<BridgePath> sample_random_bridge(const CovarianceModel& m,
                                             const LengthLaw& law,
                                             const std::vector<double>& grid,
                                             std::size_t n_paths,
                                             std::uint64_t seed) {
    if (grid.empty())
        throw std::invalid_argument("sample_random_bridge: empty grid");
    if (n_paths == 0)
        throw std::invalid_argument("sample_random_bridge: n_paths must be positive");

    std::vector<BridgePath> paths;
    paths.reserve(n_paths);
    BridgeSpec spec{m, 1.0};
    for (std::size_t i = 0; i < n_paths; ++i) {
        std::mt19937_64 rng = path_engine(seed, i);
        spec.length = law.sample(rng);
        paths.push_back({grid, sample_path(spec, grid, rng), spec.length, seed, i});
    }
    return paths;
}

std::optional<std::size_t> zero_set_detector(const BridgePath& path) {
    const std::size_t n = path.grid.size();
    if (n == 0 || path.values.size() != n)
        throw std::invalid_argument("zero_set_detector: malformed path");

    const auto stop = std::lower_bound(path.grid.begin(), path.grid.end(), path.tau);
    const std::size_t expected = std::size_t(stop - path.grid.begin());

    if (expected == n) {
        // tau beyond the grid: no zeros except a possible start pin at t = 0
        if (path.grid.back() > 0.0 && path.values.back() == 0.0)
            throw integrity_error("zero_set_detector: zero value although tau exceeds the grid");
        return std::nullopt;
    }

    for (std::size_t k = expected; k < n; ++k)
        if (path.values[k] != 0.0)
            throw integrity_error("zero_set_detector: nonzero value at or after tau");
    if (expected > 0 && path.grid[expected - 1] > 0.0 && path.values[expected - 1] == 0.0)
        throw integrity_error("zero_set_detector: zero value strictly before tau");
    return expected;
}

} // namespace gmb
