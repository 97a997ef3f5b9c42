#include "gmbridge/mc_oracle.hpp"
#include "gmbridge/errors.hpp"
#include "gmbridge/quadrature.hpp"
#include "gmbridge/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gmb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kHistBins = 64;

GaussianKernel kernel_at(const CovarianceModel& m, double r, double t, double u) {
    const double b_tr = b_factor(m, t, r);
    if (!(b_tr > 0.0))
        throw integrity_error("degenerate conditioning: B(t, r) = 0 with t < r");
    const double b_ur = b_factor(m, u, r);
    const double b_tu = b_factor(m, t, u);
    return {b_ur / b_tr, b_tu * b_ur / b_tr};
}

} // namespace

double BinnedConditional::freq_se(double p) const {
    if (n_retained == 0) return 0.0;
    return std::sqrt(std::max(0.0, p * (1.0 - p)) / double(n_retained));
}

BinnedConditional empirical_posterior(const CovarianceModel& m, const LengthLaw& law,
                                      double t, double x, double h,
                                      std::size_t n_paths, std::uint64_t seed) {
    if (!(t > 0.0) || !std::isfinite(t))
        throw std::domain_error("empirical_posterior: t must be positive");
    if (x != 0.0 && !(h > 0.0))
        throw std::invalid_argument("empirical_posterior: band half-width must be positive");
    if (n_paths == 0)
        throw std::invalid_argument("empirical_posterior: n_paths must be positive");

    BinnedConditional out;
    out.t = t;
    out.x = x;
    out.h = h;
    out.n_total = n_paths;
    out.n_retained = 0;

    const auto& atoms = law.atoms();
    std::vector<std::size_t> atom_count(atoms.size(), 0);

    const bool continuous = !law.pieces().empty();
    const double lo = law.support_lower();
    const double hi = law.support_upper();
    std::vector<std::size_t> bin_count(continuous ? kHistBins : 0, 0);
    if (continuous) {
        out.bin_edges.resize(kHistBins + 1);
        for (std::size_t j = 0; j <= kHistBins; ++j)
            out.bin_edges[j] = lo + (hi - lo) * double(j) / double(kHistBins);
    }

    const std::vector<double> grid{t};
    BridgeSpec spec{m, 1.0};
    for (std::size_t i = 0; i < n_paths; ++i) {
        std::mt19937_64 rng = path_engine(seed, i);
        spec.length = law.sample(rng);
        const double v = sample_path(spec, grid, rng)[0];
        const bool keep = (x == 0.0) ? (v == 0.0) : (v != 0.0 && std::abs(v - x) <= h);
        if (!keep) continue;
        ++out.n_retained;

        const double tau = spec.length;
        bool matched = false;
        for (std::size_t k = 0; k < atoms.size(); ++k)
            if (tau == atoms[k].location) {
                ++atom_count[k];
                matched = true;
                break;
            }
        if (!matched && continuous) {
            const double frac = (tau - lo) / (hi - lo);
            const std::size_t j = std::min<std::size_t>(
                kHistBins - 1, std::size_t(std::max(0.0, frac) * double(kHistBins)));
            ++bin_count[j];
        }
    }

    if (out.n_retained < 100)
        throw numeric_error("empirical_posterior: only " + std::to_string(out.n_retained) +
                            " of " + std::to_string(n_paths) +
                            " paths fell in the conditioning set; "
                            "increase n_paths or widen the band");

    for (std::size_t k = 0; k < atoms.size(); ++k)
        out.atom_freq.push_back({atoms[k].location,
                                 double(atom_count[k]) / double(out.n_retained)});
    for (std::size_t j = 0; j < bin_count.size(); ++j)
        out.bin_prob.push_back(double(bin_count[j]) / double(out.n_retained));
    return out;
}

double total_variation(const BinnedConditional& emp, const PosteriorMeasure& post) {
    const auto& base_atoms = post.base().atoms();
    if (emp.atom_freq.size() != base_atoms.size())
        throw std::invalid_argument("total_variation: the empirical law and the posterior "
                                    "were built from different length laws");
    double acc = 0.0;
    for (std::size_t k = 0; k < base_atoms.size(); ++k) {
        const double model_mass = post.weight(base_atoms[k].location) * base_atoms[k].mass;
        acc += std::abs(emp.atom_freq[k].mass - model_mass);
    }
    for (std::size_t j = 0; j + 1 < emp.bin_edges.size(); ++j) {
        const double a = emp.bin_edges[j];
        const double b = emp.bin_edges[j + 1];
        double model_mass = post.cdf(b) - post.cdf(a);
        for (const auto& atom : base_atoms)
            if (atom.location > a && atom.location <= b)
                model_mass -= post.weight(atom.location) * atom.mass;
        acc += std::abs(emp.bin_prob[j] - std::max(0.0, model_mass));
    }
    return 0.5 * acc;
}

namespace {

// Bin index in 0..bins for a conditioning value: 0..bins-1 over
// mean +- 3 sd (outliers clamped into the edge bins), bins for the exact
// zero of an already pinned bridge.
struct Binner {
    double lo, width;
    int bins;

    int index(double v, bool pinned) const {
        if (pinned) return bins;
        if (width <= 0.0) return 0;
        const double f = (v - lo) / width;
        return std::clamp(int(std::floor(f)), 0, bins - 1);
    }
};

Binner make_binner(const std::vector<double>& values, const std::vector<bool>& pinned,
                   int bins) {
    double sum = 0.0, sq = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (pinned[i]) continue;
        sum += values[i];
        sq += values[i] * values[i];
        ++n;
    }
    if (n < 2) return {0.0, 0.0, bins};
    const double mean = sum / double(n);
    const double var = std::max(0.0, (sq - double(n) * mean * mean) / double(n - 1));
    const double sd = std::sqrt(var);
    const double lo = mean - 3.0 * sd;
    const double width = sd > 0.0 ? 6.0 * sd / double(bins) : 0.0;
    return {lo, width, bins};
}

} // namespace

CiReport markov_ci_test(const CovarianceModel& m, const LengthLaw& law,
                        double t1, double t2, double u,
                        const std::function<double(double)>& g,
                        std::size_t n_paths, std::uint64_t seed,
                        const CiOptions& options) {
    if (!(t1 > 0.0) || !(t1 < t2) || !(t2 < u))
        throw std::domain_error("markov_ci_test: need 0 < t1 < t2 < u");
    if (n_paths < 2)
        throw std::invalid_argument("markov_ci_test: n_paths too small");
    if (options.bins1 < 1 || options.bins2 < 1)
        throw std::invalid_argument("markov_ci_test: bin counts must be positive");
    if (options.min_count < 2)
        throw std::invalid_argument("markov_ci_test: min_count must be at least 2");

    const std::vector<double> grid{t1, t2, u};
    std::vector<double> c1(n_paths), c2(n_paths), target(n_paths);
    std::vector<bool> pin1(n_paths), pin2(n_paths);
    BridgeSpec spec{m, 1.0};
    for (std::size_t i = 0; i < n_paths; ++i) {
        std::mt19937_64 rng = path_engine(seed, i);
        spec.length = law.sample(rng);
        const auto v = sample_path(spec, grid, rng);
        pin1[i] = v[0] == 0.0;
        pin2[i] = v[1] == 0.0;
        c1[i] = v[0];
        c2[i] = options.negative_control ? v[1] - v[0] : v[1];
        target[i] = g(v[2]);
    }

    const Binner b1 = make_binner(c1, pin1, options.bins1);
    const Binner b2 = make_binner(c2, pin2, options.bins2);
    const int n1 = options.bins1 + 1;
    const int n2 = options.bins2 + 1;

    struct Cell {
        std::size_t n = 0;
        double sum = 0.0, sq = 0.0;
    };
    std::vector<Cell> joint(std::size_t(n1) * std::size_t(n2));
    std::vector<Cell> marg(n2);
    for (std::size_t i = 0; i < n_paths; ++i) {
        const int i1 = b1.index(c1[i], pin1[i]);
        const int i2 = b2.index(c2[i], pin2[i]);
        Cell& jc = joint[std::size_t(i1) * std::size_t(n2) + std::size_t(i2)];
        Cell& mc = marg[i2];
        jc.n += 1;
        jc.sum += target[i];
        jc.sq += target[i] * target[i];
        mc.n += 1;
        mc.sum += target[i];
        mc.sq += target[i] * target[i];
    }

    CiReport report;
    report.t1 = t1;
    report.t2 = t2;
    report.u = u;
    report.n_paths = n_paths;
    report.seed = seed;
    report.negative_control = options.negative_control;
    report.cells_tested = 0;
    report.cells_excluded = 0;
    report.max_abs_z = 0.0;

    for (int i2 = 0; i2 < n2; ++i2) {
        const Cell& mc = marg[i2];
        if (mc.n == 0) continue;
        for (int i1 = 0; i1 < n1; ++i1) {
            const Cell& jc = joint[std::size_t(i1) * std::size_t(n2) + std::size_t(i2)];
            if (jc.n == 0) continue;
            const std::size_t n_rest = mc.n - jc.n;
            if (jc.n < options.min_count || n_rest < options.min_count) {
                ++report.cells_excluded;
                continue;
            }
            const double mean_joint = jc.sum / double(jc.n);
            const double mean_bin = mc.sum / double(mc.n);
            const double mean_rest = (mc.sum - jc.sum) / double(n_rest);
            const double var_joint = std::max(
                0.0, (jc.sq - double(jc.n) * mean_joint * mean_joint) / double(jc.n - 1));
            const double var_rest = std::max(
                0.0, ((mc.sq - jc.sq) - double(n_rest) * mean_rest * mean_rest) /
                         double(n_rest - 1));
            const double d = mean_joint - mean_bin;
            const double w = double(jc.n) / double(mc.n);
            const double se = (1.0 - w) * std::sqrt(var_joint / double(jc.n) +
                                                    var_rest / double(n_rest));
            double z;
            if (se > 0.0)
                z = d / se;
            else
                z = d == 0.0 ? 0.0 : kInf;
            report.cells.push_back({i1, i2, jc.n, n_rest, mean_joint, mean_bin, d,
                                    se, z});
            report.max_abs_z = std::max(report.max_abs_z, std::abs(z));
            ++report.cells_tested;
        }
    }
    report.pass = report.cells_tested > 0 && report.max_abs_z <= 3.0;
    return report;
}

std::string CiReport::to_json() const {
    nlohmann::json j;
    j["check"] = negative_control ? "markov_ci_negative_control" : "markov_ci";
    j["parameters"] = {{"t1", t1},       {"t2", t2},   {"u", u},
                       {"n_paths", n_paths}, {"seed", seed}};
    j["cells_tested"] = cells_tested;
    j["cells_excluded"] = cells_excluded;
    j["statistic"] = max_abs_z;
    j["tolerance"] = 3.0;
    j["pass"] = pass;
    auto cell_array = nlohmann::json::array();
    for (const auto& c : cells)
        cell_array.push_back({{"bin1", c.bin1},
                              {"bin2", c.bin2},
                              {"n_joint", c.n_joint},
                              {"n_rest", c.n_rest},
                              {"mean_joint", c.mean_joint},
                              {"mean_bin", c.mean_bin},
                              {"discrepancy", c.discrepancy},
                              {"se", c.se},
                              {"z", c.z}});
    j["cells"] = std::move(cell_array);
    return j.dump(2);
}

ConvergenceReport convergence_check(const CovarianceModel& m, const LengthLaw& law,
                                    double u, int level_lo, int level_hi,
                                    std::size_t n_paths, std::uint64_t seed,
                                    double tolerance) {
    if (!(u > 0.0) || !std::isfinite(u))
        throw std::domain_error("convergence_check: u must be positive");
    if (level_lo < 0 || level_hi < level_lo || level_hi > 50)
        throw std::invalid_argument("convergence_check: bad level range");
    if (n_paths == 0)
        throw std::invalid_argument("convergence_check: n_paths must be positive");
    const double t_max = std::ldexp(1.0, -level_lo);
    if (!(law.support_lower() > t_max))
        throw precondition_error("convergence_check: the length law must be supported "
                                 "above the largest evaluation time " + std::to_string(t_max));

    ConvergenceReport report;
    report.tolerance = tolerance;
    const int n_levels = level_hi - level_lo + 1;
    std::vector<double> grid(n_levels);  // increasing
    for (int k = 0; k < n_levels; ++k) grid[k] = std::ldexp(1.0, -(level_hi - k));
    report.times.resize(n_levels);      // decreasing, i.e. increasing level
    for (int k = 0; k < n_levels; ++k) report.times[k] = std::ldexp(1.0, -(level_lo + k));

    const double f_u = law.cdf(u);
    const double moment_limit_value = law.integrate(
        [&](double r) { return m.rho(u) * b_factor(m, u, r) / m.rho(r); }, u, kInf);

    std::vector<double> gap_sum(n_levels, 0.0);
    double moment_gap_sum = 0.0;

    BridgeSpec spec{m, 1.0};
    for (std::size_t i = 0; i < n_paths; ++i) {
        std::mt19937_64 rng = path_engine(seed, i);
        spec.length = law.sample(rng);
        const auto values = sample_path(spec, grid, rng);
        for (int k = 0; k < n_levels; ++k) {
            const double t = grid[k];
            const double x = values[k];
            const PosteriorMeasure post = posterior_single(m, law, {t, x});
            const double mass_to_u = post.cdf(u);
            // grid index k = level_hi - level corresponds to report index level - level_lo
            const int rk = n_levels - 1 - k;
            gap_sum[rk] += std::abs(mass_to_u - f_u);
            if (rk == n_levels - 1) {
                // smallest time: second-moment identity
                const double predicted = law.integrate(
                    [&](double r) {
                        const GaussianKernel kr = kernel_at(m, r, t, u);
                        const double mu = kr.slope * x;
                        return (mu * mu + kr.variance) * post.weight(r);
                    },
                    u, kInf);
                moment_gap_sum += std::abs(predicted - moment_limit_value);
            }
        }
    }

    report.mean_abs_gap.resize(n_levels);
    for (int k = 0; k < n_levels; ++k)
        report.mean_abs_gap[k] = gap_sum[k] / double(n_paths);
    report.final_gap = report.mean_abs_gap.back();
    report.moment_gap = moment_gap_sum / double(n_paths);
    report.moment_limit = moment_limit_value;
    report.pass = report.final_gap < tolerance;
    return report;
}

std::string ConvergenceReport::to_json() const {
    nlohmann::json j;
    j["check"] = "early_time_convergence";
    j["times"] = times;
    j["mean_abs_gap"] = mean_abs_gap;
    j["statistic"] = final_gap;
    j["tolerance"] = tolerance;
    j["pass"] = pass;
    j["moment_gap"] = moment_gap;
    j["moment_limit"] = moment_limit;
    return j.dump(2);
}

} // namespace gmb
