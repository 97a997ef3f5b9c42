#include "gmbridge/bayes_engine.hpp"
#include "gmbridge/errors.hpp"
#include "gmbridge/quadrature.hpp"
#include "gmbridge/stats.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gmb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

GaussianKernel kernel_at(const CovarianceModel& m, double r, double t, double u) {
    const double b_tr = b_factor(m, t, r);
    if (!(b_tr > 0.0))
        throw integrity_error("degenerate conditioning: B(t, r) = 0 with t < r");
    const double b_ur = b_factor(m, u, r);
    const double b_tu = b_factor(m, t, u);
    return {b_ur / b_tr, b_tu * b_ur / b_tr};
}

// Log density shape of one observation (t, x) as a function of the pin time
// s > t, and its stable pairwise differences. Self-contained (owns a model
// copy) so the closures built from it can outlive the caller's objects.
struct LiveFamily {
    CovarianceModel m;
    double t;
    double x;
    double rho_t;

    LiveFamily(const CovarianceModel& model, double t_, double x_)
        : m(model), t(t_), x(x_), rho_t(m.rho(t_)) {}

    double log_shape(double s) const {
        const double b_ts = b_factor(m, t, s);
        if (!(b_ts > 0.0)) return -kInf;
        const double v = rho_t * b_ts / m.rho(s);
        if (!(v > 0.0)) return -kInf;
        return -0.5 * std::log(v) - x * x / (2.0 * v);
    }

    // log_shape(s) - log_shape(ref). The difference of the two exponents is
    // carried as a single ratio so nearby lengths cancel exactly instead of
    // through subtraction of large logs.
    double delta(double s, double ref, double b_ref) const {
        if (s == ref) return 0.0;
        const double b_ts = b_factor(m, t, s);
        if (!(b_ts > 0.0)) return -kInf;
        const double rho_s = m.rho(s);
        const double rho_ref = m.rho(ref);
        const double log_ratio = 0.5 * std::log(rho_s * b_ref / (rho_ref * b_ts));
        const double gap = rho_s * m.q(ref) - rho_ref * m.q(s);
        return log_ratio + 0.5 * x * x * gap / (b_ref * b_ts);
    }
};

double window_prior_mass(const LengthLaw& law, double lo, double hi) {
    const double top = std::min(hi, law.support_upper());
    if (!(top > lo)) return 0.0;
    return law.cdf(top) - law.cdf(lo);
}

// Normalized log weight of the live family on the window (lo, hi].
std::function<double(double)> normalized_live_weight(const CovarianceModel& m,
                                                     const LengthLaw& law,
                                                     double t, double x,
                                                     double lo, double hi) {
    if (!(window_prior_mass(law, lo, hi) > 0.0))
        throw precondition_error(
            "conditioning window (" + std::to_string(lo) + ", " +
            (std::isinf(hi) ? std::string("inf") : std::to_string(hi)) +
            "] carries no prior mass");

    LiveFamily fam(m, t, x);

    // Reference point: the largest shape over atoms and a scan of each piece.
    double ref = 0.0;
    double best = -kInf;
    auto consider = [&](double s) {
        if (!(s > t) || !(s > lo) || s > hi) return;
        const double ls = fam.log_shape(s);
        if (ls > best) {
            best = ls;
            ref = s;
        }
    };
    for (const Atom& a : law.atoms()) consider(a.location);
    for (std::size_t i = 0; i < law.pieces().size(); ++i) {
        const auto [plo, phi] = law.piece_bounds(i);
        const double a = std::max(plo, lo);
        const double b = std::min(phi, hi);
        if (!(b > a)) continue;
        for (int k = 1; k <= 65; ++k) consider(a + (b - a) * double(k) / 65.0);
    }
    if (!(best > -kInf))
        throw precondition_error("observation has zero density under every length in the window");

    const double b_ref = b_factor(fam.m, t, ref);
    const double z = law.integrate(
        [&fam, ref, b_ref](double s) { return std::exp(fam.delta(s, ref, b_ref)); },
        lo, hi);
    if (!(z > 0.0) || !std::isfinite(z))
        throw numeric_error("posterior normalization failed: integral of the weight family is " +
                            std::to_string(z));
    const double log_z = std::log(z);
    return [fam = std::move(fam), ref, b_ref, log_z](double s) {
        return fam.delta(s, ref, b_ref) - log_z;
    };
}

struct BranchInfo {
    PosteriorBranch branch;
    std::size_t deciding;  // index of the observation that fixes the window
    double lo, hi;
};

BranchInfo classify(const std::vector<Observation>& obs) {
    if (obs.empty())
        throw std::invalid_argument("no observations");
    const std::size_t n = obs.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (!(obs[i].t > 0.0) || !std::isfinite(obs[i].t))
            throw std::domain_error("observation times must be positive and finite");
        if (i > 0 && !(obs[i].t > obs[i - 1].t))
            throw std::invalid_argument("observation times must be strictly increasing");
        if (!std::isfinite(obs[i].value))
            throw std::invalid_argument("non-finite observation value");
    }
    std::size_t fz = n;
    for (std::size_t i = 0; i < n; ++i)
        if (obs[i].value == 0.0) {
            fz = i;
            break;
        }
    for (std::size_t j = fz; j < n; ++j)
        if (obs[j].value != 0.0)
            throw std::invalid_argument("a bridge that has reached zero stays at zero; "
                                        "nonzero value after a zero one");
    if (fz == 0) return {PosteriorBranch::pinned, 0, 0.0, obs[0].t};
    if (fz == n) return {PosteriorBranch::live, n - 1, obs[n - 1].t, kInf};
    return {PosteriorBranch::interval, fz - 1, obs[fz - 1].t, obs[fz].t};
}

std::vector<std::pair<double, double>> gl15_nodes(double a, double b) {
    using rule = boost::math::quadrature::gauss<double, 15>;
    const auto& xs = rule::abscissa();
    const auto& ws = rule::weights();
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    std::vector<std::pair<double, double>> nodes;
    nodes.reserve(15);
    nodes.emplace_back(mid, half * ws[0]);
    for (std::size_t i = 1; i < xs.size(); ++i) {
        nodes.emplace_back(mid - half * xs[i], half * ws[i]);
        nodes.emplace_back(mid + half * xs[i], half * ws[i]);
    }
    return nodes;
}

} // namespace

PosteriorMeasure::PosteriorMeasure(LengthLaw base, PosteriorBranch branch,
                                   double window_lo, double window_hi,
                                   std::function<double(double)> log_weight)
    : base_(std::move(base)), branch_(branch), lo_(window_lo), hi_(window_hi),
      log_weight_(std::move(log_weight)) {
    if (!(lo_ >= 0.0) || !(hi_ > lo_))
        throw std::invalid_argument("PosteriorMeasure: malformed window");
    if (!log_weight_)
        throw std::invalid_argument("PosteriorMeasure: null weight");
}

double PosteriorMeasure::log_weight(double r) const {
    if (!(r > lo_) || r > hi_) return -kInf;
    return log_weight_(r);
}

double PosteriorMeasure::weight(double r) const {
    if (!(r > lo_) || r > hi_) return 0.0;
    return std::exp(log_weight_(r));
}

double PosteriorMeasure::mass() const {
    return base_.integrate([this](double r) { return std::exp(log_weight_(r)); }, lo_, hi_);
}

double PosteriorMeasure::integrate(const std::function<double(double)>& g) const {
    return base_.integrate(
        [this, &g](double r) { return g(r) * std::exp(log_weight_(r)); }, lo_, hi_);
}

double PosteriorMeasure::mean() const {
    return integrate([](double r) { return r; });
}

double PosteriorMeasure::cdf(double s) const {
    if (!(s > lo_)) return 0.0;
    const double top = std::min(s, hi_);
    return base_.integrate([this](double r) { return std::exp(log_weight_(r)); }, lo_, top);
}

double PosteriorMeasure::quantile(double p) const {
    if (!(p > 0.0) || p > 1.0)
        throw std::invalid_argument("quantile: p must lie in (0, 1]");
    double hi = std::min(hi_, base_.support_upper());
    if (!(hi > lo_)) hi = hi_;
    if (cdf(hi) < p) return hi;
    double lo = lo_;
    // invariant: cdf(lo) < p <= cdf(hi)
    for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (cdf(mid) >= p)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

std::vector<Atom> PosteriorMeasure::atom_masses() const {
    std::vector<Atom> out;
    out.reserve(base_.atoms().size());
    // one entry per base atom, in order; the weight gate zeroes those
    // outside the window, so rows line up with base().atoms()
    for (const Atom& a : base_.atoms())
        out.push_back({a.location, weight(a.location) * a.mass});
    return out;
}

double PredictiveLaw::total_mass() const {
    double acc = zero_mass;
    for (const auto& c : components) acc += c.weight;
    return acc;
}

double PredictiveLaw::mean() const {
    double acc = 0.0;
    for (const auto& c : components) acc += c.weight * c.mean;
    return acc;
}

double PredictiveLaw::density(double y) const {
    double acc = 0.0;
    for (const auto& c : components)
        if (c.variance > 0.0) acc += c.weight * normal_pdf(y - c.mean, c.variance);
    return acc;
}

double PredictiveLaw::expect(const std::function<double(double)>& g,
                             int hermite_degree) const {
    const auto& nodes = gauss_hermite_normal(hermite_degree);
    double acc = zero_mass * g(0.0);
    for (const auto& c : components) {
        if (c.variance > 0.0) {
            const double sd = std::sqrt(c.variance);
            double part = 0.0;
            for (const auto& [z, w] : nodes) part += w * g(c.mean + sd * z);
            acc += c.weight * part;
        } else {
            acc += c.weight * g(c.mean);
        }
    }
    return acc;
}

double phi_weight(const CovarianceModel& m, const LengthLaw& law,
                  double t, double r, double x) {
    if (!(t > 0.0) || !std::isfinite(t))
        throw std::domain_error("phi_weight: observation time must be positive");
    if (x == 0.0)
        throw std::invalid_argument("phi_weight: value 0 encodes the pinned event; "
                                    "the live-branch weight needs a nonzero value");
    return posterior_single(m, law, {t, x}).weight(r);
}

PosteriorMeasure posterior_single(const CovarianceModel& m, const LengthLaw& law,
                                  const Observation& obs) {
    return posterior_multi(m, law, {obs});
}

PosteriorMeasure posterior_multi(const CovarianceModel& m, const LengthLaw& law,
                                 const std::vector<Observation>& obs) {
    const BranchInfo info = classify(obs);
    if (info.branch == PosteriorBranch::pinned) {
        const double f = law.cdf(info.hi);
        if (!(f > 0.0))
            throw precondition_error("pinned branch needs P(tau <= t) > 0 at t = " +
                                     std::to_string(info.hi));
        const double lw = -std::log(f);
        return PosteriorMeasure(law, info.branch, info.lo, info.hi,
                                [lw](double) { return lw; });
    }
    auto weight = normalized_live_weight(m, law, obs[info.deciding].t,
                                         obs[info.deciding].value, info.lo, info.hi);
    return PosteriorMeasure(law, info.branch, info.lo, info.hi, std::move(weight));
}

PosteriorMeasure posterior_from_joint(const CovarianceModel& m, const LengthLaw& law,
                                      const std::vector<Observation>& obs) {
    const BranchInfo info = classify(obs);
    if (info.branch != PosteriorBranch::live)
        throw std::invalid_argument("posterior_from_joint covers observation vectors "
                                    "with no zero values");
    std::vector<double> times, values;
    for (const Observation& o : obs) {
        times.push_back(o.t);
        values.push_back(o.value);
    }
    const double t_last = times.back();
    if (!(window_prior_mass(law, t_last, kInf) > 0.0))
        throw precondition_error("no prior mass beyond the last observation time");

    auto log_joint = [m, times, values](double r) {
        return log_joint_density(BridgeSpec{m, r}, times, values);
    };

    double ref = 0.0, best = -kInf;
    auto consider = [&](double s) {
        if (!(s > t_last)) return;
        const double ls = log_joint(s);
        if (ls > best) {
            best = ls;
            ref = s;
        }
    };
    for (const Atom& a : law.atoms()) consider(a.location);
    for (std::size_t i = 0; i < law.pieces().size(); ++i) {
        const auto [plo, phi] = law.piece_bounds(i);
        const double a = std::max(plo, t_last);
        if (!(phi > a)) continue;
        for (int k = 1; k <= 65; ++k) consider(a + (phi - a) * double(k) / 65.0);
    }
    if (!(best > -kInf))
        throw precondition_error("observations have zero joint density under every "
                                 "length beyond the last time");

    const double j_ref = best;
    const double z = law.integrate(
        [&](double s) { return std::exp(log_joint(s) - j_ref); }, t_last, kInf);
    if (!(z > 0.0) || !std::isfinite(z))
        throw numeric_error("posterior normalization failed in the joint-density form");
    const double log_z = std::log(z);
    return PosteriorMeasure(law, PosteriorBranch::live, t_last, kInf,
                            [log_joint, j_ref, log_z](double r) {
                                return log_joint(r) - j_ref - log_z;
                            });
}

PredictiveLaw predict(const CovarianceModel& m, const LengthLaw& law,
                      const Observation& obs, double u) {
    if (!(obs.t > 0.0) || !std::isfinite(obs.t))
        throw std::domain_error("predict: observation time must be positive");
    if (!(u > obs.t) || !std::isfinite(u))
        throw std::domain_error("predict: target time must exceed the observation time");

    if (obs.value == 0.0) {
        if (!(law.cdf(obs.t) > 0.0))
            throw precondition_error("pinned branch needs P(tau <= t) > 0 at t = " +
                                     std::to_string(obs.t));
        return {1.0, {}};
    }

    const PosteriorMeasure post = posterior_single(m, law, obs);
    PredictiveLaw out;
    out.zero_mass = post.cdf(u);

    for (const Atom& a : law.atoms()) {
        if (!(a.location > u)) continue;
        const double w = post.weight(a.location) * a.mass;
        if (w == 0.0) continue;
        const GaussianKernel k = kernel_at(m, a.location, obs.t, u);
        out.components.push_back({w, k.slope * obs.value, k.variance, a.location});
    }
    for (std::size_t i = 0; i < law.pieces().size(); ++i) {
        const auto [plo, phi] = law.piece_bounds(i);
        const double a = std::max(plo, u);
        const double b = phi;
        if (!(b > a)) continue;
        const auto& pdf = law.pieces()[i].pdf;
        const int panels = 64;
        for (int p = 0; p < panels; ++p) {
            const double pa = a + (b - a) * double(p) / panels;
            const double pb = a + (b - a) * double(p + 1) / panels;
            for (const auto& [r, w] : gl15_nodes(pa, pb)) {
                const double pw = w * post.weight(r) * pdf(r);
                if (pw == 0.0) continue;
                const GaussianKernel k = kernel_at(m, r, obs.t, u);
                out.components.push_back({pw, k.slope * obs.value, k.variance, r});
            }
        }
    }
    return out;
}

double expect_joint(const CovarianceModel& m, const LengthLaw& law,
                    const std::vector<Observation>& obs, double u,
                    const std::function<double(double, double)>& g,
                    int hermite_degree) {
    const BranchInfo info = classify(obs);
    if (!(u > obs.back().t) || !std::isfinite(u))
        throw std::domain_error("expect_joint: target time must exceed the last "
                                "observation time");
    const PosteriorMeasure post = posterior_multi(m, law, obs);
    if (info.branch != PosteriorBranch::live) {
        // tau is confined below the last observation time, so the value at u
        // is surely zero.
        return post.integrate([&g](double r) { return g(r, 0.0); });
    }

    const double t = obs[info.deciding].t;
    const double x = obs[info.deciding].value;
    const auto& nodes = gauss_hermite_normal(hermite_degree);

    const double absorbed = law.integrate(
        [&](double r) { return g(r, 0.0) * post.weight(r); }, t, u);
    const double alive = law.integrate(
        [&](double r) {
            const double w = post.weight(r);
            if (w == 0.0) return 0.0;
            const GaussianKernel k = kernel_at(m, r, t, u);
            const double sd = std::sqrt(std::max(0.0, k.variance));
            const double mu = k.slope * x;
            double acc = 0.0;
            for (const auto& [z, wz] : nodes) acc += wz * g(r, mu + sd * z);
            return acc * w;
        },
        u, kInf);
    return absorbed + alive;
}

double filtration_estimate(const CovarianceModel& m, const LengthLaw& law,
                           const BridgePath& prefix,
                           const std::function<double(double)>& g) {
    const auto stopped = zero_set_detector(prefix);
    const double t_last = prefix.grid.back();
    if (!(t_last > 0.0))
        throw std::domain_error("filtration_estimate: the prefix must extend past time 0");
    if (stopped) return g(prefix.tau);
    return posterior_single(m, law, {t_last, prefix.values.back()}).integrate(g);
}

} // namespace gmb
