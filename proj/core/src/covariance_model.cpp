#include "gmbridge/covariance_model.hpp"
#include "gmbridge/errors.hpp"

#include <cmath>
// boost 1.74 pchip.hpp calls isnan unqualified; give it something to find
using std::isnan;
#include <boost/math/interpolators/pchip.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace gmb {

namespace {

double checked_eval(const std::function<double(double)>& f, double t, const char* which) {
    if (t < 0.0)
        throw std::domain_error(std::string(which) + ": negative time");
    const double v = f(t);
    if (!std::isfinite(v))
        throw numeric_error(std::string(which) + ": non-finite value at t = " + std::to_string(t));
    return v;
}

} // namespace

CovarianceModel::CovarianceModel(std::string name,
                                 std::function<double(double)> rho,
                                 std::function<double(double)> q,
                                 std::optional<double> q_inf)
    : name_(std::move(name)), rho_(std::move(rho)), q_(std::move(q)), q_inf_(q_inf) {
    if (!rho_ || !q_)
        throw std::invalid_argument("CovarianceModel: null factor");
}

double CovarianceModel::rho(double t) const { return checked_eval(rho_, t, "rho"); }

double CovarianceModel::q(double t) const { return checked_eval(q_, t, "q"); }

double CovarianceModel::covariance(double s, double t) const {
    return rho(std::min(s, t)) * q(std::max(s, t));
}

CovarianceModel brownian() {
    return CovarianceModel("brownian",
                           [](double t) { return t; },
                           [](double) { return 1.0; },
                           1.0);
}

CovarianceModel scaled_brownian(double sigma2) {
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2))
        throw std::invalid_argument("scaled_brownian: sigma2 must be positive");
    return CovarianceModel("scaled_brownian",
                           [sigma2](double t) { return sigma2 * t; },
                           [](double) { return 1.0; },
                           1.0);
}

CovarianceModel ou_from_zero(double theta, double sigma) {
    if (!(theta > 0.0) || !std::isfinite(theta))
        throw std::invalid_argument("ou_from_zero: theta must be positive");
    if (!(sigma > 0.0) || !std::isfinite(sigma))
        throw std::invalid_argument("ou_from_zero: sigma must be positive");
    const double scale = sigma * sigma / theta;
    return CovarianceModel("ou_from_zero",
                           [scale, theta](double t) { return scale * std::sinh(theta * t); },
                           [theta](double t) { return std::exp(-theta * t); },
                           0.0);
}

CovarianceModel tabulated(std::vector<double> t,
                          std::vector<double> rho,
                          std::vector<double> q,
                          std::string name) {
    const std::size_t n = t.size();
    if (rho.size() != n || q.size() != n)
        throw std::invalid_argument("tabulated: column lengths differ");
    if (n < 4)
        throw std::invalid_argument("tabulated: at least 4 sample points required");
    if (t.front() != 0.0)
        throw std::invalid_argument("tabulated: first time must be 0");
    if (rho.front() != 0.0)
        throw std::invalid_argument("tabulated: rho(0) must be 0");
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(t[i]) || !std::isfinite(rho[i]) || !std::isfinite(q[i]))
            throw std::invalid_argument("tabulated: non-finite sample");
        if (i > 0 && !(t[i] > t[i - 1]))
            throw std::invalid_argument("tabulated: times must be strictly increasing");
        if (i > 0 && !(rho[i] > 0.0))
            throw std::invalid_argument("tabulated: rho must be positive for t > 0");
        if (!(q[i] > 0.0))
            throw std::invalid_argument("tabulated: q must be positive");
    }

    const double horizon = t.back();
    const double q_min = *std::min_element(q.begin(), q.end());

    using interp_t = boost::math::interpolators::pchip<std::vector<double>>;
    auto rho_spline = std::make_shared<interp_t>(std::vector<double>(t), std::move(rho));
    auto q_spline = std::make_shared<interp_t>(std::move(t), std::move(q));

    return CovarianceModel(
        name,
        [rho_spline, horizon, name](double u) {
            if (u > horizon)
                throw std::domain_error(name + ": beyond tabulated horizon");
            return (*rho_spline)(u);
        },
        [q_spline, horizon, name](double u) {
            if (u > horizon)
                throw std::domain_error(name + ": beyond tabulated horizon");
            return (*q_spline)(u);
        },
        q_min);
}

CovarianceModel tabulated_from_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("tabulated_from_csv: cannot open " + path);

    std::vector<double> t, rho, q;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
        if (line_no == 1 && line.find_first_of("abcdefghijklmnopqrstuvwxyz"
                                               "ABCDEFGHIJKLMNOPQRSTUVWXYZ") != std::string::npos)
            continue; // header
        std::istringstream row(line);
        std::string cell;
        double vals[3];
        int col = 0;
        while (std::getline(row, cell, ',')) {
            if (col >= 3)
                throw std::invalid_argument(path + ":" + std::to_string(line_no) +
                                            ": expected 3 columns");
            try {
                vals[col] = std::stod(cell);
            } catch (const std::exception&) {
                throw std::invalid_argument(path + ":" + std::to_string(line_no) +
                                            ": cannot parse '" + cell + "'");
            }
            ++col;
        }
        if (col != 3)
            throw std::invalid_argument(path + ":" + std::to_string(line_no) +
                                        ": expected 3 columns");
        t.push_back(vals[0]);
        rho.push_back(vals[1]);
        q.push_back(vals[2]);
    }
    return tabulated(std::move(t), std::move(rho), std::move(q), path);
}

bool ValidationReport::all_pass() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const CheckResult& c) { return c.pass; });
}

const CheckResult* ValidationReport::find(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

ValidationReport validate(const CovarianceModel& model, double horizon, double step) {
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw std::invalid_argument("validate: horizon must be positive");
    if (!(step > 0.0) || !(step < horizon))
        throw std::invalid_argument("validate: step must lie in (0, horizon)");

    ValidationReport report;
    const std::size_t n = std::size_t(horizon / step + 1e-9);

    std::vector<double> tv(n), rv(n), qv(n);
    double rho0 = 0.0;
    try {
        rho0 = model.rho(0.0);
        for (std::size_t i = 0; i < n; ++i) {
            tv[i] = double(i + 1) * step;
            rv[i] = model.rho(tv[i]);
            qv[i] = model.q(tv[i]);
        }
    } catch (const std::exception& e) {
        for (const char* name : {"positivity", "ratio_monotonicity", "markov_factorization",
                                 "q_infimum", "continuity"})
            report.checks.push_back({name, false, 0.0, 0.0,
                                     std::string("evaluation failed: ") + e.what()});
        return report;
    }

    { // positivity: rho(0) = 0, rho > 0 and q > 0 at every grid point
        double min_val = rho0 == 0.0 ? 1.0 : -1.0;
        std::string msg;
        if (std::abs(rho0) > 1e-12 * std::max(1.0, rv.back())) {
            min_val = -std::abs(rho0);
            msg = "rho(0) = " + std::to_string(rho0) + " is not 0";
        }
        for (std::size_t i = 0; i < n && msg.empty(); ++i) {
            min_val = std::min({min_val, rv[i], qv[i]});
            if (!(rv[i] > 0.0) || !(qv[i] > 0.0))
                msg = "non-positive factor at t = " + std::to_string(tv[i]);
        }
        report.checks.push_back({"positivity", msg.empty(), min_val, 0.0, msg});
    }

    { // ratio_monotonicity: rho/q strictly increasing along the grid
        double min_inc = std::numeric_limits<double>::infinity();
        std::string msg;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const double inc = rv[i + 1] / qv[i + 1] - rv[i] / qv[i];
            if (inc < min_inc) min_inc = inc;
            if (!(inc > 0.0) && msg.empty())
                msg = "rho/q not increasing between t = " + std::to_string(tv[i]) +
                      " and t = " + std::to_string(tv[i + 1]);
        }
        report.checks.push_back({"ratio_monotonicity", msg.empty(), min_inc, 0.0, msg});
    }

    { // markov_factorization: R(s,t) R(t,u) = R(t,t) R(s,u) on grid triples
        const std::size_t stride = std::max<std::size_t>(1, n / 40);
        double worst = 0.0;
        std::string msg;
        for (std::size_t i = 0; i < n; i += stride)
            for (std::size_t j = i + stride; j < n; j += stride)
                for (std::size_t k = j + stride; k < n; k += stride) {
                    const double lhs = model.covariance(tv[i], tv[j]) * model.covariance(tv[j], tv[k]);
                    const double rhs = model.covariance(tv[j], tv[j]) * model.covariance(tv[i], tv[k]);
                    const double rel = std::abs(lhs - rhs) /
                                       std::max({std::abs(lhs), std::abs(rhs),  1e-300});
                    if (rel > worst) {
                        worst = rel;
                        if (rel > 1e-12)
                            msg = "factorization residual " + std::to_string(rel) +
                                  " at (" + std::to_string(tv[i]) + ", " + std::to_string(tv[j]) +
                                  ", " + std::to_string(tv[k]) + ")";
                    }
                }
        report.checks.push_back({"markov_factorization", worst <= 1e-12, worst, 1e-12, msg});
    }

    { // q_infimum: positive min over the grid; warn when the global inf is 0
        const double q_min = *std::min_element(qv.begin(), qv.end());
        std::string msg;
        if (model.q_inf() && *model.q_inf() == 0.0)
            msg = "declared infimum of q over (0, infinity) is 0; "
                  "long-horizon conditioning degenerates";
        report.checks.push_back({"q_infimum", q_min > 0.0, q_min, 0.0, msg});
    }

    { // continuity: flag jumps large relative to sqrt(step)
        const double bound = 10.0 * std::sqrt(step);
        double worst = 0.0;
        std::string msg;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const double jr = std::abs(rv[i + 1] - rv[i]) / (std::abs(rv[i]) + 1.0);
            const double jq = std::abs(qv[i + 1] - qv[i]) / (std::abs(qv[i]) + 1.0);
            const double j = std::max(jr, jq);
            if (j > worst) {
                worst = j;
                if (j > bound && msg.empty())
                    msg = "jump at t = " + std::to_string(tv[i]);
            }
        }
        report.checks.push_back({"continuity", worst <= bound, worst, bound, msg});
    }

    return report;
}

} // namespace gmb
