#include "gmbridge/length_law.hpp"
#include "gmbridge/errors.hpp"
#include "gmbridge/quadrature.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gmb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kPanels = 1024;
constexpr double kTailResidual = 1e-12;

// Upper truncation point for a pdf on (lo, inf): double the probe window
// until the mass in it is negligible and geometrically decaying, so the
// discarded remainder is below kTailResidual.
double truncate_tail(const std::function<double(double)>& pdf, double lo) {
    double t = std::max(lo, 1.0);
    double prev = kInf;
    for (int k = 0; k < 60; ++k) {
        const double chunk =
            integrate_adaptive(pdf, t, 2.0 * t, 1e-8, 1e-14).value;
        if (chunk < 0.25 * kTailResidual && chunk <= 0.5 * prev) return 2.0 * t;
        prev = chunk;
        t *= 2.0;
    }
    throw numeric_error("density tail does not decay; refusing to truncate");
}

} // namespace

LengthLaw::LengthLaw(std::vector<Atom> atoms, std::vector<DensityPiece> pieces)
    : atoms_(std::move(atoms)), pieces_(std::move(pieces)) {
    for (const Atom& a : atoms_) {
        if (!(a.location > 0.0) || !std::isfinite(a.location))
            throw std::invalid_argument("LengthLaw: atom location must be positive and finite");
        if (!(a.mass > 0.0))
            throw std::invalid_argument("LengthLaw: atom mass must be positive");
    }
    std::sort(atoms_.begin(), atoms_.end(),
              [](const Atom& a, const Atom& b) { return a.location < b.location; });
    // merge duplicates so mixtures of overlapping atom sets stay well formed
    std::vector<Atom> merged;
    for (const Atom& a : atoms_) {
        if (!merged.empty() && merged.back().location == a.location)
            merged.back().mass += a.mass;
        else
            merged.push_back(a);
    }
    atoms_ = std::move(merged);

    for (const DensityPiece& p : pieces_) {
        if (!(p.lo >= 0.0) || !std::isfinite(p.lo))
            throw std::invalid_argument("LengthLaw: piece lower bound must be finite and >= 0");
        if (!(p.hi > p.lo))
            throw std::invalid_argument("LengthLaw: piece upper bound must exceed lower");
        if (!p.pdf)
            throw std::invalid_argument("LengthLaw: null pdf");
    }
    std::sort(pieces_.begin(), pieces_.end(),
              [](const DensityPiece& a, const DensityPiece& b) { return a.lo < b.lo; });
    for (std::size_t i = 0; i + 1 < pieces_.size(); ++i)
        if (pieces_[i].hi > pieces_[i + 1].lo)
            throw std::invalid_argument("LengthLaw: density pieces must not overlap");
    for (const Atom& a : atoms_)
        for (const DensityPiece& p : pieces_)
            if (a.location > p.lo && a.location < p.hi)
                throw std::invalid_argument("LengthLaw: atom inside a density interval");

    double total = 0.0;
    for (const Atom& a : atoms_) total += a.mass;

    tables_.reserve(pieces_.size());
    for (const DensityPiece& p : pieces_) {
        PieceTable table;
        table.lo = p.lo;
        table.hi = std::isinf(p.hi) ? truncate_tail(p.pdf, p.lo) : p.hi;
        const double width = (table.hi - table.lo) / double(kPanels);
        table.edges.resize(kPanels + 1);
        table.cum.resize(kPanels + 1);
        table.edges[0] = table.lo;
        table.cum[0] = 0.0;
        for (std::size_t j = 0; j < kPanels; ++j) {
            table.edges[j + 1] = (j + 1 == kPanels) ? table.hi : table.lo + double(j + 1) * width;
            const double m = integrate_panel15(p.pdf, table.edges[j], table.edges[j + 1]);
            if (!(m >= 0.0) || !std::isfinite(m))
                throw std::invalid_argument("LengthLaw: pdf integrates to a negative or non-finite mass");
            table.cum[j + 1] = table.cum[j] + m;
        }
        table.mass = table.cum.back();
        total += table.mass;
        tables_.push_back(std::move(table));
    }

    if (std::abs(total - 1.0) > 1e-9)
        throw std::invalid_argument("LengthLaw: total mass " + std::to_string(total) +
                                    " differs from 1 by more than 1e-9");
    total_mass_ = total;

    support_lower_ = kInf;
    support_upper_ = 0.0;
    if (!atoms_.empty()) {
        support_lower_ = atoms_.front().location;
        support_upper_ = atoms_.back().location;
    }
    for (const PieceTable& t : tables_) {
        support_lower_ = std::min(support_lower_, t.lo);
        support_upper_ = std::max(support_upper_, t.hi);
    }
}

std::pair<double, double> LengthLaw::piece_bounds(std::size_t i) const {
    if (i >= tables_.size())
        throw std::out_of_range("LengthLaw::piece_bounds: index out of range");
    return {tables_[i].lo, tables_[i].hi};
}

double LengthLaw::piece_cdf(std::size_t i, double t) const {
    const PieceTable& tab = tables_[i];
    if (t <= tab.lo) return 0.0;
    if (t >= tab.hi) return tab.mass;
    const std::size_t j = std::min<std::size_t>(
        kPanels - 1,
        std::size_t((t - tab.lo) / (tab.hi - tab.lo) * double(kPanels)));
    // t may straddle a panel boundary due to rounding; anchor at the edge
    // at or below t.
    std::size_t k = j;
    while (k > 0 && tab.edges[k] > t) --k;
    while (k + 1 < tab.edges.size() && tab.edges[k + 1] <= t) ++k;
    return tab.cum[k] + integrate_panel15(pieces_[i].pdf, tab.edges[k], t);
}

double LengthLaw::cdf(double t) const {
    if (t < 0.0) throw std::domain_error("LengthLaw::cdf: negative time");
    double acc = 0.0;
    for (const Atom& a : atoms_) {
        if (a.location > t) break;
        acc += a.mass;
    }
    for (std::size_t i = 0; i < tables_.size(); ++i) acc += piece_cdf(i, t);
    return std::min(acc, total_mass_);
}

double LengthLaw::integrate(const std::function<double(double)>& f,
                            double lo, double hi) const {
    if (!(lo >= 0.0))
        throw std::invalid_argument("LengthLaw::integrate: window must lie in [0, infinity)");
    if (!(hi > lo))
        throw std::invalid_argument("LengthLaw::integrate: empty window");
    double acc = 0.0;
    for (const Atom& a : atoms_) {
        if (a.location <= lo) continue;
        if (a.location > hi) break;
        acc += f(a.location) * a.mass;
    }
    for (std::size_t i = 0; i < tables_.size(); ++i) {
        const double a = std::max(tables_[i].lo, lo);
        const double b = std::min(tables_[i].hi, hi);
        if (b <= a) continue;
        const auto& pdf = pieces_[i].pdf;
        acc += integrate_adaptive([&](double s) { return f(s) * pdf(s); }, a, b,
                                  1e-12, 1e-13)
                   .value;
    }
    return acc;
}

double LengthLaw::sample(std::mt19937_64& rng) const {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double u = unif(rng) * total_mass_;
    if (u == 0.0) u = std::numeric_limits<double>::min();

    // Walk atoms and pieces in time order.
    std::size_t ai = 0, pi = 0;
    double cum = 0.0;
    while (ai < atoms_.size() || pi < tables_.size()) {
        const bool atom_next =
            ai < atoms_.size() &&
            (pi >= tables_.size() || atoms_[ai].location <= tables_[pi].lo);
        if (atom_next) {
            cum += atoms_[ai].mass;
            if (u <= cum) return atoms_[ai].location;
            ++ai;
        } else {
            const PieceTable& tab = tables_[pi];
            if (u <= cum + tab.mass) {
                const double target = u - cum;
                const auto& pdf = pieces_[pi].pdf;
                const auto panel = std::upper_bound(tab.cum.begin(), tab.cum.end(), target);
                std::size_t j = panel == tab.cum.begin()
                                    ? 0
                                    : std::size_t(panel - tab.cum.begin()) - 1;
                j = std::min(j, kPanels - 1);
                double a = tab.edges[j], b = tab.edges[j + 1];
                const double local = target - tab.cum[j];
                // Safeguarded Newton on G(x) = mass of (edge_j, x]
                double x = 0.5 * (a + b);
                for (int it = 0; it < 100; ++it) {
                    const double g = integrate_panel15(pdf, tab.edges[j], x) - local;
                    if (std::abs(g) <= 1e-13) return x;
                    if (g > 0.0) b = x; else a = x;
                    if (b - a <= 4.0 * std::numeric_limits<double>::epsilon() *
                                     std::max(1.0, std::abs(x)))
                        return 0.5 * (a + b);
                    const double d = pdf(x);
                    double next = d > 0.0 ? x - g / d : 0.5 * (a + b);
                    if (!(next > a && next < b)) next = 0.5 * (a + b);
                    x = next;
                }
                return x;
            }
            cum += tab.mass;
            ++pi;
        }
    }
    // Rounding pushed u past the accumulated mass: return the last support point.
    return support_upper_;
}

LengthLaw atoms_law(std::vector<Atom> atoms) {
    return LengthLaw(std::move(atoms), {});
}

LengthLaw exponential_law(double rate) {
    if (!(rate > 0.0) || !std::isfinite(rate))
        throw std::invalid_argument("exponential_law: rate must be positive");
    return LengthLaw({}, {DensityPiece{
                         0.0, kInf,
                         [rate](double t) { return rate * std::exp(-rate * t); }}});
}

LengthLaw uniform_law(double a, double b) {
    if (!(a >= 0.0) || !(b > a) || !std::isfinite(b))
        throw std::invalid_argument("uniform_law: need 0 <= a < b < infinity");
    const double h = 1.0 / (b - a);
    return LengthLaw({}, {DensityPiece{a, b, [h](double) { return h; }}});
}

LengthLaw mixture_law(const std::vector<std::pair<double, LengthLaw>>& parts) {
    if (parts.empty())
        throw std::invalid_argument("mixture_law: no parts");
    double wsum = 0.0;
    for (const auto& [w, law] : parts) {
        if (!(w > 0.0))
            throw std::invalid_argument("mixture_law: weights must be positive");
        wsum += w;
    }
    if (std::abs(wsum - 1.0) > 1e-9)
        throw std::invalid_argument("mixture_law: weights must sum to 1");

    std::vector<Atom> atoms;
    struct Scaled {
        double lo, hi, w;
        std::function<double(double)> pdf;
    };
    std::vector<Scaled> scaled;
    for (const auto& [w, law] : parts) {
        for (const Atom& a : law.atoms()) atoms.push_back({a.location, w * a.mass});
        for (const DensityPiece& p : law.pieces())
            scaled.push_back({p.lo, p.hi, w, p.pdf});
    }

    // Split overlapping density supports into elementary intervals, summing
    // the weighted pdfs that cover each one.
    std::vector<double> cuts;
    bool unbounded = false;
    for (const Scaled& s : scaled) {
        cuts.push_back(s.lo);
        if (std::isinf(s.hi)) unbounded = true;
        else cuts.push_back(s.hi);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    std::vector<DensityPiece> pieces;
    auto add_interval = [&](double a, double b) {
        std::vector<std::pair<double, std::function<double(double)>>> cover;
        for (const Scaled& s : scaled)
            if (s.lo <= a && b <= s.hi) cover.emplace_back(s.w, s.pdf);
        if (cover.empty()) return;
        pieces.push_back({a, b, [cover](double t) {
                              double acc = 0.0;
                              for (const auto& [w, pdf] : cover) acc += w * pdf(t);
                              return acc;
                          }});
    };
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) add_interval(cuts[i], cuts[i + 1]);
    if (unbounded && !cuts.empty()) add_interval(cuts.back(), kInf);

    return LengthLaw(std::move(atoms), std::move(pieces));
}

namespace {

LengthLaw law_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
        throw std::invalid_argument("law spec: expected an object with a \"kind\" string");
    const std::string kind = j["kind"].get<std::string>();
    if (kind == "atoms") {
        if (!j.contains("points") || !j["points"].is_array())
            throw std::invalid_argument("law spec: atoms needs a \"points\" array");
        std::vector<Atom> atoms;
        for (const auto& p : j["points"]) {
            if (!p.is_array() || p.size() != 2)
                throw std::invalid_argument("law spec: each atom is a [location, mass] pair");
            atoms.push_back({p[0].get<double>(), p[1].get<double>()});
        }
        return atoms_law(std::move(atoms));
    }
    if (kind == "exponential") {
        if (!j.contains("rate"))
            throw std::invalid_argument("law spec: exponential needs \"rate\"");
        return exponential_law(j["rate"].get<double>());
    }
    if (kind == "uniform") {
        if (!j.contains("a") || !j.contains("b"))
            throw std::invalid_argument("law spec: uniform needs \"a\" and \"b\"");
        return uniform_law(j["a"].get<double>(), j["b"].get<double>());
    }
    if (kind == "mixture") {
        if (!j.contains("parts") || !j["parts"].is_array())
            throw std::invalid_argument("law spec: mixture needs a \"parts\" array");
        std::vector<std::pair<double, LengthLaw>> parts;
        for (const auto& part : j["parts"]) {
            if (!part.contains("weight"))
                throw std::invalid_argument("law spec: each mixture part needs \"weight\"");
            nlohmann::json sub = part;
            sub.erase("weight");
            parts.emplace_back(part["weight"].get<double>(), law_from_json(sub));
        }
        return mixture_law(parts);
    }
    throw std::invalid_argument("law spec: unknown kind \"" + kind + "\"");
}

} // namespace

LengthLaw parse_law_spec(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("law spec: ") + e.what());
    }
    try {
        return law_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("law spec: ") + e.what());
    }
}

} // namespace gmb
