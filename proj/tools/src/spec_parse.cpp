#include "spec_parse.hpp"

#include <cmath>
#include <cstdlib>
#include <map>
#include <stdexcept>

namespace gmb::cli {

namespace {

double to_number(const std::string& s, const std::string& context) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument(context + ": cannot parse number '" + s + "'");
    }
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        out.push_back(s.substr(start, pos == std::string::npos ? std::string::npos
                                                               : pos - start));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

// "theta=1.0,sigma=0.5" -> {{"theta",1.0},{"sigma",0.5}}
std::map<std::string, double> parse_kv(const std::string& s, const std::string& context) {
    std::map<std::string, double> kv;
    for (const std::string& item : split(s, ',')) {
        const std::size_t eq = item.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(context + ": expected key=value, got '" + item + "'");
        kv[item.substr(0, eq)] = to_number(item.substr(eq + 1), context);
    }
    return kv;
}

} // namespace

CovarianceModel parse_model_spec(const std::string& spec) {
    const std::size_t colon = spec.find(':');
    const std::string kind = spec.substr(0, colon);
    const std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);

    if (kind == "brownian") {
        if (!rest.empty())
            throw std::invalid_argument("model spec: brownian takes no parameters");
        return brownian();
    }
    if (kind == "scaled-brownian") {
        auto kv = parse_kv(rest, "model spec");
        if (!kv.count("sigma2") || kv.size() != 1)
            throw std::invalid_argument("model spec: scaled-brownian needs sigma2=<v>");
        return scaled_brownian(kv["sigma2"]);
    }
    if (kind == "ou") {
        auto kv = parse_kv(rest, "model spec");
        if (!kv.count("theta") || !kv.count("sigma") || kv.size() != 2)
            throw std::invalid_argument("model spec: ou needs theta=<v>,sigma=<v>");
        return ou_from_zero(kv["theta"], kv["sigma"]);
    }
    if (kind == "table") {
        if (rest.empty())
            throw std::invalid_argument("model spec: table needs a file path");
        return tabulated_from_csv(rest);
    }
    throw std::invalid_argument("model spec: unknown kind '" + kind + "'");
}

LengthLaw parse_tau_spec(const std::string& spec) {
    if (!spec.empty() && spec.front() == '{') return parse_law_spec(spec);

    const std::size_t colon = spec.find(':');
    const std::string kind = spec.substr(0, colon);
    const std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);

    if (kind == "atoms") {
        std::vector<Atom> atoms;
        for (const auto& [loc, mass] : parse_kv(rest, "tau spec"))
            atoms.push_back({to_number(loc, "tau spec"), mass});
        return atoms_law(std::move(atoms));
    }
    if (kind == "exp") return exponential_law(to_number(rest, "tau spec"));
    if (kind == "uniform") {
        const auto parts = split(rest, ',');
        if (parts.size() != 2)
            throw std::invalid_argument("tau spec: uniform needs a,b");
        return uniform_law(to_number(parts[0], "tau spec"),
                           to_number(parts[1], "tau spec"));
    }
    throw std::invalid_argument("tau spec: unknown kind '" + kind + "'");
}

std::vector<double> parse_grid_spec(const std::string& spec) {
    const auto parts = split(spec, ':');
    if (parts.size() != 3)
        throw std::invalid_argument("grid spec: expected start:end:step");
    const double start = to_number(parts[0], "grid spec");
    const double end = to_number(parts[1], "grid spec");
    const double step = to_number(parts[2], "grid spec");
    if (!(start >= 0.0) || !(step > 0.0) || !(start < end))
        throw std::invalid_argument("grid spec: need start >= 0, step > 0, start < end");

    std::vector<double> grid;
    const double n_exact = (end - start) / step;
    const long long n = (long long)(std::floor(n_exact + 1e-9));
    if (n > 100'000'000)
        throw std::invalid_argument("grid spec: too many points");
    for (long long k = 0; k <= n; ++k) grid.push_back(start + double(k) * step);
    return grid;
}

} // namespace gmb::cli
