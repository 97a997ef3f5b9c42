#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace gmb {

struct Atom {
    double location;
    double mass;
};

// Absolutely continuous part supported on (lo, hi); hi may be +infinity.
struct DensityPiece {
    double lo;
    double hi;
    std::function<double(double)> pdf;
};

/// Distribution of the random bridge length: finitely many atoms plus a
/// piecewise density on (0, infinity), total mass 1 (checked to 1e-9 at
/// construction). Windows are half open (a, b]: an atom sitting exactly at b
/// counts, one at a does not.
///
/// Unbounded pieces are truncated where the remaining mass falls below 1e-12;
/// a tail that does not decay raises numeric_error at construction.
class LengthLaw {
public:
    LengthLaw(std::vector<Atom> atoms, std::vector<DensityPiece> pieces);

    /// P(tau <= t).
    double cdf(double t) const;

    /// Integral of f over the window (lo, hi] against this law.
    /// Absolute quadrature tolerance 1e-10 relative to the integrand scale.
    double integrate(const std::function<double(double)>& f,
                     double lo, double hi) const;

    /// Inverse-CDF sampling; atoms are returned bit-exactly, values in
    /// density pieces are solved to 1e-12.
    double sample(std::mt19937_64& rng) const;

    double total_mass() const { return total_mass_; }
    const std::vector<Atom>& atoms() const { return atoms_; }
    const std::vector<DensityPiece>& pieces() const { return pieces_; }

    /// Effective support of density piece i after tail truncation.
    std::pair<double, double> piece_bounds(std::size_t i) const;

    /// Smallest point of the support.
    double support_lower() const { return support_lower_; }
    /// Largest point of the support (truncation point for unbounded tails).
    double support_upper() const { return support_upper_; }

private:
    struct PieceTable {
        double lo;
        double hi;            // truncated upper end
        std::vector<double> edges;
        std::vector<double> cum;   // cumulative mass at edges
        double mass;
    };

    double piece_cdf(std::size_t i, double t) const;

    std::vector<Atom> atoms_;
    std::vector<DensityPiece> pieces_;
    std::vector<PieceTable> tables_;
    double total_mass_;
    double support_lower_;
    double support_upper_;
};

LengthLaw atoms_law(std::vector<Atom> atoms);
LengthLaw exponential_law(double rate);
LengthLaw uniform_law(double a, double b);

/// Mixture of laws with positive weights summing to 1.
LengthLaw mixture_law(const std::vector<std::pair<double, LengthLaw>>& parts);

/// Builds a law from a JSON text. Schemas:
///   {"kind":"atoms","points":[[1.0,0.5],[2.0,0.5]]}
///   {"kind":"exponential","rate":1.0}
///   {"kind":"uniform","a":1.0,"b":2.0}
///   {"kind":"mixture","parts":[{"weight":0.4,"kind":"atoms",...}, ...]}
LengthLaw parse_law_spec(const std::string& json_text);

} // namespace gmb
