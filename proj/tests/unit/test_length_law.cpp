#include <doctest.h>

#include "gmbridge/errors.hpp"
#include "gmbridge/length_law.hpp"
#include "gmbridge/rng.hpp"

#include <cmath>
#include <random>

using namespace gmb;

TEST_SUITE("length_law") {

TEST_CASE("atom law: half-open window semantics") {
    auto law = atoms_law({{1.0, 0.5}, {2.0, 0.5}});
    CHECK(law.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(law.cdf(0.9999) == 0.0);
    CHECK(law.cdf(1.0) == doctest::Approx(0.5));     // atom at the endpoint counts
    CHECK(law.cdf(1.5) == doctest::Approx(0.5));
    CHECK(law.cdf(2.0) == doctest::Approx(1.0));
    CHECK(law.support_lower() == 1.0);
    CHECK(law.support_upper() == 2.0);

    auto one = [](double) { return 1.0; };
    CHECK(law.integrate(one, 1.0, 2.0) == doctest::Approx(0.5));  // (1,2]: atom at 1 out
    CHECK(law.integrate(one, 0.5, 1.0) == doctest::Approx(0.5));  // (0.5,1]: atom at 1 in
    CHECK(law.integrate([](double r) { return r; }, 0.0, 5.0)
          == doctest::Approx(1.5));
}

TEST_CASE("atoms at one location merge") {
    auto law = atoms_law({{1.0, 0.25}, {2.0, 0.5}, {1.0, 0.25}});
    REQUIRE(law.atoms().size() == 2);
    CHECK(law.atoms()[0].location == 1.0);
    CHECK(law.atoms()[0].mass == doctest::Approx(0.5));
}

TEST_CASE("atom law input validation") {
    CHECK_THROWS_AS(atoms_law({}), std::invalid_argument);
    CHECK_THROWS_AS(atoms_law({{1.0, 0.7}, {2.0, 0.7}}), std::invalid_argument);
    CHECK_THROWS_AS(atoms_law({{0.0, 1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(atoms_law({{-1.0, 1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(atoms_law({{1.0, -0.5}, {2.0, 1.5}}), std::invalid_argument);
}

TEST_CASE("exponential law: cdf, windows, truncation") {
    auto law = exponential_law(1.0);
    CHECK(law.total_mass() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(law.cdf(1.0) == doctest::Approx(0.6321205588285577).epsilon(1e-9));
    CHECK(law.support_lower() == 0.0);
    // truncated where the remaining tail mass is ~1e-12
    CHECK(law.support_upper() > 25.0);
    CHECK(law.support_upper() < 1e4);
    CHECK(law.piece_bounds(0).second == law.support_upper());

    auto one = [](double) { return 1.0; };
    CHECK(law.integrate(one, 1.0, 2.0)
          == doctest::Approx(std::exp(-1.0) - std::exp(-2.0)).epsilon(1e-10));
    CHECK(law.integrate([](double r) { return r; }, 0.0, law.support_upper())
          == doctest::Approx(1.0).epsilon(1e-9));
    CHECK_THROWS_AS(exponential_law(0.0), std::invalid_argument);
}

TEST_CASE("uniform law") {
    auto law = uniform_law(1.0, 2.0);
    CHECK(law.cdf(1.5) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(law.support_lower() == 1.0);
    CHECK(law.support_upper() == 2.0);
    CHECK(law.integrate([](double r) { return r; }, 0.0, 3.0)
          == doctest::Approx(1.5).epsilon(1e-12));
    CHECK_THROWS_AS(uniform_law(2.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(uniform_law(-1.0, 1.0), std::invalid_argument);
}

TEST_CASE("atom sampling is bit-exact and matches the masses") {
    auto law = atoms_law({{1.0, 0.25}, {2.0, 0.75}});
    auto rng = path_engine(42, 0);
    std::size_t n1 = 0, n2 = 0;
    const std::size_t n = 20000;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = law.sample(rng);
        if (v == 1.0) ++n1;
        else if (v == 2.0) ++n2;
    }
    CHECK(n1 + n2 == n);    // nothing lands off-atom
    const double se = std::sqrt(0.25 * 0.75 / double(n));
    CHECK(std::fabs(double(n1) / double(n) - 0.25) < 4.0 * se);
}

TEST_CASE("continuous sampling matches the cdf") {
    auto law = exponential_law(2.0);
    auto rng = path_engine(43, 0);
    const std::size_t n = 20000;
    std::vector<double> draws(n);
    for (auto& d : draws) d = law.sample(rng);
    std::sort(draws.begin(), draws.end());
    // one-sample KS against the analytic cdf
    double d_stat = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double f = 1.0 - std::exp(-2.0 * draws[i]);
        d_stat = std::max(d_stat, std::fabs(f - double(i + 1) / double(n)));
        d_stat = std::max(d_stat, std::fabs(f - double(i) / double(n)));
    }
    CHECK(d_stat * std::sqrt(double(n)) < 1.95);   // ~p = 0.001 asymptotic cutoff

    // determinism: the same engine state reproduces the same draws
    auto r1 = path_engine(9, 5);
    auto r2 = path_engine(9, 5);
    for (int i = 0; i < 100; ++i) CHECK(law.sample(r1) == law.sample(r2));
}

TEST_CASE("mixture of an atom and a disjoint density") {
    auto law = mixture_law({{0.5, atoms_law({{1.0, 1.0}})},
                            {0.5, uniform_law(1.0, 2.0)}});
    CHECK(law.total_mass() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(law.cdf(1.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(law.cdf(1.5) == doctest::Approx(0.75).epsilon(1e-10));
    CHECK(law.support_lower() == 1.0);
    CHECK(law.support_upper() == 2.0);

    auto rng = path_engine(44, 0);
    std::size_t at_atom = 0;
    for (int i = 0; i < 10000; ++i)
        if (law.sample(rng) == 1.0) ++at_atom;
    CHECK(std::fabs(at_atom / 10000.0 - 0.5) < 4.0 * std::sqrt(0.25 / 10000.0));
}

TEST_CASE("mixture of overlapping densities") {
    // overlap on (1, 2): densities add with their weights
    auto law = mixture_law({{0.5, uniform_law(0.5, 2.0)},
                            {0.5, uniform_law(1.0, 3.0)}});
    CHECK(law.total_mass() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(law.cdf(1.0) == doctest::Approx(0.5 / 3.0).epsilon(1e-10));
    CHECK(law.cdf(2.0) == doctest::Approx(0.5 + 0.25).epsilon(1e-10));
    CHECK(law.cdf(3.0) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("an atom inside a density piece is rejected") {
    CHECK_THROWS_AS(mixture_law({{0.5, atoms_law({{1.5, 1.0}})},
                                 {0.5, uniform_law(1.0, 2.0)}}),
                    std::invalid_argument);
    // at the boundary it is fine (checked above); beyond it too
    CHECK_NOTHROW(mixture_law({{0.5, atoms_law({{2.5, 1.0}})},
                               {0.5, uniform_law(1.0, 2.0)}}));
}

TEST_CASE("mixture weight validation") {
    CHECK_THROWS_AS(mixture_law({{0.5, atoms_law({{1.0, 1.0}})},
                                 {0.6, uniform_law(2.0, 3.0)}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(mixture_law({}), std::invalid_argument);
}

TEST_CASE("a density that does not integrate to one is rejected") {
    std::vector<DensityPiece> pieces;
    pieces.push_back({0.0, 1.0, [](double) { return 0.7; }});
    CHECK_THROWS_AS(LengthLaw({}, std::move(pieces)), std::invalid_argument);
}

TEST_CASE("a non-decaying unbounded tail is rejected") {
    std::vector<DensityPiece> pieces;
    pieces.push_back({0.0, std::numeric_limits<double>::infinity(),
                      [](double) { return 1e-3; }});
    CHECK_THROWS_AS(LengthLaw({}, std::move(pieces)), numeric_error);
}

TEST_CASE("law specs parse from JSON") {
    auto a = parse_law_spec(R"({"kind":"atoms","points":[[1.0,0.5],[2.0,0.5]]})");
    CHECK(a.atoms().size() == 2);
    CHECK(a.cdf(1.0) == doctest::Approx(0.5));

    auto e = parse_law_spec(R"({"kind":"exponential","rate":2.0})");
    CHECK(e.cdf(1.0) == doctest::Approx(1.0 - std::exp(-2.0)).epsilon(1e-9));

    auto u = parse_law_spec(R"({"kind":"uniform","a":1.0,"b":3.0})");
    CHECK(u.cdf(2.0) == doctest::Approx(0.5).epsilon(1e-10));

    auto m = parse_law_spec(
        R"({"kind":"mixture","parts":[
             {"weight":0.4,"kind":"atoms","points":[[1.0,1.0]]},
             {"weight":0.6,"kind":"uniform","a":2.0,"b":3.0}]})");
    CHECK(m.cdf(1.0) == doctest::Approx(0.4));
    CHECK(m.cdf(3.0) == doctest::Approx(1.0).epsilon(1e-10));

    CHECK_THROWS_AS(parse_law_spec("not json"), std::invalid_argument);
    CHECK_THROWS_AS(parse_law_spec(R"({"kind":"cauchy"})"), std::invalid_argument);
    CHECK_THROWS_AS(parse_law_spec(R"({"kind":"atoms"})"), std::invalid_argument);
    CHECK_THROWS_AS(parse_law_spec(R"({"kind":"uniform","a":1.0})"),
                    std::invalid_argument);
}

} // suite length_law
