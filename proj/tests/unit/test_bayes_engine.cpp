#include <doctest.h>

#include "gmbridge/bayes_engine.hpp"
#include "gmbridge/errors.hpp"
#include "gmbridge/rng.hpp"
#include "gmbridge/stats.hpp"

#include <cmath>
#include <random>

using namespace gmb;

namespace {

// Naive single-observation weight: both bridge densities formed explicitly,
// normalized by direct quadrature. Numerically fragile but independent of the
// stable ratio form used by the engine.
double naive_live_weight(const CovarianceModel& m, const LengthLaw& law,
                         double t, double x, double r) {
    auto dens = [&](double s) {
        const double v = m.rho(t) * b_factor(m, t, s) / m.rho(s);
        return normal_pdf(x, v);
    };
    const double z = law.integrate(dens, t, law.support_upper());
    return dens(r) / z;
}

// Interval-branch weight written exactly as the two-sided display: shape
// sqrt(rho(r)/B_{t1,r}) exp(-x^2 rho(r) / (2 rho(t1) B_{t1,r})) for the first
// interval, and the B_{t0,r}-form for later ones.
double naive_interval_weight_first(const CovarianceModel& m, const LengthLaw& law,
                                   double t1, double t2, double x1, double r) {
    auto shape = [&](double s) {
        const double b = b_factor(m, t1, s);
        return std::sqrt(m.rho(s) / b)
               * std::exp(-0.5 * x1 * x1 * m.rho(s) / (m.rho(t1) * b));
    };
    return shape(r) / law.integrate(shape, t1, t2);
}

double naive_interval_weight_later(const CovarianceModel& m, const LengthLaw& law,
                                   double t_prev, double t_dec, double t_zero,
                                   double x_dec, double r) {
    auto shape = [&](double s) {
        const double b_dec = b_factor(m, t_dec, s);
        const double b_prev = b_factor(m, t_prev, s);
        return std::sqrt(m.rho(s) / b_dec)
               * std::exp(-0.5 * x_dec * x_dec * b_prev
                          / (b_dec * b_factor(m, t_prev, t_dec)));
    };
    return shape(r) / law.integrate(shape, t_dec, t_zero);
}

} // namespace

TEST_SUITE("bayes_engine") {

TEST_CASE("live branch: two-atom worked example") {
    auto m = brownian();
    auto law = atoms_law({{1.0, 0.5}, {2.0, 0.5}});
    auto post = posterior_single(m, law, {0.5, 0.8});

    CHECK(post.branch() == PosteriorBranch::live);
    CHECK(post.window().first == 0.5);
    CHECK(std::isinf(post.window().second));
    CHECK(post.mass() == doctest::Approx(1.0).epsilon(1e-10));

    auto masses = post.atom_masses();
    REQUIRE(masses.size() == 2);
    CHECK(masses[0].mass == doctest::Approx(0.44424925270685933).epsilon(1e-10));
    CHECK(masses[1].mass == doctest::Approx(0.5557507472931407).epsilon(1e-10));
    CHECK(post.mean() == doctest::Approx(1.5557507472931407).epsilon(1e-10));
    CHECK(post.cdf(1.0) == doctest::Approx(0.44424925270685933).epsilon(1e-10));
    CHECK(post.cdf(0.99) == 0.0);
    CHECK(post.weight(0.4) == 0.0);             // outside the window
    CHECK(post.weight(0.7) > 0.0);              // inside, off the base support
}

TEST_CASE("live branch weight matches the naive density ratio") {
    auto m = ou_from_zero(1.0, 1.0);
    auto law = mixture_law({{0.6, atoms_law({{1.0, 0.5}, {2.5, 0.5}})},
                            {0.4, uniform_law(1.2, 2.2)}});
    const double t = 0.7, x = -0.55;
    auto post = posterior_single(m, law, {t, x});
    CHECK(post.mass() == doctest::Approx(1.0).epsilon(1e-9));
    for (double r : {1.0, 1.5, 2.0, 2.5})
        CHECK(post.weight(r)
              == doctest::Approx(naive_live_weight(m, law, t, x, r)).epsilon(1e-9));
    CHECK(phi_weight(m, law, t, 1.5, x)
          == doctest::Approx(naive_live_weight(m, law, t, x, 1.5)).epsilon(1e-9));
}

TEST_CASE("pinned branch: restriction of the prior") {
    auto m = brownian();
    auto law = exponential_law(1.0);
    auto post = posterior_single(m, law, {1.0, 0.0});

    CHECK(post.branch() == PosteriorBranch::pinned);
    CHECK(post.window() == std::pair<double, double>{0.0, 1.0});
    CHECK(post.mass() == doctest::Approx(1.0).epsilon(1e-9));
    // weight is the constant 1/F(1) on (0, 1]
    CHECK(post.weight(0.5) == doctest::Approx(1.0 / 0.6321205588285577).epsilon(1e-9));
    CHECK(post.weight(1.5) == 0.0);
    CHECK(post.mean() == doctest::Approx(0.41802329313067355).epsilon(1e-9));

    // conditioning on an impossible pinned event
    auto atoms = atoms_law({{1.0, 0.5}, {2.0, 0.5}});
    CHECK_THROWS_AS(posterior_single(m, atoms, {0.5, 0.0}), precondition_error);
}

TEST_CASE("live branch degenerates to a point mass") {
    auto m = brownian();
    auto law = atoms_law({{1.0, 0.5}, {2.0, 0.5}});
    auto post = posterior_single(m, law, {1.5, 0.7});
    CHECK(post.mass() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(post.mean() == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(post.atom_masses()[0].mass == 0.0);
    CHECK(post.atom_masses()[1].mass == doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(posterior_single(m, atoms_law({{1.0, 1.0}}), {1.5, 0.7}),
                    precondition_error);
}

TEST_CASE("interval branch: frozen two-observation example") {
    auto m = brownian();
    auto law = atoms_law({{0.6, 0.3}, {0.8, 0.4}, {1.5, 0.3}});
    auto post = posterior_multi(m, law, {{0.5, 0.7}, {1.0, 0.0}});

    CHECK(post.branch() == PosteriorBranch::interval);
    CHECK(post.window() == std::pair<double, double>{0.5, 1.0});
    CHECK(post.mass() == doctest::Approx(1.0).epsilon(1e-10));
    auto masses = post.atom_masses();
    REQUIRE(masses.size() == 3);
    CHECK(masses[0].mass == doctest::Approx(0.18011769551166182).epsilon(1e-10));
    CHECK(masses[1].mass == doctest::Approx(0.8198823044883382).epsilon(1e-10));
    CHECK(masses[2].mass == 0.0);

    // against the explicit first-interval display
    CHECK(post.weight(0.6)
          == doctest::Approx(naive_interval_weight_first(m, law, 0.5, 1.0, 0.7, 0.6))
                 .epsilon(1e-9));
    CHECK(post.weight(0.8)
          == doctest::Approx(naive_interval_weight_first(m, law, 0.5, 1.0, 0.7, 0.8))
                 .epsilon(1e-9));
}

TEST_CASE("interval branch: later-interval display with a continuous prior") {
    auto m = ou_from_zero(1.0, 1.0);
    auto law = uniform_law(0.4, 1.2);
    const double t_prev = 0.3, t_dec = 0.6, t_zero = 1.0, x_dec = 0.5;
    auto post = posterior_multi(m, law, {{t_prev, 0.4}, {t_dec, x_dec}, {t_zero, 0.0}});

    CHECK(post.branch() == PosteriorBranch::interval);
    CHECK(post.window() == std::pair<double, double>{t_dec, t_zero});
    CHECK(post.mass() == doctest::Approx(1.0).epsilon(1e-9));
    for (double r : {0.7, 0.8, 0.95})
        CHECK(post.weight(r)
              == doctest::Approx(naive_interval_weight_later(m, law, t_prev, t_dec,
                                                             t_zero, x_dec, r))
                     .epsilon(1e-8));

    // the conditional law depends on the pre-zero pair only
    auto other = posterior_multi(m, law, {{t_prev, -2.0}, {t_dec, x_dec}, {t_zero, 0.0}});
    CHECK(other.weight(0.8) == doctest::Approx(post.weight(0.8)).epsilon(1e-12));
}

TEST_CASE("multi-observation live branch collapses to the last observation") {
    auto m = brownian();
    auto law = atoms_law({{1.0, 0.5}, {2.0, 0.5}});
    auto multi = posterior_multi(m, law, {{0.3, 0.2}, {0.7, 0.5}});
    auto single = posterior_single(m, law, {0.7, 0.5});
    CHECK(multi.branch() == PosteriorBranch::live);
    for (double r : {1.0, 2.0})
        CHECK(multi.weight(r) == doctest::Approx(single.weight(r)).epsilon(1e-12));
}

TEST_CASE("joint-density form agrees with the collapsed posterior") {
    auto law = mixture_law({{0.5, atoms_law({{1.9, 0.6}, {2.4, 0.4}})},
                            {0.5, uniform_law(0.9, 1.9)}});
    std::vector<Observation> obs{{0.2, 0.3}, {0.45, -0.1}, {0.8, 0.6}};
    for (const auto& m : {brownian(), ou_from_zero(0.8, 1.1)}) {
        auto joint = posterior_from_joint(m, law, obs);
        auto fast = posterior_multi(m, law, obs);
        CHECK(joint.mass() == doctest::Approx(1.0).epsilon(1e-9));
        for (double r : {1.0, 1.5, 1.9, 2.4})
            CHECK(joint.weight(r) == doctest::Approx(fast.weight(r)).epsilon(1e-8));
    }
    CHECK_THROWS_AS(posterior_from_joint(brownian(), law,
                                         std::vector<Observation>{{0.5, 0.0}}),
                    std::invalid_argument);
}

TEST_CASE("posterior input validation") {
    auto m = brownian();
    auto law = atoms_law({{1.0, 0.5}, {2.0, 0.5}});
    using V = std::vector<Observation>;
    CHECK_THROWS_AS(posterior_multi(m, law, V{}), std::invalid_argument);
    CHECK_THROWS_AS(posterior_multi(m, law, V{{0.5, 0.1}, {0.5, 0.2}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(posterior_multi(m, law, V{{0.0, 0.1}}), std::domain_error);
    // resurrection after a zero is impossible
    CHECK_THROWS_AS(posterior_multi(m, law, V{{1.0, 0.0}, {1.5, 0.3}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(phi_weight(m, law, 0.5, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("quantiles invert the posterior cdf") {
    auto m = brownian();
    auto law = atoms_law({{1.0, 0.5}, {2.0, 0.5}});
    auto post = posterior_single(m, law, {0.5, 0.8});
    CHECK(post.quantile(0.3) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(post.quantile(0.6) == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(post.quantile(1.0) == doctest::Approx(2.0).epsilon(1e-9));
    CHECK_THROWS_AS(post.quantile(0.0), std::invalid_argument);
    CHECK_THROWS_AS(post.quantile(1.5), std::invalid_argument);

    auto cont = posterior_single(m, uniform_law(1.0, 2.0), {0.5, 0.8});
    const double q = cont.quantile(0.4);
    CHECK(cont.cdf(q) == doctest::Approx(0.4).epsilon(1e-6));
}

TEST_CASE("prediction: frozen mixture components") {
    auto m = brownian();
    auto law = atoms_law({{1.0, 0.5}, {2.0, 0.5}});
    auto pred = predict(m, law, {0.5, 0.8}, 1.5);

    CHECK(pred.zero_mass == doctest::Approx(0.44424925270685933).epsilon(1e-10));
    REQUIRE(pred.components.size() == 1);
    CHECK(pred.components[0].weight == doctest::Approx(0.5557507472931407).epsilon(1e-10));
    CHECK(pred.components[0].mean == doctest::Approx(0.8 / 3.0).epsilon(1e-13));
    CHECK(pred.components[0].variance == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
    CHECK(pred.components[0].pin_time == 2.0);
    CHECK(pred.total_mass() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(pred.mean()
          == doctest::Approx(0.5557507472931407 * 0.8 / 3.0).epsilon(1e-12));

    // expectation of a polynomial is exact under the node rule
    const double m2 = pred.expect([](double y) { return y * y; });
    const double want = 0.5557507472931407 * (0.8 / 3.0 * 0.8 / 3.0 + 1.0 / 3.0);
    CHECK(m2 == doctest::Approx(want).epsilon(1e-12));
    CHECK(pred.density(0.3) > 0.0);
    CHECK(pred.density(0.3)
          == doctest::Approx(0.5557507472931407
                             * normal_pdf(0.3 - 0.8 / 3.0, 1.0 / 3.0)).epsilon(1e-12));
}

TEST_CASE("prediction from a pinned observation is the point mass at zero") {
    auto m = brownian();
    auto pred = predict(m, exponential_law(1.0), {1.0, 0.0}, 1.5);
    CHECK(pred.zero_mass == doctest::Approx(1.0));
    CHECK(pred.components.empty());
    CHECK(pred.mean() == 0.0);
}

TEST_CASE("prediction with a continuous prior keeps its mass") {
    auto m = ou_from_zero(1.0, 1.0);
    auto law = uniform_law(1.0, 2.0);
    auto pred = predict(m, law, {0.5, 0.8}, 1.4);
    CHECK(pred.total_mass() == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(pred.zero_mass > 0.0);
    CHECK(pred.zero_mass < 1.0);
    CHECK_FALSE(pred.components.empty());
}

TEST_CASE("the zero mass over equal-width windows is not translation invariant") {
    // an absorbed bridge cannot revive: windows of equal width straddling vs
    // missing the first support point carry very different zero probabilities
    auto m = brownian();
    auto law = atoms_law({{1.0, 0.5}, {2.0, 0.5}});
    const Observation obs{0.5, 0.8};
    auto post = posterior_single(m, law, obs);
    const double miss = post.cdf(0.9) - post.cdf(0.7);
    const double straddle = post.cdf(1.1) - post.cdf(0.9);
    CHECK(miss == 0.0);
    CHECK(straddle == doctest::Approx(0.44424925270685933).epsilon(1e-10));
}

TEST_CASE("joint expectation: mass, indicator, tower") {
    auto m = brownian();
    auto law = atoms_law({{1.0, 0.5}, {2.0, 0.5}});
    std::vector<Observation> obs{{0.5, 0.8}};

    CHECK(expect_joint(m, law, obs, 1.5, [](double, double) { return 1.0; })
          == doctest::Approx(1.0).epsilon(1e-9));

    // indicator of the absorbed event reproduces the predictive zero mass
    const double absorbed = expect_joint(m, law, obs, 1.5,
                                         [](double, double y) { return y == 0.0 ? 1.0 : 0.0; });
    CHECK(absorbed == doctest::Approx(0.44424925270685933).epsilon(1e-9));

    // a function of tau alone integrates to the posterior mean
    auto post = posterior_single(m, law, obs[0]);
    CHECK(expect_joint(m, law, obs, 1.5, [](double r, double) { return r; })
          == doctest::Approx(post.mean()).epsilon(1e-10));

    // second moment of the value at u, against the predictive components
    auto pred = predict(m, law, obs[0], 1.5);
    const double m2 = expect_joint(m, law, obs, 1.5,
                                   [](double, double y) { return y * y; });
    CHECK(m2 == doctest::Approx(pred.expect([](double y) { return y * y; }))
                    .epsilon(1e-10));

    CHECK_THROWS_AS(expect_joint(m, law, obs, 0.4, [](double, double) { return 1.0; }),
                    std::domain_error);
}

TEST_CASE("joint expectation after a zero observation") {
    auto m = brownian();
    auto law = mixture_law({{0.5, atoms_law({{0.6, 1.0}})},
                            {0.5, uniform_law(0.8, 1.4)}});
    std::vector<Observation> obs{{0.5, 0.4}, {1.0, 0.0}};
    // tau is confined to (0.5, 1.0]; g(tau, 0) integrates over the interval branch
    const double mean_tau = expect_joint(m, law, obs, 1.5,
                                         [](double r, double) { return r; });
    auto post = posterior_multi(m, law, obs);
    CHECK(mean_tau == doctest::Approx(post.mean()).epsilon(1e-9));
    CHECK(expect_joint(m, law, obs, 1.5,
                       [](double, double y) { return y == 0.0 ? 1.0 : 0.0; })
          == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("filtration estimate: stopped and live prefixes") {
    auto m = brownian();
    auto law = atoms_law({{1.0, 0.5}, {2.0, 0.5}});
    std::vector<double> grid{0.0, 0.25, 0.5, 0.75, 1.0, 1.25};
    auto paths = sample_random_bridge(m, law, grid, 400, 57);

    auto sq = [](double r) { return r * r; };
    RunningStats est;
    for (const auto& p : paths) {
        const double e = filtration_estimate(m, law, p, sq);
        if (p.tau == 1.0) {
            CHECK(e == doctest::Approx(1.0).epsilon(1e-12));   // tau is known exactly
        } else {
            auto post = posterior_single(m, law, {grid.back(), p.values.back()});
            CHECK(e == doctest::Approx(post.integrate(sq)).epsilon(1e-10));
        }
        est.add(e);
    }
    // unbiasedness: E[E[g(tau)|F]] = E[g(tau)] = 2.5
    CHECK(std::fabs(est.mean() - 2.5) < 4.0 * est.se_mean());
}

} // suite bayes_engine
