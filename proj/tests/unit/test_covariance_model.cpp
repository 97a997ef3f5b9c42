#include <doctest.h>

#include "gmbridge/covariance_model.hpp"
#include "gmbridge/errors.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace gmb;

namespace {

// Direct stationary-increment form of the mean-reverting covariance, used as
// an oracle for the product representation rho = (sigma^2/theta) sinh(theta t),
// q = exp(-theta t).
double ou_cov_direct(double theta, double sigma, double s, double t) {
    const double a = sigma * sigma / (2.0 * theta);
    return a * (std::exp(-theta * std::fabs(t - s)) - std::exp(-theta * (t + s)));
}

} // namespace

TEST_SUITE("covariance_model") {

TEST_CASE("brownian and scaled factors") {
    auto bm = brownian();
    CHECK(bm.rho(0.0) == 0.0);
    CHECK(bm.rho(1.7) == doctest::Approx(1.7));
    CHECK(bm.q(0.3) == 1.0);
    CHECK(bm.covariance(0.4, 1.2) == doctest::Approx(0.4));
    CHECK(bm.covariance(1.2, 0.4) == doctest::Approx(0.4));
    CHECK(bm.q_inf().has_value());
    CHECK(*bm.q_inf() == 1.0);

    auto sc = scaled_brownian(2.5);
    CHECK(sc.covariance(0.4, 1.2) == doctest::Approx(1.0));
    CHECK_THROWS_AS(scaled_brownian(0.0), std::invalid_argument);
    CHECK_THROWS_AS(scaled_brownian(-1.0), std::invalid_argument);
}

TEST_CASE("mean-reverting model matches its direct covariance") {
    const double theta = 1.0, sigma = 1.0;
    auto m = ou_from_zero(theta, sigma);
    CHECK(m.covariance(0.5, 1.0)
          == doctest::Approx(0.19170024978210182).epsilon(1e-14));
    CHECK(m.covariance(0.3, 0.7)
          == doctest::Approx(0.1512203024320985).epsilon(1e-14));
    CHECK(m.covariance(1.2, 1.2)
          == doctest::Approx(0.45464102335529377).epsilon(1e-14));
    for (double s = 0.1; s < 2.0; s += 0.23)
        for (double t = 0.1; t < 2.0; t += 0.31)
            CHECK(m.covariance(s, t)
                  == doctest::Approx(ou_cov_direct(theta, sigma, s, t)).epsilon(1e-13));

    auto m2 = ou_from_zero(0.7, 1.3);
    for (double s = 0.1; s < 2.0; s += 0.37)
        for (double t = 0.1; t < 2.0; t += 0.29)
            CHECK(m2.covariance(s, t)
                  == doctest::Approx(ou_cov_direct(0.7, 1.3, s, t)).epsilon(1e-13));
    CHECK(*m.q_inf() == 0.0);

    CHECK_THROWS_AS(ou_from_zero(0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(ou_from_zero(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("domain and evaluation errors") {
    auto m = brownian();
    CHECK_THROWS_AS(m.rho(-0.1), std::domain_error);
    CHECK_THROWS_AS(m.covariance(-0.1, 0.5), std::domain_error);

    CovarianceModel bad("bad", [](double) { return std::nan(""); },
                        [](double) { return 1.0; });
    CHECK_THROWS_AS(bad.rho(0.5), numeric_error);
}

TEST_CASE("validation separates the failure modes") {
    auto ok = validate(ou_from_zero(1.0, 1.0), 2.0, 0.02);
    CHECK(ok.all_pass());
    REQUIRE(ok.find("positivity") != nullptr);
    CHECK(ok.find("positivity")->pass);
    CHECK(ok.find("ratio_monotonicity")->pass);
    CHECK(ok.find("markov_factorization")->pass);
    CHECK(ok.find("continuity")->pass);

    // rho/q eventually decreases: sin rises then falls on (0, pi)
    CovarianceModel humped("humped", [](double t) { return std::sin(t); },
                           [](double) { return 1.0; });
    auto rep = validate(humped, 3.0, 0.01);
    CHECK_FALSE(rep.all_pass());
    CHECK_FALSE(rep.find("ratio_monotonicity")->pass);

    // rho(0) != 0
    CovarianceModel shifted("shifted", [](double t) { return t + 1.0; },
                            [](double) { return 1.0; });
    CHECK_FALSE(validate(shifted, 1.0, 0.01).find("positivity")->pass);

    // jump in q
    CovarianceModel jumpy("jumpy", [](double t) { return t; },
                          [](double t) { return t < 0.5 ? 1.0 : 2.0; });
    CHECK_FALSE(validate(jumpy, 1.0, 0.001).find("continuity")->pass);

    // a model whose declared q-infimum is zero draws a warning flag
    auto warned = validate(ou_from_zero(1.0, 1.0), 2.0, 0.02);
    REQUIRE(warned.find("q_infimum") != nullptr);
    CHECK(warned.find("q_infimum")->message.size() > 0);
}

TEST_CASE("validation survives throwing models") {
    CovarianceModel explosive("explosive",
                              [](double t) -> double {
                                  if (t > 0.5) throw std::runtime_error("boom");
                                  return t;
                              },
                              [](double) { return 1.0; });
    auto rep = validate(explosive, 1.0, 0.1);
    CHECK_FALSE(rep.all_pass());
    for (const auto& c : rep.checks) CHECK_FALSE(c.pass);
}

TEST_CASE("tabulated model reproduces its source on and off the knots") {
    const double theta = 1.0, sigma = 1.0;
    auto exact = ou_from_zero(theta, sigma);
    std::vector<double> t, rho, q;
    for (int i = 0; i <= 400; ++i) {
        const double ti = i * 2.0 / 400.0;
        t.push_back(ti);
        rho.push_back(exact.rho(ti));
        q.push_back(exact.q(ti));
    }
    auto tab = tabulated(t, rho, q, "ou-table");

    CHECK(tab.covariance(0.5, 1.0) == doctest::Approx(exact.covariance(0.5, 1.0)));
    double worst = 0.0;
    for (double s = 0.0137; s < 2.0; s += 0.0731)
        for (double u = 0.0211; u < 2.0; u += 0.0577)
            worst = std::max(worst, std::fabs(tab.covariance(s, u)
                                              - exact.covariance(s, u)));
    CHECK(worst < 1e-6);

    // the product form is preserved exactly, so the factorization identity
    // holds to round-off even between the knots
    CHECK(validate(tab, 2.0, 0.013).all_pass());

    CHECK_THROWS_AS(tab.rho(2.5), std::domain_error);
}

TEST_CASE("tabulated input validation") {
    std::vector<double> t{0.0, 1.0, 2.0};  // too few points for the cubic
    std::vector<double> r{0.0, 1.0, 2.0};
    std::vector<double> q{1.0, 1.0, 1.0};
    CHECK_THROWS_AS(tabulated(t, r, q), std::invalid_argument);

    std::vector<double> t4{0.0, 1.0, 2.0, 3.0};
    CHECK_THROWS_AS(tabulated(t4, {0.1, 1, 2, 3}, {1, 1, 1, 1}), std::invalid_argument);
    CHECK_THROWS_AS(tabulated(t4, {0, 1, 2, 3}, {1, 1, 0, 1}), std::invalid_argument);
    CHECK_THROWS_AS(tabulated({0, 1, 1, 3}, {0, 1, 2, 3}, {1, 1, 1, 1}),
                    std::invalid_argument);
    CHECK_THROWS_AS(tabulated({0.5, 1, 2, 3}, {0, 1, 2, 3}, {1, 1, 1, 1}),
                    std::invalid_argument);
}

TEST_CASE("tabulated model round-trips through CSV") {
    namespace fs = std::filesystem;
    const auto path = fs::temp_directory_path() / "gmb_test_table.csv";
    {
        std::ofstream out(path);
        out << "t,rho,q\n";
        for (int i = 0; i <= 10; ++i) {
            const double ti = i * 0.2;
            out << ti << "," << ti << "," << 1.0 << "\n";
        }
    }
    auto m = tabulated_from_csv(path.string());
    CHECK(m.covariance(0.3, 1.1) == doctest::Approx(0.3).epsilon(1e-12));
    fs::remove(path);

    CHECK_THROWS_AS(tabulated_from_csv("/nonexistent/table.csv"), std::invalid_argument);
}

} // suite covariance_model
