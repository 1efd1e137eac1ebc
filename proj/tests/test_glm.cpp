#include "meanaic/errors.hpp"
#include "meanaic/glm.hpp"
#include "meanaic/simulation.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace meanaic;
using meanaic::testing::direct_loglik;
using meanaic::testing::random_cluster;

namespace {

ClusterData intercept_only(const std::vector<double>& y) {
    ClusterData c{"c", Eigen::VectorXd(static_cast<Eigen::Index>(y.size())),
                  Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(y.size()), 1)};
    for (std::size_t j = 0; j < y.size(); ++j) c.y(static_cast<Eigen::Index>(j)) = y[j];
    return c;
}

ClusterData one_covariate(const std::vector<double>& x, const std::vector<double>& y) {
    const auto n = static_cast<Eigen::Index>(y.size());
    ClusterData c{"c", Eigen::VectorXd(n), Eigen::MatrixXd::Ones(n, 2)};
    for (Eigen::Index j = 0; j < n; ++j) {
        c.y(j) = y[static_cast<std::size_t>(j)];
        c.X(j, 1) = x[static_cast<std::size_t>(j)];
    }
    return c;
}

}  // namespace

TEST_CASE("family densities include constant terms") {
    CHECK(Family::poisson().log_density(3.0, 2.0) == doctest::Approx(3 * std::log(2.0) - 2.0 - std::log(6.0)));
    CHECK(Family::bernoulli().log_density(1.0, 0.25) == doctest::Approx(std::log(0.25)));
    CHECK(Family::gaussian().log_density(1.0, 0.0, 4.0) ==
          doctest::Approx(-0.5 * std::log(2 * M_PI * 4.0) - 1.0 / 8.0));
    CHECK(Family::bernoulli().inverse_link(800.0) == 1.0);
    CHECK(Family::bernoulli().log_density_eta(0.0, 800.0) == doctest::Approx(-800.0));
    CHECK(Family::parse("Binomial") == Family::bernoulli());
    CHECK_THROWS_AS(Family::parse("gamma"), std::invalid_argument);
    CHECK_FALSE(Family::poisson().valid_response(1.5));
    CHECK_FALSE(Family::poisson().valid_response(-1.0));
    CHECK_FALSE(Family::bernoulli().valid_response(2.0));
}

TEST_CASE("Poisson intercept-only fit is log of the sample mean") {
    const auto data = intercept_only({1, 2, 3});
    const auto model = make_model({}, Family::poisson());
    const auto fit = fit_cluster(data, model);
    REQUIRE(fit.converged);
    CHECK(fit.beta_hat(0) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    // sum_j [y log 2 - 2 - log y!], frozen from tests/oracles/frozen_values.py
    CHECK(fit.max_loglik() == doctest::Approx(-4.326023566428328).epsilon(1e-12));
    CHECK(cluster_aic(fit, effective_parameters(model)) == doctest::Approx(2 * 4.326023566428328 + 2).epsilon(1e-12));
    CHECK(fit.max_loglik() == static_cast<double>(fit.n) * fit.max_avg_loglik);
}

TEST_CASE("Gaussian fit equals ordinary least squares") {
    std::mt19937_64 rng(11);
    Eigen::VectorXd beta(4);
    beta << 1.0, -0.5, 2.0, 0.25;
    const auto data = random_cluster(rng, FamilyKind::Gaussian, 40, beta, 0.7);
    const auto model = make_model({1, 2, 3}, Family::gaussian());
    const auto fit = fit_cluster(data, model);
    // normal equations solved by Cholesky: a different route from the fitter's QR
    const Eigen::VectorXd ols = (data.X.transpose() * data.X).llt().solve(data.X.transpose() * data.y);
    CHECK((fit.beta_hat - ols).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(effective_parameters(model) == 5);
}

TEST_CASE("Bernoulli fit matches the dense grid-search oracle") {
    // data and grid argmax frozen from tests/oracles/frozen_values.py (step 1e-3 over [-5,5]^2)
    const std::vector<double> x{-1.9, -1.6, -1.3, -1.1, -0.9, -0.7, -0.5, -0.35, -0.2, -0.05,
                                0.05, 0.2,  0.35, 0.5,  0.7,  0.9,  1.1,  1.3,   1.6,  1.9};
    const std::vector<double> y{0, 0, 0, 1, 1, 0, 1, 0, 0, 1, 0, 1, 1, 0, 1, 1, 0, 1, 1, 1};
    const auto data = one_covariate(x, y);
    const auto fit = fit_cluster(data, make_model({1}, Family::bernoulli()));
    REQUIRE(fit.converged);
    CHECK(std::abs(fit.beta_hat(0) - 0.246) <= 1e-3);
    CHECK(std::abs(fit.beta_hat(1) - 0.959) <= 1e-3);
    CHECK(fit.max_loglik() >= -11.812715802584);
}

TEST_CASE("loglik examples") {
    SUBCASE("Poisson with mu = 1 and y = 0 gives -n") {
        auto data = intercept_only({0, 0, 0, 0, 0});
        const auto ll = loglik(data, make_model({}, Family::poisson()), Eigen::VectorXd::Zero(1));
        CHECK(ll.sum == doctest::Approx(-5.0));
        CHECK(ll.average == doctest::Approx(-1.0));
    }
    SUBCASE("Bernoulli at beta = 0 gives n log 0.5") {
        auto data = intercept_only({0, 1, 1, 0, 1, 0, 0});
        const auto ll = loglik(data, make_model({}, Family::bernoulli()), Eigen::VectorXd::Zero(1));
        CHECK(ll.sum == doctest::Approx(7 * std::log(0.5)));
    }
    SUBCASE("frozen density sums") {
        const auto pdata = one_covariate({0.1, 0.4, -0.3, 0.8, 1.2, -0.7, 0.0, 0.5}, {1, 2, 0, 3, 4, 0, 1, 2});
        CHECK(loglik(pdata, make_model({1}, Family::poisson()), Eigen::Vector2d(0.25, 0.6)).sum ==
              doctest::Approx(-10.288325494217460).epsilon(1e-12));
        const auto gdata = one_covariate({0.3, -1.2, 0.8, 1.5, -0.4, 0.0}, {1.1, -0.9, 1.7, 2.8, 0.2, 0.6});
        CHECK(loglik(gdata, make_model({1}, Family::gaussian()), Eigen::Vector2d(0.4, 1.1)).sum ==
              doctest::Approx(-3.058704785843259).epsilon(1e-12));
    }
    SUBCASE("random instances match the direct density sum") {
        std::mt19937_64 rng(5);
        std::normal_distribution<double> z(0.0, 0.5);
        for (auto kind : {FamilyKind::Poisson, FamilyKind::Bernoulli, FamilyKind::Gaussian}) {
            for (int rep = 0; rep < 10; ++rep) {
                Eigen::Vector3d beta(z(rng), z(rng), z(rng));
                const auto data = random_cluster(rng, kind, 15, beta);
                const auto model = make_model({1, 2}, Family(kind));
                Eigen::Vector3d at(z(rng), z(rng), z(rng));
                CHECK(loglik(data, model, at).sum ==
                      doctest::Approx(direct_loglik(kind, data.y, data.X, at)).epsilon(1e-12));
            }
        }
    }
    SUBCASE("wrong beta length") {
        auto data = intercept_only({1, 2});
        CHECK_THROWS_AS(loglik(data, make_model({}, Family::poisson()), Eigen::VectorXd::Zero(2)),
                        std::invalid_argument);
    }
    SUBCASE("Gaussian with a perfect fit has no profiled variance") {
        const auto data = one_covariate({0, 1, 2}, {1, 2, 3});
        CHECK_THROWS_AS(loglik(data, make_model({1}, Family::gaussian()), Eigen::Vector2d(1, 1)), DomainError);
    }
}

TEST_CASE("cluster_aic arithmetic") {
    ClusterFit fit;
    fit.n = 10;
    fit.max_avg_loglik = -10.0;
    CHECK(cluster_aic(fit, 3) == doctest::Approx(206.0));
}

TEST_CASE("fit errors") {
    SUBCASE("too few observations") {
        const auto data = one_covariate({1.0}, {2.0});
        CHECK_THROWS_AS(fit_cluster(data, make_model({1}, Family::poisson())), TooFewObservations);
    }
    SUBCASE("rank-deficient design reports the dependent column") {
        auto data = one_covariate({0, 1, 0, 1, 0, 1}, {1, 2, 0, 3, 1, 2});
        data.X.conservativeResize(Eigen::NoChange, 3);
        data.X.col(2) = 2.0 * data.X.col(1);
        try {
            fit_cluster(data, make_model({1, 2}, Family::poisson()));
            FAIL("expected DegenerateDesign");
        } catch (const DegenerateDesign& e) {
            REQUIRE(e.columns().size() == 1);
            CHECK((e.columns()[0] == 1 || e.columns()[0] == 2));
        }
    }
    SUBCASE("all-zero counts stop on the score rule before the coefficient bound") {
        // the log-mean drifts by about -1 per step; the average score falls below
        // its tolerance near beta0 = -14, well inside the divergence bound of 30
        const auto data = intercept_only({0, 0, 0, 0});
        const auto fit = fit_cluster(data, make_model({}, Family::poisson()));
        CHECK(fit.converged);
        CHECK(fit.beta_hat(0) < -10.0);
        CHECK(fit.beta_hat(0) > -30.0);
    }
    SUBCASE("a tighter coefficient bound turns drift into divergence") {
        const auto data = intercept_only({0, 0, 0, 0});
        FitControl ctrl;
        ctrl.divergence_bound = 8.0;
        CHECK_THROWS_AS(fit_cluster(data, make_model({}, Family::poisson()), ctrl), NonFiniteIterate);
    }
    SUBCASE("complete separation diverges") {
        const auto data = one_covariate({-2, -1, -0.5, 0.5, 1, 2}, {0, 0, 0, 1, 1, 1});
        CHECK_THROWS_AS(fit_cluster(data, make_model({1}, Family::bernoulli())), NonFiniteIterate);
    }
    SUBCASE("iteration cap returns the best iterate unflagged as converged") {
        std::mt19937_64 rng(3);
        const auto data = random_cluster(rng, FamilyKind::Poisson, 50, Eigen::Vector2d(0.5, 0.3));
        FitControl ctrl;
        ctrl.max_iterations = 1;
        const auto fit = fit_cluster(data, make_model({1}, Family::poisson()), ctrl);
        CHECK_FALSE(fit.converged);
        CHECK(fit.iterations == 1);
        CHECK(std::isfinite(fit.max_loglik()));
    }
}

TEST_CASE("score vanishes and Hessian matches finite differences at the optimum") {
    std::mt19937_64 rng(21);
    for (auto kind : {FamilyKind::Poisson, FamilyKind::Bernoulli, FamilyKind::Gaussian}) {
        CAPTURE(static_cast<int>(kind));
        const auto data = random_cluster(rng, kind, 120, Eigen::Vector3d(0.2, 0.5, -0.4));
        const auto model = make_model({1, 2}, Family(kind));
        const FitControl ctrl;
        const auto fit = fit_cluster(data, model, ctrl);
        REQUIRE(fit.converged);
        CHECK(average_score(data, model, fit.beta_hat).cwiseAbs().maxCoeff() < ctrl.score_tolerance);

        const double h = 1e-5;
        for (Eigen::Index k = 0; k < fit.beta_hat.size(); ++k) {
            Eigen::VectorXd up = fit.beta_hat, down = fit.beta_hat;
            up(k) += h;
            down(k) -= h;
            const Eigen::VectorXd column =
                (average_score(data, model, up) - average_score(data, model, down)) / (2.0 * h);
            for (Eigen::Index r = 0; r < column.size(); ++r)
                CHECK(column(r) == doctest::Approx(fit.hessian(r, k)).epsilon(1e-4).scale(1e-3));
        }
        CHECK((fit.hessian - fit.hessian.transpose()).cwiseAbs().maxCoeff() < 1e-14);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(fit.hessian);
        CHECK(eig.eigenvalues().maxCoeff() <= 0.0);
    }
}

TEST_CASE("permuting observations leaves the fit bit-identical") {
    std::mt19937_64 rng(8);
    for (auto kind : {FamilyKind::Poisson, FamilyKind::Bernoulli, FamilyKind::Gaussian}) {
        const auto data = random_cluster(rng, kind, 60, Eigen::Vector3d(0.1, 0.4, 0.3));
        std::vector<Eigen::Index> perm(60);
        std::iota(perm.begin(), perm.end(), Eigen::Index{0});
        std::shuffle(perm.begin(), perm.end(), rng);
        ClusterData shuffled = data;
        for (Eigen::Index j = 0; j < 60; ++j) {
            shuffled.y(j) = data.y(perm[static_cast<std::size_t>(j)]);
            shuffled.X.row(j) = data.X.row(perm[static_cast<std::size_t>(j)]);
        }
        const auto model = make_model({1, 2}, Family(kind));
        const auto a = fit_cluster(data, model);
        const auto b = fit_cluster(shuffled, model);
        CHECK(a.beta_hat == b.beta_hat);
        CHECK(a.max_avg_loglik == b.max_avg_loglik);
        CHECK(a.hessian == b.hessian);
        CHECK(a.converged == b.converged);
    }
}

TEST_CASE("nested models never lose likelihood") {
    std::mt19937_64 rng(13);
    for (auto kind : {FamilyKind::Poisson, FamilyKind::Bernoulli, FamilyKind::Gaussian}) {
        for (int rep = 0; rep < 20; ++rep) {
            const auto data = random_cluster(rng, kind, 80, Eigen::Vector3d(0.1, 0.3, 0.0));
            const auto small = fit_cluster(data, make_model({1}, Family(kind)));
            const auto large = fit_cluster(data, make_model({1, 2}, Family(kind)));
            CHECK(large.max_loglik() >= small.max_loglik() - 1e-8);
        }
    }
}

TEST_CASE("expected information inequality: KL surface is minimized at the generating beta") {
    // 10,000 Poisson observations at beta0 = (0.3, 0.4); -mean loglik over a 0.05 grid
    std::mt19937_64 rng(1234);
    const Eigen::Vector2d beta0(0.3, 0.4);
    const auto data = random_cluster(rng, FamilyKind::Poisson, 10000, beta0);
    const auto model = make_model({1}, Family::poisson());
    double best = INFINITY;
    Eigen::Vector2d arg;
    for (int i = -10; i <= 10; ++i)
        for (int k = -10; k <= 10; ++k) {
            const Eigen::Vector2d b = beta0 + Eigen::Vector2d(0.05 * i, 0.05 * k);
            const double kl = -loglik(data, model, b).average;
            if (kl < best) {
                best = kl;
                arg = b;
            }
        }
    CHECK((arg - beta0).cwiseAbs().maxCoeff() <= 0.05 + 1e-12);
}

TEST_CASE("adding the true covariate lowers cluster AIC at n = 320") {
    Scenario s;
    s.K = 1;
    s.cluster_sizes = {320};
    s.sigma0_sq = 0.005;
    s.sigma1_sq = 0.005;
    s.beta1 = 0.4;
    s.base_seed = 99;
    const auto null_model = make_model({}, Family::poisson());
    const auto true_model = make_model({1}, Family::poisson());
    int lower = 0;
    const int reps = 200;
    for (int r = 0; r < reps; ++r) {
        const auto data = generate_dataset(s, r).front();
        const double a0 = cluster_aic(fit_cluster(data, null_model), 1);
        const double a1 = cluster_aic(fit_cluster(data, true_model), 2);
        if (a1 < a0) ++lower;
    }
    CHECK(lower >= static_cast<int>(0.95 * reps));
}
