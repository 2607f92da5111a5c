#include "aggre/errors.hpp"
#include "aggre/uncertainty.hpp"
#include "synthetic.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

using namespace aggre;

TEST_CASE("fisher_matrix") {
    SUBCASE("unit columns with gamma = 0 give the identity") {
        const Eigen::MatrixXd chi = Eigen::MatrixXd::Identity(3, 3);
        const std::vector<double> m{0.2, 0.5, 0.9};
        CHECK(fisher_matrix(chi, m, 0.0).isApprox(Eigen::MatrixXd::Identity(3, 3)));
    }
    SUBCASE("bilinear in chi and weighted by M^(-2 gamma)") {
        Eigen::MatrixXd chi(3, 2);
        chi << 1, 2, 3, 4, 5, 6;
        const std::vector<double> m{0.2, 0.5, 0.9};
        const auto F = fisher_matrix(chi, m, 0.6);
        CHECK(fisher_matrix(3.0 * chi, m, 0.6).isApprox(9.0 * F, 1e-14));
        double f01 = 0.0;
        for (int k = 0; k < 3; ++k) f01 += chi(k, 0) * chi(k, 1) * std::pow(m[k], -1.2);
        CHECK(F(0, 1) == doctest::Approx(f01).epsilon(1e-14));
    }
    SUBCASE("nonpositive model value") {
        const Eigen::MatrixXd chi = Eigen::MatrixXd::Identity(2, 2);
        CHECK_THROWS_AS(fisher_matrix(chi, std::vector<double>{0.0, 1.0}, 0.5), ValidationError);
    }
}

TEST_CASE("fisher matrix is symmetric positive semidefinite") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n01;
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::MatrixXd chi(30, 4);
        for (Eigen::Index i = 0; i < chi.size(); ++i) chi.data()[i] = n01(rng) * std::pow(10.0, trial % 7 - 3);
        std::vector<double> m(30);
        for (auto& v : m) v = 0.1 + std::abs(n01(rng));
        const auto F = fisher_matrix(chi, m, 0.6);
        CHECK((F - F.transpose()).norm() <= 1e-10 * F.norm());
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(F);
        CHECK(es.eigenvalues().minCoeff() >= -1e-10 * F.trace());
    }
}

TEST_CASE("sigma2_hat") {
    const std::vector<double> m{0.2, 0.4, 0.6, 0.8};
    CHECK(sigma2_hat(m, m, 0.6, 2) == 0.0);
    std::vector<double> y(m);
    for (auto& v : y) v += 0.05;
    CHECK(sigma2_hat(y, m, 0.0, 1) == doctest::Approx(0.05 * 0.05 * 4 / 3));
    CHECK_THROWS_WITH_AS(sigma2_hat(y, m, 0.0, 4), "insufficient degrees of freedom", ValidationError);
}

TEST_CASE("asymptotic_errors") {
    SUBCASE("identity") {
        const auto e = asymptotic_errors(Eigen::MatrixXd::Identity(3, 3), 4.0);
        REQUIRE(e.invertible);
        CHECK(e.condition == doctest::Approx(1.0));
        for (double s : e.se) CHECK(s == doctest::Approx(2.0));
    }
    SUBCASE("diagonal") {
        Eigen::MatrixXd F = Eigen::MatrixXd::Zero(2, 2);
        F(0, 0) = 4;
        F(1, 1) = 1;
        const auto e = asymptotic_errors(F, 1.0);
        CHECK(e.condition == doctest::Approx(4.0));
        CHECK(e.se[0] == doctest::Approx(0.5));
        CHECK(e.se[1] == doctest::Approx(1.0));
    }
    SUBCASE("refused above the condition limit") {
        Eigen::MatrixXd F = Eigen::MatrixXd::Zero(2, 2);
        F(0, 0) = 1;
        F(1, 1) = 1e-13;
        const auto e = asymptotic_errors(F, 1.0);
        CHECK_FALSE(e.invertible);
        CHECK(e.se.empty());
        CHECK(e.condition == doctest::Approx(1e13));
        CHECK(asymptotic_errors(F, 1.0, 1e14).invertible);
    }
    SUBCASE("SE scales with sigma") {
        Eigen::MatrixXd F(2, 2);
        F << 3, 1, 1, 2;
        const auto a = asymptotic_errors(F, 1.0);
        const auto b = asymptotic_errors(F, 4.0);
        for (int k = 0; k < 2; ++k) CHECK(b.se[k] == doctest::Approx(2.0 * a.se[k]));
    }
}

TEST_CASE("confidence intervals") {
    CHECK(normal_two_sided_quantile(0.95) == doctest::Approx(1.959964).epsilon(1e-6));
    CHECK(normal_two_sided_quantile(0.6827) == doctest::Approx(1.0).epsilon(1e-3));
    const std::vector<double> th{2.157}, se{0.00396};
    const auto iv = confidence_intervals(th, se, 0.95);
    CHECK(iv[0].lower == doctest::Approx(2.14924).epsilon(1e-6));
    CHECK(iv[0].upper == doctest::Approx(2.16476).epsilon(1e-6));
    const auto zero = confidence_intervals(th, std::vector<double>{0.0}, 0.95);
    CHECK(zero[0].lower == 2.157);
    CHECK(zero[0].upper == 2.157);
    CHECK_THROWS_AS(confidence_intervals(th, se, 1.0), ValidationError);
    CHECK_THROWS_AS(confidence_intervals(th, se, 0.0), ValidationError);
}

TEST_CASE("linear model: covariance equals the closed-form least-squares result") {
    const auto model = synthetic::line();
    ModelParameters truth;
    truth.kI_plus = 0.3;
    truth.kI_minus = 0.1;
    const auto t = uniform_grid(0.0, 5.0, 60);
    const auto obs = simulate_observations(truth, t, 0.0, 0.05, 8, model);
    const FreeMask mask{Param::kI_plus, Param::kI_minus};
    FitOptions opt;
    opt.log_space = false;
    const auto f = fit(obs, truth, mask, 0.0, model, opt);
    const auto rep = analyze_uncertainty(f, obs, model);

    Eigen::MatrixXd A(60, 2);
    for (int k = 0; k < 60; ++k) A(k, 0) = 1.0, A(k, 1) = t[static_cast<std::size_t>(k)];
    const Eigen::MatrixXd exact = rep.sigma2 * (A.transpose() * A).inverse();
    REQUIRE(rep.errors.invertible);
    CHECK((rep.errors.covariance - exact).norm() <= 1e-8 * exact.norm());
    CHECK((rep.chi - A).norm() <= 1e-8 * A.norm());
}

TEST_CASE("removing a near-zero sensitivity column improves conditioning") {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> n01;
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::MatrixXd chi(40, 4);
        for (Eigen::Index i = 0; i < chi.size(); ++i) chi.data()[i] = n01(rng);
        chi.col(3) *= 1e-6;
        const std::vector<double> m(40, 0.5);
        const double full = asymptotic_errors(fisher_matrix(chi, m, 0.6), 1.0).condition;
        const double reduced = asymptotic_errors(fisher_matrix(chi.leftCols(3), m, 0.6), 1.0).condition;
        CHECK(reduced < full);
    }
}

TEST_CASE("sensitivity: linear parameter is exact; failed side falls back") {
    const auto model = synthetic::line();
    ModelParameters p;
    p.kI_plus = 0.5;
    p.kI_minus = 0.25;
    const auto t = uniform_grid(0.0, 2.0, 5);
    const auto s = sensitivity_matrix(p, FreeMask{Param::kI_minus}, t, model);
    for (int k = 0; k < 5; ++k) CHECK(s.chi(k, 0) == doctest::Approx(t[static_cast<std::size_t>(k)]).epsilon(1e-10));
    CHECK(s.notes.empty());

    // The model refuses kI_plus above 0.5: only the backward side works.
    const CurveModel guarded = [model](const ModelParameters& q, std::span<const double> tt) {
        if (q.kI_plus > 0.5) throw NumericalError("out of range");
        return model(q, tt);
    };
    const auto g = sensitivity_matrix(p, FreeMask{Param::kI_plus}, t, guarded);
    CHECK(g.notes.size() == 1);
    for (int k = 0; k < 5; ++k) CHECK(g.chi(k, 0) == doctest::Approx(1.0).epsilon(1e-8));

    const CurveModel broken = [](const ModelParameters&, std::span<const double>) -> std::vector<double> {
        throw NumericalError("no");
    };
    CHECK_THROWS_AS(sensitivity_matrix(p, FreeMask{Param::kI_plus}, t, broken), NumericalError);
}

TEST_CASE("sensitivity of the hybrid model") {
    const auto model = forward_curve();
    const auto t = uniform_grid(4.0, 8.0, 9);

    SUBCASE("a falling-ramp parameter beyond every reached size has no influence") {
        ModelParameters p;
        p.i_max = 1e8;
        const auto s = sensitivity_matrix(p, FreeMask{Param::kI_plus, Param::x1, Param::x2}, t, model);
        const double top = s.chi.cwiseAbs().maxCoeff();
        CHECK(s.chi.col(2).cwiseAbs().maxCoeff() <= 1e-6 * top);
        CHECK(s.chi.col(1).cwiseAbs().maxCoeff() > 1e-3 * top);
    }
    SUBCASE("default step agrees with Richardson extrapolation") {
        ModelParameters p;
        p.kI_plus = 2.181;
        p.kI_minus = 11.090;
        p.koff_N = 90.536;
        const FreeMask mask{Param::kI_plus, Param::kI_minus, Param::koff_N};
        const auto base = sensitivity_matrix(p, mask, t, model).chi;
        const auto h1 = sensitivity_matrix(p, mask, t, model, FdConfig{1e-3}).chi;
        const auto h2 = sensitivity_matrix(p, mask, t, model, FdConfig{5e-4}).chi;
        const Eigen::MatrixXd rich = (4.0 * h2 - h1) / 3.0;
        for (Eigen::Index j = 0; j < 3; ++j) CHECK((base.col(j) - rich.col(j)).norm() <= 1e-3 * rich.col(j).norm());
    }
}
