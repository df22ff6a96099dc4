#include <doctest.h>

#include <cmath>

#include "mixfg/errors.hpp"
#include "mixfg/nodes.hpp"
#include "oracles.hpp"

using namespace mixfg;

namespace {
doctest::Approx near(double x, double eps = 1e-12) {
    return doctest::Approx(x).epsilon(eps);
}
} // namespace

TEST_CASE("prior_message wraps the distribution with zero scale") {
    const Message m = prior_message(PriorNode{Gaussian1D(1.0, 2.0)});
    CHECK(m.log_scale == 0.0);
    REQUIRE(std::holds_alternative<Gaussian1D>(m.body));
    CHECK(std::get<Gaussian1D>(m.body).mean() == near(1.0));
    CHECK_THROWS_AS(prior_message(PriorNode{Flat{}}), UnsupportedModelError);
}

TEST_CASE("gaussian likelihood node") {
    const GaussianLikelihood like(1.0);
    CHECK_THROWS_AS(GaussianLikelihood(0.0), NumericError);

    SUBCASE("toward the observation: convolution with the noise") {
        const Message out = gaussian_likelihood_to_y(like, Message{0.7, Gaussian1D(2.0, 4.0)});
        CHECK(out.log_scale == near(0.7));
        REQUIRE(std::holds_alternative<Gaussian1D>(out.body));
        CHECK(std::get<Gaussian1D>(out.body).mean() == near(2.0));
        CHECK(std::get<Gaussian1D>(out.body).variance() == near(5.0));
        // int N(y | s, 1) N(s | 2, 4) ds == N(y | 2, 5)
        for (const double y : {-1.0, 0.5, 3.0}) {
            const double numeric = oracle::integrate(
                [&](double s) {
                    return oracle::normal_pdf(y, s, 1.0) * oracle::normal_pdf(s, 2.0, 4.0);
                },
                -20.0, 22.0);
            CHECK(std::exp(log_pdf(out.body, y)) == near(numeric, 1e-8));
        }
    }

    SUBCASE("a flat input stays flat") {
        const Message out = gaussian_likelihood_to_y(like, Message{0.3, Flat{}});
        CHECK(out.log_scale == near(0.3));
        CHECK(is_flat(out.body));
    }

    SUBCASE("toward the latent: observed value becomes a gaussian") {
        const Message back = gaussian_likelihood_to_s(like, Message{0.2, PointMassReal{3.0}});
        CHECK(back.log_scale == near(0.2));
        REQUIRE(std::holds_alternative<Gaussian1D>(back.body));
        CHECK(std::get<Gaussian1D>(back.body).mean() == near(3.0));
        CHECK(std::get<Gaussian1D>(back.body).variance() == near(1.0));

        const Message soft = gaussian_likelihood_to_s(like, Message{0.0, Gaussian1D(1.0, 2.0)});
        REQUIRE(std::holds_alternative<Gaussian1D>(soft.body));
        CHECK(std::get<Gaussian1D>(soft.body).mean() == near(1.0));
        CHECK(std::get<Gaussian1D>(soft.body).variance() == near(3.0));
    }
}

TEST_CASE("AR(1) node") {
    CHECK_THROWS_AS(GaussianAR1(0.0, 1.0), NumericError);
    CHECK_THROWS_AS(GaussianAR1(0.5, 0.0), NumericError);
    const GaussianAR1 ar(0.5, 1.0);

    SUBCASE("forward propagates the state") {
        const Message out = ar1_forward(ar, Message{0.0, Gaussian1D(2.0, 4.0)});
        REQUIRE(std::holds_alternative<Gaussian1D>(out.body));
        CHECK(std::get<Gaussian1D>(out.body).mean() == near(1.0));
        CHECK(std::get<Gaussian1D>(out.body).variance() == near(2.0));
        CHECK(out.log_scale == 0.0);

        const Message pm = ar1_forward(ar, Message{0.0, PointMassReal{3.0}});
        REQUIRE(std::holds_alternative<Gaussian1D>(pm.body));
        CHECK(std::get<Gaussian1D>(pm.body).mean() == near(1.5));
        CHECK(std::get<Gaussian1D>(pm.body).variance() == near(1.0));

        // integrating out a flat state leaves 1/|rho| as pure scale
        const Message fl = ar1_forward(ar, Message{0.25, Flat{}});
        CHECK(is_flat(fl.body));
        CHECK(fl.log_scale == near(0.25 + std::log(2.0)));
    }

    SUBCASE("backward carries the Jacobian in the scale") {
        const Message back = ar1_backward(ar, Message{0.0, Gaussian1D(1.0, 2.0)});
        REQUIRE(std::holds_alternative<Gaussian1D>(back.body));
        CHECK(std::get<Gaussian1D>(back.body).mean() == near(2.0));
        CHECK(std::get<Gaussian1D>(back.body).variance() == near(12.0));
        CHECK(back.log_scale == near(std::log(2.0)));

        // exp(log_scale) * body(s) must equal int N(n | 0.5 s, 1) N(n | 1, 2) dn
        for (const double s : {-2.0, 0.0, 1.0, 3.0}) {
            const double numeric = oracle::integrate(
                [&](double n) {
                    return oracle::normal_pdf(n, 0.5 * s, 1.0) * oracle::normal_pdf(n, 1.0, 2.0);
                },
                -20.0, 20.0);
            CHECK(std::exp(back.log_scale + log_pdf(back.body, s)) == near(numeric, 1e-8));
        }

        const Message pm = ar1_backward(ar, Message{0.0, PointMassReal{3.0}});
        REQUIRE(std::holds_alternative<Gaussian1D>(pm.body));
        CHECK(std::get<Gaussian1D>(pm.body).mean() == near(6.0));
        CHECK(std::get<Gaussian1D>(pm.body).variance() == near(4.0));
        CHECK(pm.log_scale == near(std::log(2.0)));

        const Message fl = ar1_backward(ar, Message{0.4, Flat{}});
        CHECK(is_flat(fl.body));
        CHECK(fl.log_scale == near(0.4));
    }
}

TEST_CASE("transition node") {
    const TransitionMatrix T = TransitionMatrix::from_rows({{0.9, 0.2}, {0.1, 0.8}});
    const TransitionNode node{T};
    CHECK(T(0, 0) == near(0.9));
    CHECK(T(0, 1) == near(0.2));
    CHECK_THROWS_AS(TransitionMatrix::from_rows({{0.9, 0.2}, {0.2, 0.8}}), NumericError);
    CHECK_THROWS_AS(TransitionMatrix::from_rows({{0.9, 0.2}, {0.1}}), DimensionError);

    SUBCASE("forward: already normalized columns keep the scale") {
        const Message out = transition_forward(node, Message{0.1, Categorical({0.3, 0.7})});
        REQUIRE(std::holds_alternative<Categorical>(out.body));
        const auto& c = std::get<Categorical>(out.body);
        CHECK(c[0] == near(0.41));
        CHECK(c[1] == near(0.59));
        CHECK(out.log_scale == near(0.1));

        const Message pm = transition_forward(node, Message{0.0, PointMassIndex(1, 2)});
        const auto& cp = std::get<Categorical>(pm.body);
        CHECK(cp[0] == near(0.2));
        CHECK(cp[1] == near(0.8));
        CHECK(pm.log_scale == near(0.0));

        const Message fl = transition_forward(node, Message{0.0, Flat{}});
        const auto& cf = std::get<Categorical>(fl.body);
        CHECK(cf[0] == near(0.55));
        CHECK(cf[1] == near(0.45));
        CHECK(fl.log_scale == near(0.0));
    }

    SUBCASE("backward: the folded mass moves into the scale") {
        const Message out = transition_backward(node, Message{0.0, Categorical({0.41, 0.59})});
        const auto& c = std::get<Categorical>(out.body);
        CHECK(c[0] == near(0.428 / 0.982));
        CHECK(c[1] == near(0.554 / 0.982));
        CHECK(out.log_scale == near(std::log(0.982)));

        const Message pm = transition_backward(node, Message{0.0, PointMassIndex(0, 2)});
        const auto& cp = std::get<Categorical>(pm.body);
        CHECK(cp[0] == near(9.0 / 11.0));
        CHECK(cp[1] == near(2.0 / 11.0));
        CHECK(pm.log_scale == near(std::log(1.1)));
    }
}

TEST_CASE("categorical-from-probs node") {
    const CategoricalFromProbs exact{3, false};
    const CategoricalFromProbs vmp{3, true};

    SUBCASE("toward the outcome") {
        const Message out = categorical_from_probs_to_m(exact, Message{0.3, Dirichlet({2, 3, 5})});
        REQUIRE(std::holds_alternative<Categorical>(out.body));
        const auto& c = std::get<Categorical>(out.body);
        CHECK(c[0] == near(0.2));
        CHECK(c[1] == near(0.3));
        CHECK(c[2] == near(0.5));
        CHECK(out.log_scale == near(0.3));

        // variational: probabilities proportional to exp(psi(alpha_k)); psi at
        // integer arguments reduces to harmonic numbers (the Euler constant
        // cancels in the normalization).
        const Message vout = categorical_from_probs_to_m(vmp, Message{0.0, Dirichlet({2, 3, 5})});
        const double w0 = std::exp(1.0);
        const double w1 = std::exp(1.0 + 0.5);
        const double w2 = std::exp(1.0 + 0.5 + 1.0 / 3.0 + 0.25);
        const double s = w0 + w1 + w2;
        const auto& vc = std::get<Categorical>(vout.body);
        CHECK(vc[0] == near(w0 / s));
        CHECK(vc[1] == near(w1 / s));
        CHECK(vc[2] == near(w2 / s));
        CHECK(vout.log_scale == near(0.0));

        CHECK_THROWS_AS(categorical_from_probs_to_m(exact, Message{0.0, Categorical({1.0})}),
                        UnsupportedModelError);
        CHECK_THROWS_AS(categorical_from_probs_to_m(exact, Message{0.0, Dirichlet({1, 1})}),
                        DimensionError);
    }

    SUBCASE("toward the probability vector") {
        const Message back = categorical_from_probs_to_pi(exact, Message{0.0, PointMassIndex(1, 3)});
        REQUIRE(std::holds_alternative<Dirichlet>(back.body));
        const auto& d = std::get<Dirichlet>(back.body);
        CHECK(d.concentration()[0] == near(1.0));
        CHECK(d.concentration()[1] == near(2.0));
        CHECK(d.concentration()[2] == near(1.0));
        CHECK(back.log_scale == near(-std::log(6.0)));

        // a soft outcome has no exact conjugate backward message
        CHECK_THROWS_AS(
            categorical_from_probs_to_pi(exact, Message{0.0, Categorical({0.5, 0.3, 0.2})}),
            UnsupportedModelError);

        const CategoricalFromProbs vmp2{2, true};
        const Message soft = categorical_from_probs_to_pi(vmp2, Message{0.0, Categorical({0.5, 0.5})});
        const auto& sd = std::get<Dirichlet>(soft.body);
        CHECK(sd.concentration()[0] == near(1.5));
        CHECK(sd.concentration()[1] == near(1.5));
        // log B(1.5, 1.5) = log(pi / 8)
        CHECK(soft.log_scale == near(std::log(std::numbers::pi / 8.0)));
    }
}

TEST_CASE("equality node accumulates scales and the product normalizer") {
    const Message a{0.3, Gaussian1D(0.0, 1.0)};
    const Message b{-0.1, Gaussian1D(1.0, 2.0)};
    const Message out = equality_message(a, b);
    const GaussianProduct p = gaussian_product(Gaussian1D(0, 1), Gaussian1D(1, 2));
    REQUIRE(std::holds_alternative<Gaussian1D>(out.body));
    CHECK(std::get<Gaussian1D>(out.body).mean() == near(p.result.mean()));
    CHECK(std::get<Gaussian1D>(out.body).variance() == near(p.result.variance()));
    CHECK(out.log_scale == near(0.3 - 0.1 + p.log_z));

    const Message with_flat = equality_message(Message{0.5, Flat{}}, b);
    CHECK(with_flat.log_scale == near(0.4));
    REQUIRE(std::holds_alternative<Gaussian1D>(with_flat.body));
    CHECK(std::get<Gaussian1D>(with_flat.body).variance() == near(2.0));
}
