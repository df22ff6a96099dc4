#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "mixfg/comparison.hpp"
#include "mixfg/errors.hpp"
#include "oracles.hpp"

using namespace mixfg;

namespace {

doctest::Approx near(double x, double eps = 1e-12) {
    return doctest::Approx(x).epsilon(eps);
}

std::vector<std::vector<double>> random_rows(std::mt19937_64& rng, std::size_t n, std::size_t k) {
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    std::vector<std::vector<double>> rows(n, std::vector<double>(k));
    for (auto& row : rows) {
        for (double& v : row) {
            v = u(rng);
        }
    }
    return rows;
}

} // namespace

TEST_CASE("model averaging normalizes prior-weighted evidences") {
    const std::vector<double> L{std::log(2.0), 0.0, std::log(0.5)};
    const Categorical uniform_q = model_average(L);
    CHECK(uniform_q[0] == near(2.0 / 3.5));
    CHECK(uniform_q[1] == near(1.0 / 3.5));
    CHECK(uniform_q[2] == near(0.5 / 3.5));

    const Categorical prior({0.5, 0.25, 0.25});
    const Categorical q = model_average(L, prior);
    CHECK(q[0] == near(1.0 / 1.375));
    CHECK(q[1] == near(0.25 / 1.375));
    CHECK(q[2] == near(0.125 / 1.375));

    CHECK_THROWS_AS(model_average(L, Categorical({0.5, 0.5})), DimensionError);
    CHECK(total_log_evidence(L) == near(std::log(3.5 / 3.0)));
    CHECK(total_log_evidence(L, prior) == near(std::log(1.375)));
}

TEST_CASE("model selection takes the first maximum") {
    const PointMassIndex tie = model_select({0.0, 0.0, -1.0});
    CHECK(tie.index == 0);
    CHECK(tie.cardinality == 3);
    // the prior can flip the winner
    const PointMassIndex flipped = model_select({0.0, 0.0, -1.0}, Categorical({0.1, 0.1, 0.8}));
    CHECK(flipped.index == 2);
}

TEST_CASE("free energy of the exact posterior is minus the evidence") {
    const std::vector<double> L{1.2, -0.4, 0.3};
    const Categorical prior({0.5, 0.2, 0.3});
    const Categorical post = model_average(L, prior);
    const double total = total_log_evidence(L, prior);
    CHECK(mixture_free_energy(post, prior, L) == near(-total));

    // decomposition: F(q) = KL(q || posterior) - log evidence, for any q
    const Categorical q({0.2, 0.3, 0.5});
    double kl = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
        kl += q[k] * (std::log(q[k]) - std::log(post[k]));
    }
    CHECK(mixture_free_energy(q, prior, L) == near(kl - total));
    // and it never goes below the evidence bound
    CHECK(mixture_free_energy(q, prior, L) >= -total - 1e-12);
}

TEST_CASE("online combination counts hard assignments") {
    CombinationState state = combination_init({10.0, 10.0, 10.0});
    combination_step(state, {-1.0, 0.0, -1.0});
    CHECK(state.posterior.concentration()[0] == near(10.0));
    CHECK(state.posterior.concentration()[1] == near(11.0));
    CHECK(state.posterior.concentration()[2] == near(10.0));
    REQUIRE(state.assignments.size() == 1);
    CHECK(state.assignments[0] == 1);

    // strong evidence overrides the slightly higher mixing weight
    combination_step(state, {5.0, -5.0, -5.0});
    CHECK(state.posterior.concentration()[0] == near(11.0));
    CHECK(state.posterior.concentration()[1] == near(11.0));
    CHECK(state.assignments[1] == 0);

    // ties go to the lowest index
    CombinationState flat = combination_init({1.0, 1.0});
    combination_step(flat, {0.5, 0.5});
    CHECK(flat.assignments[0] == 0);

    CHECK_THROWS_AS(combination_step(state, {0.0, 0.0}), DimensionError);
}

TEST_CASE("sampled assignment is deterministic under a fixed seed") {
    const auto run_once = [] {
        std::mt19937_64 rng(42);
        CombinationState state = combination_init({1.0, 1.0, 1.0});
        std::mt19937_64 data_rng(7);
        for (const auto& row : random_rows(data_rng, 25, 3)) {
            combination_step(state, row, rng);
        }
        return state.assignments;
    };
    const auto a = run_once();
    const auto b = run_once();
    CHECK(a == b);

    // overwhelming evidence pins the sample
    std::mt19937_64 rng(1);
    CombinationState state = combination_init({1.0, 1.0});
    for (int i = 0; i < 50; ++i) {
        combination_step(state, {100.0, -100.0}, rng);
        CHECK(state.assignments.back() == 0);
    }
}

TEST_CASE("replace_prior swaps the concentration the counts sit on") {
    const Dirichlet posterior({15.0, 20.0, 12.0});
    const Dirichlet reduced = replace_prior(posterior, {10.0, 10.0, 10.0}, {1.0, 1.0, 1.0});
    CHECK(reduced.concentration()[0] == near(6.0));
    CHECK(reduced.concentration()[1] == near(11.0));
    CHECK(reduced.concentration()[2] == near(3.0));

    CHECK_THROWS_AS(replace_prior(Dirichlet({10.0, 11.0}), {12.0, 10.0}, {1.0, 1.0}),
                    NumericError);
    CHECK_THROWS_AS(replace_prior(posterior, {10.0, 10.0}, {1.0, 1.0, 1.0}), DimensionError);
}

TEST_CASE("kl_dirichlet") {
    const Dirichlet a({2.0, 3.0});
    CHECK(kl_dirichlet(a, a) == near(0.0, 1e-14));
    CHECK(kl_dirichlet(a, Dirichlet({4.0, 1.0})) > 0.0);

    // two-component case reduces to a Beta integral, done numerically
    const auto beta_pdf = [](double x, double p, double q) {
        return std::exp((p - 1.0) * std::log(x) + (q - 1.0) * std::log1p(-x) +
                        std::lgamma(p + q) - std::lgamma(p) - std::lgamma(q));
    };
    const double numeric = oracle::integrate(
        [&](double x) {
            const double pa = beta_pdf(x, 2.0, 3.0);
            const double pb = beta_pdf(x, 4.0, 1.0);
            return pa * (std::log(pa) - std::log(pb));
        },
        1e-9, 1.0 - 1e-9, 200000);
    CHECK(kl_dirichlet(a, Dirichlet({4.0, 1.0})) == near(numeric, 1e-6));
}

TEST_CASE("variational combination") {
    SUBCASE("symmetric evidence stays symmetric") {
        const std::vector<std::vector<double>> L{{0.3, 0.3}, {-1.0, -1.0}};
        const VariationalResult fit = combination_variational(L, {1.0, 1.0});
        CHECK(fit.converged);
        CHECK(fit.q_pi.concentration()[0] == near(2.0));
        CHECK(fit.q_pi.concentration()[1] == near(2.0));
        for (const Categorical& r : fit.q_m) {
            CHECK(r[0] == near(0.5));
        }
    }

    SUBCASE("free energy never increases along the sweeps") {
        std::mt19937_64 rng(2718);
        const auto L = random_rows(rng, 20, 3);
        const VariationalResult fit = combination_variational(L, {0.7, 1.3, 2.0}, 500, 0.0);
        REQUIRE(fit.free_energy_trace.size() >= 2);
        for (std::size_t i = 1; i < fit.free_energy_trace.size(); ++i) {
            CHECK(fit.free_energy_trace[i] <= fit.free_energy_trace[i - 1] + 1e-10);
        }
    }

    SUBCASE("convergence lands on a coordinate-descent fixed point") {
        std::mt19937_64 rng(99);
        const auto L = random_rows(rng, 15, 3);
        const std::vector<double> prior{1.0, 1.0, 1.0};
        const VariationalResult fit = combination_variational(L, prior, 5000, 1e-15);
        Dirichlet q_pi = fit.q_pi;
        std::vector<Categorical> q_m = fit.q_m;
        variational_sweep(L, prior, q_pi, q_m);
        // the stopping rule bounds objective movement by 1e-15, which near an
        // optimum only bounds parameter movement by its square root
        for (std::size_t k = 0; k < 3; ++k) {
            CHECK(q_pi.concentration()[k] == near(fit.q_pi.concentration()[k], 1e-6));
        }
        for (std::size_t i = 0; i < q_m.size(); ++i) {
            for (std::size_t k = 0; k < 3; ++k) {
                CHECK(q_m[i][k] == near(fit.q_m[i][k], 1e-6));
            }
        }
        // counts are conserved: concentrations sum to prior mass plus N
        double total = 0.0;
        for (double c : fit.q_pi.concentration()) {
            total += c;
        }
        CHECK(total == near(3.0 + 15.0, 1e-10));
    }

    SUBCASE("no observations returns the prior") {
        const VariationalResult fit = combination_variational({}, {2.0, 3.0});
        CHECK(fit.converged);
        CHECK(fit.q_pi.concentration()[0] == near(2.0));
        CHECK(fit.q_pi.concentration()[1] == near(3.0));
        CHECK(fit.q_m.empty());
    }

    SUBCASE("a huge prior concentration reduces the online rule to selection") {
        std::mt19937_64 rng(4242);
        const auto L = random_rows(rng, 100, 3);
        CombinationState state = combination_init({1e8, 1e8, 1e8});
        for (const auto& row : L) {
            combination_step(state, row);
        }
        for (std::size_t i = 0; i < L.size(); ++i) {
            CHECK(state.assignments[i] == model_select(L[i]).index);
        }
    }
}
