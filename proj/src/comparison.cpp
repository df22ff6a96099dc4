#include "mixfg/comparison.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mixfg/errors.hpp"

namespace mixfg {

namespace {

std::vector<double> posterior_scores(const std::vector<double>& log_evidences,
                                     const Categorical& prior) {
    if (prior.size() != log_evidences.size()) {
        throw DimensionError("model prior has " + std::to_string(prior.size()) +
                             " entries for " + std::to_string(log_evidences.size()) + " models");
    }
    std::vector<double> scores(log_evidences.size());
    for (std::size_t k = 0; k < scores.size(); ++k) {
        scores[k] = std::log(prior.probs()[k]) + log_evidences[k];
    }
    return scores;
}

std::size_t arg_max(const std::vector<double>& v) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < v.size(); ++k) {
        if (v[k] > v[best]) {
            best = k;
        }
    }
    return best;
}

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

} // namespace

Categorical model_average(const std::vector<double>& log_evidences, const Categorical& prior) {
    return normalize_log_weights(posterior_scores(log_evidences, prior)).result;
}

Categorical model_average(const std::vector<double>& log_evidences) {
    return model_average(log_evidences, Categorical::uniform(log_evidences.size()));
}

PointMassIndex model_select(const std::vector<double>& log_evidences, const Categorical& prior) {
    const auto scores = posterior_scores(log_evidences, prior);
    return PointMassIndex(arg_max(scores), scores.size());
}

PointMassIndex model_select(const std::vector<double>& log_evidences) {
    return model_select(log_evidences, Categorical::uniform(log_evidences.size()));
}

double total_log_evidence(const std::vector<double>& log_evidences, const Categorical& prior) {
    return log_sum_exp(posterior_scores(log_evidences, prior));
}

double total_log_evidence(const std::vector<double>& log_evidences) {
    return total_log_evidence(log_evidences, Categorical::uniform(log_evidences.size()));
}

double mixture_free_energy(const Categorical& q, const Categorical& prior,
                           const std::vector<double>& log_evidences) {
    if (q.size() != prior.size() || q.size() != log_evidences.size()) {
        throw DimensionError("mixture_free_energy: mismatched sizes");
    }
    double f = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) {
        const double qk = q.probs()[k];
        f += xlogx(qk) - qk * (std::log(prior.probs()[k]) + log_evidences[k]);
    }
    return f;
}

// ---------------------------------------------------------------------------
// Online combination

CombinationState combination_init(std::vector<double> prior_alpha) {
    CombinationState state{Dirichlet(prior_alpha), std::move(prior_alpha), {}};
    return state;
}

namespace {
std::vector<double> combination_scores(const CombinationState& state,
                                       const std::vector<double>& log_evidences) {
    if (log_evidences.size() != state.posterior.size()) {
        throw DimensionError("combination step: evidence row has " +
                             std::to_string(log_evidences.size()) + " entries for " +
                             std::to_string(state.posterior.size()) + " components");
    }
    const auto mean = dirichlet_mean(state.posterior);
    std::vector<double> scores(mean.size());
    for (std::size_t k = 0; k < mean.size(); ++k) {
        scores[k] = std::log(mean[k]) + log_evidences[k];
    }
    return scores;
}

void combination_assign(CombinationState& state, std::size_t k) {
    auto alpha = state.posterior.concentration();
    alpha[k] += 1.0;
    state.posterior = Dirichlet(std::move(alpha));
    state.assignments.push_back(k);
}
} // namespace

void combination_step(CombinationState& state, const std::vector<double>& log_evidences) {
    combination_assign(state, arg_max(combination_scores(state, log_evidences)));
}

void combination_step(CombinationState& state, const std::vector<double>& log_evidences,
                      std::mt19937_64& rng) {
    const auto norm = normalize_log_weights(combination_scores(state, log_evidences));
    std::discrete_distribution<std::size_t> pick(norm.result.probs().begin(),
                                                 norm.result.probs().end());
    combination_assign(state, pick(rng));
}

Dirichlet replace_prior(const Dirichlet& posterior, const std::vector<double>& old_prior_alpha,
                        const std::vector<double>& new_prior_alpha) {
    if (old_prior_alpha.size() != posterior.size() ||
        new_prior_alpha.size() != posterior.size()) {
        throw DimensionError("replace_prior: mismatched concentration sizes");
    }
    std::vector<double> alpha(posterior.size());
    for (std::size_t k = 0; k < alpha.size(); ++k) {
        alpha[k] = posterior.concentration()[k] - old_prior_alpha[k] + new_prior_alpha[k];
        if (!(alpha[k] > 0.0)) {
            throw NumericError("replace_prior: adjusted concentration " + std::to_string(k) +
                               " is not positive");
        }
    }
    return Dirichlet(std::move(alpha));
}

// ---------------------------------------------------------------------------
// Variational combination

double kl_dirichlet(const Dirichlet& a, const Dirichlet& b) {
    if (a.size() != b.size()) {
        throw DimensionError("kl_dirichlet: mismatched sizes");
    }
    const auto& pa = a.concentration();
    const auto& pb = b.concentration();
    const auto elog = dirichlet_expected_log(a);
    double sum_a = 0.0;
    double sum_b = 0.0;
    for (std::size_t k = 0; k < pa.size(); ++k) {
        sum_a += pa[k];
        sum_b += pb[k];
    }
    double kl = std::lgamma(sum_a) - std::lgamma(sum_b);
    for (std::size_t k = 0; k < pa.size(); ++k) {
        kl += std::lgamma(pb[k]) - std::lgamma(pa[k]) + (pa[k] - pb[k]) * elog[k];
    }
    return kl;
}

namespace {
void check_rows(const std::vector<std::vector<double>>& log_evidences, std::size_t k) {
    for (const auto& row : log_evidences) {
        if (row.size() != k) {
            throw DimensionError("variational combination: evidence row has " +
                                 std::to_string(row.size()) + " entries, expected " +
                                 std::to_string(k));
        }
    }
}
} // namespace

void variational_sweep(const std::vector<std::vector<double>>& log_evidences,
                       const std::vector<double>& prior_alpha, Dirichlet& q_pi,
                       std::vector<Categorical>& q_m) {
    const std::size_t k = prior_alpha.size();
    if (q_m.size() != log_evidences.size() || q_pi.size() != k) {
        throw DimensionError("variational_sweep: mismatched state sizes");
    }
    check_rows(log_evidences, k);
    const auto elog = dirichlet_expected_log(q_pi);
    std::vector<double> counts(prior_alpha);
    std::vector<double> scores(k);
    for (std::size_t n = 0; n < log_evidences.size(); ++n) {
        for (std::size_t j = 0; j < k; ++j) {
            scores[j] = elog[j] + log_evidences[n][j];
        }
        q_m[n] = normalize_log_weights(scores).result;
        for (std::size_t j = 0; j < k; ++j) {
            counts[j] += q_m[n].probs()[j];
        }
    }
    q_pi = Dirichlet(std::move(counts));
}

double variational_free_energy(const std::vector<std::vector<double>>& log_evidences,
                               const std::vector<double>& prior_alpha, const Dirichlet& q_pi,
                               const std::vector<Categorical>& q_m) {
    const std::size_t k = prior_alpha.size();
    if (q_m.size() != log_evidences.size() || q_pi.size() != k) {
        throw DimensionError("variational_free_energy: mismatched state sizes");
    }
    check_rows(log_evidences, k);
    const auto elog = dirichlet_expected_log(q_pi);
    double f = kl_dirichlet(q_pi, Dirichlet(prior_alpha));
    for (std::size_t n = 0; n < log_evidences.size(); ++n) {
        for (std::size_t j = 0; j < k; ++j) {
            const double r = q_m[n].probs()[j];
            f += xlogx(r) - r * (elog[j] + log_evidences[n][j]);
        }
    }
    return f;
}

VariationalResult combination_variational(const std::vector<std::vector<double>>& log_evidences,
                                          std::vector<double> prior_alpha, std::size_t max_iters,
                                          double tol) {
    const std::size_t k = prior_alpha.size();
    check_rows(log_evidences, k);
    VariationalResult result{Dirichlet(prior_alpha), {}, {}, false, 0};
    result.q_m.assign(log_evidences.size(), Categorical::uniform(k));
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t it = 0; it < max_iters; ++it) {
        variational_sweep(log_evidences, prior_alpha, result.q_pi, result.q_m);
        const double f = variational_free_energy(log_evidences, prior_alpha, result.q_pi,
                                                 result.q_m);
        result.free_energy_trace.push_back(f);
        result.iterations = it + 1;
        if (std::abs(prev - f) <= tol) {
            result.converged = true;
            break;
        }
        prev = f;
    }
    return result;
}

} // namespace mixfg
