#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "mixfg/distributions.hpp"

namespace mixfg {

// All routines take per-model log evidences L_k = log p(y | m = k), typically
// read off a mixture node's selector edge.

// Posterior over the model set: q(m)_k proportional to prior_k * exp(L_k).
Categorical model_average(const std::vector<double>& log_evidences, const Categorical& prior);
Categorical model_average(const std::vector<double>& log_evidences);

// MAP model under the same posterior; ties resolve to the lowest index.
PointMassIndex model_select(const std::vector<double>& log_evidences, const Categorical& prior);
PointMassIndex model_select(const std::vector<double>& log_evidences);

// log sum_k prior_k exp(L_k): evidence of the averaged model.
double total_log_evidence(const std::vector<double>& log_evidences, const Categorical& prior);
double total_log_evidence(const std::vector<double>& log_evidences);

// Free energy of a candidate posterior q over models:
//   F(q) = sum_k q_k (log q_k - log prior_k - L_k),
// which equals -total_log_evidence exactly when q is the model posterior.
double mixture_free_energy(const Categorical& q, const Categorical& prior,
                           const std::vector<double>& log_evidences);

// ---------------------------------------------------------------------------
// Online model combination: a Dirichlet belief over mixing weights updated one
// observation at a time by hard assignment.

struct CombinationState {
    Dirichlet posterior;
    std::vector<double> prior_alpha;
    std::vector<std::size_t> assignments;
};

CombinationState combination_init(std::vector<double> prior_alpha);

// Assigns the observation to arg max_k [log E[pi_k] + L_k] (ties to the lowest
// index) and adds a unit count to that component.
void combination_step(CombinationState& state, const std::vector<double>& log_evidences);

// Same scores, but the assignment is sampled from their softmax.
void combination_step(CombinationState& state, const std::vector<double>& log_evidences,
                      std::mt19937_64& rng);

// Replace the prior the posterior was built on: alpha' = alpha - old + new.
// Throws NumericError if any adjusted concentration is not positive.
Dirichlet replace_prior(const Dirichlet& posterior, const std::vector<double>& old_prior_alpha,
                        const std::vector<double>& new_prior_alpha);

// ---------------------------------------------------------------------------
// Variational model combination: mean-field q(pi) q(m_1) ... q(m_N) fit by
// coordinate descent on the free energy.

struct VariationalResult {
    Dirichlet q_pi;
    std::vector<Categorical> q_m;
    std::vector<double> free_energy_trace; // one entry per completed sweep
    bool converged = false;
    std::size_t iterations = 0;
};

// log_evidences is N rows of K per-model log evidences, one row per
// observation. Stops when the free energy drop falls to tol or below.
VariationalResult combination_variational(const std::vector<std::vector<double>>& log_evidences,
                                          std::vector<double> prior_alpha,
                                          std::size_t max_iters = 200, double tol = 1e-8);

// One full coordinate sweep (every q_m, then q_pi), exposed so tests can check
// the fixed point. Requires q_m.size() == log_evidences.size().
void variational_sweep(const std::vector<std::vector<double>>& log_evidences,
                       const std::vector<double>& prior_alpha, Dirichlet& q_pi,
                       std::vector<Categorical>& q_m);

double variational_free_energy(const std::vector<std::vector<double>>& log_evidences,
                               const std::vector<double>& prior_alpha, const Dirichlet& q_pi,
                               const std::vector<Categorical>& q_m);

double kl_dirichlet(const Dirichlet& a, const Dirichlet& b);

} // namespace mixfg
