#pragma once

#include "mixfg/graph.hpp"

namespace mixfg {

// Sum-product message rules for the standard node kinds. Every rule keeps the
// body normalized and folds any residual mass into log_scale.

Message prior_message(const PriorNode& node);

// Toward the observation port: convolution N(mean_s, var_s + noise_variance).
Message gaussian_likelihood_to_y(const GaussianLikelihood& node, const Message& s_msg);
// Toward the mean port; same convolution by symmetry of N(y - s).
Message gaussian_likelihood_to_s(const GaussianLikelihood& node, const Message& y_msg);

// Forward: N(rho * mu, rho^2 v + process_variance).
Message ar1_forward(const GaussianAR1& node, const Message& prev_msg);
// Backward: N(mu / rho, (v + process_variance) / rho^2) with a -ln|rho|
// scale residue from the change of variables.
Message ar1_backward(const GaussianAR1& node, const Message& next_msg);

Message transition_forward(const TransitionNode& node, const Message& prev_msg);
Message transition_backward(const TransitionNode& node, const Message& next_msg);

// Forward to the outcome: Cat(alpha / sum(alpha)) in exact mode, a renormalized
// exp(E[ln pi]) in variational mode.
Message categorical_from_probs_to_m(const CategoricalFromProbs& node, const Message& pi_msg);
// Backward to the probability vector. A point-mass outcome adds one unit of
// concentration to the selected component; soft outcomes are accepted only in
// variational mode.
Message categorical_from_probs_to_pi(const CategoricalFromProbs& node, const Message& m_msg);

// Product of the two colliding messages, scales and normalizer included.
Message equality_message(const Message& a, const Message& b);

} // namespace mixfg
