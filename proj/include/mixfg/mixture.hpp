#pragma once

#include <vector>

#include "mixfg/graph.hpp"

namespace mixfg {

// Message rules for the mixture (model switch) node. The node couples a
// selector variable m with one shared output variable and one input per
// sub-model. Branch scale factors are each sub-model's accumulated evidence,
// which is what makes posterior model comparison drop out of ordinary message
// passing.

// log Z_k = log integral of branch k's forward message against the shared
// backward message. This is sub-model k's evidence contribution.
std::vector<double> mixture_branch_log_evidences(const std::vector<Message>& branch_forwards,
                                                 const Message& out_backward);

// Toward the selector: a scaled categorical with weights proportional to the
// branch evidences Z_k.
Message mixture_message_to_m(const std::vector<Message>& branch_forwards,
                             const Message& out_backward);

// Toward the shared output: the scale-weighted mixture of the branch forwards.
// Component weights are proportional to mu(m_k) * exp(branch log_scale); a
// point-mass selector collapses the mixture to the selected branch exactly.
Message mixture_message_to_out(const Message& m_forward,
                               const std::vector<Message>& branch_forwards);

// Toward any branch: the shared backward message relayed unchanged, so each
// sub-model updates as if it were active.
Message mixture_message_to_branch(const Message& out_backward);

// Posterior of the shared output variable: the model-averaged product of the
// mixture forward with the backward message.
Distribution mixture_marginal_out(const Message& m_forward,
                                  const std::vector<Message>& branch_forwards,
                                  const Message& out_backward);

} // namespace mixfg
