#include "mixfg/mixture.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace mixfg {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<double> selector_probs(const Message& m_forward, std::size_t k) {
    if (const auto* c = std::get_if<Categorical>(&m_forward.body)) {
        if (c->size() != k) {
            throw DimensionError("mixture: selector size mismatch");
        }
        return c->probs();
    }
    if (const auto* p = std::get_if<PointMassIndex>(&m_forward.body)) {
        if (p->cardinality != k) {
            throw DimensionError("mixture: selector cardinality mismatch");
        }
        std::vector<double> v(k, 0.0);
        v[p->index] = 1.0;
        return v;
    }
    throw UnsupportedModelError(std::string("mixture: selector message must be discrete, got ") +
                                family_name(m_forward.body));
}

} // namespace

std::vector<double> mixture_branch_log_evidences(const std::vector<Message>& branch_forwards,
                                                 const Message& out_backward) {
    std::vector<double> log_z(branch_forwards.size());
    for (std::size_t k = 0; k < branch_forwards.size(); ++k) {
        const Message& br = branch_forwards[k];
        double log_norm;
        try {
            log_norm = multiply(br.body, out_backward.body).log_norm;
        } catch (const DegenerateEvidenceError&) {
            log_norm = kNegInf; // this branch has no overlap with the backward message
        }
        log_z[k] = br.log_scale + out_backward.log_scale + log_norm;
    }
    return log_z;
}

Message mixture_message_to_m(const std::vector<Message>& branch_forwards,
                             const Message& out_backward) {
    if (branch_forwards.size() < 2) {
        throw DimensionError("mixture: need at least two branches");
    }
    const auto log_z = mixture_branch_log_evidences(branch_forwards, out_backward);
    auto norm = normalize_log_weights(log_z); // throws when every Z_k is zero
    return Message{norm.log_z, norm.result};
}

Message mixture_message_to_out(const Message& m_forward,
                               const std::vector<Message>& branch_forwards) {
    const std::size_t k = branch_forwards.size();
    if (k < 2) {
        throw DimensionError("mixture: need at least two branches");
    }

    // Point-mass selector: exact collapse to the chosen branch.
    if (const auto* pm = std::get_if<PointMassIndex>(&m_forward.body)) {
        if (pm->cardinality != k) {
            throw DimensionError("mixture: selector cardinality mismatch");
        }
        const Message& br = branch_forwards[pm->index];
        return Message{m_forward.log_scale + br.log_scale, br.body};
    }

    const auto pi = selector_probs(m_forward, k);
    std::vector<double> lw(k);
    for (std::size_t i = 0; i < k; ++i) {
        lw[i] = (pi[i] > 0.0 ? std::log(pi[i]) : kNegInf) + branch_forwards[i].log_scale;
    }
    auto norm = normalize_log_weights(lw);
    const auto& w = norm.result.probs();

    // All-Gaussian branches mix into a Gaussian mixture (nested mixtures are
    // flattened); all-discrete branches mix into a categorical.
    bool gaussian_like = true;
    bool discrete_like = true;
    for (const auto& br : branch_forwards) {
        const bool g = std::holds_alternative<Gaussian1D>(br.body) ||
                       std::holds_alternative<GaussianMixture1D>(br.body);
        const bool d = std::holds_alternative<Categorical>(br.body) ||
                       std::holds_alternative<PointMassIndex>(br.body);
        gaussian_like = gaussian_like && g;
        discrete_like = discrete_like && d;
    }

    if (gaussian_like) {
        std::vector<double> weights;
        std::vector<Gaussian1D> comps;
        for (std::size_t i = 0; i < k; ++i) {
            if (w[i] == 0.0) {
                continue;
            }
            if (const auto* g = std::get_if<Gaussian1D>(&branch_forwards[i].body)) {
                weights.push_back(w[i]);
                comps.push_back(*g);
            } else {
                const auto& sub = std::get<GaussianMixture1D>(branch_forwards[i].body);
                for (std::size_t j = 0; j < sub.size(); ++j) {
                    weights.push_back(w[i] * sub.weights()[j]);
                    comps.push_back(sub.components()[j]);
                }
            }
        }
        return Message{m_forward.log_scale + norm.log_z,
                       GaussianMixture1D(std::move(weights), std::move(comps))};
    }
    if (discrete_like) {
        std::size_t card = 0;
        if (const auto* c = std::get_if<Categorical>(&branch_forwards[0].body)) {
            card = c->size();
        } else {
            card = std::get<PointMassIndex>(branch_forwards[0].body).cardinality;
        }
        std::vector<double> p(card, 0.0);
        for (std::size_t i = 0; i < k; ++i) {
            if (w[i] == 0.0) {
                continue;
            }
            if (const auto* c = std::get_if<Categorical>(&branch_forwards[i].body)) {
                if (c->size() != card) {
                    throw DimensionError("mixture: branch cardinality mismatch");
                }
                for (std::size_t j = 0; j < card; ++j) {
                    p[j] += w[i] * c->probs()[j];
                }
            } else {
                const auto& pmk = std::get<PointMassIndex>(branch_forwards[i].body);
                if (pmk.cardinality != card) {
                    throw DimensionError("mixture: branch cardinality mismatch");
                }
                p[pmk.index] += w[i];
            }
        }
        return Message{m_forward.log_scale + norm.log_z, Categorical(std::move(p))};
    }
    throw UnsupportedModelError("mixture: branches must be all Gaussian or all discrete");
}

Message mixture_message_to_branch(const Message& out_backward) { return out_backward; }

Distribution mixture_marginal_out(const Message& m_forward,
                                  const std::vector<Message>& branch_forwards,
                                  const Message& out_backward) {
    const Message fwd = mixture_message_to_out(m_forward, branch_forwards);
    return multiply(fwd.body, out_backward.body).body;
}

} // namespace mixfg
