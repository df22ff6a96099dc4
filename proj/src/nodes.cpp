#include "mixfg/nodes.hpp"

#include <cmath>
#include <string>

namespace mixfg {

namespace {

// Pushes a message through an additive Gaussian kernel: the body mean is
// scaled by `a` and the variance becomes a^2 v + q. Covers the likelihood
// (a = 1, q = noise variance) and both AR1 directions; callers fold in any
// change-of-variables residue themselves.
Message gaussian_affine_convolve(const Message& in, double a, double q, const char* ctx) {
    Message out;
    out.log_scale = in.log_scale;

    if (const auto* g = std::get_if<Gaussian1D>(&in.body)) {
        out.body = Gaussian1D(a * g->mean(), a * a * g->variance() + q);
        return out;
    }
    if (const auto* p = std::get_if<PointMassReal>(&in.body)) {
        out.body = Gaussian1D(a * p->value, q);
        return out;
    }
    if (const auto* m = std::get_if<GaussianMixture1D>(&in.body)) {
        std::vector<Gaussian1D> comps;
        comps.reserve(m->size());
        for (const auto& c : m->components()) {
            comps.emplace_back(a * c.mean(), a * a * c.variance() + q);
        }
        out.body = GaussianMixture1D(m->weights(), std::move(comps));
        return out;
    }
    if (is_flat(in.body)) {
        out.body = Flat{};
        return out;
    }
    throw UnsupportedModelError(std::string(ctx) + ": unsupported incoming family " +
                                family_name(in.body));
}

std::vector<double> discrete_probs(const Message& msg, std::size_t k, const char* ctx) {
    if (const auto* c = std::get_if<Categorical>(&msg.body)) {
        if (c->size() != k) {
            throw DimensionError(std::string(ctx) + ": categorical size mismatch");
        }
        return c->probs();
    }
    if (const auto* p = std::get_if<PointMassIndex>(&msg.body)) {
        if (p->cardinality != k) {
            throw DimensionError(std::string(ctx) + ": point mass cardinality mismatch");
        }
        std::vector<double> v(k, 0.0);
        v[p->index] = 1.0;
        return v;
    }
    throw UnsupportedModelError(std::string(ctx) + ": expected discrete message, got " +
                                family_name(msg.body));
}

double log_multivariate_beta(const std::vector<double>& alpha) {
    double sum = 0.0;
    double lg = 0.0;
    for (double a : alpha) {
        lg += std::lgamma(a);
        sum += a;
    }
    return lg - std::lgamma(sum);
}

} // namespace

GaussianLikelihood::GaussianLikelihood(double v) : noise_variance(v) {
    if (!(v >= kVarianceFloor) || !std::isfinite(v)) {
        throw NumericError("likelihood noise variance below floor 1e-12");
    }
}

GaussianAR1::GaussianAR1(double r, double pv) : rho(r), process_variance(pv) {
    if (!std::isfinite(r) || r == 0.0) {
        throw NumericError("AR1 coefficient must be finite and nonzero");
    }
    if (!(pv >= kVarianceFloor) || !std::isfinite(pv)) {
        throw NumericError("AR1 process variance below floor 1e-12");
    }
}

MixtureNode::MixtureNode(std::size_t k_) : k(k_) {
    if (k < 2) {
        throw DimensionError("mixture node needs at least two sub-models");
    }
}

TransitionMatrix::TransitionMatrix(std::size_t k, std::vector<double> row_major)
    : k_(k), m_(std::move(row_major)) {
    if (k_ == 0 || m_.size() != k_ * k_) {
        throw DimensionError("transition matrix: bad dimensions");
    }
    for (std::size_t j = 0; j < k_; ++j) {
        double col = 0.0;
        for (std::size_t i = 0; i < k_; ++i) {
            const double v = (*this)(i, j);
            if (!std::isfinite(v) || v < 0.0) {
                throw NumericError("transition matrix entries must be finite and nonnegative");
            }
            col += v;
        }
        if (std::abs(col - 1.0) > 1e-12) {
            throw NumericError("transition matrix column " + std::to_string(j) +
                               " does not sum to 1");
        }
    }
}

TransitionMatrix TransitionMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
    const std::size_t k = rows.size();
    std::vector<double> flat;
    flat.reserve(k * k);
    for (const auto& r : rows) {
        if (r.size() != k) {
            throw DimensionError("transition matrix: ragged rows");
        }
        flat.insert(flat.end(), r.begin(), r.end());
    }
    return TransitionMatrix(k, std::move(flat));
}

// ---------------------------------------------------------------------------

Message prior_message(const PriorNode& node) {
    if (is_flat(node.dist)) {
        throw UnsupportedModelError("prior node requires a proper distribution");
    }
    return Message{0.0, node.dist};
}

Message gaussian_likelihood_to_y(const GaussianLikelihood& node, const Message& s_msg) {
    return gaussian_affine_convolve(s_msg, 1.0, node.noise_variance, "likelihood forward");
}

Message gaussian_likelihood_to_s(const GaussianLikelihood& node, const Message& y_msg) {
    return gaussian_affine_convolve(y_msg, 1.0, node.noise_variance, "likelihood backward");
}

Message ar1_forward(const GaussianAR1& node, const Message& prev_msg) {
    // int N(s' | rho u, q) du = 1/|rho|: a flat input picks up the Jacobian.
    if (is_flat(prev_msg.body)) {
        return Message{prev_msg.log_scale - std::log(std::abs(node.rho)), Flat{}};
    }
    return gaussian_affine_convolve(prev_msg, node.rho, node.process_variance, "AR1 forward");
}

Message ar1_backward(const GaussianAR1& node, const Message& next_msg) {
    if (is_flat(next_msg.body)) {
        return Message{next_msg.log_scale, Flat{}};
    }
    const double r = node.rho;
    Message out = gaussian_affine_convolve(
        Message{next_msg.log_scale, next_msg.body}, 1.0 / r,
        node.process_variance / (r * r), "AR1 backward");
    out.log_scale -= std::log(std::abs(r));
    return out;
}

namespace {

Message transition_apply(const TransitionNode& node, const Message& in, bool forward) {
    const std::size_t k = node.T.size();
    std::vector<double> p;
    if (is_flat(in.body)) {
        p.assign(k, 1.0 / static_cast<double>(k)); // engine never stores this; guard anyway
    } else {
        p = discrete_probs(in, k, forward ? "transition forward" : "transition backward");
    }
    std::vector<double> w(k, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            w[i] += forward ? node.T(i, j) * p[j] : node.T(j, i) * p[j];
        }
    }
    double sum = 0.0;
    for (double v : w) {
        sum += v;
    }
    if (sum <= 0.0) {
        throw DegenerateEvidenceError("transition message has zero mass");
    }
    for (double& v : w) {
        v /= sum;
    }
    return Message{in.log_scale + std::log(sum), Categorical(std::move(w))};
}

} // namespace

Message transition_forward(const TransitionNode& node, const Message& prev_msg) {
    return transition_apply(node, prev_msg, true);
}

Message transition_backward(const TransitionNode& node, const Message& next_msg) {
    return transition_apply(node, next_msg, false);
}

Message categorical_from_probs_to_m(const CategoricalFromProbs& node, const Message& pi_msg) {
    const auto* d = std::get_if<Dirichlet>(&pi_msg.body);
    if (d == nullptr) {
        throw UnsupportedModelError("categorical-from-probs expects a Dirichlet message, got " +
                                    std::string(family_name(pi_msg.body)));
    }
    if (d->size() != node.k) {
        throw DimensionError("categorical-from-probs: Dirichlet size mismatch");
    }
    if (!node.variational) {
        // Exact marginalization: int Cat(m | pi) Dir(pi | alpha) dpi = mean(alpha).
        return Message{pi_msg.log_scale, dirichlet_mean(*d)};
    }
    auto norm = normalize_log_weights(dirichlet_expected_log(*d));
    return Message{pi_msg.log_scale, norm.result};
}

Message categorical_from_probs_to_pi(const CategoricalFromProbs& node, const Message& m_msg) {
    if (const auto* p = std::get_if<PointMassIndex>(&m_msg.body)) {
        if (p->cardinality != node.k) {
            throw DimensionError("categorical-from-probs: outcome cardinality mismatch");
        }
        std::vector<double> alpha(node.k, 1.0);
        alpha[p->index] += 1.0;
        const double log_b = log_multivariate_beta(alpha);
        return Message{m_msg.log_scale + log_b, Dirichlet(std::move(alpha))};
    }
    if (const auto* c = std::get_if<Categorical>(&m_msg.body)) {
        if (!node.variational) {
            throw UnsupportedModelError(
                "categorical-from-probs: exact backward from a soft outcome is a Dirichlet "
                "mixture; enable variational mode");
        }
        if (c->size() != node.k) {
            throw DimensionError("categorical-from-probs: outcome size mismatch");
        }
        std::vector<double> alpha(node.k);
        for (std::size_t i = 0; i < node.k; ++i) {
            alpha[i] = 1.0 + c->probs()[i];
        }
        const double log_b = log_multivariate_beta(alpha);
        return Message{m_msg.log_scale + log_b, Dirichlet(std::move(alpha))};
    }
    throw UnsupportedModelError("categorical-from-probs expects a discrete outcome message, got " +
                                std::string(family_name(m_msg.body)));
}

Message equality_message(const Message& a, const Message& b) {
    auto prod = multiply(a.body, b.body);
    return Message{a.log_scale + b.log_scale + prod.log_norm, std::move(prod.body)};
}

} // namespace mixfg
