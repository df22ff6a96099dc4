#include "mixfg/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/special_functions/digamma.hpp>

namespace mixfg {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLogTwoPi = 1.8378770664093454835606594728112; // ln(2*pi)

void require_finite(double x, const char* what) {
    if (!std::isfinite(x)) {
        throw NumericError(std::string(what) + " must be finite");
    }
}

struct DirichletProduct {
    Dirichlet result;
    double log_z;
};

double log_multivariate_beta(const std::vector<double>& alpha) {
    double sum = 0.0;
    double lg = 0.0;
    for (double a : alpha) {
        lg += std::lgamma(a);
        sum += a;
    }
    return lg - std::lgamma(sum);
}

DirichletProduct dirichlet_product(const Dirichlet& a, const Dirichlet& b) {
    if (a.size() != b.size()) {
        throw DimensionError("dirichlet product: size mismatch");
    }
    std::vector<double> c(a.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        c[i] = a.concentration()[i] + b.concentration()[i] - 1.0;
        if (c[i] <= 0.0) {
            throw UnsupportedModelError("dirichlet product: nonpositive concentration");
        }
    }
    double log_z = log_multivariate_beta(c) - log_multivariate_beta(a.concentration()) -
                   log_multivariate_beta(b.concentration());
    return {Dirichlet(std::move(c)), log_z};
}

} // namespace

// ---------------------------------------------------------------------------
// Constructors

Gaussian1D::Gaussian1D(double mean, double variance) : mean_(mean), variance_(variance) {
    require_finite(mean, "Gaussian mean");
    require_finite(variance, "Gaussian variance");
    if (variance < kVarianceFloor) {
        throw NumericError("Gaussian variance below floor 1e-12");
    }
}

Categorical::Categorical(std::vector<double> probs) : p_(std::move(probs)) {
    if (p_.empty()) {
        throw DimensionError("Categorical needs at least one category");
    }
    double sum = 0.0;
    for (double v : p_) {
        require_finite(v, "Categorical probability");
        if (v < -1e-15 || v > 1.0 + kProbSumTolerance) {
            throw NumericError("Categorical probability outside [0, 1]");
        }
        sum += v;
    }
    if (std::abs(sum - 1.0) > kProbSumTolerance) {
        throw NumericError("Categorical probabilities sum to " + std::to_string(sum) +
                           ", expected 1");
    }
    for (double& v : p_) {
        v = std::max(v, 0.0) / sum;
    }
}

Categorical Categorical::uniform(std::size_t k) {
    if (k == 0) {
        throw DimensionError("Categorical needs at least one category");
    }
    return Categorical(std::vector<double>(k, 1.0 / static_cast<double>(k)));
}

Dirichlet::Dirichlet(std::vector<double> concentration) : alpha_(std::move(concentration)) {
    if (alpha_.empty()) {
        throw DimensionError("Dirichlet needs at least one component");
    }
    for (double a : alpha_) {
        require_finite(a, "Dirichlet concentration");
        if (a <= 0.0) {
            throw NumericError("Dirichlet concentration must be positive");
        }
    }
}

PointMassReal::PointMassReal(double v) : value(v) { require_finite(v, "point mass value"); }

PointMassIndex::PointMassIndex(std::size_t i, std::size_t k) : index(i), cardinality(k) {
    if (k == 0 || i >= k) {
        throw DimensionError("point mass index out of range");
    }
}

GaussianMixture1D::GaussianMixture1D(std::vector<double> weights,
                                     std::vector<Gaussian1D> components)
    : weights_(std::move(weights)), components_(std::move(components)) {
    if (weights_.empty() || weights_.size() != components_.size()) {
        throw DimensionError("GaussianMixture1D: weight/component size mismatch");
    }
    double sum = 0.0;
    for (double w : weights_) {
        require_finite(w, "mixture weight");
        if (w < -1e-15) {
            throw NumericError("mixture weight negative");
        }
        sum += w;
    }
    if (std::abs(sum - 1.0) > kProbSumTolerance) {
        throw NumericError("mixture weights sum to " + std::to_string(sum) + ", expected 1");
    }
    for (double& w : weights_) {
        w = std::max(w, 0.0) / sum;
    }
}

const char* family_name(const Distribution& d) noexcept {
    switch (d.index()) {
        case 0: return "Flat";
        case 1: return "Gaussian1D";
        case 2: return "Categorical";
        case 3: return "Dirichlet";
        case 4: return "PointMassReal";
        case 5: return "PointMassIndex";
        case 6: return "GaussianMixture1D";
        default: return "unknown";
    }
}

bool is_flat(const Distribution& d) noexcept { return std::holds_alternative<Flat>(d); }

// ---------------------------------------------------------------------------
// Scalar operations

double gaussian_log_pdf(double x, const Gaussian1D& g) noexcept {
    const double d = x - g.mean();
    return -0.5 * (kLogTwoPi + std::log(g.variance())) - 0.5 * d * d / g.variance();
}

double log_pdf(const Distribution& d, double x) {
    if (const auto* g = std::get_if<Gaussian1D>(&d)) {
        return gaussian_log_pdf(x, *g);
    }
    if (const auto* m = std::get_if<GaussianMixture1D>(&d)) {
        std::vector<double> terms(m->size());
        for (std::size_t i = 0; i < m->size(); ++i) {
            terms[i] = std::log(m->weights()[i]) + gaussian_log_pdf(x, m->components()[i]);
        }
        return log_sum_exp(terms);
    }
    if (std::holds_alternative<Flat>(d)) {
        return 0.0;
    }
    throw UnsupportedModelError(std::string("log_pdf undefined for ") + family_name(d));
}

double log_sum_exp(const std::vector<double>& w) {
    double mx = kNegInf;
    for (double v : w) {
        if (std::isnan(v)) {
            throw NumericError("log_sum_exp: NaN input");
        }
        mx = std::max(mx, v);
    }
    if (!std::isfinite(mx)) {
        return kNegInf;
    }
    double sum = 0.0;
    for (double v : w) {
        sum += std::exp(v - mx);
    }
    return mx + std::log(sum);
}

GaussianProduct gaussian_product(const Gaussian1D& a, const Gaussian1D& b) {
    const double prec = 1.0 / a.variance() + 1.0 / b.variance();
    const double mean = (a.mean() / a.variance() + b.mean() / b.variance()) / prec;
    const double log_z = gaussian_log_pdf(a.mean(), Gaussian1D(b.mean(), a.variance() + b.variance()));
    return {Gaussian1D(mean, 1.0 / prec), log_z};
}

CategoricalProduct categorical_product(const Categorical& a, const Categorical& b) {
    if (a.size() != b.size()) {
        throw DimensionError("categorical product: size mismatch");
    }
    std::vector<double> w(a.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        w[i] = a.probs()[i] * b.probs()[i];
        sum += w[i];
    }
    if (sum <= 0.0) {
        throw DegenerateEvidenceError("categorical product has zero mass");
    }
    for (double& v : w) {
        v /= sum;
    }
    return {Categorical(std::move(w)), std::log(sum)};
}

NormalizedLogWeights normalize_log_weights(const std::vector<double>& w) {
    if (w.empty()) {
        throw DimensionError("normalize_log_weights: empty input");
    }
    for (double v : w) {
        if (std::isnan(v)) {
            throw NumericError("normalize_log_weights: NaN input");
        }
    }
    const double log_z = log_sum_exp(w);
    if (!std::isfinite(log_z)) {
        throw DegenerateEvidenceError("normalize_log_weights: all weights are zero");
    }
    std::vector<double> p(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        p[i] = std::exp(w[i] - log_z);
    }
    return {Categorical(std::move(p)), log_z};
}

Categorical dirichlet_mean(const Dirichlet& d) {
    double sum = 0.0;
    for (double a : d.concentration()) {
        sum += a;
    }
    std::vector<double> p(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        p[i] = d.concentration()[i] / sum;
    }
    return Categorical(std::move(p));
}

std::vector<double> dirichlet_expected_log(const Dirichlet& d) {
    double sum = 0.0;
    for (double a : d.concentration()) {
        sum += a;
    }
    const double psi_total = boost::math::digamma(sum);
    std::vector<double> out(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        out[i] = boost::math::digamma(d.concentration()[i]) - psi_total;
    }
    return out;
}

Gaussian1D moment_match(const GaussianMixture1D& m) {
    double mean = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        mean += m.weights()[i] * m.components()[i].mean();
    }
    double var = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        const double d = m.components()[i].mean() - mean;
        var += m.weights()[i] * (m.components()[i].variance() + d * d);
    }
    return Gaussian1D(mean, var);
}

// ---------------------------------------------------------------------------
// Generic body product

namespace {

NormalizedProduct mixture_times_gaussian(const GaussianMixture1D& m, const Gaussian1D& g) {
    std::vector<double> lw(m.size());
    std::vector<Gaussian1D> comps;
    comps.reserve(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        auto prod = gaussian_product(m.components()[i], g);
        lw[i] = std::log(m.weights()[i]) + prod.log_z;
        comps.push_back(prod.result);
    }
    auto norm = normalize_log_weights(lw);
    return {GaussianMixture1D(norm.result.probs(), std::move(comps)), norm.log_z};
}

} // namespace

NormalizedProduct multiply(const Distribution& a, const Distribution& b) {
    if (is_flat(a)) {
        return {b, 0.0};
    }
    if (is_flat(b)) {
        return {a, 0.0};
    }

    if (const auto* ga = std::get_if<Gaussian1D>(&a)) {
        if (const auto* gb = std::get_if<Gaussian1D>(&b)) {
            auto prod = gaussian_product(*ga, *gb);
            return {prod.result, prod.log_z};
        }
        if (const auto* pb = std::get_if<PointMassReal>(&b)) {
            return {*pb, gaussian_log_pdf(pb->value, *ga)};
        }
        if (const auto* mb = std::get_if<GaussianMixture1D>(&b)) {
            return mixture_times_gaussian(*mb, *ga);
        }
    }
    if (const auto* ma = std::get_if<GaussianMixture1D>(&a)) {
        if (const auto* gb = std::get_if<Gaussian1D>(&b)) {
            return mixture_times_gaussian(*ma, *gb);
        }
        if (const auto* pb = std::get_if<PointMassReal>(&b)) {
            return {*pb, log_pdf(a, pb->value)};
        }
    }
    if (const auto* pa = std::get_if<PointMassReal>(&a)) {
        if (std::holds_alternative<Gaussian1D>(b) || std::holds_alternative<GaussianMixture1D>(b)) {
            return {*pa, log_pdf(b, pa->value)};
        }
        if (std::holds_alternative<PointMassReal>(b)) {
            throw UnsupportedModelError("product of two continuous point masses is undefined");
        }
    }
    if (const auto* ca = std::get_if<Categorical>(&a)) {
        if (const auto* cb = std::get_if<Categorical>(&b)) {
            auto prod = categorical_product(*ca, *cb);
            return {prod.result, prod.log_z};
        }
        if (const auto* pb = std::get_if<PointMassIndex>(&b)) {
            if (pb->cardinality != ca->size()) {
                throw DimensionError("categorical/point mass size mismatch");
            }
            const double p = ca->probs()[pb->index];
            if (p <= 0.0) {
                throw DegenerateEvidenceError("point mass on zero-probability category");
            }
            return {*pb, std::log(p)};
        }
    }
    if (const auto* pa = std::get_if<PointMassIndex>(&a)) {
        if (std::holds_alternative<Categorical>(b)) {
            return multiply(b, a); // symmetric case above
        }
        if (const auto* pb = std::get_if<PointMassIndex>(&b)) {
            if (pa->cardinality != pb->cardinality) {
                throw DimensionError("point mass cardinality mismatch");
            }
            if (pa->index != pb->index) {
                throw DegenerateEvidenceError("conflicting point mass observations");
            }
            return {*pa, 0.0};
        }
    }
    if (const auto* da = std::get_if<Dirichlet>(&a)) {
        if (const auto* db = std::get_if<Dirichlet>(&b)) {
            auto prod = dirichlet_product(*da, *db);
            return {prod.result, prod.log_z};
        }
    }
    throw UnsupportedModelError(std::string("cannot combine ") + family_name(a) + " with " +
                                family_name(b));
}

} // namespace mixfg
