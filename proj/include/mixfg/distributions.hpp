#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include "mixfg/errors.hpp"

namespace mixfg {

// Smallest admissible Gaussian variance. Anything below is rejected, never clamped.
inline constexpr double kVarianceFloor = 1e-12;

// Largest tolerated deviation of a probability vector from sum 1 before it is
// treated as an internal consistency error rather than rounding noise.
inline constexpr double kProbSumTolerance = 1e-9;

class Gaussian1D {
public:
    Gaussian1D(double mean, double variance);
    double mean() const noexcept { return mean_; }
    double variance() const noexcept { return variance_; }

private:
    double mean_;
    double variance_;
};

// Normalized probability vector over K categories (0-based indices).
class Categorical {
public:
    explicit Categorical(std::vector<double> probs);
    static Categorical uniform(std::size_t k);
    std::size_t size() const noexcept { return p_.size(); }
    const std::vector<double>& probs() const noexcept { return p_; }
    double operator[](std::size_t i) const { return p_.at(i); }

private:
    std::vector<double> p_;
};

class Dirichlet {
public:
    explicit Dirichlet(std::vector<double> concentration);
    std::size_t size() const noexcept { return alpha_.size(); }
    const std::vector<double>& concentration() const noexcept { return alpha_; }

private:
    std::vector<double> alpha_;
};

struct PointMassReal {
    explicit PointMassReal(double value);
    double value;
};

// Degenerate distribution on one of K categories.
struct PointMassIndex {
    PointMassIndex(std::size_t index, std::size_t cardinality);
    std::size_t index;
    std::size_t cardinality;
};

class GaussianMixture1D {
public:
    GaussianMixture1D(std::vector<double> weights, std::vector<Gaussian1D> components);
    std::size_t size() const noexcept { return weights_.size(); }
    const std::vector<double>& weights() const noexcept { return weights_; }
    const std::vector<Gaussian1D>& components() const noexcept { return components_; }

private:
    std::vector<double> weights_;
    std::vector<Gaussian1D> components_;
};

// Improper constant-one function. Used as the message arriving from a free
// (unbound, unobserved) continuous edge end; it carries no information.
struct Flat {};

using Distribution = std::variant<Flat, Gaussian1D, Categorical, Dirichlet,
                                  PointMassReal, PointMassIndex, GaussianMixture1D>;

// A message is a normalized body plus a log scale factor, so that the raw
// sum-product message equals exp(log_scale) * body. Keeping the scale in log
// domain is what lets evidence accumulate across hundreds of factors without
// underflow.
struct Message {
    double log_scale = 0.0;
    Distribution body = Flat{};
};

const char* family_name(const Distribution& d) noexcept;
bool is_flat(const Distribution& d) noexcept;

// ---------------------------------------------------------------------------
// Scalar operations

double gaussian_log_pdf(double x, const Gaussian1D& g) noexcept;

// Density of a continuous distribution at x (Flat evaluates to 1).
double log_pdf(const Distribution& d, double x);

// log(sum_i exp(w_i)) with max subtraction; -inf for an all--inf input.
double log_sum_exp(const std::vector<double>& log_weights);

struct GaussianProduct {
    Gaussian1D result;
    double log_z; // log integral of the unnormalized product of densities
};
GaussianProduct gaussian_product(const Gaussian1D& a, const Gaussian1D& b);

struct CategoricalProduct {
    Categorical result;
    double log_z;
};
CategoricalProduct categorical_product(const Categorical& a, const Categorical& b);

struct NormalizedLogWeights {
    Categorical result;
    double log_z;
};
// Exponentiates and normalizes a vector of log weights.
NormalizedLogWeights normalize_log_weights(const std::vector<double>& log_weights);

Categorical dirichlet_mean(const Dirichlet& d);

// E[ln pi_k] under Dirichlet(alpha): digamma(alpha_k) - digamma(sum alpha).
std::vector<double> dirichlet_expected_log(const Dirichlet& d);

// Collapses a mixture to the Gaussian with the same mean and variance
// (law of total variance).
Gaussian1D moment_match(const GaussianMixture1D& m);

// ---------------------------------------------------------------------------
// Generic product of two message bodies.
//
// Returns the normalized product and log of the product integral, i.e. the
// pieces needed for marginals and evidence. Throws UnsupportedModelError for
// family pairs without a closed form and DegenerateEvidenceError when the
// product has zero mass.
struct NormalizedProduct {
    Distribution body;
    double log_norm;
};
NormalizedProduct multiply(const Distribution& a, const Distribution& b);

} // namespace mixfg
