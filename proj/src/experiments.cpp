#include "mixfg/experiments.hpp"

#include <cmath>
#include <random>
#include <set>
#include <string>
#include <utility>

#include "mixfg/comparison.hpp"
#include "mixfg/distributions.hpp"
#include "mixfg/errors.hpp"
#include "mixfg/graph.hpp"

namespace mixfg {

Method parse_method(const std::string& name) {
    if (name == "bma") {
        return Method::Average;
    }
    if (name == "bms") {
        return Method::Select;
    }
    if (name == "bmc-online") {
        return Method::CombineOnline;
    }
    if (name == "bmc-vmp") {
        return Method::CombineVariational;
    }
    throw IoError("unknown method '" + name + "' (expected bma, bms, bmc-online, or bmc-vmp)");
}

std::string method_name(Method method) {
    switch (method) {
        case Method::Average:
            return "bma";
        case Method::Select:
            return "bms";
        case Method::CombineOnline:
            return "bmc-online";
        case Method::CombineVariational:
            return "bmc-vmp";
    }
    throw NumericError("method_name: bad enum value");
}

namespace {

void check_verification(const VerificationConfig& cfg) {
    if (cfg.weights.size() != cfg.means.size() || cfg.weights.size() < 2) {
        throw DimensionError("verification needs matching weights/means with at least 2 entries");
    }
    if (!(cfg.noise_variance > 0.0) || !(cfg.component_variance > 0.0)) {
        throw NumericError("verification variances must be positive");
    }
    if (!(cfg.alpha > 0.0) || !(cfg.reduce_to > 0.0)) {
        throw NumericError("verification concentrations must be positive");
    }
}

std::vector<std::size_t> effective_checkpoints(const std::vector<std::size_t>& requested,
                                               std::size_t n) {
    std::set<std::size_t> pts;
    for (const std::size_t c : requested) {
        if (c >= 1 && c <= n) {
            pts.insert(c);
        }
    }
    if (n >= 1) {
        pts.insert(n);
    }
    return {pts.begin(), pts.end()};
}

} // namespace

std::vector<double> generate_verification_data(const VerificationConfig& cfg) {
    check_verification(cfg);
    std::mt19937_64 rng(cfg.seed);
    std::discrete_distribution<std::size_t> pick(cfg.weights.begin(), cfg.weights.end());
    std::normal_distribution<double> std_normal(0.0, 1.0);
    const double comp_sd = std::sqrt(cfg.component_variance);
    const double noise_sd = std::sqrt(cfg.noise_variance);
    std::vector<double> y;
    y.reserve(cfg.n);
    for (std::size_t i = 0; i < cfg.n; ++i) {
        const std::size_t k = pick(rng);
        const double s = cfg.means[k] + comp_sd * std_normal(rng);
        y.push_back(s + noise_sd * std_normal(rng));
    }
    return y;
}

std::vector<std::vector<double>> observation_log_evidences(const VerificationConfig& cfg,
                                                           const std::vector<double>& y) {
    check_verification(cfg);
    const std::size_t k = cfg.means.size();
    std::vector<std::vector<double>> rows;
    rows.reserve(y.size());
    for (const double obs : y) {
        FactorGraph g;
        const NodeId selector_prior = g.add_node(PriorNode{Categorical::uniform(k)});
        std::vector<NodeId> components;
        components.reserve(k);
        for (std::size_t j = 0; j < k; ++j) {
            components.push_back(
                g.add_node(PriorNode{Gaussian1D(cfg.means[j], cfg.component_variance)}));
        }
        const NodeId mix = g.add_node(MixtureNode{k});
        const NodeId like = g.add_node(GaussianLikelihood{cfg.noise_variance});
        const EdgeId m_edge = g.add_edge({selector_prior, 0}, {mix, 0}, EdgeKind::discrete(k));
        for (std::size_t j = 0; j < k; ++j) {
            g.add_edge({components[j], 0}, {mix, 2 + j}, EdgeKind::continuous());
        }
        g.add_edge({mix, 1}, {like, 0}, EdgeKind::continuous());
        const EdgeId y_edge = g.add_half_edge({like, 1}, EdgeKind::continuous());
        g.observe(y_edge, obs);
        g.validate();
        const InferenceResult result = run(g, schedule_sweep(g));

        const Message& toward_selector = result.backward[m_edge.value];
        const auto& scores = std::get<Categorical>(toward_selector.body);
        std::vector<double> row(k);
        for (std::size_t j = 0; j < k; ++j) {
            row[j] = toward_selector.log_scale + std::log(scores.probs()[j]);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {

nlohmann::json verification_config_json(const VerificationConfig& cfg, std::size_t n) {
    nlohmann::json j;
    j["experiment"] = "verify";
    j["method"] = method_name(cfg.method);
    j["n"] = n;
    j["noise_variance"] = cfg.noise_variance;
    j["component_variance"] = cfg.component_variance;
    j["weights"] = cfg.weights;
    j["means"] = cfg.means;
    j["seed"] = cfg.seed;
    j["alpha"] = cfg.alpha;
    j["reduce_to"] = cfg.reduce_to;
    return j;
}

} // namespace

ResultTable run_verification_on(const VerificationConfig& cfg, const std::vector<double>& y) {
    check_verification(cfg);
    const std::size_t k = cfg.means.size();
    const std::size_t n = y.size();
    const auto L = observation_log_evidences(cfg, y);
    const auto checkpoints = effective_checkpoints(cfg.checkpoints, n);

    ResultTable table;
    table.columns.push_back("n");
    for (std::size_t j = 0; j < k; ++j) {
        table.columns.push_back("q" + std::to_string(j + 1));
    }
    table.columns.push_back("log_evidence");
    table.columns.push_back("free_energy");
    table.config = verification_config_json(cfg, n);

    std::vector<double> cumulative(k, 0.0);
    CombinationState online = combination_init(std::vector<double>(k, cfg.alpha));
    double predictive = 0.0;
    auto next_checkpoint = checkpoints.begin();

    for (std::size_t i = 0; i < n && next_checkpoint != checkpoints.end(); ++i) {
        if (cfg.method == Method::CombineOnline) {
            predictive += total_log_evidence(L[i], dirichlet_mean(online.posterior));
            combination_step(online, L[i]);
        }
        for (std::size_t j = 0; j < k; ++j) {
            cumulative[j] += L[i][j];
        }
        if (i + 1 != *next_checkpoint) {
            continue;
        }
        ++next_checkpoint;

        std::vector<double> row;
        row.push_back(static_cast<double>(i + 1));
        double log_evidence = 0.0;
        switch (cfg.method) {
            case Method::Average: {
                const Categorical q = model_average(cumulative);
                row.insert(row.end(), q.probs().begin(), q.probs().end());
                log_evidence = total_log_evidence(cumulative);
                break;
            }
            case Method::Select: {
                const PointMassIndex pick = model_select(cumulative);
                for (std::size_t j = 0; j < k; ++j) {
                    row.push_back(j == pick.index ? 1.0 : 0.0);
                }
                log_evidence = std::log(1.0 / static_cast<double>(k)) + cumulative[pick.index];
                break;
            }
            case Method::CombineOnline: {
                const Dirichlet reported =
                    replace_prior(online.posterior, std::vector<double>(k, cfg.alpha),
                                  std::vector<double>(k, cfg.reduce_to));
                const Categorical mean = dirichlet_mean(reported);
                row.insert(row.end(), mean.probs().begin(), mean.probs().end());
                log_evidence = predictive;
                break;
            }
            case Method::CombineVariational: {
                const std::vector<std::vector<double>> prefix(L.begin(), L.begin() + (i + 1));
                const VariationalResult fit =
                    combination_variational(prefix, std::vector<double>(k, cfg.alpha));
                const Categorical mean = dirichlet_mean(fit.q_pi);
                row.insert(row.end(), mean.probs().begin(), mean.probs().end());
                log_evidence = -fit.free_energy_trace.back();
                break;
            }
        }
        row.push_back(log_evidence);
        row.push_back(-log_evidence);
        table.rows.push_back(std::move(row));
    }
    return table;
}

ResultTable run_verification(const VerificationConfig& cfg) {
    return run_verification_on(cfg, generate_verification_data(cfg));
}

// ---------------------------------------------------------------------------
// Voice activity detection

namespace {

void check_vad(const VadConfig& cfg) {
    if (!(std::abs(cfg.rho) < 1.0)) {
        throw NumericError("vad requires |rho| < 1 so the speech process is stationary");
    }
    if (!(cfg.process_variance > 0.0) || !(cfg.silence_variance > 0.0) ||
        !(cfg.observation_variance > 0.0)) {
        throw NumericError("vad variances must be positive");
    }
    if (!(cfg.stay_probability > 0.0) || !(cfg.stay_probability < 1.0)) {
        throw NumericError("vad stay probability must lie strictly inside (0, 1)");
    }
}

nlohmann::json vad_config_json(const VadConfig& cfg, std::size_t n) {
    nlohmann::json j;
    j["experiment"] = "vad";
    j["n"] = n;
    j["rho"] = cfg.rho;
    j["process_variance"] = cfg.process_variance;
    j["silence_variance"] = cfg.silence_variance;
    j["observation_variance"] = cfg.observation_variance;
    j["stay_probability"] = cfg.stay_probability;
    return j;
}

} // namespace

VadData generate_vad_data(const VadConfig& cfg) {
    check_vad(cfg);
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> std_normal(0.0, 1.0);
    const double stationary_sd =
        std::sqrt(cfg.process_variance / (1.0 - cfg.rho * cfg.rho));
    const double process_sd = std::sqrt(cfg.process_variance);
    const double silence_sd = std::sqrt(cfg.silence_variance);
    const double observation_sd = std::sqrt(cfg.observation_variance);

    VadData data;
    bool speech = true;
    for (const std::size_t len : cfg.segments) {
        if (speech) {
            double s = stationary_sd * std_normal(rng);
            for (std::size_t t = 0; t < len; ++t) {
                s = cfg.rho * s + process_sd * std_normal(rng);
                data.signal.push_back(s + observation_sd * std_normal(rng));
                data.labels.push_back(1);
            }
        } else {
            for (std::size_t t = 0; t < len; ++t) {
                data.signal.push_back(silence_sd * std_normal(rng) +
                                      observation_sd * std_normal(rng));
                data.labels.push_back(0);
            }
        }
        speech = !speech;
    }
    return data;
}

ResultTable run_vad_on(const VadConfig& cfg, const std::vector<double>& signal) {
    check_vad(cfg);
    const double stay = cfg.stay_probability;
    const TransitionMatrix T =
        TransitionMatrix::from_rows({{stay, 1.0 - stay}, {1.0 - stay, stay}});

    Gaussian1D belief(0.0, cfg.process_variance / (1.0 - cfg.rho * cfg.rho));
    Categorical state_prior = Categorical::uniform(2);
    double evidence_sum = 0.0;

    ResultTable table;
    table.columns = {"t", "y", "p_speech"};
    table.config = vad_config_json(cfg, signal.size());

    for (std::size_t t = 0; t < signal.size(); ++t) {
        const double y = signal[t];
        FactorGraph g;
        const NodeId speech_prior = g.add_node(PriorNode{belief});
        const NodeId evolve = g.add_node(GaussianAR1{cfg.rho, cfg.process_variance});
        const NodeId speech_like = g.add_node(GaussianLikelihood{cfg.observation_variance});
        const NodeId silence_prior = g.add_node(PriorNode{Gaussian1D(0.0, cfg.silence_variance)});
        const NodeId silence_like = g.add_node(GaussianLikelihood{cfg.observation_variance});
        const NodeId z_prior = g.add_node(PriorNode{state_prior});
        const NodeId z_hop = g.add_node(TransitionNode{T});
        const NodeId mix = g.add_node(MixtureNode{2});

        g.add_edge({speech_prior, 0}, {evolve, 0}, EdgeKind::continuous());
        const EdgeId speech_edge = g.add_edge({evolve, 1}, {speech_like, 0},
                                              EdgeKind::continuous());
        g.add_edge({speech_like, 1}, {mix, 2}, EdgeKind::continuous());
        g.add_edge({silence_prior, 0}, {silence_like, 0}, EdgeKind::continuous());
        g.add_edge({silence_like, 1}, {mix, 3}, EdgeKind::continuous());
        g.add_edge({z_prior, 0}, {z_hop, 0}, EdgeKind::discrete(2));
        const EdgeId z_edge = g.add_edge({z_hop, 1}, {mix, 0}, EdgeKind::discrete(2));
        const EdgeId y_edge = g.add_half_edge({mix, 1}, EdgeKind::continuous());
        g.observe(y_edge, y);
        g.validate();

        const InferenceResult result = run(g, schedule_sweep(g));

        const auto& q_z = std::get<Categorical>(result.marginals[z_edge.value]);
        const double p_speech = q_z.probs()[0];
        const auto& speech_posterior = std::get<Gaussian1D>(result.marginals[speech_edge.value]);
        const auto& speech_prediction =
            std::get<Gaussian1D>(result.forward[speech_edge.value].body);

        // Collapse the per-state speech beliefs to one Gaussian for the next
        // step, and carry the state posterior forward as the next prior.
        belief = moment_match(GaussianMixture1D({p_speech, 1.0 - p_speech},
                                                {speech_posterior, speech_prediction}));
        state_prior = q_z;
        evidence_sum += result.log_evidence;

        table.rows.push_back({static_cast<double>(t + 1), y, p_speech});
    }

    table.totals.emplace_back("log_evidence", evidence_sum);
    table.totals.emplace_back("free_energy", -evidence_sum);
    return table;
}

ResultTable run_vad(const VadConfig& cfg) {
    const VadData data = generate_vad_data(cfg);
    ResultTable table = run_vad_on(cfg, data.signal);
    table.config["source"] = "synthetic";
    table.config["segments"] = cfg.segments;
    table.config["seed"] = cfg.seed;
    return table;
}

} // namespace mixfg
