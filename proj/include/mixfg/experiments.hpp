#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mixfg/io.hpp"

namespace mixfg {

enum class Method { Average, Select, CombineOnline, CombineVariational };

Method parse_method(const std::string& name); // bma | bms | bmc-online | bmc-vmp
std::string method_name(Method method);

// Model-comparison study on synthetic draws from a known Gaussian mixture.
// Candidate model k says the data come solely from component k; the engine
// scores each candidate per observation and the chosen method turns those
// scores into posteriors over the candidates.
struct VerificationConfig {
    std::size_t n = 1000;
    double noise_variance = 5.0;
    std::vector<double> weights{0.2, 0.5, 0.3};
    std::vector<double> means{-3.0, 0.0, 4.0};
    double component_variance = 1.0;
    Method method = Method::Average;
    std::uint64_t seed = 1;
    double alpha = 10.0;     // online combination: prior concentration per component
    double reduce_to = 1.0;  // online combination: prior is replaced by this at report time
    std::vector<std::size_t> checkpoints{1, 5, 10, 100, 1000};
};

std::vector<double> generate_verification_data(const VerificationConfig& cfg);

// One row per observation, one column per candidate model: log p(y_n | m = k),
// each read off a single-observation mixture graph.
std::vector<std::vector<double>> observation_log_evidences(const VerificationConfig& cfg,
                                                           const std::vector<double>& y);

// Columns: n, q1..qK, log_evidence, free_energy; one row per checkpoint.
ResultTable run_verification(const VerificationConfig& cfg);
ResultTable run_verification_on(const VerificationConfig& cfg, const std::vector<double>& y);

// Voice activity detection: a two-state switching model (speech follows an
// AR(1) process, silence is near-zero), filtered forward one sample at a time
// with a single-Gaussian collapse of the speech belief after each step.
struct VadConfig {
    double rho = 0.95;
    double process_variance = 1.0;
    double silence_variance = 0.01;
    double observation_variance = 0.5;
    double stay_probability = 0.99999;
    std::vector<std::size_t> segments; // alternating segment lengths, speech first
    std::uint64_t seed = 1;
};

struct VadData {
    std::vector<double> signal;
    std::vector<int> labels; // 1 = speech, 0 = silence
};

VadData generate_vad_data(const VadConfig& cfg);

// Columns: t, y, p_speech; totals: log_evidence, free_energy.
ResultTable run_vad(const VadConfig& cfg);
ResultTable run_vad_on(const VadConfig& cfg, const std::vector<double>& signal);

} // namespace mixfg
