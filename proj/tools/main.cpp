#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mixfg/errors.hpp"
#include "mixfg/experiments.hpp"
#include "mixfg/io.hpp"

namespace {

std::vector<std::size_t> parse_segments(const std::string& spec) {
    std::vector<std::size_t> segments;
    std::size_t begin = 0;
    while (begin <= spec.size()) {
        const std::size_t end = spec.find(',', begin);
        const std::string part =
            spec.substr(begin, end == std::string::npos ? std::string::npos : end - begin);
        try {
            std::size_t used = 0;
            const unsigned long v = std::stoul(part, &used);
            if (used != part.size() || v == 0) {
                throw std::invalid_argument("not a positive integer");
            }
            segments.push_back(v);
        } catch (const std::exception&) {
            throw mixfg::IoError("bad segment length '" + part + "' in '" + spec + "'");
        }
        if (end == std::string::npos) {
            break;
        }
        begin = end + 1;
    }
    return segments;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact message passing with scale factors on acyclic factor graphs"};
    app.require_subcommand(1);

    std::string method_arg;
    std::size_t n = 1000;
    double noise_var = 5.0;
    std::uint64_t seed = 1;
    double alpha = 10.0;
    double reduce_to = 1.0;
    std::string verify_out;
    std::string verify_format = "csv";

    CLI::App* verify =
        app.add_subcommand("verify", "Compare candidate models on synthetic mixture data");
    verify->add_option("--method", method_arg, "bma, bms, bmc-online, or bmc-vmp")
        ->required()
        ->check(CLI::IsMember({"bma", "bms", "bmc-online", "bmc-vmp"}));
    verify->add_option("--n", n, "number of observations")->required()->check(CLI::PositiveNumber);
    verify->add_option("--noise-var", noise_var, "observation noise variance")
        ->required()
        ->check(CLI::PositiveNumber);
    verify->add_option("--seed", seed, "PRNG seed")->required();
    verify->add_option("--alpha", alpha,
                       "prior concentration per component for model combination "
                       "(default 10; 1 for bmc-vmp)");
    verify->add_option("--reduce-to", reduce_to,
                       "bmc-online reports weights under this replacement prior (default 1)");
    verify->add_option("--out", verify_out, "output file")->required();
    verify->add_option("--format", verify_format, "csv or json (default csv)")
        ->check(CLI::IsMember({"csv", "json"}));

    std::string input_path;
    std::string segment_spec;
    std::uint64_t vad_seed = 1;
    double rho = 0.95;
    double process_var = 1.0;
    std::string vad_out;
    std::string vad_format = "csv";

    CLI::App* vad =
        app.add_subcommand("vad", "Voice activity detection by switching-model filtering");
    CLI::Option* input_opt =
        vad->add_option("--input", input_path, "signal file, one sample per line");
    CLI::Option* synth_opt = vad->add_option(
        "--synthetic", segment_spec,
        "generate a signal from comma-separated segment lengths, speech first");
    input_opt->excludes(synth_opt);
    synth_opt->excludes(input_opt);
    vad->add_option("--seed", vad_seed, "PRNG seed for --synthetic (default 1)");
    vad->add_option("--rho", rho, "speech AR coefficient (project-chosen default 0.95)");
    vad->add_option("--process-var", process_var,
                    "speech innovation variance (project-chosen default 1)");
    vad->add_option("--out", vad_out, "output file")->required();
    vad->add_option("--format", vad_format, "csv or json (default csv)")
        ->check(CLI::IsMember({"csv", "json"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (verify->parsed()) {
            mixfg::VerificationConfig cfg;
            cfg.method = mixfg::parse_method(method_arg);
            cfg.n = n;
            cfg.noise_variance = noise_var;
            cfg.seed = seed;
            if (verify->count("--alpha") == 0 &&
                cfg.method == mixfg::Method::CombineVariational) {
                alpha = 1.0;
            }
            cfg.alpha = alpha;
            cfg.reduce_to = reduce_to;
            const mixfg::ResultTable table = mixfg::run_verification(cfg);
            mixfg::write_results(table, verify_out, mixfg::parse_format(verify_format));
            return 0;
        }

        if (input_opt->count() == 0 && synth_opt->count() == 0) {
            std::fprintf(stderr, "vad: pass either --input or --synthetic\n");
            return 2;
        }
        mixfg::VadConfig cfg;
        cfg.rho = rho;
        cfg.process_variance = process_var;
        cfg.seed = vad_seed;
        mixfg::ResultTable table;
        if (synth_opt->count() > 0) {
            try {
                cfg.segments = parse_segments(segment_spec);
            } catch (const mixfg::IoError& e) {
                std::fprintf(stderr, "vad: %s\n", e.what());
                return 2;
            }
            table = mixfg::run_vad(cfg);
        } else {
            table = mixfg::run_vad_on(cfg, mixfg::read_signal(input_path));
            table.config["source"] = "file";
        }
        mixfg::write_results(table, vad_out, mixfg::parse_format(vad_format));
        return 0;
    } catch (const mixfg::IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return 4;
    } catch (const mixfg::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
