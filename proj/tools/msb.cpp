// msb: Markovian stick-breaking priors on finite category spaces.
//
// Subcommands: validate, smooth, moments, sample, verify, figure.
// Bin indices are 1-based everywhere.  Exit codes: 0 success, 1 validation
// or parse error, 2 numerical-consistency failure, 3 statistical-check
// failure.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "msb/csv.hpp"
#include "msb/errors.hpp"
#include "msb/generator.hpp"
#include "msb/json_io.hpp"
#include "msb/moments.hpp"
#include "msb/posterior.hpp"
#include "msb/presets.hpp"
#include "msb/query_parse.hpp"
#include "msb/sampler.hpp"
#include "msb/svg.hpp"
#include "msb/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitNumeric = 2;
constexpr int kExitStatistical = 3;

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw msb::parse_error("cannot open output file '" + path + "'");
    out << content;
}

std::optional<int> resolve_given_t1(const std::string& token, const msb::Generator& gen) {
    if (token.empty()) return std::nullopt;
    return msb::detail::resolve_category(token, gen);
}

int run_validate(const std::string& generator_path) {
    const msb::Generator gen = msb::load_generator_file(generator_path);
    std::cout << "dimension: " << gen.dim() << "\n";
    std::cout << "theta_G: " << msb::format_double(gen.theta_g) << "\n";
    std::cout << "irreducible: yes\n";
    std::cout << "mu:";
    for (double v : gen.mu) std::cout << " " << msb::format_double(v);
    std::cout << "\nvalid generator\n";
    return kExitOk;
}

int run_smooth(const std::string& generator_path, const std::string& counts_path,
               const std::string& given_t1, const std::string& out_path, const std::string& svg_path) {
    const msb::Generator gen = msb::load_generator_file(generator_path);
    std::ifstream counts_file(counts_path);
    if (!counts_file) throw msb::parse_error("cannot open counts file '" + counts_path + "'");
    const msb::CountVector counts = msb::parse_counts_csv(counts_file, gen);

    const std::optional<int> t1 = resolve_given_t1(given_t1, gen);
    const msb::Vector pmf =
        t1 ? msb::posterior_mean_pmf_given_t1(gen, counts, *t1) : msb::posterior_mean_pmf(gen, counts);
    double sum = 0.0;
    for (double p : pmf) sum += p;
    if (std::fabs(sum - 1.0) > 1e-10)
        throw msb::numeric_error("posterior pmf failed normalization: sum = " + msb::format_double(sum));

    write_file(out_path, msb::emit_smooth_csv(gen, counts, pmf));
    if (!svg_path.empty()) {
        std::vector<std::string> labels;
        for (int x = 0; x < gen.dim(); ++x) labels.push_back(msb::category_name(gen, x));
        write_file(svg_path, msb::svg_bar_chart(pmf, labels, "posterior mean pmf"));
    }
    std::cout << "wrote " << out_path << "\n";
    return kExitOk;
}

int run_moments(const std::string& generator_path, const std::string& query_text,
                const std::string& given_t1, const std::string& method) {
    const msb::Generator gen = msb::load_generator_file(generator_path);
    const msb::MomentQuery query = msb::parse_moment_query(query_text, gen);
    const std::optional<int> t1 = resolve_given_t1(given_t1, gen);

    double value = 0.0;
    if (method == "dp") {
        value = t1 ? msb::moment_conditional(gen, query, *t1) : msb::moment_unconditional(gen, query);
    } else if (method == "brute") {
        value = msb::moment_bruteforce(gen, query, t1);
    } else if (method.rfind("theta:", 0) == 0) {
        double theta = 0.0;
        try {
            theta = std::stod(method.substr(6));
        } catch (const std::exception&) {
            throw msb::parse_error("--method theta:VALUE needs a numeric VALUE");
        }
        value = t1 ? msb::moment_via_theta_recursion(gen, theta, query, *t1)
                   : msb::moment_via_theta_recursion_unconditional(gen, theta, query);
    } else {
        throw msb::parse_error("--method must be dp, brute, or theta:VALUE");
    }
    std::cout << msb::format_double(value) << "\n";
    return kExitOk;
}

int run_sample(const std::string& generator_path, long long n_measures, double eps,
               std::uint64_t seed, double theta_flag, bool theta_given, long long data_draws,
               const std::string& out_path) {
    const msb::Generator gen = msb::load_generator_file(generator_path);
    const double theta = theta_given ? theta_flag : gen.theta_g;
    if (n_measures < 1) throw msb::validation_error("--n must be at least 1");

    msb::RngStream rng(seed);
    std::vector<msb::TruncatedMeasure> measures;
    measures.reserve(n_measures);
    for (long long i = 0; i < n_measures; ++i) {
        msb::RngStream replicate = rng.substream(static_cast<std::uint64_t>(i));
        measures.push_back(msb::sample_msb(gen, theta, eps, replicate));
    }

    std::string csv;
    if (data_draws > 0) {
        std::vector<std::vector<int>> draws;
        draws.reserve(measures.size());
        for (std::size_t i = 0; i < measures.size(); ++i) {
            msb::RngStream replicate = rng.substream(1'000'000'000ULL + i);
            draws.push_back(msb::sample_data(measures[i], data_draws, replicate));
        }
        csv = msb::emit_data_csv(draws, gen);
    } else {
        csv = msb::emit_atoms_csv(measures, gen);
    }
    if (out_path.empty())
        std::cout << csv;
    else {
        write_file(out_path, csv);
        std::cout << "wrote " << out_path << "\n";
    }
    return kExitOk;
}

int run_verify(const std::string& generator_path, long long samples, std::uint64_t seed) {
    const msb::Generator gen = msb::load_generator_file(generator_path);
    if (samples < msb::kMinVerifySamples)
        std::cout << "warning: fewer than " << msb::kMinVerifySamples
                  << " samples; statistical checks are skipped\n";
    const msb::VerifyReport report = msb::run_verification(gen, samples, seed);
    for (const msb::CheckResult& check : report.checks) {
        if (check.skipped) {
            std::cout << "SKIP " << check.name << ": " << check.note << "\n";
            continue;
        }
        std::cout << (check.passed ? "PASS " : "FAIL ") << check.name
                  << ": observed=" << msb::format_double(check.observed)
                  << " tolerance=" << msb::format_double(check.tolerance);
        if (!check.note.empty()) std::cout << " (" << check.note << ")";
        std::cout << "\n";
    }
    if (report.exact_failure()) return kExitNumeric;
    if (report.statistical_failure()) return kExitStatistical;
    return kExitOk;
}

int run_figure(const std::string& preset_name, const std::string& out_dir) {
    const msb::FigurePreset preset = msb::figure_preset(preset_name);
    std::filesystem::create_directories(out_dir);
    const msb::CountVector counts = preset.counts();
    for (const auto& [label, spec] : preset.generators) {
        const msb::Generator gen = msb::build(spec);
        const msb::Vector pmf = msb::posterior_mean_pmf(gen, counts);
        double sum = 0.0;
        for (double p : pmf) sum += p;
        if (std::fabs(sum - 1.0) > 1e-10)
            throw msb::numeric_error("posterior pmf failed normalization for " + label);
        const std::string base = out_dir + "/" + preset.name + "_" + label;
        write_file(base + ".csv", msb::emit_smooth_csv(gen, counts, pmf));
        std::vector<std::string> bin_labels;
        for (int x = 0; x < gen.dim(); ++x) bin_labels.push_back(std::to_string(x + 1));
        write_file(base + ".svg",
                   msb::svg_bar_chart(pmf, bin_labels, preset.name + " posterior, " + label));
        std::cout << "wrote " << base << ".csv and .svg\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Markovian stick-breaking priors on finite category spaces: exact moments,\n"
        "posterior histogram smoothing, sampling, and self-verification.\n"
        "Categories/bins are 1-based in files, queries, and reports."};
    app.require_subcommand(1);
    int exit_code = kExitOk;

    // validate
    auto* validate = app.add_subcommand("validate", "check a generator spec and report d, theta_G, mu");
    std::string validate_generator;
    validate->add_option("--generator", validate_generator, "generator spec (JSON)")->required();
    validate->callback([&] { exit_code = run_validate(validate_generator); });

    // smooth
    auto* smooth = app.add_subcommand("smooth", "posterior-mean histogram smoothing of a counts file");
    std::string smooth_generator, smooth_counts, smooth_given_t1, smooth_out, smooth_svg;
    smooth->add_option("--generator", smooth_generator, "generator spec (JSON)")->required();
    smooth->add_option("--counts", smooth_counts, "counts CSV with header 'category,count'")->required();
    smooth->add_option("--given-t1", smooth_given_t1, "condition on the first chain state (1-based)");
    smooth->add_option("--out", smooth_out, "output CSV path")->required();
    smooth->add_option("--svg", smooth_svg, "also write an SVG bar chart");
    smooth->callback([&] {
        exit_code = run_smooth(smooth_generator, smooth_counts, smooth_given_t1, smooth_out, smooth_svg);
    });

    // moments
    auto* moments = app.add_subcommand("moments", "evaluate a prior moment E[prod nu(A_j)^k_j]");
    std::string moments_generator, moments_query, moments_given_t1, moments_method = "dp";
    moments->add_option("--generator", moments_generator, "generator spec (JSON)")->required();
    moments
        ->add_option("--query", moments_query,
                     "comma-separated SET:EXPONENT items; SET is an index, a-b range, or a+b list")
        ->required();
    moments->add_option("--given-t1", moments_given_t1, "condition on the first chain state (1-based)");
    moments->add_option("--method", moments_method, "dp (default), brute, or theta:VALUE");
    moments->callback([&] {
        exit_code = run_moments(moments_generator, moments_query, moments_given_t1, moments_method);
    });

    // sample
    auto* sample = app.add_subcommand("sample", "draw truncated measures (or data) deterministically");
    std::string sample_generator, sample_out;
    long long sample_n = 1, sample_data_draws = 0;
    double sample_eps = msb::kDefaultTruncationEps, sample_theta = 0.0;
    std::uint64_t sample_seed = 0;
    bool sample_theta_given = false;
    sample->add_option("--generator", sample_generator, "generator spec (JSON)")->required();
    sample->add_option("--n", sample_n, "number of measures to draw")->required();
    sample->add_option("--eps", sample_eps, "truncation threshold (default 1e-12)");
    sample->add_option("--seed", sample_seed, "PRNG seed (required for reproducibility)")->required();
    auto* theta_opt = sample->add_option("--theta", sample_theta, "stick-breaking theta (default theta_G)");
    sample->add_option("--data", sample_data_draws, "emit this many data draws per measure instead of atoms");
    sample->add_option("--out", sample_out, "output CSV path (default stdout)");
    sample->callback([&] {
        sample_theta_given = theta_opt->count() > 0;
        exit_code = run_sample(sample_generator, sample_n, sample_eps, sample_seed, sample_theta,
                               sample_theta_given, sample_data_draws, sample_out);
    });

    // verify
    auto* verify = app.add_subcommand("verify", "cross-check the computation paths on this generator");
    std::string verify_generator;
    long long verify_samples = 100000;
    std::uint64_t verify_seed = 0;
    verify->add_option("--generator", verify_generator, "generator spec (JSON)")->required();
    verify->add_option("--samples", verify_samples, "Monte Carlo sample count (default 100000)");
    verify->add_option("--seed", verify_seed, "PRNG seed")->required();
    verify->callback([&] { exit_code = run_verify(verify_generator, verify_samples, verify_seed); });

    // figure
    auto* figure = app.add_subcommand("figure", "emit the built-in posterior comparison presets");
    std::string figure_preset_name, figure_out;
    figure->add_option("--preset", figure_preset_name, "normal, gamma, or wrapped")->required();
    figure->add_option("--out", figure_out, "output directory")->required();
    figure->callback([&] { exit_code = run_figure(figure_preset_name, figure_out); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const msb::parse_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const msb::validation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const msb::numeric_error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumeric;
    }
    return exit_code;
}
