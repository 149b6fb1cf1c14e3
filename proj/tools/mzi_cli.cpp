// Command-line front end. Every subcommand is resolved into a JSON config,
// validated, written next to its outputs, then executed; `rerun` replays a
// written config.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mzi/analysis.hpp"
#include "mzi/annealer.hpp"
#include "mzi/estimation.hpp"
#include "mzi/format.hpp"
#include "mzi/parallel.hpp"
#include "mzi/states.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace mzi;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 1;
constexpr const char* kOutputDirEnv = "MZI_OUTPUT_DIR";

// Bad flags or config values; reported with exit code 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string default_output_dir() {
    const char* env = std::getenv(kOutputDirEnv);
    return env && *env ? env : ".";
}

template <typename T>
T get(const json& config, const char* key) {
    if (!config.contains(key)) throw UsageError(std::string("config is missing '") + key + "'");
    try {
        return config.at(key).get<T>();
    } catch (const json::exception&) {
        throw UsageError(std::string("config field '") + key + "' has the wrong type");
    }
}

void require(bool ok, const std::string& message) {
    if (!ok) throw UsageError(message);
}

// Validation failures raised by library constructors count as usage errors.
template <typename F>
auto validated(F&& build) {
    try {
        return build();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    } catch (const std::out_of_range& e) {
        throw UsageError(e.what());
    }
}

template <typename F>
void write_file(const fs::path& path, F&& write) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write(out);
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_config(const json& config, const fs::path& dir) {
    fs::create_directories(dir);
    write_file(dir / (get<std::string>(config, "command") + "_config.json"),
               [&](std::ostream& out) { out << config.dump(2) << '\n'; });
}

fs::path output_dir(const json& config) { return get<std::string>(config, "out_dir"); }

StateVector state_from(const json& config) {
    const auto family = get<std::string>(config, "state");
    const int n = get<int>(config, "n");
    return validated([&] { return build_family(parse_family(family), n); });
}

// ---- fisher

int run_fisher(const json& config) {
    const StateVector state = state_from(config);
    const double theta = get<double>(config, "theta");
    require(std::isfinite(theta), "theta must be finite");
    fs::path out = config.contains("out") && !config.at("out").is_null() ? fs::path(get<std::string>(config, "out"))
                                                                          : output_dir(config) / "fisher.json";
    write_config(config, out.has_parent_path() ? out.parent_path() : fs::path("."));

    const FisherReport report = fisher_information(state, theta);
    std::cout << "theta " << format_double(report.theta) << '\n'
              << "F " << format_double(report.fisher) << '\n'
              << "sigma " << format_double(report.sigma) << '\n'
              << "degenerate_terms " << report.degenerate_terms << '\n';
    write_file(out, [&](std::ostream& out) { out << fisher_report_json(report) << '\n'; });
    return 0;
}

// ---- likelihood

int run_likelihood(const json& config) {
    const StateVector state = state_from(config);
    const double theta = get<double>(config, "theta");
    const double m_count = get<double>(config, "m_count");
    const int grid = get<int>(config, "grid");
    require(std::isfinite(theta), "theta must be finite");
    require(m_count >= 0.0 && std::isfinite(m_count), "m-count must be >= 0");
    require(grid == 0 || grid >= 2, "grid must be 0 (default) or >= 2");
    const fs::path dir = output_dir(config);
    write_config(config, dir);

    const auto profile = likelihood_profile(state, theta, m_count, static_cast<std::size_t>(grid));
    write_file(dir / "likelihood.csv", [&](std::ostream& out) { write_profile_csv(out, profile); });
    std::cout << "argmax " << format_double(profile_argmax(profile)) << '\n';
    return 0;
}

// ---- anneal

template <typename E>
E parse_enum(const std::string& text, const std::map<std::string, E>& names, const char* what) {
    const auto it = names.find(text);
    if (it == names.end()) throw UsageError(std::string("unknown ") + what + " '" + text + "'");
    return it->second;
}

const std::map<std::string, Proposal> kProposals{{"hypersphere", Proposal::hypersphere},
                                                 {"multiplicative", Proposal::multiplicative}};
const std::map<std::string, Field> kFields{{"real", Field::real}, {"complex", Field::complex}};
const std::map<std::string, Symmetry> kSymmetries{
    {"none", Symmetry::none}, {"symmetric", Symmetry::symmetric}, {"antisymmetric", Symmetry::antisymmetric}};

int run_anneal(const json& config) {
    AnnealerConfig ac;
    ac.particles = get<int>(config, "n");
    ac.population = get<int>(config, "population");
    ac.proposal = parse_enum(get<std::string>(config, "proposal"), kProposals, "proposal");
    ac.field = parse_enum(get<std::string>(config, "field"), kFields, "field");
    ac.symmetry = parse_enum(get<std::string>(config, "symmetry"), kSymmetries, "symmetry");
    ac.seed = get<std::uint64_t>(config, "seed");
    ac.max_iterations = get<int>(config, "max_iter");
    ac.theta = get<double>(config, "theta");
    validated([&] {
        ac.validate();
        return 0;
    });
    const fs::path dir = output_dir(config);
    write_config(config, dir);

    const AnnealResult result = run_annealer(ac);
    write_file(dir / "anneal_trace.csv", [&](std::ostream& out) { write_trace_csv(out, result.trace); });
    write_file(dir / "best_state.txt", [&](std::ostream& out) { write_state(out, result.best.vector); });
    std::cout << "iterations " << result.trace.records.size() << '\n'
              << "best_energy " << format_double(result.best.energy) << '\n';
    return 0;
}

// ---- scale

std::vector<int> n_list_from(const json& config) {
    const auto list = get<std::vector<int>>(config, "n_list");
    require(!list.empty(), "n-list must not be empty");
    return list;
}

int run_scale(const json& config) {
    const auto family = validated([&] { return parse_family(get<std::string>(config, "family")); });
    const auto metric = get<std::string>(config, "metric");
    require(metric == "fisher" || metric == "error-prop", "metric must be 'fisher' or 'error-prop'");
    const auto ns = n_list_from(config);
    const double theta = get<double>(config, "theta");
    require(std::isfinite(theta), "theta must be finite");
    require(ns.size() >= 2, "n-list needs at least two entries to fit");
    for (std::size_t i = 0; i < ns.size(); ++i) {
        require(i == 0 || ns[i] > ns[i - 1], "n-list must be strictly increasing");
        validated([&] { return build_family(family, ns[i]); });
    }
    const fs::path dir = output_dir(config);
    write_config(config, dir);

    const ScalingFit fit = metric == "fisher" ? fit_power_law(sweep_fisher(family, ns, theta))
                                              : sweep_error_propagation(family, ns);
    write_file(dir / "sweep.csv", [&](std::ostream& out) { write_sweep_csv(out, fit.points); });
    write_file(dir / "fit.txt", [&](std::ostream& out) { write_fit_summary(out, fit); });
    write_fit_summary(std::cout, fit);
    return 0;
}

// ---- engineer

int run_engineer(const json& config) {
    const int n = get<int>(config, "n");
    const StateVector state = validated([&] { return engineer_gaussian(n); });
    std::vector<int> sweep;
    if (config.contains("sweep") && !config.at("sweep").is_null()) {
        sweep = get<std::vector<int>>(config, "sweep");
        require(sweep.size() >= 2, "sweep needs at least two particle numbers");
        for (std::size_t i = 0; i < sweep.size(); ++i) {
            require(i == 0 || sweep[i] > sweep[i - 1], "sweep must be strictly increasing");
            require(sweep[i] >= 2 && sweep[i] % 2 == 0, "sweep particle numbers must be even and >= 2");
        }
    }
    const fs::path dir = output_dir(config);
    write_config(config, dir);

    write_file(dir / "engineered_state.txt", [&](std::ostream& out) { write_state(out, state); });
    if (!sweep.empty()) {
        const ScalingFit fit = sweep_error_propagation(parse_family("engineered"), sweep);
        write_file(dir / "engineered_sweep.csv", [&](std::ostream& out) { write_sweep_csv(out, fit.points); });
        write_file(dir / "engineered_fit.txt", [&](std::ostream& out) { write_fit_summary(out, fit); });
        write_fit_summary(std::cout, fit);
    }
    return 0;
}

// ---- simulate

int run_simulate(const json& config) {
    const StateVector state = state_from(config);
    const double theta = get<double>(config, "theta");
    const int m_count = get<int>(config, "m_count");
    const auto seed = get<std::uint64_t>(config, "seed");
    require(std::isfinite(theta), "theta must be finite");
    require(m_count >= 0, "m-count must be >= 0");
    const fs::path dir = output_dir(config);
    write_config(config, dir);

    const MeasurementRecord record = sample_outcomes(state, theta, m_count, seed);
    const LikelihoodProfile posterior = posterior_from_outcomes(state, record);

    std::vector<long> counts(static_cast<std::size_t>(state.dim()), 0);
    for (double m : record.outcomes) ++counts[index_of(state.particles(), m)];
    write_file(dir / "outcomes.csv", [&](std::ostream& out) {
        out << "m,count\n";
        for (int i = 0; i < state.dim(); ++i) {
            out << format_double(projection_of(state.particles(), i)) << ',' << counts[static_cast<std::size_t>(i)]
                << '\n';
        }
    });
    write_file(dir / "posterior.csv", [&](std::ostream& out) { write_profile_csv(out, posterior); });

    // Symmetric states give several equally likely estimates; report them all.
    const auto maxima = profile_maxima(posterior, 1e-6);
    const double estimate = profile_argmax(posterior);
    const double sd = std::sqrt(profile_variance(profile_basin(posterior, estimate)));
    json summary;
    summary["theta"] = theta;
    summary["m_count"] = m_count;
    summary["estimate"] = estimate;
    summary["posterior_sd"] = sd;
    summary["equivalent_estimates"] = maxima;
    write_file(dir / "estimate.json", [&](std::ostream& out) { out << summary.dump(2) << '\n'; });
    std::cout << "estimate " << format_double(estimate) << '\n' << "posterior_sd " << format_double(sd) << '\n';
    return 0;
}

int dispatch(const json& config) {
    if (config.contains("threads")) {
        const int threads = get<int>(config, "threads");
        require(threads >= 0, "threads must be >= 0");
        if (threads > 0) set_max_threads(static_cast<unsigned>(threads));
    }
    const auto command = get<std::string>(config, "command");
    if (command == "fisher") return run_fisher(config);
    if (command == "likelihood") return run_likelihood(config);
    if (command == "anneal") return run_anneal(config);
    if (command == "scale") return run_scale(config);
    if (command == "engineer") return run_engineer(config);
    if (command == "simulate") return run_simulate(config);
    throw UsageError("unknown command '" + command + "'");
}

std::vector<int> parse_n_list(const std::string& text) {
    std::vector<int> list;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (item.empty()) continue;
        const double value = validated([&] { return parse_double(item); });
        require(value == std::floor(value) && value >= 1 && value <= 1e6, "bad particle number '" + item + "'");
        list.push_back(static_cast<int>(value));
    }
    return list;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fixed-N Mach-Zehnder interferometer: Fisher information, Bayesian phase estimation, "
                 "state annealing and scaling analysis"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "Worker thread cap (0 = hardware concurrency)")->check(CLI::NonNegativeNumber);

    std::string out_dir = default_output_dir();
    auto add_out_dir = [&](CLI::App* sub) {
        sub->add_option("--out-dir", out_dir,
                        std::string("Output directory (default $") + kOutputDirEnv + " or the working directory)");
    };

    json config;

    // fisher
    std::string state = "twin_fock";
    int n = 0;
    double theta = 0.0;
    std::string out;
    auto* fisher = app.add_subcommand("fisher", "Fisher information and 1/sqrt(F) for one state");
    fisher->add_option("--state", state, "State family, e.g. gaussian:sigma=1.7")->capture_default_str();
    fisher->add_option("--n", n, "Particle number")->required();
    fisher->add_option("--theta", theta, "Operating phase")->capture_default_str();
    fisher->add_option("--out", out, "JSON report path (default <out-dir>/fisher.json)");
    add_out_dir(fisher);

    // likelihood
    double m_count = 1.0;
    int grid = 0;
    auto* likelihood = app.add_subcommand("likelihood", "Likelihood profile P(phi | theta) for M measurements");
    likelihood->add_option("--state", state, "State family")->capture_default_str();
    likelihood->add_option("--n", n, "Particle number")->required();
    likelihood->add_option("--theta", theta, "True phase")->capture_default_str();
    likelihood->add_option("--m-count", m_count, "Number of measurements M")->capture_default_str();
    likelihood->add_option("--grid", grid, "Grid points on [-pi/2, pi/2] (0 = max(4096, 64 N))")->capture_default_str();
    add_out_dir(likelihood);

    // anneal
    AnnealerConfig defaults;
    int population = defaults.population;
    std::string proposal = "hypersphere", field = "real", symmetry = "none";
    std::uint64_t seed = 1;
    int max_iter = defaults.max_iterations;
    auto* anneal = app.add_subcommand("anneal", "Search for low 1/sqrt(F) states by population annealing");
    anneal->add_option("--n", n, "Particle number")->required();
    anneal->add_option("--population", population, "Population size")->capture_default_str();
    anneal->add_option("--proposal", proposal, "hypersphere | multiplicative")->capture_default_str();
    anneal->add_option("--field", field, "real | complex")->capture_default_str();
    anneal->add_option("--symmetry", symmetry, "none | symmetric | antisymmetric")->capture_default_str();
    anneal->add_option("--seed", seed, "Random seed")->capture_default_str();
    anneal->add_option("--max-iter", max_iter, "Iteration budget")->capture_default_str();
    anneal->add_option("--theta", theta, "Phase at which F is evaluated")->capture_default_str();
    add_out_dir(anneal);

    // scale
    std::string family = "twin_fock", metric = "fisher", n_list = "50,100,200,400,800";
    auto* scale = app.add_subcommand("scale", "Sweep N and fit sigma = C / N^beta");
    scale->add_option("--family", family, "State family")->capture_default_str();
    scale->add_option("--metric", metric, "fisher | error-prop")->capture_default_str();
    scale->add_option("--n-list", n_list, "Comma-separated particle numbers")->capture_default_str();
    scale->add_option("--theta", theta, "Operating phase (fisher metric)")->capture_default_str();
    add_out_dir(scale);

    // engineer
    std::string sweep;
    auto* engineer = app.add_subcommand("engineer", "Prepare the engineered gaussian-like input state");
    engineer->add_option("--n", n, "Particle number (even)")->required();
    engineer->add_option("--sweep", sweep, "Comma-separated N list for an error-propagation scaling fit");
    add_out_dir(engineer);

    // simulate
    int outcomes = 200;
    auto* simulate = app.add_subcommand("simulate", "Sample outcomes at theta and form the posterior");
    simulate->add_option("--state", state, "State family")->capture_default_str();
    simulate->add_option("--n", n, "Particle number")->required();
    simulate->add_option("--theta", theta, "True phase")->capture_default_str();
    simulate->add_option("--m-count", outcomes, "Number of measurements")->capture_default_str();
    simulate->add_option("--seed", seed, "Random seed")->capture_default_str();
    add_out_dir(simulate);

    // rerun
    std::string config_path;
    std::string rerun_out_dir;
    auto* rerun = app.add_subcommand("rerun", "Replay a written *_config.json");
    rerun->add_option("--config", config_path, "Config file")->required()->check(CLI::ExistingFile);
    rerun->add_option("--out-dir", rerun_out_dir, "Override the recorded output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (rerun->parsed()) {
            std::ifstream in(config_path);
            try {
                config = json::parse(in);
            } catch (const json::exception& e) {
                throw UsageError(std::string("cannot parse config: ") + e.what());
            }
            require(config.is_object(), "config must be a JSON object");
            if (!rerun_out_dir.empty()) config["out_dir"] = rerun_out_dir;
            if (threads > 0) config["threads"] = threads;
            return dispatch(config);
        }

        config["command"] = app.get_subcommands().front()->get_name();
        if (fisher->parsed()) {
            config["state"] = state;
            config["n"] = n;
            config["theta"] = theta;
            config["out"] = out.empty() ? json(nullptr) : json(fs::absolute(out).lexically_normal().string());
        } else if (likelihood->parsed()) {
            config["state"] = state;
            config["n"] = n;
            config["theta"] = theta;
            config["m_count"] = m_count;
            config["grid"] = grid;
        } else if (anneal->parsed()) {
            config["n"] = n;
            config["population"] = population;
            config["proposal"] = proposal;
            config["field"] = field;
            config["symmetry"] = symmetry;
            config["seed"] = seed;
            config["max_iter"] = max_iter;
            config["theta"] = theta;
        } else if (scale->parsed()) {
            config["family"] = family;
            config["metric"] = metric;
            config["n_list"] = parse_n_list(n_list);
            config["theta"] = theta;
        } else if (engineer->parsed()) {
            config["n"] = n;
            config["sweep"] = sweep.empty() ? json(nullptr) : json(parse_n_list(sweep));
        } else if (simulate->parsed()) {
            config["state"] = state;
            config["n"] = n;
            config["theta"] = theta;
            config["m_count"] = outcomes;
            config["seed"] = seed;
        }
        config["out_dir"] = fs::absolute(out_dir).lexically_normal().string();
        config["threads"] = threads;
        return dispatch(config);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "failed: " << e.what() << '\n';
        return kExitRuntime;
    }
}
