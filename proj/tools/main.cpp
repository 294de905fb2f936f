#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vmp/distributions.hpp"
#include "vmp/errors.hpp"
#include "vmp/harness/config.hpp"
#include "vmp/harness/experiments.hpp"
#include "vmp/harness/posterior_io.hpp"
#include "vmp/median/geometric.hpp"
#include "vmp/median/metric.hpp"
#include "vmp/median/weiszfeld.hpp"

namespace {

struct CommandState {
    vmp::ExperimentConfig base;
    vmp::ExperimentConfig flags;
    std::string config_path;
};

/// Registers the options shared by every experiment subcommand, bound to
/// state->flags. The callback later folds in only explicitly passed flags so
/// a --config file is overridden by the command line, not the other way
/// around.
void add_common_options(CLI::App* cmd, const std::shared_ptr<CommandState>& state) {
    cmd->add_option("--config", state->config_path, "config file (JSON object or key=value lines)");
    cmd->add_option("--n", state->flags.n, "observations per replication");
    cmd->add_option("--groups", state->flags.groups, "number of data subsets");
    cmd->add_option("--replications", state->flags.replications, "independent replications");
    cmd->add_option("--multipliers", state->flags.multipliers, "explicit outlier multipliers")
        ->delimiter(',');
    cmd->add_option("--outlier-max-multiplier", state->flags.outlier_max_multiplier,
                    "run multipliers 1..max when --multipliers is absent");
    cmd->add_option("--levels", state->flags.levels, "credible levels in (0,1)")->delimiter(',');
    cmd->add_option("--seed", state->flags.seed, "master seed");
    cmd->add_option("--methods", state->flags.methods, "methods: vb, vm, mposterior-off")
        ->delimiter(',');
    cmd->add_option("--out", state->flags.out_dir, "output directory");
    cmd->add_option("--adjustment", state->flags.adjustment,
                    "subset adjustment: powered or rescale");
    cmd->add_option("--grid-size", state->flags.grid_size, "density grid resolution");
}

vmp::ExperimentConfig resolve_config(const CLI::App* cmd,
                                     const std::shared_ptr<CommandState>& state) {
    vmp::ExperimentConfig cfg = state->base;
    if (!state->config_path.empty()) vmp::load_config_file(cfg, state->config_path);
    const auto picked = [&](const std::string& name) { return cmd->count(name) > 0; };
    if (picked("--n")) cfg.n = state->flags.n;
    if (picked("--groups")) cfg.groups = state->flags.groups;
    if (picked("--replications")) cfg.replications = state->flags.replications;
    if (picked("--multipliers")) cfg.multipliers = state->flags.multipliers;
    if (picked("--outlier-max-multiplier"))
        cfg.outlier_max_multiplier = state->flags.outlier_max_multiplier;
    if (picked("--levels")) cfg.levels = state->flags.levels;
    if (picked("--seed")) cfg.seed = state->flags.seed;
    if (picked("--methods")) cfg.methods = state->flags.methods;
    if (picked("--out")) cfg.out_dir = state->flags.out_dir;
    if (picked("--adjustment")) cfg.adjustment = state->flags.adjustment;
    if (picked("--grid-size")) cfg.grid_size = state->flags.grid_size;
    return cfg;
}

void report_files(const vmp::ExperimentResult& result, const vmp::ExperimentConfig& cfg) {
    vmp::emit_outputs(result, cfg);
    std::printf("%s: %zu coverage rows, %zu kl rows, %zu region grids -> %s\n",
                result.experiment.c_str(), result.coverage.size(), result.kl.size(),
                result.regions.size(), cfg.out_dir.c_str());
}

void add_gaussian_command(CLI::App& app) {
    auto* cmd = app.add_subcommand("simulate-gaussian",
                                   "credible-interval coverage under a growing outlier");
    auto state = std::make_shared<CommandState>();
    state->base.experiment = "gaussian";
    state->flags = state->base;
    add_common_options(cmd, state);
    cmd->callback([cmd, state]() {
        const auto cfg = resolve_config(cmd, state);
        report_files(vmp::run_gaussian_coverage(cfg), cfg);
    });
}

void add_gmm_command(CLI::App& app) {
    auto* cmd = app.add_subcommand("simulate-gmm",
                                   "mixture posterior-predictive regions under an outlier");
    auto state = std::make_shared<CommandState>();
    state->base.experiment = "gmm";
    state->base.n = 200;
    state->base.replications = 1;
    state->base.multipliers = {0, 15};
    state->flags = state->base;
    add_common_options(cmd, state);
    cmd->add_option("--mixture-components", state->flags.mixture_components,
                    "mixture components fitted");
    cmd->callback([cmd, state]() {
        auto cfg = resolve_config(cmd, state);
        if (cmd->count("--mixture-components") > 0)
            cfg.mixture_components = state->flags.mixture_components;
        report_files(vmp::run_gmm_predictive(cfg), cfg);
    });
}

void add_lda_command(CLI::App& app) {
    auto* cmd = app.add_subcommand("simulate-lda",
                                   "topic recovery under a growing outlier document");
    auto state = std::make_shared<CommandState>();
    state->base.experiment = "lda";
    state->base.groups = 5;
    state->base.replications = 20;
    state->flags = state->base;
    add_common_options(cmd, state);
    cmd->add_option("--lda-docs", state->flags.lda_docs, "documents per corpus");
    cmd->add_option("--lda-vocab", state->flags.lda_vocab, "vocabulary size");
    cmd->add_option("--lda-topics", state->flags.lda_topics, "number of topics");
    cmd->add_option("--lda-alpha", state->flags.lda_alpha, "document-topic prior");
    cmd->add_option("--lda-beta", state->flags.lda_beta, "topic-word prior");
    cmd->add_option("--lda-doc-mean", state->flags.lda_doc_mean, "mean document length");
    cmd->add_option("--lda-samples", state->flags.lda_samples,
                    "topic-word samples per subset posterior");
    cmd->callback([cmd, state]() {
        auto cfg = resolve_config(cmd, state);
        const auto picked = [&](const std::string& name) { return cmd->count(name) > 0; };
        if (picked("--lda-docs")) cfg.lda_docs = state->flags.lda_docs;
        if (picked("--lda-vocab")) cfg.lda_vocab = state->flags.lda_vocab;
        if (picked("--lda-topics")) cfg.lda_topics = state->flags.lda_topics;
        if (picked("--lda-alpha")) cfg.lda_alpha = state->flags.lda_alpha;
        if (picked("--lda-beta")) cfg.lda_beta = state->flags.lda_beta;
        if (picked("--lda-doc-mean")) cfg.lda_doc_mean = state->flags.lda_doc_mean;
        if (picked("--lda-samples")) cfg.lda_samples = state->flags.lda_samples;
        report_files(vmp::run_lda(cfg), cfg);
    });
}

void add_penguins_command(CLI::App& app) {
    auto* cmd = app.add_subcommand("penguins",
                                   "bivariate predictive regions on penguin bill data");
    auto state = std::make_shared<CommandState>();
    state->base.experiment = "penguins";
    state->base.groups = 5;
    state->flags = state->base;
    add_common_options(cmd, state);
    cmd->add_option("--csv", state->flags.csv_path, "penguins CSV file")->required();
    cmd->callback([cmd, state]() {
        auto cfg = resolve_config(cmd, state);
        cfg.csv_path = state->flags.csv_path;
        report_files(vmp::run_penguins(cfg), cfg);
    });
}

void add_median_command(CLI::App& app) {
    auto* cmd = app.add_subcommand("median", "aggregate posterior files into their median");
    auto files = std::make_shared<std::vector<std::string>>();
    auto method = std::make_shared<std::string>("geometric");
    auto bandwidth = std::make_shared<double>(0.0);
    auto out = std::make_shared<std::string>("median.json");
    cmd->add_option("files", *files, "posterior JSON files")->required()->expected(-1);
    cmd->add_option("--method", *method, "geometric or metric")
        ->check(CLI::IsMember({"geometric", "metric"}));
    cmd->add_option("--bandwidth", *bandwidth,
                    "RBF kernel bandwidth for discrete posteriors (0: median heuristic)");
    cmd->add_option("--out", *out, "output posterior file");
    cmd->callback([files, method, bandwidth, out]() {
        if (files->empty()) throw vmp::Error("median: at least one posterior file required");
        std::vector<vmp::PosteriorFile> inputs;
        inputs.reserve(files->size());
        for (const auto& path : *files) inputs.push_back(vmp::read_posterior(path));
        const std::string kind = inputs.front().kind();
        for (const auto& input : inputs)
            if (input.kind() != kind)
                throw vmp::Error("median: posterior kinds differ: " + kind + " vs " +
                                 input.kind());
        if (kind == "gaussian") {
            std::vector<vmp::GaussianDist> set;
            for (const auto& input : inputs) set.push_back(*input.gaussian);
            if (*method == "metric") {
                const auto report = vmp::metric_median(set);
                vmp::write_posterior(*out, set[report.index]);
                std::printf("metric median: input %zu, radius %.6g -> %s\n", report.index,
                            report.radius, out->c_str());
            } else {
                const auto report = vmp::gaussian_geometric_median(set);
                vmp::write_posterior(*out, report.median);
                std::printf("geometric median: %d iterations, objective %.6g -> %s\n",
                            report.iterations, report.objective, out->c_str());
            }
        } else if (kind == "gmm") {
            std::vector<vmp::GaussianMixture> set;
            for (const auto& input : inputs) set.push_back(*input.gmm);
            if (*method == "metric") {
                const auto report = vmp::metric_median(set);
                vmp::write_posterior(*out, set[report.index]);
                std::printf("metric median: input %zu, radius %.6g -> %s\n", report.index,
                            report.radius, out->c_str());
            } else {
                const auto report = vmp::gmm_median(set);
                vmp::write_posterior(*out, report.median);
                std::printf("geometric median: objective %.6g, %d support tuples -> %s\n",
                            report.objective, static_cast<int>(report.support.rows()),
                            out->c_str());
            }
        } else {
            std::vector<vmp::DiscreteMeasure> set;
            for (const auto& input : inputs) set.push_back(*input.discrete);
            const vmp::RbfKernel kernel(*bandwidth > 0.0
                                            ? *bandwidth
                                            : vmp::median_heuristic_bandwidth(set));
            if (*method == "metric") {
                const auto report = vmp::metric_median(set, kernel);
                vmp::write_posterior(*out, set[report.index]);
                std::printf("metric median: input %zu, radius %.6g -> %s\n", report.index,
                            report.radius, out->c_str());
            } else {
                const auto report = vmp::weiszfeld_median(set, kernel);
                vmp::write_posterior(*out, report.median);
                std::printf("rkhs median: %d iterations, objective %.6g -> %s\n",
                            report.iterations, report.objective, out->c_str());
            }
        }
    });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Robust divide-and-conquer variational posteriors"};
    app.require_subcommand(1);
    add_gaussian_command(app);
    add_gmm_command(app);
    add_lda_command(app);
    add_penguins_command(app);
    add_median_command(app);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        return app.exit(err);
    } catch (const vmp::Error& err) {
        std::fprintf(stderr, "error: %s\n", err.what());
        return 1;
    }
    return 0;
}
