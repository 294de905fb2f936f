#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace vmp {

/// Experiment settings shared by all pipelines; fields not used by a given
/// experiment are ignored by it. Defaults reproduce the desk-scale runs.
struct ExperimentConfig {
    std::string experiment;
    int n = 100;
    int groups = 10;
    int replications = 50;
    std::vector<int> multipliers;
    int outlier_max_multiplier = 15;
    std::vector<double> levels = {0.8, 0.9, 0.95};
    std::uint64_t seed = 20240923;
    std::vector<std::string> methods = {"vb", "vm"};
    std::string out_dir = "out";
    std::string adjustment = "powered";
    std::string csv_path;
    int grid_size = 200;
    int mixture_components = 2;
    int lda_docs = 19;
    int lda_vocab = 4;
    int lda_topics = 2;
    double lda_alpha = 2.0;
    double lda_beta = 1.0;
    double lda_doc_mean = 10.0;
    int lda_samples = 30;
};

/// Outlier multiplier schedule: the explicit list when given, else 1..max.
[[nodiscard]] std::vector<int> outlier_schedule(const ExperimentConfig& cfg);

/// Applies one key=value setting; throws ConfigInvalid for unknown keys or
/// unparsable values.
void apply_config_entry(ExperimentConfig& cfg, const std::string& key,
                        const std::string& value);

/// Loads a config file into `cfg`: either a flat JSON object or key=value
/// lines (blank lines and lines starting with # are skipped). Values set
/// here can be overridden by flags applied afterwards.
void load_config_file(ExperimentConfig& cfg, const std::string& path);

/// Throws ConfigInvalid unless the configuration is runnable.
void validate_config(const ExperimentConfig& cfg);

}  // namespace vmp
