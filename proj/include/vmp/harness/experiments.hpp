#pragma once

#include <string>
#include <vector>

#include "vmp/harness/config.hpp"
#include "vmp/linalg.hpp"

namespace vmp {

/// One coverage measurement: at the given outlier multiplier, the fraction of
/// replications whose credible interval (or highest-density region) contained
/// the truth, along with the mean interval width (region size).
struct CoverageRow {
    int multiplier = 0;
    std::string method;
    double level = 0.0;
    double coverage = 0.0;
    int replications = 0;
    double mean_width = 0.0;
};

/// Mean KL divergence from the estimated topic-word distributions to the
/// generating ones, at a given outlier document length.
struct KlRow {
    int outlier_len = 0;
    std::string method;
    double mean_kl = 0.0;
    int replications = 0;
};

struct TimingRow {
    std::string experiment;
    std::string method;
    double seconds = 0.0;
};

/// Density values and the 95% highest-density region on a regular grid.
/// For 1D grids `ys` is empty and `density`/`region` have xs.size() entries;
/// for 2D they are row-major with ys.size() rows and xs.size() columns.
struct RegionGrid {
    std::string method;
    int multiplier = 0;
    std::vector<double> xs;
    std::vector<double> ys;
    std::vector<double> density;
    std::vector<unsigned char> region;
    double covered_fraction = 0.0;
    double size = 0.0;
    int modes = 0;
};

struct ExperimentResult {
    std::string experiment;
    std::vector<CoverageRow> coverage;
    std::vector<KlRow> kl;
    std::vector<TimingRow> timing;
    std::vector<RegionGrid> regions;
};

/// Gaussian mean estimation with a single scaled outlier: conjugate full-data
/// posterior versus the geometric median of powered subset posteriors, with
/// credible-interval coverage of the true mean at every configured level.
[[nodiscard]] ExperimentResult run_gaussian_coverage(const ExperimentConfig& cfg);

/// Two-component mixture data with a single scaled outlier: CAVI posterior
/// predictive versus the mixture median of subset predictives, scored by the
/// 95% highest-density region on a 1D grid (inliers covered, region length,
/// mode count).
[[nodiscard]] ExperimentResult run_gmm_predictive(const ExperimentConfig& cfg);

/// LDA topic recovery with one repeated-word outlier document of growing
/// length: full-corpus CAVI versus the RKHS median of subset topic-word
/// posteriors, scored by mean KL to the generating topics.
[[nodiscard]] ExperimentResult run_lda(const ExperimentConfig& cfg);

/// Bivariate density estimation on standardized penguin bill measurements
/// with one appended far outlier, scored like the mixture experiment but on
/// a 2D grid read from cfg.csv_path.
[[nodiscard]] ExperimentResult run_penguins(const ExperimentConfig& cfg);

/// Writes every CSV and SVG artifact of the result under cfg.out_dir.
/// Result CSVs are byte-reproducible for identical configs; wall-clock
/// times go to timing.txt, the only output allowed to differ between runs.
void emit_outputs(const ExperimentResult& result, const ExperimentConfig& cfg);

void write_coverage_csv(const std::string& path, const std::vector<CoverageRow>& rows);
void write_kl_csv(const std::string& path, const std::vector<KlRow>& rows);
void write_timing_csv(const std::string& path, const std::vector<TimingRow>& rows);

}  // namespace vmp
