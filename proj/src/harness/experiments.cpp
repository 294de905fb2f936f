#include "vmp/harness/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "vmp/distributions.hpp"
#include "vmp/errors.hpp"
#include "vmp/harness/csv.hpp"
#include "vmp/harness/svg.hpp"
#include "vmp/median/geometric.hpp"
#include "vmp/median/weiszfeld.hpp"
#include "vmp/partition.hpp"
#include "vmp/rng.hpp"
#include "vmp/special.hpp"
#include "vmp/variational/gmm_cavi.hpp"
#include "vmp/variational/lda_cavi.hpp"
#include "vmp/variational/powered_gaussian.hpp"

namespace vmp {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

/// Power applied to each subset likelihood for the given method/adjustment.
int subset_power(const ExperimentConfig& cfg, const std::string& method) {
    if (method == "mposterior-off") return 1;
    return cfg.adjustment == "powered" ? cfg.groups : 1;
}

bool rescale_after(const ExperimentConfig& cfg, const std::string& method) {
    return method != "mposterior-off" && cfg.adjustment == "rescale";
}

void check_partition(const PartitionPlan& plan, int n) {
    std::vector<int> hits(static_cast<std::size_t>(n), 0);
    for (const auto& group : plan.groups)
        for (int idx : group) {
            if (idx < 0 || idx >= n) throw Error("partition index out of range");
            ++hits[static_cast<std::size_t>(idx)];
        }
    for (int count : hits)
        if (count != 1) throw Error("partition must touch each datum exactly once");
}

/// Appends the outlier rule: multiplier times the largest inlier magnitude,
/// or one more clean draw when the multiplier is zero.
double outlier_value(const std::vector<double>& inliers, int multiplier, double clean_draw) {
    if (multiplier == 0) return clean_draw;
    double max_abs = 0.0;
    for (double x : inliers) max_abs = std::max(max_abs, std::abs(x));
    return multiplier * max_abs;
}

double sample_sd(const std::vector<double>& xs) {
    const double n = static_cast<double>(xs.size());
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / std::max(1.0, n - 1.0));
}

/// Flags the smallest set of cells whose mass reaches `level` of the total,
/// filling cells in decreasing density order. `cell` is the cell length or
/// area; the flagged size is returned through `size_out`.
std::vector<unsigned char> hdr_region(const std::vector<double>& density, double cell,
                                      double level, double* size_out) {
    const std::size_t n = density.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (density[a] != density[b]) return density[a] > density[b];
        return a < b;
    });
    const double total = std::accumulate(density.begin(), density.end(), 0.0);
    std::vector<unsigned char> region(n, 0);
    double cum = 0.0;
    std::size_t flagged = 0;
    for (std::size_t idx : order) {
        if (total > 0.0 && cum >= level * total) break;
        region[idx] = 1;
        ++flagged;
        cum += density[idx];
    }
    if (size_out != nullptr) *size_out = static_cast<double>(flagged) * cell;
    return region;
}

/// Strict interior local maxima at or above 5% of the peak.
int count_modes_1d(const std::vector<double>& d) {
    if (d.size() < 3) return d.empty() ? 0 : 1;
    const double floor_val = 0.05 * *std::max_element(d.begin(), d.end());
    int modes = 0;
    for (std::size_t i = 1; i + 1 < d.size(); ++i)
        if (d[i] > d[i - 1] && d[i] > d[i + 1] && d[i] >= floor_val) ++modes;
    return modes;
}

/// Strict 8-neighbour local maxima at or above 5% of the peak (row-major).
int count_modes_2d(const std::vector<double>& d, int nx, int ny) {
    const double floor_val = 0.05 * *std::max_element(d.begin(), d.end());
    auto at = [&](int ix, int iy) { return d[static_cast<std::size_t>(iy) * nx + ix]; };
    int modes = 0;
    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix) {
            const double v = at(ix, iy);
            if (v < floor_val) continue;
            bool is_peak = true;
            for (int dy = -1; dy <= 1 && is_peak; ++dy)
                for (int dx = -1; dx <= 1 && is_peak; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    const int jx = ix + dx;
                    const int jy = iy + dy;
                    if (jx < 0 || jx >= nx || jy < 0 || jy >= ny) continue;
                    if (at(jx, jy) >= v) is_peak = false;
                }
            if (is_peak) ++modes;
        }
    return modes;
}

int nearest_cell(double x, double lo, double dx, int count) {
    const int idx = static_cast<int>(std::lround((x - lo) / dx));
    return std::clamp(idx, 0, count - 1);
}

std::vector<double> linspace(double lo, double hi, int count) {
    std::vector<double> xs(static_cast<std::size_t>(count));
    const double dx = count > 1 ? (hi - lo) / (count - 1) : 0.0;
    for (int i = 0; i < count; ++i) xs[static_cast<std::size_t>(i)] = lo + i * dx;
    return xs;
}

GaussianMixture fit_predictive(const ExperimentConfig& cfg, const Matrix& data,
                               const std::string& method, std::uint64_t fit_seed,
                               std::uint64_t partition_seed) {
    const int k = cfg.mixture_components;
    const GmmPriors priors = default_gmm_priors(static_cast<int>(data.cols()));
    if (method == "vb") {
        const auto state = cavi_gmm(data, k, priors, 1, 200, 1e-8, fit_seed);
        return gmm_posterior_predictive(state);
    }
    const int n = static_cast<int>(data.rows());
    const PartitionPlan plan = make_partition(n, cfg.groups, partition_seed);
    check_partition(plan, n);
    const int power = subset_power(cfg, method);
    std::vector<GaussianMixture> predictives;
    predictives.reserve(plan.groups.size());
    for (std::size_t g = 0; g < plan.groups.size(); ++g) {
        const auto& rows = plan.groups[g];
        Matrix sub(static_cast<Eigen::Index>(rows.size()), data.cols());
        for (std::size_t r = 0; r < rows.size(); ++r) sub.row(static_cast<Eigen::Index>(r)) = data.row(rows[r]);
        const auto state =
            cavi_gmm(sub, k, priors, power, 200, 1e-8, derive_seed(fit_seed, 7, g));
        predictives.push_back(gmm_posterior_predictive(state));
    }
    GaussianMixture median = gmm_median(predictives).median;
    if (rescale_after(cfg, method)) median = covariance_rescale(median, cfg.groups);
    return median;
}

/// Fraction of points whose nearest grid cell is flagged.
double region_coverage_1d(const std::vector<unsigned char>& region, const std::vector<double>& xs,
                          double dx, const std::vector<double>& points) {
    int covered = 0;
    for (double x : points)
        if (region[static_cast<std::size_t>(
                nearest_cell(x, xs.front(), dx, static_cast<int>(xs.size())))] != 0)
            ++covered;
    return static_cast<double>(covered) / static_cast<double>(points.size());
}

/// Shared scoring of a predictive mixture on a 1D grid; the stored region is
/// the 95% one regardless of the levels scored elsewhere.
RegionGrid score_predictive_1d(const GaussianMixture& pred, const std::string& method,
                               int multiplier, const std::vector<double>& xs,
                               const std::vector<double>& inliers) {
    RegionGrid grid;
    grid.method = method;
    grid.multiplier = multiplier;
    grid.xs = xs;
    grid.density.resize(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        Vector point(1);
        point << xs[i];
        grid.density[i] = std::exp(logpdf_mixture(pred, point));
    }
    const double dx = xs.size() > 1 ? xs[1] - xs[0] : 1.0;
    grid.region = hdr_region(grid.density, dx, 0.95, &grid.size);
    grid.covered_fraction = region_coverage_1d(grid.region, xs, dx, inliers);
    grid.modes = count_modes_1d(grid.density);
    return grid;
}

std::string region_stem(const RegionGrid& grid) {
    return "predictive_" + grid.method + "_m" + std::to_string(grid.multiplier);
}

void write_region_csv(const fs::path& dir, const RegionGrid& grid) {
    std::vector<std::string> lines;
    if (grid.ys.empty()) {
        lines.reserve(grid.xs.size());
        for (std::size_t i = 0; i < grid.xs.size(); ++i)
            lines.push_back(format_number(grid.xs[i]) + "," + format_number(grid.density[i]) +
                            "," + std::to_string(static_cast<int>(grid.region[i])));
        write_csv((dir / (region_stem(grid) + ".csv")).string(), "x,density,in_region", lines);
        return;
    }
    lines.reserve(grid.xs.size() * grid.ys.size());
    for (std::size_t iy = 0; iy < grid.ys.size(); ++iy)
        for (std::size_t ix = 0; ix < grid.xs.size(); ++ix) {
            const std::size_t cell = iy * grid.xs.size() + ix;
            lines.push_back(format_number(grid.xs[ix]) + "," + format_number(grid.ys[iy]) + "," +
                            format_number(grid.density[cell]) + "," +
                            std::to_string(static_cast<int>(grid.region[cell])));
        }
    write_csv((dir / (region_stem(grid) + ".csv")).string(), "x,y,density,in_region", lines);
}

std::vector<std::pair<double, double>> region_bands(const RegionGrid& grid) {
    std::vector<std::pair<double, double>> bands;
    const double dx = grid.xs.size() > 1 ? grid.xs[1] - grid.xs[0] : 1.0;
    bool open = false;
    double start = 0.0;
    for (std::size_t i = 0; i < grid.region.size(); ++i) {
        if (grid.region[i] != 0 && !open) {
            open = true;
            start = grid.xs[i] - 0.5 * dx;
        }
        if (grid.region[i] == 0 && open) {
            open = false;
            bands.emplace_back(start, grid.xs[i - 1] + 0.5 * dx);
        }
    }
    if (open) bands.emplace_back(start, grid.xs.back() + 0.5 * dx);
    return bands;
}

void emit_region_charts(const ExperimentResult& result, const fs::path& dir) {
    std::vector<int> multipliers;
    for (const auto& grid : result.regions)
        if (std::find(multipliers.begin(), multipliers.end(), grid.multiplier) ==
            multipliers.end())
            multipliers.push_back(grid.multiplier);
    for (int mult : multipliers) {
        std::vector<const RegionGrid*> grids;
        for (const auto& grid : result.regions)
            if (grid.multiplier == mult) grids.push_back(&grid);
        if (grids.empty()) continue;
        if (grids.front()->ys.empty()) {
            std::vector<SvgSeries> series;
            const RegionGrid* band_source = grids.front();
            for (const auto* grid : grids) {
                series.push_back({grid->method, grid->xs, grid->density});
                if (grid->method == "vm") band_source = grid;
            }
            write_line_chart((dir / ("predictive_m" + std::to_string(mult) + ".svg")).string(),
                             "Posterior predictive density, outlier x" + std::to_string(mult),
                             "x", "density", series, region_bands(*band_source));
        } else {
            for (const auto* grid : grids)
                write_heatmap((dir / (region_stem(*grid) + ".svg")).string(),
                              grid->method + " predictive, outlier x" + std::to_string(mult),
                              "bill length (z)", "bill depth (z)", grid->xs.front(),
                              grid->xs.back(), grid->ys.front(), grid->ys.back(),
                              static_cast<int>(grid->xs.size()),
                              static_cast<int>(grid->ys.size()), grid->density, grid->region);
        }
    }
}

}  // namespace

ExperimentResult run_gaussian_coverage(const ExperimentConfig& cfg) {
    validate_config(cfg);
    ExperimentResult result;
    result.experiment = "gaussian";
    const std::vector<int> schedule = outlier_schedule(cfg);
    const double mu0 = 2.0;
    Vector prior_mean = Vector::Zero(1);
    Matrix prior_cov = Matrix::Constant(1, 1, 100.0);
    const GaussianDist prior(prior_mean, prior_cov);
    const Matrix obs_cov = Matrix::Identity(1, 1);
    std::vector<double> z_values;
    z_values.reserve(cfg.levels.size());
    for (double level : cfg.levels) z_values.push_back(normal_quantile(0.5 * (1.0 + level)));

    std::map<std::string, double> elapsed;
    for (int mult : schedule) {
        std::map<std::string, std::vector<int>> covered;
        std::map<std::string, std::vector<double>> widths;
        for (const auto& method : cfg.methods) {
            covered[method].assign(cfg.levels.size(), 0);
            widths[method].assign(cfg.levels.size(), 0.0);
        }
        for (int rep = 0; rep < cfg.replications; ++rep) {
            auto eng = make_engine(derive_seed(cfg.seed, 101 + static_cast<std::uint64_t>(mult),
                                               static_cast<std::uint64_t>(rep)));
            std::normal_distribution<double> noise(mu0, 1.0);
            std::vector<double> inliers(static_cast<std::size_t>(cfg.n - 1));
            for (double& x : inliers) x = noise(eng);
            std::vector<double> values = inliers;
            values.push_back(outlier_value(inliers, mult, noise(eng)));
            std::vector<Vector> obs;
            obs.reserve(values.size());
            for (double x : values) {
                Vector v(1);
                v << x;
                obs.push_back(v);
            }
            for (const auto& method : cfg.methods) {
                const auto start = Clock::now();
                GaussianDist posterior = prior;
                if (method == "vb") {
                    posterior = powered_gaussian_posterior(obs, prior, obs_cov, 1);
                } else {
                    const PartitionPlan plan = make_partition(
                        cfg.n, cfg.groups,
                        derive_seed(cfg.seed, 761 + static_cast<std::uint64_t>(mult),
                                    static_cast<std::uint64_t>(rep)));
                    check_partition(plan, cfg.n);
                    const int power = subset_power(cfg, method);
                    std::vector<GaussianDist> subset_posteriors;
                    subset_posteriors.reserve(plan.groups.size());
                    for (const auto& group : plan.groups) {
                        std::vector<Vector> subset;
                        subset.reserve(group.size());
                        for (int idx : group) subset.push_back(obs[static_cast<std::size_t>(idx)]);
                        subset_posteriors.push_back(
                            powered_gaussian_posterior(subset, prior, obs_cov, power));
                    }
                    posterior = gaussian_geometric_median(subset_posteriors).median;
                    if (rescale_after(cfg, method))
                        posterior = covariance_rescale(posterior, cfg.groups);
                }
                elapsed[method] += seconds_since(start);
                const double sd = std::sqrt(posterior.cov()(0, 0));
                const double err = std::abs(posterior.mean()(0) - mu0);
                for (std::size_t l = 0; l < cfg.levels.size(); ++l) {
                    if (err <= z_values[l] * sd) ++covered[method][l];
                    widths[method][l] += 2.0 * z_values[l] * sd;
                }
            }
        }
        for (const auto& method : cfg.methods)
            for (std::size_t l = 0; l < cfg.levels.size(); ++l)
                result.coverage.push_back(
                    {mult, method, cfg.levels[l],
                     static_cast<double>(covered[method][l]) / cfg.replications, cfg.replications,
                     widths[method][l] / cfg.replications});
    }
    for (const auto& method : cfg.methods)
        result.timing.push_back({"gaussian", method, elapsed[method]});
    return result;
}

ExperimentResult run_gmm_predictive(const ExperimentConfig& cfg) {
    validate_config(cfg);
    ExperimentResult result;
    result.experiment = "gmm";
    const std::vector<int> schedule = outlier_schedule(cfg);
    std::map<std::string, double> elapsed;
    for (int mult : schedule) {
        std::map<std::string, std::vector<double>> covered_sum;
        std::map<std::string, std::vector<double>> size_sum;
        for (const auto& method : cfg.methods) {
            covered_sum[method].assign(cfg.levels.size(), 0.0);
            size_sum[method].assign(cfg.levels.size(), 0.0);
        }
        for (int rep = 0; rep < cfg.replications; ++rep) {
            auto eng = make_engine(derive_seed(cfg.seed, 211 + static_cast<std::uint64_t>(mult),
                                               static_cast<std::uint64_t>(rep)));
            std::normal_distribution<double> unit(0.0, 1.0);
            std::uniform_real_distribution<double> coin(0.0, 1.0);
            auto draw = [&]() { return (coin(eng) < 0.5 ? 2.0 : 4.0) + unit(eng); };
            std::vector<double> inliers(static_cast<std::size_t>(cfg.n - 1));
            for (double& x : inliers) x = draw();
            std::vector<double> values = inliers;
            values.push_back(outlier_value(inliers, mult, draw()));
            Matrix data(static_cast<Eigen::Index>(values.size()), 1);
            for (std::size_t i = 0; i < values.size(); ++i)
                data(static_cast<Eigen::Index>(i), 0) = values[i];
            const double spread = sample_sd(inliers);
            const auto [lo_it, hi_it] = std::minmax_element(inliers.begin(), inliers.end());
            const std::vector<double> xs =
                linspace(*lo_it - 3.0 * spread, *hi_it + 3.0 * spread, cfg.grid_size * 10);
            for (const auto& method : cfg.methods) {
                const auto start = Clock::now();
                const GaussianMixture pred = fit_predictive(
                    cfg, data, method,
                    derive_seed(cfg.seed, 223 + static_cast<std::uint64_t>(mult),
                                static_cast<std::uint64_t>(rep)),
                    derive_seed(cfg.seed, 227 + static_cast<std::uint64_t>(mult),
                                static_cast<std::uint64_t>(rep)));
                elapsed[method] += seconds_since(start);
                RegionGrid grid = score_predictive_1d(pred, method, mult, xs, inliers);
                const double dx = xs[1] - xs[0];
                for (std::size_t l = 0; l < cfg.levels.size(); ++l) {
                    double size = 0.0;
                    const auto region = hdr_region(grid.density, dx, cfg.levels[l], &size);
                    covered_sum[method][l] += region_coverage_1d(region, xs, dx, inliers);
                    size_sum[method][l] += size;
                }
                if (rep == 0) result.regions.push_back(std::move(grid));
            }
        }
        for (const auto& method : cfg.methods)
            for (std::size_t l = 0; l < cfg.levels.size(); ++l)
                result.coverage.push_back({mult, method, cfg.levels[l],
                                           covered_sum[method][l] / cfg.replications,
                                           cfg.replications,
                                           size_sum[method][l] / cfg.replications});
    }
    for (const auto& method : cfg.methods) result.timing.push_back({"gmm", method, elapsed[method]});
    return result;
}

namespace {

/// KL(p || q) between rows, with q floored by delta and renormalized.
double row_kl(const Vector& p, const Vector& q, double delta) {
    const Vector q_smooth = (q.array() + delta) / (1.0 + delta * q.size());
    const Vector p_norm = p / p.sum();
    double kl = 0.0;
    for (Eigen::Index v = 0; v < p.size(); ++v) {
        const double pv = std::max(p_norm(v), 1e-300);
        kl += pv * std::log(pv / q_smooth(v));
    }
    return kl;
}

/// Mean per-topic KL after aligning estimated topics to the reference by the
/// best permutation.
double mean_topic_kl(const Matrix& estimate, const Matrix& reference) {
    const int k = static_cast<int>(reference.rows());
    std::vector<int> perm(static_cast<std::size_t>(k));
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double total = 0.0;
        for (int topic = 0; topic < k; ++topic)
            total += row_kl(estimate.row(perm[static_cast<std::size_t>(topic)]).transpose(),
                            reference.row(topic).transpose(), 1e-6);
        best = std::min(best, total / k);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

/// Permutation of `estimate` rows minimizing the L1 distance to `reference`.
std::vector<int> best_row_alignment(const Matrix& estimate, const Matrix& reference) {
    const int k = static_cast<int>(reference.rows());
    std::vector<int> perm(static_cast<std::size_t>(k));
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<int> best_perm = perm;
    double best = std::numeric_limits<double>::infinity();
    do {
        double total = 0.0;
        for (int topic = 0; topic < k; ++topic)
            total += (estimate.row(perm[static_cast<std::size_t>(topic)]) - reference.row(topic))
                         .cwiseAbs()
                         .sum();
        if (total < best) {
            best = total;
            best_perm = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best_perm;
}

Vector dirichlet_row(const Vector& concentration, std::mt19937_64& eng) {
    Vector draw(concentration.size());
    for (Eigen::Index i = 0; i < concentration.size(); ++i) {
        std::gamma_distribution<double> gamma(concentration(i), 1.0);
        draw(i) = gamma(eng);
    }
    const double total = draw.sum();
    if (total <= 0.0) return Vector::Constant(concentration.size(), 1.0 / concentration.size());
    return draw / total;
}

int draw_index(const Vector& probs, std::mt19937_64& eng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double u = unif(eng);
    double cum = 0.0;
    for (Eigen::Index i = 0; i < probs.size(); ++i) {
        cum += probs(i);
        if (u <= cum) return static_cast<int>(i);
    }
    return static_cast<int>(probs.size() - 1);
}

}  // namespace

ExperimentResult run_lda(const ExperimentConfig& cfg) {
    validate_config(cfg);
    ExperimentResult result;
    result.experiment = "lda";
    const int k = cfg.lda_topics;
    const int v = cfg.lda_vocab;
    const int docs = cfg.lda_docs;
    const int base = std::max(1, static_cast<int>(std::lround(cfg.lda_doc_mean)));
    const std::vector<int> lengths = {0,        base,      2 * base, 4 * base,
                                      8 * base, 16 * base, 32 * base};
    std::map<int, std::map<std::string, double>> kl_sum;
    std::map<std::string, double> elapsed;

    for (int rep = 0; rep < cfg.replications; ++rep) {
        auto eng = make_engine(derive_seed(cfg.seed, 303, static_cast<std::uint64_t>(rep)));
        Matrix phi0(k, v);
        for (int topic = 0; topic < k; ++topic)
            phi0.row(topic) = dirichlet_row(Vector::Ones(v), eng).transpose();
        Eigen::MatrixXi corpus = Eigen::MatrixXi::Zero(docs, v);
        std::poisson_distribution<int> length_dist(cfg.lda_doc_mean);
        const Vector alpha_vec = Vector::Constant(k, cfg.lda_alpha);
        for (int d = 0; d < docs; ++d) {
            const Vector theta = dirichlet_row(alpha_vec, eng);
            const int words = std::max(1, length_dist(eng));
            for (int w = 0; w < words; ++w) {
                const int topic = draw_index(theta, eng);
                const int word = draw_index(phi0.row(topic).transpose(), eng);
                corpus(d, word) += 1;
            }
        }
        std::uniform_int_distribution<int> word_pick(0, v - 1);
        const int outlier_word = word_pick(eng);
        const std::uint64_t rep_seed = derive_seed(cfg.seed, 331, static_cast<std::uint64_t>(rep));

        for (int length : lengths) {
            Eigen::MatrixXi counts = Eigen::MatrixXi::Zero(docs + 1, v);
            counts.topRows(docs) = corpus;
            counts(docs, outlier_word) = length;
            for (const auto& method : cfg.methods) {
                const auto start = Clock::now();
                Matrix estimate;
                if (method == "vb") {
                    const auto state =
                        cavi_lda(counts, k, cfg.lda_alpha, cfg.lda_beta, 1, 300, 1e-6,
                                 derive_seed(rep_seed, 1, static_cast<std::uint64_t>(length)));
                    estimate = lda_topic_means(state);
                } else {
                    const PartitionPlan plan = make_partition(
                        docs + 1, cfg.groups, derive_seed(rep_seed, 2, 0));
                    check_partition(plan, docs + 1);
                    const int power = method == "mposterior-off" ? 1 : cfg.groups;
                    std::vector<Matrix> group_means;
                    std::vector<LdaVariationalState> states;
                    for (std::size_t g = 0; g < plan.groups.size(); ++g) {
                        Eigen::MatrixXi sub(static_cast<Eigen::Index>(plan.groups[g].size()), v);
                        for (std::size_t r = 0; r < plan.groups[g].size(); ++r)
                            sub.row(static_cast<Eigen::Index>(r)) = counts.row(plan.groups[g][r]);
                        states.push_back(cavi_lda(
                            sub, k, cfg.lda_alpha, cfg.lda_beta, power, 300, 1e-6,
                            derive_seed(rep_seed, 3 + static_cast<std::uint64_t>(length), g)));
                        group_means.push_back(lda_topic_means(states.back()));
                    }
                    std::vector<DiscreteMeasure> measures;
                    measures.reserve(states.size());
                    for (std::size_t g = 0; g < states.size(); ++g) {
                        const std::vector<int> perm =
                            best_row_alignment(group_means[g], group_means[0]);
                        auto sample_eng = make_engine(derive_seed(
                            rep_seed, 101 + static_cast<std::uint64_t>(length), g));
                        std::vector<Vector> atoms;
                        atoms.reserve(static_cast<std::size_t>(cfg.lda_samples));
                        for (int s = 0; s < cfg.lda_samples; ++s) {
                            Vector atom(k * v);
                            for (int topic = 0; topic < k; ++topic)
                                atom.segment(topic * v, v) = dirichlet_row(
                                    states[g]
                                        .lambda.row(perm[static_cast<std::size_t>(topic)])
                                        .transpose(),
                                    sample_eng);
                            atoms.push_back(std::move(atom));
                        }
                        measures.emplace_back(std::move(atoms));
                    }
                    const RbfKernel kernel(median_heuristic_bandwidth(measures));
                    const Vector pooled = weiszfeld_median(measures, kernel).median.mean();
                    estimate.resize(k, v);
                    for (int topic = 0; topic < k; ++topic) {
                        Vector row = pooled.segment(topic * v, v).cwiseMax(0.0);
                        estimate.row(topic) = (row / row.sum()).transpose();
                    }
                }
                elapsed[method] += seconds_since(start);
                kl_sum[length][method] += mean_topic_kl(estimate, phi0);
            }
        }
    }
    for (int length : lengths)
        for (const auto& method : cfg.methods)
            result.kl.push_back(
                {length, method, kl_sum[length][method] / cfg.replications, cfg.replications});
    for (const auto& method : cfg.methods) result.timing.push_back({"lda", method, elapsed[method]});
    return result;
}

ExperimentResult run_penguins(const ExperimentConfig& cfg) {
    validate_config(cfg);
    if (cfg.csv_path.empty()) throw ConfigInvalid("penguins: csv_path is required");
    ExperimentResult result;
    result.experiment = "penguins";

    const std::vector<std::vector<std::string>> column_sets = {
        {"culmen_length_mm", "culmen_depth_mm"},
        {"culmen_length", "culmen_depth"},
        {"bill_length_mm", "bill_depth_mm"}};
    IngestResult ingest;
    bool loaded = false;
    std::string last_error;
    for (const auto& columns : column_sets) {
        try {
            ingest = ingest_csv(cfg.csv_path, columns, 299);
            loaded = true;
            break;
        } catch (const MissingColumn& err) {
            last_error = err.what();
        }
    }
    if (!loaded) throw MissingColumn(last_error);

    Matrix z = ingest.data;
    for (Eigen::Index c = 0; c < z.cols(); ++c) {
        const double mean = z.col(c).mean();
        const double sd = std::sqrt((z.col(c).array() - mean).square().sum() /
                                    std::max<double>(1.0, z.rows() - 1.0));
        z.col(c) = (z.col(c).array() - mean) / (sd > 0.0 ? sd : 1.0);
    }
    const int multiplier = 5;
    Vector outlier(z.cols());
    for (Eigen::Index c = 0; c < z.cols(); ++c)
        outlier(c) = multiplier * z.col(c).cwiseAbs().maxCoeff();
    Matrix data(z.rows() + 1, z.cols());
    data.topRows(z.rows()) = z;
    data.row(z.rows()) = outlier.transpose();

    const std::vector<double> xs =
        linspace(z.col(0).minCoeff() - 3.0, z.col(0).maxCoeff() + 3.0, cfg.grid_size);
    const std::vector<double> ys =
        linspace(z.col(1).minCoeff() - 3.0, z.col(1).maxCoeff() + 3.0, cfg.grid_size);
    const double dx = xs[1] - xs[0];
    const double dy = ys[1] - ys[0];

    std::map<std::string, double> elapsed;
    for (const auto& method : cfg.methods) {
        const auto start = Clock::now();
        const GaussianMixture pred =
            fit_predictive(cfg, data, method, derive_seed(cfg.seed, 401, 0),
                           derive_seed(cfg.seed, 409, 0));
        elapsed[method] += seconds_since(start);

        RegionGrid grid;
        grid.method = method;
        grid.multiplier = multiplier;
        grid.xs = xs;
        grid.ys = ys;
        grid.density.resize(xs.size() * ys.size());
        for (std::size_t iy = 0; iy < ys.size(); ++iy)
            for (std::size_t ix = 0; ix < xs.size(); ++ix) {
                Vector point(2);
                point << xs[ix], ys[iy];
                grid.density[iy * xs.size() + ix] = std::exp(logpdf_mixture(pred, point));
            }
        const auto covered_at = [&](const std::vector<unsigned char>& region) {
            int covered = 0;
            for (Eigen::Index r = 0; r < z.rows(); ++r) {
                const int ix = nearest_cell(z(r, 0), xs.front(), dx, static_cast<int>(xs.size()));
                const int iy = nearest_cell(z(r, 1), ys.front(), dy, static_cast<int>(ys.size()));
                if (region[static_cast<std::size_t>(iy) * xs.size() + ix] != 0) ++covered;
            }
            return static_cast<double>(covered) / static_cast<double>(z.rows());
        };
        grid.region = hdr_region(grid.density, dx * dy, 0.95, &grid.size);
        grid.covered_fraction = covered_at(grid.region);
        grid.modes = count_modes_2d(grid.density, static_cast<int>(xs.size()),
                                    static_cast<int>(ys.size()));
        for (double level : cfg.levels) {
            double size = 0.0;
            const auto region = hdr_region(grid.density, dx * dy, level, &size);
            result.coverage.push_back({multiplier, method, level, covered_at(region), 1, size});
        }
        result.regions.push_back(std::move(grid));
    }
    for (const auto& method : cfg.methods)
        result.timing.push_back({"penguins", method, elapsed[method]});
    return result;
}

void write_coverage_csv(const std::string& path, const std::vector<CoverageRow>& rows) {
    std::vector<std::string> lines;
    lines.reserve(rows.size());
    for (const auto& row : rows)
        lines.push_back(std::to_string(row.multiplier) + "," + row.method + "," +
                        format_number(row.level) + "," + format_number(row.coverage) + "," +
                        std::to_string(row.replications) + "," + format_number(row.mean_width));
    write_csv(path, "multiplier,method,level,coverage,replications,mean_width", lines);
}

void write_kl_csv(const std::string& path, const std::vector<KlRow>& rows) {
    std::vector<std::string> lines;
    lines.reserve(rows.size());
    for (const auto& row : rows)
        lines.push_back(std::to_string(row.outlier_len) + "," + row.method + "," +
                        format_number(row.mean_kl) + "," + std::to_string(row.replications));
    write_csv(path, "outlier_len,method,mean_kl,replications", lines);
}

void write_timing_csv(const std::string& path, const std::vector<TimingRow>& rows) {
    std::vector<std::string> lines;
    lines.reserve(rows.size());
    for (const auto& row : rows)
        lines.push_back(row.experiment + "," + row.method + "," + format_number(row.seconds));
    write_csv(path, "experiment,method,seconds", lines);
}

void emit_outputs(const ExperimentResult& result, const ExperimentConfig& cfg) {
    const fs::path dir(cfg.out_dir);
    fs::create_directories(dir);
    write_timing_csv((dir / "timing.txt").string(), result.timing);
    if (result.experiment == "lda" || !result.kl.empty())
        write_kl_csv((dir / "kl.csv").string(), result.kl);
    if (result.experiment != "lda")
        write_coverage_csv((dir / "coverage.csv").string(), result.coverage);

    if (!result.regions.empty()) {
        std::vector<std::string> lines;
        lines.reserve(result.regions.size());
        for (const auto& grid : result.regions) {
            write_region_csv(dir, grid);
            lines.push_back(std::to_string(grid.multiplier) + "," + grid.method + "," +
                            std::to_string(grid.modes) + "," + format_number(grid.size) + "," +
                            format_number(grid.covered_fraction));
        }
        write_csv((dir / "regions.csv").string(),
                  "multiplier,method,modes,size,covered_fraction", lines);
        emit_region_charts(result, dir);
    }

    if (result.experiment == "gaussian" && !result.coverage.empty()) {
        std::vector<SvgSeries> series;
        for (const auto& method : cfg.methods)
            for (double level : cfg.levels) {
                SvgSeries s;
                s.label = method + " " + format_number(level);
                for (const auto& row : result.coverage)
                    if (row.method == method && row.level == level) {
                        s.x.push_back(row.multiplier);
                        s.y.push_back(row.coverage);
                    }
                if (!s.x.empty()) series.push_back(std::move(s));
            }
        write_line_chart((dir / "coverage.svg").string(), "Credible interval coverage",
                         "outlier multiplier", "coverage", series);
    }
    if (result.experiment == "lda" && !result.kl.empty()) {
        std::vector<SvgSeries> series;
        for (const auto& method : cfg.methods) {
            SvgSeries s;
            s.label = method;
            for (const auto& row : result.kl)
                if (row.method == method) {
                    s.x.push_back(row.outlier_len);
                    s.y.push_back(row.mean_kl);
                }
            if (!s.x.empty()) series.push_back(std::move(s));
        }
        write_line_chart((dir / "kl.svg").string(), "Topic recovery vs outlier length",
                         "outlier document length", "mean KL divergence", series);
    }
}

}  // namespace vmp
