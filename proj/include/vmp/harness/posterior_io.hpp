#pragma once

#include <optional>
#include <string>

#include "vmp/distributions.hpp"

namespace vmp {

/// A posterior loaded from an interchange file; exactly one member is set,
/// matching the file's "kind" field (gaussian, gmm, or discrete).
struct PosteriorFile {
    std::optional<GaussianDist> gaussian;
    std::optional<GaussianMixture> gmm;
    std::optional<DiscreteMeasure> discrete;

    [[nodiscard]] std::string kind() const {
        if (gaussian) return "gaussian";
        if (gmm) return "gmm";
        return "discrete";
    }
};

[[nodiscard]] PosteriorFile read_posterior(const std::string& path);

void write_posterior(const std::string& path, const GaussianDist& g);
void write_posterior(const std::string& path, const GaussianMixture& g);
void write_posterior(const std::string& path, const DiscreteMeasure& g);

}  // namespace vmp
