#include "vmp/harness/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "vmp/errors.hpp"

namespace vmp {

namespace {

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto begin = item.find_first_not_of(" \t");
        if (begin == std::string::npos) continue;
        const auto end = item.find_last_not_of(" \t");
        out.push_back(item.substr(begin, end - begin + 1));
    }
    return out;
}

int parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const int v = std::stoi(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigInvalid("config: " + key + " expects an integer, got '" + value + "'");
    }
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigInvalid("config: " + key + " expects a number, got '" + value + "'");
    }
}

std::uint64_t parse_seed(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const std::uint64_t v = std::stoull(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigInvalid("config: " + key + " expects an unsigned integer, got '" + value +
                            "'");
    }
}

}  // namespace

std::vector<int> outlier_schedule(const ExperimentConfig& cfg) {
    if (!cfg.multipliers.empty()) return cfg.multipliers;
    std::vector<int> out;
    for (int i = 1; i <= cfg.outlier_max_multiplier; ++i) out.push_back(i);
    return out;
}

void apply_config_entry(ExperimentConfig& cfg, const std::string& key,
                        const std::string& value) {
    if (key == "experiment") {
        cfg.experiment = value;
    } else if (key == "n") {
        cfg.n = parse_int(key, value);
    } else if (key == "groups") {
        cfg.groups = parse_int(key, value);
    } else if (key == "replications") {
        cfg.replications = parse_int(key, value);
    } else if (key == "multipliers") {
        cfg.multipliers.clear();
        for (const auto& item : split_list(value))
            cfg.multipliers.push_back(parse_int(key, item));
    } else if (key == "outlier_max_multiplier") {
        cfg.outlier_max_multiplier = parse_int(key, value);
    } else if (key == "levels") {
        cfg.levels.clear();
        for (const auto& item : split_list(value))
            cfg.levels.push_back(parse_double(key, item));
    } else if (key == "seed") {
        cfg.seed = parse_seed(key, value);
    } else if (key == "methods") {
        cfg.methods = split_list(value);
    } else if (key == "out_dir") {
        cfg.out_dir = value;
    } else if (key == "adjustment") {
        cfg.adjustment = value;
    } else if (key == "csv_path") {
        cfg.csv_path = value;
    } else if (key == "grid_size") {
        cfg.grid_size = parse_int(key, value);
    } else if (key == "mixture_components") {
        cfg.mixture_components = parse_int(key, value);
    } else if (key == "lda_docs") {
        cfg.lda_docs = parse_int(key, value);
    } else if (key == "lda_vocab") {
        cfg.lda_vocab = parse_int(key, value);
    } else if (key == "lda_topics") {
        cfg.lda_topics = parse_int(key, value);
    } else if (key == "lda_alpha") {
        cfg.lda_alpha = parse_double(key, value);
    } else if (key == "lda_beta") {
        cfg.lda_beta = parse_double(key, value);
    } else if (key == "lda_doc_mean") {
        cfg.lda_doc_mean = parse_double(key, value);
    } else if (key == "lda_samples") {
        cfg.lda_samples = parse_int(key, value);
    } else {
        throw ConfigInvalid("config: unknown key '" + key + "'");
    }
}

void load_config_file(ExperimentConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileNotFound("config: cannot open '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();

    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigInvalid("config: invalid JSON in '" + path + "': " + e.what());
        }
        if (!doc.is_object()) throw ConfigInvalid("config: JSON root must be an object");
        for (const auto& [key, value] : doc.items()) {
            std::string as_text;
            if (value.is_string()) {
                as_text = value.get<std::string>();
            } else if (value.is_array()) {
                for (const auto& item : value) {
                    if (!as_text.empty()) as_text += ",";
                    as_text += item.is_string() ? item.get<std::string>() : item.dump();
                }
            } else {
                as_text = value.dump();
            }
            apply_config_entry(cfg, key, as_text);
        }
        return;
    }

    std::stringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto begin = line.find_first_not_of(" \t");
        if (begin == std::string::npos || line[begin] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigInvalid("config: expected key=value, got '" + line + "'");
        std::string key = line.substr(begin, eq - begin);
        key.erase(key.find_last_not_of(" \t") + 1);
        std::string value = line.substr(eq + 1);
        const auto vbegin = value.find_first_not_of(" \t");
        value = vbegin == std::string::npos ? "" : value.substr(vbegin);
        if (!value.empty()) value.erase(value.find_last_not_of(" \t") + 1);
        apply_config_entry(cfg, key, value);
    }
}

void validate_config(const ExperimentConfig& cfg) {
    if (cfg.n < 2) throw ConfigInvalid("config: n must be at least 2");
    if (cfg.groups < 1) throw ConfigInvalid("config: groups must be at least 1");
    if (cfg.groups > cfg.n / 2)
        throw ConfigInvalid("config: groups must not exceed n/2");
    if (cfg.replications < 1) throw ConfigInvalid("config: replications must be at least 1");
    if (cfg.levels.empty()) throw ConfigInvalid("config: at least one level required");
    for (double level : cfg.levels)
        if (!(level > 0.0 && level < 1.0))
            throw ConfigInvalid("config: levels must lie in (0, 1)");
    for (int mult : cfg.multipliers)
        if (mult < 0) throw ConfigInvalid("config: multipliers must be nonnegative");
    if (cfg.outlier_max_multiplier < 0)
        throw ConfigInvalid("config: outlier_max_multiplier must be nonnegative");
    if (cfg.adjustment != "powered" && cfg.adjustment != "rescale")
        throw ConfigInvalid("config: adjustment must be 'powered' or 'rescale'");
    if (cfg.methods.empty()) throw ConfigInvalid("config: at least one method required");
    for (const auto& method : cfg.methods)
        if (method != "vb" && method != "vm" && method != "mposterior-off")
            throw ConfigInvalid("config: unknown method '" + method + "'");
    if (cfg.grid_size < 10) throw ConfigInvalid("config: grid_size must be at least 10");
    if (cfg.mixture_components < 1)
        throw ConfigInvalid("config: mixture_components must be at least 1");
    if (cfg.lda_docs < 2 || cfg.lda_vocab < 2 || cfg.lda_topics < 1)
        throw ConfigInvalid("config: LDA corpus needs >= 2 docs, >= 2 words, >= 1 topic");
    if (cfg.lda_alpha <= 0.0 || cfg.lda_beta <= 0.0 || cfg.lda_doc_mean <= 0.0)
        throw ConfigInvalid("config: LDA priors and document mean must be positive");
    if (cfg.lda_samples < 2)
        throw ConfigInvalid("config: lda_samples must be at least 2");
}

}  // namespace vmp
