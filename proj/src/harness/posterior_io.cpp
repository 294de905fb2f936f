#include "vmp/harness/posterior_io.hpp"

#include <filesystem>
#include <fstream>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "vmp/errors.hpp"

namespace vmp {

namespace {

using nlohmann::json;

Vector vector_from(const json& node, const std::string& what) {
    if (!node.is_array()) throw Error("posterior file: " + what + " must be an array");
    Vector v(static_cast<int>(node.size()));
    for (std::size_t i = 0; i < node.size(); ++i) {
        if (!node[i].is_number()) throw Error("posterior file: " + what + " must be numeric");
        v[static_cast<int>(i)] = node[i].get<double>();
    }
    return v;
}

Matrix matrix_from(const json& node, const std::string& what) {
    if (!node.is_array() || node.empty())
        throw Error("posterior file: " + what + " must be a nonempty array of rows");
    const std::size_t cols = node[0].size();
    Matrix m(static_cast<int>(node.size()), static_cast<int>(cols));
    for (std::size_t r = 0; r < node.size(); ++r) {
        if (!node[r].is_array() || node[r].size() != cols)
            throw Error("posterior file: " + what + " rows must have equal lengths");
        for (std::size_t c = 0; c < cols; ++c)
            m(static_cast<int>(r), static_cast<int>(c)) = node[r][c].get<double>();
    }
    return m;
}

json to_json(const Vector& v) {
    json out = json::array();
    for (int i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

json to_json(const Matrix& m) {
    json out = json::array();
    for (int r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        out.push_back(row);
    }
    return out;
}

GaussianDist gaussian_from(const json& doc) {
    return {vector_from(doc.at("mean"), "mean"), matrix_from(doc.at("cov"), "cov")};
}

void write_json(const std::string& path, const json& doc) {
    const std::filesystem::path target(path);
    std::error_code ec;
    if (target.has_parent_path())
        std::filesystem::create_directories(target.parent_path(), ec);
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("posterior file: cannot write '" + path + "'");
    out << doc.dump(2) << "\n";
    if (!out) throw IoError("posterior file: write failed for '" + path + "'");
}

}  // namespace

PosteriorFile read_posterior(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileNotFound("posterior file: cannot open '" + path + "'");
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw Error("posterior file: invalid JSON in '" + path + "': " + e.what());
    }
    if (!doc.is_object() || !doc.contains("kind") || !doc["kind"].is_string())
        throw Error("posterior file: '" + path + "' needs a string 'kind' field");
    const std::string kind = doc["kind"].get<std::string>();

    PosteriorFile out;
    try {
        if (kind == "gaussian") {
            out.gaussian = gaussian_from(doc);
        } else if (kind == "gmm") {
            const json& comps = doc.at("components");
            if (!comps.is_array() || comps.empty())
                throw Error("posterior file: gmm needs a nonempty components array");
            std::vector<double> weights;
            for (const auto& w : doc.at("weights")) weights.push_back(w.get<double>());
            std::vector<GaussianDist> components;
            for (const auto& comp : comps) components.push_back(gaussian_from(comp));
            out.gmm = GaussianMixture(weights, components);
        } else if (kind == "discrete") {
            const Matrix atom_rows = matrix_from(doc.at("atoms"), "atoms");
            std::vector<Vector> atoms;
            atoms.reserve(static_cast<std::size_t>(atom_rows.rows()));
            for (int r = 0; r < atom_rows.rows(); ++r)
                atoms.push_back(atom_rows.row(r).transpose());
            std::vector<double> weights;
            for (const auto& w : doc.at("weights")) weights.push_back(w.get<double>());
            out.discrete = DiscreteMeasure(std::move(atoms), std::move(weights));
        } else {
            throw Error("posterior file: unknown kind '" + kind + "'");
        }
    } catch (const json::exception& e) {
        throw Error("posterior file: '" + path + "' is malformed: " + e.what());
    }
    return out;
}

void write_posterior(const std::string& path, const GaussianDist& g) {
    json doc;
    doc["kind"] = "gaussian";
    doc["mean"] = to_json(g.mean());
    doc["cov"] = to_json(g.cov());
    write_json(path, doc);
}

void write_posterior(const std::string& path, const GaussianMixture& g) {
    json doc;
    doc["kind"] = "gmm";
    doc["weights"] = g.weights();
    json comps = json::array();
    for (const auto& c : g.components()) {
        json comp;
        comp["mean"] = to_json(c.mean());
        comp["cov"] = to_json(c.cov());
        comps.push_back(comp);
    }
    doc["components"] = comps;
    write_json(path, doc);
}

void write_posterior(const std::string& path, const DiscreteMeasure& g) {
    json doc;
    doc["kind"] = "discrete";
    json atoms = json::array();
    for (const auto& atom : g.atoms()) atoms.push_back(to_json(atom));
    doc["atoms"] = atoms;
    doc["weights"] = g.weights();
    write_json(path, doc);
}

}  // namespace vmp
