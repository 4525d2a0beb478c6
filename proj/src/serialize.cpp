#include "clusterfit/serialize.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace clusterfit::serialize {

const json& require(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key))
        throw std::runtime_error("config error: missing key '" + key + "' in " + where);
    return j.at(key);
}

funclass::CompositionTree tree_from_json(const json& j) {
    funclass::CompositionTree t;
    t.s = require(j, "s", "tree node").get<double>();
    t.arity = require(j, "K", "tree node").get<int>();
    if (j.contains("children"))
        for (const auto& c : j.at("children")) t.children.push_back(tree_from_json(c));
    t.validate();
    return t;
}

json tree_to_json(const funclass::CompositionTree& tree) {
    json j;
    j["s"] = tree.s;
    j["K"] = tree.arity;
    if (!tree.children.empty()) {
        json kids = json::array();
        for (const auto& c : tree.children) kids.push_back(tree_to_json(c));
        j["children"] = kids;
    }
    return j;
}

targets::TargetFunction target_from_json(const json& j) {
    std::string regime = require(j, "regime", "target").get<std::string>();
    double amplitude = j.value("amplitude", 1.0);
    std::uint64_t seed = j.value("seed", 1ULL);
    if (regime == "isotropic") {
        double s = require(j, "s", "target").get<double>();
        int d = require(j, "d", "target").get<int>();
        return targets::make_isotropic(s, d, amplitude, seed);
    }
    if (regime == "kink") {
        double s = require(j, "s", "target").get<double>();
        auto centers = require(j, "centers", "target").get<std::vector<double>>();
        return targets::make_kink(s, static_cast<int>(centers.size()), centers, amplitude);
    }
    if (regime == "anisotropic") {
        auto s_vec = require(j, "s_vec", "target").get<std::vector<double>>();
        return targets::make_anisotropic(s_vec, amplitude, seed);
    }
    if (regime == "composition") {
        auto tree = tree_from_json(require(j, "tree", "target"));
        int d = require(j, "d", "target").get<int>();
        return targets::synthesize_composition(tree, d, amplitude, seed);
    }
    if (regime == "manifold") {
        double s = require(j, "s", "target").get<double>();
        int d = require(j, "d", "target").get<int>();
        int d_m = require(j, "d_m", "target").get<int>();
        return targets::with_manifold_regime(targets::make_isotropic(s, d, amplitude, seed), d_m);
    }
    throw std::runtime_error("config error: unknown target regime '" + regime + "'");
}

json target_to_json(const targets::TargetFunction& target, const json& original_config) {
    json j = original_config;
    j["description"] = target.description;
    j["sup_bound"] = target.spec.sup_bound;
    j["holder_norm_bound"] = target.spec.holder_norm_bound;
    return j;
}

datagen::ProcessSpec process_from_json(const json& j) {
    datagen::ProcessSpec spec;
    std::string kind = j.value("kind", "zero");
    if (kind == "fourier-gp")
        spec.kind = datagen::ProcessKind::FourierGp;
    else if (kind == "bounded-bump")
        spec.kind = datagen::ProcessKind::BoundedBump;
    else if (kind == "zero")
        spec.kind = datagen::ProcessKind::Zero;
    else
        throw std::runtime_error("config error: unknown process kind '" + kind + "'");
    spec.scale = j.value("b2", 0.0);
    spec.n_terms = j.value("n_terms", 32);
    spec.freq_min = j.value("freq_min", 0.5);
    spec.freq_max = j.value("freq_max", 2.5);
    return spec;
}

json process_to_json(const datagen::ProcessSpec& spec) {
    json j;
    j["kind"] = spec.kind == datagen::ProcessKind::FourierGp
                    ? "fourier-gp"
                    : (spec.kind == datagen::ProcessKind::BoundedBump ? "bounded-bump" : "zero");
    j["b2"] = spec.scale;
    j["n_terms"] = spec.n_terms;
    j["freq_min"] = spec.freq_min;
    j["freq_max"] = spec.freq_max;
    return j;
}

datagen::NoiseSpec noise_from_json(const json& j) {
    datagen::NoiseSpec spec;
    std::string kind = j.value("kind", "gaussian");
    if (kind == "gaussian")
        spec.kind = datagen::NoiseKind::Gaussian;
    else if (kind == "laplace")
        spec.kind = datagen::NoiseKind::Laplace;
    else
        throw std::runtime_error("config error: unknown noise kind '" + kind + "'");
    spec.scale = j.value("b3", 0.0);
    return spec;
}

json noise_to_json(const datagen::NoiseSpec& spec) {
    json j;
    j["kind"] = spec.kind == datagen::NoiseKind::Gaussian ? "gaussian" : "laplace";
    j["b3"] = spec.scale;
    return j;
}

datagen::DesignSpec design_from_json(const json& j) {
    datagen::DesignSpec spec;
    if (j.is_string()) {
        std::string s = j.get<std::string>();
        if (s == "uniform-cube") {
            spec.kind = datagen::DesignSpec::Kind::UniformCube;
            return spec;
        }
        throw std::runtime_error("config error: unknown design '" + s + "'");
    }
    std::string kind = require(j, "kind", "design").get<std::string>();
    if (kind == "uniform-cube") {
        spec.kind = datagen::DesignSpec::Kind::UniformCube;
    } else if (kind == "manifold") {
        spec.kind = datagen::DesignSpec::Kind::Manifold;
        spec.manifold_name = require(j, "name", "design").get<std::string>();
    } else {
        throw std::runtime_error("config error: unknown design kind '" + kind + "'");
    }
    return spec;
}

json design_to_json(const datagen::DesignSpec& spec) {
    if (spec.kind == datagen::DesignSpec::Kind::UniformCube) return json("uniform-cube");
    json j;
    j["kind"] = "manifold";
    j["name"] = spec.manifold_name;
    return j;
}

std::string dataset_to_csv(const datagen::Dataset& data) {
    std::ostringstream os;
    os << "subject,obs";
    for (int c = 1; c <= data.d; ++c) os << ",x" << c;
    os << ",y\n";
    char buf[64];
    for (long i = 0; i < data.n; ++i)
        for (long j = 0; j < data.m; ++j) {
            os << i << ',' << j;
            for (int c = 0; c < data.d; ++c) {
                std::snprintf(buf, sizeof buf, "%.17g", data.x[(i * data.m + j) * data.d + c]);
                os << ',' << buf;
            }
            std::snprintf(buf, sizeof buf, "%.17g", data.y[i * data.m + j]);
            os << ',' << buf << '\n';
        }
    return os.str();
}

datagen::Dataset dataset_from_csv(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("dataset csv: empty file");
    int d = 0;
    {
        std::istringstream hs(line);
        std::string col;
        int cols = 0;
        while (std::getline(hs, col, ',')) ++cols;
        d = cols - 3;
        if (d < 1) throw std::runtime_error("dataset csv: bad header");
    }
    std::vector<long> subj, obs;
    std::vector<double> xs, ys;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        std::getline(ls, cell, ',');
        subj.push_back(std::stol(cell));
        std::getline(ls, cell, ',');
        obs.push_back(std::stol(cell));
        for (int c = 0; c < d; ++c) {
            std::getline(ls, cell, ',');
            xs.push_back(std::stod(cell));
        }
        if (!std::getline(ls, cell, ',')) throw std::runtime_error("dataset csv: short row");
        ys.push_back(std::stod(cell));
    }
    if (subj.empty()) throw std::runtime_error("dataset csv: no rows");
    long n = 0, m = 0;
    for (std::size_t t = 0; t < subj.size(); ++t) {
        n = std::max(n, subj[t] + 1);
        m = std::max(m, obs[t] + 1);
    }
    if (static_cast<long>(subj.size()) != n * m)
        throw std::runtime_error("dataset csv: expected a full n x m table");
    datagen::Dataset data;
    data.n = n;
    data.m = m;
    data.d = d;
    data.x.assign(static_cast<std::size_t>(n) * m * d, 0.0);
    data.y.assign(static_cast<std::size_t>(n) * m, 0.0);
    for (std::size_t t = 0; t < subj.size(); ++t) {
        long row = subj[t] * m + obs[t];
        for (int c = 0; c < d; ++c) data.x[row * d + c] = xs[t * d + c];
        data.y[row] = ys[t];
    }
    data.validate();
    return data;
}

std::string report_to_csv(const estimator::FitReport& report) {
    std::ostringstream os;
    char buf[96];
    os << "key,value\n";
    std::snprintf(buf, sizeof buf, "final_risk,%.10g\n", report.final_risk);
    os << buf;
    std::snprintf(buf, sizeof buf, "best_restart_risk,%.10g\n", report.best_restart_risk);
    os << buf;
    std::snprintf(buf, sizeof buf, "optimization_gap,%.10g\n", report.optimization_gap);
    os << buf;
    os << "restarts," << report.restarts << '\n';
    os << "discarded_restarts," << report.discarded_restarts << '\n';
    os << "epochs_recorded," << report.loss_trace.size() << '\n';
    // wall time stays in the in-memory report; emitted files are byte-stable
    os << "config," << report.config_echo << '\n';
    return os.str();
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << content;
}

}  // namespace clusterfit::serialize
