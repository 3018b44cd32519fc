#include "metlab/io.hpp"

#include <cmath>
#include <stdexcept>

namespace metlab::io {

json ext(double v) {
    if (std::isnan(v)) return nullptr;
    if (v == kNegInf) return "-inf";
    if (v == -kNegInf) return "inf";
    return v;
}

double ext_from(const json& j) {
    if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "-inf") return kNegInf;
        if (s == "inf") return -kNegInf;
        throw std::invalid_argument("not an extended real: " + s);
    }
    return j.get<double>();
}

json matrix_to_json(const Mat& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Mat matrix_from_json(const json& j) {
    if (!j.is_array() || j.empty() || !j[0].is_array()) throw std::invalid_argument("matrix: expected nested arrays");
    const auto r = static_cast<Eigen::Index>(j.size());
    const auto c = static_cast<Eigen::Index>(j[0].size());
    Mat m(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
        if (static_cast<Eigen::Index>(j[i].size()) != c) throw std::invalid_argument("matrix: ragged rows");
        for (Eigen::Index k = 0; k < c; ++k) m(i, k) = j[i][k].get<double>();
    }
    return m;
}

json vector_to_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vec vector_from_json(const json& j) {
    auto xs = j.get<std::vector<double>>();
    return Eigen::Map<Vec>(xs.data(), static_cast<Eigen::Index>(xs.size()));
}

json to_json(const NormSpec& n) {
    switch (n.kind) {
        case NormSpec::Kind::L1: return {{"kind", "L1"}};
        case NormSpec::Kind::L2: return {{"kind", "L2"}};
        case NormSpec::Kind::Linf: return {{"kind", "Linf"}};
        case NormSpec::Kind::WeightedLp: return {{"kind", "weighted"}, {"p", n.p}, {"weights", vector_to_json(n.weights)}};
    }
    return {};
}

NormSpec norm_from_json(const json& j) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "L1") return NormSpec::l1();
    if (kind == "L2") return NormSpec::l2();
    if (kind == "Linf") return NormSpec::linf();
    if (kind == "weighted" || kind == "WeightedLp") return NormSpec::weighted(j.at("p").get<double>(), vector_from_json(j.at("weights")));
    throw std::invalid_argument("unknown norm kind: " + kind);
}

json to_json(const BaseSystem& b) {
    switch (b.kind()) {
        case BaseSystem::Kind::rotation:
            return {{"kind", "rotation"}, {"alpha", b.alpha()}, {"step", b.rotation_step()}};
        case BaseSystem::Kind::cat_map: return {{"kind", "cat_map"}};
        case BaseSystem::Kind::bernoulli_shift:
            return {{"kind", "bernoulli_shift"}, {"alphabet", b.alphabet()}, {"key", b.key()}, {"probs", b.probs()}};
    }
    return {};
}

BaseSystem base_from_json(const json& j) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "rotation") {
        if (j.contains("step")) return BaseSystem::rotation_exact(j["step"].get<std::uint64_t>());
        return BaseSystem::rotation(j.value("alpha", 0.6180339887498949));
    }
    if (kind == "cat_map") return BaseSystem::cat_map();
    if (kind == "bernoulli_shift") {
        std::vector<double> probs;
        if (j.contains("probs")) probs = j["probs"].get<std::vector<double>>();
        return BaseSystem::bernoulli_shift(j.at("alphabet").get<int>(), j.at("key").get<std::uint64_t>(), probs);
    }
    throw std::invalid_argument("unknown base kind: " + kind);
}

json to_json(const Generator& g) {
    auto mats = [&] {
        json a = json::array();
        for (const Mat& m : g.matrices()) a.push_back(matrix_to_json(m));
        return a;
    };
    switch (g.kind()) {
        case Generator::Kind::constant: return {{"kind", "constant"}, {"matrix", matrix_to_json(g.matrices().front())}};
        case Generator::Kind::symbol_table: return {{"kind", "symbol_table"}, {"matrices", mats()}};
        case Generator::Kind::rotation_cell:
            return {{"kind", "rotation_cell"}, {"breaks", g.breaks()}, {"matrices", mats()}};
        case Generator::Kind::conjugated_diagonal: {
            json diags = json::array();
            for (const Vec& v : g.diagonals()) diags.push_back(vector_to_json(v));
            return {{"kind", "conjugated_diagonal"}, {"P", matrix_to_json(g.conjugator())}, {"diagonals", diags}};
        }
        case Generator::Kind::custom: throw std::invalid_argument("custom generators have no JSON form");
    }
    return {};
}

Generator generator_from_json(const json& j) {
    const auto kind = j.at("kind").get<std::string>();
    auto mats = [&] {
        std::vector<Mat> out;
        for (const auto& m : j.at("matrices")) out.push_back(matrix_from_json(m));
        return out;
    };
    if (kind == "constant") return Generator::constant(matrix_from_json(j.at("matrix")));
    if (kind == "symbol_table") return Generator::symbol_table(mats());
    if (kind == "rotation_cell") return Generator::rotation_cell(j.at("breaks").get<std::vector<double>>(), mats());
    if (kind == "conjugated_diagonal") {
        std::vector<Vec> diags;
        for (const auto& d : j.at("diagonals")) diags.push_back(vector_from_json(d));
        return Generator::conjugated_diagonal(matrix_from_json(j.at("P")), std::move(diags));
    }
    throw std::invalid_argument("unknown generator kind: " + kind);
}

CocycleSystem cocycle_from_json(const json& j) {
    return CocycleSystem(base_from_json(j.at("base")), generator_from_json(j.at("generator")),
                         j.contains("norm") ? norm_from_json(j["norm"]) : NormSpec::l2(),
                         j.value("seed", std::uint64_t{0}));
}

}  // namespace metlab::io
