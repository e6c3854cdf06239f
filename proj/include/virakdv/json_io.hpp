#pragma once

#include <string>

#include "json.hpp"
#include "virakdv/diffz.hpp"
#include "virakdv/factorization.hpp"
#include "virakdv/gw_data.hpp"
#include "virakdv/virasoro.hpp"

namespace virakdv {

using Json = nlohmann::ordered_json;

inline Json scalar_to_json(const Scalar& s) { return s.str(); }

inline Scalar scalar_from_json(const Json& j) {
    if (!j.is_string()) throw ConfigError("expected a \"num/den\" string");
    return Scalar::from_string(j.get<std::string>());
}

inline Json matrix_to_json(const Matrix& m) {
    Json rows = Json::array();
    for (int i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(scalar_to_json(m(i, j)));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Matrix matrix_from_json(const Json& j) {
    if (!j.is_array() || j.empty()) throw ConfigError("expected a matrix as array of arrays");
    int rows = static_cast<int>(j.size());
    int cols = static_cast<int>(j.at(0).size());
    Matrix m(rows, cols);
    for (int r = 0; r < rows; ++r) {
        const Json& row = j.at(r);
        if (static_cast<int>(row.size()) != cols) throw ConfigError("ragged matrix");
        for (int c = 0; c < cols; ++c) m(r, c) = scalar_from_json(row.at(c));
    }
    return m;
}

inline Json operator_to_json(const QuadOperator& op) {
    const int n = op.dim();
    Json j;
    j["type_index"] = op.type_index();
    j["mode_cutoff"] = op.mode_cutoff();
    j["linear_vec"] = matrix_to_json(op.has_linear() ? op.linear() : Matrix(1, n));
    j["const_term"] = scalar_to_json(op.const_term());
    j["qq"] = matrix_to_json(op.has_qq() ? op.qq() : Matrix(n, n));
    Json qp = Json::object();
    for (const auto& [mode, m] : op.qp()) qp[std::to_string(mode)] = matrix_to_json(m);
    j["qp"] = std::move(qp);
    Json pp = Json::object();
    for (const auto& [mode, m] : op.pp()) pp[std::to_string(mode)] = matrix_to_json(m);
    j["pp"] = std::move(pp);
    return j;
}

inline QuadOperator operator_from_json(const Json& j, const PairingPtr& pairing) {
    QuadParts parts;
    parts.linear = matrix_from_json(j.at("linear_vec"));
    parts.const_term = scalar_from_json(j.at("const_term"));
    Matrix qq = matrix_from_json(j.at("qq"));
    if (!qq.is_zero()) parts.qq = qq;
    for (const auto& [key, val] : j.at("qp").items()) parts.qp[std::stoi(key)] = matrix_from_json(val);
    for (const auto& [key, val] : j.at("pp").items()) parts.pp[std::stoi(key)] = matrix_from_json(val);
    return make_typed(j.at("type_index").get<int>(), pairing, parts, j.at("mode_cutoff").get<int>());
}

inline Json sl2_to_json(const SL2Data& data) {
    Json j;
    j["n"] = data.dim();
    j["M"] = data.F.mode_cutoff();
    j["eta"] = matrix_to_json(data.pairing->eta());
    j["b"] = scalar_to_json(data.b);
    j["B"] = matrix_to_json(data.B);
    j["c"] = matrix_to_json(data.c);
    j["F"] = operator_to_json(data.F);
    return j;
}

inline SL2Data sl2_from_json(const Json& j) {
    PairingPtr pairing = make_pairing(matrix_from_json(j.at("eta")));
    QuadOperator F = operator_from_json(j.at("F"), pairing);
    return make_sl2_data(pairing, F, scalar_from_json(j.at("b")), matrix_from_json(j.at("B")),
                         matrix_from_json(j.at("c")));
}

inline Json rep_to_json(const VirasoroRep& rep) {
    Json j;
    Json header;
    header["n"] = rep.pairing->dim();
    header["K"] = rep.K;
    header["M"] = rep.M;
    header["eta"] = matrix_to_json(rep.pairing->eta());
    header["b"] = scalar_to_json(rep.source.b);
    header["B"] = matrix_to_json(rep.source.B);
    header["c"] = matrix_to_json(rep.source.c);
    j["header"] = std::move(header);
    Json gens = Json::object();
    for (const auto& [k, g] : rep.gens) gens[std::to_string(k)] = operator_to_json(g);
    j["gens"] = std::move(gens);
    Json windows = Json::object();
    for (const auto& [k, w] : rep.windows) windows[std::to_string(k)] = w;
    j["windows"] = std::move(windows);
    return j;
}

inline VirasoroRep rep_from_json(const Json& j) {
    const Json& header = j.at("header");
    PairingPtr pairing = make_pairing(matrix_from_json(header.at("eta")));
    VirasoroRep rep;
    rep.pairing = pairing;
    rep.K = header.at("K").get<int>();
    rep.M = header.at("M").get<int>();
    for (const auto& [key, val] : j.at("gens").items())
        rep.gens.emplace(std::stoi(key), operator_from_json(val, pairing));
    for (const auto& [key, val] : j.at("windows").items())
        rep.windows.emplace(std::stoi(key), val.get<int>());
    rep.source.pairing = pairing;
    rep.source.F = rep.gens.at(-1);
    rep.source.b = scalar_from_json(header.at("b"));
    rep.source.B = matrix_from_json(header.at("B"));
    rep.source.c = matrix_from_json(header.at("c"));
    return rep;
}

inline std::string varid_key(const VarId& v) {
    return std::to_string(v.mode) + "," + std::to_string(v.alpha);
}

inline VarId varid_from_key(const std::string& key) {
    auto comma = key.find(',');
    if (comma == std::string::npos) throw ConfigError("expected \"mode,alpha\" key");
    return {std::stoi(key.substr(0, comma)), std::stoi(key.substr(comma + 1))};
}

inline Json series_to_json(const TruncatedSeries& f) {
    Json j;
    j["n"] = f.dim();
    j["degree_cutoff"] = f.degree_cutoff();
    Json terms = Json::array();
    for (const auto& [m, c] : f.terms()) {
        Json entry;
        Json mono = Json::object();
        for (const auto& [v, e] : m.exps()) mono[varid_key(v)] = e;
        entry["monomial"] = std::move(mono);
        entry["coeff"] = scalar_to_json(c);
        terms.push_back(std::move(entry));
    }
    j["terms"] = std::move(terms);
    return j;
}

inline TruncatedSeries series_from_json(const Json& j) {
    TruncatedSeries f(j.at("n").get<int>(), j.at("degree_cutoff").get<int>());
    for (const auto& entry : j.at("terms")) {
        Monomial m;
        for (const auto& [key, val] : entry.at("monomial").items())
            m = m.times(varid_from_key(key), val.get<int>());
        f.set(m, scalar_from_json(entry.at("coeff")));
    }
    return f;
}

inline Json diffop_to_json(const DiffOp1& d) {
    Json j;
    Json mult = Json::object();
    for (const auto& [m, c] : d.mult) mult[std::to_string(m)] = scalar_to_json(c);
    j["mult"] = std::move(mult);
    Json vf = Json::object();
    for (const auto& [m, c] : d.vf) vf[std::to_string(m)] = scalar_to_json(c);
    j["vf"] = std::move(vf);
    j["const"] = scalar_to_json(d.constant);
    return j;
}

inline DiffOp1 diffop_from_json(const Json& j) {
    DiffOp1 d;
    for (const auto& [key, val] : j.at("mult").items()) d.add_mult(std::stoi(key), scalar_from_json(val));
    for (const auto& [key, val] : j.at("vf").items()) d.add_vf(std::stoi(key), scalar_from_json(val));
    d.constant = scalar_from_json(j.at("const"));
    return d;
}

inline Json splitting_to_json(const Splitting& sp) {
    Json j;
    j["S"] = matrix_to_json(sp.S);
    Json blocks = Json::array();
    for (const auto& b : sp.blocks) blocks.push_back(b);
    j["blocks"] = std::move(blocks);
    return j;
}

inline Json fock_to_json(const FockOperator& op) {
    Json j;
    j["n"] = op.dim();
    j["constant"] = scalar_to_json(op.constant);
    auto vars = [](const std::map<VarId, Scalar>& m) {
        Json out = Json::object();
        for (const auto& [v, c] : m) out[varid_key(v)] = scalar_to_json(c);
        return out;
    };
    j["lin_t"] = vars(op.lin_t);
    j["lin_d"] = vars(op.lin_d);
    Json tt = Json::object();
    for (const auto& [p, c] : op.tt) tt[varid_key(p.a) + "|" + varid_key(p.b)] = scalar_to_json(c);
    j["tt"] = std::move(tt);
    Json td = Json::object();
    for (const auto& [p, c] : op.td) td[varid_key(p.first) + "|" + varid_key(p.second)] = scalar_to_json(c);
    j["td"] = std::move(td);
    Json dd = Json::object();
    for (const auto& [p, c] : op.dd) dd[varid_key(p.a) + "|" + varid_key(p.b)] = scalar_to_json(c);
    j["dd"] = std::move(dd);
    return j;
}

inline Json variety_to_json(const VarietyData& v) {
    Json j;
    j["r"] = v.r;
    j["hbar"] = scalar_to_json(v.hbar);
    Json hodge = Json::array();
    for (const auto& [pq, h] : v.hodge) {
        Json e;
        e["p"] = pq.first;
        e["q"] = pq.second;
        e["h"] = h;
        hodge.push_back(std::move(e));
    }
    j["hodge"] = std::move(hodge);
    Json basis = Json::array();
    for (const auto& [p, q] : v.basis) {
        Json e;
        e["p"] = p;
        e["q"] = q;
        basis.push_back(std::move(e));
    }
    j["basis"] = std::move(basis);
    j["eta"] = matrix_to_json(v.eta->eta());
    return j;
}

inline VarietyData variety_from_json(const Json& j) {
    VarietyData v;
    v.r = j.at("r").get<int>();
    v.hbar = scalar_from_json(j.at("hbar"));
    for (const auto& e : j.at("hodge"))
        v.hodge[{e.at("p").get<int>(), e.at("q").get<int>()}] = e.at("h").get<int>();
    for (const auto& e : j.at("basis"))
        v.basis.push_back({e.at("p").get<int>(), e.at("q").get<int>()});
    v.eta = make_pairing(matrix_from_json(j.at("eta")));
    return validate_variety(std::move(v));
}

} // namespace virakdv
