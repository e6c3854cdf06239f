// Command-line surface: builds representations, verifies bracket relations,
// solves the constraint hierarchy, runs bilinear checks, factors
// representations and reproduces the conjecture operators. All arithmetic is
// exact; output is deterministic.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "virakdv/diffz.hpp"
#include "virakdv/factorization.hpp"
#include "virakdv/gw.hpp"
#include "virakdv/json_io.hpp"
#include "virakdv/presets.hpp"
#include "virakdv/solver.hpp"

using namespace virakdv;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIdentityFailure = 1;
constexpr int kExitConfigError = 2;

struct RunConfig {
    std::string preset;
    std::string config_path;
    std::string variety_file;
    int kmax = 3;
    int mode_cutoff = 0;  // 0: derive from kmax/degree
    int degree = 12;
    std::string s_text = "-1/2";
    std::string hbar_text = "1/2";
    bool second_equation = false;
    std::string output = "text";

    Scalar s() const { return Scalar::from_string(s_text); }
    Scalar hbar() const { return Scalar::from_string(hbar_text); }
    bool json() const { return output == "json"; }
};

int thread_cap_from_env() {
    const char* env = std::getenv("VIRAKDV_THREADS");
    if (!env) return 1;
    std::string v(env);
    try {
        size_t pos = 0;
        int n = std::stoi(v, &pos);
        if (pos != v.size() || n < 1) throw std::invalid_argument(v);
        return n;
    } catch (...) {
        throw ConfigError("VIRAKDV_THREADS must be a positive integer, got '" + v + "'");
    }
}

void merge_config_file(RunConfig& cfg, const CLI::App& cmd) {
    if (cfg.config_path.empty()) return;
    std::ifstream in(cfg.config_path);
    if (!in) throw ConfigError("cannot open config file " + cfg.config_path);
    Json j = Json::parse(in, nullptr, true, true);
    auto absent = [&](const std::string& flag) { return cmd.count(flag) == 0; };
    if (j.contains("preset") && absent("--preset")) cfg.preset = j.at("preset").get<std::string>();
    if (j.contains("kmax") && absent("--kmax")) cfg.kmax = j.at("kmax").get<int>();
    if (j.contains("mode_cutoff") && absent("--mode-cutoff"))
        cfg.mode_cutoff = j.at("mode_cutoff").get<int>();
    if (j.contains("degree") && absent("--degree")) cfg.degree = j.at("degree").get<int>();
    if (j.contains("s") && absent("--s")) cfg.s_text = j.at("s").get<std::string>();
    if (j.contains("hbar") && absent("--hbar")) cfg.hbar_text = j.at("hbar").get<std::string>();
    if (j.contains("output") && absent("--output")) cfg.output = j.at("output").get<std::string>();
    if (j.contains("variety_file") && cfg.variety_file.empty())
        cfg.variety_file = j.at("variety_file").get<std::string>();
}

bool is_variety_preset(const std::string& name) {
    return name == "point" || name == "k3" || name == "gw2dim";
}

VarietyData variety_for(const RunConfig& cfg) {
    if (!cfg.variety_file.empty()) {
        std::ifstream in(cfg.variety_file);
        if (!in) throw ConfigError("cannot open variety file " + cfg.variety_file);
        Json j = Json::parse(in, nullptr, true, true);
        return variety_from_json(j);
    }
    if (cfg.preset == "point") return point_variety(cfg.hbar());
    if (cfg.preset == "k3") return k3_variety(cfg.hbar());
    if (cfg.preset == "gw2dim") return gw2dim_variety(cfg.hbar());
    throw ConfigError("preset '" + cfg.preset + "' does not define cohomological data");
}

int resolved_cutoff(const RunConfig& cfg, int K) {
    int M = cfg.mode_cutoff > 0 ? cfg.mode_cutoff : std::max(2 * K + 3, cfg.degree + 1);
    if (M % 2 == 0) ++M;
    if (M < 2 * K + 3)
        throw ConfigError("mode cutoff " + std::to_string(M) + " is below 2*kmax+3 = " +
                          std::to_string(2 * K + 3));
    return M;
}

SL2Data sl2_for(const RunConfig& cfg, int M) {
    if (cfg.preset == "canonical1d") return canonical1d_data(cfg.s(), M);
    if (cfg.preset == "wk1d") return wk1d_data(cfg.s(), M);
    if (is_variety_preset(cfg.preset) || !cfg.variety_file.empty())
        return derive_sl2_from_variety(variety_for(cfg), M);
    throw ConfigError("unknown preset '" + cfg.preset + "'");
}

std::string coefficient_label(const Monomial& m) {
    // Subscript naming: concatenated exponents of t_1, t_3, ... up to the last
    // nonzero entry.
    int top = 0;
    for (const auto& [v, e] : m.exps()) top = std::max(top, v.mode);
    std::string sub;
    for (int mode = 1; mode <= top; mode += 2) sub += std::to_string(m.exponent({mode, 1}));
    if (sub.empty()) sub = "0";
    return "f_" + sub;
}

std::string monomial_text(const Monomial& m) {
    if (m.is_one()) return "1";
    std::string out;
    for (const auto& [v, e] : m.exps()) {
        if (!out.empty()) out += " ";
        out += "t_" + std::to_string(v.mode);
        if (v.alpha != 1) out += "," + std::to_string(v.alpha);
        if (e != 1) out += "^" + std::to_string(e);
    }
    return out;
}

int cmd_build_verify(const RunConfig& cfg, bool verify_only, const std::string& rep_file) {
    VirasoroRep rep = [&] {
        if (!rep_file.empty()) {
            std::ifstream in(rep_file);
            if (!in) throw ConfigError("cannot open representation file " + rep_file);
            return rep_from_json(Json::parse(in, nullptr, true, true));
        }
        int K = cfg.kmax;
        int M = resolved_cutoff(cfg, K);
        return extend_to_W(sl2_for(cfg, M), K, M);
    }();
    VerifyReport report = verify_rep(rep, rep.K, rep.K);
    if (cfg.json()) {
        Json out;
        out["task"] = verify_only ? "verify" : "build";
        if (!verify_only) out["representation"] = rep_to_json(rep);
        Json pairs = Json::array();
        for (const auto& p : report.pairs) {
            Json e;
            e["i"] = p.i;
            e["j"] = p.j;
            e["window"] = p.window;
            e["max_abs_numerator"] = p.max_abs_numerator.get_str();
            pairs.push_back(std::move(e));
        }
        out["bracket_residuals"] = std::move(pairs);
        out["all_zero"] = report.all_zero;
        std::cout << out.dump(2) << "\n";
    } else {
        if (!verify_only) std::cout << rep_to_json(rep).dump(2) << "\n";
        std::cout << "bracket relations [L_i, L_j] = (i-j) L_{i+j}:\n" << report.summary();
        std::cout << (report.all_zero ? "all residuals zero\n" : "NONZERO residuals present\n");
    }
    return report.all_zero ? kExitOk : kExitIdentityFailure;
}

int cmd_solve(const RunConfig& cfg) {
    int D = cfg.degree;
    int kmax_needed = std::max(1, ((D % 2 == 0 ? D - 1 : D) - 3) / 2);
    int K = std::max(cfg.kmax, kmax_needed);
    int M = resolved_cutoff(cfg, K);
    SL2Data data = sl2_for(cfg, M);
    if (data.dim() != 1)
        throw ConfigError("solve needs one-dimensional data; use 'factor' for higher dimensions");
    auto ops = quantized_family(data, K, M);
    TruncatedSeries tau = solve_constraints_1d(ops, K, D);
    TruncatedSeries F = log_series(tau);
    if (cfg.json()) {
        Json out;
        out["task"] = "solve";
        out["preset"] = cfg.preset;
        out["s"] = scalar_to_json(cfg.s());
        out["degree"] = D;
        out["log_tau"] = series_to_json(F);
        out["tau"] = series_to_json(tau);
        std::cout << out.dump(2) << "\n";
    } else {
        std::cout << "log tau to weighted degree " << D << " (preset " << cfg.preset
                  << ", s = " << cfg.s().pretty() << "):\n";
        for (const auto& [m, c] : F.terms())
            std::cout << coefficient_label(m) << " = " << c.pretty() << "   [" << monomial_text(m)
                      << "]\n";
    }
    return kExitOk;
}

int cmd_kdv_check(const RunConfig& cfg) {
    int D = cfg.degree;
    int kmax_needed = std::max(1, ((D % 2 == 0 ? D - 1 : D) - 3) / 2);
    int K = std::max(cfg.kmax, kmax_needed);
    int M = resolved_cutoff(cfg, K);
    SL2Data data = sl2_for(cfg, M);
    if (data.dim() != 1) throw ConfigError("kdv-check needs one-dimensional data");
    auto ops = quantized_family(data, K, M);
    TruncatedSeries tau = solve_constraints_1d(ops, K, D);

    bool canonicalized = false;
    std::string scale_note;
    try {
        auto [lambda, s_can] = canonical_rescale(ops.at(-1));
        tau = rescale_series(tau, lambda, true);
        canonicalized = true;
        scale_note = "rescaled to canonical coordinates (s = " + s_can.pretty() + ")";
    } catch (const NonRationalScale& e) {
        scale_note = std::string("canonical scale is irrational; checking the solution directly (") +
                     e.what() + ")";
    }

    TruncatedSeries residual = hirota_kdv_residual(tau);
    bool ok = residual.is_zero();
    Json weight6 = Json::array();
    bool second_ok = true;
    if (cfg.second_equation) {
        auto eqs = kp_bilinear_equations(5);
        for (const auto& [ym, combo] : eqs) {
            TruncatedSeries r = evaluate_bilinear(combo, tau);
            bool zero = r.is_zero();
            if (!zero) second_ok = false;
            std::string label;
            for (const auto& [mode, e] : ym) label += "y" + std::to_string(mode) + "^" + std::to_string(e);
            Json e;
            e["y_monomial"] = label;
            e["reliable_degree"] = r.degree_cutoff();
            e["zero"] = zero;
            weight6.push_back(std::move(e));
        }
    }

    if (cfg.json()) {
        Json out;
        out["task"] = "kdv-check";
        out["scale"] = scale_note;
        out["canonicalized"] = canonicalized;
        out["first_equation_reliable_degree"] = residual.degree_cutoff();
        out["first_equation_zero"] = ok;
        if (!ok) out["first_equation_residual"] = series_to_json(residual);
        if (cfg.second_equation) out["weight6_equations"] = std::move(weight6);
        std::cout << out.dump(2) << "\n";
    } else {
        std::cout << scale_note << "\n";
        std::cout << "first bilinear equation through degree " << residual.degree_cutoff() << ": "
                  << (ok ? "zero" : "NONZERO") << "\n";
        if (cfg.second_equation)
            std::cout << "weight-6 equations: " << (second_ok ? "zero" : "NONZERO") << "\n";
    }
    return (ok && second_ok) ? kExitOk : kExitIdentityFailure;
}

int cmd_factor(const RunConfig& cfg) {
    int D = cfg.degree;
    int D_solve = D + 2 * cfg.kmax + 3;
    int K = std::max(cfg.kmax, std::max(1, ((D_solve % 2 == 0 ? D_solve - 1 : D_solve) - 3) / 2));
    int M = resolved_cutoff(cfg, K);
    VarietyData v = variety_for(cfg);
    SL2Data data = derive_sl2_from_variety(v, M);
    VirasoroRep rep = extend_to_W(data, K, M);
    Splitting sp = simultaneous_diagonalize(data.pairing, data.F.qq(), data.B, data.c);
    std::vector<VirasoroRep> factors = split_rep(rep, sp);

    bool factors_ok = true;
    for (const auto& f : factors)
        if (!verify_rep(f, std::min(f.K, 5), std::min(f.K, 5)).all_zero) factors_ok = false;

    std::vector<TruncatedSeries> taus;
    for (const auto& f : factors) {
        std::map<int, FockOperator> ops;
        for (const auto& [k, g] : f.gens) ops.emplace(k, quantize(g, *f.pairing));
        taus.push_back(solve_constraints_1d(ops, f.K, D_solve));
    }
    ProductAnnihilationReport annih = check_product_annihilation(rep, sp, taus, cfg.kmax);

    if (cfg.json()) {
        Json out;
        out["task"] = "factor";
        out["splitting"] = splitting_to_json(sp);
        out["factors_verify"] = factors_ok;
        Json res = Json::array();
        for (const auto& e : annih.entries) {
            Json r;
            r["k"] = e.k;
            r["reliable_degree"] = e.reliable_degree;
            r["zero"] = e.residual.is_zero();
            if (!e.residual.is_zero()) r["residual_monomials"] = series_to_json(e.residual)["terms"];
            res.push_back(std::move(r));
        }
        out["product_annihilation"] = std::move(res);
        out["all_zero"] = annih.all_zero;
        std::cout << out.dump(2) << "\n";
    } else {
        std::cout << "splitting: " << splitting_to_json(sp).dump() << "\n";
        std::cout << "factors pass bracket relations: " << (factors_ok ? "yes" : "NO") << "\n";
        for (const auto& e : annih.entries)
            std::cout << "product residual at level " << e.k << " through degree "
                      << e.reliable_degree << ": " << (e.residual.is_zero() ? "zero" : "NONZERO")
                      << "\n";
    }
    return (factors_ok && annih.all_zero) ? kExitOk : kExitIdentityFailure;
}

int cmd_lbar_check(const RunConfig& cfg) {
    VarietyData v = variety_for(cfg);
    int M = cfg.mode_cutoff > 0 ? cfg.mode_cutoff : 11;
    LbarReport direct = check_lbar_equals_lhat(v, cfg.kmax, M);
    LbarReport folk = cfg.kmax >= 2 ? folk_regeneration(v, cfg.kmax, M) : LbarReport{};
    bool ok = direct.all_equal && folk.all_equal;
    if (cfg.json()) {
        Json out;
        out["task"] = "lbar-check";
        auto dump = [](const LbarReport& r) {
            Json arr = Json::array();
            for (const auto& e : r.entries) {
                Json x;
                x["k"] = e.k;
                x["equal"] = e.equal;
                if (!e.equal) x["mismatch"] = e.mismatch;
                arr.push_back(std::move(x));
            }
            return arr;
        };
        out["direct"] = dump(direct);
        out["regenerated_from_sl2"] = dump(folk);
        out["all_equal"] = ok;
        std::cout << out.dump(2) << "\n";
    } else {
        for (const auto& e : direct.entries)
            std::cout << "level " << e.k << ": " << (e.equal ? "equal" : "MISMATCH " + e.mismatch)
                      << "\n";
        for (const auto& e : folk.entries)
            std::cout << "regenerated level " << e.k << ": "
                      << (e.equal ? "equal" : "MISMATCH " + e.mismatch) << "\n";
        std::cout << (ok ? "operators agree\n" : "operators DISAGREE\n");
    }
    return ok ? kExitOk : kExitIdentityFailure;
}

int cmd_gw(const RunConfig& cfg, const std::string& task_override) {
    if (task_override == "lbar-check") return cmd_lbar_check(cfg);
    if (!task_override.empty() && task_override != "operators")
        throw ConfigError("unknown gw task '" + task_override + "'");
    VarietyData v = variety_for(cfg);
    int M = cfg.mode_cutoff > 0 ? cfg.mode_cutoff : 11;
    auto ops = build_gw_operators(v, cfg.kmax, M);
    auto [via_mu, via_chern] = libgober_wood_constant(v);
    if (cfg.json()) {
        Json out;
        out["task"] = "gw";
        out["euler_characteristic"] = scalar_to_json(euler_characteristic(v));
        out["grading_constant_via_hodge_sum"] = scalar_to_json(via_mu);
        out["grading_constant_via_chern"] = scalar_to_json(via_chern);
        Json jops = Json::object();
        for (const auto& [k, op] : ops) jops[std::to_string(k)] = fock_to_json(op);
        out["operators"] = std::move(jops);
        std::cout << out.dump(2) << "\n";
    } else {
        std::cout << "euler characteristic: " << euler_characteristic(v).pretty() << "\n";
        std::cout << "grading constant via hodge sum:   " << via_mu.pretty() << "\n";
        std::cout << "grading constant via chern class: " << via_chern.pretty() << "\n";
        for (const auto& [k, op] : ops)
            std::cout << "operator at level " << k << ": " << fock_to_json(op).dump() << "\n";
    }
    return via_mu == via_chern ? kExitOk : kExitIdentityFailure;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact Virasoro representations, constraint solutions and bilinear checks"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string rep_file, gw_task;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", cfg.config_path, "JSON config file");
        cmd->add_option("--preset", cfg.preset, "preset name: canonical1d, wk1d, point, k3, gw2dim");
        cmd->add_option("--kmax", cfg.kmax, "highest generator level");
        cmd->add_option("--mode-cutoff", cfg.mode_cutoff, "odd mode cutoff (0 = derive)");
        cmd->add_option("--degree", cfg.degree, "weighted degree cutoff");
        cmd->add_option("--s", cfg.s_text, "lowering-operator linear coefficient p/q");
        cmd->add_option("--hbar", cfg.hbar_text, "Planck parameter p/q");
        cmd->add_option("--output", cfg.output, "text | json")->check(CLI::IsMember({"text", "json"}));
        cmd->add_option("--variety-file", cfg.variety_file, "cohomological data JSON");
        return cmd;
    };

    CLI::App* build = add_common(app.add_subcommand("build", "build a representation and verify it"));
    CLI::App* verify = add_common(app.add_subcommand("verify", "verify bracket relations"));
    verify->add_option("--rep-file", rep_file, "serialized representation to verify");
    CLI::App* solve = add_common(app.add_subcommand("solve", "solve the constraint hierarchy"));
    CLI::App* kdv = add_common(app.add_subcommand("kdv-check", "bilinear equation check"));
    kdv->add_flag("--second", cfg.second_equation, "also check the weight-6 equations");
    CLI::App* factor = add_common(app.add_subcommand("factor", "split into one-dimensional factors"));
    CLI::App* gw = add_common(app.add_subcommand("gw", "conjecture operators from cohomological data"));
    gw->add_option("--task", gw_task, "operators (default) or lbar-check");
    CLI::App* lbar = add_common(app.add_subcommand("lbar-check", "compare the two operator routes"));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfigError;
    }

    try {
        (void)thread_cap_from_env();
        CLI::App* cmd = app.get_subcommands().front();
        merge_config_file(cfg, *cmd);
        if (cfg.preset.empty() && cfg.variety_file.empty() && rep_file.empty())
            throw ConfigError("a --preset, --variety-file or --rep-file is required");
        if (cmd == build) return cmd_build_verify(cfg, false, "");
        if (cmd == verify) return cmd_build_verify(cfg, true, rep_file);
        if (cmd == solve) return cmd_solve(cfg);
        if (cmd == kdv) return cmd_kdv_check(cfg);
        if (cmd == factor) return cmd_factor(cfg);
        if (cmd == gw) return cmd_gw(cfg, gw_task);
        if (cmd == lbar) return cmd_lbar_check(cfg);
        throw ConfigError("no task selected");
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return kExitConfigError;
    } catch (const CutoffMismatch& e) {
        std::cerr << e.what() << "\n";
        return kExitConfigError;
    } catch (const Error& e) {
        // identity failures, no-solution reports and shape violations
        std::cerr << e.what() << "\n";
        return kExitIdentityFailure;
    }
    return kExitOk;
}
