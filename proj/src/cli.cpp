#include "tfilm/cli.hpp"

#include "tfilm/bounce.hpp"
#include "tfilm/limit_analysis.hpp"
#include "tfilm/oscillation.hpp"
#include "tfilm/polyfamily.hpp"
#include "tfilm/shooting.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

namespace tfilm::cli {

using nlohmann::json;

const std::vector<std::string>& commands() {
    static const std::vector<std::string> c{"shoot", "classify", "phaseplane", "polys", "asymptotics",
                                            "oscillation-report"};
    return c;
}

namespace {

json shoot_defaults() {
    return {{"delta0", 1e-2},         {"eps_touch", 1e-4},        {"phi_max", 1e6},
            {"cert_margin", 2.0},     {"horizon_doublings", 3},   {"restart_separation", 1e-7},
            {"theta_stop_gap", 0.05}, {"max_stages", 200000},     {"rel_tol", 1e-11},
            {"abs_tol", 1e-13}};
}

void merge(json& dst, const json& src) {
    for (auto it = src.begin(); it != src.end(); ++it) dst[it.key()] = it.value();
}

ShootConfig shoot_config(const json& c) {
    ShootConfig s;
    s.delta0 = c.at("delta0");
    s.eps_touch = c.at("eps_touch");
    s.phi_max = c.at("phi_max");
    s.cert_margin = c.at("cert_margin");
    s.horizon_doublings = c.at("horizon_doublings");
    s.restart_separation = c.at("restart_separation");
    s.theta_stop_gap = c.at("theta_stop_gap");
    s.max_stages = c.at("max_stages");
    s.integ.rel_tol = c.at("rel_tol");
    s.integ.abs_tol = c.at("abs_tol");
    if (c.contains("horizon")) s.horizon = c.at("horizon");
    return s;
}

void require(bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
}

bool same_kind(const json& a, const json& b) {
    if (a.is_number() && b.is_number()) return !(a.is_number_integer() || a.is_number_unsigned()) || b.is_number_integer() || b.is_number_unsigned();
    if (a.is_array() && b.is_array()) return true;
    return a.type() == b.type();
}

void check_finite(const json& j, const std::string& key) {
    if (j.is_number_float()) require(std::isfinite(j.get<double>()), key + " must be finite");
    if (j.is_array())
        for (const auto& e : j) {
            require(e.is_number(), key + " must hold numbers");
            require(std::isfinite(e.get<double>()), key + " must hold finite numbers");
        }
}

void validate(const std::string& cmd, const json& c) {
    auto pos = [&](const char* k) { require(c.at(k).get<double>() > 0, std::string(k) + " must be positive"); };
    auto in = [&](const char* k, double lo, double hi) {
        const double v = c.at(k).get<double>();
        require(v >= lo && v <= hi, std::string(k) + " out of range");
    };
    if (c.contains("delta0")) {
        for (auto k : {"delta0", "eps_touch", "phi_max", "cert_margin", "restart_separation", "theta_stop_gap",
                       "rel_tol", "abs_tol"})
            pos(k);
        in("horizon_doublings", 0, 20);
        in("max_stages", 1, 1e9);
        require(c.at("eps_touch").get<double>() < 1.0 && c.at("phi_max").get<double>() > 1.0,
                "eps_touch < 1 < phi_max required");
    }
    if (c.contains("sigma")) in("sigma", -1e-2, 0.0);
    if (c.contains("horizon")) pos("horizon");
    if (cmd == "shoot") {
        require(c.at("nu_lo").get<double>() < c.at("nu_hi").get<double>(), "nu_lo < nu_hi required");
        pos("tol");
        in("profile_stride", 1, 1e9);
    } else if (cmd == "classify") {
        const auto& g = c.at("nu_list");
        require(!g.empty() || c.at("nu_count").get<long>() > 0, "empty nu grid");
        if (g.empty()) require(c.at("nu_min").get<double>() <= c.at("nu_max").get<double>(), "nu_min <= nu_max required");
        in("perturbation", 0, 1e-3);
    } else if (cmd == "phaseplane") {
        require(c.at("u_min").get<double>() < c.at("u_max").get<double>(), "u_min < u_max required");
        in("n", 2, 1e7);
        in("grid_n", 2, 1e4);
        pos("grid_half_width");
        require(c.at("vhat_u_max").get<double>() > 0, "vhat_u_max must be positive");
    } else if (cmd == "polys") {
        pos("m_min");
        require(c.at("m_max").get<double>() >= c.at("m_min").get<double>(), "m_max >= m_min required");
        in("m_count", 1, 1e6);
        pos("sample_m");
        in("z_count", 2, 1e6);
    } else if (cmd == "asymptotics") {
        for (const auto& o : c.at("offsets")) require(o.get<double>() > 0 && o.get<double>() <= 1e-4, "offsets in (0, 1e-4]");
        for (const auto& k : c.at("k_values")) require(k.get<double>() > 0, "k_values must be positive");
        require(!c.at("offsets").empty() && !c.at("k_values").empty(), "offsets and k_values must be non-empty");
        pos("blowup_horizon");
    } else if (cmd == "oscillation-report") {
        pos("detune");
        pos("deep");
        in("min_prominence", 0, 1);
    }
}

std::string hex64(std::uint64_t h) {
    static const char* d = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[i] = d[h & 15];
        h >>= 4;
    }
    return s;
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
    const std::size_t t = std::max<std::size_t>(1, std::min<std::size_t>(threads, n));
    if (t == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr first;
    std::mutex mu;
    for (std::size_t k = 0; k < t; ++k)
        pool.emplace_back([&] {
            for (std::size_t i; (i = next++) < n;) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lk(mu);
                    if (!first) first = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    if (first) std::rethrow_exception(first);
}

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* e = std::getenv(kThreadsEnv)) {
        const int v = std::atoi(e);
        if (v > 0) return v;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void write_file(const std::filesystem::path& p, const std::string& body) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    f << body;
}

json trigger_json(const ShootTrigger& t) {
    return {{"criterion", t.criterion}, {"tau", t.tau}, {"xi0", t.xi0}, {"phi", t.phi}, {"h3a", t.h3a},
            {"threshold", std::isfinite(t.threshold) ? json(t.threshold) : json(nullptr)}};
}

json num_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

std::vector<double> nu_grid(const json& c) {
    std::vector<double> g;
    if (!c.at("nu_list").empty()) {
        for (const auto& v : c.at("nu_list")) g.push_back(v.get<double>());
        return g;
    }
    const int n = c.at("nu_count");
    const double lo = c.at("nu_min"), hi = c.at("nu_max");
    for (int i = 0; i < n; ++i) g.push_back(n == 1 ? lo : lo + (hi - lo) * i / (n - 1));
    return g;
}

// ---- subcommands; each returns the summary "results" object ----

json cmd_shoot(const json& c, const std::filesystem::path& out, const std::string& meta) {
    const ModelParams p{c.at("a").get<double>()};
    const ShootConfig sc = shoot_config(c);
    const HeteroclinicResult r = find_heteroclinic(p, c.at("sigma"), {c.at("nu_lo"), c.at("nu_hi")}, c.at("tol"),
                                                   c.at("horizon"), sc);
    const ProfileCheck pc = heteroclinic_profile(r, p);
    const long stride = c.at("profile_stride");
    if (stride == 1) {
        write_file(out / "profile.csv", profile_csv(r, meta));
    } else {
        HeteroclinicResult thin = r;
        thin.trajectory.t.clear();
        thin.trajectory.y.clear();
        for (std::size_t i = 0; i < r.trajectory.t.size(); i += stride) {
            thin.trajectory.t.push_back(r.trajectory.t[i]);
            thin.trajectory.y.push_back(r.trajectory.y[i]);
        }
        write_file(out / "profile.csv", profile_csv(thin, meta));
    }
    std::ostringstream jl;
    jl << json{{"meta", meta}}.dump() << '\n';
    for (const auto& pr : r.probes) {
        if (pr.stage != 0) continue;
        jl << json{{"nu", pr.param}, {"verdict", to_string(pr.verdict)}, {"trigger", trigger_json(pr.trigger)},
                   {"horizon", pr.horizon}}
                  .dump()
           << '\n';
    }
    write_file(out / "verdicts.jsonl", jl.str());
    return {{"nu_bar", r.nu_bar},
            {"bracket", {r.bracket.first, r.bracket.second}},
            {"bracket_width", std::abs(r.bracket.second - r.bracket.first)},
            {"blowup_above", r.blowup_above},
            {"stages", r.stages},
            {"probes", r.probes.size()},
            {"theta_end", r.theta_end},
            {"phi_range", {pc.phi_min, pc.phi_max}},
            {"tail_ratio", {pc.tail_ratio_start, pc.tail_ratio_end}},
            {"max_residual", num_or_null(pc.max_residual)},
            {"residual_samples", pc.residual_samples},
            {"junctions", r.junctions.size()}};
}

json cmd_classify(const json& c, const std::filesystem::path& out, const std::string& meta, int threads) {
    const ModelParams p{c.at("a").get<double>()};
    const ShootConfig sc = shoot_config(c);
    const std::vector<double> g = nu_grid(c);
    const double sigma = c.at("sigma"), horizon = c.at("horizon"), pert = c.at("perturbation");
    std::vector<ShootOutcome> res(g.size());
    std::vector<Verdict> pv(g.size(), Verdict::Undetermined);
    parallel_for(g.size(), threads, [&](std::size_t i) {
        res[i] = classify_backward({g[i], sigma}, p, horizon, sc);
        res[i].trajectory = {};
        if (pert > 0) pv[i] = classify_backward({g[i] + pert, sigma}, p, horizon, sc).verdict;
    });
    std::ostringstream jl;
    jl << json{{"meta", meta}}.dump() << '\n';
    json counts = {{"BlowUp", 0}, {"Touchdown", 0}, {"Undetermined", 0}};
    int changes = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        json rec{{"nu", g[i]},
                 {"sigma", sigma},
                 {"verdict", to_string(res[i].verdict)},
                 {"tau_end", res[i].tau_end},
                 {"trigger", trigger_json(res[i].trigger)}};
        if (pert > 0) rec["perturbed_verdict"] = to_string(pv[i]);
        jl << rec.dump() << '\n';
        counts[to_string(res[i].verdict)] = counts[to_string(res[i].verdict)].get<int>() + 1;
        if (i > 0 && res[i].verdict != res[i - 1].verdict) ++changes;
    }
    write_file(out / "verdicts.jsonl", jl.str());
    return {{"count", g.size()}, {"verdict_counts", counts}, {"verdict_changes", changes}};
}

json cmd_phaseplane(const json& c, const std::filesystem::path& out, const std::string& meta) {
    const SeparatrixTable vb = compute_separatrix(SeparatrixKind::VBar, {c.at("u_min"), c.at("u_max")}, c.at("n"));
    std::ostringstream s;
    s << meta << "\nu,v,region\n";
    for (const auto& q : vb.samples) s << fmt(q.u) << ',' << fmt(q.v) << ',' << to_string(classify_region(q)) << '\n';
    write_file(out / "vbar.csv", s.str());

    const SeparatrixTable vh =
        compute_separatrix(SeparatrixKind::VHat, {c.at("u_min"), c.at("vhat_u_max")}, c.at("n"));
    std::ostringstream h;
    h << meta << "\nu,v\n";
    for (const auto& q : vh.samples) h << fmt(q.u) << ',' << fmt(q.v) << '\n';
    write_file(out / "vhat.csv", h.str());

    const int gn = c.at("grid_n");
    const double hw = c.at("grid_half_width");
    std::ostringstream r;
    r << meta << "\nu,v,region\n";
    const EigPe e = eig_pe();
    r << fmt(e.pe.u) << ',' << fmt(e.pe.v) << ',' << to_string(classify_region(e.pe)) << '\n';
    for (int i = 0; i < gn; ++i)
        for (int j = 0; j < gn; ++j) {
            const PhasePoint q{-hw + 2 * hw * i / (gn - 1), -hw + 2 * hw * j / (gn - 1)};
            r << fmt(q.u) << ',' << fmt(q.v) << ',' << to_string(classify_region(q)) << '\n';
        }
    write_file(out / "regions.csv", r.str());
    return {{"p_e", {e.pe.u, e.pe.v}},
            {"lambda_plus", {e.lambda_plus.real(), e.lambda_plus.imag()}},
            {"closed_form_gap", e.closed_form_gap},
            {"vhat_u_range", {vh.u_range.first, vh.u_range.second}},
            {"vhat_pe_rate", vh.pe_rate},
            {"vbar_nodes", vb.samples.size()}};
}

json cmd_polys(const json& c, const std::filesystem::path& out, const std::string& meta) {
    const int n = c.at("m_count");
    const double lo = std::log10(c.at("m_min").get<double>()), hi = std::log10(c.at("m_max").get<double>());
    std::ostringstream s;
    s << meta << "\nm,z_star,beta_star,z0,slope_z0,zeta_star,zeta0,residual_p,residual_d1\n";
    double worst = 0;
    for (int i = 0; i < n; ++i) {
        const double m = n == 1 ? std::pow(10.0, lo) : std::pow(10.0, lo + (hi - lo) * i / (n - 1));
        const DoubleZeroData d = double_zero(m);
        const Z0Root z = z0_root({m, d.beta_star});
        const ZetaMarkers zm = zeta_markers(m);
        worst = std::max({worst, d.residual_p, d.residual_d1});
        s << fmt(m) << ',' << fmt(d.z_star) << ',' << fmt(d.beta_star) << ',' << fmt(z.z0) << ',' << fmt(z.slope)
          << ',' << fmt(zm.zeta_star) << ',' << fmt(zm.zeta0) << ',' << fmt(d.residual_p) << ','
          << fmt(d.residual_d1) << '\n';
    }
    write_file(out / "polys.csv", s.str());

    const double m = c.at("sample_m");
    const DoubleZeroData d = double_zero(m);
    const int nz = c.at("z_count");
    const double z0 = c.at("z_min"), z1 = c.at("z_max");
    std::ostringstream pz;
    pz << meta << "\nz,p_minus,p_star,p_plus\n";
    for (int i = 0; i < nz; ++i) {
        const double z = z0 + (z1 - z0) * i / (nz - 1);
        pz << fmt(z) << ',' << fmt(eval_P(z, {m, d.beta_star - 0.1}).p) << ',' << fmt(eval_P(z, {m, d.beta_star}).p)
           << ',' << fmt(eval_P(z, {m, d.beta_star + 0.1}).p) << '\n';
    }
    write_file(out / "pz.csv", pz.str());
    return {{"max_double_zero_residual", worst},
            {"sample_m", m},
            {"cases",
             {{"beta_star_minus", to_string(count_roots_right({m, d.beta_star - 0.1}).kind)},
              {"beta_star", to_string(count_roots_right({m, d.beta_star}).kind)},
              {"beta_star_plus", to_string(count_roots_right({m, d.beta_star + 0.1}).kind)}}}};
}

json cmd_asymptotics(const json& c, const std::filesystem::path& out, const std::string& meta) {
    LimitRunConfig lc;
    json td = json::array();
    for (const auto& o : c.at("offsets")) {
        const DichotomyResult d = dichotomy(Side::PhiBelowOne, o.get<double>(), c.at("touchdown_horizon"), lc);
        td.push_back({{"offset", o}, {"verdict", to_string(d.verdict)}, {"constant", d.fit_constant},
                      {"residual", d.fit_residual}, {"tau_star", d.tau_star ? json(*d.tau_star) : json(nullptr)}});
    }
    const StableManifoldRun bu =
        stable_manifold_trajectory(Side::PhiAboveOne, c.at("offsets")[0].get<double>(), c.at("blowup_horizon"), lc);
    json bj{{"verdict", to_string(bu.verdict)}};
    try {
        const BlowupFit f = fit_blowup_constant(bu.trajectory);
        bj["constant"] = f.constant;
        bj["tau0"] = f.tau0;
        bj["residual"] = f.residual;
    } catch (const InsufficientSpan& e) {
        bj["error"] = e.what();
    }
    std::ostringstream s;
    s << meta << "\nK,A,A_over_K5,fit_residual\n";
    json mj = json::array();
    for (const auto& k : c.at("k_values")) {
        const double K = k.get<double>();
        const MatchingResult m = matching_solution(K, default_matching_range(K));
        s << fmt(K) << ',' << fmt(m.constants.amplitude_A) << ',' << fmt(m.constants.gamma_out) << ','
          << fmt(m.constants.fit_residual) << '\n';
        mj.push_back({{"K", K}, {"A", m.constants.amplitude_A}, {"gamma_out", m.constants.gamma_out}});
    }
    write_file(out / "matching.csv", s.str());
    return {{"touchdown", td},
            {"touchdown_reference", std::pow(64.0 / 15.0, 0.25)},
            {"blowup", bj},
            {"matching", mj}};
}

json cmd_oscillation(const json& c, const std::filesystem::path& out, const std::string& meta, json& warnings) {
    const ModelParams p{c.at("a").get<double>()};
    const ShootConfig sc = shoot_config(c);
    const HeteroclinicResult r = find_heteroclinic(p, c.at("sigma"), {c.at("nu_lo"), c.at("nu_hi")}, c.at("tol"),
                                                   c.at("horizon"), sc);
    const double nu = r.nu_bar + c.at("detune").get<double>();
    double used = 0;
    const CompactState x0 = seed_state({nu, c.at("sigma")}, sc.delta0);
    const ShootOutcome o = classify_extending(x0, 0.0, p, sc, &used);
    const ExtremaSequence seq = extract_extrema(o.trajectory, c.at("min_prominence"));
    const double deep = c.at("deep");

    std::ostringstream s;
    s << meta << "\nkind,tau,phi\n";
    for (const auto& m : seq.maxima) s << "max," << fmt(m.tau) << ',' << fmt(m.phi) << '\n';
    for (const auto& m : seq.minima) s << "min," << fmt(m.tau) << ',' << fmt(m.phi) << '\n';
    write_file(out / "extrema.csv", s.str());

    json maxima = json::array();
    for (std::size_t i = 0; i < seq.maxima.size(); ++i) {
        const RescaledMax rm = rescale_max(o.trajectory, seq, int(i));
        json e{{"tau", rm.tau_star}, {"phi", rm.phi_star}, {"xi", rm.xi_star}, {"m_n", rm.m_n},
               {"beta_n", rm.beta_n}, {"delta_n", rm.delta_n}, {"deep", rm.phi_star >= deep}};
        try {
            const PolyComparison pc = compare_to_polynomial(o.trajectory, rm);
            e["poly"] = {{"zeta0", pc.zeta0}, {"max_rel_dev", pc.max_rel_dev}, {"max_d1_dev", pc.max_d1_dev},
                         {"max_d2_dev", pc.max_d2_dev}, {"beta_star", pc.beta_star},
                         {"beta_rel_dev", pc.beta_rel_dev}};
        } catch (const std::exception& ex) {
            e["poly_error"] = ex.what();
        }
        maxima.push_back(e);
    }
    json expo = nullptr;
    try {
        const ExponentFit f = iteration_exponent(seq, deep);
        expo = {{"exponent_max", f.exponent_max},
                {"exponent_min", f.exponent_min ? json(*f.exponent_min) : json(nullptr)},
                {"pairs_used", f.pairs_used}};
    } catch (const InsufficientData& ex) {
        warnings.push_back(std::string("iteration exponent: ") + ex.what());
    }
    return {{"nu_bar", r.nu_bar},      {"nu", nu},
            {"verdict", to_string(o.verdict)}, {"trigger", trigger_json(o.trigger)},
            {"horizon_used", used},    {"maxima", maxima},
            {"minima_count", seq.minima.size()}, {"exponent", expo}};
}

}  // namespace

json default_config(const std::string& cmd) {
    json c{{"schema", kSchema}, {"command", cmd}};
    if (cmd == "shoot" || cmd == "oscillation-report") {
        merge(c, shoot_defaults());
        merge(c, {{"a", 1.0}, {"sigma", -1e-3}, {"nu_lo", -2.5e-3}, {"nu_hi", 2.5e-3}, {"tol", 1e-10}, {"horizon", 200.0}});
        if (cmd == "shoot") c["profile_stride"] = 1;
        else merge(c, {{"detune", 1e-6}, {"deep", 1e2}, {"min_prominence", 1e-3}});
    } else if (cmd == "classify") {
        merge(c, shoot_defaults());
        merge(c, {{"a", 1.0}, {"sigma", -1e-3}, {"horizon", 200.0}, {"nu_min", -2.5e-3}, {"nu_max", 2.5e-3},
                  {"nu_count", 32}, {"nu_list", json::array()}, {"perturbation", 0.0}});
    } else if (cmd == "phaseplane") {
        merge(c, {{"u_min", -30.0}, {"u_max", 30.0}, {"n", 601}, {"vhat_u_max", 30.0}, {"grid_n", 61},
                  {"grid_half_width", 3.0}});
    } else if (cmd == "polys") {
        merge(c, {{"m_min", 1e-8}, {"m_max", 1e8}, {"m_count", 17}, {"sample_m", 1.0}, {"z_min", -2.0},
                  {"z_max", 4.0}, {"z_count", 241}});
    } else if (cmd == "asymptotics") {
        merge(c, {{"offsets", {1e-5, 1e-6, 1e-7}}, {"touchdown_horizon", 200.0}, {"blowup_horizon", 50.0},
                  {"k_values", {0.5, 1.0, 2.0, 4.0}}});
    } else {
        throw ConfigError("unknown command: " + cmd);
    }
    return c;
}

json resolve_config(const std::string& cmd, const json& user) {
    json c = default_config(cmd);
    if (user.is_null()) {
        validate(cmd, c);
        return c;
    }
    require(user.is_object(), "config must be a JSON object");
    for (auto it = user.begin(); it != user.end(); ++it) {
        const std::string& k = it.key();
        if (k == "schema") {
            require(it.value() == kSchema, std::string("schema must be ") + kSchema);
            continue;
        }
        if (k == "command") {
            require(it.value() == cmd, "config command does not match subcommand");
            continue;
        }
        require(c.contains(k), "unknown key: " + k);
        require(same_kind(c[k], it.value()), "type mismatch for key: " + k);
        check_finite(it.value(), k);
        c[k] = it.value();
    }
    validate(cmd, c);
    return c;
}

std::string config_hash(const json& cfg) {
    const std::string s = cfg.dump();
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    return hex64(h);
}

std::string fmt(double x) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

std::string csv_meta_line(const std::string& command, const json& cfg) {
    return std::string("# tfilm ") + kVersion + " command=" + command + " config_hash=" + config_hash(cfg);
}

std::string profile_csv(const HeteroclinicResult& r, const std::string& meta_line) {
    std::string s = meta_line + "\ntau,xi,phi,w,psi,theta,h,dh,d2h\n";
    const auto& tr = r.trajectory;
    for (std::size_t i = 0; i < tr.t.size(); ++i) {
        const CompactState c = compact_from(tr.y[i]);
        if (slice_of(c.theta) != 0) continue;
        const PhysState p = phys_of_compact(c);
        s += fmt(tr.t[i]);
        for (double v : {p.xi, c.phi, c.w, c.psi, c.theta, p.h, p.dh, p.d2h}) {
            s += ',';
            s += fmt(v);
        }
        s += '\n';
    }
    return s;
}

int run(const Options& opt, std::ostream& out, std::ostream& err) {
    json cfg;
    try {
        json user;
        if (opt.config_path) {
            std::ifstream f(*opt.config_path);
            if (!f) throw ConfigError("cannot read config " + *opt.config_path);
            try {
                user = json::parse(f);
            } catch (const json::parse_error& e) {
                throw ConfigError(std::string("malformed config: ") + e.what());
            }
        }
        cfg = resolve_config(opt.command, user);
    } catch (const std::exception& e) {
        err << json{{"error", "config"}, {"message", e.what()}}.dump() << '\n';
        return 2;
    }
    if (opt.dry_run) {
        out << cfg.dump(2) << '\n';
        return 0;
    }
    const std::filesystem::path dir(opt.out_dir);
    try {
        std::filesystem::create_directories(dir);
    } catch (const std::exception& e) {
        err << json{{"error", "config"}, {"message", e.what()}}.dump() << '\n';
        return 2;
    }
    const int threads = resolve_threads(opt.threads);
    const std::string meta = csv_meta_line(opt.command, cfg);
    const auto t0 = std::chrono::steady_clock::now();
    json warnings = json::array();
    json results;
    try {
        const std::string& c = opt.command;
        if (c == "shoot") results = cmd_shoot(cfg, dir, meta);
        else if (c == "classify") results = cmd_classify(cfg, dir, meta, threads);
        else if (c == "phaseplane") results = cmd_phaseplane(cfg, dir, meta);
        else if (c == "polys") results = cmd_polys(cfg, dir, meta);
        else if (c == "asymptotics") results = cmd_asymptotics(cfg, dir, meta);
        else results = cmd_oscillation(cfg, dir, meta, warnings);
    } catch (const std::exception& e) {
        std::string kind = "numerical";
        if (dynamic_cast<const BracketInvalid*>(&e)) kind = "BracketInvalid";
        else if (dynamic_cast<const HorizonExhausted*>(&e)) kind = "HorizonExhausted";
        const json ej{{"error", kind}, {"message", e.what()}, {"config_hash", config_hash(cfg)}};
        err << ej.dump() << '\n';
        try {
            write_file(dir / "error.json", ej.dump(2) + "\n");
        } catch (...) {
        }
        return 1;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const json summary{{"tool_version", kVersion}, {"config_hash", config_hash(cfg)}, {"config", cfg},
                       {"results", results},     {"seconds", secs},               {"threads", threads},
                       {"warnings", warnings}};
    write_file(dir / "summary.json", summary.dump(2) + "\n");
    out << summary.dump(2) << '\n';
    return 0;
}

int main_entry(int argc, char** argv) {
    CLI::App app{"tfilm: heteroclinic connections of the thin-film accumulation equation"};
    app.require_subcommand(1);
    Options opt;
    for (const auto& name : commands()) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", opt.config_path, "JSON config file");
        sub->add_option("--out", opt.out_dir, "output directory");
        sub->add_option("--threads", opt.threads, "worker threads (default: $TFILM_THREADS or all cores)");
        sub->add_flag("--dry-run", opt.dry_run, "print the resolved config and exit");
        sub->callback([&opt, name] { opt.command = name; });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    return run(opt, std::cout, std::cerr);
}

}  // namespace tfilm::cli
