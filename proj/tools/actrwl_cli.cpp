// Scenario-driven front end: configure a family / alpha / t0 / t grid, run
// samplers and analytic routes, and emit CSV/JSON for plotting and checking.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "actrwl/actrwl.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace actrwl;

namespace {

struct CliOverrides {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::optional<double> alpha;
    std::optional<double> t0;
    std::optional<double> t;
    std::optional<std::string> family;
};

// File values first, CLI flags override.
Scenario resolve_scenario(const CliOverrides& ov) {
    Scenario sc;
    if (!ov.config_path.empty()) sc = load_scenario(ov.config_path);
    if (ov.seed) sc.seed = *ov.seed;
    if (ov.threads) sc.threads = *ov.threads;
    if (ov.alpha) sc.alpha = *ov.alpha;
    if (ov.t0) sc.t0_list = {*ov.t0};
    if (ov.t) sc.t_list = {*ov.t};
    if (ov.family) sc.family = detail::parse_family(*ov.family, "family", 0);
    if (!ov.out_dir.empty()) sc.out_dir = ov.out_dir;
    sc.validate();
    return sc;
}

std::string scenario_stamp(const Scenario& sc) { return hash_hex(sc.hash()); }

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << j.dump(2) << "\n";
}

json report_header(const Scenario& sc) {
    json j;
    j["scenario_hash"] = scenario_stamp(sc);
    j["seed"] = sc.seed;
    j["family"] = sc.family.label();
    j["alpha"] = sc.alpha;
    j["c"] = sc.c;
    return j;
}

AlphaScale params_of(const Scenario& sc) { return AlphaScale(sc.alpha, sc.c); }

int cmd_sample(const Scenario& sc) {
    fs::create_directories(sc.out_dir);
    const std::string stamp = scenario_stamp(sc);
    const AlphaScale params = params_of(sc);
    int idx = 0;
    for (double t0 : sc.t0_list) {
        auto sets = sample_aging_increments(sc.family, params, t0, sc.t_list, sc.n,
                                            StreamSpec{sc.seed, 0}, sc.threads,
                                            sc.cutoff_ratio);
        for (const auto& s : sets) {
            std::ostringstream name;
            name << "samples_" << idx << "_t0_" << t0 << "_t_" << s.t << ".csv";
            write_sample_csv((fs::path(sc.out_dir) / name.str()).string(), s, stamp);
            ++idx;
        }
    }
    std::cout << "wrote " << idx << " sample files to " << sc.out_dir << "\n";
    return 0;
}

int cmd_aging(const Scenario& sc) {
    fs::create_directories(sc.out_dir);
    const AlphaScale params = params_of(sc);
    auto borel = sc.borel_sets;
    if (borel.empty())
        borel.push_back(BorelSet::interval(1.0, std::numeric_limits<double>::infinity()));
    const double t_max = *std::max_element(sc.t_list.begin(), sc.t_list.end());
    auto law = make_marginal_law(sc.family, params, t_max, StreamSpec{sc.seed, 1u << 20});
    json rep = report_header(sc);
    rep["checks"] = json::array();
    bool all_pass = true;
    AgingQuadrature quad{sc.quad_panels, sc.quad_nodes};
    for (double t0 : sc.t0_list) {
        for (double t : sc.t_list) {
            auto sets = sample_aging_increments(sc.family, params, t0, {t}, sc.n,
                                                StreamSpec{sc.seed, 0}, sc.threads,
                                                sc.cutoff_ratio);
            const auto& vals = sets[0].values;
            for (const auto& B : borel) {
                json cell;
                cell["t0"] = t0;
                cell["t"] = t;
                cell["B"] = B.to_string();
                const auto [p_quad, quad_err] = aging_prob_with_error(*law, B, t, t0, quad);
                std::size_t hits = 0;
                for (double v : vals)
                    if (B.contains(v)) ++hits;
                const double p_mc = static_cast<double>(hits) / static_cast<double>(sc.n);
                const double sigma =
                    std::sqrt(std::max(p_quad * (1.0 - p_quad), 1e-12) /
                              static_cast<double>(sc.n));
                cell["quadrature"] = p_quad;
                cell["quadrature_error_estimate"] = quad_err;
                cell["mc"] = p_mc;
                cell["mc_sigma"] = sigma;
                const bool pass = std::abs(p_mc - p_quad) <= 3.0 * sigma + quad_err;
                cell["pass_3sigma"] = pass;
                all_pass = all_pass && pass;
                rep["checks"].push_back(cell);
            }
            json atom;
            atom["t0"] = t0;
            atom["t"] = t;
            atom["B"] = "{0}";
            const double a_exact = zero_atom(sc.family, params, t, t0, quad);
            std::size_t zeros = 0;
            for (double v : vals)
                if (v == 0.0) ++zeros;
            const double a_mc = static_cast<double>(zeros) / static_cast<double>(sc.n);
            const double sig = std::sqrt(a_exact * (1.0 - a_exact) / static_cast<double>(sc.n));
            atom["analytic"] = a_exact;
            atom["mc"] = a_mc;
            atom["mc_sigma"] = sig;
            const bool pass = std::abs(a_mc - a_exact) <= 3.0 * sig + 2e-4;
            atom["pass_3sigma"] = pass;
            all_pass = all_pass && pass;
            rep["checks"].push_back(atom);
        }
    }
    rep["pass"] = all_pass;
    write_json(fs::path(sc.out_dir) / "aging_report.json", rep);
    std::cout << (all_pass ? "aging: PASS" : "aging: FAIL") << "\n";
    return all_pass ? 0 : 1;
}

int cmd_asymptotics(const Scenario& sc) {
    fs::create_directories(sc.out_dir);
    const AlphaScale params = params_of(sc);
    if (sc.t0_list.size() < 2)
        throw std::runtime_error("asymptotics: need at least two t0 values");
    auto B = sc.borel_sets.empty()
                 ? BorelSet::interval(1.0, std::numeric_limits<double>::infinity())
                 : sc.borel_sets.front();
    const double t = sc.t_list.front();
    auto law = make_marginal_law(sc.family, params, t, StreamSpec{sc.seed, 1u << 20});
    AgingQuadrature quad{sc.quad_panels, sc.quad_nodes};
    const double C = asymptotic_constant(*law, B, t, quad);

    std::ofstream csv(fs::path(sc.out_dir) / "asymptotics.csv", std::ios::binary);
    csv << "# actrwl asymptotics scenario=" << scenario_stamp(sc) << " seed=" << sc.seed << "\n";
    csv << "t0,prob,asymptote,ratio\n";
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    double last_ratio = 0.0;
    for (double t0 : sc.t0_list) {
        const double p = aging_prob(*law, B, t, t0, quad);
        const double asym = C * std::pow(t0, sc.alpha - 1.0);
        last_ratio = p / asym;
        csv << format_double(t0) << "," << format_double(p) << "," << format_double(asym)
            << "," << format_double(p / asym) << "\n";
        const double lx = std::log(t0), ly = std::log(p);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double m = static_cast<double>(sc.t0_list.size());
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    json rep = report_header(sc);
    rep["B"] = B.to_string();
    rep["t"] = t;
    rep["C"] = C;
    rep["C_is_zero"] = (C == 0.0);
    rep["slope"] = slope;
    rep["expected_slope"] = sc.alpha - 1.0;
    rep["final_ratio"] = last_ratio;
    const bool pass = std::abs(slope - (sc.alpha - 1.0)) <= 0.05;
    rep["pass"] = pass;
    write_json(fs::path(sc.out_dir) / "asymptotics_report.json", rep);
    std::cout << "slope = " << slope << " (expected " << sc.alpha - 1.0 << ") "
              << (pass ? "PASS" : "FAIL") << "\n";
    return pass ? 0 : 1;
}

int cmd_ffpe(const Scenario& sc) {
    fs::create_directories(sc.out_dir);
    const AlphaScale params = params_of(sc);
    const std::string stamp = scenario_stamp(sc);
    const double T = sc.ffpe_T;
    if (sc.ffpe_nx && !(sc.ffpe_X > 0.0))
        throw std::runtime_error("ffpe: ffpe_X must be set when ffpe_nx is");
    const double dx_target = std::min(0.05, sc.init_sd / 2.5);
    SpaceGrid grid = sc.ffpe_nx ? SpaceGrid{sc.ffpe_X, sc.ffpe_nx}
                                : default_space_grid(sc.family, params, T, dx_target);
    TimeGrid tg{T, sc.ffpe_nt};
    auto f = InitialDensity::gaussian(grid.x0(), grid.dx(), grid.nx, sc.init_mean, sc.init_sd);

    json rep = report_header(sc);
    rep["grid"] = {{"X", grid.X}, {"nx", grid.nx}, {"T", T}, {"nt", sc.ffpe_nt}};
    rep["results"] = json::array();
    bool all_pass = true;
    int idx = 0;
    for (double t0 : sc.t0_list) {
        auto sol = solve_ffpe(sc.family, params, t0, f, grid, tg);
        GridDensity target =
            t0 > 0.0 ? aged_density(sc.family, params, t0, T, grid)
                     : reference_density(sc.family, params, T, grid);
        GridDensity conv = convolve_initial(f, target);
        const double l1 = l1_distance(sol.final_density, conv);
        const double mass_err = std::abs(sol.mass_series.back() - 1.0);
        json r;
        r["t0"] = t0;
        r["l1_solver_vs_convolution"] = l1;
        r["final_mass_error"] = mass_err;
        r["min_value"] = sol.min_value;
        const bool pass = l1 <= 0.03 && mass_err <= 1e-3;
        r["pass"] = pass;
        all_pass = all_pass && pass;
        rep["results"].push_back(r);
        std::ostringstream base;
        base << "ffpe_" << idx << "_t0_" << t0;
        write_density_csv((fs::path(sc.out_dir) / (base.str() + ".csv")).string(),
                          sol.final_density, stamp, sc.seed);
        BinaryTable table;
        table.rows = 1;
        table.cols = sol.final_density.nx();
        table.data = sol.final_density.values;
        write_binary_table((fs::path(sc.out_dir) / (base.str() + ".bin")).string(), table);
        ++idx;
    }
    rep["pass"] = all_pass;
    write_json(fs::path(sc.out_dir) / "ffpe_report.json", rep);
    std::cout << (all_pass ? "ffpe: PASS" : "ffpe: FAIL") << "\n";
    return all_pass ? 0 : 1;
}

int cmd_selfsim(const Scenario& sc) {
    fs::create_directories(sc.out_dir);
    auto rep = self_similarity_check(sc.family, params_of(sc), sc.t0_list.front(), sc.scale_a,
                                     sc.t_list, sc.n, StreamSpec{sc.seed, 0}, 0.01, sc.threads);
    json j = report_header(sc);
    j["a"] = rep.a;
    j["hurst"] = rep.hurst;
    j["n"] = rep.n;
    j["level"] = rep.level;
    j["coordinates"] = json::array();
    for (const auto& line : rep.coordinate_tests)
        j["coordinates"].push_back({{"label", line.label},
                                    {"ks_statistic", line.statistic},
                                    {"p_value", line.p_value},
                                    {"pass", line.pass}});
    j["joint_rank"] = {{"ks_statistic", rep.joint_rank_test.statistic},
                       {"p_value", rep.joint_rank_test.p_value},
                       {"pass", rep.joint_rank_test.pass}};
    j["zero_freq_left"] = rep.zero_freq_left;
    j["zero_freq_right"] = rep.zero_freq_right;
    j["zero_atom_pass"] = rep.zero_atom_pass;
    j["pass"] = rep.pass;
    write_json(fs::path(sc.out_dir) / "selfsim_report.json", j);
    std::cout << (rep.pass ? "selfsim: PASS" : "selfsim: FAIL") << "\n";
    return rep.pass ? 0 : 1;
}

int cmd_stationarity(const Scenario& sc) {
    fs::create_directories(sc.out_dir);
    auto rep = stationarity_limit_check(sc.family, sc.c, sc.t_list.front(), sc.t0_list.front(),
                                        sc.alphas_list, sc.n, StreamSpec{sc.seed, 0}, 0.02,
                                        sc.threads);
    json j = report_header(sc);
    j["alphas"] = rep.alphas;
    j["ks_distance"] = rep.ks_distance;
    j["noise_floor"] = rep.noise_floor;
    j["monotone_within_noise"] = rep.monotone_within_noise;
    j["final_below_threshold"] = rep.final_below_threshold;
    j["kernel_mass_small_r"] = rep.kernel_mass_small_r;
    j["pass"] = rep.pass;
    write_json(fs::path(sc.out_dir) / "stationarity_report.json", j);
    std::cout << (rep.pass ? "stationarity: PASS" : "stationarity: FAIL") << "\n";
    return rep.pass ? 0 : 1;
}

int cmd_verify(const Scenario& sc) {
    fs::create_directories(sc.out_dir);
    const AlphaScale params = params_of(sc);
    json rep = report_header(sc);
    json groups = json::array();
    bool all_pass = true;
    const double level = 0.01;

    // group 1: kernel transforms and laws
    {
        json g;
        g["group"] = "kernel";
        json checks = json::array();
        bool gp = true;
        for (double t0 : sc.t0_list) {
            if (t0 <= 0.0) continue;
            AgingKernel k(sc.alpha, t0);
            for (double s : {0.5, 1.0, 2.0}) {
                const double closed = k.laplace(s);
                // truncated at r = 80/s: the discarded tail is below e^{-80}
                const double quadv = detail::aging_convolution(
                    sc.alpha, t0, 80.0 / s, [&](double r) { return std::exp(-s * r); }, 16, 48);
                const bool pass = std::abs(closed - quadv) <= 2e-7;
                json c;
                c["t0"] = t0;
                c["s"] = s;
                c["closed"] = closed;
                c["quadrature"] = quadv;
                c["pass"] = pass;
                checks.push_back(c);
                gp = gp && pass;
            }
        }
        g["checks"] = checks;
        g["pass"] = gp;
        groups.push_back(g);
        all_pass = all_pass && gp;
    }

    // group 2: path-MC distributional identities (uniform-grid inversion)
    {
        json g;
        g["group"] = "path-identities";
        const double t = sc.t_list.front();
        const std::size_t n_paths = std::min<std::size_t>(sc.n, 20000);
        const double u_max = subordinator_horizon(params, t);
        const double du = sc.du_factor * u_max;
        std::vector<double> rs(n_paths), vs(n_paths), ds(n_paths);
        parallel_for(n_paths, sc.threads, [&](std::size_t i) {
            Stream rng(StreamSpec{sc.seed, 40000 + i});
            auto path = subordinator_path(params, du, u_max, rng);
            while (path.d_max() <= t) extend_path(path, t, rng);
            auto inv = inverse_at(path, t);
            rs[i] = inv.R;
            vs[i] = inv.V;
            ds[i] = inv.D_at_E;
        });
        const double bon = level / 3.0;
        auto er = EmpiricalDist::from_samples(rs);
        auto ev = EmpiricalDist::from_samples(vs);
        auto ed = EmpiricalDist::from_samples(ds);
        AgingKernel rk(sc.alpha, t);
        auto res_r = ks_one_sample(er, [&](double x) { return rk.cdf(x); });
        auto res_v = ks_one_sample(ev, [&](double x) { return age_cdf_gb1(sc.alpha, t, x); });
        auto res_d = ks_one_sample(
            ed, [&](double x) { return x <= t ? 0.0 : 1.0 - rk.tail(x - t); });
        json checks = json::array();
        bool gp = true;
        for (auto& [name, res] : std::vector<std::pair<std::string, TestResult>>{
                 {"remaining_life", res_r}, {"age_gb1", res_v}, {"overshoot", res_d}}) {
            const bool pass = res.p_value >= bon;
            checks.push_back({{"law", name},
                              {"ks_statistic", res.statistic},
                              {"p_value", res.p_value},
                              {"pass", pass}});
            gp = gp && pass;
        }
        g["checks"] = checks;
        g["pass"] = gp;
        groups.push_back(g);
        all_pass = all_pass && gp;
    }

    // group 3: aging theorem, quadrature vs MC (3 sigma per cell)
    {
        json g;
        g["group"] = "aging-theorem";
        json checks = json::array();
        bool gp = true;
        auto borel = sc.borel_sets;
        if (borel.empty())
            borel.push_back(BorelSet::interval(1.0, std::numeric_limits<double>::infinity()));
        const double t_max = *std::max_element(sc.t_list.begin(), sc.t_list.end());
        auto law = make_marginal_law(sc.family, params, t_max, StreamSpec{sc.seed, 1u << 20});
        AgingQuadrature quad{sc.quad_panels, sc.quad_nodes};
        for (double t0 : sc.t0_list) {
            if (t0 <= 0.0) continue;
            for (double t : sc.t_list) {
                auto sets = sample_aging_increments(sc.family, params, t0, {t}, sc.n,
                                                    StreamSpec{sc.seed, 0}, sc.threads,
                                                    sc.cutoff_ratio);
                for (const auto& B : borel) {
                    const auto [pq, qe] = aging_prob_with_error(*law, B, t, t0, quad);
                    std::size_t hits = 0;
                    for (double v : sets[0].values)
                        if (B.contains(v)) ++hits;
                    const double pm = static_cast<double>(hits) / static_cast<double>(sc.n);
                    const double sig = std::sqrt(std::max(pq * (1.0 - pq), 1e-12) /
                                                 static_cast<double>(sc.n));
                    const bool pass = std::abs(pm - pq) <= 3.0 * sig + qe;
                    checks.push_back({{"t0", t0},
                                      {"t", t},
                                      {"B", B.to_string()},
                                      {"quadrature", pq},
                                      {"mc", pm},
                                      {"pass", pass}});
                    gp = gp && pass;
                }
            }
        }
        g["checks"] = checks;
        g["pass"] = gp;
        groups.push_back(g);
        all_pass = all_pass && gp;
    }

    rep["groups"] = groups;
    rep["pass"] = all_pass;
    write_json(fs::path(sc.out_dir) / "verify_report.json", rep);
    std::cout << (all_pass ? "verify: PASS" : "verify: FAIL") << "\n";
    return all_pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"aging uncoupled CTRW limits: samplers, analytic laws, FFPE solver"};
    app.require_subcommand(1);

    CliOverrides ov;
    app.add_option("--config", ov.config_path, "scenario file (key = value lines)");
    app.add_option("--out", ov.out_dir, "output directory");
    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", ov.config_path, "scenario file");
        cmd->add_option("--out", ov.out_dir, "output directory");
        cmd->add_option_function<std::uint64_t>(
            "--seed", [&ov](const std::uint64_t& v) { ov.seed = v; }, "master seed");
        cmd->add_option_function<unsigned>(
            "--threads", [&ov](const unsigned& v) { ov.threads = v; }, "worker threads");
        cmd->add_option_function<double>(
            "--alpha", [&ov](const double& v) { ov.alpha = v; }, "temporal index");
        cmd->add_option_function<double>(
            "--t0", [&ov](const double& v) { ov.t0 = v; }, "aging time");
        cmd->add_option_function<double>(
            "--t", [&ov](const double& v) { ov.t = v; }, "observation time");
        cmd->add_option_function<std::string>(
            "--family", [&ov](const std::string& v) { ov.family = v; }, "outer process");
    };

    auto* c_sample = app.add_subcommand("sample", "draw aging-increment sample sets to CSV");
    auto* c_aging = app.add_subcommand("aging", "aging probabilities: quadrature vs MC");
    auto* c_verify = app.add_subcommand("verify", "grouped verification suite");
    auto* c_ffpe = app.add_subcommand("ffpe", "solve the aged equation and cross-check");
    auto* c_asym = app.add_subcommand("asymptotics", "t0 sweep with log-log slope fit");
    auto* c_self = app.add_subcommand("selfsim", "rescaling identity check");
    auto* c_stat = app.add_subcommand("stationarity", "alpha -> 1 limit check");
    for (auto* c : {c_sample, c_aging, c_verify, c_ffpe, c_asym, c_self, c_stat}) add_common(c);

    CLI11_PARSE(app, argc, argv);

    try {
        const Scenario sc = resolve_scenario(ov);
        if (c_sample->parsed()) return cmd_sample(sc);
        if (c_aging->parsed()) return cmd_aging(sc);
        if (c_verify->parsed()) return cmd_verify(sc);
        if (c_ffpe->parsed()) return cmd_ffpe(sc);
        if (c_asym->parsed()) return cmd_asymptotics(sc);
        if (c_self->parsed()) return cmd_selfsim(sc);
        if (c_stat->parsed()) return cmd_stationarity(sc);
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
