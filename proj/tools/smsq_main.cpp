// Command-line workbench for the SU(4) spin-momentum squeezing model:
// algebra verification, QFIM sweeps, the two interferometer schemes and
// scaling fits, with deterministic seeding and plot-ready CSV/JSON output.

#include <CLI11.hpp>
#include <json.hpp>

#include <smsq/smsq.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace smsq;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvariant = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct CommonOpts {
    std::string config_path;
    std::string out_dir = ".";
    int jobs = 1;
    std::uint64_t seed = 20230415ULL;
    int n_atoms = 20;
    std::string n_range;
    int time_points = 400;
    std::string picture = "lab";
    std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.config_path, "JSON config file; flags override its values");
    cmd->add_option("--out", o.out_dir, "output directory");
    cmd->add_option("--jobs", o.jobs, "parallel worker count");
    cmd->add_option("--seed", o.seed, "base RNG seed");
    cmd->add_option("--n", o.n_atoms, "atom number");
    cmd->add_option("--n-range", o.n_range, "atom number range lo:hi");
    cmd->add_option("--time-points", o.time_points, "time grid points over (0, pi]");
    cmd->add_option("--picture", o.picture, "lab|interaction")
        ->check(CLI::IsMember({"lab", "interaction"}));
    cmd->add_option("--override", o.overrides, "KEY=VAL config override (repeatable)");
}

/// defaults <- config file <- explicitly passed flags <- --override pairs
json merge_config(const CLI::App* cmd, const CommonOpts& o, json cfg) {
    if (!o.config_path.empty()) {
        std::ifstream in(o.config_path);
        if (!in) throw std::invalid_argument("cannot open config " + o.config_path);
        json file = json::parse(in);
        for (auto& [k, v] : file.items()) cfg[k] = v;
    }
    auto flag_set = [&](const char* name) { return cmd->count(name) > 0; };
    if (flag_set("--out")) cfg["out"] = o.out_dir;
    if (flag_set("--jobs")) cfg["jobs"] = o.jobs;
    if (flag_set("--seed")) cfg["seed"] = o.seed;
    if (flag_set("--n")) cfg["n"] = o.n_atoms;
    if (flag_set("--n-range")) cfg["n_range"] = o.n_range;
    if (flag_set("--time-points")) cfg["time_points"] = o.time_points;
    if (flag_set("--picture")) cfg["picture"] = o.picture;
    for (const auto& kv : o.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("--override expects KEY=VAL, got " + kv);
        const std::string key = kv.substr(0, eq);
        const std::string val = kv.substr(eq + 1);
        json parsed;
        try {
            parsed = json::parse(val);
        } catch (const json::parse_error&) {
            parsed = val;  // plain string
        }
        cfg[key] = parsed;
    }
    return cfg;
}

std::vector<int> parse_n_values(const json& cfg, int fallback) {
    if (cfg.contains("n_range") && !cfg["n_range"].get<std::string>().empty()) {
        const std::string s = cfg["n_range"];
        const auto c = s.find(':');
        if (c == std::string::npos) throw std::invalid_argument("n_range must be lo:hi");
        const int lo = std::stoi(s.substr(0, c)), hi = std::stoi(s.substr(c + 1));
        if (lo < 1 || hi < lo) throw std::invalid_argument("bad n_range " + s);
        if (hi > 50) std::cerr << "warning: N above 50 is untested territory\n";
        std::vector<int> ns;
        for (int n = lo; n <= hi; ++n) ns.push_back(n);
        return ns;
    }
    const int n = cfg.value("n", fallback);
    if (n > 50) std::cerr << "warning: N above 50 is untested territory\n";
    return {n};
}

Picture parse_picture(const json& cfg, Picture fallback) {
    const std::string p = cfg.value("picture", std::string(picture_name(fallback)));
    if (p == "lab") return Picture::Lab;
    if (p == "interaction") return Picture::Interaction;
    throw std::invalid_argument("picture must be lab|interaction");
}

std::vector<double> time_grid(int points) {
    std::vector<double> t(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) t[static_cast<std::size_t>(i)] = (i + 1) * M_PI / points;
    return t;
}

void write_manifest(const fs::path& dir, const std::string& command, const json& cfg,
                    const std::string& status, const std::vector<std::string>& outputs) {
    json m;
    m["schema"] = "smsq.manifest.v1";
    m["command"] = command;
    m["code_version"] = std::string(kCodeVersion);
    m["config"] = cfg;
    m["config_hash"] = fnv1a64(cfg.dump());
    m["status"] = status;
    m["outputs"] = outputs;
    std::ofstream(dir / (command + "_manifest.json")) << m.dump(2) << "\n";
}

json fit_to_json(const FitResult& f) {
    static const char* names[] = {"quadratic", "power_law", "gaussian_offset"};
    json j;
    j["model"] = names[static_cast<int>(f.model)];
    j["coefficients"] = f.coefficients;
    j["residual_norm"] = f.residual_norm;
    j["domain"] = {f.domain.first, f.domain.second};
    j["converged"] = f.converged;
    if (f.model == FitModel::PowerLaw) j["stderr_exponent"] = f.stderr_exponent;
    if (!f.note.empty()) j["note"] = f.note;
    return j;
}

// QFIM CSV column order: diagonals, the J-K anti-diagonal pairs, the
// remaining J-K cross terms, then the intra-family entries.
constexpr std::pair<int, int> kQfimColumns[] = {
    {0, 0}, {1, 1}, {2, 2}, {3, 3}, {4, 4}, {5, 5},
    {0, 5}, {1, 4}, {2, 3},
    {0, 3}, {0, 4}, {1, 3}, {1, 5}, {2, 4}, {2, 5},
    {0, 1}, {0, 2}, {1, 2},
    {3, 4}, {3, 5}, {4, 5}};

std::string qfim_csv_header() {
    std::string h = "N,chi_t";
    for (auto [i, j] : kQfimColumns)
        h += ",F" + std::to_string(i + 1) + std::to_string(j + 1);
    return h;
}

// ---------------------------------------------------------------------------

int cmd_basis_dump(const json& cfg) {
    const int n = cfg.value("n", 5);
    FockBasis b(n);
    std::ostream* os = &std::cout;
    std::ofstream file;
    std::string path;
    if (cfg.value("to_file", false)) {
        const fs::path out(cfg.value("out", std::string(".")));
        fs::create_directories(out);
        path = (out / ("basis_N" + std::to_string(n) + ".csv")).string();
        file.open(path);
        os = &file;
    }
    *os << "# schema=smsq.basis.v1 n_atoms=" << n << "\n";
    *os << "index,alpha,beta,gamma,delta\n";
    for (std::size_t i = 0; i < b.size(); ++i) {
        const auto& s = b.state(i);
        *os << i << ',' << s.alpha() << ',' << s.beta() << ',' << s.gamma() << ',' << s.delta()
            << "\n";
    }
    if (!path.empty()) std::cerr << "wrote " << path << "\n";
    return kExitOk;
}

int cmd_verify(const json& cfg) {
    std::vector<int> ns = cfg.value("verify_ns", std::vector<int>{2, 3, 4, 6, 8});
    bool all_ok = true;
    std::printf("%-36s %-4s %-12s %s\n", "check", "N", "residual", "status");
    auto report = [&](const std::string& name, int n, double resid, double tol) {
        const bool ok = resid <= tol;
        all_ok = all_ok && ok;
        std::printf("%-36s %-4d %-12.3e %s\n", name.c_str(), n, resid, ok ? "pass" : "FAIL");
    };
    for (int n : ns) {
        FockBasis b(n);
        auto rep = verify_algebra(b);
        double worst = 0;
        std::string worst_name = "-";
        for (const auto& e : rep.entries)
            if (e.residual > worst) {
                worst = e.residual;
                worst_name = e.identity;
            }
        report("algebra (worst: " + worst_name + ")", n, worst, 1e-12);

        auto prop = PropagatorCache::hamiltonian(b, ModelParams{1.0, n}, Picture::Lab);
        auto psi0 = initial_state(b);
        auto jz = collective_operator(b, Gen::Jz);
        auto kx = collective_operator(b, Gen::Kx);
        auto h = hamiltonian(b, ModelParams{1.0, n}, Picture::Lab);
        const double jz0 = expectation_real(psi0, jz), kx0 = expectation_real(psi0, kx),
                     h0 = expectation_real(psi0, h);
        double drift = 0;
        for (double t : {0.3, 0.9, 1.7, 2.5, M_PI}) {
            auto psi = prop->apply(psi0, t);
            drift = std::max(drift, std::abs(expectation_real(psi, jz) - jz0));
            drift = std::max(drift, std::abs(expectation_real(psi, kx) - kx0));
            drift = std::max(drift, std::abs(expectation_real(psi, h) - h0));
            drift = std::max(drift, std::abs(psi.norm() - 1.0));
        }
        report("conservation drift", n, drift, 1e-8);

        const double fid = fidelity(psi0, prop->apply(psi0, M_PI));
        if (n % 2 == 0) {
            report("revival infidelity at chi t=pi", n, 1.0 - fid, 1e-3);
        } else {
            std::printf("%-36s %-4d %-12.3e %s\n", "revival fidelity (odd N)", n, fid,
                        "reported");
        }

        auto gens = six_generators(b);
        auto F = qfim(prop->apply(psi0, M_PI / 4), gens, M_PI / 4);
        report("QFIM symmetry", n, (F.matrix - F.matrix.transpose()).cwiseAbs().maxCoeff(),
               1e-10);
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 6, 6>> es(F.matrix);
        report("QFIM positive semidefinite", n, std::max(0.0, -es.eigenvalues().minCoeff()),
               1e-9);
        report("conserved QFIM diagonals", n,
               std::max(std::abs(F.matrix(2, 2) - n), std::abs(F.matrix(3, 3) - n)), 1e-8);
    }
    std::printf("verify: %s\n", all_ok ? "all checks passed" : "FAILURES detected");
    return all_ok ? kExitOk : kExitInvariant;
}

int cmd_qfim_sweep(const json& cfg) {
    const auto ns = parse_n_values(cfg, 20);
    const int points = cfg.value("time_points", 400);
    const Picture picture = parse_picture(cfg, Picture::Lab);
    const int jobs = cfg.value("jobs", 1);
    const fs::path out(cfg.value("out", std::string(".")));
    fs::create_directories(out);
    write_manifest(out, "qfim_sweep", cfg, "running", {});

    const auto times = time_grid(points);
    std::vector<std::vector<Eigen::Matrix<double, 6, 6>>> rows(ns.size());
    parallel_for(ns.size(), jobs, [&](std::size_t i) {
        FockBasis b(ns[i]);
        auto prop = PropagatorCache::hamiltonian(b, ModelParams{1.0, ns[i]}, picture);
        auto gens = six_generators(b);
        auto states = prop->apply_path(initial_state(b), times);
        rows[i].reserve(times.size());
        for (std::size_t k = 0; k < times.size(); ++k)
            rows[i].push_back(qfim(states[k], gens, times[k]).matrix);
    });

    const std::string csv_path = (out / "qfim_sweep.csv").string();
    std::ofstream csv(csv_path);
    csv << "# schema=smsq.qfim_sweep.v1 picture=" << picture_name(picture) << "\n";
    csv << qfim_csv_header() << "\n";
    for (std::size_t i = 0; i < ns.size(); ++i)
        for (std::size_t k = 0; k < times.size(); ++k) {
            csv << ns[i] << ',' << g17(times[k]);
            for (auto [r, c] : kQfimColumns) csv << ',' << g17(rows[i][k](r, c));
            csv << "\n";
        }
    csv.close();

    json summary;
    summary["schema"] = "smsq.qfim_sweep_summary.v1";
    summary["picture"] = picture_name(picture);
    json per_n = json::array();
    std::vector<std::pair<double, double>> f11_pts, f66_pts;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        FockBasis b(ns[i]);
        std::size_t k_q = 0;  // pi/4 lands on the grid when points % 4 == 0
        for (std::size_t k = 0; k < times.size(); ++k)
            if (std::abs(times[k] - M_PI / 4) < std::abs(times[k_q] - M_PI / 4)) k_q = k;
        QfimResult at_plateau{ns[i], times[k_q], rows[i][k_q]};
        auto w = entanglement_witness(at_plateau);
        auto tm = find_t_max(b, times, picture);
        json rec;
        rec["N"] = ns[i];
        rec["chi_t_plateau"] = times[k_q];
        rec["F11_at_plateau"] = at_plateau.matrix(0, 0);
        rec["F66_at_plateau"] = at_plateau.matrix(5, 5);
        rec["F16_at_plateau"] = at_plateau.matrix(0, 5);
        rec["witness_diagonal"] = w.diagonal;
        rec["witness_cross_JxKz"] = w.cross[0][2];
        rec["t_max"] = tm.t_max;
        rec["cov_max"] = tm.cov_max;
        rec["t_max_on_boundary"] = tm.on_boundary;
        per_n.push_back(rec);
        f11_pts.emplace_back(ns[i], at_plateau.matrix(0, 0));
        f66_pts.emplace_back(ns[i], at_plateau.matrix(5, 5));
    }
    summary["per_n"] = per_n;
    if (f11_pts.size() >= 6) {
        summary["fit_F11_plateau"] = fit_to_json(polyfit_quadratic(f11_pts));
        summary["fit_F66_plateau"] = fit_to_json(polyfit_quadratic(f66_pts));
    }
    const std::string sum_path = (out / "qfim_sweep_summary.json").string();
    std::ofstream(sum_path) << summary.dump(2) << "\n";
    write_manifest(out, "qfim_sweep", cfg, "complete", {csv_path, sum_path});
    std::cerr << "wrote " << csv_path << " and " << sum_path << "\n";
    return kExitOk;
}

int cmd_two_param(const json& cfg) {
    SchemeConfig sc;
    sc.scheme = Scheme::TwoParameter;
    sc.n_atoms = cfg.value("n", 20);
    sc.picture = parse_picture(cfg, Picture::Interaction);
    sc.phi3 = cfg.value("phi3", M_PI / 16);
    sc.phi5 = cfg.value("phi5", M_PI / 16);
    sc.n_measurements = cfg.value("measurements", 5000);
    sc.rng_seed = cfg.value("seed", 20230415ULL);
    sc.grid_points = cfg.value("grid_points", 201);
    sc.n_seeds = cfg.value("n_seeds", 20);
    if (cfg.contains("chi_tau")) sc.chi_tau = cfg["chi_tau"].get<double>();
    const fs::path out(cfg.value("out", std::string(".")));
    fs::create_directories(out);
    write_manifest(out, "two_param", cfg, "running", {});

    FockBasis b(sc.n_atoms);
    auto r = run_two_param_scheme(b, sc);

    json rep;
    rep["schema"] = "smsq.two_param.v1";
    rep["config"] = {{"n", sc.n_atoms},
                     {"picture", picture_name(sc.picture)},
                     {"chi_tau", sc.effective_tau()},
                     {"phi3", sc.phi3},
                     {"phi5", sc.phi5},
                     {"measurements", sc.n_measurements},
                     {"seed", sc.rng_seed},
                     {"grid_points", sc.grid_points},
                     {"n_seeds", sc.n_seeds}};
    rep["theta_opt"] = r.theta_opt;
    rep["theta_flat"] = r.theta_flat;
    rep["probe_qfim"] = {{"F11", r.probe_qfim.matrix(0, 0)},
                         {"F33", r.probe_qfim.matrix(2, 2)},
                         {"F55", r.probe_qfim.matrix(4, 4)},
                         {"F66", r.probe_qfim.matrix(5, 5)}};
    json table;
    table["cfi_marginal_j"] = r.cfi_j;
    table["cfi_marginal_k"] = r.cfi_k;
    table["cfi_excluded_mass_j"] = r.cfi_excluded_j;
    table["cfi_excluded_mass_k"] = r.cfi_excluded_k;
    table["joint_fim"] = {{r.joint_fim(0, 0), r.joint_fim(0, 1)},
                          {r.joint_fim(1, 0), r.joint_fim(1, 1)}};
    table["effective_info_j"] = r.effective_info_j;
    table["effective_info_k"] = r.effective_info_k;
    table["cfi_rotated_j"] = r.cfi_rotated_j;
    table["cfi_rotated_k"] = r.cfi_rotated_k;
    table["saturation_offset"] = r.saturation_offset;
    table["ratio_cfi_to_qfim_j"] = r.cfi_j / r.probe_qfim.matrix(2, 2);
    table["ratio_cfi_to_qfim_k"] = r.cfi_k / r.probe_qfim.matrix(4, 4);
    table["ratio_rotated_to_qfim_j"] = r.cfi_rotated_j / r.probe_qfim.matrix(2, 2);
    table["ratio_rotated_to_qfim_k"] = r.cfi_rotated_k / r.probe_qfim.matrix(4, 4);
    table["mean_inv_msigma2_local_j"] = r.mean_inv_msigma2_local_j;
    table["mean_inv_msigma2_local_k"] = r.mean_inv_msigma2_local_k;
    table["mean_inv_msigma2_global_j"] = r.mean_inv_msigma2_global_j;
    table["mean_inv_msigma2_global_k"] = r.mean_inv_msigma2_global_k;
    table["ratio_local_to_effective_j"] = r.mean_inv_msigma2_local_j / r.effective_info_j;
    table["ratio_local_to_effective_k"] = r.mean_inv_msigma2_local_k / r.effective_info_k;
    rep["cfi_qfim_table"] = table;
    rep["parity_defect_j"] = r.parity_defect_j;
    rep["parity_defect_k"] = r.parity_defect_k;
    rep["phase_sign_ambiguity"] = r.parity_defect_j < 1e-9 || r.parity_defect_k < 1e-9;
    json seeds = json::array();
    for (const auto& s : r.seeds) {
        json js;
        js["seed"] = s.seed;
        js["global"] = {{"mean3", s.global.mean3},   {"mean5", s.global.mean5},
                        {"sigma3", s.global.sigma3}, {"sigma5", s.global.sigma5},
                        {"covariance", s.global.covariance}};
        js["local"] = {{"mode3", s.local.mode3},   {"mode5", s.local.mode5},
                       {"mean3", s.local.mean3},   {"mean5", s.local.mean5},
                       {"sigma3", s.local.sigma3}, {"sigma5", s.local.sigma5}};
        seeds.push_back(js);
    }
    rep["seeds"] = seeds;
    const std::string path = (out / "two_param_report.json").string();
    std::ofstream(path) << rep.dump(2) << "\n";
    write_manifest(out, "two_param", cfg, "complete", {path});
    std::cerr << "wrote " << path << "\n";
    return kExitOk;
}

int cmd_auxiliary(const json& cfg) {
    const auto ns = parse_n_values(cfg, 20);
    const fs::path out(cfg.value("out", std::string(".")));
    fs::create_directories(out);
    write_manifest(out, "auxiliary", cfg, "running", {});
    std::vector<std::string> outputs;

    json rep;
    rep["schema"] = "smsq.auxiliary.v1";
    json per_n = json::array();
    std::vector<std::pair<double, double>> inv_s2_pts, f11_pts;
    bool any_fit_failed = false;
    for (int n : ns) {
        SchemeConfig sc;
        sc.scheme = Scheme::Auxiliary;
        sc.n_atoms = n;
        sc.picture = parse_picture(cfg, Picture::Interaction);
        sc.phi1_scan_points = cfg.value("phi1_scan_points", 201);
        sc.phi1_scan_halfwidth = cfg.value("phi1_scan_halfwidth", M_PI / 2);
        if (cfg.contains("chi_tau")) sc.chi_tau = cfg["chi_tau"].get<double>();
        FockBasis b(n);
        auto r = auxiliary_scheme(b, sc);

        const std::string curve_path =
            (out / ("aux_curve_N" + std::to_string(n) + ".csv")).string();
        std::ofstream csv(curve_path);
        csv << "# schema=smsq.aux_curve.v1 n_atoms=" << n << " chi_tau=" << g17(r.tau) << "\n";
        csv << "phi1,p_top\n";
        for (auto& [phi, p] : r.curve) csv << g17(phi) << ',' << g17(p) << "\n";
        csv.close();
        outputs.push_back(curve_path);

        json rec;
        rec["N"] = n;
        rec["chi_tau"] = r.tau;
        rec["p_at_zero"] = r.p_at_zero;
        rec["fit"] = fit_to_json(r.gaussian_fit);
        rec["fit_summary"] = {{"center", r.gaussian_fit.coefficients[3]},
                              {"sigma_fid", r.sigma_fid},
                              {"offset", r.gaussian_fit.coefficients[2]},
                              {"fit_residual", r.gaussian_fit.residual_norm}};
        rec["inv_sigma_fid_sq"] = r.inv_sigma_fid_sq;
        rec["direct_bound_cfi"] = r.direct_bound.value;
        rec["direct_bound_eval_phi"] = r.direct_bound.eval_phi;
        rec["F11_at_tau"] = r.f11_at_tau;
        rec["ratio_inv_sigma2_to_F11"] = r.inv_sigma_fid_sq / r.f11_at_tau;
        rec["max_even_deviation"] = r.max_even_deviation;
        per_n.push_back(rec);
        any_fit_failed = any_fit_failed || !r.gaussian_fit.converged;
        inv_s2_pts.emplace_back(n, r.inv_sigma_fid_sq);
        f11_pts.emplace_back(n, r.f11_at_tau);
    }
    rep["per_n"] = per_n;
    if (ns.size() >= 6) {
        auto fit_inv = polyfit_quadratic(inv_s2_pts);
        auto fit_f11 = polyfit_quadratic(f11_pts);
        rep["fit_inv_sigma_fid_sq"] = fit_to_json(fit_inv);
        rep["fit_F11_at_tau"] = fit_to_json(fit_f11);
        rep["bound_ratio_leading"] = fit_inv.coefficients[0] / fit_f11.coefficients[0];
    }
    const std::string path = (out / "auxiliary_report.json").string();
    std::ofstream(path) << rep.dump(2) << "\n";
    outputs.push_back(path);
    write_manifest(out, "auxiliary", cfg, "complete", outputs);
    std::cerr << "wrote " << path << "\n";
    return any_fit_failed ? kExitNumerical : kExitOk;
}

int cmd_scaling(const json& cfg) {
    auto ns = parse_n_values(cfg, 0);
    if (ns.size() == 1) {  // default range when no explicit n-range was given
        ns.clear();
        for (int n = 4; n <= 30; ++n) ns.push_back(n);
    }
    if (ns.size() < 6) throw std::invalid_argument("scaling needs an N-range with >= 6 values");
    const double n_min = cfg.value("n_min", 4.0);
    const int points = cfg.value("time_points", 400);
    const int jobs = cfg.value("jobs", 1);
    const Picture picture = parse_picture(cfg, Picture::Lab);
    const fs::path out(cfg.value("out", std::string(".")));
    fs::create_directories(out);
    write_manifest(out, "scaling", cfg, "running", {});

    const auto times = time_grid(points);
    struct Row {
        int n = 0;
        double f11_q = 0, f66_q = 0, f16_q = 0;  // at chi t = pi/4
        double f16_prox = 0;                     // at chi t = N^{-2/5}
        double t_max = 0, cov_max = 0;
        bool boundary = false;
    };
    std::vector<Row> data(ns.size());
    parallel_for(ns.size(), jobs, [&](std::size_t i) {
        const int n = ns[i];
        FockBasis b(n);
        auto prop = PropagatorCache::hamiltonian(b, ModelParams{1.0, n}, picture);
        auto gens = six_generators(b);
        const auto psi0 = initial_state(b);
        auto fq = qfim(prop->apply(psi0, M_PI / 4), gens, M_PI / 4);
        auto fp = qfim(prop->apply(psi0, std::pow(double(n), -0.4)), gens);
        auto tm = find_t_max(b, times, picture);
        data[i] = Row{n,
                      fq.matrix(0, 0),
                      fq.matrix(5, 5),
                      fq.matrix(0, 5),
                      fp.matrix(0, 5),
                      tm.t_max,
                      tm.cov_max,
                      tm.on_boundary};
    });

    const std::string csv_path = (out / "scaling.csv").string();
    std::ofstream csv(csv_path);
    csv << "# schema=smsq.scaling.v1 picture=" << picture_name(picture) << "\n";
    csv << "N,F11_pi4,F66_pi4,F16_pi4,F16_proxy,t_max,cov_max,t_max_on_boundary\n";
    for (const auto& r : data)
        csv << r.n << ',' << g17(r.f11_q) << ',' << g17(r.f66_q) << ',' << g17(r.f16_q) << ','
            << g17(r.f16_prox) << ',' << g17(r.t_max) << ',' << g17(r.cov_max) << ','
            << (r.boundary ? 1 : 0) << "\n";
    csv.close();

    auto pts = [&](auto&& get) {
        std::vector<std::pair<double, double>> p;
        for (const auto& r : data) p.emplace_back(r.n, get(r));
        return p;
    };
    json rep;
    rep["schema"] = "smsq.scaling_report.v1";
    rep["fit_F11_pi4"] =
        fit_to_json(polyfit_quadratic(pts([](const Row& r) { return r.f11_q; }), n_min));
    rep["fit_F66_pi4"] =
        fit_to_json(polyfit_quadratic(pts([](const Row& r) { return r.f66_q; }), n_min));
    rep["fit_F16_pi4"] =
        fit_to_json(polyfit_quadratic(pts([](const Row& r) { return r.f16_q; }), n_min));
    rep["fit_F16_proxy"] =
        fit_to_json(polyfit_quadratic(pts([](const Row& r) { return r.f16_prox; }), n_min));
    rep["hls_slope_F11"] = fit_to_json(fit_power_law(pts([](const Row& r) { return r.f11_q; })));
    rep["hls_slope_F66"] = fit_to_json(fit_power_law(pts([](const Row& r) { return r.f66_q; })));
    // t_max fits use interior maxima only; odd N peaks on the t = pi boundary
    std::vector<std::pair<double, double>> tmax_pts, covmax_pts;
    for (const auto& r : data)
        if (!r.boundary) {
            tmax_pts.emplace_back(r.n, r.t_max);
            covmax_pts.emplace_back(r.n, r.cov_max);
        }
    rep["t_max_points_used"] = tmax_pts.size();
    if (tmax_pts.size() >= 2) rep["fit_t_max_power_law"] = fit_to_json(fit_power_law(tmax_pts));
    if (covmax_pts.size() >= 4)
        rep["fit_cov_at_t_max"] = fit_to_json(polyfit_quadratic(covmax_pts, n_min));
    const std::string path = (out / "scaling_report.json").string();
    std::ofstream(path) << rep.dump(2) << "\n";
    write_manifest(out, "scaling", cfg, "complete", {csv_path, path});
    std::cerr << "wrote " << csv_path << " and " << path << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SU(4) spin-momentum squeezing workbench"};
    app.require_subcommand(1);

    std::map<std::string, CommonOpts> opts;
    for (const char* name :
         {"verify", "qfim-sweep", "two-param", "auxiliary", "scaling", "basis-dump"}) {
        auto* sub = app.add_subcommand(name);
        add_common(sub, opts[name]);
    }
    int measurements = 5000;
    app.get_subcommand("two-param")
        ->add_option("--measurements", measurements, "measurement count M")
        ->check(CLI::PositiveNumber);
    bool to_file = false;
    app.get_subcommand("basis-dump")->add_flag("--to-file", to_file, "write CSV into --out");

    CLI11_PARSE(app, argc, argv);

    auto* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    try {
        json cfg = merge_config(sub, opts[name], json::object());
        if (name == "two-param" && sub->count("--measurements")) cfg["measurements"] = measurements;
        if (name == "basis-dump" && to_file) cfg["to_file"] = true;
        if (name == "verify") return cmd_verify(cfg);
        if (name == "qfim-sweep") return cmd_qfim_sweep(cfg);
        if (name == "two-param") return cmd_two_param(cfg);
        if (name == "auxiliary") return cmd_auxiliary(cfg);
        if (name == "scaling") return cmd_scaling(cfg);
        if (name == "basis-dump") return cmd_basis_dump(cfg);
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitConfig;
}
