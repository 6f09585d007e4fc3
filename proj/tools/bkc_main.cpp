// bkc_main.cpp — command-line front end: spectra, evolutions, stable modes,
// tree checks, curved operators, gap scans, and concurrent parameter sweeps.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "bkc/dynamics.hpp"
#include "bkc/geometry.hpp"
#include "bkc/io.hpp"
#include "bkc/model.hpp"
#include "bkc/perturbation.hpp"
#include "bkc/spectral.hpp"
#include "bkc/sweep.hpp"

namespace {

using nlohmann::json;
using namespace bkc;

struct Clock {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                         t0)
            .count();
    }
};

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw config_error("config " + path + " is not valid JSON: " + e.what());
    }
    return j;
}

void write_file(io::OutputGuard& guard, const std::string& path, const std::string& body) {
    guard.track(path);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("cannot open output file: " + path);
    out << body;
}

void write_sidecar(io::OutputGuard& guard, const std::string& out_prefix,
                   const std::string& command, const json& config, const Clock& clock,
                   json extra = json::object()) {
    json side = io::make_sidecar(command, config, clock.ms());
    side.update(extra);
    write_file(guard, out_prefix + ".meta.json", side.dump(2) + "\n");
}

HNParams chain_from_config(const json& cfg) {
    if (cfg.contains("chain")) return io::chain_from_json(cfg.at("chain"));
    if (!cfg.contains("model"))
        throw config_error("config requires either \"chain\" or \"model\"");
    const ModelParams raw = io::model_from_json(cfg.at("model"));
    const auto red = reduce_gauge(raw);
    const auto ch = hn_chains(red.reduced);
    const std::string quad = cfg.value("quadrature", "X");
    if (quad == "X") return ch.x_chain;
    if (quad == "P") return ch.p_chain;
    throw config_error("quadrature must be \"X\" or \"P\", got \"" + quad + "\"");
}

BandEdge band_from_config(const json& cfg) {
    const std::string b = cfg.value("band", "top");
    if (b == "top") return BandEdge::Top;
    if (b == "bottom") return BandEdge::Bottom;
    throw config_error("band must be \"top\" or \"bottom\", got \"" + b + "\"");
}

// ---------------------------------------------------------------- spectrum --

int cmd_spectrum(const json& cfg, const std::string& out) {
    Clock clock;
    io::OutputGuard guard;
    Generator g;
    if (cfg.contains("model") && cfg.value("quadrature", "X") == "coupled") {
        const ModelParams raw = io::model_from_json(cfg.at("model"));
        g = build_generator_coupled(reduce_gauge(raw).reduced);
    } else {
        g = build_generator_hn(chain_from_config(cfg));
    }
    auto spec = spectral::eigs(g, {.want_vectors = cfg.value("vectors", true)});
    std::ostringstream csv;
    spectral::write_spectrum_csv(spec, csv);
    write_file(guard, out + ".csv", csv.str());
    if (cfg.value("export_generator", false)) {
        std::ostringstream op;
        op << "row,col,value\n";
        for (int i = 0; i < g.size(); ++i)
            for (int j = 0; j < g.size(); ++j)
                if (g.mat(i, j) != 0.0)
                    op << i << ',' << j << ',' << io::format_g17(g.mat(i, j)) << '\n';
        write_file(guard, out + "_operator.csv", op.str());
    }
    json meta;
    meta["generator_fingerprint"] = io::hex64(io::fingerprint(g.mat));
    meta["fast_path"] = spec.fast_path;
    meta["generator_norm"] = spec.generator_norm;
    write_sidecar(guard, out, "spectrum", cfg, clock, meta);
    guard.commit();
    return 0;
}

// ------------------------------------------------------------------ evolve --

int cmd_evolve(const json& cfg, const std::string& out) {
    Clock clock;
    io::OutputGuard guard;
    const HNParams chain = chain_from_config(cfg);
    const BandEdge band = band_from_config(cfg);
    const auto coeffs = continuum_coefficients(chain, band);

    if (!cfg.contains("packet")) throw config_error("evolve: missing \"packet\"");
    const json& pk = cfg.at("packet");
    dynamics::WavepacketSpec wp;
    wp.center = pk.value("center", chain.L / 2);
    wp.sigma = pk.value("sigma", 4.0);
    wp.tilt = pk.value("tilt", true);
    wp.K0 = pk.contains("carrier") ? pk.at("carrier").get<double>() : coeffs.K0;
    const auto s0 = dynamics::gaussian_wavepacket(wp, chain);

    std::vector<double> times;
    if (cfg.contains("times_scaled")) {
        const double scale = std::sqrt(std::abs(chain.t_L * chain.t_R));
        for (double t : cfg.at("times_scaled")) times.push_back(t / scale);
    } else if (cfg.contains("times")) {
        for (double t : cfg.at("times")) times.push_back(t);
    } else {
        throw config_error("evolve: missing \"times\" or \"times_scaled\"");
    }

    const std::string method = cfg.value("method", "exact");
    const Generator g = build_generator_hn(chain);
    dynamics::Trajectory traj;
    if (method == "rk4") {
        const double gnorm = g.mat.cwiseAbs().rowwise().sum().maxCoeff();
        const double dt = cfg.value("dt", 0.01 / gnorm);
        traj = dynamics::evolve_rk4(g, s0, times.back(), dt,
                                    static_cast<int>(times.size()));
    } else if (method == "windowed") {
        const double delta_c = cfg.value("window_delta", 0.8);
        const auto win = dynamics::band_window(chain, band, delta_c);
        traj = dynamics::evolve_exact_windowed(spectral::eigs(g), s0, times, win.first,
                                               win.second);
    } else if (method == "exact") {
        traj = dynamics::evolve_exact(spectral::eigs(g), s0, times);
    } else {
        throw config_error("evolve: method must be exact|rk4|windowed, got " + method);
    }
    traj.generator_fingerprint = io::fingerprint(g.mat);

    const bool subtract =
        cfg.value("subtract_gain", true) && coeffs.regime == ChainRegime::Diffusive;
    if (subtract) traj = dynamics::subtract_gain(traj, coeffs.gamma);

    std::ostringstream csv;
    dynamics::write_trajectory_csv(traj, csv);
    write_file(guard, out + "_traj.csv", csv.str());

    json meta;
    meta["generator_fingerprint"] = io::hex64(traj.generator_fingerprint);
    meta["carrier_K0"] = wp.K0;
    meta["gamma"] = coeffs.gamma;
    meta["gain_subtracted"] = subtract;
    meta["dt"] = cfg.value("dt", 0.0);
    json obs = json::array();
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const auto o =
            dynamics::observables({traj.times[i], traj.states.row(i).transpose()});
        obs.push_back({{"tau", traj.times[i]},
                       {"center", o.center},
                       {"width", o.width},
                       {"peak", o.peak},
                       {"norm", o.norm}});
    }
    meta["observables"] = obs;

    if (cfg.value("overlay", false)) {
        if (coeffs.regime != ChainRegime::Diffusive)
            throw domain_error("evolve: overlay requires a diffusive chain");
        dynamics::Trajectory overlay;
        overlay.times = times;
        overlay.states.resize(static_cast<Eigen::Index>(times.size()), chain.L);
        for (std::size_t i = 0; i < times.size(); ++i) {
            Eigen::VectorXd prof =
                dynamics::continuum_gaussian(coeffs, wp, chain.L, times[i]);
            if (subtract) prof *= std::exp(-coeffs.gamma * times[i]);
            overlay.states.row(static_cast<Eigen::Index>(i)) = prof;
        }
        std::ostringstream ocsv;
        dynamics::write_trajectory_csv(overlay, ocsv);
        write_file(guard, out + "_overlay.csv", ocsv.str());
    }
    write_sidecar(guard, out, "evolve", cfg, clock, meta);
    guard.commit();
    return 0;
}

// ------------------------------------------------------------- stable-mode --

int cmd_stable_mode(const json& cfg, const std::string& out) {
    Clock clock;
    io::OutputGuard guard;
    const HNParams chain = chain_from_config(cfg);
    const auto modes = spectral::stationary_modes(chain);
    if (!modes.right_kernel)
        throw domain_error("stable-mode: even L has no stationary kernel (choose odd L)");
    std::ostringstream csv;
    csv << "site,right_kernel,left_kernel\n";
    for (int n = 0; n < chain.L; ++n) {
        csv << (n + 1) << ',' << io::format_g17((*modes.right_kernel)[n]) << ','
            << io::format_g17(modes.left_kernel ? (*modes.left_kernel)[n] : 0.0) << '\n';
    }
    write_file(guard, out + ".csv", csv.str());
    const auto g = build_generator_hn(chain);
    json meta;
    meta["kernel_residual"] =
        (g.mat * (*modes.right_kernel)).norm() /
        (g.mat.cwiseAbs().rowwise().sum().maxCoeff() * modes.right_kernel->norm());
    write_sidecar(guard, out, "stable-mode", cfg, clock, meta);
    guard.commit();
    return 0;
}

// -------------------------------------------------------------- tree-check --

int cmd_tree_check(const json& cfg, const std::string& out) {
    Clock clock;
    io::OutputGuard guard;
    const int q = cfg.value("q", 2);
    const int N = cfg.value("N", 10);
    const double t = cfg.value("t", 1.0);
    const double tau_max = cfg.value("tau_max", 10.0);
    const int samples = cfg.value("samples", 11);
    const double dt = cfg.value("dt", 0.0025 / std::max(t, 1e-12));

    const auto tree = geometry::build_tree(q, N);
    const json pf = cfg.value("profile", json{{"center", 3.0}, {"sigma", 1.5}});
    const double c0 = pf.value("center", 3.0), sg = pf.value("sigma", 1.5);
    Eigen::VectorXcd prof(N), s0(tree.nodes);
    for (int n = 0; n < N; ++n) {
        prof[n] = std::exp(-(n + 1 - c0) * (n + 1 - c0) / (2.0 * sg * sg));
        for (long long i = tree.layer_offset[n]; i < tree.layer_offset[n + 1]; ++i)
            s0[i] = prof[n];
    }
    std::vector<double> times;
    for (int i = 0; i < samples; ++i) times.push_back(tau_max * i / (samples - 1));

    auto traj = geometry::evolve_tree(tree, t, s0, times, dt);
    auto red = geometry::reduce_tree(tree, traj);
    const auto h = geometry::reduced_chain_hamiltonian(q, t, N);
    auto chain_states = dynamics::evolve_rk4_complex(h, prof, times, dt);

    std::ostringstream csv;
    csv << "tau,max_dev_vs_chain,max_nonuniformity\n";
    double worst = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double dev =
            (red.layers.row(static_cast<Eigen::Index>(i)) -
             chain_states.row(static_cast<Eigen::Index>(i)))
                .cwiseAbs()
                .maxCoeff();
        worst = std::max(worst, dev);
        csv << io::format_g17(times[i]) << ',' << io::format_g17(dev) << ','
            << io::format_g17(red.max_nonuniformity) << '\n';
    }
    write_file(guard, out + ".csv", csv.str());
    std::ostringstream edges;
    geometry::write_tree_edges_csv(tree, edges);
    write_file(guard, out + "_edges.csv", edges.str());
    json meta;
    meta["nodes"] = tree.nodes;
    meta["max_dev_vs_chain"] = worst;
    meta["max_nonuniformity"] = red.max_nonuniformity;
    write_sidecar(guard, out, "tree-check", cfg, clock, meta);
    guard.commit();
    return 0;
}

// --------------------------------------------------------------- curved-op --

int cmd_curved_op(const json& cfg, const std::string& out) {
    Clock clock;
    io::OutputGuard guard;
    const std::string kind = cfg.value("kind", "schrodinger");
    if (kind != "schrodinger" && kind != "diffusion")
        throw config_error("curved-op: kind must be schrodinger|diffusion, got " + kind);
    Generator g;
    json meta;
    if (cfg.contains("chain")) {
        const HNParams chain = io::chain_from_json(cfg.at("chain"));
        const BandEdge band = band_from_config(cfg);
        const auto co = continuum_coefficients(chain, band);
        auto metric = geometry::metric_for_chain(chain);
        if (cfg.contains("L")) metric.L = cfg.at("L").get<int>();
        if (kind == "schrodinger") {
            g = geometry::build_curved_schrodinger_operator(metric, co.mass, co.Gamma);
            meta["diag_constant"] = co.Gamma - metric.kappa / (8.0 * co.mass);
        } else {
            g = geometry::build_curved_diffusion_operator(metric, co.diffusion, co.Gamma);
            meta["diag_constant"] = co.gamma;
        }
        meta["kappa"] = metric.kappa;
    } else {
        geometry::HyperbolicMetric metric{cfg.value("kappa", 0.0), cfg.value("d", 1.0),
                                          cfg.value("L", 16), cfg.value("orientation", 1)};
        if (kind == "schrodinger")
            g = geometry::build_curved_schrodinger_operator(metric, cfg.value("mass", 1.0),
                                                            cfg.value("Gamma", 0.0));
        else
            g = geometry::build_curved_diffusion_operator(metric, cfg.value("D", 1.0),
                                                          cfg.value("Gamma", 0.0));
        meta["kappa"] = metric.kappa;
    }
    std::ostringstream op;
    op << "row,col,value\n";
    for (int i = 0; i < g.size(); ++i)
        for (int j = 0; j < g.size(); ++j)
            if (g.mat(i, j) != 0.0)
                op << i << ',' << j << ',' << io::format_g17(g.mat(i, j)) << '\n';
    write_file(guard, out + "_operator.csv", op.str());
    auto spec = spectral::eigs(g, {.want_vectors = false});
    std::ostringstream sp;
    spectral::write_spectrum_csv(spec, sp);
    write_file(guard, out + "_spectrum.csv", sp.str());
    meta["kind"] = kind;
    meta["is_hamiltonian"] = (g.kind == GeneratorKind::Hamiltonian);
    write_sidecar(guard, out, "curved-op", cfg, clock, meta);
    guard.commit();
    return 0;
}

// ---------------------------------------------------------------- gap-scan --

int cmd_gap_scan(const json& cfg, const std::string& out, unsigned threads) {
    Clock clock;
    io::OutputGuard guard;
    const double J = cfg.value("J", 1.0);
    if (!cfg.contains("Delta")) throw config_error("gap-scan: missing \"Delta\"");
    const double Delta = cfg.at("Delta").get<double>();
    const auto Ls = cfg.value("L_list", std::vector<int>{});
    const auto mus = cfg.value("mu_list", std::vector<double>{});
    if (Ls.empty() || mus.empty())
        throw config_error("gap-scan: L_list and mu_list must be non-empty");
    auto rows =
        perturbation::gap_scan(Ls, J, Delta, mus, cfg.value("exact", true), threads);
    std::ostringstream csv;
    perturbation::write_gap_scan_csv(rows, csv);
    write_file(guard, out + ".csv", csv.str());

    if (cfg.contains("track")) {
        const json& tr = cfg.at("track");
        ModelParams p;
        p.J = J;
        p.Delta = Delta;
        p.L = tr.value("L", 50);
        const int points = tr.value("points", 21);
        const double mu_max = tr.value("mu_max", 1e-3);
        std::ostringstream tcsv;
        tcsv << "mu,e_low,e_high,dE\n";
        for (int i = 1; i <= points; ++i) {
            p.mu = mu_max * i / points;
            try {
                auto dg = spectral::doublet_gap(p);
                tcsv << io::format_g17(p.mu) << ',' << io::format_g17(dg.e_low) << ','
                     << io::format_g17(dg.e_high) << ',' << io::format_g17(dg.dE) << '\n';
            } catch (const std::exception&) {
                tcsv << io::format_g17(p.mu) << ",,,\n";
            }
        }
        write_file(guard, out + "_track.csv", tcsv.str());
    }
    bool any_ok = false;
    for (const auto& r : rows) any_ok = any_ok || r.error.empty();
    write_sidecar(guard, out, "gap-scan", cfg, clock);
    guard.commit();
    return any_ok ? 0 : 1;
}

// ------------------------------------------------------------------- sweep --

int cmd_sweep(const json& cfg, const std::string& out, unsigned threads) {
    Clock clock;
    io::OutputGuard guard;
    if (!cfg.contains("grid")) throw config_error("sweep: missing \"grid\"");
    const json& grid = cfg.at("grid");
    const auto Ls = grid.value("L", std::vector<int>{});
    const auto Deltas = grid.value("Delta", std::vector<double>{});
    const auto mus = grid.value("mu", std::vector<double>{});
    if (Ls.empty() || Deltas.empty() || mus.empty())
        throw config_error("sweep: grid.L, grid.Delta, grid.mu must be non-empty");
    const std::string target = cfg.value("target", "gap");
    if (target != "gap")
        throw config_error("sweep: unknown target \"" + target + "\" (supported: gap)");
    const double J = cfg.value("J", 1.0);
    const bool with_exact = cfg.value("exact", true);

    struct Row {
        int L = 0;
        double Delta = 0.0, mu = 0.0;
        perturbation::GapScanRow r;
    };
    std::vector<Row> rows(Ls.size() * Deltas.size() * mus.size());
    sweep::run_indexed(rows.size(), threads, [&](std::size_t idx) {
        Row row;
        row.L = Ls[idx / (Deltas.size() * mus.size())];
        row.Delta = Deltas[(idx / mus.size()) % Deltas.size()];
        row.mu = mus[idx % mus.size()];
        auto sub = perturbation::gap_scan({row.L}, J, row.Delta, {row.mu}, with_exact, 1);
        row.r = sub[0];
        rows[idx] = std::move(row);
    });

    std::ostringstream csv;
    csv << "L,Delta,mu,dE_pred_mantissa,dE_pred_exp10,dE_exact,rel_err,validity_flag\n";
    bool all_failed = true;
    for (const auto& row : rows) {
        if (row.r.error.empty()) all_failed = false;
        csv << row.L << ',' << io::format_g17(row.Delta) << ',' << io::format_g17(row.mu)
            << ',' << io::format_g17(row.r.dE_pred_mantissa) << ',' << row.r.dE_pred_exp10
            << ',';
        if (row.r.dE_exact) csv << io::format_g17(*row.r.dE_exact);
        csv << ',';
        if (row.r.rel_err) csv << io::format_g17(*row.r.rel_err);
        csv << ','
            << (row.r.error.empty() ? row.r.validity : std::string("error:") + row.r.error)
            << '\n';
    }
    write_file(guard, out + ".csv", csv.str());
    json meta;
    meta["points"] = rows.size();
    meta["threads"] = threads;
    write_sidecar(guard, out, "sweep", cfg, clock, meta);
    guard.commit();
    return all_failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bkchain: quadrature-chain duality toolkit"};
    app.require_subcommand(1);

    std::string config_path, out_prefix;
    int threads_flag = 0;

    for (const char* name : {"spectrum", "evolve", "stable-mode", "tree-check",
                             "curved-op", "gap-scan", "sweep"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON config file")->required();
        sub->add_option("--out", out_prefix, "output path prefix")->required();
        sub->add_option("--threads", threads_flag,
                        "worker threads (default: env BKC_THREADS, then hardware)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            std::cout << app.help() << "\n";
            return 0;
        }
        std::cerr << e.what() << "\n";
        return 2;
    }

    try {
        const json cfg = load_config(config_path);
        const unsigned threads = sweep::resolve_threads(threads_flag);
        if (app.got_subcommand("spectrum")) return cmd_spectrum(cfg, out_prefix);
        if (app.got_subcommand("evolve")) return cmd_evolve(cfg, out_prefix);
        if (app.got_subcommand("stable-mode")) return cmd_stable_mode(cfg, out_prefix);
        if (app.got_subcommand("tree-check")) return cmd_tree_check(cfg, out_prefix);
        if (app.got_subcommand("curved-op")) return cmd_curved_op(cfg, out_prefix);
        if (app.got_subcommand("gap-scan")) return cmd_gap_scan(cfg, out_prefix, threads);
        if (app.got_subcommand("sweep")) return cmd_sweep(cfg, out_prefix, threads);
        return 2;
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
