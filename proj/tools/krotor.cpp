#include "run_config.hpp"

#include "kr/errors.hpp"

#include <CLI11.hpp>

#include <functional>
#include <iostream>
#include <map>

using kr::cli::RunConfig;

namespace {

void add_patch_options(CLI::App* sub, std::vector<double>& pk, std::vector<double>& pa, int& gap)
{
    sub->add_option("--patch-k", pk, "patch k range [k0,k1] in units of 2pi (k1 < k0 wraps)")->expected(2);
    sub->add_option("--patch-alpha", pa, "patch alpha range [a0,a1] in units of 2pi")->expected(2);
    sub->add_option("--patch-gap", gap, "gap of the band pair (gap, gap+1)")->capture_default_str();
}

std::string hint(const kr::Error& e, const RunConfig& cfg)
{
    switch (e.kind()) {
    case kr::ErrorKind::resolution:
    case kr::ErrorKind::continuity:
        return "try a finer grid, e.g. --n-k " + std::to_string(2 * cfg.n_k) + " --n-alpha " +
               std::to_string(2 * cfg.n_alpha);
    case kr::ErrorKind::regrid:
        return "a degeneracy sits on the grid; shift it, e.g. --k-offset " + std::to_string(cfg.k_offset == 0.5 ? 0.25 : 0.5);
    default:
        return "";
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"krotor: multi-gap topology and dynamics of the triple-kicked 3D quantum rotor"};
    app.set_config("--config", "", "INI file: key = value, subcommand keys under [subcommand] sections");
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.fallthrough();
    app.require_subcommand(1);

    RunConfig cfg;
    const std::map<std::string, kr::Mode> modes{{"exact", kr::Mode::exact}, {"asymptotic", kr::Mode::asymptotic}};
    const std::map<std::string, kr::PulseMapping> mappings{{"cos2_first", kr::PulseMapping::cos2_first},
                                                           {"cos_first", kr::PulseMapping::cos_first}};
    const std::map<std::string, kr::GapLabels> labels{{"adiabatic", kr::GapLabels::adiabatic},
                                                      {"sorted", kr::GapLabels::sorted}};

    app.add_option("--out-dir", cfg.out_dir, "output directory")->capture_default_str();
    app.add_option("--threads", cfg.threads, "worker cap (0: all cores)")->capture_default_str();
    app.add_option("--mode", cfg.mode, "matrix elements: exact or asymptotic")
        ->transform(CLI::CheckedTransformer(modes, CLI::ignore_case));
    app.add_option("--free-phase-multiplier", cfg.conv.free_phase_multiplier,
                   "free phase per kick exp(-i pi m l(l+1)/N), m in {1,2}")
        ->capture_default_str();
    app.add_option("--mapping", cfg.conv.mapping, "which pulse multiplies cos^2: cos2_first or cos_first")
        ->transform(CLI::CheckedTransformer(mappings, CLI::ignore_case));
    app.add_option("--keep-constant", cfg.conv.keep_constant, "keep the constant part of cos^2")
        ->capture_default_str();
    app.add_option("--eps-sign", cfg.conv.quasienergy_sign, "band labels from eps = sign * arg(lambda)")
        ->capture_default_str();
    app.add_option("--N", cfg.N, "resonance order (unit cell size)")->capture_default_str();
    app.add_option("--l-max", cfg.l_max, "angular momentum cutoff")->capture_default_str();
    app.add_option("--preset", cfg.preset, "protocol: free, zero, constant, fig1_circle, fig3_family")
        ->capture_default_str();
    std::vector<double> pulses;
    app.add_option("--pulses", pulses, "P1 P2 P3 P4 for the constant preset")->expected(4);
    app.add_option("--beta", cfg.beta, "fig3_family parameter")->capture_default_str();
    app.add_option("--n-gamma", cfg.n_gamma, "periods per protocol cycle")->capture_default_str();
    app.add_option("--cycles", cfg.cycles, "protocol cycles")->capture_default_str();
    app.add_option("--n-k", cfg.n_k, "k grid points")->capture_default_str();
    app.add_option("--n-alpha", cfg.n_alpha, "alpha grid points")->capture_default_str();
    app.add_option("--k-offset", cfg.k_offset, "k grid offset in steps")->capture_default_str();

    std::vector<double> patch_k, patch_a;
    auto* bands = app.add_subcommand("bands", "quasienergy bands on the (k, alpha) grid");
    auto* topo = app.add_subcommand("topology", "nodes, Dirac strings, Zak phases and optional patch Euler class");
    auto* phase = app.add_subcommand("phase-diagram", "nodal lines over the (P1, P4) plane");
    auto* evol = app.add_subcommand("evolve", "stroboscopic evolution of a thermal or edge state");
    auto* zak = app.add_subcommand("zak", "Zak phases of every band along k and alpha loops");
    auto* euler = app.add_subcommand("euler", "patch Euler class");
    int patch_gap = 1;
    add_patch_options(topo, patch_k, patch_a, patch_gap);
    add_patch_options(euler, patch_k, patch_a, patch_gap);

    std::vector<double> p1r, p4r;
    phase->add_option("--p1-range", p1r, "P1 min max")->expected(2);
    phase->add_option("--p4-range", p4r, "P4 min max")->expected(2);
    phase->add_option("--n1", cfg.phase.n1, "P1 points (inclusive endpoints)")->capture_default_str();
    phase->add_option("--n4", cfg.phase.n4, "P4 points (inclusive endpoints)")->capture_default_str();
    phase->add_option("--line-n-k", cfg.phase.n_k, "k samples per point")->capture_default_str();

    evol->add_option("--state", cfg.state, "thermal or edge")->capture_default_str();
    evol->add_option("--theta", cfg.theta, "thermal parameter")->capture_default_str();
    evol->add_option("--edge-gap", cfg.edge_gap, "gap hosting the edge state")->capture_default_str();
    evol->add_option("--edge-labels", cfg.edge_labels, "gap labels: adiabatic or sorted")
        ->transform(CLI::CheckedTransformer(labels, CLI::ignore_case));
    evol->add_option("--edge-window", cfg.edge_window, "boundary window in sites (0: 3N)")->capture_default_str();
    evol->add_option("--tail-threshold", cfg.tail_threshold, "tail mass flagging truncation")->capture_default_str();
    bool no_pop = false;
    evol->add_flag("--no-populations", no_pop, "skip populations.csv");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    if (!pulses.empty())
        cfg.pulses = {pulses[0], pulses[1], pulses[2], pulses[3]};
    if (!patch_k.empty() || !patch_a.empty()) {
        if (patch_k.size() != 2 || patch_a.size() != 2) {
            std::cerr << "error (config): a patch needs both --patch-k and --patch-alpha\n";
            return 1;
        }
        cfg.patch = kr::cli::PatchRect{patch_k[0], patch_k[1], patch_a[0], patch_a[1], patch_gap};
    }
    if (!p1r.empty()) {
        cfg.phase.p1_min = p1r[0];
        cfg.phase.p1_max = p1r[1];
    }
    if (!p4r.empty()) {
        cfg.phase.p4_min = p4r[0];
        cfg.phase.p4_max = p4r[1];
    }
    cfg.populations = !no_pop;

    const std::map<CLI::App*, std::function<std::string(const RunConfig&)>> runners{
        {bands, kr::cli::run_bands}, {topo, kr::cli::run_topology}, {phase, kr::cli::run_phase_diagram},
        {evol, kr::cli::run_evolve}, {zak, kr::cli::run_zak},       {euler, kr::cli::run_euler}};
    try {
        for (const auto& [sub, fn] : runners)
            if (sub->parsed())
                std::cout << fn(cfg) << '\n';
    } catch (const kr::Error& e) {
        std::cerr << "error (" << kr::error_name(e.kind()) << "): " << e.what() << '\n';
        const std::string h = hint(e, cfg);
        if (!h.empty())
            std::cerr << "hint: " << h << '\n';
        return kr::exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
