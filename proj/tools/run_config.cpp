#include "run_config.hpp"

#include "kr/errors.hpp"
#include "kr/io.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace kr::cli {

namespace {

using json = nlohmann::ordered_json;

void require(bool ok, const std::string& field, const std::string& what)
{
    if (!ok)
        throw Error(ErrorKind::config, "config field '" + field + "': " + what);
}

std::ofstream open_out(const RunConfig& cfg, const std::string& name)
{
    std::filesystem::create_directories(cfg.out_dir);
    const auto path = std::filesystem::path(cfg.out_dir) / name;
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw Error(ErrorKind::config, "cannot write " + path.string());
    return os;
}

void write_json(const RunConfig& cfg, const std::string& name, const json& j)
{
    auto os = open_out(cfg, name);
    os << j.dump(2) << '\n';
}

void write_config(const RunConfig& cfg)
{
    write_json(cfg, "run_config.json", cfg.to_json());
}

const char* mode_name(Mode m)
{
    return m == Mode::exact ? "exact" : "asymptotic";
}

json grid_json(const GridSpec& g)
{
    return {{"n_k", g.n_k}, {"n_alpha", g.n_alpha}, {"k_offset", g.k_offset}};
}

int count_gap(const std::vector<NodeRecord>& nodes, int gap)
{
    int c = 0;
    for (const auto& n : nodes)
        c += n.gap == gap;
    return c;
}

std::string rounded(double x)
{
    std::ostringstream os;
    os.precision(4);
    os << x;
    return os.str();
}

} // namespace

void RunConfig::validate(const std::string& command) const
{
    LatticeSpec{l_max, N}.validate();
    conv.validate();
    bool known = false;
    for (const auto& p : protocol_presets())
        known = known || p == preset;
    require(known, "preset", "unknown preset '" + preset + "'");
    require(n_gamma >= 1, "n-gamma", "must be >= 1");
    require(cycles >= 1, "cycles", "must be >= 1");
    require(threads >= 0, "threads", "must be >= 0");
    const bool topo = command == "topology" || command == "zak" || command == "euler";
    const int min_grid = topo ? 8 : 3;
    require(n_k >= min_grid, "n-k", "must be >= " + std::to_string(min_grid));
    require(n_alpha >= min_grid, "n-alpha", "must be >= " + std::to_string(min_grid));
    require(k_offset >= 0 && k_offset < 1, "k-offset", "must lie in [0, 1)");
    if (command == "evolve") {
        require(state == "thermal" || state == "edge", "state", "must be thermal or edge");
        require(theta > 0, "theta", "must be positive");
        require(edge_gap >= 1 && edge_gap <= N, "edge-gap", "must lie in 1..N");
        require(edge_window >= 0, "edge-window", "must be >= 0");
        require(tail_threshold > 0, "tail-threshold", "must be positive");
    }
    if (command == "euler")
        require(patch.has_value(), "patch", "euler needs a patch rectangle (patch-k, patch-alpha)");
    if (patch)
        require(patch->gap >= 1 && patch->gap <= N, "patch-gap", "must lie in 1..N");
    if (command == "phase-diagram")
        phase.validate();
}

Protocol RunConfig::protocol() const
{
    Protocol p = Protocol::from_name(preset);
    if (preset == "constant")
        p.fixed = pulses;
    p.beta = beta;
    p.n_gamma = n_gamma;
    p.cycles = cycles;
    return p;
}

json RunConfig::to_json() const
{
    json j;
    j["N"] = N;
    j["l_max"] = l_max;
    j["mode"] = mode_name(mode);
    j["n_k"] = n_k;
    j["n_alpha"] = n_alpha;
    j["k_offset"] = k_offset;
    j["preset"] = preset;
    j["pulses"] = {pulses.P1, pulses.P2, pulses.P3, pulses.P4};
    j["beta"] = beta;
    j["n_gamma"] = n_gamma;
    j["cycles"] = cycles;
    if (patch)
        j["patch"] = {{"k", {patch->k0, patch->k1}}, {"alpha", {patch->a0, patch->a1}}, {"gap", patch->gap}};
    else
        j["patch"] = nullptr;
    j["phase"] = {{"p1", {phase.p1_min, phase.p1_max}},
                  {"p4", {phase.p4_min, phase.p4_max}},
                  {"n1", phase.n1},
                  {"n4", phase.n4},
                  {"n_k", phase.n_k}};
    j["state"] = state;
    j["theta"] = theta;
    j["edge_gap"] = edge_gap;
    j["edge_labels"] = edge_labels == GapLabels::adiabatic ? "adiabatic" : "sorted";
    j["edge_window"] = edge_window;
    j["tail_threshold"] = tail_threshold;
    j["populations"] = populations;
    j["out_dir"] = out_dir;
    j["threads"] = threads;
    j["convention"] = {{"mapping", conv.mapping == PulseMapping::cos2_first ? "cos2_first" : "cos_first"},
                       {"free_phase_multiplier", conv.free_phase_multiplier},
                       {"keep_constant", conv.keep_constant},
                       {"quasienergy_sign", conv.quasienergy_sign}};
    return j;
}

RunConfig RunConfig::from_json(const json& j)
{
    RunConfig c;
    c.N = j.at("N");
    c.l_max = j.at("l_max");
    c.mode = j.at("mode") == "exact" ? Mode::exact : Mode::asymptotic;
    c.n_k = j.at("n_k");
    c.n_alpha = j.at("n_alpha");
    c.k_offset = j.at("k_offset");
    c.preset = j.at("preset");
    const auto& p = j.at("pulses");
    c.pulses = {p[0], p[1], p[2], p[3]};
    c.beta = j.at("beta");
    c.n_gamma = j.at("n_gamma");
    c.cycles = j.at("cycles");
    if (!j.at("patch").is_null()) {
        const auto& q = j.at("patch");
        c.patch = PatchRect{q.at("k")[0], q.at("k")[1], q.at("alpha")[0], q.at("alpha")[1], q.at("gap")};
    }
    const auto& ph = j.at("phase");
    c.phase.p1_min = ph.at("p1")[0];
    c.phase.p1_max = ph.at("p1")[1];
    c.phase.p4_min = ph.at("p4")[0];
    c.phase.p4_max = ph.at("p4")[1];
    c.phase.n1 = ph.at("n1");
    c.phase.n4 = ph.at("n4");
    c.phase.n_k = ph.at("n_k");
    c.state = j.at("state");
    c.theta = j.at("theta");
    c.edge_gap = j.at("edge_gap");
    c.edge_labels = j.at("edge_labels") == "adiabatic" ? GapLabels::adiabatic : GapLabels::sorted;
    c.edge_window = j.at("edge_window");
    c.tail_threshold = j.at("tail_threshold");
    c.populations = j.at("populations");
    c.out_dir = j.at("out_dir");
    c.threads = j.at("threads");
    const auto& cv = j.at("convention");
    c.conv.mapping = cv.at("mapping") == "cos2_first" ? PulseMapping::cos2_first : PulseMapping::cos_first;
    c.conv.free_phase_multiplier = cv.at("free_phase_multiplier");
    c.conv.keep_constant = cv.at("keep_constant");
    c.conv.quasienergy_sign = cv.at("quasienergy_sign");
    return c;
}

std::string run_bands(const RunConfig& cfg)
{
    cfg.validate("bands");
    const BandGrid g = band_grid(cfg.N, cfg.grid(), cfg.protocol(), cfg.conv, Executor{cfg.threads});
    auto os = open_out(cfg, "bands.csv");
    write_bands_csv(os, g);
    write_config(cfg);
    return "bands.csv: " + std::to_string(cfg.n_k * cfg.n_alpha) + " points, max imaginary residual " +
           rounded(g.max_residual);
}

namespace {

json euler_report(const RunConfig& cfg, const BandGrid& g, EulerResult* out, PatchSpec* spec)
{
    const PatchSpec p = PatchSpec::from_fractions(g.grid, cfg.patch->k0, cfg.patch->k1, cfg.patch->a0,
                                                  cfg.patch->a1, cfg.patch->gap);
    const EulerResult r = patch_euler_class(g, p);
    if (out)
        *out = r;
    if (spec)
        *spec = p;
    return patch_json(p, r, g.grid, g.N);
}

} // namespace

std::string run_topology(const RunConfig& cfg)
{
    cfg.validate("topology");
    const BandGrid g = band_grid(cfg.N, cfg.grid(), cfg.protocol(), cfg.conv, Executor{cfg.threads});
    auto nodes = detect_all_nodes(g);
    const GaugeFixed gf = assign_dirac_strings(g, nodes);

    json j;
    j["preset"] = cfg.protocol().name();
    if (cfg.preset == "fig3_family")
        j["beta"] = cfg.beta;
    j["convention"] = cfg.conv.describe();
    j["grid"] = grid_json(g.grid);
    j["max_residual_imag"] = g.max_residual;
    auto jn = json::array();
    for (const auto& n : gf.nodes)
        jn.push_back(node_json(n));
    j["nodes"] = jn;
    auto js = json::array();
    for (const auto& s : gf.strings)
        js.push_back(string_json(s));
    j["strings"] = js;
    auto jw = json::array();
    for (size_t b = 0; b < gf.winding.size(); ++b)
        jw.push_back({{"band", b + 1}, {"links", gf.winding[b].size()}});
    j["winding_strings"] = jw;

    // Zak phases along the two base loops, checked against the string crossing parity
    auto jz = json::array();
    for (int b = 0; b < g.N; ++b) {
        for (int dir = 0; dir < 2; ++dir) {
            const ZakRecord z = dir == 0 ? zak_along_k(g, b, 0) : zak_along_alpha(g, b, 0);
            const int n = dir == 0 ? g.grid.n_k : g.grid.n_alpha;
            int cross = 0;
            for (int t = 0; t < n; ++t)
                cross += gf.crossings(b, dir == 0 ? LinkId{t, 0, 0} : LinkId{0, t, 1}, g.N);
            if ((cross % 2 == 1) != (z.phase > 1))
                throw Error(ErrorKind::consistency, "Zak phase disagrees with the Dirac string crossing parity");
            json r = zak_json(z);
            r["string_crossings"] = cross;
            jz.push_back(r);
        }
    }
    j["zak"] = jz;

    std::string chi;
    if (cfg.patch) {
        EulerResult r;
        PatchSpec p;
        j["euler"] = euler_report(cfg, g, &r, &p);
        auto os = open_out(cfg, "euler_form.csv");
        write_euler_form_csv(os, r, p, g.grid);
        chi = ", chi " + std::to_string(r.chi) + " (raw " + rounded(r.chi_raw) + ")";
    } else {
        j["euler"] = nullptr;
    }
    write_json(cfg, "topology.json", j);
    auto os = open_out(cfg, "nodes.csv");
    write_nodes_csv(os, gf.nodes);
    write_config(cfg);

    std::string counts;
    for (int gap = 1; gap <= g.N; ++gap)
        counts += (gap > 1 ? "/" : "") + std::to_string(count_gap(nodes, gap));
    return "topology.json: nodes per gap " + counts + chi;
}

std::string run_phase_diagram(const RunConfig& cfg)
{
    cfg.validate("phase-diagram");
    const PhaseDiagram pd = nodal_line_map(cfg.N, cfg.phase, cfg.conv, Executor{cfg.threads});
    {
        auto os = open_out(cfg, "phase_diagram.csv");
        write_phase_csv(os, pd);
    }
    auto os = open_out(cfg, "nodal_lines.csv");
    static const char* kinds[3] = {"k0", "kpi", "generic"};
    os << "gap,kind,P1_from,P4_from,P1_to,P4_to\n";
    for (const auto& c : pd.crossings)
        os << c.gap << ',' << kinds[static_cast<int>(c.kind)] << ',' << fmt(cfg.phase.P1(c.from[0])) << ','
           << fmt(cfg.phase.P4(c.from[1])) << ',' << fmt(cfg.phase.P1(c.to[0])) << ',' << fmt(cfg.phase.P4(c.to[1]))
           << '\n';
    write_config(cfg);
    std::string s = "phase_diagram.csv: line crossings per gap";
    for (int gap = 1; gap <= cfg.N; ++gap) {
        int c = 0;
        for (const auto& x : pd.crossings)
            c += x.gap == gap;
        s += " " + std::to_string(c);
    }
    return s;
}

std::string run_evolve(const RunConfig& cfg)
{
    cfg.validate("evolve");
    const LatticeSpec spec{cfg.l_max, cfg.N};
    const Protocol proto = cfg.protocol();
    json j;
    j["state"] = cfg.state;
    j["preset"] = proto.name();
    j["l_max"] = cfg.l_max;
    j["mode"] = mode_name(cfg.mode);
    RotorState psi0;
    if (cfg.state == "thermal") {
        psi0 = thermal_state(cfg.theta, spec);
        j["theta"] = cfg.theta;
    } else {
        EdgeOptions eo;
        eo.mode = cfg.mode;
        eo.labels = cfg.edge_labels;
        eo.window = cfg.edge_window;
        const EdgeState es = edge_state(proto.pulses(proto.alpha_at(0)), spec, cfg.edge_gap, eo, cfg.conv);
        psi0 = es.state;
        j["edge"] = {{"gap", cfg.edge_gap},
                     {"labels", cfg.edge_labels == GapLabels::adiabatic ? "adiabatic" : "sorted"},
                     {"quasienergy", es.info.quasienergy},
                     {"boundary", es.at_l0 ? "l0" : "lmax"},
                     {"weight", es.at_l0 ? es.info.weight_l0 : es.info.weight_lmax}};
    }
    EvolveOptions ev;
    ev.mode = cfg.mode;
    ev.tail_threshold = cfg.tail_threshold;
    ev.keep_populations = cfg.populations;
    const EvolutionTrace tr = evolve(psi0, proto, spec, ev, cfg.conv);
    {
        auto os = open_out(cfg, "trace.csv");
        write_trace_csv(os, tr);
    }
    if (cfg.populations) {
        auto os = open_out(cfg, "populations.csv");
        write_populations_csv(os, tr);
    }
    j["initial_l2"] = tr.rows.front().l2;
    j["final_l2"] = tr.rows.back().l2;
    j["max_norm_drift"] = tr.max_norm_drift;
    j["max_tail_mass"] = tr.max_tail;
    j["unreliable"] = tr.unreliable;
    write_json(cfg, "evolve.json", j);
    write_config(cfg);
    if (tr.unreliable)
        std::cerr << "warning: tail mass " << tr.max_tail << " above " << cfg.tail_threshold
                  << "; the truncation at l_max affects the trace\n";
    return "trace.csv: <L^2> " + rounded(tr.rows.front().l2) + " -> " + rounded(tr.rows.back().l2);
}

std::string run_zak(const RunConfig& cfg)
{
    cfg.validate("zak");
    const BandGrid g = band_grid(cfg.N, cfg.grid(), cfg.protocol(), cfg.conv, Executor{cfg.threads});
    json j;
    j["preset"] = cfg.protocol().name();
    j["grid"] = grid_json(g.grid);
    auto recs = json::array();
    std::vector<int> pi_k(cfg.N, 0);
    for (int b = 0; b < cfg.N; ++b) {
        for (int r = 0; r < g.grid.n_alpha; ++r) {
            const ZakRecord z = zak_along_k(g, b, r);
            pi_k[b] += z.phase > 1;
            recs.push_back(zak_json(z));
        }
        for (int c = 0; c < g.grid.n_k; ++c)
            recs.push_back(zak_json(zak_along_alpha(g, b, c)));
    }
    j["records"] = recs;
    if (cfg.preset == "constant" || cfg.preset == "free" || cfg.preset == "zero")
        j["label"] = zak_label(cfg.N, cfg.pulses, std::max(cfg.n_k, 200), cfg.conv);
    write_json(cfg, "zak.json", j);
    write_config(cfg);
    std::string s = "zak.json: rows with pi along k per band";
    for (int b = 0; b < cfg.N; ++b)
        s += " " + std::to_string(pi_k[b]);
    return s;
}

std::string run_euler(const RunConfig& cfg)
{
    cfg.validate("euler");
    const BandGrid g = band_grid(cfg.N, cfg.grid(), cfg.protocol(), cfg.conv, Executor{cfg.threads});
    EulerResult r;
    PatchSpec p;
    json j = euler_report(cfg, g, &r, &p);
    j["grid"] = grid_json(g.grid);
    j["curvature_sum"] = r.curvature_sum;
    j["boundary_sum"] = r.boundary_sum;
    write_json(cfg, "euler.json", j);
    auto os = open_out(cfg, "euler_form.csv");
    write_euler_form_csv(os, r, p, g.grid);
    write_config(cfg);
    return "euler.json: chi " + std::to_string(r.chi) + " (raw " + rounded(r.chi_raw) + ")";
}

} // namespace kr::cli
