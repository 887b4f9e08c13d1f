#include "kr/io.hpp"

#include <charconv>
#include <cmath>
#include <numbers>

namespace kr {

std::string fmt(double x)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

namespace {

double wrap(double x)
{
    return std::remainder(x, 2 * std::numbers::pi);
}

} // namespace

void write_bands_csv(std::ostream& os, const BandGrid& g)
{
    const int N = g.N;
    os << "k,alpha";
    for (int n = 1; n <= N; ++n)
        os << ",eps_" << n;
    for (int n = 1; n <= N; ++n)
        os << ",delta_" << n;
    os << ",residual_imag\n";
    for (int i = 0; i < g.grid.n_k; ++i)
        for (int j = 0; j < g.grid.n_alpha; ++j) {
            os << fmt(g.grid.k(i)) << ',' << fmt(g.grid.alpha(j));
            const auto& e = g.eps_at(i, j);
            for (int n = 0; n < N; ++n)
                os << ',' << fmt(wrap(e(n)));
            for (int n = 1; n <= N; ++n)
                os << ',' << fmt(g.gap(i, j, n));
            os << ',' << fmt(g.residual[g.index(i, j)]) << '\n';
        }
}

void write_trace_csv(std::ostream& os, const EvolutionTrace& tr)
{
    os << "period,alpha,l2_expectation,norm,tail_mass\n";
    for (const auto& r : tr.rows)
        os << r.period << ',' << fmt(r.alpha) << ',' << fmt(r.l2) << ',' << fmt(r.norm) << ',' << fmt(r.tail_mass)
           << '\n';
}

void write_populations_csv(std::ostream& os, const EvolutionTrace& tr)
{
    if (tr.populations.empty())
        return;
    os << "period";
    for (int l = 0; l < tr.populations[0].size(); ++l)
        os << ",l" << l;
    os << '\n';
    for (size_t p = 0; p < tr.populations.size(); ++p) {
        os << tr.rows[p].period;
        for (int l = 0; l < tr.populations[p].size(); ++l)
            os << ',' << fmt(tr.populations[p](l));
        os << '\n';
    }
}

void write_phase_csv(std::ostream& os, const PhaseDiagram& pd)
{
    os << "P1,P4";
    for (int n = 1; n <= pd.N; ++n)
        os << ",mingap_" << n;
    os << ",line_flags\n";
    for (const auto& p : pd.points) {
        os << fmt(p.P1) << ',' << fmt(p.P4);
        for (double g : p.mingap)
            os << ',' << fmt(g);
        std::string flags = line_flags_string(p.flags, pd.N);
        if (p.degenerate)
            flags += flags.empty() ? "degenerate" : ";degenerate";
        os << ',' << flags << '\n';
    }
}

void write_nodes_csv(std::ostream& os, const std::vector<NodeRecord>& nodes)
{
    os << "id,gap,i,j,k,alpha,flux,partner\n";
    for (const auto& n : nodes)
        os << n.id << ',' << n.gap << ',' << n.plaquette[0] << ',' << n.plaquette[1] << ',' << fmt(n.k) << ','
           << fmt(n.alpha) << ',' << n.flux << ',' << n.partner << '\n';
}

void write_euler_form_csv(std::ostream& os, const EulerResult& r, const PatchSpec& patch, const GridSpec& grid)
{
    os << "i,j,k,alpha,euler_form\n";
    for (int x = 0; x < r.form.rows(); ++x)
        for (int y = 0; y < r.form.cols(); ++y) {
            const int i = patch.i0 + x, j = patch.j0 + y;
            const double k = 2 * std::numbers::pi * (i + grid.k_offset + 0.5) / grid.n_k;
            const double a = 2 * std::numbers::pi * (j + 0.5) / grid.n_alpha;
            os << i << ',' << j << ',' << fmt(k) << ',' << fmt(a) << ',' << fmt(r.form(x, y)) << '\n';
        }
}

nlohmann::ordered_json node_json(const NodeRecord& n)
{
    nlohmann::ordered_json j;
    j["id"] = n.id;
    j["gap"] = n.gap;
    j["k"] = n.k;
    j["alpha"] = n.alpha;
    j["flux"] = n.flux;
    j["plaquette"] = {n.plaquette[0], n.plaquette[1]};
    j["partner"] = n.partner;
    return j;
}

nlohmann::ordered_json string_json(const DiracString& s)
{
    nlohmann::ordered_json j;
    j["gap"] = s.gap;
    j["nodes"] = {s.from, s.to};
    auto path = nlohmann::ordered_json::array();
    for (const auto& c : s.plaquettes)
        path.push_back({c[0], c[1]});
    j["string"] = path;
    return j;
}

nlohmann::ordered_json zak_json(const ZakRecord& z)
{
    nlohmann::ordered_json j;
    j["band"] = z.band + 1;
    j["direction"] = z.direction == 'k' ? "k" : "alpha";
    j["transverse"] = z.transverse;
    j["phase"] = z.phase;
    return j;
}

nlohmann::ordered_json patch_json(const PatchSpec& p, const EulerResult& r, const GridSpec& grid, int N)
{
    nlohmann::ordered_json j;
    j["patch"] = {{"i0", p.i0}, {"i1", p.i1}, {"j0", p.j0}, {"j1", p.j1},
                  {"k0", (p.i0 + grid.k_offset) / grid.n_k}, {"k1", (p.i1 + grid.k_offset) / grid.n_k},
                  {"alpha0", double(p.j0) / grid.n_alpha}, {"alpha1", double(p.j1) / grid.n_alpha}};
    j["gap_pair"] = {p.gap, p.gap % N + 1};
    j["chi_raw"] = r.chi_raw;
    j["chi"] = r.chi;
    j["node_plaquettes"] = r.node_plaquettes.size();
    return j;
}

} // namespace kr
