#include "kr/topology.hpp"
#include "kr/errors.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <deque>
#include <map>
#include <numbers>
#include <set>

namespace kr {

namespace {

constexpr double pi = std::numbers::pi;

int wrap_index(int i, int n)
{
    return ((i % n) + n) % n;
}

std::string cell_str(int i, int j)
{
    return "(" + std::to_string(i) + "," + std::to_string(j) + ")";
}

double link_value(const BandGrid& g, int i, int j, int dir, int band)
{
    const int i2 = dir == 0 ? i + 1 : i;
    const int j2 = dir == 0 ? j : j + 1;
    return g.frame_at(i, j).col(band).dot(g.frame_at(i2, j2).col(band));
}

} // namespace

std::array<int, 2> gap_bands(int gap, int N)
{
    if (gap < 1 || gap > N)
        throw Error(ErrorKind::config, "gap index must be in 1.." + std::to_string(N));
    return {gap - 1, gap % N};
}

int plaquette_flux(const BandGrid& g, int i, int j, int band)
{
    const double prod = link_value(g, i, j, 0, band) * link_value(g, i, j + 1, 0, band) *
                        link_value(g, i, j, 1, band) * link_value(g, i + 1, j, 1, band);
    if (std::abs(prod) < 1e-12)
        throw Error(ErrorKind::regrid, "vanishing link product at plaquette " + cell_str(i, j) +
                                           "; shift the grid (e.g. k offset 0.25)");
    return prod > 0 ? 1 : -1;
}

namespace {

void check_degenerate(const BandGrid& g, int a, int b)
{
    int count = 0;
    const int total = g.grid.n_k * g.grid.n_alpha;
    for (int idx = 0; idx < total; ++idx)
        if (circle_distance(g.eps[idx](a), g.eps[idx](b)) < 1e-9)
            ++count;
    if (2 * count > total)
        throw Error(ErrorKind::degenerate_line, "bands " + std::to_string(a + 1) + " and " + std::to_string(b + 1) +
                                                    " are degenerate on most of the grid");
    if (count > 0)
        throw Error(ErrorKind::regrid, "exact degeneracy of bands " + std::to_string(a + 1) + "," +
                                           std::to_string(b + 1) + " on a grid point; shift the grid");
}

std::vector<NodeRecord> nodes_from_flux(const BandGrid& g, int gap, const std::vector<std::vector<int>>& flux)
{
    const int N = g.N;
    const auto [a, b] = gap_bands(gap, N);
    std::vector<NodeRecord> out;
    for (int i = 0; i < g.grid.n_k; ++i)
        for (int j = 0; j < g.grid.n_alpha; ++j) {
            const auto& f = flux[g.index(i, j)];
            bool node = f[a] < 0 && f[b] < 0;
            for (int c = 0; c < N && node; ++c)
                if (c != a && c != b && f[c] < 0)
                    node = false;
            if (!node)
                continue;
            NodeRecord r;
            r.gap = gap;
            r.plaquette = {i, j};
            r.k = 2 * pi * (i + g.grid.k_offset + 0.5) / g.grid.n_k;
            r.alpha = 2 * pi * (j + 0.5) / g.grid.n_alpha;
            r.flux = -1;
            out.push_back(r);
        }
    return out;
}

std::vector<std::vector<int>> flux_field(const BandGrid& g)
{
    std::vector<std::vector<int>> flux(g.grid.n_k * g.grid.n_alpha, std::vector<int>(g.N));
    for (int i = 0; i < g.grid.n_k; ++i)
        for (int j = 0; j < g.grid.n_alpha; ++j)
            for (int b = 0; b < g.N; ++b)
                flux[g.index(i, j)][b] = plaquette_flux(g, i, j, b);
    return flux;
}

} // namespace

std::vector<NodeRecord> detect_nodes(const BandGrid& g, int gap)
{
    const auto [a, b] = gap_bands(gap, g.N);
    check_degenerate(g, a, b);
    auto nodes = nodes_from_flux(g, gap, flux_field(g));
    for (size_t n = 0; n < nodes.size(); ++n)
        nodes[n].id = static_cast<int>(n);
    return nodes;
}

std::vector<NodeRecord> detect_all_nodes(const BandGrid& g)
{
    for (int gap = 1; gap <= g.N; ++gap) {
        const auto [a, b] = gap_bands(gap, g.N);
        check_degenerate(g, a, b);
    }
    const auto flux = flux_field(g);
    std::vector<NodeRecord> all;
    for (int gap = 1; gap <= g.N; ++gap) {
        auto nodes = nodes_from_flux(g, gap, flux);
        all.insert(all.end(), nodes.begin(), nodes.end());
    }
    for (size_t n = 0; n < all.size(); ++n)
        all[n].id = static_cast<int>(n);
    return all;
}

double zak_phase(const std::vector<Eigen::VectorXd>& loop)
{
    int sign = 1;
    const size_t n = loop.size();
    for (size_t s = 0; s < n; ++s) {
        const double ov = loop[s].dot(loop[(s + 1) % n]);
        if (std::abs(ov) < 0.1)
            throw Error(ErrorKind::resolution, "under-resolved Zak loop (overlap " + std::to_string(ov) + ")");
        if (ov < 0)
            sign = -sign;
    }
    return sign > 0 ? 0.0 : pi;
}

ZakRecord zak_along_k(const BandGrid& g, int band, int j)
{
    std::vector<Eigen::VectorXd> loop;
    for (int i = 0; i < g.grid.n_k; ++i)
        loop.push_back(g.column(i, j, band));
    return {band, 'k', j, zak_phase(loop)};
}

ZakRecord zak_along_alpha(const BandGrid& g, int band, int i)
{
    std::vector<Eigen::VectorXd> loop;
    for (int j = 0; j < g.grid.n_alpha; ++j)
        loop.push_back(g.column(i, j, band));
    return {band, 'a', i, zak_phase(loop)};
}

std::vector<double> zak_phases_k(int N, const PulseVector& P, int n_k, const Convention& conv)
{
    const KLine line = k_line(N, P, n_k, 0.0, conv);
    if (!line.closes)
        throw Error(ErrorKind::continuity, "band labels do not close around the k loop");
    std::vector<double> out(N);
    for (int b = 0; b < N; ++b) {
        std::vector<Eigen::VectorXd> loop;
        for (const auto& F : line.frames)
            loop.push_back(F.col(b));
        out[b] = zak_phase(loop);
    }
    return out;
}

namespace {

// shortest signed step count from a to b on a ring of n
int ring_delta(int a, int b, int n)
{
    int d = wrap_index(b - a, n);
    if (d > n / 2)
        d -= n;
    return d;
}

int torus_distance(const Cell& a, const Cell& b, const GridSpec& grid)
{
    return std::abs(ring_delta(a[0], b[0], grid.n_k)) + std::abs(ring_delta(a[1], b[1], grid.n_alpha));
}

DiracString trace_string(const NodeRecord& A, const NodeRecord& B, const GridSpec& grid)
{
    DiracString s;
    s.gap = A.gap;
    s.from = A.id;
    s.to = B.id;
    int i = A.plaquette[0], j = A.plaquette[1];
    s.plaquettes.push_back({i, j});
    const int di = ring_delta(i, B.plaquette[0], grid.n_k);
    const int dj = ring_delta(j, B.plaquette[1], grid.n_alpha);
    const int nk = grid.n_k, na = grid.n_alpha;
    for (int step = 0; step < std::abs(di); ++step) {
        if (di > 0) {
            s.crossed.push_back({wrap_index(i + 1, nk), j, 1});
            i = wrap_index(i + 1, nk);
        } else {
            s.crossed.push_back({i, j, 1});
            i = wrap_index(i - 1, nk);
        }
        s.plaquettes.push_back({i, j});
    }
    for (int step = 0; step < std::abs(dj); ++step) {
        if (dj > 0) {
            s.crossed.push_back({i, wrap_index(j + 1, na), 0});
            j = wrap_index(j + 1, na);
        } else {
            s.crossed.push_back({i, j, 0});
            j = wrap_index(j - 1, na);
        }
        s.plaquettes.push_back({i, j});
    }
    return s;
}

bool touches(int gap, int band, int N)
{
    const auto [a, b] = gap_bands(gap, N);
    return a == band || b == band;
}

} // namespace

int GaugeFixed::crossings(int band, const LinkId& l, int N) const
{
    int c = 0;
    for (const auto& s : strings)
        if (touches(s.gap, band, N))
            c += static_cast<int>(std::count(s.crossed.begin(), s.crossed.end(), l));
    c += static_cast<int>(std::count(winding[band].begin(), winding[band].end(), l));
    return c;
}

GaugeFixed assign_dirac_strings(const BandGrid& g, std::vector<NodeRecord> nodes)
{
    const int N = g.N;
    const GridSpec& grid = g.grid;
    GaugeFixed out;
    for (size_t n = 0; n < nodes.size(); ++n)
        nodes[n].id = static_cast<int>(n);

    for (int gap = 1; gap <= N; ++gap) {
        std::vector<int> ids;
        for (const auto& r : nodes)
            if (r.gap == gap)
                ids.push_back(r.id);
        if (ids.size() % 2 != 0)
            throw Error(ErrorKind::consistency, "odd number of nodes in gap " + std::to_string(gap));
        struct Cand {
            int d, a, b;
        };
        std::vector<Cand> cands;
        for (size_t x = 0; x < ids.size(); ++x)
            for (size_t y = x + 1; y < ids.size(); ++y)
                cands.push_back({torus_distance(nodes[ids[x]].plaquette, nodes[ids[y]].plaquette, grid), ids[x], ids[y]});
        std::sort(cands.begin(), cands.end(), [](const Cand& p, const Cand& q) {
            return std::tie(p.d, p.a, p.b) < std::tie(q.d, q.a, q.b);
        });
        std::set<int> used;
        for (const auto& c : cands) {
            if (used.count(c.a) || used.count(c.b))
                continue;
            used.insert(c.a);
            used.insert(c.b);
            nodes[c.a].partner = c.b;
            nodes[c.b].partner = c.a;
            DiracString s = trace_string(nodes[c.a], nodes[c.b], grid);
            nodes[c.a].string_path = s.plaquettes;
            out.strings.push_back(std::move(s));
        }
    }
    out.nodes = nodes;

    // per band: tau(link) = (-1)^(strings of touching gaps crossing it)
    const int nk = grid.n_k, na = grid.n_alpha;
    out.frames = g.frames;
    out.winding.assign(N, {});
    for (int band = 0; band < N; ++band) {
        std::map<LinkId, int> cut;
        for (const auto& s : out.strings)
            if (touches(s.gap, band, N))
                for (const auto& l : s.crossed)
                    cut[l] ^= 1;
        auto tau = [&](const LinkId& l) {
            auto it = cut.find(l);
            return it != cut.end() && it->second ? -1 : 1;
        };
        // strings must reproduce the flux of this band plaquette by plaquette
        for (int i = 0; i < nk; ++i)
            for (int j = 0; j < na; ++j) {
                const int t = tau({i, j, 0}) * tau({wrap_index(i + 1, nk), j, 1}) *
                              tau({i, wrap_index(j + 1, na), 0}) * tau({i, j, 1});
                if (t != plaquette_flux(g, i, j, band))
                    throw Error(ErrorKind::resolution, "flux of band " + std::to_string(band + 1) + " at plaquette " +
                                                           cell_str(i, j) +
                                                           " is not explained by the node set; refine the grid");
            }
        std::vector<int> s(nk * na, 0);
        std::deque<Cell> queue;
        s[0] = 1;
        queue.push_back({0, 0});
        while (!queue.empty()) {
            const Cell p = queue.front();
            queue.pop_front();
            const int moves[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
            for (const auto& m : moves) {
                const Cell q{wrap_index(p[0] + m[0], nk), wrap_index(p[1] + m[1], na)};
                const int qi = g.index(q[0], q[1]);
                if (s[qi] != 0)
                    continue;
                LinkId l;
                if (m[0] == 1)
                    l = {p[0], p[1], 0};
                else if (m[0] == -1)
                    l = {q[0], q[1], 0};
                else if (m[1] == 1)
                    l = {p[0], p[1], 1};
                else
                    l = {q[0], q[1], 1};
                const double ov = g.column(p[0], p[1], band).dot(g.column(q[0], q[1], band));
                s[qi] = s[g.index(p[0], p[1])] * (ov < 0 ? -1 : 1) * tau(l);
                queue.push_back(q);
            }
        }
        for (int idx = 0; idx < nk * na; ++idx)
            out.frames[idx].col(band) *= s[idx];
        for (int i = 0; i < nk; ++i)
            for (int j = 0; j < na; ++j)
                for (int dir = 0; dir < 2; ++dir) {
                    const LinkId l{i, j, dir};
                    const int i2 = dir == 0 ? wrap_index(i + 1, nk) : i;
                    const int j2 = dir == 0 ? j : wrap_index(j + 1, na);
                    const double ov = out.frames[g.index(i, j)].col(band).dot(out.frames[g.index(i2, j2)].col(band));
                    if ((ov < 0 ? -1 : 1) * tau(l) < 0)
                        out.winding[band].push_back(l);
                }
    }
    return out;
}

PatchSpec PatchSpec::from_fractions(const GridSpec& grid, double k0, double k1, double a0, double a1, int gap)
{
    PatchSpec p;
    if (k1 < k0)
        k1 += 1;
    if (a1 < a0)
        a1 += 1;
    p.i0 = static_cast<int>(std::lround(k0 * grid.n_k - grid.k_offset));
    p.i1 = static_cast<int>(std::lround(k1 * grid.n_k - grid.k_offset));
    p.j0 = static_cast<int>(std::lround(a0 * grid.n_alpha));
    p.j1 = static_cast<int>(std::lround(a1 * grid.n_alpha));
    p.gap = gap;
    return p;
}

void PatchSpec::validate(const GridSpec& grid) const
{
    if (i1 <= i0 || j1 <= j0)
        throw Error(ErrorKind::invalid_patch, "patch rectangle is empty");
    if (i1 - i0 >= grid.n_k || j1 - j0 >= grid.n_alpha)
        throw Error(ErrorKind::invalid_patch, "patch must not wrap the whole torus");
    if (i1 - i0 < 2 || j1 - j0 < 2)
        throw Error(ErrorKind::invalid_patch, "patch needs at least 2x2 plaquettes");
}

namespace {

using cx = std::complex<double>;

} // namespace

EulerResult euler_form(const BandGrid& g, const PatchSpec& patch)
{
    patch.validate(g.grid);
    const int N = g.N;
    const auto [a, b] = gap_bands(patch.gap, N);
    const int nk = g.grid.n_k, na = g.grid.n_alpha;
    const int w = patch.i1 - patch.i0, h = patch.j1 - patch.j0;

    // local patch coordinates (x, y) in [0,w] x [0,h]
    auto gidx = [&](int x, int y) { return g.index(patch.i0 + x, patch.j0 + y); };
    auto psi = [&](int x, int y, int band) { return g.frames[gidx(x, y)].col(band); };

    std::vector<Cell> loop;
    for (int x = 0; x < w; ++x)
        loop.push_back({x, 0});
    for (int y = 0; y < h; ++y)
        loop.push_back({w, y});
    for (int x = w; x > 0; --x)
        loop.push_back({x, h});
    for (int y = h; y > 0; --y)
        loop.push_back({0, y});

    std::vector<int> sa((w + 1) * (h + 1), 0), sb((w + 1) * (h + 1), 0);
    auto lid = [&](int x, int y) { return x * (h + 1) + y; };
    // canonical seed orientation: largest component positive, so the result does not follow eigenvector signs
    auto canonical = [](const Eigen::VectorXd& v) {
        Eigen::Index m;
        v.cwiseAbs().maxCoeff(&m);
        return v(m) < 0 ? -1 : 1;
    };
    sa[lid(0, 0)] = canonical(psi(0, 0, a));
    sb[lid(0, 0)] = canonical(psi(0, 0, b));
    // each band continuous along the boundary on its own
    for (size_t s = 1; s <= loop.size(); ++s) {
        const Cell p = loop[s - 1];
        const Cell q = loop[s % loop.size()];
        const int oa = sa[lid(p[0], p[1])] * (psi(p[0], p[1], a).dot(psi(q[0], q[1], a)) < 0 ? -1 : 1);
        const int ob = sb[lid(p[0], p[1])] * (psi(p[0], p[1], b).dot(psi(q[0], q[1], b)) < 0 ? -1 : 1);
        if (s == loop.size()) {
            if (oa != sa[lid(0, 0)] || ob != sb[lid(0, 0)])
                throw Error(ErrorKind::invalid_patch,
                            "a Dirac string of an adjacent gap crosses the patch boundary (patch encloses an odd "
                            "number of nodes of band " +
                                std::to_string(oa != sa[lid(0, 0)] ? a + 1 : b + 1) + ")");
            break;
        }
        sa[lid(q[0], q[1])] = oa;
        sb[lid(q[0], q[1])] = ob;
    }
    // interior: orientation of the (a,b) pair kept by the sign of the 2x2 overlap determinant
    std::deque<Cell> queue(loop.begin(), loop.end());
    while (!queue.empty()) {
        const Cell p = queue.front();
        queue.pop_front();
        const int moves[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
        for (const auto& m : moves) {
            const int x = p[0] + m[0], y = p[1] + m[1];
            if (x < 0 || y < 0 || x > w || y > h || sa[lid(x, y)] != 0)
                continue;
            Eigen::Matrix2d O;
            const Eigen::VectorXd pa = sa[lid(p[0], p[1])] * psi(p[0], p[1], a);
            const Eigen::VectorXd pb = sb[lid(p[0], p[1])] * psi(p[0], p[1], b);
            O << pa.dot(psi(x, y, a)), pa.dot(psi(x, y, b)), pb.dot(psi(x, y, a)), pb.dot(psi(x, y, b));
            const int ta = std::abs(O(0, 0)) > std::abs(O(1, 0)) ? (O(0, 0) < 0 ? -1 : 1) : 1;
            const int tb = (O.determinant() < 0 ? -1 : 1) * ta;
            sa[lid(x, y)] = ta;
            sb[lid(x, y)] = tb;
            queue.push_back({x, y});
        }
    }
    std::vector<Eigen::VectorXcd> phi((w + 1) * (h + 1));
    for (int x = 0; x <= w; ++x)
        for (int y = 0; y <= h; ++y)
            phi[lid(x, y)] = (sa[lid(x, y)] * psi(x, y, a).cast<cx>() + cx(0, 1) * double(sb[lid(x, y)]) *
                                                                             psi(x, y, b).cast<cx>()) /
                             std::sqrt(2.0);
    auto link = [&](int x1, int y1, int x2, int y2) { return phi[lid(x1, y1)].dot(phi[lid(x2, y2)]); };

    EulerResult r;
    r.form.resize(w, h);
    for (int x = 0; x < w; ++x)
        for (int y = 0; y < h; ++y)
            r.form(x, y) = std::arg(link(x, y, x + 1, y) * link(x + 1, y, x + 1, y + 1) * link(x + 1, y + 1, x, y + 1) *
                                    link(x, y + 1, x, y));

    // node plaquettes of this gap
    for (int x = 0; x < w; ++x)
        for (int y = 0; y < h; ++y) {
            const int i = wrap_index(patch.i0 + x, nk), j = wrap_index(patch.j0 + y, na);
            if (plaquette_flux(g, i, j, a) < 0 && plaquette_flux(g, i, j, b) < 0) {
                if (x == 0 || y == 0 || x == w - 1 || y == h - 1)
                    throw Error(ErrorKind::invalid_patch, "node plaquette " + cell_str(i, j) + " on the patch boundary");
                r.node_plaquettes.push_back({i, j});
                double acc = 0;
                const int nb[8][3] = {{1, 0, 2}, {-1, 0, 2}, {0, 1, 2}, {0, -1, 2},
                                      {1, 1, 1}, {1, -1, 1}, {-1, 1, 1}, {-1, -1, 1}};
                for (const auto& d : nb)
                    acc += (d[2] == 2 ? 1.0 / 6 : 1.0 / 12) * r.form(x + d[0], y + d[1]);
                r.form(x, y) = acc;
            }
        }
    r.curvature_sum = r.form.sum();
    for (size_t s = 0; s < loop.size(); ++s) {
        const Cell p = loop[s], q = loop[(s + 1) % loop.size()];
        r.boundary_sum += std::arg(link(p[0], p[1], q[0], q[1]));
    }
    r.chi_raw = (r.curvature_sum - r.boundary_sum) / (2 * pi);
    r.chi = static_cast<int>(std::lround(r.chi_raw));
    return r;
}

EulerResult patch_euler_class(const BandGrid& g, const PatchSpec& patch)
{
    EulerResult r = euler_form(g, patch);
    if (std::abs(r.chi_raw - r.chi) > 1e-2)
        throw Error(ErrorKind::resolution, "patch Euler class not integer (chi_raw = " + std::to_string(r.chi_raw) +
                                               "); refine the grid");
    return r;
}

} // namespace kr
