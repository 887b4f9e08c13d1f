#include "kr/phase_diagram.hpp"
#include "kr/errors.hpp"
#include "kr/topology.hpp"

#include <cmath>
#include <numbers>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace kr {

namespace {

constexpr double pi = std::numbers::pi;

struct PointData {
    KLine line;
    std::vector<int> parity0, parity_pi;
    Eigen::VectorXd eps0, eps_pi;
    bool degenerate = false;
};

std::vector<int> parities_of(const Eigen::MatrixXd& F, int N)
{
    const Eigen::MatrixXcd W = realification_transform(N);
    const Eigen::MatrixXcd Pt = W * parity_matrix(N).cast<cplx>() * W.adjoint();
    std::vector<int> out(N);
    for (int b = 0; b < N; ++b) {
        const double p = (F.col(b).transpose().cast<cplx>() * Pt * F.col(b).cast<cplx>())(0, 0).real();
        out[b] = p < 0 ? -1 : 1;
    }
    return out;
}

bool has_degeneracy(const Eigen::VectorXd& e)
{
    const int N = static_cast<int>(e.size());
    for (int b = 0; b < N; ++b)
        if (circle_distance(e(b), e((b + 1) % N)) < 1e-6)
            return true;
    return false;
}

// gaps whose two bands swap parity between p and q (q relabelled to p by cyclic alignment)
std::vector<int> parity_swaps(const Eigen::VectorXd& ep, const std::vector<int>& pp, const Eigen::VectorXd& eq,
                              const std::vector<int>& pq)
{
    const int N = static_cast<int>(ep.size());
    Eigen::VectorXd aligned;
    const int r = cyclic_align(eq, ep, aligned);
    std::vector<int> q(N);
    for (int b = 0; b < N; ++b)
        q[b] = pq[(b + r) % N];
    std::vector<int> gaps;
    for (int n = 0; n < N; ++n) {
        const int a = n, b = (n + 1) % N;
        if (pp[a] != q[a] && pp[b] != q[b] && pp[a] != pp[b])
            gaps.push_back(n + 1);
    }
    return gaps;
}

std::vector<int> generic_crossings(const KLine& p, const KLine& q, int N)
{
    const int nk = static_cast<int>(p.k.size());
    Eigen::VectorXd aligned;
    const int r = cyclic_align(q.eps[0], p.eps[0], aligned);
    auto col_q = [&](int j, int b) { return q.frames[j].col((b + r) % N); };
    std::vector<int> hit(N + 1, 0);
    for (int j = 1; j + 1 < nk; ++j) {
        if (j == nk / 2 || j + 1 == nk / 2)
            continue;
        std::vector<int> flux(N);
        bool ok = true;
        for (int b = 0; b < N && ok; ++b) {
            const double prod = p.frames[j].col(b).dot(p.frames[j + 1].col(b)) *
                                p.frames[j + 1].col(b).dot(col_q(j + 1, b)) * col_q(j + 1, b).dot(col_q(j, b)) *
                                col_q(j, b).dot(p.frames[j].col(b));
            if (std::abs(prod) < 1e-12)
                ok = false;
            flux[b] = prod < 0 ? -1 : 1;
        }
        if (!ok)
            continue;
        for (int gap = 1; gap <= N; ++gap) {
            const auto [a, b] = gap_bands(gap, N);
            bool node = flux[a] < 0 && flux[b] < 0;
            for (int c = 0; c < N; ++c)
                if (c != a && c != b && flux[c] < 0)
                    node = false;
            if (node)
                hit[gap] = 1;
        }
    }
    std::vector<int> gaps;
    for (int gap = 1; gap <= N; ++gap)
        if (hit[gap])
            gaps.push_back(gap);
    return gaps;
}

} // namespace

void PhaseDiagramSpec::validate() const
{
    if (n1 < 2 || n4 < 2)
        throw Error(ErrorKind::config, "phase diagram needs at least 2 points per axis");
    if (n_k < 8 || n_k % 2 != 0)
        throw Error(ErrorKind::config, "phase diagram n_k must be even and >= 8");
}

double PhaseDiagramSpec::P1(int a) const
{
    return p1_min + (p1_max - p1_min) * a / (n1 - 1);
}

double PhaseDiagramSpec::P4(int b) const
{
    return p4_min + (p4_max - p4_min) * b / (n4 - 1);
}

int PhaseDiagram::count(int gap, LineKind kind) const
{
    int c = 0;
    for (const auto& x : crossings)
        if (x.gap == gap && x.kind == kind)
            ++c;
    return c;
}

bool PhaseDiagram::has_lines(int gap) const
{
    for (const auto& x : crossings)
        if (x.gap == gap)
            return true;
    return false;
}

std::vector<int> band_parities(int N, const PulseVector& P, double k, const Convention& conv)
{
    const BandFrame bf = band_frame(build_u_tkr_bloch(N, k, 0.0, P, conv), conv);
    return parities_of(bf.frame, N);
}

std::string zak_label(int N, const PulseVector& P, int n_k, const Convention& conv)
{
    const auto z = zak_phases_k(N, P, n_k, conv);
    std::string s;
    for (double x : z)
        s += x > 1 ? '1' : '0';
    return s;
}

PhaseDiagram nodal_line_map(int N, const PhaseDiagramSpec& spec, const Convention& conv, const Executor& exec)
{
    spec.validate();
    const int total = spec.n1 * spec.n4;
    std::vector<PointData> data(total);
    std::vector<std::string> failures(total);
#ifdef _OPENMP
    const int threads = exec.threads > 0 ? exec.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
#else
    (void)exec;
#endif
    for (int idx = 0; idx < total; ++idx) {
        try {
            const PulseVector P{spec.P1(idx / spec.n4), 0.0, 0.0, spec.P4(idx % spec.n4)};
            PointData& d = data[idx];
            d.line = k_line(N, P, spec.n_k, 0.0, conv);
            const BandFrame b0 = band_frame(build_u_tkr_bloch(N, 0.0, 0.0, P, conv), conv);
            const BandFrame bp = band_frame(build_u_tkr_bloch(N, pi, 0.0, P, conv), conv);
            d.eps0 = b0.quasienergies;
            d.eps_pi = bp.quasienergies;
            d.parity0 = parities_of(b0.frame, N);
            d.parity_pi = parities_of(bp.frame, N);
            d.degenerate = has_degeneracy(d.eps0) || has_degeneracy(d.eps_pi);
        } catch (const std::exception& e) {
            failures[idx] = e.what();
        }
    }
    for (int idx = 0; idx < total; ++idx)
        if (!failures[idx].empty())
            throw Error(ErrorKind::numerical, "phase diagram point " + std::to_string(idx) + ": " + failures[idx]);

    PhaseDiagram out;
    out.N = N;
    out.spec = spec;
    out.points.resize(total);
    for (int idx = 0; idx < total; ++idx) {
        PhasePoint& p = out.points[idx];
        p.P1 = spec.P1(idx / spec.n4);
        p.P4 = spec.P4(idx % spec.n4);
        p.degenerate = data[idx].degenerate;
        p.mingap.assign(N, 2 * pi);
        for (const auto& e : data[idx].line.eps)
            for (int n = 1; n <= N; ++n)
                p.mingap[n - 1] = std::min(p.mingap[n - 1], gap_function(e, n));
    }

    // edges in fixed order: P1 direction first, then P4 direction
    struct Edge {
        int p, q;
    };
    std::vector<Edge> edges;
    for (int a = 0; a < spec.n1; ++a)
        for (int b = 0; b < spec.n4; ++b) {
            const int idx = a * spec.n4 + b;
            if (a + 1 < spec.n1)
                edges.push_back({idx, idx + spec.n4});
            if (b + 1 < spec.n4)
                edges.push_back({idx, idx + 1});
        }
    std::vector<std::vector<LineCrossing>> found(edges.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(threads)
#endif
    for (int e = 0; e < static_cast<int>(edges.size()); ++e) {
        const PointData& P = data[edges[e].p];
        const PointData& Q = data[edges[e].q];
        const std::array<int, 2> from{edges[e].p / spec.n4, edges[e].p % spec.n4};
        const std::array<int, 2> to{edges[e].q / spec.n4, edges[e].q % spec.n4};
        if (P.degenerate || Q.degenerate)
            continue;
        for (int gap : parity_swaps(P.eps0, P.parity0, Q.eps0, Q.parity0))
            found[e].push_back({gap, LineKind::k0, from, to});
        for (int gap : parity_swaps(P.eps_pi, P.parity_pi, Q.eps_pi, Q.parity_pi))
            found[e].push_back({gap, LineKind::kpi, from, to});
        for (int gap : generic_crossings(P.line, Q.line, N))
            found[e].push_back({gap, LineKind::generic, from, to});
    }
    for (size_t e = 0; e < edges.size(); ++e)
        for (const auto& c : found[e]) {
            out.crossings.push_back(c);
            const unsigned bit = 1u << (3 * (c.gap - 1) + static_cast<int>(c.kind));
            out.points[edges[e].p].flags |= bit;
            out.points[edges[e].q].flags |= bit;
        }
    return out;
}

std::string line_flags_string(unsigned flags, int N)
{
    static const char* kinds[3] = {"k0", "kpi", "gen"};
    std::string s;
    for (int gap = 1; gap <= N; ++gap)
        for (int kind = 0; kind < 3; ++kind)
            if (flags & (1u << (3 * (gap - 1) + kind))) {
                if (!s.empty())
                    s += ';';
                s += "g" + std::to_string(gap) + ":" + kinds[kind];
            }
    return s;
}

} // namespace kr
