// One PASS/FAIL line per acceptance criterion. Exit status is the number of failed criteria.

#include "kr/dynamics.hpp"
#include "kr/errors.hpp"
#include "kr/phase_diagram.hpp"
#include "kr/topology.hpp"
#include "oracle.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

using namespace kr;

namespace {

constexpr double pi = std::numbers::pi;

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void run(int id, const char* title, double budget_s, const std::function<Outcome()>& body)
{
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (dt > budget_s) {
        o.pass = false;
        o.detail += " [over time budget]";
    }
    if (!o.pass)
        ++failures;
    std::printf("%s  %d  %-28s %s  (%.2fs / %.0fs)\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.c_str(), dt,
                budget_s);
    std::fflush(stdout);
}

std::string num(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

double wrap(double x)
{
    return std::remainder(x, 2 * pi);
}

// distance of a Berry phase from {0, pi}
double quantization_defect(double phase)
{
    const double a = std::abs(wrap(phase));
    return std::min(a, std::abs(pi - a));
}

// Berry phase from the raw complex eigenvectors of U along a closed loop of grid points.
// Bands are matched to eigenvalues through the continuity-labelled quasienergies of the grid.
double wilson_phase(const BandGrid& g, const Protocol& proto, int band, bool along_k, int fixed)
{
    const int n = along_k ? g.grid.n_k : g.grid.n_alpha;
    std::vector<Eigen::VectorXcd> vs(n);
    for (int s = 0; s < n; ++s) {
        const int i = along_k ? s : fixed, j = along_k ? fixed : s;
        const auto U = build_u_tkr_bloch(g.N, g.grid.k(i), g.grid.alpha(j), proto);
        const UnitaryEigen ue = unitary_eigen(U.matrix);
        const cplx target = std::polar(1.0, g.eps_at(i, j)(band));
        int best = 0;
        for (int c = 1; c < g.N; ++c)
            if (std::abs(std::polar(1.0, ue.phases(c)) - target) < std::abs(std::polar(1.0, ue.phases(best)) - target))
                best = c;
        vs[s] = ue.vectors.col(best);
    }
    cplx prod = 1;
    for (int s = 0; s < n; ++s)
        prod *= vs[s].dot(vs[(s + 1) % n]);
    return -std::arg(prod);
}

PatchSpec pair_patch(const std::vector<NodeRecord>& nodes, int n)
{
    int ir = -1, il = -1, jn = 0;
    for (const auto& x : nodes)
        if (x.gap == 1) {
            if (x.plaquette[0] > n / 2)
                ir = x.plaquette[0];
            else
                il = x.plaquette[0];
            jn = x.plaquette[1];
        }
    if (ir < 0 || il < 0)
        throw Error(ErrorKind::consistency, "no gap-1 pair straddling k = 0");
    return {ir - 8, il + n + 9, jn - 6, jn + 7, 1};
}

int count_gap(const std::vector<NodeRecord>& nodes, int gap)
{
    return static_cast<int>(std::count_if(nodes.begin(), nodes.end(), [&](const NodeRecord& r) { return r.gap == gap; }));
}

} // namespace

int main()
{
    std::printf("convention: %s\n", Convention{}.describe().c_str());

    run(1, "free rotor", 1, [] {
        // tolerance 1e-12 on every k
        const double expect[3] = {-2 * pi / 3, 0, 0};
        double worst = 0;
        Eigen::VectorXd seen;
        for (int i = 0; i < 64; ++i) {
            const BandFrame bf = band_frame(build_u_tkr_bloch(3, 2 * pi * i / 64, 0.0, PulseVector{}));
            std::vector<double> e(bf.quasienergies.data(), bf.quasienergies.data() + 3);
            std::sort(e.begin(), e.end());
            for (int b = 0; b < 3; ++b)
                worst = std::max(worst, std::abs(wrap(e[b] - expect[b])));
            seen = bf.quasienergies;
        }
        // two free steps per period, E1 D E2 D E1, for comparison
        Eigen::VectorXd two(3);
        for (int i = 0; i < 3; ++i)
            two(i) = -std::arg(free_phase(i, 3) * free_phase(i, 3)) + 0.0;
        std::ostringstream os;
        os << "got {" << num(seen(0)) << "," << num(seen(1)) << "," << num(seen(2)) << "} max dev " << num(worst)
           << " (tol 1e-12); two-free-step product gives {" << num(two(0)) << "," << num(two(1)) << ","
           << num(two(2)) << "}";
        return Outcome{worst < 1e-12, os.str()};
    });

    run(2, "matrix-element oracle", 5, [] {
        const auto c1 = oracle::moment_matrix(50, 1);
        const auto c2 = oracle::moment_matrix(50, 2);
        double worst = 0;
        for (int a = 0; a <= 50; ++a)
            for (int b = 0; b <= 50; ++b) {
                worst = std::max(worst, std::abs(exact_cos_element(a, b) - c1[a][b]));
                worst = std::max(worst, std::abs(exact_cos2_element(a, b) - c2[a][b]));
            }
        const double h1 = std::abs(exact_cos_element(100, 101) - 0.5);
        const double d = std::abs(exact_cos2_element(100, 100) - 0.5);
        const double h2 = std::abs(exact_cos2_element(100, 102) - 0.25);
        const double lim = std::max({h1, d, h2});
        return Outcome{worst < 1e-10 && lim < 1e-3, "quadrature dev " + num(worst) + " (tol 1e-10), l=100 limit dev " +
                                                        num(lim) + " (tol 1e-3)"};
    });

    run(3, "symmetry suite", 30, [] {
        const Protocol proto = Protocol::fig1_circle();
        const GridSpec grid{64, 64, 0.5};
        double unit = 0, mirror = 0;
        for (int i = 0; i < 64; ++i)
            for (int j = 0; j < 64; ++j) {
                const double a = grid.alpha(j);
                const auto U = build_u_tkr_bloch(3, grid.k(i), a, proto);
                const auto V = build_u_tkr_bloch(3, -grid.k(i), a, proto);
                unit = std::max(unit, unitarity_defect(U.matrix));
                auto p = unitary_eigen(U.matrix).phases, q = unitary_eigen(V.matrix).phases;
                std::sort(p.data(), p.data() + 3);
                std::sort(q.data(), q.data() + 3);
                mirror = std::max(mirror, (p - q).cwiseAbs().maxCoeff());
            }
        const BandGrid g = band_grid(3, grid, proto);
        return Outcome{unit < 1e-12 && mirror < 1e-10 && g.max_residual < 1e-8,
                       "unitarity " + num(unit) + " (tol 1e-12), k->-k " + num(mirror) + " (tol 1e-10), imag residual " +
                           num(g.max_residual) + " (tol 1e-8)"};
    });

    run(4, "bulk equivalence", 60, [] {
        const PulseVector P = Protocol::fig1_circle().pulses(0.0);
        const LatticeSpec spec{600, 3};
        const Eigen::MatrixXcd U = build_u_tkr_real(spec, P, Mode::asymptotic);
        const int c = 100;  // cell in the middle of the chain
        double worst = 0;
        for (int s = 0; s < 64; ++s) {
            const double k = 2 * pi * (s + 0.5) / 64;
            Eigen::MatrixXcd B = Eigen::MatrixXcd::Zero(3, 3);
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    for (int R = -60; R <= 60; ++R)
                        B(i, j) += std::polar(1.0, -R * k) * U(3 * c + i + 3 * R, 3 * c + j);
            auto p = unitary_eigen(B).phases;
            auto q = unitary_eigen(build_u_tkr_bloch(3, k, 0.0, P).matrix).phases;
            std::sort(p.data(), p.data() + 3);
            std::sort(q.data(), q.data() + 3);
            for (int b = 0; b < 3; ++b)
                worst = std::max(worst, std::abs(wrap(p(b) - q(b))));
        }
        return Outcome{worst < 1e-6, "l_max=600 bulk vs Bloch eigenphase dev " + num(worst) + " (tol 1e-6)"};
    });

    run(5, "zak quantization + ADS", 120, [] {
        double worst = 0;
        int loops = 0;
        auto scan = [&](const Protocol& proto, int n) {
            const BandGrid g = band_grid(3, {n, n, 0.5}, proto);
            for (int b = 0; b < 3; ++b)
                for (int s = 0; s < n; ++s) {
                    worst = std::max(worst, quantization_defect(wilson_phase(g, proto, b, true, s)));
                    worst = std::max(worst, quantization_defect(wilson_phase(g, proto, b, false, s)));
                    loops += 2;
                }
        };
        scan(Protocol::fig1_circle(), 64);
        for (double beta : {0.15, 0.21, 0.3})
            scan(Protocol::fig3_family(beta), 100);

        const PulseVector ads{1.6, 0.0, 0.0, 6.0};
        const std::string zak = zak_label(3, ads, 200);
        const LatticeSpec spec{201, 3};
        std::string found;
        bool all = true;
        for (int gap = 1; gap <= 3; ++gap) {
            try {
                const EdgeState es = edge_state(ads, spec, gap);
                found += " g" + std::to_string(gap) + ":w" + num(es.at_l0 ? es.info.weight_l0 : es.info.weight_lmax);
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::not_topological)
                    throw;
                all = false;
                // report how far the best in-gap state reaches
                EdgeOptions wide;
                wide.window = 30;
                wide.min_weight = 0.0;
                double w9 = 0, w30 = 0;
                for (const auto& c : edge_candidates(ads, spec, wide))
                    if (c.gap == gap && c.weight_l0 > w30) {
                        w30 = c.weight_l0;
                        EdgeOptions narrow = wide;
                        narrow.window = 9;
                        for (const auto& d : edge_candidates(ads, spec, narrow))
                            if (d.index == c.index && d.gap == gap)
                                w9 = d.weight_l0;
                    }
                found += " g" + std::to_string(gap) + ":none(best w[l<9]=" + num(w9) + ", w[l<30]=" + num(w30) + ")";
            }
        }
        return Outcome{worst < 1e-6 && zak == "000" && all,
                       std::to_string(loops) + " Wilson loops, max dev " + num(worst) + " (tol 1e-6); ADS Zak " + zak +
                           "; edge states (l<9 weight > 0.5):" + found};
    });

    run(6, "patch Euler class", 300, [] {
        std::ostringstream os;
        bool ok = true;
        double resid = 0;
        for (double beta : {0.15, 0.21, 0.3}) {
            const BandGrid g = band_grid(3, {100, 100, 0.5}, Protocol::fig3_family(beta));
            const auto nodes = detect_all_nodes(g);
            const int n1 = count_gap(nodes, 1), n2 = count_gap(nodes, 2), n3 = count_gap(nodes, 3);
            const EulerResult r = patch_euler_class(g, pair_patch(nodes, 100));
            resid = std::max(resid, std::abs(r.chi_raw - r.chi));
            if (beta == 0.15)
                ok = ok && n1 == 2 && r.chi == 0;
            else if (beta == 0.21)
                ok = ok && n1 == 2 && n2 == 2;
            else
                ok = ok && std::abs(r.chi) == 1;
            os << "b=" << beta << ": nodes " << n1 << "/" << n2 << "/" << n3 << " chi " << num(r.chi_raw) << "; ";
        }
        os << "max integer residual " << num(resid) << " (tol 1e-2)";
        return Outcome{ok && resid < 1e-2, os.str()};
    });

    run(7, "dynamics", 120, [] {
        const LatticeSpec spec{301, 3};
        const Protocol proto = Protocol::fig1_circle(40);
        EvolveOptions ev;
        ev.keep_populations = false;
        const auto th = evolve(thermal_state(0.17, spec), proto, spec, ev);
        EdgeOptions eo;
        eo.labels = GapLabels::adiabatic;
        const EdgeState es = edge_state(proto.pulses(proto.alpha_at(0)), spec, 3, eo);
        const auto ed = evolve(es.state, proto, spec, ev);
        const double lt = th.rows.back().l2, le = ed.rows.back().l2;
        const double drift = std::max(th.max_norm_drift, ed.max_norm_drift);
        const bool ok = lt >= 1.5e3 && lt <= 1.5e4 && le >= 10 && le <= 200 && lt / le >= 10 && drift < 1e-10;
        return Outcome{ok, "l_max=301 thermal " + num(lt) + " in [1.5e3,1.5e4], pi-gap edge " + num(le) +
                               " in [10,200], ratio " + num(lt / le) + " >= 10, norm drift " + num(drift) +
                               " (tol 1e-10), tail " + num(std::max(th.max_tail, ed.max_tail))};
    });

    run(8, "gauge invariance", 120, [] {
        BandGrid g = band_grid(3, {100, 100, 0.5}, Protocol::fig3_family(0.3));
        const auto nodes = detect_all_nodes(g);
        const PatchSpec p = pair_patch(nodes, 100);
        const EulerResult ref = patch_euler_class(g, p);

        const GaugeFixed gf = assign_dirac_strings(g, nodes);
        int zak_bad = 0;
        for (int b = 0; b < 3; ++b)
            for (int s = 0; s < 100; ++s) {
                int ck = 0, ca = 0;
                for (int t = 0; t < 100; ++t) {
                    ck += gf.crossings(b, {t, s, 0}, 3);
                    ca += gf.crossings(b, {s, t, 1}, 3);
                }
                zak_bad += std::abs(zak_along_k(g, b, s).phase - pi * (ck % 2)) > 1e-12;
                zak_bad += std::abs(zak_along_alpha(g, b, s).phase - pi * (ca % 2)) > 1e-12;
            }

        bool even = true;
        for (double beta : {0.15, 0.21, 0.3}) {
            const auto ns = detect_all_nodes(band_grid(3, {100, 100, 0.5}, Protocol::fig3_family(beta)));
            for (int gap = 1; gap <= 3; ++gap)
                even = even && count_gap(ns, gap) % 2 == 0;
        }

        std::mt19937 rng(12345);
        std::uniform_int_distribution<int> pick(0, 100 * 100 - 1), band(0, 2);
        double dev = 0;
        for (int t = 0; t < 100; ++t) {
            for (int f = 0; f < 500; ++f)
                g.frames[pick(rng)].col(band(rng)) *= -1;
            dev = std::max(dev, std::abs(patch_euler_class(g, p).chi_raw - ref.chi_raw));
        }
        return Outcome{dev < 1e-9 && zak_bad == 0 && even,
                       "chi dev over 100 resign trials " + num(dev) + " (tol 1e-9); Zak/string mismatches " +
                           std::to_string(zak_bad) + " of 600 loops; node counts even: " + (even ? "yes" : "no")};
    });

    run(9, "phase diagram", 600, [] {
        const PhaseDiagram pd = nodal_line_map(3, PhaseDiagramSpec{});
        std::ostringstream os;
        bool ok = true;
        for (int gap = 1; gap <= 3; ++gap) {
            const int a = pd.count(gap, LineKind::k0), b = pd.count(gap, LineKind::kpi),
                      c = pd.count(gap, LineKind::generic);
            ok = ok && a + b + c > 0;
            os << "g" << gap << " " << a << "/" << b << "/" << c << " ";
        }
        os << "crossings (k0/kpi/generic) on 32x32 over [0,8]^2";
        return Outcome{ok, os.str()};
    });

    std::printf("%d criteria failed\n", failures);
    return failures;
}
