#include "kr/dynamics.hpp"
#include "kr/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

namespace kr {

namespace {
constexpr double pi = std::numbers::pi;
}

RotorState thermal_state(double theta, const LatticeSpec& spec)
{
    spec.validate();
    if (!(theta > 0))
        throw Error(ErrorKind::config, "thermal theta must be positive");
    const int n = spec.dim();
    RotorState psi(n);
    for (int l = 0; l < n; ++l)
        psi(l) = std::exp(-theta * l * (l + 1.0));
    psi /= psi.norm();
    if (std::norm(psi(n - 1)) > 1e-8)
        throw Error(ErrorKind::truncation, "thermal state not contained in l <= l_max; raise l_max or theta");
    return psi;
}

Observables observables(const RotorState& psi)
{
    Observables o;
    o.populations = psi.cwiseAbs2();
    for (int l = 0; l < psi.size(); ++l)
        o.l2 += l * (l + 1.0) * o.populations(l);
    return o;
}

std::vector<BulkGap> bulk_gaps(int N, const PulseVector& P, GapLabels labels, const Convention& conv, int n_k)
{
    const KLine line = k_line(N, P, n_k, 0.0, conv);
    if (!line.closes)
        throw Error(ErrorKind::continuity, "bulk bands wind around the quasienergy circle; gaps undefined");
    const int r = labels == GapLabels::adiabatic ? adiabatic_rotation(N, P, 0.0, conv) : 0;
    std::vector<BulkGap> out;
    for (int n = 1; n <= N; ++n) {
        const int a = n - 1, b = n % N;
        double lo = -1e300, hi = 1e300;
        for (const auto& e : line.eps) {
            lo = std::max(lo, e(a));
            hi = std::min(hi, e(b) + (n == N ? 2 * pi : 0.0));
        }
        out.push_back({labels == GapLabels::adiabatic ? adiabatic_gap(n, r, N) : n, lo, hi});
    }
    std::sort(out.begin(), out.end(), [](const BulkGap& x, const BulkGap& y) { return x.gap < y.gap; });
    return out;
}

namespace {

// rotate near-degenerate eigenvector groups so each member sits at one end of the lattice
void localise_degenerate(Eigen::VectorXd& th, Eigen::MatrixXcd& V)
{
    const int n = static_cast<int>(th.size());
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i)
        order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) { return th(a) < th(b); });
    int s = 0;
    while (s < n) {
        int e = s + 1;
        while (e < n && th(order[e]) - th(order[e - 1]) < 1e-6)
            ++e;
        if (e - s > 1) {
            const int m = e - s;
            Eigen::MatrixXcd sub(V.rows(), m);
            for (int c = 0; c < m; ++c)
                sub.col(c) = V.col(order[s + c]);
            const int half = static_cast<int>(V.rows()) / 2;
            const Eigen::MatrixXcd M = sub.topRows(half).adjoint() * sub.topRows(half);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(M);
            const Eigen::MatrixXcd rot = sub * es.eigenvectors();
            for (int c = 0; c < m; ++c)
                V.col(order[s + c]) = rot.col(c);
        }
        s = e;
    }
}

} // namespace

std::vector<EdgeCandidate> edge_candidates(const PulseVector& P, const LatticeSpec& spec, const EdgeOptions& opt,
                                           const Convention& conv, std::vector<RotorState>* states)
{
    spec.validate();
    const int N = spec.N;
    const int window = opt.window > 0 ? opt.window : 3 * N;
    const auto gaps = bulk_gaps(N, P, opt.labels, conv, opt.bulk_k);
    const UnitaryEigen ue = unitary_eigen(build_u_tkr_real(spec, P, opt.mode, conv));
    Eigen::VectorXd th = conv.quasienergy_sign * ue.phases;
    Eigen::MatrixXcd V = ue.vectors;
    localise_degenerate(th, V);

    std::vector<EdgeCandidate> out;
    const int n = spec.dim();
    for (int s = 0; s < n; ++s) {
        const Eigen::VectorXd pop = V.col(s).cwiseAbs2();
        const double w0 = pop.head(window).sum();
        const double wl = pop.tail(window).sum();
        if (std::max(w0, wl) <= opt.min_weight)
            continue;
        for (const auto& g : gaps) {
            if (!g.open())
                continue;
            const double x = g.lower + std::fmod(std::fmod(th(s) - g.lower, 2 * pi) + 2 * pi, 2 * pi);
            if (x > g.lower + 1e-9 && x < g.upper - 1e-9) {
                out.push_back({std::remainder(x, 2 * pi), g.gap, w0, wl, s});
                if (states)
                    states->push_back(V.col(s));
            }
        }
    }
    return out;
}

EdgeState edge_state(const PulseVector& P, const LatticeSpec& spec, int gap, const EdgeOptions& opt,
                     const Convention& conv)
{
    if (gap < 1 || gap > spec.N)
        throw Error(ErrorKind::config, "gap index out of range");
    std::vector<RotorState> states;
    const auto cands = edge_candidates(P, spec, opt, conv, &states);
    int best = -1;
    bool best_l0 = false;
    for (size_t c = 0; c < cands.size(); ++c) {
        if (cands[c].gap != gap)
            continue;
        const bool l0 = cands[c].weight_l0 > opt.min_weight;
        const double w = l0 ? cands[c].weight_l0 : cands[c].weight_lmax;
        if (best < 0 || (l0 && !best_l0) ||
            (l0 == best_l0 && w > (best_l0 ? cands[best].weight_l0 : cands[best].weight_lmax))) {
            best = static_cast<int>(c);
            best_l0 = l0;
        }
    }
    if (best < 0)
        throw Error(ErrorKind::not_topological, "no boundary state inside gap " + std::to_string(gap));
    EdgeState es;
    es.info = cands[best];
    es.at_l0 = best_l0;
    es.state = states[best] / states[best].norm();
    // fix the global phase: largest amplitude real positive
    Eigen::Index imax;
    es.state.cwiseAbs().maxCoeff(&imax);
    es.state *= std::polar(1.0, -std::arg(es.state(imax)));
    return es;
}

EvolutionTrace evolve(const RotorState& psi0, const Protocol& protocol, const LatticeSpec& spec,
                      const EvolveOptions& opt, const Convention& conv)
{
    spec.validate();
    if (psi0.size() != spec.dim())
        throw Error(ErrorKind::config, "state dimension does not match l_max");
    if (std::abs(psi0.norm() - 1) > 1e-10)
        throw Error(ErrorKind::config, "initial state is not normalised");
    const int n = spec.dim();
    const int tail = std::min(opt.tail_sites, n);
    EvolutionTrace tr;
    RotorState psi = psi0;
    auto record = [&](int period, double alpha) {
        const Observables o = observables(psi);
        TraceRow row{period, alpha, o.l2, psi.norm(), o.populations.tail(tail).sum()};
        tr.max_norm_drift = std::max(tr.max_norm_drift, std::abs(row.norm - 1));
        tr.max_tail = std::max(tr.max_tail, row.tail_mass);
        if (row.tail_mass > opt.tail_threshold)
            tr.unreliable = true;
        tr.rows.push_back(row);
        if (opt.keep_populations)
            tr.populations.push_back(o.populations);
    };
    record(0, protocol.alpha_at(0));
    std::map<int, Eigen::MatrixXcd> cache;
    for (int p = 1; p <= protocol.total_periods(); ++p) {
        const int slot = (p - 1) % protocol.n_gamma + 1;
        const double alpha = protocol.alpha_at(slot);
        if (protocol.cycles > 1) {
            auto it = cache.find(slot);
            if (it == cache.end())
                it = cache.emplace(slot, build_u_tkr_real(spec, protocol.pulses(alpha), opt.mode, conv)).first;
            psi = it->second * psi;
        } else {
            psi = build_u_tkr_real(spec, protocol.pulses(alpha), opt.mode, conv) * psi;
        }
        record(p, alpha);
    }
    tr.final_state = psi;
    return tr;
}

} // namespace kr
