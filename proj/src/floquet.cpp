#include "kr/floquet.hpp"
#include "kr/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace kr {

namespace {

constexpr double pi = std::numbers::pi;

double wrap_pi(double x)
{
    // into (-pi, pi]
    double y = std::fmod(x + pi, 2 * pi);
    if (y <= 0)
        y += 2 * pi;
    return y - pi;
}

// phase -pi * m * l(l+1) / (den * N), reduced with integer arithmetic first
double free_angle(long l, int N, int m, int den)
{
    const long period = 2L * den * N;
    const long r = (static_cast<long>(m) * l * (l + 1)) % period;
    return wrap_pi(-pi * static_cast<double>(r) / (den * N));
}

} // namespace

void Convention::validate() const
{
    if (free_phase_multiplier != 1 && free_phase_multiplier != 2)
        throw Error(ErrorKind::config, "free-phase-multiplier must be 1 or 2");
    if (quasienergy_sign != 1 && quasienergy_sign != -1)
        throw Error(ErrorKind::config, "quasienergy sign must be +1 or -1");
}

std::string Convention::describe() const
{
    std::ostringstream os;
    os << "mapping=" << (mapping == PulseMapping::cos2_first ? "cos2_first" : "cos_first")
       << " multiplier=" << free_phase_multiplier << " constant=" << (keep_constant ? "kept" : "dropped")
       << " eps_sign=" << (quasienergy_sign > 0 ? "+" : "-");
    return os.str();
}

Convention literal_convention()
{
    Convention c;
    c.mapping = PulseMapping::cos_first;
    c.free_phase_multiplier = 1;
    c.quasienergy_sign = -1;
    return c;
}

cplx free_phase(int l, int N)
{
    return std::polar(1.0, free_angle(l, N, 1, 1));
}

cplx kick_free_phase(int l, int N, int multiplier)
{
    return std::polar(1.0, free_angle(l, N, multiplier, 1));
}

KickAmplitudes kick_amplitudes(const PulseVector& P, PulseMapping mapping)
{
    if (mapping == PulseMapping::cos2_first)
        return {P.P2, P.P1, P.P4, P.P3};
    return {P.P1, P.P2, P.P3, P.P4};
}

Eigen::MatrixXcd expi_hermitian(const Eigen::MatrixXcd& V)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(V);
    if (es.info() != Eigen::Success)
        throw Error(ErrorKind::numerical, "eigendecomposition of the kick potential failed");
    const Eigen::VectorXcd ph = (cplx(0, 1) * es.eigenvalues().cast<cplx>()).array().exp();
    return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

Eigen::MatrixXcd expi_symmetric(const Eigen::MatrixXd& V)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(V);
    if (es.info() != Eigen::Success)
        throw Error(ErrorKind::numerical, "eigendecomposition of the kick potential failed");
    const Eigen::MatrixXcd Q = es.eigenvectors().cast<cplx>();
    const Eigen::VectorXcd ph = (cplx(0, 1) * es.eigenvalues().cast<cplx>()).array().exp();
    return Q * ph.asDiagonal() * Q.transpose();
}

double unitarity_defect(const Eigen::MatrixXcd& U)
{
    const Eigen::MatrixXcd d = U.adjoint() * U - Eigen::MatrixXcd::Identity(U.rows(), U.cols());
    return d.cwiseAbs().maxCoeff();
}

BlochOperator build_u_tkr_bloch(int N, double k, double alpha, const PulseVector& P, const Convention& conv,
                                Gauge gauge)
{
    conv.validate();
    const KickAmplitudes a = kick_amplitudes(P, conv.mapping);
    const Eigen::MatrixXcd E1 = expi_hermitian(bloch_potential(N, k, a.c1, a.c2_1, conv.keep_constant));
    const Eigen::MatrixXcd E2 = expi_hermitian(bloch_potential(N, k, a.c3, a.c2_3, conv.keep_constant));
    Eigen::VectorXcd D(N), S(N);
    for (int i = 0; i < N; ++i) {
        const double phi = free_angle(i, N, conv.free_phase_multiplier, 1);
        D(i) = std::polar(1.0, phi);
        S(i) = std::polar(1.0, phi / 2);
    }
    BlochOperator out;
    out.k = k;
    out.alpha = alpha;
    out.gauge = gauge;
    out.matrix = E1 * D.asDiagonal() * E2 * D.asDiagonal() * E1;
    if (gauge == Gauge::symmetric)
        out.matrix = S.asDiagonal() * out.matrix * S.asDiagonal();
    else
        out.matrix = D.asDiagonal() * out.matrix;
    if (unitarity_defect(out.matrix) > 1e-10)
        throw Error(ErrorKind::numerical, "Bloch operator lost unitarity");
    return out;
}

BlochOperator build_u_tkr_bloch(int N, double k, double alpha, const Protocol& path, const Convention& conv,
                                Gauge gauge)
{
    return build_u_tkr_bloch(N, k, alpha, path.pulses(alpha), conv, gauge);
}

Eigen::MatrixXcd build_u_tkr_real(const LatticeSpec& spec, const PulseVector& P, Mode mode, const Convention& conv)
{
    conv.validate();
    spec.validate();
    const int n = spec.dim();
    const KickAmplitudes a = kick_amplitudes(P, conv.mapping);
    Eigen::VectorXcd h(n);
    for (int l = 0; l < n; ++l)
        h(l) = std::polar(1.0, free_angle(l, spec.N, conv.free_phase_multiplier, 2));
    auto kick = [&](double c, double c2) {
        const Eigen::MatrixXd V = real_space_potential(spec, c, c2, mode, conv.keep_constant).entries;
        return Eigen::MatrixXcd(h.asDiagonal() * expi_symmetric(V) * h.asDiagonal());
    };
    const Eigen::MatrixXcd K1 = kick(a.c1, a.c2_1);
    const Eigen::MatrixXcd K2 = kick(a.c3, a.c2_3);
    Eigen::MatrixXcd U = K1 * K2 * K1;
    if (unitarity_defect(U) > 1e-9)
        throw Error(ErrorKind::numerical, "real-space Floquet operator lost unitarity");
    return U;
}

UnitaryEigen unitary_eigen(const Eigen::MatrixXcd& U)
{
    // Schur vectors of a normal matrix are orthonormal eigenvectors, also inside degenerate blocks.
    Eigen::ComplexSchur<Eigen::MatrixXcd> schur(U);
    if (schur.info() != Eigen::Success)
        throw Error(ErrorKind::numerical, "Schur decomposition failed");
    UnitaryEigen out;
    const auto& T = schur.matrixT();
    out.phases.resize(U.rows());
    for (int i = 0; i < U.rows(); ++i)
        out.phases(i) = std::arg(T(i, i));
    out.vectors = schur.matrixU();
    return out;
}

Eigen::MatrixXcd effective_hamiltonian(const Eigen::MatrixXcd& U, double branch_center)
{
    const UnitaryEigen ue = unitary_eigen(U);
    Eigen::VectorXd eps(ue.phases.size());
    for (int i = 0; i < eps.size(); ++i) {
        const double d = wrap_pi(-ue.phases(i) - branch_center);
        if (d > pi - 1e-9 || d < -pi + 1e-9)
            throw Error(ErrorKind::branch_cut, "eigenphase on the branch cut; shift branch_center");
        eps(i) = branch_center + d;
    }
    Eigen::MatrixXcd H = ue.vectors * eps.cast<cplx>().asDiagonal() * ue.vectors.adjoint();
    return (H + H.adjoint()) / 2.0;
}

Eigen::MatrixXd parity_matrix(int N)
{
    return Eigen::MatrixXd::Identity(N, N).rowwise().reverse();
}

Eigen::MatrixXcd realification_transform(int N)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(parity_matrix(N));
    Eigen::VectorXcd root(N);
    for (int i = 0; i < N; ++i)
        root(i) = std::sqrt(cplx(std::round(es.eigenvalues()(i)), 0.0));
    return root.asDiagonal() * es.eigenvectors().transpose().cast<cplx>();
}

namespace {

void fix_signs(Eigen::MatrixXd& F)
{
    for (int c = 0; c < F.cols(); ++c) {
        int best = 0;
        for (int r = 1; r < F.rows(); ++r)
            if (std::abs(F(r, c)) > std::abs(F(best, c)) + 1e-12)
                best = r;
        if (F(best, c) < 0)
            F.col(c) *= -1;
    }
}

Realified realify_with(const Eigen::MatrixXcd& H, const Eigen::MatrixXcd& W)
{
    const Eigen::MatrixXcd Ht = W * H * W.adjoint();
    Realified out;
    out.W = W;
    out.frame.residual_imag = Ht.imag().cwiseAbs().maxCoeff();
    if (out.frame.residual_imag > 1e-6)
        throw Error(ErrorKind::gauge, "realified Hamiltonian is not real (residual " +
                                          std::to_string(out.frame.residual_imag) + ")");
    Eigen::MatrixXd R = Ht.real();
    R = (R + R.transpose()) / 2;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(R);
    out.frame.quasienergies = es.eigenvalues();
    out.frame.frame = es.eigenvectors();
    fix_signs(out.frame.frame);
    return out;
}

const Eigen::MatrixXcd& cached_transform(int N)
{
    thread_local int cached_n = -1;
    thread_local Eigen::MatrixXcd W;
    if (cached_n != N) {
        W = realification_transform(N);
        cached_n = N;
    }
    return W;
}

} // namespace

Realified realify(const Eigen::MatrixXcd& H, int N)
{
    Realified r = realify_with(H, cached_transform(N));
    const int n = static_cast<int>(r.frame.quasienergies.size());
    r.frame.degenerate.assign(n, false);
    for (int i = 0; i + 1 < n; ++i)
        if (r.frame.quasienergies(i + 1) - r.frame.quasienergies(i) < 1e-9)
            r.frame.degenerate[i] = r.frame.degenerate[i + 1] = true;
    return r;
}

BandFrame band_frame(const BlochOperator& U, const Convention& conv)
{
    const int N = static_cast<int>(U.matrix.rows());
    const UnitaryEigen ue = unitary_eigen(U.matrix);
    std::vector<double> th(N);
    for (int i = 0; i < N; ++i)
        th[i] = conv.quasienergy_sign * ue.phases(i);
    std::vector<double> s = th;
    for (double& x : s)
        x = wrap_pi(x);
    std::sort(s.begin(), s.end());
    // place the window cut in the middle of the widest gap on the circle
    int widest = N - 1;
    double wg = s[0] + 2 * pi - s[N - 1];
    for (int i = 0; i + 1 < N; ++i)
        if (s[i + 1] - s[i] > wg) {
            wg = s[i + 1] - s[i];
            widest = i;
        }
    const double cut = s[widest] + wg / 2;
    Eigen::VectorXd eps(N);
    for (int i = 0; i < N; ++i)
        eps(i) = cut - 2 * pi + std::fmod(std::fmod(th[i] - cut, 2 * pi) + 4 * pi, 2 * pi);
    Eigen::MatrixXcd H = ue.vectors * eps.cast<cplx>().asDiagonal() * ue.vectors.adjoint();
    H = (H + H.adjoint()) / 2.0;
    Realified r = realify(H, N);

    // report in (-pi, pi], ascending
    BandFrame out;
    out.residual_imag = r.frame.residual_imag;
    std::vector<int> order(N);
    std::vector<double> w(N);
    for (int i = 0; i < N; ++i) {
        order[i] = i;
        w[i] = wrap_pi(r.frame.quasienergies(i));
    }
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return w[a] < w[b]; });
    out.quasienergies.resize(N);
    out.frame.resize(N, N);
    for (int i = 0; i < N; ++i) {
        out.quasienergies(i) = w[order[i]];
        out.frame.col(i) = r.frame.frame.col(order[i]);
    }
    out.degenerate.assign(N, false);
    for (int i = 0; i < N; ++i) {
        const int j = (i + 1) % N;
        if (circle_distance(out.quasienergies(i), out.quasienergies(j)) < 1e-9)
            out.degenerate[i] = out.degenerate[j] = true;
    }
    return out;
}

double circle_distance(double x, double y)
{
    return std::abs(wrap_pi(x - y));
}

double gap_function(const Eigen::VectorXd& eps, int n)
{
    const int N = static_cast<int>(eps.size());
    if (n < 1 || n > N)
        throw Error(ErrorKind::config, "gap index out of range");
    return circle_distance(eps(n - 1), eps(n % N));
}

void GridSpec::validate() const
{
    if (n_k < 3 || n_alpha < 3)
        throw Error(ErrorKind::config, "grid sizes must be at least 3");
}

double GridSpec::k(int i) const
{
    return 2 * pi * (i + k_offset) / n_k;
}

double GridSpec::alpha(int j) const
{
    return 2 * pi * j / n_alpha;
}

int BandGrid::index(int i, int j) const
{
    i = ((i % grid.n_k) + grid.n_k) % grid.n_k;
    j = ((j % grid.n_alpha) + grid.n_alpha) % grid.n_alpha;
    return i * grid.n_alpha + j;
}

Eigen::MatrixXd BandGrid::overlap(int i, int j, int direction) const
{
    const int i2 = direction == 0 ? i + 1 : i;
    const int j2 = direction == 0 ? j : j + 1;
    return frame_at(i, j).transpose() * frame_at(i2, j2);
}

double BandGrid::gap(int i, int j, int n) const
{
    return gap_function(eps_at(i, j), n);
}

int cyclic_align(const Eigen::VectorXd& eps, const Eigen::VectorXd& ref, Eigen::VectorXd& aligned,
                 double* runner_up_cost, double* best_cost)
{
    const int N = static_cast<int>(eps.size());
    double best = 1e300, second = 1e300;
    int best_r = 0;
    Eigen::VectorXd er(N);
    for (int r = 0; r < N; ++r) {
        for (int b = 0; b < N; ++b)
            er(b) = eps((b + r) % N) + (b + r >= N ? 2 * pi : 0.0);
        const double shift = 2 * pi * std::round((ref - er).mean() / (2 * pi));
        er.array() += shift;
        const double cost = (er - ref).cwiseAbs().sum();
        if (cost < best) {
            second = best;
            best = cost;
            best_r = r;
            aligned = er;
        } else if (cost < second) {
            second = cost;
        }
    }
    if (runner_up_cost)
        *runner_up_cost = second;
    if (best_cost)
        *best_cost = best;
    return best_r;
}

namespace {

template <class F>
void parallel_for(int n, const Executor& exec, F&& body)
{
#ifdef _OPENMP
    const int threads = exec.threads > 0 ? exec.threads : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(threads)
    for (int i = 0; i < n; ++i)
        body(i);
#else
    (void)exec;
    for (int i = 0; i < n; ++i)
        body(i);
#endif
}

Eigen::MatrixXd permute_columns(const Eigen::MatrixXd& F, int r)
{
    const int N = static_cast<int>(F.cols());
    Eigen::MatrixXd out(F.rows(), N);
    for (int b = 0; b < N; ++b)
        out.col(b) = F.col((b + r) % N);
    return out;
}

} // namespace

BandGrid band_grid(int N, const GridSpec& grid, const Protocol& protocol, const Convention& conv,
                   const Executor& exec)
{
    grid.validate();
    BandGrid g;
    g.N = N;
    g.grid = grid;
    const int total = grid.n_k * grid.n_alpha;
    g.eps.resize(total);
    g.frames.resize(total);
    g.residual.resize(total);
    g.degenerate.resize(total);
    std::vector<std::string> failures(total);

    parallel_for(total, exec, [&](int idx) {
        const int i = idx / grid.n_alpha, j = idx % grid.n_alpha;
        try {
            const double a = grid.alpha(j);
            const BandFrame bf = band_frame(build_u_tkr_bloch(N, grid.k(i), a, protocol, conv), conv);
            g.eps[idx] = bf.quasienergies;
            g.frames[idx] = bf.frame;
            g.residual[idx] = bf.residual_imag;
            g.degenerate[idx] = static_cast<int>(std::count(bf.degenerate.begin(), bf.degenerate.end(), true)) / 2;
        } catch (const std::exception& e) {
            failures[idx] = e.what();
        }
    });
    for (int idx = 0; idx < total; ++idx)
        if (!failures[idx].empty())
            throw Error(ErrorKind::gauge, "band_grid point " + std::to_string(idx) + ": " + failures[idx]);

    // sequential continuity pass in fixed row-major order
    for (int i = 0; i < grid.n_k; ++i)
        for (int j = 0; j < grid.n_alpha; ++j) {
            if (i == 0 && j == 0)
                continue;
            const int idx = g.index(i, j);
            const Eigen::VectorXd& ref = j > 0 ? g.eps[g.index(i, j - 1)] : g.eps[g.index(i - 1, j)];
            Eigen::VectorXd aligned;
            double second = 0, best = 0;
            const int r = cyclic_align(g.eps[idx], ref, aligned, &second, &best);
            if (second - best < 1e-3 && g.degenerate[idx] == 0)
                throw Error(ErrorKind::continuity, "ambiguous band continuation at grid point (" + std::to_string(i) +
                                                       "," + std::to_string(j) + ")");
            g.eps[idx] = aligned;
            g.frames[idx] = permute_columns(g.frames[idx], r);
        }
    g.max_residual = *std::max_element(g.residual.begin(), g.residual.end());
    return g;
}

KLine k_line(int N, const PulseVector& P, int n_k, double k_offset, const Convention& conv)
{
    KLine line;
    line.k.resize(n_k);
    line.eps.resize(n_k);
    line.frames.resize(n_k);
    for (int j = 0; j < n_k; ++j) {
        line.k[j] = 2 * pi * (j + k_offset) / n_k;
        const BandFrame bf = band_frame(build_u_tkr_bloch(N, line.k[j], 0.0, P, conv), conv);
        if (j == 0) {
            line.eps[j] = bf.quasienergies;
            line.frames[j] = bf.frame;
            continue;
        }
        Eigen::VectorXd aligned;
        const int r = cyclic_align(bf.quasienergies, line.eps[j - 1], aligned);
        line.eps[j] = aligned;
        line.frames[j] = permute_columns(bf.frame, r);
    }
    Eigen::VectorXd aligned;
    Eigen::VectorXd raw0 = line.eps[0];
    const int r = cyclic_align(raw0, line.eps[n_k - 1], aligned);
    line.closes = r == 0 && std::abs(aligned(0) - raw0(0)) < 1e-9;
    return line;
}

int adiabatic_rotation(int N, const PulseVector& P, double k, const Convention& conv, int steps)
{
    const double size = std::abs(P.P1) + std::abs(P.P2) + std::abs(P.P3) + std::abs(P.P4);
    if (steps <= 0)
        steps = std::max(400, static_cast<int>(200 * size));
    auto sorted_eps = [&](double t) {
        const PulseVector Pt{t * P.P1, t * P.P2, t * P.P3, t * P.P4};
        const UnitaryEigen ue = unitary_eigen(build_u_tkr_bloch(N, k, 0.0, Pt, conv).matrix);
        Eigen::VectorXd e(N);
        for (int i = 0; i < N; ++i)
            e(i) = wrap_pi(conv.quasienergy_sign * ue.phases(i));
        std::sort(e.data(), e.data() + N);
        return e;
    };
    const double t0 = 1e-3;
    Eigen::VectorXd ref = sorted_eps(t0);
    for (int s = 1; s <= steps; ++s) {
        const double t = t0 + (1 - t0) * s / steps;
        Eigen::VectorXd aligned;
        cyclic_align(sorted_eps(t), ref, aligned);
        ref = aligned;
    }
    Eigen::VectorXd aligned;
    return cyclic_align(sorted_eps(1.0), ref, aligned);
}

int adiabatic_gap(int g, int r, int N)
{
    return ((g - 1 - r) % N + N) % N + 1;
}

int sorted_gap(int a, int r, int N)
{
    return ((a - 1 + r) % N + N) % N + 1;
}

} // namespace kr
