#include "kr/errors.hpp"
#include "kr/floquet.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace kr;

namespace {

constexpr double pi = std::numbers::pi;

std::vector<double> sorted_phases(const Eigen::MatrixXcd& U)
{
    const UnitaryEigen ue = unitary_eigen(U);
    std::vector<double> p(ue.phases.data(), ue.phases.data() + ue.phases.size());
    std::sort(p.begin(), p.end());
    return p;
}

double spectrum_distance(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B)
{
    // eigenvalues on the unit circle, matched greedily
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> ea(A), eb(B);
    std::vector<cplx> b(eb.eigenvalues().data(), eb.eigenvalues().data() + B.rows());
    double worst = 0;
    for (int i = 0; i < A.rows(); ++i) {
        auto it = std::min_element(b.begin(), b.end(), [&](cplx x, cplx y) {
            return std::abs(x - ea.eigenvalues()(i)) < std::abs(y - ea.eigenvalues()(i));
        });
        worst = std::max(worst, std::abs(*it - ea.eigenvalues()(i)));
        b.erase(it);
    }
    return worst;
}

const PulseVector sample{2.2, 0.4, 0.7, 5.1};

} // namespace

TEST_CASE("free phases")
{
    CHECK(std::abs(free_phase(0, 3) - cplx(1, 0)) < 1e-15);
    CHECK(std::abs(free_phase(1, 3) - std::polar(1.0, -2 * pi / 3)) < 1e-15);
    CHECK(std::abs(free_phase(2, 3) - cplx(1, 0)) < 1e-15);
    // integer reduction keeps large l exactly periodic
    for (int l : {5, 301, 12345})
        CHECK(free_phase(l + 3, 3) == free_phase(l, 3));
    CHECK(std::abs(kick_free_phase(1, 3, 2) - std::polar(1.0, -4 * pi / 3)) < 1e-15);
}

TEST_CASE("kick amplitudes follow the mapping")
{
    const auto a = kick_amplitudes({1, 2, 3, 4}, PulseMapping::cos2_first);
    CHECK(a.c1 == 2);
    CHECK(a.c2_1 == 1);
    CHECK(a.c3 == 4);
    CHECK(a.c2_3 == 3);
    const auto b = kick_amplitudes({1, 2, 3, 4}, PulseMapping::cos_first);
    CHECK(b.c1 == 1);
    CHECK(b.c2_3 == 4);
}

TEST_CASE("Bloch operator is unitary and k -> -k symmetric")
{
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-pi, pi);
    for (int t = 0; t < 20; ++t) {
        const double k = u(rng);
        for (const Convention& c : {Convention{}, literal_convention()}) {
            const auto U = build_u_tkr_bloch(3, k, 0.0, sample, c);
            CHECK(unitarity_defect(U.matrix) < 1e-12);
            const auto a = sorted_phases(U.matrix);
            const auto b = sorted_phases(build_u_tkr_bloch(3, -k, 0.0, sample, c).matrix);
            for (size_t i = 0; i < a.size(); ++i)
                CHECK(std::abs(a[i] - b[i]) < 1e-10);
        }
    }
}

TEST_CASE("symmetric and asymmetric gauges are similar")
{
    for (double k : {0.0, 0.9, 2.5})
        for (int N : {3, 5}) {
            const auto S = build_u_tkr_bloch(N, k, 0.0, sample, {}, Gauge::symmetric);
            const auto A = build_u_tkr_bloch(N, k, 0.0, sample, {}, Gauge::asymmetric);
            CHECK(spectrum_distance(S.matrix, A.matrix) < 1e-10);
        }
}

TEST_CASE("realified frame diagonalises the Bloch operator")
{
    for (double k : {0.0, 0.31, pi, 4.0}) {
        const auto U = build_u_tkr_bloch(3, k, 0.0, sample);
        const BandFrame bf = band_frame(U);
        CHECK(bf.residual_imag < 1e-10);
        CHECK((bf.frame.transpose() * bf.frame - Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-12);
        const Eigen::MatrixXcd W = realification_transform(3);
        for (int b = 0; b < 3; ++b) {
            const Eigen::VectorXcd psi = W.adjoint() * bf.frame.col(b).cast<cplx>();
            CHECK((U.matrix * psi - std::polar(1.0, bf.quasienergies(b)) * psi).norm() < 1e-10);
            if (b > 0)
                CHECK(bf.quasienergies(b) >= bf.quasienergies(b - 1));
        }
    }
}

TEST_CASE("realification transform")
{
    for (int N : {3, 5, 7}) {
        const Eigen::MatrixXcd W = realification_transform(N);
        CHECK((W * W.adjoint() - Eigen::MatrixXcd::Identity(N, N)).norm() < 1e-12);
        // parity becomes diagonal +-1
        const Eigen::MatrixXcd Pt = W * parity_matrix(N).cast<cplx>() * W.adjoint();
        CHECK((Pt.cwiseAbs() - Eigen::MatrixXd::Identity(N, N)).norm() < 1e-12);
    }
    Eigen::MatrixXcd H(3, 3);
    H << 1.0, cplx(0, 0.5), 0.0, cplx(0, -0.5), 2.0, 0.3, 0.0, 0.3, -1.0;
    CHECK_THROWS_AS(realify(H, 3), Error);
}

TEST_CASE("real-space operator is unitary and transpose symmetric")
{
    const LatticeSpec spec{60, 3};
    for (Mode m : {Mode::exact, Mode::asymptotic}) {
        const Eigen::MatrixXcd U = build_u_tkr_real(spec, sample, m);
        CHECK(unitarity_defect(U) < 1e-12);
        CHECK((U - U.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("bulk of the asymptotic chain reduces to the Bloch operator")
{
    const int N = 3;
    const LatticeSpec spec{300, N};
    const Eigen::MatrixXcd U = build_u_tkr_real(spec, sample, Mode::asymptotic);
    const int c = 50;
    for (double k : {0.0, 1.2, pi}) {
        Eigen::MatrixXcd B = Eigen::MatrixXcd::Zero(N, N);
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j)
                for (int R = -40; R <= 40; ++R)
                    B(i, j) += std::polar(1.0, -R * k) * U(c * N + i + R * N, c * N + j);
        CHECK(unitarity_defect(B) < 1e-10);
        CHECK(spectrum_distance(B, build_u_tkr_bloch(N, k, 0.0, sample).matrix) < 1e-10);
    }
}

TEST_CASE("effective Hamiltonian")
{
    Eigen::MatrixXcd U = Eigen::MatrixXcd::Zero(2, 2);
    U(0, 0) = std::polar(1.0, 0.3);
    U(1, 1) = std::polar(1.0, -2.0);
    const Eigen::MatrixXcd H = effective_hamiltonian(U);
    CHECK(H(0, 0).real() == doctest::Approx(-0.3));
    CHECK(H(1, 1).real() == doctest::Approx(2.0));

    U(1, 1) = -1.0;
    try {
        effective_hamiltonian(U);
        FAIL("expected a branch cut error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::branch_cut);
    }
    const Eigen::MatrixXcd H2 = effective_hamiltonian(U, 1.0);
    CHECK(H2(1, 1).real() == doctest::Approx(pi));
}

TEST_CASE("gap function")
{
    Eigen::VectorXd e(3);
    e << -1.0, 0.5, 2.0;
    CHECK(gap_function(e, 1) == doctest::Approx(1.5));
    CHECK(gap_function(e, 2) == doctest::Approx(1.5));
    CHECK(gap_function(e, 3) == doctest::Approx(3.0));
    Eigen::VectorXd w(2);
    w << 3.0, -3.0;
    CHECK(gap_function(w, 1) == doctest::Approx(2 * pi - 6.0));
    w << pi, -pi;
    CHECK(gap_function(w, 1) == doctest::Approx(0.0));
    CHECK_THROWS_AS(gap_function(e, 4), Error);
}

TEST_CASE("cyclic alignment")
{
    Eigen::VectorXd ref(3), e(3), out;
    ref << -1.0, 1.0, 2.9;
    e << -3.1, -0.98, 1.02;  // top band crossed the branch point
    const int r = cyclic_align(e, ref, out);
    CHECK(r == 1);
    CHECK(out(0) == doctest::Approx(-0.98));
    CHECK(out(2) == doctest::Approx(-3.1 + 2 * pi));
}

TEST_CASE("gap relabelling")
{
    for (int r = 0; r < 3; ++r)
        for (int g = 1; g <= 3; ++g)
            CHECK(sorted_gap(adiabatic_gap(g, r, 3), r, 3) == g);
    CHECK(adiabatic_gap(1, 1, 3) == 3);
    CHECK(adiabatic_gap(2, 0, 3) == 2);
}

TEST_CASE("band grid labels are continuous")
{
    const BandGrid g = band_grid(3, {32, 32}, Protocol::fig3_family(0.21));
    CHECK(g.max_residual < 1e-8);
    double worst = 0;
    for (int i = 0; i < 32; ++i)
        for (int j = 0; j + 1 < 32; ++j)
            worst = std::max(worst, (g.eps_at(i, j + 1) - g.eps_at(i, j)).cwiseAbs().maxCoeff());
    CHECK(worst < 0.5);
}

TEST_CASE("convention validation")
{
    Convention c;
    c.free_phase_multiplier = 3;
    CHECK_THROWS_AS(build_u_tkr_bloch(3, 0.0, 0.0, sample, c), Error);
    CHECK(Convention{}.describe() == "mapping=cos2_first multiplier=2 constant=kept eps_sign=+");
}
