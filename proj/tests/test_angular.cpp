#include "kr/angular.hpp"
#include "kr/errors.hpp"
#include "oracle.hpp"

#include <doctest.h>

#include <cmath>

using namespace kr;

TEST_CASE("selection rules")
{
    for (int a = 0; a <= 50; ++a)
        for (int b = 0; b <= 50; ++b) {
            const int d = std::abs(a - b);
            if (d != 1)
                CHECK(exact_cos_element(a, b) == 0.0);
            if (d != 0 && d != 2)
                CHECK(exact_cos2_element(a, b) == 0.0);
        }
}

TEST_CASE("closed forms match quadrature for l <= 50")
{
    const auto c1 = oracle::moment_matrix(50, 1);
    const auto c2 = oracle::moment_matrix(50, 2);
    double worst = 0;
    for (int a = 0; a <= 50; ++a)
        for (int b = 0; b <= 50; ++b) {
            worst = std::max(worst, std::abs(exact_cos_element(a, b) - c1[a][b]));
            worst = std::max(worst, std::abs(exact_cos2_element(a, b) - c2[a][b]));
        }
    CHECK(worst < 1e-10);
}

TEST_CASE("elements approach the asymptotic amplitudes")
{
    double prev1 = 1, prev2 = 1, prev3 = 1;
    for (int l = 1; l <= 100; ++l) {
        const double d1 = std::abs(exact_cos_element(l, l + 1) - 0.5);
        const double d2 = std::abs(exact_cos2_element(l, l) - 0.5);
        const double d3 = std::abs(exact_cos2_element(l, l + 2) - 0.25);
        CHECK(d1 <= prev1);
        CHECK(d2 <= prev2);
        CHECK(d3 <= prev3);
        prev1 = d1;
        prev2 = d2;
        prev3 = d3;
    }
    CHECK(prev1 < 1e-3);
    CHECK(prev2 < 1e-3);
    CHECK(prev3 < 1e-3);
}

TEST_CASE("real-space potential")
{
    const LatticeSpec spec{40, 3};
    const auto V = real_space_potential(spec, 1.3, 0.7, Mode::exact).entries;
    CHECK(V.rows() == 41);
    CHECK((V - V.transpose()).norm() == 0.0);
    CHECK(V(4, 5) == doctest::Approx(1.3 * exact_cos_element(4, 5)).epsilon(1e-15));
    CHECK(V(4, 4) == doctest::Approx(0.7 * exact_cos2_element(4, 4)).epsilon(1e-15));

    const auto A = real_space_potential(spec, 1.3, 0.7, Mode::asymptotic).entries;
    CHECK(A(10, 11) == doctest::Approx(0.65));
    CHECK(A(10, 12) == doctest::Approx(0.175));
    CHECK(A(10, 10) == doctest::Approx(0.35));
    const auto A0 = real_space_potential(spec, 1.3, 0.7, Mode::asymptotic, false).entries;
    CHECK(A0(10, 10) == doctest::Approx(0.0));
}

TEST_CASE("Bloch potential is the Fourier sum of the chain")
{
    for (int N : {3, 5})
        for (double k : {0.0, 0.4, 2.1, M_PI, -1.3})
            for (bool keep : {true, false}) {
                const Eigen::MatrixXcd V = bloch_potential(N, k, 1.1, 2.3, keep);
                const Eigen::MatrixXcd ref = oracle::fourier_from_chain(N, k, 1.1, 2.3, keep);
                CHECK((V - ref).cwiseAbs().maxCoeff() < 1e-14);
                CHECK((V - V.adjoint()).norm() < 1e-14);
                CHECK((V.conjugate() - bloch_potential(N, -k, 1.1, 2.3, keep)).norm() < 1e-14);
            }
}

TEST_CASE("lattice validation")
{
    CHECK_NOTHROW((LatticeSpec{201, 3}.validate()));
    CHECK_THROWS_AS((LatticeSpec{201, 4}.validate()), Error);
    CHECK_THROWS_AS((LatticeSpec{201, 1}.validate()), Error);
    CHECK_THROWS_AS((LatticeSpec{7, 3}.validate()), Error);
    CHECK_THROWS_AS(bloch_potential(2, 0.0, 1, 1), Error);
    try {
        LatticeSpec{201, 4}.validate();
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::config);
        CHECK(exit_code(e.kind()) == 1);
    }
}
