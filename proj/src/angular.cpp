#include "kr/angular.hpp"
#include "kr/errors.hpp"

#include <cmath>
#include <complex>
#include <string>

namespace kr {

const char* error_name(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::config: return "config";
    case ErrorKind::numerical: return "numerical";
    case ErrorKind::resolution: return "resolution";
    case ErrorKind::branch_cut: return "branch_cut";
    case ErrorKind::gauge: return "gauge";
    case ErrorKind::continuity: return "continuity";
    case ErrorKind::regrid: return "regrid";
    case ErrorKind::degenerate_line: return "degenerate_line";
    case ErrorKind::consistency: return "consistency";
    case ErrorKind::invalid_patch: return "invalid_patch";
    case ErrorKind::not_topological: return "not_topological";
    case ErrorKind::truncation: return "truncation";
    }
    return "unknown";
}

int exit_code(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::config: return 1;
    case ErrorKind::invalid_patch: return 3;
    case ErrorKind::not_topological:
    case ErrorKind::truncation: return 4;
    default: return 2;
    }
}

void LatticeSpec::validate() const
{
    if (N < 3 || N % 2 == 0)
        throw Error(ErrorKind::config, "N must be odd and >= 3, got " + std::to_string(N));
    if (l_max < 0 || l_max + 1 < 3 * N)
        throw Error(ErrorKind::config, "l_max + 1 must be at least 3N, got l_max=" + std::to_string(l_max));
}

double exact_cos_element(int lp, int l)
{
    if (lp < 0 || l < 0 || std::abs(lp - l) != 1)
        return 0.0;
    const double m = std::min(lp, l);
    return (m + 1) / std::sqrt((2 * m + 1) * (2 * m + 3));
}

double exact_cos2_element(int lp, int l)
{
    if (lp < 0 || l < 0)
        return 0.0;
    if (lp == l) {
        const double x = l;
        return (2 * x * x + 2 * x - 1) / ((2 * x - 1) * (2 * x + 3));
    }
    if (std::abs(lp - l) != 2)
        return 0.0;
    const double m = std::min(lp, l);
    return (m + 1) * (m + 2) / ((2 * m + 3) * std::sqrt((2 * m + 1) * (2 * m + 5)));
}

namespace {

double asymptotic_amplitude(int d, double p_cos, double p_cos2, bool keep_constant)
{
    switch (std::abs(d)) {
    case 0: return keep_constant ? p_cos2 / 2 : 0.0;
    case 1: return p_cos / 2;
    case 2: return p_cos2 / 4;
    default: return 0.0;
    }
}

} // namespace

PotentialMatrix real_space_potential(const LatticeSpec& spec, double p_cos, double p_cos2, Mode mode,
                                     bool keep_constant)
{
    spec.validate();
    const int n = spec.dim();
    PotentialMatrix V;
    V.mode = mode;
    V.entries = Eigen::MatrixXd::Zero(n, n);
    for (int a = 0; a < n; ++a) {
        for (int b = std::max(0, a - 2); b <= std::min(n - 1, a + 2); ++b) {
            double v;
            if (mode == Mode::exact) {
                v = p_cos * exact_cos_element(a, b) + p_cos2 * exact_cos2_element(a, b);
                if (!keep_constant && a == b)
                    v -= p_cos2 / 2;
            } else {
                v = asymptotic_amplitude(a - b, p_cos, p_cos2, keep_constant);
            }
            V.entries(a, b) = v;
        }
    }
    return V;
}

Eigen::MatrixXcd bloch_potential(int N, double k, double p_cos, double p_cos2, bool keep_constant)
{
    if (N < 3 || N % 2 == 0)
        throw Error(ErrorKind::config, "bloch_potential needs odd N >= 3, got " + std::to_string(N));
    Eigen::MatrixXcd V = Eigen::MatrixXcd::Zero(N, N);
    // hops reach at most two sites, so |m| <= 2 covers every cell that contributes
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
            for (int m = -2; m <= 2; ++m) {
                const double a = asymptotic_amplitude(i + m * N - j, p_cos, p_cos2, keep_constant);
                if (a != 0.0)
                    V(i, j) += a * std::exp(std::complex<double>(0.0, -m * k));
            }
    return V;
}

} // namespace kr
