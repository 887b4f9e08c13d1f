#pragma once

#include <Eigen/Dense>

namespace kr {

enum class Mode { exact, asymptotic };

struct LatticeSpec {
    int l_max = 201;
    int N = 3;

    int dim() const { return l_max + 1; }
    void validate() const;
};

struct PulseVector {
    double P1 = 0, P2 = 0, P3 = 0, P4 = 0;

    bool operator==(const PulseVector&) const = default;
};

struct PotentialMatrix {
    Eigen::MatrixXd entries;
    Mode mode = Mode::exact;
};

// <l',0|cos|l,0> and <l',0|cos^2|l,0>
double exact_cos_element(int l_prime, int l);
double exact_cos2_element(int l_prime, int l);

// V = p_cos cos(theta) + p_cos2 cos^2(theta) on l = 0..l_max.
// keep_constant=false removes the p_cos2/2 diagonal offset (a global phase).
PotentialMatrix real_space_potential(const LatticeSpec& spec, double p_cos, double p_cos2, Mode mode,
                                     bool keep_constant = true);

// V(k)_ij = sum_m exp(-i m k) A(i + m N, j) with the asymptotic amplitudes A.
Eigen::MatrixXcd bloch_potential(int N, double k, double p_cos, double p_cos2, bool keep_constant = true);

} // namespace kr
