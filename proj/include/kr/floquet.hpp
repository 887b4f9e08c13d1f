#pragma once

#include "kr/angular.hpp"
#include "kr/protocol.hpp"

#include <complex>
#include <string>
#include <vector>

namespace kr {

using cplx = std::complex<double>;

// Which cos / cos^2 amplitude each kick strength multiplies.
//   cos2_first: kick (P1,P2) -> P1 cos^2 + P2 cos
//   cos_first:  kick (P1,P2) -> P1 cos + P2 cos^2
enum class PulseMapping { cos2_first, cos_first };

// Band labels are read off eps = sign * arg(lambda); sign=-1 is eps = -arg, i.e. H = i log U.
struct Convention {
    PulseMapping mapping = PulseMapping::cos2_first;
    int free_phase_multiplier = 2;
    bool keep_constant = true;
    int quasienergy_sign = +1;

    void validate() const;
    std::string describe() const;
};

// cos_first mapping, one e^{-i pi l(l+1)/N} per kick, eps = -arg lambda.
Convention literal_convention();

// symmetric: S E1 D E2 D E1 S with S^2 = D; asymmetric: D E1 D E2 D E1. Both are similar.
enum class Gauge { symmetric, asymmetric };

struct BlochOperator {
    double k = 0;
    double alpha = 0;
    Eigen::MatrixXcd matrix;
    Gauge gauge = Gauge::symmetric;
};

struct BandFrame {
    Eigen::VectorXd quasienergies;  // ascending in (-pi, pi]
    Eigen::MatrixXd frame;          // columns: real eigenvectors in the realified basis
    double residual_imag = 0;
    std::vector<bool> degenerate;   // per band, within 1e-9 of a neighbour
};

// e^{-i pi l(l+1)/N}
cplx free_phase(int l, int N);

// per-kick free phase e^{-i pi m l(l+1)/N} for multiplier m
cplx kick_free_phase(int l, int N, int multiplier);

// (cos, cos^2) amplitudes of kick 1 (P1,P2) and kick 2 (P3,P4)
struct KickAmplitudes {
    double c1, c2_1, c3, c2_3;  // first kick: c1 cos + c2_1 cos^2, middle kick: c3 cos + c2_3 cos^2
};
KickAmplitudes kick_amplitudes(const PulseVector& P, PulseMapping mapping);

BlochOperator build_u_tkr_bloch(int N, double k, double alpha, const PulseVector& P,
                                const Convention& conv = {}, Gauge gauge = Gauge::symmetric);
BlochOperator build_u_tkr_bloch(int N, double k, double alpha, const Protocol& path,
                                const Convention& conv = {}, Gauge gauge = Gauge::symmetric);

Eigen::MatrixXcd build_u_tkr_real(const LatticeSpec& spec, const PulseVector& P, Mode mode,
                                  const Convention& conv = {});

// e^{iV} for Hermitian V through its eigendecomposition
Eigen::MatrixXcd expi_hermitian(const Eigen::MatrixXcd& V);
Eigen::MatrixXcd expi_symmetric(const Eigen::MatrixXd& V);

double unitarity_defect(const Eigen::MatrixXcd& U);

// Eigenphases of a unitary (normal) matrix with orthonormal eigenvectors.
struct UnitaryEigen {
    Eigen::VectorXd phases;     // arg lambda in (-pi, pi]
    Eigen::MatrixXcd vectors;
};
UnitaryEigen unitary_eigen(const Eigen::MatrixXcd& U);

// H = i log U with eigenphases in (c - pi, c + pi]
Eigen::MatrixXcd effective_hamiltonian(const Eigen::MatrixXcd& U, double branch_center = 0.0);

struct Realified {
    BandFrame frame;
    Eigen::MatrixXcd W;
};

// parity: antidiagonal exchange
Eigen::MatrixXd parity_matrix(int N);
Eigen::MatrixXcd realification_transform(int N);

// Real eigenframe of W H W^dagger. Sign rule: largest-magnitude component positive.
Realified realify(const Eigen::MatrixXcd& H, int N);

// Band frame of a symmetric-gauge Bloch operator: eps = sign * arg(lambda), realified frame.
BandFrame band_frame(const BlochOperator& U, const Convention& conv = {});

double circle_distance(double x, double y);
double gap_function(const Eigen::VectorXd& eps, int n);

struct GridSpec {
    int n_k = 64;
    int n_alpha = 64;
    double k_offset = 0.5;  // k_i = 2 pi (i + k_offset) / n_k; half-step keeps k = 0, pi on plaquette centres
    void validate() const;
    double k(int i) const;
    double alpha(int j) const;
};

// Band frames on the (k, alpha) torus. Band labels are the ascending (-pi, pi] order at the grid
// origin, continued point by point by matching the cyclic order of the quasienergies.
struct BandGrid {
    int N = 3;
    GridSpec grid;
    std::vector<Eigen::VectorXd> eps;   // continuity-labelled, unwrapped
    std::vector<Eigen::MatrixXd> frames;
    std::vector<double> residual;
    std::vector<int> degenerate;        // count of degenerate pairs per point
    double max_residual = 0;

    int index(int i, int j) const;      // periodic
    const Eigen::VectorXd& eps_at(int i, int j) const { return eps[index(i, j)]; }
    const Eigen::MatrixXd& frame_at(int i, int j) const { return frames[index(i, j)]; }
    Eigen::VectorXd column(int i, int j, int band) const { return frames[index(i, j)].col(band); }

    // overlap matrix <psi_m(p)|psi_n(q)> from (i,j) to the next point in direction 0 (k) or 1 (alpha)
    Eigen::MatrixXd overlap(int i, int j, int direction) const;
    double gap(int i, int j, int n) const;
};

struct Executor {
    int threads = 0;  // 0: library default
};

BandGrid band_grid(int N, const GridSpec& grid, const Protocol& protocol, const Convention& conv = {},
                   const Executor& exec = {});

// Aligns eps to a reference by the cyclic relabelling (plus 2 pi shifts) of smallest total move.
// Returns the rotation r with aligned[b] = eps[(b + r) % N] (+ 2 pi where wrapped).
int cyclic_align(const Eigen::VectorXd& eps, const Eigen::VectorXd& ref, Eigen::VectorXd& aligned,
                 double* runner_up_cost = nullptr, double* best_cost = nullptr);

// Band quasienergies (continuity-labelled, unwrapped) along k at fixed pulses; labels from the
// sorted order at k_0.
struct KLine {
    std::vector<double> k;
    std::vector<Eigen::VectorXd> eps;
    std::vector<Eigen::MatrixXd> frames;
    bool closes = true;  // labels return to themselves after a full k loop
};
KLine k_line(int N, const PulseVector& P, int n_k, double k_offset, const Convention& conv = {});

// Gap labels continued from weak driving: ramps P -> t P and returns r such that the sorted band s at
// (k, P) is band (s - r) mod N of the adiabatic labelling.
int adiabatic_rotation(int N, const PulseVector& P, double k, const Convention& conv = {}, int steps = 0);

// Gap index (1..N) in the adiabatic labelling of sorted gap g.
int adiabatic_gap(int sorted_gap, int rotation, int N);
int sorted_gap(int adiabatic_gap, int rotation, int N);

} // namespace kr
