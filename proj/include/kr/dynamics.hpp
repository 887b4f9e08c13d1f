#pragma once

#include "kr/floquet.hpp"
#include "kr/protocol.hpp"

#include <string>
#include <vector>

namespace kr {

using RotorState = Eigen::VectorXcd;

// amplitudes exp(-theta l(l+1)), normalised
RotorState thermal_state(double theta, const LatticeSpec& spec);

struct Observables {
    double l2 = 0;
    Eigen::VectorXd populations;
};
Observables observables(const RotorState& psi);

enum class GapLabels { sorted, adiabatic };

struct EdgeOptions {
    Mode mode = Mode::exact;
    GapLabels labels = GapLabels::sorted;
    int window = 0;       // boundary window in sites; 0 -> 3N
    double min_weight = 0.5;
    int bulk_k = 256;     // k samples for the bulk gap edges
};

struct BulkGap {
    int gap;             // in the requested labelling
    double lower, upper; // unwrapped, upper > lower when open
    bool open() const { return upper > lower; }
};

std::vector<BulkGap> bulk_gaps(int N, const PulseVector& P, GapLabels labels, const Convention& conv = {},
                               int n_k = 256);

struct EdgeCandidate {
    double quasienergy;
    int gap;
    double weight_l0;    // population on l < window
    double weight_lmax;  // population on l > l_max - window
    int index;
};

struct EdgeState {
    RotorState state;
    EdgeCandidate info;
    bool at_l0 = true;
};

// all open-boundary eigenstates inside a bulk gap that sit at either boundary
std::vector<EdgeCandidate> edge_candidates(const PulseVector& P, const LatticeSpec& spec, const EdgeOptions& opt,
                                           const Convention& conv = {}, std::vector<RotorState>* states = nullptr);

EdgeState edge_state(const PulseVector& P, const LatticeSpec& spec, int gap, const EdgeOptions& opt = {},
                     const Convention& conv = {});

struct TraceRow {
    int period;
    double alpha;
    double l2;
    double norm;
    double tail_mass;
};

struct EvolutionTrace {
    std::vector<TraceRow> rows;          // row 0 is the initial state
    std::vector<Eigen::VectorXd> populations;
    double max_norm_drift = 0;
    double max_tail = 0;
    bool unreliable = false;             // tail mass above threshold at some period
    RotorState final_state;
};

struct EvolveOptions {
    Mode mode = Mode::exact;
    double tail_threshold = 1e-6;
    int tail_sites = 11;  // l in [l_max - 10, l_max]
    bool keep_populations = true;
};

EvolutionTrace evolve(const RotorState& psi0, const Protocol& protocol, const LatticeSpec& spec,
                      const EvolveOptions& opt = {}, const Convention& conv = {});

} // namespace kr
