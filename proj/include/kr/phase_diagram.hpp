#pragma once

#include "kr/floquet.hpp"

#include <array>
#include <string>
#include <vector>

namespace kr {

struct PhaseDiagramSpec {
    double p1_min = 0, p1_max = 8;
    double p4_min = 0, p4_max = 8;
    int n1 = 32, n4 = 32;  // inclusive endpoints
    int n_k = 64;          // even, samples k = 0 and k = pi exactly

    void validate() const;
    double P1(int a) const;
    double P4(int b) const;
};

enum class LineKind { k0 = 0, kpi = 1, generic = 2 };

// a nodal line crossed between two neighbouring (P1, P4) grid points
struct LineCrossing {
    int gap;
    LineKind kind;
    std::array<int, 2> from, to;  // (a, b) indices into the P1 / P4 axes
};

struct PhasePoint {
    double P1 = 0, P4 = 0;
    std::vector<double> mingap;  // min over k of delta_n, n = 1..N
    unsigned flags = 0;          // bit 3*(gap-1) + kind, set on both ends of a crossing edge
    bool degenerate = false;     // bands touch at k = 0 or pi on the grid point itself
};

struct PhaseDiagram {
    int N = 3;
    PhaseDiagramSpec spec;
    std::vector<PhasePoint> points;  // row-major, P1 index outer
    std::vector<LineCrossing> crossings;

    int count(int gap, LineKind kind) const;
    bool has_lines(int gap) const;
};

PhaseDiagram nodal_line_map(int N, const PhaseDiagramSpec& spec, const Convention& conv = {}, const Executor& exec = {});

std::string line_flags_string(unsigned flags, int N);

// parities (+-1) of the sorted bands at k (k must be 0 or pi)
std::vector<int> band_parities(int N, const PulseVector& P, double k, const Convention& conv = {});

// "0"/"1" per band Zak phase along k (1 = pi)
std::string zak_label(int N, const PulseVector& P, int n_k = 200, const Convention& conv = {});

} // namespace kr
