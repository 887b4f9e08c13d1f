#pragma once

#include "kr/floquet.hpp"

#include <array>
#include <string>
#include <tuple>
#include <vector>

namespace kr {

using Cell = std::array<int, 2>;  // (i, j) grid / plaquette indices

// Gap g (1..N) sits between bands g-1 and g mod N (0-based); gap N is the pi-gap.
std::array<int, 2> gap_bands(int gap, int N);

struct NodeRecord {
    int id = 0;
    int gap = 0;
    Cell plaquette{};   // lower-left corner of the plaquette
    double k = 0;       // plaquette centre
    double alpha = 0;
    int flux = -1;
    int partner = -1;
    std::vector<Cell> string_path;  // plaquettes from this node to its partner (owner only)
};

// sign of the four-link product of one band around plaquette (i,j)
int plaquette_flux(const BandGrid& g, int i, int j, int band);

std::vector<NodeRecord> detect_nodes(const BandGrid& g, int gap);
std::vector<NodeRecord> detect_all_nodes(const BandGrid& g);

struct ZakRecord {
    int band = 0;
    char direction = 'k';
    int transverse = 0;
    double phase = 0;
};

// product of overlap signs along a closed loop of real frames; returns 0 or pi
double zak_phase(const std::vector<Eigen::VectorXd>& loop);
ZakRecord zak_along_k(const BandGrid& g, int band, int j);
ZakRecord zak_along_alpha(const BandGrid& g, int band, int i);

// Zak phases of all bands along k for fixed pulses, in the sorted labelling at k_0
std::vector<double> zak_phases_k(int N, const PulseVector& P, int n_k = 200, const Convention& conv = {});

struct LinkId {
    int i, j, dir;  // link from (i,j) to (i+1,j) if dir == 0, to (i,j+1) if dir == 1
    bool operator<(const LinkId& o) const
    {
        return std::tie(i, j, dir) < std::tie(o.i, o.j, o.dir);
    }
    bool operator==(const LinkId& o) const = default;
};

struct DiracString {
    int gap = 0;
    int from = -1, to = -1;        // node ids
    std::vector<Cell> plaquettes;  // dual path
    std::vector<LinkId> crossed;   // grid links cut by the path
};

struct GaugeFixed {
    std::vector<NodeRecord> nodes;
    std::vector<DiracString> strings;
    std::vector<Eigen::MatrixXd> frames;      // sign-fixed copy of the grid frames
    std::vector<std::vector<LinkId>> winding; // per band: remaining negative links (non-contractible strings)

    // strings of the two gaps touching band b plus its winding links, crossed by link l
    int crossings(int band, const LinkId& l, int N) const;
};

GaugeFixed assign_dirac_strings(const BandGrid& g, std::vector<NodeRecord> nodes);

struct PatchSpec {
    int i0 = 0, i1 = 0, j0 = 0, j1 = 0;  // grid points [i0,i1] x [j0,j1], i1 > i0, j1 > j0, may exceed the grid (wrap)
    int gap = 1;                         // bands (gap-1, gap) for gap < N

    // rectangle [k0,k1] x [a0,a1] in units of 2 pi; snapped to the grid
    static PatchSpec from_fractions(const GridSpec& grid, double k0, double k1, double a0, double a1, int gap);
    void validate(const GridSpec& grid) const;
};

struct EulerResult {
    double chi_raw = 0;
    int chi = 0;
    double curvature_sum = 0;
    double boundary_sum = 0;
    std::vector<Cell> node_plaquettes;
    Eigen::MatrixXd form;  // per plaquette, rows: k, cols: alpha
};

// per-plaquette Euler form on the patch, node plaquettes filled by the neighbour average
EulerResult euler_form(const BandGrid& g, const PatchSpec& patch);
EulerResult patch_euler_class(const BandGrid& g, const PatchSpec& patch);

} // namespace kr
