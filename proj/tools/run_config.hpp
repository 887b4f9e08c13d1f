#pragma once

#include "kr/dynamics.hpp"
#include "kr/phase_diagram.hpp"
#include "kr/topology.hpp"

#include <json.hpp>

#include <optional>
#include <string>

namespace kr::cli {

struct PatchRect {
    double k0 = 0, k1 = 0, a0 = 0, a1 = 0;  // units of 2 pi
    int gap = 1;
};

struct RunConfig {
    int N = 3;
    int l_max = 201;
    Mode mode = Mode::exact;
    int n_k = 64;
    int n_alpha = 64;
    double k_offset = 0.5;

    std::string preset = "fig1_circle";
    PulseVector pulses{};  // preset "constant"
    double beta = 0.15;
    int n_gamma = 40;
    int cycles = 1;

    std::optional<PatchRect> patch;  // topology / euler

    PhaseDiagramSpec phase{};

    std::string state = "thermal";   // evolve: thermal | edge
    double theta = 0.17;
    int edge_gap = 3;
    GapLabels edge_labels = GapLabels::adiabatic;
    int edge_window = 0;
    double tail_threshold = 1e-6;
    bool populations = true;

    std::string out_dir = ".";
    int threads = 0;
    Convention conv{};

    void validate(const std::string& command) const;
    Protocol protocol() const;
    GridSpec grid() const { return {n_k, n_alpha, k_offset}; }

    nlohmann::ordered_json to_json() const;
    static RunConfig from_json(const nlohmann::ordered_json& j);
};

// Each runner writes its files into cfg.out_dir and returns a one-line summary.
std::string run_bands(const RunConfig& cfg);
std::string run_topology(const RunConfig& cfg);
std::string run_phase_diagram(const RunConfig& cfg);
std::string run_evolve(const RunConfig& cfg);
std::string run_zak(const RunConfig& cfg);
std::string run_euler(const RunConfig& cfg);

} // namespace kr::cli
