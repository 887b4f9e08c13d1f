#pragma once

#include "kr/dynamics.hpp"
#include "kr/phase_diagram.hpp"
#include "kr/topology.hpp"

#include <json.hpp>

#include <ostream>
#include <string>

namespace kr {

// shortest round-trip decimal form
std::string fmt(double x);

void write_bands_csv(std::ostream& os, const BandGrid& g);
void write_trace_csv(std::ostream& os, const EvolutionTrace& tr);
void write_populations_csv(std::ostream& os, const EvolutionTrace& tr);
void write_phase_csv(std::ostream& os, const PhaseDiagram& pd);
void write_nodes_csv(std::ostream& os, const std::vector<NodeRecord>& nodes);
void write_euler_form_csv(std::ostream& os, const EulerResult& r, const PatchSpec& patch, const GridSpec& grid);

nlohmann::ordered_json node_json(const NodeRecord& n);
nlohmann::ordered_json string_json(const DiracString& s);
nlohmann::ordered_json zak_json(const ZakRecord& z);
nlohmann::ordered_json patch_json(const PatchSpec& p, const EulerResult& r, const GridSpec& grid, int N);

} // namespace kr
