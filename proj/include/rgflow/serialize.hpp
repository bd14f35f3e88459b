#pragma once

#include <string>

#include "json.hpp"
#include "rgflow/fk_rg.hpp"
#include "rgflow/oracle.hpp"
#include "rgflow/wh_flow.hpp"

namespace rgflow {

using ordered_json = nlohmann::ordered_json;

// Round-trippable decimal form used in CSV cells.
std::string format_g17(double v);

ordered_json to_json(const LatticeConfig& cfg);
ordered_json to_json(const CouplingVector& cv);
ordered_json to_json(const FlowTrace& trace);
ordered_json to_json(const OracleResult& result);
ordered_json to_json(const GridPotential& grid);

} // namespace rgflow
