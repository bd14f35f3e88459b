#include "rgflow/serialize.hpp"

#include <cstdio>

#include "rgflow/version.hpp"

namespace rgflow {

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

ordered_json to_json(const LatticeConfig& cfg) {
    return ordered_json{{"n", cfg.n}, {"beta", cfg.beta}, {"mass", cfg.mass}, {"hbar", cfg.hbar}};
}

ordered_json to_json(const CouplingVector& cv) {
    return ordered_json{
        {"order", cv.order}, {"g", cv.derivs}, {"even_parity", cv.even_parity}};
}

ordered_json to_json(const FlowTrace& trace) {
    ordered_json snaps = ordered_json::array();
    for (const FlowSnapshot& s : trace.snapshots)
        snaps.push_back(ordered_json{{"m", s.m}, {"g", s.couplings.derivs}});
    return ordered_json{{"version", version},
                        {"config", to_json(trace.cfg)},
                        {"truncation", {{"order", trace.order}, {"update_mask", trace.update_mask}}},
                        {"engine", {{"kernel", trace.kernel}}},
                        {"snapshots", std::move(snaps)},
                        {"final_g", trace.final_couplings.derivs},
                        {"energy", trace.final_couplings.g(0)}};
}

ordered_json to_json(const OracleResult& result) {
    return ordered_json{{"version", version},
                        {"method", result.method},
                        {"value", result.value},
                        {"est_error", result.est_error},
                        {"resolution",
                         {{"grid_n", result.resolution.grid_n},
                          {"domain_half_width", result.resolution.domain_half_width},
                          {"quad_order", result.resolution.quad_order},
                          {"tail_ratio", result.resolution.tail_ratio}}}};
}

ordered_json to_json(const GridPotential& grid) {
    return ordered_json{{"version", version},
                        {"interpolation", "natural-cubic-spline"},
                        {"xs", grid.xs()},
                        {"vs", grid.vs()}};
}

} // namespace rgflow
