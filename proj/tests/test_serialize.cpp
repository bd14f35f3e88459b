#include <cstdlib>
#include <string>

#include "doctest.h"
#include "rgflow/serialize.hpp"
#include "rgflow/version.hpp"

using namespace rgflow;

TEST_CASE("format_g17 round-trips through strtod") {
  for (double v : {0.1, 1.0 / 3.0, 0.55915, 1.161228e6, -4.978787396082e-05, 0.0}) {
    const std::string s = format_g17(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
}

TEST_CASE("json shapes carry the documented fields") {
  const LatticeConfig cfg{100, 2.0, 1.0, 1.0};
  const auto jc = to_json(cfg);
  CHECK(jc["n"] == 100);
  CHECK(jc["beta"] == 2.0);
  CHECK(jc["mass"] == 1.0);
  CHECK(jc["hbar"] == 1.0);

  const auto jv = to_json(CouplingVector::anharmonic(4, 1.0, 1.0, 2.4));
  CHECK(jv["order"] == 4);
  CHECK(jv["even_parity"] == true);
  CHECK(jv["g"].size() == 5);
  CHECK(jv["g"][4] == 2.4);

  OracleResult r;
  r.value = 0.5;
  r.method = "schrodinger";
  r.est_error = 1e-7;
  r.resolution.grid_n = 4000;
  const auto jr = to_json(r);
  CHECK(jr["version"] == version);
  CHECK(jr["method"] == "schrodinger");
  CHECK(jr["value"] == 0.5);
  CHECK(jr["resolution"]["grid_n"] == 4000);

  const auto jg = to_json(GridPotential::tabulate(CouplingVector::zero(2), 5.0, 33));
  CHECK(jg["interpolation"] == "natural-cubic-spline");
  CHECK(jg["xs"].size() == 33);
  CHECK(jg["vs"].size() == 33);
}

TEST_CASE("flow trace serialization is faithful and deterministic") {
  const LatticeConfig cfg{1000, 2.0, 1.0, 1.0};
  FlowOptions opts;
  opts.snapshot_stride = 100;
  const CouplingVector init = CouplingVector::anharmonic(6, 1.0, 1.0, 2.4);
  const FlowTrace t = run_flow(init, cfg, opts);
  const auto j = to_json(t);

  CHECK(j["version"] == "0.1.0");
  CHECK(j["truncation"]["order"] == 6);
  CHECK(j["engine"]["kernel"] == t.kernel);
  CHECK(j["energy"] == ground_state_energy(t));
  CHECK(j["final_g"].size() == 7);
  REQUIRE(j["snapshots"].size() >= 2);
  for (std::size_t i = 1; i < j["snapshots"].size(); ++i) {
    CHECK(j["snapshots"][i]["m"].get<std::int64_t>() <
          j["snapshots"][i - 1]["m"].get<std::int64_t>());
  }

  // identical inputs serialize to identical bytes
  const FlowTrace t2 = run_flow(init, cfg, opts);
  CHECK(to_json(t2).dump(2) == j.dump(2));
}
