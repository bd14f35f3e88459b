#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rgflow/errors.hpp"
#include "rgflow/exact.hpp"
#include "rgflow/fk_rg.hpp"
#include "rgflow/oracle.hpp"
#include "rgflow/serialize.hpp"
#include "rgflow/version.hpp"
#include "rgflow/wh_flow.hpp"

namespace {

using rgflow::ordered_json;

struct CommonOpts {
  std::int64_t n = 100'000'000;
  double beta = 1e5;
  double mass = 1.0;
  double hbar = 1.0;
  double lambda = 2.4;
  double omega2 = 1.0;
  int order = 6;
  std::string out;
  std::string format = "json";
  std::int64_t stride = 0;
  double scale = 1.0;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--n", o.n, "time slices N of the discretized interval")
      ->capture_default_str();
  cmd->add_option("--beta", o.beta, "inverse temperature beta")->capture_default_str();
  cmd->add_option("--mass", o.mass, "particle mass M")->capture_default_str();
  cmd->add_option("--hbar", o.hbar, "Planck constant")->capture_default_str();
  cmd->add_option("--lambda", o.lambda, "quartic coupling, V contains (lambda/4!) x^4")
      ->capture_default_str();
  cmd->add_option("--omega2", o.omega2, "curvature, V contains (M omega2/2) x^2")
      ->capture_default_str();
  cmd->add_option("--order", o.order, "truncation order of the coupling vector")
      ->capture_default_str();
  cmd->add_option("--out", o.out, "output file (tables: output directory)");
  cmd->add_option("--format", o.format, "output format for --out")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  cmd->add_option("--stride", o.stride, "snapshot stride in modes (0: N/200)")
      ->capture_default_str();
  cmd->add_option("--scale", o.scale, "lattice scale factor applied to N (recorded in output)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

std::int64_t scaled_n(std::int64_t n, double scale) {
  if (scale == 1.0) {
    return n;
  }
  const auto s = static_cast<std::int64_t>(std::llround(static_cast<double>(n) * scale));
  return std::max<std::int64_t>(s - s % 2, 4);
}

rgflow::LatticeConfig make_config(const CommonOpts& o) {
  return rgflow::LatticeConfig(scaled_n(o.n, o.scale), o.beta, o.mass, o.hbar);
}

std::function<void(std::int64_t, std::int64_t)> stderr_progress(const std::string& label) {
  auto last = std::make_shared<std::int64_t>(0);
  return [last, label](std::int64_t done, std::int64_t total) {
    if (done - *last >= 1'000'000) {
      *last = done;
      std::fprintf(stderr, "%s: %" PRId64 "/%" PRId64 " modes\n", label.c_str(), done, total);
    }
  };
}

void write_file(const std::string& path, const std::string& body) {
  std::ofstream f(path, std::ios::binary);
  f << body;
  if (!f) {
    throw std::runtime_error("cannot write " + path);
  }
}

ordered_json wrap(const ordered_json& runspec, ordered_json result) {
  return ordered_json{
      {"version", rgflow::version}, {"runspec", runspec}, {"result", std::move(result)}};
}

std::string csv_header(const ordered_json& runspec) {
  std::string s = "# version=";
  s += rgflow::version;
  s += "\n# runspec=";
  s += runspec.dump();
  s += "\n";
  return s;
}

// ---------------------------------------------------------------------------

int cmd_flow(const CommonOpts& o) {
  const rgflow::LatticeConfig cfg = make_config(o);
  const rgflow::CouplingVector initial =
      rgflow::CouplingVector::anharmonic(o.order, o.mass, o.omega2, o.lambda);
  rgflow::FlowOptions fo;
  fo.snapshot_stride = o.stride;
  fo.progress = stderr_progress("flow");
  const rgflow::FlowTrace trace = rgflow::run_flow(initial, cfg, fo);

  std::printf("E_RG=%.5f ", rgflow::ground_state_energy(trace));
  for (int d = 2; d <= trace.order; d += 2) {
    std::printf(" g%d=%.5f", d, trace.final_couplings.g(d));
  }
  std::printf("  (order=%d n=%" PRId64 " beta=%g kernel=%s)\n", trace.order, cfg.n, cfg.beta,
              trace.kernel.c_str());

  if (!o.out.empty()) {
    ordered_json rs{{"command", "flow"},   {"n", cfg.n},         {"beta", o.beta},
                    {"mass", o.mass},      {"hbar", o.hbar},     {"lambda", o.lambda},
                    {"omega2", o.omega2},  {"order", o.order},   {"stride", o.stride},
                    {"scale", o.scale},    {"format", o.format}};
    if (o.format == "json") {
      write_file(o.out, wrap(rs, rgflow::to_json(trace)).dump(2) + "\n");
    } else {
      std::string csv = csv_header(rs);
      csv += "m";
      for (int d = 0; d <= trace.order; ++d) {
        csv += ",g" + std::to_string(d);
      }
      csv += "\n";
      auto row = [&](std::int64_t m, const rgflow::CouplingVector& cv) {
        csv += std::to_string(m);
        for (int d = 0; d <= trace.order; ++d) {
          csv += "," + rgflow::format_g17(cv.g(d));
        }
        csv += "\n";
      };
      for (const rgflow::FlowSnapshot& s : trace.snapshots) {
        row(s.m, s.couplings);
      }
      row(0, trace.final_couplings);
      write_file(o.out, csv);
    }
  }
  return 0;
}

int cmd_vflow(const CommonOpts& o) {
  const rgflow::LatticeConfig cfg = make_config(o);
  const rgflow::CouplingVector initial =
      rgflow::CouplingVector::anharmonic(o.order, o.mass, o.omega2, o.lambda);
  const double half = rgflow::variational_grid_half_width(initial, cfg);
  const int points = 257;
  const rgflow::GridPotential start = rgflow::GridPotential::tabulate(initial, half, points);
  rgflow::VariationalFlowOptions vo;
  vo.progress = stderr_progress("vflow");
  const rgflow::GridPotential final = rgflow::run_variational_flow(start, cfg, vo);

  std::printf("V_eff(0)=%.5f  (n=%" PRId64 " beta=%g grid=%d half_width=%.4f)\n", final(0.0),
              cfg.n, cfg.beta, points, half);

  if (!o.out.empty()) {
    ordered_json rs{{"command", "vflow"},  {"n", cfg.n},         {"beta", o.beta},
                    {"mass", o.mass},      {"hbar", o.hbar},     {"lambda", o.lambda},
                    {"omega2", o.omega2},  {"order", o.order},   {"scale", o.scale},
                    {"format", o.format},  {"grid_points", points},
                    {"grid_half_width", half}};
    if (o.format == "json") {
      write_file(o.out, wrap(rs, rgflow::to_json(final)).dump(2) + "\n");
    } else {
      std::string csv = csv_header(rs) + "x,v\n";
      for (std::size_t i = 0; i < final.xs().size(); ++i) {
        csv += rgflow::format_g17(final.xs()[i]) + "," + rgflow::format_g17(final.vs()[i]) + "\n";
      }
      write_file(o.out, csv);
    }
  }
  return 0;
}

int cmd_harmonic(const CommonOpts& o) {
  const rgflow::LatticeConfig cfg = make_config(o);
  const double lattice = rgflow::harmonic_effective_constant(cfg, o.omega2);
  const double continuum =
      rgflow::harmonic_effective_constant_continuum(o.beta, o.hbar, o.omega2);
  std::printf("E_h=%.5f  continuum=%.5f  (omega2=%g n=%" PRId64 " beta=%g)\n", lattice, continuum,
              o.omega2, cfg.n, cfg.beta);
  if (!o.out.empty()) {
    ordered_json rs{{"command", "harmonic"}, {"n", cfg.n},     {"beta", o.beta},
                    {"mass", o.mass},        {"hbar", o.hbar}, {"omega2", o.omega2},
                    {"scale", o.scale}};
    write_file(o.out,
               wrap(rs, ordered_json{{"lattice", lattice}, {"continuum", continuum}}).dump(2) +
                   "\n");
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct OracleOpts {
  double x0 = 0.0;
  std::int64_t m = 0;  // 0: N/4
  std::int64_t grid_n = 4000;
  double half_width = 0.0;
  int max_order = 0;  // 0: oracle default
};

int cmd_oracle(const std::string& method, const CommonOpts& o, const OracleOpts& oo) {
  const rgflow::CouplingVector potential =
      rgflow::CouplingVector::anharmonic(o.order, o.mass, o.omega2, o.lambda);
  rgflow::OracleResult result;
  ordered_json rs{{"command", "oracle"}, {"method", method},   {"lambda", o.lambda},
                  {"omega2", o.omega2},  {"mass", o.mass},     {"hbar", o.hbar},
                  {"order", o.order},    {"format", o.format}};
  if (method == "schrodinger") {
    rgflow::SchrodingerOptions so;
    so.grid_n = oo.grid_n;
    so.half_width = oo.half_width;
    result = rgflow::schrodinger_ground_energy(potential, o.mass, o.hbar, so);
    rs["grid_n"] = oo.grid_n;
    rs["half_width"] = oo.half_width;
  } else {
    const rgflow::LatticeConfig cfg = make_config(o);
    rs["n"] = cfg.n;
    rs["beta"] = o.beta;
    rs["x0"] = oo.x0;
    if (method == "single-mode") {
      const std::int64_t m = oo.m > 0 ? oo.m : std::max<std::int64_t>(cfg.mode_count() / 2, 1);
      result = rgflow::single_mode_step_oracle(potential, cfg, m, oo.x0,
                                               oo.max_order > 0 ? oo.max_order : 512);
      rs["m"] = m;
    } else {
      result = rgflow::small_lattice_effective_potential(potential, cfg, oo.x0,
                                                         oo.max_order > 0 ? oo.max_order : 64);
    }
    rs["max_order"] = result.resolution.quad_order;
  }
  const ordered_json doc = wrap(rs, rgflow::to_json(result));
  std::printf("%s\n", doc.dump(2).c_str());
  if (!o.out.empty()) {
    write_file(o.out, doc.dump(2) + "\n");
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct TableRowStatus {
  std::string status = "ok";
};

int cmd_tables(const std::string& which, const CommonOpts& o) {
  const std::filesystem::path dir = o.out.empty() ? "." : o.out;
  std::filesystem::create_directories(dir);
  const rgflow::LatticeConfig cfg = make_config(o);
  const bool scaled = o.scale != 1.0;

  ordered_json rs{{"command", "tables"}, {"table", which},     {"n", cfg.n},
                  {"n_requested", o.n},  {"scale", o.scale},   {"beta", o.beta},
                  {"mass", o.mass},      {"hbar", o.hbar},     {"order", o.order}};
  if (scaled) {
    rs["note"] = "reduced-scale run: values are not expected to match the full-scale tables";
  }

  rgflow::FlowOptions fo;
  fo.progress = stderr_progress("tables");

  if (which == "1" || which == "all") {
    struct Truncation {
      int order;
      unsigned mask;
    };
    const std::vector<Truncation> rows = {{4, 0b011u}, {4, ~0u}, {6, ~0u}, {8, ~0u}, {10, ~0u}};
    std::string csv = csv_header(rs);
    csv += "order,frozen_quartic,g2,g4,g6,g8,g10,e_rg\n";
    for (const Truncation& t : rows) {
      const rgflow::CouplingVector initial =
          rgflow::CouplingVector::anharmonic(t.order, o.mass, o.omega2, o.lambda);
      rgflow::FlowOptions ro;
      ro.progress = stderr_progress("tables");
      ro.update_mask = t.mask;
      const rgflow::FlowTrace trace = rgflow::run_flow(initial, cfg, ro);
      csv += std::to_string(t.order);
      csv += t.mask == ~0u ? ",0" : ",1";
      for (int d = 2; d <= 10; d += 2) {
        csv += ",";
        csv += rgflow::format_g17(d <= t.order ? trace.final_couplings.g(d) : 0.0);
      }
      csv += "," + rgflow::format_g17(rgflow::ground_state_energy(trace)) + "\n";
    }
    write_file((dir / "table1.csv").string(), csv);
    std::printf("table1.csv: %zu rows\n", rows.size());
  }

  if (which == "2" || which == "all") {
    const std::vector<double> lambdas = {2.4,  4.8,  7.2,  9.6,  12.0,   14.4,  16.8, 19.2,
                                         21.6, 24.0, 240.0, 1200.0, 2400.0, 12000.0, 24000.0};
    std::vector<rgflow::CouplingVector> lanes;
    lanes.reserve(lambdas.size());
    for (double lam : lambdas) {
      lanes.push_back(rgflow::CouplingVector::anharmonic(o.order, o.mass, o.omega2, lam));
    }
    const std::vector<rgflow::BatchEntry> flows = rgflow::run_flow_batch(lanes, cfg, fo);
    std::string csv = csv_header(rs);
    csv += "lambda,e_exact,e_var,e_rg,g2,g4,g6,e_exact_est_error,omega_var,status\n";
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
      const rgflow::CouplingVector potential =
          rgflow::CouplingVector::anharmonic(o.order, o.mass, o.omega2, lambdas[i]);
      const rgflow::OracleResult exact =
          rgflow::schrodinger_ground_energy(potential, o.mass, o.hbar);
      const rgflow::VariationalMinimum var =
          rgflow::fk_variational_energy(potential, o.mass, o.hbar);
      csv += rgflow::format_g17(lambdas[i]);
      csv += "," + rgflow::format_g17(exact.value);
      csv += "," + rgflow::format_g17(var.energy);
      if (flows[i].ok()) {
        const rgflow::CouplingVector& g = flows[i].trace->final_couplings;
        csv += "," + rgflow::format_g17(g.g(0));
        csv += "," + rgflow::format_g17(g.g(2));
        csv += "," + rgflow::format_g17(g.g(4));
        csv += "," + rgflow::format_g17(g.g(6));
      } else {
        csv += ",,,,";
      }
      csv += "," + rgflow::format_g17(exact.est_error);
      csv += "," + rgflow::format_g17(var.omega);
      csv += flows[i].ok() ? ",ok\n"
                           : ",log-domain violation at mode m = " +
                                 std::to_string(flows[i].fail_m) + "\n";
      std::fprintf(stderr, "tables: table2 row lambda=%g done\n", lambdas[i]);
    }
    write_file((dir / "table2.csv").string(), csv);
    std::printf("table2.csv: %zu rows\n", lambdas.size());
  }

  if (which == "3" || which == "all") {
    const std::vector<double> lambdas = {2.4, 4.8, 7.2, 9.6};
    std::vector<rgflow::CouplingVector> lanes;
    lanes.reserve(lambdas.size());
    for (double lam : lambdas) {
      lanes.push_back(rgflow::CouplingVector::anharmonic(o.order, o.mass, -1.0, lam));
    }
    const std::vector<rgflow::BatchEntry> flows = rgflow::run_flow_batch(lanes, cfg, fo);
    std::string csv = csv_header(rs);
    csv += "lambda,e_rg,g2,g4,g6,status\n";
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
      csv += rgflow::format_g17(lambdas[i]);
      if (flows[i].ok()) {
        const rgflow::CouplingVector& g = flows[i].trace->final_couplings;
        csv += "," + rgflow::format_g17(g.g(0));
        csv += "," + rgflow::format_g17(g.g(2));
        csv += "," + rgflow::format_g17(g.g(4));
        csv += "," + rgflow::format_g17(g.g(6));
        csv += ",ok\n";
      } else {
        csv += ",,,,,log-domain violation at mode m = " + std::to_string(flows[i].fail_m) + "\n";
      }
    }
    write_file((dir / "table3.csv").string(), csv);
    std::printf("table3.csv: %zu rows\n", lambdas.size());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rgflow: ground-state energies of 1-D quantum systems by discretized"
               " renormalization-group flow"};
  app.footer("Environment: RGFLOW_WORKERS sets the flow worker count;"
             " RGFLOW_SIMD={auto,scalar,avx2} selects the arithmetic kernels.");
  app.require_subcommand(1);

  CommonOpts flow_o;
  CLI::App* flow = app.add_subcommand("flow", "run the coupling flow over all lattice modes");
  add_common(flow, flow_o);

  CommonOpts vflow_o;
  vflow_o.n = 10'000;
  vflow_o.beta = 10.0;
  CLI::App* vflow =
      app.add_subcommand("vflow", "run the variational flow on a tabulated potential");
  add_common(vflow, vflow_o);

  CommonOpts harm_o;
  CLI::App* harmonic =
      app.add_subcommand("harmonic", "effective constant of a pure quadratic potential");
  add_common(harmonic, harm_o);

  CommonOpts tab_o;
  std::string which_table = "all";
  CLI::App* tables = app.add_subcommand("tables", "reproduce the result tables as CSV");
  add_common(tables, tab_o);
  tables->add_option("--table", which_table, "which table to emit")
      ->check(CLI::IsMember({"1", "2", "3", "all"}))
      ->capture_default_str();

  CLI::App* oracle = app.add_subcommand("oracle", "independent numerical cross-checks");
  oracle->require_subcommand(1);
  CommonOpts sch_o;
  sch_o.order = 4;
  OracleOpts sch_x;
  CLI::App* sch = oracle->add_subcommand("schrodinger", "finite-difference ground-state energy");
  add_common(sch, sch_o);
  sch->add_option("--grid", sch_x.grid_n, "interior grid points")->capture_default_str();
  sch->add_option("--half-width", sch_x.half_width, "box half-width (0: auto)")
      ->capture_default_str();

  CommonOpts sm_o;
  sm_o.n = 100;
  sm_o.beta = 1.0;
  sm_o.order = 4;
  OracleOpts sm_x;
  CLI::App* sm = oracle->add_subcommand("single-mode", "quadrature check of one flow step");
  add_common(sm, sm_o);
  sm->add_option("--m", sm_x.m, "mode index (0: N/4)")->capture_default_str();
  sm->add_option("--x0", sm_x.x0, "evaluation point")->capture_default_str();
  sm->add_option("--max-order", sm_x.max_order, "quadrature order cap")->capture_default_str();

  CommonOpts sl_o;
  sl_o.n = 4;
  sl_o.beta = 0.1;
  sl_o.order = 4;
  OracleOpts sl_x;
  CLI::App* sl =
      oracle->add_subcommand("small-lattice", "tensor quadrature of the full mode integral");
  add_common(sl, sl_o);
  sl->add_option("--x0", sl_x.x0, "evaluation point")->capture_default_str();
  sl->add_option("--max-order", sl_x.max_order, "quadrature order cap")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (flow->parsed()) {
      return cmd_flow(flow_o);
    }
    if (vflow->parsed()) {
      return cmd_vflow(vflow_o);
    }
    if (harmonic->parsed()) {
      return cmd_harmonic(harm_o);
    }
    if (tables->parsed()) {
      return cmd_tables(which_table, tab_o);
    }
    if (sch->parsed()) {
      return cmd_oracle("schrodinger", sch_o, sch_x);
    }
    if (sm->parsed()) {
      return cmd_oracle("single-mode", sm_o, sm_x);
    }
    if (sl->parsed()) {
      return cmd_oracle("small-lattice", sl_o, sl_x);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
