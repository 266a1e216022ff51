#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "sdotflow/distributed.hpp"
#include "sdotflow/dual_ascent.hpp"
#include "sdotflow/errors.hpp"
#include "sdotflow/io.hpp"
#include "sdotflow/oracle.hpp"
#include "sdotflow/problem.hpp"
#include "sdotflow/scenarios.hpp"

namespace fs = std::filesystem;
using namespace sdotflow;

namespace {

enum Exit { kOk = 0, kValidation = 1, kDivergence = 2, kIo = 3 };

std::string quoted(const std::string& text) {
  std::string out = "\"";
  for (char c : text) {
    if (c == '"' || c == '\\') out += '\\';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

int fail(const std::string& kind, const std::string& message, int code) {
  std::cerr << "error kind=" << kind << " message=" << quoted(message) << "\n";
  return code;
}

int exit_code_for(const Error& e) {
  if (e.kind() == "io") return kIo;
  if (e.kind() == "divergence" || e.kind() == "numeric") return kDivergence;
  return kValidation;
}

struct GenerateArgs {
  std::string kind;
  int grid_n = 200;
  double side = 100.0;
  double sigma = 25.0;
  int n_consumers = 1000;
  bool no_bridge = false;
  std::uint64_t seed = 0;
  std::string topology;
  std::string out;
};

struct SolveArgs {
  std::string scenario;
  std::string mode = "centralized";
  double step_a = 1.0;
  double step_b = 0.01;
  double eps = 1e-6;
  int max_iters = 300;
  std::size_t samples = 10000;
  std::uint64_t seed = 0;
  int dual_every = 10;
  std::string out;
};

struct VerifyArgs {
  std::string scenario;
  std::string report;
  double grid = 1e-3;
  double rel_tol = 1e-6;
};

void write_csv(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  std::ostringstream out;
  body(out);
  write_text_file(path, out.str());
}

int run_generate(const GenerateArgs& args) {
  const Topology topology = args.topology.empty() ? default_topology() : load_topology(args.topology);
  const fs::path out(args.out);
  if (!out.parent_path().empty()) fs::create_directories(out.parent_path());
  if (args.kind == "synthetic") {
    SyntheticParams p;
    p.grid_n = args.grid_n;
    p.side = args.side;
    p.sigma = args.sigma;
    p.seed = args.seed;
    p.topology = topology;
    write_scenario(generate_synthetic(p), out);
    return kOk;
  }
  PowerNetworkParams p;
  p.n_consumers = args.n_consumers;
  p.side = args.side;
  p.seed = args.seed;
  p.bridge_components = !args.no_bridge;
  p.topology = topology;
  PowerNetwork net = generate_power_network(p);
  std::get<GeodesicResistanceCost>(net.scenario.assignment_cost).graph_file =
      out.stem().string() + "_graph.json";
  write_scenario(net.scenario, out);
  std::cout << "attempts=" << net.attempts << " bridges=" << net.bridges << "\n";
  return kOk;
}

int run_solve(const SolveArgs& args) {
  const Problem problem(read_scenario(args.scenario));
  const fs::path out(args.out);
  fs::create_directories(out);
  const StepSchedule schedule = StepSchedule::harmonic(args.step_a, args.step_b);

  SolveReport report;
  std::vector<RoundLog> rounds;
  try {
    if (args.mode == "distributed") {
      ProtocolOptions o;
      o.schedule = schedule;
      o.epsilon = args.eps;
      o.max_rounds = args.max_iters;
      o.dual_every = args.dual_every;
      ProtocolResult r = run_protocol(problem, o);
      report = std::move(r.report);
      rounds = std::move(r.rounds);
    } else {
      SolveOptions o;
      o.schedule = schedule;
      o.epsilon = args.eps;
      o.max_iterations = args.max_iters;
      o.dual_every = args.dual_every;
      if (args.mode == "stochastic") o.mass_mode = StochasticMasses{args.samples, args.seed};
      report = solve(problem, o);
    }
  } catch (const DivergenceError& e) {
    write_csv(out / "trace.csv", [&](std::ostream& s) { write_trace_csv(s, e.trace()); });
    throw;
  }

  const Certificate cert = certify(problem, report.psi_final.psi, report.partition, report.flows);
  write_text_file(out / "report.json", report_to_json(report, args.mode, cert).dump(1) + "\n");
  write_csv(out / "trace.csv", [&](std::ostream& s) { write_trace_csv(s, report.trace); });
  write_csv(out / "partition.csv",
            [&](std::ostream& s) { write_partition_csv(s, report.partition, problem.scenario().measure); });
  write_csv(out / "flows.csv",
            [&](std::ostream& s) { write_flows_csv(s, problem.scenario().network, report.flows); });
  if (args.mode == "distributed") {
    write_csv(out / "rounds.jsonl", [&](std::ostream& s) { write_round_logs(s, rounds); });
  }

  std::cout << "termination=" << termination_name(report.termination)
            << " iterations=" << report.iterations << " dual=" << format_double(report.dual_value)
            << " primal=" << format_double(report.primal_value)
            << " max_abs_g=" << format_double(report.final_max_abs_g) << "\n";
  return kOk;
}

int run_verify(const VerifyArgs& args) {
  const Problem problem(read_scenario(args.scenario));
  const SolveReport report = read_report(args.report);
  const OracleResult oracle = brute_force(problem, args.grid);
  const GapReport gap = duality_gap_check(report, oracle, args.rel_tol);
  std::cout << gap_report_to_json(gap, oracle).dump(1) << "\n";
  if (!gap.passed) return fail("gap", "duality gap exceeds tolerance", kValidation);
  return kOk;
}

int run_trace(const std::string& report_path) {
  write_trace_csv(std::cout, read_report(report_path).trace);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semi-discrete transport and network flow solver"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Write a scenario file");
  generate->add_option("kind", gen.kind)->required()->check(CLI::IsMember({"synthetic", "power-net"}));
  generate->add_option("--grid-n", gen.grid_n, "Grid points per side (synthetic)");
  generate->add_option("--side", gen.side, "Side of the square domain");
  generate->add_option("--sigma", gen.sigma, "Gaussian spread (synthetic)");
  generate->add_option("--n-consumers", gen.n_consumers, "Consumer count (power-net)");
  generate->add_flag("--no-bridge", gen.no_bridge, "Resample instead of bridging components");
  generate->add_option("--seed", gen.seed);
  generate->add_option("--topology", gen.topology, "Topology JSON file");
  generate->add_option("--out", gen.out, "Scenario file to write")->required();

  SolveArgs sol;
  auto* solve_cmd = app.add_subcommand("solve", "Run dual ascent on a scenario");
  solve_cmd->add_option("--scenario", sol.scenario)->required();
  solve_cmd->add_option("--mode", sol.mode)
      ->check(CLI::IsMember({"centralized", "distributed", "stochastic"}));
  solve_cmd->add_option("--step-a", sol.step_a, "Harmonic step numerator");
  solve_cmd->add_option("--step-b", sol.step_b, "Harmonic step decay");
  solve_cmd->add_option("--eps", sol.eps, "Stop when max |psi change| falls below this");
  solve_cmd->add_option("--max-iters", sol.max_iters);
  solve_cmd->add_option("--samples", sol.samples, "Samples per iteration (stochastic)");
  solve_cmd->add_option("--seed", sol.seed);
  solve_cmd->add_option("--dual-every", sol.dual_every, "Dual value interval in the trace");
  solve_cmd->add_option("--out", sol.out, "Output directory")->required();

  VerifyArgs ver;
  auto* verify = app.add_subcommand("verify", "Compare a report with the brute-force optimum");
  verify->add_option("--scenario", ver.scenario)->required();
  verify->add_option("--report", ver.report)->required();
  verify->add_option("--grid", ver.grid, "Flow grid resolution on cyclic networks");
  verify->add_option("--rel-tol", ver.rel_tol);

  std::string trace_report;
  auto* trace = app.add_subcommand("trace", "Print the iteration trace of a report as CSV");
  trace->add_option("--report", trace_report)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), kValidation);
  }

  try {
    if (*generate) return run_generate(gen);
    if (*solve_cmd) return run_solve(sol);
    if (*verify) return run_verify(ver);
    if (*trace) return run_trace(trace_report);
  } catch (const Error& e) {
    return fail(e.kind(), e.what(), exit_code_for(e));
  } catch (const fs::filesystem_error& e) {
    return fail("io", e.what(), kIo);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), kValidation);
  }
  return kOk;
}
