#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "sdotflow/errors.hpp"
#include "sdotflow/laguerre.hpp"
#include "sdotflow/model.hpp"
#include "sdotflow/problem.hpp"

namespace sdotflow {

/// gamma_k = a / (1 + b k). Satisfies sum gamma = inf, sum gamma^2 < inf.
struct HarmonicStep {
  double a = 1.0;
  double b = 0.01;
};

struct ConstantStep {
  double gamma = 1.0;
};

class StepSchedule {
 public:
  StepSchedule() = default;
  static StepSchedule harmonic(double a, double b);
  static StepSchedule constant(double gamma);

  double gamma(int k) const;
  // True for the kinds that meet the diminishing step conditions.
  bool diminishing() const { return std::holds_alternative<HarmonicStep>(kind_); }
  const std::variant<HarmonicStep, ConstantStep>& kind() const { return kind_; }

 private:
  explicit StepSchedule(std::variant<HarmonicStep, ConstantStep> kind) : kind_(kind) {}
  std::variant<HarmonicStep, ConstantStep> kind_ = HarmonicStep{};
};

struct TraceRecord {
  int k = 0;
  double gamma = 0.0;
  double max_abs_g = 0.0;
  std::optional<double> dual_value;
};

enum class Termination { epsilon_reached, max_iterations };

const char* termination_name(Termination t);

struct ExactMasses {};
struct StochasticMasses {
  std::size_t n_samples = 10000;
  std::uint64_t seed = 0;
};
using MassMode = std::variant<ExactMasses, StochasticMasses>;

struct SolveOptions {
  StepSchedule schedule = StepSchedule::harmonic(1.0, 0.01);
  double epsilon = 1e-6;
  int max_iterations = 300;
  MassMode mass_mode = ExactMasses{};
  int dual_every = 10;  // record q(psi_k) when k % dual_every == 0
  std::optional<std::vector<double>> initial_psi;  // zero when absent
  double divergence_limit = 1e12;
  double tie_epsilon = 0.0;
  bool record_psi_history = false;
};

struct PrimalSolution {
  Partition partition;
  FlowState flows;
  double primal_value = 0.0;
};

struct SolveReport {
  DualState psi_final;
  FlowState flows;
  Partition partition;
  double dual_value = 0.0;
  double primal_value = 0.0;
  double gap = 0.0;  // primal_value - dual_value
  std::vector<TraceRecord> trace;
  Termination termination = Termination::max_iterations;
  int iterations = 0;
  double final_max_abs_g = 0.0;  // supergradient at psi_final, exact masses
  // Set when some arc uses a caller-supplied minimizer whose uniqueness is
  // assumed rather than guaranteed by a quadratic cost.
  bool assumes_unique_arc_minimizers = false;
  // psi after each iteration; filled only when requested.
  std::vector<std::vector<double>> psi_history;
};

/// Thrown when psi leaves the finite range or exceeds the divergence limit.
/// Carries the trace recorded up to the failure.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& message, std::vector<TraceRecord> trace)
      : Error("divergence", message), trace_(std::move(trace)) {}
  const std::vector<TraceRecord>& trace() const { return trace_; }

 private:
  std::vector<TraceRecord> trace_;
};

/// Complementary-slackness residuals of a primal/dual pair; all vanish at an
/// optimum.
struct Certificate {
  std::vector<double> arc_residuals;           // B_ij
  std::vector<double> point_residuals;         // A(x, T(x))
  std::vector<double> flow_balance_residuals;  // (out - in) - (s_i - m_i)
  double max_residual = 0.0;                   // max of B, A and |balance|
};

/// p_ij(psi) for every arc.
FlowState arc_flows(const Problem& problem, std::span<const double> psi);

/// q(psi), evaluated as an exact finite sum over the discrete measure.
double dual_value(const Problem& problem, std::span<const double> psi);
// Same, reusing an exact cell pass computed at psi.
double dual_value(const Problem& problem, std::span<const double> psi,
                  const CellMassReport& cells);

/// One supergradient component. Summation order is fixed: supply, minus the
/// cell mass, minus outgoing flows, plus incoming flows (arc id order). The
/// distributed agents use the same routine.
double supergradient_component(double supply, std::optional<double> cell_mass,
                               std::span<const double> outgoing_flows,
                               std::span<const double> incoming_flows);

std::vector<double> supergradient(const Problem& problem, std::span<const double> psi,
                                  const CellMassReport& cells);
std::vector<double> supergradient(const Problem& problem, const FlowState& flows,
                                  const CellMassReport& cells);

/// psi + gamma_k g with k = state.iteration. Throws DivergenceError (empty
/// trace) on a non-finite result.
DualState ascent_step(const DualState& state, std::span<const double> g,
                      const StepSchedule& schedule);

SolveReport solve(const Problem& problem, const SolveOptions& options = {});

PrimalSolution reconstruct_primal(const Problem& problem, std::span<const double> psi,
                                  double tie_epsilon = 0.0);

Certificate certify(const Problem& problem, std::span<const double> psi,
                    const Partition& partition, const FlowState& flows);

double max_abs(std::span<const double> values);

}  // namespace sdotflow
