#pragma once

#include <functional>
#include <ostream>
#include <span>
#include <vector>

#include "pinn/errors.hpp"

namespace pinn {

enum class StopReason { kGradTol, kObjTol, kMaxIterations, kLineSearchFailure };

const char* to_string(StopReason reason);

struct LBFGSConfig {
  int memory = 50;
  int max_iterations = 50000;
  double grad_tolerance = 1e-8;
  double objective_rel_tolerance = 1e-12;
  double wolfe_c1 = 1e-4;
  double wolfe_c2 = 0.9;
  int max_line_search_steps = 50;

  /// Optional Adam warm-up phase before L-BFGS (0 disables it).
  int adam_warmup_iterations = 0;
  double adam_learning_rate = 1e-3;

  /// Optional per-iteration CSV stream: iteration,objective,grad_norm.
  std::ostream* log = nullptr;
  /// Record every accepted line search for test instrumentation.
  bool record_line_searches = false;

  void validate() const;
};

/// One accepted strong-Wolfe line search (recorded when
/// LBFGSConfig::record_line_searches is set).
struct LineSearchRecord {
  double alpha;  // accepted step length
  double phi0;   // objective at step 0
  double dphi0;  // directional derivative at step 0 (negative)
  double phi;    // objective at alpha
  double dphi;   // directional derivative at alpha
};

struct OptimizeReport {
  std::vector<double> parameters;
  double objective = 0.0;
  int iterations = 0;
  double grad_norm = 0.0;
  StopReason reason = StopReason::kMaxIterations;
  /// Objective value at the start plus after every accepted iteration
  /// (warm-up iterations included when enabled).
  std::vector<double> history;
  /// Curvature pairs rejected by the sᵀy ≤ 1e-10‖s‖‖y‖ rule.
  int skipped_pairs = 0;
  std::vector<LineSearchRecord> line_searches;
};

/// Objective callback: returns f(x) and writes ∇f(x) into grad (same length
/// as x).
using Objective = std::function<double(std::span<const double> x, std::span<double> grad)>;

/// Full-batch L-BFGS (two-loop recursion, γ = sᵀy/yᵀy initial scaling) with a
/// strong-Wolfe line search. Deterministic given inputs. A failed line search
/// is reported via StopReason, returning the best parameters found.
OptimizeReport minimize(const Objective& objective, std::vector<double> x0,
                        const LBFGSConfig& config);

}  // namespace pinn
