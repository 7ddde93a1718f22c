#pragma once

#include <stop_token>
#include <string>
#include <variant>
#include <vector>

#include "memmo/common.hpp"
#include "memmo/geometry.hpp"
#include "memmo/path.hpp"

namespace memmo {

/// Either a configuration goal q_T = goal or a tip goal fk(q_T).tip = point.
using TerminalGoal = std::variant<Configuration, Vector2>;

/// min sum ||q_{t+1} - q_t||^2  s.t.  q_0 = q_init, terminal goal, joint limits, and
/// clearance of the region swept by every step q_t -> q_{t+1}.
struct Problem {
  EnvironmentPtr env;
  Configuration q_init;
  TerminalGoal terminal;
  int steps = 30;

  bool cartesian() const { return std::holds_alternative<Vector2>(terminal); }
  void Validate() const;
};

struct SolverOptions {
  int max_iterations = 500;
  double initial_penalty = 10.0;
  double penalty_growth = 10.0;
  double max_penalty = 1e7;
  /// Subproblem stationarity threshold on the penalized gradient norm.
  double gradient_tolerance = 1e-4;
  double collision_tolerance = 5e-5;
  double terminal_tolerance = 1e-4;
  double limit_tolerance = 1e-6;
  double fd_step = 1e-5;
  int max_line_search = 30;
  /// Constraints whose signed distance is below this join the KKT multiplier fit.
  double active_margin = 1e-3;
};

enum class Termination { kConverged, kMaxIter, kPenaltyStalled, kCancelled };

std::string ToString(Termination t);

struct SolveResult {
  Path path;
  double cost = 0.0;
  bool valid = false;
  int iterations = 0;
  double wall_time = 0.0;
  Termination termination = Termination::kMaxIter;
  double max_violation = 0.0;
  double final_penalty = 0.0;
  /// Penalized objective after each accepted step, with the penalty weight in force.
  std::vector<double> objective_trace;
  std::vector<double> penalty_trace;
};

/// Discrete-velocity cost sum_t ||q_{t+1} - q_t||^2.
double PathCost(const Path& path);

/// Feasibility check used for success: clearance >= -1e-4 at every configuration and
/// along every step, endpoint residuals <= 1e-3, joint limits respected.
bool IsValid(const Problem& problem, const Path& path);

inline constexpr double kValidClearanceTolerance = 1e-4;
inline constexpr double kValidEndpointTolerance = 1e-3;

/// Exterior penalty method. Deterministic given its inputs; checks `stop` once per
/// iteration and returns Termination::kCancelled when a stop was requested.
SolveResult Solve(const Problem& problem, const Path& warm_start, const SolverOptions& options = {},
                  std::stop_token stop = {});

}  // namespace memmo
