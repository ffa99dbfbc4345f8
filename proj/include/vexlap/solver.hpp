#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vexlap/lebesgue.hpp"
#include "vexlap/mesh.hpp"

namespace vexlap {

/// Right-hand side f = f0 + d/dx f1 + d/dy f2 with nodal component fields.
/// The pairing is <f, u> = sum_i w_i f0_i u_i - sum_T |T| (f1, f2)_T . grad u_T.
struct SourceTerm {
  std::optional<GridFunction> f0;
  std::optional<std::pair<GridFunction, GridFunction>> fvec;

  static SourceTerm scalar(GridFunction f) {
    SourceTerm s;
    s.f0 = std::move(f);
    return s;
  }
  static SourceTerm divergence(GridFunction f1, GridFunction f2) {
    SourceTerm s;
    s.fvec = std::make_pair(std::move(f1), std::move(f2));
    return s;
  }

  bool is_zero() const;
  const Mesh& mesh() const;
  double pair(const GridFunction& u) const;
  SourceTerm operator-(const SourceTerm& o) const;
  SourceTerm scaled(double s) const;
};

struct SolveOptions {
  double tol = 1e-8;           // dual-residual estimate target
  int max_iter = 200;          // Newton iterations per continuation stage
  double eps_start = 1e-2;     // regularization schedule
  double eps_end = 1e-10;
  double eps_factor = 10.0;
  double eps_floor = 1e-14;    // extra stages down to this if tol unmet
  std::optional<std::vector<double>> initial;  // nodal start, default 0
};

struct SolveReport {
  int iterations = 0;
  double final_energy = 0.0;
  double residual_dual_estimate = 0.0;
  std::vector<double> energy_trace;      // exact energies of accepted iterates
  std::vector<double> epsilon_schedule;  // stages actually run
  bool converged = false;

  std::string to_json() const;
};

/// I(v) = sum_T |T| |grad v|^{p_T} / p_T - <f, v>, exact (no regularization).
double energy(const GridFunction& u, const SourceTerm& f, const ExponentField& p);

/// Gradient of the exact energy over the active dofs:
/// r_i = sum_T |T| |grad u|^{p_T - 2} grad u . grad phi_i - <f, phi_i>.
std::vector<double> residual(const GridFunction& u, const SourceTerm& f,
                             const ExponentField& p, const DofMap& dofs);

/// Energy minimization for the Dirichlet problem on the active dofs, by
/// damped Newton with eps-continuation on the regularized density
/// (|grad u|^2 + eps^2)^{p(x)/2} / p(x).  Returns the solution and a report
/// with the unregularized residual estimate.
std::pair<GridFunction, SolveReport> solve_dirichlet(const Mesh& mesh,
                                                     const DofMap& dofs,
                                                     const SourceTerm& f,
                                                     const ExponentField& p,
                                                     const SolveOptions& opts = {});

/// Convenience overload: meshes the domain's box at the domain's resolution
/// and pins dofs conservatively.
std::pair<GridFunction, SolveReport> solve_dirichlet(const RasterDomain& o,
                                                     const SourceTerm& f,
                                                     const ExponentField& p,
                                                     const SolveOptions& opts = {});

/// Direct sparse solve of (-Laplace + c0) u = f with P1 elements and lumped
/// mass; the p = 2 special case assembled independently of the Newton path.
GridFunction solve_linear_p2(const Mesh& mesh, const DofMap& dofs,
                             const SourceTerm& f, double c0 = 0.0);

/// Lower bound on ||f||_{-1,p'(x)}: max of <f,u>/||grad u||_{p(x)} over a
/// fixed dictionary (tensor sine modes and the discrete 2-Riesz representer)
/// refined by scale-invariant local ascent.  An estimate by construction.
double dual_norm_estimate(const SourceTerm& f, const ExponentField& p,
                          const Mesh& mesh);
/// Same, seeded with extra trial functions.
double dual_norm_estimate(const SourceTerm& f, const ExponentField& p,
                          const Mesh& mesh, const std::vector<GridFunction>& seeds);

struct AprioriReport {
  double grad_modular = 0.0;   // rho(grad u)
  double dual_estimate = 0.0;  // ||f|| estimate (seeded with u)
  double bound = 0.0;          // max(1, est^{p-/(p- - 1)})
  double margin = 0.0;         // bound - grad_modular
  bool pass = true;
};

/// Checks rho(grad u) <= max(1, ||f||^{p-/(p- - 1)}) with the dual-norm
/// estimate seeded by the solution itself, which makes the chain of
/// inequalities valid discretely.
AprioriReport a_priori_bound_check(const GridFunction& u, const SourceTerm& f,
                                   const ExponentField& p, const DofMap& dofs);

// ---- Simon's inequality -----------------------------------------------------

/// (|b|^{p-2}b - |a|^{p-2}a).(b-a) divided by |b-a|^p (p >= 2) or by
/// |b-a|^2/(|a|+|b|)^{2-p} (p < 2).  Throws DegeneratePair when the
/// denominator vanishes.
double simon_ratio(Vec2 a, Vec2 b, double p);

struct SimonCalibration {
  double c1 = 0.0;         // half the observed minimum ratio
  double min_ratio = 0.0;
  int trials = 0;
};

SimonCalibration simon_calibrate(double p, int trials, std::uint64_t seed = 7);

struct SimonReport {
  double lhs = 0.0;
  double rhs = 0.0;  // c1 * |b-a|^p or c1 * |b-a|^2/(|a|+|b|)^{2-p}
  bool pass = true;
};

SimonReport simon_inequality_check(Vec2 a, Vec2 b, double p, double c1);

// ---- comparison and stability ----------------------------------------------

struct OrderingReport {
  double max_u_minus_v = 0.0;  // max over nodes of u - v
  bool leq(double tol) const { return max_u_minus_v <= tol; }
};

OrderingReport compare_solutions(const GridFunction& u, const GridFunction& v);

struct StabilityReport {
  double lhs = 0.0;            // rho(grad u1 - grad u2)
  double delta_norm = 0.0;     // dual-norm estimate of f1 - f2
  double beta = 0.0;
  double ratio = 0.0;          // lhs / (delta + delta^beta)
};

/// Default beta: the conjugate exponent of p_-, obtained by closing the
/// a-priori bound rho <= C ||df|| rho^{1/p_-} from the energy method.
double default_stability_beta(const ExponentField& p);

StabilityReport stability_check(const SourceTerm& f1, const SourceTerm& f2,
                                const RasterDomain& o, const ExponentField& p,
                                double beta = 0.0,  // 0 -> default
                                const SolveOptions& opts = {});

struct StabilitySequenceReport {
  std::vector<double> ts;
  std::vector<double> ratios;
  double max_over_min = 0.0;
  bool bounded(double budget) const { return max_over_min <= budget; }
};

/// Ratios along df = t * g for the given factors t.
StabilitySequenceReport stability_sequence_check(const SourceTerm& base,
                                                 const SourceTerm& g,
                                                 const std::vector<double>& ts,
                                                 const RasterDomain& o,
                                                 const ExponentField& p,
                                                 double beta = 0.0,
                                                 const SolveOptions& opts = {});

}  // namespace vexlap
