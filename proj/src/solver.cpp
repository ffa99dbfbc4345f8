#include "vexlap/solver.hpp"

#include "vexlap/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <random>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/IterativeLinearSolvers>
#include <nlohmann/json.hpp>

namespace vexlap {

using SpMat = Eigen::SparseMatrix<double>;
using EVec = Eigen::VectorXd;

// ---- SourceTerm ---------------------------------------------------------------

bool SourceTerm::is_zero() const {
  if (f0 && f0->max_abs() > 0) return false;
  if (fvec && (fvec->first.max_abs() > 0 || fvec->second.max_abs() > 0))
    return false;
  return true;
}

const Mesh& SourceTerm::mesh() const {
  if (f0) return f0->mesh();
  if (fvec) return fvec->first.mesh();
  throw Error("source term has no parts");
}

double SourceTerm::pair(const GridFunction& u) const {
  const Mesh& m = u.mesh();
  CompensatedSum sum;
  if (f0) {
    if (!f0->mesh().same_grid(m))
      throw IncompatibleSampling("source and test function live on different meshes");
    for (int n = 0; n < m.node_count(); ++n)
      sum.add(m.lumped_weight(n) * (*f0)[n] * u[n]);
  }
  if (fvec) {
    const GridFunction& f1 = fvec->first;
    const GridFunction& f2 = fvec->second;
    if (!f1.mesh().same_grid(m))
      throw IncompatibleSampling("source and test function live on different meshes");
    double area = m.tri_area();
    for (int t = 0; t < m.tri_count(); ++t) {
      int nodes[3];
      m.tri_nodes(t, nodes);
      double f1t = (f1[nodes[0]] + f1[nodes[1]] + f1[nodes[2]]) / 3.0;
      double f2t = (f2[nodes[0]] + f2[nodes[1]] + f2[nodes[2]]) / 3.0;
      Vec2 g = m.tri_gradient(u.values(), t);
      sum.add(-area * (f1t * g.x + f2t * g.y));
    }
  }
  return sum.value();
}

SourceTerm SourceTerm::operator-(const SourceTerm& o) const {
  SourceTerm r;
  const Mesh& m = f0 ? f0->mesh() : (fvec ? fvec->first.mesh() : o.mesh());
  auto sub = [&](const std::optional<GridFunction>& a,
                 const std::optional<GridFunction>& b) -> std::optional<GridFunction> {
    if (!a && !b) return std::nullopt;
    GridFunction out(m);
    if (a)
      out = *a;
    if (b) {
      for (std::size_t k = 0; k < out.values().size(); ++k) out.values()[k] -= (*b)[k];
    }
    return out;
  };
  r.f0 = sub(f0, o.f0);
  if (fvec || o.fvec) {
    GridFunction a1(m), a2(m);
    if (fvec) {
      a1 = fvec->first;
      a2 = fvec->second;
    }
    if (o.fvec) {
      for (std::size_t k = 0; k < a1.values().size(); ++k) {
        a1.values()[k] -= o.fvec->first[k];
        a2.values()[k] -= o.fvec->second[k];
      }
    }
    r.fvec = std::make_pair(std::move(a1), std::move(a2));
  }
  return r;
}

SourceTerm SourceTerm::scaled(double s) const {
  SourceTerm r;
  if (f0) r.f0 = s * (*f0);
  if (fvec) r.fvec = std::make_pair(s * fvec->first, s * fvec->second);
  return r;
}

// ---- variational core ----------------------------------------------------------

namespace {

struct Problem {
  const Mesh* mesh = nullptr;
  const DofMap* dofs = nullptr;
  const ExponentField* p = nullptr;
  const SourceTerm* f = nullptr;  // may be null
  bool energy_weight = true;      // density weight 1/p(x) (Dirichlet energy)
  bool include_mass = false;      // add the |u|^{p(x)} modular (Sobolev capacity)
  bool clamp01 = false;           // project iterates into [0, 1]
  std::vector<double> pinned;     // nodal values on the fixed set

  std::vector<double> q_tri;   // exponent at barycenters
  std::vector<double> q_node;  // exponent at nodes (mass term)
  std::vector<double> lumped;  // lumped node weights
  std::vector<double> F;       // <f, phi_i> over active dofs

  void prepare() {
    const Mesh& m = *mesh;
    q_tri.resize(m.tri_count());
    for (int t = 0; t < m.tri_count(); ++t) q_tri[t] = p->sample(m.tri_barycenter(t));
    lumped.resize(m.node_count());
    for (int n = 0; n < m.node_count(); ++n) lumped[n] = m.lumped_weight(n);
    if (include_mass) {
      q_node.resize(m.node_count());
      for (int n = 0; n < m.node_count(); ++n) q_node[n] = p->sample(m.node_xy(n));
    }
    F.assign(dofs->active_count(), 0.0);
    if (f) {
      if (f->f0) {
        const GridFunction& f0 = *f->f0;
        for (int k = 0; k < dofs->active_count(); ++k) {
          int n = dofs->active_nodes()[k];
          F[k] += lumped[n] * f0[n];
        }
      }
      if (f->fvec) {
        const GridFunction& f1 = f->fvec->first;
        const GridFunction& f2 = f->fvec->second;
        double area = m.tri_area();
        for (int t = 0; t < m.tri_count(); ++t) {
          int nodes[3];
          m.tri_nodes(t, nodes);
          double f1t = (f1[nodes[0]] + f1[nodes[1]] + f1[nodes[2]]) / 3.0;
          double f2t = (f2[nodes[0]] + f2[nodes[1]] + f2[nodes[2]]) / 3.0;
          Vec2 g[3];
          m.tri_basis_gradients(t, g);
          for (int k = 0; k < 3; ++k) {
            int ai = dofs->active_index(nodes[k]);
            if (ai >= 0) F[ai] -= area * (f1t * g[k].x + f2t * g[k].y);
          }
        }
      }
    }
  }

  double density_weight(double q) const { return energy_weight ? 1.0 / q : 1.0; }

  // Exact (eps = 0) or regularized objective.
  double objective(const std::vector<double>& u, double eps) const {
    const Mesh& m = *mesh;
    double e2 = eps * eps;
    CompensatedSum sum;
    double area = m.tri_area();
    for (int t = 0; t < m.tri_count(); ++t) {
      double q = q_tri[t];
      double s = m.tri_gradient(u, t).norm2();
      double val;
      if (eps == 0.0) {
        val = s == 0.0 ? 0.0 : std::pow(s, 0.5 * q);
      } else {
        val = std::pow(s + e2, 0.5 * q) - std::pow(e2, 0.5 * q);
      }
      sum.add(area * density_weight(q) * val);
    }
    if (include_mass) {
      for (int n = 0; n < static_cast<int>(u.size()); ++n) {
        double q = q_node[n];
        double s = u[n] * u[n];
        double val;
        if (eps == 0.0) {
          val = s == 0.0 ? 0.0 : std::pow(s, 0.5 * q);
        } else {
          val = std::pow(s + e2, 0.5 * q) - std::pow(e2, 0.5 * q);
        }
        sum.add(lumped[n] * density_weight(q) * val);
      }
    }
    double lin = 0.0;
    if (f) {
      CompensatedSum fl;
      for (int k = 0; k < dofs->active_count(); ++k)
        fl.add(F[k] * u[dofs->active_nodes()[k]]);
      lin = fl.value();
    }
    return sum.value() - lin;
  }

  // Gradient of the (possibly regularized) objective over active dofs.
  void gradient_vec(const std::vector<double>& u, double eps, EVec& g) const {
    const Mesh& m = *mesh;
    double e2 = eps * eps;
    g.setZero(dofs->active_count());
    double area = m.tri_area();
    for (int t = 0; t < m.tri_count(); ++t) {
      double q = q_tri[t];
      Vec2 G = m.tri_gradient(u, t);
      double s = G.norm2() + e2;
      if (s == 0.0) continue;
      double mfac = std::pow(s, 0.5 * q - 1.0);
      double coef = area * density_weight(q) * q * mfac;
      int nodes[3];
      m.tri_nodes(t, nodes);
      Vec2 bg[3];
      m.tri_basis_gradients(t, bg);
      for (int k = 0; k < 3; ++k) {
        int ai = dofs->active_index(nodes[k]);
        if (ai >= 0) g[ai] += coef * G.dot(bg[k]);
      }
    }
    if (include_mass) {
      for (int k = 0; k < dofs->active_count(); ++k) {
        int n = dofs->active_nodes()[k];
        double q = q_node[n];
        double s = u[n] * u[n] + e2;
        if (s == 0.0) continue;
        g[k] += lumped[n] * density_weight(q) * q * std::pow(s, 0.5 * q - 1.0) * u[n];
      }
    }
    for (int k = 0; k < dofs->active_count(); ++k) g[k] -= F[k];
  }

  void hessian(const std::vector<double>& u, double eps,
               std::vector<Eigen::Triplet<double>>& trips, SpMat& H) const {
    const Mesh& m = *mesh;
    double e2 = eps * eps;
    trips.clear();
    double area = m.tri_area();
    for (int t = 0; t < m.tri_count(); ++t) {
      double q = q_tri[t];
      Vec2 G = m.tri_gradient(u, t);
      double s = G.norm2() + e2;
      double m1 = std::pow(s, 0.5 * q - 1.0);
      double m2 = (q - 2.0) * std::pow(s, 0.5 * q - 2.0);
      double coef = area * density_weight(q) * q;
      int nodes[3];
      m.tri_nodes(t, nodes);
      Vec2 bg[3];
      m.tri_basis_gradients(t, bg);
      int ai[3];
      for (int k = 0; k < 3; ++k) ai[k] = dofs->active_index(nodes[k]);
      double Gg[3];
      for (int k = 0; k < 3; ++k) Gg[k] = G.dot(bg[k]);
      for (int r = 0; r < 3; ++r) {
        if (ai[r] < 0) continue;
        for (int c = 0; c < 3; ++c) {
          if (ai[c] < 0) continue;
          double v = coef * (m1 * bg[r].dot(bg[c]) + m2 * Gg[r] * Gg[c]);
          trips.emplace_back(ai[r], ai[c], v);
        }
      }
    }
    if (include_mass) {
      for (int k = 0; k < dofs->active_count(); ++k) {
        int n = dofs->active_nodes()[k];
        double q = q_node[n];
        double s = u[n] * u[n] + e2;
        double m1 = std::pow(s, 0.5 * q - 1.0);
        double m2 = (q - 2.0) * std::pow(s, 0.5 * q - 2.0) * u[n] * u[n];
        trips.emplace_back(k, k, lumped[n] * density_weight(q) * q * (m1 + m2));
      }
    }
    H.resize(dofs->active_count(), dofs->active_count());
    H.setFromTriplets(trips.begin(), trips.end());
  }
};

// Direct or iterative SPD solve by size.
class LinearSolver {
 public:
  explicit LinearSolver(int n) : iterative_(n > 250000) {}

  bool factorize(const SpMat& H) {
    if (iterative_) {
      cg_.setTolerance(1e-12);
      cg_.setMaxIterations(30000);
      cg_.compute(H);
      return cg_.info() == Eigen::Success;
    }
    if (!analyzed_) {
      ldlt_.analyzePattern(H);
      analyzed_ = true;
    }
    ldlt_.factorize(H);
    return ldlt_.info() == Eigen::Success;
  }

  EVec solve(const EVec& rhs) {
    return iterative_ ? cg_.solve(rhs).eval() : ldlt_.solve(rhs).eval();
  }

 private:
  bool iterative_;
  bool analyzed_ = false;
  Eigen::SimplicialLDLT<SpMat> ldlt_;
  Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper,
                           Eigen::IncompleteCholesky<double>>
      cg_;
};

struct VariationalResult {
  GridFunction u;
  SolveReport report;
};

VariationalResult solve_variational(Problem& prob, const SolveOptions& opts) {
  const Mesh& mesh = *prob.mesh;
  const DofMap& dofs = *prob.dofs;
  prob.prepare();

  std::vector<double> u = prob.pinned;
  if (opts.initial) {
    if (opts.initial->size() != u.size())
      throw ResolutionMismatch("initial iterate size does not match the mesh");
    for (int k = 0; k < dofs.active_count(); ++k) {
      int n = dofs.active_nodes()[k];
      u[n] = (*opts.initial)[n];
    }
  }
  auto clamp_active = [&](std::vector<double>& w) {
    if (!prob.clamp01) return;
    for (int n : dofs.active_nodes()) w[n] = std::clamp(w[n], 0.0, 1.0);
  };
  clamp_active(u);

  SolveReport rep;
  double e_exact = prob.objective(u, 0.0);
  rep.energy_trace.push_back(e_exact);

  if (dofs.active_count() == 0) {
    rep.converged = true;
    rep.final_energy = e_exact;
    GridFunction gu(mesh, std::move(u));
    return {std::move(gu), std::move(rep)};
  }

  LinearSolver lin(dofs.active_count());
  std::vector<Eigen::Triplet<double>> trips;
  SpMat H;
  EVec g, d;

  // For a constant exponent 2 regularization is a constant shift; one stage.
  bool quadratic = prob.p->is_constant(1e-14) && std::abs(prob.p->p_minus() - 2.0) < 1e-14 &&
                   !prob.include_mass;
  std::vector<double> schedule;
  if (quadratic) {
    schedule.push_back(opts.eps_end);
  } else {
    for (double e = opts.eps_start; e >= opts.eps_end * (1.0 - 1e-12);
         e /= opts.eps_factor)
      schedule.push_back(e);
  }

  double best_resid = std::numeric_limits<double>::infinity();
  auto run_stage = [&](double eps, double stage_tol) {
    rep.epsilon_schedule.push_back(eps);
    for (int it = 0; it < opts.max_iter; ++it) {
      prob.gradient_vec(u, eps, g);
      prob.hessian(u, eps, trips, H);
      bool ok = lin.factorize(H);
      double gd = 0.0;
      if (ok) {
        d = lin.solve(-g);
        gd = g.dot(d);
      }
      if (!ok || !(gd < 0.0)) {
        // fall back to a diagonally preconditioned descent direction
        d.resize(g.size());
        for (int k = 0; k < g.size(); ++k) {
          double dk = H.coeff(k, k);
          d[k] = -g[k] / std::max(dk, 1e-30);
        }
        gd = g.dot(d);
        if (!(gd < 0.0)) return;  // stationary
      }
      double dec = std::sqrt(std::max(0.0, -gd));
      if (dec <= stage_tol) {
        best_resid = std::min(best_resid, dec);
        return;
      }
      double e_eps = prob.objective(u, eps);
      double t = 1.0;
      bool accepted = false;
      std::vector<double> u_try;
      double e_try_exact = 0.0;
      for (int ls = 0; ls < 60; ++ls) {
        u_try = u;
        for (int k = 0; k < dofs.active_count(); ++k)
          u_try[dofs.active_nodes()[k]] += t * d[k];
        clamp_active(u_try);
        double e_eps_try = prob.objective(u_try, eps);
        if (e_eps_try <= e_eps + 1e-4 * t * gd) {
          accepted = true;
          break;
        }
        t *= 0.5;
      }
      if (!accepted) return;
      e_try_exact = prob.objective(u_try, 0.0);
      if (e_try_exact > e_exact + 1e-14 * std::max(1.0, std::abs(e_exact)))
        return;  // this eps can no longer reduce the exact energy
      u = std::move(u_try);
      e_exact = e_try_exact;
      rep.energy_trace.push_back(e_exact);
      ++rep.iterations;
    }
  };

  for (std::size_t s = 0; s < schedule.size(); ++s) {
    bool last = s + 1 == schedule.size();
    double stage_tol = last ? opts.tol : std::max(opts.tol, 0.05 * schedule[s]);
    run_stage(schedule[s], stage_tol);
  }

  // Convergence is judged on the unregularized residual in the metric of the
  // current Hessian; extend the continuation if needed.
  double eps_now = schedule.back();
  while (true) {
    prob.gradient_vec(u, 0.0, g);
    prob.hessian(u, std::max(eps_now, 1e-30), trips, H);
    double resid = std::numeric_limits<double>::infinity();
    if (lin.factorize(H)) {
      d = lin.solve(g);
      resid = std::sqrt(std::max(0.0, g.dot(d)));
    }
    best_resid = std::min(best_resid, resid);
    rep.residual_dual_estimate = resid;
    if (resid <= opts.tol) {
      rep.converged = true;
      break;
    }
    if (eps_now <= opts.eps_floor * (1.0 + 1e-12)) break;
    eps_now /= opts.eps_factor;
    run_stage(eps_now, opts.tol);
  }

  rep.final_energy = e_exact;
  GridFunction gu(mesh, std::move(u));
  return {std::move(gu), std::move(rep)};
}

}  // namespace

// ---- capacity bridge --------------------------------------------------------------

CapacityResult solve_capacity_problem(const Mesh& mesh, const DofMap& dofs,
                                      const std::vector<double>& pinned,
                                      const ExponentField& p, bool include_mass,
                                      const SolveOptions& opts) {
  Problem prob;
  prob.mesh = &mesh;
  prob.dofs = &dofs;
  prob.p = &p;
  prob.f = nullptr;
  prob.energy_weight = false;
  prob.include_mass = include_mass;
  prob.clamp01 = true;
  prob.pinned = pinned;
  auto res = solve_variational(prob, opts);
  CapacityResult out;
  out.value = res.report.final_energy;  // the exact modular of the potential
  out.potential = std::move(res.u);
  out.converged = res.report.converged;
  out.iterations = res.report.iterations;
  return out;
}

// ---- public solver API ----------------------------------------------------------

double energy(const GridFunction& u, const SourceTerm& f, const ExponentField& p) {
  const Mesh& mesh = u.mesh();
  if (!mesh.matches(p)) throw IncompatibleSampling("exponent grid differs from mesh");
  CompensatedSum sum;
  double area = mesh.tri_area();
  for (int t = 0; t < mesh.tri_count(); ++t) {
    double q = p.sample(mesh.tri_barycenter(t));
    double s = mesh.tri_gradient(u.values(), t).norm2();
    if (s > 0.0) sum.add(area / q * std::pow(s, 0.5 * q));
  }
  return sum.value() - f.pair(u);
}

std::vector<double> residual(const GridFunction& u, const SourceTerm& f,
                             const ExponentField& p, const DofMap& dofs) {
  Problem prob;
  prob.mesh = &u.mesh();
  prob.dofs = &dofs;
  prob.p = &p;
  prob.f = &f;
  prob.pinned.assign(u.mesh().node_count(), 0.0);
  prob.prepare();
  EVec g;
  prob.gradient_vec(u.values(), 0.0, g);
  return {g.data(), g.data() + g.size()};
}

std::pair<GridFunction, SolveReport> solve_dirichlet(const Mesh& mesh,
                                                     const DofMap& dofs,
                                                     const SourceTerm& f,
                                                     const ExponentField& p,
                                                     const SolveOptions& opts) {
  if (!mesh.matches(p)) throw IncompatibleSampling("exponent grid differs from mesh");
  if (dofs.active_count() == 0)
    throw NoActiveDofs("the domain pins every degree of freedom");
  Problem prob;
  prob.mesh = &mesh;
  prob.dofs = &dofs;
  prob.p = &p;
  prob.f = &f;
  prob.pinned.assign(mesh.node_count(), 0.0);
  auto res = solve_variational(prob, opts);
  if (!res.report.converged)
    throw NonConvergence(res.report.iterations, res.report.residual_dual_estimate);
  return {std::move(res.u), std::move(res.report)};
}

std::pair<GridFunction, SolveReport> solve_dirichlet(const RasterDomain& o,
                                                     const SourceTerm& f,
                                                     const ExponentField& p,
                                                     const SolveOptions& opts) {
  Mesh mesh = Mesh::build(o.box(), o.resolution());
  DofMap dofs = restrict_dofs(mesh, o);
  return solve_dirichlet(mesh, dofs, f, p, opts);
}

GridFunction solve_linear_p2(const Mesh& mesh, const DofMap& dofs,
                             const SourceTerm& f, double c0) {
  int na = dofs.active_count();
  if (na == 0) throw NoActiveDofs("no unknowns in linear solve");
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(mesh.tri_count()) * 9);
  double area = mesh.tri_area();
  for (int t = 0; t < mesh.tri_count(); ++t) {
    int nodes[3];
    mesh.tri_nodes(t, nodes);
    Vec2 bg[3];
    mesh.tri_basis_gradients(t, bg);
    for (int r = 0; r < 3; ++r) {
      int ar = dofs.active_index(nodes[r]);
      if (ar < 0) continue;
      for (int c = 0; c < 3; ++c) {
        int ac = dofs.active_index(nodes[c]);
        if (ac < 0) continue;
        trips.emplace_back(ar, ac, area * bg[r].dot(bg[c]));
      }
    }
  }
  if (c0 != 0.0) {
    for (int k = 0; k < na; ++k) {
      int n = dofs.active_nodes()[k];
      trips.emplace_back(k, k, c0 * mesh.lumped_weight(n));
    }
  }
  SpMat A(na, na);
  A.setFromTriplets(trips.begin(), trips.end());

  EVec rhs = EVec::Zero(na);
  if (f.f0) {
    for (int k = 0; k < na; ++k) {
      int n = dofs.active_nodes()[k];
      rhs[k] += mesh.lumped_weight(n) * (*f.f0)[n];
    }
  }
  if (f.fvec) {
    const GridFunction& f1 = f.fvec->first;
    const GridFunction& f2 = f.fvec->second;
    for (int t = 0; t < mesh.tri_count(); ++t) {
      int nodes[3];
      mesh.tri_nodes(t, nodes);
      double f1t = (f1[nodes[0]] + f1[nodes[1]] + f1[nodes[2]]) / 3.0;
      double f2t = (f2[nodes[0]] + f2[nodes[1]] + f2[nodes[2]]) / 3.0;
      Vec2 bg[3];
      mesh.tri_basis_gradients(t, bg);
      for (int k = 0; k < 3; ++k) {
        int ai = dofs.active_index(nodes[k]);
        if (ai >= 0) rhs[ai] -= area * (f1t * bg[k].x + f2t * bg[k].y);
      }
    }
  }

  LinearSolver lin(na);
  if (!lin.factorize(A)) throw Error("linear solve failed to factorize");
  EVec x = lin.solve(rhs);
  GridFunction u(mesh);
  for (int k = 0; k < na; ++k) u[dofs.active_nodes()[k]] = x[k];
  return u;
}

std::string SolveReport::to_json() const {
  nlohmann::json j;
  j["iterations"] = iterations;
  j["final_energy"] = final_energy;
  j["residual_dual_estimate"] = residual_dual_estimate;
  j["energy_trace"] = energy_trace;
  j["epsilon_schedule"] = epsilon_schedule;
  j["converged"] = converged;
  return j.dump(2);
}

// ---- dual norm estimate -----------------------------------------------------------

namespace {

// <f, phi_i> over active dofs.
EVec assemble_load(const SourceTerm& f, const Mesh& mesh, const DofMap& dofs) {
  EVec F = EVec::Zero(dofs.active_count());
  if (f.f0) {
    for (int k = 0; k < dofs.active_count(); ++k) {
      int n = dofs.active_nodes()[k];
      F[k] += mesh.lumped_weight(n) * (*f.f0)[n];
    }
  }
  if (f.fvec) {
    const GridFunction& f1 = f.fvec->first;
    const GridFunction& f2 = f.fvec->second;
    double area = mesh.tri_area();
    for (int t = 0; t < mesh.tri_count(); ++t) {
      int nodes[3];
      mesh.tri_nodes(t, nodes);
      double f1t = (f1[nodes[0]] + f1[nodes[1]] + f1[nodes[2]]) / 3.0;
      double f2t = (f2[nodes[0]] + f2[nodes[1]] + f2[nodes[2]]) / 3.0;
      Vec2 bg[3];
      mesh.tri_basis_gradients(t, bg);
      for (int k = 0; k < 3; ++k) {
        int ai = dofs.active_index(nodes[k]);
        if (ai >= 0) F[ai] -= area * (f1t * bg[k].x + f2t * bg[k].y);
      }
    }
  }
  return F;
}

// Derivative of the Luxemburg norm of the gradient at a nodal field with
// ||grad v|| = 1 (by implicit differentiation of rho(grad v / lambda) = 1).
void luxemburg_gradient_derivative(const Mesh& mesh, const DofMap& dofs,
                                   const std::vector<double>& q_tri,
                                   const std::vector<double>& v, EVec& dN) {
  double area = mesh.tri_area();
  dN.setZero(dofs.active_count());
  double denom = 0.0;
  for (int t = 0; t < mesh.tri_count(); ++t) {
    double q = q_tri[t];
    Vec2 G = mesh.tri_gradient(v, t);
    double s = G.norm2();
    if (s == 0.0) continue;
    double mfac = std::pow(s, 0.5 * q - 1.0);
    denom += area * q * mfac * s;
    int nodes[3];
    mesh.tri_nodes(t, nodes);
    Vec2 bg[3];
    mesh.tri_basis_gradients(t, bg);
    for (int k = 0; k < 3; ++k) {
      int ai = dofs.active_index(nodes[k]);
      if (ai >= 0) dN[ai] += area * q * mfac * G.dot(bg[k]);
    }
  }
  if (denom > 0.0) dN /= denom;
}

}  // namespace

double dual_norm_estimate(const SourceTerm& f, const ExponentField& p,
                          const Mesh& mesh, const std::vector<GridFunction>& seeds) {
  if (!mesh.matches(p)) throw IncompatibleSampling("exponent grid differs from mesh");
  DofMap dofs = box_interior_dofs(mesh);
  EVec F = assemble_load(f, mesh, dofs);
  if (F.lpNorm<Eigen::Infinity>() == 0.0) return 0.0;

  std::vector<double> q_tri(mesh.tri_count());
  for (int t = 0; t < mesh.tri_count(); ++t) q_tri[t] = p.sample(mesh.tri_barycenter(t));

  auto grad_norm = [&](const GridFunction& v) { return luxemburg_norm(gradient(v), p); };
  auto pair_with = [&](const GridFunction& v) {
    double s = 0.0;
    for (int k = 0; k < dofs.active_count(); ++k) s += F[k] * v[dofs.active_nodes()[k]];
    return s;
  };

  std::vector<GridFunction> dict;
  constexpr double pi = std::numbers::pi;
  for (int k = 1; k <= 4; ++k) {
    for (int m = 1; m <= 4; ++m) {
      GridFunction v(mesh);
      for (int n = 0; n < mesh.node_count(); ++n) {
        Vec2 xy = mesh.node_xy(n);
        double xh = (xy.x - mesh.box().x0) / mesh.box().width();
        double yh = (xy.y - mesh.box().y0) / mesh.box().height();
        v[n] = std::sin(k * pi * xh) * std::sin(m * pi * yh);
      }
      v.apply_zero(dofs);
      dict.push_back(std::move(v));
    }
  }
  // discrete 2-Riesz representer; exact maximizer when p = 2
  dict.push_back(solve_linear_p2(mesh, dofs, f, 0.0));
  for (const GridFunction& s : seeds) {
    if (s.mesh().same_grid(mesh)) dict.push_back(s);
  }

  double best = 0.0;
  GridFunction best_v;
  for (const GridFunction& v : dict) {
    double n = grad_norm(v);
    if (n <= 0.0) continue;
    double val = pair_with(v) / n;
    if (std::abs(val) > best) {
      best = std::abs(val);
      best_v = (val >= 0 ? 1.0 : -1.0) * v;
    }
  }
  if (best == 0.0 || best_v.empty()) return best;

  // local ascent on <f,v>/||grad v||, scale-invariant in f
  GridFunction v = (1.0 / grad_norm(best_v)) * best_v;
  EVec dN, dir(dofs.active_count());
  for (int iter = 0; iter < 30; ++iter) {
    double R = pair_with(v);
    luxemburg_gradient_derivative(mesh, dofs, q_tri, v.values(), dN);
    double gmax = 0.0;
    for (int k = 0; k < dofs.active_count(); ++k) {
      dir[k] = F[k] - R * dN[k];
      gmax = std::max(gmax, std::abs(dir[k]));
    }
    if (gmax <= 1e-14 * F.lpNorm<Eigen::Infinity>()) break;
    bool improved = false;
    for (double s = 0.5; s > 1e-10; s *= 0.5) {
      GridFunction v_try = v;
      for (int k = 0; k < dofs.active_count(); ++k)
        v_try[dofs.active_nodes()[k]] += s * dir[k] / gmax;
      double n_try = grad_norm(v_try);
      if (n_try <= 0.0) continue;
      double r_try = pair_with(v_try) / n_try;
      if (r_try > R * (1.0 + 1e-12)) {
        v = (1.0 / n_try) * v_try;
        best = std::max(best, r_try);
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  return best;
}

double dual_norm_estimate(const SourceTerm& f, const ExponentField& p,
                          const Mesh& mesh) {
  return dual_norm_estimate(f, p, mesh, {});
}

AprioriReport a_priori_bound_check(const GridFunction& u, const SourceTerm& f,
                                   const ExponentField& p, const DofMap& dofs) {
  (void)dofs;
  AprioriReport r;
  r.grad_modular = modular(gradient(u), p);
  r.dual_estimate = dual_norm_estimate(f, p, u.mesh(), {u});
  double pm = p.p_minus();
  r.bound = std::max(1.0, std::pow(r.dual_estimate, pm / (pm - 1.0)));
  r.margin = r.bound - r.grad_modular;
  r.pass = r.grad_modular <= r.bound * (1.0 + 1e-6) + 1e-12;
  return r;
}

// ---- Simon's inequality -------------------------------------------------------------

double simon_ratio(Vec2 a, Vec2 b, double p) {
  Vec2 diff = b - a;
  double an = a.norm(), bn = b.norm(), dn = diff.norm();
  auto flux = [&](Vec2 v, double n) {
    return n == 0.0 ? Vec2{0.0, 0.0} : std::pow(n, p - 2.0) * v;
  };
  Vec2 num = flux(b, bn) - flux(a, an);
  double lhs = num.dot(diff);
  if (p >= 2.0) {
    if (dn == 0.0) throw DegeneratePair("a = b gives a 0/0 ratio");
    return lhs / std::pow(dn, p);
  }
  double denom_scale = an + bn;
  if (denom_scale == 0.0) throw DegeneratePair("a = b = 0 with p < 2");
  if (dn == 0.0) throw DegeneratePair("a = b gives a 0/0 ratio");
  double rhs = dn * dn / std::pow(denom_scale, 2.0 - p);
  return lhs / rhs;
}

SimonCalibration simon_calibrate(double p, int trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  SimonCalibration cal;
  cal.trials = trials;
  double minr = std::numeric_limits<double>::infinity();
  for (int k = 0; k < trials; ++k) {
    Vec2 a{uni(rng), uni(rng)}, b{uni(rng), uni(rng)};
    if ((b - a).norm() < 1e-12) continue;
    if (p < 2.0 && a.norm() + b.norm() < 1e-12) continue;
    minr = std::min(minr, simon_ratio(a, b, p));
  }
  cal.min_ratio = minr;
  cal.c1 = 0.5 * minr;
  return cal;
}

SimonReport simon_inequality_check(Vec2 a, Vec2 b, double p, double c1) {
  SimonReport r;
  Vec2 diff = b - a;
  double an = a.norm(), bn = b.norm(), dn = diff.norm();
  auto flux = [&](Vec2 v, double n) {
    return n == 0.0 ? Vec2{0.0, 0.0} : std::pow(n, p - 2.0) * v;
  };
  r.lhs = (flux(b, bn) - flux(a, an)).dot(diff);
  if (dn == 0.0) {
    r.rhs = 0.0;
    r.pass = r.lhs >= -1e-15;
    return r;
  }
  if (p >= 2.0) {
    r.rhs = c1 * std::pow(dn, p);
  } else {
    if (an + bn == 0.0) throw DegeneratePair("a = b = 0 with p < 2");
    r.rhs = c1 * dn * dn / std::pow(an + bn, 2.0 - p);
  }
  r.pass = r.lhs >= r.rhs - 1e-12 * std::max(1.0, std::abs(r.rhs));
  return r;
}

// ---- comparison and stability --------------------------------------------------------

OrderingReport compare_solutions(const GridFunction& u, const GridFunction& v) {
  if (!u.mesh().same_grid(v.mesh()))
    throw IncompatibleSampling("comparing fields on different meshes");
  OrderingReport r;
  double m = -std::numeric_limits<double>::infinity();
  for (int n = 0; n < u.mesh().node_count(); ++n) m = std::max(m, u[n] - v[n]);
  r.max_u_minus_v = m;
  return r;
}

double default_stability_beta(const ExponentField& p) {
  double pm = p.p_minus();
  return pm / (pm - 1.0);
}

StabilityReport stability_check(const SourceTerm& f1, const SourceTerm& f2,
                                const RasterDomain& o, const ExponentField& p,
                                double beta, const SolveOptions& opts) {
  Mesh mesh = Mesh::build(o.box(), o.resolution());
  DofMap dofs = restrict_dofs(mesh, o);
  auto [u1, r1] = solve_dirichlet(mesh, dofs, f1, p, opts);
  auto [u2, r2] = solve_dirichlet(mesh, dofs, f2, p, opts);
  StabilityReport rep;
  rep.beta = beta > 0 ? beta : default_stability_beta(p);
  rep.lhs = modular(gradient_difference(u1, u2), p);
  rep.delta_norm = dual_norm_estimate(f1 - f2, p, mesh);
  double denom = rep.delta_norm + std::pow(rep.delta_norm, rep.beta);
  rep.ratio = denom > 0 ? rep.lhs / denom : 0.0;
  return rep;
}

StabilitySequenceReport stability_sequence_check(const SourceTerm& base,
                                                 const SourceTerm& g,
                                                 const std::vector<double>& ts,
                                                 const RasterDomain& o,
                                                 const ExponentField& p,
                                                 double beta,
                                                 const SolveOptions& opts) {
  StabilitySequenceReport rep;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (double t : ts) {
    SourceTerm f2 = base - g.scaled(-t);  // base + t*g
    StabilityReport r = stability_check(base, f2, o, p, beta, opts);
    rep.ts.push_back(t);
    rep.ratios.push_back(r.ratio);
    if (r.ratio > 0) {
      lo = std::min(lo, r.ratio);
      hi = std::max(hi, r.ratio);
    }
  }
  rep.max_over_min = (lo > 0 && std::isfinite(lo)) ? hi / lo : 0.0;
  return rep;
}

}  // namespace vexlap
