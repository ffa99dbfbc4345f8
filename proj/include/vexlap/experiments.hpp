#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vexlap/capacity.hpp"
#include "vexlap/config.hpp"
#include "vexlap/geometry.hpp"
#include "vexlap/solver.hpp"

namespace vexlap {

/// Scalar source descriptor: zero | constant(c) | affine(a,b,c) |
/// bump(amp,cx,cy,r) with a smooth bump supported on |x-c| < r.
struct ScalarDescriptor {
  enum class Kind { Zero, Constant, Affine, Bump };

  Kind kind = Kind::Zero;
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0;

  double eval(Vec2 p, const Box& box) const;
  static ScalarDescriptor parse(const std::string& text);
  std::string str() const;
};

/// Source descriptor: a scalar descriptor for f0, or div(g1, g2) for the
/// divergence-form part.
struct SourceSpec {
  ScalarDescriptor f0;
  std::optional<std::pair<ScalarDescriptor, ScalarDescriptor>> fvec;

  static SourceSpec parse(const std::string& text);
  std::string str() const;
};

SourceTerm make_source(const SourceSpec& spec, const Mesh& mesh);

struct ExperimentConfig {
  std::string kind;  // sverak | capcond | cm | indep | alpha
  ExponentDescriptor exponent;
  SourceSpec source;
  GeneratorSpec generator;
  Box box = unit_box();
  int resolution = 64;
  std::vector<int> indices;
  std::string out_dir;

  int component_budget = 8;      // l for the sverak class
  double alpha = 0.01;           // alpha class threshold
  double r0 = 0.1;
  double holder_delta = 0.25;    // exponent of the Holder seminorm estimate
  double holder_bound_factor = 3.0;
  double trend_factor = 2.0;     // last-third mean <= first-third mean / factor
  double floor_tol = 1e-9;       // columns below this count as converged
  SolveOptions solver;

  static ExperimentConfig from_config(const Config& cfg);
  void validate() const;
};

struct ConvergenceTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::string to_csv() const;
  std::vector<double> column(const std::string& name) const;
};

struct ExperimentReport {
  bool pass = false;
  std::string detail;
  ConvergenceTable table;
  std::string json;  // report.json payload
};

/// Last-third mean <= first-third mean / factor, or everything already at
/// the floor.
bool trend_decreasing(const std::vector<double>& values, double factor,
                      double floor_tol);

ExperimentReport run_sverak(const ExperimentConfig& cfg);
ExperimentReport run_capacity_condition(const ExperimentConfig& cfg);
ExperimentReport run_cioranescu_murat(const ExperimentConfig& cfg);
ExperimentReport run_independence(const ExperimentConfig& cfg);
ExperimentReport run_alpha_class(const ExperimentConfig& cfg);

ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// Writes table.csv and report.json (and solution fields when configured).
void write_outputs(const ExperimentReport& report, const std::string& out_dir);

}  // namespace vexlap
