#pragma once

#include "lrf/core.hpp"

#include <json.hpp>

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace lrf {

/// One conservative-field element of a single component at a point.
/// At differentiable points this is the gradient of that component.
struct SubgradientSample {
  Vector vector;
  int component = 0;
};

/// Finite list of vectors whose convex hull equals the conservative field
/// of the full objective at a point (for problems that can enumerate it).
using GeneratorSet = std::vector<Vector>;

/// Finite-sum objective f(x) = (1/N) sum_i f_i(x) with per-component value
/// and subgradient oracles. Oracles are pure and reentrant.
///
/// Custom implementations must keep each component locally Lipschitz and
/// the full objective bounded below, and the set of objective values taken
/// at stationary points must not contain an interval. The built-ins
/// satisfy all three by construction; the toolkit cannot check them for
/// user-supplied problems.
class Problem {
 public:
  virtual ~Problem() = default;

  const std::string& name() const { return name_; }
  int dim() const { return dim_; }
  int components() const { return components_; }

  double component_value(int i, const Vector& x) const;
  SubgradientSample component_subgrad(int i, const Vector& x) const;

  /// Generator list for conv((1/N) sum_i D_{f_i}(x)), or nullopt when hull
  /// enumeration is unsupported (never an approximation).
  std::optional<GeneratorSet> clarke_generators(const Vector& x) const;

  /// Mean of component values, fixed summation order i = 0..N-1.
  double full_value(const Vector& x) const;

  /// Mean of component subgradients, fixed summation order. Used by the
  /// deterministic full-gradient run mode.
  Vector mean_subgrad(const Vector& x) const;

  /// Distance proxy to the nearest nondifferentiability; used to filter
  /// sample points in derivative checks.
  virtual double kink_margin(const Vector& x) const = 0;

  /// Documented default start point (deterministic per instance).
  virtual Vector initial_point() const { return Vector::Zero(dim_); }

  /// Draws a point at the problem's natural scale (for sampled checks).
  virtual Vector sample_point(SeededRng& rng) const;

  /// Fully resolved parameter block (every default made explicit).
  virtual nlohmann::json params() const = 0;

 protected:
  Problem(std::string name, int dim, int components);

 private:
  virtual double value_impl(int i, const Vector& x) const = 0;
  virtual Vector subgrad_impl(int i, const Vector& x) const = 0;
  virtual std::optional<GeneratorSet> generators_impl(const Vector& x) const = 0;

  std::string name_;
  int dim_;
  int components_;
};

/// Central finite differences per coordinate on component i.
Vector finite_difference_gradient(const Problem& problem, int i,
                                  const Vector& x, double h);

/// Least absolute deviations: f_i(x) = ||x - a_i||_1.
/// Nondifferentiable where any coordinate hits an anchor; the oracle uses
/// sign(0) = 0 there. Minimizer set = coordinate-wise anchor medians.
/// Seeded instances draw anchors in +/- pairs with coordinate magnitudes
/// uniform in [0.8*scale, scale]: two clusters whose median box is the
/// origin-centered gap between them, a known reference fact for tests.
class LadProblem : public Problem {
 public:
  LadProblem(int dim, int components, std::uint64_t seed, double scale);
  explicit LadProblem(Matrix anchors);  // columns are anchors

  const Matrix& anchors() const { return anchors_; }
  double kink_margin(const Vector& x) const override;
  Vector sample_point(SeededRng& rng) const override;
  nlohmann::json params() const override;

 private:
  double value_impl(int i, const Vector& x) const override;
  Vector subgrad_impl(int i, const Vector& x) const override;
  std::optional<GeneratorSet> generators_impl(const Vector& x) const override;

  Matrix anchors_;
  std::uint64_t seed_ = 0;
  double scale_ = 0;
  bool seeded_ = false;
};

/// Hinge-loss SVM with ridge term:
/// f_i(w) = max(0, 1 - y_i <w, z_i>) + (lambda/2) ||w||^2.
/// Convex and coercive (f >= (lambda/2)||w||^2). Tied margins use the
/// convention relu'(0) = 0, so the hinge part contributes nothing there.
class HingeSvmProblem : public Problem {
 public:
  HingeSvmProblem(int dim, int components, std::uint64_t seed, double lambda);

  const Matrix& features() const { return features_; }
  const Vector& labels() const { return labels_; }
  double lambda() const { return lambda_; }
  double kink_margin(const Vector& x) const override;
  nlohmann::json params() const override;

 private:
  double value_impl(int i, const Vector& x) const override;
  Vector subgrad_impl(int i, const Vector& x) const override;
  std::optional<GeneratorSet> generators_impl(const Vector& x) const override;

  Matrix features_;
  Vector labels_;
  double lambda_;
  std::uint64_t seed_;
};

/// Two-branch nonconvex toy: f_i(x) = min(||x - c_i||^2, ||x + c_i||^2).
/// Branches tie on the hyperplane <x, c_i> = 0; the oracle takes the
/// "+c_i" branch on exact ties. Coercive: f(x) >= ||x||^2 - 2 C ||x||
/// with C = mean ||c_i||.
class PiecewiseNonconvexProblem : public Problem {
 public:
  PiecewiseNonconvexProblem(int dim, int components, std::uint64_t seed,
                            double scale);

  const Matrix& centers() const { return centers_; }
  double kink_margin(const Vector& x) const override;
  Vector initial_point() const override;
  Vector sample_point(SeededRng& rng) const override;
  nlohmann::json params() const override;

 private:
  double value_impl(int i, const Vector& x) const override;
  Vector subgrad_impl(int i, const Vector& x) const override;
  std::optional<GeneratorSet> generators_impl(const Vector& x) const override;

  Matrix centers_;
  std::uint64_t seed_;
  double scale_;
};

/// One-hidden-layer ReLU network with squared loss on synthetic two-class
/// Gaussian blobs, plus a ridge term (lambda/2)||theta||^2 folded into each
/// component (weight decay lives in the objective, not the optimizer).
/// The ridge makes f coercive, so no parameter direction is loss-flat.
/// Each component owns a fixed slice of samples. Backprop uses
/// relu'(0) = 0, matching automatic-differentiation semantics, so the
/// returned vector is a conservative-field element. Hull enumeration is
/// unsupported.
class ReluMlpProblem : public Problem {
 public:
  ReluMlpProblem(int width, int input_dim, int components,
                 int samples_per_component, std::uint64_t seed,
                 double blob_sep, double blob_sigma, double lambda);

  int width() const { return width_; }
  int input_dim() const { return input_dim_; }
  int samples_per_component() const { return samples_per_component_; }

  double kink_margin(const Vector& x) const override;
  Vector initial_point() const override;
  Vector sample_point(SeededRng& rng) const override;
  nlohmann::json params() const override;

 private:
  double value_impl(int i, const Vector& x) const override;
  Vector subgrad_impl(int i, const Vector& x) const override;
  std::optional<GeneratorSet> generators_impl(const Vector&) const override {
    return std::nullopt;
  }

  Vector draw_parameters(SeededRng& rng) const;

  int width_;
  int input_dim_;
  int samples_per_component_;
  std::uint64_t seed_;
  double blob_sep_;
  double blob_sigma_;
  double lambda_;
  Matrix samples_;  // input_dim x (components * samples_per_component)
  Vector targets_;
};

/// Builds a problem from a JSON block: {"name": "lad"|"hinge"|"pwnc"|
/// "relu-mlp", ...params}. Unknown names or malformed params throw
/// ContractViolation naming the field.
std::unique_ptr<Problem> make_problem(const nlohmann::json& config);

}  // namespace lrf
