#include "lrf/problems.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace lrf {

namespace {

double sign0(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

// Enumeration guard: generator lists grow as 2^(#ties). The measure is
// meant for analytically constructed test points, where ties are few.
constexpr int kMaxTies = 20;

void check_tie_count(std::size_t ties) {
  if (ties > kMaxTies)
    throw ContractViolation("clarke_generators: too many simultaneous ties");
}

}  // namespace

Problem::Problem(std::string name, int dim, int components)
    : name_(std::move(name)), dim_(dim), components_(components) {
  if (dim < 1) throw ContractViolation(name_ + ": dim must be >= 1");
  if (components < 1)
    throw ContractViolation(name_ + ": components must be >= 1");
}

double Problem::component_value(int i, const Vector& x) const {
  if (i < 0 || i >= components_)
    throw ContractViolation(name_ + ": component index out of range");
  if (x.size() != dim_)
    throw ContractViolation(name_ + ": point has wrong dimension");
  return value_impl(i, x);
}

SubgradientSample Problem::component_subgrad(int i, const Vector& x) const {
  if (i < 0 || i >= components_)
    throw ContractViolation(name_ + ": component index out of range");
  if (x.size() != dim_)
    throw ContractViolation(name_ + ": point has wrong dimension");
  return {subgrad_impl(i, x), i};
}

std::optional<GeneratorSet> Problem::clarke_generators(const Vector& x) const {
  if (x.size() != dim_)
    throw ContractViolation(name_ + ": point has wrong dimension");
  return generators_impl(x);
}

double Problem::full_value(const Vector& x) const {
  double sum = 0.0;
  for (int i = 0; i < components_; ++i) sum += component_value(i, x);
  return sum / components_;
}

Vector Problem::mean_subgrad(const Vector& x) const {
  Vector sum = Vector::Zero(dim_);
  for (int i = 0; i < components_; ++i) sum += component_subgrad(i, x).vector;
  return sum / components_;
}

Vector Problem::sample_point(SeededRng& rng) const {
  Vector x(dim_);
  for (int j = 0; j < dim_; ++j) x[j] = rng.next_gaussian();
  return x;
}

Vector finite_difference_gradient(const Problem& problem, int i,
                                  const Vector& x, double h) {
  if (h <= 0) throw ContractViolation("finite_difference_gradient: h must be > 0");
  Vector g(x.size());
  Vector xp = x;
  for (int j = 0; j < x.size(); ++j) {
    const double xj = x[j];
    xp[j] = xj + h;
    const double fp = problem.component_value(i, xp);
    xp[j] = xj - h;
    const double fm = problem.component_value(i, xp);
    xp[j] = xj;
    g[j] = (fp - fm) / (2.0 * h);
  }
  return g;
}

// ---------------------------------------------------------------- LAD ----

LadProblem::LadProblem(int dim, int components, std::uint64_t seed,
                       double scale)
    : Problem("lad", dim, components),
      seed_(seed),
      scale_(scale),
      seeded_(true) {
  if (scale <= 0) throw ContractViolation("lad: scale must be > 0");
  SeededRng rng(seed);
  anchors_.resize(dim, components);
  // two-cluster anchors in +/- pairs: coordinate magnitudes fall in
  // [0.8*scale, scale], so the coordinate-wise median box is centered at
  // the origin with half-width >= 0.8*scale. Odd counts add the origin.
  for (int p = 0; p + 1 < components; p += 2)
    for (int j = 0; j < dim; ++j) {
      const double mag = rng.next_uniform(0.8 * scale, scale);
      anchors_(j, p) = mag;
      anchors_(j, p + 1) = -mag;
    }
  if (components % 2 == 1) anchors_.col(components - 1).setZero();
}

LadProblem::LadProblem(Matrix anchors)
    : Problem("lad", static_cast<int>(anchors.rows()),
              static_cast<int>(anchors.cols())),
      anchors_(std::move(anchors)) {
  scale_ = std::max(anchors_.cwiseAbs().maxCoeff(), 1e-3);
}

double LadProblem::value_impl(int i, const Vector& x) const {
  return (x - anchors_.col(i)).lpNorm<1>();
}

Vector LadProblem::subgrad_impl(int i, const Vector& x) const {
  return (x - anchors_.col(i)).unaryExpr([](double v) { return sign0(v); });
}

std::optional<GeneratorSet> LadProblem::generators_impl(const Vector& x) const {
  std::size_t ties = 0;
  for (int i = 0; i < components(); ++i)
    for (int j = 0; j < dim(); ++j)
      if (x[j] == anchors_(j, i)) ++ties;
  check_tie_count(ties);

  // per-pattern sums accumulate in component order so that singleton
  // results are bit-identical to mean_subgrad
  GeneratorSet gens;
  const std::size_t patterns = std::size_t{1} << ties;
  gens.reserve(patterns);
  for (std::size_t p = 0; p < patterns; ++p) {
    Vector sum = Vector::Zero(dim());
    std::size_t tie_bit = 0;
    for (int i = 0; i < components(); ++i) {
      Vector element = subgrad_impl(i, x);
      for (int j = 0; j < dim(); ++j)
        if (x[j] == anchors_(j, i))
          element[j] = (p >> tie_bit++) & 1 ? 1.0 : -1.0;
      sum += element;
    }
    gens.push_back(sum / components());
  }
  return gens;
}

double LadProblem::kink_margin(const Vector& x) const {
  double margin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < components(); ++i)
    margin = std::min(margin, (x - anchors_.col(i)).cwiseAbs().minCoeff());
  return margin;
}

Vector LadProblem::sample_point(SeededRng& rng) const {
  Vector x(dim());
  for (int j = 0; j < dim(); ++j) x[j] = scale_ * rng.next_gaussian();
  return x;
}

nlohmann::json LadProblem::params() const {
  nlohmann::json p{{"name", "lad"},
                   {"dim", dim()},
                   {"components", components()},
                   {"scale", scale_}};
  if (seeded_) {
    p["seed"] = seed_;
  } else {
    std::vector<std::vector<double>> cols;
    for (int i = 0; i < components(); ++i)
      cols.emplace_back(anchors_.col(i).begin(), anchors_.col(i).end());
    p["anchors"] = cols;
  }
  return p;
}

// -------------------------------------------------------------- Hinge ----

HingeSvmProblem::HingeSvmProblem(int dim, int components, std::uint64_t seed,
                                 double lambda)
    : Problem("hinge", dim, components), lambda_(lambda), seed_(seed) {
  if (lambda <= 0) throw ContractViolation("hinge: lambda must be > 0");
  SeededRng rng(seed);
  features_.resize(dim, components);
  labels_.resize(components);
  const double sep = 1.5 / std::sqrt(double(dim));
  for (int i = 0; i < components; ++i) {
    labels_[i] = (i % 2 == 0) ? 1.0 : -1.0;
    for (int j = 0; j < dim; ++j)
      features_(j, i) = labels_[i] * sep + 0.5 * rng.next_gaussian();
  }
}

double HingeSvmProblem::value_impl(int i, const Vector& w) const {
  const double t = 1.0 - labels_[i] * w.dot(features_.col(i));
  return std::max(0.0, t) + 0.5 * lambda_ * w.squaredNorm();
}

Vector HingeSvmProblem::subgrad_impl(int i, const Vector& w) const {
  const double t = 1.0 - labels_[i] * w.dot(features_.col(i));
  Vector g = lambda_ * w;
  if (t > 0) g -= labels_[i] * features_.col(i);
  return g;
}

std::optional<GeneratorSet> HingeSvmProblem::generators_impl(
    const Vector& w) const {
  std::size_t ties = 0;
  for (int i = 0; i < components(); ++i)
    if (1.0 - labels_[i] * w.dot(features_.col(i)) == 0.0) ++ties;
  check_tie_count(ties);

  GeneratorSet gens;
  const std::size_t patterns = std::size_t{1} << ties;
  gens.reserve(patterns);
  for (std::size_t p = 0; p < patterns; ++p) {
    Vector sum = Vector::Zero(dim());
    std::size_t tie_bit = 0;
    for (int i = 0; i < components(); ++i) {
      const double t = 1.0 - labels_[i] * w.dot(features_.col(i));
      Vector element = lambda_ * w;
      bool active = t > 0;
      if (t == 0.0) active = (p >> tie_bit++) & 1;
      if (active) element -= labels_[i] * features_.col(i);
      sum += element;
    }
    gens.push_back(sum / components());
  }
  return gens;
}

double HingeSvmProblem::kink_margin(const Vector& w) const {
  double margin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < components(); ++i)
    margin = std::min(margin,
                      std::abs(1.0 - labels_[i] * w.dot(features_.col(i))));
  return margin;
}

nlohmann::json HingeSvmProblem::params() const {
  return {{"name", "hinge"},
          {"dim", dim()},
          {"components", components()},
          {"seed", seed_},
          {"lambda", lambda_}};
}

// --------------------------------------------------------------- PWNC ----

PiecewiseNonconvexProblem::PiecewiseNonconvexProblem(int dim, int components,
                                                     std::uint64_t seed,
                                                     double scale)
    : Problem("pwnc", dim, components), seed_(seed), scale_(scale) {
  if (scale <= 0) throw ContractViolation("pwnc: scale must be > 0");
  SeededRng rng(seed);
  centers_.resize(dim, components);
  for (int i = 0; i < components; ++i) {
    // redraw degenerate (near-zero) centers so both branches are distinct
    do {
      for (int j = 0; j < dim; ++j)
        centers_(j, i) = rng.next_uniform(-scale, scale);
    } while (centers_.col(i).norm() < 0.1 * scale);
  }
}

double PiecewiseNonconvexProblem::value_impl(int i, const Vector& x) const {
  return std::min((x - centers_.col(i)).squaredNorm(),
                  (x + centers_.col(i)).squaredNorm());
}

Vector PiecewiseNonconvexProblem::subgrad_impl(int i, const Vector& x) const {
  const double dplus = (x - centers_.col(i)).squaredNorm();
  const double dminus = (x + centers_.col(i)).squaredNorm();
  // ties take the "+c_i" branch
  if (dplus <= dminus) return 2.0 * (x - centers_.col(i));
  return 2.0 * (x + centers_.col(i));
}

std::optional<GeneratorSet> PiecewiseNonconvexProblem::generators_impl(
    const Vector& x) const {
  std::size_t ties = 0;
  for (int i = 0; i < components(); ++i)
    if ((x - centers_.col(i)).squaredNorm() ==
        (x + centers_.col(i)).squaredNorm())
      ++ties;
  check_tie_count(ties);

  GeneratorSet gens;
  const std::size_t patterns = std::size_t{1} << ties;
  gens.reserve(patterns);
  for (std::size_t p = 0; p < patterns; ++p) {
    Vector sum = Vector::Zero(dim());
    std::size_t tie_bit = 0;
    for (int i = 0; i < components(); ++i) {
      const double dplus = (x - centers_.col(i)).squaredNorm();
      const double dminus = (x + centers_.col(i)).squaredNorm();
      bool plus_branch = dplus < dminus;
      if (dplus == dminus) plus_branch = !((p >> tie_bit++) & 1);
      Vector element;
      if (plus_branch)
        element = 2.0 * (x - centers_.col(i));
      else
        element = 2.0 * (x + centers_.col(i));
      sum += element;
    }
    gens.push_back(sum / components());
  }
  return gens;
}

double PiecewiseNonconvexProblem::kink_margin(const Vector& x) const {
  double margin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < components(); ++i) {
    const double gap = std::abs((x - centers_.col(i)).squaredNorm() -
                                (x + centers_.col(i)).squaredNorm());
    margin = std::min(margin, gap);
  }
  return margin;
}

Vector PiecewiseNonconvexProblem::initial_point() const {
  // deterministic start away from the all-ties saddle at the origin
  SeededRng rng(seed_ ^ 0x5DEECE66DULL);
  Vector x(dim());
  for (int j = 0; j < dim(); ++j) {
    const double s = rng.next_double() < 0.5 ? -1.0 : 1.0;
    x[j] = s * scale_ * rng.next_uniform(0.25, 0.75);
  }
  return x;
}

Vector PiecewiseNonconvexProblem::sample_point(SeededRng& rng) const {
  Vector x(dim());
  for (int j = 0; j < dim(); ++j) x[j] = scale_ * rng.next_gaussian();
  return x;
}

nlohmann::json PiecewiseNonconvexProblem::params() const {
  return {{"name", "pwnc"},
          {"dim", dim()},
          {"components", components()},
          {"seed", seed_},
          {"scale", scale_}};
}

// ------------------------------------------------------------ ReluMlp ----

ReluMlpProblem::ReluMlpProblem(int width, int input_dim, int components,
                               int samples_per_component, std::uint64_t seed,
                               double blob_sep, double blob_sigma,
                               double lambda)
    : Problem("relu-mlp", width * (input_dim + 2) + 1, components),
      width_(width),
      input_dim_(input_dim),
      samples_per_component_(samples_per_component),
      seed_(seed),
      blob_sep_(blob_sep),
      blob_sigma_(blob_sigma),
      lambda_(lambda) {
  if (width < 1) throw ContractViolation("relu-mlp: width must be >= 1");
  if (lambda < 0) throw ContractViolation("relu-mlp: lambda must be >= 0");
  if (input_dim < 1) throw ContractViolation("relu-mlp: input_dim must be >= 1");
  if (samples_per_component < 1)
    throw ContractViolation("relu-mlp: samples must be >= 1");

  const int total = components * samples_per_component;
  SeededRng rng(seed);
  samples_.resize(input_dim, total);
  targets_.resize(total);
  const double mean = blob_sep / std::sqrt(double(input_dim));
  for (int s = 0; s < total; ++s) {
    targets_[s] = (s % 2 == 0) ? 1.0 : -1.0;
    for (int j = 0; j < input_dim; ++j)
      samples_(j, s) = targets_[s] * mean + blob_sigma * rng.next_gaussian();
  }
}

namespace {

struct MlpView {
  Eigen::Map<const Matrix> w1;
  Eigen::Map<const Vector> b1;
  Eigen::Map<const Vector> w2;
  double b2;
};

MlpView map_params(const Vector& theta, int width, int input_dim) {
  const double* p = theta.data();
  return {Eigen::Map<const Matrix>(p, width, input_dim),
          Eigen::Map<const Vector>(p + width * input_dim, width),
          Eigen::Map<const Vector>(p + width * input_dim + width, width),
          theta[width * input_dim + 2 * width]};
}

}  // namespace

double ReluMlpProblem::value_impl(int i, const Vector& theta) const {
  const auto net = map_params(theta, width_, input_dim_);
  double loss = 0.0;
  for (int s = i * samples_per_component_;
       s < (i + 1) * samples_per_component_; ++s) {
    const Vector z = net.w1 * samples_.col(s) + net.b1;
    const Vector h = z.cwiseMax(0.0);
    const double pred = net.w2.dot(h) + net.b2;
    const double e = pred - targets_[s];
    loss += 0.5 * e * e;
  }
  return loss / samples_per_component_ + 0.5 * lambda_ * theta.squaredNorm();
}

Vector ReluMlpProblem::subgrad_impl(int i, const Vector& theta) const {
  const auto net = map_params(theta, width_, input_dim_);
  Vector grad = Vector::Zero(dim());
  Eigen::Map<Matrix> g_w1(grad.data(), width_, input_dim_);
  Eigen::Map<Vector> g_b1(grad.data() + width_ * input_dim_, width_);
  Eigen::Map<Vector> g_w2(grad.data() + width_ * input_dim_ + width_, width_);
  double& g_b2 = grad[width_ * input_dim_ + 2 * width_];

  for (int s = i * samples_per_component_;
       s < (i + 1) * samples_per_component_; ++s) {
    const Vector z = net.w1 * samples_.col(s) + net.b1;
    const Vector h = z.cwiseMax(0.0);
    const double pred = net.w2.dot(h) + net.b2;
    const double delta = (pred - targets_[s]) / samples_per_component_;
    // relu'(0) = 0: strict inequality selects the active units
    const Vector gate =
        z.unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; });
    const Vector r = delta * net.w2.cwiseProduct(gate);
    g_b2 += delta;
    g_w2 += delta * h;
    g_b1 += r;
    g_w1 += r * samples_.col(s).transpose();
  }
  grad += lambda_ * theta;
  return grad;
}

double ReluMlpProblem::kink_margin(const Vector& theta) const {
  const auto net = map_params(theta, width_, input_dim_);
  double margin = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples_.cols(); ++s) {
    const Vector z = net.w1 * samples_.col(s) + net.b1;
    margin = std::min(margin, z.cwiseAbs().minCoeff());
  }
  return margin;
}

Vector ReluMlpProblem::draw_parameters(SeededRng& rng) const {
  Vector theta(dim());
  const double w1_std = std::sqrt(2.0 / input_dim_);
  const double w2_std = std::sqrt(1.0 / width_);
  int p = 0;
  for (; p < width_ * input_dim_; ++p) theta[p] = w1_std * rng.next_gaussian();
  for (; p < width_ * input_dim_ + width_; ++p) theta[p] = 0.0;
  for (; p < width_ * input_dim_ + 2 * width_; ++p)
    theta[p] = w2_std * rng.next_gaussian();
  theta[p] = 0.0;
  return theta;
}

Vector ReluMlpProblem::initial_point() const {
  // random hidden layer, zero output layer: the first training phase is
  // then a well-conditioned least-squares fit in the output weights
  SeededRng rng(seed_ ^ 0xA5A5A5A5A5A5A5A5ULL);
  Vector theta = draw_parameters(rng);
  theta.segment(width_ * input_dim_ + width_, width_).setZero();
  theta[width_ * input_dim_ + 2 * width_] = 0.0;
  return theta;
}

Vector ReluMlpProblem::sample_point(SeededRng& rng) const {
  return draw_parameters(rng);
}

nlohmann::json ReluMlpProblem::params() const {
  return {{"name", "relu-mlp"}, {"width", width_},
          {"input_dim", input_dim_}, {"components", components()},
          {"samples", samples_per_component_}, {"seed", seed_},
          {"sep", blob_sep_}, {"sigma", blob_sigma_}, {"lambda", lambda_}};
}

// ----------------------------------------------------------- registry ----

namespace {

template <class T>
T field_or(const nlohmann::json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ContractViolation("problem." + key + ": wrong type");
  }
}

void reject_unknown(const nlohmann::json& config,
                    std::initializer_list<const char*> known) {
  for (const auto& [key, value] : config.items()) {
    bool ok = key == "name";
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw ContractViolation("problem." + key + ": unknown field");
  }
}

}  // namespace

std::unique_ptr<Problem> make_problem(const nlohmann::json& config) {
  if (!config.contains("name"))
    throw ContractViolation("problem.name: missing");
  const std::string name = config.at("name").get<std::string>();

  if (name == "lad") {
    reject_unknown(config, {"dim", "components", "seed", "scale", "anchors"});
    if (config.contains("anchors")) {
      const auto cols = config.at("anchors")
                            .get<std::vector<std::vector<double>>>();
      if (cols.empty()) throw ContractViolation("problem.anchors: empty");
      Matrix anchors(cols[0].size(), cols.size());
      for (std::size_t i = 0; i < cols.size(); ++i) {
        if (cols[i].size() != cols[0].size())
          throw ContractViolation("problem.anchors: ragged");
        for (std::size_t j = 0; j < cols[i].size(); ++j)
          anchors(Eigen::Index(j), Eigen::Index(i)) = cols[i][j];
      }
      return std::make_unique<LadProblem>(std::move(anchors));
    }
    return std::make_unique<LadProblem>(
        field_or(config, "dim", 5), field_or(config, "components", 20),
        field_or<std::uint64_t>(config, "seed", 1),
        field_or(config, "scale", 1.0));
  }
  if (name == "hinge") {
    reject_unknown(config, {"dim", "components", "seed", "lambda"});
    return std::make_unique<HingeSvmProblem>(
        field_or(config, "dim", 4), field_or(config, "components", 16),
        field_or<std::uint64_t>(config, "seed", 1),
        field_or(config, "lambda", 1e-2));
  }
  if (name == "pwnc") {
    reject_unknown(config, {"dim", "components", "seed", "scale"});
    return std::make_unique<PiecewiseNonconvexProblem>(
        field_or(config, "dim", 2), field_or(config, "components", 8),
        field_or<std::uint64_t>(config, "seed", 1),
        field_or(config, "scale", 0.25));
  }
  if (name == "relu-mlp") {
    reject_unknown(config, {"width", "input_dim", "components", "samples",
                            "seed", "sep", "sigma", "lambda"});
    return std::make_unique<ReluMlpProblem>(
        field_or(config, "width", 8), field_or(config, "input_dim", 2),
        field_or(config, "components", 32), field_or(config, "samples", 4),
        field_or<std::uint64_t>(config, "seed", 1),
        field_or(config, "sep", 1.5), field_or(config, "sigma", 0.4),
        field_or(config, "lambda", 1e-2));
  }
  throw ContractViolation("problem.name: unknown problem '" + name + "'");
}

}  // namespace lrf
