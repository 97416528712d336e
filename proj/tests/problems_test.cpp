#include "lrf/problems.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace lrf;

namespace {

Matrix anchors_1d(std::initializer_list<double> values) {
  Matrix a(1, Eigen::Index(values.size()));
  Eigen::Index i = 0;
  for (const double v : values) a(0, i++) = v;
  return a;
}

Vector scalar(double v) {
  Vector x(1);
  x[0] = v;
  return x;
}

std::vector<double> sorted_1d(const GeneratorSet& gens) {
  std::vector<double> out;
  for (const auto& g : gens) out.push_back(g[0]);
  std::sort(out.begin(), out.end());
  return out;
}

double rel_err(const Vector& a, const Vector& b) {
  return (a - b).norm() / std::max(b.norm(), 1e-6);
}

}  // namespace

TEST_CASE("lad component values, anchors {0,1,2}") {
  LadProblem lad(anchors_1d({0, 1, 2}));
  CHECK(lad.component_value(0, scalar(0)) == 0.0);
  CHECK(lad.component_value(2, scalar(0)) == 2.0);
  CHECK(lad.full_value(scalar(1)) == doctest::Approx(2.0 / 3.0));
  CHECK_THROWS_AS(lad.component_value(3, scalar(0)), ContractViolation);
  CHECK_THROWS_AS(lad.component_value(0, Vector::Zero(2)), ContractViolation);
}

TEST_CASE("lad subgradients and the sign(0)=0 kink convention") {
  LadProblem lad(anchors_1d({0, 1, 2}));
  CHECK(lad.component_subgrad(1, scalar(2)).vector[0] == 1.0);
  CHECK(lad.component_subgrad(1, scalar(1)).vector[0] == 0.0);
  CHECK(lad.component_subgrad(1, scalar(1)).component == 1);
}

TEST_CASE("clarke generators of |x|") {
  LadProblem abs_problem(anchors_1d({0}));
  auto at_kink = abs_problem.clarke_generators(scalar(0));
  REQUIRE(at_kink.has_value());
  CHECK(sorted_1d(*at_kink) == std::vector<double>{-1.0, 1.0});

  auto smooth = abs_problem.clarke_generators(scalar(2));
  REQUIRE(smooth.has_value());
  CHECK(sorted_1d(*smooth) == std::vector<double>{1.0});
}

TEST_CASE("clarke generators of LAD {0,1,2} at the median kink") {
  LadProblem lad(anchors_1d({0, 1, 2}));
  auto gens = lad.clarke_generators(scalar(1));
  REQUIRE(gens.has_value());
  CHECK(sorted_1d(*gens)[0] == doctest::Approx(-1.0 / 3.0));
  CHECK(sorted_1d(*gens)[1] == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("hinge value at w = 0") {
  HingeSvmProblem hinge(4, 16, 3, 1e-2);
  const Vector w = Vector::Zero(4);
  for (int i = 0; i < hinge.components(); ++i)
    CHECK(hinge.component_value(i, w) == 1.0);  // max(0, 1-0) + 0
}

TEST_CASE("hinge subgradient branches") {
  HingeSvmProblem hinge(2, 4, 3, 0.5);
  const Vector z = hinge.features().col(0);
  const double y = hinge.labels()[0];
  // far-violated margin: g = -y z + lambda w
  Vector w = -10.0 * y * z / z.squaredNorm();
  Vector g = hinge.component_subgrad(0, w).vector;
  CHECK(rel_err(g, Vector(-y * z + 0.5 * w)) < 1e-12);
  // satisfied margin: only the ridge term
  w = 10.0 * y * z / z.squaredNorm();
  g = hinge.component_subgrad(0, w).vector;
  CHECK(rel_err(g, Vector(0.5 * w)) < 1e-12);
}

TEST_CASE("pwnc branch minimum and tie handling") {
  PiecewiseNonconvexProblem pwnc(2, 8, 11, 0.25);
  for (int i = 0; i < pwnc.components(); ++i) {
    const Vector c = pwnc.centers().col(i);
    CHECK(pwnc.component_value(i, c) == 0.0);
    CHECK(pwnc.component_value(i, Vector(-c)) == 0.0);
  }
  // on the tie hyperplane both branch gradients generate the hull
  const Vector c0 = pwnc.centers().col(0);
  Vector tie(2);
  tie << -c0[1], c0[0];  // orthogonal to c0
  const double margin = pwnc.kink_margin(tie);
  CHECK(margin == 0.0);
  const Vector g = pwnc.component_subgrad(0, tie).vector;
  CHECK(rel_err(g, Vector(2.0 * (tie - c0))) < 1e-12);  // "+c" branch on ties
}

TEST_CASE("finite differences on smooth regions") {
  LadProblem abs_problem(anchors_1d({0}));
  const Vector fd = finite_difference_gradient(abs_problem, 0, scalar(3), 1e-6);
  CHECK(std::abs(fd[0] - 1.0) <= 1e-9);

  PiecewiseNonconvexProblem pwnc(2, 4, 11, 1.0);
  SeededRng rng(5);
  const Vector x = pwnc.sample_point(rng);
  if (pwnc.kink_margin(x) > 1e-3) {
    const Vector fd2 = finite_difference_gradient(pwnc, 1, x, 1e-4);
    // quadratic branches: central differences are exact up to roundoff
    CHECK(rel_err(fd2, pwnc.component_subgrad(1, x).vector) < 1e-7);
  }
  CHECK_THROWS_AS(finite_difference_gradient(pwnc, 0, x, 0.0),
                  ContractViolation);
}

TEST_CASE("oracle exactness: subgradients match finite differences") {
  const auto check_problem = [](const Problem& problem, std::uint64_t seed,
                                int points) {
    SeededRng rng(seed);
    int accepted = 0;
    int attempts = 0;
    while (accepted < points && attempts < points * 100) {
      ++attempts;
      const Vector x = problem.sample_point(rng);
      if (problem.kink_margin(x) <= 1e-3) continue;
      ++accepted;
      const int i = int(rng.next_below(std::uint64_t(problem.components())));
      const Vector g = problem.component_subgrad(i, x).vector;
      const Vector fd = finite_difference_gradient(problem, i, x, 1e-6);
      CHECK(rel_err(fd, g) <= 1e-5);
    }
    CHECK(accepted == points);
  };

  check_problem(LadProblem(3, 6, 21, 1.0), 100, 50);
  check_problem(HingeSvmProblem(4, 8, 22, 1e-2), 101, 50);
  check_problem(PiecewiseNonconvexProblem(3, 6, 23, 0.5), 102, 50);
  check_problem(ReluMlpProblem(8, 2, 8, 4, 24, 1.5, 0.4, 1e-2), 103, 30);
}

TEST_CASE("singleton generators equal the averaged subgradient exactly") {
  const LadProblem lad(3, 6, 31, 1.0);
  const HingeSvmProblem hinge(4, 8, 32, 1e-2);
  const PiecewiseNonconvexProblem pwnc(3, 6, 33, 0.5);
  SeededRng rng(200);
  for (const Problem* problem :
       {static_cast<const Problem*>(&lad), static_cast<const Problem*>(&hinge),
        static_cast<const Problem*>(&pwnc)}) {
    for (int t = 0; t < 25; ++t) {
      const Vector x = problem->sample_point(rng);
      if (problem->kink_margin(x) == 0.0) continue;
      const auto gens = problem->clarke_generators(x);
      REQUIRE(gens.has_value());
      REQUIRE(gens->size() == 1);
      CHECK((*gens)[0] == problem->mean_subgrad(x));
    }
  }
}

TEST_CASE("relu-mlp does not enumerate its hull") {
  ReluMlpProblem mlp(8, 2, 8, 4, 24, 1.5, 0.4, 1e-2);
  CHECK_FALSE(mlp.clarke_generators(mlp.initial_point()).has_value());
}

TEST_CASE("coercivity witnesses on rays of increasing norm") {
  HingeSvmProblem hinge(4, 8, 41, 1e-2);
  PiecewiseNonconvexProblem pwnc(3, 6, 42, 0.5);
  const double svm_c1 = 0.5 * hinge.lambda();
  double pwnc_center_mean = 0;
  for (int i = 0; i < pwnc.components(); ++i)
    pwnc_center_mean += pwnc.centers().col(i).norm();
  pwnc_center_mean /= pwnc.components();
  const double pwnc_c2 = 2.0 * pwnc_center_mean * pwnc_center_mean;

  SeededRng rng(77);
  for (int trial = 0; trial < 10; ++trial) {
    Vector dir_svm = hinge.sample_point(rng).normalized();
    Vector dir_pwnc = pwnc.sample_point(rng).normalized();
    for (const double r : {0.5, 2.0, 8.0, 32.0, 128.0}) {
      CHECK(hinge.full_value(Vector(r * dir_svm)) >= svm_c1 * r * r);
      CHECK(pwnc.full_value(Vector(r * dir_pwnc)) >= 0.5 * r * r - pwnc_c2);
    }
  }
}

TEST_CASE("all built-in problems are bounded below by zero") {
  const LadProblem lad(3, 6, 51, 1.0);
  const HingeSvmProblem hinge(4, 8, 52, 1e-2);
  const PiecewiseNonconvexProblem pwnc(3, 6, 53, 0.5);
  const ReluMlpProblem mlp(8, 2, 8, 4, 54, 1.5, 0.4, 1e-2);
  SeededRng rng(55);
  for (const Problem* problem :
       {static_cast<const Problem*>(&lad), static_cast<const Problem*>(&hinge),
        static_cast<const Problem*>(&pwnc),
        static_cast<const Problem*>(&mlp)}) {
    for (int t = 0; t < 50; ++t)
      CHECK(problem->full_value(problem->sample_point(rng)) >= 0.0);
  }
}

TEST_CASE("seeded lad anchors come in +/- pairs with bounded magnitudes") {
  for (const std::uint64_t seed : {1ULL, 9ULL, 42ULL}) {
    const LadProblem lad(4, 20, seed, 0.5);
    const auto& a = lad.anchors();
    for (int p = 0; p + 1 < 20; p += 2)
      for (int j = 0; j < 4; ++j) {
        CHECK(a(j, p) == -a(j, p + 1));
        CHECK(std::abs(a(j, p)) >= 0.8 * 0.5);
        CHECK(std::abs(a(j, p)) <= 0.5);
      }
    // the median box therefore contains a comfortable origin neighborhood
    Vector inside = Vector::Constant(4, 0.3 * 0.5);
    CHECK(lad.mean_subgrad(inside).norm() == 0.0);
  }
  // odd counts append the origin anchor
  const LadProblem odd(2, 5, 7, 1.0);
  CHECK(odd.anchors().col(4).norm() == 0.0);
}

TEST_CASE("equal seeds reproduce identical problem data") {
  for (const char* name : {"lad", "hinge", "pwnc", "relu-mlp"}) {
    const auto a = make_problem({{"name", name}, {"seed", 33}});
    const auto b = make_problem({{"name", name}, {"seed", 33}});
    SeededRng rng(2);
    for (int t = 0; t < 10; ++t) {
      const Vector x = a->sample_point(rng);
      const int i = int(rng.next_below(std::uint64_t(a->components())));
      CHECK(a->component_value(i, x) == b->component_value(i, x));
      CHECK(a->component_subgrad(i, x).vector ==
            b->component_subgrad(i, x).vector);
    }
    CHECK(a->initial_point() == b->initial_point());
  }
}

TEST_CASE("registry builds every problem and records resolved params") {
  for (const char* name : {"lad", "hinge", "pwnc", "relu-mlp"}) {
    const auto problem = make_problem({{"name", name}, {"seed", 9}});
    CHECK(problem->name() == name);
    const auto params = problem->params();
    CHECK(params.at("name") == name);
    CHECK(params.contains("seed"));
  }
  CHECK_THROWS_AS(make_problem({{"name", "nope"}}), ContractViolation);
  CHECK_THROWS_AS(make_problem(nlohmann::json::object()), ContractViolation);
}

TEST_CASE("registry accepts explicit lad anchors") {
  const auto problem = make_problem(
      {{"name", "lad"}, {"anchors", {{0.0}, {1.0}, {2.0}}}});
  CHECK(problem->dim() == 1);
  CHECK(problem->components() == 3);
  CHECK(problem->full_value(scalar(1)) == doctest::Approx(2.0 / 3.0));
}
