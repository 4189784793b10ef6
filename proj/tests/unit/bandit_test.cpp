#include <doctest.h>

#include <cmath>
#include <memory>
#include <sstream>

#include "helpers.hpp"
#include "lpoco/bandit.hpp"
#include "lpoco/errors.hpp"
#include "lpoco/offline.hpp"

using namespace lpoco;
using lpoco::testing::half_square_instance;

namespace {

Vector scalar(double x) { return Vector::Constant(1, x); }

BanditConfig fixed_step_config(double scale, Feedback fb = Feedback::TwoPoint) {
  BanditConfig c = BanditConfig::experiment_preset(1);
  c.eta.scale = scale;
  c.feedback = fb;
  return c;
}

ProblemInstance box_quadratic(std::uint64_t seed, long horizon, NoiseKind noise = NoiseKind::Zero,
                              double phi = 0.0) {
  QuadraticSpec q;
  q.seed = seed;
  q.horizon = horizon;
  q.set.kind = FeasibleSet::Kind::Box;
  q.set.lower = -2.0;
  q.set.upper = 2.0;
  q.noise = noise;
  q.phi = phi;
  return q.build();
}

}  // namespace

TEST_SUITE("bandit") {
  TEST_CASE("constant costs give a zero two-point step") {
    auto costs = std::make_shared<FunctionCost>(1, 2, 5, [](long, const Vector&) { return 4.0; });
    const ProblemInstance p(costs, scalar(0.3), FeasibleSet::unconstrained(1), NoiseModel{},
                            ProblemConstants{1.0, 1.0, 1.0, 1.0});
    PredictionOracle oracle(p, 1);
    const ActionSequence recent{scalar(0.3), scalar(0.7)};
    const BanditStepResult r = bandit_step(p, fixed_step_config(0.2), 2, recent, scalar(0.9), oracle);
    CHECK(r.gradient == Vector::Zero(1));
    CHECK(r.next == scalar(0.7));
  }

  TEST_CASE("hand-computed two-point step") {
    const ProblemInstance p = half_square_instance(3, 1.0);
    PredictionOracle oracle(p, 1);
    const ActionSequence recent{scalar(1.0), scalar(1.0)};
    const BanditStepResult r = bandit_step(p, fixed_step_config(0.2), 1, recent, scalar(1.0), oracle);
    REQUIRE(r.records.size() == 2);
    CHECK(r.records[0].value == doctest::Approx(1.22));
    CHECK(r.records[1].value == doctest::Approx(0.82));
    // Only the newest slot of the window moves.
    CHECK(r.records[0].window(0) == 1.0);
    CHECK(r.records[0].window(1) == doctest::Approx(1.2));
    CHECK(r.records[1].window(1) == doctest::Approx(0.8));
    CHECK(r.gradient(0) == doctest::Approx(1.0));
    CHECK(r.next(0) == doctest::Approx(0.8));
  }

  TEST_CASE("query counts per step") {
    const ProblemInstance p = half_square_instance(3, 1.0);
    const ActionSequence recent{scalar(1.0), scalar(1.0)};
    PredictionOracle o1(p, 1), o2(p, 1);
    CHECK(bandit_step(p, fixed_step_config(0.2, Feedback::SinglePoint), 1, recent, scalar(1.0), o1).queries == 1);
    CHECK(o1.queries() == 1);
    CHECK(bandit_step(p, fixed_step_config(0.2), 1, recent, scalar(1.0), o2).queries == 2);
    CHECK(o2.queries() == 2);
  }

  TEST_CASE("single-point step") {
    const ProblemInstance p = half_square_instance(3, 1.0);
    PredictionOracle oracle(p, 1);
    const ActionSequence recent{scalar(1.0), scalar(1.0)};
    const auto r = bandit_step(p, fixed_step_config(0.2, Feedback::SinglePoint), 1, recent, scalar(1.0), oracle);
    CHECK(r.gradient(0) == doctest::Approx(1.22 / 0.2));
  }

  TEST_CASE("out-of-horizon steps keep the action and issue no queries") {
    const ProblemInstance p = half_square_instance(3, 1.0);
    PredictionOracle oracle(p, 1);
    const ActionSequence recent{scalar(1.0), scalar(0.4)};
    const auto r = bandit_step(p, fixed_step_config(0.2), 4, recent, scalar(1.0), oracle);
    CHECK(r.next == scalar(0.4));
    CHECK(r.queries == 0);
    CHECK(oracle.queries() == 0);
  }

  TEST_CASE("window size is checked") {
    const ProblemInstance p = half_square_instance(3, 1.0);
    PredictionOracle oracle(p, 1);
    const ActionSequence recent{scalar(1.0)};
    CHECK_THROWS_AS(bandit_step(p, fixed_step_config(0.2), 1, recent, scalar(1.0), oracle), ContractViolation);
  }

  TEST_CASE("a one-step horizon plays x_bar0") {
    const ProblemInstance p = half_square_instance(1, 0.5);
    const BanditTrace tr = run_bandit(p, fixed_step_config(0.2), 3);
    REQUIRE(tr.iterates.size() == 1);
    CHECK(tr.iterates[0] == scalar(0.5));
  }

  TEST_CASE("total queries are 2T or T") {
    const ProblemInstance p = box_quadratic(4, 17);
    CHECK(run_bandit(p, fixed_step_config(0.2), 1).total_queries == 34);
    CHECK(run_bandit(p, fixed_step_config(0.2, Feedback::SinglePoint), 1).total_queries == 17);
  }

  TEST_CASE("iterates stay feasible") {
    const ProblemInstance p = box_quadratic(9, 30);
    const BanditTrace tr = run_bandit(p, fixed_step_config(5.0, Feedback::SinglePoint), 2);
    for (const auto& x : tr.iterates) CHECK(p.feasible_set().contains(x));
  }

  TEST_CASE("runs are deterministic") {
    const ProblemInstance p = box_quadratic(9, 12);
    const BanditTrace a = run_bandit(p, fixed_step_config(0.2), 8);
    const BanditTrace b = run_bandit(p, fixed_step_config(0.2), 8);
    CHECK(a.iterates == b.iterates);
    REQUIRE(a.query_log.size() == b.query_log.size());
    for (std::size_t i = 0; i < a.query_log.size(); ++i) {
      CHECK(a.query_log[i].window == b.query_log[i].window);
      CHECK(a.query_log[i].value == b.query_log[i].value);
    }
    std::ostringstream ca, cb;
    write_bandit_csv(ca, a);
    write_bandit_csv(cb, b);
    CHECK(ca.str() == cb.str());
    CHECK(ca.str().rfind("t,x0,cost,cumulative_cost,queries_so_far\n", 0) == 0);
  }

  TEST_CASE("fixed-once mode reuses one direction") {
    BanditConfig c = fixed_step_config(0.2);
    c.directions = DirectionMode::FixedOnce;
    CHECK(initialization_direction(c, 5, 1) == initialization_direction(c, 5, 9));
    c.directions = DirectionMode::PerStep;
    CHECK(initialization_direction(c, 5, 1) != initialization_direction(c, 5, 9));
  }

  TEST_CASE("theorem preset uses 1/(t mu) and 1/sqrt(T)") {
    const ProblemInstance p = box_quadratic(1, 25);
    const BanditConfig c = BanditConfig::theorem1(p, SmoothingSpec::truncated_paper(1, 2));
    CHECK(c.delta == doctest::Approx(0.2));
    CHECK(c.eta.at(4, 2.0) == doctest::Approx(0.125));
  }

  TEST_CASE("averaged regret per step declines with T") {
    std::vector<double> per_step;
    for (long horizon : {5L, 10L, 15L, 20L}) {
      double s = 0.0;
      for (int i = 0; i < 50; ++i) {
        const ProblemInstance p = box_quadratic(1000 + i, horizon);
        const BanditTrace tr = run_bandit(p, fixed_step_config(0.2), 77 + i);
        s += dynamic_regret(tr.iterates, p, solve_offline(p).x);
      }
      per_step.push_back(s / 50 / horizon);
    }
    int inversions = 0;
    for (std::size_t i = 1; i < per_step.size(); ++i) inversions += per_step[i] > per_step[i - 1];
    CHECK(inversions <= 1);
  }

  TEST_CASE("large prediction errors hurt") {
    double clean = 0.0, noisy = 0.0;
    for (int i = 0; i < 50; ++i) {
      const ProblemInstance p0 = box_quadratic(200 + i, 20);
      const double g = p0.constants().lipschitz;
      const ProblemInstance p1 = box_quadratic(200 + i, 20, NoiseKind::Uniform, 10.0 * g);
      const auto x_star = solve_offline(p0).x;
      clean += dynamic_regret(run_bandit(p0, fixed_step_config(0.2), i).iterates, p0, x_star);
      noisy += dynamic_regret(run_bandit(p1, fixed_step_config(0.2), i).iterates, p0, x_star);
    }
    CHECK(noisy > clean);
  }

  TEST_CASE("invalid configurations are rejected") {
    BanditConfig c = fixed_step_config(0.2);
    c.delta = 0.0;
    CHECK_THROWS_AS(c.validate(), ParameterError);
    c = fixed_step_config(0.0);
    CHECK_THROWS_AS(c.validate(), ParameterError);
  }
}
