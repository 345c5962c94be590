#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "proelm/evaluation.hpp"
#include "proelm/stream.hpp"
#include "oracles.hpp"

using namespace proelm;

namespace {

// Batch least-squares weights over the whole dataset, labels in plan order,
// with -1 backfill implied by using the full target matrix.
MatrixXd batch_beta_in_plan_order(const Dataset& ds, const StreamPlan& plan,
                                  const HiddenLayer<double>& layer) {
  MatrixXd h = hidden_map(layer, ds.features);
  MatrixXd y(ds.sample_count(), ds.label_count());
  for (std::size_t pos = 0; pos < plan.label_order.size(); ++pos)
    y.col(static_cast<Index>(pos)) = ds.targets.col(plan.label_order[pos]);
  return oracle::ridge_solve(h, y);
}

}  // namespace

TEST_CASE("plans satisfy every invariant on random datasets") {
  std::mt19937 gen(401);
  std::uniform_int_distribution<Index> n_dist(30, 80), m_dist(3, 6);
  for (int trial = 0; trial < 20; ++trial) {
    const Index m = m_dist(gen);
    Dataset ds = generate_synthetic(n_dist(gen), 4, m, 1.0, Seed(500 + trial));

    std::vector<Index> pattern{m - 1, 1};
    if (m > 3 && trial % 2 == 0) pattern = {m - 2, 1, 1};

    StreamPlan plan = build_stream_plan(ds, pattern, 10, 1, Seed(trial));
    CHECK_NOTHROW(validate_plan(ds, plan));

    // Every sample exactly once.
    std::set<Index> seen(plan.initial_block.begin(), plan.initial_block.end());
    std::size_t total = plan.initial_block.size();
    for (const StreamPhase& phase : plan.phases) {
      seen.insert(phase.samples.begin(), phase.samples.end());
      total += phase.samples.size();
    }
    CHECK(total == static_cast<std::size_t>(ds.sample_count()));
    CHECK(seen.size() == total);

    // Initial block stays within the first pattern[0] labels (plan order).
    std::vector<bool> known(static_cast<std::size_t>(m), false);
    for (Index pos = 0; pos < pattern[0]; ++pos)
      known[static_cast<std::size_t>(plan.label_order[pos])] = true;
    for (Index r : plan.initial_block)
      for (Index c = 0; c < m; ++c)
        if (ds.targets(r, c) > 0) CHECK(known[static_cast<std::size_t>(c)]);

    CHECK(plan.phases[0].introduced_labels.empty());
  }
}

TEST_CASE("pattern validation errors") {
  Dataset ds = generate_synthetic(40, 4, 6, 1.0, 3);
  CHECK_THROWS_AS(build_stream_plan(ds, {4, 1}, 10, 1, 0), InvalidPatternError);
  CHECK_THROWS_AS(build_stream_plan(ds, {}, 10, 1, 0), InvalidPatternError);
  CHECK_THROWS_AS(build_stream_plan(ds, {6, 0}, 10, 1, 0), InvalidPatternError);
  CHECK_THROWS_AS(build_stream_plan(ds, {5, 1}, 0, 1, 0), InvalidArgumentError);
  CHECK_THROWS_AS(build_stream_plan(ds, {5, 1}, 41, 1, 0), InvalidArgumentError);
  CHECK_THROWS_AS(build_stream_plan(ds, {5, 1}, 10, 0, 0), InvalidArgumentError);
}

TEST_CASE("an infeasible initial block reports the largest feasible size") {
  // Every sample is positive for every label, so nothing fits a 1-label prefix.
  Dataset ds = generate_synthetic(20, 3, 2, 2.0, 5);
  try {
    build_stream_plan(ds, {1, 1}, 5, 1, 0);
    FAIL("expected an infeasibility error");
  } catch (const InfeasiblePlanError& e) {
    CHECK(e.max_feasible_n0() == 0);
    CHECK(std::string(e.what()).find('0') != std::string::npos);
  }
}

TEST_CASE("an infeasible natural order holds out the least uniquely occurring labels") {
  // "mid" is the sole positive on 2 samples, "rare" never occurs alone, and
  // "common" is the sole positive on 9. A 1-label prefix under the natural
  // order admits only mid's 2 solo samples, so the plan keeps common up
  // front and defers rare (unique count 0) before mid (unique count 2).
  Dataset ds;
  ds.features = MatrixXd::Random(12, 3);
  ds.targets = MatrixXd::Constant(12, 3, -1.0);
  for (Index r = 0; r < 9; ++r) ds.targets(r, 2) = 1.0;
  for (Index r = 9; r < 12; ++r) ds.targets(r, 0) = 1.0;
  ds.targets(9, 1) = 1.0;
  ds.label_names = {"mid", "rare", "common"};

  StreamPlan plan = build_stream_plan(ds, {1, 1, 1}, 5, 1, 9);
  CHECK(plan.label_order == std::vector<Index>{2, 1, 0});
  CHECK(plan.initial_block.size() == 5);
  CHECK(plan.phases[0].introduced_labels.empty());
  CHECK(plan.phases[1].introduced_labels == std::vector<Index>{1});
  CHECK(plan.phases[2].introduced_labels == std::vector<Index>{0});
  validate_plan(ds, plan);

  // With a feasible natural order the permutation is the identity.
  Dataset natural = generate_synthetic(30, 3, 3, 1.0, 8);
  StreamPlan plan2 = build_stream_plan(natural, {2, 1}, 8, 1, 9);
  CHECK(plan2.label_order == std::vector<Index>{0, 1, 2});
}

TEST_CASE("a single-group pattern degenerates to plain sequential training") {
  Dataset ds = generate_synthetic(60, 4, 3, 1.0, 21);
  StreamPlan plan = build_stream_plan(ds, {3}, 15, 1, 33);
  CHECK(plan.phases.size() == 1);
  CHECK(plan.phases[0].introduced_labels.empty());

  HiddenLayer<double> layer(4, 10, Activation::Sigmoid, 33);
  StreamResult run = run_stream(ds, plan, layer, 0.0, ExpansionMode::HistoryExact);

  // Bit-comparable to the same schedule executed by hand with no expansions,
  // using the identical slicing expressions.
  const std::vector<Index> cols{0, 1, 2};
  MatrixXd h0 = hidden_map(layer, ds.features(plan.initial_block, Eigen::all));
  MatrixXd y0 = ds.targets(plan.initial_block, cols);
  ModelState<double> by_hand = init_batch(h0, y0, 0.0, LabelRegistry(ds.label_names));
  for (Index r : plan.phases[0].samples) {
    const std::vector<Index> one{r};
    MatrixXd h = hidden_map(layer, ds.features(one, Eigen::all));
    MatrixXd y = ds.targets(one, cols);
    sequential_update(by_hand, h, y);
  }
  CHECK(run.state.beta == by_hand.beta);
  CHECK(run.state.m_inv == by_hand.m_inv);
}

TEST_CASE("streaming with introductions matches the -1-backfilled batch solution") {
  Dataset ds = generate_synthetic(40, 4, 3, 1.0, 55);
  StreamPlan plan = build_stream_plan(ds, {2, 1}, 12, 1, 7);
  HiddenLayer<double> layer(4, 8, Activation::Sigmoid, 7);
  StreamResult run = run_stream(ds, plan, layer, 0.0, ExpansionMode::HistoryExact);

  MatrixXd expected = batch_beta_in_plan_order(ds, plan, layer);
  CHECK(oracle::relative_error(run.state.beta, expected) <= 1e-6);

  // Registry order must follow the plan's label order.
  for (std::size_t pos = 0; pos < plan.label_order.size(); ++pos)
    CHECK(run.state.labels.name(static_cast<Index>(pos)) ==
          ds.label_names[static_cast<std::size_t>(plan.label_order[pos])]);
}

TEST_CASE("chunked and one-by-one runs agree") {
  Dataset ds = generate_synthetic(50, 5, 4, 1.2, 66);
  StreamPlan plan = build_stream_plan(ds, {3, 1}, 14, 5, 13);
  HiddenLayer<double> layer(5, 9, Activation::Sigmoid, 13);
  StreamResult chunked = run_stream(ds, plan, layer, 0.0, ExpansionMode::HistoryExact);

  StreamPlan one_by_one = plan;
  one_by_one.chunk_size = 1;
  StreamResult single = run_stream(ds, one_by_one, layer, 0.0, ExpansionMode::HistoryExact);
  CHECK(oracle::relative_error(chunked.state.beta, single.state.beta) <= 1e-6);
}

TEST_CASE("the curve has one point per chunk plus the initial point") {
  Dataset ds = generate_synthetic(37, 4, 3, 1.0, 77);
  const Index n0 = 12;
  for (Index b : {Index(1), Index(4)}) {
    StreamPlan plan = build_stream_plan(ds, {2, 1}, n0, b, 3);
    Index chunks = 0;
    for (const StreamPhase& phase : plan.phases) {
      const Index k = static_cast<Index>(phase.samples.size());
      chunks += (k + b - 1) / b;
    }
    HiddenLayer<double> layer(4, 6, Activation::Sigmoid, 3);
    StreamResult run = run_stream(ds, plan, layer, 0.0, ExpansionMode::HistoryExact);
    CHECK(static_cast<Index>(run.curve.points.size()) == chunks + 1);
    CHECK(run.curve.points.front().samples_seen == n0);
    CHECK(run.curve.points.back().samples_seen == ds.sample_count());

    // Tracked labels default to everything introduced after phase 0.
    CHECK(run.curve.tracked_labels.size() == 1);
    for (const CurvePoint& point : run.curve.points)
      CHECK(point.per_label.size() == run.curve.tracked_labels.size());
  }
}

TEST_CASE("curve points are measured against a fixed external evaluation set") {
  Dataset ds = generate_synthetic(60, 4, 3, 1.0, 88);
  Dataset eval = generate_synthetic(25, 4, 3, 1.0, 89);
  StreamPlan plan = build_stream_plan(ds, {2, 1}, 15, 1, 5);
  HiddenLayer<double> layer(4, 8, Activation::Sigmoid, 5);

  StreamOptions options;
  options.eval = &eval;
  StreamResult run = run_stream(ds, plan, layer, 0.0, ExpansionMode::HistoryExact, options);

  // Before the held-out label is introduced, the model predicts -1 for it;
  // its per-label loss must equal that label's positive rate in eval.
  const Index held_out = run.curve.tracked_labels[0];
  const double positive_rate =
      static_cast<double>((eval.targets.col(held_out).array() > 0).count()) /
      static_cast<double>(eval.sample_count());
  CHECK(run.curve.points.front().per_label[0] == doctest::Approx(positive_rate));
}

TEST_CASE("paper-literal and history-exact modes both run and differ in general") {
  Dataset ds = generate_synthetic(50, 4, 3, 1.0, 99);
  StreamPlan plan = build_stream_plan(ds, {2, 1}, 14, 1, 11);
  HiddenLayer<double> layer(4, 8, Activation::Sigmoid, 11);
  StreamResult literal = run_stream(ds, plan, layer, 0.0, ExpansionMode::PaperLiteral);
  StreamResult exact = run_stream(ds, plan, layer, 0.0, ExpansionMode::HistoryExact);
  CHECK(literal.state.beta.cols() == exact.state.beta.cols());
  CHECK(literal.state.beta != exact.state.beta);
}

TEST_CASE("a failing run still hands back the partial curve") {
  // Initial block smaller than the hidden width with ridge 0: singular Gram.
  Dataset ds = generate_synthetic(30, 4, 2, 1.0, 12);
  StreamPlan plan = build_stream_plan(ds, {1, 1}, 3, 1, 2);
  HiddenLayer<double> layer(4, 10, Activation::Sigmoid, 2);
  try {
    run_stream(ds, plan, layer, 0.0, ExpansionMode::HistoryExact);
    FAIL("expected a stream failure");
  } catch (const StreamRunError& e) {
    CHECK(e.kind() == "singular-matrix");
    CHECK(e.partial_curve().points.empty());
  }
}

TEST_CASE("run_stream validates the layer against the dataset") {
  Dataset ds = generate_synthetic(30, 4, 2, 1.0, 14);
  StreamPlan plan = build_stream_plan(ds, {1, 1}, 8, 1, 2);
  HiddenLayer<double> wrong(5, 6, Activation::Sigmoid, 2);
  CHECK_THROWS_AS(run_stream(ds, plan, wrong, 0.0, ExpansionMode::HistoryExact), ShapeError);
}

TEST_CASE("plans replay identically under the same seed") {
  Dataset ds = generate_synthetic(45, 4, 3, 1.0, 15);
  StreamPlan a = build_stream_plan(ds, {2, 1}, 12, 1, 77);
  StreamPlan b = build_stream_plan(ds, {2, 1}, 12, 1, 77);
  CHECK(a.initial_block == b.initial_block);
  CHECK(a.label_order == b.label_order);
  for (std::size_t p = 0; p < a.phases.size(); ++p)
    CHECK(a.phases[p].samples == b.phases[p].samples);

  StreamPlan c = build_stream_plan(ds, {2, 1}, 12, 1, 78);
  bool same = a.initial_block == c.initial_block;
  for (std::size_t p = 0; p < a.phases.size() && same; ++p)
    same = a.phases[p].samples == c.phases[p].samples;
  CHECK_FALSE(same);
}
