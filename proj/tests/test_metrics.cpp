#include <doctest.h>

#include <algorithm>
#include <random>

#include "proelm/metrics.hpp"
#include "oracles.hpp"

using namespace proelm;

TEST_CASE("hamming loss on hand-checked cases") {
  MatrixXd truth(2, 3);
  truth << 1, -1, 1, -1, 1, -1;
  CHECK(hamming_loss(truth, truth) == 0.0);
  CHECK(hamming_loss(MatrixXd(-truth), truth) == 1.0);

  MatrixXd one_off = truth;
  one_off(0, 1) = 1;
  CHECK(hamming_loss(one_off, truth) == doctest::Approx(1.0 / 6.0));
}

TEST_CASE("hamming loss validates its inputs") {
  MatrixXd a = MatrixXd::Ones(2, 2);
  CHECK_THROWS_AS(hamming_loss(a, MatrixXd::Ones(2, 3)), ShapeError);
  MatrixXd bad = a;
  bad(0, 0) = 0.5;
  CHECK_THROWS_AS(hamming_loss(bad, a), InvalidArgumentError);
  CHECK_THROWS_AS(hamming_loss(MatrixXd(), MatrixXd()), InvalidArgumentError);
}

TEST_CASE("per-label hamming on hand-checked cases") {
  MatrixXd truth = MatrixXd::Ones(4, 2);
  MatrixXd pred = truth;
  CHECK(per_label_hamming(pred, truth, 0) == 0.0);
  pred.col(1) = -pred.col(1);
  CHECK(per_label_hamming(pred, truth, 1) == 1.0);
  pred(0, 0) = -1;
  CHECK(per_label_hamming(pred, truth, 0) == doctest::Approx(0.25));
  CHECK_THROWS_AS(per_label_hamming(pred, truth, 2), InvalidArgumentError);
  CHECK_THROWS_AS(per_label_hamming(pred, truth, -1), InvalidArgumentError);
}

TEST_CASE("overall hamming equals the mean of per-label hammings") {
  std::mt19937 gen(301);
  MatrixXd pred = oracle::random_bipolar(9, 5, gen);
  MatrixXd truth = oracle::random_bipolar(9, 5, gen);
  double mean = 0;
  for (Index c = 0; c < 5; ++c) mean += per_label_hamming(pred, truth, c);
  mean /= 5.0;
  CHECK(hamming_loss(pred, truth) == doctest::Approx(mean).epsilon(1e-15));
}

TEST_CASE("example-based metrics on the hand-evaluated overlap case") {
  // P = {1,2}, T = {2,3} over 4 labels.
  MatrixXd pred(1, 4);
  pred << -1, 1, 1, -1;
  MatrixXd truth(1, 4);
  truth << -1, -1, 1, 1;
  ExampleMetrics m = example_based_metrics(pred, truth);
  CHECK(m.accuracy == doctest::Approx(1.0 / 3.0));
  CHECK(m.precision == doctest::Approx(0.5));
  CHECK(m.recall == doctest::Approx(0.5));
  CHECK(m.f1 == doctest::Approx(0.5));
}

TEST_CASE("identical positive sets score 1 and disjoint nonempty sets score 0") {
  std::mt19937 gen(302);
  MatrixXd truth = oracle::random_bipolar(6, 4, gen);
  ExampleMetrics same = example_based_metrics(truth, truth);
  CHECK(same.accuracy == 1.0);
  CHECK(same.precision == 1.0);
  CHECK(same.recall == 1.0);
  CHECK(same.f1 == 1.0);

  MatrixXd pred(2, 2), disjoint_truth(2, 2);
  pred << 1, -1, -1, 1;
  disjoint_truth << -1, 1, 1, -1;
  ExampleMetrics none = example_based_metrics(pred, disjoint_truth);
  CHECK(none.accuracy == 0.0);
  CHECK(none.precision == 0.0);
  CHECK(none.recall == 0.0);
  CHECK(none.f1 == 0.0);
}

TEST_CASE("both-empty samples score 1, one-sided empties score 0 where undefined") {
  MatrixXd pred(1, 3), truth(1, 3);
  pred << -1, -1, -1;
  truth << -1, -1, -1;
  ExampleMetrics both_empty = example_based_metrics(pred, truth);
  CHECK(both_empty.accuracy == 1.0);
  CHECK(both_empty.precision == 1.0);
  CHECK(both_empty.recall == 1.0);
  CHECK(both_empty.f1 == 1.0);

  truth << 1, -1, -1;  // empty P, nonempty T
  ExampleMetrics empty_p = example_based_metrics(pred, truth);
  CHECK(empty_p.precision == 0.0);
  CHECK(empty_p.recall == 0.0);
  CHECK(empty_p.accuracy == 0.0);
  CHECK(empty_p.f1 == 0.0);
}

TEST_CASE("metrics agree with the brute-force set oracle on random pairs") {
  std::mt19937 gen(303);
  std::uniform_int_distribution<Index> rows(1, 12), cols(1, 8);
  for (int trial = 0; trial < 100; ++trial) {
    const Index n = rows(gen);
    const Index m = cols(gen);
    MatrixXd pred = oracle::random_bipolar(n, m, gen, 0.35);
    MatrixXd truth = oracle::random_bipolar(n, m, gen, 0.35);
    oracle::SetMetrics expected = oracle::set_metrics(pred, truth);
    ExampleMetrics actual = example_based_metrics(pred, truth);
    CHECK(hamming_loss(pred, truth) == doctest::Approx(expected.hamming).epsilon(1e-12));
    CHECK(actual.accuracy == doctest::Approx(expected.accuracy).epsilon(1e-12));
    CHECK(actual.precision == doctest::Approx(expected.precision).epsilon(1e-12));
    CHECK(actual.recall == doctest::Approx(expected.recall).epsilon(1e-12));
    CHECK(actual.f1 == doctest::Approx(expected.f1).epsilon(1e-12));
  }
}

TEST_CASE("all metric outputs stay in [0, 1] and f1 lies between precision and recall") {
  std::mt19937 gen(304);
  for (int trial = 0; trial < 50; ++trial) {
    MatrixXd pred = oracle::random_bipolar(7, 5, gen, 0.4);
    MatrixXd truth = oracle::random_bipolar(7, 5, gen, 0.4);
    ExampleMetrics m = example_based_metrics(pred, truth);
    for (double v : {m.accuracy, m.precision, m.recall, m.f1}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    // Per sample, f1 is the harmonic mean of defined precision/recall, so it
    // lands between them.
    for (Index j = 0; j < pred.rows(); ++j) {
      Index p = (pred.row(j).array() == 1.0).count();
      Index t = (truth.row(j).array() == 1.0).count();
      if (p == 0 || t == 0) continue;
      Index both = ((pred.row(j).array() == 1.0) && (truth.row(j).array() == 1.0)).count();
      double prec = double(both) / double(p);
      double rec = double(both) / double(t);
      double f1 = 2.0 * double(both) / double(p + t);
      CHECK(f1 >= std::min(prec, rec) - 1e-12);
      CHECK(f1 <= std::max(prec, rec) + 1e-12);
    }
  }
}

TEST_CASE("label statistics on hand-checked cases") {
  // Every sample has exactly one positive among two labels.
  MatrixXd truth(4, 2);
  truth << 1, -1, -1, 1, 1, -1, -1, 1;
  LabelStats stats = label_stats(truth);
  CHECK(stats.cardinality == doctest::Approx(1.0));
  CHECK(stats.density == doctest::Approx(0.5));

  CHECK_THROWS_AS(label_stats(MatrixXd()), InvalidArgumentError);
  MatrixXd bad = truth;
  bad(0, 0) = 0;
  CHECK_THROWS_AS(label_stats(bad), InvalidArgumentError);
}

TEST_CASE("label statistics stay in their ranges on random inputs") {
  std::mt19937 gen(305);
  for (int trial = 0; trial < 20; ++trial) {
    MatrixXd truth = oracle::random_bipolar(10, 6, gen, 0.3);
    LabelStats stats = label_stats(truth);
    CHECK(stats.cardinality >= 0.0);
    CHECK(stats.cardinality <= 6.0);
    CHECK(stats.density >= 0.0);
    CHECK(stats.density <= 1.0);
    CHECK(stats.density == doctest::Approx(stats.cardinality / 6.0).epsilon(1e-15));
  }
}
