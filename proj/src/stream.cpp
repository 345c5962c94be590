#include "proelm/stream.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <random>
#include <set>
#include <string>

#include "proelm/errors.hpp"
#include "proelm/prediction.hpp"

namespace proelm {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Position of each dataset label column in the plan's introduction order.
std::vector<Index> inverse_permutation(const std::vector<Index>& order) {
  std::vector<Index> inv(order.size());
  for (std::size_t i = 0; i < order.size(); ++i)
    inv[static_cast<std::size_t>(order[i])] = static_cast<Index>(i);
  return inv;
}

// Earliest phase whose introduced prefix covers every positive of the sample;
// prefix[p] = number of labels known after phase p's introduction.
Index earliest_phase(const MatrixXd& targets, Index row, const std::vector<Index>& inv_order,
                     const std::vector<Index>& prefix) {
  Index latest = -1;  // plan position of the sample's latest-introduced positive
  for (Index c = 0; c < targets.cols(); ++c)
    if (targets(row, c) > 0) latest = std::max(latest, inv_order[static_cast<std::size_t>(c)]);
  for (std::size_t p = 0; p < prefix.size(); ++p)
    if (latest < prefix[p]) return static_cast<Index>(p);
  return static_cast<Index>(prefix.size() - 1);
}

Index count_eligible(const MatrixXd& targets, const std::vector<Index>& inv_order,
                     Index initial_labels) {
  Index eligible = 0;
  for (Index r = 0; r < targets.rows(); ++r) {
    bool ok = true;
    for (Index c = 0; c < targets.cols() && ok; ++c)
      if (targets(r, c) > 0 && inv_order[static_cast<std::size_t>(c)] >= initial_labels)
        ok = false;
    if (ok) ++eligible;
  }
  return eligible;
}

}  // namespace

StreamPlan build_stream_plan(const Dataset& ds, const std::vector<Index>& pattern,
                             Index initial_block, Index chunk_size, Seed seed) {
  const Index m = ds.label_count();
  const Index n_samples = ds.sample_count();
  if (pattern.empty()) throw InvalidPatternError("pattern must be nonempty");
  for (Index g : pattern)
    if (g < 1) throw InvalidPatternError("pattern groups must be positive integers");
  const Index pattern_sum = std::accumulate(pattern.begin(), pattern.end(), Index(0));
  if (pattern_sum != m)
    throw InvalidPatternError("pattern sums to " + std::to_string(pattern_sum) +
                              " but the dataset has " + std::to_string(m) + " labels");
  if (initial_block < 1 || initial_block > n_samples)
    throw InvalidArgumentError("initial block size must be in [1, " +
                               std::to_string(n_samples) + "], got " +
                               std::to_string(initial_block));
  if (chunk_size < 1) throw InvalidArgumentError("chunk size must be >= 1");

  // Natural label order first. When that leaves too few samples for the
  // initial block, hold out the labels that occur uniquely least often: a
  // sample whose sole positive is a held-out label must wait for it, so
  // deferring low-unique-occurrence labels blocks the fewest samples. The
  // held-out tail is introduced in ascending unique-occurrence order; the
  // rest keep their natural order up front.
  std::vector<Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Index(0));
  std::vector<Index> inv = inverse_permutation(order);
  if (count_eligible(ds.targets, inv, pattern.front()) < initial_block) {
    std::vector<Index> unique_count(static_cast<std::size_t>(m), 0);
    for (Index r = 0; r < n_samples; ++r) {
      Index sole = -1;
      int positives = 0;
      for (Index c = 0; c < m && positives < 2; ++c)
        if (ds.targets(r, c) > 0) {
          ++positives;
          sole = c;
        }
      if (positives == 1) ++unique_count[static_cast<std::size_t>(sole)];
    }
    std::vector<Index> by_unique = order;
    std::stable_sort(by_unique.begin(), by_unique.end(), [&](Index a, Index b) {
      return unique_count[static_cast<std::size_t>(a)] <
             unique_count[static_cast<std::size_t>(b)];
    });
    const Index held_out = m - pattern.front();
    std::vector<bool> late(static_cast<std::size_t>(m), false);
    for (Index i = 0; i < held_out; ++i)
      late[static_cast<std::size_t>(by_unique[static_cast<std::size_t>(i)])] = true;
    order.clear();
    for (Index c = 0; c < m; ++c)
      if (!late[static_cast<std::size_t>(c)]) order.push_back(c);
    for (Index i = 0; i < held_out; ++i)
      order.push_back(by_unique[static_cast<std::size_t>(i)]);
    inv = inverse_permutation(order);
    const Index eligible = count_eligible(ds.targets, inv, pattern.front());
    if (eligible < initial_block)
      throw InfeasiblePlanError(
          "only " + std::to_string(eligible) + " samples fit within the first " +
              std::to_string(pattern.front()) + " labels; the largest feasible "
              "initial block is " + std::to_string(eligible),
          eligible);
  }

  std::vector<Index> prefix(pattern.size());
  std::partial_sum(pattern.begin(), pattern.end(), prefix.begin());

  std::vector<std::vector<Index>> pools(pattern.size());
  for (Index r = 0; r < n_samples; ++r)
    pools[static_cast<std::size_t>(earliest_phase(ds.targets, r, inv, prefix))].push_back(r);

  std::mt19937 gen(static_cast<std::mt19937::result_type>(seed));
  for (auto& pool : pools) std::shuffle(pool.begin(), pool.end(), gen);

  StreamPlan plan;
  plan.pattern = pattern;
  plan.label_order = order;
  plan.chunk_size = chunk_size;
  plan.seed = seed;
  plan.initial_block.assign(pools[0].begin(), pools[0].begin() + initial_block);

  plan.phases.resize(pattern.size());
  plan.phases[0].samples.assign(pools[0].begin() + initial_block, pools[0].end());
  for (std::size_t p = 1; p < pattern.size(); ++p) {
    for (Index pos = prefix[p - 1]; pos < prefix[p]; ++pos)
      plan.phases[p].introduced_labels.push_back(order[static_cast<std::size_t>(pos)]);
    plan.phases[p].samples = std::move(pools[p]);
  }

  validate_plan(ds, plan);
  return plan;
}

void validate_plan(const Dataset& ds, const StreamPlan& plan) {
  const Index m = ds.label_count();
  const Index pattern_sum =
      std::accumulate(plan.pattern.begin(), plan.pattern.end(), Index(0));
  if (pattern_sum != m)
    throw InvalidPatternError("plan pattern sums to " + std::to_string(pattern_sum) +
                              " but the dataset has " + std::to_string(m) + " labels");
  if (static_cast<Index>(plan.label_order.size()) != m)
    throw InvalidPatternError("plan label_order must be a permutation of all labels");
  {
    std::vector<bool> seen(static_cast<std::size_t>(m), false);
    for (Index c : plan.label_order) {
      if (c < 0 || c >= m || seen[static_cast<std::size_t>(c)])
        throw InvalidPatternError("plan label_order is not a permutation");
      seen[static_cast<std::size_t>(c)] = true;
    }
  }
  if (plan.phases.size() != plan.pattern.size())
    throw InvalidPatternError("plan must have one phase per pattern group");

  const std::vector<Index> inv = inverse_permutation(plan.label_order);
  std::vector<Index> prefix(plan.pattern.size());
  std::partial_sum(plan.pattern.begin(), plan.pattern.end(), prefix.begin());

  auto check_sample_fits = [&](Index row, Index known_labels, const char* where) {
    for (Index c = 0; c < m; ++c)
      if (ds.targets(row, c) > 0 && inv[static_cast<std::size_t>(c)] >= known_labels)
        throw InvalidPatternError(std::string(where) + ": sample " + std::to_string(row) +
                                  " carries label '" +
                                  ds.label_names[static_cast<std::size_t>(c)] +
                                  "' before its introduction");
  };

  std::vector<int> uses(static_cast<std::size_t>(ds.sample_count()), 0);
  for (Index r : plan.initial_block) {
    check_sample_fits(r, plan.pattern.front(), "initial block");
    ++uses[static_cast<std::size_t>(r)];
  }
  for (std::size_t p = 0; p < plan.phases.size(); ++p) {
    if (p == 0 && !plan.phases[0].introduced_labels.empty())
      throw InvalidPatternError("phase 0 must not introduce labels");
    if (p > 0 && static_cast<Index>(plan.phases[p].introduced_labels.size()) !=
                     plan.pattern[p])
      throw InvalidPatternError("phase " + std::to_string(p) + " must introduce " +
                                std::to_string(plan.pattern[p]) + " labels");
    for (Index r : plan.phases[p].samples) {
      check_sample_fits(r, prefix[p], ("phase " + std::to_string(p)).c_str());
      ++uses[static_cast<std::size_t>(r)];
    }
  }
  for (Index r = 0; r < ds.sample_count(); ++r)
    if (uses[static_cast<std::size_t>(r)] != 1)
      throw InvalidPatternError("sample " + std::to_string(r) + " appears " +
                                std::to_string(uses[static_cast<std::size_t>(r)]) +
                                " times across initial block and phases");
}

StreamResult run_stream(const Dataset& ds, const StreamPlan& plan,
                        const HiddenLayer<double>& layer, double ridge,
                        ExpansionMode mode, const StreamOptions& options) {
  if (layer.input_dim() != ds.feature_count())
    throw ShapeError("run_stream: layer expects " + std::to_string(layer.input_dim()) +
                     " features, dataset has " + std::to_string(ds.feature_count()));
  validate_plan(ds, plan);

  const Dataset& eval = options.eval ? *options.eval : ds;
  if (eval.label_count() != ds.label_count())
    throw ShapeError("run_stream: evaluation set has " +
                     std::to_string(eval.label_count()) + " labels, training set has " +
                     std::to_string(ds.label_count()));

  StreamResult result;
  LearningCurve& curve = result.curve;
  if (options.tracked_labels) {
    curve.tracked_labels = *options.tracked_labels;
  } else {
    const Index p0 = plan.initial_label_count();
    for (Index pos = p0; pos < static_cast<Index>(plan.label_order.size()); ++pos)
      curve.tracked_labels.push_back(plan.label_order[static_cast<std::size_t>(pos)]);
  }
  for (Index c : curve.tracked_labels)
    if (c < 0 || c >= ds.label_count())
      throw InvalidArgumentError("run_stream: tracked label index " + std::to_string(c) +
                                 " out of range");

  // Hidden map of the evaluation set is reused for every curve point.
  MatrixXd h_eval;
  if (options.record_curve) h_eval = hidden_map(layer, eval.features);

  // registry_to_ds[i] = dataset column of the i-th known output column.
  std::vector<Index> registry_to_ds;

  auto record_point = [&](const ModelState<double>& state, long long samples_seen) {
    if (!options.record_curve) return;
    MatrixXd pred = MatrixXd::Constant(eval.sample_count(), eval.label_count(), -1.0);
    if (state.label_count() > 0) {
      MatrixXd bipolar = apply_threshold(h_eval * state.beta, options.threshold);
      for (std::size_t i = 0; i < registry_to_ds.size(); ++i)
        pred.col(registry_to_ds[i]) = bipolar.col(static_cast<Index>(i));
    }
    CurvePoint point;
    point.samples_seen = samples_seen;
    point.overall_hamming = hamming_loss(pred, eval.targets);
    point.per_label.reserve(curve.tracked_labels.size());
    for (Index c : curve.tracked_labels)
      point.per_label.push_back(per_label_hamming(pred, eval.targets, c));
    curve.points.push_back(std::move(point));
  };

  const auto rows_of = [&](const std::vector<Index>& idx, Index begin, Index end) {
    std::vector<Index> slice(idx.begin() + begin, idx.begin() + end);
    return slice;
  };

  double train_seconds = 0;
  ModelState<double> state;
  try {
    // Initial block: first pattern[0] labels only.
    const Index p0 = plan.initial_label_count();
    std::vector<std::string> initial_names;
    std::vector<Index> initial_cols;
    for (Index pos = 0; pos < p0; ++pos) {
      Index c = plan.label_order[static_cast<std::size_t>(pos)];
      initial_cols.push_back(c);
      initial_names.push_back(ds.label_names[static_cast<std::size_t>(c)]);
    }

    auto t0 = Clock::now();
    MatrixXd h0 = hidden_map(layer, ds.features(plan.initial_block, Eigen::all));
    MatrixXd y0 = ds.targets(plan.initial_block, initial_cols);
    state = init_batch(h0, y0, ridge, LabelRegistry(initial_names));
    train_seconds += seconds_since(t0);
    registry_to_ds = initial_cols;

    record_point(state, state.samples_seen);

    std::vector<Index> pending_cols;  // introduced but not yet expanded
    auto flush_expansion = [&](const MatrixXd& trigger) {
      if (pending_cols.empty()) return;
      std::vector<std::string> names;
      for (Index c : pending_cols)
        names.push_back(ds.label_names[static_cast<std::size_t>(c)]);
      expand_labels(state, names, mode, trigger);
      registry_to_ds.insert(registry_to_ds.end(), pending_cols.begin(), pending_cols.end());
      pending_cols.clear();
    };

    for (const StreamPhase& phase : plan.phases) {
      pending_cols.insert(pending_cols.end(), phase.introduced_labels.begin(),
                          phase.introduced_labels.end());
      const Index phase_n = static_cast<Index>(phase.samples.size());
      for (Index start = 0; start < phase_n; start += plan.chunk_size) {
        const Index stop = std::min(start + plan.chunk_size, phase_n);
        std::vector<Index> chunk_rows = rows_of(phase.samples, start, stop);

        auto tc = Clock::now();
        MatrixXd h_chunk = hidden_map(layer, ds.features(chunk_rows, Eigen::all));
        flush_expansion(h_chunk);
        MatrixXd y_chunk = ds.targets(chunk_rows, registry_to_ds);
        sequential_update(state, h_chunk, y_chunk);
        train_seconds += seconds_since(tc);

        record_point(state, state.samples_seen);
      }
    }
    // Labels scheduled into trailing empty phases still get their columns.
    if (!pending_cols.empty()) {
      auto tc = Clock::now();
      flush_expansion(MatrixXd(0, layer.hidden_dim()));
      train_seconds += seconds_since(tc);
    }
  } catch (const Error& e) {
    throw StreamRunError(e, std::move(curve));
  }

  result.state = std::move(state);
  result.train_time_s = train_seconds;
  return result;
}

}  // namespace proelm
