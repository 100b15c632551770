/*
 * Copyright 2026 The playgraph Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Experiment protocol: seeded splits, an early-stopped training loop,
// evaluation, repeated trials and paired comparisons against a baseline.

#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "playgraph/checkpoint.hpp"
#include "playgraph/metrics.hpp"
#include "playgraph/model.hpp"
#include "playgraph/random.hpp"
#include "playgraph/state_io.hpp"
#include "playgraph/stats.hpp"

namespace playgraph {

// ---------------------------------------------------------------------------
// Splits

enum class Grouping { by_state, by_play_or_round };

struct SplitConfig {
  double train = 0.70;
  double val = 0.10;
  double test = 0.20;
  std::uint64_t seed = 0;
  Grouping grouping = Grouping::by_state;
};

struct Split {
  std::vector<GameState> train, val, test;
};

/// Seeded shuffle then partition. Sizes are floor(n * train), floor(n * val)
/// and the remainder, counted in states or in groups.
inline Split split_dataset(std::span<const GameState> states, const SplitConfig& cfg) {
  if (std::abs(cfg.train + cfg.val + cfg.test - 1.0) > 1e-9 || cfg.train < 0 || cfg.val < 0 ||
      cfg.test < 0)
    throw ContractError("split_dataset: fractions must be non-negative and sum to 1");
  if (states.size() < 10)
    throw ContractError("split_dataset: need at least 10 states, got " +
                        std::to_string(states.size()));

  // units are single states or whole groups, in first-appearance order
  std::vector<std::vector<std::size_t>> units;
  if (cfg.grouping == Grouping::by_state) {
    for (std::size_t i = 0; i < states.size(); ++i) units.push_back({i});
  } else {
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < states.size(); ++i) {
      const std::string key =
          states[i].group.empty() ? "\x01state-" + std::to_string(i) : states[i].group;
      auto [it, fresh] = index.emplace(key, units.size());
      if (fresh) units.emplace_back();
      units[it->second].push_back(i);
    }
  }
  std::vector<std::size_t> order(units.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(cfg.seed);
  rng.shuffle(order);

  const auto n = static_cast<double>(units.size());
  // small epsilon keeps 0.7 * 100 from flooring to 69
  const auto n_train = static_cast<std::size_t>(std::floor(cfg.train * n + 1e-9));
  const auto n_val = static_cast<std::size_t>(std::floor(cfg.val * n + 1e-9));
  Split out;
  for (std::size_t k = 0; k < order.size(); ++k) {
    auto& dst = k < n_train ? out.train : k < n_train + n_val ? out.val : out.test;
    for (std::size_t i : units[order[k]]) dst.push_back(states[i]);
  }
  return out;
}

/// FNV-1a over the serialized states; identifies a split in reports.
inline std::string states_hash(std::span<const GameState> states) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& s : states) {
    for (unsigned char c : to_json(s).dump()) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    h ^= '\n';
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// Training

struct TrainConfig {
  std::size_t max_epochs = 60;
  std::size_t patience = 10;
  /// 0 picks the task default: 32 for regression, 512 for classification.
  std::size_t batch_size = 0;
  AdamConfig adam;
  /// Receives one line per epoch when set.
  std::function<void(const std::string&)> progress;

  std::size_t effective_batch(Task t) const {
    if (batch_size) return batch_size;
    return t == Task::regression ? 32 : 512;
  }
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct TrainResult {
  Model model;  // best-validation parameters
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  double best_val_loss = 0.0;
};

/// Thrown when training diverges; carries the last model that had a finite
/// validation loss.
class TrainingDiverged : public DivergenceError {
 public:
  TrainingDiverged(const std::string& what, Model last_good)
      : DivergenceError(what), last_good(std::move(last_good)) {}
  Model last_good;
};

inline Task task_for(Sport s) { return s == Sport::nfl ? Task::regression : Task::classification; }

/// Fits node and state schemas on the training split only.
inline void fit_schemas(Model& m, std::span<const GameState> train) {
  std::vector<Matrix> nodes, vecs;
  for (const auto& s : train) {
    if (has_graph_branch(m.spec.variant))
      nodes.push_back(build_graph(s, m.spec.edge_mode, m.spec.featurizer).node_features);
    if (has_state_branch(m.spec.variant))
      vecs.push_back(Matrix::row_vector(featurize_state_vector(s)));
  }
  if (!nodes.empty()) m.node_schema.fit(nodes);
  if (!vecs.empty()) m.state_schema.fit(vecs);
}

inline std::vector<Example> make_examples(const Model& m, std::span<const GameState> states) {
  std::vector<Example> out;
  out.reserve(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (!states[i].outcome) throw DataError("training state has no outcome", i, "outcome");
    out.push_back({prepare_input(m, states[i]), *states[i].outcome});
  }
  return out;
}

/// Model with schemas fitted on `train` and, for regression, the output
/// affine set to the training label mean and standard deviation.
inline Model init_model(ModelSpec spec, std::span<const GameState> train) {
  if (train.empty()) throw ContractError("init_model: empty training set");
  const Sport sport = sport_of(train.front());
  Model m = build_model(spec, node_schema_for(sport, spec.featurizer), state_schema_for(sport));
  fit_schemas(m, train);
  if (spec.task == Task::regression) {
    double mean = 0.0;
    for (const auto& s : train) mean += s.outcome.value_or(0.0);
    mean /= static_cast<double>(train.size());
    double ss = 0.0;
    for (const auto& s : train) ss += (s.outcome.value_or(0.0) - mean) * (s.outcome.value_or(0.0) - mean);
    const double sd = std::sqrt(ss / static_cast<double>(train.size()));
    m.target_mean = mean;
    m.target_scale = sd > 1e-12 ? sd : 1.0;
  }
  return m;
}

/// Runs epochs over already-prepared examples with validation early stopping.
inline TrainResult train_examples(Model model, std::span<const Example> train,
                                  std::span<const Example> val, const TrainConfig& cfg) {
  if (train.empty()) throw ContractError("train_model: empty training set");
  if (val.empty()) throw ContractError("train_model: empty validation set");
  model.reset_optimizer(cfg.adam);
  const std::size_t batch = cfg.effective_batch(model.spec.task);
  Rng rng(derive_seed(model.spec.seed, 0x7261696eULL));
  std::vector<std::size_t> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  TrainResult r{model, {}, 0, batch_loss(model, val)};
  std::size_t since_best = 0;
  std::vector<Example> buf;
  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    rng.shuffle(order);
    double total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      buf.clear();
      for (std::size_t k = start; k < end; ++k) buf.push_back(train[order[k]]);
      try {
        total += backward_step(model, buf) * static_cast<double>(end - start);
      } catch (const DivergenceError& e) {
        throw TrainingDiverged("epoch " + std::to_string(epoch) + ": " + e.what(), r.model);
      }
    }
    const double val_loss = batch_loss(model, val);
    if (!std::isfinite(val_loss))
      throw TrainingDiverged("epoch " + std::to_string(epoch) + ": non-finite validation loss",
                             r.model);
    r.history.push_back({epoch, total / static_cast<double>(train.size()), val_loss});
    if (cfg.progress)
      cfg.progress("epoch " + std::to_string(epoch) + " train " +
                   std::to_string(r.history.back().train_loss) + " val " + std::to_string(val_loss));
    if (val_loss < r.best_val_loss) {
      r.best_val_loss = val_loss;
      r.best_epoch = epoch;
      r.model = model;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  return r;
}

inline TrainResult train_model(const ModelSpec& spec, std::span<const GameState> train,
                               std::span<const GameState> val, const TrainConfig& cfg = {}) {
  if (train.empty()) throw ContractError("train_model: empty training set");
  if (val.empty()) throw ContractError("train_model: empty validation set");
  Model m = init_model(spec, train);
  const auto tr = make_examples(m, train);
  const auto va = make_examples(m, val);
  return train_examples(std::move(m), tr, va, cfg);
}

// ---------------------------------------------------------------------------
// Evaluation

struct Metrics {
  Task task = Task::regression;
  std::size_t n = 0;
  double mse = 0.0;
  double mae = 0.0;
  double log_loss = 0.0;
  std::optional<double> auc;
  /// Why auc is absent, when it is.
  std::string note;
};

inline Metrics metrics_from(Task task, std::span<const double> pred, std::span<const double> y) {
  Metrics m;
  m.task = task;
  m.n = pred.size();
  if (task == Task::regression) {
    m.mse = loss_mse(pred, y);
    m.mae = loss_mae(pred, y);
  } else {
    m.log_loss = loss_bce(pred, y);
    try {
      m.auc = metric_auc(pred, y);
    } catch (const UndefinedMetric& e) {
      m.note = e.what();
    }
  }
  return m;
}

inline Metrics evaluate(const Model& model, std::span<const GameState> test, Task task) {
  require_task(model, task);
  if (test.empty()) throw ContractError("evaluate: empty test set");
  std::vector<double> pred, y;
  for (std::size_t i = 0; i < test.size(); ++i) {
    if (!test[i].outcome) throw DataError("test state has no outcome", i, "outcome");
    pred.push_back(predict(model, test[i]).value);
    y.push_back(*test[i].outcome);
  }
  return metrics_from(task, pred, y);
}

/// Per-partition metrics and their count-weighted mean.
struct PartitionedMetrics {
  std::map<std::string, Metrics> per_partition;
  Metrics weighted;
};

inline PartitionedMetrics evaluate_by_partition(const Model& model,
                                                std::span<const GameState> test, Task task) {
  std::map<std::string, std::vector<GameState>> parts;
  for (const auto& s : test) parts[s.partition_key].push_back(s);
  PartitionedMetrics out;
  out.weighted.task = task;
  double auc_weight = 0.0, auc_sum = 0.0;
  for (const auto& [key, states] : parts) {
    Metrics m = evaluate(model, states, task);
    const double w = static_cast<double>(m.n);
    out.weighted.n += m.n;
    out.weighted.mse += w * m.mse;
    out.weighted.mae += w * m.mae;
    out.weighted.log_loss += w * m.log_loss;
    if (m.auc) {
      auc_sum += w * *m.auc;
      auc_weight += w;
    }
    out.per_partition.emplace(key, std::move(m));
  }
  const double n = static_cast<double>(out.weighted.n);
  out.weighted.mse /= n;
  out.weighted.mae /= n;
  out.weighted.log_loss /= n;
  if (auc_weight > 0.0) out.weighted.auc = auc_sum / auc_weight;
  return out;
}

inline Json to_json(const Metrics& m) {
  Json j;
  if (m.task == Task::regression) {
    j["mse"] = m.mse;
    j["mae"] = m.mae;
  } else {
    j["log_loss"] = m.log_loss;
    j["auc"] = m.auc ? Json(*m.auc) : Json(nullptr);
    if (!m.note.empty()) j["note"] = m.note;
  }
  j["n"] = m.n;
  return j;
}

/// Headline metric compared across models: MSE or log loss.
inline double primary_metric(const Metrics& m) {
  return m.task == Task::regression ? m.mse : m.log_loss;
}

// ---------------------------------------------------------------------------
// Trials

struct LabeledSpec {
  std::string label;
  ModelSpec spec;
};

struct TrialConfig {
  std::size_t n_trials = 30;
  std::uint64_t base_seed = 0;
  SplitConfig split;
  TrainConfig train;
  std::function<void(const std::string&)> progress;
};

struct ModelRow {
  std::string label;
  ModelSpec spec;
  Metrics metrics;
  std::string test_hash;
  std::size_t best_epoch = 0;
  double wall_seconds = 0.0;
};

struct TrialReport {
  std::size_t trial_index = 0;
  std::uint64_t split_seed = 0;
  std::string test_hash;
  std::size_t train_size = 0, val_size = 0, test_size = 0;
  std::vector<ModelRow> models;
  double wall_seconds = 0.0;
};

/// One trial: split with seed base + i, then train and test every spec on it.
/// Each model's seed is derived from the split seed and its position, so
/// trials are independent of each other and of execution order.
inline TrialReport run_trial(std::span<const LabeledSpec> specs, std::span<const GameState> dataset,
                             const TrialConfig& cfg, std::size_t trial) {
  const auto t0 = std::chrono::steady_clock::now();
  SplitConfig sc = cfg.split;
  sc.seed = cfg.base_seed + trial;
  const Split split = split_dataset(dataset, sc);
  TrialReport rep;
  rep.trial_index = trial;
  rep.split_seed = sc.seed;
  rep.test_hash = states_hash(split.test);
  rep.train_size = split.train.size();
  rep.val_size = split.val.size();
  rep.test_size = split.test.size();
  for (std::size_t k = 0; k < specs.size(); ++k) {
    const auto m0 = std::chrono::steady_clock::now();
    ModelSpec spec = specs[k].spec;
    spec.seed = derive_seed(sc.seed, k);
    TrainResult tr;
    const std::string where = "trial " + std::to_string(trial) + ", model " + specs[k].label + ": ";
    // add the trial context without changing the error's type
    try {
      tr = train_model(spec, split.train, split.val, cfg.train);
    } catch (const TrainingDiverged& e) {
      throw TrainingDiverged(where + e.what(), e.last_good);
    } catch (const ValidationError& e) {
      throw e.with_prefix(where);
    } catch (const DataError& e) {
      throw e.with_prefix(where);
    } catch (const ContractError& e) {
      throw ContractError(where + e.what());
    } catch (const SchemaMismatch& e) {
      throw SchemaMismatch(where + e.what());
    } catch (const Error& e) {
      throw Error(where + e.what());
    }
    ModelRow row;
    row.label = specs[k].label;
    row.spec = spec;
    row.metrics = evaluate(tr.model, split.test, spec.task);
    row.test_hash = states_hash(split.test);
    row.best_epoch = tr.best_epoch;
    row.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - m0).count();
    if (cfg.progress)
      cfg.progress("trial " + std::to_string(trial) + " " + row.label + " " +
                   (spec.task == Task::regression ? "mse " : "log_loss ") +
                   std::to_string(primary_metric(row.metrics)) + " (" +
                   std::to_string(row.wall_seconds) + " s, best epoch " +
                   std::to_string(row.best_epoch) + ")");
    rep.models.push_back(std::move(row));
  }
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

inline std::vector<TrialReport> run_trials(std::span<const LabeledSpec> specs,
                                           std::span<const GameState> dataset,
                                           const TrialConfig& cfg) {
  if (specs.empty()) throw ContractError("run_trials: no models");
  if (cfg.n_trials == 0) throw ContractError("run_trials: n_trials must be >= 1");
  std::vector<TrialReport> out;
  for (std::size_t i = 0; i < cfg.n_trials; ++i) out.push_back(run_trial(specs, dataset, cfg, i));
  return out;
}

/// The five candidate models in table order.
inline std::vector<LabeledSpec> candidate_specs(Task task, const ModelSpec& base = {}) {
  std::vector<LabeledSpec> out;
  for (Variant v : kAllVariants) {
    ModelSpec s = base;
    s.variant = v;
    s.task = task;
    s.edge_mode = edge_mode_for(v);
    out.push_back({to_string(v), s});
  }
  return out;
}

/// GAT models differing only in head count.
inline std::vector<LabeledSpec> head_ablation_specs(Task task, std::span<const std::size_t> heads,
                                                    const ModelSpec& base = {}) {
  std::vector<LabeledSpec> out;
  for (std::size_t k : heads) {
    ModelSpec s = base;
    s.variant = Variant::gat;
    s.task = task;
    s.edge_mode = EdgeMode::constant;
    s.heads = k;
    out.push_back({"gat_heads_" + std::to_string(k), s});
  }
  return out;
}

struct ComparisonRow {
  std::string label;
  double mean_primary = 0.0;
  double mean_secondary = 0.0;  // MAE or AUC
  std::optional<TTestResult> t_test;  // vs the baseline (first) model
  std::string note;
};

/// Mean metrics per model and paired t-tests of every model against the
/// first one, on the headline metric.
inline std::vector<ComparisonRow> compare_to_baseline(std::span<const TrialReport> reports) {
  std::vector<ComparisonRow> rows;
  if (reports.empty()) return rows;
  const std::size_t n_models = reports.front().models.size();
  std::vector<std::vector<double>> primary(n_models);
  for (const auto& rep : reports)
    for (std::size_t k = 0; k < n_models; ++k) primary[k].push_back(primary_metric(rep.models[k].metrics));
  for (std::size_t k = 0; k < n_models; ++k) {
    ComparisonRow row;
    row.label = reports.front().models[k].label;
    double sec = 0.0;
    std::size_t sec_n = 0;
    for (const auto& rep : reports) {
      const Metrics& m = rep.models[k].metrics;
      row.mean_primary += primary_metric(m);
      if (m.task == Task::regression) {
        sec += m.mae;
        ++sec_n;
      } else if (m.auc) {
        sec += *m.auc;
        ++sec_n;
      }
    }
    row.mean_primary /= static_cast<double>(reports.size());
    row.mean_secondary = sec_n ? sec / static_cast<double>(sec_n) : 0.0;
    if (k > 0) {
      if (reports.size() < 2) {
        row.note = "single trial; no t-test";
      } else {
        try {
          row.t_test = paired_t_test(primary[0], primary[k]);
        } catch (const Error& e) {
          row.note = e.what();
        }
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Json to_json(const TTestResult& t) {
  return {{"t", t.t_statistic},
          {"p", t.p_value},
          {"p_two_sided", t.p_two_sided},
          {"df", t.df},
          {"mean_difference", t.mean_difference}};
}

/// Deterministic JSON: wall-clock times are left out so reruns are
/// byte-identical.
inline Json trials_to_json(std::span<const TrialReport> reports, const Json& config = nullptr) {
  Json j;
  j["schema_version"] = 1;
  if (!config.is_null()) j["config"] = config;
  Json trials = Json::array();
  for (const auto& r : reports) {
    Json t;
    t["trial"] = r.trial_index;
    t["split_seed"] = r.split_seed;
    t["test_hash"] = r.test_hash;
    t["sizes"] = {{"train", r.train_size}, {"val", r.val_size}, {"test", r.test_size}};
    Json models = Json::array();
    for (const auto& m : r.models)
      models.push_back({{"model", m.label},
                        {"variant", to_string(m.spec.variant)},
                        {"heads", m.spec.heads},
                        {"model_seed", m.spec.seed},
                        {"best_epoch", m.best_epoch},
                        {"test_hash", m.test_hash},
                        {"metrics", to_json(m.metrics)}});
    t["models"] = models;
    trials.push_back(t);
  }
  j["trials"] = trials;
  Json summary = Json::array();
  for (const auto& row : compare_to_baseline(reports)) {
    Json s;
    s["model"] = row.label;
    s["mean_primary"] = row.mean_primary;
    s["mean_secondary"] = row.mean_secondary;
    s["t_test"] = row.t_test ? to_json(*row.t_test) : Json(nullptr);
    if (!row.note.empty()) s["note"] = row.note;
    summary.push_back(s);
  }
  j["baseline"] = reports.empty() ? Json(nullptr) : Json(reports.front().models.front().label);
  j["summary"] = summary;
  return j;
}

namespace detail {
inline std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}
inline std::string pad(std::string s, std::size_t w) {
  if (s.size() < w) s.insert(0, w - s.size(), ' ');
  return s;
}
}  // namespace detail

/// Model | MSE | MAE (or Log Loss | AUC) | t | p, one row per model.
inline std::string render_comparison_table(std::span<const TrialReport> reports) {
  if (reports.empty()) return {};
  const bool reg = reports.front().models.front().metrics.task == Task::regression;
  std::string out = detail::pad("Model", 14) + detail::pad(reg ? "MSE" : "Log Loss", 10) +
                    detail::pad(reg ? "MAE" : "AUC", 10) + detail::pad("t", 9) +
                    detail::pad("p", 9) + "\n";
  for (const auto& row : compare_to_baseline(reports)) {
    std::string label = row.label;
    if (auto v = parse_variant(label)) label = display_name(*v);
    out += detail::pad(label, 14) + detail::pad(detail::fixed(row.mean_primary, reg ? 2 : 4), 10) +
           detail::pad(detail::fixed(row.mean_secondary, reg ? 2 : 4), 10);
    if (row.t_test)
      out += detail::pad(detail::fixed(row.t_test->t_statistic, 2), 9) +
             detail::pad(detail::fixed(row.t_test->p_value, 4), 9);
    else
      out += detail::pad("--", 9) + detail::pad("--", 9);
    out += "\n";
  }
  return out;
}

/// Attention Heads | MSE | t-statistic | p (two-sided), against the first row.
inline std::string render_heads_table(std::span<const TrialReport> reports) {
  std::string out = detail::pad("Attention Heads", 16) + detail::pad("MSE", 10) +
                    detail::pad("t-statistic", 13) + detail::pad("p", 9) + "\n";
  if (reports.empty()) return out;
  const auto rows = compare_to_baseline(reports);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out += detail::pad(std::to_string(reports.front().models[k].spec.heads), 16) +
           detail::pad(detail::fixed(rows[k].mean_primary, 2), 10);
    if (rows[k].t_test)
      out += detail::pad(detail::fixed(rows[k].t_test->t_statistic, 2), 13) +
             detail::pad(detail::fixed(rows[k].t_test->p_two_sided, 3), 9);
    else
      out += detail::pad("--", 13) + detail::pad("--", 9);
    out += "\n";
  }
  return out;
}

}  // namespace playgraph
