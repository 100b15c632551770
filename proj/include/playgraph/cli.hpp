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

// Command-line front end. JSON results go to `out`, progress and errors to
// `err`. Exit codes: 0 success, 1 usage, 2 data, 3 runtime.

#pragma once

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "playgraph/checkpoint.hpp"
#include "playgraph/config.hpp"
#include "playgraph/service.hpp"
#include "playgraph/synthetic.hpp"
#include "playgraph/training.hpp"
#include "playgraph/whatif.hpp"

namespace playgraph {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitRuntime = 3;

class UsageError : public Error {
 public:
  using Error::Error;
};

namespace detail {

/// Flags shared by every subcommand that map onto RunConfig keys.
struct ConfigFlags {
  std::optional<std::string> config;
  std::vector<std::pair<const char*, std::optional<std::string>>> values{
      {"seed", {}},          {"task", {}},           {"model.variant", {}},
      {"model.edge_mode", {}}, {"model.heads", {}},  {"trials.n_trials", {}},
      {"service.bind", {}},  {"service.port", {}},   {"data.n", {}},
      {"data.noise_std", {}}, {"data.interaction_strength", {}},
      {"train.max_epochs", {}}, {"log.level", {}}};
  std::vector<std::string> sets;

  void attach(CLI::App* app) {
    static const char* names[] = {"--seed", "--task", "--variant", "--edge-mode", "--heads",
                                  "--n-trials", "--bind", "--port", "--n", "--noise",
                                  "--interaction-strength", "--epochs", "--log-level"};
    static const char* help[] = {"base random seed",
                                 "rush (yards regression) or round (win classification)",
                                 "state, gcn, gat, gcn_state or gat_state",
                                 "constant, inverse_distance or auto",
                                 "attention heads per GAT layer",
                                 "number of trials",
                                 "service bind address",
                                 "service port",
                                 "number of synthetic states",
                                 "label noise standard deviation",
                                 "weight of the positional interaction term in [0, 1]",
                                 "maximum training epochs",
                                 "quiet, info or debug"};
    app->add_option("--config", config, "TOML-style configuration file");
    for (std::size_t i = 0; i < values.size(); ++i)
      app->add_option(names[i], values[i].second, help[i]);
    app->add_option("--set", sets, "override any config key, as key=value");
  }

  RunConfig resolve() const {
    std::vector<std::pair<std::string, std::string>> flags;
    for (const auto& [k, v] : values)
      if (v) flags.emplace_back(k, *v);
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + s + "'");
      flags.emplace_back(s.substr(0, eq), s.substr(eq + 1));
    }
    try {
      return resolve_config(flags, config);
    } catch (const DataError& e) {
      throw UsageError(std::string("configuration: ") + e.what());
    }
  }
};

struct Logger {
  std::ostream* err;
  std::string level = "info";
  void info(const std::string& m) const {
    if (level != "quiet") *err << m << "\n";
  }
  void debug(const std::string& m) const {
    if (level == "debug") *err << m << "\n";
  }
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Json parse_json_text(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw DataError(what + ": malformed JSON (" + e.what() + ")");
  }
}

/// One state object from a .json file, or the first record of a .jsonl file.
inline GameState load_single_state(const std::string& path) {
  const std::string text = read_file(path);
  std::istringstream in(text);
  std::string first;
  while (std::getline(in, first) && first.find_first_not_of(" \t\r") == std::string::npos) {
  }
  // a pretty-printed object spans lines; a JSONL file has one object per line
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error&) {
    j = parse_json_text(first, path);
  }
  try {
    return state_from_json(j, DataError::npos);
  } catch (const ValidationError& e) {
    throw e.with_prefix(path + ": ");
  } catch (const DataError& e) {
    throw e.with_prefix(path + ": ");
  }
}

/// Dataset from --data, or synthetic states from the config.
inline std::vector<GameState> dataset_for(const RunConfig& cfg, const std::string& data_path,
                                          const Logger& log) {
  if (!data_path.empty()) {
    ParseOptions opt;
    opt.validation.require_outcome = true;
    opt.warn = [&](const std::string& m) { log.info("warning: " + m); };
    auto states = load_states(data_path, opt);
    log.info("loaded " + std::to_string(states.size()) + " states from " + data_path);
    return states;
  }
  log.info("generating " + std::to_string(cfg.data_n) + " synthetic " + to_string(cfg.task) +
           " states (seed " + std::to_string(cfg.seed) + ")");
  return gen_states(cfg.synthetic());
}

/// Model spec for `states`: task follows the sport of the data.
inline ModelSpec spec_for_data(const RunConfig& cfg, const std::vector<GameState>& states) {
  ModelSpec spec = cfg.model_spec();
  if (!states.empty()) {
    const Sport sport = sport_of(states.front());
    spec.task = task_for(sport);
    if (sport == Sport::csgo && !spec.featurizer.bombsite_a)
      spec.featurizer = synthetic_round_featurizer();
  }
  return spec;
}

inline void write_output(std::ostream& out, const Json& j) { out << j.dump() << "\n"; }

}  // namespace detail

/// Parses `argv` and runs one subcommand.
inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
  CLI::App app{"playgraph: graph models of sports game states"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "show help for every subcommand");

  detail::ConfigFlags flags;
  std::string out_path, data_path, model_path, state_path, perturbation, player_id;
  std::string grid_text, reduction = "column_mean";
  std::vector<std::string> models;
  std::vector<std::size_t> heads_list;
  bool table = false, check_bounds = false;

  auto* gen = app.add_subcommand("gen-data", "write synthetic states as newline-delimited JSON");
  flags.attach(gen);
  gen->add_option("--out", out_path, "output file (default: standard output)");

  auto* train = app.add_subcommand("train", "train one model and save a checkpoint");
  flags.attach(train);
  train->add_option("--data", data_path, "JSONL dataset (default: synthetic from config)");
  train->add_option("--out", out_path, "checkpoint path")->required();

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
  flags.attach(eval);
  eval->add_option("--model", model_path, "checkpoint path")->required();
  eval->add_option("--data", data_path, "JSONL dataset with outcomes")->required();

  auto* trials = app.add_subcommand("trials", "repeated split/train/test with paired t-tests");
  flags.attach(trials);
  trials->add_option("--data", data_path, "JSONL dataset (default: synthetic from config)");
  trials->add_option("--models", models, "variants to compare; the first is the baseline");
  trials->add_option("--heads-ablation", heads_list, "compare GAT models with these head counts");
  trials->add_flag("--table", table, "print the comparison table instead of JSON");
  trials->add_option("--out", out_path, "also write the JSON report here");

  auto* pred = app.add_subcommand("predict", "predict one state");
  flags.attach(pred);
  pred->add_option("--model", model_path, "checkpoint path")->required();
  pred->add_option("--state", state_path, "state JSON file")->required();

  auto* wi = app.add_subcommand("whatif", "re-predict after editing one player");
  flags.attach(wi);
  wi->add_option("--model", model_path, "checkpoint path")->required();
  wi->add_option("--state", state_path, "state JSON file")->required();
  wi->add_option("--perturbation", perturbation, "perturbation JSON, inline or @file")->required();
  wi->add_flag("--check-bounds", check_bounds, "reject positions outside the field");
  wi->add_option("--attention", reduction, "column_mean or row_mean summary of attention");

  auto* sweep = app.add_subcommand("sweep", "rank grid positions for one player");
  flags.attach(sweep);
  sweep->add_option("--model", model_path, "checkpoint path")->required();
  sweep->add_option("--state", state_path, "state JSON file")->required();
  sweep->add_option("--player", player_id, "player to move")->required();
  sweep->add_option("--grid", grid_text, "x0,x1,y0,y1,nx,ny")->required();

  auto* serve = app.add_subcommand("serve", "run the HTTP inference service");
  flags.attach(serve);
  serve->add_option("--model", model_path, "checkpoint path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  detail::Logger log{&err};
  try {
    const RunConfig cfg = flags.resolve();
    log.level = cfg.log_level;

    if (gen->parsed()) {
      const auto states = gen_states(cfg.synthetic());
      if (out_path.empty()) {
        write_states(out, states);
      } else {
        save_states(out_path, states);
        log.info("wrote " + std::to_string(states.size()) + " states to " + out_path);
      }
      return kExitOk;
    }

    if (train->parsed()) {
      const auto states = detail::dataset_for(cfg, data_path, log);
      SplitConfig sc;
      sc.seed = cfg.seed;
      const Split split = split_dataset(states, sc);
      TrainConfig tc = cfg.train();
      tc.progress = [&](const std::string& m) { log.debug(m); };
      ModelSpec spec = detail::spec_for_data(cfg, states);
      log.info("training " + display_name(spec.variant) + " on " +
               std::to_string(split.train.size()) + " states");
      const TrainResult r = train_model(spec, split.train, split.val, tc);
      save_checkpoint(r.model, out_path);
      log.info("saved " + out_path + " (best epoch " + std::to_string(r.best_epoch) + ")");
      Json j;
      j["schema_version"] = kApiSchemaVersion;
      j["config"] = to_json(cfg);
      j["spec"] = to_json(spec);
      j["checkpoint"] = out_path;
      j["best_epoch"] = r.best_epoch;
      j["best_val_loss"] = r.best_val_loss;
      Json hist = Json::array();
      for (const auto& e : r.history)
        hist.push_back({{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"val_loss", e.val_loss}});
      j["history"] = hist;
      j["test"] = to_json(evaluate(r.model, split.test, spec.task));
      j["test_hash"] = states_hash(split.test);
      detail::write_output(out, j);
      return kExitOk;
    }

    if (eval->parsed()) {
      const Model m = load_checkpoint(model_path);
      const auto states = detail::dataset_for(cfg, data_path, log);
      const auto parts = evaluate_by_partition(m, states, m.spec.task);
      Json j;
      j["schema_version"] = kApiSchemaVersion;
      j["config"] = to_json(cfg);
      j["checkpoint"] = model_path;
      j["metrics"] = to_json(evaluate(m, states, m.spec.task));
      Json per = Json::object();
      for (const auto& [k, v] : parts.per_partition) per[k] = to_json(v);
      j["per_partition"] = per;
      j["partition_weighted"] = to_json(parts.weighted);
      detail::write_output(out, j);
      return kExitOk;
    }

    if (trials->parsed()) {
      const auto states = detail::dataset_for(cfg, data_path, log);
      const ModelSpec base = detail::spec_for_data(cfg, states);
      std::vector<LabeledSpec> specs;
      if (!heads_list.empty()) {
        if (!models.empty()) throw UsageError("--models and --heads-ablation are exclusive");
        specs = head_ablation_specs(base.task, heads_list, base);
      } else if (models.empty()) {
        specs = candidate_specs(base.task, base);
      } else {
        for (const auto& name : models) {
          auto v = parse_variant(name);
          if (!v) throw UsageError("unknown variant '" + name + "'");
          ModelSpec s = base;
          s.variant = *v;
          s.edge_mode = cfg.model_edge_mode.value_or(edge_mode_for(*v));
          specs.push_back({name, s});
        }
      }
      TrialConfig tc;
      tc.n_trials = cfg.n_trials();
      tc.base_seed = cfg.seed;
      tc.train = cfg.train();
      tc.train.progress = [&](const std::string& m) { log.debug(m); };
      tc.progress = [&](const std::string& m) { log.info(m); };
      const auto reports = run_trials(specs, states, tc);
      const Json j = trials_to_json(reports, to_json(cfg));
      if (!out_path.empty()) {
        std::ofstream f(out_path, std::ios::binary);
        if (!f) throw DataError("cannot write '" + out_path + "'");
        f << j.dump(2) << "\n";
      }
      if (table)
        out << (heads_list.empty() ? render_comparison_table(reports) : render_heads_table(reports));
      else
        out << j.dump(2) << "\n";
      return kExitOk;
    }

    if (pred->parsed()) {
      const Model m = load_checkpoint(model_path);
      detail::write_output(out, predict_json(m, detail::load_single_state(state_path)));
      return kExitOk;
    }

    if (wi->parsed()) {
      const Model m = load_checkpoint(model_path);
      const GameState s = detail::load_single_state(state_path);
      const std::string text =
          !perturbation.empty() && perturbation.front() == '@' ? detail::read_file(perturbation.substr(1))
                                                               : perturbation;
      const Perturbation p = perturbation_from_json(detail::parse_json_text(text, "--perturbation"));
      if (reduction != "column_mean" && reduction != "row_mean")
        throw UsageError("--attention expects column_mean or row_mean");
      detail::write_output(out, whatif_json(m, s, p, check_bounds,
                                            reduction == "row_mean"
                                                ? AttentionReduction::row_mean
                                                : AttentionReduction::column_mean));
      return kExitOk;
    }

    if (sweep->parsed()) {
      const Model m = load_checkpoint(model_path);
      const GameState s = detail::load_single_state(state_path);
      std::vector<double> v;
      std::stringstream ss(grid_text);
      for (std::string item; std::getline(ss, item, ',');) {
        try {
          v.push_back(std::stod(item));
        } catch (const std::exception&) {
          throw UsageError("--grid expects numbers, got '" + item + "'");
        }
      }
      if (v.size() != 6 || v[4] < 1 || v[5] < 1)
        throw UsageError("--grid expects x0,x1,y0,y1,nx,ny with nx, ny >= 1");
      if (v[4] * v[5] > static_cast<double>(kMaxSweepCells))
        throw UsageError("--grid has more than " + std::to_string(kMaxSweepCells) + " cells");
      GridSpec g{v[0], v[1], v[2], v[3], static_cast<std::size_t>(v[4]),
                 static_cast<std::size_t>(v[5])};
      detail::write_output(out, sweep_json(m, s, player_id, grid_points(g)));
      return kExitOk;
    }

    if (serve->parsed()) {
      auto model = std::make_shared<const Model>(load_checkpoint(model_path));
      httplib::Server server;
      install_routes(server, model, [&](const std::string& m) { log.info(m); });
      log.info("serving " + display_name(model->spec.variant) + " on http://" + cfg.service_bind +
               ":" + std::to_string(cfg.service_port));
      if (!server.listen(cfg.service_bind, cfg.service_port)) {
        err << "error: cannot listen on " << cfg.service_bind << ":" << cfg.service_port << "\n";
        return kExitRuntime;
      }
      return kExitOk;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ContractError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const SchemaMismatch& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const CheckpointError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace playgraph
