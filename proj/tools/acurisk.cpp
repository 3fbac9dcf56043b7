// Copyright 2026 The Acurisk Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "acu/pipeline.hpp"

namespace {

void apply_seed_override(acu::RunConfig& cfg, const std::string& spec) {
  auto eq = spec.find('=');
  if (eq == std::string::npos)
    throw std::invalid_argument("--seed-override expects name=int, got '" +
                                spec + "'");
  std::string name = spec.substr(0, eq);
  std::string value_str = spec.substr(eq + 1);
  std::uint64_t value = 0;
  try {
    size_t pos = 0;
    value = std::stoull(value_str, &pos);
    if (pos != value_str.size()) throw std::invalid_argument(value_str);
  } catch (const std::exception&) {
    throw std::invalid_argument("--seed-override value is not an integer: '" +
                                value_str + "'");
  }
  if (name == "fold")
    cfg.seeds.fold = value;
  else if (name == "bootstrap")
    cfg.seeds.bootstrap = value;
  else if (name == "generator")
    cfg.seeds.generator = value;
  else if (name == "encoder")
    cfg.seeds.encoder = value;
  else
    throw std::invalid_argument(
        "--seed-override name must be one of fold/bootstrap/generator/"
        "encoder, got '" +
        name + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ACU risk pipeline: cohort -> features -> models -> report"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> seed_overrides;
  std::string only_model;
  int jobs = 1;
  bool svg = false;

  struct SubSpec {
    const char* name;
    const char* desc;
  };
  static const SubSpec subs[] = {
      {"generate", "write a synthetic cohort from the config's synthetic block"},
      {"prep", "select notes, preprocess, build vocabulary and TF-IDF features"},
      {"train", "fit the requested models on the training split"},
      {"eval", "score models and write bootstrap metrics + calibration"},
      {"dca", "decision-curve analysis on the test split"},
      {"km", "tertile-stratified Kaplan-Meier and log-rank test"},
      {"fairness", "subgroup ECDFs of risk percentiles"},
      {"report", "collate all tables into report.md"},
      {"run", "all stages in order"},
  };
  for (const auto& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.desc);
    sub->add_option("--config", config_path, "run configuration JSON")
        ->required();
    sub->add_option("--seed-override", seed_overrides,
                    "override a named seed, e.g. fold=7 (repeatable)");
    sub->add_option("--jobs", jobs, "worker threads for parallel sections");
    sub->add_flag("--svg", svg, "also render SVG charts next to curve CSVs");
    if (std::string(s.name) == "train")
      sub->add_option("--model", only_model,
                      "train only this model from the configured set");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;  // unknown subcommand / bad flags are validation errors
  }
  const std::string stage = app.get_subcommands().front()->get_name();

  try {
    nlohmann::json cj;
    try {
      cj = nlohmann::json::parse(acu::read_file(config_path));
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument("config " + config_path +
                                  " is not valid JSON: " + e.what());
    }
    acu::RunConfig cfg = acu::run_config_from_json(cj);
    for (const auto& s : seed_overrides) apply_seed_override(cfg, s);
    cfg.jobs = jobs;
    cfg.svg = svg;
    if (!only_model.empty()) {
      if (std::find(cfg.models.begin(), cfg.models.end(), only_model) ==
          cfg.models.end())
        throw std::invalid_argument("--model " + only_model +
                                    " is not in the configured model set");
      cfg.models = {only_model};
    }

    acu::DirLock lock(cfg.output_dir);
    if (stage == "run")
      acu::run_pipeline(cfg);
    else
      acu::run_stage(cfg, stage);
    return 0;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
