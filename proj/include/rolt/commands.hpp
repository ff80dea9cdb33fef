/*
 * Copyright 2026 The rolt Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rolt/datasim.hpp"
#include "rolt/trainer.hpp"

namespace rolt
{

namespace fs = std::filesystem;

struct SimulateOptions
{
    ClassProfile profile;
    double noise_level = 0.0;
    BlobOptions blobs;
};

struct SimulatedData
{
    LabeledDataset train;
    LabeledDataset test;
    TransitionMatrix transition;
    MatrixXd centers;  // generator centers, K x D
};

/// Blobs with long-tailed train counts, then frequency-weighted label noise on the train split.
/// The noise stream is seeded with blobs.seed + 0x9e3779b97f4a7c15.
SimulatedData simulate(const SimulateOptions& options);

/// Writes DIR/train, DIR/test and DIR/transition.json.
void run_simulate(const SimulateOptions& options, const fs::path& out_dir);

/// Reads DIR/train (+ DIR/test when present), or DIR itself as a train split.
std::pair<LabeledDataset, std::optional<LabeledDataset>> read_data_dir(const fs::path& dir);

/// Trains and writes report.csv, model.json, prototypes.json, split.csv,
/// labels.csv, gmm.json, config.json and run.json into out_dir.
TrainResult run_train(const fs::path& data_dir, const TrainConfig& config, const fs::path& out_dir);

struct DetectOptions
{
    int refinement_rounds = 1;
    Index min_class_size = 5;
    bool normalize_features = true;
};

/// Prototypical detection on the assigned labels of a dataset; writes
/// split.csv, gmm.json and prototypes.json. Returns the metrics document.
nlohmann::json run_detect(const fs::path& data_dir, const DetectOptions& options, const fs::path& out_dir);

/// Metrics of a trained model and prototype set on the given splits.
nlohmann::json evaluate_model(
    const LabeledDataset& train,
    const LabeledDataset* test,
    const LinearModel<double>& model,
    const PrototypeSet<double>& prototypes,
    const std::optional<std::vector<bool>>& clean_flags,
    bool normalize_features);

/// Recomputes metrics for a run directory and writes RUNDIR/metrics.json.
nlohmann::json run_eval(const fs::path& run_dir);

/// Human-readable metrics table.
void print_metrics(std::ostream& out, const nlohmann::json& metrics);

struct GridSpec
{
    fs::path out;
    int classes = 10;
    Index base = 1000;
    Index dim = 32;
    double separation = 6.0;
    double noise_std = 1.0;
    Index test_per_class = 200;
    std::vector<double> rhos{10.0, 100.0};
    std::vector<double> gammas{0.2, 0.5};
    std::vector<std::uint64_t> seeds{0, 1, 2};
    std::vector<std::string> methods{"erm", "rolt"};
    nlohmann::json train = nlohmann::json::object();
};

/// Parses a grid file. `out` defaults to <grid dir>/sweep.
GridSpec grid_from_json(const nlohmann::json& doc, const fs::path& grid_file);

/// Applies a method name (erm, erm-drw, rolt, rolt-drw) to a base config.
TrainConfig config_for_method(const TrainConfig& base, const std::string& method);

/// Runs every (rho, gamma, seed, method) cell and writes
/// out/runs/<cell>/{report.csv,metrics.json} plus the aggregate CSVs.
void run_sweep(const GridSpec& grid);

/// Aggregates out/runs/*/metrics.json into table1.csv, results.csv,
/// per_class_recall.csv and detection.csv.
void run_report(const fs::path& grid_dir);

}  // namespace rolt
