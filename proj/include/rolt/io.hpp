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

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rolt/datasim.hpp"
#include "rolt/gmm.hpp"
#include "rolt/model.hpp"
#include "rolt/prototypes.hpp"
#include "rolt/pseudolabel.hpp"
#include "rolt/trainer.hpp"

namespace rolt::io
{

namespace fs = std::filesystem;
using json = nlohmann::json;

/// Shortest text that round-trips the double ("%.17g"); NaN becomes "".
std::string format_double(double value);

/// embeddings.f64: u64 N, u64 D (little-endian), then N*D little-endian
/// doubles in row-major order.
void write_embeddings_f64(const fs::path& path, const MatrixXd& embeddings);
MatrixXd read_embeddings_f64(const fs::path& path);

/// N rows of D comma-separated numbers.
MatrixXd read_embeddings_csv(const fs::path& path);

/// One 1-based label per line.
void write_label_column(const fs::path& path, std::span<const Label> labels);
std::vector<Label> read_label_column(const fs::path& path, int class_count);

/// Directory with meta.json, embeddings.f64 (or embeddings.csv when
/// reading), noisy_labels.csv and, when known, true_labels.csv.
void write_dataset(const fs::path& dir, const LabeledDataset& dataset);
LabeledDataset read_dataset(const fs::path& dir);

json to_json(const LinearModel<double>& model);
LinearModel<double> model_from_json(const json& doc);

json to_json(const PrototypeSet<double>& protos);
PrototypeSet<double> prototypes_from_json(const json& doc);

json to_json(const GmmFit& fit);
json fits_to_json(const std::vector<GmmFit>& fits);

void write_json(const fs::path& path, const json& doc);
json read_json(const fs::path& path);

/// example_index, assigned_label, flag, distance, component1_density,
/// component2_density; rows ordered by example index.
void write_split_csv(
    const fs::path& path,
    std::span<const Label> labels,
    const CleanNoisySplit& split,
    const std::vector<GmmFit>& fits,
    const std::vector<ClassDistances<double>>& distances);

/// example_index, flag, original_label, erm_guess, ncm_guess, p_1..p_K.
void write_labels_csv(
    const fs::path& path,
    std::span<const Label> labels,
    const TrainingTargets& targets);

void write_report_csv(const fs::path& path, const TrainReport& report, Index class_count);

std::string read_text(const fs::path& path);
void write_text(const fs::path& path, const std::string& text);

}  // namespace rolt::io
