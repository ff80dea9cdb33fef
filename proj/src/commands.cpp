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

#include "rolt/commands.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "rolt/config.hpp"
#include "rolt/eval.hpp"
#include "rolt/io.hpp"

namespace rolt
{
namespace
{

using json = nlohmann::json;

constexpr std::uint64_t kNoiseSeedOffset = 0x9e3779b97f4a7c15ULL;

std::string hex64(std::uint64_t v)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, v);
    return buf;
}

std::string short_number(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

json nan_to_null(double v)
{
    return std::isnan(v) ? json(nullptr) : json(v);
}

std::vector<int> one_based(const std::vector<Label>& labels)
{
    std::vector<int> out;
    out.reserve(labels.size());
    for (Label y : labels)
    {
        out.push_back(y + 1);
    }
    return out;
}

double bucket_mean(const VectorXd& recalls, const std::vector<Label>& classes)
{
    double sum = 0.0;
    int n = 0;
    for (Label k : classes)
    {
        if (!std::isnan(recalls(k)))
        {
            sum += recalls(k);
            ++n;
        }
    }
    return n == 0 ? std::nan("") : sum / n;
}

json classifier_metrics(
    const std::vector<Label>& predictions,
    const std::vector<Label>& truth,
    Index class_count,
    const ShotSplit& shots)
{
    const auto summary = balanced_accuracy(predictions, truth, class_count);
    const auto confusion = confusion_matrix(predictions, truth, class_count);
    json recalls = json::array();
    for (Index k = 0; k < class_count; ++k)
    {
        recalls.push_back(nan_to_null(summary.per_class_recall(k)));
    }
    json rows = json::array();
    for (Index k = 0; k < class_count; ++k)
    {
        rows.push_back(std::vector<Index>(confusion.row(k).begin(), confusion.row(k).end()));
    }
    return {
        {"balanced_accuracy", summary.balanced_accuracy},
        {"accuracy", summary.accuracy},
        {"recall_std", summary.recall_std},
        {"per_class_recall", recalls},
        {"absent_classes", one_based(summary.absent_classes)},
        {"confusion", rows},
        {"shots",
         {{"many", nan_to_null(bucket_mean(summary.per_class_recall, shots.many))},
          {"medium", nan_to_null(bucket_mean(summary.per_class_recall, shots.medium))},
          {"few", nan_to_null(bucket_mean(summary.per_class_recall, shots.few))}}},
    };
}

json detection_json(const DetectionScore& s)
{
    return {
        {"precision", s.precision},
        {"recall", s.recall},
        {"precision_defined", s.precision_defined},
        {"recall_defined", s.recall_defined},
        {"selected", s.selected},
        {"selected_correct", s.selected_correct},
        {"correct_total", s.correct_total},
        {"noisy_precision", s.noisy_precision},
        {"noisy_recall", s.noisy_recall},
    };
}

std::vector<bool> read_split_flags(const fs::path& path, Index n)
{
    std::ifstream in(path);
    if (!in)
    {
        throw IoError("cannot open " + path.string());
    }
    std::vector<bool> flags(static_cast<std::size_t>(n), true);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line))
    {
        if (line.empty())
        {
            continue;
        }
        std::stringstream ss(line);
        std::string index;
        std::string label;
        std::string flag;
        std::getline(ss, index, ',');
        std::getline(ss, label, ',');
        std::getline(ss, flag, ',');
        const auto i = std::stoll(index);
        require(i >= 0 && i < n, "split.csv example index out of range");
        flags[static_cast<std::size_t>(i)] = flag == "clean";
    }
    return flags;
}

std::vector<Index> shot_counts(const LabeledDataset& train)
{
    if (!train.true_labels)
    {
        return train.label_counts();
    }
    std::vector<Index> counts(static_cast<std::size_t>(train.class_count), 0);
    for (Label y : *train.true_labels)
    {
        ++counts[static_cast<std::size_t>(y)];
    }
    return counts;
}

std::string cell_name(const std::string& method, double rho, double gamma, std::uint64_t seed)
{
    return method + "_rho" + short_number(rho) + "_gamma" + short_number(gamma) + "_seed"
           + std::to_string(seed);
}

}  // namespace

SimulatedData simulate(const SimulateOptions& options)
{
    auto blobs = synth_blobs(options.profile, options.blobs);
    const auto counts = long_tailed_counts(options.profile);
    auto transition = build_transition_matrix(counts, options.noise_level);
    auto train = inject_noise(blobs.train, transition, options.blobs.seed + kNoiseSeedOffset);
    return {std::move(train), std::move(blobs.test), std::move(transition), std::move(blobs.centers)};
}

void run_simulate(const SimulateOptions& options, const fs::path& out_dir)
{
    const auto data = simulate(options);
    io::write_dataset(out_dir / "train", data.train);
    io::write_dataset(out_dir / "test", data.test);
    json rows = json::array();
    for (Index i = 0; i < data.transition.entries.rows(); ++i)
    {
        rows.push_back(std::vector<double>(
            data.transition.entries.row(i).begin(), data.transition.entries.row(i).end()));
    }
    io::write_json(
        out_dir / "transition.json",
        {{"noise_level", data.transition.noise_level},
         {"counts", long_tailed_counts(options.profile)},
         {"T", rows}});
}

std::pair<LabeledDataset, std::optional<LabeledDataset>> read_data_dir(const fs::path& dir)
{
    if (fs::exists(dir / "train" / "meta.json"))
    {
        auto train = io::read_dataset(dir / "train");
        std::optional<LabeledDataset> test;
        if (fs::exists(dir / "test" / "meta.json"))
        {
            test = io::read_dataset(dir / "test");
        }
        return {std::move(train), std::move(test)};
    }
    return {io::read_dataset(dir), std::nullopt};
}

TrainResult run_train(const fs::path& data_dir, const TrainConfig& config, const fs::path& out_dir)
{
    const auto [train_data, test_data] = read_data_dir(data_dir);
    const LabeledDataset* test = test_data ? &*test_data : nullptr;
    auto result = train(train_data, config, test);

    fs::create_directories(out_dir);
    io::write_report_csv(out_dir / "report.csv", result.report, train_data.class_count);
    io::write_json(out_dir / "model.json", io::to_json(result.state.model));
    io::write_json(out_dir / "prototypes.json", io::to_json(result.state.prototypes));
    io::write_split_csv(
        out_dir / "split.csv",
        train_data.noisy_labels,
        result.state.split,
        result.state.fits,
        result.state.distances);
    io::write_labels_csv(out_dir / "labels.csv", train_data.noisy_labels, result.state.targets);
    io::write_json(out_dir / "gmm.json", io::fits_to_json(result.state.fits));
    io::write_json(out_dir / "config.json", to_json(config));
    io::write_json(
        out_dir / "run.json",
        {{"data", fs::absolute(data_dir).lexically_normal().string()},
         {"dataset_fingerprint", hex64(result.report.dataset_fingerprint)},
         {"epochs", result.report.epochs.size()}});
    return result;
}

json run_detect(const fs::path& data_dir, const DetectOptions& options, const fs::path& out_dir)
{
    const auto data = read_data_dir(data_dir).first;
    const MatrixXd features
        = options.normalize_features ? l2_normalize_rows(data.embeddings) : data.embeddings;
    const auto initial = compute_prototypes(features, data.indices_by_label());
    DetectionOptions det;
    det.refinement_rounds = options.refinement_rounds;
    det.min_class_size = options.min_class_size;
    const auto result = detect(features, data.noisy_labels, initial, det);

    fs::create_directories(out_dir);
    io::write_split_csv(out_dir / "split.csv", data.noisy_labels, result.split, result.fits, result.distances);
    io::write_json(out_dir / "gmm.json", io::fits_to_json(result.fits));
    io::write_json(out_dir / "prototypes.json", io::to_json(result.prototypes));

    json summary = {
        {"clean", result.split.clean_count()},
        {"noisy", result.split.noisy_count()},
        {"dataset_fingerprint", hex64(dataset_fingerprint(data))},
    };
    if (data.has_ground_truth())
    {
        const auto shots = shot_split(shot_counts(data));
        const auto b = detection_breakdown(result.split, data, shots);
        summary["detection"] = {
            {"overall", detection_json(b.overall)},
            {"many", detection_json(b.many)},
            {"medium", detection_json(b.medium)},
            {"few", detection_json(b.few)},
        };
    }
    return summary;
}

json evaluate_model(
    const LabeledDataset& train,
    const LabeledDataset* test,
    const LinearModel<double>& model,
    const PrototypeSet<double>& prototypes,
    const std::optional<std::vector<bool>>& clean_flags,
    bool normalize_features)
{
    const auto counts = shot_counts(train);
    const auto shots = shot_split(counts);
    json metrics = {
        {"dataset_fingerprint", hex64(dataset_fingerprint(train))},
        {"train_counts", counts},
        {"shot_split",
         {{"many", one_based(shots.many)},
          {"medium", one_based(shots.medium)},
          {"few", one_based(shots.few)}}},
    };

    const LabeledDataset& eval_set = test != nullptr ? *test : train;
    metrics["evaluated_on"] = to_string(eval_set.split);
    const auto& truth = eval_set.true_labels ? *eval_set.true_labels : eval_set.noisy_labels;
    const auto erm = predict_erm(model, eval_set.embeddings);
    const MatrixXd features
        = normalize_features ? l2_normalize_rows(eval_set.embeddings) : eval_set.embeddings;
    const auto ncm = predict_ncm(prototypes, features);
    metrics["erm"] = classifier_metrics(erm.labels, truth, eval_set.class_count, shots);
    metrics["ncm"] = classifier_metrics(ncm.labels, truth, eval_set.class_count, shots);

    if (clean_flags && train.has_ground_truth())
    {
        auto score = [&](std::optional<std::span<const Label>> classes)
        { return detection_json(detection_scores(*clean_flags, train.noisy_labels, *train.true_labels, classes)); };
        metrics["detection"] = {
            {"overall", score(std::nullopt)},
            {"many", score(std::span<const Label>(shots.many))},
            {"medium", score(std::span<const Label>(shots.medium))},
            {"few", score(std::span<const Label>(shots.few))},
        };
    }
    return metrics;
}

json run_eval(const fs::path& run_dir)
{
    const json run = io::read_json(run_dir / "run.json");
    const auto config = train_config_from_json(io::read_json(run_dir / "config.json"));
    const auto [train_data, test_data] = read_data_dir(run.at("data").get<std::string>());
    const auto model = io::model_from_json(io::read_json(run_dir / "model.json"));
    const auto protos = io::prototypes_from_json(io::read_json(run_dir / "prototypes.json"));
    std::optional<std::vector<bool>> flags;
    if (fs::exists(run_dir / "split.csv"))
    {
        flags = read_split_flags(run_dir / "split.csv", train_data.size());
    }
    auto metrics = evaluate_model(
        train_data, test_data ? &*test_data : nullptr, model, protos, flags, config.normalize_features);
    if (metrics.at("dataset_fingerprint") != run.at("dataset_fingerprint"))
    {
        throw Error("dataset at " + run.at("data").get<std::string>() + " changed since training");
    }
    io::write_json(run_dir / "metrics.json", metrics);
    return metrics;
}

void print_metrics(std::ostream& out, const json& metrics)
{
    auto pct = [](const json& v)
    {
        if (v.is_null())
        {
            return std::string("   -  ");
        }
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%6.2f", 100.0 * v.get<double>());
        return std::string(buf);
    };
    out << "evaluated on: " << metrics.value("evaluated_on", "?") << "\n";
    out << "classifier  balanced  accuracy  recall_std   many   medium    few\n";
    for (const char* name : {"erm", "ncm"})
    {
        const auto& m = metrics.at(name);
        out << std::left << std::setw(10) << name << "  " << pct(m.at("balanced_accuracy")) << "    "
            << pct(m.at("accuracy")) << "    " << pct(m.at("recall_std")) << "    "
            << pct(m.at("shots").at("many")) << "  " << pct(m.at("shots").at("medium")) << "  "
            << pct(m.at("shots").at("few")) << "\n";
        for (const auto& absent : m.at("absent_classes"))
        {
            out << "warning: class " << absent.get<int>() << " absent from the evaluation set\n";
        }
    }
    if (metrics.contains("detection"))
    {
        out << "detection   precision  recall\n";
        for (const char* split : {"overall", "many", "medium", "few"})
        {
            const auto& d = metrics.at("detection").at(split);
            out << std::left << std::setw(10) << split << "  " << pct(d.at("precision")) << "     "
                << pct(d.at("recall"));
            if (!d.at("precision_defined").get<bool>())
            {
                out << "  (no example selected)";
            }
            out << "\n";
        }
    }
}

GridSpec grid_from_json(const json& doc, const fs::path& grid_file)
{
    const std::set<std::string> known{
        "out", "classes", "base", "dim", "separation", "noise_std", "test_per_class",
        "rhos", "gammas", "seeds", "methods", "train"};
    require(doc.is_object(), "grid file must hold a JSON object");
    for (const auto& item : doc.items())
    {
        require(known.contains(item.key()), "unknown key '" + item.key() + "' in grid file");
    }
    GridSpec grid;
    try
    {
        grid.out = doc.contains("out") ? fs::path(doc.at("out").get<std::string>())
                                       : grid_file.parent_path() / "sweep";
        if (grid.out.is_relative() && doc.contains("out"))
        {
            grid.out = grid_file.parent_path() / grid.out;
        }
        grid.classes = doc.value("classes", grid.classes);
        grid.base = doc.value("base", grid.base);
        grid.dim = doc.value("dim", grid.dim);
        grid.separation = doc.value("separation", grid.separation);
        grid.noise_std = doc.value("noise_std", grid.noise_std);
        grid.test_per_class = doc.value("test_per_class", grid.test_per_class);
        grid.rhos = doc.value("rhos", grid.rhos);
        grid.gammas = doc.value("gammas", grid.gammas);
        grid.seeds = doc.value("seeds", grid.seeds);
        grid.methods = doc.value("methods", grid.methods);
        grid.train = doc.value("train", grid.train);
    }
    catch (const json::exception& e)
    {
        throw InvalidArgument(std::string("malformed grid file: ") + e.what());
    }
    for (const auto& m : grid.methods)
    {
        config_for_method(TrainConfig{}, m);
    }
    train_config_from_json(grid.train);
    return grid;
}

TrainConfig config_for_method(const TrainConfig& base, const std::string& method)
{
    TrainConfig config = base;
    if (method == "erm" || method == "erm-drw")
    {
        config.warmup_epochs = base.total_epochs();
        config.robust_epochs = 0;
    }
    else if (method != "rolt" && method != "rolt-drw")
    {
        throw InvalidArgument("unknown method '" + method + "' (expected erm, erm-drw, rolt, rolt-drw)");
    }
    config.drw_enabled = method.ends_with("-drw");
    return config;
}

void run_sweep(const GridSpec& grid)
{
    const auto base = train_config_from_json(grid.train);
    for (double rho : grid.rhos)
    {
        for (double gamma : grid.gammas)
        {
            for (std::uint64_t seed : grid.seeds)
            {
                SimulateOptions sim;
                sim.profile = {grid.classes, grid.base, rho};
                sim.noise_level = gamma;
                sim.blobs = {grid.dim, grid.separation, grid.noise_std, grid.test_per_class, seed};
                const auto data = simulate(sim);
                for (const auto& method : grid.methods)
                {
                    auto config = config_for_method(base, method);
                    config.seed = seed;
                    auto result = train(data.train, config, &data.test);
                    std::optional<std::vector<bool>> flags;
                    if (config.robust_epochs > 0)
                    {
                        flags = result.state.split.clean_flags(data.train.size());
                    }
                    auto metrics = evaluate_model(
                        data.train, &data.test, result.state.model, result.state.prototypes, flags,
                        config.normalize_features);
                    metrics["cell"] = {{"method", method}, {"rho", rho}, {"gamma", gamma}, {"seed", seed}};
                    metrics["best_erm_accuracy"] = result.report.best_erm_accuracy();
                    metrics["last_erm_accuracy"] = result.report.last_erm_accuracy();
                    metrics["best_ncm_accuracy"] = result.report.best_ncm_accuracy();
                    metrics["last_ncm_accuracy"] = result.report.last_ncm_accuracy();

                    const auto dir = grid.out / "runs" / cell_name(method, rho, gamma, seed);
                    fs::create_directories(dir);
                    io::write_report_csv(dir / "report.csv", result.report, data.train.class_count);
                    io::write_json(dir / "metrics.json", metrics);
                }
            }
        }
    }
    run_report(grid.out);
}

void run_report(const fs::path& grid_dir)
{
    const auto runs_dir = grid_dir / "runs";
    require(fs::is_directory(runs_dir), runs_dir.string() + " does not exist");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(runs_dir))
    {
        if (fs::exists(entry.path() / "metrics.json"))
        {
            files.push_back(entry.path() / "metrics.json");
        }
    }
    std::ranges::sort(files);
    require(!files.empty(), "no runs with metrics.json under " + runs_dir.string());

    std::vector<std::string> methods;
    std::vector<std::pair<double, double>> cells;
    std::map<std::pair<std::string, std::pair<double, double>>, std::vector<double>> acc;

    std::ostringstream results;
    std::ostringstream per_class;
    std::ostringstream detection;
    results << "method,rho,gamma,seed,erm_last,erm_best,ncm_last,ncm_best,erm_few,ncm_few,"
               "dataset_fingerprint\n";
    per_class << "method,rho,gamma,seed,class,train_count,shot,erm_recall,ncm_recall\n";
    detection << "method,rho,gamma,seed,split,precision,recall\n";

    for (const auto& file : files)
    {
        const auto m = io::read_json(file);
        require(m.contains("cell"), file.string() + " is not a sweep run (no 'cell')");
        const auto method = m.at("cell").at("method").get<std::string>();
        const double rho = m.at("cell").at("rho").get<double>();
        const double gamma = m.at("cell").at("gamma").get<double>();
        const auto seed = m.at("cell").at("seed").get<std::uint64_t>();
        if (std::ranges::find(methods, method) == methods.end())
        {
            methods.push_back(method);
        }
        const std::pair cell{rho, gamma};
        if (std::ranges::find(cells, cell) == cells.end())
        {
            cells.push_back(cell);
        }
        const double last = m.at("erm").at("balanced_accuracy").get<double>();
        acc[{method, cell}].push_back(last);

        auto num = [](const json& v) { return v.is_null() ? std::string() : io::format_double(v.get<double>()); };
        const auto prefix = method + "," + short_number(rho) + "," + short_number(gamma) + ","
                            + std::to_string(seed);
        results << prefix << ',' << num(m.at("last_erm_accuracy")) << ',' << num(m.at("best_erm_accuracy"))
                << ',' << num(m.at("last_ncm_accuracy")) << ',' << num(m.at("best_ncm_accuracy")) << ','
                << num(m.at("erm").at("shots").at("few")) << ',' << num(m.at("ncm").at("shots").at("few"))
                << ',' << m.at("dataset_fingerprint").get<std::string>() << '\n';

        const auto& counts = m.at("train_counts");
        for (std::size_t k = 0; k < counts.size(); ++k)
        {
            std::string shot = "medium";
            for (const char* bucket : {"many", "few"})
            {
                for (const auto& c : m.at("shot_split").at(bucket))
                {
                    if (c.get<std::size_t>() == k + 1)
                    {
                        shot = bucket;
                    }
                }
            }
            per_class << prefix << ',' << k + 1 << ',' << counts[k].get<Index>() << ',' << shot << ','
                      << num(m.at("erm").at("per_class_recall")[k]) << ','
                      << num(m.at("ncm").at("per_class_recall")[k]) << '\n';
        }
        if (m.contains("detection"))
        {
            for (const char* split : {"overall", "many", "medium", "few"})
            {
                const auto& d = m.at("detection").at(split);
                detection << prefix << ',' << split << ',' << num(d.at("precision")) << ','
                          << num(d.at("recall")) << '\n';
            }
        }
    }

    std::ranges::sort(cells);
    std::ostringstream table;
    table << "method";
    for (const auto& [rho, gamma] : cells)
    {
        table << ",rho=" << short_number(rho) << " gamma=" << short_number(gamma);
    }
    table << '\n';
    for (const auto& method : methods)
    {
        table << method;
        for (const auto& cell : cells)
        {
            table << ',';
            const auto it = acc.find({method, cell});
            if (it != acc.end())
            {
                double sum = 0.0;
                for (double v : it->second)
                {
                    sum += v;
                }
                char buf[32];
                std::snprintf(buf, sizeof(buf), "%.2f", 100.0 * sum / static_cast<double>(it->second.size()));
                table << buf;
            }
        }
        table << '\n';
    }
    io::write_text(grid_dir / "table1.csv", table.str());
    io::write_text(grid_dir / "results.csv", results.str());
    io::write_text(grid_dir / "per_class_recall.csv", per_class.str());
    io::write_text(grid_dir / "detection.csv", detection.str());
}

}  // namespace rolt
