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

#include "rolt/io.hpp"

#include <algorithm>
#include <bit>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace rolt::io
{
namespace
{

std::uint64_t to_little(std::uint64_t v)
{
    if constexpr (std::endian::native == std::endian::little)
    {
        return v;
    }
    std::uint64_t out = 0;
    for (int i = 0; i < 8; ++i)
    {
        out = (out << 8) | ((v >> (8 * i)) & 0xffU);
    }
    return out;
}

void put_u64(std::ostream& out, std::uint64_t v)
{
    const std::uint64_t le = to_little(v);
    out.write(reinterpret_cast<const char*>(&le), sizeof(le));
}

std::uint64_t get_u64(std::istream& in, const fs::path& path)
{
    std::uint64_t raw = 0;
    if (!in.read(reinterpret_cast<char*>(&raw), sizeof(raw)))
    {
        throw IoError("truncated binary file " + path.string());
    }
    return to_little(raw);
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out)
{
    if (path.has_parent_path())
    {
        fs::create_directories(path.parent_path());
    }
    std::ofstream out(path, mode);
    if (!out)
    {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    return out;
}

std::ifstream open_in(const fs::path& path, std::ios::openmode mode = std::ios::in)
{
    std::ifstream in(path, mode);
    if (!in)
    {
        throw IoError("cannot open " + path.string());
    }
    return in;
}

std::string trim(const std::string& s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos)
    {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

double parse_double(const std::string& text, const fs::path& path, std::size_t line)
{
    const auto t = trim(text);
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size())
    {
        throw IoError(path.string() + ":" + std::to_string(line) + ": not a number: '" + t + "'");
    }
    return v;
}

json matrix_to_json(const MatrixXd& m)
{
    json rows = json::array();
    for (Index i = 0; i < m.rows(); ++i)
    {
        rows.push_back(std::vector<double>(m.row(i).begin(), m.row(i).end()));
    }
    return rows;
}

MatrixXd matrix_from_json(const json& rows, Index expected_rows, Index expected_cols, const char* what)
{
    require(rows.is_array(), std::string(what) + " must be an array of rows");
    require_shape(
        static_cast<Index>(rows.size()) == expected_rows,
        std::string(what) + " has " + std::to_string(rows.size()) + " rows, expected "
            + std::to_string(expected_rows));
    MatrixXd m(expected_rows, expected_cols);
    for (Index i = 0; i < expected_rows; ++i)
    {
        const auto& row = rows.at(static_cast<std::size_t>(i));
        require_shape(
            row.is_array() && static_cast<Index>(row.size()) == expected_cols,
            std::string(what) + " row " + std::to_string(i) + " has the wrong length");
        for (Index j = 0; j < expected_cols; ++j)
        {
            m(i, j) = row.at(static_cast<std::size_t>(j)).get<double>();
        }
    }
    return m;
}

}  // namespace

std::string format_double(double value)
{
    if (std::isnan(value))
    {
        return {};
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

std::string read_text(const fs::path& path)
{
    auto in = open_in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& path, const std::string& text)
{
    auto out = open_out(path);
    out << text;
}

void write_embeddings_f64(const fs::path& path, const MatrixXd& embeddings)
{
    auto out = open_out(path, std::ios::out | std::ios::binary);
    put_u64(out, static_cast<std::uint64_t>(embeddings.rows()));
    put_u64(out, static_cast<std::uint64_t>(embeddings.cols()));
    for (Index i = 0; i < embeddings.rows(); ++i)
    {
        for (Index j = 0; j < embeddings.cols(); ++j)
        {
            put_u64(out, std::bit_cast<std::uint64_t>(embeddings(i, j)));
        }
    }
    if (!out)
    {
        throw IoError("failed writing " + path.string());
    }
}

MatrixXd read_embeddings_f64(const fs::path& path)
{
    auto in = open_in(path, std::ios::in | std::ios::binary);
    const auto rows = get_u64(in, path);
    const auto cols = get_u64(in, path);
    const auto expected = static_cast<std::uintmax_t>(16 + rows * cols * 8);
    if (rows > (1ULL << 40) || cols > (1ULL << 30) || fs::file_size(path) != expected)
    {
        throw IoError(
            path.string() + ": header says " + std::to_string(rows) + "x" + std::to_string(cols)
            + " but the file size does not match");
    }
    MatrixXd m(static_cast<Index>(rows), static_cast<Index>(cols));
    for (Index i = 0; i < m.rows(); ++i)
    {
        for (Index j = 0; j < m.cols(); ++j)
        {
            m(i, j) = std::bit_cast<double>(get_u64(in, path));
        }
    }
    return m;
}

MatrixXd read_embeddings_csv(const fs::path& path)
{
    auto in = open_in(path);
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line))
    {
        ++line_no;
        if (trim(line).empty())
        {
            continue;
        }
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
        {
            row.push_back(parse_double(cell, path, line_no));
        }
        if (!rows.empty() && row.size() != rows.front().size())
        {
            throw IoError(
                path.string() + ":" + std::to_string(line_no) + ": expected "
                + std::to_string(rows.front().size()) + " columns, got " + std::to_string(row.size()));
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty())
    {
        throw IoError(path.string() + " contains no rows");
    }
    MatrixXd m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
    {
        for (std::size_t j = 0; j < rows[i].size(); ++j)
        {
            m(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
        }
    }
    return m;
}

void write_label_column(const fs::path& path, std::span<const Label> labels)
{
    auto out = open_out(path);
    for (Label y : labels)
    {
        out << (y + 1) << '\n';
    }
}

std::vector<Label> read_label_column(const fs::path& path, int class_count)
{
    auto in = open_in(path);
    std::vector<Label> labels;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line))
    {
        ++line_no;
        const auto t = trim(line);
        if (t.empty())
        {
            continue;
        }
        char* end = nullptr;
        const long v = std::strtol(t.c_str(), &end, 10);
        if (end != t.c_str() + t.size() || v < 1 || v > class_count)
        {
            throw IoError(
                path.string() + ":" + std::to_string(line_no) + ": label '" + t + "' not in [1, "
                + std::to_string(class_count) + "]");
        }
        labels.push_back(static_cast<Label>(v - 1));
    }
    return labels;
}

void write_dataset(const fs::path& dir, const LabeledDataset& dataset)
{
    dataset.validate();
    fs::create_directories(dir);
    json meta = {
        {"K", dataset.class_count},
        {"N", dataset.size()},
        {"D", dataset.dim()},
        {"split_tag", to_string(dataset.split)},
        {"has_true_labels", dataset.has_ground_truth()},
        {"seed", nullptr},
        {"profile", nullptr},
    };
    if (dataset.simulation)
    {
        const auto& sim = *dataset.simulation;
        meta["seed"] = sim.seed;
        meta["profile"] = {
            {"classes", sim.profile.class_count},
            {"base", sim.profile.base_count},
            {"rho", sim.profile.imbalance_ratio},
        };
        meta["noise_level"] = sim.noise_level;
        meta["separation"] = sim.separation;
        meta["noise_std"] = sim.noise_std;
    }
    write_json(dir / "meta.json", meta);
    write_embeddings_f64(dir / "embeddings.f64", dataset.embeddings);
    write_label_column(dir / "noisy_labels.csv", dataset.noisy_labels);
    if (dataset.true_labels)
    {
        write_label_column(dir / "true_labels.csv", *dataset.true_labels);
    }
}

LabeledDataset read_dataset(const fs::path& dir)
{
    const json meta = read_json(dir / "meta.json");
    LabeledDataset data;
    try
    {
        data.class_count = meta.at("K").get<int>();
        data.split = split_tag_from_string(meta.value("split_tag", std::string("train")));
        if (meta.contains("profile") && meta.at("profile").is_object())
        {
            SimulationInfo sim;
            const auto& p = meta.at("profile");
            sim.profile = {p.at("classes").get<int>(), p.at("base").get<Index>(), p.at("rho").get<double>()};
            sim.seed = meta.at("seed").get<std::uint64_t>();
            sim.noise_level = meta.value("noise_level", 0.0);
            sim.separation = meta.value("separation", 0.0);
            sim.noise_std = meta.value("noise_std", 1.0);
            data.simulation = sim;
        }
    }
    catch (const json::exception& e)
    {
        throw IoError((dir / "meta.json").string() + ": " + e.what());
    }

    if (fs::exists(dir / "embeddings.f64"))
    {
        data.embeddings = read_embeddings_f64(dir / "embeddings.f64");
    }
    else if (fs::exists(dir / "embeddings.csv"))
    {
        data.embeddings = read_embeddings_csv(dir / "embeddings.csv");
    }
    else
    {
        throw IoError(dir.string() + " has neither embeddings.f64 nor embeddings.csv");
    }
    data.noisy_labels = read_label_column(dir / "noisy_labels.csv", data.class_count);
    if (fs::exists(dir / "true_labels.csv"))
    {
        data.true_labels = read_label_column(dir / "true_labels.csv", data.class_count);
    }

    if (meta.contains("N"))
    {
        require_shape(
            meta.at("N").get<Index>() == data.size(), "meta.json N does not match the embeddings");
    }
    if (meta.contains("D"))
    {
        require_shape(
            meta.at("D").get<Index>() == data.dim(), "meta.json D does not match the embeddings");
    }
    data.validate();
    return data;
}

json to_json(const LinearModel<double>& model)
{
    return {
        {"K", model.class_count()},
        {"D", model.dim()},
        {"W", std::vector<double>(model.weights.data(), model.weights.data() + model.weights.size())},
        {"b", std::vector<double>(model.bias.data(), model.bias.data() + model.bias.size())},
    };
}

LinearModel<double> model_from_json(const json& doc)
{
    try
    {
        const auto k = doc.at("K").get<Index>();
        const auto d = doc.at("D").get<Index>();
        const auto w = doc.at("W").get<std::vector<double>>();
        const auto b = doc.at("b").get<std::vector<double>>();
        require_shape(static_cast<Index>(w.size()) == k * d, "model.json W must hold K*D values");
        require_shape(static_cast<Index>(b.size()) == k, "model.json b must hold K values");
        LinearModel<double> model{MatrixXd(k, d), VectorXd(k)};
        std::copy(w.begin(), w.end(), model.weights.data());
        std::copy(b.begin(), b.end(), model.bias.data());
        require(model.all_finite(), "model.json holds non-finite parameters");
        return model;
    }
    catch (const json::exception& e)
    {
        throw IoError(std::string("malformed model.json: ") + e.what());
    }
}

json to_json(const PrototypeSet<double>& protos)
{
    return {
        {"K", protos.class_count()},
        {"D", protos.dim()},
        {"centers", matrix_to_json(protos.centers)},
        {"counts", protos.source_counts},
        {"degenerate", protos.degenerate},
    };
}

PrototypeSet<double> prototypes_from_json(const json& doc)
{
    try
    {
        const auto k = doc.at("K").get<Index>();
        const auto d = doc.at("D").get<Index>();
        PrototypeSet<double> protos{
            matrix_from_json(doc.at("centers"), k, d, "centers"),
            doc.at("counts").get<std::vector<Index>>(),
            doc.at("degenerate").get<std::vector<bool>>(),
        };
        require_shape(
            static_cast<Index>(protos.source_counts.size()) == k
                && static_cast<Index>(protos.degenerate.size()) == k,
            "prototypes.json counts/degenerate must hold K entries");
        return protos;
    }
    catch (const json::exception& e)
    {
        throw IoError(std::string("malformed prototypes.json: ") + e.what());
    }
}

json to_json(const GmmFit& fit)
{
    return {
        {"weights", fit.weights},
        {"means", fit.means},
        {"stds", fit.stds},
        {"log_likelihood", fit.log_likelihood},
        {"iterations", fit.iterations},
        {"converged", fit.converged},
        {"degenerate", fit.degenerate},
    };
}

json fits_to_json(const std::vector<GmmFit>& fits)
{
    json out = json::array();
    for (std::size_t k = 0; k < fits.size(); ++k)
    {
        json entry = to_json(fits[k]);
        entry["class"] = k + 1;
        out.push_back(std::move(entry));
    }
    return out;
}

void write_json(const fs::path& path, const json& doc)
{
    write_text(path, doc.dump(2) + "\n");
}

json read_json(const fs::path& path)
{
    try
    {
        return json::parse(read_text(path));
    }
    catch (const json::parse_error& e)
    {
        throw IoError(path.string() + ": " + e.what());
    }
}

void write_split_csv(
    const fs::path& path,
    std::span<const Label> labels,
    const CleanNoisySplit& split,
    const std::vector<GmmFit>& fits,
    const std::vector<ClassDistances<double>>& distances)
{
    const auto n = labels.size();
    std::vector<double> dist(n, std::nan(""));
    for (const auto& cls : distances)
    {
        for (std::size_t j = 0; j < cls.indices.size(); ++j)
        {
            dist.at(static_cast<std::size_t>(cls.indices[j])) = cls.distances(static_cast<Index>(j));
        }
    }
    const auto clean = split.clean_flags(static_cast<Index>(n));

    auto out = open_out(path);
    out << "example_index,assigned_label,flag,distance,component1_density,component2_density\n";
    for (std::size_t i = 0; i < n; ++i)
    {
        const auto k = static_cast<std::size_t>(labels[i]);
        std::string d1;
        std::string d2;
        if (k < fits.size() && !std::isnan(dist[i]))
        {
            d1 = format_double(fits[k].density(0, dist[i]));
            d2 = format_double(fits[k].density(1, dist[i]));
        }
        out << i << ',' << labels[i] + 1 << ',' << (clean[i] ? "clean" : "noisy") << ','
            << format_double(dist[i]) << ',' << d1 << ',' << d2 << '\n';
    }
}

void write_labels_csv(
    const fs::path& path,
    std::span<const Label> labels,
    const TrainingTargets& targets)
{
    require_shape(
        static_cast<Index>(labels.size()) == targets.targets.rows(), "one target row per label required");
    auto out = open_out(path);
    out << "example_index,flag,original_label,erm_guess,ncm_guess";
    for (Index k = 0; k < targets.targets.cols(); ++k)
    {
        out << ",p_" << k + 1;
    }
    out << '\n';
    for (std::size_t i = 0; i < labels.size(); ++i)
    {
        const bool clean = targets.clean.empty() || targets.clean[i];
        out << i << ',' << (clean ? "clean" : "noisy") << ',' << labels[i] + 1 << ',';
        if (i < targets.guesses.size())
        {
            out << targets.guesses[i].erm + 1 << ',' << targets.guesses[i].ncm + 1;
        }
        else
        {
            out << ',';
        }
        for (Index k = 0; k < targets.targets.cols(); ++k)
        {
            out << ',' << format_double(targets.targets(static_cast<Index>(i), k));
        }
        out << '\n';
    }
}

void write_report_csv(const fs::path& path, const TrainReport& report, Index class_count)
{
    auto out = open_out(path);
    out << "epoch,stage,learning_rate,drw_active,loss,loss_clean,loss_noisy,clean_count,noisy_count,"
           "detection_precision,detection_recall,erm_balanced_accuracy,ncm_balanced_accuracy,"
           "erm_recall_std,ncm_recall_std,degenerate_prototypes,degenerate_soft_labels";
    for (const char* which : {"erm", "ncm"})
    {
        for (Index k = 0; k < class_count; ++k)
        {
            out << ',' << which << "_recall_" << k + 1;
        }
    }
    out << '\n';

    auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
    for (const auto& e : report.epochs)
    {
        out << e.epoch << ',' << e.stage << ',' << format_double(e.learning_rate) << ','
            << (e.drw_active ? 1 : 0) << ',' << format_double(e.loss) << ','
            << format_double(e.loss_clean) << ',' << format_double(e.loss_noisy) << ','
            << e.clean_count << ',' << e.noisy_count << ',' << opt(e.detection_precision) << ','
            << opt(e.detection_recall) << ','
            << (e.erm_test ? format_double(e.erm_test->balanced_accuracy) : "") << ','
            << (e.ncm_test ? format_double(e.ncm_test->balanced_accuracy) : "") << ','
            << (e.erm_test ? format_double(e.erm_test->recall_std) : "") << ','
            << (e.ncm_test ? format_double(e.ncm_test->recall_std) : "") << ','
            << e.degenerate_prototypes << ',' << e.degenerate_soft_labels;
        for (const auto* summary : {&e.erm_test, &e.ncm_test})
        {
            for (Index k = 0; k < class_count; ++k)
            {
                out << ',';
                if (*summary)
                {
                    out << format_double((*summary)->per_class_recall(k));
                }
            }
        }
        out << '\n';
    }
}

}  // namespace rolt::io
