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

#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "rolt/commands.hpp"
#include "rolt/config.hpp"
#include "rolt/io.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv)
{
    CLI::App app{"rolt: robust long-tailed learning under label noise, in embedding space"};
    app.require_subcommand(1);

    rolt::SimulateOptions sim;
    std::string sim_out;
    auto* simulate = app.add_subcommand("simulate", "Generate a long-tailed noisy blob dataset");
    simulate->add_option("--classes", sim.profile.class_count, "Number of classes K")->required();
    simulate->add_option("--base", sim.profile.base_count, "Size of the largest class")->required();
    simulate->add_option("--rho", sim.profile.imbalance_ratio, "Imbalance ratio")->required();
    simulate->add_option("--gamma", sim.noise_level, "Noise level in [0, 1]")->required();
    simulate->add_option("--dim", sim.blobs.dim, "Embedding dimension")->required();
    simulate->add_option("--sep", sim.blobs.separation, "Center norm (class separation)")->required();
    simulate->add_option("--seed", sim.blobs.seed, "RNG seed")->required();
    simulate->add_option("--out", sim_out, "Output directory")->required();
    simulate->add_option("--noise-std", sim.blobs.noise_std, "Per-coordinate std of each blob");
    simulate->add_option("--test-per-class", sim.blobs.test_per_class, "Balanced test examples per class");

    std::string train_data;
    std::string train_config;
    std::string train_out;
    auto* train = app.add_subcommand("train", "Run warm-up and robust training");
    train->add_option("--data", train_data, "Dataset directory")->required();
    train->add_option("--config", train_config, "Train config JSON (defaults when omitted)");
    train->add_option("--out", train_out, "Run directory")->required();

    std::string detect_data;
    std::string detect_out;
    rolt::DetectOptions detect_options;
    bool no_normalize = false;
    auto* detect = app.add_subcommand("detect", "Prototypical clean/noisy split of a dataset");
    detect->add_option("--data", detect_data, "Dataset directory")->required();
    detect->add_option("--out", detect_out, "Output directory")->required();
    detect->add_option("--rounds", detect_options.refinement_rounds, "Prototype refinement rounds");
    detect->add_option("--min-class-size", detect_options.min_class_size, "Smaller classes stay all clean");
    detect->add_flag("--raw-features", no_normalize, "Use raw embeddings instead of L2-normalized ones");

    std::string eval_run;
    auto* eval = app.add_subcommand("eval", "Evaluate a run directory");
    eval->add_option("--run", eval_run, "Run directory written by 'rolt train'")->required();

    std::string sweep_grid;
    auto* sweep = app.add_subcommand("sweep", "Run a (rho, gamma, method) grid");
    sweep->add_option("--grid", sweep_grid, "Grid JSON file")->required();

    std::string report_grid;
    auto* report = app.add_subcommand("report", "Aggregate sweep outputs into CSV tables");
    report->add_option("--grid", report_grid, "Sweep output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (*simulate)
        {
            rolt::run_simulate(sim, sim_out);
            std::cout << "wrote " << sim_out << "/train and " << sim_out << "/test\n";
        }
        else if (*train)
        {
            const auto config = train_config.empty()
                                    ? rolt::TrainConfig{}
                                    : rolt::train_config_from_text(rolt::io::read_text(train_config));
            const auto result = rolt::run_train(train_data, config, train_out);
            const auto& r = result.report;
            std::cout << "epochs: " << r.epochs.size() << "  last ERM balanced accuracy: "
                      << rolt::io::format_double(r.last_erm_accuracy())
                      << "  last NCM balanced accuracy: " << rolt::io::format_double(r.last_ncm_accuracy())
                      << "\n";
        }
        else if (*detect)
        {
            detect_options.normalize_features = !no_normalize;
            std::cout << rolt::run_detect(detect_data, detect_options, detect_out).dump(2) << "\n";
        }
        else if (*eval)
        {
            rolt::print_metrics(std::cout, rolt::run_eval(eval_run));
        }
        else if (*sweep)
        {
            const fs::path grid_file(sweep_grid);
            const auto grid = rolt::grid_from_json(rolt::io::read_json(grid_file), grid_file);
            rolt::run_sweep(grid);
            std::cout << rolt::io::read_text(grid.out / "table1.csv");
        }
        else if (*report)
        {
            // Either the sweep output directory or the grid file that produced it.
            fs::path dir(report_grid);
            if (fs::is_regular_file(dir))
            {
                dir = rolt::grid_from_json(rolt::io::read_json(dir), dir).out;
            }
            rolt::run_report(dir);
            std::cout << rolt::io::read_text(dir / "table1.csv");
        }
    }
    catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
