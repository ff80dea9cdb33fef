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

#include "rolt/config.hpp"

#include <set>

namespace rolt
{
namespace
{

using json = nlohmann::json;

void reject_unknown(const json& doc, const std::set<std::string>& known, const std::string& where)
{
    require(doc.is_object(), where + " must be a JSON object");
    for (const auto& item : doc.items())
    {
        require(known.contains(item.key()), "unknown key '" + item.key() + "' in " + where);
    }
}

template <typename T>
void read_integer(const json& doc, const char* key, T& out)
{
    if (!doc.contains(key))
    {
        return;
    }
    const auto& v = doc.at(key);
    require(v.is_number_integer(), std::string("config key '") + key + "' must be an integer");
    out = v.get<T>();
}

void read_number(const json& doc, const char* key, double& out)
{
    if (!doc.contains(key))
    {
        return;
    }
    const auto& v = doc.at(key);
    require(v.is_number(), std::string("config key '") + key + "' must be a number");
    out = v.get<double>();
}

void read_bool(const json& doc, const char* key, bool& out)
{
    if (!doc.contains(key))
    {
        return;
    }
    const auto& v = doc.at(key);
    require(v.is_boolean(), std::string("config key '") + key + "' must be a boolean");
    out = v.get<bool>();
}

}  // namespace

TrainConfig train_config_from_json(const json& doc)
{
    reject_unknown(
        doc,
        {"warmup_epochs",
         "robust_epochs",
         "batch_size",
         "learning_rate",
         "lr_schedule",
         "weight_decay",
         "alpha",
         "priors",
         "drw_enabled",
         "drw_start_fraction",
         "drw_beta",
         "refinement_rounds",
         "min_class_size",
         "normalize_features",
         "seed"},
        "train config");

    TrainConfig config;
    read_integer(doc, "warmup_epochs", config.warmup_epochs);
    read_integer(doc, "robust_epochs", config.robust_epochs);
    read_integer(doc, "batch_size", config.batch_size);
    read_number(doc, "learning_rate", config.learning_rate);
    read_number(doc, "weight_decay", config.weight_decay);
    read_number(doc, "alpha", config.alpha);
    read_bool(doc, "drw_enabled", config.drw_enabled);
    read_number(doc, "drw_start_fraction", config.drw_start_fraction);
    read_number(doc, "drw_beta", config.drw_beta);
    read_integer(doc, "refinement_rounds", config.refinement_rounds);
    read_integer(doc, "min_class_size", config.min_class_size);
    read_bool(doc, "normalize_features", config.normalize_features);
    read_integer(doc, "seed", config.seed);

    if (doc.contains("priors"))
    {
        const auto& p = doc.at("priors");
        reject_unknown(p, {"erm", "ncm", "original"}, "priors");
        read_number(p, "erm", config.priors.erm);
        read_number(p, "ncm", config.priors.ncm);
        read_number(p, "original", config.priors.original);
    }
    if (doc.contains("lr_schedule"))
    {
        const auto& steps = doc.at("lr_schedule");
        require(steps.is_array(), "lr_schedule must be an array");
        for (const auto& step : steps)
        {
            reject_unknown(step, {"epoch", "multiplier"}, "lr_schedule entry");
            require(
                step.contains("epoch") && step.contains("multiplier"),
                "lr_schedule entries need 'epoch' and 'multiplier'");
            LrMilestone m;
            read_integer(step, "epoch", m.epoch);
            read_number(step, "multiplier", m.multiplier);
            config.lr_schedule.push_back(m);
        }
    }
    config.validate();
    return config;
}

TrainConfig train_config_from_text(const std::string& text)
{
    json doc;
    try
    {
        doc = json::parse(text);
    }
    catch (const json::parse_error& e)
    {
        throw InvalidArgument(std::string("train config is not valid JSON: ") + e.what());
    }
    return train_config_from_json(doc);
}

json to_json(const TrainConfig& config)
{
    json schedule = json::array();
    for (const auto& step : config.lr_schedule)
    {
        schedule.push_back({{"epoch", step.epoch}, {"multiplier", step.multiplier}});
    }
    return {
        {"warmup_epochs", config.warmup_epochs},
        {"robust_epochs", config.robust_epochs},
        {"batch_size", config.batch_size},
        {"learning_rate", config.learning_rate},
        {"lr_schedule", schedule},
        {"weight_decay", config.weight_decay},
        {"alpha", config.alpha},
        {"priors",
         {{"erm", config.priors.erm},
          {"ncm", config.priors.ncm},
          {"original", config.priors.original}}},
        {"drw_enabled", config.drw_enabled},
        {"drw_start_fraction", config.drw_start_fraction},
        {"drw_beta", config.drw_beta},
        {"refinement_rounds", config.refinement_rounds},
        {"min_class_size", config.min_class_size},
        {"normalize_features", config.normalize_features},
        {"seed", config.seed},
    };
}

}  // namespace rolt
