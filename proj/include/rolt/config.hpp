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

#include <string>

#include <json.hpp>

#include "rolt/trainer.hpp"

namespace rolt
{

/// Parses a TrainConfig from JSON. Every key is optional; unknown keys are
/// rejected. The result is validated.
TrainConfig train_config_from_json(const nlohmann::json& doc);
TrainConfig train_config_from_text(const std::string& text);
nlohmann::json to_json(const TrainConfig& config);

}  // namespace rolt
