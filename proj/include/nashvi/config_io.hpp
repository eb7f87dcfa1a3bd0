// Copyright 2026 The nashvi Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "nashvi/game.hpp"
#include "nashvi/policy.hpp"

namespace nashvi {

/// Malformed or inconsistent configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A game document together with the parameterization it ships with.
struct GameDocument {
  TabularGame game;
  Parameterization parameterization;
};

/// Parses a game document. Rows within 1e-12 of stochastic are renormalized;
/// larger deviations, missing rows, and shape errors raise ConfigError.
GameDocument parse_game(const nlohmann::json& doc);
GameDocument load_game(const std::filesystem::path& path);

/// Inverse of parse_game (every transition row and nonzero reward listed).
nlohmann::json game_to_json(const TabularGame& game, const Parameterization& param);

}  // namespace nashvi
