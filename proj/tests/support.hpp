// Copyright 2026 The lcpso Authors
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

#ifndef LCPSO_TESTS__SUPPORT_HPP_
#define LCPSO_TESTS__SUPPORT_HPP_

#include "lcpso/harness.hpp"

#include <filesystem>
#include <random>
#include <string>

namespace lcpso::test
{

inline std::filesystem::path config_path(const std::string & name)
{
  return std::filesystem::path(LCPSO_TEST_CONFIG_DIR) / name;
}

inline harness::ScenarioConfig nominal()
{
  return harness::load_config(config_path("nominal.toml"));
}

// Uniform double in [lo, hi).
inline double uniform(std::mt19937_64 & rng, double lo, double hi)
{
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace lcpso::test

#endif  // LCPSO_TESTS__SUPPORT_HPP_
