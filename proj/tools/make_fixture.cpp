/*
 * Copyright 2026 The SDL Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Writes a synthetic dataset directory (admin/, intruder/, no_human/) of PPMs.
#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "sdl/dataset.hpp"
#include "sdl/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate a synthetic three-class PPM dataset"};
  std::string out;
  std::size_t per_class = 10;
  std::size_t size = 32;
  std::uint64_t seed = 0;
  app.add_option("out", out, "Output dataset root")->required();
  app.add_option("--per-class", per_class)->capture_default_str();
  app.add_option("--size", size, "Image side in pixels")->capture_default_str();
  app.add_option("--seed", seed)->capture_default_str();
  CLI11_PARSE(app, argc, argv);
  try {
    sdl::write_dataset(sdl::synthetic_dataset(per_class, size, seed), out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  std::cout << "wrote " << 3 * per_class << " images to " << out << '\n';
  return 0;
}
