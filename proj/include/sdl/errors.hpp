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

#pragma once

#include <stdexcept>
#include <string>

namespace sdl {

// Base of every domain error. The CLI maps these to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define SDL_DEFINE_ERROR(Name)          \
  class Name : public Error {           \
   public:                              \
    using Error::Error;                 \
  }

SDL_DEFINE_ERROR(ShapeError);
SDL_DEFINE_ERROR(AxisError);
SDL_DEFINE_ERROR(NumericError);
SDL_DEFINE_ERROR(RangeError);
SDL_DEFINE_ERROR(FormatError);
SDL_DEFINE_ERROR(ConfigError);
SDL_DEFINE_ERROR(DatasetError);
SDL_DEFINE_ERROR(DegenerateError);
SDL_DEFINE_ERROR(SampleSizeError);
SDL_DEFINE_ERROR(BenchError);

#undef SDL_DEFINE_ERROR

}  // namespace sdl
