// Copyright 2026  The PLF Toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef PLF_GRADCHECK_H_
#define PLF_GRADCHECK_H_

#include <cstdint>
#include <string>

#include "plf/model.h"
#include "plf/objective.h"
#include "plf/phonology.h"

namespace plf {

struct GradCheckOptions {
  int configurations = 100;
  int max_phones = 6;
  int max_plfs = 8;
  int max_frames = 5;  // PLF (output) frames per utterance
  double step = 1e-4;
  double tolerance = 1e-4;
  /// Gradient magnitudes below this are compared on an absolute scale.
  double magnitude_floor = 1e-6;
  int coordinates_per_tensor = 16;
  uint64_t seed = 0;
};

struct GradCheckReport {
  int configurations = 0;
  size_t checked = 0;
  size_t skipped = 0;  // perturbation crossed a ReLU kink
  double max_relative_error = 0.0;
  std::string worst;  // description of the worst coordinate
  bool passed() const;
  double tolerance = 0.0;
};

/// A random spec with P <= max_phones, F <= max_plfs, optional vowel-style
/// groups with fractional weights, and every row nonempty.
ConversionSpec RandomSpec(uint64_t seed, int max_phones, int max_plfs);

/// Checks analytic gradients of the combined objective for one model/input
/// against central differences, accumulating into `report`.
void CheckGradients(const PlfModel& model, const ConversionSpec& spec, const Matrix& frames,
                    const std::vector<int>& labels, const ObjectiveConfig& cfg,
                    const GradCheckOptions& options, uint64_t seed, GradCheckReport* report);

GradCheckReport RunGradientCheck(const GradCheckOptions& options);

}  // namespace plf

#endif  // PLF_GRADCHECK_H_
