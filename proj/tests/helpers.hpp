/* Copyright 2026 The spdmbi Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/


#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "spdmbi/spin_core.hpp"

namespace testing {

inline constexpr double pi = std::numbers::pi;

inline std::vector<double> linspace(double lo, double hi, int points) {
  std::vector<double> out(points);
  for (int i = 0; i < points; ++i)
    out[i] = points == 1 ? lo : lo + (hi - lo) * i / (points - 1);
  return out;
}

inline double max_diff(const spdmbi::CMatrix<double>& a, const spdmbi::CMatrix<double>& b) {
  return spdmbi::max_abs<double>(a - b);
}

inline double max_diff(const spdmbi::StateVector& a, const spdmbi::StateVector& b) {
  return (a.coeffs() - b.coeffs()).cwiseAbs().maxCoeff();
}

}  // namespace testing
