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

#include <map>
#include <utility>

#include "spdmbi/spin_core.hpp"

namespace spdmbi::detail {

// Per-thread cache of J_x, J_y, J_z and their spectra keyed by (N, axis).
// Schedules apply the same rotations thousands of times in a sweep.
struct AxisEntry {
  CMatrix<double> generator;
  SpectralPropagator<double> spectrum;
};

inline const AxisEntry& axis_entry(const SpinSystem& sys, Axis axis) {
  thread_local std::map<std::pair<int, int>, AxisEntry> cache;
  const auto key = std::make_pair(sys.n_particles(), static_cast<int>(axis));
  auto it = cache.find(key);
  if (it == cache.end()) {
    const OperatorMatrix gen = axis_operator(sys, axis);
    it = cache.emplace(key, AxisEntry{gen.matrix(), SpectralPropagator<double>(gen)}).first;
  }
  return it->second;
}

inline const CMatrix<double>& axis_generator(const SpinSystem& sys, Axis axis) {
  return axis_entry(sys, axis).generator;
}

inline const SpectralPropagator<double>& axis_spectrum(const SpinSystem& sys, Axis axis) {
  return axis_entry(sys, axis).spectrum;
}

// Spectrum of Jx^2 for the exp(-i a Jx^2) twist readout.
inline const SpectralPropagator<double>& twist_x_spectrum(const SpinSystem& sys) {
  thread_local std::map<int, SpectralPropagator<double>> cache;
  auto it = cache.find(sys.n_particles());
  if (it == cache.end())
    it = cache
             .emplace(sys.n_particles(),
                      SpectralPropagator<double>(collective_operator(sys, Component::Jx2)))
             .first;
  return it->second;
}

}  // namespace spdmbi::detail
