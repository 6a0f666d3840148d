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
#include <vector>

namespace spdmbi {

// One grid point: detuning (or modulation) with <Jz>, <Jz^2>.
struct SpectrumRow {
  double param = 0.0;
  double jz = 0.0;
  double jz2 = 0.0;

  double variance() const { return jz2 - jz * jz; }
};

struct SpectrumTable {
  std::vector<SpectrumRow> rows;

  std::size_t size() const { return rows.size(); }
  const SpectrumRow& operator[](std::size_t i) const { return rows[i]; }

  std::vector<double> params() const {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r.param);
    return out;
  }
  std::vector<double> jz() const {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r.jz);
    return out;
  }
};

// Sign change of <Jz> closest to `center`, linearly interpolated; NaN if none.
inline double zero_crossing(const SpectrumTable& t, double center = 0.0) {
  double best = std::nan("");
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    const auto& a = t[i];
    const auto& b = t[i + 1];
    double at;
    if (a.jz == 0.0)
      at = a.param;
    else if ((a.jz < 0) != (b.jz < 0) && b.jz != 0.0)
      at = a.param - a.jz * (b.param - a.param) / (b.jz - a.jz);
    else
      continue;
    if (std::isnan(best) || std::abs(at - center) < std::abs(best - center)) best = at;
  }
  if (!t.rows.empty() && t.rows.back().jz == 0.0 &&
      (std::isnan(best) || std::abs(t.rows.back().param - center) < std::abs(best - center)))
    best = t.rows.back().param;
  return best;
}

}  // namespace spdmbi
