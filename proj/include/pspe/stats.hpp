// Copyright 2026 The pspe Authors.
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

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string_view>
#include <vector>

namespace pspe {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

// Sample mean and standard error (sample standard deviation / sqrt(n)).
inline MeanSe mean_se(std::span<const double> xs) {
  const int n = static_cast<int>(xs.size());
  if (n == 0) return {};
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  if (n == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1) / n)};
}

// Pearson correlation; 0 when either series is constant.
inline double pearson(std::span<const double> xs, std::span<const double> ys) {
  const int n = static_cast<int>(xs.size());
  if (n < 2 || ys.size() != xs.size()) return 0.0;
  double x_mean = 0.0, y_mean = 0.0;
  for (int i = 0; i < n; ++i) {
    x_mean += xs[i];
    y_mean += ys[i];
  }
  x_mean /= n;
  y_mean /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (int i = 0; i < n; ++i) {
    const double dx = xs[i] - x_mean, dy = ys[i] - y_mean;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

namespace detail {

// Ranks with ties averaged.
inline std::vector<double> ranks(std::span<const double> xs) {
  const int n = static_cast<int>(xs.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return xs[a] < xs[b]; });
  std::vector<double> out(n);
  int i = 0;
  while (i < n) {
    int j = i;
    while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
    const double rank = 0.5 * (i + j) + 1.0;
    for (int k = i; k <= j; ++k) out[order[k]] = rank;
    i = j + 1;
  }
  return out;
}

}  // namespace detail

inline double spearman(std::span<const double> xs,
                       std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) return 0.0;
  const std::vector<double> rx = detail::ranks(xs);
  const std::vector<double> ry = detail::ranks(ys);
  return pearson(rx, ry);
}

// FNV-1a, used for stable run and stream identifiers.
inline std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace pspe
