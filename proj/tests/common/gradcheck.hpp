// Copyright 2026 The Semixup Lab Authors
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


// Central finite-difference gradient checker for the batch objectives.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "semixup/losses.hpp"

namespace semixup::oracle {

struct GradCheck {
  std::size_t params = 0;
  std::size_t over = 0;  // elements with relative error above the tolerance
  double max_rel = 0.0;
  std::string worst;
  // Elements whose +h or -h evaluation changed a LeakyReLU sign or a max-pool
  // winner somewhere in the network, and the same statistics without them.
  std::size_t kinked = 0;
  std::size_t over_smooth = 0;
  double max_rel_smooth = 0.0;
  std::string worst_smooth;
};

/// |a - n| / max(|a|, |n|, floor).
inline double relative_error(double analytic, double numeric, double floor = 1e-6) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

/// `loss(net, ctx)` must replay the same random draws on every call.
/// `floor` bounds the denominator of the relative error from below.
inline GradCheck check_gradients(nn::Network<double>& net,
                                 const std::function<double(nn::Network<double>&, const losses::StepContext&)>& loss,
                                 double h, double tol, int epoch = 0, double floor = 1e-6) {
  losses::StepContext ctx;
  ctx.epoch = epoch;
  std::vector<std::int32_t> base;
  ctx.kink_signature = &base;
  net.params().zero_grad();
  loss(net, ctx);

  losses::StepContext probe = ctx;
  probe.grad = false;
  GradCheck out;
  for (auto& t : net.params().tensors) {
    for (std::size_t i = 0; i < t.value.size(); ++i) {
      const double v = t.value[i];
      bool kink = false;
      auto at = [&](double x) {
        std::vector<std::int32_t> sig;
        probe.kink_signature = &sig;
        t.value[i] = v + x;
        const double r = loss(net, probe);
        kink = kink || sig != base;
        return r;
      };
      const double numeric = (at(h) - at(-h)) / (2.0 * h);
      t.value[i] = v;
      const double rel = relative_error(t.grad[i], numeric, floor);
      ++out.params;
      if (rel > tol) ++out.over;
      if (rel > out.max_rel) {
        out.max_rel = rel;
        out.worst = t.name + "[" + std::to_string(i) + "]";
      }
      if (kink) {
        ++out.kinked;
      } else {
        if (rel > tol) ++out.over_smooth;
        if (rel > out.max_rel_smooth) {
          out.max_rel_smooth = rel;
          out.worst_smooth = t.name + "[" + std::to_string(i) + "] analytic " + std::to_string(t.grad[i]) +
                             " numeric " + std::to_string(numeric);
        }
      }
    }
  }
  return out;
}

}  // namespace semixup::oracle
