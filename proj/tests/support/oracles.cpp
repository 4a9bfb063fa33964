/*
Copyright 2026 The gcinet Authors. All rights reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace gci::oracle {

using nn::Tensor;

Tensor conv1d_naive(const Tensor& x, const Tensor& w, const Tensor& bias, std::size_t d) {
  const std::size_t B = x.dim(0), Cin = x.dim(1), T = x.dim(2);
  const std::size_t Cout = w.dim(0), K = w.dim(2);
  const std::size_t To = T - (K - 1) * d;
  Tensor y({B, Cout, To});
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t o = 0; o < Cout; ++o) {
      for (std::size_t t = 0; t < To; ++t) {
        double s = bias[o];
        for (std::size_t c = 0; c < Cin; ++c) {
          for (std::size_t k = 0; k < K; ++k) s += w.at(o, c, k) * x.at(b, c, t + k * d);
        }
        y.at(b, o, t) = s;
      }
    }
  }
  return y;
}

Tensor zero_stuff(const Tensor& w, std::size_t d) {
  const std::size_t K = w.dim(2);
  Tensor out({w.dim(0), w.dim(1), (K - 1) * d + 1});
  for (std::size_t o = 0; o < w.dim(0); ++o) {
    for (std::size_t c = 0; c < w.dim(1); ++c) {
      for (std::size_t k = 0; k < K; ++k) out.at(o, c, k * d) = w.at(o, c, k);
    }
  }
  return out;
}

Tensor random_tensor(const nn::Shape& shape, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor t(shape);
  for (double& v : t.values()) v = u(rng);
  return t;
}

GradCheck check_gradient(const std::function<double()>& f, std::span<double> x,
                         std::span<const double> analytic, double h, double kink_tol,
                         double floor) {
  GradCheck r;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double v = x[i];
    const double f0 = f();
    x[i] = v + h;
    const double fp = f();
    x[i] = v - h;
    const double fm = f();
    x[i] = v;
    const double central = (fp - fm) / (2.0 * h);
    const double fwd = (fp - f0) / h, bwd = (f0 - fm) / h;
    if (std::abs(fwd - bwd) > kink_tol * std::max(1.0, std::abs(central))) {
      ++r.kinks;
      continue;
    }
    const double a = analytic[i];
    const double rel = std::abs(a - central) / std::max({std::abs(a), std::abs(central), floor});
    r.max_rel_error = std::max(r.max_rel_error, rel);
    ++r.checked;
  }
  return r;
}

double joint_loss_direct(std::span<const double> y_c, std::span<const double> y_r,
                         std::span<const std::uint8_t> t_c, std::span<const double> t_r,
                         double w_c, double w_r, double eps_p) {
  const double n = static_cast<double>(y_c.size());
  double ce = 0.0, sq = 0.0, pos = 0.0;
  for (std::size_t j = 0; j < y_c.size(); ++j) {
    const double p = std::min(std::max(y_c[j], eps_p), 1.0 - eps_p);
    ce += t_c[j] ? std::log(p) : std::log(1.0 - p);
    if (t_c[j]) {
      sq += (t_r[j] - y_r[j]) * (t_r[j] - y_r[j]);
      pos += 1.0;
    }
  }
  return -(w_c / n) * ce + (pos > 0.0 ? (w_r / pos) * sq : 0.0);
}

std::vector<std::int64_t> cluster_brute(std::span<const CandidateGci> cands,
                                        std::size_t bin_size) {
  std::map<std::int64_t, std::vector<CandidateGci>> bins;
  for (const CandidateGci& c : cands) {
    bins[static_cast<std::int64_t>(std::floor(c.location)) / static_cast<std::int64_t>(bin_size)]
        .push_back(c);
  }
  std::vector<std::int64_t> out;
  double num = 0.0, den = 0.0;
  std::int64_t prev = 0;
  bool open = false;
  for (const auto& [idx, members] : bins) {
    if (open && idx != prev + 1) {
      out.push_back(std::llround(num / den));
      num = den = 0.0;
    }
    for (const CandidateGci& c : members) {
      num += c.probability * c.location;
      den += c.probability;
    }
    prev = idx;
    open = true;
  }
  if (open) out.push_back(std::llround(num / den));
  return out;
}

double CycleCount::ida_ms() const {
  if (errors_s.empty()) return 0.0;
  double mean = 0.0;
  for (double e : errors_s) mean += e;
  mean /= errors_s.size();
  double var = 0.0;
  for (double e : errors_s) var += (e - mean) * (e - mean);
  return 1000.0 * std::sqrt(var / errors_s.size());
}

CycleCount evaluate_brute(const GciLabels& ref, const GciLabels& det, int fs) {
  CycleCount c;
  const std::size_t n = ref.size();
  c.n_cycles = n;
  for (std::size_t k = 0; k < n; ++k) {
    const double r = static_cast<double>(ref[k]);
    const double lo = k > 0 ? 0.5 * (ref[k - 1] + r) : r - 0.5 * (ref[1] - r);
    const double hi = k + 1 < n ? 0.5 * (r + ref[k + 1]) : r + 0.5 * (r - ref[n - 2]);
    std::size_t hits = 0;
    double where = 0.0;
    for (std::int64_t d : det) {
      if (d > lo && d <= hi) {
        ++hits;
        where = static_cast<double>(d);
      }
    }
    if (hits == 0) {
      ++c.missed;
    } else if (hits == 1) {
      ++c.identified;
      c.errors_s.push_back((where - r) / fs);
    } else {
      ++c.false_alarms;
    }
  }
  return c;
}

}  // namespace gci::oracle
