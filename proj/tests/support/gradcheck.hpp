//
// stgg - Copyright 2026 The stgg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef STGG_TESTS_GRADCHECK_HPP_
#define STGG_TESTS_GRADCHECK_HPP_

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "stgg/model.hpp"

namespace stgg::testing {

struct GradCheckResult {
  double max_rel = 0.0;
  std::string worst;  // "tensor[index]"
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  long checked = 0;
  std::map<std::string, double> per_tensor;
};

/// Central differences of the double-precision loss against the analytic
/// gradient, every scalar of every tensor. Relative error is
/// |a - n| / max(|a|, |n|), taken as 0 when neither exceeds abs_floor.
inline GradCheckResult grad_check(const ModelConfig &cfg,
                                  const ModelParams<double> &params,
                                  const Batch &b, double lambda, double h,
                                  double abs_floor) {
  ModelParams<double> grad;
  loss_and_grad<double>(params, cfg, b, lambda, &grad);
  std::vector<const Mat<double> *> g;
  grad.visit([&](const std::string &, const Mat<double> &m, bool) {
    g.push_back(&m);
  });

  GradCheckResult r;
  ModelParams<double> p = params;
  std::size_t t = 0;
  p.visit([&](const std::string &name, Mat<double> &m, bool) {
    double worst_here = 0.0;
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      const double x = m.data()[i];
      m.data()[i] = x + h;
      const double up = loss_and_grad<double>(p, cfg, b, lambda, nullptr).total;
      m.data()[i] = x - h;
      const double dn = loss_and_grad<double>(p, cfg, b, lambda, nullptr).total;
      m.data()[i] = x;
      const double num = (up - dn) / (2.0 * h);
      const double ana = g[t]->data()[i];
      const double scale = std::max(std::abs(num), std::abs(ana));
      const double rel = scale <= abs_floor ? 0.0 : std::abs(num - ana) / scale;
      worst_here = std::max(worst_here, rel);
      ++r.checked;
      if (rel > r.max_rel) {
        r.max_rel = rel;
        r.worst = name + "[" + std::to_string(i) + "]";
        r.worst_analytic = ana;
        r.worst_numeric = num;
      }
    }
    r.per_tensor[name] = worst_here;
    ++t;
  });
  return r;
}

}  // namespace stgg::testing

#endif  // STGG_TESTS_GRADCHECK_HPP_
