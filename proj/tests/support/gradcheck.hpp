#pragma once

// Central finite-difference oracle for backward passes. Works on any scalar
// loss expressed as a function of a parameter set; intended for 64-bit mode
// at small dimensions.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "temprel/tensor.hpp"

namespace temprel::testing {

struct GradMismatch {
  std::string param;
  Eigen::Index row = 0, col = 0;
  double analytic = 0, fd = 0, rel_error = 0;
};

/// Recomputes `loss_fn` with each parameter entry nudged by ±step and
/// compares (f⁺ − f⁻) / 2step against the analytic gradient stored on the
/// parameters. Returns all entries whose relative error exceeds `tol`.
inline std::vector<GradMismatch> gradcheck(
    std::vector<NamedParam<double>>& params,
    const std::function<double()>& loss_fn,
    const std::function<void()>& backward_fn,
    double step = 1e-4, double tol = 1e-4) {
  backward_fn();  // populate analytic gradients

  std::vector<Mat<double>> analytic;
  analytic.reserve(params.size());
  for (auto& p : params) {
    if (p.var.grad().size() == 0)
      analytic.push_back(Mat<double>::Zero(p.var.rows(), p.var.cols()));
    else
      analytic.push_back(p.var.grad());
  }

  std::vector<GradMismatch> bad;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    auto& value = params[pi].var.mutable_value();
    for (Eigen::Index c = 0; c < value.cols(); ++c) {
      for (Eigen::Index r = 0; r < value.rows(); ++r) {
        const double saved = value(r, c);
        value(r, c) = saved + step;
        const double up = loss_fn();
        value(r, c) = saved - step;
        const double down = loss_fn();
        value(r, c) = saved;
        const double fd = (up - down) / (2.0 * step);
        const double a = analytic[pi](r, c);
        // Relative comparison with an absolute floor: entries this small sit
        // below the finite-difference noise floor and carry no signal.
        const double atol = 1e-8;
        const double diff = std::abs(a - fd);
        const double rel = diff / std::max(std::max(std::abs(a), std::abs(fd)), atol);
        if (diff > atol + tol * std::max(std::abs(a), std::abs(fd)))
          bad.push_back({params[pi].name, r, c, a, fd, rel});
      }
    }
  }
  return bad;
}

}  // namespace temprel::testing
