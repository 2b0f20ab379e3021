#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "mixnash/pushforward.hpp"

namespace mixnash {

struct CheckResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;   // worst observed error (or ratio, see detail)
  double threshold = 0.0;
  std::string detail;
};

// Injection point for the reverse pass under test, so a broken VJP can be
// shown to fail the gradient check.
using VjpFn = std::function<Eigen::VectorXd(const Generator&, const Eigen::MatrixXd&,
                                            const Eigen::MatrixXd&)>;

struct SelfCheckOptions {
  VjpFn vjp = vjp_params_batch;
  int cases = 100;
  std::uint64_t seed = 20240;
};

CheckResult check_vjp(const SelfCheckOptions& options);
CheckResult check_estimate_grad_F(const SelfCheckOptions& options);
CheckResult check_mcgni_grad(const SelfCheckOptions& options);
CheckResult check_gni_grad(const SelfCheckOptions& options);
CheckResult check_sandwich(const SelfCheckOptions& options);
CheckResult check_pure_reduction(const SelfCheckOptions& options);
CheckResult check_scalar_closed_form(const SelfCheckOptions& options);
CheckResult check_convex_nash(const SelfCheckOptions& options);

std::vector<CheckResult> selfcheck(const SelfCheckOptions& options = {});
std::string format_report(const std::vector<CheckResult>& results);

}  // namespace mixnash
