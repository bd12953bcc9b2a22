#pragma once

#include <functional>
#include <vector>

namespace stcopula::optim {

struct NelderMeadResult {
  std::vector<double> x;
  double fval = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Downhill simplex minimizer with the standard coefficients
// (reflect 1, expand 2, contract 0.5, shrink 0.5). The initial simplex is
// x0 plus one vertex per dimension offset by `step`, so runs are
// deterministic. Stops when the simplex function-value spread drops below
// `ftol` or after `max_iter` iterations. Non-finite objective values are
// treated as a large penalty.
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             const std::vector<double>& x0, double step = 0.1,
                             double ftol = 1e-9, int max_iter = 2000);

}  // namespace stcopula::optim
