#pragma once

#include <string>
#include <utility>
#include <vector>

#include "bbmlab/rng.hpp"

namespace bbmlab {

// Offspring distribution of the branching events: integer L >= 2 with finite
// support.  The branching rate beta0 = (2(E[L]-1))^{-1} normalizes the
// expected population to e^{t/2}.
class OffspringLaw {
 public:
  explicit OffspringLaw(std::vector<std::pair<int, double>> pmf);

  static OffspringLaw binary();  // L = 2 a.s.
  // "2" or "3" for a deterministic L, else "2:0.7,3:0.3" style pmf lists.
  static OffspringLaw from_spec(const std::string& spec);

  double mean() const { return mean_; }
  double second_factorial() const { return second_factorial_; }  // E[L(L-1)]
  double beta0() const { return beta0_; }
  bool is_binary() const;
  const std::vector<std::pair<int, double>>& pmf() const { return pmf_; }

  // E[F^L]; the reaction nonlinearity of the front equation.
  double generating(double F) const;

  int sample(Rng& rng) const;

 private:
  std::vector<std::pair<int, double>> pmf_;
  std::vector<double> cumulative_;
  double mean_ = 0.0, second_factorial_ = 0.0, beta0_ = 0.0;
};

}  // namespace bbmlab
