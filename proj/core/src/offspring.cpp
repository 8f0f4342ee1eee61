#include "bbmlab/offspring.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bbmlab/errors.hpp"

namespace bbmlab {

OffspringLaw::OffspringLaw(std::vector<std::pair<int, double>> pmf)
    : pmf_(std::move(pmf)) {
  if (pmf_.empty()) throw domain_error("offspring: empty pmf");
  std::sort(pmf_.begin(), pmf_.end());
  double total = 0.0;
  for (const auto& [k, p] : pmf_) {
    if (k < 2) throw domain_error("offspring: support must be >= 2");
    if (p < 0.0) throw domain_error("offspring: negative probability");
    total += p;
    mean_ += k * p;
    second_factorial_ += static_cast<double>(k) * (k - 1) * p;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw domain_error("offspring: probabilities must sum to 1");
  }
  beta0_ = 1.0 / (2.0 * (mean_ - 1.0));
  cumulative_.reserve(pmf_.size());
  double c = 0.0;
  for (const auto& [k, p] : pmf_) {
    c += p;
    cumulative_.push_back(c);
  }
  cumulative_.back() = 1.0;
}

OffspringLaw OffspringLaw::binary() { return OffspringLaw({{2, 1.0}}); }

OffspringLaw OffspringLaw::from_spec(const std::string& spec) {
  if (spec == "binary") return binary();
  if (spec.find(':') == std::string::npos) {
    // deterministic offspring count
    int k = 0;
    std::istringstream in(spec);
    if (!(in >> k)) throw domain_error("offspring: cannot parse spec " + spec);
    return OffspringLaw({{k, 1.0}});
  }
  std::vector<std::pair<int, double>> pmf;
  std::istringstream in(spec);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto pos = item.find(':');
    if (pos == std::string::npos) {
      throw domain_error("offspring: cannot parse spec " + spec);
    }
    pmf.emplace_back(std::stoi(item.substr(0, pos)),
                     std::stod(item.substr(pos + 1)));
  }
  return OffspringLaw(std::move(pmf));
}

bool OffspringLaw::is_binary() const {
  return pmf_.size() == 1 && pmf_[0].first == 2;
}

double OffspringLaw::generating(double F) const {
  double s = 0.0;
  for (const auto& [k, p] : pmf_) s += p * std::pow(F, k);
  return s;
}

int OffspringLaw::sample(Rng& rng) const {
  if (pmf_.size() == 1) return pmf_[0].first;
  const double u = rng.uniform01();
  for (std::size_t i = 0; i < cumulative_.size(); ++i) {
    if (u < cumulative_[i]) return pmf_[i].first;
  }
  return pmf_.back().first;
}

}  // namespace bbmlab
