#pragma once

#include <functional>
#include <string>
#include <vector>

namespace bbmlab {

// Variance profile sigma: [0,1] -> (0, inf) with two derivatives.  Profiles
// come either from a registry of closed forms (derivatives exact) or from a
// four-column table (t, sigma, dsigma, d2sigma) interpolated with cubic
// Hermite pieces; tabulated derivative columns are cross-checked against the
// value interpolant at load time.
class SigmaProfile {
 public:
  using Fn = std::function<double(double)>;

  SigmaProfile() = default;
  SigmaProfile(std::string name, Fn s, Fn ds, Fn d2s);

  static SigmaProfile registry(const std::string& name);
  static std::vector<std::string> registry_names();
  static SigmaProfile from_table(const std::string& path);
  // Resolves a registry name, else treats the spec as a table path.
  static SigmaProfile resolve(const std::string& spec);

  double sigma(double t) const;
  double dsigma(double t) const;
  double d2sigma(double t) const;
  const std::string& name() const { return name_; }

 private:
  static double clamp01(double t);
  std::string name_;
  Fn s_, ds_, d2s_;
};

}  // namespace bbmlab
