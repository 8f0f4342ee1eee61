#include "bbmlab/sigma_profile.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

#include "bbmlab/errors.hpp"

namespace bbmlab {

SigmaProfile::SigmaProfile(std::string name, Fn s, Fn ds, Fn d2s)
    : name_(std::move(name)), s_(std::move(s)), ds_(std::move(ds)),
      d2s_(std::move(d2s)) {}

double SigmaProfile::clamp01(double t) {
  if (t < -1e-9 || t > 1.0 + 1e-9) {
    throw domain_error("sigma profile argument outside [0,1]");
  }
  return std::clamp(t, 0.0, 1.0);
}

double SigmaProfile::sigma(double t) const { return s_(clamp01(t)); }
double SigmaProfile::dsigma(double t) const { return ds_(clamp01(t)); }
double SigmaProfile::d2sigma(double t) const { return d2s_(clamp01(t)); }

SigmaProfile SigmaProfile::registry(const std::string& name) {
  if (name == "linear2") {  // sigma(0)=2, sigma(1)=1
    return {name, [](double t) { return 2.0 - t; }, [](double) { return -1.0; },
            [](double) { return 0.0; }};
  }
  if (name == "linear15") {
    return {name, [](double t) { return 1.5 - 0.5 * t; },
            [](double) { return -0.5; }, [](double) { return 0.0; }};
  }
  if (name == "root43") {  // sqrt(4 - 3t): curved, still in the admissible class
    return {name, [](double t) { return std::sqrt(4.0 - 3.0 * t); },
            [](double t) { return -1.5 / std::sqrt(4.0 - 3.0 * t); },
            [](double t) { return -2.25 / std::pow(4.0 - 3.0 * t, 1.5); }};
  }
  if (name == "expdecay") {  // 2 * 2^{-t}
    const double l = std::log(2.0);
    return {name, [](double t) { return 2.0 * std::exp(-std::log(2.0) * t); },
            [l](double t) { return -l * 2.0 * std::exp(-l * t); },
            [l](double t) { return l * l * 2.0 * std::exp(-l * t); }};
  }
  if (name == "const1") {  // diagnostic control; rejected by class validation
    return {name, [](double) { return 1.0; }, [](double) { return 0.0; },
            [](double) { return 0.0; }};
  }
  throw domain_error("unknown sigma profile: " + name);
}

std::vector<std::string> SigmaProfile::registry_names() {
  return {"linear2", "linear15", "root43", "expdecay", "const1"};
}

namespace {

struct TableData {
  std::vector<double> t, s, ds, d2s;
};

// Cubic Hermite evaluation of (value, derivative) knots.
double hermite(const std::vector<double>& ts, const std::vector<double>& ys,
               const std::vector<double>& ds, double t) {
  const auto it = std::upper_bound(ts.begin(), ts.end(), t);
  std::size_t i = it == ts.begin() ? 0 : static_cast<std::size_t>(it - ts.begin() - 1);
  if (i + 1 >= ts.size()) i = ts.size() - 2;
  const double h = ts[i + 1] - ts[i];
  const double u = (t - ts[i]) / h;
  const double u2 = u * u, u3 = u2 * u;
  return (2 * u3 - 3 * u2 + 1) * ys[i] + (u3 - 2 * u2 + u) * h * ds[i] +
         (-2 * u3 + 3 * u2) * ys[i + 1] + (u3 - u2) * h * ds[i + 1];
}

double linear(const std::vector<double>& ts, const std::vector<double>& ys,
              double t) {
  const auto it = std::upper_bound(ts.begin(), ts.end(), t);
  std::size_t i = it == ts.begin() ? 0 : static_cast<std::size_t>(it - ts.begin() - 1);
  if (i + 1 >= ts.size()) i = ts.size() - 2;
  const double u = (t - ts[i]) / (ts[i + 1] - ts[i]);
  return (1.0 - u) * ys[i] + u * ys[i + 1];
}

}  // namespace

SigmaProfile SigmaProfile::from_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open sigma table: " + path);
  auto data = std::make_shared<TableData>();
  std::string line;
  while (std::getline(in, line)) {
    const auto pos = line.find('#');
    if (pos != std::string::npos) line.erase(pos);
    std::istringstream row(line);
    double t, s, ds, d2s;
    if (row >> t >> s >> ds >> d2s) {
      data->t.push_back(t);
      data->s.push_back(s);
      data->ds.push_back(ds);
      data->d2s.push_back(d2s);
    } else if (!line.empty() &&
               line.find_first_not_of(" \t\r") != std::string::npos) {
      throw domain_error("sigma table: malformed row: " + line);
    }
  }
  if (data->t.size() < 4) {
    throw domain_error("sigma table: need at least 4 rows");
  }
  if (!std::is_sorted(data->t.begin(), data->t.end())) {
    throw domain_error("sigma table: abscissae must be increasing");
  }
  if (std::abs(data->t.front()) > 1e-9 || std::abs(data->t.back() - 1.0) > 1e-9) {
    throw domain_error("sigma table: must cover [0,1]");
  }

  SigmaProfile p(
      "table:" + path,
      [data](double t) { return hermite(data->t, data->s, data->ds, t); },
      [data](double t) { return hermite(data->t, data->ds, data->d2s, t); },
      [data](double t) { return linear(data->t, data->d2s, t); });

  // Derivative columns must agree with the value interpolant.
  const double h = 1e-5;
  for (int i = 0; i <= 100; ++i) {
    const double t = 0.01 * i;
    const double lo = std::max(0.0, t - h), hi = std::min(1.0, t + h);
    const double fd = (p.sigma(hi) - p.sigma(lo)) / (hi - lo);
    if (std::abs(fd - p.dsigma(0.5 * (lo + hi))) > 1e-4) {
      throw domain_error("sigma table: derivative column inconsistent");
    }
  }
  return p;
}

SigmaProfile SigmaProfile::resolve(const std::string& spec) {
  const auto names = registry_names();
  if (std::find(names.begin(), names.end(), spec) != names.end()) {
    return registry(spec);
  }
  return from_table(spec);
}

}  // namespace bbmlab
