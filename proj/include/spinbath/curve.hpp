#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

// SignalCurve: tau grid, signal values, per-point standard errors, plus a
// JSON metadata blob (plan parameters, provenance) carried through exports.

namespace spinbath {

struct SignalCurve {
  std::vector<double> tau;     // us
  std::vector<double> value;   // dimensionless
  std::vector<double> stderr_; // standard error of the mean per point
  nlohmann::json meta;

  std::size_t size() const { return tau.size(); }

  void validate() const {
    if (value.size() != tau.size() || stderr_.size() != tau.size())
      throw std::invalid_argument("SignalCurve: mismatched column lengths");
    for (double s : stderr_)
      if (s < 0.0) throw std::invalid_argument("SignalCurve: stderr < 0");
  }
};

namespace detail {

inline std::string format_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace detail

inline std::string curve_to_csv(const SignalCurve& c) {
  c.validate();
  std::string out = "tau,value,stderr\n";
  for (std::size_t i = 0; i < c.size(); ++i) {
    out += detail::format_g17(c.tau[i]);
    out += ',';
    out += detail::format_g17(c.value[i]);
    out += ',';
    out += detail::format_g17(c.stderr_[i]);
    out += '\n';
  }
  return out;
}

inline SignalCurve curve_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "tau,value,stderr")
    throw std::invalid_argument("curve_from_csv: expected header tau,value,stderr");
  SignalCurve c;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    double t, v, s;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &t, &v, &s) != 3)
      throw std::invalid_argument("curve_from_csv: malformed row " +
                                  std::to_string(lineno));
    c.tau.push_back(t);
    c.value.push_back(v);
    c.stderr_.push_back(s);
  }
  return c;
}

inline nlohmann::json curve_to_json(const SignalCurve& c) {
  c.validate();
  return nlohmann::json{{"tau", c.tau},
                        {"value", c.value},
                        {"stderr", c.stderr_},
                        {"meta", c.meta}};
}

inline SignalCurve curve_from_json(const nlohmann::json& j) {
  SignalCurve c;
  j.at("tau").get_to(c.tau);
  j.at("value").get_to(c.value);
  j.at("stderr").get_to(c.stderr_);
  if (j.contains("meta")) c.meta = j.at("meta");
  c.validate();
  return c;
}

inline void save_curve_csv(const SignalCurve& c, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("save_curve_csv: cannot open " + path);
  f << curve_to_csv(c);
}

inline SignalCurve load_curve_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("load_curve_csv: cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return curve_from_csv(ss.str());
}

}  // namespace spinbath
