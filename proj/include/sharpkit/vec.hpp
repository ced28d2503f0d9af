#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "sharpkit/common.hpp"

namespace sharpkit {

inline void check_same_length(const ParamVector& a, const ParamVector& b,
                              const char* where) {
  if (a.size() != b.size()) {
    throw DimensionError(std::string(where) + ": length mismatch (" +
                         std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()) + ")");
  }
}

inline double dot(const ParamVector& a, const ParamVector& b) {
  check_same_length(a, b, "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const ParamVector& a) {
  double s = 0.0;
  for (double x : a) s += x * x;
  return std::sqrt(s);
}

inline ParamVector scaled(const ParamVector& a, double c) {
  ParamVector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = c * a[i];
  return r;
}

// y += c * x
inline void axpy(double c, const ParamVector& x, ParamVector& y) {
  check_same_length(x, y, "axpy");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += c * x[i];
}

inline ParamVector added(const ParamVector& a, const ParamVector& b) {
  check_same_length(a, b, "added");
  ParamVector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

inline ParamVector subtracted(const ParamVector& a, const ParamVector& b) {
  check_same_length(a, b, "subtracted");
  ParamVector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

inline bool all_finite(const ParamVector& a) {
  for (double x : a) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace sharpkit
