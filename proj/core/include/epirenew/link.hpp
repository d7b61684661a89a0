#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "epirenew/math_utils.hpp"

namespace epirenew {

/// Link for rate parameters: identity, log, or a scaled logit whose inverse
/// maps the real line onto (0, K).
struct LinkFunction {
  enum class Kind { identity, log_link, scaled_logit };

  Kind kind = Kind::log_link;
  double upper = 6.0;  // K, scaled_logit only

  static LinkFunction identity() { return {Kind::identity, 0.0}; }
  static LinkFunction log_link() { return {Kind::log_link, 0.0}; }
  static LinkFunction scaled_logit(double upper) {
    if (!(upper > 0.0)) throw std::invalid_argument("scaled logit needs K > 0");
    return {Kind::scaled_logit, upper};
  }
  static LinkFunction from_string(const std::string& name, double upper = 6.0) {
    if (name == "identity") return identity();
    if (name == "log") return log_link();
    if (name == "scaled_logit") return scaled_logit(upper);
    throw std::invalid_argument("unknown link: " + name);
  }
  std::string name() const {
    switch (kind) {
      case Kind::identity:
        return "identity";
      case Kind::log_link:
        return "log";
      default:
        return "scaled_logit";
    }
  }

  double inverse(double x) const {
    switch (kind) {
      case Kind::identity:
        return x;
      case Kind::log_link:
        return std::exp(x);
      default:
        return upper * logistic(x);
    }
  }

  /// d inverse(x) / dx.
  double inverse_derivative(double x) const {
    switch (kind) {
      case Kind::identity:
        return 1.0;
      case Kind::log_link:
        return std::exp(x);
      default: {
        double p = logistic(x);
        return upper * p * (1.0 - p);
      }
    }
  }

  /// Forward map; defined on R, (0, inf), resp. (0, K).
  double forward(double y) const {
    switch (kind) {
      case Kind::identity:
        return y;
      case Kind::log_link:
        if (!(y > 0.0)) throw std::invalid_argument("log link needs y > 0");
        return std::log(y);
      default:
        if (!(y > 0.0 && y < upper)) {
          throw std::invalid_argument("scaled logit needs 0 < y < K");
        }
        return std::log(y) - std::log(upper - y);
    }
  }
};

}  // namespace epirenew
