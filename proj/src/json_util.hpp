#pragma once

#include <cmath>

#include <json.hpp>

#include "cpdgrid/circuit_model.hpp"

namespace cpdgrid::detail {

/// Non-finite values serialize as null.
inline nlohmann::json number(double value) {
  return std::isfinite(value) ? nlohmann::json(value) : nlohmann::json(nullptr);
}

inline nlohmann::json vector_json(const Vector& v) {
  auto out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number(v(i)));
  return out;
}

}  // namespace cpdgrid::detail
