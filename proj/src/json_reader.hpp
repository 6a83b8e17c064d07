// Copyright 2026 The scvx Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Strict reader over a JSON object: every key must be consumed.

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "scvx/cli.hpp"

namespace scvx::detail {

class ObjectReader {
 public:
  ObjectReader(const nlohmann::json& j, std::string path, std::string code)
      : j_{j}, path_{std::move(path)}, code_{std::move(code)} {
    if (!j_.is_object()) {
      throw CliError(code_, (path_.empty() ? std::string("top level") : "'" + path_ + "'") +
                                " must be a JSON object");
    }
  }

  std::string key_path(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }

  [[noreturn]] void fail(std::string_view key, const std::string& what) const {
    throw CliError(code_, "key '" + key_path(key) + "': " + what);
  }

  bool has(std::string_view key) const { return j_.contains(std::string(key)); }

  /// Marks the key consumed; null if absent.
  const nlohmann::json* child(std::string_view key) {
    const auto it = j_.find(std::string(key));
    if (it == j_.end()) {
      return nullptr;
    }
    seen_.emplace(key);
    return &*it;
  }

  template <typename T>
  bool read(std::string_view key, T& out) {
    const nlohmann::json* v = child(key);
    if (v == nullptr) {
      return false;
    }
    out = convert<T>(key, *v);
    return true;
  }

  /// Throws naming the first key that was never read.
  void finish() const {
    for (const auto& item : j_.items()) {
      if (seen_.count(item.key()) == 0) {
        throw CliError(code_, "unknown key '" + key_path(item.key()) + "'");
      }
    }
  }

 private:
  template <typename T>
  T convert(std::string_view key, const nlohmann::json& v) const {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) fail(key, "expected true or false");
      return v.get<bool>();
    } else if constexpr (std::is_same_v<T, double>) {
      return to_double(key, v);
    } else if constexpr (std::is_same_v<T, std::optional<double>>) {
      if (v.is_null()) return std::nullopt;
      return to_double(key, v);
    } else if constexpr (std::is_same_v<T, int>) {
      const std::int64_t x = to_int64(key, v);
      if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
        fail(key, "integer out of range");
      }
      return static_cast<int>(x);
    } else if constexpr (std::is_same_v<T, std::uint64_t>) {
      if (v.is_number_unsigned()) return v.get<std::uint64_t>();
      if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
        return static_cast<std::uint64_t>(v.get<std::int64_t>());
      }
      fail(key, "expected a non-negative integer");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) fail(key, "expected a string");
      return v.get<std::string>();
    } else if constexpr (std::is_same_v<T, std::vector<int>>) {
      if (!v.is_array()) fail(key, "expected an array of integers");
      std::vector<int> out;
      for (const auto& e : v) {
        out.push_back(static_cast<int>(to_int64(key, e)));
      }
      return out;
    } else if constexpr (std::is_same_v<T, Eigen::VectorXd> ||
                         std::is_same_v<T, Eigen::Vector2d>) {
      if (!v.is_array()) fail(key, "expected an array of numbers");
      if constexpr (std::is_same_v<T, Eigen::Vector2d>) {
        if (v.size() != 2) fail(key, "expected 2 numbers");
      }
      T out(static_cast<Eigen::Index>(v.size()));
      for (std::size_t i = 0; i < v.size(); ++i) {
        out(static_cast<Eigen::Index>(i)) = to_double(key, v[i]);
      }
      return out;
    } else {
      static_assert(sizeof(T) == 0, "unsupported field type");
    }
  }

  double to_double(std::string_view key, const nlohmann::json& v) const {
    if (!v.is_number()) fail(key, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(key, "expected a finite number");
    return x;
  }

  std::int64_t to_int64(std::string_view key, const nlohmann::json& v) const {
    if (v.is_number_unsigned()) {
      const auto u = v.get<std::uint64_t>();
      if (u > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
        fail(key, "integer out of range");
      }
      return static_cast<std::int64_t>(u);
    }
    if (!v.is_number_integer()) fail(key, "expected an integer");
    return v.get<std::int64_t>();
  }

  const nlohmann::json& j_;
  std::string path_;
  std::string code_;
  std::set<std::string, std::less<>> seen_;
};

inline nlohmann::json to_array(const Eigen::VectorXd& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    a.push_back(v(i));
  }
  return a;
}

/// Strict parse of the physical drag parameters; absent keys keep p's values.
void read_drag_params(const nlohmann::json& j, const std::string& path,
                      const std::string& code, DragBenchParams& p);
nlohmann::json drag_params_to_json(const DragBenchParams& p);

}  // namespace scvx::detail
