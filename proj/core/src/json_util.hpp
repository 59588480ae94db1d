#pragma once

// JSON emission with 17 significant digits for floating-point values.
// nlohmann's own dump() prints the shortest round-trip form instead.

#include <string>

#include <json.hpp>

#include "lagcast/io.hpp"

namespace lagcast::json_util {

template <class Json>
void dump_into(std::string& out, const Json& j, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close_pad(static_cast<std::size_t>(indent * depth), ' ');
  switch (j.type()) {
    case nlohmann::detail::value_t::number_float:
      out += io::json_number(j.template get<double>());
      return;
    case nlohmann::detail::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad + Json(it.key()).dump() + ": ";
        dump_into(out, it.value(), indent, depth + 1);
      }
      out += "\n" + close_pad + "}";
      return;
    }
    case nlohmann::detail::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      bool first = true;
      for (const auto& v : j) {
        if (!first) out += ",\n";
        first = false;
        out += pad;
        dump_into(out, v, indent, depth + 1);
      }
      out += "\n" + close_pad + "]";
      return;
    }
    default:
      out += j.dump();
  }
}

template <class Json>
std::string dump(const Json& j) {
  std::string out;
  dump_into(out, j, 2, 0);
  out += '\n';
  return out;
}

}  // namespace lagcast::json_util
