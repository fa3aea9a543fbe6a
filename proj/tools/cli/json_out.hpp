#pragma once

#include <charconv>
#include <cmath>
#include <stdexcept>
#include <string>

#include "json.hpp"

namespace fenchelkit::cli {

using Json = nlohmann::ordered_json;

/// Shortest fixed form is not what we want here: every double is printed
/// with 17 significant digits so that the text round-trips and never depends
/// on the locale.
inline std::string format_double(double v) {
  if (!std::isfinite(v)) throw std::logic_error("format_double: non-finite value");
  if (v == 0.0) return std::signbit(v) ? "-0" : "0";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  if (ec != std::errc()) throw std::logic_error("format_double: buffer too small");
  return std::string(buf, end);
}

/// Non-finite values are stored as the tokens "inf", "-inf" and "nan".
inline Json num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

namespace detail {

inline bool is_flat(const Json& j) {
  for (const auto& e : j)
    if (e.is_structured()) return false;
  return true;
}

inline void write(const Json& j, std::string& out, int depth) {
  const std::string pad(2 * (depth + 1), ' '), close(2 * depth, ' ');
  switch (j.type()) {
    case Json::value_t::number_float:
      out += format_double(j.get<double>());
      return;
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      const bool flat = is_flat(j);
      out += '[';
      bool first = true;
      for (const auto& e : j) {
        if (!first) out += flat ? ", " : ",";
        if (!flat) out += "\n" + pad;
        write(e, out, depth + 1);
        first = false;
      }
      if (!flat) out += "\n" + close;
      out += ']';
      return;
    }
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (const auto& [k, v] : j.items()) {
        if (!first) out += ',';
        out += "\n" + pad + Json(k).dump() + ": ";
        write(v, out, depth + 1);
        first = false;
      }
      out += "\n" + close + '}';
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace detail

inline std::string to_text(const Json& j) {
  std::string out;
  detail::write(j, out, 0);
  out += '\n';
  return out;
}

/// One CSV cell; strings pass through, doubles use the same formatting.
inline std::string csv_cell(const Json& j) {
  if (j.is_number_float()) return format_double(j.get<double>());
  if (j.is_string()) return j.get<std::string>();
  if (j.is_null()) return "";
  return j.dump();
}

}  // namespace fenchelkit::cli
