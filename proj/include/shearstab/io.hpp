#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "profile.hpp"

namespace shearstab::io {

using Json = nlohmann::json;

// 17 significant digits round-trip any double; '.' decimal regardless of locale.
inline std::string format_double(double v) {
  char buf[40];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, r.ptr);
}

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  static std::string cell(double v) { return format_double(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(bool v) { return v ? "1" : "0"; }
  static std::string cell(const std::string& v) { return v; }

  template <class... T>
  void add(const T&... v) {
    if (sizeof...(T) != columns.size()) throw DomainError("CsvTable::add: row width does not match the header");
    rows.push_back({cell(v)...});
  }

  std::string str() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& r) {
      for (size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + r[i];
      out += '\n';
    };
    line(columns);
    for (const auto& r : rows) line(r);
    return out;
  }
};

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("write: cannot open '" + path + "'");
  f << text;
  if (!f) throw IoError("write: failed writing '" + path + "'");
}

// Column-oriented binary table: "OSM1", u32 metadata count, (u32 len, key,
// u32 len, value) pairs, u32 column count, u64 row count, (u32 len, name) per
// column, then each column's doubles. All integers and doubles little-endian.
struct BinaryTable {
  std::map<std::string, std::string> meta;
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;

  void add_column(std::string name, std::vector<double> data) {
    if (!columns.empty() && data.size() != columns.front().size())
      throw DomainError("BinaryTable::add_column: column '" + name + "' has the wrong length");
    names.push_back(std::move(name));
    columns.push_back(std::move(data));
  }
  size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
};

namespace detail {

template <class U>
void put_le(std::string& out, U v) {
  for (size_t i = 0; i < sizeof(U); ++i) out += char((v >> (8 * i)) & 0xff);
}

inline void put_str(std::string& out, const std::string& s) {
  put_le<std::uint32_t>(out, std::uint32_t(s.size()));
  out += s;
}

struct Reader {
  const std::string& b;
  size_t pos = 0;
  template <class U>
  U get() {
    if (pos + sizeof(U) > b.size()) throw DomainError("read_osm1: truncated table");
    U v = 0;
    for (size_t i = 0; i < sizeof(U); ++i) v |= U(std::uint8_t(b[pos + i])) << (8 * i);
    pos += sizeof(U);
    return v;
  }
  std::string str() {
    const auto n = get<std::uint32_t>();
    if (pos + n > b.size()) throw DomainError("read_osm1: truncated table");
    std::string s = b.substr(pos, n);
    pos += n;
    return s;
  }
};

}  // namespace detail

inline std::string encode_osm1(const BinaryTable& t) {
  std::string out = "OSM1";
  detail::put_le<std::uint32_t>(out, std::uint32_t(t.meta.size()));
  for (const auto& [k, v] : t.meta) {
    detail::put_str(out, k);
    detail::put_str(out, v);
  }
  detail::put_le<std::uint32_t>(out, std::uint32_t(t.names.size()));
  detail::put_le<std::uint64_t>(out, std::uint64_t(t.rows()));
  for (const auto& n : t.names) detail::put_str(out, n);
  for (const auto& c : t.columns)
    for (double v : c) {
      std::uint64_t bits;
      std::memcpy(&bits, &v, sizeof bits);
      detail::put_le(out, bits);
    }
  return out;
}

inline BinaryTable decode_osm1(const std::string& b) {
  if (b.size() < 4 || b.compare(0, 4, "OSM1") != 0) throw DomainError("read_osm1: bad magic");
  detail::Reader r{b, 4};
  BinaryTable t;
  const auto nm = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < nm; ++i) {
    auto k = r.str();
    t.meta[k] = r.str();
  }
  const auto nc = r.get<std::uint32_t>();
  const auto nr = r.get<std::uint64_t>();
  for (std::uint32_t i = 0; i < nc; ++i) t.names.push_back(r.str());
  if (b.size() - r.pos != std::uint64_t(nc) * nr * 8) throw DomainError("read_osm1: payload size mismatch");
  for (std::uint32_t i = 0; i < nc; ++i) {
    std::vector<double> c(nr);
    for (auto& v : c) {
      const auto bits = r.get<std::uint64_t>();
      std::memcpy(&v, &bits, sizeof v);
    }
    t.columns.push_back(std::move(c));
  }
  return t;
}

inline void write_osm1(const std::string& path, const BinaryTable& t) { write_text(path, encode_osm1(t)); }

inline BinaryTable read_osm1(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("read_osm1: cannot open '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return decode_osm1(ss.str());
}

// Configs are JSON objects with nested sections. Errors name the source
// position for syntax and the dotted field path for content.
inline Json parse_config(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text, nullptr, true, true);
  } catch (const Json::parse_error& e) {
    const size_t at = std::min<size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + at, '\n');
    const auto nl = text.rfind('\n', at ? at - 1 : 0);
    const size_t col = nl == std::string::npos || at == 0 ? at + 1 : at - nl;
    throw UsageError("config " + source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": syntax error");
  }
}

inline Json load_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw UsageError("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), path);
}

inline const Json* find_field(const Json& j, const std::string& path) {
  const Json* cur = &j;
  size_t a = 0;
  while (true) {
    const size_t b = path.find('.', a);
    const std::string key = path.substr(a, b == std::string::npos ? std::string::npos : b - a);
    if (!cur->is_object() || !cur->contains(key)) return nullptr;
    cur = &(*cur)[key];
    if (b == std::string::npos) return cur;
    a = b + 1;
  }
}

inline const Json& field(const Json& j, const std::string& path) {
  if (const Json* f = find_field(j, path)) return *f;
  throw UsageError("config field '" + path + "': missing");
}

inline double number(const Json& j, const std::string& path) {
  const Json& f = field(j, path);
  if (!f.is_number()) throw UsageError("config field '" + path + "': expected a number");
  return f.get<double>();
}

inline double number_or(const Json& j, const std::string& path, double dflt) {
  return find_field(j, path) ? number(j, path) : dflt;
}

inline int integer_or(const Json& j, const std::string& path, int dflt) {
  const Json* f = find_field(j, path);
  if (!f) return dflt;
  if (!f->is_number_integer()) throw UsageError("config field '" + path + "': expected an integer");
  return f->get<int>();
}

inline std::string string_or(const Json& j, const std::string& path, const std::string& dflt) {
  const Json* f = find_field(j, path);
  if (!f) return dflt;
  if (!f->is_string()) throw UsageError("config field '" + path + "': expected a string");
  return f->get<std::string>();
}

inline std::vector<double> number_list(const Json& j, const std::string& path) {
  const Json& f = field(j, path);
  if (!f.is_array()) throw UsageError("config field '" + path + "': expected an array");
  std::vector<double> out;
  for (size_t i = 0; i < f.size(); ++i) {
    if (!f[i].is_number()) throw UsageError("config field '" + path + "[" + std::to_string(i) + "]': expected a number");
    out.push_back(f[i].get<double>());
  }
  return out;
}

// Complex numbers are [re, im] pairs or plain reals.
inline cplx complex_number(const Json& j, const std::string& path) {
  const Json& f = field(j, path);
  if (f.is_number()) return f.get<double>();
  if (f.is_array() && f.size() == 2 && f[0].is_number() && f[1].is_number())
    return {f[0].get<double>(), f[1].get<double>()};
  throw UsageError("config field '" + path + "': expected a number or [re, im]");
}

// nu_list: nonempty, each in (0, 1), returned sorted descending.
inline std::vector<double> nu_list(const Json& j, const std::string& path = "nu_list") {
  auto v = number_list(j, path);
  if (v.empty()) throw UsageError("config field '" + path + "': must not be empty");
  for (double nu : v)
    if (!(nu > 0 && nu < 1)) throw UsageError("config field '" + path + "': entries must lie in (0, 1)");
  std::sort(v.begin(), v.end(), std::greater<>());
  return v;
}

// {kind: "exp"|"erf"|"inflection"|"table", u_plus, params: {...}, samples: [[y, U], ...]}.
inline ShearProfile profile_from_config(const Json& j, const std::string& path = "profile") {
  field(j, path);
  const std::string kind = string_or(j, path + ".kind", "");
  const double up = number_or(j, path + ".u_plus", 1.0);
  auto par = [&](const std::string& k) { return path + ".params." + k; };
  try {
    if (kind == "exp") return ShearProfile::heated_exponential(up, number_or(j, par("rate"), 1.0), number_or(j, par("tau"), 0.0));
    if (kind == "erf") return ShearProfile::erf(up, number(j, par("tau")));
    if (kind == "inflection")
      return ShearProfile::inflection(up, number_or(j, par("sharpness"), 2.0), number_or(j, par("center"), 0.75));
    if (kind == "table") {
      const std::string sp = path + ".samples";
      const Json& s = field(j, sp);
      if (!s.is_array() || s.size() < 4) throw UsageError("config field '" + sp + "': need at least 4 [y, U] pairs");
      std::vector<double> y, u;
      for (size_t i = 0; i < s.size(); ++i) {
        if (!s[i].is_array() || s[i].size() != 2 || !s[i][0].is_number() || !s[i][1].is_number())
          throw UsageError("config field '" + sp + "[" + std::to_string(i) + "]': expected [y, U]");
        y.push_back(s[i][0].get<double>());
        u.push_back(s[i][1].get<double>());
      }
      return ShearProfile::table(std::move(y), std::move(u), number(j, par("decay_rate")));
    }
  } catch (const DomainError& e) {
    throw UsageError("config field '" + path + "': " + e.what());
  }
  throw UsageError("config field '" + path + ".kind': expected exp, erf, inflection or table");
}

}  // namespace shearstab::io
