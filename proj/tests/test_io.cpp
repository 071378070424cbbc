#include <catch_amalgamated.hpp>

#include <random>

#include "shearstab/io.hpp"

using namespace shearstab;
using namespace shearstab::io;

namespace {

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const UsageError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("doubles round-trip through 17 significant digits") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> mant(-1, 1);
  std::uniform_int_distribution<int> ex(-300, 300);
  for (int i = 0; i < 2000; ++i) {
    const double v = std::ldexp(mant(rng), ex(rng));
    const auto s = format_double(v);
    double back = 0;
    std::from_chars(s.data(), s.data() + s.size(), back);
    CHECK(back == v);
    CHECK(s.find(',') == std::string::npos);
  }
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(2.0) == "2");
}

TEST_CASE("CSV layout") {
  CsvTable t{{"alpha", "c_re", "converged"}, {}};
  t.add(0.5, 1.0 / 3, true);
  t.add(1.0, -2.5, false);
  CHECK(t.str() == "alpha,c_re,converged\n0.5,0.33333333333333331,1\n1,-2.5,0\n");
  CHECK_THROWS_AS(t.add(1.0), DomainError);
}

TEST_CASE("OSM1 binary table") {
  BinaryTable t;
  t.meta["alpha"] = "0.8";
  t.add_column("y", {0.0, 0.5, 1.0});
  t.add_column("re", {1.0, -2.0, std::ldexp(1.0, -1074)});
  CHECK_THROWS_AS(t.add_column("bad", {1.0}), DomainError);
  const auto b = encode_osm1(t);
  CHECK(b.substr(0, 4) == "OSM1");
  // Last double is the smallest subnormal: bit pattern 1, little-endian.
  CHECK(b.substr(b.size() - 8) == std::string("\x01\0\0\0\0\0\0\0", 8));
  // 1.0 = 0x3FF0000000000000 stored low byte first.
  CHECK(b.substr(b.size() - 24, 8) == std::string("\0\0\0\0\0\0\xf0\x3f", 8));
  const auto r = decode_osm1(b);
  CHECK(r.meta == t.meta);
  CHECK(r.names == t.names);
  CHECK(r.columns == t.columns);
  CHECK_THROWS_AS(decode_osm1("OSM2" + b.substr(4)), DomainError);
  CHECK_THROWS_AS(decode_osm1(b.substr(0, b.size() - 3)), DomainError);
}

TEST_CASE("config syntax errors carry line and column") {
  const std::string text = "{\n  \"a\": 1,\n  \"b\": }\n";
  const auto m = message_of([&] { parse_config(text, "run.json"); });
  CHECK(m.find("run.json:3:") != std::string::npos);
  // Comments are accepted.
  CHECK(number(parse_config("{ // sweep\n \"x\": 2 }", "c"), "x") == 2);
}

TEST_CASE("config field diagnostics name the dotted path") {
  const auto j = parse_config(R"({"profile": {"kind": "erf", "params": {}}, "nu_list": [], "s": {"t": "x"}})", "c");
  CHECK(message_of([&] { profile_from_config(j); }).find("profile.params.tau") != std::string::npos);
  CHECK(message_of([&] { nu_list(j); }).find("nu_list") != std::string::npos);
  CHECK(message_of([&] { number(j, "s.t"); }).find("'s.t': expected a number") != std::string::npos);
  CHECK(message_of([&] { field(j, "s.u"); }).find("'s.u': missing") != std::string::npos);
  CHECK_THROWS_AS(integer_or(parse_config(R"({"n": 1.5})", "c"), "n", 0), UsageError);
  CHECK(integer_or(j, "n", 33) == 33);
}

TEST_CASE("nu_list is validated and sorted descending") {
  const auto v = nu_list(parse_config(R"({"nu_list": [1e-6, 1e-4, 1e-5]})", "c"));
  CHECK(v == std::vector<double>{1e-4, 1e-5, 1e-6});
  CHECK_THROWS_AS(nu_list(parse_config(R"({"nu_list": [1e-6, 2]})", "c")), UsageError);
  CHECK_THROWS_AS(nu_list(parse_config(R"({"nu_list": ["a"]})", "c")), UsageError);
}

TEST_CASE("profiles from config") {
  const auto a = profile_from_config(parse_config(R"({"profile": {"kind": "inflection", "u_plus": 2}})", "c"));
  const auto b = ShearProfile::inflection(2.0);
  for (double y : {0.0, 0.3, 1.7}) CHECK(a(y).d2u == b(y).d2u);
  const auto e = profile_from_config(parse_config(R"({"profile": {"kind": "exp", "params": {"rate": 3}}})", "c"));
  CHECK(std::abs(e(1.0).u - (1 - std::exp(-3.0))) < 1e-15);
  const auto t = profile_from_config(parse_config(
      R"({"profile": {"kind": "table", "params": {"decay_rate": 1}, "samples": [[0,0],[1,0.6],[2,0.85],[4,0.98],[8,1]]}})",
      "c"));
  CHECK(t.label() == "table");
  CHECK(std::abs(t(1.0).u - 0.6) < 1e-15);
  CHECK_THROWS_AS(profile_from_config(parse_config(R"({"profile": {"kind": "sine"}})", "c")), UsageError);
  CHECK_THROWS_AS(profile_from_config(parse_config(R"({"profile": {"kind": "exp", "params": {"rate": -1}}})", "c")),
                  UsageError);
  CHECK(complex_number(parse_config(R"({"z": [1, -2]})", "c"), "z") == cplx(1, -2));
}
