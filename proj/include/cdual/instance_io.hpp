#pragma once

// Instance documents: a flat JSON object
//
//   { "n": 1, "a0": 1, "b0": [3], "c0": -1.5,
//     "a1": 1, "b1": 2, "c1": -1,
//     "a2": 1, "b2": 1, "c2": -5, "h": [2] }
//
// b0 and h may be given as bare numbers when n = 1. Optional "name" and
// "description" strings are carried through untouched.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

#include "json.hpp"

#include "cdual/polynomial_core.hpp"

namespace cdual::io {

using json = nlohmann::json;

/// Malformed or unreadable instance. `field()` is empty for syntax errors.
class InputError : public std::runtime_error {
 public:
  InputError(std::string field, const std::string& what)
      : std::runtime_error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

namespace detail {

inline double number_field(const json& doc, const char* key) {
  if (!doc.contains(key)) throw InputError(key, "missing required field");
  const json& v = doc.at(key);
  if (!v.is_number()) throw InputError(key, "expected a number, got " + std::string(v.type_name()));
  return v.get<double>();
}

inline Vector vector_field(const json& doc, const char* key, int n) {
  if (!doc.contains(key)) throw InputError(key, "missing required field");
  const json& v = doc.at(key);
  if (v.is_number()) {
    if (n != 1) throw InputError(key, "scalar form is only accepted for n = 1");
    return scalar_vector(v.get<double>());
  }
  if (!v.is_array()) throw InputError(key, "expected an array of " + std::to_string(n) + " numbers");
  if (static_cast<int>(v.size()) != n)
    throw InputError(key, "expected " + std::to_string(n) + " entries, got " + std::to_string(v.size()));
  Vector out(n);
  for (int i = 0; i < n; ++i) {
    if (!v[i].is_number()) throw InputError(key, "entry " + std::to_string(i) + " is not a number");
    out(i) = v[i].get<double>();
  }
  return out;
}

}  // namespace detail

inline ProblemSpec parse_instance(const json& doc) {
  if (!doc.is_object()) throw InputError("", "instance must be a JSON object");
  static const char* const known[] = {"n", "a0", "b0", "c0", "a1", "b1", "c1",
                                      "a2", "b2", "c2", "h", "name", "description"};
  for (const auto& [key, _] : doc.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw InputError(key, "unknown field");
  }
  if (!doc.contains("n")) throw InputError("n", "missing required field");
  if (!doc.at("n").is_number_integer()) throw InputError("n", "expected an integer");
  const auto n = doc.at("n").get<std::int64_t>();
  if (n < 1 || n > 1'000'000) throw InputError("n", "must be a positive integer");

  Coefficients c;
  c.a0 = detail::number_field(doc, "a0");
  c.c0 = detail::number_field(doc, "c0");
  c.a1 = detail::number_field(doc, "a1");
  c.b1 = detail::number_field(doc, "b1");
  c.c1 = detail::number_field(doc, "c1");
  c.a2 = detail::number_field(doc, "a2");
  c.b2 = detail::number_field(doc, "b2");
  c.c2 = detail::number_field(doc, "c2");
  c.b0 = detail::vector_field(doc, "b0", static_cast<int>(n));
  c.h = detail::vector_field(doc, "h", static_cast<int>(n));
  try {
    return ProblemSpec(std::move(c));
  } catch (const ValidationError& e) {
    const std::string what = e.what();
    throw InputError(e.field(), what.substr(std::min(what.size(), e.field().size() + 2)));
  }
}

inline ProblemSpec parse_instance_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError("", std::string("syntax error: ") + e.what());
  }
  return parse_instance(doc);
}

inline ProblemSpec load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("", "cannot open instance file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_instance_text(ss.str());
}

inline json vector_json(const Vector& v) {
  json a = json::array();
  for (double x : v) a.push_back(x);
  return a;
}

/// Canonical document for a spec (vector fields always as arrays).
inline json instance_json(const ProblemSpec& s) {
  return json{{"n", s.n()},   {"a0", s.a0()}, {"b0", vector_json(s.b0())}, {"c0", s.c0()},
              {"a1", s.a1()}, {"b1", s.b1()}, {"c1", s.c1()},              {"a2", s.a2()},
              {"b2", s.b2()}, {"c2", s.c2()}, {"h", vector_json(s.h())}};
}

/// FNV-1a over the canonical instance document, as 16 hex digits.
inline std::string instance_hash(const ProblemSpec& s) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char ch : instance_json(s).dump()) {
    hash ^= ch;
    hash *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

}  // namespace cdual::io
