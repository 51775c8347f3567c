#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace greenchain {

// Machine-report JSON builder. Deliberately not a parser: report output
// must be byte-stable across runs and platforms, so keys are emitted in
// sorted order (std::map) and doubles are always rendered with 17
// significant digits via printf %.17g, which round-trips every double the
// same way everywhere. General-purpose JSON libraries prefer
// shortest-round-trip float forms, which is the wrong guarantee here.
class JsonValue {
 public:
  JsonValue() : kind_(Kind::Null) {}

  static JsonValue null();
  static JsonValue boolean(bool b);
  static JsonValue integer(std::int64_t i);
  static JsonValue number(double d);
  static JsonValue string(std::string s);
  static JsonValue array();
  static JsonValue object();

  JsonValue& push_back(JsonValue v);           // arrays
  JsonValue& set(const std::string& key, JsonValue v);  // objects

  // Compact one-line rendering (no whitespace), sorted object keys.
  std::string dump() const;
  // Pretty rendering with two-space indent, sorted object keys; used for
  // files meant to be read by people. Same number formatting.
  std::string dump_pretty() const;

 private:
  enum class Kind { Null, Bool, Int, Double, String, Array, Object };

  void render(std::string& out, int indent, bool pretty) const;

  Kind kind_;
  bool bool_ = false;
  std::int64_t int_ = 0;
  double double_ = 0.0;
  std::string string_;
  std::vector<JsonValue> array_;
  std::map<std::string, JsonValue> object_;
};

// %.17g with non-finite values mapped to JSON null (JSON has no inf/nan).
std::string format_double_17(double d);

std::string escape_json_string(const std::string& s);

}  // namespace greenchain
