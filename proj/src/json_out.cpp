#include "greenchain/json_out.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace greenchain {

std::string format_double_17(double d) {
  if (!std::isfinite(d)) return "null";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", d);
  return buf;
}

std::string escape_json_string(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (const char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\b': out += "\\b"; break;
      case '\f': out += "\\f"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

JsonValue JsonValue::null() {
  return JsonValue();
}

JsonValue JsonValue::boolean(bool b) {
  JsonValue v;
  v.kind_ = Kind::Bool;
  v.bool_ = b;
  return v;
}

JsonValue JsonValue::integer(std::int64_t i) {
  JsonValue v;
  v.kind_ = Kind::Int;
  v.int_ = i;
  return v;
}

JsonValue JsonValue::number(double d) {
  JsonValue v;
  v.kind_ = Kind::Double;
  v.double_ = d;
  return v;
}

JsonValue JsonValue::string(std::string s) {
  JsonValue v;
  v.kind_ = Kind::String;
  v.string_ = std::move(s);
  return v;
}

JsonValue JsonValue::array() {
  JsonValue v;
  v.kind_ = Kind::Array;
  return v;
}

JsonValue JsonValue::object() {
  JsonValue v;
  v.kind_ = Kind::Object;
  return v;
}

JsonValue& JsonValue::push_back(JsonValue v) {
  if (kind_ != Kind::Array) {
    throw std::logic_error("push_back on a non-array JSON value");
  }
  array_.push_back(std::move(v));
  return *this;
}

JsonValue& JsonValue::set(const std::string& key, JsonValue v) {
  if (kind_ != Kind::Object) {
    throw std::logic_error("set on a non-object JSON value");
  }
  object_[key] = std::move(v);
  return *this;
}

void JsonValue::render(std::string& out, int indent, bool pretty) const {
  const auto pad = [&](int level) {
    if (pretty) {
      out += '\n';
      out.append(static_cast<std::size_t>(level) * 2, ' ');
    }
  };
  switch (kind_) {
    case Kind::Null:
      out += "null";
      break;
    case Kind::Bool:
      out += bool_ ? "true" : "false";
      break;
    case Kind::Int:
      out += std::to_string(int_);
      break;
    case Kind::Double:
      out += format_double_17(double_);
      break;
    case Kind::String:
      out += '"';
      out += escape_json_string(string_);
      out += '"';
      break;
    case Kind::Array: {
      out += '[';
      bool first = true;
      for (const JsonValue& v : array_) {
        if (!first) out += ',';
        first = false;
        pad(indent + 1);
        v.render(out, indent + 1, pretty);
      }
      if (!array_.empty()) pad(indent);
      out += ']';
      break;
    }
    case Kind::Object: {
      out += '{';
      bool first = true;
      for (const auto& [key, v] : object_) {
        if (!first) out += ',';
        first = false;
        pad(indent + 1);
        out += '"';
        out += escape_json_string(key);
        out += "\":";
        if (pretty) out += ' ';
        v.render(out, indent + 1, pretty);
      }
      if (!object_.empty()) pad(indent);
      out += '}';
      break;
    }
  }
}

std::string JsonValue::dump() const {
  std::string out;
  render(out, 0, false);
  return out;
}

std::string JsonValue::dump_pretty() const {
  std::string out;
  render(out, 0, true);
  return out;
}

}  // namespace greenchain
