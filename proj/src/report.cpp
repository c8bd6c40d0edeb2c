#include "cylcalc/report.hpp"

#include <cmath>
#include <cstdio>

namespace cylcalc {

std::string JsonWriter::num(double v) {
  if (std::isnan(v)) return "\"nan\"";
  if (std::isinf(v)) return v > 0 ? "\"inf\"" : "\"-inf\"";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

JsonWriter& JsonWriter::put(const std::string& key, double v) {
  fields_.emplace_back(key, num(v));
  return *this;
}

JsonWriter& JsonWriter::put(const std::string& key, int v) {
  fields_.emplace_back(key, std::to_string(v));
  return *this;
}

JsonWriter& JsonWriter::put(const std::string& key, bool v) {
  fields_.emplace_back(key, v ? "true" : "false");
  return *this;
}

JsonWriter& JsonWriter::put(const std::string& key, const std::string& v) {
  std::string esc = "\"";
  for (char c : v) {
    if (c == '"' || c == '\\') esc += '\\';
    esc += c;
  }
  esc += '"';
  fields_.emplace_back(key, esc);
  return *this;
}

JsonWriter& JsonWriter::put(const std::string& key, const std::vector<double>& v) {
  std::string s = "[";
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += num(v[i]);
  }
  s += "]";
  fields_.emplace_back(key, s);
  return *this;
}

JsonWriter& JsonWriter::put_raw(const std::string& key, const std::string& rendered) {
  fields_.emplace_back(key, rendered);
  return *this;
}

std::string JsonWriter::str() const {
  std::string s = "{";
  for (size_t i = 0; i < fields_.size(); ++i) {
    if (i) s += ", ";
    s += "\"" + fields_[i].first + "\": " + fields_[i].second;
  }
  s += "}";
  return s;
}

std::string json_array(const std::vector<std::string>& rendered) {
  std::string s = "[";
  for (size_t i = 0; i < rendered.size(); ++i) {
    if (i) s += ", ";
    s += rendered[i];
  }
  s += "]";
  return s;
}

}  // namespace cylcalc
