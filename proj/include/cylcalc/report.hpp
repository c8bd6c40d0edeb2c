#pragma once

#include <memory>
#include <string>
#include <vector>

namespace cylcalc {

/// Deterministic JSON writer: insertion-ordered keys, doubles printed with 17
/// significant digits, no locale dependence.
class JsonWriter {
 public:
  JsonWriter& put(const std::string& key, double v);
  JsonWriter& put(const std::string& key, int v);
  JsonWriter& put(const std::string& key, bool v);
  JsonWriter& put(const std::string& key, const std::string& v);
  JsonWriter& put(const std::string& key, const std::vector<double>& v);
  JsonWriter& put_raw(const std::string& key, const std::string& rendered);

  std::string str() const;

  static std::string num(double v);

 private:
  std::vector<std::pair<std::string, std::string>> fields_;
};

std::string json_array(const std::vector<std::string>& rendered);

}  // namespace cylcalc
