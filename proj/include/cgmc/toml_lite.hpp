#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace cgmc::toml {

// Minimal TOML reader covering what experiment configs use: [section]
// headers, `key = value` lines with integers, floats, booleans, basic
// strings and flat arrays, and # comments. Values are addressed as
// "section.key". Anything outside this subset is rejected with the line
// number in the message.
struct Value {
  enum class Kind { Integer, Float, Boolean, String, Array };
  Kind kind = Kind::Integer;
  std::int64_t integer = 0;
  double real = 0.0;
  bool boolean = false;
  std::string text;
  std::vector<Value> array;

  double as_double() const;
  std::int64_t as_integer() const;
};

class Table {
 public:
  static Table parse(const std::string& text);
  static Table parse_file(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::int64_t get_integer(const std::string& key, std::int64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_boolean(const std::string& key, bool fallback) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::vector<std::int64_t> get_integer_array(const std::string& key,
                                              const std::vector<std::int64_t>& fallback) const;
  std::vector<double> get_double_array(const std::string& key, const std::vector<double>& fallback) const;

  std::vector<std::string> keys() const;

 private:
  const Value* find(const std::string& key) const;
  std::map<std::string, Value> values_;
};

}  // namespace cgmc::toml
