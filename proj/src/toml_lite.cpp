#include "cgmc/toml_lite.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "cgmc/errors.hpp"

namespace cgmc::toml {

namespace {

[[noreturn]] void fail(int line, const std::string& what) {
  throw ConfigError("config parse error at line " + std::to_string(line) + ": " + what);
}

std::string strip(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// removes a trailing comment, respecting quoted strings
std::string strip_comment(const std::string& s) {
  bool in_string = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) in_string = !in_string;
    if (s[i] == '#' && !in_string) return s.substr(0, i);
  }
  return s;
}

bool valid_key(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') return false;
  return true;
}

Value parse_scalar(const std::string& raw, int line) {
  Value v;
  if (raw.size() >= 2 && raw.front() == '"' && raw.back() == '"') {
    v.kind = Value::Kind::String;
    std::string out;
    for (std::size_t i = 1; i + 1 < raw.size(); ++i) {
      char c = raw[i];
      if (c == '\\' && i + 2 < raw.size()) {
        const char next = raw[++i];
        switch (next) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          default: fail(line, std::string("unsupported escape \\") + next);
        }
      } else {
        out += c;
      }
    }
    v.text = out;
    return v;
  }
  if (raw == "true" || raw == "false") {
    v.kind = Value::Kind::Boolean;
    v.boolean = raw == "true";
    return v;
  }
  // integer first, float as fallback
  {
    std::int64_t parsed = 0;
    const auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), parsed);
    if (ec == std::errc() && ptr == raw.data() + raw.size()) {
      v.kind = Value::Kind::Integer;
      v.integer = parsed;
      return v;
    }
  }
  {
    double parsed = 0.0;
    const auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), parsed);
    if (ec == std::errc() && ptr == raw.data() + raw.size()) {
      v.kind = Value::Kind::Float;
      v.real = parsed;
      return v;
    }
  }
  fail(line, "cannot parse value '" + raw + "'");
}

Value parse_value(const std::string& raw, int line) {
  if (!raw.empty() && raw.front() == '[') {
    if (raw.back() != ']') fail(line, "unterminated array");
    Value v;
    v.kind = Value::Kind::Array;
    const std::string body = strip(raw.substr(1, raw.size() - 2));
    if (body.empty()) return v;
    std::size_t start = 0;
    bool in_string = false;
    for (std::size_t i = 0; i <= body.size(); ++i) {
      if (i < body.size() && body[i] == '"' && (i == 0 || body[i - 1] != '\\')) in_string = !in_string;
      if (i == body.size() || (body[i] == ',' && !in_string)) {
        const std::string item = strip(body.substr(start, i - start));
        if (item.empty()) fail(line, "empty array element");
        v.array.push_back(parse_scalar(item, line));
        start = i + 1;
      }
    }
    return v;
  }
  return parse_scalar(raw, line);
}

}  // namespace

double Value::as_double() const {
  if (kind == Kind::Float) return real;
  if (kind == Kind::Integer) return static_cast<double>(integer);
  throw ConfigError("config value is not numeric");
}

std::int64_t Value::as_integer() const {
  if (kind == Kind::Integer) return integer;
  throw ConfigError("config value is not an integer");
}

Table Table::parse(const std::string& text) {
  Table table;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string content = strip(strip_comment(line));
    if (content.empty()) continue;
    if (content.front() == '[') {
      if (content.back() != ']') fail(line_no, "unterminated section header");
      section = strip(content.substr(1, content.size() - 2));
      if (!valid_key(section)) fail(line_no, "invalid section name '" + section + "'");
      continue;
    }
    const std::size_t eq = content.find('=');
    if (eq == std::string::npos) fail(line_no, "expected key = value");
    const std::string key = strip(content.substr(0, eq));
    if (!valid_key(key)) fail(line_no, "invalid key '" + key + "'");
    const std::string value = strip(content.substr(eq + 1));
    if (value.empty()) fail(line_no, "missing value for key '" + key + "'");
    const std::string full = section.empty() ? key : section + "." + key;
    if (table.values_.count(full)) fail(line_no, "duplicate key '" + full + "'");
    table.values_.emplace(full, parse_value(value, line_no));
  }
  return table;
}

Table Table::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

const Value* Table::find(const std::string& key) const {
  const auto it = values_.find(key);
  return it == values_.end() ? nullptr : &it->second;
}

std::int64_t Table::get_integer(const std::string& key, std::int64_t fallback) const {
  const Value* v = find(key);
  if (!v) return fallback;
  if (v->kind != Value::Kind::Integer) throw ConfigError("config key '" + key + "' must be an integer");
  return v->integer;
}

double Table::get_double(const std::string& key, double fallback) const {
  const Value* v = find(key);
  if (!v) return fallback;
  if (v->kind != Value::Kind::Integer && v->kind != Value::Kind::Float)
    throw ConfigError("config key '" + key + "' must be numeric");
  return v->as_double();
}

bool Table::get_boolean(const std::string& key, bool fallback) const {
  const Value* v = find(key);
  if (!v) return fallback;
  if (v->kind != Value::Kind::Boolean) throw ConfigError("config key '" + key + "' must be a boolean");
  return v->boolean;
}

std::string Table::get_string(const std::string& key, const std::string& fallback) const {
  const Value* v = find(key);
  if (!v) return fallback;
  if (v->kind != Value::Kind::String) throw ConfigError("config key '" + key + "' must be a string");
  return v->text;
}

std::vector<std::int64_t> Table::get_integer_array(const std::string& key,
                                                   const std::vector<std::int64_t>& fallback) const {
  const Value* v = find(key);
  if (!v) return fallback;
  if (v->kind != Value::Kind::Array) throw ConfigError("config key '" + key + "' must be an array");
  std::vector<std::int64_t> out;
  for (const Value& item : v->array) out.push_back(item.as_integer());
  return out;
}

std::vector<double> Table::get_double_array(const std::string& key,
                                            const std::vector<double>& fallback) const {
  const Value* v = find(key);
  if (!v) return fallback;
  if (v->kind != Value::Kind::Array) throw ConfigError("config key '" + key + "' must be an array");
  std::vector<double> out;
  for (const Value& item : v->array) out.push_back(item.as_double());
  return out;
}

std::vector<std::string> Table::keys() const {
  std::vector<std::string> out;
  out.reserve(values_.size());
  for (const auto& [key, value] : values_) out.push_back(key);
  return out;
}

}  // namespace cgmc::toml
