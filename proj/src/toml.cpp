#include "fairscore/toml.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace fairscore {

TomlValue TomlValue::string(std::string s) {
  TomlValue v;
  v.kind_ = Kind::String;
  v.str_ = std::move(s);
  return v;
}
TomlValue TomlValue::number(double x) {
  TomlValue v;
  v.kind_ = Kind::Number;
  v.num_ = x;
  return v;
}
TomlValue TomlValue::boolean(bool b) {
  TomlValue v;
  v.kind_ = Kind::Boolean;
  v.bool_ = b;
  return v;
}
TomlValue TomlValue::array() {
  TomlValue v;
  v.kind_ = Kind::Array;
  return v;
}
TomlValue TomlValue::table() { return TomlValue(); }

const std::string& TomlValue::as_string() const {
  if (kind_ != Kind::String) throw ConfigError("expected string value");
  return str_;
}
double TomlValue::as_number() const {
  if (kind_ != Kind::Number) throw ConfigError("expected numeric value");
  return num_;
}
bool TomlValue::as_boolean() const {
  if (kind_ != Kind::Boolean) throw ConfigError("expected boolean value");
  return bool_;
}
const std::vector<TomlValue>& TomlValue::items() const {
  if (kind_ != Kind::Array) throw ConfigError("expected array value");
  return array_;
}
std::vector<TomlValue>& TomlValue::items() {
  if (kind_ != Kind::Array) throw ConfigError("expected array value");
  return array_;
}
const std::map<std::string, TomlValue>& TomlValue::entries() const {
  if (kind_ != Kind::Table) throw ConfigError("expected table value");
  return table_;
}

static std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : path) {
    if (c == '.') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);
  return parts;
}

const TomlValue* TomlValue::find(const std::string& dotted_path) const {
  const TomlValue* cur = this;
  for (const auto& part : split_path(dotted_path)) {
    if (cur->kind_ != Kind::Table) return nullptr;
    auto it = cur->table_.find(part);
    if (it == cur->table_.end()) return nullptr;
    cur = &it->second;
  }
  return cur;
}

bool TomlValue::contains(const std::string& p) const { return find(p) != nullptr; }

std::string TomlValue::get_string(const std::string& path,
                                  const std::string& dflt) const {
  const TomlValue* v = find(path);
  return v ? v->as_string() : dflt;
}
double TomlValue::get_number(const std::string& path, double dflt) const {
  const TomlValue* v = find(path);
  return v ? v->as_number() : dflt;
}
bool TomlValue::get_boolean(const std::string& path, bool dflt) const {
  const TomlValue* v = find(path);
  return v ? v->as_boolean() : dflt;
}
std::vector<double> TomlValue::get_number_array(
    const std::string& path, const std::vector<double>& dflt) const {
  const TomlValue* v = find(path);
  if (!v) return dflt;
  std::vector<double> out;
  for (const auto& item : v->items()) out.push_back(item.as_number());
  return out;
}
std::vector<std::string> TomlValue::get_string_array(
    const std::string& path, const std::vector<std::string>& dflt) const {
  const TomlValue* v = find(path);
  if (!v) return dflt;
  std::vector<std::string> out;
  for (const auto& item : v->items()) out.push_back(item.as_string());
  return out;
}

void TomlValue::set(const std::string& dotted_path, TomlValue v) {
  TomlValue* cur = this;
  auto parts = split_path(dotted_path);
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    TomlValue& next = cur->table_[parts[i]];
    if (next.kind_ != Kind::Table) next = TomlValue::table();
    cur = &next;
  }
  cur->table_[parts.back()] = std::move(v);
}

namespace {

struct Cursor {
  const std::string& s;
  std::size_t pos = 0;
  int line = 1;

  bool done() const { return pos >= s.size(); }
  char peek() const { return s[pos]; }
  char take() {
    char c = s[pos++];
    if (c == '\n') ++line;
    return c;
  }
  void skip_ws_inline() {
    while (!done() && (peek() == ' ' || peek() == '\t')) ++pos;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("TOML line " + std::to_string(line) + ": " + msg);
  }
};

std::string parse_bare_or_quoted_key(Cursor& c) {
  c.skip_ws_inline();
  std::string key;
  if (!c.done() && (c.peek() == '"' || c.peek() == '\'')) {
    char q = c.take();
    while (!c.done() && c.peek() != q) key.push_back(c.take());
    if (c.done()) c.fail("unterminated quoted key");
    c.take();
  } else {
    while (!c.done() && (std::isalnum(static_cast<unsigned char>(c.peek())) ||
                         c.peek() == '_' || c.peek() == '-'))
      key.push_back(c.take());
  }
  if (key.empty()) c.fail("empty key");
  return key;
}

std::vector<std::string> parse_key_path(Cursor& c) {
  std::vector<std::string> parts{parse_bare_or_quoted_key(c)};
  c.skip_ws_inline();
  while (!c.done() && c.peek() == '.') {
    c.take();
    parts.push_back(parse_bare_or_quoted_key(c));
    c.skip_ws_inline();
  }
  return parts;
}

TomlValue parse_value(Cursor& c);

TomlValue parse_array(Cursor& c) {
  TomlValue arr = TomlValue::array();
  c.take();  // '['
  for (;;) {
    while (!c.done() && (c.peek() == ' ' || c.peek() == '\t' || c.peek() == '\n' ||
                         c.peek() == '\r' || c.peek() == ','))
      c.take();
    if (c.done()) c.fail("unterminated array");
    if (c.peek() == ']') {
      c.take();
      return arr;
    }
    if (c.peek() == '#') {
      while (!c.done() && c.peek() != '\n') c.take();
      continue;
    }
    arr.items().push_back(parse_value(c));
  }
}

TomlValue parse_value(Cursor& c) {
  c.skip_ws_inline();
  if (c.done()) c.fail("missing value");
  char ch = c.peek();
  if (ch == '"' || ch == '\'') {
    char q = c.take();
    std::string out;
    while (!c.done() && c.peek() != q) {
      char x = c.take();
      if (q == '"' && x == '\\' && !c.done()) {
        char e = c.take();
        switch (e) {
          case 'n': out.push_back('\n'); break;
          case 't': out.push_back('\t'); break;
          case '\\': out.push_back('\\'); break;
          case '"': out.push_back('"'); break;
          default: c.fail("unsupported escape");
        }
      } else {
        out.push_back(x);
      }
    }
    if (c.done()) c.fail("unterminated string");
    c.take();
    return TomlValue::string(out);
  }
  if (ch == '[') return parse_array(c);
  std::string tok;
  while (!c.done() && c.peek() != '\n' && c.peek() != '#' && c.peek() != ',' &&
         c.peek() != ']')
    tok.push_back(c.take());
  while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\t' ||
                          tok.back() == '\r'))
    tok.pop_back();
  if (tok == "true") return TomlValue::boolean(true);
  if (tok == "false") return TomlValue::boolean(false);
  char* end = nullptr;
  double num = std::strtod(tok.c_str(), &end);
  if (end != nullptr && *end == '\0' && !tok.empty())
    return TomlValue::number(num);
  c.fail("cannot parse value '" + tok + "'");
}

}  // namespace

TomlValue toml_parse(const std::string& text) {
  TomlValue root = TomlValue::table();
  Cursor c{text};
  TomlValue* current = &root;
  while (!c.done()) {
    c.skip_ws_inline();
    if (c.done()) break;
    char ch = c.peek();
    if (ch == '\n' || ch == '\r') {
      c.take();
      continue;
    }
    if (ch == '#') {
      while (!c.done() && c.peek() != '\n') c.take();
      continue;
    }
    if (ch == '[') {
      c.take();
      bool array_of_tables = !c.done() && c.peek() == '[';
      if (array_of_tables) c.take();
      auto parts = parse_key_path(c);
      c.skip_ws_inline();
      if (c.done() || c.take() != ']') c.fail("expected ']'");
      if (array_of_tables && (c.done() || c.take() != ']'))
        c.fail("expected ']]'");
      std::string path;
      for (std::size_t i = 0; i < parts.size(); ++i)
        path += (i ? "." : "") + parts[i];
      if (array_of_tables) {
        TomlValue* arr = const_cast<TomlValue*>(root.find(path));
        if (arr == nullptr || !arr->is_array()) {
          root.set(path, TomlValue::array());
          arr = const_cast<TomlValue*>(root.find(path));
        }
        arr->items().push_back(TomlValue::table());
        current = &arr->items().back();
      } else {
        if (root.find(path) == nullptr) root.set(path, TomlValue::table());
        current = const_cast<TomlValue*>(root.find(path));
      }
      continue;
    }
    auto parts = parse_key_path(c);
    c.skip_ws_inline();
    if (c.done() || c.take() != '=') c.fail("expected '='");
    TomlValue v = parse_value(c);
    std::string path;
    for (std::size_t i = 0; i < parts.size(); ++i)
      path += (i ? "." : "") + parts[i];
    current->set(path, std::move(v));
    c.skip_ws_inline();
    if (!c.done() && c.peek() == '#')
      while (!c.done() && c.peek() != '\n') c.take();
  }
  return root;
}

TomlValue toml_parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return toml_parse(buf.str());
}

TomlValue toml_parse_scalar(const std::string& text) {
  if (text == "true") return TomlValue::boolean(true);
  if (text == "false") return TomlValue::boolean(false);
  if (text.size() >= 2 && text.front() == '"' && text.back() == '"')
    return TomlValue::string(text.substr(1, text.size() - 2));
  char* end = nullptr;
  double num = std::strtod(text.c_str(), &end);
  if (end != nullptr && *end == '\0' && !text.empty())
    return TomlValue::number(num);
  return TomlValue::string(text);
}

}  // namespace fairscore
