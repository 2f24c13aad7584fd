#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "fairscore/errors.hpp"

namespace fairscore {

// Minimal TOML subset used by the config files: [table], [[array.of.tables]],
// dotted keys, strings, integers, floats, booleans and flat arrays.
class TomlValue {
 public:
  enum class Kind { String, Number, Boolean, Array, Table };

  TomlValue() : kind_(Kind::Table) {}
  static TomlValue string(std::string s);
  static TomlValue number(double v);
  static TomlValue boolean(bool v);
  static TomlValue array();
  static TomlValue table();

  Kind kind() const { return kind_; }
  bool is_table() const { return kind_ == Kind::Table; }
  bool is_array() const { return kind_ == Kind::Array; }

  const std::string& as_string() const;
  double as_number() const;
  bool as_boolean() const;
  const std::vector<TomlValue>& items() const;
  std::vector<TomlValue>& items();
  const std::map<std::string, TomlValue>& entries() const;

  // Dotted-path lookup; nullptr when absent.
  const TomlValue* find(const std::string& dotted_path) const;
  bool contains(const std::string& dotted_path) const;

  // Lookup with defaults; throws ConfigError on type mismatch.
  std::string get_string(const std::string& path, const std::string& dflt) const;
  double get_number(const std::string& path, double dflt) const;
  bool get_boolean(const std::string& path, bool dflt) const;
  std::vector<double> get_number_array(const std::string& path,
                                       const std::vector<double>& dflt) const;
  std::vector<std::string> get_string_array(
      const std::string& path, const std::vector<std::string>& dflt) const;

  // Creates intermediate tables along the path; overwrites scalars.
  void set(const std::string& dotted_path, TomlValue v);

 private:
  Kind kind_;
  std::string str_;
  double num_ = 0.0;
  bool bool_ = false;
  std::vector<TomlValue> array_;
  std::map<std::string, TomlValue> table_;
};

TomlValue toml_parse(const std::string& text);
TomlValue toml_parse_file(const std::string& path);

// Parses the value part of a `--set key=value` override.
TomlValue toml_parse_scalar(const std::string& text);

}  // namespace fairscore
