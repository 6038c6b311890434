#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "core/error.hpp"

// Minimal TOML reader covering the config schema: [section] and [dotted.name]
// headers, key = value pairs with numbers, booleans, quoted strings, and
// (nested) arrays, '#' comments.  Not a general TOML implementation.

namespace rsgbm::toml {

class Value {
public:
    enum class Kind { number, boolean, string, array };

    static Value number(double v) { Value x; x.kind_ = Kind::number; x.num_ = v; return x; }
    static Value boolean(bool v) { Value x; x.kind_ = Kind::boolean; x.bool_ = v; return x; }
    static Value str(std::string v) { Value x; x.kind_ = Kind::string; x.str_ = std::move(v); return x; }
    static Value array(std::vector<Value> v) { Value x; x.kind_ = Kind::array; x.arr_ = std::move(v); return x; }

    Kind kind() const { return kind_; }
    bool is_number() const { return kind_ == Kind::number; }
    bool is_array() const { return kind_ == Kind::array; }

    double as_number() const;
    bool as_boolean() const;
    const std::string& as_string() const;
    const std::vector<Value>& as_array() const;

    // scalar -> {v}; flat numeric array -> itself
    std::vector<double> as_number_list() const;
    // scalar -> 1x1; flat array -> single row; array of arrays -> rows
    std::vector<std::vector<double>> as_number_rows() const;

private:
    Kind kind_ = Kind::number;
    double num_ = 0.0;
    bool bool_ = false;
    std::string str_;
    std::vector<Value> arr_;
};

struct Table {
    // section name ("" for the root) -> key -> value
    std::map<std::string, std::map<std::string, Value>> sections;

    bool has_section(const std::string& name) const { return sections.count(name) != 0; }
    bool has(const std::string& section, const std::string& key) const;
    const Value& get(const std::string& section, const std::string& key) const;
    const Value* find(const std::string& section, const std::string& key) const;
};

Table parse(const std::string& text);
Table parse_file(const std::string& path);

}  // namespace rsgbm::toml
