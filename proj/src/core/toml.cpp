#include "core/toml.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace rsgbm::toml {

double Value::as_number() const {
    if (kind_ != Kind::number) fail(ErrorCode::parse_error, "expected a number");
    return num_;
}

bool Value::as_boolean() const {
    if (kind_ != Kind::boolean) fail(ErrorCode::parse_error, "expected a boolean");
    return bool_;
}

const std::string& Value::as_string() const {
    if (kind_ != Kind::string) fail(ErrorCode::parse_error, "expected a string");
    return str_;
}

const std::vector<Value>& Value::as_array() const {
    if (kind_ != Kind::array) fail(ErrorCode::parse_error, "expected an array");
    return arr_;
}

std::vector<double> Value::as_number_list() const {
    std::vector<double> out;
    if (kind_ == Kind::number) {
        out.push_back(num_);
        return out;
    }
    for (const Value& v : as_array()) out.push_back(v.as_number());
    return out;
}

std::vector<std::vector<double>> Value::as_number_rows() const {
    std::vector<std::vector<double>> rows;
    if (kind_ == Kind::number) {
        rows.push_back({num_});
        return rows;
    }
    const auto& arr = as_array();
    if (arr.empty()) fail(ErrorCode::parse_error, "empty array where rows were expected");
    if (arr.front().is_array()) {
        for (const Value& row : arr) rows.push_back(row.as_number_list());
    } else {
        rows.push_back(as_number_list());
    }
    return rows;
}

bool Table::has(const std::string& section, const std::string& key) const {
    return find(section, key) != nullptr;
}

const Value* Table::find(const std::string& section, const std::string& key) const {
    auto sit = sections.find(section);
    if (sit == sections.end()) return nullptr;
    auto kit = sit->second.find(key);
    return kit == sit->second.end() ? nullptr : &kit->second;
}

const Value& Table::get(const std::string& section, const std::string& key) const {
    const Value* v = find(section, key);
    if (!v)
        fail(ErrorCode::parse_error,
             "missing key '" + key + "' in section [" + (section.empty() ? "." : section) + "]");
    return *v;
}

namespace {

struct Cursor {
    const std::string& text;
    size_t pos = 0;
    int line = 1;

    bool eof() const { return pos >= text.size(); }
    char peek() const { return text[pos]; }
    char take() {
        char c = text[pos++];
        if (c == '\n') ++line;
        return c;
    }
    [[noreturn]] void error(const std::string& msg) const {
        std::ostringstream os;
        os << "TOML parse error at line " << line << ": " << msg;
        fail(ErrorCode::parse_error, os.str());
    }
    void skip_ws_in_line() {
        while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) take();
    }
    void skip_ws_and_comments() {
        while (!eof()) {
            char c = peek();
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                take();
            } else if (c == '#') {
                while (!eof() && peek() != '\n') take();
            } else {
                break;
            }
        }
    }
};

Value parse_value(Cursor& c);

Value parse_array(Cursor& c) {
    c.take();  // '['
    std::vector<Value> items;
    while (true) {
        c.skip_ws_and_comments();
        if (c.eof()) c.error("unterminated array");
        if (c.peek() == ']') {
            c.take();
            break;
        }
        items.push_back(parse_value(c));
        c.skip_ws_and_comments();
        if (c.eof()) c.error("unterminated array");
        if (c.peek() == ',') {
            c.take();
        } else if (c.peek() != ']') {
            c.error("expected ',' or ']' in array");
        }
    }
    return Value::array(std::move(items));
}

Value parse_value(Cursor& c) {
    c.skip_ws_in_line();
    if (c.eof()) c.error("expected a value");
    char ch = c.peek();
    if (ch == '[') return parse_array(c);
    if (ch == '"') {
        c.take();
        std::string s;
        while (!c.eof() && c.peek() != '"') {
            char x = c.take();
            if (x == '\\' && !c.eof()) {
                char e = c.take();
                switch (e) {
                    case 'n': s += '\n'; break;
                    case 't': s += '\t'; break;
                    case '"': s += '"'; break;
                    case '\\': s += '\\'; break;
                    default: c.error("unsupported escape");
                }
            } else {
                s += x;
            }
        }
        if (c.eof()) c.error("unterminated string");
        c.take();
        return Value::str(std::move(s));
    }
    std::string tok;
    while (!c.eof()) {
        char x = c.peek();
        if (std::isspace(static_cast<unsigned char>(x)) || x == ',' || x == ']' || x == '#') break;
        tok += c.take();
    }
    if (tok == "true") return Value::boolean(true);
    if (tok == "false") return Value::boolean(false);
    if (tok.empty()) c.error("expected a value");
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size()) c.error("cannot parse value '" + tok + "'");
    return Value::number(v);
}

std::string parse_key(Cursor& c) {
    std::string key;
    while (!c.eof()) {
        char x = c.peek();
        if (std::isalnum(static_cast<unsigned char>(x)) || x == '_' || x == '-' || x == '.') {
            key += c.take();
        } else {
            break;
        }
    }
    if (key.empty()) c.error("expected a key");
    return key;
}

}  // namespace

Table parse(const std::string& text) {
    Table table;
    Cursor c{text};
    std::string section;
    table.sections[section];
    while (true) {
        c.skip_ws_and_comments();
        if (c.eof()) break;
        if (c.peek() == '[') {
            c.take();
            c.skip_ws_in_line();
            section = parse_key(c);
            c.skip_ws_in_line();
            if (c.eof() || c.peek() != ']') c.error("expected ']' after section name");
            c.take();
            if (table.sections.count(section)) c.error("duplicate section [" + section + "]");
            table.sections[section];
            continue;
        }
        const std::string key = parse_key(c);
        c.skip_ws_in_line();
        if (c.eof() || c.peek() != '=') c.error("expected '=' after key '" + key + "'");
        c.take();
        Value v = parse_value(c);
        auto& sec = table.sections[section];
        if (sec.count(key)) c.error("duplicate key '" + key + "'");
        sec.emplace(key, std::move(v));
    }
    return table;
}

Table parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::io_error, "cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

}  // namespace rsgbm::toml
