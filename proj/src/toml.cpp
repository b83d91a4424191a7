#include "ddlab/toml.hpp"

#include "ddlab/errors.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

namespace ddlab::toml {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b])))
        ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])))
        --e;
    return s.substr(b, e - b);
}

std::string render_number(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

bool parse_number(const std::string& text, double& out) {
    char* end = nullptr;
    out = std::strtod(text.c_str(), &end);
    return end != nullptr && *end == '\0' && end != text.c_str();
}

Value parse_scalar(const std::string& text, int line) {
    if (text.size() >= 2 && text.front() == '"' && text.back() == '"')
        return Value::of_string(text.substr(1, text.size() - 2));
    if (text == "true")
        return Value::of_bool(true);
    if (text == "false")
        return Value::of_bool(false);
    double num = 0.0;
    if (parse_number(text, num))
        return Value::of_number(num);
    throw ConfigError("config line " + std::to_string(line) + ": cannot parse value '" + text +
                      "'");
}

} // namespace

Value Value::of_string(std::string s) {
    Value v;
    v.kind = Kind::String;
    v.str = std::move(s);
    return v;
}

Value Value::of_number(double n) {
    Value v;
    v.kind = Kind::Number;
    v.number = n;
    return v;
}

Value Value::of_bool(bool b) {
    Value v;
    v.kind = Kind::Boolean;
    v.boolean = b;
    return v;
}

Value Value::of_numbers(std::vector<double> n) {
    Value v;
    v.kind = Kind::NumberArray;
    v.numbers = std::move(n);
    return v;
}

Value Value::of_strings(std::vector<std::string> s) {
    Value v;
    v.kind = Kind::StringArray;
    v.strings = std::move(s);
    return v;
}

std::string Value::render() const {
    switch (kind) {
    case Kind::String:
        return '"' + str + '"';
    case Kind::Number:
        return render_number(number);
    case Kind::Boolean:
        return boolean ? "true" : "false";
    case Kind::NumberArray: {
        std::string out = "[";
        for (std::size_t i = 0; i < numbers.size(); ++i)
            out += (i ? ", " : "") + render_number(numbers[i]);
        return out + "]";
    }
    case Kind::StringArray: {
        std::string out = "[";
        for (std::size_t i = 0; i < strings.size(); ++i)
            out += (i ? ", \"" : "\"") + strings[i] + '"';
        return out + "]";
    }
    }
    return {};
}

bool Table::has(const std::string& key) const { return values_.count(key) != 0; }

void Table::set(const std::string& key, Value v) {
    if (!values_.count(key))
        order_.push_back(key);
    values_[key] = std::move(v);
}

const Value& Table::at(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end())
        throw ConfigError("missing config key '" + key + "'");
    return it->second;
}

std::string Table::get_string(const std::string& key, const std::string& fallback) const {
    if (!has(key))
        return fallback;
    const Value& v = at(key);
    if (v.kind != Value::Kind::String)
        throw ConfigError("config key '" + key + "' must be a string");
    return v.str;
}

double Table::get_number(const std::string& key, double fallback) const {
    if (!has(key))
        return fallback;
    const Value& v = at(key);
    if (v.kind != Value::Kind::Number)
        throw ConfigError("config key '" + key + "' must be a number");
    return v.number;
}

long long Table::get_integer(const std::string& key, long long fallback) const {
    const double v = get_number(key, static_cast<double>(fallback));
    return static_cast<long long>(v);
}

bool Table::get_bool(const std::string& key, bool fallback) const {
    if (!has(key))
        return fallback;
    const Value& v = at(key);
    if (v.kind != Value::Kind::Boolean)
        throw ConfigError("config key '" + key + "' must be a boolean");
    return v.boolean;
}

std::vector<double> Table::get_numbers(const std::string& key,
                                       const std::vector<double>& fallback) const {
    if (!has(key))
        return fallback;
    const Value& v = at(key);
    if (v.kind == Value::Kind::Number)
        return {v.number};
    if (v.kind != Value::Kind::NumberArray)
        throw ConfigError("config key '" + key + "' must be an array of numbers");
    return v.numbers;
}

std::vector<std::string> Table::get_strings(const std::string& key,
                                            const std::vector<std::string>& fallback) const {
    if (!has(key))
        return fallback;
    const Value& v = at(key);
    if (v.kind == Value::Kind::String)
        return {v.str};
    if (v.kind != Value::Kind::StringArray)
        throw ConfigError("config key '" + key + "' must be an array of strings");
    return v.strings;
}

void Table::write(std::ostream& out) const {
    // Group by section in first-use order.
    std::vector<std::string> sections;
    for (const std::string& key : order_) {
        const std::string section = key.substr(0, key.find('.'));
        bool seen = false;
        for (const std::string& s : sections)
            seen = seen || s == section;
        if (!seen)
            sections.push_back(section);
    }
    for (const std::string& section : sections) {
        out << '[' << section << "]\n";
        for (const std::string& key : order_) {
            if (key.substr(0, key.find('.')) != section)
                continue;
            out << key.substr(key.find('.') + 1) << " = " << values_.at(key).render() << '\n';
        }
        out << '\n';
    }
}

Table parse(std::istream& in) {
    Table table;
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config line " + std::to_string(lineno) +
                                  ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw ConfigError("config line " + std::to_string(lineno) + ": empty section name");
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string full = section.empty() ? key : section + '.' + key;
        if (value.front() == '[') {
            if (value.back() != ']')
                throw ConfigError("config line " + std::to_string(lineno) +
                                  ": unterminated array");
            std::vector<double> nums;
            std::vector<std::string> strs;
            bool is_string = false;
            std::string body = trim(value.substr(1, value.size() - 2));
            std::stringstream ss(body);
            std::string item;
            while (std::getline(ss, item, ',')) {
                item = trim(item);
                if (item.empty())
                    continue;
                Value v = parse_scalar(item, lineno);
                if (v.kind == Value::Kind::String) {
                    is_string = true;
                    strs.push_back(v.str);
                } else if (v.kind == Value::Kind::Number) {
                    nums.push_back(v.number);
                } else {
                    throw ConfigError("config line " + std::to_string(lineno) +
                                      ": arrays hold numbers or strings only");
                }
            }
            if (is_string && !nums.empty())
                throw ConfigError("config line " + std::to_string(lineno) + ": mixed array types");
            table.set(full, is_string ? Value::of_strings(std::move(strs))
                                      : Value::of_numbers(std::move(nums)));
        } else {
            table.set(full, parse_scalar(value, lineno));
        }
    }
    return table;
}

Table parse_string(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
}

Table parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open config file '" + path + "'");
    return parse(in);
}

} // namespace ddlab::toml
