#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace ddlab::toml {

/// Value of the small TOML subset used for study configuration: strings,
/// numbers, booleans, and flat arrays of numbers or strings.
struct Value {
    enum class Kind { String, Number, Boolean, NumberArray, StringArray };
    Kind kind = Kind::String;
    std::string str;
    double number = 0.0;
    bool boolean = false;
    std::vector<double> numbers;
    std::vector<std::string> strings;

    static Value of_string(std::string s);
    static Value of_number(double v);
    static Value of_bool(bool v);
    static Value of_numbers(std::vector<double> v);
    static Value of_strings(std::vector<std::string> v);

    /// TOML literal for the value.
    std::string render() const;
};

/// Flat key-value document with dotted keys ("section.key"). Preserves
/// insertion order for deterministic round-trips.
class Table {
public:
    bool has(const std::string& key) const;
    void set(const std::string& key, Value v);

    const Value& at(const std::string& key) const; // throws ConfigError

    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_number(const std::string& key, double fallback) const;
    long long get_integer(const std::string& key, long long fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<double> get_numbers(const std::string& key,
                                    const std::vector<double>& fallback) const;
    std::vector<std::string> get_strings(const std::string& key,
                                         const std::vector<std::string>& fallback) const;

    const std::vector<std::string>& ordered_keys() const { return order_; }

    /// Serializes grouped by section, in first-use order.
    void write(std::ostream& out) const;

private:
    std::map<std::string, Value> values_;
    std::vector<std::string> order_;
};

/// Parses the subset: [section] headers, key = value lines, # comments.
/// Throws ConfigError naming the offending line.
Table parse(std::istream& in);
Table parse_string(const std::string& text);
Table parse_file(const std::string& path);

} // namespace ddlab::toml
