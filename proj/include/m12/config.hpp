#ifndef M12_CONFIG_HPP
#define M12_CONFIG_HPP

#include <cctype>
#include <cstdint>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace m12 {

// Config parse failure; line is 1-based.
struct ConfigError : std::runtime_error {
    int line;
    ConfigError(int line_, const std::string& msg)
        : std::runtime_error("config line " + std::to_string(line_) + ": " + msg), line(line_) {}
};

// INI-style document: [section] headers, key = value pairs, '#' comments.
class Config {
public:
    static Config parse(std::istream& in) {
        Config cfg;
        std::string line, section;
        int ln = 0;
        while (std::getline(in, line)) {
            ++ln;
            std::string s = strip(line);
            if (s.empty() || s[0] == '#') continue;
            if (s.front() == '[') {
                if (s.back() != ']' || s.size() < 3)
                    throw ConfigError(ln, "malformed section header '" + s + "'");
                section = strip(s.substr(1, s.size() - 2));
                continue;
            }
            const auto eq = s.find('=');
            if (eq == std::string::npos)
                throw ConfigError(ln, "expected 'key = value', got '" + s + "'");
            const std::string key = strip(s.substr(0, eq));
            std::string val = strip(s.substr(eq + 1));
            const auto hash = val.find('#');
            if (hash != std::string::npos) val = strip(val.substr(0, hash));
            if (key.empty()) throw ConfigError(ln, "empty key");
            cfg.values_[section + "." + key] = {val, ln};
        }
        return cfg;
    }

    bool has(const std::string& dotted) const { return values_.count(dotted) > 0; }

    std::string get_string(const std::string& dotted, const std::string& fallback) const {
        auto it = values_.find(dotted);
        return it == values_.end() ? fallback : it->second.text;
    }

    double get_double(const std::string& dotted, double fallback) const {
        auto it = values_.find(dotted);
        if (it == values_.end()) return fallback;
        try {
            std::size_t pos = 0;
            const double v = std::stod(it->second.text, &pos);
            if (pos != it->second.text.size()) throw std::invalid_argument("");
            return v;
        } catch (...) {
            throw ConfigError(it->second.line, "'" + dotted + "' is not a number: '" +
                                                   it->second.text + "'");
        }
    }

    std::int64_t get_int(const std::string& dotted, std::int64_t fallback) const {
        auto it = values_.find(dotted);
        if (it == values_.end()) return fallback;
        try {
            std::size_t pos = 0;
            const std::int64_t v = std::stoll(it->second.text, &pos);
            if (pos != it->second.text.size()) throw std::invalid_argument("");
            return v;
        } catch (...) {
            throw ConfigError(it->second.line, "'" + dotted + "' is not an integer: '" +
                                                   it->second.text + "'");
        }
    }

    // Grid syntax: comma list "1,2,3" and/or range items "start:step:stop"
    // (stop inclusive within half a step).
    std::vector<double> get_grid(const std::string& dotted,
                                 const std::vector<double>& fallback) const {
        auto it = values_.find(dotted);
        if (it == values_.end()) return fallback;
        std::vector<double> out;
        std::stringstream ss(it->second.text);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = strip(item);
            if (item.empty()) continue;
            const auto c1 = item.find(':');
            try {
                if (c1 == std::string::npos) {
                    out.push_back(std::stod(item));
                } else {
                    const auto c2 = item.find(':', c1 + 1);
                    if (c2 == std::string::npos) throw std::invalid_argument("");
                    const double a = std::stod(item.substr(0, c1));
                    const double step = std::stod(item.substr(c1 + 1, c2 - c1 - 1));
                    const double b = std::stod(item.substr(c2 + 1));
                    if (step <= 0.0) throw std::invalid_argument("");
                    for (double x = a; x <= b + step / 2.0; x += step) out.push_back(x);
                }
            } catch (...) {
                throw ConfigError(it->second.line,
                                  "bad grid item '" + item + "' in '" + dotted + "'");
            }
        }
        if (out.empty())
            throw ConfigError(it->second.line, "empty grid in '" + dotted + "'");
        return out;
    }

private:
    struct Entry {
        std::string text;
        int line = 0;
    };
    std::map<std::string, Entry> values_;

    static std::string strip(const std::string& s) {
        std::size_t a = 0, b = s.size();
        while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
        while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
        return s.substr(a, b - a);
    }
};

} // namespace m12

#endif
