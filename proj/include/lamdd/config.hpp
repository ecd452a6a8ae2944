#ifndef LAMDD_CONFIG_HPP
#define LAMDD_CONFIG_HPP

#include "lamdd/common.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <sstream>

namespace lamdd {

// Scenario files are plain key/value text grouped in [section] blocks.
// '#' and ';' start comments. Values keep internal whitespace.

struct ConfigEntry {
    std::string value;
    int line = 0;
};

class ConfigDoc {
public:
    static ConfigDoc parse(const std::string& text)
    {
        ConfigDoc doc;
        std::istringstream in(text);
        std::string line;
        std::string section; // "" = top level
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            std::string s = strip_comment(line);
            s = trim(s);
            if (s.empty()) continue;
            if (s.front() == '[') {
                if (s.back() != ']')
                    throw config_error("line " + std::to_string(lineno) + ": unterminated section header");
                section = trim(s.substr(1, s.size() - 2));
                if (section.empty())
                    throw config_error("line " + std::to_string(lineno) + ": empty section name");
                doc.sections_[section]; // section may stay empty
                continue;
            }
            auto eq = s.find('=');
            if (eq == std::string::npos)
                throw config_error("line " + std::to_string(lineno) + ": expected key = value");
            std::string key = trim(s.substr(0, eq));
            std::string value = trim(s.substr(eq + 1));
            if (key.empty())
                throw config_error("line " + std::to_string(lineno) + ": empty key");
            doc.sections_[section][key] = ConfigEntry{value, lineno};
        }
        return doc;
    }

    bool has_section(const std::string& name) const { return sections_.count(name) != 0; }

    bool has(const std::string& section, const std::string& key) const
    {
        auto it = sections_.find(section);
        return it != sections_.end() && it->second.count(key) != 0;
    }

    std::optional<std::string> find(const std::string& section, const std::string& key) const
    {
        auto it = sections_.find(section);
        if (it == sections_.end()) return std::nullopt;
        auto jt = it->second.find(key);
        if (jt == it->second.end()) return std::nullopt;
        return jt->second.value;
    }

    std::string get_string(const std::string& section, const std::string& key) const
    {
        auto v = find(section, key);
        if (!v)
            throw config_error("missing key '" + key + "' in section [" + section + "]");
        return *v;
    }

    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& dflt) const
    {
        auto v = find(section, key);
        return v ? *v : dflt;
    }

    double get_double(const std::string& section, const std::string& key) const
    {
        return to_double(get_string(section, key), section, key);
    }

    double get_double(const std::string& section, const std::string& key, double dflt) const
    {
        auto v = find(section, key);
        return v ? to_double(*v, section, key) : dflt;
    }

    int get_int(const std::string& section, const std::string& key) const
    {
        return to_int(get_string(section, key), section, key);
    }

    int get_int(const std::string& section, const std::string& key, int dflt) const
    {
        auto v = find(section, key);
        return v ? to_int(*v, section, key) : dflt;
    }

    bool get_bool(const std::string& section, const std::string& key, bool dflt) const
    {
        auto v = find(section, key);
        if (!v) return dflt;
        std::string s = lower(*v);
        if (s == "on" || s == "true" || s == "yes" || s == "1") return true;
        if (s == "off" || s == "false" || s == "no" || s == "0") return false;
        throw config_error("key '" + key + "' in [" + section + "]: expected boolean, got '" + *v + "'");
    }

    std::vector<double> get_double_list(const std::string& section, const std::string& key) const
    {
        std::vector<double> out;
        for (const auto& tok : split(get_string(section, key), ','))
            out.push_back(to_double(trim(tok), section, key));
        return out;
    }

    const std::map<std::string, ConfigEntry>* section(const std::string& name) const
    {
        auto it = sections_.find(name);
        return it == sections_.end() ? nullptr : &it->second;
    }

    int line_of(const std::string& section, const std::string& key) const
    {
        auto it = sections_.find(section);
        if (it == sections_.end()) return 0;
        auto jt = it->second.find(key);
        return jt == it->second.end() ? 0 : jt->second.line;
    }

    static std::string trim(const std::string& s)
    {
        std::size_t a = 0, b = s.size();
        while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
        while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
        return s.substr(a, b - a);
    }

    static std::string lower(std::string s)
    {
        std::transform(s.begin(), s.end(), s.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        return s;
    }

    static std::vector<std::string> split(const std::string& s, char sep)
    {
        std::vector<std::string> out;
        std::string cur;
        for (char c : s) {
            if (c == sep) {
                out.push_back(cur);
                cur.clear();
            } else {
                cur += c;
            }
        }
        out.push_back(cur);
        return out;
    }

private:
    static std::string strip_comment(const std::string& s)
    {
        auto pos = s.find_first_of("#;");
        return pos == std::string::npos ? s : s.substr(0, pos);
    }

    double to_double(const std::string& v, const std::string& sec, const std::string& key) const
    {
        try {
            std::size_t idx = 0;
            double d = std::stod(v, &idx);
            if (trim(v.substr(idx)).empty()) return d;
        } catch (const std::exception&) {
        }
        throw config_error("key '" + key + "' in [" + sec + "] (line " +
                           std::to_string(line_of(sec, key)) + "): expected number, got '" + v + "'");
    }

    int to_int(const std::string& v, const std::string& sec, const std::string& key) const
    {
        try {
            std::size_t idx = 0;
            long d = std::stol(v, &idx);
            if (trim(v.substr(idx)).empty()) return static_cast<int>(d);
        } catch (const std::exception&) {
        }
        throw config_error("key '" + key + "' in [" + sec + "] (line " +
                           std::to_string(line_of(sec, key)) + "): expected integer, got '" + v + "'");
    }

    std::map<std::string, std::map<std::string, ConfigEntry>> sections_;
};

} // namespace lamdd

#endif // LAMDD_CONFIG_HPP
