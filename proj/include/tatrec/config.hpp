#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace tatrec {

/// key = value configuration.  Keys may repeat (each occurrence appended);
/// later scalar lookups take the last value.  '#' starts a comment.
struct Config {
    std::map<std::string, std::vector<std::string>> values;

    static std::string trim(const std::string& s) {
        const auto b = s.find_first_not_of(" \t\r\n");
        if (b == std::string::npos) return "";
        const auto e = s.find_last_not_of(" \t\r\n");
        return s.substr(b, e - b + 1);
    }

    void add_line(const std::string& raw, const std::string& where) {
        std::string line = raw;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) return;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(where + ": expected 'key = value', got '" + trim(raw) + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty()) throw std::invalid_argument(where + ": empty key");
        values[key].push_back(val);
    }

    static Config from_file(const std::string& path) {
        std::ifstream is(path);
        if (!is) throw std::invalid_argument("cannot open config file '" + path + "'");
        Config c;
        std::string line;
        int ln = 0;
        while (std::getline(is, line)) {
            ++ln;
            c.add_line(line, path + ":" + std::to_string(ln));
        }
        return c;
    }

    void apply_override(const std::string& kv) { add_line(kv, "--set " + kv); }

    bool has(const std::string& key) const { return values.count(key) != 0; }

    const std::string& last(const std::string& key) const { return values.at(key).back(); }

    std::string get_str(const std::string& key, const std::string& dflt) const {
        return has(key) ? last(key) : dflt;
    }
    std::string require_str(const std::string& key) const {
        if (!has(key)) throw std::invalid_argument("missing required config key '" + key + "'");
        return last(key);
    }

    double get_double(const std::string& key, double dflt) const {
        if (!has(key)) return dflt;
        return parse_double(key, last(key));
    }
    int get_int(const std::string& key, int dflt) const {
        if (!has(key)) return dflt;
        return parse_int(key, last(key));
    }
    std::uint64_t get_u64(const std::string& key, std::uint64_t dflt) const {
        if (!has(key)) return dflt;
        const std::string& s = last(key);
        std::size_t pos = 0;
        std::uint64_t v = 0;
        try {
            // stoull wraps negatives around instead of failing; forbid them.
            if (s.empty() || s[0] == '-') throw std::invalid_argument(s);
            v = std::stoull(s, &pos);
        } catch (const std::exception&) {
            throw std::invalid_argument("config key '" + key + "': bad unsigned value '" + s + "'");
        }
        if (pos != s.size())
            throw std::invalid_argument("config key '" + key + "': bad unsigned value '" + s + "'");
        return v;
    }
    bool get_bool(const std::string& key, bool dflt) const {
        if (!has(key)) return dflt;
        const std::string& s = last(key);
        if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
        if (s == "0" || s == "false" || s == "no" || s == "off") return false;
        throw std::invalid_argument("config key '" + key + "': bad boolean value '" + s + "'");
    }
    std::vector<std::string> get_all(const std::string& key) const {
        return has(key) ? values.at(key) : std::vector<std::string>{};
    }

    /// Unknown keys are rejected outright so typos never silently fall back
    /// to defaults.
    void require_known(const std::set<std::string>& allowed) const {
        std::vector<std::string> bad;
        for (const auto& [k, v] : values)
            if (!allowed.count(k)) bad.push_back(k);
        if (!bad.empty()) {
            std::string msg = "unknown config key(s):";
            for (const auto& k : bad) msg += " '" + k + "'";
            throw std::invalid_argument(msg);
        }
    }

    /// Resolved configuration in canonical form: sorted keys, repeats in
    /// their original order.
    std::string echo() const {
        std::ostringstream os;
        for (const auto& [k, vs] : values)
            for (const auto& v : vs) os << k << " = " << v << '\n';
        return os.str();
    }

  private:
    static double parse_double(const std::string& key, const std::string& s) {
        std::size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &pos);
        } catch (const std::exception&) {
            throw std::invalid_argument("config key '" + key + "': bad numeric value '" + s + "'");
        }
        if (pos != s.size())
            throw std::invalid_argument("config key '" + key + "': bad numeric value '" + s + "'");
        return v;
    }
    static int parse_int(const std::string& key, const std::string& s) {
        std::size_t pos = 0;
        long v = 0;
        try {
            v = std::stol(s, &pos);
        } catch (const std::exception&) {
            throw std::invalid_argument("config key '" + key + "': bad integer value '" + s + "'");
        }
        if (pos != s.size() || v < -(1L << 31) || v > (1L << 31))
            throw std::invalid_argument("config key '" + key + "': bad integer value '" + s + "'");
        return static_cast<int>(v);
    }
};

}  // namespace tatrec
