#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "fraudseq/common.hpp"

namespace fraudseq {

// Minimal INI: [section] headers, key = value pairs, # or ; comments.
class IniConfig {
public:
  static IniConfig parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str());
  }

  static IniConfig parse_string(const std::string& text) {
    IniConfig cfg;
    cfg.raw_text_ = text;
    std::istringstream in(text);
    std::string line, section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const std::string t = trim(strip_comment(line));
      if (t.empty()) continue;
      if (t.front() == '[') {
        if (t.back() != ']')
          throw std::runtime_error("config line " + std::to_string(line_no) +
                                   ": unterminated section header");
        section = trim(t.substr(1, t.size() - 2));
        cfg.sections_[section];
        continue;
      }
      const std::size_t eq = t.find('=');
      if (eq == std::string::npos)
        throw std::runtime_error("config line " + std::to_string(line_no) +
                                 ": expected key = value");
      cfg.sections_[section][trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
    }
    return cfg;
  }

  bool has(const std::string& section, const std::string& key) const {
    auto s = sections_.find(section);
    return s != sections_.end() && s->second.count(key) > 0;
  }

  std::string get(const std::string& section, const std::string& key,
                  const std::string& fallback) const {
    auto s = sections_.find(section);
    if (s == sections_.end()) return fallback;
    auto k = s->second.find(key);
    return k == s->second.end() ? fallback : k->second;
  }

  double get_double(const std::string& section, const std::string& key,
                    double fallback) const {
    if (!has(section, key)) return fallback;
    return parse_double(get(section, key, ""));
  }

  std::int64_t get_int(const std::string& section, const std::string& key,
                       std::int64_t fallback) const {
    if (!has(section, key)) return fallback;
    return parse_int64(get(section, key, ""));
  }

  bool get_bool(const std::string& section, const std::string& key,
                bool fallback) const {
    if (!has(section, key)) return fallback;
    const std::string v = get(section, key, "");
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::runtime_error("config: boolean expected for " + section + "." + key);
  }

  std::vector<std::string> get_list(const std::string& section, const std::string& key,
                                    const std::string& fallback) const {
    std::vector<std::string> out;
    std::string v = get(section, key, fallback);
    std::size_t start = 0;
    while (start <= v.size()) {
      std::size_t pos = v.find(',', start);
      if (pos == std::string::npos) pos = v.size();
      const std::string item = trim(v.substr(start, pos - start));
      if (!item.empty()) out.push_back(item);
      start = pos + 1;
    }
    return out;
  }

  const std::string& raw_text() const { return raw_text_; }

  // FNV-1a over the raw config text; used for the run manifest.
  std::uint64_t hash() const {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : raw_text_) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    return h;
  }

private:
  static std::string strip_comment(const std::string& s) {
    const std::size_t pos = s.find_first_of("#;");
    return pos == std::string::npos ? s : s.substr(0, pos);
  }
  static std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
  }

  std::map<std::string, std::map<std::string, std::string>> sections_;
  std::string raw_text_;
};

}  // namespace fraudseq
