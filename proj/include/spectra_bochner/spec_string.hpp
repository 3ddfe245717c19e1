#pragma once

// Parser for the compact object specs used on the command line and in
// config files, e.g. "torus2:L=6.2831853,perturb=sin", "sphere:n=4,K=1",
// "ellipsoid:1,1,1.1".

#include <charconv>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "spectra_bochner/errors.hpp"

namespace spectra_bochner {

struct SpecString {
  std::string name;
  std::vector<std::string> positional;
  std::map<std::string, std::string> options;

  static SpecString parse(std::string_view text) {
    SpecString s;
    const auto colon = text.find(':');
    s.name = std::string(trim(text.substr(0, colon)));
    if (s.name.empty()) fail(ErrorKind::ConfigParse, "empty spec name in '" + std::string(text) + "'");
    if (colon == std::string_view::npos) return s;
    std::string_view rest = text.substr(colon + 1);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      std::string_view item = trim(rest.substr(0, comma));
      if (!item.empty()) {
        const auto eq = item.find('=');
        if (eq == std::string_view::npos)
          s.positional.emplace_back(item);
        else
          s.options[std::string(trim(item.substr(0, eq)))] = std::string(trim(item.substr(eq + 1)));
      }
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    return s;
  }

  bool has(const std::string& key) const { return options.count(key) > 0; }

  double number(const std::string& key, double fallback) const {
    auto it = options.find(key);
    return it == options.end() ? fallback : to_double(it->second);
  }

  std::string text(const std::string& key, const std::string& fallback) const {
    auto it = options.find(key);
    return it == options.end() ? fallback : it->second;
  }

  std::vector<double> positional_numbers() const {
    std::vector<double> out;
    for (const auto& p : positional) out.push_back(to_double(p));
    return out;
  }

  static double to_double(std::string_view v) {
    double out = 0.0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size())
      fail(ErrorKind::ConfigParse, "not a number: '" + std::string(v) + "'");
    return out;
  }

 private:
  static std::string_view trim(std::string_view v) {
    while (!v.empty() && (v.front() == ' ' || v.front() == '"')) v.remove_prefix(1);
    while (!v.empty() && (v.back() == ' ' || v.back() == '"')) v.remove_suffix(1);
    return v;
  }
};

}  // namespace spectra_bochner
