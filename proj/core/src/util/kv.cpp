#include "kv.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <type_traits>

namespace muit::kv {

namespace pt = boost::property_tree;

namespace {

std::string trim(std::string s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Turns the TOML subset into INI: '#' comments become ';' and quoted values
// lose their quotes.
std::string to_ini(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::ostringstream out;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    auto t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') {
      out << '\n';
      continue;
    }
    if (t[0] == '[') {
      out << t << '\n';
      continue;
    }
    auto eq = t.find('=');
    if (eq == std::string::npos) throw SyntaxError("line " + std::to_string(n) + ": expected key = value");
    auto key = trim(t.substr(0, eq));
    auto value = trim(t.substr(eq + 1));
    if (!value.empty() && (value[0] == '"' || value[0] == '\'')) {
      auto close = value.find(value[0], 1);
      if (close == std::string::npos) throw SyntaxError("line " + std::to_string(n) + ": unterminated string");
      auto rest = trim(value.substr(close + 1));
      if (!rest.empty() && rest[0] != '#') throw SyntaxError("line " + std::to_string(n) + ": text after string");
      value = value.substr(1, close - 1);
    } else if (auto hash = value.find(" #"); hash != std::string::npos) {
      value = trim(value.substr(0, hash));
    }
    out << key << '=' << value << '\n';
  }
  return out.str();
}

}  // namespace

pt::ptree read_key_values(std::string_view text) {
  pt::ptree tree;
  try {
    std::istringstream in(to_ini(text));
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw SyntaxError(e.message() + " at line " + std::to_string(e.line()));
  }
  for (const auto& [name, section] : tree)
    if (section.empty() && !section.data().empty()) throw SyntaxError("key '" + name + "' outside a section");
  return tree;
}

template <typename T>
T number(const pt::ptree& section, const std::string& where, const std::string& key, T fallback, double min,
         double max) {
  auto v = section.get_optional<std::string>(key);
  if (!v) return fallback;
  double d;
  try {
    std::size_t used = 0;
    d = std::stod(*v, &used);
    if (used != v->size()) throw std::invalid_argument(*v);
  } catch (const std::exception&) {
    throw SyntaxError(where + " " + key + ": expected a number, got '" + *v + "'");
  }
  if (!std::isfinite(d) || d < min || d > max)
    throw SyntaxError(where + " " + key + ": " + *v + " is out of range");
  if constexpr (std::is_integral_v<T>) {
    if (d != std::floor(d)) throw SyntaxError(where + " " + key + ": expected an integer, got '" + *v + "'");
  }
  return static_cast<T>(d);
}

template int number<int>(const pt::ptree&, const std::string&, const std::string&, int, double, double);
template std::int64_t number<std::int64_t>(const pt::ptree&, const std::string&, const std::string&, std::int64_t,
                                           double, double);
template std::uint64_t number<std::uint64_t>(const pt::ptree&, const std::string&, const std::string&, std::uint64_t,
                                             double, double);
template std::uint16_t number<std::uint16_t>(const pt::ptree&, const std::string&, const std::string&, std::uint16_t,
                                             double, double);
template double number<double>(const pt::ptree&, const std::string&, const std::string&, double, double, double);

}  // namespace muit::kv
