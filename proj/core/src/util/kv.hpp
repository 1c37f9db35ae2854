#pragma once

#include <boost/property_tree/ptree.hpp>
#include <stdexcept>
#include <string>
#include <string_view>

namespace muit::kv {

class SyntaxError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Reads the TOML subset used by engine and workload files: [sections],
// key = value lines, quoted or bare values and whole-line or trailing '#'
// comments. Top-level children of the result are the sections.
boost::property_tree::ptree read_key_values(std::string_view text);

// Number under `key`, or `fallback` when absent. Throws SyntaxError when the
// value is not a number in [min, max], or not integral for integral T.
template <typename T>
T number(const boost::property_tree::ptree& section, const std::string& where, const std::string& key, T fallback,
         double min, double max);

}  // namespace muit::kv
