#pragma once

#include <limits>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "muit/bridge/bridge.hpp"

namespace muit::test {

// Random one-operation service schema plus payload trees that conform to it.
struct RandomService {
  std::mt19937_64 rng;
  wsdl::WsdlDescription desc;
  int types = 0;

  explicit RandomService(std::uint64_t seed) : rng(seed) {}

  int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
  bool chance(double p) { return std::bernoulli_distribution(p)(rng); }

  wsdl::SchemaField field(int depth, const std::string& ns, std::set<std::string>& used) {
    wsdl::SchemaField f;
    do f.name = "f" + std::to_string(uniform(0, 40)); while (used.count(f.name));
    used.insert(f.name);
    f.ns = ns;
    f.repeated = chance(0.2);
    f.optional = chance(0.3);
    if (depth >= 5 || chance(0.6)) {
      static const char* kinds[] = {"string", "int", "long", "date", "decimal", "boolean", "dateTime"};
      f.xsd_type = kinds[uniform(0, 6)];
      return f;
    }
    std::vector<wsdl::SchemaField> kids;
    std::set<std::string> inner;
    int n = uniform(0, 8);
    for (int i = 0; i < n; ++i) kids.push_back(field(depth + 1, ns, inner));
    if (chance(0.3)) {
      std::string name = "T" + std::to_string(types++);
      desc.complex_types[name] = wsdl::ComplexType{name, std::move(kids)};
      f.type_name = name;
    } else {
      f.children = std::move(kids);
    }
    return f;
  }

  void build() {
    desc.target_namespace = "urn:random";
    std::string ns = chance(0.5) ? "urn:random" : "";
    for (const char* dir : {"In", "Out"}) {
      wsdl::SchemaField root;
      root.name = std::string("op") + dir;
      root.ns = "urn:random";
      std::set<std::string> used;
      int n = uniform(0, 8);
      for (int i = 0; i < n; ++i) root.children.push_back(field(1, ns, used));
      desc.messages.push_back({std::string("m") + dir, {{"parameters", root}}});
    }
    desc.operations.push_back({"op", "mIn", "mOut", "urn:op"});
  }

  std::string text() {
    static const std::vector<std::string> pieces = {"a", "Z", " ", "&", "<", ">", "\"", "'", "审批", "é", "\t", "\n", "x y", "0"};
    std::string s;
    int n = uniform(0, 6);
    for (int i = 0; i < n; ++i) s += pieces[static_cast<std::size_t>(uniform(0, static_cast<int>(pieces.size()) - 1))];
    return s;
  }

  nlohmann::json leaf(const wsdl::SchemaField& f) {
    if (bridge::integral_xsd_type(f.xsd_type)) {
      if (chance(0.1)) return std::numeric_limits<std::int64_t>::min();
      return std::uniform_int_distribution<std::int64_t>(-1000000000000LL, 1000000000000LL)(rng);
    }
    return text();
  }

  nlohmann::json single(const wsdl::SchemaField& f, const bridge::ServiceSchema& schema) {
    if (f.optional && chance(0.1)) return nullptr;
    if (f.simple()) return leaf(f);
    return object(schema.children(f), schema);
  }

  nlohmann::json object(const std::vector<wsdl::SchemaField>& fields, const bridge::ServiceSchema& schema) {
    nlohmann::json o = nlohmann::json::object();
    for (const auto& f : fields) {
      if (f.optional && chance(0.3)) continue;
      if (f.repeated) {
        nlohmann::json arr = nlohmann::json::array();
        int n = uniform(1, 3);
        for (int i = 0; i < n; ++i) arr.push_back(single(f, schema));
        o[f.name] = std::move(arr);
      } else {
        o[f.name] = single(f, schema);
      }
    }
    return o;
  }
};

}  // namespace muit::test
