#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "muit/dsl/ast.hpp"

namespace muit::codegen {

enum class CompileErrc { CheckFailed, NoScreens, UnknownWidgetKind, UnknownScreen };

class CompileError : public std::runtime_error {
 public:
  CompileError(CompileErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  CompileErrc code() const { return code_; }

 private:
  CompileErrc code_;
};

struct CompileOptions {
  // Overrides the entry screen; by default the first screen without
  // parameters, else the first screen.
  std::string entry;
  // Platform stylesheet variants, selected at runtime from screen.deviceos.
  std::vector<std::string> platforms = {"ios", "android"};
};

struct BindingTarget {
  enum class Kind { Operation, Navigate, Cascade, Back, Assign, Script };
  Kind kind = Kind::Script;
  std::string name;               // operation, screen, or assigned path
  std::vector<std::string> args;  // printed argument expressions
};

std::string_view to_string(BindingTarget::Kind kind);

struct Binding {
  std::string screen;
  std::string element;  // `{screen}__{path}`
  std::string event;    // click, change, swipe, ...
  BindingTarget target;
  std::vector<std::string> watched;  // model paths the binding reads
};

using BindingTable = std::vector<Binding>;

struct NavEdge {
  std::string from;
  std::string to;       // empty for a back edge with no known predecessor
  std::string kind;     // push, cascade, back
  std::string trigger;  // element id, when the edge hangs off an element
  friend bool operator==(const NavEdge&, const NavEdge&) = default;
};

struct NavigationGraph {
  std::vector<std::string> nodes;
  std::vector<NavEdge> edges;
};

struct Asset {
  std::string path;  // relative to the bundle root, '/' separated
  std::string content;
  std::string sha256;
};

struct PageBundle {
  std::string module;
  std::string entry;
  std::map<std::string, std::string> screens;  // screen name -> document path
  std::vector<Asset> assets;                   // sorted by path; excludes the manifest
  BindingTable bindings;
  NavigationGraph navigation;
  nlohmann::json manifest;

  const Asset* asset(std::string_view path) const;
  std::string manifest_text() const;
  // Writes manifest.json and every asset below `dir`.
  void write(const std::filesystem::path& dir) const;
};

// Compiles a module. Runs the checker first and refuses modules with errors.
PageBundle compile(const dsl::DslModule& module, const CompileOptions& options = {});

// Event bindings of every screen, in document order.
BindingTable binding_table(const dsl::DslModule& module);

// Screen transitions from navigate(), `new Screen(...)` and history calls.
// Throws UnknownScreen for navigation to an undeclared screen.
NavigationGraph build_navigation(const dsl::DslModule& module);

// One JavaScript function expression per rule of the screen, in document
// order. Each returns the index of the first matching branch, the index of
// the else branch, or -1.
std::vector<std::string> lower_rules(const dsl::ScreenDecl& screen, const dsl::DslModule& module);

// JavaScript for a single expression evaluated against the runtime object
// `m` with no locals in scope.
std::string lower_expression(const dsl::Expr& expr, const dsl::DslModule& module);

nlohmann::json emit_offline_manifest(const PageBundle& bundle);

// Runtime script shipped as assets/runtime.js.
std::string_view runtime_script();

std::string sha256_hex(std::string_view data);

}  // namespace muit::codegen
