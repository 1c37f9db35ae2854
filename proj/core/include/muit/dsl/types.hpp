#pragma once

#include <memory>
#include <string>

namespace muit::dsl {

// Resolved semantic type. Entities are nominal; primitives are structural.
struct SemType {
  enum class Kind {
    Unknown,    // not yet checked, or already reported as an error
    Any,        // untyped parameters and dynamic builtins
    Void,
    String,
    Int,
    Boolean,
    DateTime,
    Entity,
    List,
    Screen,
    Operation,
    Widget,
    Touch,
    Callback,
    Function,
    Namespace,  // builtin objects such as `screen`, `history`, `DateTime`
    Block,
  };

  Kind kind = Kind::Unknown;
  std::string name;  // entity/screen/widget/namespace name
  std::shared_ptr<const SemType> element;

  static SemType of(Kind k) { return SemType{k, {}, nullptr}; }
  static SemType any() { return of(Kind::Any); }
  static SemType unknown() { return of(Kind::Unknown); }
  static SemType void_type() { return of(Kind::Void); }
  static SemType string() { return of(Kind::String); }
  static SemType integer() { return of(Kind::Int); }
  static SemType boolean() { return of(Kind::Boolean); }
  static SemType date_time() { return of(Kind::DateTime); }
  static SemType entity(std::string n) { return SemType{Kind::Entity, std::move(n), nullptr}; }
  static SemType named(Kind k, std::string n) { return SemType{k, std::move(n), nullptr}; }
  static SemType list(SemType elem) {
    return SemType{Kind::List, {}, std::make_shared<const SemType>(std::move(elem))};
  }

  bool is(Kind k) const { return kind == k; }
  bool is_dynamic() const { return kind == Kind::Any || kind == Kind::Unknown; }

  std::string to_string() const;

  friend bool operator==(const SemType& a, const SemType& b);
};

}  // namespace muit::dsl
