#pragma once

#include <string>
#include <vector>

#include "js.hpp"
#include "muit/codegen/bundle.hpp"

namespace muit::codegen::detail {

// Output of lowering one screen.
struct LoweredScreen {
  std::string body;                    // markup inside <body>
  std::vector<std::string> registrations;  // JS object literals for the runtime
  std::string show;                    // JS statements run when the screen is shown
  BindingTable bindings;
  std::vector<NavEdge> edges;          // back edges have an empty `to`
};

LoweredScreen lower_screen(const dsl::DslModule& module, const dsl::ScreenDecl& screen);

struct WidgetLowering {
  std::string css_class;
  std::string event;
  std::string control;  // extra markup for the native control, may be empty
};

// Codegen's own registries. The checker's kind lists must be covered.
const WidgetLowering* widget_lowering(std::string_view kind);
const WidgetLowering* touch_lowering(std::string_view kind);

std::string html_escape(std::string_view s);

// Relative references (src/href) in a document, resolved against `base`.
std::vector<std::string> document_refs(std::string_view html, std::string_view base);

}  // namespace muit::codegen::detail
