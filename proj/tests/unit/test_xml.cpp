#include <doctest.h>

#include <random>

#include "muit/util/xml.hpp"

using namespace muit;

TEST_CASE("namespaces resolve through scopes") {
  auto root = xml::parse(R"(<a:root xmlns:a="urn:a" xmlns="urn:d"><child x="1"><a:leaf>v</a:leaf></child></a:root>)");
  CHECK(root.is("urn:a", "root"));
  REQUIRE(root.children.size() == 1);
  const auto& child = root.children[0];
  CHECK(child.is("urn:d", "child"));
  CHECK(child.attr_or("x") == "1");
  CHECK(child.child("urn:a", "leaf")->text == "v");
  CHECK(child.resolve("a:T") == xml::QName{"urn:a", "T"});
  CHECK(child.resolve("zz:T") == xml::QName{"", "T"});
}

TEST_CASE("redeclared prefixes shadow outer ones") {
  auto root = xml::parse(R"(<p:r xmlns:p="urn:1"><p:s xmlns:p="urn:2"/><p:t/></p:r>)");
  CHECK(root.children[0].ns == "urn:2");
  CHECK(root.children[1].ns == "urn:1");
}

TEST_CASE("entities and CDATA are decoded") {
  auto root = xml::parse("<r>a &amp; b &lt;c&gt; &#233;<![CDATA[<raw>]]></r>");
  CHECK(root.text == "a & b <c> \xC3\xA9<raw>");
}

TEST_CASE("malformed documents are rejected") {
  for (const char* bad : {"", "<a>", "<a></b>", "<a><b></a></b>", "<a/><b/>", "text", "<a x='1></a>",
                          "<a><!-- never closed </a>"}) {
    std::string doc = bad;
    CAPTURE(doc);
    CHECK_THROWS_AS(xml::parse(doc), xml::ParseError);
  }
}

TEST_CASE("quoted '>' and comments do not confuse the structure scan") {
  auto root = xml::parse(R"(<?xml version="1.0"?><!-- <x> --><a t="1>2"><b/><!-- </a> --></a>)");
  CHECK(root.attr_or("t") == "1>2");
  CHECK(root.children.size() == 1);
}

TEST_CASE("nesting is bounded") {
  std::string deep;
  for (int i = 0; i < 500; ++i) deep += "<a>";
  for (int i = 0; i < 500; ++i) deep += "</a>";
  CHECK_THROWS_AS(xml::parse(deep), xml::ParseError);
  CHECK_NOTHROW(xml::parse(deep, 1000));
}

TEST_CASE("escape covers the five predefined entities") {
  CHECK(xml::escape(R"(<a href="x">'&'</a>)") == "&lt;a href=&quot;x&quot;&gt;&apos;&amp;&apos;&lt;/a&gt;");
  auto round = xml::parse("<r>" + xml::escape("1 < 2 & \"q\"") + "</r>");
  CHECK(round.text == "1 < 2 & \"q\"");
}

TEST_CASE("random mutations never crash the reader") {
  std::string base = R"(<s:E xmlns:s="urn:s"><s:B><op a="1"><x>1</x><y>two</y></op></s:B></s:E>)";
  std::mt19937 rng(11);
  const std::string alphabet = "<>/=\"' :&;!?-[]ax";
  for (int i = 0; i < 5000; ++i) {
    std::string doc = base;
    int edits = 1 + static_cast<int>(rng() % 4);
    for (int k = 0; k < edits; ++k) {
      std::size_t at = rng() % (doc.size() + 1);
      switch (rng() % 3) {
        case 0: doc.insert(doc.begin() + static_cast<long>(at), alphabet[rng() % alphabet.size()]); break;
        case 1: if (at < doc.size()) doc.erase(at, 1); break;
        default: if (at < doc.size()) doc[at] = alphabet[rng() % alphabet.size()];
      }
    }
    try {
      auto root = xml::parse(doc);
      CHECK(!root.name.empty());
    } catch (const xml::ParseError&) {
    }
  }
}
