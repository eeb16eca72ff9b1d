// Copyright 2026 The stereoscore Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "stereoscore/io.hpp"

#include <fstream>

#include "doctest.h"
#include "stereoscore/error.hpp"
#include "test_util.hpp"

using namespace stereoscore;

TEST_CASE("normalize_text applies NFC and trims") {
  // "e" + combining acute vs precomposed U+00E9
  CHECK(normalize_text("  Caf\x65\xCC\x81 \n") == "Caf\xC3\xA9");
  CHECK(normalize_text("Caf\xC3\xA9") == "Caf\xC3\xA9");
  CHECK(normalize_text("   ").empty());
}

TEST_CASE("format helpers") {
  CHECK(format_fixed(0.43729, 4) == "0.4373");
  CHECK(format_fixed(-0.00001, 4) == "0.0000");
  CHECK(format_fixed(-0.5, 2) == "-0.50");
  CHECK(format_exact(0.1) == "0.1");
  CHECK(parse_double(format_exact(1.0 / 3.0), "x") == 1.0 / 3.0);
}

TEST_CASE("strict number parsing") {
  CHECK(parse_double(" 2.5 ", "x") == 2.5);
  CHECK(parse_int("42", "n") == 42);
  CHECK_THROWS_AS(parse_double("2.5abc", "x"), FormatError);
  CHECK_THROWS_AS(parse_double("", "x"), FormatError);
  CHECK_THROWS_AS(parse_int("4.0", "n"), FormatError);
}

TEST_CASE("parse_csv handles quoting, CRLF and BOM") {
  const auto t = parse_csv(
      "\xEF\xBB\xBF" "a,b,c\r\n"
      "1,\"x, y\",\"say \"\"hi\"\"\"\r\n"
      "\n"
      "2,\"multi\nline\",\r\n");
  REQUIRE(t.header() == std::vector<std::string>{"a", "b", "c"});
  REQUIRE(t.size() == 2);
  CHECK(t.cell(0, 1) == "x, y");
  CHECK(t.cell(0, 2) == "say \"hi\"");
  CHECK(t.cell(1, 1) == "multi\nline");
  CHECK(t.cell(1, 2).empty());
  CHECK(t.column("b") == 1u);
  CHECK_FALSE(t.column("zzz").has_value());
  CHECK_THROWS_AS(t.require_column("zzz"), FormatError);
}

TEST_CASE("parse_csv rejects an unterminated quote") {
  CHECK_THROWS_AS(parse_csv("a\n\"oops\n"), FormatError);
}

TEST_CASE("csv_line round-trips through parse_csv") {
  const std::vector<std::string> fields{"plain", "with,comma", "with \"quote\"",
                                        "new\nline", ""};
  const auto t = parse_csv("h1,h2,h3,h4,h5\n" + csv_line(fields) + "\n");
  REQUIRE(t.size() == 1);
  CHECK(t.rows()[0] == fields);
}

TEST_CASE("file helpers") {
  testutil::TempDir dir;
  const auto p = dir / "nested/sub/out.txt";
  write_file(p, "hello\n");
  CHECK(read_file(p) == "hello\n");
  CHECK_THROWS_AS(read_file(dir / "missing.txt"), NotFoundError);
}

TEST_CASE("for_each_jsonl reports the failing line") {
  testutil::TempDir dir;
  const auto p = dir / "x.jsonl";
  write_file(p, "{\"a\": 1}\n\n{\"a\": 2}\n{broken\n");
  int seen = 0;
  try {
    for_each_jsonl(p, [&](const Json& j, std::size_t) { seen += j.at("a").get<int>(); });
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find(":4") != std::string::npos);
  }
  CHECK(seen == 3);
}
