#include <doctest.h>

#include "framebench/error.hpp"
#include "framebench/hash.hpp"
#include "framebench/jsonl.hpp"
#include "framebench/text.hpp"
#include "helpers.hpp"

using namespace framebench;

TEST_CASE("sha256 matches published test vectors") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("unit_interval_hash is deterministic and in [0, 1)") {
  double lo = 1.0, hi = 0.0, total = 0.0;
  for (int i = 0; i < 2000; ++i) {
    const double u = unit_interval_hash("seed-" + std::to_string(i));
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(u == unit_interval_hash("seed-" + std::to_string(i)));
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    total += u;
  }
  CHECK(lo < 0.01);
  CHECK(hi > 0.99);
  CHECK(total / 2000 == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("split_words treats Unicode spaces as separators") {
  CHECK(text::count_words("one two  three") == 3);
  CHECK(text::count_words("  leading and trailing\t\n") == 3);
  CHECK(text::count_words("non\xC2\xA0" "breaking") == 2);       // U+00A0
  CHECK(text::count_words("ideo\xE3\x80\x80graphic") == 2);      // U+3000
  CHECK(text::count_words("em\xE2\x80\x83space") == 2);          // U+2003
  CHECK(text::count_words("caf\xC3\xA9 au lait") == 3);          // é is not a space
  CHECK(text::count_words("Please help me now with:") == 5);
  CHECK(text::count_words("") == 0);
}

TEST_CASE("count_occurrences counts non-overlapping matches") {
  CHECK(text::count_occurrences("aaaa", "aa") == 2);
  CHECK(text::count_occurrences("output \"X\" or \"X\"", "\"X\"") == 2);
  CHECK(text::count_occurrences("abc", "d") == 0);
}

TEST_CASE("split and join are inverse on simple lists") {
  const auto parts = text::split("a,b,,c", ',');
  REQUIRE(parts.size() == 4);
  CHECK(parts[2].empty());
  CHECK(text::join(parts, ",") == "a,b,,c");
}

TEST_CASE("jsonl reader checks the schema header and reports line numbers") {
  testing::TempDir dir;
  const auto ok = dir / "ok.jsonl";
  testing::write_text(ok, "{\"schema\":\"t/1\"}\n\n{\"a\":1}\n{\"a\":2}\n");
  const auto doc = jsonl::read(ok, "t/1");
  REQUIRE(doc.records.size() == 2);
  CHECK(doc.records[0].line == 3);
  CHECK(doc.records[1].value["a"] == 2);

  CHECK_THROWS_AS(jsonl::read(ok, "other/1"), Error);

  const auto bad = dir / "bad.jsonl";
  testing::write_text(bad, "{\"schema\":\"t/1\"}\n{\"a\":1}\n{oops\n");
  try {
    jsonl::read(bad, "t/1");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Parse);
    CHECK(std::string(e.what()).find(":3") != std::string::npos);
  }
  CHECK_THROWS_AS(jsonl::read(dir / "missing.jsonl", "t/1"), Error);
}

TEST_CASE("jsonl lines are canonical") {
  CHECK(jsonl::line({{"b", 1}, {"a", "x"}}) == "{\"a\":\"x\",\"b\":1}\n");
  CHECK(jsonl::header("s/1", {{"kind", "k"}}) == "{\"kind\":\"k\",\"schema\":\"s/1\"}\n");
}

TEST_CASE("write_atomic replaces file contents") {
  testing::TempDir dir;
  const auto p = dir / "f.txt";
  jsonl::write_atomic(p, "first");
  jsonl::write_atomic(p, "second");
  CHECK(jsonl::read_file(p) == "second");
  CHECK(std::distance(std::filesystem::directory_iterator(dir.path()), std::filesystem::directory_iterator()) == 1);
}
