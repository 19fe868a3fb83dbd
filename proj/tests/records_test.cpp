#include "tpi/records.hpp"

#include <gtest/gtest.h>

#include <random>

namespace tpi {
namespace {

TEST(RecordsTest, SplitsKeywordFieldsAndAttributes) {
  auto rs = parse_records("device CB breaker s n1 group=FE normal=closed\n");
  ASSERT_EQ(rs.size(), 1u);
  EXPECT_EQ(rs[0].keyword, "device");
  EXPECT_EQ(rs[0].fields, (std::vector<std::string>{"CB", "breaker", "s", "n1"}));
  EXPECT_EQ(rs[0].attr("group"), "FE");
  EXPECT_EQ(rs[0].attr_or("rackable", "0"), "0");
  EXPECT_FALSE(rs[0].attr("missing"));
  EXPECT_EQ(rs[0].line, 1);
}

TEST(RecordsTest, CommentsAndBlankLinesAreSkippedButCounted) {
  auto rs = parse_records("# header\n\n  node a Z 0   # trailing\n\t\nnode b Z 10\r\n");
  ASSERT_EQ(rs.size(), 2u);
  EXPECT_EQ(rs[0].line, 3);
  EXPECT_EQ(rs[0].fields.size(), 3u);
  EXPECT_EQ(rs[1].line, 5);
  EXPECT_EQ(rs[1].field(2), "10");
}

TEST(RecordsTest, QuotedTokensKeepSpacesHashesAndEquals) {
  auto rs = parse_records(R"(tag MOD PD1 "work # zone=3" 17)");
  ASSERT_EQ(rs.size(), 1u);
  EXPECT_EQ(rs[0].fields, (std::vector<std::string>{"MOD", "PD1", "work # zone=3", "17"}));
  EXPECT_TRUE(rs[0].attrs.empty());
  auto esc = parse_records(R"(x "say \"hi\" \\ ok")");
  EXPECT_EQ(esc[0].field(0), R"(say "hi" \ ok)");
}

TEST(RecordsTest, AttributeValuesMayBeQuoted) {
  auto rs = parse_records(R"(op 1 open CB remote_scada who="Pat \"Q\" Lee" when=5)");
  ASSERT_EQ(rs.size(), 1u);
  EXPECT_EQ(rs[0].fields.size(), 4u);
  EXPECT_EQ(rs[0].attr("who"), R"(Pat "Q" Lee)");
  EXPECT_EQ(rs[0].attr("when"), "5");
}

TEST(RecordsTest, UnterminatedQuoteReportsLine) {
  try {
    parse_records("a b\nc \"open\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2);
  }
}

TEST(RecordsTest, MissingFieldNamesRecordAndPosition) {
  auto rs = parse_records("node a\n");
  try {
    (void)rs[0].field(2);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("field 3"), std::string::npos);
  }
}

TEST(RecordsTest, NumericParsersRejectTrailingJunk) {
  Record r;
  r.line = 7;
  EXPECT_EQ(parse_int(r, "-42"), -42);
  EXPECT_THROW(parse_int(r, "42ft"), ParseError);
  EXPECT_THROW(parse_int(r, ""), ParseError);
  EXPECT_DOUBLE_EQ(parse_double(r, "1.5"), 1.5);
  EXPECT_THROW(parse_double(r, "1.5x"), ParseError);
  EXPECT_TRUE(parse_flag(r, "yes"));
  EXPECT_FALSE(parse_flag(r, "0"));
  EXPECT_THROW(parse_flag(r, "maybe"), ParseError);
}

TEST(RecordsTest, SplitAndJoinAreInverse) {
  EXPECT_TRUE(split("", ',').empty());
  EXPECT_EQ(split("a,,b", ','), (std::vector<std::string>{"a", "", "b"}));
  EXPECT_EQ(join(split("x;y;z", ';'), ";"), "x;y;z");
}

TEST(RecordsTest, QuotedTokensRoundTripThroughTokenizer) {
  std::mt19937_64 rng(17);
  const std::string alphabet = "ab Z9_-=#\"\\\t.";
  std::uniform_int_distribution<int> len(0, 12);
  std::uniform_int_distribution<std::size_t> ch(0, alphabet.size() - 1);
  for (int i = 0; i < 2000; ++i) {
    std::string token;
    const int n = len(rng);
    for (int k = 0; k < n; ++k) token.push_back(alphabet[ch(rng)]);
    auto rs = parse_records("kw " + quote_if_needed(token) + " tail\n");
    ASSERT_EQ(rs.size(), 1u) << token;
    ASSERT_EQ(rs[0].fields.size(), 2u) << token;
    EXPECT_EQ(rs[0].fields[0], token);
  }
}

}  // namespace
}  // namespace tpi
