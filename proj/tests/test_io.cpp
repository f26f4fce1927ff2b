#include <doctest.h>

#include <sstream>

#include "recruit/io.hpp"
#include "recruit/rng.hpp"

using namespace recruit;

namespace {

TrialData parse(const std::string& text, CsvFormat fmt, double census = 200) {
  std::istringstream in(text);
  return parse_centre_csv(in, fmt, census);
}

template <class F>
void expect_row_error(F&& f, const std::string& kind, std::size_t line) {
  try {
    f();
    FAIL("expected " << kind);
  } catch (const RowError& e) {
    CHECK(e.kind() == kind);
    CHECK(e.line() == line);
    CHECK(std::string(e.what()).find("line " + std::to_string(line)) != std::string::npos);
  }
}

}  // namespace

TEST_CASE("summary format") {
  const auto d = parse("centre_id,open_time,count\nA,0,12\nB,50.5,3\nC,120,0\n", CsvFormat::Summary);
  CHECK(d.size() == 3);
  CHECK(d.total_count() == 15);
  CHECK(d.centres()[1].exposure == 149.5);
  CHECK(d.centres()[2].centre_id == "C");
  // CRLF line endings and a missing final newline are accepted.
  CHECK(parse("centre_id,open_time,count\r\nA,0,2\r\nB,10,1", CsvFormat::Summary).total_count() == 3);
}

TEST_CASE("events format") {
  const auto d = parse("centre_id,open_time,event_time\nX,10,12.5\nX,10,40\nX,10,41\nX,10,199\n",
                       CsvFormat::Events);
  CHECK(d.size() == 1);
  CHECK(d.total_count() == 4);
  CHECK(d.centres()[0].exposure == 190);

  const auto e = parse("centre_id,open_time,event_time\nX,10,12.5\nY,100,\nX,10,250\n",
                       CsvFormat::Events);
  CHECK(e.size() == 2);
  CHECK(e.centres()[0].count == 1);
  CHECK(e.centres()[1].count == 0);
}

TEST_CASE("row errors carry the line") {
  expect_row_error([] { parse("centre_id,open_time,event_time\nX,10,12\nX,10,5\n", CsvFormat::Events); },
                   "EventBeforeOpening", 3);
  expect_row_error([] { parse("centre_id,open_time,count\nA,0,1\nB,250,0\n", CsvFormat::Summary); },
                   "OpeningAfterCensus", 3);
  expect_row_error([] { parse("centre_id,open_time,count\nA,zero,1\n", CsvFormat::Summary); },
                   "MalformedRow", 2);
  expect_row_error([] { parse("centre_id,open_time,count\nA,0,1.5\n", CsvFormat::Summary); },
                   "MalformedRow", 2);
  expect_row_error([] { parse("centre_id,open_time,count\nA,0,1\nA,3,1\n", CsvFormat::Summary); },
                   "MalformedRow", 3);
  expect_row_error([] { parse("centre_id,open_time\nA,0\n", CsvFormat::Summary); }, "MalformedRow", 1);
  expect_row_error([] { parse("centre_id,open_time,count\nA,0,1\n", CsvFormat::Events); },
                   "MalformedRow", 1);
  expect_row_error([] { parse("centre_id,open_time,count\nA,0\n", CsvFormat::Summary); }, "MalformedRow", 2);
}

TEST_CASE("empty input") {
  CHECK_THROWS_AS(parse("", CsvFormat::Summary), InsufficientData);
  CHECK_THROWS_AS(parse("centre_id,open_time,count\n", CsvFormat::Summary), InsufficientData);
  CHECK_THROWS_AS(parse_format("xml"), ConfigError);
  CHECK(parse_format("events") == CsvFormat::Events);
}

TEST_CASE("summary round trip is bit exact") {
  const double census = 200;
  std::vector<CentreRecord> cs;
  Stream rng(4);
  for (int i = 0; i < 60; ++i) {
    const double open = rng.uniform() * census;
    cs.push_back({"s" + std::to_string(i), census - open, static_cast<std::int64_t>(rng.uniform() * 30)});
  }
  const TrialData d(census, cs);
  std::ostringstream out;
  write_summary_csv(out, d);
  const auto back = parse(out.str(), CsvFormat::Summary, census);
  REQUIRE(back.size() == d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(back.centres()[i].exposure == d.centres()[i].exposure);
    CHECK(back.centres()[i].count == d.centres()[i].count);
    CHECK(back.centres()[i].centre_id == d.centres()[i].centre_id);
  }
}

TEST_CASE("number formatting is shortest round trip") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(200.0) == "200");
  CHECK(format_number(1.0 / 3.0) == "0.3333333333333333");
  CHECK(format_number(84.91234, 3) == "84.9");
}
