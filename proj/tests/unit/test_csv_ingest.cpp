#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "stcopula/csv.hpp"
#include "stcopula/errors.hpp"
#include "stcopula/ingest.hpp"
#include "test_support.hpp"

using namespace stcopula;
using ingest::CsvSchema;
using ingest::parse_csv;
using ingest::parse_date;
using ingest::RawRecord;

TEST_CASE("csv: split_line handles quoting, embedded commas, doubled quotes") {
  CHECK(csv::split_line("a,b,c") == std::vector<std::string>{"a", "b", "c"});
  CHECK(csv::split_line("a,\"b,c\",d") == std::vector<std::string>{"a", "b,c", "d"});
  CHECK(csv::split_line("\"he said \"\"hi\"\"\",x") ==
        std::vector<std::string>{"he said \"hi\"", "x"});
  CHECK(csv::split_line("a,,c") == std::vector<std::string>{"a", "", "c"});
  CHECK(csv::split_line("a,b\r") == std::vector<std::string>{"a", "b"});
  CHECK(csv::split_line("") == std::vector<std::string>{""});
}

TEST_CASE("csv: read_all skips blank lines") {
  std::istringstream in("a,b\n\n1,2\n\n");
  auto rows = csv::read_all(in);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == std::vector<std::string>{"a", "b"});
  CHECK(rows[1] == std::vector<std::string>{"1", "2"});
}

TEST_CASE("csv: fmt uses fixed six decimals") {
  CHECK(csv::fmt(1.0) == "1.000000");
  CHECK(csv::fmt(-0.125) == "-0.125000");
}

TEST_CASE("parse_date: ISO dates and date-times") {
  auto d = parse_date("2019-04-01");
  REQUIRE(d.has_value());
  using namespace std::chrono;
  CHECK(*d == sys_days{year{2019} / month{4} / day{1}});
  CHECK(parse_date("2019-04-01T12:30:00").has_value());
  CHECK(parse_date("2019-04-01 12:30:00").has_value());
  CHECK(parse_date("2019-04-01T12:30:00") == parse_date("2019-04-01"));
  CHECK_FALSE(parse_date("garbage").has_value());
  CHECK_FALSE(parse_date("2019-13-01").has_value());
  CHECK_FALSE(parse_date("2019-02-30").has_value());
  CHECK_FALSE(parse_date("").has_value());
}

TEST_CASE("parse_csv: direct field mapping") {
  std::istringstream in("station_id,timestamp,value\nS1,2019-04-01,55.0\n");
  auto recs = parse_csv(in, CsvSchema{});
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].station_id == "S1");
  REQUIRE(recs[0].value.has_value());
  CHECK(*recs[0].value == doctest::Approx(55.0));
  using namespace std::chrono;
  CHECK(recs[0].timestamp == sys_days{year{2019} / month{4} / day{1}});
}

TEST_CASE("parse_csv: unparseable value becomes absent, not an error") {
  std::istringstream in("station_id,timestamp,value\nS1,2019-04-01,NA\n");
  auto recs = parse_csv(in, CsvSchema{});
  REQUIRE(recs.size() == 1);
  CHECK_FALSE(recs[0].value.has_value());
}

TEST_CASE("parse_csv: nonpositive values demote to missing with a warning") {
  std::istringstream in("station_id,timestamp,value\nS1,2019-04-01,0\nS1,2019-04-02,-3\nS1,2019-04-03,4\n");
  std::vector<std::string> warnings;
  auto recs = parse_csv(in, CsvSchema{}, &warnings);
  REQUIRE(recs.size() == 3);
  CHECK_FALSE(recs[0].value.has_value());
  CHECK_FALSE(recs[1].value.has_value());
  CHECK(recs[2].value.has_value());
  CHECK(warnings.size() == 2);
}

TEST_CASE("parse_csv: schema with renamed columns") {
  std::istringstream in("site,date,pm25\nS1,2019-04-01,12.5\n");
  CsvSchema schema;
  schema.station_id = "site";
  schema.timestamp = "date";
  schema.value = "pm25";
  auto recs = parse_csv(in, schema);
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].station_id == "S1");
}

TEST_CASE("parse_csv: missing column and empty input errors") {
  std::istringstream missing("station_id,when,value\nS1,2019-04-01,1\n");
  CHECK_THROWS_AS(parse_csv(missing, CsvSchema{}), Error);
  try {
    std::istringstream again("station_id,when,value\nS1,2019-04-01,1\n");
    parse_csv(again, CsvSchema{});
  } catch (const Error& e) {
    CHECK(e.kind() == "MissingColumn");
  }

  std::istringstream header_only("station_id,timestamp,value\n");
  CHECK_THROWS_AS(parse_csv(header_only, CsvSchema{}), Error);
  try {
    std::istringstream again("station_id,timestamp,value\n");
    parse_csv(again, CsvSchema{});
  } catch (const Error& e) {
    CHECK(e.kind() == "EmptyInput");
  }
}

TEST_CASE("parse_stations_csv: id/lat/lon columns") {
  std::istringstream in("id,lat,lon\nA,28.70,77.10\nB,28.75,77.20\n");
  auto st = ingest::parse_stations_csv(in);
  REQUIRE(st.size() == 2);
  CHECK(st[0].id == "A");
  CHECK(st[1].lat == doctest::Approx(28.75));
  CHECK(st[1].lon == doctest::Approx(77.20));
}

TEST_CASE("infer_axis: smallest monthly cover of the records") {
  std::vector<RawRecord> recs;
  RawRecord r;
  r.station_id = "A";
  r.timestamp = *parse_date("2018-03-15");
  r.value = 1.0;
  recs.push_back(r);
  r.timestamp = *parse_date("2018-07-02");
  recs.push_back(r);
  auto axis = ingest::infer_axis(recs, Granularity::OneMonth);
  CHECK(axis.count == 5);  // Mar..Jul
  CHECK(axis.bucket_label(0) == "2018-03-01");
  auto axis2 = ingest::infer_axis(recs, Granularity::TwoMonths);
  CHECK(axis2.count == 3);  // Mar-Apr, May-Jun, Jul-Aug
  CHECK(axis2.months_per_bucket() == 2);
}

TEST_CASE("resample: bucket mean of present values") {
  std::vector<Station> st = {testsup::station("A", 28.7, 77.1)};
  auto axis = testsup::monthly_axis(2, 2019, 4);
  std::vector<RawRecord> recs;
  for (double v : {10.0, 20.0, 30.0}) {
    RawRecord r;
    r.station_id = "A";
    r.timestamp = *parse_date("2019-04-10");
    r.value = v;
    recs.push_back(r);
  }
  auto m = ingest::resample(recs, st, axis);
  CHECK(m.observed(0, 0));
  CHECK(m.value(0, 0) == doctest::Approx(20.0));
  CHECK(validate(m).empty());
}

TEST_CASE("resample: bucket with no present values stays missing") {
  std::vector<Station> st = {testsup::station("A", 28.7, 77.1)};
  auto axis = testsup::monthly_axis(2, 2019, 4);
  RawRecord r;
  r.station_id = "A";
  r.timestamp = *parse_date("2019-04-10");
  r.value = std::nullopt;  // unparseable cell
  auto m = ingest::resample({r}, st, axis);
  CHECK_FALSE(m.observed(0, 0));
  CHECK_FALSE(m.observed(0, 1));
}

TEST_CASE("resample: two-month buckets pool their raw records") {
  // Jan-Apr monthly means 10, 20, 30, 40, one record per month, at 2-month
  // granularity. Oracle: hand-pooled means (10+20)/2 and (30+40)/2.
  std::vector<Station> st = {testsup::station("A", 28.7, 77.1)};
  TimeAxis axis = make_monthly_axis(2019, 1, Granularity::TwoMonths, 2);
  std::vector<RawRecord> recs;
  const char* days[] = {"2019-01-15", "2019-02-15", "2019-03-15", "2019-04-15"};
  double vals[] = {10.0, 20.0, 30.0, 40.0};
  for (int i = 0; i < 4; ++i) {
    RawRecord r;
    r.station_id = "A";
    r.timestamp = *parse_date(days[i]);
    r.value = vals[i];
    recs.push_back(r);
  }
  auto m = ingest::resample(recs, st, axis);
  CHECK(m.value(0, 0) == doctest::Approx(15.0));
  CHECK(m.value(0, 1) == doctest::Approx(35.0));
}

TEST_CASE("resample: records outside the axis are ignored; unknown stations throw") {
  std::vector<Station> st = {testsup::station("A", 28.7, 77.1)};
  auto axis = testsup::monthly_axis(1, 2019, 4);
  RawRecord inside;
  inside.station_id = "A";
  inside.timestamp = *parse_date("2019-04-10");
  inside.value = 5.0;
  RawRecord outside = inside;
  outside.timestamp = *parse_date("2020-01-01");
  outside.value = 99.0;
  auto m = ingest::resample({inside, outside}, st, axis);
  CHECK(m.value(0, 0) == doctest::Approx(5.0));

  RawRecord stranger = inside;
  stranger.station_id = "Z";
  CHECK_THROWS_AS(ingest::resample({stranger}, st, axis), Error);
  try {
    ingest::resample({stranger}, st, axis);
  } catch (const Error& e) {
    CHECK(e.kind() == "UnknownStation");
  }
}

TEST_CASE("resample: order-invariant over record permutations") {
  std::vector<Station> st = {testsup::station("A", 28.7, 77.1),
                             testsup::station("B", 28.8, 77.2)};
  auto axis = testsup::monthly_axis(3, 2019, 1);
  std::vector<RawRecord> recs;
  std::mt19937 gen(5);
  const char* days[] = {"2019-01-05", "2019-01-25", "2019-02-10", "2019-03-03"};
  for (const auto* id : {"A", "B"}) {
    for (const char* d : days) {
      RawRecord r;
      r.station_id = id;
      r.timestamp = *parse_date(d);
      r.value = std::uniform_real_distribution<>(1.0, 100.0)(gen);
      recs.push_back(r);
    }
  }
  auto base = ingest::resample(recs, st, axis);
  std::shuffle(recs.begin(), recs.end(), gen);
  auto shuffled = ingest::resample(recs, st, axis);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 3; ++j) {
      REQUIRE(base.observed(i, j) == shuffled.observed(i, j));
      if (base.observed(i, j)) CHECK(base.value(i, j) == doctest::Approx(shuffled.value(i, j)));
    }
  }
}

TEST_CASE("matrix csv: write/read round-trip preserves values and gaps") {
  std::vector<Station> st = {testsup::station("A", 28.7, 77.1),
                             testsup::station("B", 28.8, 77.2)};
  auto m = testsup::make_matrix(st, 3, {10.5, testsup::kNaN, 30.25,
                                        testsup::kNaN, 21.125, 60.0});
  std::ostringstream out;
  ingest::write_matrix_csv(out, m);
  std::istringstream in(out.str());
  auto back = ingest::read_matrix_csv(in, st, m.time_axis());
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 3; ++j) {
      REQUIRE(back.observed(i, j) == m.observed(i, j));
      if (m.observed(i, j)) CHECK(back.value(i, j) == doctest::Approx(m.value(i, j)));
    }
  }
}
