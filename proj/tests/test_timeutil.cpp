#include <doctest.h>

#include "bugloc/timeutil.hpp"

using namespace bugloc;

TEST_SUITE("timeutil") {

TEST_CASE("parse known instants") {
    CHECK(parse_rfc3339("1970-01-01T00:00:00Z") == Timestamp{0});
    CHECK(parse_rfc3339("2020-01-01T00:00:00Z") == Timestamp{1577836800});
    CHECK(parse_rfc3339("2020-02-29T23:59:59Z") == Timestamp{1583020799});  // leap day
    CHECK(parse_rfc3339("1999-12-31T23:59:59Z") == Timestamp{946684799});
    CHECK(parse_rfc3339("2038-01-19T03:14:07Z") == Timestamp{2147483647});
}

TEST_CASE("numeric offsets and fractional seconds") {
    CHECK(parse_rfc3339("2020-01-01T01:00:00+01:00") == Timestamp{1577836800});
    CHECK(parse_rfc3339("2019-12-31T19:00:00-05:00") == Timestamp{1577836800});
    CHECK(parse_rfc3339("2020-01-01T00:00:00.123Z") == Timestamp{1577836800});
    CHECK(parse_rfc3339("2020-01-01t00:00:00z") == Timestamp{1577836800});
}

TEST_CASE("malformed input is rejected") {
    CHECK(!parse_rfc3339(""));
    CHECK(!parse_rfc3339("2020-01-01"));
    CHECK(!parse_rfc3339("2020-01-01T00:00:00"));       // missing zone
    CHECK(!parse_rfc3339("2020-13-01T00:00:00Z"));      // month
    CHECK(!parse_rfc3339("2020-01-01T25:00:00Z"));      // hour
    CHECK(!parse_rfc3339("2020-01-01T00:00:00.Z"));     // empty fraction
    CHECK(!parse_rfc3339("2020-01-01T00:00:00Zjunk"));  // trailing garbage
    CHECK(!parse_rfc3339("not a date at all"));
}

TEST_CASE("format and reparse round-trips") {
    for (Timestamp t : {Timestamp{0}, Timestamp{1577836800}, Timestamp{946684799},
                        Timestamp{2147483647}, Timestamp{86400}}) {
        CHECK(parse_rfc3339(format_rfc3339(t)) == t);
    }
    CHECK(format_rfc3339(1577836800) == "2020-01-01T00:00:00Z");
}

TEST_CASE("days_between is real-valued") {
    Timestamp a = 1577836800;
    CHECK(days_between(a, a + 86400) == doctest::Approx(1.0));
    CHECK(days_between(a, a + 43200) == doctest::Approx(0.5));
    CHECK(days_between(a + 86400, a) == doctest::Approx(-1.0));
}

}  // TEST_SUITE
