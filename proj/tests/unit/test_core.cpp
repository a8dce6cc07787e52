#include "tcs/csv.hpp"
#include "tcs/error.hpp"
#include "tcs/sample.hpp"
#include "tcs/seeds.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <set>

using namespace tcs;

TEST_CASE("csv split handles quotes and empty fields") {
  const auto f = csv::split(R"(a,"b,c",,"say ""hi""")");
  REQUIRE(f.size() == 4);
  CHECK(f[0] == "a");
  CHECK(f[1] == "b,c");
  CHECK(f[2].empty());
  CHECK(f[3] == "say \"hi\"");
}

TEST_CASE("format_double round-trips exactly") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.123456789, 0.0}) {
    double back = 0.0;
    REQUIRE(csv::parse_double(csv::format_double(v), back));
    CHECK(back == v);
  }
  CHECK(csv::format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
}

TEST_CASE("strict numeric parsing") {
  double d = 0.0;
  long long i = 0;
  CHECK_FALSE(csv::parse_double("", d));
  CHECK_FALSE(csv::parse_double("1.5x", d));
  CHECK(csv::parse_double("-1.5e3", d));
  CHECK(d == -1500.0);
  CHECK_FALSE(csv::parse_int("2.0", i));
  CHECK(csv::parse_int("42", i));
  CHECK(i == 42);
}

TEST_CASE("derive_seed is deterministic and separates streams") {
  CHECK(derive_seed(7, 1, 2) == derive_seed(7, 1, 2));
  std::set<std::uint64_t> seen;
  for (std::uint64_t a = 0; a < 50; ++a)
    for (std::uint64_t b = 0; b < 4; ++b)
      seen.insert(derive_seed(7, a, b));
  CHECK(seen.size() == 200);
}

TEST_CASE("error categories map to distinct exit codes") {
  std::set<int> codes;
  const Error errs[] = {ConfigError("x"),       StructuralError("x"),
                        NumericalError("x"),    UsageError("x"),
                        DataError("x"),         SelectionError("x"),
                        TrainingError("x"),     IngestionError("x"),
                        IoError("x"),           AdjustmentError("x"),
                        DegenerateTreatmentError("x"), UndefinedMetricError("x")};
  for (const Error &e : errs) {
    CHECK(e.exit_code() > 1);
    codes.insert(e.exit_code());
  }
  CHECK(codes.size() == std::size(errs));
}

TEST_CASE("sample time fields") {
  LongitudinalSample s = make_sample("a", 2, 4, 3);
  s.event_time = 3;
  s.censor_time = 4;
  CHECK(s.tau() == 3);
  CHECK(s.event());
  CHECK(s.grid_step(1) == 3);
  s.treatment[2] = 1;
  CHECK(s.followup_treatment(1) == 1);
  s.validate();

  s.event_time = 5; // never
  CHECK(s.tau() == 4);
  CHECK_FALSE(s.event());

  s.censor_time = 5;
  CHECK_THROWS_AS(s.validate(), DataError);
  s.censor_time = 4;
  s.event_time = 0;
  CHECK_THROWS_AS(s.validate(), DataError);
}
