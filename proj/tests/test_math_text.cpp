#include <cmath>
#include <vector>

#include <doctest.h>

#include "epirenew/math_utils.hpp"
#include "epirenew/text_io.hpp"

using namespace epirenew;

TEST_SUITE_BEGIN("math_utils");

TEST_CASE("log_sum_exp handles offsets and empty input") {
  std::vector<double> x = {std::log(1.0), std::log(2.0), std::log(3.0)};
  CHECK(log_sum_exp(x) == doctest::Approx(std::log(6.0)).epsilon(1e-14));

  std::vector<double> shifted = {1000.0, 1000.0};
  CHECK(log_sum_exp(shifted) == doctest::Approx(1000.0 + std::log(2.0)).epsilon(1e-14));

  CHECK(log_sum_exp(std::vector<double>{}) == kNegInf);
  CHECK(log_sum_exp(std::vector<double>{kNegInf, kNegInf}) == kNegInf);
}

TEST_CASE("log_sum_exp_pair matches the span version") {
  CHECK(log_sum_exp_pair(-1.0, -2.5) ==
        doctest::Approx(log_sum_exp(std::vector<double>{-1.0, -2.5})).epsilon(1e-15));
  CHECK(log_sum_exp_pair(-2.5, -1.0) == log_sum_exp_pair(-1.0, -2.5));
  CHECK(log_sum_exp_pair(kNegInf, 3.0) == 3.0);
  CHECK(log_sum_exp_pair(3.0, kNegInf) == 3.0);
  CHECK(log_sum_exp_pair(kNegInf, kNegInf) == kNegInf);
}

TEST_CASE("one_minus_exp_neg is accurate for tiny arguments") {
  CHECK(one_minus_exp_neg(0.0) == 0.0);
  CHECK(one_minus_exp_neg(1e-12) == doctest::Approx(1e-12).epsilon(1e-9));
  CHECK(one_minus_exp_neg(50.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(one_minus_exp_neg(1.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-15));
}

TEST_CASE("logistic is stable and symmetric") {
  CHECK(logistic(0.0) == 0.5);
  CHECK(logistic(40.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(logistic(-40.0) > 0.0);
  CHECK(logistic(-3.7) == doctest::Approx(1.0 - logistic(3.7)).epsilon(1e-14));
}

TEST_CASE("moment helpers match hand values") {
  std::vector<double> x = {1.0, 2.0, 3.0, 4.0};
  CHECK(mean_of(x) == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(variance_of(x) == doctest::Approx(5.0 / 3.0).epsilon(1e-15));
  CHECK(sd_of(x) == doctest::Approx(std::sqrt(5.0 / 3.0)).epsilon(1e-15));
  CHECK_THROWS(mean_of(std::vector<double>{}));
  CHECK_THROWS(variance_of(std::vector<double>{1.0}));
}

TEST_CASE("quantile_of uses linear interpolation") {
  std::vector<double> big(100);
  for (int i = 0; i < 100; ++i) big[static_cast<std::size_t>(i)] = i + 1.0;
  CHECK(quantile_of(big, 0.5) == doctest::Approx(50.5).epsilon(1e-14));
  CHECK(quantile_of(big, 0.25) == doctest::Approx(25.75).epsilon(1e-14));
  CHECK(quantile_of(big, 0.0) == 1.0);
  CHECK(quantile_of(big, 1.0) == 100.0);

  std::vector<double> ten = {7, 3, 9, 1, 5, 2, 10, 4, 6, 8};
  CHECK(quantile_of(ten, 0.33) == doctest::Approx(3.97).epsilon(1e-14));
  CHECK(median_of(ten) == doctest::Approx(5.5).epsilon(1e-14));
  CHECK(median_of({3.0, 1.0, 2.0}) == 2.0);
}

TEST_CASE("correlation_of matches sign and magnitude") {
  std::vector<double> x = {1, 2, 3, 4, 5};
  std::vector<double> y = {2, 4, 6, 8, 10};
  std::vector<double> z = {5, 4, 3, 2, 1};
  CHECK(correlation_of(x, y) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(correlation_of(x, z) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("Welford agrees with direct moments") {
  std::vector<double> x = {0.3, -1.2, 4.5, 2.2, -0.7, 1.1};
  Welford w;
  for (double v : x) w.add(v);
  CHECK(w.count() == 6);
  CHECK(w.mean() == doctest::Approx(mean_of(x)).epsilon(1e-13));
  CHECK(w.variance() == doctest::Approx(variance_of(x)).epsilon(1e-13));
}

TEST_SUITE_END();

TEST_SUITE_BEGIN("text_io");

TEST_CASE("format_double round-trips exactly") {
  for (double v : {0.0, 1.0, 0.1, 1.0 / 3.0, 1e-300, 1e300, -2.5e-7, 3.141592653589793,
                   85.64632376763643}) {
    CHECK(parse_double(format_double(v)) == v);
  }
}

TEST_CASE("parsers reject malformed tokens") {
  CHECK(parse_double("2.5") == 2.5);
  CHECK(parse_long("-17") == -17);
  CHECK_THROWS(parse_double("1.5x"));
  CHECK_THROWS(parse_double(""));
  CHECK_THROWS(parse_long("3.5"));
  CHECK_THROWS(parse_long("12a"));
}

TEST_CASE("csv split and join round-trip") {
  auto fields = split_csv_line("a,b,,c");
  REQUIRE(fields.size() == 4);
  CHECK(fields[0] == "a");
  CHECK(fields[2] == "");
  CHECK(join_csv(fields) == "a,b,,c");
  CHECK(split_csv_line("").size() == 1);
}

TEST_CASE("trim strips whitespace and CR") {
  CHECK(trim("\t x \r") == "x");
  CHECK(trim("abc") == "abc");
  CHECK(trim("  ") == "");
}

TEST_SUITE_END();
