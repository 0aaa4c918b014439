#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>

#include "doctest.h"

#include "gausscol/report.hpp"
#include "test_support.hpp"

using namespace gausscol;

TEST_CASE("format_double round-trips") {
  auto g = testing::rng(41);
  for (int k = 0; k < 2000; ++k) {
    const double v = testing::uniform(g) * std::pow(10.0, testing::uniform(g, -300.0, 300.0));
    CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
  }
  CHECK(format_double(NAN) == "nan");
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("csv write and read") {
  CsvTable t{{"a", "b"}, {{1.0, 0.1}, {NAN, -2.5e-300}}};
  std::stringstream ss;
  write_csv(ss, t);
  const std::string text = ss.str();
  CHECK(text.rfind("a,b\n1,0.10000000000000001\n", 0) == 0);
  std::stringstream in(text);
  const CsvTable back = read_csv(in);
  CHECK(back.header == t.header);
  REQUIRE(back.rows.size() == 2);
  CHECK(std::isnan(back.rows[1][0]));
  std::stringstream again;
  write_csv(again, back);
  CHECK(again.str() == text);

  std::stringstream ragged("a,b\n1\n");
  CHECK_THROWS_AS(read_csv(ragged), std::runtime_error);
  std::stringstream words("a\nfoo\n");
  CHECK_THROWS_AS(read_csv(words), std::runtime_error);
}

TEST_CASE("rule table") {
  const CsvTable t = rule_table(gauss_rule(3));
  CHECK(t.header == std::vector<std::string>{"i", "tau", "omega"});
  REQUIRE(t.rows.size() == 5);
  CHECK(t.rows.front()[1] == -1.0);
  CHECK(t.rows.front()[2] == 0.0);
  CHECK(t.rows.back()[1] == 1.0);
  CHECK(t.rows[2][2] == doctest::Approx(8.0 / 9.0));
}

TEST_CASE("solution table and json") {
  const BuiltinProblem p = builtin_example();
  const DiffMatrices dm = build_diff_matrices(6);
  const SolveResult r = newton_solve(p.spec, dm);
  const CsvTable t = solution_table(p.spec, dm.rule, r, p.oracle);
  CHECK(t.header == std::vector<std::string>{"i", "tau", "t", "x_1", "u_1", "lambda_1", "err_x", "err_u",
                                             "err_lambda"});
  REQUIRE(t.rows.size() == 8);
  CHECK(t.rows[0][2] == 0.0);
  CHECK(t.rows[7][2] == 2.0);
  CHECK(t.rows[0][3] == 1.0);
  CHECK(t.rows[7][5] == doctest::Approx(-1.0).epsilon(1e-9));

  const nlohmann::json j = solution_json(p.spec, dm.rule, r, p.oracle);
  CHECK(j.contains("status"));

  ConvergenceReport rep;
  rep.problem_name = "x";
  rep.rows.push_back(ConvergenceRow{5, NAN, NAN, NAN, 0, NAN, false, {}});
  finalize_report(rep);
  const nlohmann::json cj = convergence_json(rep);
  CHECK(cj.dump().find("NaN") == std::string::npos);
  CHECK(cj.dump().find("null") != std::string::npos);
}
