#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fieldelim/acceptance.hpp"
#include "fieldelim/errors.hpp"

using namespace fieldelim;
using namespace fieldelim::acceptance_detail;

TEST_CASE("pair orders of a second-order sequence") {
  const auto q = pair_orders({4e-2, 1e-2, 2.5e-3});
  REQUIRE(q.size() == 2);
  CHECK(q[0] == doctest::Approx(2.0));
  CHECK(q[1] == doctest::Approx(2.0));
  CHECK(pair_orders({1.0}).empty());
}

TEST_CASE("error constants: stable, growing, non-finite") {
  std::vector<double> C;
  CHECK(constants_stable({4.0, 1.0, 0.25}, {4.0, 1.0, 0.25}, 1.25, &C));
  CHECK(C == std::vector<double>{1.0, 1.0, 1.0});
  // first order convergence against an h^2 scale doubles C each level
  CHECK_FALSE(constants_stable({4.0, 2.0, 1.0}, {4.0, 1.0, 0.25}, 1.25));
  CHECK(constants_stable({4.0, 1.2, 0.36}, {4.0, 1.0, 0.25}, 1.25));
  CHECK_FALSE(constants_stable({1.0, NAN}, {1.0, 1.0}, 1.25));
}

TEST_CASE("result lines") {
  CriterionResult r{"A9", "weak superposition", true, {{"slope", 2.0004}, {"eps", {0.2, 0.1}}}, 0.25};
  CHECK(format_result(r) == "PASS A9   weak superposition (0.2 s) eps=0.2/0.1 slope=2");
  r.passed = false;
  CHECK(format_result(r).rfind("FAIL A9 ", 0) == 0);
}

TEST_CASE("suite selection") {
  CHECK_THROWS_AS(run_suite("everything"), Error);
  SuiteOptions o;
  o.only = {"A9"};
  std::vector<std::string> seen;
  const auto res = run_suite("fock", o, [&](const CriterionResult& r) { seen.push_back(r.id); });
  CHECK(seen == std::vector<std::string>{"A9"});
  REQUIRE(res.size() == 1);
  CHECK(res[0].passed);
  CHECK(run_suite("spinor", {.only = {"A9"}}).empty());
}

TEST_CASE("fock criteria pass") {
  CHECK(criterion_a7({}).passed);
  CHECK(criterion_a8({}).passed);
}
