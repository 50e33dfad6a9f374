#include <cmath>
#include <vector>

#include <doctest.h>

#include "scorefuse/config.hpp"
#include "scorefuse/report.hpp"
#include "scorefuse/stats.hpp"

using namespace scorefuse;

TEST_SUITE_BEGIN("harness");

TEST_CASE("unknown configuration keys are rejected at every level") {
  CHECK_THROWS_AS(parse_config(R"({"scenario": "sample", "bogus": 1})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"scenario": "sample", "schedule": {"steps": 5}})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"scenario": "sample", "composition": {"mode": "magic"}})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config("not json"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"seed": 1})"), ConfigError);
}

TEST_CASE("parsed fields land where expected") {
  const ExperimentConfig cfg = parse_config(
      R"({"scenario": "sweep-s", "seed": 99,
          "schedule": {"n_steps": 12, "sigma_max": 10.0},
          "composition": {"mode": "convex", "s": 0.25}})");
  CHECK(cfg.scenario == "sweep-s");
  CHECK(cfg.seed == 99);
  CHECK(cfg.schedule.n_steps == 12);
  CHECK(cfg.schedule.sigma_max == 10.0);
  CHECK(cfg.composition.s == 0.25);
  CHECK(!cfg.config_hash.empty());
}

TEST_CASE("config hash is the standard 64-bit fnv-1a over the raw bytes") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  CHECK(fnv1a_hex("config") != fnv1a_hex("confih"));
  CHECK(fnv1a_hex("x") == fnv1a_hex("x"));
}

TEST_CASE("energy distance vanishes on identical samples") {
  std::vector<Eigen::VectorXd> a;
  Stream rng(701);
  for (int i = 0; i < 20; ++i) a.push_back(rng.normal_vector(2));
  CHECK(energy_distance(a, a) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("energy distance on opposite point masses follows the definition") {
  // Singletons at -1 and +1: 2 * 2 - 0 - 0 = 4.
  std::vector<Eigen::VectorXd> a{Eigen::VectorXd::Constant(1, -1.0)};
  std::vector<Eigen::VectorXd> b{Eigen::VectorXd::Constant(1, 1.0)};
  CHECK(energy_distance(a, b) == doctest::Approx(4.0));
}

TEST_CASE("permutation test does not reject equal distributions") {
  Stream rng(702);
  std::vector<Eigen::VectorXd> a, b;
  for (int i = 0; i < 300; ++i) a.push_back(rng.normal_vector(2));
  for (int i = 0; i < 300; ++i) b.push_back(rng.normal_vector(2));
  Stream perm(703);
  CHECK(energy_permutation_pvalue(a, b, 300, perm) > 0.01);
}

TEST_CASE("permutation test rejects clearly separated distributions") {
  Stream rng(704);
  std::vector<Eigen::VectorXd> a, b;
  for (int i = 0; i < 100; ++i) a.push_back(rng.normal_vector(2));
  for (int i = 0; i < 100; ++i) {
    b.push_back(rng.normal_vector(2) + Eigen::VectorXd::Constant(2, 5.0));
  }
  Stream perm(705);
  CHECK(energy_permutation_pvalue(a, b, 300, perm) < 0.01);
}

TEST_CASE("bimodality coefficient hits its reference values") {
  // Two balanced point masses: skewness 0, kurtosis 1, coefficient 1.
  std::vector<double> two_point;
  for (int i = 0; i < 1000; ++i) two_point.push_back(i % 2 ? 1.0 : -1.0);
  CHECK(bimodality_coefficient(two_point) == doctest::Approx(1.0).epsilon(1e-9));

  // Uniform: 5/9.
  std::vector<double> uniform;
  Stream u(706);
  for (int i = 0; i < 200000; ++i) uniform.push_back(u.next_double());
  CHECK(std::abs(bimodality_coefficient(uniform) - 5.0 / 9.0) < 0.01);

  // Gaussian: 1/3.
  std::vector<double> gauss;
  Stream g(707);
  for (int i = 0; i < 200000; ++i) gauss.push_back(g.next_normal());
  CHECK(std::abs(bimodality_coefficient(gauss) - 1.0 / 3.0) < 0.01);
}

TEST_CASE("bootstrap interval brackets the mean and collapses on constants") {
  std::vector<double> constant(50, 2.5);
  Stream rng(708);
  const BootstrapInterval ci = bootstrap_mean_ci(constant, 200, 0.05, rng);
  CHECK(ci.lo == 2.5);
  CHECK(ci.hi == 2.5);
  CHECK(ci.mean == 2.5);

  std::vector<double> values;
  Stream draw(709);
  for (int i = 0; i < 400; ++i) values.push_back(draw.next_normal() + 1.0);
  Stream boot(710);
  const BootstrapInterval ci2 = bootstrap_mean_ci(values, 1000, 0.05, boot);
  CHECK(ci2.lo < 1.0);
  CHECK(ci2.hi > 1.0);
  CHECK(ci2.lo < ci2.mean);
  CHECK(ci2.mean < ci2.hi);
}

TEST_CASE("sample statistics match hand values") {
  std::vector<double> xs{1.0, 2.0, 3.0, 4.0};
  CHECK(sample_mean(xs) == 2.5);

  std::vector<Eigen::VectorXd> vs;
  Eigen::VectorXd a(2), b(2);
  a << 1.0, 0.0;
  b << 3.0, 2.0;
  vs.push_back(a);
  vs.push_back(b);
  const Eigen::VectorXd m = sample_mean(vs);
  CHECK(m[0] == 2.0);
  CHECK(m[1] == 1.0);
  const Eigen::MatrixXd cov = sample_covariance(vs);
  CHECK(cov(0, 0) == doctest::Approx(2.0));
  CHECK(cov(0, 1) == doctest::Approx(2.0));
  CHECK(cov(1, 1) == doctest::Approx(2.0));
}

TEST_CASE("report serialization is stable and carries pass markers") {
  RunReport report;
  report.scenario = "sweep-s";
  report.seed = 7;
  report.config_hash = "deadbeef";
  report.add("info_metric", 0.125);
  report.add_check("bound_metric", 1.5, 2.0, true);
  report.add_check("failed_metric", 3.0, 2.0, false);

  const std::string csv = report_to_csv(report);
  CHECK(csv == report_to_csv(report));
  CHECK(csv.starts_with("scenario,metric,value,tolerance,pass\n"));
  CHECK(csv.find("sweep-s,info_metric,0.125,,\n") != std::string::npos);
  CHECK(csv.find("sweep-s,bound_metric,1.5,2,1\n") != std::string::npos);
  CHECK(csv.find("sweep-s,failed_metric,3,2,0\n") != std::string::npos);
  CHECK(!report.all_passed());

  const nlohmann::json j = report_to_json(report);
  CHECK(j.at("scenario") == "sweep-s");
  CHECK(j.at("metrics").size() == 3);
  CHECK(j.at("metrics")[1].at("pass") == true);
}

TEST_SUITE_END();
