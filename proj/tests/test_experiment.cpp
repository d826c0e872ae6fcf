#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "berrywave/errors.hpp"
#include "berrywave/experiment.hpp"
#include "berrywave/kac_rice.hpp"

using namespace berrywave;
namespace fs = std::filesystem;

namespace {

const char* small_config = R"({
  "schema_version": 1,
  "experiment_id": "small",
  "energies": [1, 4],
  "domain": {"kind": "rect", "width": 1, "height": 1},
  "J": 64,
  "points_per_wavelength": 16,
  "replications": 2,
  "seed": 7,
  "statistics": ["length", "count"],
  "record_wall_time": false
})";

std::string records_text(const std::vector<run_record>& r) {
  std::ostringstream os;
  write_records_csv(os, r);
  return os.str();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("berrywave_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_SUITE("experiment") {
  TEST_CASE("config parsing") {
    auto c = parse_config(small_config);
    CHECK(c.schema_version == 1);
    CHECK(c.experiment_id == "small");
    CHECK(c.energies == std::vector<double>{1, 4});
    CHECK(c.J == 64);
    CHECK(c.replications == 2);
    CHECK(c.seed == 7);
    CHECK(c.wants("count"));
    CHECK_FALSE(c.wants("chaos4"));
    CHECK_FALSE(c.record_wall_time);

    // Round trip through the serializer.
    auto again = parse_config(config_to_json(c));
    CHECK(config_to_json(again) == config_to_json(c));

    auto big = parse_config(R"({"schema_version": 1, "energies": [10], "seed": "18446744073709551615"})");
    CHECK(big.seed == 18446744073709551615ull);
  }

  TEST_CASE("config strictness") {
    CHECK_THROWS_AS(parse_config(R"({"energies": [1]})"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config(R"({"schema_version": 1, "energies": [1], "bogus": 3})"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config(R"({"schema_version": 1, "energies": [1], "sampler": "other"})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse_config(R"({"schema_version": 1, "energies": [1], "domain": {"kind": "tri"}})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse_config("{not json"), std::invalid_argument);
    try {
      parse_config(R"({"schema_version": 1, "energies": [1], "bands": {"zz": 1}})");
      FAIL("expected an error");
    } catch (const std::invalid_argument& e) {
      CHECK(std::string(e.what()).find("zz") != std::string::npos);
    }
  }

  TEST_CASE("records csv: header, order and round trip") {
    std::ostringstream empty;
    write_records_csv(empty, {});
    CHECK(empty.str() == "experiment_id,E,statistic,replication,seed_stream,value,grid_h,J,wall_ms\n");

    std::vector<run_record> rows{
        {"x", 1.0, "length", 0, 11, 2.5, 0.01, 64, 0.0},
        {"x", 1.0, "length", 1, 12, 2.25, 0.01, 64, 0.0},
        {"x", 4.0, "count", 0, 13, 17.0, 0.005, 64, 1.5},
    };
    auto text = records_text(rows);
    std::istringstream in(text);
    auto back = read_records_csv(in);
    CHECK(back == rows);
    std::istringstream lines(text);
    std::string line;
    std::getline(lines, line);
    int n = 0;
    while (std::getline(lines, line)) {
      ++n;
    }
    CHECK(n == 3);
    std::istringstream bad("E,value\n");
    CHECK_THROWS_AS(read_records_csv(bad), std::invalid_argument);
  }

  TEST_CASE("small campaign: records and summaries") {
    auto cfg = parse_config(small_config);
    auto r = run_campaign(cfg);
    CHECK(r.records.size() == 2 * 2 * 2);
    CHECK(r.failures.empty());
    CHECK(r.replications_computed == 4);
    for (std::size_t i = 1; i < r.records.size(); ++i) {
      const auto& a = r.records[i - 1];
      const auto& b = r.records[i];
      CHECK(std::tie(a.E, a.statistic, a.replication) < std::tie(b.E, b.statistic, b.replication));
    }
    for (const auto& x : r.records) {
      CHECK(x.experiment_id == "small");
      CHECK(x.J == 64);
      CHECK(x.wall_ms == 0.0);
      CHECK(x.grid_h <= 1.0 / (std::sqrt(x.E) * 16) * (1 + 1e-12));
      CHECK(x.value >= 0);
    }
    CHECK(r.summaries.size() == 4);
    auto j = summary_json(r);
    CHECK(j.find("\"schema_version\"") != std::string::npos);
    CHECK(j.find("\"small\"") != std::string::npos);
    for (const auto& s : r.summaries) {
      REQUIRE(s.predicted_mean.has_value());
      auto kind = s.statistic == "length" ? statistic_kind::length : statistic_kind::count;
      CHECK(*s.predicted_mean == doctest::Approx(kac_rice_mean(energy_level(s.E), cfg.dom, kind)));
    }
  }

  TEST_CASE("determinism and replication purity") {
    auto cfg = parse_config(small_config);
    auto a = records_text(run_campaign(cfg).records);
    auto b = records_text(run_campaign(cfg).records);
    CHECK(a == b);
    auto r = run_replication(cfg, 4.0, 1);
    auto s = run_replication(cfg, 4.0, 1);
    CHECK(records_text(r) == records_text(s));
    auto other = cfg;
    other.seed = 8;
    CHECK(records_text(run_campaign(other).records) != a);
  }

  TEST_CASE("worker count does not change the records") {
    auto cfg = parse_config(small_config);
    run_options one;
    one.workers = 1;
    run_options four;
    four.workers = 4;
    CHECK(records_text(run_campaign(cfg, one).records) == records_text(run_campaign(cfg, four).records));
  }

  TEST_CASE("output files and resume") {
    auto cfg = parse_config(small_config);
    auto dir = scratch_dir("resume");
    run_options opts;
    opts.out_dir = dir;
    auto first = run_campaign(cfg, opts);
    CHECK(first.replications_computed == 4);
    for (const auto* name : {"records.csv", "summary.json", "plot.csv"}) {
      CHECK(fs::exists(dir / name));
    }
    auto bytes = slurp(dir / "records.csv");
    CHECK(bytes == records_text(first.records));

    auto second = run_campaign(cfg, opts);
    CHECK(second.replications_computed == 0);
    CHECK(slurp(dir / "records.csv") == bytes);

    // Extending the replication count only computes the new ones.
    auto more = cfg;
    more.replications = 3;
    auto third = run_campaign(more, opts);
    CHECK(third.replications_computed == 2);
    auto fresh = run_campaign(more);
    CHECK(records_text(third.records) == records_text(fresh.records));

    // Without resume everything is recomputed.
    opts.resume = false;
    CHECK(run_campaign(more, opts).replications_computed == 6);
    fs::remove_all(dir);
  }

  TEST_CASE("BERRYWAVE_WORKERS") {
    CHECK(resolve_workers(3) == 3);
    ::setenv("BERRYWAVE_WORKERS", "2", 1);
    CHECK(resolve_workers(0) == 2);
    CHECK(resolve_workers(5) == 5);
    ::setenv("BERRYWAVE_WORKERS", "zero", 1);
    CHECK_THROWS_AS(resolve_workers(0), std::invalid_argument);
    ::unsetenv("BERRYWAVE_WORKERS");
    CHECK(resolve_workers(0) >= 1);
  }

  TEST_CASE("covariance test against the analytic kernel") {
    auto cfg = parse_config(R"({
      "schema_version": 1, "energies": [9], "J": 128, "replications": 400, "seed": 3,
      "covtest_lags": [[0, 0], [0.05, 0], [0.1, 0.1], [0.3, -0.2]]
    })");
    auto rows = covariance_test(cfg);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].analytic == doctest::Approx(1.0));
    for (const auto& r : rows) {
      CHECK(r.standard_error > 0);
      CHECK(std::fabs(r.z) <= cfg.bands.mean_z);
      CHECK(r.z == doctest::Approx((r.empirical - r.analytic) / r.standard_error));
    }
  }

  TEST_CASE("scaling check") {
    auto cfg = parse_config(R"({
      "schema_version": 1, "energies": [16], "J": 128, "replications": 60, "seed": 5,
      "statistics": ["length"], "record_wall_time": false
    })");
    auto paired = scaling_check(cfg, true);
    CHECK(paired.n == 60);
    CHECK(paired.max_paired_difference <= 1e-9 * paired.direct.mean);
    CHECK(paired.pass);
    auto indep = scaling_check(cfg, false);
    CHECK(std::isnan(indep.max_paired_difference));
    CHECK(std::fabs(indep.z_mean) <= 3);
    CHECK(indep.pass == (std::fabs(indep.z_mean) <= 3 && std::fabs(indep.z_variance) <= 3));
  }
}
