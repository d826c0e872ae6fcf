#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "berrywave/geometry.hpp"
#include "berrywave/stats.hpp"
#include "berrywave/variance_engine.hpp"

namespace berrywave {

inline constexpr int config_schema_version = 1;

enum class sampler_kind { gaussian, iid };

struct band_config {
  double mean_z = 3.0;
  double variance_z = 3.0;
  double ratio_lo = 0.7;
  double ratio_hi = 1.3;
  // Variance-law and CLT bands are stated only from this energy up; below it they are reported.
  double asymptotic_min_energy = 1e4;
  std::size_t variance_min_replications = 30;
  clt_bands clt;
};

struct output_paths {
  std::string records = "records.csv";
  std::string summary = "summary.json";
  std::string plot = "plot.csv";
  std::string table = "appendix_b.csv";
};

struct experiment_config {
  int schema_version = config_schema_version;
  std::string experiment_id = "campaign";
  std::vector<double> energies;
  domain dom = domain::rectangle(1.0, 1.0);
  std::size_t J = 256;
  sampler_kind sampler = sampler_kind::gaussian;
  double points_per_wavelength = 16.0;
  std::size_t replications = 30;
  std::uint64_t seed = 1;
  // Subset of {length, count, chaos2, chaos4, kacrice, table}.
  std::vector<std::string> statistics{"length"};
  output_paths outputs;
  band_config bands;
  std::vector<vec2> covtest_lags;
  bool record_wall_time = true;

  bool wants(const std::string& s) const;
};

// Throws std::invalid_argument with the offending key on schema errors.
experiment_config parse_config(const std::string& json_text);
experiment_config load_config(const std::filesystem::path& path);
std::string config_to_json(const experiment_config& cfg);

struct run_record {
  std::string experiment_id;
  double E;
  std::string statistic;
  std::uint32_t replication;
  std::uint64_t seed_stream;
  double value;
  double grid_h;
  std::size_t J;
  double wall_ms;

  bool operator==(const run_record&) const = default;
};

// Columns: experiment_id, E, statistic, replication, seed_stream, value, grid_h, J, wall_ms.
void write_records_csv(std::ostream& os, const std::vector<run_record>& records);
std::vector<run_record> read_records_csv(std::istream& is);

// All records of one replication: pure given (cfg, E, replication) apart from wall_ms.
std::vector<run_record> run_replication(const experiment_config& cfg, double E, std::uint32_t replication);

struct band_check {
  std::string name;
  double value;
  double lo;
  double hi;
  bool evaluated;
  bool pass;
  std::string note;
};

struct summary_row {
  double E;
  std::string statistic;
  summary_stats stats;
  std::optional<clt_result> clt;
  std::optional<double> predicted_mean;
  std::optional<double> predicted_variance;
  std::optional<double> asymptotic_variance;
  std::vector<band_check> bands;
};

struct replication_failure {
  double E;
  std::uint32_t replication;
  std::string error;
};

struct energy_prediction {
  double E;
  std::optional<double> kac_rice_mean_length;
  std::optional<double> kac_rice_mean_count;
  std::optional<double> kac_rice_variance_length;
  std::optional<appendix_b> table;
  std::optional<fourth_variances> fourth;
  std::optional<fourth_variances> fourth_asymptotic;
};

struct campaign_result {
  experiment_config config;
  std::vector<run_record> records;  // sorted by (E, statistic, replication)
  std::vector<summary_row> summaries;
  std::vector<replication_failure> failures;
  std::vector<energy_prediction> predictions;
  std::size_t replications_computed = 0;  // excludes those resumed from disk

  bool bands_pass() const;
};

struct run_options {
  std::optional<std::filesystem::path> out_dir;  // nothing is written without one
  int workers = 0;                               // 0: BERRYWAVE_WORKERS, else the OpenMP default
  bool resume = true;
  std::ostream* log = nullptr;
};

// Worker count from the option, then BERRYWAVE_WORKERS, then the OpenMP default.
int resolve_workers(int requested);

campaign_result run_campaign(const experiment_config& cfg, const run_options& opts = {});

// Summaries, bands and predictions from a sorted record list.
std::vector<summary_row> summarize_records(const experiment_config& cfg, const std::vector<run_record>& records,
                                           const std::vector<energy_prediction>& predictions);
std::vector<energy_prediction> compute_predictions(const experiment_config& cfg);

std::string summary_json(const campaign_result& r);
void write_plot_csv(std::ostream& os, const campaign_result& r);
// Writes records, summary, plot data and (if present) the table CSV into dir.
void emit_results(const campaign_result& r, const std::filesystem::path& dir);

struct scaling_report {
  double E;
  std::size_t n;
  summary_stats direct;  // nodal length at E on D
  summary_stats scaled;  // length at k = 1 on 2 pi sqrt(E) D, divided by 2 pi sqrt(E)
  double z_mean;
  double z_variance;
  double max_paired_difference;  // NaN unless paired
  bool pass;
};

// paired = true reuses the same waves for both sides (congruent fields); otherwise the scaled side
// draws independent waves and the two samples are compared.
scaling_report scaling_check(const experiment_config& cfg, bool paired, const run_options& opts = {});

struct covtest_row {
  vec2 lag;
  double empirical;
  double standard_error;
  double analytic;
  double z;
};

std::vector<covtest_row> covariance_test(const experiment_config& cfg);

}  // namespace berrywave
