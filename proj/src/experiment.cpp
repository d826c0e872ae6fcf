#include "berrywave/experiment.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include <json.hpp>

#include "berrywave/chaos.hpp"
#include "berrywave/errors.hpp"
#include "berrywave/kac_rice.hpp"
#include "berrywave/nodal_stats.hpp"
#include "berrywave/rng.hpp"
#include "berrywave/special_fn.hpp"
#include "berrywave/synthesis.hpp"

namespace berrywave {

namespace {

using nlohmann::json;
using std::numbers::pi;

const std::set<std::string> known_statistics = {"length", "count", "chaos2", "chaos4", "kacrice", "table"};

constexpr const char* records_header = "experiment_id,E,statistic,replication,seed_stream,value,grid_h,J,wall_ms";

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) {
    throw std::invalid_argument(where + ": expected an object");
  }
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) {
      throw std::invalid_argument(where + ": unknown key '" + key + "'");
    }
  }
}

template <class T>
T get(const json& j, const char* key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(where + "." + key + ": " + e.what());
  }
}

domain parse_domain(const json& j) {
  check_keys(j, {"kind", "radius", "width", "height", "center"}, "domain");
  auto kind = get<std::string>(j, "kind", "domain");
  vec2 c{};
  if (j.contains("center")) {
    auto v = get<std::vector<double>>(j, "center", "domain");
    if (v.size() != 2) {
      throw std::invalid_argument("domain.center: expected [x, y]");
    }
    c = {v[0], v[1]};
  }
  if (kind == "disk") {
    return domain::disk(get<double>(j, "radius", "domain"), c);
  }
  if (kind == "rect") {
    return domain::rectangle(get<double>(j, "width", "domain"), get<double>(j, "height", "domain"), c);
  }
  throw std::invalid_argument("domain.kind: expected 'disk' or 'rect'");
}

json domain_json(const domain& d) {
  json j;
  if (d.kind() == domain_kind::disk) {
    j["kind"] = "disk";
    j["radius"] = d.radius();
  } else {
    j["kind"] = "rect";
    j["width"] = d.width();
    j["height"] = d.height();
  }
  if (d.center() != vec2{}) {
    j["center"] = {d.center().x, d.center().y};
  }
  return j;
}

json config_json(const experiment_config& c) {
  json j;
  j["schema_version"] = c.schema_version;
  j["experiment_id"] = c.experiment_id;
  j["energies"] = c.energies;
  j["domain"] = domain_json(c.dom);
  j["J"] = c.J;
  j["sampler"] = c.sampler == sampler_kind::gaussian ? "gaussian" : "iid";
  j["points_per_wavelength"] = c.points_per_wavelength;
  j["replications"] = c.replications;
  j["seed"] = c.seed;
  j["statistics"] = c.statistics;
  j["outputs"] = {{"records", c.outputs.records},
                  {"summary", c.outputs.summary},
                  {"plot", c.outputs.plot},
                  {"table", c.outputs.table}};
  j["bands"] = {{"mean_z", c.bands.mean_z},
                {"variance_z", c.bands.variance_z},
                {"variance_ratio", {c.bands.ratio_lo, c.bands.ratio_hi}},
                {"asymptotic_min_energy", c.bands.asymptotic_min_energy},
                {"variance_min_replications", c.bands.variance_min_replications},
                {"skewness", c.bands.clt.skewness},
                {"excess_kurtosis", c.bands.clt.excess_kurtosis},
                {"ks", c.bands.clt.ks}};
  if (!c.covtest_lags.empty()) {
    json lags = json::array();
    for (auto l : c.covtest_lags) {
      lags.push_back({l.x, l.y});
    }
    j["covtest_lags"] = lags;
  }
  j["record_wall_time"] = c.record_wall_time;
  return j;
}

// Everything that changes a record value; replications and outputs are left out so a campaign
// can be extended or redirected and still resume.
std::string fingerprint(const experiment_config& c) {
  json j = config_json(c);
  for (const char* k : {"replications", "outputs", "bands", "covtest_lags", "record_wall_time"}) {
    j.erase(k);
  }
  return j.dump();
}

void validate(const experiment_config& c) {
  if (c.schema_version != config_schema_version) {
    throw std::invalid_argument("schema_version: unsupported value " + std::to_string(c.schema_version));
  }
  if (c.experiment_id.empty() ||
      c.experiment_id.find_first_not_of("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_.-") !=
          std::string::npos) {
    throw std::invalid_argument("experiment_id: use letters, digits, '_', '.' or '-'");
  }
  if (c.energies.empty()) {
    throw std::invalid_argument("energies: at least one energy is required");
  }
  for (double e : c.energies) {
    if (!(e > 0.0) || !std::isfinite(e)) {
      throw std::invalid_argument("energies: all energies must be positive");
    }
  }
  if (c.J < 1) {
    throw std::invalid_argument("J: must be at least 1");
  }
  if (!(c.points_per_wavelength >= grid_spec::min_points_per_wavelength)) {
    throw std::invalid_argument("points_per_wavelength: must be at least 4");
  }
  if (c.replications < 1) {
    throw std::invalid_argument("replications: must be at least 1");
  }
  for (const auto& s : c.statistics) {
    if (!known_statistics.count(s)) {
      throw std::invalid_argument("statistics: unknown statistic '" + s + "'");
    }
  }
  if (!(c.bands.ratio_lo < c.bands.ratio_hi)) {
    throw std::invalid_argument("bands.variance_ratio: expected [lo, hi] with lo < hi");
  }
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string num(double v) { return fmt("%.17g", v); }

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, ',')) {
    out.push_back(cur);
  }
  if (!line.empty() && line.back() == ',') {
    out.emplace_back();
  }
  return out;
}

double parse_double(const std::string& s, const char* what) {
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw std::invalid_argument(std::string("records: bad ") + what + " '" + s + "'");
  }
  return v;
}

std::uint64_t parse_u64(const std::string& s, const char* what) {
  char* end = nullptr;
  unsigned long long v = std::strtoull(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size() || s[0] == '-') {
    throw std::invalid_argument(std::string("records: bad ") + what + " '" + s + "'");
  }
  return v;
}

std::uint32_t sampler_tag(const experiment_config& cfg, double E) {
  return cfg.sampler == sampler_kind::gaussian ? tag_of(E) ^ 0x5a5a5a5au : tag_of(E);
}

wave_sample draw(const experiment_config& cfg, const energy_level& e, const domain& d, std::uint64_t seed,
                 std::uint32_t rep, std::uint32_t field) {
  if (cfg.sampler == sampler_kind::iid) {
    return sample_wave(e, cfg.J, seed, rep, field);
  }
  return sample_gaussian_wave(e, gaussian_directions_for(e, d, cfg.J), seed, rep, field);
}

std::vector<std::string> record_statistics(const experiment_config& cfg) {
  std::vector<std::string> out;
  if (cfg.wants("length")) {
    out.push_back("length");
  }
  if (cfg.wants("count")) {
    out.push_back("count");
  }
  if (cfg.wants("chaos2")) {
    out.push_back("chaos2_length");
    out.push_back("chaos2_count");
  }
  if (cfg.wants("chaos4")) {
    out.push_back("chaos4_length");
    out.push_back("chaos4_count");
  }
  return out;
}

using record_key = std::tuple<double, std::string, std::uint32_t>;

record_key key_of(const run_record& r) { return {r.E, r.statistic, r.replication}; }

void sort_records(std::vector<run_record>& v) {
  std::stable_sort(v.begin(), v.end(),
                   [](const run_record& a, const run_record& b) { return key_of(a) < key_of(b); });
}

std::vector<run_record> load_records(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) {
    return {};
  }
  try {
    return read_records_csv(in);
  } catch (const std::invalid_argument&) {
    // A truncated last line from an interrupted run; keep the complete rows.
    std::ifstream again(p);
    std::vector<run_record> out;
    std::string line;
    std::getline(again, line);
    while (std::getline(again, line)) {
      std::istringstream one(std::string(records_header) + "\n" + line + "\n");
      try {
        auto r = read_records_csv(one);
        out.insert(out.end(), r.begin(), r.end());
      } catch (const std::invalid_argument&) {
      }
    }
    return out;
  }
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) {
    throw std::runtime_error("cannot write " + p.string());
  }
}

band_check make_band(std::string name, double value, double lo, double hi, bool evaluated, std::string note = {}) {
  bool pass = !evaluated || (value >= lo && value <= hi);
  return {std::move(name), value, lo, hi, evaluated, pass, std::move(note)};
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json stats_json(const summary_stats& s) {
  return {{"n", s.n},
          {"mean", s.mean},
          {"variance", s.variance},
          {"se_mean", s.se_mean},
          {"se_variance", s.se_variance},
          {"skewness", s.skewness},
          {"excess_kurtosis", s.excess_kurtosis},
          {"ks", s.ks}};
}

}  // namespace

bool experiment_config::wants(const std::string& s) const {
  return std::find(statistics.begin(), statistics.end(), s) != statistics.end();
}

experiment_config parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  check_keys(j,
             {"schema_version", "experiment_id", "energies", "domain", "J", "sampler", "points_per_wavelength",
              "replications", "seed", "statistics", "outputs", "bands", "covtest_lags", "record_wall_time"},
             "config");
  if (!j.contains("schema_version")) {
    throw std::invalid_argument("config: schema_version is required");
  }
  experiment_config c;
  c.schema_version = get<int>(j, "schema_version", "config");
  if (j.contains("experiment_id")) {
    c.experiment_id = get<std::string>(j, "experiment_id", "config");
  }
  c.energies = get<std::vector<double>>(j, "energies", "config");
  if (j.contains("domain")) {
    c.dom = parse_domain(j.at("domain"));
  }
  if (j.contains("J")) {
    c.J = get<std::size_t>(j, "J", "config");
  }
  if (j.contains("sampler")) {
    auto s = get<std::string>(j, "sampler", "config");
    if (s == "gaussian") {
      c.sampler = sampler_kind::gaussian;
    } else if (s == "iid") {
      c.sampler = sampler_kind::iid;
    } else {
      throw std::invalid_argument("config.sampler: expected 'gaussian' or 'iid'");
    }
  }
  if (j.contains("points_per_wavelength")) {
    c.points_per_wavelength = get<double>(j, "points_per_wavelength", "config");
  }
  if (j.contains("replications")) {
    c.replications = get<std::size_t>(j, "replications", "config");
  }
  if (j.contains("seed")) {
    const auto& s = j.at("seed");
    if (s.is_string()) {
      c.seed = parse_u64(s.get<std::string>(), "seed");
    } else if (s.is_number_unsigned()) {
      c.seed = s.get<std::uint64_t>();
    } else {
      throw std::invalid_argument("config.seed: expected a nonnegative integer");
    }
  }
  if (j.contains("statistics")) {
    c.statistics = get<std::vector<std::string>>(j, "statistics", "config");
  }
  if (j.contains("outputs")) {
    const auto& o = j.at("outputs");
    check_keys(o, {"records", "summary", "plot", "table"}, "outputs");
    if (o.contains("records")) c.outputs.records = get<std::string>(o, "records", "outputs");
    if (o.contains("summary")) c.outputs.summary = get<std::string>(o, "summary", "outputs");
    if (o.contains("plot")) c.outputs.plot = get<std::string>(o, "plot", "outputs");
    if (o.contains("table")) c.outputs.table = get<std::string>(o, "table", "outputs");
  }
  if (j.contains("bands")) {
    const auto& b = j.at("bands");
    check_keys(b,
               {"mean_z", "variance_z", "variance_ratio", "asymptotic_min_energy", "variance_min_replications",
                "skewness", "excess_kurtosis", "ks"},
               "bands");
    auto& cb = c.bands;
    if (b.contains("mean_z")) cb.mean_z = get<double>(b, "mean_z", "bands");
    if (b.contains("variance_z")) cb.variance_z = get<double>(b, "variance_z", "bands");
    if (b.contains("variance_ratio")) {
      auto r = get<std::vector<double>>(b, "variance_ratio", "bands");
      if (r.size() != 2) {
        throw std::invalid_argument("bands.variance_ratio: expected [lo, hi]");
      }
      cb.ratio_lo = r[0];
      cb.ratio_hi = r[1];
    }
    if (b.contains("asymptotic_min_energy")) cb.asymptotic_min_energy = get<double>(b, "asymptotic_min_energy", "bands");
    if (b.contains("variance_min_replications")) {
      cb.variance_min_replications = get<std::size_t>(b, "variance_min_replications", "bands");
    }
    if (b.contains("skewness")) cb.clt.skewness = get<double>(b, "skewness", "bands");
    if (b.contains("excess_kurtosis")) cb.clt.excess_kurtosis = get<double>(b, "excess_kurtosis", "bands");
    if (b.contains("ks")) cb.clt.ks = get<double>(b, "ks", "bands");
  }
  if (j.contains("covtest_lags")) {
    for (const auto& l : j.at("covtest_lags")) {
      auto v = l.get<std::vector<double>>();
      if (v.size() != 2) {
        throw std::invalid_argument("config.covtest_lags: each lag is [x, y]");
      }
      c.covtest_lags.push_back({v[0], v[1]});
    }
  }
  if (j.contains("record_wall_time")) {
    c.record_wall_time = get<bool>(j, "record_wall_time", "config");
  }
  validate(c);
  return c;
}

experiment_config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot read config " + path.string());
  }
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

std::string config_to_json(const experiment_config& cfg) { return config_json(cfg).dump(2); }

void write_records_csv(std::ostream& os, const std::vector<run_record>& records) {
  os << records_header << '\n';
  for (const auto& r : records) {
    os << r.experiment_id << ',' << num(r.E) << ',' << r.statistic << ',' << r.replication << ',' << r.seed_stream
       << ',' << num(r.value) << ',' << num(r.grid_h) << ',' << r.J << ',' << fmt("%.3f", r.wall_ms) << '\n';
  }
  if (!os) {
    throw std::runtime_error("write_records_csv: stream write failed");
  }
}

std::vector<run_record> read_records_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != records_header) {
    throw std::invalid_argument("records: missing or unexpected header");
  }
  std::vector<run_record> out;
  while (std::getline(is, line)) {
    if (line.empty()) {
      continue;
    }
    auto f = split(line);
    if (f.size() != 9) {
      throw std::invalid_argument("records: expected 9 fields in '" + line + "'");
    }
    run_record r;
    r.experiment_id = f[0];
    r.E = parse_double(f[1], "E");
    r.statistic = f[2];
    r.replication = static_cast<std::uint32_t>(parse_u64(f[3], "replication"));
    r.seed_stream = parse_u64(f[4], "seed_stream");
    r.value = parse_double(f[5], "value");
    r.grid_h = parse_double(f[6], "grid_h");
    r.J = parse_u64(f[7], "J");
    r.wall_ms = parse_double(f[8], "wall_ms");
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<run_record> run_replication(const experiment_config& cfg, double E, std::uint32_t replication) {
  auto t0 = std::chrono::steady_clock::now();
  energy_level e(E);
  const domain& d = cfg.dom;
  auto g = grid_spec::for_energy(d, E, cfg.points_per_wavelength);
  wave_sample re = draw(cfg, e, d, cfg.seed, replication, field_real);
  bool need_complex = cfg.wants("count") || cfg.wants("chaos2") || cfg.wants("chaos4");
  bool need_gradient = cfg.wants("chaos4");
  bool need_grid = cfg.wants("length") || cfg.wants("count") || cfg.wants("chaos4");

  std::vector<std::pair<std::string, double>> values;
  std::optional<field_grid> fre;
  std::optional<field_grid> fim;
  if (need_grid) {
    fre = eval_grid(re, g, need_gradient, execution::serial);
  }
  if (cfg.wants("length")) {
    auto sampler = [&re](vec2 p) { return eval_value(re, p); };
    values.emplace_back("length", nodal_length(fre->value, g, sampler, execution::serial).length);
  }
  std::optional<wave_sample> im;
  if (need_complex) {
    im = draw(cfg, e, d, cfg.seed, replication, field_imag);
  }
  if (cfg.wants("count") || cfg.wants("chaos4")) {
    fim = eval_grid(*im, g, need_gradient, execution::serial);
  }
  if (cfg.wants("count")) {
    auto c = count_singularities(fre->value, fim->value, g, execution::serial);
    values.emplace_back("count", static_cast<double>(c.count));
  }
  if (cfg.wants("chaos2")) {
    auto nodes = boundary_gauss_nodes(d, 0.25 / std::sqrt(E));
    values.emplace_back("chaos2_length", second_chaos_boundary(re, nodes));
    values.emplace_back("chaos2_count", second_chaos_count({re, *im}, nodes));
  }
  if (cfg.wants("chaos4")) {
    values.emplace_back("chaos4_length", fourth_chaos_length(*fre, execution::serial).value);
    values.emplace_back("chaos4_count", fourth_chaos_count(*fre, *fim, execution::serial).value);
  }
  double ms = cfg.record_wall_time
                  ? std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count()
                  : 0.0;
  std::uint64_t stream = counter_stream(cfg.seed, replication, field_real, sampler_tag(cfg, E)).id();
  std::vector<run_record> out;
  for (auto& [name, v] : values) {
    out.push_back({cfg.experiment_id, E, name, replication, stream, v, g.h(), re.size(), ms});
  }
  return out;
}

int resolve_workers(int requested) {
  if (requested > 0) {
    return requested;
  }
  if (const char* env = std::getenv("BERRYWAVE_WORKERS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) {
      return static_cast<int>(v);
    }
    throw std::invalid_argument("BERRYWAVE_WORKERS must be a positive integer");
  }
  return omp_get_max_threads();
}

bool campaign_result::bands_pass() const {
  for (const auto& s : summaries) {
    for (const auto& b : s.bands) {
      if (!b.pass) {
        return false;
      }
    }
  }
  return true;
}

std::vector<energy_prediction> compute_predictions(const experiment_config& cfg) {
  std::vector<energy_prediction> out;
  for (double E : cfg.energies) {
    energy_level e(E);
    energy_prediction p;
    p.E = E;
    if (cfg.wants("kacrice")) {
      p.kac_rice_mean_length = kac_rice_mean(e, cfg.dom, statistic_kind::length);
      p.kac_rice_mean_count = kac_rice_mean(e, cfg.dom, statistic_kind::count);
      p.kac_rice_variance_length = kac_rice_variance_length(e, cfg.dom).variance;
    }
    if (cfg.wants("table")) {
      p.table = appendix_b_table(e, cfg.dom);
      p.fourth = predicted_fourth_variances(*p.table);
      p.fourth_asymptotic = asymptotic_fourth_variances(e, cfg.dom);
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<summary_row> summarize_records(const experiment_config& cfg, const std::vector<run_record>& records,
                                           const std::vector<energy_prediction>& predictions) {
  std::map<std::pair<double, std::string>, std::vector<double>> groups;
  for (const auto& r : records) {
    groups[{r.E, r.statistic}].push_back(r.value);
  }
  const auto& bc = cfg.bands;
  std::vector<summary_row> out;
  for (const auto& [key, values] : groups) {
    if (values.size() < 2) {
      continue;
    }
    const auto& [E, stat] = key;
    energy_level e(E);
    const energy_prediction* pred = nullptr;
    for (const auto& p : predictions) {
      if (p.E == E) {
        pred = &p;
      }
    }
    summary_row row{E, stat, summarize(values), std::nullopt, std::nullopt, std::nullopt, std::nullopt, {}};
    fourth_variances asym = asymptotic_fourth_variances(e, cfg.dom);
    if (stat == "length") {
      row.predicted_mean = kac_rice_mean(e, cfg.dom, statistic_kind::length);
      row.asymptotic_variance = asym.var_l4;
      if (pred && pred->kac_rice_variance_length) {
        row.predicted_variance = pred->kac_rice_variance_length;
      }
    } else if (stat == "count") {
      row.predicted_mean = kac_rice_mean(e, cfg.dom, statistic_kind::count);
      row.asymptotic_variance = asym.var_n4;
    } else if (stat == "chaos2_length" || stat == "chaos2_count") {
      row.predicted_mean = 0.0;
    } else if (stat == "chaos4_length" || stat == "chaos4_count") {
      row.predicted_mean = 0.0;
      bool len = stat == "chaos4_length";
      row.asymptotic_variance = len ? asym.var_l4 : asym.var_n4;
      if (pred && pred->fourth) {
        row.predicted_variance = len ? pred->fourth->var_l4 : pred->fourth->var_n4;
      }
    }
    const auto& s = row.stats;
    bool enough = s.n >= bc.variance_min_replications;
    bool asymptotic = E >= bc.asymptotic_min_energy;
    if (row.predicted_mean) {
      double z = two_sample_z(s.mean, s.se_mean, *row.predicted_mean, 0.0);
      row.bands.push_back(make_band("mean_z", z, -bc.mean_z, bc.mean_z, true));
    }
    if (row.predicted_variance) {
      double z = two_sample_z(s.variance, s.se_variance, *row.predicted_variance, 0.0);
      row.bands.push_back(make_band("variance_z", z, -bc.variance_z, bc.variance_z, enough,
                                    enough ? "" : "too few replications"));
    }
    if (row.asymptotic_variance) {
      double ratio = s.variance / *row.asymptotic_variance;
      std::string note = !enough ? "too few replications" : (!asymptotic ? "below asymptotic_min_energy" : "");
      row.bands.push_back(make_band("variance_ratio", ratio, bc.ratio_lo, bc.ratio_hi, enough && asymptotic, note));
    }
    if ((stat == "length" || stat == "count") && s.n >= clt_min_samples && s.variance > 0.0) {
      row.clt = clt_diagnostics(values, bc.clt);
      std::string note = asymptotic ? "" : "below asymptotic_min_energy";
      row.bands.push_back(make_band("skewness", s.skewness, -bc.clt.skewness, bc.clt.skewness, asymptotic, note));
      row.bands.push_back(make_band("excess_kurtosis", s.excess_kurtosis, -bc.clt.excess_kurtosis,
                                    bc.clt.excess_kurtosis, asymptotic, note));
      row.bands.push_back(make_band("ks", s.ks, 0.0, bc.clt.ks, asymptotic, note));
    }
    out.push_back(std::move(row));
  }
  return out;
}

campaign_result run_campaign(const experiment_config& cfg, const run_options& opts) {
  validate(cfg);
  int workers = resolve_workers(opts.workers);
  auto expected = record_statistics(cfg);

  std::optional<std::filesystem::path> partial_path;
  std::map<std::pair<double, std::uint32_t>, std::vector<run_record>> have;
  if (opts.out_dir) {
    std::filesystem::create_directories(*opts.out_dir);
    auto final_path = *opts.out_dir / cfg.outputs.records;
    partial_path = *opts.out_dir / (cfg.outputs.records + ".partial");
    auto fp_path = *opts.out_dir / (cfg.outputs.records + ".fingerprint");
    std::string fp = fingerprint(cfg);
    bool same = std::filesystem::exists(fp_path) && read_file(fp_path) == fp;
    if (opts.resume && same) {
      for (const auto& p : {final_path, *partial_path}) {
        for (auto& r : load_records(p)) {
          if (r.experiment_id == cfg.experiment_id) {
            have[{r.E, r.replication}].push_back(std::move(r));
          }
        }
      }
    } else {
      std::filesystem::remove(*partial_path);
    }
    write_file(fp_path, fp);
  }

  // A replication counts as done only if every expected statistic is on disk.
  std::vector<run_record> records;
  std::vector<std::pair<double, std::uint32_t>> work;
  for (double E : cfg.energies) {
    for (std::uint32_t rep = 0; rep < cfg.replications; ++rep) {
      auto it = have.find({E, rep});
      std::set<std::string> got;
      if (it != have.end()) {
        for (const auto& r : it->second) {
          got.insert(r.statistic);
        }
      }
      bool done = std::all_of(expected.begin(), expected.end(), [&](const auto& s) { return got.count(s) > 0; });
      if (done) {
        std::set<std::string> seen;
        for (const auto& r : it->second) {
          if (seen.insert(r.statistic).second && std::count(expected.begin(), expected.end(), r.statistic)) {
            records.push_back(r);
          }
        }
      } else {
        work.emplace_back(E, rep);
      }
    }
  }

  std::ofstream partial;
  if (partial_path) {
    bool fresh = !std::filesystem::exists(*partial_path) || std::filesystem::file_size(*partial_path) == 0;
    partial.open(*partial_path, std::ios::app);
    if (!partial) {
      throw std::runtime_error("cannot open " + partial_path->string());
    }
    if (fresh) {
      partial << records_header << '\n' << std::flush;
    }
  }

  std::vector<replication_failure> failures;
  std::exception_ptr fatal;
  const long nwork = static_cast<long>(work.size());
  std::size_t finished = 0;
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
  for (long i = 0; i < nwork; ++i) {
    auto [E, rep] = work[static_cast<std::size_t>(i)];
    std::vector<run_record> recs;
    std::optional<replication_failure> failed;
    try {
      recs = run_replication(cfg, E, rep);
    } catch (const budget_error& e) {
      failed = replication_failure{E, rep, e.what()};
    } catch (const resolution_error& e) {
      failed = replication_failure{E, rep, e.what()};
    } catch (const degenerate_error& e) {
      failed = replication_failure{E, rep, e.what()};
    } catch (...) {
#pragma omp critical(berrywave_fatal)
      if (!fatal) {
        fatal = std::current_exception();
      }
    }
#pragma omp critical(berrywave_records)
    {
      if (failed) {
        failures.push_back(*failed);
      }
      if (partial.is_open() && !recs.empty()) {
        std::ostringstream ss;
        write_records_csv(ss, recs);
        std::string body = ss.str();
        partial << body.substr(body.find('\n') + 1) << std::flush;
      }
      records.insert(records.end(), recs.begin(), recs.end());
      ++finished;
      if (opts.log && (finished % 50 == 0 || finished == work.size())) {
        *opts.log << cfg.experiment_id << ": " << finished << "/" << work.size() << " replications\n"
                  << std::flush;
      }
    }
  }
  if (fatal) {
    std::rethrow_exception(fatal);
  }
  partial.close();

  sort_records(records);
  std::sort(failures.begin(), failures.end(), [](const auto& a, const auto& b) {
    return std::tie(a.E, a.replication) < std::tie(b.E, b.replication);
  });

  campaign_result out;
  out.config = cfg;
  out.records = std::move(records);
  out.failures = std::move(failures);
  out.replications_computed = work.size();
  omp_set_num_threads(workers);
  out.predictions = compute_predictions(cfg);
  out.summaries = summarize_records(cfg, out.records, out.predictions);
  if (opts.out_dir) {
    emit_results(out, *opts.out_dir);
    if (out.failures.empty()) {
      std::filesystem::remove(*partial_path);
    }
  }
  return out;
}

std::string summary_json(const campaign_result& r) {
  json j;
  j["schema_version"] = config_schema_version;
  j["experiment_id"] = r.config.experiment_id;
  j["config"] = config_json(r.config);
  json sums = json::array();
  for (const auto& s : r.summaries) {
    json row = {{"E", s.E}, {"statistic", s.statistic}, {"stats", stats_json(s.stats)}};
    row["predicted_mean"] = opt(s.predicted_mean);
    row["predicted_variance"] = opt(s.predicted_variance);
    row["asymptotic_variance"] = opt(s.asymptotic_variance);
    json bands = json::array();
    for (const auto& b : s.bands) {
      bands.push_back({{"name", b.name},
                       {"value", b.value},
                       {"lo", b.lo},
                       {"hi", b.hi},
                       {"evaluated", b.evaluated},
                       {"pass", b.pass},
                       {"note", b.note}});
    }
    row["bands"] = bands;
    sums.push_back(row);
  }
  j["summaries"] = sums;
  json fails = json::array();
  for (const auto& f : r.failures) {
    fails.push_back({{"E", f.E}, {"replication", f.replication}, {"error", f.error}});
  }
  j["failures"] = fails;
  json preds = json::array();
  for (const auto& p : r.predictions) {
    json row = {{"E", p.E}};
    row["kac_rice_mean_length"] = opt(p.kac_rice_mean_length);
    row["kac_rice_mean_count"] = opt(p.kac_rice_mean_count);
    row["kac_rice_variance_length"] = opt(p.kac_rice_variance_length);
    if (p.fourth) {
      row["var_l4"] = p.fourth->var_l4;
      row["var_n4"] = p.fourth->var_n4;
      row["var_a_e"] = p.fourth->var_a_e;
      row["var_b_e"] = p.fourth->var_b_e;
      row["var_l4_asymptotic"] = p.fourth_asymptotic->var_l4;
      row["var_n4_asymptotic"] = p.fourth_asymptotic->var_n4;
    }
    preds.push_back(row);
  }
  j["predictions"] = preds;
  j["bands_pass"] = r.bands_pass();
  return j.dump(2) + "\n";
}

void write_plot_csv(std::ostream& os, const campaign_result& r) {
  os << "experiment_id,E,log_E,statistic,quantity,value,se\n";
  for (const auto& s : r.summaries) {
    auto line = [&](const char* q, double v, double se) {
      os << r.config.experiment_id << ',' << num(s.E) << ',' << num(std::log(s.E)) << ',' << s.statistic << ','
         << q << ',' << num(v) << ',' << num(se) << '\n';
    };
    line("mean", s.stats.mean, s.stats.se_mean);
    line("variance", s.stats.variance, s.stats.se_variance);
    if (s.predicted_variance) {
      line("predicted_variance", *s.predicted_variance, 0.0);
    }
    if (s.asymptotic_variance) {
      line("asymptotic_variance", *s.asymptotic_variance, 0.0);
    }
  }
}

void emit_results(const campaign_result& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto& o = r.config.outputs;
  {
    std::ostringstream ss;
    write_records_csv(ss, r.records);
    write_file(dir / o.records, ss.str());
  }
  write_file(dir / o.summary, summary_json(r));
  {
    std::ostringstream ss;
    write_plot_csv(ss, r);
    write_file(dir / o.plot, ss.str());
  }
  bool any_table = std::any_of(r.predictions.begin(), r.predictions.end(), [](const auto& p) { return p.table; });
  if (any_table) {
    std::ostringstream ss;
    bool first = true;
    for (const auto& p : r.predictions) {
      if (!p.table) {
        continue;
      }
      std::ostringstream one;
      write_appendix_b_csv(one, *p.table);
      std::string body = one.str();
      ss << (first ? body : body.substr(body.find('\n') + 1));
      first = false;
    }
    write_file(dir / o.table, ss.str());
  }
}

scaling_report scaling_check(const experiment_config& cfg, bool paired, const run_options& opts) {
  validate(cfg);
  if (cfg.replications < 3) {
    throw sample_size_error("scaling_check: need at least 3 replications");
  }
  int workers = resolve_workers(opts.workers);
  double E = cfg.energies.front();
  double scale = 2.0 * pi * std::sqrt(E);
  energy_level e(E);
  energy_level unit(1.0 / (4.0 * pi * pi));
  domain big = cfg.dom.scaled(scale);
  auto g = grid_spec::for_energy(cfg.dom, E, cfg.points_per_wavelength);
  auto g2 = grid_spec::for_energy(big, unit.E(), cfg.points_per_wavelength);
  std::uint64_t seed2 = cfg.seed ^ 0x9e3779b97f4a7c15ull;

  const long n = static_cast<long>(cfg.replications);
  std::vector<double> direct(static_cast<std::size_t>(n));
  std::vector<double> scaled(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
  for (long i = 0; i < n; ++i) {
    auto rep = static_cast<std::uint32_t>(i);
    wave_sample w = draw(cfg, e, cfg.dom, cfg.seed, rep, field_real);
    wave_sample w2 = paired ? wave_sample(unit, w.directions(), w.phases(), w.amplitudes())
                            : draw(cfg, unit, big, seed2, rep, field_real);
    auto f = eval_grid(w, g, false, execution::serial);
    auto f2 = eval_grid(w2, g2, false, execution::serial);
    auto s1 = [&w](vec2 p) { return eval_value(w, p); };
    auto s2 = [&w2](vec2 p) { return eval_value(w2, p); };
    direct[static_cast<std::size_t>(i)] = nodal_length(f.value, g, s1, execution::serial).length;
    scaled[static_cast<std::size_t>(i)] = nodal_length(f2.value, g2, s2, execution::serial).length / scale;
  }
  scaling_report r{};
  r.E = E;
  r.n = cfg.replications;
  r.direct = summarize(direct);
  r.scaled = summarize(scaled);
  r.z_mean = two_sample_z(r.direct.mean, r.direct.se_mean, r.scaled.mean, r.scaled.se_mean);
  r.z_variance = two_sample_z(r.direct.variance, r.direct.se_variance, r.scaled.variance, r.scaled.se_variance);
  r.max_paired_difference = std::numeric_limits<double>::quiet_NaN();
  if (paired) {
    double m = 0.0;
    for (long i = 0; i < n; ++i) {
      auto k = static_cast<std::size_t>(i);
      m = std::max(m, std::fabs(direct[k] - scaled[k]) / std::max(1e-300, std::fabs(direct[k])));
    }
    r.max_paired_difference = m;
    r.pass = m <= 1e-6;
  } else {
    r.pass = std::fabs(r.z_mean) <= cfg.bands.mean_z && std::fabs(r.z_variance) <= cfg.bands.variance_z;
  }
  return r;
}

std::vector<covtest_row> covariance_test(const experiment_config& cfg) {
  validate(cfg);
  double E = cfg.energies.front();
  energy_level e(E);
  std::vector<vec2> lags = cfg.covtest_lags;
  if (lags.empty()) {
    double wl = 1.0 / std::sqrt(E);
    lags = {{0.25 * wl, 0.0}, {0.5 * wl, 0.0}, {0.0, wl}, {0.7 * wl, 0.7 * wl}};
  }
  auto emp = empirical_covariance(e, cfg.J, cfg.replications, lags, cfg.seed);
  std::vector<covtest_row> out;
  for (const auto& c : emp) {
    double analytic = bessel_j(bessel_order(0), e.k() * norm(c.lag));
    out.push_back({c.lag, c.mean, c.standard_error, analytic, two_sample_z(c.mean, c.standard_error, analytic, 0.0)});
  }
  return out;
}

}  // namespace berrywave
