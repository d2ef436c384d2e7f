#include "flexgrid/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "bundled_data.hpp"
#include "flexgrid/format.hpp"

namespace flexgrid {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  for (;;) {
    const auto next = s.find(sep, pos);
    out.push_back(trim(s.substr(pos, next == std::string_view::npos ? next : next - pos)));
    if (next == std::string_view::npos) return out;
    pos = next + 1;
  }
}

const std::set<std::string, std::less<>> k_sections{"sweep", "network", "traffic", "run"};

const std::set<std::string, std::less<>> k_keys{
    "topologies",     "slot_widths_ghz",    "loads_erlang", "seeds",       "master_seed",
    "dist",           "b_min_gbps",         "b_max_gbps",   "b_avg_gbps",  "granule_mhz",
    "b_gbps",         "mu",                 "guard_ghz",    "link_bandwidth_ghz",
    "routing_metric", "total_requests",     "warmup_multiplier"};

struct Entry {
  std::string value;
  std::size_t line = 0;
};

class ConfigDocument {
 public:
  explicit ConfigDocument(std::string_view text) {
    std::size_t line_no = 0;
    for (auto raw : split(text, '\n')) {
      ++line_no;
      auto line = raw;
      if (auto hash = line.find('#'); hash != std::string_view::npos) line = trim(line.substr(0, hash));
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') fail(line_no, "unterminated section header");
        const auto name = trim(line.substr(1, line.size() - 2));
        if (!k_sections.contains(name)) fail(line_no, "unknown section [" + std::string(name) + "]");
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) fail(line_no, "expected 'key = value'");
      const std::string key(trim(line.substr(0, eq)));
      const auto value = trim(line.substr(eq + 1));
      if (!k_keys.contains(key)) fail(line_no, "unknown key '" + key + "'");
      if (value.empty()) fail(line_no, "empty value for '" + key + "'");
      if (!entries_.emplace(key, Entry{std::string(value), line_no}).second) {
        fail(line_no, "duplicate key '" + key + "'");
      }
    }
  }

  const Entry* find(const std::string& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
  }

  const std::map<std::string, Entry>& entries() const { return entries_; }

  [[noreturn]] static void fail(std::size_t line, const std::string& what) {
    throw ConfigError("config line " + std::to_string(line) + ": " + what);
  }

 private:
  std::map<std::string, Entry> entries_;
};

double parse_real(std::string_view token, std::size_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc{} || ptr != token.data() + token.size() || !std::isfinite(v)) {
    ConfigDocument::fail(line, "invalid number '" + std::string(token) + "'");
  }
  return v;
}

double parse_positive(std::string_view token, std::size_t line) {
  const double v = parse_real(token, line);
  if (!(v > 0.0)) ConfigDocument::fail(line, "value must be positive: '" + std::string(token) + "'");
  return v;
}

std::uint64_t parse_uint(std::string_view token, std::size_t line) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc{} || ptr != token.data() + token.size()) {
    ConfigDocument::fail(line, "invalid integer '" + std::string(token) + "'");
  }
  return v;
}

std::vector<double> positive_list(const Entry& e) {
  std::vector<double> out;
  for (auto tok : split(e.value, ',')) out.push_back(parse_positive(tok, e.line));
  return out;
}

std::vector<double> sorted_unique(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

std::vector<double> parse_slot_widths(const Entry& e) {
  std::vector<double> out;
  for (auto tok : split(e.value, ',')) {
    const auto parts = split(tok, ':');
    if (parts.front() == "itu") {
      if (parts.size() != 2) ConfigDocument::fail(e.line, "expected itu:<max_ghz>");
      const double max = parse_positive(parts[1], e.line);
      if (max < 6.25) ConfigDocument::fail(e.line, "itu grid needs max >= 6.25");
      const auto grid = itu_grid(max);
      out.insert(out.end(), grid.begin(), grid.end());
    } else if (parts.front() == "arith") {
      if (parts.size() != 3 && parts.size() != 4) {
        ConfigDocument::fail(e.line, "expected arith:<start>:<stop>[:<step>]");
      }
      const double start = parse_positive(parts[1], e.line);
      const double stop = parse_positive(parts[2], e.line);
      const double step = parts.size() == 4 ? parse_positive(parts[3], e.line) : 2.0;
      const auto grid = arithmetic_grid(start, stop, step);
      out.insert(out.end(), grid.begin(), grid.end());
    } else if (parts.size() == 1) {
      out.push_back(parse_positive(tok, e.line));
    } else {
      ConfigDocument::fail(e.line, "invalid slot width token '" + std::string(tok) + "'");
    }
  }
  return sorted_unique(std::move(out));
}

template <typename F>
auto with_entry(const ConfigDocument& doc, const std::string& key, F&& parse) {
  const Entry* e = doc.find(key);
  using R = decltype(parse(*e));
  return e ? std::optional<R>(parse(*e)) : std::nullopt;
}

std::vector<DistributionSpec> parse_distributions(const ConfigDocument& doc) {
  const Entry* dist = doc.find("dist");
  const std::string kind = dist ? dist->value : "uniform";
  const auto list_or = [&](const char* key, double fallback) {
    return with_entry(doc, key, positive_list).value_or(std::vector<double>{fallback});
  };
  std::set<std::string> used;
  std::vector<DistributionSpec> out;
  if (kind == "uniform") {
    used = {"b_min_gbps", "b_max_gbps"};
    for (double lo : list_or("b_min_gbps", 1.0)) {
      for (double hi : list_or("b_max_gbps", 100.0)) out.emplace_back(UniformBandwidth{lo, hi});
    }
  } else if (kind == "poisson") {
    used = {"b_avg_gbps", "granule_mhz"};
    for (double avg : list_or("b_avg_gbps", 100.0)) {
      for (double mhz : list_or("granule_mhz", 1.0)) {
        out.emplace_back(PoissonBandwidth{avg, mhz / 1000.0});
      }
    }
  } else if (kind == "constant") {
    used = {"b_gbps"};
    for (double b : list_or("b_gbps", 100.0)) out.emplace_back(ConstantBandwidth{b});
  } else {
    ConfigDocument::fail(dist->line, "dist must be uniform, poisson or constant");
  }
  for (const char* key : {"b_min_gbps", "b_max_gbps", "b_avg_gbps", "granule_mhz", "b_gbps"}) {
    if (const Entry* e = doc.find(key); e && !used.contains(key)) {
      ConfigDocument::fail(e->line, std::string(key) + " does not apply to dist = " + kind);
    }
  }
  for (const auto& d : out) {
    try {
      validate(d);
    } catch (const std::invalid_argument& ex) {
      throw ConfigError(std::string("invalid distribution: ") + ex.what());
    }
  }
  return out;
}

std::string dist_param(const DistributionSpec& d, int which) {
  if (const auto* u = std::get_if<UniformBandwidth>(&d)) {
    return format_double(which == 1 ? u->b_min_gbps : u->b_max_gbps);
  }
  if (const auto* p = std::get_if<PoissonBandwidth>(&d)) {
    return format_double(which == 1 ? p->b_avg_gbps : p->granule_ghz * 1000.0);
  }
  return which == 1 ? format_double(std::get<ConstantBandwidth>(d).b_gbps) : std::string{};
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string opt_field(const std::optional<double>& v) { return v ? format_double(*v) : std::string{}; }

ResultRow run_one(const SweepSpec& spec, const RunPoint& p, const SweepOptions& options) {
  const auto& dist = spec.dist_variants[p.dist];
  ResultRow row;
  row.topology = spec.topologies[p.topology].name();
  row.slot_width_ghz = p.slot_width_ghz;
  row.load_erlang_per_node = p.load_erlang;
  row.dist = std::string(distribution_name(dist));
  row.dist_param1 = dist_param(dist, 1);
  row.dist_param2 = dist_param(dist, 2);
  row.guard_ghz = spec.fixed.guard_ghz;
  row.link_bandwidth_ghz = spec.fixed.link_bandwidth_ghz;
  row.total_requests = spec.fixed.total_requests;
  row.seed = p.seed;

  const auto started = std::chrono::steady_clock::now();
  try {
    RunOptions run_options;
    if (options.trace != nullptr) {
      *options.trace << "# run topology=" << row.topology
                     << " slot_width_ghz=" << format_double(p.slot_width_ghz)
                     << " load_erlang_per_node=" << format_double(p.load_erlang)
                     << " dist=" << row.dist << " seed=" << p.seed << '\n';
      run_options.trace = options.trace;
    }
    const auto report = run(make_sim_config(spec, p), run_options);
    row.arrived_measured = report.arrived;
    row.blocked = report.blocked;
    row.bp = report.bp;
    row.bbp = report.bbp;
    row.spectrum_efficiency = report.spectrum_efficiency;
    row.sim_seconds_modeled = report.measured_window.second - report.measured_window.first;
  } catch (const std::exception& e) {
    std::string msg = e.what();
    if (auto nl = msg.find('\n'); nl != std::string::npos) msg.resize(nl);
    row.status = "error: " + msg;
  }
  if (options.timing) {
    row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                            started)
                      .count();
  }
  return row;
}

struct Stats {
  std::size_t n = 0;
  double sum = 0.0;
  double sum_sq = 0.0;

  void add(const std::string& field) {
    if (field.empty()) return;
    double v = 0.0;
    std::from_chars(field.data(), field.data() + field.size(), v);
    ++n;
    sum += v;
    sum_sq += v * v;
  }
  std::string mean() const { return n ? format_double(sum / static_cast<double>(n)) : ""; }
  std::string standard_error() const {
    if (n < 2) return "";
    const double m = sum / static_cast<double>(n);
    const double var = std::max(0.0, (sum_sq - static_cast<double>(n) * m * m) /
                                         static_cast<double>(n - 1));
    return format_double(std::sqrt(var / static_cast<double>(n)));
  }
};

}  // namespace

std::vector<double> itu_grid(double max_ghz) {
  std::vector<double> out;
  for (int y = 1; 6.25 * y <= max_ghz + 1e-9; ++y) out.push_back(6.25 * y);
  return out;
}

std::vector<double> arithmetic_grid(double start, double stop, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("grid step must be positive");
  std::vector<double> out;
  for (int i = 0; start + step * i <= stop + 1e-9 * std::max(1.0, stop); ++i) {
    out.push_back(start + step * i);
  }
  return out;
}

std::size_t SweepSpec::run_count() const {
  return topologies.size() * slot_widths_ghz.size() * loads_erlang.size() *
         dist_variants.size() * seeds.size();
}

void SweepSpec::validate() const {
  if (topologies.empty()) throw ConfigError("topologies must not be empty");
  if (slot_widths_ghz.empty()) throw ConfigError("slot_widths_ghz must not be empty");
  if (loads_erlang.empty()) throw ConfigError("loads_erlang must not be empty");
  if (dist_variants.empty()) throw ConfigError("no distribution variants");
  if (seeds.empty()) throw ConfigError("seeds must not be empty");
  if (!(fixed.mu > 0.0)) throw ConfigError("mu must be positive");
  if (!(fixed.link_bandwidth_ghz > 0.0)) throw ConfigError("link_bandwidth_ghz must be positive");
  if (fixed.guard_ghz < 0.0) throw ConfigError("guard_ghz must be nonnegative");
  if (fixed.total_requests < 1) throw ConfigError("total_requests must be at least 1");
  if (fixed.warmup_multiplier < 0.0) throw ConfigError("warmup_multiplier must be nonnegative");
  for (const auto& t : topologies) {
    if (t.node_count() < 2) throw ConfigError("topology '" + t.name() + "' needs two nodes");
  }
}

SweepSpec parse_sweep_config(std::string_view text, const std::filesystem::path& base_dir) {
  const ConfigDocument doc(text);
  const auto require = [&](const char* key) -> const Entry& {
    const Entry* e = doc.find(key);
    if (!e) throw ConfigError(std::string("missing required key '") + key + "'");
    return *e;
  };

  SweepSpec spec;
  auto& f = spec.fixed;
  f.link_bandwidth_ghz = with_entry(doc, "link_bandwidth_ghz", [](const Entry& e) {
                           return parse_positive(e.value, e.line);
                         }).value_or(f.link_bandwidth_ghz);
  f.guard_ghz = with_entry(doc, "guard_ghz", [](const Entry& e) {
                  const double v = parse_real(e.value, e.line);
                  if (v < 0.0) ConfigDocument::fail(e.line, "guard_ghz must be nonnegative");
                  return v;
                }).value_or(f.guard_ghz);
  f.total_requests = with_entry(doc, "total_requests", [](const Entry& e) {
                       const auto v = parse_uint(e.value, e.line);
                       if (v < 1) ConfigDocument::fail(e.line, "total_requests must be >= 1");
                       return v;
                     }).value_or(f.total_requests);
  f.warmup_multiplier = with_entry(doc, "warmup_multiplier", [](const Entry& e) {
                          const double v = parse_real(e.value, e.line);
                          if (v < 0.0) ConfigDocument::fail(e.line, "must be nonnegative");
                          return v;
                        }).value_or(f.warmup_multiplier);
  f.mu = with_entry(doc, "mu", [](const Entry& e) { return parse_positive(e.value, e.line); })
             .value_or(f.mu);
  f.master_seed =
      with_entry(doc, "master_seed", [](const Entry& e) { return parse_uint(e.value, e.line); })
          .value_or(f.master_seed);
  f.routing_metric = with_entry(doc, "routing_metric", [](const Entry& e) {
                       try {
                         return parse_routing_metric(e.value);
                       } catch (const std::invalid_argument& ex) {
                         ConfigDocument::fail(e.line, ex.what());
                       }
                     }).value_or(f.routing_metric);

  const Entry& topo = require("topologies");
  for (auto tok : split(topo.value, ',')) {
    if (tok.empty()) ConfigDocument::fail(topo.line, "empty topology name");
    try {
      if (is_builtin_topology(tok)) {
        spec.topologies.push_back(builtin_topology(tok, f.link_bandwidth_ghz));
      } else {
        std::filesystem::path p{std::string(tok)};
        if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
        spec.topologies.push_back(load_topology_file(p.string(), f.link_bandwidth_ghz));
      }
    } catch (const TopologyError& e) {
      ConfigDocument::fail(topo.line, e.what());
    }
  }
  spec.slot_widths_ghz = parse_slot_widths(require("slot_widths_ghz"));
  spec.loads_erlang = sorted_unique(positive_list(require("loads_erlang")));
  if (const Entry* e = doc.find("seeds")) {
    std::vector<std::uint64_t> seeds;
    for (auto tok : split(e->value, ',')) seeds.push_back(parse_uint(tok, e->line));
    std::sort(seeds.begin(), seeds.end());
    seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
    spec.seeds = std::move(seeds);
  }
  spec.dist_variants = parse_distributions(doc);
  spec.validate();
  return spec;
}

SweepSpec load_sweep_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_sweep_config(buf.str(), path.parent_path());
}

std::vector<std::string> preset_names() { return bundled::preset_names(); }

std::optional<std::string_view> preset_config(std::string_view name) {
  return bundled::preset_source(name);
}

std::vector<RunPoint> enumerate_runs(const SweepSpec& spec) {
  std::vector<RunPoint> out;
  out.reserve(spec.run_count());
  for (std::size_t t = 0; t < spec.topologies.size(); ++t) {
    for (std::size_t d = 0; d < spec.dist_variants.size(); ++d) {
      for (double load : spec.loads_erlang) {
        for (double w : spec.slot_widths_ghz) {
          for (auto seed : spec.seeds) out.push_back(RunPoint{t, w, load, d, seed});
        }
      }
    }
  }
  return out;
}

SimConfig make_sim_config(const SweepSpec& spec, const RunPoint& point) {
  const auto& f = spec.fixed;
  const Topology& topo = spec.topologies.at(point.topology);
  SimConfig c(topo);
  c.slot_width_ghz = point.slot_width_ghz;
  c.link_bandwidth_ghz = f.link_bandwidth_ghz;
  c.guard_ghz = f.guard_ghz;
  c.dist = spec.dist_variants.at(point.dist);
  c.traffic = TrafficParams{point.load_erlang * f.mu, f.mu, topo.node_count()};
  c.total_requests = f.total_requests;
  c.warmup_multiplier = f.warmup_multiplier;
  c.master_seed = f.master_seed;
  c.run_index = point.seed;
  c.routing_metric = f.routing_metric;
  return c;
}

std::vector<ResultRow> run_sweep_rows(const SweepSpec& spec, const SweepOptions& options) {
  spec.validate();
  const auto points = enumerate_runs(spec);
  std::vector<ResultRow> rows(points.size());
  std::size_t workers = std::max<std::size_t>(1, options.parallelism);
  if (options.trace != nullptr) workers = 1;
  workers = std::min(workers, std::max<std::size_t>(1, points.size()));

  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      rows[i] = run_one(spec, points[i], options);
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(work);
  }
  return rows;
}

std::string run_sweep(const SweepSpec& spec, std::size_t parallelism) {
  return to_csv(run_sweep_rows(spec, SweepOptions{parallelism}));
}

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> columns{
      "topology",        "slot_width_ghz",      "load_erlang_per_node", "dist",
      "dist_param1",     "dist_param2",         "guard_ghz",            "link_bandwidth_ghz",
      "total_requests",  "seed",                "arrived_measured",     "blocked",
      "bp",              "bbp",                 "spectrum_efficiency",  "sim_seconds_modeled",
      "wall_ms",         "status"};
  return columns;
}

std::string to_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream out;
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const auto& r : rows) {
    const std::vector<std::string> fields{
        r.topology,
        format_double(r.slot_width_ghz),
        format_double(r.load_erlang_per_node),
        r.dist,
        r.dist_param1,
        r.dist_param2,
        format_double(r.guard_ghz),
        format_double(r.link_bandwidth_ghz),
        std::to_string(r.total_requests),
        std::to_string(r.seed),
        std::to_string(r.arrived_measured),
        std::to_string(r.blocked),
        opt_field(r.bp),
        opt_field(r.bbp),
        opt_field(r.spectrum_efficiency),
        format_double(r.sim_seconds_modeled),
        opt_field(r.wall_ms),
        r.status};
    for (std::size_t i = 0; i < fields.size(); ++i) out << (i ? "," : "") << csv_field(fields[i]);
    out << '\n';
  }
  return out.str();
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n') {
      record.push_back(std::move(field));
      field.clear();
      records.push_back(std::move(record));
      record.clear();
      any = false;
    } else if (c != '\r') {
      field += c;
      any = true;
    }
  }
  if (quoted) throw ConfigError("csv: unterminated quoted field");
  if (any) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  return records;
}

std::string aggregate_csv(std::string_view sweep_csv) {
  const auto records = parse_csv(sweep_csv);
  if (records.empty() || records.front() != csv_columns()) {
    throw ConfigError("aggregate: input is not a sweep CSV (header mismatch)");
  }
  const auto col = [&](const char* name) {
    const auto& cols = csv_columns();
    return static_cast<std::size_t>(std::find(cols.begin(), cols.end(), name) - cols.begin());
  };
  const std::size_t key_columns = col("seed");
  const std::size_t bp = col("bp"), bbp = col("bbp"), se = col("spectrum_efficiency");
  const std::size_t status = col("status");

  struct Group {
    std::vector<std::string> key;
    std::size_t runs = 0;
    std::size_t errors = 0;
    Stats bp, bbp, se;
  };
  std::vector<Group> groups;
  std::map<std::vector<std::string>, std::size_t> index;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.size() != csv_columns().size()) {
      throw ConfigError("aggregate: row " + std::to_string(r + 1) + " has " +
                        std::to_string(rec.size()) + " fields");
    }
    std::vector<std::string> key(rec.begin(), rec.begin() + static_cast<long>(key_columns));
    auto [it, inserted] = index.emplace(key, groups.size());
    if (inserted) {
      groups.emplace_back();
      groups.back().key = std::move(key);
    }
    Group& g = groups[it->second];
    ++g.runs;
    if (rec[status] != "ok") {
      ++g.errors;
      continue;
    }
    g.bp.add(rec[bp]);
    g.bbp.add(rec[bbp]);
    g.se.add(rec[se]);
  }

  std::ostringstream out;
  for (std::size_t i = 0; i < key_columns; ++i) out << csv_columns()[i] << ',';
  out << "runs,errors,bp_mean,bp_se,bbp_mean,bbp_se,spectrum_efficiency_mean,"
         "spectrum_efficiency_se\n";
  for (const auto& g : groups) {
    for (const auto& k : g.key) out << csv_field(k) << ',';
    out << g.runs << ',' << g.errors << ',' << g.bp.mean() << ',' << g.bp.standard_error() << ','
        << g.bbp.mean() << ',' << g.bbp.standard_error() << ',' << g.se.mean() << ','
        << g.se.standard_error() << '\n';
  }
  return out.str();
}

}  // namespace flexgrid
