#include "cdfband/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "cdfband/bands.hpp"

namespace cdfband::cli {

namespace {

constexpr int kSchemaVersion = 1;

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    if (pos == std::string::npos) {
      parts.push_back(text.substr(start));
      return parts;
    }
    parts.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

double parse_double(const std::string& key, const std::string& text) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(text, &pos);
    if (pos != text.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument(key + " expects a number, got '" + text + "'");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& text) {
  try {
    if (text.find('-') != std::string::npos) throw std::invalid_argument("");
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(text, &pos);
    if (pos != text.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument(key + " expects an unsigned integer, got '" +
                                text + "'");
  }
}

std::vector<double> parse_double_list(const std::string& key,
                                      const std::string& text) {
  std::vector<double> out;
  for (const auto& part : split(text, ','))
    out.push_back(parse_double(key, trim(part)));
  return out;
}

std::vector<std::uint64_t> parse_u64_list(const std::string& key,
                                          const std::string& text) {
  std::vector<std::uint64_t> out;
  for (const auto& part : split(text, ','))
    out.push_back(parse_u64(key, trim(part)));
  return out;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// One table cell: a double, an integer, or a label.
struct Cell {
  enum class Type { number, integer, text };
  Type type = Type::number;
  double num = 0.0;
  std::int64_t inum = 0;
  std::string str;

  static Cell number(double v) {
    Cell c;
    c.type = Type::number;
    c.num = v;
    return c;
  }
  static Cell integer(std::int64_t v) {
    Cell c;
    c.type = Type::integer;
    c.inum = v;
    return c;
  }
  static Cell text(std::string v) {
    Cell c;
    c.type = Type::text;
    c.str = std::move(v);
    return c;
  }

  std::string to_text() const {
    switch (type) {
      case Type::number: return format_double(num);
      case Type::integer: return std::to_string(inum);
      case Type::text: return str;
    }
    return "";
  }
};

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  std::vector<std::pair<std::string, Cell>> summary;
};

std::vector<double> resolved_eps(const RunConfig& config) {
  if (!config.sweep_eps.empty()) return config.sweep_eps;
  std::vector<double> eps;
  for (int k = 4; k <= 9; ++k) eps.push_back(std::ldexp(1.0, -k));
  return eps;
}

std::string join_u64(const std::vector<std::uint64_t>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i > 0) out += ',';
    out += std::to_string(xs[i]);
  }
  return out;
}

std::string join_doubles(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i > 0) out += ',';
    out += format_double(xs[i]);
  }
  return out;
}

// Full configuration echo in a fixed order; list-valued entries are the
// resolved values the run actually used.
std::vector<std::pair<std::string, std::string>> config_echo(
    const RunConfig& c) {
  std::vector<std::pair<std::string, std::string>> echo;
  echo.emplace_back("command", c.command);
  echo.emplace_back("generator", to_string(c.generator.kind));
  echo.emplace_back("beta_a", format_double(c.generator.beta_a));
  echo.emplace_back("beta_b", format_double(c.generator.beta_b));
  echo.emplace_back("mu", format_double(c.generator.mu));
  echo.emplace_back("sigma", format_double(c.generator.sigma));
  echo.emplace_back("eps", format_double(c.generator.eps));
  echo.emplace_back("polya_exponent", format_double(c.generator.polya_exponent));
  echo.emplace_back("polya_scale", format_double(c.generator.polya_scale));
  echo.emplace_back("w_max", format_double(c.generator.w_max));
  echo.emplace_back("law", to_string(c.generator.law));
  echo.emplace_back("seed", std::to_string(c.generator.seed));
  echo.emplace_back("horizon", std::to_string(c.generator.horizon));
  echo.emplace_back("oracle", to_string(c.oracle));
  echo.emplace_back("tau", format_double(c.tau));
  echo.emplace_back("prior_b", format_double(c.prior_b));
  echo.emplace_back("alpha", format_double(c.alpha));
  echo.emplace_back("grid", c.grid.echo());
  echo.emplace_back("checks", join_u64(resolved_checks(c)));
  echo.emplace_back("seeds", std::to_string(c.seeds));
  echo.emplace_back("format", c.format);
  echo.emplace_back("out", c.out);
  echo.emplace_back("sweep_t_ref", std::to_string(c.sweep_t_ref));
  echo.emplace_back("sweep_eps", join_doubles(resolved_eps(c)));
  return echo;
}

void write_csv(std::ostream& os, const RunConfig& config, const Table& table) {
  os << "#schema=" << kSchemaVersion << "\n";
  for (const auto& [key, value] : config_echo(config))
    os << "#" << key << "=" << value << "\n";
  for (const auto& [key, cell] : table.summary)
    os << "#" << key << "=" << cell.to_text() << "\n";
  for (std::size_t i = 0; i < table.columns.size(); ++i)
    os << (i > 0 ? "," : "") << table.columns[i];
  os << "\n";
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      os << (i > 0 ? "," : "") << row[i].to_text();
    os << "\n";
  }
}

void write_json(std::ostream& os, const RunConfig& config, const Table& table) {
  nlohmann::json j;
  j["schema"] = kSchemaVersion;
  nlohmann::json cfg = nlohmann::json::object();
  for (const auto& [key, value] : config_echo(config)) cfg[key] = value;
  j["config"] = cfg;
  nlohmann::json summary = nlohmann::json::object();
  for (const auto& [key, cell] : table.summary) {
    switch (cell.type) {
      case Cell::Type::number: summary[key] = cell.num; break;
      case Cell::Type::integer: summary[key] = cell.inum; break;
      case Cell::Type::text: summary[key] = cell.str; break;
    }
  }
  j["summary"] = summary;
  j["columns"] = table.columns;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : table.rows) {
    nlohmann::json r = nlohmann::json::array();
    for (const auto& cell : row) {
      switch (cell.type) {
        case Cell::Type::number: r.push_back(cell.num); break;
        case Cell::Type::integer: r.push_back(cell.inum); break;
        case Cell::Type::text: r.push_back(cell.str); break;
      }
    }
    rows.push_back(std::move(r));
  }
  j["rows"] = std::move(rows);
  os << j.dump(2) << "\n";
}

OracleParams make_params(const RunConfig& config) {
  OracleParams params;
  params.tau = config.tau;
  params.prior_b = config.prior_b;
  return params;
}

// --- commands -------------------------------------------------------------------

Table cmd_band(const RunConfig& config) {
  const auto grid = config.grid.materialize(config.generator);
  const auto checks = resolved_checks(config);
  const auto params = make_params(config);
  const Domain domain = natural_domain(config.generator.kind);
  Generator gen(config.generator);
  gen.truth().attach_grid(grid);
  WeightedStreamStats stats;
  Table table;
  table.columns = {"t",     "v",     "lower",     "upper",
                   "empirical_cdf", "truth", "depth_used"};
  std::size_t next = 0;
  for (std::uint64_t t = 1;
       t <= config.generator.horizon && next < checks.size(); ++t) {
    const auto step = gen.step();
    stats.update(step.first, step.second);
    if (t != checks[next]) continue;
    ++next;
    const FrozenOracle oracle(config.oracle, stats.freeze(), params);
    const auto curve = band_curve(grid, config.alpha, oracle, domain);
    for (std::size_t p = 0; p < curve.size(); ++p) {
      const double head = oracle.frozen().head_leq(grid[p]).sum_y;
      const double ecdf = std::min(1.0, head / static_cast<double>(t));
      table.rows.push_back({Cell::integer(static_cast<std::int64_t>(t)),
                            Cell::number(grid[p]), Cell::number(curve[p].lower),
                            Cell::number(curve[p].upper), Cell::number(ecdf),
                            Cell::number(gen.truth().at_grid(p)),
                            Cell::integer(curve[p].depth)});
    }
  }
  return table;
}

Table cmd_simulate(const RunConfig& config) {
  Generator gen(config.generator);
  Table table;
  table.columns = {"t", "weight", "value"};
  for (std::uint64_t t = 1; t <= config.generator.horizon; ++t) {
    const auto step = gen.step();
    table.rows.push_back({Cell::integer(static_cast<std::int64_t>(t)),
                          Cell::number(step.first), Cell::number(step.second)});
  }
  return table;
}

Table cmd_coverage(const RunConfig& config) {
  CoverageConfig cc;
  cc.generator = config.generator;
  cc.alpha = config.alpha;
  cc.oracle = config.oracle;
  cc.params = make_params(config);
  cc.domain = natural_domain(config.generator.kind);
  cc.probes = config.grid.materialize(config.generator);
  cc.check_times = resolved_checks(config);
  cc.num_seeds = config.seeds;
  const auto report = coverage_mc(cc);
  Table table;
  table.columns = {"seed", "failed", "worst_margin"};
  for (std::uint64_t i = 0; i < report.num_seeds; ++i) {
    const double margin = report.worst_margins[i];
    table.rows.push_back(
        {Cell::integer(static_cast<std::int64_t>(config.generator.seed + i)),
         Cell::integer(margin > kCoverageGrace ? 1 : 0), Cell::number(margin)});
  }
  const auto [wilson_lo, wilson_hi] = report.wilson_interval();
  table.summary.emplace_back(
      "failures", Cell::integer(static_cast<std::int64_t>(report.failures)));
  table.summary.emplace_back("failure_fraction",
                             Cell::number(report.failure_fraction()));
  table.summary.emplace_back("wilson_lo", Cell::number(wilson_lo));
  table.summary.emplace_back("wilson_hi", Cell::number(wilson_hi));
  table.summary.emplace_back(
      "checks_per_seed",
      Cell::integer(static_cast<std::int64_t>(report.checks_per_seed)));
  return table;
}

Table cmd_compare_oracles(const RunConfig& config) {
  const auto grid = config.grid.materialize(config.generator);
  const auto params = make_params(config);
  Table table;
  table.columns = {"oracle", "seed", "max_width", "argmax_value",
                   "wallclock_ms"};
  for (std::uint64_t i = 0; i < config.seeds; ++i) {
    GeneratorConfig g = config.generator;
    g.seed = config.generator.seed + i;
    Generator gen(g);
    WeightedStreamStats stats;
    for (std::uint64_t t = 1; t <= g.horizon; ++t) {
      const auto step = gen.step();
      stats.update(step.first, step.second);
    }
    const auto frozen = stats.freeze();
    for (const OracleKind kind :
         {OracleKind::ddrm, OracleKind::empirical_bernstein}) {
      const auto report =
          measure_oracle_width(kind, frozen, grid, config.alpha, params);
      table.rows.push_back({Cell::text(to_string(kind)),
                            Cell::integer(static_cast<std::int64_t>(g.seed)),
                            Cell::number(report.max_width),
                            Cell::number(report.argmax_value),
                            Cell::number(report.wallclock_ms)});
    }
  }
  return table;
}

Table cmd_sweep(const RunConfig& config) {
  const auto result = run_sweep(config.generator.seed, config.alpha,
                                config.sweep_t_ref, resolved_eps(config));
  Table table;
  table.columns = {"eps", "t_star", "multiplier", "converged"};
  for (const auto& row : result.rows)
    table.rows.push_back({Cell::number(row.eps),
                          Cell::integer(static_cast<std::int64_t>(row.t_star)),
                          Cell::number(row.multiplier),
                          Cell::integer(row.converged ? 1 : 0)});
  table.summary.emplace_back(
      "t_ref", Cell::integer(static_cast<std::int64_t>(config.sweep_t_ref)));
  table.summary.emplace_back("ref_width", Cell::number(result.ref_width));
  return table;
}

// Probes adapted to the jump scale of the uniform-on-[0, eps] stream: a fine
// linear grid across the support plus geometric probes above it, so the
// maximal width is measured comparably for every eps.
std::vector<double> sweep_probes(double eps) {
  std::vector<double> probes;
  for (int i = 1; i <= 128; ++i) probes.push_back(eps * i / 128.0);
  for (double v = 2.0 * eps; v < 1.0; v *= 2.0) probes.push_back(v);
  return probes;
}

double max_band_width(const WeightedStreamStats& stats,
                      const std::vector<double>& probes, double alpha) {
  const FrozenOracle oracle(OracleKind::bernoulli, stats.freeze());
  const auto curve = band_curve(probes, alpha, oracle, Domain::unit);
  double width = 0.0;
  for (const auto& point : curve)
    width = std::max(width, point.upper - point.lower);
  return width;
}

// Geometric scan grid: t_ref/4 * 2^(k/8) for k = 0, 1, ...; includes t_ref
// exactly and stops past 64 t_ref.
std::vector<std::uint64_t> sweep_scan_times(std::uint64_t t_ref) {
  std::vector<std::uint64_t> times;
  const double base = static_cast<double>(t_ref) / 4.0;
  for (int k = 0;; ++k) {
    const double t = base * std::pow(2.0, k / 8.0);
    if (t > 64.0 * static_cast<double>(t_ref) + 0.5) break;
    const auto rounded = static_cast<std::uint64_t>(std::llround(t));
    if (times.empty() || rounded > times.back()) times.push_back(rounded);
  }
  return times;
}

}  // namespace

// --- grid spec ------------------------------------------------------------------

GridSpec GridSpec::parse(const std::string& text) {
  const std::string spec = trim(text);
  if (spec.empty()) throw std::invalid_argument("grid spec must be nonempty");
  GridSpec grid;
  if (spec.rfind("list:", 0) == 0) {
    grid.values = parse_double_list("grid", spec.substr(5));
    grid.count = grid.values.size();
    return grid;
  }
  const auto parts = split(spec, ':');
  if (parts.size() == 1) {
    grid.count = parse_u64("grid", trim(parts[0]));
    return grid;
  }
  if (parts.size() == 3) {
    grid.count = parse_u64("grid", trim(parts[0]));
    grid.lo = parse_double("grid", trim(parts[1]));
    grid.hi = parse_double("grid", trim(parts[2]));
    grid.has_range = true;
    return grid;
  }
  throw std::invalid_argument("grid expects 'N', 'N:lo:hi', or 'list:v1,...'");
}

std::vector<double> GridSpec::materialize(
    const GeneratorConfig& generator) const {
  if (!values.empty()) return values;
  double range_lo = lo;
  double range_hi = hi;
  if (!has_range) {
    if (natural_domain(generator.kind) == Domain::unit) {
      range_lo = 0.0;
      range_hi = 1.0;
    } else if (generator.kind == GeneratorKind::iid_gaussian) {
      range_lo = generator.mu - 4.0 * generator.sigma;
      range_hi = generator.mu + 4.0 * generator.sigma;
    } else {
      range_lo = std::exp(generator.mu - 4.0 * generator.sigma);
      range_hi = std::exp(generator.mu + 4.0 * generator.sigma);
    }
  }
  std::vector<double> grid;
  grid.reserve(count);
  for (std::size_t i = 1; i <= count; ++i)
    grid.push_back(range_lo + (range_hi - range_lo) * static_cast<double>(i) /
                                  static_cast<double>(count + 1));
  return grid;
}

std::string GridSpec::echo() const {
  if (!values.empty()) return "list:" + join_doubles(values);
  if (has_range)
    return std::to_string(count) + ":" + format_double(lo) + ":" +
           format_double(hi);
  return std::to_string(count);
}

// --- configuration --------------------------------------------------------------

void apply_assignment(RunConfig& config, const std::string& raw_key,
                      const std::string& raw_value) {
  const std::string key = trim(raw_key);
  const std::string value = trim(raw_value);
  if (key == "command") {
    config.command = value;
  } else if (key == "generator") {
    if (!generator_kind_from_string(value, &config.generator.kind))
      throw std::invalid_argument("unknown generator: " + value);
  } else if (key == "beta_a") {
    config.generator.beta_a = parse_double(key, value);
  } else if (key == "beta_b") {
    config.generator.beta_b = parse_double(key, value);
  } else if (key == "mu") {
    config.generator.mu = parse_double(key, value);
  } else if (key == "sigma") {
    config.generator.sigma = parse_double(key, value);
  } else if (key == "eps") {
    config.generator.eps = parse_double(key, value);
  } else if (key == "polya_exponent") {
    config.generator.polya_exponent = parse_double(key, value);
  } else if (key == "polya_scale") {
    config.generator.polya_scale = parse_double(key, value);
  } else if (key == "w_max") {
    config.generator.w_max = parse_double(key, value);
  } else if (key == "law") {
    if (!weight_law_from_string(value, &config.generator.law))
      throw std::invalid_argument("unknown weight law: " + value);
  } else if (key == "seed") {
    config.generator.seed = parse_u64(key, value);
  } else if (key == "horizon") {
    config.generator.horizon = parse_u64(key, value);
  } else if (key == "oracle") {
    if (!oracle_kind_from_string(value, &config.oracle))
      throw std::invalid_argument("unknown oracle: " + value);
  } else if (key == "tau") {
    config.tau = parse_double(key, value);
  } else if (key == "prior_b") {
    config.prior_b = parse_double(key, value);
  } else if (key == "alpha") {
    config.alpha = parse_double(key, value);
  } else if (key == "grid") {
    config.grid = GridSpec::parse(value);
  } else if (key == "checks") {
    config.checks = parse_u64_list(key, value);
  } else if (key == "seeds") {
    config.seeds = parse_u64(key, value);
  } else if (key == "out") {
    config.out = value;
  } else if (key == "format") {
    config.format = value;
  } else if (key == "sweep_t_ref") {
    config.sweep_t_ref = parse_u64(key, value);
  } else if (key == "sweep_eps") {
    config.sweep_eps = parse_double_list(key, value);
  } else {
    throw std::invalid_argument("unknown config key: " + key);
  }
}

void load_config_file(RunConfig& config, const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("cannot open config file: " + path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(path + ":" + std::to_string(line_no) +
                                  ": expected key=value");
    apply_assignment(config, stripped.substr(0, eq), stripped.substr(eq + 1));
  }
}

void RunConfig::validate() const {
  static const char* kCommands[] = {"band", "simulate", "sweep",
                                    "compare-oracles", "coverage"};
  if (std::find_if(std::begin(kCommands), std::end(kCommands),
                   [&](const char* c) { return command == c; }) ==
      std::end(kCommands))
    throw std::invalid_argument("unknown command: " + command);
  generator.validate();
  if (!(tau > 0.0) || !std::isfinite(tau))
    throw std::invalid_argument("tau must be positive and finite");
  if (!(prior_b > 0.0) || !std::isfinite(prior_b))
    throw std::invalid_argument("prior_b must be positive and finite");
  if (std::isnan(alpha) || alpha <= 0.0 || alpha > 1.0)
    throw std::invalid_argument("alpha must lie in (0, 1]");
  if (format != "csv" && format != "json")
    throw std::invalid_argument("format must be csv or json");
  if (out.empty()) throw std::invalid_argument("output path required");
  for (const std::uint64_t c : checks)
    if (c == 0) throw std::invalid_argument("check times must be positive");
  if (seeds == 0) throw std::invalid_argument("need at least one seed");
  if (sweep_t_ref < 100 || sweep_t_ref % 4 != 0)
    throw std::invalid_argument(
        "sweep_t_ref must be a multiple of 4, at least 100");
  for (const double e : sweep_eps)
    if (!(e > 0.0) || !(e <= 1.0))
      throw std::invalid_argument("sweep_eps entries must lie in (0, 1]");
  if (!grid.values.empty()) {
    for (std::size_t i = 0; i < grid.values.size(); ++i) {
      if (!std::isfinite(grid.values[i]))
        throw std::invalid_argument("grid values must be finite");
      if (i > 0 && !(grid.values[i - 1] < grid.values[i]))
        throw std::invalid_argument("grid values must be strictly increasing");
    }
  } else {
    if (grid.count == 0) throw std::invalid_argument("grid count must be positive");
    if (grid.has_range &&
        (!std::isfinite(grid.lo) || !std::isfinite(grid.hi) ||
         !(grid.lo < grid.hi)))
      throw std::invalid_argument("grid range must satisfy lo < hi");
  }
  if (command == "compare-oracles" &&
      generator.kind != GeneratorKind::iid_iw &&
      generator.kind != GeneratorKind::iw_polya)
    throw std::invalid_argument(
        "compare-oracles requires an importance-weighted generator");
}

std::vector<std::uint64_t> resolved_checks(const RunConfig& config) {
  std::vector<std::uint64_t> checks;
  if (config.checks.empty()) {
    for (std::uint64_t t = 100; t < config.generator.horizon; t *= 10)
      checks.push_back(t);
    checks.push_back(config.generator.horizon);
  } else {
    for (const std::uint64_t c : config.checks)
      if (c <= config.generator.horizon) checks.push_back(c);
    std::sort(checks.begin(), checks.end());
    checks.erase(std::unique(checks.begin(), checks.end()), checks.end());
    if (checks.empty()) checks.push_back(config.generator.horizon);
  }
  return checks;
}

// --- engines --------------------------------------------------------------------

OracleWidthReport measure_oracle_width(OracleKind kind,
                                       const FrozenTailStats& frozen,
                                       const std::vector<double>& grid,
                                       double alpha,
                                       const OracleParams& params) {
  if (grid.empty()) throw std::invalid_argument("grid required");
  const FrozenOracle oracle(kind, frozen, params);
  OracleWidthReport report;
  report.max_width = -1.0;
  const auto start = std::chrono::steady_clock::now();
  for (const double v : grid) {
    const double lower = oracle.lower(v, alpha / 2.0);
    const double upper = oracle.upper(v, alpha / 2.0);
    const double width = upper - lower;
    if (width > report.max_width) {
      report.max_width = width;
      report.argmax_value = v;
    }
  }
  report.wallclock_ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - start)
                            .count();
  return report;
}

SweepResult run_sweep(std::uint64_t base_seed, double alpha,
                      std::uint64_t t_ref,
                      const std::vector<double>& eps_list) {
  if (std::isnan(alpha) || alpha <= 0.0 || alpha > 1.0)
    throw std::invalid_argument("alpha must lie in (0, 1]");
  if (t_ref < 100 || t_ref % 4 != 0)
    throw std::invalid_argument(
        "sweep reference time must be a multiple of 4, at least 100");
  if (eps_list.empty()) throw std::invalid_argument("eps list required");
  for (const double e : eps_list)
    if (!(e > 0.0) || !(e <= 1.0))
      throw std::invalid_argument("eps entries must lie in (0, 1]");

  const double ref_eps = 1.0 / 16.0;
  SweepResult result;
  {
    GeneratorConfig g;
    g.kind = GeneratorKind::iid_uniform_eps;
    g.eps = ref_eps;
    g.seed = base_seed;
    g.horizon = t_ref;
    Generator gen(g);
    WeightedStreamStats stats;
    for (std::uint64_t t = 1; t <= t_ref; ++t) {
      const auto step = gen.step();
      stats.update(step.first, step.second);
    }
    result.ref_width = max_band_width(stats, sweep_probes(ref_eps), alpha);
  }

  const auto scans = sweep_scan_times(t_ref);
  for (const double eps : eps_list) {
    const auto probes = sweep_probes(eps);
    GeneratorConfig g;
    g.kind = GeneratorKind::iid_uniform_eps;
    g.eps = eps;
    g.seed = base_seed;
    g.horizon = scans.back();
    Generator gen(g);
    WeightedStreamStats stats;
    SweepRow row;
    row.eps = eps;
    std::size_t next = 0;
    for (std::uint64_t t = 1;
         t <= g.horizon && next < scans.size() && !row.converged; ++t) {
      const auto step = gen.step();
      stats.update(step.first, step.second);
      if (t != scans[next]) continue;
      ++next;
      if (max_band_width(stats, probes, alpha) <= result.ref_width) {
        row.converged = true;
        row.t_star = t;
        row.multiplier = static_cast<double>(t) / static_cast<double>(t_ref);
      }
    }
    result.rows.push_back(row);
  }
  return result;
}

// --- dispatch -------------------------------------------------------------------

int run(const RunConfig& config, std::ostream& err) {
  try {
    config.validate();
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  }
  const std::string tmp_path = config.out + ".tmp";
  try {
    Table table;
    if (config.command == "band") table = cmd_band(config);
    else if (config.command == "simulate") table = cmd_simulate(config);
    else if (config.command == "sweep") table = cmd_sweep(config);
    else if (config.command == "compare-oracles") table = cmd_compare_oracles(config);
    else table = cmd_coverage(config);
    {
      std::ofstream os(tmp_path, std::ios::binary | std::ios::trunc);
      if (!os) throw std::runtime_error("cannot open output file: " + tmp_path);
      if (config.format == "csv") write_csv(os, config, table);
      else write_json(os, config, table);
      os.flush();
      if (!os) throw std::runtime_error("write failed: " + tmp_path);
    }
    if (std::rename(tmp_path.c_str(), config.out.c_str()) != 0)
      throw std::runtime_error("cannot move output into place: " + config.out);
    return 0;
  } catch (const std::exception& e) {
    std::remove(tmp_path.c_str());
    err << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace cdfband::cli
