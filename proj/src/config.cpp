#include "chq/config.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <regex>
#include <set>
#include <sstream>
#include <thread>

namespace chq {

ChoquardParams RunConfig::params() const {
  if (p) return ChoquardParams(dim, alpha, *p);
  return ChoquardParams::mass_critical(dim, alpha);
}

std::optional<PotentialSpec> RunConfig::potential() const {
  if (wells.empty()) return std::nullopt;
  return PotentialSpec(dim, wells);
}

Grid RunConfig::grid() const { return Grid(dim, grid_M, grid_L); }

namespace {

std::string trim(std::string s) {
  const char* ws = " \t\r";
  s.erase(0, s.find_first_not_of(ws));
  s.erase(s.find_last_not_of(ws) + 1);
  return s;
}

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double to_double(const std::string& s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ConfigError("expects a number, got '" + s + "'");
  return v;
}

long long to_int(const std::string& s) {
  long long v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ConfigError("expects an integer, got '" + s + "'");
  return v;
}

bool to_bool(const std::string& s) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw ConfigError("expects true or false, got '" + s + "'");
}

std::vector<double> to_list(const std::string& s) {
  std::vector<double> out;
  if (trim(s).empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(trim(item)));
  return out;
}

std::string list_text(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + fmt(v[i]);
  return out;
}

struct Key {
  std::string name;
  std::string help;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define DOUBLE_KEY(NAME, FIELD, HELP) \
  Key{NAME, HELP, [](RunConfig& c, const std::string& v) { c.FIELD = to_double(v); }, \
      [](const RunConfig& c) { return fmt(c.FIELD); }}
#define INT_KEY(NAME, FIELD, HELP) \
  Key{NAME, HELP, [](RunConfig& c, const std::string& v) { c.FIELD = static_cast<int>(to_int(v)); }, \
      [](const RunConfig& c) { return std::to_string(c.FIELD); }}
#define BOOL_KEY(NAME, FIELD, HELP) \
  Key{NAME, HELP, [](RunConfig& c, const std::string& v) { c.FIELD = to_bool(v); }, \
      [](const RunConfig& c) { return std::string(c.FIELD ? "true" : "false"); }}
#define LIST_KEY(NAME, FIELD, HELP) \
  Key{NAME, HELP, [](RunConfig& c, const std::string& v) { c.FIELD = to_list(v); }, \
      [](const RunConfig& c) { return list_text(c.FIELD); }}

const std::vector<Key>& keys() {
  static const std::vector<Key> k = {
      INT_KEY("dim", dim, "space dimension N (1, 2 or 3)"),
      DOUBLE_KEY("alpha", alpha, "Riesz order, 0 < alpha < N"),
      Key{"p", "exponent; 'critical' means (N+alpha+2)/N",
          [](RunConfig& c, const std::string& v) {
            if (v == "critical") c.p.reset();
            else c.p = to_double(v);
          },
          [](const RunConfig& c) { return c.p ? fmt(*c.p) : std::string("critical"); }},
      INT_KEY("grid.M", grid_M, "points per axis, power of two >= 8"),
      DOUBLE_KEY("grid.L", grid_L, "box side length"),
      Key{"scheme", "convolution scheme: free or periodic",
          [](RunConfig& c, const std::string& v) {
            if (v == "free") c.scheme = RieszScheme::FreeSpace;
            else if (v == "periodic") c.scheme = RieszScheme::Periodic;
            else throw ConfigError("expects free or periodic, got '" + v + "'");
            c.groundstate.scheme = c.flow.scheme = c.scheme;
          },
          [](const RunConfig& c) {
            return std::string(c.scheme == RieszScheme::FreeSpace ? "free" : "periodic");
          }},
      Key{"seed", "seed for randomized inputs",
          [](RunConfig& c, const std::string& v) {
            long long s = to_int(v);
            if (s < 0) throw ConfigError("expects a nonnegative integer, got '" + v + "'");
            c.seed = static_cast<std::uint64_t>(s);
          },
          [](const RunConfig& c) { return std::to_string(c.seed); }},
      INT_KEY("jobs", jobs, "worker threads; 0 picks min(schedule points, hardware threads)"),
      DOUBLE_KEY("groundstate.tol", groundstate.tol_residual, "Petviashvili residual tolerance"),
      INT_KEY("groundstate.max_iters", groundstate.max_iters, "Petviashvili iteration cap"),
      DOUBLE_KEY("groundstate.init_width", groundstate.init_width, "width of the Gaussian start"),
      DOUBLE_KEY("flow.step0", flow.step0, "initial step"),
      DOUBLE_KEY("flow.backtrack", flow.backtrack, "Armijo backtracking factor in (0, 1)"),
      DOUBLE_KEY("flow.tol_grad", flow.tol_grad, "relative tangential gradient tolerance"),
      DOUBLE_KEY("flow.stall_tol", flow.stall_tol, "gradient tolerance once the energy stalls"),
      INT_KEY("flow.max_iters", flow.max_iters, "flow iteration cap"),
      DOUBLE_KEY("flow.precond_shift", flow.precond_shift, "shift b of (-Lap + b)^-1"),
      BOOL_KEY("flow.conjugate", flow.conjugate, "Polak-Ribiere directions"),
      DOUBLE_KEY("flow.blowup_A_factor", flow.blowup_A_factor, "Blowup when A grows by this factor"),
      DOUBLE_KEY("flow.blowup_resolution_fraction", flow.blowup_resolution_fraction,
                 "Blowup when A/|u|^2 reaches this fraction of the grid limit"),
      DOUBLE_KEY("flow.vanish_boundary_mass", flow.vanish_boundary_mass,
                 "Vanishing when this much mass reaches the boundary shell"),
      DOUBLE_KEY("init_width", init_width, "width of the Gaussian start for flows"),
      DOUBLE_KEY("mass", mass, "target |u|_2 for minimize"),
      LIST_KEY("schedule.c", schedule, "comma-separated masses for sweep and concentrate"),
      BOOL_KEY("schedule.relative", schedule_relative, "schedule.c given as multiples of c*"),
      BOOL_KEY("schedule.continuation", continuation, "warm start each point from the previous"),
      LIST_KEY("study.s", s_list, "exponents s for profile distances in L^{2Ns/(N+alpha)}"),
      LIST_KEY("trichotomy.c", trichotomy_c, "masses for the trichotomy table"),
      LIST_KEY("trichotomy.p", trichotomy_p, "exponents for the trichotomy table"),
      Key{"output.dir", "directory for outputs",
          [](RunConfig& c, const std::string& v) {
            if (v.empty()) throw ConfigError("expects a path");
            c.out_dir = v;
          },
          [](const RunConfig& c) { return c.out_dir; }},
      Key{"output.format", "record format: csv or jsonl",
          [](RunConfig& c, const std::string& v) {
            if (v == "csv") c.format = OutputFormat::Csv;
            else if (v == "jsonl") c.format = OutputFormat::Jsonl;
            else throw ConfigError("expects csv or jsonl, got '" + v + "'");
          },
          [](const RunConfig& c) { return std::string(c.format == OutputFormat::Csv ? "csv" : "jsonl"); }},
  };
  return k;
}

const std::regex& well_key() {
  static const std::regex r(R"(potential\.well\.([1-9][0-9]*)\.(center|mu|q))");
  return r;
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& source) {
  RunConfig c;
  std::map<std::string, int> seen;
  struct PartialWell {
    std::optional<std::vector<double>> center;
    double mu = 1.0;
    double q = 2.0;
  };
  std::map<int, PartialWell> wells;

  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(lineno) + ": ";
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + "missing key");
    if (auto it = seen.find(key); it != seen.end())
      throw ConfigError(where + "duplicate key '" + key + "' (first set on line " +
                        std::to_string(it->second) + ")");
    seen[key] = lineno;
    try {
      std::smatch m;
      if (std::regex_match(key, m, well_key())) {
        PartialWell& w = wells[std::stoi(m[1])];
        if (m[2] == "center") w.center = to_list(value);
        else if (m[2] == "mu") w.mu = to_double(value);
        else w.q = to_double(value);
        continue;
      }
      auto k = std::find_if(keys().begin(), keys().end(), [&](const Key& x) { return x.name == key; });
      if (k == keys().end()) throw ConfigError("unknown key");
      k->set(c, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + "key '" + key + "': " + e.what());
    }
  }

  int expect = 1;
  for (auto& [idx, w] : wells) {
    if (idx != expect)
      throw ConfigError(source + ": potential wells must be numbered 1, 2, ... without gaps (missing " +
                        std::to_string(expect) + ")");
    if (!w.center)
      throw ConfigError(source + ": key 'potential.well." + std::to_string(idx) + ".center' is required");
    c.wells.push_back(Well{*w.center, w.mu, w.q});
    ++expect;
  }
  validate(c);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

std::string write_config(const RunConfig& c) {
  std::ostringstream os;
  for (const Key& k : keys()) os << k.name << " = " << k.get(c) << "\n";
  for (std::size_t i = 0; i < c.wells.size(); ++i) {
    const std::string pre = "potential.well." + std::to_string(i + 1) + ".";
    os << pre << "center = " << list_text(c.wells[i].center) << "\n";
    os << pre << "mu = " << fmt(c.wells[i].mu) << "\n";
    os << pre << "q = " << fmt(c.wells[i].q) << "\n";
  }
  return os.str();
}

void validate(const RunConfig& c) {
  auto wrap = [](const std::string& field, auto&& f) {
    try {
      f();
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(field + ": " + e.what());
    }
  };
  if (c.dim < 1 || c.dim > 3) throw ConfigError("dim: must be 1, 2 or 3, got " + std::to_string(c.dim));
  if (!(c.alpha > 0.0 && c.alpha < c.dim))
    throw ConfigError("alpha: must lie in (0, N) = (0, " + std::to_string(c.dim) + "), got " + fmt(c.alpha));
  if (c.grid_M < 8 || (c.grid_M & (c.grid_M - 1)) != 0)
    throw ConfigError("grid.M: must be a power of two >= 8, got " + std::to_string(c.grid_M));
  if (!(c.grid_L > 0.0) || !std::isfinite(c.grid_L))
    throw ConfigError("grid.L: must be positive, got " + fmt(c.grid_L));
  wrap("grid", [&] { (void)c.grid(); });
  wrap("p", [&] { (void)c.params(); });
  for (std::size_t i = 0; i < c.wells.size(); ++i) {
    const std::string pre = "potential.well." + std::to_string(i + 1) + ".";
    const Well& w = c.wells[i];
    if (static_cast<int>(w.center.size()) != c.dim)
      throw ConfigError(pre + "center: needs " + std::to_string(c.dim) + " coordinates, got " +
                        std::to_string(w.center.size()));
    if (!(w.mu > 0.0)) throw ConfigError(pre + "mu: must be positive");
    if (!(w.q > 0.0)) throw ConfigError(pre + "q: must be positive");
  }
  wrap("potential.well", [&] { (void)c.potential(); });
  if (!(c.mass > 0.0)) throw ConfigError("mass: must be positive");
  if (c.jobs < 0) throw ConfigError("jobs: must be nonnegative");
  if (!(c.init_width > 0.0)) throw ConfigError("init_width: must be positive");
  if (!(c.groundstate.tol_residual > 0.0)) throw ConfigError("groundstate.tol: must be positive");
  if (c.groundstate.max_iters < 1) throw ConfigError("groundstate.max_iters: must be >= 1");
  if (!(c.flow.backtrack > 0.0 && c.flow.backtrack < 1.0))
    throw ConfigError("flow.backtrack: must lie in (0, 1)");
  if (!(c.flow.step0 > 0.0)) throw ConfigError("flow.step0: must be positive");
  if (c.flow.max_iters < 1) throw ConfigError("flow.max_iters: must be >= 1");
  for (double v : c.schedule)
    if (!(v > 0.0)) throw ConfigError("schedule.c: masses must be positive");
  for (double p : c.trichotomy_p) {
    try {
      ChoquardParams(c.dim, c.alpha, p);
    } catch (const Error& e) {
      throw ConfigError(std::string("trichotomy.p: ") + e.what());
    }
  }
}

std::uint64_t config_hash(const RunConfig& c) {
  // Where results go does not change them.
  RunConfig k = c;
  k.out_dir = ".";
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : write_config(k)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string config_reference() {
  const RunConfig d;
  std::ostringstream os;
  for (const Key& k : keys()) os << "  " << k.name << " = " << k.get(d) << "    # " << k.help << "\n";
  os << "  potential.well.<k>.center = x1[, x2, x3]    # well position (k = 1, 2, ...)\n"
     << "  potential.well.<k>.mu = 1    # V = min_k mu_k |x - x_k|^q_k\n"
     << "  potential.well.<k>.q = 2\n";
  return os.str();
}

}  // namespace chq
