// Command-line front end: groundstates, constrained minimization, sweeps,
// concentration studies, the oracle suite and file-based convolution.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "chq/config.hpp"
#include "chq/field_io.hpp"
#include "chq/records.hpp"

namespace fs = std::filesystem;
using namespace chq;

namespace {

struct ComputeFailure : Error {
  using Error::Error;
};

struct Globals {
  std::string config;
  std::optional<int> grid;
  std::optional<double> box;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::optional<int> jobs;
  std::optional<int> dim;
  std::optional<double> alpha;
  std::optional<std::string> p;
};

RunConfig resolve(const Globals& g) {
  RunConfig c = g.config.empty() ? RunConfig{} : load_config(g.config);
  // Command-line values override the file; the merged text is re-parsed so
  // the same validation and hashing apply.
  std::string text = write_config(c);
  auto set = [&](const std::string& key, const std::string& value) {
    std::istringstream in(text);
    std::string line, out;
    while (std::getline(in, line))
      if (line.rfind(key + " = ", 0) != 0) out += line + "\n";
    text = out + key + " = " + value + "\n";
  };
  if (g.dim) set("dim", std::to_string(*g.dim));
  if (g.alpha) set("alpha", format_number(*g.alpha));
  if (g.p) set("p", *g.p);
  if (g.grid) set("grid.M", std::to_string(*g.grid));
  if (g.box) set("grid.L", format_number(*g.box));
  if (g.seed) set("seed", std::to_string(*g.seed));
  if (g.out) set("output.dir", *g.out);
  if (g.format) set("output.format", *g.format);
  if (g.jobs) set("jobs", std::to_string(*g.jobs));
  return parse_config(text, "<merged config>");
}

int job_count(const RunConfig& c, std::size_t points) {
  if (c.jobs > 0) return c.jobs;
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  return static_cast<int>(std::max<std::size_t>(1, std::min<std::size_t>(points, hw)));
}

fs::path out_path(const RunConfig& c, const std::string& name) {
  fs::create_directories(c.out_dir);
  return fs::path(c.out_dir) / name;
}

std::string ext(const RunConfig& c) { return c.format == OutputFormat::Csv ? ".csv" : ".jsonl"; }

fs::path cache_dir() {
  if (const char* d = std::getenv("CHQ_CACHE_DIR"); d && *d) return d;
  return fs::temp_directory_path() / "chq-cache";
}

double cached_critical_mass(const RunConfig& c, bool& from_cache) {
  const ChoquardParams pr = ChoquardParams::mass_critical(c.dim, c.alpha);
  std::ostringstream key;
  key << "cstar_N" << c.dim << "_a" << format_number(c.alpha) << "_M" << c.grid_M << "_L"
      << format_number(c.grid_L) << "_tol" << format_number(c.groundstate.tol_residual) << "_"
      << (c.scheme == RieszScheme::FreeSpace ? "free" : "periodic") << ".txt";
  const fs::path file = cache_dir() / key.str();
  if (std::ifstream in(file); in) {
    std::string s;
    in >> s;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end && *end == '\0' && v > 0.0) {
      from_cache = true;
      return v;
    }
  }
  from_cache = false;
  const Grid g = c.grid();
  SpectralWorkspace ws(g);
  double v = 0.0;
  try {
    v = critical_mass(pr, c.groundstate, ws);
  } catch (const DomainError&) {
    throw;
  } catch (const Error& e) {
    throw ComputeFailure(e.what());
  }
  std::error_code ec;
  fs::create_directories(file.parent_path(), ec);
  if (std::ofstream out(file); out) out << format_number(v) << "\n";
  return v;
}

int cmd_groundstate(const RunConfig& c) {
  const ChoquardParams pr = c.params();
  const Grid g = c.grid();
  SpectralWorkspace ws(g);
  SolveReport r = petviashvili_solve(pr, c.groundstate, ws);
  const std::string hash = hash_hex(config_hash(c));
  write_chqf(out_path(c, "groundstate.chqf"), r.field);
  Field q = rescale_unit_to_Qp(r.field, pr, ws);
  write_chqf(out_path(c, "groundstate_Qp.chqf"), q);
  const std::string js = solve_report_json(r, pr, hash);
  std::ofstream(out_path(c, "groundstate.jsonl")) << js << "\n";
  std::cout << js << "\n";
  if (r.status != SolveStatus::Converged) throw ComputeFailure("groundstate: " + r.diagnostics);
  return 0;
}

int cmd_critical_mass(const RunConfig& c) {
  bool hit = false;
  const double v = cached_critical_mass(c, hit);
  std::cout << std::setprecision(17) << v << "\n";
  std::cerr << (hit ? "c* served from cache " : "c* computed and cached in ") << cache_dir().string()
            << "\n";
  return 0;
}

int cmd_minimize(const RunConfig& c) {
  const ChoquardParams pr = c.params();
  const Grid g = c.grid();
  SpectralWorkspace ws(g);
  auto v = c.potential();
  FlowOptions fo = c.flow;
  std::mt19937_64 rng(c.seed);
  Field init = c.seed == 0 ? gaussian(g, c.init_width) : random_smooth_field(g, rng);
  SolveReport r = minimize_on_sphere(pr, c.mass, v ? &*v : nullptr, init, fo, ws);
  write_chqf(out_path(c, "minimize.chqf"), r.field);
  const std::string js = solve_report_json(r, pr, hash_hex(config_hash(c)));
  std::ofstream(out_path(c, "minimize.jsonl")) << js << "\n";
  std::cout << js << "\n";
  if (!r.field.all_finite()) throw ComputeFailure("minimize: non-finite field");
  return 0;
}

std::vector<double> absolute_schedule(const RunConfig& c) {
  if (c.schedule.empty()) throw ConfigError("schedule.c: at least one mass is required");
  std::vector<double> cs = c.schedule;
  if (c.schedule_relative) {
    bool hit = false;
    const double cstar = cached_critical_mass(c, hit);
    for (double& v : cs) v *= cstar;
  }
  return cs;
}

int cmd_sweep(const RunConfig& c) {
  const ChoquardParams pr = c.params();
  const Grid g = c.grid();
  SpectralWorkspace ws(g);
  auto v = c.potential();
  if (c.schedule_relative && pr.regime() != Regime::MassCritical)
    throw ConfigError("schedule.relative: masses relative to c* need p = (N+alpha+2)/N");
  const std::vector<double> cs = absolute_schedule(c);
  SweepOptions so;
  so.flow = c.flow;
  so.continuation = c.continuation;
  so.jobs = job_count(c, cs.size());
  auto recs = energy_sweep(pr, v ? &*v : nullptr, cs, so, ws);
  const std::string hash = hash_hex(config_hash(c));
  write_records(recs, c.dim, out_path(c, "sweep" + ext(c)), c.format, hash);
  write_records(recs, c.dim, std::cout, c.format, hash);
  return 0;
}

int cmd_trichotomy(const RunConfig& c) {
  if (c.trichotomy_c.empty() || c.trichotomy_p.empty())
    throw ConfigError("trichotomy.c and trichotomy.p must both be set");
  const Grid g = c.grid();
  SpectralWorkspace ws(g);
  TrichotomyOptions to;
  to.flow = c.flow;
  to.groundstate = c.groundstate;
  to.init_width = c.init_width;
  auto cells = trichotomy_probe(c.dim, c.alpha, c.trichotomy_c, c.trichotomy_p, to, ws);
  const std::string hash = hash_hex(config_hash(c));
  std::ofstream f(out_path(c, "trichotomy" + ext(c)));
  write_trichotomy(cells, f, c.format, hash);
  write_trichotomy(cells, std::cout, c.format, hash);
  return 0;
}

int cmd_concentrate(const RunConfig& c) {
  auto v = c.potential();
  if (!v) throw ConfigError("potential.well.1.center: concentrate needs at least one well");
  if (!c.schedule_relative) throw ConfigError("schedule.relative: concentrate takes c/c* values");
  ConcentrationPlan plan{c.params(), *v, c.schedule, c.s_list, {}, c.groundstate};
  if (plan.s_list.empty()) plan.s_list = {(c.dim + c.alpha) / c.dim};
  plan.sweep.flow = c.flow;
  plan.sweep.continuation = c.continuation;
  plan.sweep.jobs = job_count(c, c.schedule.size());
  const Grid g = c.grid();
  SpectralWorkspace ws(g);
  ConcentrationReport rep = concentration_study(plan, ws);
  const std::string hash = hash_hex(config_hash(c));
  write_records(rep.records, c.dim, out_path(c, "concentrate" + ext(c)), c.format, hash);
  const std::string js = concentration_json(rep, hash);
  std::ofstream(out_path(c, "concentrate_summary.json")) << js << "\n";
  std::vector<double> d, e, a;
  for (std::size_t j = 0; j < rep.records.size(); ++j) {
    d.push_back(critical_delta(c.schedule[j], c.dim, c.alpha));
    e.push_back(rep.records[j].energy);
    a.push_back(rep.records[j].A);
  }
  write_plot_data(out_path(c, "plot_energy.dat"), d, e);
  write_plot_data(out_path(c, "plot_kinetic.dat"), d, a);
  for (std::size_t k = 0; k < rep.s_list.size(); ++k)
    write_plot_data(out_path(c, "plot_distance_s" + format_number(rep.s_list[k]) + ".dat"), d,
                    rep.distances[k]);
  std::cout << js << "\n";
  return 0;
}

int cmd_verify(bool fault) {
  SuiteOptions so;
  so.inject_kernel_fault = fault;
  auto reports = run_suite(so);
  for (const auto& r : reports) std::cout << to_jsonl(r) << "\n";
  return all_pass(reports) ? 0 : 1;
}

int cmd_convolve(const RunConfig& c, const std::string& in, const std::string& out) {
  Field f = read_chqf(in);
  if (f.grid().dim() != c.dim)
    throw ConfigError("dim: config has N=" + std::to_string(c.dim) + " but '" + in + "' has N=" +
                      std::to_string(f.grid().dim()));
  if (!(c.alpha > 0.0 && c.alpha < c.dim)) throw ConfigError("alpha: must lie in (0, N)");
  SpectralWorkspace ws(f.grid());
  write_chqf(out, riesz_convolve(f, {c.scheme, c.alpha}, ws));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mass-constrained Choquard groundstates and minimizers"};
  app.require_subcommand(1);
  app.fallthrough();
  app.footer("Config keys (key = value, '#' comments):\n" + config_reference() +
             "Exit status: 0 success, 1 compute failure, 2 configuration or usage error.\n"
             "CHQ_CACHE_DIR selects the c* cache directory.");
  Globals g;
  app.add_option("--config", g.config, "config file")->check(CLI::ExistingFile);
  app.add_option("--grid", g.grid, "points per axis M");
  app.add_option("--box", g.box, "box length L");
  app.add_option("--seed", g.seed, "seed for randomized inputs");
  app.add_option("--out", g.out, "output directory");
  app.add_option("--format", g.format, "record format")->check(CLI::IsMember({"csv", "jsonl"}));
  app.add_option("--jobs", g.jobs, "worker threads (0 = automatic)");
  app.add_option("--dim", g.dim, "dimension N");
  app.add_option("--alpha", g.alpha, "Riesz order alpha");
  app.add_option("--p", g.p, "exponent p, or 'critical'");

  auto* gs = app.add_subcommand("groundstate", "Petviashvili groundstate; writes CHQF and a report");
  auto* cm = app.add_subcommand("critical-mass", "print c* = |Q_{p_c}|_2 (cached)");
  auto* mn = app.add_subcommand("minimize", "constrained flow on |u|_2 = c");
  std::optional<double> mass;
  mn->add_option("--mass", mass, "target mass c");
  auto* tr = app.add_subcommand("trichotomy", "regime table over trichotomy.p x trichotomy.c");
  auto* sw = app.add_subcommand("sweep", "energy table over schedule.c");
  auto* co = app.add_subcommand("concentrate", "concentration study toward c*");
  auto* ve = app.add_subcommand("verify", "oracle suite; JSON lines on stdout");
  bool fault = false;
  ve->add_flag("--inject-kernel-fault", fault, "corrupt the convolution table (harness check)");
  auto* cv = app.add_subcommand("convolve", "Riesz convolution of a CHQF file");
  std::string cin_path, cout_path;
  cv->add_option("input", cin_path, "input CHQF")->required()->check(CLI::ExistingFile);
  cv->add_option("output", cout_path, "output CHQF")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (ve->parsed()) return cmd_verify(fault);
    RunConfig c = resolve(g);
    if (mass) {
      c.mass = *mass;
      validate(c);
    }
    if (gs->parsed()) return cmd_groundstate(c);
    if (cm->parsed()) return cmd_critical_mass(c);
    if (mn->parsed()) return cmd_minimize(c);
    if (tr->parsed()) return cmd_trichotomy(c);
    if (sw->parsed()) return cmd_sweep(c);
    if (co->parsed()) return cmd_concentrate(c);
    if (cv->parsed()) return cmd_convolve(c, cin_path, cout_path);
  } catch (const ComputeFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
