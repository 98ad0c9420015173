#include "chq/records.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <variant>

#include "json.hpp"

namespace chq {

using ojson = nlohmann::ordered_json;

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {
ojson num(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }

ojson vec(std::span<const double> v) {
  ojson a = ojson::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

void ensure_parent(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
}

std::ofstream open_out(const std::filesystem::path& path) {
  ensure_parent(path);
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  return out;
}

// One row as ordered (column, value) pairs; both writers consume the same
// list, so CSV and JSONL carry identical numbers.
struct Cell {
  std::string key;
  std::variant<double, long long, std::string> value;
};
using Row = std::vector<Cell>;

void emit(const std::vector<Row>& rows, std::ostream& os, OutputFormat format) {
  if (format == OutputFormat::Csv) {
    if (rows.empty()) return;
    for (std::size_t i = 0; i < rows.front().size(); ++i) os << (i ? "," : "") << rows.front()[i].key;
    os << "\n";
    for (const Row& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) {
        os << (i ? "," : "");
        std::visit(
            [&](const auto& v) {
              using T = std::decay_t<decltype(v)>;
              if constexpr (std::is_same_v<T, double>) os << format_number(v);
              else os << v;
            },
            r[i].value);
      }
      os << "\n";
    }
    return;
  }
  for (const Row& r : rows) {
    ojson j;
    for (const Cell& c : r)
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) j[c.key] = num(v);
            else j[c.key] = v;
          },
          c.value);
    os << j.dump() << "\n";
  }
}
}  // namespace

std::vector<std::string> sweep_columns(int dim) {
  std::vector<std::string> c{"c", "status", "A", "B", "C", "energy", "mu", "eps_q", "eps_B"};
  for (int d = 0; d < dim; ++d) c.push_back("y_c" + std::to_string(d));
  for (const char* k : {"regime", "iterations", "residual", "boundary_mass", "config_hash"}) c.push_back(k);
  return c;
}

void write_records(const std::vector<SweepRecord>& records, int dim, std::ostream& os,
                   OutputFormat format, const std::string& config_hash) {
  std::vector<Row> rows;
  for (const SweepRecord& r : records) {
    Row row{{"c", r.c},       {"status", to_string(r.status)}, {"A", r.A},         {"B", r.B},
            {"C", r.C},       {"energy", r.energy},            {"mu", r.mu},       {"eps_q", r.eps_q},
            {"eps_B", r.eps_B}};
    for (int d = 0; d < dim; ++d)
      row.push_back({"y_c" + std::to_string(d), d < int(r.y_c.size()) ? r.y_c[d] : std::nan("")});
    row.push_back({"regime", to_string(r.regime)});
    row.push_back({"iterations", static_cast<long long>(r.iterations)});
    row.push_back({"residual", r.residual});
    row.push_back({"boundary_mass", r.boundary_mass});
    row.push_back({"config_hash", config_hash});
    rows.push_back(std::move(row));
  }
  emit(rows, os, format);
}

void write_records(const std::vector<SweepRecord>& records, int dim,
                   const std::filesystem::path& path, OutputFormat format,
                   const std::string& config_hash) {
  auto out = open_out(path);
  write_records(records, dim, out, format, config_hash);
}

void write_trichotomy(const std::vector<TrichotomyCell>& cells, std::ostream& os, OutputFormat format,
                      const std::string& config_hash) {
  std::vector<Row> rows;
  for (const TrichotomyCell& t : cells) {
    rows.push_back(Row{{"p", t.p},
                       {"c", t.c},
                       {"regime", to_string(t.regime)},
                       {"status", t.status ? to_string(*t.status) : std::string("-")},
                       {"energy", t.energy},
                       {"predicted", t.predicted.value_or(std::nan(""))},
                       {"as_expected", std::string(t.as_expected ? "true" : "false")},
                       {"behavior", t.behavior},
                       {"config_hash", config_hash}});
  }
  if (format == OutputFormat::Csv)
    for (Row& r : rows) {
      // Free text may hold commas.
      auto& b = std::get<std::string>(r[7].value);
      std::replace(b.begin(), b.end(), ',', ';');
    }
  emit(rows, os, format);
}

void write_subadditivity(const std::vector<SubadditivityRow>& rows_in, std::ostream& os,
                         OutputFormat format, const std::string& config_hash) {
  std::vector<Row> rows;
  for (const SubadditivityRow& s : rows_in)
    rows.push_back(Row{{"a", s.a},
                       {"I_c", s.I_c},
                       {"I_a", s.I_a},
                       {"I_rest", s.I_rest},
                       {"margin", s.margin},
                       {"tolerance", s.tolerance},
                       {"holds", std::string(s.holds ? "true" : "false")},
                       {"inconclusive", std::string(s.inconclusive ? "true" : "false")},
                       {"config_hash", config_hash}});
  emit(rows, os, format);
}

std::string energy_json(const EnergyBreakdown& e) {
  ojson j;
  j["A"] = num(e.A);
  j["B"] = num(e.B);
  j["C"] = num(e.C);
  j["mass_sq"] = num(e.mass_sq);
  j["I_p"] = num(e.I_p);
  j["E"] = e.E ? num(*e.E) : ojson(nullptr);
  return j.dump();
}

std::string solve_report_json(const SolveReport& r, const ChoquardParams& params,
                              const std::string& config_hash) {
  const Grid& g = r.field.grid();
  ojson j;
  j["status"] = to_string(r.status);
  j["iters"] = r.iterations;
  j["A"] = num(r.energy.A);
  j["B"] = num(r.energy.B);
  j["C"] = num(r.energy.C);
  j["mass_sq"] = num(r.energy.mass_sq);
  j["energy"] = num(r.energy.objective());
  j["mu"] = num(r.mu);
  j["residual"] = num(r.residual);
  j["boundary_mass"] = num(r.boundary_mass);
  j["grid"] = {{"N", g.dim()}, {"M", g.points_per_axis()}, {"L", g.box_length()}};
  j["params"] = {{"alpha", params.alpha()}, {"p", params.p()}};
  j["c"] = num(r.c);
  j["diagnostics"] = r.diagnostics;
  j["config_hash"] = config_hash;
  return j.dump();
}

namespace {
ojson fit_obj(const FitReport& f) {
  ojson j;
  j["exponent"] = num(f.exponent);
  j["prefactor"] = num(f.prefactor);
  j["theory_exponent"] = num(f.theory_exponent);
  j["theory_prefactor"] = num(f.theory_prefactor);
  j["exponent_dev"] = num(f.exponent_dev);
  j["prefactor_dev"] = num(f.prefactor_dev);
  j["x_min"] = num(f.x_min);
  j["x_max"] = num(f.x_max);
  j["r2"] = num(f.r2);
  j["x"] = vec(f.xs);
  j["y"] = vec(f.ys);
  return j;
}
}  // namespace

std::string fit_json(const FitReport& f) { return fit_obj(f).dump(); }

std::string concentration_json(const ConcentrationReport& r, const std::string& config_hash) {
  ojson j;
  j["c_star"] = num(r.c_star);
  j["q"] = num(r.q);
  j["lambda"] = num(r.lambdas.lambda);
  j["lambdas"] = vec(r.lambdas.raw);
  j["attaining"] = r.lambdas.attaining;
  j["selected_well"] = r.selected_well;
  j["s"] = vec(r.s_list);
  ojson d = ojson::array();
  for (const auto& row : r.distances) d.push_back(vec(row));
  j["distances"] = d;
  j["energy_fit"] = fit_obj(r.energy_fit);
  j["kinetic_fit"] = fit_obj(r.kinetic_fit);
  j["prefactor"] = fit_obj(r.prefactor);
  if (r.witness)
    j["witness"] = {{"c", r.witness->c}, {"t", r.witness->t}, {"energy", num(r.witness->energy)},
                    {"e_c", num(r.witness->e_c)}};
  else
    j["witness"] = nullptr;
  j["failures"] = r.failures;
  j["config_hash"] = config_hash;
  return j.dump();
}

void write_plot_data(const std::filesystem::path& path, std::span<const double> x,
                     std::span<const double> y) {
  if (x.size() != y.size()) throw DomainError("write_plot_data: columns differ in length");
  auto out = open_out(path);
  for (std::size_t i = 0; i < x.size(); ++i) out << format_number(x[i]) << " " << format_number(y[i]) << "\n";
}

}  // namespace chq
