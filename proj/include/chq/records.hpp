#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "chq/config.hpp"
#include "chq/verify.hpp"

namespace chq {

/// Shortest text that parses back to the same double; "nan"/"inf" for
/// non-finite values.
std::string format_number(double v);

/// Column order for SweepRecord output. y_c expands to y_c0..y_c{N-1}.
std::vector<std::string> sweep_columns(int dim);

void write_records(const std::vector<SweepRecord>& records, int dim, std::ostream& os,
                   OutputFormat format, const std::string& config_hash);
void write_records(const std::vector<SweepRecord>& records, int dim,
                   const std::filesystem::path& path, OutputFormat format,
                   const std::string& config_hash);

void write_trichotomy(const std::vector<TrichotomyCell>& cells, std::ostream& os, OutputFormat format,
                      const std::string& config_hash);
void write_subadditivity(const std::vector<SubadditivityRow>& rows, std::ostream& os,
                         OutputFormat format, const std::string& config_hash);

/// JSON objects with fixed key order.
std::string energy_json(const EnergyBreakdown& e);
std::string solve_report_json(const SolveReport& r, const ChoquardParams& params,
                              const std::string& config_hash);
std::string fit_json(const FitReport& f);
std::string concentration_json(const ConcentrationReport& r, const std::string& config_hash);

/// Two whitespace-separated columns per line, for plotting.
void write_plot_data(const std::filesystem::path& path, std::span<const double> x,
                     std::span<const double> y);

}  // namespace chq
