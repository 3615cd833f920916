#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace etdrdp {

/// Max componentwise absolute difference.
double linf_error(std::span<const double> u, std::span<const double> v);

/// log2(E_coarse / E_fine); absent when either error is nonpositive.
std::optional<double> observed_order(double e_coarse, double e_fine);

enum class StudyKind { Exact, Self };

struct ConvergenceRow {
    double k = 0.0;
    double h = 0.0;          // actual grid spacing
    double nominal_h = 0.0;  // the table spacing the grid was matched to
    double error = 0.0;
    std::optional<double> order;
    double wall_seconds = 0.0;
    bool diverged = false;
};

struct ConvergenceReport {
    StudyKind kind = StudyKind::Exact;
    std::vector<ConvergenceRow> rows;
};

/// Writes the CSV (header k,h,error,order,wall_seconds) and a JSON sidecar
/// (same path with .json extension) carrying the full config and the actual
/// vs nominal spacings. extra_metadata is merged into the sidecar.
void write_report(const ConvergenceReport& report, const std::string& csv_path,
                  const std::string& metadata_json = "{}");

/// Parses a CSV produced by write_report (used for round-trip checks).
ConvergenceReport read_report_csv(const std::string& csv_path);

/// RFC-4180 field quoting: wraps in quotes and doubles embedded quotes when
/// the field contains a comma, quote, or newline.
std::string csv_quote(const std::string& field);

std::string format_double(double v);  // round-trip-exact, '.' decimal separator

}  // namespace etdrdp
