#include "etdrdp/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace etdrdp {

double linf_error(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) throw std::invalid_argument("linf_error: length mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        m = std::max(m, std::fabs(u[i] - v[i]));
    }
    return m;
}

std::optional<double> observed_order(double e_coarse, double e_fine) {
    if (!(e_coarse > 0.0) || !(e_fine > 0.0)) return std::nullopt;
    return std::log2(e_coarse / e_fine);
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string csv_quote(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

void write_report(const ConvergenceReport& report, const std::string& csv_path,
                  const std::string& metadata_json) {
    std::ofstream csv(csv_path);
    if (!csv) throw std::runtime_error("write_report: cannot open " + csv_path);
    csv << "k,h,error,order,wall_seconds\n";
    for (const ConvergenceRow& r : report.rows) {
        csv << csv_quote(format_double(r.k)) << ',' << csv_quote(format_double(r.h))
            << ',' << csv_quote(format_double(r.error)) << ',';
        if (r.order) csv << csv_quote(format_double(*r.order));
        csv << ',' << csv_quote(format_double(r.wall_seconds)) << '\n';
    }
    if (!csv.good()) throw std::runtime_error("write_report: write failed for " + csv_path);
    csv.close();

    nlohmann::json j = nlohmann::json::parse(metadata_json);
    j["study"] = report.kind == StudyKind::Exact ? "exact" : "self";
    j["rows"] = nlohmann::json::array();
    for (const ConvergenceRow& r : report.rows) {
        nlohmann::json row{{"k", r.k},
                           {"h_actual", r.h},
                           {"h_nominal", r.nominal_h},
                           {"error", r.error},
                           {"wall_seconds", r.wall_seconds},
                           {"diverged", r.diverged}};
        if (r.order) row["order"] = *r.order;
        j["rows"].push_back(row);
    }

    std::string json_path = csv_path;
    const std::size_t dot = json_path.find_last_of('.');
    const std::size_t slash = json_path.find_last_of("/\\");
    if (dot != std::string::npos && (slash == std::string::npos || dot > slash)) {
        json_path.resize(dot);
    }
    json_path += ".json";
    std::ofstream jf(json_path);
    if (!jf) throw std::runtime_error("write_report: cannot open " + json_path);
    jf << j.dump(2) << '\n';
    if (!jf.good()) throw std::runtime_error("write_report: write failed for " + json_path);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

double parse_double(const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{}) throw std::runtime_error("read_report_csv: bad number '" + s + "'");
    return v;
}

}  // namespace

ConvergenceReport read_report_csv(const std::string& csv_path) {
    std::ifstream in(csv_path);
    if (!in) throw std::runtime_error("read_report_csv: cannot open " + csv_path);
    ConvergenceReport report;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (header) {
            header = false;
            continue;
        }
        const auto fields = split_csv_line(line);
        if (fields.size() != 5) throw std::runtime_error("read_report_csv: bad row '" + line + "'");
        ConvergenceRow r;
        r.k = parse_double(fields[0]);
        r.h = parse_double(fields[1]);
        r.error = parse_double(fields[2]);
        if (!fields[3].empty()) r.order = parse_double(fields[3]);
        r.wall_seconds = parse_double(fields[4]);
        report.rows.push_back(r);
    }
    return report;
}

}  // namespace etdrdp
