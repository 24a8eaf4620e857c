#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "unitok/token.hpp"

namespace unitok {

struct DistRow {
  Tokenization tokenization;
  double probability = 0.0;
  bool is_canonical = false;
};

// A tokenization distribution for one word: exact (oracle-computed) or
// empirical (seeded sample frequencies). Rows are sorted by descending
// probability, ties broken by ascending tokenization.
struct DistributionReport {
  enum class Kind { kExact, kEmpirical };

  std::u32string word;
  std::vector<DistRow> rows;
  Kind kind = Kind::kExact;
  std::uint64_t sample_count = 0;  // empirical only
  std::uint64_t seed = 0;          // empirical only
  Tokenization canonical;

  double total() const {
    double s = 0.0;
    for (const auto& r : rows) s += r.probability;
    return s;
  }

  const DistRow* find(const Tokenization& t) const {
    for (const auto& r : rows)
      if (r.tokenization == t) return &r;
    return nullptr;
  }

  double probability_of(const Tokenization& t) const {
    const DistRow* r = find(t);
    return r ? r->probability : 0.0;
  }
};

inline void sort_rows(std::vector<DistRow>& rows) {
  std::sort(rows.begin(), rows.end(), [](const DistRow& a, const DistRow& b) {
    if (a.probability != b.probability) return a.probability > b.probability;
    return a.tokenization < b.tokenization;
  });
}

inline DistributionReport make_exact_report(std::u32string word,
                                            const std::map<Tokenization, double>& probs,
                                            Tokenization canonical) {
  DistributionReport report;
  report.word = std::move(word);
  report.kind = DistributionReport::Kind::kExact;
  report.canonical = std::move(canonical);
  report.rows.reserve(probs.size());
  for (const auto& [t, p] : probs)
    report.rows.push_back({t, p, t == report.canonical});
  sort_rows(report.rows);
  return report;
}

// Total variation distance between two reports over the union support.
inline double tv_distance(const DistributionReport& a, const DistributionReport& b) {
  std::map<Tokenization, double> diff;
  for (const auto& r : a.rows) diff[r.tokenization] += r.probability;
  for (const auto& r : b.rows) diff[r.tokenization] -= r.probability;
  double l1 = 0.0;
  for (const auto& [t, d] : diff) l1 += d < 0 ? -d : d;
  return 0.5 * l1;
}

namespace detail {

inline std::string csv_escape(const std::string& field, char delimiter) {
  if (field.find(delimiter) == std::string::npos &&
      field.find('"') == std::string::npos && field.find('\n') == std::string::npos)
    return field;
  std::string quoted = "\"";
  for (char c : field) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

}  // namespace detail

inline constexpr const char* kReportFormatVersion = "v1";

// Stable column order: tokenization, probability, is_canonical. One
// metadata comment line precedes the header.
inline void write_report_csv(std::ostream& out, const DistributionReport& report,
                             std::u32string_view marker = U"", char delimiter = ',') {
  out << "# unitok distribution report " << kReportFormatVersion
      << " word=" << encode_utf8(report.word)
      << " kind=" << (report.kind == DistributionReport::Kind::kExact ? "exact" : "empirical");
  if (report.kind == DistributionReport::Kind::kEmpirical)
    out << " samples=" << report.sample_count << " seed=" << report.seed;
  out << '\n';
  out << "tokenization" << delimiter << "probability" << delimiter << "is_canonical\n";
  char buf[64];
  for (const auto& r : report.rows) {
    std::snprintf(buf, sizeof buf, "%.17g", r.probability);
    out << detail::csv_escape(render(r.tokenization, marker), delimiter) << delimiter
        << buf << delimiter << (r.is_canonical ? 1 : 0) << '\n';
  }
}

}  // namespace unitok
