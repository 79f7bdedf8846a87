#pragma once

// Experiment reports: a JSON document (report_version 1) and a CSV of
// per-trial rows. Every number in the CSV is printed with 17 significant
// digits so that reruns can be compared byte for byte.

#include "json.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "rcm/error.hpp"

namespace rcm {

using Json = nlohmann::ordered_json;

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Column-typed rows, formatted on insertion.
class TrialTable {
 public:
  TrialTable() = default;
  explicit TrialTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  class Row {
   public:
    Row& operator<<(double v) { return push(format_double(v)); }
    Row& operator<<(std::uint64_t v) { return push(std::to_string(v)); }
    Row& operator<<(std::int64_t v) { return push(std::to_string(v)); }
    Row& operator<<(int v) { return push(std::to_string(v)); }
    Row& operator<<(bool v) { return push(v ? "1" : "0"); }
    Row& operator<<(const std::string& v) { return push(v); }
    Row& operator<<(const char* v) { return push(v); }
    const std::vector<std::string>& cells() const { return cells_; }

   private:
    Row& push(std::string s) {
      cells_.push_back(std::move(s));
      return *this;
    }
    std::vector<std::string> cells_;
  };

  const std::vector<std::string>& columns() const { return columns_; }
  std::size_t size() const { return rows_.size(); }
  const std::vector<std::string>& row(std::size_t i) const { return rows_[i]; }

  void add(const Row& r) {
    if (r.cells().size() != columns_.size())
      throw DomainError("trial row has " + std::to_string(r.cells().size()) + " cells, table has " +
                        std::to_string(columns_.size()) + " columns");
    rows_.push_back(r.cells());
  }

  void write_csv(std::ostream& os) const {
    for (std::size_t c = 0; c < columns_.size(); ++c) os << (c ? "," : "") << columns_[c];
    os << '\n';
    for (const auto& r : rows_) {
      for (std::size_t c = 0; c < r.size(); ++c) os << (c ? "," : "") << r[c];
      os << '\n';
    }
  }

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

enum class Status { pass, fail, inconclusive };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::pass:
      return "pass";
    case Status::fail:
      return "fail";
    default:
      return "inconclusive";
  }
}

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ExperimentReport {
  std::string experiment;
  Json config = Json::object();
  /// Measured scalars and series.
  Json results = Json::object();
  std::vector<Check> checks;
  std::size_t trials = 0;
  /// Degenerate or skipped trials; more than 20% downgrades a pass.
  std::size_t skipped = 0;
  Status status = Status::inconclusive;
  double wall_clock_seconds = 0.0;
  TrialTable table;

  void check(std::string name, bool passed, std::string detail = {}) {
    checks.push_back({std::move(name), passed, std::move(detail)});
  }

  /// fail if any check failed; otherwise inconclusive when too many trials
  /// were skipped, else pass.
  void finalize() {
    bool ok = true;
    for (const auto& c : checks) ok = ok && c.passed;
    if (!ok)
      status = Status::fail;
    else if (trials > 0 && 5 * skipped > trials)
      status = Status::inconclusive;
    else
      status = Status::pass;
  }

  Json to_json() const {
    Json j;
    j["report_version"] = 1;
    j["experiment"] = experiment;
    j["status"] = to_string(status);
    j["config"] = config;
    j["trials"] = trials;
    j["skipped"] = skipped;
    Json cs = Json::array();
    for (const auto& c : checks) cs.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    j["checks"] = cs;
    j["results"] = results;
    j["wall_clock_seconds"] = wall_clock_seconds;
    return j;
  }
};

/// Writes report.json and trials.csv into dir, which must exist.
inline void write_report(const ExperimentReport& r, const std::filesystem::path& dir) {
  {
    std::ofstream os(dir / "report.json");
    if (!os) throw Error("cannot write " + (dir / "report.json").string());
    os << r.to_json().dump(2) << '\n';
  }
  std::ofstream os(dir / "trials.csv");
  if (!os) throw Error("cannot write " + (dir / "trials.csv").string());
  r.table.write_csv(os);
}

}  // namespace rcm
