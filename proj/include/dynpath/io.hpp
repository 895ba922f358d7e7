#pragma once

// Panel ingestion: a subjects table, a long-format mediators table and an
// ingestion config are joined into a validated Dataset. Writers produce the
// same formats so simulated cohorts round-trip through load_dataset.

#include <charconv>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "dynpath/core.hpp"

namespace dynpath {

enum class GapMode { Strict, CarryForward };

struct IngestOptions {
  Schedule schedule;
  std::vector<std::string> covariates;
  GapMode mode = GapMode::Strict;
  char delimiter = ',';
};

// Shortest representation that parses back to the same double.
inline std::string format_number(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline std::optional<double> parse_number(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

namespace detail {

inline std::string trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return std::string(s);
}

inline std::vector<std::string> split(std::string_view line, char delim) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    auto pos = line.find(delim, start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

struct Table {
  std::vector<std::string> header;
  // (line number, fields)
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;

  std::size_t column(const std::string& name, const std::string& table) const {
    for (std::size_t j = 0; j < header.size(); ++j)
      if (header[j] == name) return j;
    throw Error(table + " table: missing column '" + name + "'");
  }
};

inline Table parse_table(const std::string& text, char delim, const std::string& name) {
  Table t;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto fields = split(line, delim);
    if (t.header.empty()) {
      t.header = std::move(fields);
      continue;
    }
    if (fields.size() != t.header.size())
      throw Error(name + " table line " + std::to_string(lineno) + ": expected " +
                  std::to_string(t.header.size()) + " fields, got " + std::to_string(fields.size()));
    t.rows.emplace_back(lineno, std::move(fields));
  }
  if (t.header.empty()) throw Error(name + " table: missing header row");
  return t;
}

inline double field_number(const std::vector<std::string>& row, std::size_t col,
                           const std::string& table, std::size_t lineno) {
  auto v = parse_number(row[col]);
  if (!v || !std::isfinite(*v))
    throw Error(table + " table line " + std::to_string(lineno) + ": malformed number '" +
                row[col] + "'");
  return *v;
}

}  // namespace detail

inline Dataset load_dataset(const std::string& subjects_table, const std::string& mediators_table,
                            const IngestOptions& options) {
  using detail::field_number;
  const Schedule& schedule = options.schedule;

  auto subj = detail::parse_table(subjects_table, options.delimiter, "subjects");
  const std::size_t c_id = subj.column("id", "subjects");
  const std::size_t c_trt = subj.column("treatment", "subjects");
  const std::size_t c_fu = subj.column("followup", "subjects");
  const std::size_t c_ev = subj.column("event", "subjects");
  std::vector<std::size_t> c_cov;
  for (const auto& name : options.covariates) c_cov.push_back(subj.column(name, "subjects"));

  std::vector<SubjectRecord> records;
  records.reserve(subj.rows.size());
  std::unordered_map<std::string, std::size_t> by_id;
  for (const auto& [lineno, row] : subj.rows) {
    auto where = "subjects table line " + std::to_string(lineno);
    SubjectRecord r;
    r.id = row[c_id];
    if (r.id.empty()) throw Error(where + ": empty id");
    r.treatment = field_number(row, c_trt, "subjects", lineno);
    r.followup = field_number(row, c_fu, "subjects", lineno);
    if (!(r.followup > 0.0)) throw Error(where + ": followup must be > 0");
    if (row[c_ev] == "1") {
      r.event = true;
    } else if (row[c_ev] == "0") {
      r.event = false;
    } else {
      throw Error(where + ": event must be 0 or 1, got '" + row[c_ev] + "'");
    }
    for (std::size_t c : c_cov) r.baseline.push_back(field_number(row, c, "subjects", lineno));
    if (!by_id.emplace(r.id, records.size()).second)
      throw Error(where + ": duplicate subject id '" + r.id + "'");
    records.push_back(std::move(r));
  }

  // Slot per schedule index, filled from the long table.
  std::vector<std::vector<std::optional<double>>> slots(records.size());
  for (std::size_t i = 0; i < records.size(); ++i)
    slots[i].resize(mediator_index(schedule, records[i].followup) + 1);

  auto med = detail::parse_table(mediators_table, options.delimiter, "mediators");
  const std::size_t m_id = med.column("id", "mediators");
  const std::size_t m_time = med.column("time", "mediators");
  const std::size_t m_val = med.column("value", "mediators");
  for (const auto& [lineno, row] : med.rows) {
    auto where = "mediators table line " + std::to_string(lineno);
    auto it = by_id.find(row[m_id]);
    if (it == by_id.end()) throw Error(where + ": unknown subject id '" + row[m_id] + "'");
    const double t = field_number(row, m_time, "mediators", lineno);
    const double v = field_number(row, m_val, "mediators", lineno);
    const auto& ts = schedule.times();
    auto pos = std::lower_bound(ts.begin(), ts.end(), t);
    if (pos == ts.end() || *pos != t)
      throw Error(where + ": time " + row[m_time] + " is not a schedule time");
    const auto k = static_cast<std::size_t>(pos - ts.begin());
    auto& subject_slots = slots[it->second];
    if (k >= subject_slots.size())
      throw Error(where + ": mediator after followup for subject '" + row[m_id] + "'");
    if (subject_slots[k]) throw Error(where + ": duplicate measurement for subject '" + row[m_id] + "'");
    subject_slots[k] = v;
  }

  std::size_t filled = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto& r = records[i];
    for (std::size_t k = 0; k < slots[i].size(); ++k) {
      if (slots[i][k]) {
        r.mediators.push_back(*slots[i][k]);
        continue;
      }
      if (options.mode == GapMode::Strict || k == 0)
        throw Error("subject '" + r.id + "': missing mediator at time " +
                    format_number(schedule[k]));
      r.mediators.push_back(r.mediators.back());
      ++filled;
    }
  }
  return Dataset(schedule, options.covariates, std::move(records), filled);
}

inline std::string write_subjects_table(const Dataset& data) {
  std::string out = "id,treatment,followup,event";
  for (const auto& name : data.covariate_names()) out += "," + name;
  out += '\n';
  for (const auto& s : data.subjects()) {
    out += s.id + ',' + format_number(s.treatment) + ',' + format_number(s.followup) + ',' +
           (s.event ? '1' : '0');
    for (double c : s.baseline) out += ',' + format_number(c);
    out += '\n';
  }
  return out;
}

inline std::string write_mediators_table(const Dataset& data) {
  std::string out = "id,time,value\n";
  for (const auto& s : data.subjects())
    for (std::size_t k = 0; k < s.mediators.size(); ++k)
      out += s.id + ',' + format_number(data.schedule()[k]) + ',' + format_number(s.mediators[k]) + '\n';
  return out;
}

inline nlohmann::json ingest_config_to_json(const IngestOptions& o) {
  return {{"schedule", o.schedule.times()},
          {"covariates", o.covariates},
          {"mode", o.mode == GapMode::Strict ? "strict" : "carry_forward"},
          {"delimiter", std::string(1, o.delimiter)}};
}

inline IngestOptions ingest_config_from_json(const nlohmann::json& j) {
  IngestOptions o;
  try {
    o.schedule = Schedule(j.at("schedule").get<std::vector<double>>());
    if (j.contains("covariates")) o.covariates = j.at("covariates").get<std::vector<std::string>>();
    const auto mode = j.value("mode", std::string("strict"));
    if (mode == "strict") {
      o.mode = GapMode::Strict;
    } else if (mode == "carry_forward") {
      o.mode = GapMode::CarryForward;
    } else {
      throw Error("ingestion config: unknown mode '" + mode + "'");
    }
    const auto delim = j.value("delimiter", std::string(","));
    if (delim.size() != 1) throw Error("ingestion config: delimiter must be one character");
    o.delimiter = delim[0];
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("ingestion config: ") + e.what());
  }
  return o;
}

inline IngestOptions ingest_options_for(const Dataset& data) {
  return IngestOptions{data.schedule(), data.covariate_names(), GapMode::Strict, ','};
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

// Cohort directory layout: subjects.csv, mediators.csv, config.json.
inline Dataset load_cohort_dir(const std::filesystem::path& dir,
                               std::optional<GapMode> mode_override = std::nullopt) {
  if (!std::filesystem::is_directory(dir))
    throw Error("cohort directory not found: '" + dir.string() + "'");
  nlohmann::json cfg;
  try {
    cfg = nlohmann::json::parse(read_text_file(dir / "config.json"));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error("'" + (dir / "config.json").string() + "': " + e.what());
  }
  auto opts = ingest_config_from_json(cfg);
  if (mode_override) opts.mode = *mode_override;
  return load_dataset(read_text_file(dir / "subjects.csv"), read_text_file(dir / "mediators.csv"),
                      opts);
}

inline void write_cohort_dir(const Dataset& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text_file(dir / "subjects.csv", write_subjects_table(data));
  write_text_file(dir / "mediators.csv", write_mediators_table(data));
  write_text_file(dir / "config.json", ingest_config_to_json(ingest_options_for(data)).dump(2) + "\n");
}

}  // namespace dynpath
