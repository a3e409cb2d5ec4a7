#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace ctreg {

struct catalog_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct catalog_parse_error : catalog_error {
  using catalog_error::catalog_error;
};
struct catalog_duplicate_id : catalog_error {
  using catalog_error::catalog_error;
};
struct catalog_missing_volume : catalog_error {
  using catalog_error::catalog_error;
};

/// ISO-8601 date-time (seconds precision), totally ordered.
struct Timestamp {
  int year = 0, month = 0, day = 0, hour = 0, minute = 0, second = 0;

  static Timestamp parse(const std::string& text) {
    Timestamp t;
    char tail = 0;
    const int n = std::sscanf(text.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%c", &t.year,
                              &t.month, &t.day, &t.hour, &t.minute, &t.second,
                              &tail);
    if (n != 6 || text.size() != 19)
      throw catalog_parse_error("bad timestamp (want YYYY-MM-DDTHH:MM:SS): " + text);
    if (t.month < 1 || t.month > 12 || t.day < 1 || t.day > 31 || t.hour > 23 ||
        t.hour < 0 || t.minute < 0 || t.minute > 59 || t.second < 0 ||
        t.second > 60)
      throw catalog_parse_error("timestamp out of range: " + text);
    return t;
  }

  std::string str() const {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d", year, month,
                  day, hour, minute, second);
    return buf;
  }

  friend auto operator<=>(const Timestamp& a, const Timestamp& b) {
    return std::tie(a.year, a.month, a.day, a.hour, a.minute, a.second) <=>
           std::tie(b.year, b.month, b.day, b.hour, b.minute, b.second);
  }
  friend bool operator==(const Timestamp&, const Timestamp&) = default;
};

struct ExamRecord {
  std::string exam_id;
  std::string patient_id;
  Timestamp acquired;
  std::string modality;   // e.g. "CT"
  std::string body_part;  // e.g. "BRAIN"
  bool stroke_related = false;
  std::string volume_path;  // resolved to an absolute-ish path at load time
};

struct Catalog {
  std::vector<ExamRecord> exams;

  const ExamRecord* find(const std::string& exam_id) const {
    for (const auto& e : exams)
      if (e.exam_id == exam_id) return &e;
    return nullptr;
  }
};

namespace detail {

inline std::vector<std::string> split_fields(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  std::size_t e = s.find_last_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

inline bool parse_bool(const std::string& s, const std::string& context) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw catalog_parse_error("bad boolean '" + s + "' in " + context);
}

}  // namespace detail

// Catalog file: one record per line, fields separated by '|' in the order
//   exam_id|patient_id|timestamp|modality|body_part|stroke_related|volume_path
// '#' lines and blank lines are ignored. Relative volume paths resolve
// against the catalog file's directory; every referenced file must exist.
inline Catalog load_catalog(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open catalog: " + path);
  const std::filesystem::path base = std::filesystem::path(path).parent_path();

  Catalog cat;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    const std::string trimmed = detail::trim(line);
    if (trimmed.empty() || trimmed[0] == '#') continue;
    const auto fields = detail::split_fields(trimmed, '|');
    if (fields.size() != 7)
      throw catalog_parse_error("line " + std::to_string(lineno) + ": expected 7 '|'-separated fields, got " +
                                std::to_string(fields.size()));
    ExamRecord rec;
    rec.exam_id = detail::trim(fields[0]);
    rec.patient_id = detail::trim(fields[1]);
    rec.acquired = Timestamp::parse(detail::trim(fields[2]));
    rec.modality = detail::trim(fields[3]);
    rec.body_part = detail::trim(fields[4]);
    rec.stroke_related = detail::parse_bool(detail::trim(fields[5]),
                                            "line " + std::to_string(lineno));
    if (rec.exam_id.empty() || rec.patient_id.empty())
      throw catalog_parse_error("line " + std::to_string(lineno) +
                                ": empty exam or patient id");

    std::filesystem::path vp = detail::trim(fields[6]);
    if (vp.is_relative()) vp = base / vp;
    rec.volume_path = vp.string();

    for (const auto& existing : cat.exams)
      if (existing.exam_id == rec.exam_id)
        throw catalog_duplicate_id("duplicate exam_id '" + rec.exam_id + "' at line " +
                                   std::to_string(lineno));
    if (!std::filesystem::exists(rec.volume_path))
      throw catalog_missing_volume("volume file not found for exam '" + rec.exam_id +
                                   "': " + rec.volume_path);
    cat.exams.push_back(std::move(rec));
  }
  return cat;
}

/// Brain CT exams of the patient that are not stroke related, oldest first.
inline std::vector<ExamRecord> filter_prior_exams(const Catalog& c,
                                                  const std::string& patient_id) {
  std::vector<ExamRecord> out;
  for (const auto& e : c.exams)
    if (e.patient_id == patient_id && e.modality == "CT" &&
        e.body_part == "BRAIN" && !e.stroke_related)
      out.push_back(e);
  std::sort(out.begin(), out.end(), [](const ExamRecord& a, const ExamRecord& b) {
    if (a.acquired != b.acquired) return a.acquired < b.acquired;
    return a.exam_id < b.exam_id;
  });
  return out;
}

/// Stroke-related brain CT exams of the patient, oldest first.
inline std::vector<ExamRecord> filter_stroke_exams(const Catalog& c,
                                                   const std::string& patient_id) {
  std::vector<ExamRecord> out;
  for (const auto& e : c.exams)
    if (e.patient_id == patient_id && e.modality == "CT" &&
        e.body_part == "BRAIN" && e.stroke_related)
      out.push_back(e);
  std::sort(out.begin(), out.end(), [](const ExamRecord& a, const ExamRecord& b) {
    if (a.acquired != b.acquired) return a.acquired < b.acquired;
    return a.exam_id < b.exam_id;
  });
  return out;
}

}  // namespace ctreg
