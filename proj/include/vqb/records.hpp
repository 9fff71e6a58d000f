// Copyright 2026 The vqb Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

/// @file records.hpp
/// Sweep rows and their CSV / JSON serialization. Both formats share the
/// column set below; numbers carry 9 significant digits and rows are sorted
/// by their inputs so output does not depend on solve order.

#include "json.hpp"
#include "vqb/linalg.hpp"
#include "vqb/sdp.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

namespace vqb {

class IoError : public Error {
 public:
  using Error::Error;
};

inline constexpr std::array<const char*, 11> kRecordColumns = {
    "a", "b", "gamma", "d", "nu", "s", "mu", "t", "status", "gap", "seconds"};

struct SweepRecord {
  std::optional<double> a, b, gamma;
  std::optional<std::size_t> d;
  std::optional<double> nu, s, mu, t;
  std::string status;
  std::optional<double> gap;
  std::optional<double> seconds;
};

/// Status column value. Both infeasibility certificates read "infeasible".
inline std::string record_status(SolveStatus s) {
  switch (s) {
    case SolveStatus::primal_infeasible:
    case SolveStatus::dual_infeasible:
      return "infeasible";
    default:
      return to_string(s);
  }
}

inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

namespace detail {

inline auto record_key(const SweepRecord& r) {
  constexpr double none = -std::numeric_limits<double>::infinity();
  return std::make_tuple(r.a.value_or(none), r.b.value_or(none), r.gamma.value_or(none),
                         r.d ? static_cast<double>(*r.d) : none);
}

// Input columns in use; output columns may be empty on rows that failed.
inline std::array<bool, 4> presence(const SweepRecord& r) {
  return {r.a.has_value(), r.b.has_value(), r.gamma.has_value(), r.d.has_value()};
}

inline std::vector<std::string> fields(const SweepRecord& r) {
  auto num = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
  return {num(r.a),  num(r.b), num(r.gamma), r.d ? std::to_string(*r.d) : std::string(),
          num(r.nu), num(r.s), num(r.mu),    num(r.t),
          r.status,  num(r.gap), num(r.seconds)};
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out(1);
  for (char c : line) {
    if (c == ',')
      out.emplace_back();
    else
      out.back() += c;
  }
  return out;
}

}  // namespace detail

/// Sorts by inputs (a, b, gamma, d) and checks that all rows use the same
/// input columns.
inline std::vector<SweepRecord> normalized(std::vector<SweepRecord> records) {
  if (records.empty()) return records;
  for (const auto& r : records)
    if (detail::presence(r) != detail::presence(records.front()))
      throw InvariantError("records must share the same input columns");
  std::stable_sort(records.begin(), records.end(), [](const SweepRecord& x, const SweepRecord& y) {
    return detail::record_key(x) < detail::record_key(y);
  });
  return records;
}

inline std::string to_csv(const std::vector<SweepRecord>& records) {
  std::string out;
  for (std::size_t i = 0; i < kRecordColumns.size(); ++i) {
    if (i) out += ',';
    out += kRecordColumns[i];
  }
  out += '\n';
  for (const SweepRecord& r : normalized(records)) {
    const auto f = detail::fields(r);
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (i) out += ',';
      out += f[i];
    }
    out += '\n';
  }
  return out;
}

inline std::string to_json(const std::vector<SweepRecord>& records) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const SweepRecord& r : normalized(records)) {
    const auto f = detail::fields(r);
    nlohmann::ordered_json row;
    for (std::size_t i = 0; i < f.size(); ++i) {
      const std::string key = kRecordColumns[i];
      if (f[i].empty())
        row[key] = nullptr;
      else if (key == "status")
        row[key] = f[i];
      else if (key == "d")
        row[key] = std::stoull(f[i]);
      else
        row[key] = std::stod(f[i]);
    }
    arr.push_back(std::move(row));
  }
  return arr.dump(2) + "\n";
}

/// Parses text produced by to_csv.
inline std::vector<SweepRecord> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || detail::split_csv_line(line).size() != kRecordColumns.size())
    throw IoError("missing or malformed CSV header");
  std::vector<SweepRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != kRecordColumns.size()) throw IoError("malformed CSV row: " + line);
    auto num = [](const std::string& s) -> std::optional<double> {
      if (s.empty()) return std::nullopt;
      return std::stod(s);
    };
    SweepRecord r;
    r.a = num(f[0]);
    r.b = num(f[1]);
    r.gamma = num(f[2]);
    if (!f[3].empty()) r.d = static_cast<std::size_t>(std::stoull(f[3]));
    r.nu = num(f[4]);
    r.s = num(f[5]);
    r.mu = num(f[6]);
    r.t = num(f[7]);
    r.status = f[8];
    r.gap = num(f[9]);
    r.seconds = num(f[10]);
    out.push_back(std::move(r));
  }
  return out;
}

enum class RecordFormat { csv, json };

inline void write_records(const std::vector<SweepRecord>& records, RecordFormat format, const std::string& path) {
  const std::string text = format == RecordFormat::csv ? to_csv(records) : to_json(records);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("failed writing " + path);
}

}  // namespace vqb
