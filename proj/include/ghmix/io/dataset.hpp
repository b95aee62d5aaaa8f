#pragma once

// CSV ingestion and the bundled benchmark datasets.

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "ghmix/error.hpp"
#include "ghmix/ghd.hpp"

#ifndef GHMIX_DATA_DIR
#define GHMIX_DATA_DIR "data"
#endif

namespace ghmix::io {

struct Dataset {
  Matrix values;                                  ///< n x p features
  std::vector<std::string> columns;               ///< feature names
  std::vector<std::string> label_names;           ///< held-out label columns
  std::vector<std::vector<std::string>> labels;   ///< labels[k][i] for label column k

  const std::vector<std::string>& label_column(const std::string& name) const {
    const auto it = std::find(label_names.begin(), label_names.end(), name);
    if (it == label_names.end()) throw DomainError("dataset has no label column '" + name + "'");
    return labels[static_cast<std::size_t>(it - label_names.begin())];
  }
};

namespace detail {

// One CSV record; quoted fields may contain commas and doubled quotes.
inline std::vector<std::string> split_record(const std::string& line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char ch = line[k];
    if (quoted) {
      if (ch == '"') {
        if (k + 1 < line.size() && line[k + 1] == '"') {
          cur += '"';
          ++k;
        } else {
          quoted = false;
        }
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (quoted) throw ParseError("unterminated quoted field on line " + std::to_string(line_no), line_no);
  fields.push_back(cur);
  return fields;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

inline bool is_missing(const std::string& s) { return s.empty() || s == "NA" || s == "NaN" || s == "nan" || s == "."; }

}  // namespace detail

/// Parses a header-first CSV. Columns named in label_columns are kept as
/// strings; every other column must hold finite numbers.
inline Dataset parse_csv(std::istream& in, const std::vector<std::string>& label_columns = {},
                         const std::string& source = "<input>") {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!detail::trim(line).empty()) {
      header = detail::split_record(line, line_no);
      break;
    }
  }
  if (header.empty()) throw ParseError(source + ": missing header row", line_no);
  for (auto& h : header) h = detail::trim(h);

  std::vector<int> label_slot(header.size(), -1);
  Dataset ds;
  for (const auto& name : label_columns) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ParseError(source + ": label column '" + name + "' not in header", 1);
    label_slot[static_cast<std::size_t>(it - header.begin())] = static_cast<int>(ds.label_names.size());
    ds.label_names.push_back(name);
  }
  ds.labels.resize(ds.label_names.size());
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (label_slot[j] < 0) ds.columns.push_back(header[j]);
  }
  if (ds.columns.empty()) throw ParseError(source + ": no feature columns", 1);

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_record(line, line_no);
    if (fields.size() != header.size()) {
      throw ParseError(source + ": line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                           " fields, header has " + std::to_string(header.size()),
                       line_no);
    }
    std::vector<double> row;
    for (std::size_t j = 0; j < fields.size(); ++j) {
      const std::string f = detail::trim(fields[j]);
      if (label_slot[j] >= 0) {
        ds.labels[static_cast<std::size_t>(label_slot[j])].push_back(f);
        continue;
      }
      if (detail::is_missing(f)) {
        throw ParseError(source + ": missing value at line " + std::to_string(line_no) + ", column '" + header[j] +
                             "'",
                         line_no);
      }
      double v = 0.0;
      const char* end = f.data() + f.size();
      const auto res = std::from_chars(f.data() + (f.front() == '+' ? 1 : 0), end, v);
      if (res.ec != std::errc() || res.ptr != end) {
        throw ParseError(source + ": non-numeric value '" + f + "' at line " + std::to_string(line_no) +
                             ", column '" + header[j] + "'",
                         line_no);
      }
      if (!std::isfinite(v)) {
        throw ParseError(source + ": non-finite value at line " + std::to_string(line_no) + ", column '" +
                             header[j] + "'",
                         line_no);
      }
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(source + ": no data rows", line_no);
  ds.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(ds.columns.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      ds.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return ds;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Dataset load_csv(const std::filesystem::path& path, const std::vector<std::string>& label_columns = {}) {
  std::istringstream in(read_file(path));
  return parse_csv(in, label_columns, path.string());
}

inline std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  std::ostringstream out;
  for (unsigned int k = 0; k < len; ++k) out << std::hex << std::setw(2) << std::setfill('0') << int(digest[k]);
  return out.str();
}

struct BundledDataset {
  const char* name;
  const char* file;
  const char* sha256;
  std::vector<std::string> label_columns;
};

/// crabs: Campbell & Mahon (1974) Leptograpsus crab measurements, as shipped
/// in R's MASS package. faithful: Old Faithful eruption/waiting times, R datasets.
inline const std::vector<BundledDataset>& bundled_datasets() {
  static const std::vector<BundledDataset> sets = {
      {"crabs", "crabs.csv", "50ddfb54851975ad7e134c9723c883930010c6400d1de4ca91368052407c0baf", {"species", "sex"}},
      {"faithful", "faithful.csv", "d40b983752ab7ec0b15b740089c3ca7b7b59d0c7433a029a1714d134de1e8d14", {}},
  };
  return sets;
}

inline std::filesystem::path data_directory() {
  if (const char* env = std::getenv("GHMIX_DATA_DIR")) return env;
  return GHMIX_DATA_DIR;
}

/// Loads a bundled dataset after verifying its checksum.
inline Dataset load_bundled(const std::string& name) {
  for (const auto& b : bundled_datasets()) {
    if (name != b.name) continue;
    const auto path = data_directory() / b.file;
    const std::string bytes = read_file(path);
    if (sha256_hex(bytes) != b.sha256) throw Error("checksum mismatch for bundled dataset '" + name + "'");
    std::istringstream in(bytes);
    return parse_csv(in, b.label_columns, path.string());
  }
  throw DomainError("unknown bundled dataset '" + name + "'");
}

/// "builtin:<name>" for a bundled dataset, otherwise a CSV path.
inline Dataset load_input(const std::string& spec, const std::vector<std::string>& label_columns = {}) {
  const std::string prefix = "builtin:";
  if (spec.rfind(prefix, 0) == 0) return load_bundled(spec.substr(prefix.size()));
  return load_csv(spec, label_columns);
}

}  // namespace ghmix::io
