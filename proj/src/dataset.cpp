#include "stableband/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "stableband/errors.hpp"

namespace stableband {

std::vector<double> Matrix::column(std::size_t c) const {
  if (c >= cols) throw validation_error("Matrix: column out of range");
  std::vector<double> out(rows);
  for (std::size_t r = 0; r < rows; ++r) out[r] = at(r, c);
  return out;
}

std::vector<double> Matrix::flattened_columns(
    const std::vector<std::size_t>& cs) const {
  std::vector<double> out;
  out.reserve(rows * cs.size());
  for (std::size_t c : cs) {
    auto col = column(c);
    out.insert(out.end(), col.begin(), col.end());
  }
  return out;
}

Matrix read_matrix_csv(const std::string& path, char delimiter,
                       bool has_header) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open " + path);
  Matrix m;
  std::string line;
  std::size_t line_no = 0;
  bool skipped_header = !has_header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!skipped_header) {
      skipped_header = true;
      continue;
    }
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    std::size_t col_no = 0;
    while (std::getline(ss, cell, delimiter)) {
      ++col_no;
      try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        while (used < cell.size() &&
               (cell[used] == ' ' || cell[used] == '\t'))
          ++used;
        if (used != cell.size()) throw std::invalid_argument(cell);
        if (!std::isfinite(v)) throw std::invalid_argument(cell);
        row.push_back(v);
      } catch (const std::exception&) {
        throw data_error(path + ": non-numeric cell '" + cell + "' at row " +
                         std::to_string(line_no) + ", column " +
                         std::to_string(col_no));
      }
    }
    if (m.cols == 0) {
      m.cols = row.size();
    } else if (row.size() != m.cols) {
      throw data_error(path + ": ragged row " + std::to_string(line_no) +
                       " has " + std::to_string(row.size()) +
                       " cells, expected " + std::to_string(m.cols));
    }
    m.values.insert(m.values.end(), row.begin(), row.end());
    ++m.rows;
  }
  if (m.rows == 0) throw data_error(path + ": no numeric rows");
  return m;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_matrix_csv(const Matrix& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write " + path);
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t c = 0; c < m.cols; ++c) {
      if (c) out << ',';
      out << format_double(m.at(r, c));
    }
    out << '\n';
  }
}

Matrix log_returns(const Matrix& prices) {
  if (prices.rows < 2)
    throw data_error("log_returns: need at least 2 price rows");
  Matrix out;
  out.rows = prices.rows - 1;
  out.cols = prices.cols;
  out.values.resize(out.rows * out.cols);
  for (std::size_t r = 0; r + 1 < prices.rows; ++r) {
    for (std::size_t c = 0; c < prices.cols; ++c) {
      const double p0 = prices.at(r, c);
      const double p1 = prices.at(r + 1, c);
      if (!(p0 > 0.0) || !(p1 > 0.0))
        throw data_error("log_returns: non-positive price at row " +
                         std::to_string(r + 1) + ", column " +
                         std::to_string(c + 1));
      out.at(r, c) = std::log(p1 / p0);
    }
  }
  return out;
}

std::string file_checksum_hex(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open " + path);
  std::uint64_t h = 0xCBF29CE484222325ull;
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001B3ull;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(h));
  return hex;
}

DatasetKind dataset_kind_from_string(const std::string& s) {
  if (s == "price-series") return DatasetKind::price_series;
  if (s == "latency-matrix") return DatasetKind::latency_matrix;
  if (s == "generic-matrix") return DatasetKind::generic_matrix;
  throw validation_error("unknown dataset kind: " + s);
}

std::string to_string(DatasetKind k) {
  switch (k) {
    case DatasetKind::price_series: return "price-series";
    case DatasetKind::latency_matrix: return "latency-matrix";
    case DatasetKind::generic_matrix: return "generic-matrix";
  }
  return "unknown";
}

DatasetManifest ingest_dataset(const std::string& path, DatasetKind kind,
                               const std::string& out_stem, char delimiter,
                               bool has_header) {
  Matrix m = read_matrix_csv(path, delimiter, has_header);
  if (kind == DatasetKind::price_series) m = log_returns(m);
  DatasetManifest manifest;
  manifest.source_path = path;
  manifest.normalized_path = out_stem + ".matrix.csv";
  manifest.kind = kind;
  manifest.delimiter = delimiter;
  manifest.has_header = has_header;
  manifest.rows = m.rows;
  manifest.cols = m.cols;
  write_matrix_csv(m, manifest.normalized_path);
  manifest.checksum = file_checksum_hex(manifest.normalized_path);
  save_manifest(manifest, out_stem + ".manifest.json");
  return manifest;
}

void save_manifest(const DatasetManifest& m, const std::string& path) {
  nlohmann::ordered_json j;
  j["source_path"] = m.source_path;
  j["normalized_path"] = m.normalized_path;
  j["kind"] = to_string(m.kind);
  j["delimiter"] = std::string(1, m.delimiter);
  j["has_header"] = m.has_header;
  j["checksum"] = m.checksum;
  j["rows"] = m.rows;
  j["cols"] = m.cols;
  std::ofstream out(path);
  if (!out) throw data_error("cannot write " + path);
  out << j.dump(2) << '\n';
}

DatasetManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw data_error(path + ": invalid manifest JSON: " + e.what());
  }
  DatasetManifest m;
  try {
    m.source_path = j.at("source_path").get<std::string>();
    m.normalized_path = j.at("normalized_path").get<std::string>();
    m.kind = dataset_kind_from_string(j.at("kind").get<std::string>());
    const auto d = j.at("delimiter").get<std::string>();
    if (d.size() != 1) throw data_error(path + ": bad delimiter");
    m.delimiter = d[0];
    m.has_header = j.at("has_header").get<bool>();
    m.checksum = j.at("checksum").get<std::string>();
    m.rows = j.at("rows").get<std::size_t>();
    m.cols = j.at("cols").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw data_error(path + ": manifest missing field: " + e.what());
  }
  return m;
}

Matrix load_via_manifest(const DatasetManifest& m) {
  const std::string actual = file_checksum_hex(m.normalized_path);
  if (actual != m.checksum)
    throw data_error(m.normalized_path + ": checksum mismatch (manifest " +
                     m.checksum + ", file " + actual +
                     "); re-run ingest");
  Matrix mat = read_matrix_csv(m.normalized_path, ',', false);
  if (mat.rows != m.rows || mat.cols != m.cols)
    throw data_error(m.normalized_path + ": shape mismatch with manifest");
  return mat;
}

}  // namespace stableband
