#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace stableband {

struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;  // row-major

  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  std::vector<double> column(std::size_t c) const;
  std::vector<double> flattened_columns(const std::vector<std::size_t>& cs) const;
};

/// Strict numeric CSV reader: rectangular, finite cells, '.' decimals.
/// Errors carry 1-based row/column coordinates.
Matrix read_matrix_csv(const std::string& path, char delimiter = ',',
                       bool has_header = false);

/// Writes the canonical matrix form: comma-separated, no header, %.17g cells.
void write_matrix_csv(const Matrix& m, const std::string& path);

/// Columnwise log returns: out(r, c) = ln(prices(r+1, c) / prices(r, c)).
/// Requires strictly positive prices and at least 2 rows.
Matrix log_returns(const Matrix& prices);

/// FNV-1a over the file bytes, hex-encoded.
std::string file_checksum_hex(const std::string& path);

enum class DatasetKind { price_series, latency_matrix, generic_matrix };

DatasetKind dataset_kind_from_string(const std::string& s);
std::string to_string(DatasetKind k);

struct DatasetManifest {
  std::string source_path;
  std::string normalized_path;
  DatasetKind kind = DatasetKind::generic_matrix;
  char delimiter = ',';
  bool has_header = false;
  std::string checksum;  // of the normalized matrix file
  std::size_t rows = 0;
  std::size_t cols = 0;
};

/// Parses `path`, converts price series to log returns, writes
/// `<out_stem>.matrix.csv` and `<out_stem>.manifest.json`, and records the
/// checksum of the normalized file.
DatasetManifest ingest_dataset(const std::string& path, DatasetKind kind,
                               const std::string& out_stem,
                               char delimiter = ',', bool has_header = false);

void save_manifest(const DatasetManifest& m, const std::string& path);
DatasetManifest load_manifest(const std::string& path);

/// Loads the normalized matrix named by the manifest, verifying the recorded
/// checksum first; throws data_error on mismatch.
Matrix load_via_manifest(const DatasetManifest& m);

/// Formats a double with enough digits to round-trip exactly.
std::string format_double(double v);

}  // namespace stableband
