#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include <Eigen/Sparse>

namespace sbpsat {

using SpMat = Eigen::SparseMatrix<double>;

// Plain-text sparse format: header `rows cols nnz`, then `i j value` lines
// with 0-based indices and 17 significant digits.
void write_triplets(std::ostream& out, const SpMat& matrix);
void write_triplets(const std::filesystem::path& path, const SpMat& matrix);
SpMat read_triplets(std::istream& in, const std::string& origin = "<stream>");
SpMat read_triplets(const std::filesystem::path& path);

// Flat `key=value` files; blank lines and lines starting with '#' are ignored.
using KeyValues = std::map<std::string, std::string>;
KeyValues parse_key_values(std::istream& in, const std::string& origin = "<stream>");
KeyValues read_key_values(const std::filesystem::path& path);
void write_key_values(const std::filesystem::path& path, const KeyValues& values);

std::uint64_t fnv1a64(const std::string& bytes);
std::uint64_t file_checksum(const std::filesystem::path& path);
std::string format_checksum(std::uint64_t value);

// MANIFEST lines are `filename checksum` (checksum as 16 hex digits).
std::map<std::string, std::string> read_manifest(const std::filesystem::path& path);

// Full-precision formatting used by every text writer.
std::string format_real(double value);

}  // namespace sbpsat
