#pragma once

#include <Eigen/Dense>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

namespace semrom {

static_assert(std::endian::native == std::endian::little,
              "matrix files are little-endian; big-endian hosts are not supported");

inline constexpr char kMatrixMagic[16] = "SEMROM-MATRIX-1";  // includes the trailing NUL
inline constexpr int kKindBytes = 32;

/// Atomically replaces `path` with `content` (write temp in the same
/// directory, then rename).
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

/// Binary matrix file: 16-byte magic, int64 rows, int64 cols, 32-byte element
/// kind tag, then row-major 8-byte little-endian doubles. A plain-text
/// companion `<path>.meta` carries the same header for human auditing.
inline void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m,
                         const std::string& kind) {
  if (kind.size() + 1 > kKindBytes) throw std::invalid_argument("write_matrix: kind tag too long");
  const std::int64_t rows = m.rows(), cols = m.cols();
  std::string buf;
  buf.reserve(sizeof(kMatrixMagic) + 16 + kKindBytes + sizeof(double) * rows * cols);
  buf.append(kMatrixMagic, sizeof(kMatrixMagic));
  buf.append(reinterpret_cast<const char*>(&rows), sizeof(rows));
  buf.append(reinterpret_cast<const char*>(&cols), sizeof(cols));
  char tag[kKindBytes] = {};
  std::memcpy(tag, kind.data(), kind.size());
  buf.append(tag, kKindBytes);
  for (std::int64_t i = 0; i < rows; ++i)
    for (std::int64_t j = 0; j < cols; ++j) {
      double v = m(i, j);
      buf.append(reinterpret_cast<const char*>(&v), sizeof(v));
    }
  write_file_atomic(path, buf);

  std::ostringstream meta;
  meta << "format=" << kMatrixMagic << "\n"
       << "rows=" << rows << "\n"
       << "cols=" << cols << "\n"
       << "kind=" << kind << "\n"
       << "element_bytes=8\n"
       << "layout=row-major\n"
       << "byte_order=little-endian\n";
  write_file_atomic(path.string() + ".meta", meta.str());
}

inline Eigen::MatrixXd read_matrix(const std::filesystem::path& path, std::string* kind = nullptr) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open matrix file: " + path.string());
  char magic[sizeof(kMatrixMagic)];
  std::int64_t rows = 0, cols = 0;
  char tag[kKindBytes];
  in.read(magic, sizeof(magic));
  in.read(reinterpret_cast<char*>(&rows), sizeof(rows));
  in.read(reinterpret_cast<char*>(&cols), sizeof(cols));
  in.read(tag, sizeof(tag));
  if (!in || std::memcmp(magic, kMatrixMagic, sizeof(magic)) != 0)
    throw std::runtime_error("not a matrix file: " + path.string());
  if (rows < 0 || cols < 0) throw std::runtime_error("corrupt matrix header: " + path.string());
  if (kind) *kind = std::string(tag, strnlen(tag, kKindBytes));
  Eigen::MatrixXd m(rows, cols);
  for (std::int64_t i = 0; i < rows; ++i)
    for (std::int64_t j = 0; j < cols; ++j) {
      double v;
      in.read(reinterpret_cast<char*>(&v), sizeof(v));
      m(i, j) = v;
    }
  if (!in) throw std::runtime_error("truncated matrix file: " + path.string());
  return m;
}

inline void write_vector(const std::filesystem::path& path, const Eigen::VectorXd& v,
                         const std::string& kind) {
  write_matrix(path, v, kind);
}

inline Eigen::VectorXd read_vector(const std::filesystem::path& path, std::string* kind = nullptr) {
  Eigen::MatrixXd m = read_matrix(path, kind);
  if (m.cols() != 1) throw std::runtime_error("expected a single-column file: " + path.string());
  return m.col(0);
}

/// Flat key=value text: one pair per line, '#' comments, blank lines ignored.
inline std::map<std::string, std::string> parse_key_values(std::istream& in,
                                                           const std::string& origin) {
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const char* ws = " \t\r";
    s.erase(0, s.find_first_not_of(ws));
    auto last = s.find_last_not_of(ws);
    s.erase(last == std::string::npos ? 0 : last + 1);
    return s;
  };
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(origin + ":" + std::to_string(lineno) + ": expected key=value");
    std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key.empty()) throw std::invalid_argument(origin + ":" + std::to_string(lineno) + ": empty key");
    if (kv.count(key))
      throw std::invalid_argument(origin + ":" + std::to_string(lineno) + ": duplicate key " + key);
    kv[key] = value;
  }
  return kv;
}

inline std::map<std::string, std::string> parse_key_value_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path.string());
  return parse_key_values(in, path.filename().string());
}

}  // namespace semrom
