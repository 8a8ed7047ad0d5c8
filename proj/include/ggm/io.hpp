#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ggm/covariance.hpp"
#include "ggm/linalg.hpp"

namespace ggm {

class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

namespace io {

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Atomic write: temp file in the target directory, then rename.
inline void atomic_write(const std::filesystem::path& path,
                         const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
  }
  std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// FNV-1a 64-bit digest of a file's bytes, as hex; embedded in reports
// so equal inputs are checkable at a glance.
inline std::string file_digest(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

// Headerless CSV matrix: one row per line, comma-separated.
inline Matrix parse_csv_matrix(const std::string& text,
                               const std::string& origin = "<string>") {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream fields(line);
    std::string field;
    while (std::getline(fields, field, ',')) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(field, &used);
      } catch (const std::exception&) {
        throw ParseError(origin + ":" + std::to_string(line_no) +
                         ": bad number '" + field + "'");
      }
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError(origin + ":" + std::to_string(line_no) +
                       ": ragged row");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(origin + ": empty matrix");
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          rows[r][c];
    }
  }
  return m;
}

inline Matrix read_csv_matrix(const std::filesystem::path& path) {
  return parse_csv_matrix(read_file(path), path.string());
}

inline std::string to_csv(const Matrix& m) {
  std::ostringstream out;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out << ',';
      out << format_double(m(r, c));
    }
    out << '\n';
  }
  return out.str();
}

inline void write_csv_matrix(const std::filesystem::path& path,
                             const Matrix& m) {
  atomic_write(path, to_csv(m));
}

// Sidecar label file: one variable name per line.
inline std::vector<std::string> read_labels(
    const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::vector<std::string> labels;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) labels.push_back(line);
  }
  return labels;
}

// Cohort manifest: `key = value` lines plus one `subject <idx>:
// <train> <test>` record per subject and optional `truth <idx>: <path>`
// lines. Paths are relative to the manifest's directory.
struct ManifestEntry {
  std::string train_path;
  std::string test_path;
  std::string truth_path;  // optional
};

struct Manifest {
  std::map<std::string, std::string> header;
  std::vector<ManifestEntry> subjects;
};

inline Manifest parse_manifest(const std::string& text,
                               const std::string& origin = "<string>") {
  Manifest m;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string head;
    fields >> head;
    if (head == "subject" || head == "truth") {
      std::size_t idx = 0;
      std::string idx_token;
      fields >> idx_token;
      if (idx_token.empty() || idx_token.back() != ':') {
        throw ParseError(origin + ":" + std::to_string(line_no) +
                         ": expected 'subject <idx>:'");
      }
      idx_token.pop_back();
      idx = std::stoul(idx_token);
      if (m.subjects.size() <= idx) m.subjects.resize(idx + 1);
      if (head == "subject") {
        if (!(fields >> m.subjects[idx].train_path >>
              m.subjects[idx].test_path)) {
          throw ParseError(origin + ":" + std::to_string(line_no) +
                           ": subject record needs two session paths");
        }
      } else {
        fields >> m.subjects[idx].truth_path;
      }
    } else {
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw ParseError(origin + ":" + std::to_string(line_no) +
                         ": expected 'key = value'");
      }
      auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t");
        const auto b = s.find_last_not_of(" \t");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
      };
      m.header[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
  }
  for (std::size_t i = 0; i < m.subjects.size(); ++i) {
    if (m.subjects[i].train_path.empty() || m.subjects[i].test_path.empty()) {
      throw ParseError(origin + ": subject " + std::to_string(i) +
                       " missing session paths");
    }
  }
  if (m.subjects.empty()) throw ParseError(origin + ": no subjects");
  return m;
}

inline Manifest read_manifest(const std::filesystem::path& path) {
  return parse_manifest(read_file(path), path.string());
}

inline std::string manifest_text(const Manifest& m) {
  std::ostringstream out;
  out << "# cohort manifest\n";
  for (const auto& [key, value] : m.header) {
    out << key << " = " << value << '\n';
  }
  for (std::size_t i = 0; i < m.subjects.size(); ++i) {
    out << "subject " << i << ": " << m.subjects[i].train_path << ' '
        << m.subjects[i].test_path << '\n';
    if (!m.subjects[i].truth_path.empty()) {
      out << "truth " << i << ": " << m.subjects[i].truth_path << '\n';
    }
  }
  return out.str();
}

// Structured report document: `key = value` lines grouped in
// [sections], with tab-separated tables introduced by `table <name>`
// and terminated by a blank line. Human-readable and trivially
// machine-parseable.
class ReportWriter {
 public:
  void section(const std::string& name) {
    if (!body_.empty()) body_ += '\n';
    body_ += "[" + name + "]\n";
  }

  void field(const std::string& key, const std::string& value) {
    body_ += key + " = " + value + '\n';
  }

  void field(const std::string& key, double value) {
    field(key, format_double(value));
  }

  void field(const std::string& key, long long value) {
    field(key, std::to_string(value));
  }

  void table(const std::string& name,
             const std::vector<std::string>& columns,
             const std::vector<std::vector<std::string>>& rows) {
    body_ += "table " + name + '\n';
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c) body_ += '\t';
      body_ += columns[c];
    }
    body_ += '\n';
    for (const auto& row : rows) {
      for (std::size_t c = 0; c < row.size(); ++c) {
        if (c) body_ += '\t';
        body_ += row[c];
      }
      body_ += '\n';
    }
    body_ += '\n';
  }

  const std::string& text() const { return body_; }

  void write(const std::filesystem::path& path) const {
    atomic_write(path, body_);
  }

 private:
  std::string body_;
};

}  // namespace io
}  // namespace ggm
