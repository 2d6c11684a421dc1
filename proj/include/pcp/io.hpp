#pragma once

// Text formats for matrices and masks.
//
//   matrix:  "pcpmat 1" / "<rows> <cols>" / rows*cols values, row-major
//   mask:    "pcpmask 1" / "<rows> <cols> <count>" / count lines "<i> <j>"
//
// Values are written with 17 significant digits so a write/read cycle
// reproduces every double exactly. Beyond the header lines, whitespace
// (including line breaks) is free.

#include "pcp/core.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <string>
#include <string_view>

namespace pcp {

namespace detail {

/// Splits a stream into whitespace-separated tokens, tracking line numbers.
class Tokenizer {
 public:
  explicit Tokenizer(std::istream& in) : in_(in) {}

  /// Next token, or false at end of input.
  bool next(std::string& tok) {
    tok.clear();
    int c = 0;
    while ((c = in_.get()) != EOF) {
      if (c == '\n') {
        ++line_;
        continue;
      }
      if (!std::isspace(c)) break;
    }
    if (c == EOF) return false;
    token_line_ = line_;
    tok.push_back(static_cast<char>(c));
    while ((c = in_.peek()) != EOF && !std::isspace(c)) tok.push_back(static_cast<char>(in_.get()));
    return true;
  }

  std::string expect(const char* what) {
    std::string tok;
    if (!next(tok)) throw ParseError(std::string("unexpected end of input, expected ") + what, line_);
    return tok;
  }

  /// Line of the most recently returned token (1-based).
  std::size_t line() const noexcept { return token_line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 1;
  std::size_t token_line_ = 1;
};

inline double parse_double(const std::string& tok, std::size_t line) {
  // strtod accepts "inf"/"nan" and hex floats; non-finite values are rejected below.
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (tok.empty() || end != tok.c_str() + tok.size()) throw ParseError("non-numeric token '" + tok + "'", line);
  if (!std::isfinite(v)) throw ParseError("non-finite value '" + tok + "'", line);
  return v;
}

inline long long parse_count(const std::string& tok, std::size_t line, const char* what) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || v < 0) {
    throw ParseError(std::string("invalid ") + what + " '" + tok + "'", line);
  }
  return v;
}

inline void expect_magic(Tokenizer& tz, std::string_view magic) {
  const std::string tag = tz.expect("format tag");
  if (tag != magic) throw ParseError("expected '" + std::string(magic) + "', found '" + tag + "'", tz.line());
  const std::string version = tz.expect("format version");
  if (version != "1") throw ParseError("unsupported format version '" + version + "'", tz.line());
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

inline DenseMatrix read_matrix(std::istream& in) {
  detail::Tokenizer tz(in);
  detail::expect_magic(tz, "pcpmat");
  const long long rows = detail::parse_count(tz.expect("row count"), tz.line(), "row count");
  const long long cols = detail::parse_count(tz.expect("column count"), tz.line(), "column count");
  if (rows == 0 || cols == 0) throw ParseError("matrix dimensions must be positive", tz.line());
  DenseMatrix m(rows, cols);
  std::string tok;
  for (long long i = 0; i < rows; ++i) {
    for (long long j = 0; j < cols; ++j) {
      if (!tz.next(tok)) {
        throw ParseError("expected " + std::to_string(rows * cols) + " values, found " + std::to_string(i * cols + j),
                         tz.line());
      }
      m(i, j) = detail::parse_double(tok, tz.line());
    }
  }
  if (tz.next(tok)) throw ParseError("more values than the declared " + std::to_string(rows * cols), tz.line());
  return m;
}

inline void write_matrix(std::ostream& out, const DenseMatrix& m) {
  out << "pcpmat 1\n" << m.rows() << ' ' << m.cols() << '\n';
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ' ';
      out << detail::format_double(m(i, j));
    }
    out << '\n';
  }
}

inline SupportMask read_mask(std::istream& in) {
  detail::Tokenizer tz(in);
  detail::expect_magic(tz, "pcpmask");
  const long long rows = detail::parse_count(tz.expect("row count"), tz.line(), "row count");
  const long long cols = detail::parse_count(tz.expect("column count"), tz.line(), "column count");
  const long long count = detail::parse_count(tz.expect("entry count"), tz.line(), "entry count");
  if (rows == 0 || cols == 0) throw ParseError("mask dimensions must be positive", tz.line());
  if (count > rows * cols) throw ParseError("entry count exceeds rows*cols", tz.line());
  std::vector<SupportMask::Entry> entries;
  entries.reserve(static_cast<std::size_t>(count));
  std::set<SupportMask::Entry> seen;
  std::string tok;
  for (long long k = 0; k < count; ++k) {
    if (!tz.next(tok)) throw ParseError("expected " + std::to_string(count) + " entries, found " + std::to_string(k), tz.line());
    const long long i = detail::parse_count(tok, tz.line(), "row index");
    const long long j = detail::parse_count(tz.expect("column index"), tz.line(), "column index");
    if (i >= rows || j >= cols) {
      throw ParseError("entry (" + std::to_string(i) + ", " + std::to_string(j) + ") out of range", tz.line());
    }
    if (!seen.emplace(i, j).second) {
      throw ParseError("duplicate entry (" + std::to_string(i) + ", " + std::to_string(j) + ")", tz.line());
    }
    entries.emplace_back(i, j);
  }
  if (tz.next(tok)) throw ParseError("more entries than the declared " + std::to_string(count), tz.line());
  return SupportMask::from_entries(rows, cols, std::move(entries));
}

inline void write_mask(std::ostream& out, const SupportMask& mask) {
  out << "pcpmask 1\n" << mask.rows() << ' ' << mask.cols() << ' ' << mask.size() << '\n';
  for (const auto& [i, j] : mask) out << i << ' ' << j << '\n';
}

inline DenseMatrix read_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "' for reading");
  return read_matrix(in);
}

inline void write_matrix(const std::string& path, const DenseMatrix& m) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  write_matrix(out, m);
  if (!out) throw Error("write to '" + path + "' failed");
}

inline SupportMask read_mask(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "' for reading");
  return read_mask(in);
}

inline void write_mask(const std::string& path, const SupportMask& mask) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  write_mask(out, mask);
  if (!out) throw Error("write to '" + path + "' failed");
}

}  // namespace pcp
