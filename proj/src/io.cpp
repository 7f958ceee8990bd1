#include "lrota/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "lrota/errors.hpp"

namespace lrota {

namespace {

constexpr std::size_t kMaxOrder = 32;

void require_stream(std::ios& s, const std::string& what) {
  if (!s) throw IoError("failed to " + what);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open " + path + " for writing");
  return f;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open " + path + " for reading");
  return f;
}

void check_no_trailing(std::istream& is, const std::string& what) {
  char c;
  if (is >> c) throw IoError(what + ": trailing data after expected content");
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw IoError("failed to format double");
  return std::string(buf, p);
}

void write_tensor(std::ostream& os, const DenseTensor& a) {
  os << a.order();
  for (std::size_t s = 1; s <= a.order(); ++s) os << ' ' << a.dim(s);
  os << '\n';
  const std::size_t fiber = a.dim(a.order());
  for (std::size_t i = 0; i < a.size(); ++i) {
    os << format_double(a[i]);
    os << ((i + 1) % fiber == 0 ? '\n' : ' ');
  }
  require_stream(os, "write tensor");
}

void write_tensor_file(const std::string& path, const DenseTensor& a) {
  auto f = open_out(path);
  write_tensor(f, a);
}

DenseTensor read_tensor(std::istream& is) {
  std::size_t k = 0;
  if (!(is >> k) || k == 0 || k > kMaxOrder)
    throw IoError("tensor header: expected order in [1, " + std::to_string(kMaxOrder) + "]");
  std::vector<std::size_t> dims(k);
  std::size_t n = 1;
  for (std::size_t s = 0; s < k; ++s) {
    if (!(is >> dims[s]) || dims[s] == 0) throw IoError("tensor header: bad dimension");
    n *= dims[s];
  }
  std::vector<double> data(n);
  for (std::size_t i = 0; i < n; ++i)
    if (!(is >> data[i]))
      throw IoError("tensor body: expected " + std::to_string(n) + " values, got " +
                    std::to_string(i));
  check_no_trailing(is, "tensor body");
  return DenseTensor(std::move(dims), std::move(data));
}

DenseTensor read_tensor_file(const std::string& path) {
  auto f = open_in(path);
  return read_tensor(f);
}

void write_matrix(std::ostream& os, const Matrix& m) {
  os << "MATRIX " << m.rows() << ' ' << m.cols() << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j)
      os << format_double(m(i, j)) << (j + 1 == m.cols() ? '\n' : ' ');
  }
  require_stream(os, "write matrix");
}

void write_matrix_file(const std::string& path, const Matrix& m) {
  auto f = open_out(path);
  write_matrix(f, m);
}

Matrix read_matrix(std::istream& is) {
  std::string tag;
  if (!(is >> tag) || tag != "MATRIX") throw IoError("matrix header: expected MATRIX tag");
  std::size_t n = 0, m = 0;
  if (!(is >> n >> m) || n == 0 || m == 0) throw IoError("matrix header: bad shape");
  Matrix out(n, m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (!(is >> out(i, j))) throw IoError("matrix body: not enough values");
  check_no_trailing(is, "matrix body");
  return out;
}

Matrix read_matrix_file(const std::string& path) {
  auto f = open_in(path);
  return read_matrix(f);
}

}  // namespace lrota
