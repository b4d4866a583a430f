#include "stein/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "stein/errors.hpp"

namespace stein {

std::string format_double(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

void write_csv_header(std::ostream& out, Index dim) {
  out << "iter,particle";
  for (Index i = 0; i < dim; ++i) out << ",x" << (i + 1);
  out << "\n";
}

void append_ensemble_rows(std::ostream& out, long iteration, const Matrix& positions) {
  for (Index m = 0; m < positions.rows(); ++m) {
    out << iteration << ',' << m;
    for (Index i = 0; i < positions.cols(); ++i)
      out << ',' << format_double(positions(m, i));
    out << "\n";
  }
}

void write_samples_csv(const std::filesystem::path& path, const Matrix& samples) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  for (Index i = 0; i < samples.cols(); ++i) out << (i ? "," : "") << 'x' << (i + 1);
  out << "\n";
  for (Index r = 0; r < samples.rows(); ++r) {
    for (Index i = 0; i < samples.cols(); ++i)
      out << (i ? "," : "") << format_double(samples(r, i));
    out << "\n";
  }
}

Matrix read_samples_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": empty file");

  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) header.push_back(field);
  }
  std::size_t first_coord = 0;
  while (first_coord < header.size() && !header[first_coord].starts_with("x")) ++first_coord;
  const std::size_t dim = header.size() - first_coord;
  if (dim == 0) throw std::runtime_error(path.string() + ": no coordinate columns in header");

  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::size_t col = 0;
    while (std::getline(ss, field, ',')) {
      if (col >= first_coord) values.push_back(std::stod(field));
      ++col;
    }
    if (col != header.size())
      throw std::runtime_error(path.string() + ": ragged row " + std::to_string(rows + 2));
    ++rows;
  }

  Matrix samples(rows, dim);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < dim; ++c) samples(r, c) = values[r * dim + c];
  return samples;
}

void write_pp_csv(const std::filesystem::path& path, const PpCurve& curve) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "dimension,p,q\n";
  for (Index i = 0; i < curve.q.cols(); ++i)
    for (Index k = 0; k < curve.levels.size(); ++k)
      out << (i + 1) << ',' << format_double(curve.levels(k)) << ','
          << format_double(curve.q(k, i)) << "\n";
}

}  // namespace stein
