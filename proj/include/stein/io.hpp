#pragma once

#include <filesystem>
#include <ostream>
#include <string>

#include "stein/diagnostics.hpp"
#include "stein/types.hpp"

namespace stein {

// Shortest round-trip decimal form of a double.
std::string format_double(double value);

// Sample files are CSV. Plain sample sets carry the header x1,...,xd; run
// traces and pooled files prepend iter,particle columns. The reader accepts
// both layouts and returns the coordinate block.
void write_samples_csv(const std::filesystem::path& path, const Matrix& samples);
Matrix read_samples_csv(const std::filesystem::path& path);

void write_csv_header(std::ostream& out, Index dim);
void append_ensemble_rows(std::ostream& out, long iteration, const Matrix& positions);

void write_pp_csv(const std::filesystem::path& path, const PpCurve& curve);

}  // namespace stein
