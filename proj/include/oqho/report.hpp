#pragma once

#include <Eigen/Dense>
#include <string>

namespace oqho {

// 17 significant digits: round-trip exact for IEEE doubles, so identical
// runs emit byte-identical files.
std::string format_full(double v);

// Writes via a temp file in the same directory and renames on success;
// a failed run leaves no partial output behind.
void write_text_atomic(const std::string& path, const std::string& content);

// Row-major full-precision dump, one matrix row per line.
std::string matrix_dump(const Eigen::MatrixXd& m);

} // namespace oqho
