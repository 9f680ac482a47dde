#ifndef TWOISO_IO_HPP
#define TWOISO_IO_HPP

// Operator files are JSON documents:
//   {"rows": r, "cols": c, "entries": [[re, im], ...]}   (row-major, r*c pairs)

#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "twoiso/error.hpp"
#include "twoiso/linalg.hpp"
#include "twoiso/operators.hpp"

namespace twoiso {

inline nlohmann::json operator_to_json(const DenseOperator& op) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& z : op.matrix().entries()) entries.push_back({z.real(), z.imag()});
  return {{"rows", op.rows()}, {"cols", op.cols()}, {"entries", std::move(entries)}};
}

inline DenseOperator operator_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::IoError, "operator document must be an object");
  for (const char* key : {"rows", "cols", "entries"}) {
    if (!doc.contains(key)) throw Error(ErrorCode::IoError, std::string("operator document lacks field ") + key);
  }
  if (!doc["rows"].is_number_unsigned() || !doc["cols"].is_number_unsigned()) {
    throw Error(ErrorCode::IoError, "rows and cols must be positive integers");
  }
  const auto rows = doc["rows"].get<std::size_t>();
  const auto cols = doc["cols"].get<std::size_t>();
  const auto& entries = doc["entries"];
  if (rows == 0 || cols == 0) throw Error(ErrorCode::IoError, "rows and cols must be positive");
  if (!entries.is_array() || entries.size() != rows * cols) {
    throw Error(ErrorCode::IoError, "entries must hold rows*cols [re, im] pairs");
  }
  std::vector<cplx> data;
  data.reserve(entries.size());
  for (const auto& e : entries) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
      throw Error(ErrorCode::IoError, "each entry must be a [re, im] pair of numbers");
    }
    data.emplace_back(e[0].get<double>(), e[1].get<double>());
  }
  DenseMatrix m(rows, cols, std::move(data));
  if (!m.is_finite()) throw Error(ErrorCode::IoError, "operator entries must be finite");
  return DenseOperator(std::move(m));
}

inline void write_operator_file(const DenseOperator& op, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
  out << operator_to_json(op).dump(2) << '\n';
  if (!out) throw Error(ErrorCode::IoError, "write to " + path + " failed");
}

inline DenseOperator read_operator_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::IoError, path + ": " + e.what());
  }
  return operator_from_json(doc);
}

/// 17 significant digits, enough to round-trip any double.
inline std::string format_real(double v) {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return os.str();
}

/// Writes to `path`, or to stdout when path is empty or "-".
template <class Writer>
void with_output(const std::string& path, Writer&& write) {
  if (path.empty() || path == "-") {
    write(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
  write(out);
  if (!out) throw Error(ErrorCode::IoError, "write to " + path + " failed");
}

}  // namespace twoiso

#endif  // TWOISO_IO_HPP
