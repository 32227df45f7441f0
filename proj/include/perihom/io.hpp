/// @file io.hpp
/// @brief Field serialization (binary .fld plus CSV), RFC-4180 CSV tables,
/// and small JSON helpers for the report files. The formats are documented
/// in docs/field-format.md.
#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "perihom/fields.hpp"

namespace perihom {

/// Binary field file: ASCII header line
///   "PHFLD1 d=<d> n=<n1>[x<n2>[x<n3>]] components=<c>\n"
/// followed by c blocks of little-endian float64 node values in row-major
/// order.
void write_field_binary(const std::string& path, const std::vector<ScalarField>& components);

/// CSV twin of the binary format: node coordinates then one column per
/// component, CRLF line endings.
void write_field_csv(const std::string& path, const std::vector<ScalarField>& components,
                     const std::vector<std::string>& names);

/// Read back a binary field file.
std::vector<ScalarField> read_field_binary(const std::string& path);

/// RFC-4180 table: header row plus data rows, CRLF terminated, fields quoted
/// only when needed.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

void write_json(const std::string& path, const nlohmann::json& j);

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m);
nlohmann::json vector_to_json(const Eigen::VectorXd& v);

std::string format_double(double v);

}  // namespace perihom
