#pragma once

#include <string>

#include <nlohmann/json_fwd.hpp>

#include "tqme/linalg.hpp"

namespace tqme {

/// Shared wire format for module unitaries:
///   {"dim": d, "matrix": [[[re,im], ... d entries ...], ... d rows ...]}
/// row-major, doubles.
nlohmann::json unitary_to_json(const UnitaryMatrix& u);

/// Parses the wire format above into a raw matrix (no unitarity check).
ComplexMatrix matrix_from_json(const nlohmann::json& j);

/// Parses and validates at `tol`; with `project` set, non-unitary input is
/// replaced by its nearest unitary instead of being rejected.
UnitaryMatrix unitary_from_json(const nlohmann::json& j, double tol, bool project = false);

/// File wrappers. Open/read/write failures throw IoError; malformed content
/// or failed validation throws ValidationError.
UnitaryMatrix load_unitary(const std::string& path, double tol, bool project = false);
void save_unitary(const std::string& path, const UnitaryMatrix& u);

} // namespace tqme
