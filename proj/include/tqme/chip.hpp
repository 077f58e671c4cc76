#pragma once

#include <string>
#include <vector>

#include "tqme/linalg.hpp"

namespace tqme {

/// Canonical MZI parametrization of a 2x2 module slot:
///   U = e^{i phi_global} D(phi_out) B D(theta) B D(phi_in)
/// with B = (1/sqrt2)[[1,i],[i,1]] and D(x) = diag(1, e^{ix}).
/// All phases reduced to [0, 2pi).
struct MziSettings {
    double phi_in = 0.0;
    double theta = 0.0;
    double phi_out = 0.0;
    double phi_global = 0.0;
};

/// One row of the bundled module-pair dataset.
struct ModulePairRecord {
    std::size_t index = 0; // 1..21
    UnitaryMatrix w;
    UnitaryMatrix v;
};

/// Builds the 2x2 unitary realized by the given phase settings.
UnitaryMatrix unitary_from_mzi(const MziSettings& s);

/// Inverts the parametrization: returns settings whose rebuilt unitary
/// matches U up to a global phase (|Tr(U† U')|^2/4 = 1 within 1e-9).
/// theta in [0, pi] comes from |U_00|; degenerate diagonal/anti-diagonal
/// inputs fix the undetermined phase to 0.
MziSettings mzi_from_unitary(const UnitaryMatrix& u);

/// Loads the 21-pair dataset (array of {index, W, V} in the shared unitary
/// JSON format). Every matrix must pass the 4-decimal unitarity tolerance
/// (5e-3); with `project` set, matrices are snapped to the nearest unitary
/// after validation. Any failure throws DatasetError naming the row.
std::vector<ModulePairRecord> load_pair_table(const std::string& path, bool project = false);

} // namespace tqme
