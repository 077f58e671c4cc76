#include "tqme/chip.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include <nlohmann/json.hpp>

#include "tqme/errors.hpp"
#include "tqme/unitary_io.hpp"

namespace tqme {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double reduce_phase(double x) {
    double r = std::fmod(x, kTwoPi);
    if (r < 0.0) {
        r += kTwoPi;
    }
    return r == kTwoPi ? 0.0 : r;
}

ComplexMatrix diag_phase(double x) {
    ComplexMatrix d(2, 2);
    d.at(0, 0) = 1.0;
    d.at(1, 1) = std::polar(1.0, x);
    return d;
}

ComplexMatrix splitter() {
    const double s = 1.0 / std::sqrt(2.0);
    ComplexMatrix b(2, 2);
    b.at(0, 0) = s;
    b.at(0, 1) = cdouble(0.0, s);
    b.at(1, 0) = cdouble(0.0, s);
    b.at(1, 1) = s;
    return b;
}

// Magnitudes below this are treated as structural zeros when inverting the
// parametrization (degenerate bar/cross settings).
constexpr double kDegenerate = 1e-6;

} // namespace

UnitaryMatrix unitary_from_mzi(const MziSettings& s) {
    const ComplexMatrix b = splitter();
    ComplexMatrix u = diag_phase(s.phi_out) * b * diag_phase(s.theta) * b * diag_phase(s.phi_in);
    const cdouble global = std::polar(1.0, s.phi_global);
    ComplexMatrix scaled(2, 2);
    for (std::size_t r = 0; r < 2; ++r) {
        for (std::size_t c = 0; c < 2; ++c) {
            scaled.at(r, c) = global * u.at(r, c);
        }
    }
    return UnitaryMatrix(std::move(scaled), kUnitaryTolGenerated);
}

MziSettings mzi_from_unitary(const UnitaryMatrix& u) {
    if (u.dim() != 2) {
        throw ValidationError("MZI inversion is defined for 2x2 unitaries");
    }
    if (!is_unitary(u.matrix(), 1e-8)) {
        throw ValidationError("matrix is not unitary within 1e-8");
    }
    // Closed form of the parametrization:
    //   U00 = -g sin(t/2),            U01 = g cos(t/2) e^{i phi_in},
    //   U10 = g cos(t/2) e^{i phi_out}, U11 = g sin(t/2) e^{i(phi_in+phi_out)},
    // with g = i e^{i t/2} e^{i phi_global}.
    const cdouble u00 = u.at(0, 0);
    const cdouble u01 = u.at(0, 1);
    const cdouble u10 = u.at(1, 0);
    const cdouble u11 = u.at(1, 1);

    const double sin_half = std::min(1.0, std::abs(u00));
    const double theta = 2.0 * std::asin(sin_half);
    const double cos_half = std::cos(theta / 2.0);

    cdouble g;
    double phi_in = 0.0;
    double phi_out = 0.0;
    if (sin_half < kDegenerate) {
        // Cross state: diagonal entries are structural zeros; phi_in is
        // undetermined and fixed to 0.
        g = u01 / cos_half;
        phi_in = 0.0;
        phi_out = std::arg(u10 / g);
    } else if (cos_half < kDegenerate) {
        // Bar state: off-diagonal entries are structural zeros.
        g = -u00 / sin_half;
        phi_in = 0.0;
        phi_out = std::arg(u11 / g);
    } else {
        g = -u00 / sin_half;
        phi_in = std::arg(u01 / g);
        phi_out = std::arg(u10 / g);
    }
    const double phi_global = std::arg(cdouble(0.0, -1.0) * g * std::polar(1.0, -theta / 2.0));

    MziSettings s;
    s.theta = reduce_phase(theta);
    s.phi_in = reduce_phase(phi_in);
    s.phi_out = reduce_phase(phi_out);
    s.phi_global = reduce_phase(phi_global);
    return s;
}

std::vector<ModulePairRecord> load_pair_table(const std::string& path, bool project) {
    std::ifstream in(path);
    if (!in) {
        throw DatasetError("cannot open dataset: " + path);
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DatasetError("malformed dataset JSON in " + path + ": " + e.what());
    }
    if (!j.is_array() || j.size() != 21) {
        throw DatasetError("dataset must contain exactly 21 pair records");
    }
    std::vector<ModulePairRecord> records;
    records.reserve(j.size());
    for (std::size_t row = 0; row < j.size(); ++row) {
        const auto& item = j[row];
        try {
            if (!item.contains("index") || !item.contains("W") || !item.contains("V")) {
                throw ValidationError("record must carry index, W and V");
            }
            const auto index = item.at("index").get<std::size_t>();
            if (index != row + 1) {
                throw ValidationError("record index out of order");
            }
            UnitaryMatrix w = unitary_from_json(item.at("W"), kUnitaryTolTable, project);
            UnitaryMatrix v = unitary_from_json(item.at("V"), kUnitaryTolTable, project);
            if (w.dim() != 2 || v.dim() != 2) {
                throw ValidationError("pair matrices must be 2x2");
            }
            records.push_back({index, std::move(w), std::move(v)});
        } catch (const Error& e) {
            throw DatasetError("dataset row " + std::to_string(row + 1) + ": " + e.what());
        }
    }
    return records;
}

} // namespace tqme
