#include "tqme/unitary_io.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "tqme/errors.hpp"

namespace tqme {

nlohmann::json unitary_to_json(const UnitaryMatrix& u) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t r = 0; r < u.dim(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t c = 0; c < u.dim(); ++c) {
            row.push_back({u.at(r, c).real(), u.at(r, c).imag()});
        }
        rows.push_back(std::move(row));
    }
    return {{"dim", u.dim()}, {"matrix", std::move(rows)}};
}

ComplexMatrix matrix_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("dim") || !j.contains("matrix")) {
        throw ValidationError("unitary JSON must carry \"dim\" and \"matrix\"");
    }
    const auto d = j.at("dim").get<std::size_t>();
    if (d == 0) {
        throw ValidationError("unitary JSON: dim must be >= 1");
    }
    const auto& rows = j.at("matrix");
    if (!rows.is_array() || rows.size() != d) {
        throw ValidationError("unitary JSON: matrix must have dim rows");
    }
    std::vector<cdouble> entries;
    entries.reserve(d * d);
    for (const auto& row : rows) {
        if (!row.is_array() || row.size() != d) {
            throw ValidationError("unitary JSON: each row must have dim entries");
        }
        for (const auto& cell : row) {
            if (!cell.is_array() || cell.size() != 2) {
                throw ValidationError("unitary JSON: entries must be [re, im] pairs");
            }
            entries.emplace_back(cell[0].get<double>(), cell[1].get<double>());
        }
    }
    return ComplexMatrix(d, d, std::move(entries));
}

UnitaryMatrix unitary_from_json(const nlohmann::json& j, double tol, bool project) {
    ComplexMatrix m = matrix_from_json(j);
    if (project) {
        return project_to_unitary(m);
    }
    return UnitaryMatrix(std::move(m), tol);
}

UnitaryMatrix load_unitary(const std::string& path, double tol, bool project) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open unitary file: " + path);
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("malformed JSON in " + path + ": " + e.what());
    }
    return unitary_from_json(j, tol, project);
}

void save_unitary(const std::string& path, const UnitaryMatrix& u) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open file for writing: " + path);
    }
    out << unitary_to_json(u).dump(1) << "\n";
    if (!out) {
        throw IoError("write failed: " + path);
    }
}

} // namespace tqme
