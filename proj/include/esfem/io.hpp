#pragma once

#include <esfem/mesh.hpp>

#include <Eigen/SparseCore>

#include <filesystem>
#include <string>
#include <vector>

namespace esfem {

/// Named nodal field: length N for scalars, 3N (node-major) for vectors.
struct NodalField
{
    enum class Kind { scalar, vector };

    std::string name;
    Kind kind = Kind::scalar;
    Vector values;
};

NodalField scalar_field(std::string name, Vector values);
NodalField vector_field(std::string name, Vector values);

///
/// Writes a legacy-ASCII VTK unstructured grid of triangles with point data.
///
/// Coordinates and field values are printed with 17 significant digits, so the output is
/// byte-identical for identical inputs.
///
void export_surface(const SurfaceMesh& mesh, const std::vector<NodalField>& fields,
                    const std::filesystem::path& path);

/// Geometry-only Wavefront OBJ (v/f lines, 1-based faces).
void export_obj(const SurfaceMesh& mesh, const std::filesystem::path& path);

/// "i j value" lines, 0-based, 17 significant digits, column-major nonzero order.
void write_coordinate(const Eigen::SparseMatrix<double>& matrix, const std::filesystem::path& path);

/// %.17g formatting used by every text writer in the library.
std::string format_g17(double value);

} // namespace esfem
