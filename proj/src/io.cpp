#include <esfem/errors.hpp>
#include <esfem/io.hpp>

#include <cstdio>
#include <fstream>

namespace esfem {

namespace {

std::ofstream open_for_writing(const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path)
{
    out.flush();
    if (!out) {
        throw IoError("failed writing '" + path.string() + "'");
    }
}

} // namespace

std::string format_g17(double value)
{
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

NodalField scalar_field(std::string name, Vector values)
{
    return {std::move(name), NodalField::Kind::scalar, std::move(values)};
}

NodalField vector_field(std::string name, Vector values)
{
    return {std::move(name), NodalField::Kind::vector, std::move(values)};
}

void export_surface(const SurfaceMesh& mesh, const std::vector<NodalField>& fields,
                    const std::filesystem::path& path)
{
    const auto n = static_cast<Eigen::Index>(mesh.num_nodes());
    for (const auto& field : fields) {
        const auto expected = field.kind == NodalField::Kind::scalar ? n : 3 * n;
        if (field.values.size() != expected) {
            throw FieldLengthMismatch("field '" + field.name + "' has length " + std::to_string(field.values.size())
                                      + ", expected " + std::to_string(expected));
        }
    }

    auto out = open_for_writing(path);
    out << "# vtk DataFile Version 3.0\n";
    out << "esfem surface\n";
    out << "ASCII\n";
    out << "DATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << n << " double\n";
    for (Eigen::Index j = 0; j < n; ++j) {
        const Vec3 p = mesh.nodes().node(j);
        out << format_g17(p.x()) << ' ' << format_g17(p.y()) << ' ' << format_g17(p.z()) << '\n';
    }
    const auto ntri = mesh.num_triangles();
    out << "CELLS " << ntri << ' ' << 4 * ntri << '\n';
    for (const auto& [a, b, c] : mesh.triangles()) {
        out << "3 " << a << ' ' << b << ' ' << c << '\n';
    }
    out << "CELL_TYPES " << ntri << '\n';
    for (std::size_t t = 0; t < ntri; ++t) {
        out << "5\n";
    }
    if (!fields.empty()) {
        out << "POINT_DATA " << n << '\n';
    }
    for (const auto& field : fields) {
        if (field.kind == NodalField::Kind::scalar) {
            out << "SCALARS " << field.name << " double 1\n";
            out << "LOOKUP_TABLE default\n";
            for (Eigen::Index j = 0; j < n; ++j) {
                out << format_g17(field.values[j]) << '\n';
            }
        } else {
            out << "VECTORS " << field.name << " double\n";
            for (Eigen::Index j = 0; j < n; ++j) {
                out << format_g17(field.values[3 * j]) << ' ' << format_g17(field.values[3 * j + 1]) << ' '
                    << format_g17(field.values[3 * j + 2]) << '\n';
            }
        }
    }
    finish(out, path);
}

void export_obj(const SurfaceMesh& mesh, const std::filesystem::path& path)
{
    auto out = open_for_writing(path);
    for (std::size_t j = 0; j < mesh.num_nodes(); ++j) {
        const Vec3 p = mesh.nodes().node(j);
        out << "v " << format_g17(p.x()) << ' ' << format_g17(p.y()) << ' ' << format_g17(p.z()) << '\n';
    }
    for (const auto& [a, b, c] : mesh.triangles()) {
        out << "f " << a + 1 << ' ' << b + 1 << ' ' << c + 1 << '\n';
    }
    finish(out, path);
}

void write_coordinate(const Eigen::SparseMatrix<double>& matrix, const std::filesystem::path& path)
{
    auto out = open_for_writing(path);
    for (Eigen::Index col = 0; col < matrix.outerSize(); ++col) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(matrix, col); it; ++it) {
            out << it.row() << ' ' << it.col() << ' ' << format_g17(it.value()) << '\n';
        }
    }
    finish(out, path);
}

} // namespace esfem
