#include "pnpafem/io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <stdexcept>

namespace pnpafem {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    return out;
}

}  // namespace

void write_mesh_text(const Mesh& mesh, std::ostream& out) {
    out << std::setprecision(17);
    out << mesh.vertex_count() << ' ' << mesh.triangle_count() << ' ' << mesh.edge_count() << '\n';
    for (const auto& v : mesh.vertices()) out << v.x << ' ' << v.y << '\n';
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tri = mesh.triangles()[t];
        out << tri[0] << ' ' << tri[1] << ' ' << tri[2] << ' '
            << static_cast<int>(mesh.refinement_edges()[t]) << '\n';
    }
    for (int e = 0; e < mesh.edge_count(); ++e) {
        out << mesh.edges()[e][0] << ' ' << mesh.edges()[e][1] << ' '
            << static_cast<int>(mesh.edge_flags()[e]) << '\n';
    }
    if (!out) throw std::runtime_error("write_mesh_text: stream failure");
}

void write_mesh_text(const Mesh& mesh, const std::string& path) {
    auto out = open_out(path);
    write_mesh_text(mesh, out);
}

MeshPtr read_mesh_text(std::istream& in) {
    int nv = 0, nt = 0, ne = 0;
    if (!(in >> nv >> nt >> ne)) throw std::runtime_error("read_mesh_text: bad header");
    std::vector<Vec2> verts(nv);
    for (auto& v : verts)
        if (!(in >> v.x >> v.y)) throw std::runtime_error("read_mesh_text: bad vertex line");
    std::vector<std::array<int, 3>> tris(nt);
    std::vector<int> refedges(nt);
    for (int t = 0; t < nt; ++t)
        if (!(in >> tris[t][0] >> tris[t][1] >> tris[t][2] >> refedges[t]))
            throw std::runtime_error("read_mesh_text: bad triangle line");
    std::map<std::pair<int, int>, EdgeFlag> flags;
    for (int e = 0; e < ne; ++e) {
        int a = 0, b = 0, f = 0;
        if (!(in >> a >> b >> f)) throw std::runtime_error("read_mesh_text: bad edge line");
        flags[{std::min(a, b), std::max(a, b)}] = static_cast<EdgeFlag>(f);
    }
    for (int r : refedges)
        if (r < 0 || r > 2) throw std::runtime_error("read_mesh_text: bad refinement edge tag");

    auto flag_of = [&flags](int a, int b, bool on_boundary) {
        auto it = flags.find({std::min(a, b), std::max(a, b)});
        if (it == flags.end())
            throw std::runtime_error("read_mesh_text: triangulation edge missing from edge list");
        return on_boundary ? it->second : EdgeFlag::interior;
    };
    std::vector<std::int8_t> ref8(refedges.begin(), refedges.end());
    auto mesh = detail::make_mesh(std::move(verts), std::move(tris), std::move(ref8), {}, flag_of);
    if (mesh->edge_count() != ne)
        throw std::runtime_error("read_mesh_text: edge count does not match triangulation");
    return mesh;
}

MeshPtr read_mesh_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    return read_mesh_text(in);
}

void export_vtk(const Mesh& mesh, const PNPState& state, const std::string& path) {
    auto out = open_out(path);
    out << std::setprecision(17);
    out << "# vtk DataFile Version 3.0\n";
    out << "pnp-afem state\n";
    out << "ASCII\n";
    out << "DATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << mesh.vertex_count() << " double\n";
    for (const auto& v : mesh.vertices()) out << v.x << ' ' << v.y << " 0\n";
    out << "CELLS " << mesh.triangle_count() << ' ' << 4 * mesh.triangle_count() << '\n';
    for (const auto& tri : mesh.triangles())
        out << "3 " << tri[0] << ' ' << tri[1] << ' ' << tri[2] << '\n';
    out << "CELL_TYPES " << mesh.triangle_count() << '\n';
    for (int t = 0; t < mesh.triangle_count(); ++t) out << "5\n";
    out << "POINT_DATA " << mesh.vertex_count() << '\n';
    const std::pair<const char*, const FEFunction*> arrays[] = {
        {"p", &state.p}, {"n", &state.n}, {"psi", &state.psi}};
    for (const auto& [name, fn] : arrays) {
        out << "SCALARS " << name << " double 1\n";
        out << "LOOKUP_TABLE default\n";
        for (double v : fn->values()) out << v << '\n';
    }
    if (!out) throw std::runtime_error("export_vtk: write failure on " + path);
}

void dump_matrix_coordinate(const SparseMatrix& matrix, std::ostream& out) {
    out << std::setprecision(17);
    for (int r = 0; r < matrix.rows(); ++r)
        for (int k = matrix.row_offsets()[r]; k < matrix.row_offsets()[r + 1]; ++k)
            out << r << ' ' << matrix.column_indices()[k] << ' ' << matrix.values()[k] << '\n';
}

void write_history_csv(const LoopHistory& history, std::ostream& out) {
    out << "level,N,eta,osc,err_l2,err_h1,err_eps,gummel_iters,cond_lhs,cond_rhs\n";
    out << std::setprecision(17);
    auto opt = [](const std::optional<double>& v) {
        return v ? *v : std::numeric_limits<double>::quiet_NaN();
    };
    for (const auto& row : history.rows) {
        out << row.level << ',' << row.n_dofs << ',' << row.eta << ',' << row.osc << ','
            << opt(row.err_l2) << ',' << opt(row.err_h1) << ',' << opt(row.err_eps) << ','
            << row.gummel_iters << ',' << row.cond_lhs << ',' << row.cond_rhs << '\n';
    }
    if (!out) throw std::runtime_error("write_history_csv: stream failure");
}

void write_history_csv(const LoopHistory& history, const std::string& path) {
    auto out = open_out(path);
    write_history_csv(history, out);
}

}  // namespace pnpafem
