#pragma once

#include <iosfwd>
#include <string>

#include "pnpafem/adapt.hpp"
#include "pnpafem/mesh.hpp"
#include "pnpafem/pnp.hpp"
#include "pnpafem/sparse.hpp"

namespace pnpafem {

/**
 * Plain-text mesh format, 0-based indices:
 *   line 1:       nv nt ne
 *   nv lines:     x y
 *   nt lines:     i j k refedge
 *   ne lines:     a b flag        (flag 0 = interior, 1 = Dirichlet)
 * Doubles are printed with 17 significant digits, so write/read round-trips
 * bit-exactly for finite values.
 */
void write_mesh_text(const Mesh& mesh, std::ostream& out);
void write_mesh_text(const Mesh& mesh, const std::string& path);
MeshPtr read_mesh_text(std::istream& in);
MeshPtr read_mesh_text(const std::string& path);

/// Legacy ASCII VTK unstructured grid with point data arrays p, n, psi.
void export_vtk(const Mesh& mesh, const PNPState& state, const std::string& path);

/// One `i j v` line per stored entry (coordinate format, debugging aid).
void dump_matrix_coordinate(const SparseMatrix& matrix, std::ostream& out);

/// CSV with header level,N,eta,osc,err_l2,err_h1,err_eps,gummel_iters,
/// cond_lhs,cond_rhs; absent error columns print as nan.
void write_history_csv(const LoopHistory& history, std::ostream& out);
void write_history_csv(const LoopHistory& history, const std::string& path);

}  // namespace pnpafem
