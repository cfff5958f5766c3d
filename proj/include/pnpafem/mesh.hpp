#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace pnpafem {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
double norm(Vec2 a);

enum class EdgeFlag : std::uint8_t { interior = 0, dirichlet = 1 };

/// Per-triangle geometric quantities. Local edge k is the edge opposite
/// local vertex k; basis_gradients[k] is the (constant) gradient of the
/// barycentric basis function attached to vertex k.
struct ElementGeometry {
    double area = 0.0;
    double diameter = 0.0;  // h_T, the longest edge
    std::array<double, 3> edge_lengths{};
    std::array<Vec2, 3> unit_normals{};  // outward, per local edge
    std::array<Vec2, 3> basis_gradients{};
    Vec2 centroid{};
};

class Mesh;
using MeshPtr = std::shared_ptr<const Mesh>;

/// Classifies a boundary edge by its midpoint. The default (empty) spec
/// marks every boundary edge Dirichlet.
using BoundarySpec = std::function<EdgeFlag(Vec2 midpoint)>;

/**
 * Conforming triangulation with an explicit edge table and per-triangle
 * refinement-edge tags for newest-vertex bisection. A Mesh is immutable
 * after construction; refinement builds a new Mesh (see bisect()).
 *
 * Triangles are stored counterclockwise. Edges are deduplicated with
 * endpoints ordered a < b; interior edges have two incident triangles,
 * boundary edges one (second slot is -1).
 */
class Mesh {
public:
    int vertex_count() const { return static_cast<int>(vertices_.size()); }
    int triangle_count() const { return static_cast<int>(triangles_.size()); }
    int edge_count() const { return static_cast<int>(edges_.size()); }

    const std::vector<Vec2>& vertices() const { return vertices_; }
    const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
    const std::vector<std::array<int, 2>>& edges() const { return edges_; }
    const std::vector<std::array<int, 2>>& edge_triangles() const { return edge_triangles_; }
    const std::vector<EdgeFlag>& edge_flags() const { return edge_flags_; }
    const std::vector<std::array<int, 3>>& triangle_edges() const { return triangle_edges_; }
    const std::vector<std::int8_t>& refinement_edges() const { return refinement_edges_; }
    const std::vector<std::int32_t>& generations() const { return generations_; }

    /// True for vertices lying on at least one Dirichlet boundary edge.
    const std::vector<std::uint8_t>& vertex_is_dirichlet() const { return vertex_is_dirichlet_; }
    int interior_vertex_count() const;
    int boundary_edge_count() const;

    ElementGeometry geometry(int triangle) const;
    double total_area() const;
    double min_angle() const;  // radians
    /// Diagonal of the coordinate bounding box (equals diam(Omega) for the
    /// built-in domains).
    double bbox_diameter() const;

private:
    Mesh() = default;
    friend Mesh make_mesh_impl(std::vector<Vec2>, std::vector<std::array<int, 3>>,
                               std::vector<std::int8_t>, std::vector<std::int32_t>,
                               const std::function<EdgeFlag(int, int, bool)>&);

    std::vector<Vec2> vertices_;
    std::vector<std::array<int, 3>> triangles_;
    std::vector<std::array<int, 2>> edges_;
    std::vector<std::array<int, 2>> edge_triangles_;
    std::vector<EdgeFlag> edge_flags_;
    std::vector<std::array<int, 3>> triangle_edges_;
    std::vector<std::int8_t> refinement_edges_;
    std::vector<std::int32_t> generations_;
    std::vector<std::uint8_t> vertex_is_dirichlet_;
};

/// Builds a conforming mesh from raw vertex/triangle data. Refinement edges
/// are initialized to the longest edge of each triangle, ties broken by the
/// smallest global index of the opposite vertex.
///
/// Throws std::invalid_argument on empty input, out-of-range indices,
/// degenerate (non-positive-area) triangles, unclassified boundary edges,
/// and nonmanifold edges (more than two incident triangles).
MeshPtr build_mesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles,
                   const BoundarySpec& boundary = {});

namespace detail {
/// Builder that keeps caller-provided refinement edges, generations and edge
/// flags; used by refinement and the mesh text reader. Empty refinement_edges
/// or generations fall back to the defaults of build_mesh.
MeshPtr make_mesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles,
                  std::vector<std::int8_t> refinement_edges, std::vector<std::int32_t> generations,
                  const std::function<EdgeFlag(int, int, bool)>& edge_flag);
}  // namespace detail

enum class DomainKind { unit_square, l_shape };

/// Structured initial mesh of a built-in domain with `subdivision` cells per
/// unit length, each cell split along its lower-left/upper-right diagonal.
/// The whole boundary is marked Dirichlet.
MeshPtr domain_mesh(DomainKind kind, int subdivision);

/// Result of one bisection pass: the refined mesh plus the transfer data
/// needed for P1 prolongation and element ancestry lookups.
struct Refinement {
    MeshPtr coarse;
    MeshPtr fine;
    /// For each fine vertex v >= coarse->vertex_count(): the two fine vertex
    /// ids whose midpoint created v (parents always precede v).
    std::vector<std::array<int, 2>> midpoint_parents;
    /// Per fine triangle: the id of the coarse triangle it descends from.
    std::vector<int> ancestor;
};

/// Newest-vertex bisection of all marked triangles with recursive conformity
/// closure. Throws std::out_of_range for bad ids and std::runtime_error if
/// closure recursion exceeds max_closure_depth.
Refinement bisect(const MeshPtr& mesh, std::span<const int> marked, int max_closure_depth = 64);

/// P1 prolongation of vertex values from refinement.coarse to refinement.fine.
/// Exact for piecewise-linear functions (new vertices are edge midpoints).
std::vector<double> prolong(const Refinement& refinement, std::span<const double> coarse_values);

/// Full structural audit used by tests: orientation, edge incidence counts,
/// refinement-edge tags, and a midpoint scan for hanging nodes. Throws
/// std::logic_error describing the first violation found.
void validate_mesh(const Mesh& mesh);

}  // namespace pnpafem
