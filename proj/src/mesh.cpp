#include "pnpafem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace pnpafem {

double norm(Vec2 a) { return std::hypot(a.x, a.y); }

namespace {

std::uint64_t edge_key(int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
}

double signed_area(Vec2 a, Vec2 b, Vec2 c) { return 0.5 * cross(b - a, c - a); }

}  // namespace

int Mesh::interior_vertex_count() const {
    int n = 0;
    for (auto d : vertex_is_dirichlet_)
        if (!d) ++n;
    return n;
}

int Mesh::boundary_edge_count() const {
    int n = 0;
    for (const auto& et : edge_triangles_)
        if (et[1] < 0) ++n;
    return n;
}

ElementGeometry Mesh::geometry(int triangle) const {
    const auto& tri = triangles_[triangle];
    const Vec2 p0 = vertices_[tri[0]];
    const Vec2 p1 = vertices_[tri[1]];
    const Vec2 p2 = vertices_[tri[2]];

    ElementGeometry g;
    g.area = signed_area(p0, p1, p2);
    g.centroid = (1.0 / 3.0) * (p0 + p1 + p2);

    const std::array<Vec2, 3> pts{p0, p1, p2};
    const double inv2a = 1.0 / (2.0 * g.area);
    for (int k = 0; k < 3; ++k) {
        const Vec2 a = pts[(k + 1) % 3];
        const Vec2 b = pts[(k + 2) % 3];
        const Vec2 e = b - a;
        g.edge_lengths[k] = norm(e);
        // For a CCW triangle, rotating the edge direction by -90 degrees
        // points outward.
        g.unit_normals[k] = (1.0 / g.edge_lengths[k]) * Vec2{e.y, -e.x};
        g.basis_gradients[k] = inv2a * Vec2{a.y - b.y, b.x - a.x};
    }
    g.diameter = *std::max_element(g.edge_lengths.begin(), g.edge_lengths.end());
    return g;
}

double Mesh::total_area() const {
    double s = 0.0;
    for (int t = 0; t < triangle_count(); ++t) {
        const auto& tri = triangles_[t];
        s += signed_area(vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]);
    }
    return s;
}

double Mesh::min_angle() const {
    double best = std::numeric_limits<double>::infinity();
    for (int t = 0; t < triangle_count(); ++t) {
        const auto& tri = triangles_[t];
        for (int k = 0; k < 3; ++k) {
            const Vec2 v = vertices_[tri[k]];
            const Vec2 u = vertices_[tri[(k + 1) % 3]] - v;
            const Vec2 w = vertices_[tri[(k + 2) % 3]] - v;
            const double ang = std::atan2(std::abs(cross(u, w)), dot(u, w));
            best = std::min(best, ang);
        }
    }
    return best;
}

double Mesh::bbox_diameter() const {
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& v : vertices_) {
        xmin = std::min(xmin, v.x);
        xmax = std::max(xmax, v.x);
        ymin = std::min(ymin, v.y);
        ymax = std::max(ymax, v.y);
    }
    return std::hypot(xmax - xmin, ymax - ymin);
}

// Shared construction path: derives the edge table, checks manifoldness and
// orientation, resolves boundary flags. refinement_edges may be empty, in
// which case the longest-edge rule assigns them.
Mesh make_mesh_impl(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles,
                    std::vector<std::int8_t> refinement_edges, std::vector<std::int32_t> generations,
                    const std::function<EdgeFlag(int, int, bool)>& edge_flag) {
    if (triangles.empty()) throw std::invalid_argument("build_mesh: empty mesh");
    const int nv = static_cast<int>(vertices.size());
    const int nt = static_cast<int>(triangles.size());

    for (int t = 0; t < nt; ++t) {
        const auto& tri = triangles[t];
        for (int k = 0; k < 3; ++k) {
            if (tri[k] < 0 || tri[k] >= nv)
                throw std::invalid_argument("build_mesh: triangle " + std::to_string(t) +
                                            " has out-of-range vertex index");
        }
        if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
            throw std::invalid_argument("build_mesh: triangle " + std::to_string(t) +
                                        " repeats a vertex");
        const double a = signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
        if (a <= 0.0)
            throw std::invalid_argument("build_mesh: triangle " + std::to_string(t) +
                                        (a == 0.0 ? " is degenerate (zero area)"
                                                  : " has negative area (clockwise orientation)"));
    }

    Mesh m;
    m.vertices_ = std::move(vertices);
    m.triangles_ = std::move(triangles);
    m.generations_ = generations.empty() ? std::vector<std::int32_t>(nt, 0) : std::move(generations);

    std::unordered_map<std::uint64_t, int> edge_ids;
    edge_ids.reserve(static_cast<std::size_t>(nt) * 2);
    m.triangle_edges_.assign(nt, {-1, -1, -1});
    for (int t = 0; t < nt; ++t) {
        const auto& tri = m.triangles_[t];
        for (int k = 0; k < 3; ++k) {
            const int a = tri[(k + 1) % 3];
            const int b = tri[(k + 2) % 3];
            const auto key = edge_key(a, b);
            auto it = edge_ids.find(key);
            int e;
            if (it == edge_ids.end()) {
                e = static_cast<int>(m.edges_.size());
                edge_ids.emplace(key, e);
                m.edges_.push_back({std::min(a, b), std::max(a, b)});
                m.edge_triangles_.push_back({t, -1});
            } else {
                e = it->second;
                auto& et = m.edge_triangles_[e];
                if (et[1] >= 0)
                    throw std::invalid_argument("build_mesh: nonmanifold edge (" +
                                                std::to_string(a) + "," + std::to_string(b) +
                                                ") shared by more than two triangles");
                et[1] = t;
            }
            m.triangle_edges_[t][k] = e;
        }
    }

    m.edge_flags_.resize(m.edges_.size());
    for (std::size_t e = 0; e < m.edges_.size(); ++e) {
        const bool on_boundary = m.edge_triangles_[e][1] < 0;
        m.edge_flags_[e] = edge_flag(m.edges_[e][0], m.edges_[e][1], on_boundary);
        if (on_boundary && m.edge_flags_[e] == EdgeFlag::interior)
            throw std::invalid_argument("build_mesh: boundary edge (" +
                                        std::to_string(m.edges_[e][0]) + "," +
                                        std::to_string(m.edges_[e][1]) +
                                        ") left unclassified by boundary spec");
        if (!on_boundary) m.edge_flags_[e] = EdgeFlag::interior;
    }

    if (refinement_edges.empty()) {
        m.refinement_edges_.resize(nt);
        for (int t = 0; t < nt; ++t) {
            const auto& tri = m.triangles_[t];
            double best_len2 = -1.0;
            int best_k = 0;
            for (int k = 0; k < 3; ++k) {
                const Vec2 d = m.vertices_[tri[(k + 2) % 3]] - m.vertices_[tri[(k + 1) % 3]];
                const double len2 = dot(d, d);
                if (len2 > best_len2 || (len2 == best_len2 && tri[k] < tri[best_k])) {
                    best_len2 = len2;
                    best_k = k;
                }
            }
            m.refinement_edges_[t] = static_cast<std::int8_t>(best_k);
        }
    } else {
        m.refinement_edges_ = std::move(refinement_edges);
    }

    m.vertex_is_dirichlet_.assign(nv, 0);
    for (std::size_t e = 0; e < m.edges_.size(); ++e) {
        if (m.edge_flags_[e] == EdgeFlag::dirichlet) {
            m.vertex_is_dirichlet_[m.edges_[e][0]] = 1;
            m.vertex_is_dirichlet_[m.edges_[e][1]] = 1;
        }
    }
    return m;
}

MeshPtr detail::make_mesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles,
                          std::vector<std::int8_t> refinement_edges,
                          std::vector<std::int32_t> generations,
                          const std::function<EdgeFlag(int, int, bool)>& edge_flag) {
    return std::make_shared<Mesh>(make_mesh_impl(std::move(vertices), std::move(triangles),
                                                 std::move(refinement_edges),
                                                 std::move(generations), edge_flag));
}

MeshPtr build_mesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles,
                   const BoundarySpec& boundary) {
    // Capture vertex coordinates before they are moved into the mesh.
    auto coords = std::make_shared<std::vector<Vec2>>(vertices);
    auto flag = [&boundary, coords](int a, int b, bool on_boundary) {
        if (!on_boundary) return EdgeFlag::interior;
        if (!boundary) return EdgeFlag::dirichlet;
        return boundary(0.5 * ((*coords)[a] + (*coords)[b]));
    };
    return std::make_shared<Mesh>(
        make_mesh_impl(std::move(vertices), std::move(triangles), {}, {}, flag));
}

MeshPtr domain_mesh(DomainKind kind, int subdivision) {
    if (subdivision < 1) throw std::invalid_argument("domain_mesh: subdivision must be >= 1");
    const int s = subdivision;

    // Lattice over the bounding box; L-shape skips cells in [0,1]x[-1,0].
    double x0 = 0.0, y0 = 0.0;
    int nx = s, ny = s;
    if (kind == DomainKind::l_shape) {
        x0 = -1.0;
        y0 = -1.0;
        nx = 2 * s;
        ny = 2 * s;
    }
    const double h = 1.0 / s;

    std::vector<Vec2> verts;
    std::vector<int> vid(static_cast<std::size_t>(nx + 1) * (ny + 1), -1);
    auto lattice = [&](int i, int j) { return j * (nx + 1) + i; };
    auto in_domain = [&](double x, double y) {
        if (kind == DomainKind::unit_square) return true;
        return !(x > 0.0 && y < 0.0);  // outside the removed quadrant
    };

    std::vector<std::array<int, 3>> tris;
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const double cx = x0 + (i + 0.5) * h;
            const double cy = y0 + (j + 0.5) * h;
            if (!in_domain(cx, cy)) continue;
            int corner[4];  // ll, lr, ur, ul
            const int ii[4] = {i, i + 1, i + 1, i};
            const int jj[4] = {j, j, j + 1, j + 1};
            for (int c = 0; c < 4; ++c) {
                int& id = vid[lattice(ii[c], jj[c])];
                if (id < 0) {
                    id = static_cast<int>(verts.size());
                    verts.push_back({x0 + ii[c] * h, y0 + jj[c] * h});
                }
                corner[c] = id;
            }
            // Split along the ll-ur diagonal; both halves CCW.
            tris.push_back({corner[0], corner[1], corner[2]});
            tris.push_back({corner[0], corner[2], corner[3]});
        }
    }
    return build_mesh(std::move(verts), std::move(tris));
}

namespace {

// Mutable workspace for one bisection pass. Triangles are append-only with
// an alive flag; the final mesh compacts the survivors in index order.
struct RefineWork {
    std::vector<Vec2> verts;
    std::vector<std::array<int, 3>> tris;
    std::vector<std::int8_t> refedge;
    std::vector<std::int32_t> gen;
    std::vector<int> ancestor;
    std::vector<std::uint8_t> alive;
    std::unordered_map<std::uint64_t, int> midpoint;
    std::unordered_map<std::uint64_t, std::array<int, 2>> incident;
    std::unordered_map<std::uint64_t, EdgeFlag> boundary_flag;
    std::vector<std::array<int, 2>> midpoint_parents;
    int coarse_vertex_count = 0;
    int depth_limit = 64;

    void attach(std::uint64_t key, int t) {
        auto it = incident.find(key);
        if (it == incident.end()) {
            incident.emplace(key, std::array<int, 2>{t, -1});
            return;
        }
        auto& slot = it->second;
        if (slot[0] == t || slot[1] == t) return;
        if (slot[0] < 0)
            slot[0] = t;
        else if (slot[1] < 0)
            slot[1] = t;
        else
            throw std::logic_error("bisect: edge incidence overflow");
    }

    void detach(std::uint64_t key, int t) {
        auto it = incident.find(key);
        if (it == incident.end()) return;
        auto& slot = it->second;
        if (slot[0] == t) {
            slot[0] = slot[1];
            slot[1] = -1;
        } else if (slot[1] == t) {
            slot[1] = -1;
        }
        if (slot[0] < 0) incident.erase(it);
    }

    int neighbor_across(std::uint64_t key, int t) const {
        auto it = incident.find(key);
        if (it == incident.end()) return -1;
        if (it->second[0] == t) return it->second[1];
        return it->second[0];
    }

    std::array<int, 2> refinement_edge_vertices(int t) const {
        const int k = refedge[t];
        return {tris[t][(k + 1) % 3], tris[t][(k + 2) % 3]};
    }

    int midpoint_of(int a, int b) {
        const auto key = edge_key(a, b);
        auto it = midpoint.find(key);
        if (it != midpoint.end()) return it->second;
        const int v = static_cast<int>(verts.size());
        verts.push_back(0.5 * (verts[a] + verts[b]));
        midpoint.emplace(key, v);
        midpoint_parents.push_back({std::min(a, b), std::max(a, b)});
        return v;
    }

    int append_child(int parent, std::array<int, 3> tri, int refedge_local) {
        const int t = static_cast<int>(tris.size());
        tris.push_back(tri);
        refedge.push_back(static_cast<std::int8_t>(refedge_local));
        gen.push_back(gen[parent] + 1);
        ancestor.push_back(ancestor[parent]);
        alive.push_back(1);
        for (int k = 0; k < 3; ++k) attach(edge_key(tri[(k + 1) % 3], tri[(k + 2) % 3]), t);
        return t;
    }

    // Splits t across its refinement edge (a,b) using midpoint m. Children
    // keep m as their newest vertex, so their refinement edges are the two
    // remaining parent edges.
    void split(int t, int m) {
        const int k = refedge[t];
        const int p = tris[t][k];
        const int a = tris[t][(k + 1) % 3];
        const int b = tris[t][(k + 2) % 3];

        alive[t] = 0;
        for (int j = 0; j < 3; ++j) detach(edge_key(tris[t][(j + 1) % 3], tris[t][(j + 2) % 3]), t);

        // Child (p, a, m): m is local vertex 2, so the next refinement edge
        // is local edge 2 = (p, a). Child (p, m, b): m is local vertex 1,
        // refinement edge local 1 = (b, p).
        append_child(t, {p, a, m}, 2);
        append_child(t, {p, m, b}, 1);

        const auto key = edge_key(a, b);
        auto it = boundary_flag.find(key);
        if (it != boundary_flag.end()) {
            const EdgeFlag f = it->second;
            boundary_flag.erase(it);
            boundary_flag.emplace(edge_key(a, m), f);
            boundary_flag.emplace(edge_key(m, b), f);
        }
    }

    // Ensures t is bisected across its refinement edge, recursively forcing
    // the neighbor into a compatible state first.
    void ensure_bisected(int t, int depth) {
        if (depth > depth_limit)
            throw std::runtime_error(
                "bisect: conformity closure exceeded depth bound (incompatible "
                "refinement-edge assignment)");
        if (!alive[t]) return;  // already bisected by an earlier closure step
        const auto [a, b] = refinement_edge_vertices(t);
        const auto key = edge_key(a, b);
        int nb = neighbor_across(key, t);
        if (nb >= 0) {
            const auto nbe = refinement_edge_vertices(nb);
            if (edge_key(nbe[0], nbe[1]) != key) {
                ensure_bisected(nb, depth + 1);
                nb = neighbor_across(key, t);
                if (nb >= 0) {
                    const auto nbe2 = refinement_edge_vertices(nb);
                    if (edge_key(nbe2[0], nbe2[1]) != key)
                        throw std::runtime_error(
                            "bisect: neighbor still incompatible after closure step");
                }
            }
        }
        const int m = midpoint_of(a, b);
        split(t, m);
        if (nb >= 0) split(nb, m);
    }
};

}  // namespace

Refinement bisect(const MeshPtr& mesh, std::span<const int> marked, int max_closure_depth) {
    if (!mesh) throw std::invalid_argument("bisect: null mesh");
    const Mesh& m = *mesh;

    std::vector<int> order(marked.begin(), marked.end());
    std::sort(order.begin(), order.end());
    order.erase(std::unique(order.begin(), order.end()), order.end());
    if (!order.empty() && (order.front() < 0 || order.back() >= m.triangle_count()))
        throw std::out_of_range("bisect: marked element id out of range");

    if (order.empty()) {
        Refinement r;
        r.coarse = mesh;
        r.fine = mesh;
        r.ancestor.resize(m.triangle_count());
        for (int t = 0; t < m.triangle_count(); ++t) r.ancestor[t] = t;
        return r;
    }

    RefineWork w;
    w.verts = m.vertices();
    w.tris = m.triangles();
    w.refedge = m.refinement_edges();
    w.gen = m.generations();
    w.alive.assign(w.tris.size(), 1);
    w.ancestor.resize(w.tris.size());
    w.coarse_vertex_count = m.vertex_count();
    w.depth_limit = max_closure_depth;
    for (std::size_t t = 0; t < w.tris.size(); ++t) w.ancestor[t] = static_cast<int>(t);
    w.incident.reserve(m.edges().size() * 4);
    for (std::size_t e = 0; e < m.edges().size(); ++e) {
        w.incident.emplace(edge_key(m.edges()[e][0], m.edges()[e][1]), m.edge_triangles()[e]);
        if (m.edge_triangles()[e][1] < 0)
            w.boundary_flag.emplace(edge_key(m.edges()[e][0], m.edges()[e][1]), m.edge_flags()[e]);
    }

    for (int t : order)
        if (w.alive[t]) w.ensure_bisected(t, 0);

    std::vector<std::array<int, 3>> tris;
    std::vector<std::int8_t> refedge;
    std::vector<std::int32_t> gen;
    std::vector<int> ancestor;
    for (std::size_t t = 0; t < w.tris.size(); ++t) {
        if (!w.alive[t]) continue;
        tris.push_back(w.tris[t]);
        refedge.push_back(w.refedge[t]);
        gen.push_back(w.gen[t]);
        ancestor.push_back(w.ancestor[t]);
    }

    auto flag = [&w](int a, int b, bool on_boundary) {
        if (!on_boundary) return EdgeFlag::interior;
        auto it = w.boundary_flag.find(edge_key(a, b));
        if (it == w.boundary_flag.end())
            throw std::logic_error("bisect: lost boundary flag during refinement");
        return it->second;
    };

    Refinement r;
    r.coarse = mesh;
    r.fine = std::make_shared<Mesh>(
        make_mesh_impl(std::move(w.verts), std::move(tris), std::move(refedge), std::move(gen), flag));
    r.midpoint_parents = std::move(w.midpoint_parents);
    r.ancestor = std::move(ancestor);
    return r;
}

std::vector<double> prolong(const Refinement& refinement, std::span<const double> coarse_values) {
    const int nc = refinement.coarse->vertex_count();
    if (static_cast<int>(coarse_values.size()) != nc)
        throw std::invalid_argument("prolong: value count does not match coarse mesh");
    std::vector<double> fine(refinement.fine->vertex_count());
    std::copy(coarse_values.begin(), coarse_values.end(), fine.begin());
    for (std::size_t i = 0; i < refinement.midpoint_parents.size(); ++i) {
        const auto [a, b] = refinement.midpoint_parents[i];
        fine[nc + i] = 0.5 * (fine[a] + fine[b]);
    }
    return fine;
}

void validate_mesh(const Mesh& m) {
    for (int t = 0; t < m.triangle_count(); ++t) {
        const auto& tri = m.triangles()[t];
        const double a =
            signed_area(m.vertices()[tri[0]], m.vertices()[tri[1]], m.vertices()[tri[2]]);
        if (a <= 0.0)
            throw std::logic_error("validate_mesh: triangle " + std::to_string(t) +
                                   " not counterclockwise");
        const int k = m.refinement_edges()[t];
        if (k < 0 || k > 2)
            throw std::logic_error("validate_mesh: bad refinement edge tag on triangle " +
                                   std::to_string(t));
    }
    for (int e = 0; e < m.edge_count(); ++e) {
        const auto& et = m.edge_triangles()[e];
        const bool on_boundary = et[1] < 0;
        if (et[0] < 0) throw std::logic_error("validate_mesh: edge with no incident triangle");
        if (on_boundary && m.edge_flags()[e] == EdgeFlag::interior)
            throw std::logic_error("validate_mesh: boundary edge flagged interior");
        if (!on_boundary && m.edge_flags()[e] != EdgeFlag::interior)
            throw std::logic_error("validate_mesh: interior edge carries a boundary flag");
    }

    // Hanging-node scan: bisection places new vertices at edge midpoints, so
    // a vertex coinciding bit-exactly with the midpoint of an edge it does
    // not belong to is a conformity violation.
    std::map<std::pair<double, double>, int> coord_to_vertex;
    for (int v = 0; v < m.vertex_count(); ++v) {
        auto [it, inserted] =
            coord_to_vertex.emplace(std::make_pair(m.vertices()[v].x, m.vertices()[v].y), v);
        if (!inserted) throw std::logic_error("validate_mesh: duplicate vertex coordinates");
    }
    for (int e = 0; e < m.edge_count(); ++e) {
        const auto [a, b] = m.edges()[e];
        const Vec2 mid = 0.5 * (m.vertices()[a] + m.vertices()[b]);
        auto it = coord_to_vertex.find({mid.x, mid.y});
        if (it != coord_to_vertex.end() && it->second != a && it->second != b)
            throw std::logic_error("validate_mesh: hanging node on edge (" + std::to_string(a) +
                                   "," + std::to_string(b) + ")");
    }
}

}  // namespace pnpafem
