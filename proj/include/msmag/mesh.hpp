#ifndef MSMAG_MESH_HPP
#define MSMAG_MESH_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "msmag/common.hpp"
#include "msmag/field.hpp"
#include "msmag/vec.hpp"

namespace msmag {

// Per-triangle affine (P1) metadata: exact area, constant gradients of the
// three barycentric basis functions, barycenter.
struct P1Element {
    int tri = -1;
    double area = 0.0;
    std::array<Vec2, 3> grad{}; // grad of basis function of local vertex 0,1,2
    Vec2 barycenter{};
};

// Conforming triangle mesh of a 2D domain. Immutable after construction.
class TriMesh {
public:
    std::vector<Vec2> nodes;
    std::vector<std::array<int, 3>> triangles;      // CCW vertex indices
    std::vector<std::array<int, 2>> boundary_edges; // node index pairs
    double h_min = 0.0;

    TriMesh() = default;
    TriMesh(std::vector<Vec2> nodes_, std::vector<std::array<int, 3>> tris_,
            std::vector<std::array<int, 2>> bedges = {})
        : nodes(std::move(nodes_)), triangles(std::move(tris_)),
          boundary_edges(std::move(bedges)) {
        finalize();
    }

    int num_nodes() const { return static_cast<int>(nodes.size()); }
    int num_triangles() const { return static_cast<int>(triangles.size()); }

    const P1Element& element(int t) const { return elements_.at(t); }

    // Barycentric coordinates of point p with respect to triangle t.
    std::array<double, 3> barycentric(int t, Vec2 p) const {
        const auto& e = elements_[t];
        const auto& v = triangles[t];
        // lambda_a is affine with gradient grad[a], equal to 1 at vertex a.
        std::array<double, 3> lam;
        for (int a = 0; a < 3; ++a) {
            Vec2 d = p - nodes[v[a]];
            lam[a] = 1.0 + e.grad[a].dot(d);
        }
        return lam;
    }

    // Index of a triangle containing p (barycentric coords >= -tol),
    // or -1 if none.
    int locate(Vec2 p, double tol = 1e-12) const {
        if (p.x < bin_x0_ - tol || p.y < bin_y0_ - tol) return -1;
        int bi = std::clamp(static_cast<int>((p.x - bin_x0_) / bin_dx_), 0, bins_nx_ - 1);
        int bj = std::clamp(static_cast<int>((p.y - bin_y0_) / bin_dy_), 0, bins_ny_ - 1);
        for (int t : bins_[bj * bins_nx_ + bi]) {
            auto lam = barycentric(t, p);
            if (lam[0] >= -tol && lam[1] >= -tol && lam[2] >= -tol) return t;
        }
        return -1;
    }

    // Triangle whose barycenter is closest to p; fallback when p lies just
    // outside the mesh (curved-boundary faceting).
    int nearest_triangle(Vec2 p) const {
        int best = 0;
        double bd = std::numeric_limits<double>::max();
        for (int t = 0; t < num_triangles(); ++t) {
            double d = (elements_[t].barycenter - p).norm();
            if (d < bd) { bd = d; best = t; }
        }
        return best;
    }

    double total_area() const {
        double s = 0.0;
        for (const auto& e : elements_) s += e.area;
        return s;
    }

private:
    std::vector<P1Element> elements_;
    // Uniform bins over the bounding box for point location.
    std::vector<std::vector<int>> bins_;
    int bins_nx_ = 1, bins_ny_ = 1;
    double bin_x0_ = 0, bin_y0_ = 0, bin_dx_ = 1, bin_dy_ = 1;

    void finalize() {
        if (nodes.empty() || triangles.empty())
            throw TopologyError("mesh has no nodes or no triangles");
        build_elements();
        check_conformity();
        build_bins();
    }

    void build_elements() {
        elements_.resize(triangles.size());
        for (int t = 0; t < num_triangles(); ++t) {
            const auto& v = triangles[t];
            if (v[0] == v[1] || v[1] == v[2] || v[0] == v[2])
                throw TopologyError("triangle " + std::to_string(t) + " repeats a node");
            Vec2 p0 = nodes.at(v[0]), p1 = nodes.at(v[1]), p2 = nodes.at(v[2]);
            double twice = (p1.x - p0.x) * (p2.y - p0.y) - (p1.y - p0.y) * (p2.x - p0.x);
            if (twice <= 0.0)
                throw TopologyError("triangle " + std::to_string(t) +
                                    " has non-positive signed area");
            P1Element e;
            e.tri = t;
            e.area = 0.5 * twice;
            // grad lambda_a = rot90(opposite edge) / (2 area)
            e.grad[0] = Vec2{p1.y - p2.y, p2.x - p1.x} * (1.0 / twice);
            e.grad[1] = Vec2{p2.y - p0.y, p0.x - p2.x} * (1.0 / twice);
            e.grad[2] = Vec2{p0.y - p1.y, p1.x - p0.x} * (1.0 / twice);
            e.barycenter = (p0 + p1 + p2) * (1.0 / 3.0);
            elements_[t] = e;
        }
    }

    static std::uint64_t edge_key(int a, int b) {
        if (a > b) std::swap(a, b);
        return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
    }

    void check_conformity() {
        std::map<std::uint64_t, int> count;
        double hmin = std::numeric_limits<double>::max();
        for (const auto& v : triangles) {
            for (int a = 0; a < 3; ++a) {
                int i = v[a], j = v[(a + 1) % 3];
                count[edge_key(i, j)]++;
                hmin = std::min(hmin, (nodes[i] - nodes[j]).norm());
            }
        }
        h_min = hmin;
        std::vector<std::array<int, 2>> inferred;
        for (const auto& [key, c] : count) {
            if (c > 2) throw TopologyError("edge shared by more than 2 triangles");
            if (c == 1)
                inferred.push_back({static_cast<int>(key >> 32),
                                    static_cast<int>(key & 0xffffffffu)});
        }
        if (boundary_edges.empty()) {
            boundary_edges = std::move(inferred);
        } else {
            if (boundary_edges.size() != inferred.size())
                throw TopologyError("listed boundary edges disagree with single-adjacency");
            for (const auto& be : boundary_edges)
                if (count[edge_key(be[0], be[1])] != 1)
                    throw TopologyError("listed boundary edge is interior");
        }
    }

    void build_bins() {
        double x0 = nodes[0].x, x1 = x0, y0 = nodes[0].y, y1 = y0;
        for (const auto& p : nodes) {
            x0 = std::min(x0, p.x); x1 = std::max(x1, p.x);
            y0 = std::min(y0, p.y); y1 = std::max(y1, p.y);
        }
        int n = std::max(1, static_cast<int>(std::sqrt(num_triangles() / 2.0)));
        bins_nx_ = bins_ny_ = n;
        bin_x0_ = x0; bin_y0_ = y0;
        bin_dx_ = std::max((x1 - x0) / n, 1e-300);
        bin_dy_ = std::max((y1 - y0) / n, 1e-300);
        bins_.assign(static_cast<std::size_t>(n) * n, {});
        for (int t = 0; t < num_triangles(); ++t) {
            const auto& v = triangles[t];
            double tx0 = nodes[v[0]].x, tx1 = tx0, ty0 = nodes[v[0]].y, ty1 = ty0;
            for (int a = 1; a < 3; ++a) {
                tx0 = std::min(tx0, nodes[v[a]].x); tx1 = std::max(tx1, nodes[v[a]].x);
                ty0 = std::min(ty0, nodes[v[a]].y); ty1 = std::max(ty1, nodes[v[a]].y);
            }
            int i0 = std::clamp(static_cast<int>((tx0 - x0) / bin_dx_), 0, n - 1);
            int i1 = std::clamp(static_cast<int>((tx1 - x0) / bin_dx_), 0, n - 1);
            int j0 = std::clamp(static_cast<int>((ty0 - y0) / bin_dy_), 0, n - 1);
            int j1 = std::clamp(static_cast<int>((ty1 - y0) / bin_dy_), 0, n - 1);
            for (int j = j0; j <= j1; ++j)
                for (int i = i0; i <= i1; ++i)
                    bins_[static_cast<std::size_t>(j) * n + i].push_back(t);
        }
    }
};

inline const P1Element& p1_element(const TriMesh& mesh, int tri) {
    return mesh.element(tri);
}

// P1 evaluation of a nodal field at a point inside triangle tri.
inline Vec3 eval_p1(const TriMesh& mesh, const NodalField& field, int tri, Vec2 p,
                    double tol = 1e-12) {
    auto lam = mesh.barycentric(tri, p);
    if (lam[0] < -tol || lam[1] < -tol || lam[2] < -tol)
        throw ConfigError("eval_p1: point outside triangle " + std::to_string(tri));
    const auto& v = mesh.triangles[tri];
    return field.values[v[0]] * lam[0] + field.values[v[1]] * lam[1] +
           field.values[v[2]] * lam[2];
}

// Affine extension of the triangle's P1 function, valid for any p. Used to
// seed micro patches that may poke out of coarse triangles.
inline Vec3 eval_p1_affine(const TriMesh& mesh, const NodalField& field, int tri, Vec2 p) {
    auto lam = mesh.barycentric(tri, p);
    const auto& v = mesh.triangles[tri];
    return field.values[v[0]] * lam[0] + field.values[v[1]] * lam[1] +
           field.values[v[2]] * lam[2];
}

// Constant Jacobian of the P1 field on triangle tri (3x2).
inline Mat32 p1_gradient(const TriMesh& mesh, const NodalField& field, int tri) {
    const auto& e = mesh.element(tri);
    const auto& v = mesh.triangles[tri];
    Mat32 g{};
    for (int a = 0; a < 3; ++a) {
        Vec3 m = field.values[v[a]];
        g.c0 += m * e.grad[a].x;
        g.c1 += m * e.grad[a].y;
    }
    return g;
}

// ---------------------------------------------------------------------------
// Built-in structured generators (tests and experiments run without files).

// Axis-aligned rectangle [x0, x0+lx] x [y0, y0+ly], nx-by-ny cells, each cell
// split along the SW-NE diagonal.
inline TriMesh make_rectangle_mesh(int nx, int ny, double lx = 1.0, double ly = 1.0,
                                   double x0 = 0.0, double y0 = 0.0) {
    if (nx < 1 || ny < 1) throw ConfigError("rectangle mesh needs nx, ny >= 1");
    std::vector<Vec2> nodes;
    nodes.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1));
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            nodes.push_back({x0 + lx * i / nx, y0 + ly * j / ny});
    auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
    std::vector<std::array<int, 3>> tris;
    tris.reserve(static_cast<std::size_t>(nx) * ny * 2);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            tris.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            tris.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    return TriMesh(std::move(nodes), std::move(tris));
}

inline TriMesh make_unit_square_mesh(int n) { return make_rectangle_mesh(n, n); }

// Unit disk by radial faceting: rings at radius k/n with 6k nodes each,
// near-equilateral triangles throughout, h_min ~ 1/n.
inline TriMesh make_disk_mesh(int n) {
    if (n < 1) throw ConfigError("disk mesh needs n >= 1");
    std::vector<Vec2> nodes{{0.0, 0.0}};
    std::vector<int> ring_start{0};
    for (int k = 1; k <= n; ++k) {
        ring_start.push_back(static_cast<int>(nodes.size()));
        int m = 6 * k;
        double r = static_cast<double>(k) / n;
        for (int s = 0; s < m; ++s) {
            double a = 2.0 * pi * s / m;
            nodes.push_back({r * std::cos(a), r * std::sin(a)});
        }
    }
    std::vector<std::array<int, 3>> tris;
    // Innermost fan.
    for (int s = 0; s < 6; ++s)
        tris.push_back({0, ring_start[1] + s, ring_start[1] + (s + 1) % 6});
    // Annulus between ring k (6k nodes) and ring k+1 (6k+6 nodes): per 60-degree
    // sector, k inner and k+1 outer nodes zig-zag into 2k+1 triangles.
    for (int k = 1; k < n; ++k) {
        int in0 = ring_start[k], out0 = ring_start[k + 1];
        int min = 6 * k, mout = 6 * (k + 1);
        for (int sec = 0; sec < 6; ++sec) {
            for (int s = 0; s <= k; ++s) {
                int oa = out0 + (sec * (k + 1) + s) % mout;
                int ob = out0 + (sec * (k + 1) + s + 1) % mout;
                int ia = in0 + (sec * k + s) % min;
                tris.push_back({oa, ob, ia});
                if (s < k) {
                    int ib = in0 + (sec * k + s + 1) % min;
                    tris.push_back({ia, ob, ib});
                }
            }
        }
    }
    return TriMesh(std::move(nodes), std::move(tris));
}

// Annulus r_in <= r <= r_out with `layers` radial layers and `segments`
// nodes per ring.
inline TriMesh make_ring_mesh(int layers, int segments, double r_in = 0.4,
                              double r_out = 1.0) {
    if (layers < 1 || segments < 3) throw ConfigError("ring mesh needs layers >= 1, segments >= 3");
    std::vector<Vec2> nodes;
    for (int k = 0; k <= layers; ++k) {
        double r = r_in + (r_out - r_in) * k / layers;
        for (int s = 0; s < segments; ++s) {
            double a = 2.0 * pi * s / segments;
            nodes.push_back({r * std::cos(a), r * std::sin(a)});
        }
    }
    auto id = [segments](int k, int s) { return k * segments + (s % segments); };
    std::vector<std::array<int, 3>> tris;
    for (int k = 0; k < layers; ++k)
        for (int s = 0; s < segments; ++s) {
            tris.push_back({id(k, s), id(k + 1, s), id(k + 1, s + 1)});
            tris.push_back({id(k, s), id(k + 1, s + 1), id(k, s + 1)});
        }
    return TriMesh(std::move(nodes), std::move(tris));
}

// ---------------------------------------------------------------------------
// ASCII MSH 2.2 reader. Element type 2 = triangle, type 1 = boundary line.

inline TriMesh load_msh(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open mesh file: " + path);

    std::string line;
    std::map<long, int> node_id;      // file node id -> dense index
    std::vector<Vec2> nodes;
    std::vector<std::array<int, 3>> tris;
    std::vector<std::array<int, 2>> bedges;
    bool saw_nodes = false, saw_elements = false;

    auto expect_line = [&](const std::string& what) {
        if (!std::getline(in, line)) throw ParseError("unexpected end of file in " + what);
        return line;
    };

    while (std::getline(in, line)) {
        if (line.rfind("$MeshFormat", 0) == 0) {
            std::istringstream fmt(expect_line("$MeshFormat"));
            double version = 0;
            fmt >> version;
            if (!(version >= 2.0 && version < 3.0))
                throw ParseError("unsupported MSH version (need 2.x ASCII)");
            if (expect_line("$MeshFormat") != "$EndMeshFormat")
                throw ParseError("missing $EndMeshFormat");
        } else if (line.rfind("$Nodes", 0) == 0) {
            std::istringstream hdr(expect_line("$Nodes"));
            long count = -1;
            hdr >> count;
            if (count < 0) throw ParseError("malformed $Nodes count");
            for (long k = 0; k < count; ++k) {
                std::istringstream ls(expect_line("$Nodes"));
                long id; double x, y, z;
                if (!(ls >> id >> x >> y >> z)) throw ParseError("malformed node line");
                node_id[id] = static_cast<int>(nodes.size());
                nodes.push_back({x, y});
            }
            if (expect_line("$Nodes") != "$EndNodes") throw ParseError("missing $EndNodes");
            saw_nodes = true;
        } else if (line.rfind("$Elements", 0) == 0) {
            std::istringstream hdr(expect_line("$Elements"));
            long count = -1;
            hdr >> count;
            if (count < 0) throw ParseError("malformed $Elements count");
            for (long k = 0; k < count; ++k) {
                std::istringstream ls(expect_line("$Elements"));
                long id; int type, ntags;
                if (!(ls >> id >> type >> ntags)) throw ParseError("malformed element line");
                for (int t = 0; t < ntags; ++t) { long tag; ls >> tag; }
                auto dense = [&](long nid) {
                    auto it = node_id.find(nid);
                    if (it == node_id.end()) throw ParseError("element references unknown node");
                    return it->second;
                };
                if (type == 2) {
                    long a, b, c;
                    if (!(ls >> a >> b >> c)) throw ParseError("malformed triangle element");
                    tris.push_back({dense(a), dense(b), dense(c)});
                } else if (type == 1) {
                    long a, b;
                    if (!(ls >> a >> b)) throw ParseError("malformed line element");
                    bedges.push_back({dense(a), dense(b)});
                } // other element types (points etc.) are ignored
            }
            if (expect_line("$Elements") != "$EndElements") throw ParseError("missing $EndElements");
            saw_elements = true;
        }
        // unknown sections are skipped line by line
    }
    if (!saw_nodes || !saw_elements)
        throw ParseError("mesh file lacks $Nodes or $Elements section");
    // Normalize orientation to CCW; degenerate triangles still fail validation.
    for (auto& t : tris) {
        Vec2 p0 = nodes[t[0]], p1 = nodes[t[1]], p2 = nodes[t[2]];
        double twice = (p1.x - p0.x) * (p2.y - p0.y) - (p1.y - p0.y) * (p2.x - p0.x);
        if (twice < 0.0) std::swap(t[1], t[2]);
    }
    return TriMesh(std::move(nodes), std::move(tris), std::move(bedges));
}

} // namespace msmag

#endif
