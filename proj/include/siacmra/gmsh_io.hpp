#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "siacmra/mesh.hpp"

namespace siacmra {

// MSH 2.2 ASCII reader for 2D triangle or quad meshes. Lower-dimensional
// entities (points, lines) are skipped; mixing triangles and quads is an
// error. All elements start at level 0.
inline Mesh read_gmsh(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw format_error("read_gmsh: cannot open " + path);
    std::string line;
    int lineno = 0;
    auto next = [&](std::string& out) {
        if (!std::getline(in, out)) throw format_error("read_gmsh: unexpected end of file at line " + std::to_string(lineno));
        ++lineno;
    };

    std::vector<Vec2> nodes;
    std::unordered_map<long, int> node_id;  // gmsh tag -> index
    std::vector<std::array<int, 4>> tris, quads;

    while (std::getline(in, line)) {
        ++lineno;
        if (line.rfind("$MeshFormat", 0) == 0) {
            next(line);
            std::istringstream ss(line);
            std::string version;
            ss >> version;
            if (version.rfind("2.2", 0) != 0)
                throw format_error("read_gmsh: unsupported version '" + version + "' at line " +
                                   std::to_string(lineno));
            next(line);  // $EndMeshFormat
        } else if (line.rfind("$Nodes", 0) == 0) {
            next(line);
            long n = std::stol(line);
            for (long i = 0; i < n; ++i) {
                next(line);
                std::istringstream ss(line);
                long id;
                double x, y, z;
                if (!(ss >> id >> x >> y >> z))
                    throw format_error("read_gmsh: bad node at line " + std::to_string(lineno));
                node_id[id] = static_cast<int>(nodes.size());
                nodes.push_back({x, y});
            }
            next(line);  // $EndNodes
        } else if (line.rfind("$Elements", 0) == 0) {
            next(line);
            long n = std::stol(line);
            for (long i = 0; i < n; ++i) {
                next(line);
                std::istringstream ss(line);
                long id;
                int type, ntags;
                if (!(ss >> id >> type >> ntags))
                    throw format_error("read_gmsh: bad element at line " + std::to_string(lineno));
                long tag;
                for (int t = 0; t < ntags; ++t) ss >> tag;
                auto read_nodes = [&](int count) {
                    std::array<int, 4> vs{-1, -1, -1, -1};
                    for (int v = 0; v < count; ++v) {
                        long nid;
                        if (!(ss >> nid))
                            throw format_error("read_gmsh: truncated element at line " + std::to_string(lineno));
                        auto it = node_id.find(nid);
                        if (it == node_id.end())
                            throw format_error("read_gmsh: unknown node tag at line " + std::to_string(lineno));
                        vs[static_cast<std::size_t>(v)] = it->second;
                    }
                    return vs;
                };
                if (type == 2)
                    tris.push_back(read_nodes(3));
                else if (type == 3)
                    quads.push_back(read_nodes(4));
                // points (15) and lines (1) carry boundary tags; skip them
            }
            next(line);  // $EndElements
        }
    }

    if (!tris.empty() && !quads.empty())
        throw format_error("read_gmsh: mixed triangle/quad meshes are not supported");
    if (tris.empty() && quads.empty()) throw format_error("read_gmsh: no 2D elements found");

    Mesh m;
    m.dim = 2;
    m.kind = tris.empty() ? ElemKind::quad : ElemKind::triangle;
    const auto& src = tris.empty() ? quads : tris;
    int nv = tris.empty() ? 4 : 3;

    // keep only referenced vertices, renumbered in first-use order
    std::vector<int> remap(nodes.size(), -1);
    for (const auto& e : src)
        for (int i = 0; i < nv; ++i) {
            int v = e[static_cast<std::size_t>(i)];
            if (remap[static_cast<std::size_t>(v)] < 0) {
                remap[static_cast<std::size_t>(v)] = m.n_verts();
                m.verts.push_back(nodes[static_cast<std::size_t>(v)]);
            }
        }
    for (const auto& e : src) {
        std::array<int, 4> vs{-1, -1, -1, -1};
        for (int i = 0; i < nv; ++i) vs[static_cast<std::size_t>(i)] = remap[static_cast<std::size_t>(e[static_cast<std::size_t>(i)])];
        // enforce positive orientation
        double s = 0.0;
        for (int i = 0; i < nv; ++i) {
            Vec2 a = m.verts[static_cast<std::size_t>(vs[static_cast<std::size_t>(i)])];
            Vec2 b = m.verts[static_cast<std::size_t>(vs[static_cast<std::size_t>((i + 1) % nv)])];
            s += cross(a, b);
        }
        if (s < 0.0) {
            if (nv == 3)
                std::swap(vs[1], vs[2]);
            else
                std::swap(vs[1], vs[3]);
        }
        m.elems.push_back(vs);
        m.levels.push_back(0);
    }

    Vec2 lo = m.verts[0], hi = m.verts[0];
    for (const Vec2& v : m.verts) {
        lo.x = std::min(lo.x, v.x);
        lo.y = std::min(lo.y, v.y);
        hi.x = std::max(hi.x, v.x);
        hi.y = std::max(hi.y, v.y);
    }
    m.box = {lo, hi};
    m.periodic = {false, false};
    m.finalize();
    return m;
}

}  // namespace siacmra
