#include "ccdkit/scene.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace ccdkit {

void SceneStep::validate() const
{
    if (vertices_t0.size() != vertices_t1.size())
        throw InvalidInput("vertex snapshots differ in length");
    const std::size_t n = vertices_t0.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (!is_finite(vertices_t0[i]) || !is_finite(vertices_t1[i]))
            throw InvalidInput("non-finite vertex coordinate");
    }
    for (const auto& e : edges) {
        if (e[0] >= n || e[1] >= n)
            throw InvalidInput("edge index out of range");
        if (e[0] == e[1])
            throw InvalidInput("edge endpoints must be distinct");
    }
    for (const auto& f : faces) {
        if (f[0] >= n || f[1] >= n || f[2] >= n)
            throw InvalidInput("face index out of range");
        if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2])
            throw InvalidInput("face vertices must be distinct");
    }
}

bool uses_vertex(const SceneStep& scene, PrimitiveId id, std::uint32_t v)
{
    switch (id.kind) {
    case PrimitiveKind::Vertex:
        return id.index == v;
    case PrimitiveKind::Edge: {
        const auto& e = scene.edges[id.index];
        return e[0] == v || e[1] == v;
    }
    case PrimitiveKind::Face: {
        const auto& f = scene.faces[id.index];
        return f[0] == v || f[1] == v || f[2] == v;
    }
    }
    return false;
}

bool share_vertex(const SceneStep& scene, PrimitiveId a, PrimitiveId b)
{
    const auto vertices_of = [&](PrimitiveId id, std::array<std::uint32_t, 3>& out) -> int {
        switch (id.kind) {
        case PrimitiveKind::Vertex:
            out[0] = id.index;
            return 1;
        case PrimitiveKind::Edge:
            out[0] = scene.edges[id.index][0];
            out[1] = scene.edges[id.index][1];
            return 2;
        case PrimitiveKind::Face:
            out = scene.faces[id.index];
            return 3;
        }
        return 0;
    };
    std::array<std::uint32_t, 3> va {}, vb {};
    const int na = vertices_of(a, va);
    const int nb = vertices_of(b, vb);
    for (int i = 0; i < na; ++i)
        for (int j = 0; j < nb; ++j)
            if (va[i] == vb[j])
                return true;
    return false;
}

namespace {

    struct ObjData {
        std::vector<Vec3> vertices;
        std::vector<std::array<std::uint32_t, 3>> faces;
        std::vector<std::array<std::uint32_t, 2>> segments;
    };

    std::uint32_t parse_obj_index(const std::string& token, std::size_t n_vertices,
                                  const std::string& path)
    {
        // "f" entries may carry /vt/vn suffixes; the vertex index is the lead.
        const std::size_t slash = token.find('/');
        const std::string head = slash == std::string::npos ? token : token.substr(0, slash);
        long long value = 0;
        const auto* begin = head.data();
        const auto* end = head.data() + head.size();
        const auto res = std::from_chars(begin, end, value);
        if (res.ec != std::errc() || res.ptr != end)
            throw InvalidInput(path + ": bad index token '" + token + "'");
        if (value < 0)
            value = static_cast<long long>(n_vertices) + 1 + value; // negative = relative
        if (value < 1 || static_cast<std::size_t>(value) > n_vertices)
            throw InvalidInput(path + ": face index out of range: " + token);
        return static_cast<std::uint32_t>(value - 1);
    }

    ObjData load_obj(const std::string& path)
    {
        std::ifstream in(path);
        if (!in)
            throw InvalidInput("cannot open " + path);
        ObjData data;
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r')
                line.pop_back();
            std::istringstream ls(line);
            std::string tag;
            if (!(ls >> tag) || tag.empty() || tag[0] == '#')
                continue;
            if (tag == "v") {
                Vec3 p;
                if (!(ls >> p[0] >> p[1] >> p[2]))
                    throw InvalidInput(path + ": malformed vertex line: " + line);
                data.vertices.push_back(p);
            } else if (tag == "f") {
                std::vector<std::uint32_t> poly;
                std::string token;
                while (ls >> token)
                    poly.push_back(parse_obj_index(token, data.vertices.size(), path));
                if (poly.size() < 3)
                    throw InvalidInput(path + ": face with fewer than 3 vertices");
                // fan-triangulate
                for (std::size_t i = 1; i + 1 < poly.size(); ++i)
                    data.faces.push_back({ poly[0], poly[i], poly[i + 1] });
            } else if (tag == "l") {
                std::vector<std::uint32_t> chain;
                std::string token;
                while (ls >> token)
                    chain.push_back(parse_obj_index(token, data.vertices.size(), path));
                for (std::size_t i = 0; i + 1 < chain.size(); ++i)
                    data.segments.push_back({ chain[i], chain[i + 1] });
            }
            // vt/vn/usemtl/... are irrelevant here
        }
        return data;
    }

} // namespace

SceneStep load_obj_pair(const std::string& path_t0, const std::string& path_t1)
{
    const ObjData a = load_obj(path_t0);
    const ObjData b = load_obj(path_t1);
    if (a.vertices.size() != b.vertices.size())
        throw InvalidInput(path_t0 + " / " + path_t1 + ": vertex counts differ");
    if (a.faces != b.faces || a.segments != b.segments)
        throw InvalidInput(path_t0 + " / " + path_t1 + ": connectivity differs");

    SceneStep scene;
    scene.vertices_t0 = a.vertices;
    scene.vertices_t1 = b.vertices;
    scene.faces = a.faces;

    std::vector<std::array<std::uint32_t, 2>> edges;
    edges.reserve(a.faces.size() * 3 + a.segments.size());
    const auto add_edge = [&](std::uint32_t u, std::uint32_t v) {
        if (u == v)
            return;
        edges.push_back({ std::min(u, v), std::max(u, v) });
    };
    for (const auto& f : a.faces) {
        add_edge(f[0], f[1]);
        add_edge(f[1], f[2]);
        add_edge(f[2], f[0]);
    }
    for (const auto& s : a.segments)
        add_edge(s[0], s[1]);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    scene.edges = std::move(edges);

    scene.validate();
    return scene;
}

std::vector<std::pair<std::string, std::string>>
load_manifest(const std::string& manifest_path)
{
    std::ifstream in(manifest_path);
    if (!in)
        throw InvalidInput("cannot open " + manifest_path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(manifest_path + ": " + e.what());
    }
    if (!doc.is_array())
        throw InvalidInput(manifest_path + ": manifest must be a JSON array");

    const auto base = std::filesystem::path(manifest_path).parent_path();
    const auto resolve = [&](const std::string& p) {
        std::filesystem::path fp(p);
        return fp.is_absolute() ? fp.string() : (base / fp).string();
    };

    std::vector<std::pair<std::string, std::string>> pairs;
    for (const auto& entry : doc) {
        if (!entry.is_object() || !entry.contains("t0") || !entry.contains("t1"))
            throw InvalidInput(manifest_path + ": entries need \"t0\" and \"t1\"");
        pairs.emplace_back(resolve(entry["t0"].get<std::string>()),
                           resolve(entry["t1"].get<std::string>()));
    }
    return pairs;
}

} // namespace ccdkit
