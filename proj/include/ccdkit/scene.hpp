#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ccdkit/core.hpp"

namespace ccdkit {

enum class PrimitiveKind : std::uint8_t { Vertex = 0, Edge = 1, Face = 2 };

struct PrimitiveId {
    PrimitiveKind kind = PrimitiveKind::Vertex;
    std::uint32_t index = 0;

    friend bool operator==(const PrimitiveId&, const PrimitiveId&) = default;
    friend auto operator<=>(const PrimitiveId& a, const PrimitiveId& b)
    {
        if (a.kind != b.kind)
            return a.kind <=> b.kind;
        return a.index <=> b.index;
    }
};

// Two vertex-position snapshots sharing one mesh topology. Vertices move
// linearly from their t=0 to their t=1 position.
struct SceneStep {
    std::vector<Vec3> vertices_t0;
    std::vector<Vec3> vertices_t1;
    std::vector<std::array<std::uint32_t, 2>> edges;
    std::vector<std::array<std::uint32_t, 3>> faces;

    std::size_t primitive_count() const
    {
        return vertices_t0.size() + edges.size() + faces.size();
    }

    // Throws InvalidInput on topology or coordinate violations.
    void validate() const;
};

// Does the primitive reference mesh vertex v?
bool uses_vertex(const SceneStep& scene, PrimitiveId id, std::uint32_t v);

// True when the two primitives reference at least one common mesh vertex.
bool share_vertex(const SceneStep& scene, PrimitiveId a, PrimitiveId b);

// Loads a frame pair of Wavefront OBJ files with identical connectivity.
// Edges are derived from the faces (plus any `l` polyline segments),
// deduplicated and sorted. Throws InvalidInput on parse errors, vertex-count
// mismatch, or differing face lists.
SceneStep load_obj_pair(const std::string& path_t0, const std::string& path_t1);

// Reads a JSON manifest: an array of {"t0": path, "t1": path} objects.
// Relative paths resolve against the manifest's directory.
std::vector<std::pair<std::string, std::string>>
load_manifest(const std::string& manifest_path);

} // namespace ccdkit
