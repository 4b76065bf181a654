#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace porofreeze::discretization {

/// Axis-aligned domain; the y-extent is ignored in 1D.
struct Box {
    double x0 = 0.0, x1 = 1.0;
    double y0 = 0.0, y1 = 1.0;
};

/// Conforming simplicial mesh in 1D (segments) or 2D (triangles).
///
/// Boundary facets are points in 1D and segments in 2D. Structured meshes use the
/// markers 1 = left, 2 = right in 1D and 1 = bottom, 2 = right, 3 = top, 4 = left in 2D.
struct Mesh {
    struct Facet {
        std::array<int, 2> nodes{-1, -1};  ///< second entry is -1 in 1D
        int marker = 0;
    };

    int dim = 1;
    std::vector<std::array<double, 2>> nodes;
    std::vector<std::array<int, 3>> elements;  ///< third entry is -1 in 1D
    std::vector<Facet> boundary;

    std::size_t num_nodes() const { return nodes.size(); }
    std::size_t num_elements() const { return elements.size(); }
    int nodes_per_element() const { return dim + 1; }

    /// Signed length / area of an element.
    double signed_measure(std::size_t e) const;
    double measure(std::size_t e) const { return signed_measure(e); }
    double facet_measure(std::size_t f) const;
    std::array<double, 2> centroid(std::size_t e) const;

    /// Throws InvalidParameter on bad indices, non-positive measures or missing markers.
    void validate() const;
    std::vector<bool> boundary_nodes() const;
};

/// Uniform segments (1D) or right-triangle split of an nx x ny grid (2D).
Mesh build_mesh(int dim, const Box& box, int nx, int ny = -1);

/// Text format:
///
///     porofreeze-mesh 1
///     dim <1|2>
///     nodes <N>
///     <x> [y]            (N lines)
///     elements <E>
///     <i> <j> [k]        (E lines, 0-based node indices)
///     boundary <F>
///     <i> [j] <marker>   (F lines)
Mesh read_mesh(std::istream& in);
Mesh read_mesh_file(const std::string& path);
void write_mesh(std::ostream& out, const Mesh& mesh);

}  // namespace porofreeze::discretization
