#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "ncbal/types.hpp"

namespace ncbal {

enum class BoundaryKind { Wall, Periodic };
enum class ElementKind { Quad, Triangle };

/// A cell-to-face incidence as seen from the cell: the face id and the orientation
/// (+1 when the stored face normal points out of this cell).
struct FaceRef {
    int face = -1;
    int sign = 1;
};

struct Cell {
    std::vector<int> nodes;      ///< polygon (2D, counter-clockwise) or interval end points (1D)
    std::vector<FaceRef> faces;  ///< one per local face, in local order
    double measure = 0.0;        ///< |K|
    double perimeter = 0.0;      ///< |∂K| = Σ|e_KL|
    double diameter = 0.0;
    Point centroid = Point::Zero();
};

/// An interface e_KL with normal n_KL oriented from `left` to `right`.
/// Wall faces have right == -1 and an outward normal.
struct Face {
    int left = -1;
    int right = -1;
    int left_local = -1;
    int right_local = -1;
    double measure = 0.0;
    Normal normal = Normal::Zero();
    Point midpoint = Point::Zero();
    bool periodic = false;

    bool is_wall() const noexcept { return right < 0; }
};

/// Immutable polygonal mesh in d = 1 or 2 dimensions.
class Mesh {
public:
    /// Builds connectivity and geometry from nodes and cell polygons. Unmatched faces become
    /// walls unless listed in `periodic_pairs` as (cell, local face) couples.
    struct PeriodicPair {
        int cell_a, face_a, cell_b, face_b;
    };
    Mesh(int dimension, std::vector<Point> nodes, std::vector<std::vector<int>> cells,
         std::vector<PeriodicPair> periodic_pairs = {});

    int dimension() const noexcept { return dim_; }
    const std::vector<Point>& nodes() const noexcept { return nodes_; }
    const std::vector<Cell>& cells() const noexcept { return cells_; }
    const std::vector<Face>& faces() const noexcept { return faces_; }
    std::size_t cell_count() const noexcept { return cells_.size(); }

    /// h = max cell diameter.
    double size() const noexcept { return h_; }
    /// Largest a with |K| ≥ a h^d and |∂K| ≤ h^(d−1)/a for every cell.
    double regularity() const noexcept { return a_; }
    double total_measure() const noexcept { return total_measure_; }
    std::vector<double> cell_measures() const;

    /// Axis-aligned bounding box of the node set.
    Point lower_corner() const noexcept { return lo_; }
    Point upper_corner() const noexcept { return hi_; }

    std::size_t interior_face_count() const;
    std::size_t wall_face_count() const;

    /// Outward normal of a cell's local face.
    Normal outward_normal(int cell, int local_face) const;
    /// Neighbour across a local face, or -1 for a wall.
    int neighbour(int cell, int local_face) const;

    bool operator==(const Mesh& other) const;

private:
    int dim_;
    std::vector<Point> nodes_;
    std::vector<Cell> cells_;
    std::vector<Face> faces_;
    double h_ = 0.0;
    double a_ = 0.0;
    double total_measure_ = 0.0;
    Point lo_ = Point::Zero();
    Point hi_ = Point::Zero();
};

Mesh build_uniform_1d(double x_min, double x_max, int cell_count, BoundaryKind boundary = BoundaryKind::Wall);

struct Box2d {
    double x_min = 0.0, x_max = 1.0, y_min = 0.0, y_max = 1.0;
};
Mesh build_structured_2d(int nx, int ny, const Box2d& box, ElementKind element = ElementKind::Quad);

/// Plain-text mesh format: `MESH d=<1|2>`, `NODES <n>`, `CELLS <m>`, `BOUNDARY <b>` sections,
/// 0-based indices, `#` comments. Boundary tags: `wall` or `periodic:<cell>:<face>`.
Mesh load_mesh(const std::filesystem::path& path);
Mesh parse_mesh(const std::string& text);
void save_mesh(const Mesh& mesh, const std::filesystem::path& path);
std::string format_mesh(const Mesh& mesh);

/// Cell averages of fn: midpoint rule (order 1) or a subdivision rule exact for
/// quadratics (order 2).
std::vector<double> project_cell_averages(const std::function<double(const Point&)>& fn, const Mesh& mesh,
                                          int quadrature_order = 1);

struct RegularityQuotients {
    double min_volume_ratio;     ///< min_K |K| / h^d
    double min_perimeter_ratio;  ///< min_K h^(d−1) / |∂K|
    int worst_volume_cell;
    int worst_perimeter_cell;
};
RegularityQuotients regularity_quotients(const Mesh& mesh);

/// max over cells of |Σ |e| n_out| / |∂K|
double closure_defect(const Mesh& mesh);

}  // namespace ncbal
