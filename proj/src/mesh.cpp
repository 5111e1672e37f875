#include "ncbal/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include "ncbal/errors.hpp"

namespace ncbal {
namespace {

struct LocalFace {
    int cell;
    int local;
    double measure;
    Normal normal;  // outward
    Point midpoint;
};

}  // namespace

Mesh::Mesh(int dimension, std::vector<Point> nodes, std::vector<std::vector<int>> cells,
           std::vector<PeriodicPair> periodic_pairs)
    : dim_(dimension), nodes_(std::move(nodes)) {
    if (dim_ != 1 && dim_ != 2) throw MeshValidationError("mesh dimension must be 1 or 2");
    if (cells.empty()) throw MeshValidationError("mesh has no cells");
    if (nodes_.empty()) throw MeshValidationError("mesh has no nodes");

    cells_.resize(cells.size());
    // Face keys: the node id in 1D, the sorted node pair in 2D.
    std::map<std::pair<int, int>, std::vector<LocalFace>> by_key;
    std::vector<std::vector<LocalFace>> local_faces(cells.size());

    for (std::size_t k = 0; k < cells.size(); ++k) {
        const auto& poly = cells[k];
        Cell& cell = cells_[k];
        cell.nodes = poly;
        for (int id : poly) {
            if (id < 0 || id >= static_cast<int>(nodes_.size()))
                throw MeshValidationError("cell " + std::to_string(k) + " references missing node " + std::to_string(id));
        }
        if (dim_ == 1) {
            if (poly.size() != 2) throw MeshValidationError("1D cell " + std::to_string(k) + " needs exactly 2 nodes");
            const double xa = nodes_[poly[0]].x();
            const double xb = nodes_[poly[1]].x();
            if (!(xb > xa)) throw MeshValidationError("1D cell " + std::to_string(k) + " has nonpositive length");
            cell.measure = xb - xa;
            cell.diameter = cell.measure;
            cell.centroid = Point(0.5 * (xa + xb), 0.0);
            local_faces[k] = {{static_cast<int>(k), 0, 1.0, Normal(-1.0, 0.0), Point(xa, 0.0)},
                              {static_cast<int>(k), 1, 1.0, Normal(1.0, 0.0), Point(xb, 0.0)}};
        } else {
            const std::size_t nv = poly.size();
            if (nv < 3) throw MeshValidationError("2D cell " + std::to_string(k) + " needs at least 3 nodes");
            double area2 = 0.0;
            Point c = Point::Zero();
            for (std::size_t i = 0; i < nv; ++i) {
                const Point& p = nodes_[poly[i]];
                const Point& q = nodes_[poly[(i + 1) % nv]];
                const double cross = p.x() * q.y() - q.x() * p.y();
                area2 += cross;
                c += cross * (p + q);
            }
            if (!(area2 > 0.0))
                throw MeshValidationError("2D cell " + std::to_string(k) + " is degenerate or not counter-clockwise");
            cell.measure = 0.5 * area2;
            cell.centroid = c / (3.0 * area2);
            for (std::size_t i = 0; i < nv; ++i) {
                for (std::size_t j = i + 1; j < nv; ++j)
                    cell.diameter = std::max(cell.diameter, (nodes_[poly[i]] - nodes_[poly[j]]).norm());
                const Point& p = nodes_[poly[i]];
                const Point& q = nodes_[poly[(i + 1) % nv]];
                const Point edge = q - p;
                const double len = edge.norm();
                if (!(len > 0.0)) throw MeshValidationError("2D cell " + std::to_string(k) + " has a zero-length edge");
                local_faces[k].push_back(
                    {static_cast<int>(k), static_cast<int>(i), len, Normal(edge.y(), -edge.x()) / len, 0.5 * (p + q)});
            }
        }
        cell.faces.assign(local_faces[k].size(), FaceRef{});
        for (const auto& lf : local_faces[k]) {
            cell.perimeter += lf.measure;
            std::pair<int, int> key;
            if (dim_ == 1) {
                key = {poly[lf.local], -1};
            } else {
                const int a = poly[lf.local];
                const int b = poly[(lf.local + 1) % poly.size()];
                key = {std::min(a, b), std::max(a, b)};
            }
            by_key[key].push_back(lf);
        }
    }

    // Pair matched faces; the cell with the lower id owns the face.
    std::map<std::pair<int, int>, const LocalFace*> partner;
    for (const auto& [key, list] : by_key) {
        if (list.size() > 2) throw MeshValidationError("duplicate interface shared by more than two cells");
        if (list.size() == 2) {
            if (list[0].cell == list[1].cell) throw MeshValidationError("cell " + std::to_string(list[0].cell) + " touches itself");
            if ((list[0].normal + list[1].normal).norm() > 1e-12)
                throw MeshValidationError("inconsistent orientation between cells " + std::to_string(list[0].cell) +
                                          " and " + std::to_string(list[1].cell));
            partner[{list[0].cell, list[0].local}] = &list[1];
            partner[{list[1].cell, list[1].local}] = &list[0];
        }
    }
    std::map<std::pair<int, int>, std::pair<int, int>> periodic;
    for (const auto& pp : periodic_pairs) {
        for (auto [c, f] : {std::pair{pp.cell_a, pp.face_a}, std::pair{pp.cell_b, pp.face_b}}) {
            if (c < 0 || c >= static_cast<int>(cells_.size()) || f < 0 || f >= static_cast<int>(local_faces[c].size()))
                throw MeshValidationError("periodic pair references a missing face");
            if (partner.count({c, f}) || periodic.count({c, f}))
                throw MeshValidationError("periodic face " + std::to_string(c) + ":" + std::to_string(f) + " is not a free boundary face");
        }
        const LocalFace& fa = local_faces[pp.cell_a][pp.face_a];
        const LocalFace& fb = local_faces[pp.cell_b][pp.face_b];
        if (std::abs(fa.measure - fb.measure) > 1e-12 * fa.measure || (fa.normal + fb.normal).norm() > 1e-12)
            throw MeshValidationError("periodic faces do not match in measure and orientation");
        periodic[{pp.cell_a, pp.face_a}] = {pp.cell_b, pp.face_b};
        periodic[{pp.cell_b, pp.face_b}] = {pp.cell_a, pp.face_a};
    }

    for (std::size_t k = 0; k < cells_.size(); ++k) {
        for (const auto& lf : local_faces[k]) {
            if (cells_[k].faces[lf.local].face >= 0) continue;
            Face face;
            face.left = lf.cell;
            face.left_local = lf.local;
            face.measure = lf.measure;
            face.normal = lf.normal;
            face.midpoint = lf.midpoint;
            int other_cell = -1, other_local = -1;
            if (auto it = partner.find({lf.cell, lf.local}); it != partner.end()) {
                other_cell = it->second->cell;
                other_local = it->second->local;
            } else if (auto jt = periodic.find({lf.cell, lf.local}); jt != periodic.end()) {
                std::tie(other_cell, other_local) = jt->second;
                face.periodic = true;
            }
            face.right = other_cell;
            face.right_local = other_local;
            const int id = static_cast<int>(faces_.size());
            faces_.push_back(face);
            cells_[k].faces[lf.local] = {id, 1};
            if (other_cell >= 0) cells_[other_cell].faces[other_local] = {id, -1};
        }
    }

    lo_ = hi_ = nodes_.front();
    for (const auto& p : nodes_) {
        lo_ = lo_.cwiseMin(p);
        hi_ = hi_.cwiseMax(p);
    }
    for (const auto& cell : cells_) {
        h_ = std::max(h_, cell.diameter);
        total_measure_ += cell.measure;
    }
    const double hd = std::pow(h_, dim_);
    const double hd1 = std::pow(h_, dim_ - 1);
    a_ = HUGE_VAL;
    for (const auto& cell : cells_) a_ = std::min({a_, cell.measure / hd, hd1 / cell.perimeter});
}

std::vector<double> Mesh::cell_measures() const {
    std::vector<double> out;
    out.reserve(cells_.size());
    for (const auto& c : cells_) out.push_back(c.measure);
    return out;
}

std::size_t Mesh::interior_face_count() const {
    return static_cast<std::size_t>(std::count_if(faces_.begin(), faces_.end(), [](const Face& f) { return !f.is_wall(); }));
}

std::size_t Mesh::wall_face_count() const { return faces_.size() - interior_face_count(); }

Normal Mesh::outward_normal(int cell, int local_face) const {
    const FaceRef ref = cells_[cell].faces[local_face];
    return ref.sign * faces_[ref.face].normal;
}

int Mesh::neighbour(int cell, int local_face) const {
    const FaceRef ref = cells_[cell].faces[local_face];
    const Face& f = faces_[ref.face];
    return ref.sign > 0 ? f.right : f.left;
}

bool Mesh::operator==(const Mesh& other) const {
    if (dim_ != other.dim_ || nodes_ != other.nodes_ || cells_.size() != other.cells_.size() ||
        faces_.size() != other.faces_.size())
        return false;
    for (std::size_t k = 0; k < cells_.size(); ++k) {
        const Cell& a = cells_[k];
        const Cell& b = other.cells_[k];
        if (a.nodes != b.nodes || a.measure != b.measure || a.perimeter != b.perimeter || a.diameter != b.diameter ||
            a.centroid != b.centroid)
            return false;
        for (std::size_t f = 0; f < a.faces.size(); ++f) {
            if (a.faces[f].face != b.faces[f].face || a.faces[f].sign != b.faces[f].sign) return false;
        }
    }
    for (std::size_t f = 0; f < faces_.size(); ++f) {
        const Face& a = faces_[f];
        const Face& b = other.faces_[f];
        if (a.left != b.left || a.right != b.right || a.left_local != b.left_local || a.right_local != b.right_local ||
            a.measure != b.measure || a.normal != b.normal || a.midpoint != b.midpoint || a.periodic != b.periodic)
            return false;
    }
    return h_ == other.h_ && a_ == other.a_;
}

Mesh build_uniform_1d(double x_min, double x_max, int cell_count, BoundaryKind boundary) {
    if (cell_count < 2) throw MeshValidationError("uniform 1D mesh needs at least 2 cells");
    if (!(x_max > x_min)) throw MeshValidationError("uniform 1D mesh needs x_max > x_min");
    std::vector<Point> nodes;
    nodes.reserve(cell_count + 1);
    for (int i = 0; i <= cell_count; ++i) {
        const double x = i == cell_count ? x_max : x_min + (x_max - x_min) * i / cell_count;
        nodes.emplace_back(x, 0.0);
    }
    std::vector<std::vector<int>> cells;
    cells.reserve(cell_count);
    for (int i = 0; i < cell_count; ++i) cells.push_back({i, i + 1});
    std::vector<Mesh::PeriodicPair> periodic;
    if (boundary == BoundaryKind::Periodic) periodic.push_back({cell_count - 1, 1, 0, 0});
    return Mesh(1, std::move(nodes), std::move(cells), std::move(periodic));
}

Mesh build_structured_2d(int nx, int ny, const Box2d& box, ElementKind element) {
    if (nx < 2 || ny < 2) throw MeshValidationError("structured 2D mesh needs nx, ny >= 2");
    if (!(box.x_max > box.x_min) || !(box.y_max > box.y_min)) throw MeshValidationError("structured 2D mesh: degenerate box");
    std::vector<Point> nodes;
    nodes.reserve((nx + 1) * (ny + 1));
    for (int j = 0; j <= ny; ++j) {
        const double y = j == ny ? box.y_max : box.y_min + (box.y_max - box.y_min) * j / ny;
        for (int i = 0; i <= nx; ++i) {
            const double x = i == nx ? box.x_max : box.x_min + (box.x_max - box.x_min) * i / nx;
            nodes.emplace_back(x, y);
        }
    }
    auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
    std::vector<std::vector<int>> cells;
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
            if (element == ElementKind::Quad) {
                cells.push_back({a, b, c, d});
            } else {
                cells.push_back({a, b, c});
                cells.push_back({a, c, d});
            }
        }
    }
    return Mesh(2, std::move(nodes), std::move(cells));
}

// ---------------------------------------------------------------------------
// Text format

std::string format_mesh(const Mesh& mesh) {
    std::ostringstream out;
    out.precision(17);
    out << "MESH d=" << mesh.dimension() << '\n';
    out << "NODES " << mesh.nodes().size() << '\n';
    for (const auto& p : mesh.nodes()) {
        out << p.x();
        if (mesh.dimension() == 2) out << ' ' << p.y();
        out << '\n';
    }
    out << "CELLS " << mesh.cell_count() << '\n';
    for (const auto& c : mesh.cells()) {
        for (std::size_t i = 0; i < c.nodes.size(); ++i) out << (i ? " " : "") << c.nodes[i];
        out << '\n';
    }
    std::vector<std::string> boundary;
    for (const auto& f : mesh.faces()) {
        if (f.is_wall()) {
            boundary.push_back(std::to_string(f.left) + " " + std::to_string(f.left_local) + " wall");
        } else if (f.periodic) {
            boundary.push_back(std::to_string(f.left) + " " + std::to_string(f.left_local) + " periodic:" +
                               std::to_string(f.right) + ":" + std::to_string(f.right_local));
        }
    }
    out << "BOUNDARY " << boundary.size() << '\n';
    for (const auto& line : boundary) out << line << '\n';
    return out.str();
}

void save_mesh(const Mesh& mesh, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write mesh file " + path.string());
    out << format_mesh(mesh);
}

namespace {

struct LineReader {
    std::vector<std::pair<int, std::string>> lines;  // (line number, content without comment)
    std::size_t pos = 0;

    explicit LineReader(const std::string& text) {
        std::istringstream in(text);
        std::string line;
        int number = 0;
        while (std::getline(in, line)) {
            ++number;
            if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.find_first_not_of(" \t") == std::string::npos) continue;
            lines.emplace_back(number, line);
        }
    }
    bool done() const { return pos >= lines.size(); }
    int last_line() const { return lines.empty() ? 1 : lines.back().first + 1; }
    const std::pair<int, std::string>& next(const char* expecting) {
        if (done()) throw ParseError(std::string("unexpected end of file, expecting ") + expecting, last_line());
        return lines[pos++];
    }
};

int parse_section(LineReader& reader, const std::string& name) {
    const auto& [number, text] = reader.next(name.c_str());
    std::istringstream in(text);
    std::string word;
    long count = -1;
    std::string extra;
    if (!(in >> word >> count) || word != name || count < 0 || (in >> extra))
        throw ParseError("expected '" + name + " <count>'", number);
    return static_cast<int>(count);
}

}  // namespace

Mesh parse_mesh(const std::string& text) {
    LineReader reader(text);
    int dim = 0;
    {
        const auto& [number, line] = reader.next("MESH header");
        std::istringstream in(line);
        std::string word, dspec, extra;
        if (!(in >> word >> dspec) || word != "MESH" || (in >> extra) || (dspec != "d=1" && dspec != "d=2"))
            throw ParseError("expected 'MESH d=<1|2>'", number);
        dim = dspec == "d=1" ? 1 : 2;
    }
    const int node_count = parse_section(reader, "NODES");
    std::vector<Point> nodes;
    nodes.reserve(node_count);
    for (int i = 0; i < node_count; ++i) {
        const auto& [number, line] = reader.next("node coordinates");
        std::istringstream in(line);
        double x = 0.0, y = 0.0;
        std::string extra;
        if (!(in >> x) || (dim == 2 && !(in >> y)) || (in >> extra))
            throw ParseError("expected " + std::to_string(dim) + " coordinate(s) for node " + std::to_string(i), number);
        nodes.emplace_back(x, y);
    }
    const int cell_count = parse_section(reader, "CELLS");
    if (cell_count == 0) throw MeshValidationError("CELLS section is empty");
    std::vector<std::vector<int>> cells;
    cells.reserve(cell_count);
    for (int k = 0; k < cell_count; ++k) {
        const auto& [number, line] = reader.next("cell node list");
        std::istringstream in(line);
        std::vector<int> poly;
        std::string token;
        while (in >> token) {
            std::size_t used = 0;
            long id = -1;
            try {
                id = std::stol(token, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != token.size()) throw ParseError("bad node index '" + token + "'", number);
            if (id < 0 || id >= node_count)
                throw ParseError("cell " + std::to_string(k) + " references missing node " + token, number);
            poly.push_back(static_cast<int>(id));
        }
        if (poly.size() < static_cast<std::size_t>(dim == 1 ? 2 : 3))
            throw ParseError("cell " + std::to_string(k) + " has too few nodes", number);
        cells.push_back(std::move(poly));
    }
    std::vector<Mesh::PeriodicPair> periodic;
    if (!reader.done()) {
        const int boundary_count = parse_section(reader, "BOUNDARY");
        for (int b = 0; b < boundary_count; ++b) {
            const auto& [number, line] = reader.next("boundary entry");
            std::istringstream in(line);
            int cell = -1, face = -1;
            std::string tag, extra;
            if (!(in >> cell >> face >> tag) || (in >> extra)) throw ParseError("expected '<cell> <face> <tag>'", number);
            if (cell < 0 || cell >= cell_count) throw ParseError("boundary entry references missing cell", number);
            const int face_count = dim == 1 ? 2 : static_cast<int>(cells[cell].size());
            if (face < 0 || face >= face_count) throw ParseError("boundary entry references missing face", number);
            if (tag == "wall") continue;
            int pc = -1, pf = -1;
            char c1 = 0, c2 = 0;
            std::istringstream ptag(tag.size() > 8 && tag.rfind("periodic", 0) == 0 ? tag.substr(8) : std::string());
            if (!(ptag >> c1 >> pc >> c2 >> pf) || c1 != ':' || c2 != ':')
                throw ParseError("unknown boundary tag '" + tag + "' (expected wall or periodic:<cell>:<face>)", number);
            const bool listed = std::any_of(periodic.begin(), periodic.end(), [&](const Mesh::PeriodicPair& q) {
                return q.cell_a == pc && q.face_a == pf && q.cell_b == cell && q.face_b == face;
            });
            if (!listed) periodic.push_back({cell, face, pc, pf});
        }
    }
    if (!reader.done()) throw ParseError("unexpected trailing content", reader.lines[reader.pos].first);
    return Mesh(dim, std::move(nodes), std::move(cells), std::move(periodic));
}

Mesh load_mesh(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open mesh file " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_mesh(buffer.str());
}

std::vector<double> project_cell_averages(const std::function<double(const Point&)>& fn, const Mesh& mesh,
                                          int quadrature_order) {
    if (quadrature_order != 1 && quadrature_order != 2) throw DomainError("quadrature order must be 1 or 2");
    std::vector<double> out;
    out.reserve(mesh.cell_count());
    for (const auto& cell : mesh.cells()) {
        if (quadrature_order == 1) {
            out.push_back(fn(cell.centroid));
            continue;
        }
        if (mesh.dimension() == 1) {
            const double half = 0.5 * cell.measure;
            const double offset = half / std::sqrt(3.0);
            const double xc = cell.centroid.x();
            out.push_back(0.5 * (fn(Point(xc - offset, 0.0)) + fn(Point(xc + offset, 0.0))));
            continue;
        }
        // Fan of triangles (centroid, v_i, v_{i+1}); edge-midpoint rule on each.
        double sum = 0.0;
        const std::size_t nv = cell.nodes.size();
        for (std::size_t i = 0; i < nv; ++i) {
            const Point& p = mesh.nodes()[cell.nodes[i]];
            const Point& q = mesh.nodes()[cell.nodes[(i + 1) % nv]];
            const Point& c = cell.centroid;
            const double area = 0.5 * std::abs((p - c).x() * (q - c).y() - (p - c).y() * (q - c).x());
            sum += area * (fn(0.5 * (c + p)) + fn(0.5 * (p + q)) + fn(0.5 * (q + c))) / 3.0;
        }
        out.push_back(sum / cell.measure);
    }
    return out;
}

RegularityQuotients regularity_quotients(const Mesh& mesh) {
    RegularityQuotients q{HUGE_VAL, HUGE_VAL, -1, -1};
    const double hd = std::pow(mesh.size(), mesh.dimension());
    const double hd1 = std::pow(mesh.size(), mesh.dimension() - 1);
    for (std::size_t k = 0; k < mesh.cell_count(); ++k) {
        const Cell& c = mesh.cells()[k];
        if (c.measure / hd < q.min_volume_ratio) {
            q.min_volume_ratio = c.measure / hd;
            q.worst_volume_cell = static_cast<int>(k);
        }
        if (hd1 / c.perimeter < q.min_perimeter_ratio) {
            q.min_perimeter_ratio = hd1 / c.perimeter;
            q.worst_perimeter_cell = static_cast<int>(k);
        }
    }
    return q;
}

double closure_defect(const Mesh& mesh) {
    double worst = 0.0;
    for (const auto& cell : mesh.cells()) {
        Normal sum = Normal::Zero();
        for (const auto& ref : cell.faces) sum += ref.sign * mesh.faces()[ref.face].measure * mesh.faces()[ref.face].normal;
        worst = std::max(worst, sum.norm() / cell.perimeter);
    }
    return worst;
}

}  // namespace ncbal
