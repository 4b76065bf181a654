#include "porofreeze/discretization/mesh.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "porofreeze/errors.hpp"

namespace porofreeze::discretization {

double Mesh::signed_measure(std::size_t e) const
{
    const auto& el = elements[e];
    const auto& a = nodes[static_cast<std::size_t>(el[0])];
    const auto& b = nodes[static_cast<std::size_t>(el[1])];
    if (dim == 1) return b[0] - a[0];
    const auto& c = nodes[static_cast<std::size_t>(el[2])];
    return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
}

double Mesh::facet_measure(std::size_t f) const
{
    if (dim == 1) return 1.0;
    const auto& a = nodes[static_cast<std::size_t>(boundary[f].nodes[0])];
    const auto& b = nodes[static_cast<std::size_t>(boundary[f].nodes[1])];
    return std::hypot(b[0] - a[0], b[1] - a[1]);
}

std::array<double, 2> Mesh::centroid(std::size_t e) const
{
    std::array<double, 2> c{0.0, 0.0};
    for (int a = 0; a <= dim; ++a) {
        const auto& x = nodes[static_cast<std::size_t>(elements[e][static_cast<std::size_t>(a)])];
        c[0] += x[0];
        c[1] += x[1];
    }
    c[0] /= dim + 1;
    c[1] /= dim + 1;
    return c;
}

void Mesh::validate() const
{
    if (dim != 1 && dim != 2) throw InvalidParameter("mesh dimension must be 1 or 2");
    if (nodes.empty() || elements.empty()) throw InvalidParameter("mesh has no nodes or no elements");
    const int n = static_cast<int>(nodes.size());
    auto check_index = [n](int i, const char* what) {
        if (i < 0 || i >= n) throw InvalidParameter(std::string(what) + " references missing node " + std::to_string(i));
    };
    for (std::size_t e = 0; e < elements.size(); ++e) {
        for (int a = 0; a <= dim; ++a) check_index(elements[e][static_cast<std::size_t>(a)], "element");
        if (!(signed_measure(e) > 0.0)) {
            throw InvalidParameter("element " + std::to_string(e) + " has nonpositive measure");
        }
    }
    if (boundary.empty()) throw InvalidParameter("mesh has no boundary facets");
    for (const auto& f : boundary) {
        check_index(f.nodes[0], "boundary facet");
        if (dim == 2) check_index(f.nodes[1], "boundary facet");
        if (f.marker <= 0) throw InvalidParameter("boundary facet without a positive marker");
    }
}

std::vector<bool> Mesh::boundary_nodes() const
{
    std::vector<bool> on(nodes.size(), false);
    for (const auto& f : boundary) {
        on[static_cast<std::size_t>(f.nodes[0])] = true;
        if (dim == 2) on[static_cast<std::size_t>(f.nodes[1])] = true;
    }
    return on;
}

Mesh build_mesh(int dim, const Box& box, int nx, int ny)
{
    if (ny < 0) ny = nx;
    if (nx < 1 || ny < 1) throw InvalidParameter("mesh resolution must be at least 1");
    if (!(box.x1 > box.x0) || (dim == 2 && !(box.y1 > box.y0))) throw InvalidParameter("empty mesh extents");
    Mesh m;
    m.dim = dim;
    if (dim == 1) {
        for (int i = 0; i <= nx; ++i) m.nodes.push_back({box.x0 + (box.x1 - box.x0) * i / nx, 0.0});
        m.nodes.back()[0] = box.x1;
        for (int i = 0; i < nx; ++i) m.elements.push_back({i, i + 1, -1});
        m.boundary.push_back({{0, -1}, 1});
        m.boundary.push_back({{nx, -1}, 2});
        return m;
    }
    if (dim != 2) throw InvalidParameter("mesh dimension must be 1 or 2");
    auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
    for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i <= nx; ++i) {
            m.nodes.push_back({box.x0 + (box.x1 - box.x0) * i / nx, box.y0 + (box.y1 - box.y0) * j / ny});
        }
    }
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            m.elements.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            m.elements.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    }
    for (int i = 0; i < nx; ++i) m.boundary.push_back({{id(i, 0), id(i + 1, 0)}, 1});
    for (int j = 0; j < ny; ++j) m.boundary.push_back({{id(nx, j), id(nx, j + 1)}, 2});
    for (int i = nx; i > 0; --i) m.boundary.push_back({{id(i, ny), id(i - 1, ny)}, 3});
    for (int j = ny; j > 0; --j) m.boundary.push_back({{id(0, j), id(0, j - 1)}, 4});
    return m;
}

namespace {

class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    std::istringstream next()
    {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_no_;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            if (line.find_first_not_of(" \t\r") != std::string::npos) return std::istringstream(line);
        }
        fail("unexpected end of file");
    }

    [[noreturn]] void fail(const std::string& what) const
    {
        throw InvalidParameter("mesh file line " + std::to_string(line_no_) + ": " + what);
    }

    template <class T>
    T keyed(const std::string& key)
    {
        auto ls = next();
        std::string word;
        T value{};
        if (!(ls >> word) || word != key || !(ls >> value)) fail("expected '" + key + " <value>'");
        return value;
    }

private:
    std::istream& in_;
    int line_no_ = 0;
};

}  // namespace

Mesh read_mesh(std::istream& in)
{
    LineReader r(in);
    {
        auto ls = r.next();
        std::string magic;
        int version = 0;
        if (!(ls >> magic >> version) || magic != "porofreeze-mesh" || version != 1) {
            r.fail("expected header 'porofreeze-mesh 1'");
        }
    }
    Mesh m;
    m.dim = r.keyed<int>("dim");
    if (m.dim != 1 && m.dim != 2) r.fail("dim must be 1 or 2");
    const auto n = r.keyed<std::size_t>("nodes");
    for (std::size_t i = 0; i < n; ++i) {
        auto ls = r.next();
        std::array<double, 2> x{0.0, 0.0};
        if (!(ls >> x[0]) || (m.dim == 2 && !(ls >> x[1]))) r.fail("bad node coordinates");
        m.nodes.push_back(x);
    }
    const auto ne = r.keyed<std::size_t>("elements");
    for (std::size_t e = 0; e < ne; ++e) {
        auto ls = r.next();
        std::array<int, 3> el{-1, -1, -1};
        for (int a = 0; a <= m.dim; ++a) {
            if (!(ls >> el[static_cast<std::size_t>(a)])) r.fail("bad element connectivity");
        }
        m.elements.push_back(el);
    }
    const auto nf = r.keyed<std::size_t>("boundary");
    for (std::size_t f = 0; f < nf; ++f) {
        auto ls = r.next();
        Mesh::Facet facet;
        if (!(ls >> facet.nodes[0]) || (m.dim == 2 && !(ls >> facet.nodes[1])) || !(ls >> facet.marker)) {
            r.fail("bad boundary facet");
        }
        m.boundary.push_back(facet);
    }
    m.validate();
    return m;
}

Mesh read_mesh_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw InvalidParameter("cannot open mesh file " + path);
    return read_mesh(in);
}

void write_mesh(std::ostream& out, const Mesh& mesh)
{
    out.precision(std::numeric_limits<double>::max_digits10);
    out << "porofreeze-mesh 1\n" << "dim " << mesh.dim << "\n" << "nodes " << mesh.nodes.size() << "\n";
    for (const auto& x : mesh.nodes) {
        out << x[0];
        if (mesh.dim == 2) out << ' ' << x[1];
        out << '\n';
    }
    out << "elements " << mesh.elements.size() << "\n";
    for (const auto& el : mesh.elements) {
        out << el[0] << ' ' << el[1];
        if (mesh.dim == 2) out << ' ' << el[2];
        out << '\n';
    }
    out << "boundary " << mesh.boundary.size() << "\n";
    for (const auto& f : mesh.boundary) {
        out << f.nodes[0];
        if (mesh.dim == 2) out << ' ' << f.nodes[1];
        out << ' ' << f.marker << '\n';
    }
}

}  // namespace porofreeze::discretization
