#include "porofreeze/io/scenario.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "porofreeze/errors.hpp"

namespace porofreeze::io {

namespace {

const std::vector<std::string> kFieldVars{"x", "y", "t", "theta_c", "theta_bar"};
const std::vector<std::string> kInitialVars{"x", "y", "theta_c", "theta_bar"};
const std::vector<std::string> kFacetVars{"marker", "x", "y", "theta_c", "theta_bar"};

[[noreturn]] void fail_at(const YAML::Node& node, const std::string& what, int column_offset = 0)
{
    const YAML::Mark m = node.Mark();
    if (m.line < 0) throw ParseError(what);
    throw ParseError(what, m.line + 1, m.column + 1 + column_offset);
}

std::string scalar(const YAML::Node& node, const std::string& key)
{
    if (!node.IsScalar()) fail_at(node, "'" + key + "' must be a scalar");
    return node.Scalar();
}

double to_double(const YAML::Node& node, const std::string& key)
{
    std::string s = scalar(node, key);
    std::string lower;
    for (char c : s) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (!lower.empty() && lower[0] == '+') lower.erase(0, 1);
    if (lower == "inf" || lower == ".inf" || lower == "infinity") return std::numeric_limits<double>::infinity();
    if (lower == "-inf" || lower == "-.inf" || lower == "-infinity") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    const char* first = s.data() + (s.size() > 0 && s[0] == '+' ? 1 : 0);
    const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || std::isnan(v)) {
        fail_at(node, "'" + key + "': expected a number, got '" + s + "'");
    }
    return v;
}

long to_long(const YAML::Node& node, const std::string& key)
{
    const std::string s = scalar(node, key);
    long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        fail_at(node, "'" + key + "': expected an integer, got '" + s + "'");
    }
    return v;
}

std::size_t to_count(const YAML::Node& node, const std::string& key)
{
    const long v = to_long(node, key);
    if (v < 0) fail_at(node, "'" + key + "' must be nonnegative");
    return static_cast<std::size_t>(v);
}

bool to_bool(const YAML::Node& node, const std::string& key)
{
    const std::string s = scalar(node, key);
    if (s == "true") return true;
    if (s == "false") return false;
    fail_at(node, "'" + key + "': expected true or false, got '" + s + "'");
}

template <class Enum>
Enum to_enum(const YAML::Node& node, const std::string& key, const std::vector<std::pair<std::string, Enum>>& names)
{
    const std::string s = scalar(node, key);
    std::string options;
    for (const auto& [name, value] : names) {
        if (s == name) return value;
        options += (options.empty() ? "" : ", ") + name;
    }
    fail_at(node, "'" + key + "': unknown value '" + s + "' (expected one of " + options + ")");
}

Expression to_expression(const YAML::Node& node, const std::string& key, const std::vector<std::string>& vars)
{
    const std::string text = scalar(node, key);
    try {
        return Expression::parse(text, vars);
    } catch (const ParseError& e) {
        const bool quoted = node.Tag() == "!";
        fail_at(node, "'" + key + "': " + e.what(), std::max(e.column() - 1, 0) + (quoted ? 1 : 0));
    }
}

/// Map section whose keys are checked against an allowed list.
class Section {
public:
    Section(const YAML::Node& node, std::string name, std::set<std::string> allowed)
        : node_(node), name_(std::move(name))
    {
        if (!node_ || node_.IsNull()) {
            node_ = YAML::Node(YAML::NodeType::Undefined);
            return;
        }
        if (!node_.IsMap()) fail_at(node_, "section '" + name_ + "' must be a mapping");
        for (auto it = node_.begin(); it != node_.end(); ++it) {
            const std::string key = it->first.Scalar();
            if (!allowed.count(key)) fail_at(it->first, "unknown key '" + key + "' in section '" + name_ + "'");
        }
    }

    bool has(const std::string& key) const { return node_.IsDefined() && node_[key].IsDefined(); }
    YAML::Node get(const std::string& key) const
    {
        return has(key) ? node_[key] : YAML::Node(YAML::NodeType::Undefined);
    }
    const YAML::Node& node() const { return node_; }

    void read(const std::string& key, double& target) const
    {
        if (has(key)) target = to_double(get(key), qualified(key));
    }
    void read(const std::string& key, int& target) const
    {
        if (has(key)) target = static_cast<int>(to_long(get(key), qualified(key)));
    }
    void read(const std::string& key, long& target) const
    {
        if (has(key)) target = to_long(get(key), qualified(key));
    }
    void read(const std::string& key, std::size_t& target) const
    {
        if (has(key)) target = to_count(get(key), qualified(key));
    }
    void read(const std::string& key, bool& target) const
    {
        if (has(key)) target = to_bool(get(key), qualified(key));
    }
    void read(const std::string& key, std::string& target) const
    {
        if (has(key)) target = scalar(get(key), qualified(key));
    }
    void read(const std::string& key, Expression& target, const std::vector<std::string>& vars) const
    {
        if (has(key)) target = to_expression(get(key), qualified(key), vars);
    }

    std::string qualified(const std::string& key) const { return name_ + "." + key; }

private:
    YAML::Node node_;
    std::string name_;
};

void read_pair(const Section& sec, const std::string& key, double& a, double& b)
{
    if (!sec.has(key)) return;
    const YAML::Node n = sec.get(key);
    if (!n.IsSequence() || n.size() != 2) fail_at(n, "'" + sec.qualified(key) + "' must be a list [lo, hi]");
    a = to_double(n[0], sec.qualified(key));
    b = to_double(n[1], sec.qualified(key));
}

void read_tensor(const Section& parent, const std::string& key, plasticity::IsoTensor& t)
{
    const Section sec(parent.get(key), parent.qualified(key), {"bulk", "shear"});
    sec.read("bulk", t.bulk);
    sec.read("shear", t.shear);
}

void read_mesh_section(const YAML::Node& node, MeshSpec& m)
{
    const Section sec(node, "mesh", {"dim", "x", "y", "cells", "file"});
    sec.read("dim", m.dim);
    if (m.dim != 1 && m.dim != 2) fail_at(sec.get("dim"), "mesh.dim must be 1 or 2");
    read_pair(sec, "x", m.box.x0, m.box.x1);
    read_pair(sec, "y", m.box.y0, m.box.y1);
    if (sec.has("cells")) {
        const YAML::Node c = sec.get("cells");
        if (c.IsScalar()) {
            m.nx = static_cast<int>(to_long(c, "mesh.cells"));
            m.ny = -1;
        } else if (c.IsSequence() && (c.size() == 1 || c.size() == 2)) {
            m.nx = static_cast<int>(to_long(c[0], "mesh.cells"));
            m.ny = c.size() == 2 ? static_cast<int>(to_long(c[1], "mesh.cells")) : -1;
        } else {
            fail_at(c, "mesh.cells must be an integer or a list [nx, ny]");
        }
        if (m.nx < 1 || (c.IsSequence() && c.size() == 2 && m.ny < 1)) fail_at(c, "mesh.cells must be positive");
    }
    sec.read("file", m.file);
}

void read_materials(const YAML::Node& node, constitutive::ModelParameters& model)
{
    const Section sec(node, "materials",
                      {"saturation", "mobility", "heat_capacity", "conductivity", "relaxation", "constants",
                       "tensors", "yield"});
    auto& laws = model.laws;
    {
        const Section s(sec.get("saturation"), "materials.saturation", {"kind", "c0", "f_flat", "f_sharp", "nu", "slope"});
        if (s.has("kind")) {
            laws.saturation.kind = to_enum<constitutive::SaturationLaw::Kind>(
                s.get("kind"), s.qualified("kind"),
                {{"power", constitutive::SaturationLaw::Kind::Power},
                 {"linear", constitutive::SaturationLaw::Kind::Linear}});
        }
        s.read("c0", laws.saturation.c0);
        s.read("f_flat", laws.saturation.f_flat);
        s.read("f_sharp", laws.saturation.f_sharp);
        s.read("nu", laws.saturation.nu);
        s.read("slope", laws.saturation.slope);
    }
    {
        const Section s(sec.get("mobility"), "materials.mobility", {"mu_flat", "modulation"});
        s.read("mu_flat", laws.mobility.mu_flat);
        s.read("modulation", laws.mobility.modulation);
    }
    {
        const Section s(sec.get("heat_capacity"), "materials.heat_capacity", {"c_flat", "c_sharp", "b", "b_hat"});
        s.read("c_flat", laws.heat_capacity.c_flat);
        s.read("c_sharp", laws.heat_capacity.c_sharp);
        s.read("b", laws.heat_capacity.b);
        s.read("b_hat", laws.heat_capacity.b_hat);
    }
    {
        const Section s(sec.get("conductivity"), "materials.conductivity", {"k_flat", "k_sharp", "a", "a_hat"});
        s.read("k_flat", laws.conductivity.k_flat);
        s.read("k_sharp", laws.conductivity.k_sharp);
        s.read("a", laws.conductivity.a);
        s.read("a_hat", laws.conductivity.a_hat);
    }
    {
        const Section s(sec.get("relaxation"), "materials.relaxation", {"g_flat", "g_sharp"});
        s.read("g_flat", laws.relaxation.g_flat);
        s.read("g_sharp", laws.relaxation.g_sharp);
    }
    {
        auto& k = model.constants;
        const Section s(sec.get("constants"), "materials.constants",
                        {"rho_star", "latent", "theta_c", "beta", "theta_bar", "rho_w"});
        s.read("rho_star", k.rho_star);
        s.read("latent", k.latent);
        s.read("theta_c", k.theta_c);
        s.read("beta", k.beta);
        s.read("theta_bar", k.theta_bar);
        s.read("rho_w", k.rho_w);
    }
    {
        const Section s(sec.get("tensors"), "materials.tensors", {"ah", "ae", "b"});
        read_tensor(s, "ah", model.tensors.ah);
        read_tensor(s, "ae", model.tensors.ae);
        read_tensor(s, "b", model.tensors.b);
    }
    {
        const Section s(sec.get("yield"), "materials.yield", {"kind", "sigma_y", "trace_bound"});
        if (s.has("kind")) {
            model.yield.kind = to_enum<plasticity::YieldSurface::Kind>(
                s.get("kind"), s.qualified("kind"),
                {{"ball", plasticity::YieldSurface::Kind::Ball}, {"cylinder", plasticity::YieldSurface::Kind::Cylinder}});
        }
        s.read("sigma_y", model.yield.sigma_y);
        if (s.has("trace_bound")) {
            double tb = 0.0;
            s.read("trace_bound", tb);
            model.yield.trace_bound = tb;
        }
    }
}

void read_density(const YAML::Node& node, DensitySpec& d)
{
    const Section sec(node, "density",
                      {"kind", "value", "r_max", "v_min", "v_max", "amplitude", "r_scale", "v_scale", "file"});
    if (sec.has("kind")) {
        d.kind = to_enum<DensitySpec::Kind>(sec.get("kind"), "density.kind",
                                            {{"uniform", DensitySpec::Kind::Uniform},
                                             {"exponential", DensitySpec::Kind::Exponential},
                                             {"zero", DensitySpec::Kind::Zero},
                                             {"table", DensitySpec::Kind::Table}});
    }
    sec.read("value", d.value);
    sec.read("r_max", d.r_max);
    sec.read("v_min", d.v_min);
    sec.read("v_max", d.v_max);
    sec.read("amplitude", d.exponential.amplitude);
    sec.read("r_scale", d.exponential.r_scale);
    sec.read("v_scale", d.exponential.v_scale);
    if (d.kind == DensitySpec::Kind::Exponential) sec.read("r_max", d.exponential.r_max);
    sec.read("file", d.file);
    if (d.kind == DensitySpec::Kind::Table && d.file.empty()) fail_at(node, "density.kind table requires density.file");
}

void read_solver(const YAML::Node& node, solver::SolverConfig& c)
{
    const Section sec(node, "solver",
                      {"dt", "t_end", "cutoff_r", "eta", "tol", "max_iter", "max_halvings", "mode", "spectral_modes",
                       "preisach_levels", "linearization", "iterated_splitting", "max_sweeps", "freeze_phase",
                       "freeze_pressure", "freeze_mechanics", "freeze_temperature", "sources", "floor_tolerance"});
    sec.read("dt", c.dt);
    sec.read("t_end", c.t_end);
    sec.read("cutoff_r", c.cutoff_r);
    sec.read("eta", c.eta);
    sec.read("tol", c.tol);
    sec.read("max_iter", c.max_iter);
    sec.read("max_halvings", c.max_halvings);
    if (sec.has("mode")) {
        c.mode = to_enum<solver::Mode>(sec.get("mode"), "solver.mode",
                                       {{"fem", solver::Mode::Fem}, {"spectral", solver::Mode::Spectral}});
    }
    sec.read("spectral_modes", c.spectral_modes);
    sec.read("preisach_levels", c.preisach_levels);
    if (sec.has("linearization")) {
        c.pressure_linearization = to_enum<solver::Linearization>(
            sec.get("linearization"), "solver.linearization",
            {{"secant", solver::Linearization::Secant}, {"tangent", solver::Linearization::Tangent}});
    }
    sec.read("iterated_splitting", c.iterated_splitting);
    sec.read("max_sweeps", c.max_sweeps);
    sec.read("freeze_phase", c.freeze_phase);
    sec.read("freeze_pressure", c.freeze_pressure);
    sec.read("freeze_mechanics", c.freeze_mechanics);
    sec.read("freeze_temperature", c.freeze_temperature);
    sec.read("floor_tolerance", c.floor_tolerance);
    const Section src(sec.get("sources"), "solver.sources", {"viscous", "plastic", "pressure", "preisach", "phase"});
    src.read("viscous", c.sources.viscous);
    src.read("plastic", c.sources.plastic);
    src.read("pressure", c.sources.pressure);
    src.read("preisach", c.sources.preisach);
    src.read("phase", c.sources.phase);
    try {
        c.validate();
    } catch (const InvalidParameter& e) {
        fail_at(node, std::string("solver: ") + e.what());
    }
}

std::string resolve(const std::string& base, const std::string& file)
{
    const std::filesystem::path p(file);
    if (p.is_absolute()) return file;
    return (std::filesystem::path(base) / p).string();
}

void emit_tensor(YAML::Emitter& out, const char* key, const plasticity::IsoTensor& t)
{
    out << YAML::Key << key << YAML::Value << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "bulk" << YAML::Value << format_double(t.bulk);
    out << YAML::Key << "shear" << YAML::Value << format_double(t.shear);
    out << YAML::EndMap;
}

template <class T>
void kv(YAML::Emitter& out, const char* key, const T& value)
{
    out << YAML::Key << key << YAML::Value << value;
}

void kd(YAML::Emitter& out, const char* key, double value)
{
    out << YAML::Key << key << YAML::Value << format_double(value);
}

void ke(YAML::Emitter& out, const char* key, const Expression& e)
{
    out << YAML::Key << key << YAML::Value << YAML::DoubleQuoted << e.text();
}

const char* bool_text(bool b) { return b ? "true" : "false"; }

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& base_dir)
{
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ParseError(e.msg, e.mark.line + 1, e.mark.column + 1);
    }
    Scenario s;
    s.base_dir = base_dir;
    if (root.IsNull()) return s;
    const Section top(root, "top level",
                      {"name", "description", "mesh", "materials", "density", "boundary", "initial", "forcing",
                       "solver", "output", "checks"});
    top.read("name", s.name);
    top.read("description", s.description);
    read_mesh_section(top.get("mesh"), s.mesh);
    s.model.dim = s.mesh.dim;
    read_materials(top.get("materials"), s.model);
    read_density(top.get("density"), s.density);

    const Section b(top.get("boundary"), "boundary", {"alpha", "omega", "p_star", "theta_star"});
    b.read("alpha", s.alpha, kFacetVars);
    b.read("omega", s.omega, kFacetVars);
    b.read("p_star", s.p_star, kFieldVars);
    b.read("theta_star", s.theta_star, kFieldVars);

    const Section in(top.get("initial"), "initial", {"p", "theta", "chi", "u_x", "u_y", "p_noise"});
    in.read("p", s.p0, kInitialVars);
    in.read("theta", s.theta0, kInitialVars);
    in.read("chi", s.chi0, kInitialVars);
    in.read("u_x", s.u0_x, kInitialVars);
    in.read("u_y", s.u0_y, kInitialVars);
    in.read("p_noise", s.p_noise);
    if (s.p_noise < 0.0) fail_at(in.get("p_noise"), "initial.p_noise must be nonnegative");

    const Section f(top.get("forcing"), "forcing", {"gravity_x", "gravity_y", "heat_source"});
    f.read("gravity_x", s.gravity_x, kFieldVars);
    f.read("gravity_y", s.gravity_y, kFieldVars);
    f.read("heat_source", s.heat_source, kFieldVars);

    read_solver(top.get("solver"), s.solver);

    const Section o(top.get("output"), "output", {"snapshot_every", "probe", "seed"});
    o.read("snapshot_every", s.output.snapshot_every);
    o.read("probe", s.output.probe);
    o.read("seed", s.output.seed);

    if (top.has("checks")) {
        const Section c(top.get("checks"), "checks", {"chi_low", "chi_high"});
        ChiChecks checks;
        c.read("chi_low", checks.chi_low);
        c.read("chi_high", checks.chi_high);
        s.checks = checks;
    }
    return s;
}

Scenario load_scenario(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ParseError("cannot read config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    const auto dir = std::filesystem::path(path).parent_path();
    return parse_scenario(buf.str(), dir.empty() ? "." : dir.string());
}

std::string to_yaml(const Scenario& s)
{
    YAML::Emitter out;
    out << YAML::BeginMap;
    kv(out, "name", s.name);
    if (!s.description.empty()) kv(out, "description", s.description);

    out << YAML::Key << "mesh" << YAML::Value << YAML::BeginMap;
    kv(out, "dim", s.mesh.dim);
    out << YAML::Key << "x" << YAML::Value << YAML::Flow << YAML::BeginSeq << format_double(s.mesh.box.x0)
        << format_double(s.mesh.box.x1) << YAML::EndSeq;
    out << YAML::Key << "y" << YAML::Value << YAML::Flow << YAML::BeginSeq << format_double(s.mesh.box.y0)
        << format_double(s.mesh.box.y1) << YAML::EndSeq;
    out << YAML::Key << "cells" << YAML::Value << YAML::Flow << YAML::BeginSeq << s.mesh.nx;
    if (s.mesh.ny >= 1) out << s.mesh.ny;
    out << YAML::EndSeq;
    if (!s.mesh.file.empty()) kv(out, "file", s.mesh.file);
    out << YAML::EndMap;

    const auto& laws = s.model.laws;
    out << YAML::Key << "materials" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "saturation" << YAML::Value << YAML::BeginMap;
    kv(out, "kind", laws.saturation.kind == constitutive::SaturationLaw::Kind::Power ? "power" : "linear");
    kd(out, "c0", laws.saturation.c0);
    kd(out, "f_flat", laws.saturation.f_flat);
    kd(out, "f_sharp", laws.saturation.f_sharp);
    kd(out, "nu", laws.saturation.nu);
    kd(out, "slope", laws.saturation.slope);
    out << YAML::EndMap;
    out << YAML::Key << "mobility" << YAML::Value << YAML::BeginMap;
    kd(out, "mu_flat", laws.mobility.mu_flat);
    kd(out, "modulation", laws.mobility.modulation);
    out << YAML::EndMap;
    out << YAML::Key << "heat_capacity" << YAML::Value << YAML::BeginMap;
    kd(out, "c_flat", laws.heat_capacity.c_flat);
    kd(out, "c_sharp", laws.heat_capacity.c_sharp);
    kd(out, "b", laws.heat_capacity.b);
    kd(out, "b_hat", laws.heat_capacity.b_hat);
    out << YAML::EndMap;
    out << YAML::Key << "conductivity" << YAML::Value << YAML::BeginMap;
    kd(out, "k_flat", laws.conductivity.k_flat);
    kd(out, "k_sharp", laws.conductivity.k_sharp);
    kd(out, "a", laws.conductivity.a);
    kd(out, "a_hat", laws.conductivity.a_hat);
    out << YAML::EndMap;
    out << YAML::Key << "relaxation" << YAML::Value << YAML::BeginMap;
    kd(out, "g_flat", laws.relaxation.g_flat);
    kd(out, "g_sharp", laws.relaxation.g_sharp);
    out << YAML::EndMap;
    const auto& k = s.model.constants;
    out << YAML::Key << "constants" << YAML::Value << YAML::BeginMap;
    kd(out, "rho_star", k.rho_star);
    kd(out, "latent", k.latent);
    kd(out, "theta_c", k.theta_c);
    kd(out, "beta", k.beta);
    kd(out, "theta_bar", k.theta_bar);
    kd(out, "rho_w", k.rho_w);
    out << YAML::EndMap;
    out << YAML::Key << "tensors" << YAML::Value << YAML::BeginMap;
    emit_tensor(out, "ah", s.model.tensors.ah);
    emit_tensor(out, "ae", s.model.tensors.ae);
    emit_tensor(out, "b", s.model.tensors.b);
    out << YAML::EndMap;
    out << YAML::Key << "yield" << YAML::Value << YAML::BeginMap;
    kv(out, "kind", s.model.yield.kind == plasticity::YieldSurface::Kind::Ball ? "ball" : "cylinder");
    kd(out, "sigma_y", s.model.yield.sigma_y);
    if (s.model.yield.trace_bound) kd(out, "trace_bound", *s.model.yield.trace_bound);
    out << YAML::EndMap;
    out << YAML::EndMap;

    const auto& d = s.density;
    out << YAML::Key << "density" << YAML::Value << YAML::BeginMap;
    switch (d.kind) {
        case DensitySpec::Kind::Uniform:
            kv(out, "kind", "uniform");
            kd(out, "value", d.value);
            kd(out, "r_max", d.r_max);
            kd(out, "v_min", d.v_min);
            kd(out, "v_max", d.v_max);
            break;
        case DensitySpec::Kind::Exponential:
            kv(out, "kind", "exponential");
            kd(out, "amplitude", d.exponential.amplitude);
            kd(out, "r_scale", d.exponential.r_scale);
            kd(out, "v_scale", d.exponential.v_scale);
            kd(out, "r_max", d.exponential.r_max);
            break;
        case DensitySpec::Kind::Zero: kv(out, "kind", "zero"); break;
        case DensitySpec::Kind::Table:
            kv(out, "kind", "table");
            kv(out, "file", d.file);
            break;
    }
    out << YAML::EndMap;

    out << YAML::Key << "boundary" << YAML::Value << YAML::BeginMap;
    ke(out, "alpha", s.alpha);
    ke(out, "omega", s.omega);
    ke(out, "p_star", s.p_star);
    ke(out, "theta_star", s.theta_star);
    out << YAML::EndMap;

    out << YAML::Key << "initial" << YAML::Value << YAML::BeginMap;
    ke(out, "p", s.p0);
    ke(out, "theta", s.theta0);
    ke(out, "chi", s.chi0);
    ke(out, "u_x", s.u0_x);
    ke(out, "u_y", s.u0_y);
    kd(out, "p_noise", s.p_noise);
    out << YAML::EndMap;

    out << YAML::Key << "forcing" << YAML::Value << YAML::BeginMap;
    ke(out, "gravity_x", s.gravity_x);
    ke(out, "gravity_y", s.gravity_y);
    ke(out, "heat_source", s.heat_source);
    out << YAML::EndMap;

    const auto& c = s.solver;
    out << YAML::Key << "solver" << YAML::Value << YAML::BeginMap;
    kd(out, "dt", c.dt);
    kd(out, "t_end", c.t_end);
    kd(out, "cutoff_r", c.cutoff_r);
    kd(out, "eta", c.eta);
    kd(out, "tol", c.tol);
    kv(out, "max_iter", c.max_iter);
    kv(out, "max_halvings", c.max_halvings);
    kv(out, "mode", c.mode == solver::Mode::Fem ? "fem" : "spectral");
    kv(out, "spectral_modes", c.spectral_modes);
    kv(out, "preisach_levels", c.preisach_levels);
    kv(out, "linearization", c.pressure_linearization == solver::Linearization::Secant ? "secant" : "tangent");
    kv(out, "iterated_splitting", bool_text(c.iterated_splitting));
    kv(out, "max_sweeps", c.max_sweeps);
    kv(out, "freeze_phase", bool_text(c.freeze_phase));
    kv(out, "freeze_pressure", bool_text(c.freeze_pressure));
    kv(out, "freeze_mechanics", bool_text(c.freeze_mechanics));
    kv(out, "freeze_temperature", bool_text(c.freeze_temperature));
    out << YAML::Key << "sources" << YAML::Value << YAML::BeginMap;
    kv(out, "viscous", bool_text(c.sources.viscous));
    kv(out, "plastic", bool_text(c.sources.plastic));
    kv(out, "pressure", bool_text(c.sources.pressure));
    kv(out, "preisach", bool_text(c.sources.preisach));
    kv(out, "phase", bool_text(c.sources.phase));
    out << YAML::EndMap;
    kd(out, "floor_tolerance", c.floor_tolerance);
    out << YAML::EndMap;

    out << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
    kv(out, "snapshot_every", s.output.snapshot_every);
    kv(out, "probe", s.output.probe);
    kv(out, "seed", s.output.seed);
    out << YAML::EndMap;

    if (s.checks) {
        out << YAML::Key << "checks" << YAML::Value << YAML::BeginMap;
        kd(out, "chi_low", s.checks->chi_low);
        kd(out, "chi_high", s.checks->chi_high);
        out << YAML::EndMap;
    }
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

discretization::Mesh build_mesh(const Scenario& s)
{
    discretization::Mesh mesh;
    if (!s.mesh.file.empty()) {
        mesh = discretization::read_mesh_file(resolve(s.base_dir, s.mesh.file));
        if (mesh.dim != s.mesh.dim) throw InvalidSetup("mesh file dimension does not match mesh.dim");
    } else {
        mesh = discretization::build_mesh(s.mesh.dim, s.mesh.box, s.mesh.nx, s.mesh.ny);
    }
    return mesh;
}

hysteresis::PreisachDensity build_density(const DensitySpec& spec, const std::string& base_dir)
{
    switch (spec.kind) {
        case DensitySpec::Kind::Uniform:
            return hysteresis::PreisachDensity::uniform(spec.value, spec.r_max, spec.v_min, spec.v_max);
        case DensitySpec::Kind::Exponential: return hysteresis::PreisachDensity::exponential(spec.exponential);
        case DensitySpec::Kind::Zero: return hysteresis::PreisachDensity::zero();
        case DensitySpec::Kind::Table: return hysteresis::read_density_table_file(resolve(base_dir, spec.file));
    }
    throw InternalError("unknown density kind");
}

namespace {

std::size_t nearest_node(const discretization::Mesh& mesh)
{
    double lo_x = mesh.nodes[0][0], hi_x = lo_x, lo_y = mesh.nodes[0][1], hi_y = lo_y;
    for (const auto& n : mesh.nodes) {
        lo_x = std::min(lo_x, n[0]);
        hi_x = std::max(hi_x, n[0]);
        lo_y = std::min(lo_y, n[1]);
        hi_y = std::max(hi_y, n[1]);
    }
    const double cx = 0.5 * (lo_x + hi_x), cy = 0.5 * (lo_y + hi_y);
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
        const double d = std::hypot(mesh.nodes[i][0] - cx, mesh.nodes[i][1] - cy);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

}  // namespace

solver::Problem build_problem(const Scenario& s)
{
    solver::Problem pr;
    pr.model = s.model;
    pr.model.dim = s.mesh.dim;
    pr.model.density = build_density(s.density, s.base_dir);
    pr.mesh = build_mesh(s);
    const double tc = s.model.constants.theta_c, tb = s.model.constants.theta_bar;

    const auto field = [tc, tb](const Expression& e) -> solver::ScalarField {
        return [e, tc, tb](double x, double y, double t) { return e.eval({x, y, t, tc, tb}); };
    };
    const auto facet = [tc, tb](const Expression& e) -> solver::FacetField {
        return [e, tc, tb](int marker, double x, double y) { return e.eval({double(marker), x, y, tc, tb}); };
    };
    const auto initial = [tc, tb](const Expression& e) {
        return [e, tc, tb](double x, double y) { return e.eval({x, y, tc, tb}); };
    };

    pr.boundary.alpha = facet(s.alpha);
    pr.boundary.omega = facet(s.omega);
    pr.boundary.p_star = field(s.p_star);
    pr.boundary.theta_star = field(s.theta_star);
    pr.initial.p = initial(s.p0);
    pr.initial.theta = initial(s.theta0);
    pr.initial.chi = initial(s.chi0);
    pr.initial.u = [ux = initial(s.u0_x), uy = initial(s.u0_y)](double x, double y) {
        return std::array<double, 2>{ux(x, y), uy(x, y)};
    };
    pr.initial.p_noise = s.p_noise;
    pr.gravity = [gx = field(s.gravity_x), gy = field(s.gravity_y)](double x, double y, double t) {
        return std::array<double, 2>{gx(x, y, t), gy(x, y, t)};
    };
    pr.heat_source = field(s.heat_source);

    if (s.output.probe >= 0) {
        pr.probe_node = static_cast<std::size_t>(s.output.probe);
    } else {
        pr.probe_node = nearest_node(pr.mesh);
    }
    pr.seed = s.output.seed;
    return pr;
}

namespace {

std::string point_text(double x, double y, int dim)
{
    return dim == 1 ? "x = " + format_double(x) : "(x, y) = (" + format_double(x) + ", " + format_double(y) + ")";
}

void fail_clause(constitutive::ClauseResult& c, const std::string& witness)
{
    if (!c.passed) return;
    c.passed = false;
    c.witness = witness;
}

}  // namespace

constitutive::ValidationReport validate_scenario(const Scenario& s, std::size_t time_samples)
{
    auto params = s.model;
    params.dim = s.mesh.dim;
    params.density = build_density(s.density, s.base_dir);
    auto rep = constitutive::validate_hypotheses(params);
    const auto pr = build_problem(s);
    const auto& mesh = pr.mesh;
    const int dim = mesh.dim;
    const double tb = s.model.constants.theta_bar;
    const double t_end = s.solver.t_end;
    const std::size_t nt = std::max<std::size_t>(time_samples, 2);
    const auto time_at = [&](std::size_t k) { return t_end * static_cast<double>(k) / static_cast<double>(nt - 1); };

    auto& c2 = rep.get("(ii)");
    c2.evaluated = true;
    double g_max = 0.0;
    for (std::size_t k = 0; k < nt && c2.passed; ++k) {
        const double t = time_at(k);
        for (const auto& n : mesh.nodes) {
            const auto g = pr.gravity(n[0], n[1], t);
            if (!std::isfinite(g[0]) || !std::isfinite(g[1])) {
                fail_clause(c2, "g is not finite at " + point_text(n[0], n[1], dim) + ", t = " + format_double(t));
                break;
            }
            g_max = std::max({g_max, std::abs(g[0]), std::abs(g[1])});
        }
    }
    if (dim == 2 && c2.passed) {
        const double extent = std::max(s.mesh.box.x1 - s.mesh.box.x0, s.mesh.box.y1 - s.mesh.box.y0);
        const double h = 1e-5 * extent, curl_tol = 1e-4 * (1.0 + g_max) / extent;
        for (std::size_t k = 0; k < nt && c2.passed; ++k) {
            const double t = time_at(k);
            for (const auto& n : mesh.nodes) {
                const double x = n[0], y = n[1];
                const double dgx_dy = (pr.gravity(x, y + h, t)[0] - pr.gravity(x, y - h, t)[0]) / (2 * h);
                const double dgy_dx = (pr.gravity(x + h, y, t)[1] - pr.gravity(x - h, y, t)[1]) / (2 * h);
                if (std::abs(dgx_dy - dgy_dx) > curl_tol) {
                    fail_clause(c2, "g is not a gradient field: curl = " + format_double(dgx_dy - dgy_dx) + " at " +
                                        point_text(x, y, 2) + ", t = " + format_double(t));
                    break;
                }
            }
        }
    }

    auto& c3 = rep.get("(iii)");
    c3.evaluated = true;
    double int_alpha = 0.0, int_omega = 0.0;
    for (std::size_t f = 0; f < mesh.boundary.size(); ++f) {
        const auto& facet = mesh.boundary[f];
        const auto& a = mesh.nodes[facet.nodes[0]];
        const auto b = facet.nodes[1] >= 0 ? mesh.nodes[facet.nodes[1]] : a;
        const double mx = 0.5 * (a[0] + b[0]), my = 0.5 * (a[1] + b[1]);
        const double al = pr.boundary.alpha(facet.marker, mx, my);
        const double om = pr.boundary.omega(facet.marker, mx, my);
        if (!(al >= 0.0) || !std::isfinite(al)) {
            fail_clause(c3, "alpha = " + format_double(al) + " at " + point_text(mx, my, dim));
        }
        if (!(om >= 0.0) || !std::isfinite(om)) {
            fail_clause(c3, "omega = " + format_double(om) + " at " + point_text(mx, my, dim));
        }
        int_alpha += al * mesh.facet_measure(f);
        int_omega += om * mesh.facet_measure(f);
    }
    if (!(int_alpha > 0.0)) fail_clause(c3, "boundary integral of alpha is " + format_double(int_alpha));
    if (!(int_omega > 0.0)) fail_clause(c3, "boundary integral of omega is " + format_double(int_omega));

    auto& c4 = rep.get("(iv)");
    c4.evaluated = true;
    const auto bnodes = mesh.boundary_nodes();
    for (std::size_t k = 0; k < nt && c4.passed; ++k) {
        const double t = time_at(k);
        for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
            if (!bnodes[i]) continue;
            const double x = mesh.nodes[i][0], y = mesh.nodes[i][1];
            const double ps = pr.boundary.p_star(x, y, t), ts = pr.boundary.theta_star(x, y, t);
            const std::string where = point_text(x, y, dim) + ", t = " + format_double(t);
            if (!std::isfinite(ps)) {
                fail_clause(c4, "p* is not finite at " + where);
                break;
            }
            if (!std::isfinite(ts) || !(ts >= tb)) {
                fail_clause(c4, "theta* = " + format_double(ts) + " < theta_bar = " + format_double(tb) + " at " + where);
                break;
            }
        }
    }

    auto& c5 = rep.get("(v)");
    c5.evaluated = true;
    for (const auto& n : mesh.nodes) {
        const double x = n[0], y = n[1];
        const double th = pr.initial.theta(x, y), ch = pr.initial.chi(x, y), p = pr.initial.p(x, y);
        const auto u = pr.initial.u(x, y);
        if (!(th >= tb)) {
            fail_clause(c5, "theta0 = " + format_double(th) + " < theta_bar at " + point_text(x, y, dim));
        } else if (!(ch >= 0.0 && ch <= 1.0)) {
            fail_clause(c5, "chi0 = " + format_double(ch) + " outside [0, 1] at " + point_text(x, y, dim));
        } else if (!std::isfinite(p) || !std::isfinite(u[0]) || !std::isfinite(u[1])) {
            fail_clause(c5, "initial p or u not finite at " + point_text(x, y, dim));
        }
        if (!c5.passed) break;
    }
    return rep;
}

}  // namespace porofreeze::io
