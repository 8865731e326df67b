// SPDX-License-Identifier: Apache-2.0

#include "speclab/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace speclab {

namespace {

constexpr char kMagic[8] = {'S', 'L', 'A', 'B', 'P', 'O', 'T', '\0'};

[[noreturn]] void fail(const std::string& msg)
{
    throw std::runtime_error("scenario: " + msg);
}

struct KeyValues {
    std::map<std::string, std::vector<std::string>> kv;

    bool has(const std::string& k) const { return kv.count(k) > 0; }
    const std::vector<std::string>& tokens(const std::string& k) const
    {
        auto it = kv.find(k);
        if (it == kv.end())
            fail("missing key '" + k + "'");
        return it->second;
    }
    std::string str(const std::string& k) const
    {
        const auto& t = tokens(k);
        if (t.size() != 1)
            fail("key '" + k + "' expects a single value");
        return t[0];
    }
    double num(const std::string& k) const
    {
        try {
            return std::stod(str(k));
        } catch (const std::exception&) {
            fail("key '" + k + "' is not a number");
        }
    }
    double num_or(const std::string& k, double dflt) const { return has(k) ? num(k) : dflt; }
    long integer(const std::string& k) const
    {
        double v = num(k);
        long n = std::lround(v);
        if (v != static_cast<double>(n))
            fail("key '" + k + "' must be an integer");
        return n;
    }
};

KeyValues parse_keyvalues(const std::string& text)
{
    KeyValues out;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first))
            continue;
        if (first.front() == '[') {
            if (first.back() != ']')
                fail("malformed section header at line " + std::to_string(lineno));
            section = first.substr(1, first.size() - 2);
            continue;
        }
        std::vector<std::string> vals;
        std::string tok;
        while (ls >> tok)
            vals.push_back(tok);
        if (vals.empty())
            fail("key '" + first + "' has no value at line " + std::to_string(lineno));
        std::string key = section.empty() ? first : section + "." + first;
        if (out.kv.count(key))
            fail("duplicate key '" + key + "'");
        out.kv[key] = std::move(vals);
    }
    return out;
}

PotentialShape parse_shape(const KeyValues& kv, const std::string& prefix,
                           const std::string& base_dir)
{
    PotentialShape s;
    std::string kind = kv.str(prefix + ".kind");
    if (kind == "ball") {
        s.kind = PotentialShape::Kind::ball;
        s.radius = kv.num(prefix + ".radius");
        s.amplitude = kv.num(prefix + ".amplitude");
        if (!(s.radius > 0.0))
            fail(prefix + ": ball radius must be positive");
    } else if (kind == "gaussian") {
        s.kind = PotentialShape::Kind::gaussian;
        s.sigma = kv.num(prefix + ".sigma");
        s.amplitude = kv.num(prefix + ".amplitude");
        if (!(s.sigma > 0.0))
            fail(prefix + ": gaussian sigma must be positive");
    } else if (kind == "file") {
        s.kind = PotentialShape::Kind::file;
        s.path = kv.str(prefix + ".path");
        if (!base_dir.empty() && s.path.front() != '/')
            s.path = base_dir + "/" + s.path;
    } else {
        fail(prefix + ": unknown shape kind '" + kind + "'");
    }
    return s;
}

GridFunction realize_shape_at(const PotentialShape& s, const Grid3& g,
                              const std::array<double, 3>& center);

GridFunction realize_shape(const PotentialShape& s, const Grid3& g)
{
    if (s.kind == PotentialShape::Kind::file)
        return read_samples_file(s.path, g);
    return realize_shape_at(s, g, {0.0, 0.0, 0.0});
}

GridFunction realize_shape_at(const PotentialShape& s, const Grid3& g,
                              const std::array<double, 3>& center)
{
    GridFunction f(g, 1);
    const double h = g.spacing();
    const double half_diag = 0.5 * std::sqrt(3.0) * h;
    const int sub = 8; // subsamples per axis for boundary cells
    std::size_t idx = 0;
    for (int ix = 0; ix < g.n; ++ix)
        for (int iy = 0; iy < g.n; ++iy)
            for (int iz = 0; iz < g.n; ++iz, ++idx) {
                auto p = g.point(ix, iy, iz);
                double dx = g.min_image(p[0] - center[0]);
                double dy = g.min_image(p[1] - center[1]);
                double dz = g.min_image(p[2] - center[2]);
                double r2 = dx * dx + dy * dy + dz * dz;
                if (s.kind == PotentialShape::Kind::ball) {
                    // Cell-averaged indicator: boundary cells take the
                    // covered fraction, which keeps the realized volume
                    // exact to subcell resolution (a center-sampled
                    // staircase ball is several percent small).
                    double r = std::sqrt(r2);
                    if (r <= s.radius - half_diag) {
                        f[idx] = s.amplitude;
                    } else if (r < s.radius + half_diag) {
                        int in = 0;
                        for (int a = 0; a < sub; ++a)
                            for (int b = 0; b < sub; ++b)
                                for (int c = 0; c < sub; ++c) {
                                    double ux = dx + h * ((a + 0.5) / sub - 0.5);
                                    double uy = dy + h * ((b + 0.5) / sub - 0.5);
                                    double uz = dz + h * ((c + 0.5) / sub - 0.5);
                                    if (ux * ux + uy * uy + uz * uz < s.radius * s.radius)
                                        ++in;
                                }
                        double frac = static_cast<double>(in) / (sub * sub * sub);
                        // Slivers below 2% of a cell add support points
                        // without measurable potential; drop them.
                        if (frac >= 0.02)
                            f[idx] = s.amplitude * frac;
                    }
                } else {
                    double v = s.amplitude * std::exp(-r2 / (2.0 * s.sigma * s.sigma));
                    if (std::abs(v) > 1e-14 * std::abs(s.amplitude))
                        f[idx] = v;
                }
            }
    return f;
}

void check_margin(const PotentialShape& s, const Grid3& g, const std::string& what)
{
    double extent = s.support_extent();
    if (extent > 0.25 * g.box_length + 1e-12)
        fail(what + ": potential support violates the L/4 margin (extent " +
             format_float(extent) + " > " + format_float(0.25 * g.box_length) + ")");
}

void check_margin_samples(const GridFunction& f, const std::string& what)
{
    const Grid3& g = f.grid();
    const double limit = 0.25 * g.box_length + 1e-12;
    std::size_t idx = 0;
    for (int ix = 0; ix < g.n; ++ix)
        for (int iy = 0; iy < g.n; ++iy)
            for (int iz = 0; iz < g.n; ++iz, ++idx) {
                if (f.point_modulus(idx) == 0.0)
                    continue;
                auto p = g.point(ix, iy, iz);
                if (std::abs(p[0]) > limit || std::abs(p[1]) > limit || std::abs(p[2]) > limit)
                    fail(what + ": sampled potential violates the L/4 margin");
            }
}

std::string emit_shape(const PotentialShape& s, const std::string& section)
{
    std::ostringstream out;
    out << "[" << section << "]\n";
    switch (s.kind) {
    case PotentialShape::Kind::ball:
        out << "kind ball\n";
        out << "radius " << format_float(s.radius) << "\n";
        out << "amplitude " << format_float(s.amplitude) << "\n";
        break;
    case PotentialShape::Kind::gaussian:
        out << "kind gaussian\n";
        out << "sigma " << format_float(s.sigma) << "\n";
        out << "amplitude " << format_float(s.amplitude) << "\n";
        break;
    case PotentialShape::Kind::file:
        out << "kind file\n";
        out << "path " << s.path << "\n";
        break;
    }
    return out.str();
}

} // namespace

GridFunction realize_shape_shifted(const PotentialShape& s, const Grid3& g,
                                   const std::array<double, 3>& center)
{
    if (s.kind != PotentialShape::Kind::file)
        return realize_shape_at(s, g, center);
    GridFunction f = read_samples_file(s.path, g);
    GridFunction hat = spectral_transform(f, TransformDirection::forward);
    std::size_t idx = 0;
    for (int kx = 0; kx < g.n; ++kx)
        for (int ky = 0; ky < g.n; ++ky)
            for (int kz = 0; kz < g.n; ++kz, ++idx) {
                double phase = g.wavenumber(kx) * center[0] + g.wavenumber(ky) * center[1] +
                               g.wavenumber(kz) * center[2];
                hat[idx] *= std::polar(1.0, -phase);
            }
    return spectral_transform(hat, TransformDirection::inverse);
}

double PotentialShape::support_extent() const
{
    switch (kind) {
    case Kind::ball:
        return radius;
    case Kind::gaussian:
        // Envelope drops below 1e-14 of the peak at sigma*sqrt(2*ln(1e14)).
        return sigma * std::sqrt(2.0 * std::log(1e14));
    case Kind::file:
        return 0.0; // checked against the realized samples instead
    }
    return 0.0;
}

std::string format_float(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::array<complexd, 4> Scenario::matrix_block(std::size_t idx) const
{
    complexd a = w1[idx], b = w2[idx];
    return {a, b, -std::conj(b), -a};
}

double Scenario::potential_sup_norm() const
{
    double m = 0.0;
    if (!is_matrix()) {
        for (std::size_t i = 0; i < v.size(); ++i)
            m = std::max(m, std::abs(v[i]));
        return m;
    }
    for (std::size_t i = 0; i < w1.size(); ++i) {
        // Largest singular value of [[a, b], [-conj(b), -a]] with real a:
        // the Gram matrix has eigenvalues |a|^2 + |b|^2 +- 2|a||b|.
        double a = std::abs(w1[i]), b = std::abs(w2[i]);
        m = std::max(m, a + b);
    }
    return m;
}

Scenario parse_scenario(const std::string& text, const std::string& base_dir)
{
    KeyValues kv = parse_keyvalues(text);
    if (kv.integer("scenario.format") != 1)
        fail("unsupported scenario format");

    Scenario s;
    s.grid = Grid3(static_cast<int>(kv.integer("grid.n")), kv.num("grid.L"));
    s.seed = kv.has("scenario.seed") ? static_cast<std::uint64_t>(kv.integer("scenario.seed")) : 1;

    std::string kind = kv.str("hamiltonian.kind");
    if (kind == "scalar") {
        s.hamiltonian = HamiltonianSpec::scalar();
    } else if (kind == "matrix") {
        if (!kv.has("hamiltonian.mu"))
            fail("matrix case requires gap");
        double mu = kv.num("hamiltonian.mu");
        if (!(mu > 0.0))
            fail("matrix case requires gap");
        s.hamiltonian = HamiltonianSpec::matrix(mu);
    } else {
        fail("hamiltonian.kind must be scalar or matrix");
    }

    s.v = GridFunction(s.grid, 1);
    s.w1 = GridFunction(s.grid, 1);
    s.w2 = GridFunction(s.grid, 1);
    if (s.is_matrix()) {
        s.w1_shape = parse_shape(kv, "potential.w1", base_dir);
        s.w2_shape = parse_shape(kv, "potential.w2", base_dir);
        check_margin(*s.w1_shape, s.grid, "potential.w1");
        check_margin(*s.w2_shape, s.grid, "potential.w2");
        s.w1 = realize_shape(*s.w1_shape, s.grid);
        s.w2 = realize_shape(*s.w2_shape, s.grid);
        check_margin_samples(s.w1, "potential.w1");
        check_margin_samples(s.w2, "potential.w2");
        for (std::size_t i = 0; i < s.w1.size(); ++i)
            if (s.w1[i].imag() != 0.0)
                fail("potential.w1 must be real-valued");
    } else {
        s.v_shape = parse_shape(kv, "potential", base_dir);
        check_margin(*s.v_shape, s.grid, "potential");
        s.v = realize_shape(*s.v_shape, s.grid);
        check_margin_samples(s.v, "potential");
    }

    if (kv.has("frame.omega") || kv.has("frame.v_amp") || kv.has("frame.a_amp")) {
        s.frame.enabled = true;
        if (kv.has("frame.v_amp")) {
            const auto& t = kv.tokens("frame.v_amp");
            if (t.size() != 3)
                fail("frame.v_amp expects three components");
            for (int i = 0; i < 3; ++i)
                s.frame.v_amp[i] = std::stod(t[i]);
        }
        s.frame.a_amp = kv.num_or("frame.a_amp", 0.0);
        s.frame.omega = kv.num_or("frame.omega", 1.0);
    }

    s.scan.lo = kv.num_or("scan.lo", s.scan.lo);
    s.scan.hi = kv.num_or("scan.hi", s.scan.hi);
    if (kv.has("scan.resolution"))
        s.scan.resolution = static_cast<int>(kv.integer("scan.resolution"));
    if (kv.has("scan.rect_re_lo")) {
        s.scan.has_rect = true;
        s.scan.re_lo = kv.num("scan.rect_re_lo");
        s.scan.re_hi = kv.num("scan.rect_re_hi");
        s.scan.im_lo = kv.num("scan.rect_im_lo");
        s.scan.im_hi = kv.num("scan.rect_im_hi");
        s.scan.n_re = static_cast<int>(kv.integer("scan.rect_nre"));
        s.scan.n_im = static_cast<int>(kv.integer("scan.rect_nim"));
    }

    s.tol.dip_threshold = kv.num_or("tolerances.dip_threshold", s.tol.dip_threshold);
    s.tol.branch_exclusion = kv.num_or("tolerances.branch_exclusion", s.tol.branch_exclusion);
    s.tol.boundary_mass = kv.num_or("tolerances.boundary_mass", s.tol.boundary_mass);

    s.run.T = kv.num_or("run.T", s.run.T);
    s.run.dt = kv.num_or("run.dt", s.run.dt);
    if (!(s.run.dt > 0.0))
        fail("run.dt must be positive");

    return s;
}

Scenario load_scenario(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    auto slash = path.find_last_of('/');
    std::string base = slash == std::string::npos ? std::string(".") : path.substr(0, slash);
    return parse_scenario(buf.str(), base);
}

std::string emit_scenario(const Scenario& s)
{
    std::ostringstream out;
    out << "[scenario]\n";
    out << "format 1\n";
    out << "seed " << s.seed << "\n";
    out << "[grid]\n";
    out << "n " << s.grid.n << "\n";
    out << "L " << format_float(s.grid.box_length) << "\n";
    out << "[hamiltonian]\n";
    if (s.is_matrix()) {
        out << "kind matrix\n";
        out << "mu " << format_float(s.hamiltonian.mu) << "\n";
    } else {
        out << "kind scalar\n";
    }
    if (s.v_shape)
        out << emit_shape(*s.v_shape, "potential");
    if (s.w1_shape)
        out << emit_shape(*s.w1_shape, "potential.w1");
    if (s.w2_shape)
        out << emit_shape(*s.w2_shape, "potential.w2");
    if (s.frame.enabled) {
        out << "[frame]\n";
        out << "v_amp " << format_float(s.frame.v_amp[0]) << " " << format_float(s.frame.v_amp[1])
            << " " << format_float(s.frame.v_amp[2]) << "\n";
        out << "a_amp " << format_float(s.frame.a_amp) << "\n";
        out << "omega " << format_float(s.frame.omega) << "\n";
    }
    out << "[scan]\n";
    out << "lo " << format_float(s.scan.lo) << "\n";
    out << "hi " << format_float(s.scan.hi) << "\n";
    out << "resolution " << s.scan.resolution << "\n";
    if (s.scan.has_rect) {
        out << "rect_re_lo " << format_float(s.scan.re_lo) << "\n";
        out << "rect_re_hi " << format_float(s.scan.re_hi) << "\n";
        out << "rect_im_lo " << format_float(s.scan.im_lo) << "\n";
        out << "rect_im_hi " << format_float(s.scan.im_hi) << "\n";
        out << "rect_nre " << s.scan.n_re << "\n";
        out << "rect_nim " << s.scan.n_im << "\n";
    }
    out << "[tolerances]\n";
    out << "dip_threshold " << format_float(s.tol.dip_threshold) << "\n";
    out << "branch_exclusion " << format_float(s.tol.branch_exclusion) << "\n";
    out << "boundary_mass " << format_float(s.tol.boundary_mass) << "\n";
    out << "[run]\n";
    out << "T " << format_float(s.run.T) << "\n";
    out << "dt " << format_float(s.run.dt) << "\n";
    return out.str();
}

GridFunction read_samples_file(const std::string& path, const Grid3& grid)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail("cannot open sample file '" + path + "'");
    char magic[8];
    std::uint32_t n = 0, comps = 0;
    char reserved[16];
    in.read(magic, 8);
    in.read(reinterpret_cast<char*>(&n), 4);
    in.read(reinterpret_cast<char*>(&comps), 4);
    in.read(reserved, 16);
    if (!in || std::memcmp(magic, kMagic, 8) != 0)
        fail("bad sample file header in '" + path + "'");
    if (static_cast<int>(n) != grid.n)
        fail("sample file grid size mismatch");
    if (comps != 1 && comps != 2)
        fail("sample file component count must be 1 or 2");
    GridFunction f(grid, static_cast<int>(comps));
    std::vector<float> buf(2 * f.size());
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size() * 4));
    if (!in)
        fail("sample file truncated");
    for (std::size_t i = 0; i < f.size(); ++i)
        f[i] = complexd(buf[2 * i], buf[2 * i + 1]);
    if (!f.all_finite())
        fail("sample file contains non-finite values");
    return f;
}

void write_samples_file(const std::string& path, const GridFunction& f)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        fail("cannot write sample file '" + path + "'");
    std::uint32_t n = static_cast<std::uint32_t>(f.grid().n);
    std::uint32_t comps = static_cast<std::uint32_t>(f.components());
    char reserved[16] = {};
    out.write(kMagic, 8);
    out.write(reinterpret_cast<const char*>(&n), 4);
    out.write(reinterpret_cast<const char*>(&comps), 4);
    out.write(reserved, 16);
    std::vector<float> buf(2 * f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        buf[2 * i] = static_cast<float>(f[i].real());
        buf[2 * i + 1] = static_cast<float>(f[i].imag());
    }
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * 4));
}

} // namespace speclab
