#include "hct/io.hpp"

#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace hct::io {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw std::runtime_error(path + ": " + what);
}

std::ofstream open_out(const std::string& path, bool binary) {
    std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
    if (!out) fail(path, "cannot open for writing");
    out << std::setprecision(17);
    return out;
}

std::ifstream open_in(const std::string& path, bool binary) {
    std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
    if (!in) fail(path, "cannot open for reading");
    return in;
}

void put_u64(std::ostream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64(std::istream& in, const std::string& path) {
    unsigned char b[8];
    if (!in.read(reinterpret_cast<char*>(b), 8)) fail(path, "truncated file");
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}

void put_f64(std::ostream& out, double x) {
    std::uint64_t v;
    std::memcpy(&v, &x, 8);
    put_u64(out, v);
}

double get_f64(std::istream& in, const std::string& path) {
    const std::uint64_t v = get_u64(in, path);
    double x;
    std::memcpy(&x, &v, 8);
    return x;
}

void write_spec_header(std::ostream& out, const RootSpec& spec) {
    out << spec.dim << ' ' << spec.depth << ' ' << spec.side;
    for (int a = 0; a < spec.dim; ++a) out << ' ' << spec.origin_at(a);
    out << '\n';
}

RootSpec read_spec_header(std::istream& in, const std::string& path) {
    std::string line;
    if (!std::getline(in, line)) fail(path, "missing header line");
    std::istringstream is(line);
    RootSpec spec;
    if (!(is >> spec.dim >> spec.depth >> spec.side)) fail(path, "bad header line");
    spec.origin.assign(static_cast<std::size_t>(spec.dim), 0.0);
    for (int a = 0; a < spec.dim; ++a)
        if (!(is >> spec.origin[static_cast<std::size_t>(a)])) fail(path, "bad header origin");
    spec.validate();
    return spec;
}

} // namespace

void write_cellset_text(const std::string& path, const CellSet& set) {
    std::ofstream out = open_out(path, false);
    const RootSpec& spec = set.spec();
    write_spec_header(out, spec);
    std::vector<index_t> cc(static_cast<std::size_t>(spec.dim));
    for (index_t c = 0; c < spec.cell_count(); ++c) {
        if (!set.contains(c)) continue;
        spec.cell_coords(c, cc);
        out << spec.depth;
        for (int a = 0; a < spec.dim; ++a) out << ' ' << cc[static_cast<std::size_t>(a)];
        out << '\n';
    }
    if (!out) fail(path, "write failed");
}

CellSet read_cellset_text(const std::string& path) {
    std::ifstream in = open_in(path, false);
    const RootSpec spec = read_spec_header(in, path);
    CellSet set(spec);
    std::vector<index_t> cc(static_cast<std::size_t>(spec.dim));
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream is(line);
        int k = 0;
        if (!(is >> k)) fail(path, "bad cell line: " + line);
        if (k != spec.depth) fail(path, "cell line at a non-finest level: " + line);
        for (int a = 0; a < spec.dim; ++a)
            if (!(is >> cc[static_cast<std::size_t>(a)]) || cc[static_cast<std::size_t>(a)] < 0 ||
                cc[static_cast<std::size_t>(a)] >= spec.cells_per_axis())
                fail(path, "bad cell coordinates: " + line);
        set.add(spec.cell_index(cc));
    }
    return set;
}

void write_cellset_rle(const std::string& path, const CellSet& set) {
    std::ofstream out = open_out(path, true);
    const RootSpec& spec = set.spec();
    out.write("HCTS", 4);
    put_u64(out, static_cast<std::uint64_t>(spec.dim));
    put_u64(out, static_cast<std::uint64_t>(spec.depth));
    put_f64(out, spec.side);
    for (int a = 0; a < spec.dim; ++a) put_f64(out, spec.origin_at(a));

    std::vector<std::uint64_t> runs;
    bool bit = false; // runs start with the zero run (possibly empty)
    std::uint64_t len = 0;
    for (index_t c = 0; c < spec.cell_count(); ++c) {
        const bool b = set.contains(c);
        if (b == bit) {
            ++len;
        } else {
            runs.push_back(len);
            bit = b;
            len = 1;
        }
    }
    runs.push_back(len);
    put_u64(out, runs.size());
    for (std::uint64_t r : runs) put_u64(out, r);
    if (!out) fail(path, "write failed");
}

CellSet read_cellset_rle(const std::string& path) {
    std::ifstream in = open_in(path, true);
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, "HCTS", 4) != 0) fail(path, "not an HCTS file");
    RootSpec spec;
    spec.dim = static_cast<int>(get_u64(in, path));
    spec.depth = static_cast<int>(get_u64(in, path));
    spec.side = get_f64(in, path);
    if (spec.dim < 1 || spec.dim > 32) fail(path, "implausible dimension");
    spec.origin.assign(static_cast<std::size_t>(spec.dim), 0.0);
    for (int a = 0; a < spec.dim; ++a) spec.origin[static_cast<std::size_t>(a)] = get_f64(in, path);
    spec.validate();
    CellSet set(spec);
    const std::uint64_t nruns = get_u64(in, path);
    index_t pos = 0;
    bool bit = false;
    for (std::uint64_t r = 0; r < nruns; ++r) {
        const std::uint64_t len = get_u64(in, path);
        if (bit)
            for (std::uint64_t i = 0; i < len; ++i) set.add(pos + static_cast<index_t>(i));
        pos += static_cast<index_t>(len);
        bit = !bit;
    }
    if (pos != spec.cell_count()) fail(path, "run lengths do not cover the grid");
    return set;
}

CellSet read_cellset(const std::string& path) {
    std::ifstream in = open_in(path, true);
    char magic[4] = {};
    in.read(magic, 4);
    if (in.gcount() == 4 && std::memcmp(magic, "HCTS", 4) == 0) return read_cellset_rle(path);
    return read_cellset_text(path);
}

void write_function_csv(const std::string& path, const GridFunction& f) {
    std::ofstream out = open_out(path, false);
    const RootSpec& spec = f.spec();
    out << spec.dim << ',' << spec.depth << ',' << spec.side << '\n';
    const index_t per = spec.cells_per_axis();
    for (index_t c = 0; c < spec.cell_count(); ++c) {
        out << f[c];
        out << (((c + 1) % per == 0) ? '\n' : ',');
    }
    if (!out) fail(path, "write failed");
}

GridFunction read_function_csv(const std::string& path) {
    std::ifstream in = open_in(path, false);
    std::string line;
    if (!std::getline(in, line)) fail(path, "missing header");
    for (char& ch : line)
        if (ch == ',') ch = ' ';
    std::istringstream hs(line);
    RootSpec spec;
    if (!(hs >> spec.dim >> spec.depth >> spec.side)) fail(path, "bad header");
    spec.validate();
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(spec.cell_count()));
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        for (char& ch : line)
            if (ch == ',') ch = ' ';
        std::istringstream is(line);
        double v;
        while (is >> v) values.push_back(v);
    }
    if (static_cast<index_t>(values.size()) != spec.cell_count())
        fail(path, "value count does not match the grid");
    return GridFunction(spec, std::move(values));
}

void write_function_binary(const std::string& path, const GridFunction& f) {
    std::ofstream out = open_out(path, true);
    const RootSpec& spec = f.spec();
    out.write("HCTF", 4);
    put_u64(out, static_cast<std::uint64_t>(spec.dim));
    put_u64(out, static_cast<std::uint64_t>(spec.depth));
    put_f64(out, spec.side);
    for (index_t c = 0; c < spec.cell_count(); ++c) put_f64(out, f[c]);
    if (!out) fail(path, "write failed");
}

GridFunction read_function_binary(const std::string& path) {
    std::ifstream in = open_in(path, true);
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, "HCTF", 4) != 0) fail(path, "not an HCTF file");
    RootSpec spec;
    spec.dim = static_cast<int>(get_u64(in, path));
    spec.depth = static_cast<int>(get_u64(in, path));
    spec.side = get_f64(in, path);
    spec.validate();
    std::vector<double> values(static_cast<std::size_t>(spec.cell_count()));
    for (auto& v : values) v = get_f64(in, path);
    return GridFunction(spec, std::move(values));
}

GridFunction read_function(const std::string& path) {
    std::ifstream in = open_in(path, true);
    char magic[4] = {};
    in.read(magic, 4);
    if (in.gcount() == 4 && std::memcmp(magic, "HCTF", 4) == 0) return read_function_binary(path);
    return read_function_csv(path);
}

void write_measure_csv(const std::string& path, const DiscreteMeasure& mu) {
    std::ofstream out = open_out(path, false);
    const RootSpec& spec = mu.spec();
    write_spec_header(out, spec);
    for (index_t c = 0; c < spec.cell_count(); ++c) {
        const double m = mu.cell_masses()[static_cast<std::size_t>(c)];
        if (m > 0.0) out << c << ' ' << m << '\n';
    }
    for (const Atom& a : mu.atoms()) {
        out << "atom";
        for (double x : a.position) out << ' ' << x;
        out << ' ' << a.mass << '\n';
    }
    if (!out) fail(path, "write failed");
}

DiscreteMeasure read_measure_csv(const std::string& path) {
    std::ifstream in = open_in(path, false);
    const RootSpec spec = read_spec_header(in, path);
    DiscreteMeasure mu(spec);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        for (char& ch : line)
            if (ch == ',') ch = ' ';
        std::istringstream is(line);
        std::string head;
        if (!(is >> head)) continue;
        if (head == "atom") {
            Atom a;
            a.position.resize(static_cast<std::size_t>(spec.dim));
            for (int ax = 0; ax < spec.dim; ++ax)
                if (!(is >> a.position[static_cast<std::size_t>(ax)])) fail(path, "bad atom line: " + line);
            if (!(is >> a.mass)) fail(path, "bad atom line: " + line);
            mu.add_atom(std::move(a));
        } else {
            index_t cell;
            double mass;
            try {
                cell = std::stoll(head);
            } catch (...) {
                fail(path, "bad measure line: " + line);
            }
            if (!(is >> mass)) fail(path, "bad measure line: " + line);
            mu.add_cell_mass(cell, mass);
        }
    }
    return mu;
}

void write_family(const std::string& path, const RootSpec& spec,
                  const std::vector<DyadicCube>& cubes) {
    std::ofstream out = open_out(path, false);
    write_spec_header(out, spec);
    out << "shift " << (cubes.empty() ? 0u : cubes.front().shift) << '\n';
    for (const DyadicCube& q : cubes) {
        out << q.level;
        for (index_t m : q.index) out << ' ' << m;
        out << '\n';
    }
    if (!out) fail(path, "write failed");
}

std::pair<RootSpec, std::vector<DyadicCube>> read_family(const std::string& path) {
    std::ifstream in = open_in(path, false);
    const RootSpec spec = read_spec_header(in, path);
    std::string line;
    if (!std::getline(in, line)) fail(path, "missing shift line");
    std::istringstream ss(line);
    std::string word;
    unsigned shift = 0;
    if (!(ss >> word >> shift) || word != "shift") fail(path, "bad shift line: " + line);
    std::vector<DyadicCube> cubes;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream is(line);
        DyadicCube q;
        q.shift = shift;
        if (!(is >> q.level)) fail(path, "bad cube line: " + line);
        q.index.resize(static_cast<std::size_t>(spec.dim));
        for (int a = 0; a < spec.dim; ++a)
            if (!(is >> q.index[static_cast<std::size_t>(a)])) fail(path, "bad cube line: " + line);
        cubes.push_back(std::move(q));
    }
    return {spec, cubes};
}

} // namespace hct::io
