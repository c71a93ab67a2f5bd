#include "hct/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hct::harness {

// ---------------------------------------------------------------------------
// rng

std::uint64_t Rng::next() {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

index_t Rng::below(index_t n) {
    return static_cast<index_t>(next() % static_cast<std::uint64_t>(n));
}

std::uint64_t subseed(std::uint64_t master, std::uint64_t idx) {
    Rng r(master ^ (0xd1b54a32d192ed03ULL * (idx + 1)));
    return r.next();
}

// ---------------------------------------------------------------------------
// generators

CellSet generate_dust(const RootSpec& spec, int branching, std::uint64_t seed, int dust_depth) {
    spec.validate();
    const int nchildren = 1 << spec.dim;
    if (branching < 1 || branching > nchildren)
        throw std::invalid_argument("generate_dust: branching must lie in [1, 2^dim]");
    const int stop = dust_depth < 0 ? spec.depth : std::min(dust_depth, spec.depth);
    Rng rng(seed);
    const Lattice base(spec, 0u, 0);

    std::vector<index_t> kept{0}; // flats at the current level
    std::vector<index_t> kid(static_cast<std::size_t>(nchildren));
    std::vector<int> pick(static_cast<std::size_t>(nchildren));
    for (int k = 0; k < stop; ++k) {
        std::vector<index_t> next;
        next.reserve(kept.size() * static_cast<std::size_t>(branching));
        for (index_t fl : kept) {
            base.children(k, fl, kid);
            // draw `branching` distinct child slots
            for (int i = 0; i < nchildren; ++i) pick[static_cast<std::size_t>(i)] = i;
            for (int i = 0; i < branching; ++i) {
                const int j = i + static_cast<int>(rng.below(nchildren - i));
                std::swap(pick[static_cast<std::size_t>(i)], pick[static_cast<std::size_t>(j)]);
            }
            std::sort(pick.begin(), pick.begin() + branching);
            for (int i = 0; i < branching; ++i)
                next.push_back(kid[static_cast<std::size_t>(pick[static_cast<std::size_t>(i)])]);
        }
        kept = std::move(next);
    }
    CellSet out(spec);
    std::array<index_t, 32> jlo{}, jhi{};
    std::vector<index_t> cc(static_cast<std::size_t>(spec.dim));
    for (index_t fl : kept) {
        base.cell_box(stop, fl, std::span<index_t>(jlo.data(), static_cast<std::size_t>(spec.dim)),
                      std::span<index_t>(jhi.data(), static_cast<std::size_t>(spec.dim)));
        // fill the cube solid below the stop level
        std::array<index_t, 32> j{};
        for (int a = 0; a < spec.dim; ++a) j[static_cast<std::size_t>(a)] = jlo[static_cast<std::size_t>(a)];
        while (true) {
            index_t cell = 0;
            for (int a = 0; a < spec.dim; ++a) cell = (cell << spec.depth) | j[static_cast<std::size_t>(a)];
            out.add(cell);
            int axis = spec.dim - 1;
            while (axis >= 0 && ++j[static_cast<std::size_t>(axis)] > jhi[static_cast<std::size_t>(axis)]) {
                j[static_cast<std::size_t>(axis)] = jlo[static_cast<std::size_t>(axis)];
                --axis;
            }
            if (axis < 0) break;
        }
    }
    return out;
}

GridFunction generate_random_step(const RootSpec& spec, int levels, std::uint64_t seed,
                                  int coarse_level) {
    spec.validate();
    if (levels < 1) throw std::invalid_argument("generate_random_step: need at least one level");
    const int c = coarse_level < 0 ? std::min(4, spec.depth) : std::min(coarse_level, spec.depth);
    Rng rng(seed);
    std::vector<double> reps(static_cast<std::size_t>(levels));
    for (auto& r : reps) r = rng.uniform();
    const index_t coarse_cells = index_t(1) << (spec.dim * c);
    std::vector<int> assign(static_cast<std::size_t>(coarse_cells));
    for (auto& a : assign) a = static_cast<int>(rng.below(levels));

    const int shift = spec.depth - c;
    const index_t mask = spec.cells_per_axis() - 1;
    std::vector<double> v(static_cast<std::size_t>(spec.cell_count()));
    std::vector<index_t> cc(static_cast<std::size_t>(spec.dim));
    for (index_t cell = 0; cell < spec.cell_count(); ++cell) {
        index_t rest = cell, coarse = 0;
        for (int a = spec.dim - 1; a >= 0; --a) {
            cc[static_cast<std::size_t>(a)] = rest & mask;
            rest >>= spec.depth;
        }
        for (int a = 0; a < spec.dim; ++a)
            coarse = (coarse << c) | (cc[static_cast<std::size_t>(a)] >> shift);
        v[static_cast<std::size_t>(cell)] = reps[static_cast<std::size_t>(assign[static_cast<std::size_t>(coarse)])];
    }
    return GridFunction(spec, std::move(v));
}

DiscreteMeasure generate_atom_cloud(const RootSpec& spec, int count, std::uint64_t seed) {
    spec.validate();
    if (count < 1) throw std::invalid_argument("generate_atom_cloud: need at least one atom");
    Rng rng(seed);
    std::vector<Atom> atoms;
    double total = 0.0;
    for (int i = 0; i < count; ++i) {
        Atom a;
        a.position.resize(static_cast<std::size_t>(spec.dim));
        for (int ax = 0; ax < spec.dim; ++ax) {
            const index_t j = rng.below(index_t(1) << 20);
            a.position[static_cast<std::size_t>(ax)] =
                spec.origin_at(ax) + spec.side * (static_cast<double>(j) + 0.5) * 0x1.0p-20;
        }
        a.mass = rng.uniform(0.5, 1.5);
        total += a.mass;
        atoms.push_back(std::move(a));
    }
    for (auto& a : atoms) a.mass /= total;
    return DiscreteMeasure(spec, std::vector<double>(static_cast<std::size_t>(spec.cell_count()), 0.0),
                           std::move(atoms));
}

GridFunction generate_atom_density(const RootSpec& spec, int count, std::uint64_t seed,
                                   int coarse_level) {
    const int c = coarse_level < 0 ? std::min(4, spec.depth) : std::min(coarse_level, spec.depth);
    DiscreteMeasure cloud = generate_atom_cloud(spec, count, seed);
    const double coarse_side = spec.side * std::ldexp(1.0, -c);
    const double coarse_vol = std::pow(coarse_side, spec.dim);
    const int shift = spec.depth - c;
    const index_t mask = spec.cells_per_axis() - 1;
    std::vector<double> v(static_cast<std::size_t>(spec.cell_count()), 0.0);
    std::vector<double> coarse_mass(static_cast<std::size_t>(index_t(1) << (spec.dim * c)), 0.0);
    for (const Atom& a : cloud.atoms()) {
        index_t cell = cloud.cell_of_point(a.position), coarse = 0, rest = cell;
        std::vector<index_t> cc(static_cast<std::size_t>(spec.dim));
        for (int ax = spec.dim - 1; ax >= 0; --ax) {
            cc[static_cast<std::size_t>(ax)] = rest & mask;
            rest >>= spec.depth;
        }
        for (int ax = 0; ax < spec.dim; ++ax)
            coarse = (coarse << c) | (cc[static_cast<std::size_t>(ax)] >> shift);
        coarse_mass[static_cast<std::size_t>(coarse)] += a.mass;
    }
    std::vector<index_t> cc(static_cast<std::size_t>(spec.dim));
    for (index_t cell = 0; cell < spec.cell_count(); ++cell) {
        index_t rest = cell, coarse = 0;
        for (int ax = spec.dim - 1; ax >= 0; --ax) {
            cc[static_cast<std::size_t>(ax)] = rest & mask;
            rest >>= spec.depth;
        }
        for (int ax = 0; ax < spec.dim; ++ax)
            coarse = (coarse << c) | (cc[static_cast<std::size_t>(ax)] >> shift);
        v[static_cast<std::size_t>(cell)] = coarse_mass[static_cast<std::size_t>(coarse)] / coarse_vol;
    }
    return GridFunction(spec, std::move(v));
}

DiscreteMeasure generate_plane_measure(const RootSpec& spec, std::uint64_t seed) {
    spec.validate();
    if (spec.dim < 2)
        throw std::invalid_argument("generate_plane_measure: needs dimension at least 2");
    Rng rng(seed);
    const double x0 = (static_cast<double>(rng.below(index_t(1) << 10)) + 0.5) * 0x1.0p-10;
    const index_t row = static_cast<index_t>(std::floor(x0 * static_cast<double>(spec.cells_per_axis())));
    const index_t sheet = index_t(1) << (spec.dim - 1) * spec.depth;
    const double mass = 1.0 / static_cast<double>(sheet);
    DiscreteMeasure mu(spec);
    for (index_t rest = 0; rest < sheet; ++rest)
        mu.add_cell_mass((row << ((spec.dim - 1) * spec.depth)) | rest, mass);
    return mu;
}

DiscreteMeasure generate_uniform_ball(const RootSpec& spec, double radius, std::uint64_t seed) {
    spec.validate();
    if (!(radius > 0.0) || !(radius < 0.5 * spec.side))
        throw std::invalid_argument("generate_uniform_ball: radius must lie in (0, side/2)");
    Rng rng(seed);
    std::vector<double> center(static_cast<std::size_t>(spec.dim));
    for (int a = 0; a < spec.dim; ++a)
        center[static_cast<std::size_t>(a)] =
            spec.origin_at(a) + rng.uniform(radius, spec.side - radius);
    std::vector<index_t> cc(static_cast<std::size_t>(spec.dim));
    std::vector<index_t> inside;
    for (index_t cell = 0; cell < spec.cell_count(); ++cell) {
        spec.cell_coords(cell, cc);
        bool in = true;
        for (int a = 0; a < spec.dim && in; ++a)
            if (std::abs(spec.cell_center(cc[static_cast<std::size_t>(a)], a) -
                         center[static_cast<std::size_t>(a)]) > radius)
                in = false;
        if (in) inside.push_back(cell);
    }
    DiscreteMeasure mu(spec);
    for (index_t cell : inside) mu.add_cell_mass(cell, 1.0 / static_cast<double>(inside.size()));
    return mu;
}

Generated generate(const RootSpec& spec, const std::string& kind, const json& params,
                   std::uint64_t seed) {
    Generated out;
    if (kind == "dyadic-dust") {
        out.set = generate_dust(spec, params.value("branching", 2), seed,
                                params.value("dust_depth", -1));
    } else if (kind == "random-step") {
        out.fn = generate_random_step(spec, params.value("levels", 4), seed,
                                      params.value("coarse_level", -1));
    } else if (kind == "atom-cloud") {
        out.measure = generate_atom_cloud(spec, params.value("count", 4), seed);
    } else if (kind == "atom-density") {
        out.fn = generate_atom_density(spec, params.value("count", 4), seed,
                                       params.value("coarse_level", -1));
    } else if (kind == "plane-measure") {
        out.measure = generate_plane_measure(spec, seed);
    } else if (kind == "uniform-ball") {
        out.measure = generate_uniform_ball(spec, params.value("radius", 0.25), seed);
    } else {
        throw std::invalid_argument("generate: unknown kind '" + kind + "'");
    }
    return out;
}

// ---------------------------------------------------------------------------
// config and report plumbing

ExperimentConfig parse_config(const json& j) {
    ExperimentConfig cfg;
    if (!j.contains("experiment")) throw std::invalid_argument("config: missing 'experiment'");
    cfg.experiment = j.at("experiment").get<std::string>();
    const auto& names = experiment_names();
    if (std::find(names.begin(), names.end(), cfg.experiment) == names.end())
        throw std::invalid_argument("config: unknown experiment '" + cfg.experiment + "'");
    if (j.contains("grid")) {
        const json& g = j.at("grid");
        cfg.grid.dim = g.value("dim", 2);
        cfg.grid.depth = g.value("depth", 5);
        cfg.grid.side = g.value("side", 1.0);
        if (g.contains("origin")) cfg.grid.origin = g.at("origin").get<std::vector<double>>();
    }
    cfg.grid.validate();
    cfg.seed = j.value("seed", std::uint64_t(1));
    cfg.jobs = j.value("jobs", 0);
    if (j.contains("params")) cfg.params = j.at("params");
    if (j.contains("tolerances")) cfg.tolerances = j.at("tolerances");
    return cfg;
}

std::vector<ExperimentConfig> load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open config");
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw std::runtime_error(path + ": bad JSON: " + e.what());
    }
    std::vector<ExperimentConfig> out;
    if (j.is_array())
        for (const json& item : j) out.push_back(parse_config(item));
    else
        out.push_back(parse_config(j));
    return out;
}

bool Report::passed() const {
    for (const Case& c : cases)
        if (c.verdict == "fail") return false;
    return summary.value("verdict", "pass") != "fail";
}

namespace {

json case_to_json(const Case& c) {
    json j;
    j["id"] = c.id;
    j["params"] = c.params;
    j["lhs"] = c.lhs;
    j["rhs"] = c.rhs;
    j["margin"] = c.margin;
    j["metrics"] = c.metrics;
    j["verdict"] = c.verdict;
    if (!c.note.empty()) j["note"] = c.note;
    return j;
}

} // namespace

std::string emit_json(const Report& report) {
    json j;
    j["config"] = report.config_echo;
    json cases = json::array();
    for (const Case& c : report.cases) cases.push_back(case_to_json(c));
    j["cases"] = cases;
    j["summary"] = report.summary;
    j["wall_ms"] = report.wall_ms;
    return j.dump(2) + "\n";
}

std::string emit_csv(const Report& report) {
    std::ostringstream out;
    out << std::setprecision(17);
    out << "id,verdict,lhs,rhs,margin,note,params\n";
    for (const Case& c : report.cases) {
        std::string params = c.params.dump();
        std::string note = c.note;
        for (std::string* s : {&params, &note})
            for (char& ch : *s)
                if (ch == ',') ch = ';';
        out << c.id << ',' << c.verdict << ',' << c.lhs << ',' << c.rhs << ',' << c.margin << ','
            << note << ',' << params << '\n';
    }
    return out.str();
}

std::string emit_svg(const Plot& plot) {
    const double W = 720, H = 480, L = 70, R = 20, T = 40, B = 50;
    double xlo = 0, xhi = 1, ylo = 0, yhi = 1;
    bool first = true;
    for (const PlotSeries& s : plot.series)
        for (auto [x, y] : s.points) {
            if (first) {
                xlo = xhi = x;
                ylo = yhi = y;
                first = false;
            }
            xlo = std::min(xlo, x);
            xhi = std::max(xhi, x);
            ylo = std::min(ylo, y);
            yhi = std::max(yhi, y);
        }
    if (xhi <= xlo) xhi = xlo + 1;
    if (yhi <= ylo) yhi = ylo + 1;
    const auto px = [&](double x) { return L + (x - xlo) / (xhi - xlo) * (W - L - R); };
    const auto py = [&](double y) { return H - B - (y - ylo) / (yhi - ylo) * (H - T - B); };
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                   "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    std::ostringstream out;
    out << std::setprecision(8);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"16\">"
        << plot.title << "</text>\n";
    out << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B
        << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << W / 2 << "\" y=\"" << H - 12
        << "\" text-anchor=\"middle\" font-size=\"12\">" << plot.x_label << "</text>\n";
    out << "<text x=\"16\" y=\"" << H / 2 << "\" text-anchor=\"middle\" font-size=\"12\" "
        << "transform=\"rotate(-90 16 " << H / 2 << ")\">" << plot.y_label << "</text>\n";
    for (int tick = 0; tick <= 4; ++tick) {
        const double xv = xlo + (xhi - xlo) * tick / 4.0;
        const double yv = ylo + (yhi - ylo) * tick / 4.0;
        out << "<text x=\"" << px(xv) << "\" y=\"" << H - B + 16
            << "\" text-anchor=\"middle\" font-size=\"10\">" << xv << "</text>\n";
        out << "<text x=\"" << L - 6 << "\" y=\"" << py(yv) + 3
            << "\" text-anchor=\"end\" font-size=\"10\">" << yv << "</text>\n";
    }
    int ci = 0;
    for (const PlotSeries& s : plot.series) {
        out << "<polyline fill=\"none\" stroke=\"" << colors[ci % 10] << "\" stroke-width=\"1.5\" points=\"";
        for (auto [x, y] : s.points) out << px(x) << ',' << py(y) << ' ';
        out << "\"/>\n";
        out << "<text x=\"" << W - R - 4 << "\" y=\"" << T + 14 + 14 * ci
            << "\" text-anchor=\"end\" font-size=\"11\" fill=\"" << colors[ci % 10] << "\">"
            << s.name << "</text>\n";
        ++ci;
    }
    out << "</svg>\n";
    return out.str();
}

void write_report(const Report& report, const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw std::runtime_error(out_dir + ": cannot create output directory");
    const auto dump = [&](const std::string& name, const std::string& text) {
        const std::string path = (fs::path(out_dir) / name).string();
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error(path + ": cannot open for writing");
        out << text;
        if (!out) throw std::runtime_error(path + ": write failed");
    };
    dump("report.json", emit_json(report));
    dump("report.csv", emit_csv(report));
    for (std::size_t i = 0; i < report.plots.size(); ++i)
        dump("plot_" + std::to_string(i) + ".svg", emit_svg(report.plots[i]));
}

// ---------------------------------------------------------------------------
// line fits

namespace {

double t_critical_95(int dof) {
    static const double table[] = {6.314, 2.920, 2.353, 2.132, 2.015, 1.943, 1.895, 1.860,
                                   1.833, 1.812, 1.796, 1.782, 1.771, 1.761, 1.753, 1.746,
                                   1.740, 1.734, 1.729, 1.725, 1.721, 1.717, 1.714, 1.711,
                                   1.708, 1.706, 1.703, 1.701, 1.699, 1.697};
    if (dof < 1) return std::numeric_limits<double>::infinity();
    if (dof <= 30) return table[dof - 1];
    return 1.697; // conservative beyond the table
}

} // namespace

bool LineFit::slope_negative_95() const {
    if (dof < 1 || !(slope_stderr > 0.0)) return false;
    return slope / slope_stderr < -t_critical_95(dof);
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    std::vector<int> group(x.size(), 0);
    return fit_line_grouped(x, y, group, 1);
}

LineFit fit_line_grouped(std::span<const double> x, std::span<const double> y,
                         std::span<const int> group, int group_count) {
    LineFit fit;
    const std::size_t n = x.size();
    if (n != y.size() || n != group.size() || n < 3) return fit;
    std::vector<double> mx(static_cast<std::size_t>(group_count), 0.0);
    std::vector<double> my(static_cast<std::size_t>(group_count), 0.0);
    std::vector<int> cnt(static_cast<std::size_t>(group_count), 0);
    for (std::size_t i = 0; i < n; ++i) {
        mx[static_cast<std::size_t>(group[i])] += x[i];
        my[static_cast<std::size_t>(group[i])] += y[i];
        cnt[static_cast<std::size_t>(group[i])] += 1;
    }
    for (int g = 0; g < group_count; ++g) {
        if (cnt[static_cast<std::size_t>(g)] == 0) continue;
        mx[static_cast<std::size_t>(g)] /= cnt[static_cast<std::size_t>(g)];
        my[static_cast<std::size_t>(g)] /= cnt[static_cast<std::size_t>(g)];
    }
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx[static_cast<std::size_t>(group[i])];
        const double dy = y[i] - my[static_cast<std::size_t>(group[i])];
        sxx += dx * dx;
        sxy += dx * dy;
    }
    if (!(sxx > 0.0)) return fit;
    fit.slope = sxy / sxx;
    fit.intercept = my[0] - fit.slope * mx[0];
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx[static_cast<std::size_t>(group[i])];
        const double dy = y[i] - my[static_cast<std::size_t>(group[i])];
        const double r = dy - fit.slope * dx;
        sse += r * r;
    }
    fit.dof = static_cast<int>(n) - group_count - 1;
    if (fit.dof >= 1) fit.slope_stderr = std::sqrt(sse / fit.dof / sxx);
    return fit;
}

} // namespace hct::harness
