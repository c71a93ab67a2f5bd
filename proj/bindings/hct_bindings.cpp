#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hct/czpack.hpp"
#include "hct/harness.hpp"
#include "hct/io.hpp"
#include "hct/operators.hpp"
#include "hct/riesz.hpp"

namespace py = pybind11;
using namespace hct;

namespace {

CPolicy policy_from(const std::string& name) {
    if (name == "exact") return CPolicy::AllPairwiseMidpoints;
    if (name == "fast") return CPolicy::AdjacentMidpoints;
    throw std::invalid_argument("policy must be 'exact' or 'fast'");
}

} // namespace

PYBIND11_MODULE(_hct, m) {
    m.doc() = "Hausdorff-content Choquet toolkit";

    py::register_exception<CapacityError>(m, "CapacityError");
    py::register_exception<InstanceTooLargeError>(m, "InstanceTooLargeError");
    py::register_exception<RootSaturatedError>(m, "RootSaturatedError");
    py::register_exception<ExpOverflowError>(m, "ExpOverflowError");

    py::class_<RootSpec>(m, "RootSpec")
        .def(py::init<int, int, double, std::vector<double>>(), py::arg("dim"), py::arg("depth"),
             py::arg("side") = 1.0, py::arg("origin") = std::vector<double>{})
        .def_readonly("dim", &RootSpec::dim)
        .def_readonly("depth", &RootSpec::depth)
        .def_readonly("side", &RootSpec::side)
        .def_readonly("origin", &RootSpec::origin)
        .def("cell_count", &RootSpec::cell_count)
        .def("cell_side", &RootSpec::cell_side)
        .def("cell_volume", &RootSpec::cell_volume)
        .def("__repr__", [](const RootSpec& s) {
            return "RootSpec(dim=" + std::to_string(s.dim) + ", depth=" + std::to_string(s.depth) +
                   ", side=" + std::to_string(s.side) + ")";
        });

    py::class_<DyadicCube>(m, "DyadicCube")
        .def(py::init([](int level, std::vector<index_t> index, unsigned shift) {
                 DyadicCube q;
                 q.level = level;
                 q.index = std::move(index);
                 q.shift = shift;
                 return q;
             }),
             py::arg("level"), py::arg("index"), py::arg("shift") = 0u)
        .def_readonly("level", &DyadicCube::level)
        .def_readonly("shift", &DyadicCube::shift)
        .def_readonly("index", &DyadicCube::index)
        .def("__repr__", &DyadicCube::to_string);

    py::class_<CellSet>(m, "CellSet")
        .def(py::init([](const RootSpec& spec, const std::vector<index_t>& cells) {
                 return CellSet::of(spec, cells);
             }),
             py::arg("spec"), py::arg("cells") = std::vector<index_t>{})
        .def_static("full", &CellSet::full)
        .def("add", &CellSet::add)
        .def("contains", &CellSet::contains)
        .def("members", &CellSet::members)
        .def("size", &CellSet::size)
        .def("united", &CellSet::united)
        .def("intersected", &CellSet::intersected)
        .def("complemented", &CellSet::complemented)
        .def("__len__", &CellSet::size);

    py::class_<GridFunction>(m, "GridFunction")
        .def(py::init<RootSpec, std::vector<double>>(), py::arg("spec"), py::arg("values"))
        .def_static("constant", &GridFunction::constant)
        .def_static("indicator", &GridFunction::indicator, py::arg("set"), py::arg("scale") = 1.0)
        .def("values",
             [](const GridFunction& f) {
                 return std::vector<double>(f.values().begin(), f.values().end());
             })
        .def("spec", &GridFunction::spec)
        .def("max_value", &GridFunction::max_value)
        .def("__getitem__", [](const GridFunction& f, index_t c) { return f[c]; })
        .def("__len__", &GridFunction::size);

    py::class_<Atom>(m, "Atom")
        .def(py::init([](std::vector<double> position, double mass) {
                 return Atom{std::move(position), mass};
             }),
             py::arg("position"), py::arg("mass"))
        .def_readonly("position", &Atom::position)
        .def_readonly("mass", &Atom::mass);

    py::class_<DiscreteMeasure>(m, "DiscreteMeasure")
        .def(py::init<RootSpec>(), py::arg("spec"))
        .def(py::init<RootSpec, std::vector<double>, std::vector<Atom>>(), py::arg("spec"),
             py::arg("cell_masses"), py::arg("atoms") = std::vector<Atom>{})
        .def("add_cell_mass", &DiscreteMeasure::add_cell_mass)
        .def("add_atom", &DiscreteMeasure::add_atom)
        .def("total_mass", &DiscreteMeasure::total_mass)
        .def("cell_masses",
             [](const DiscreteMeasure& mu) {
                 return std::vector<double>(mu.cell_masses().begin(), mu.cell_masses().end());
             })
        .def("scaled", &DiscreteMeasure::scaled);

    // content
    py::class_<ContentTree>(m, "ContentTree")
        .def("at", [](const ContentTree& t, const DyadicCube& q) { return t.at(q); })
        .def("root", &ContentTree::root);
    m.def(
        "content",
        [](const CellSet& e, double beta, bool ball_normalized) {
            return content(e, ContentParams{beta, ball_normalized});
        },
        py::arg("set"), py::arg("beta"), py::arg("ball_normalized") = false);
    m.def(
        "content_proxy",
        [](const CellSet& e, double beta, int depth_margin) {
            return content_proxy(e, ContentParams{beta}, depth_margin);
        },
        py::arg("set"), py::arg("beta"), py::arg("depth_margin") = 1);
    m.def(
        "brute_force_content",
        [](const CellSet& e, double beta) { return brute_force_content(e, ContentParams{beta}); },
        py::arg("set"), py::arg("beta"));
    m.def(
        "content_tree",
        [](const CellSet& e, double beta) { return content_tree(e, ContentParams{beta}); },
        py::arg("set"), py::arg("beta"));

    // choquet
    m.def(
        "integral",
        [](const GridFunction& f, double beta, const CellSet* region) {
            return region ? integral(f, *region, beta) : integral(f, beta);
        },
        py::arg("fn"), py::arg("beta"), py::arg("region") = nullptr);
    m.def("lp_norm", &lp_norm, py::arg("fn"), py::arg("p"), py::arg("beta"));
    m.def("weak_lp_norm", &weak_lp_norm, py::arg("fn"), py::arg("p"), py::arg("beta"));
    m.def("exp_functional", &exp_functional, py::arg("fn"), py::arg("gamma"), py::arg("region"),
          py::arg("beta"));
    m.def(
        "embedding_check",
        [](const GridFunction& f, double alpha, double beta) {
            const EmbeddingSides s = embedding_check(f, alpha, beta);
            return py::make_tuple(s.lhs, s.rhs);
        },
        py::arg("fn"), py::arg("alpha"), py::arg("beta"));
    m.def(
        "quantize",
        [](const GridFunction& f, int levels, double beta) {
            const Quantization q = quantize(f, levels, beta);
            return py::make_tuple(q.fn, q.exact, q.error_bound);
        },
        py::arg("fn"), py::arg("levels"), py::arg("beta"));

    // operators
    py::class_<OperatorField>(m, "OperatorField")
        .def_readonly("provenance", &OperatorField::provenance)
        .def("values",
             [](const OperatorField& f) { return f.values; })
        .def("max_value", &OperatorField::max_value)
        .def("superlevel", &OperatorField::superlevel)
        .def("as_function", &OperatorField::as_function)
        .def("__getitem__", [](const OperatorField& f, index_t c) { return f[c]; })
        .def("__len__", &OperatorField::size);

    py::class_<BestC>(m, "BestC")
        .def_readonly("cube", &BestC::cube)
        .def_readonly("c", &BestC::c)
        .def_readonly("value", &BestC::value);

    m.def("dyadic_maximal", &dyadic_maximal, py::arg("fn"), py::arg("beta"));
    m.def("beta_maximal", &beta_maximal, py::arg("fn"), py::arg("beta"),
          py::arg("depth_margin") = 1);
    m.def(
        "best_constant_c",
        [](const GridFunction& f, const DyadicCube& q, double beta, const std::string& policy) {
            return best_constant_c(f, q, beta, policy_from(policy));
        },
        py::arg("fn"), py::arg("cube"), py::arg("beta"), py::arg("policy") = "exact");
    m.def(
        "dyadic_sharp_maximal",
        [](const GridFunction& f, double beta, const std::string& policy) {
            return dyadic_sharp_maximal(f, beta, policy_from(policy));
        },
        py::arg("fn"), py::arg("beta"), py::arg("policy") = "fast");
    m.def(
        "sharp_maximal",
        [](const GridFunction& f, double beta, const std::string& policy, int margin) {
            return sharp_maximal(f, beta, policy_from(policy), margin);
        },
        py::arg("fn"), py::arg("beta"), py::arg("policy") = "fast", py::arg("depth_margin") = 1);
    m.def(
        "centered_sharp_maximal",
        [](const GridFunction& f, double beta, const std::string& policy, int margin) {
            return centered_sharp_maximal(f, beta, policy_from(policy), margin);
        },
        py::arg("fn"), py::arg("beta"), py::arg("policy") = "fast", py::arg("depth_margin") = 1);
    m.def("fractional_maximal", &fractional_maximal, py::arg("measure"), py::arg("alpha"),
          py::arg("depth_margin") = 1);
    m.def(
        "bmo_beta_norm",
        [](const GridFunction& u, const CellSet& omega, double beta, const std::string& policy) {
            return bmo_beta_norm(u, omega, beta, policy_from(policy));
        },
        py::arg("fn"), py::arg("omega"), py::arg("beta"), py::arg("policy") = "fast");
    m.def(
        "morrey_norm",
        [](const DiscreteMeasure& mu, const CellSet& omega, double beta) {
            const MorreyNorm n = morrey_norm(mu, omega, beta);
            return py::make_tuple(n.value, n.fine_scale_divergence);
        },
        py::arg("measure"), py::arg("omega"), py::arg("beta"));

    // Calderon-Zygmund and packing
    py::class_<CZCertificate>(m, "CZCertificate")
        .def_readonly("union_matches", &CZCertificate::union_matches)
        .def_readonly("maximality", &CZCertificate::maximality)
        .def_readonly("average_bounds", &CZCertificate::average_bounds)
        .def_readonly("outside_bound", &CZCertificate::outside_bound)
        .def("all", &CZCertificate::all);
    py::class_<CZDecomposition>(m, "CZDecomposition")
        .def_readonly("lambda_", &CZDecomposition::lambda)
        .def_readonly("cubes", &CZDecomposition::cubes)
        .def_readonly("averages", &CZDecomposition::averages)
        .def_readonly("certificate", &CZDecomposition::certificate);
    m.def("cz_decompose", &cz_decompose, py::arg("fn"), py::arg("beta"), py::arg("lambda_"));

    py::class_<PackingCertificate>(m, "PackingCertificate")
        .def_readonly("coverage", &PackingCertificate::coverage)
        .def_readonly("packing_bound", &PackingCertificate::packing_bound)
        .def_readonly("ancestor_lower", &PackingCertificate::ancestor_lower)
        .def_readonly("content_sandwich", &PackingCertificate::content_sandwich)
        .def("all", &PackingCertificate::all);
    py::class_<PackingSelection>(m, "PackingSelection")
        .def_readonly("selected", &PackingSelection::selected)
        .def_readonly("ancestors", &PackingSelection::ancestors)
        .def_readonly("selected_cost", &PackingSelection::selected_cost)
        .def_readonly("union_content", &PackingSelection::union_content)
        .def_readonly("certificate", &PackingSelection::certificate);
    m.def("packing_select", &packing_select, py::arg("spec"), py::arg("family"), py::arg("beta"));

    py::class_<GoodLambdaSharp>(m, "GoodLambdaSharp")
        .def_readonly("mu_t", &GoodLambdaSharp::mu_t)
        .def_readonly("sharp_term", &GoodLambdaSharp::sharp_term)
        .def_readonly("mu_low", &GoodLambdaSharp::mu_low)
        .def_readonly("margin8", &GoodLambdaSharp::margin8)
        .def_readonly("margin16", &GoodLambdaSharp::margin16);
    m.def(
        "goodlambda_sharp_check",
        [](const GridFunction& f, double beta, double t, double A, const std::string& policy) {
            return goodlambda_sharp_check(f, beta, t, A, policy_from(policy));
        },
        py::arg("fn"), py::arg("beta"), py::arg("t"), py::arg("A"), py::arg("policy") = "exact");

    // riesz
    m.def(
        "riesz_potential",
        [](const DiscreteMeasure& mu, double alpha) {
            return riesz_potential(mu, RieszParams{alpha});
        },
        py::arg("measure"), py::arg("alpha"));
    m.def(
        "dyadic_riesz",
        [](const DiscreteMeasure& mu, double alpha, unsigned shift, int k_min, int k_max) {
            RieszParams params{alpha};
            params.k_min = k_min;
            if (k_max >= 0) params.k_max = k_max;
            const Lattice lat(mu.spec(), shift, -1);
            return dyadic_riesz(mu, params, lat);
        },
        py::arg("measure"), py::arg("alpha"), py::arg("shift") = 0u, py::arg("k_min") = 0,
        py::arg("k_max") = -1);
    m.def(
        "riesz_combined",
        [](const DiscreteMeasure& mu, double alpha) {
            const CombinedRiesz r = riesz_combined(mu, RieszParams{alpha});
            return py::make_tuple(r.max_form, r.sum_form);
        },
        py::arg("measure"), py::arg("alpha"));
    m.def(
        "goodlambda_riesz_check",
        [](const DiscreteMeasure& mu, double alpha, double beta, double lambda, double eps,
           unsigned shift, bool force_beta) {
            const Lattice lat(mu.spec(), shift, -1);
            const GoodLambdaRiesz r =
                goodlambda_riesz_check(mu, alpha, beta, lambda, eps, lat, force_beta);
            return py::make_tuple(r.lhs, r.g_lambda, r.ratio);
        },
        py::arg("measure"), py::arg("alpha"), py::arg("beta"), py::arg("lambda_"), py::arg("eps"),
        py::arg("shift") = 0u, py::arg("force_beta") = false);

    // generators and experiments
    m.def("generate_dust", &harness::generate_dust, py::arg("spec"), py::arg("branching"),
          py::arg("seed"), py::arg("dust_depth") = -1);
    m.def("generate_random_step", &harness::generate_random_step, py::arg("spec"),
          py::arg("levels"), py::arg("seed"), py::arg("coarse_level") = -1);
    m.def("generate_atom_cloud", &harness::generate_atom_cloud, py::arg("spec"), py::arg("count"),
          py::arg("seed"));
    m.def("generate_plane_measure", &harness::generate_plane_measure, py::arg("spec"),
          py::arg("seed"));
    m.def("generate_uniform_ball", &harness::generate_uniform_ball, py::arg("spec"),
          py::arg("radius"), py::arg("seed"));
    m.def(
        "run_experiment",
        [](const std::string& config_json) {
            const harness::ExperimentConfig cfg =
                harness::parse_config(harness::json::parse(config_json));
            return harness::emit_json(harness::run(cfg));
        },
        py::arg("config_json"), "Run one experiment from a JSON config string; returns the JSON report.");
    m.def("experiment_names", [] { return harness::experiment_names(); });

    // file formats
    m.def("read_cellset", &io::read_cellset);
    m.def("write_cellset_text", &io::write_cellset_text);
    m.def("write_cellset_rle", &io::write_cellset_rle);
    m.def("read_function", &io::read_function);
    m.def("write_function_csv", &io::write_function_csv);
    m.def("write_function_binary", &io::write_function_binary);
    m.def("read_measure_csv", &io::read_measure_csv);
    m.def("write_measure_csv", &io::write_measure_csv);
}
