// hct: Hausdorff-content toolkit command line.
//
// Subcommands: content, choquet, op, cz, pack, riesz, verify. File formats
// are documented in the README; functions and cell sets are sniffed between
// their text and binary encodings.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hct/czpack.hpp"
#include "hct/harness.hpp"
#include "hct/io.hpp"
#include "hct/operators.hpp"
#include "hct/riesz.hpp"

using json = nlohmann::json;

namespace {

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out << text;
}

json cube_json(const hct::DyadicCube& q) {
    return {{"level", q.level}, {"shift", q.shift}, {"index", q.index}};
}

void emit_field(const hct::OperatorField& field, const std::string& out,
                const std::string& format) {
    const hct::GridFunction fn = field.as_function();
    if (format == "bin")
        hct::io::write_function_binary(out, fn);
    else
        hct::io::write_function_csv(out, fn);
}

int run_content(const std::string& set_path, double beta, bool proxy, bool ball_normalized,
                const std::string& tree_out) {
    const hct::CellSet set = hct::io::read_cellset(set_path);
    const hct::ContentParams params{beta, ball_normalized};
    if (!tree_out.empty()) {
        const hct::ContentTree tree = hct::content_tree(set, params);
        json out = json::object();
        const hct::Lattice& base = tree.lattice();
        for (int k = 0; k <= set.spec().depth; ++k) {
            const auto& lv = base.level(k);
            for (hct::index_t f = 0; f < lv.count; ++f) {
                const hct::DyadicCube q = base.cube(k, f);
                std::string key = std::to_string(q.level);
                for (hct::index_t m : q.index) key += "," + std::to_string(m);
                out[key] = tree.at(k, f);
            }
        }
        write_text(tree_out, out.dump(2) + "\n");
    }
    const double value = proxy ? hct::content_proxy(set, params) : hct::content(set, params);
    std::printf("%.17g\n", value);
    return 0;
}

int run_choquet(const std::string& fn_path, double beta, double p, bool weak, double exp_gamma,
                const std::string& region_path, int levels) {
    hct::GridFunction f = hct::io::read_function(fn_path);
    const hct::Quantization q = hct::quantize(f, levels, beta);
    if (!q.exact)
        std::fprintf(stderr, "quantized to %d levels, integral defect bound %.6g\n", levels,
                     q.error_bound);
    const hct::CellSet region =
        region_path.empty() ? hct::CellSet::full(f.spec()) : hct::io::read_cellset(region_path);
    double value = 0.0;
    if (exp_gamma > 0.0)
        value = hct::exp_functional(q.fn, exp_gamma, region, beta);
    else if (weak)
        value = hct::weak_lp_norm(q.fn, p, beta);
    else if (p != 1.0)
        value = hct::lp_norm(q.fn, p, beta);
    else
        value = hct::integral(q.fn, region, beta);
    std::printf("%.17g\n", value);
    return 0;
}

int run_op(const std::string& which, const std::string& fn_path, const std::string& measure_path,
           double beta, double alpha, const std::string& policy_name, const std::string& out,
           const std::string& format) {
    const hct::CPolicy policy = policy_name == "exact" ? hct::CPolicy::AllPairwiseMidpoints
                                                       : hct::CPolicy::AdjacentMidpoints;
    const auto need_fn = [&]() {
        if (fn_path.empty()) throw CLI::ValidationError("--fn is required for " + which);
        return hct::io::read_function(fn_path);
    };
    const auto need_measure = [&]() {
        if (measure_path.empty())
            throw CLI::ValidationError("--measure is required for " + which);
        return hct::io::read_measure_csv(measure_path);
    };
    hct::OperatorField field;
    if (which == "maximal") {
        field = hct::dyadic_maximal(need_fn(), beta);
    } else if (which == "beta-maximal") {
        field = hct::beta_maximal(need_fn(), beta);
    } else if (which == "dyadic-sharp") {
        field = hct::dyadic_sharp_maximal(need_fn(), beta, policy);
    } else if (which == "sharp") {
        field = hct::sharp_maximal(need_fn(), beta, policy);
    } else if (which == "centered-sharp") {
        field = hct::centered_sharp_maximal(need_fn(), beta, policy);
    } else if (which == "frac-maximal") {
        field = hct::fractional_maximal(need_measure(), alpha);
    } else if (which == "bmo") {
        const hct::GridFunction u = need_fn();
        std::printf("%.17g\n", hct::bmo_beta_norm(u, hct::CellSet::full(u.spec()), beta, policy));
        return 0;
    } else if (which == "morrey") {
        const hct::DiscreteMeasure mu = need_measure();
        const hct::MorreyNorm norm =
            hct::morrey_norm(mu, hct::CellSet::full(mu.spec()), beta);
        std::printf("%.17g\n", norm.value);
        if (norm.fine_scale_divergence)
            std::fprintf(stderr, "fine-scale divergence: the supremum grows toward the cell scale\n");
        return 0;
    } else {
        throw CLI::ValidationError("unknown operator '" + which + "'");
    }
    if (out.empty()) {
        std::printf("%.17g\n", field.max_value());
    } else {
        emit_field(field, out, format);
    }
    return 0;
}

int run_cz(const std::string& fn_path, double beta, double lambda, const std::string& out) {
    const hct::GridFunction f = hct::io::read_function(fn_path);
    const hct::CZDecomposition dec = hct::cz_decompose(f, beta, lambda);
    json j;
    j["lambda"] = dec.lambda;
    j["beta"] = dec.beta;
    json cubes = json::array();
    for (std::size_t i = 0; i < dec.cubes.size(); ++i) {
        json c = cube_json(dec.cubes[i]);
        c["average"] = dec.averages[i];
        cubes.push_back(c);
    }
    j["cubes"] = cubes;
    j["certificate"] = {{"union_matches", dec.certificate.union_matches},
                        {"maximality", dec.certificate.maximality},
                        {"average_bounds", dec.certificate.average_bounds},
                        {"outside_bound", dec.certificate.outside_bound}};
    const std::string text = j.dump(2) + "\n";
    if (out.empty())
        std::fputs(text.c_str(), stdout);
    else
        write_text(out, text);
    return dec.certificate.all() ? 0 : 1;
}

int run_pack(const std::string& family_path, double beta, const std::string& out) {
    const auto [spec, family] = hct::io::read_family(family_path);
    const hct::PackingSelection sel = hct::packing_select(spec, family, beta);
    json j;
    json selected = json::array(), ancestors = json::array();
    for (const auto& q : sel.selected) selected.push_back(cube_json(q));
    for (const auto& q : sel.ancestors) ancestors.push_back(cube_json(q));
    j["selected"] = selected;
    j["ancestors"] = ancestors;
    j["selected_cost"] = sel.selected_cost;
    j["mixed_cover_cost"] = sel.mixed_cover_cost;
    j["union_content"] = sel.union_content;
    j["certificate"] = {{"coverage", sel.certificate.coverage},
                        {"packing_bound", sel.certificate.packing_bound},
                        {"ancestor_lower", sel.certificate.ancestor_lower},
                        {"content_sandwich", sel.certificate.content_sandwich}};
    const std::string text = j.dump(2) + "\n";
    if (out.empty())
        std::fputs(text.c_str(), stdout);
    else
        write_text(out, text);
    return sel.certificate.all() ? 0 : 1;
}

int run_riesz(const std::string& measure_path, double alpha, bool dyadic, unsigned shift,
              bool combined, int k_min, int k_max, const std::string& out,
              const std::string& format) {
    const hct::DiscreteMeasure mu = hct::io::read_measure_csv(measure_path);
    hct::RieszParams params{alpha};
    if (k_min != 0) params.k_min = k_min;
    if (k_max >= 0) params.k_max = k_max;
    hct::OperatorField field;
    if (combined) {
        field = hct::riesz_combined(mu, params).max_form;
    } else if (dyadic) {
        const hct::Lattice lat(mu.spec(), shift, -1);
        field = hct::dyadic_riesz(mu, params, lat);
    } else {
        field = hct::riesz_potential(mu, params);
    }
    if (out.empty())
        std::printf("%.17g\n", field.max_value());
    else
        emit_field(field, out, format);
    return 0;
}

int run_verify(const std::string& config_path, const std::string& out_dir, long long seed,
               int jobs) {
    std::vector<hct::harness::ExperimentConfig> configs =
        hct::harness::load_config_file(config_path);
    bool all_pass = true;
    for (std::size_t i = 0; i < configs.size(); ++i) {
        hct::harness::ExperimentConfig cfg = configs[i];
        if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
        if (jobs > 0) cfg.jobs = jobs;
        const hct::harness::Report report = hct::harness::run(cfg);
        const bool ok = report.passed();
        all_pass = all_pass && ok;
        std::printf("[%s] %-20s cases=%zu passed=%d failed=%d skipped=%d wall=%.0fms\n",
                    ok ? "PASS" : "FAIL", cfg.experiment.c_str(), report.cases.size(),
                    report.summary.value("passed", 0), report.summary.value("failed", 0),
                    report.summary.value("skipped", 0), report.wall_ms);
        if (!out_dir.empty()) {
            const std::string dir =
                (std::filesystem::path(out_dir) /
                 (std::to_string(i) + "_" + cfg.experiment))
                    .string();
            hct::harness::write_report(report, dir);
        }
    }
    return all_pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hausdorff-content Choquet toolkit"};
    app.require_subcommand(1);

    // content
    std::string set_path, tree_out;
    double beta = 1.0;
    bool proxy = false, ball_normalized = false;
    auto* content = app.add_subcommand("content", "dyadic Hausdorff content of a cell set");
    content->add_option("--set", set_path, "cell set file")->required();
    content->add_option("--beta", beta, "content dimension")->required();
    content->add_flag("--proxy", proxy, "minimum over the shifted lattices");
    content->add_flag("--ball-normalized", ball_normalized, "scale by omega_beta");
    content->add_option("--tree-out", tree_out, "write the per-cube content tree as JSON");

    // choquet
    std::string fn_path, region_path;
    double p = 1.0, exp_gamma = 0.0;
    bool weak = false;
    int levels = 64;
    auto* choquet = app.add_subcommand("choquet", "Choquet integrals and norms");
    choquet->add_option("--fn", fn_path, "grid function file")->required();
    choquet->add_option("--beta", beta, "content dimension")->required();
    choquet->add_option("--p", p, "exponent for the L^p norm");
    choquet->add_flag("--weak", weak, "weak L^p norm");
    choquet->add_option("--exp", exp_gamma, "integral of exp(gamma*f)");
    choquet->add_option("--region", region_path, "restrict to a cell set");
    choquet->add_option("--levels", levels, "value quantization budget");

    // op
    std::string which, measure_path, out, format = "csv", policy = "fast";
    double alpha = 1.0;
    auto* op = app.add_subcommand("op", "maximal-type operator fields and norms");
    op->add_option("--which", which, "maximal|beta-maximal|sharp|dyadic-sharp|centered-sharp|frac-maximal|bmo|morrey")
        ->required();
    op->add_option("--fn", fn_path, "grid function file");
    op->add_option("--measure", measure_path, "measure file");
    op->add_option("--beta", beta, "content dimension");
    op->add_option("--alpha", alpha, "fractional order");
    op->add_option("--policy", policy, "exact|fast candidate grid");
    op->add_option("--out", out, "write the field (default: print its maximum)");
    op->add_option("--out-format", format, "csv|bin");

    // cz
    double lambda = 1.0;
    auto* cz = app.add_subcommand("cz", "Calderon-Zygmund decomposition with certificate");
    cz->add_option("--fn", fn_path, "grid function file")->required();
    cz->add_option("--beta", beta, "content dimension")->required();
    cz->add_option("--lambda", lambda, "decomposition level")->required();
    cz->add_option("--out", out, "write JSON here instead of stdout");

    // pack
    std::string family_path;
    auto* pack = app.add_subcommand("pack", "packing-condition subfamily selection");
    pack->add_option("--family", family_path, "cube family file")->required();
    pack->add_option("--beta", beta, "content dimension")->required();
    pack->add_option("--out", out, "write JSON here instead of stdout");

    // riesz
    bool dyadic = false, combined = false;
    unsigned shift = 0;
    int k_min = 0, k_max = -1;
    auto* riesz = app.add_subcommand("riesz", "Riesz potentials");
    riesz->add_option("--measure", measure_path, "measure file")->required();
    riesz->add_option("--alpha", alpha, "potential order")->required();
    riesz->add_flag("--dyadic", dyadic, "dyadic potential on one lattice");
    riesz->add_option("--shift", shift, "lattice shift mask for --dyadic");
    riesz->add_flag("--combined", combined, "max over the shifted lattices");
    riesz->add_option("--kmin", k_min, "coarsest level in dyadic sums");
    riesz->add_option("--kmax", k_max, "finest level in dyadic sums");
    riesz->add_option("--out", out, "write the field (default: print its maximum)");
    riesz->add_option("--out-format", format, "csv|bin");

    // verify
    std::string config_path, out_dir;
    long long seed = -1;
    int jobs = 0;
    auto* verify = app.add_subcommand("verify", "run inequality experiments from a config");
    verify->add_option("--config", config_path, "experiment config JSON")->required();
    verify->add_option("--out", out_dir, "directory for reports and plots");
    verify->add_option("--seed", seed, "override the config seed");
    verify->add_option("--jobs", jobs, "worker threads");

    CLI11_PARSE(app, argc, argv);

    try {
        if (content->parsed())
            return run_content(set_path, beta, proxy, ball_normalized, tree_out);
        if (choquet->parsed())
            return run_choquet(fn_path, beta, p, weak, exp_gamma, region_path, levels);
        if (op->parsed())
            return run_op(which, fn_path, measure_path, beta, alpha, policy, out, format);
        if (cz->parsed()) return run_cz(fn_path, beta, lambda, out);
        if (pack->parsed()) return run_pack(family_path, beta, out);
        if (riesz->parsed())
            return run_riesz(measure_path, alpha, dyadic, shift, combined, k_min, k_max, out, format);
        if (verify->parsed()) return run_verify(config_path, out_dir, seed, jobs);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
