#include "cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "pmdlab/covers.hpp"
#include "pmdlab/decomposition.hpp"
#include "pmdlab/errors.hpp"
#include "pmdlab/io.hpp"
#include "pmdlab/lattice.hpp"
#include "pmdlab/learn.hpp"

namespace pmdlab::cli {

namespace {

using json = nlohmann::ordered_json;

std::string fmt12(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

Point parse_point(const std::string& s) {
    Point p;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        std::size_t used = 0;
        try {
            p.push_back(std::stoll(cell, &used));
        } catch (const std::exception&) {
            used = std::string::npos;
        }
        if (used != cell.size()) throw InvalidArgument("point: '" + s + "' is not a list of integers");
    }
    if (p.empty()) throw InvalidArgument("point: empty");
    return p;
}

bool strict_seed() {
    const char* v = std::getenv("PMDLAB_STRICT_SEED");
    return v && std::string(v) == "1";
}

struct Options {
    bool as_json = false;
    // pmf / tv
    std::string file_a, file_b, point;
    // decompose
    double c = 0.01, t = 20, gamma = 6.5, epsilon = 0.1;
    bool theory = false, dry_run = false, no_measure = false;
    // learn
    std::string kind, truth, log_path, out_path;
    int k = 0;
    double delta = 0.1;
    std::uint64_t seed = 1;
    // cover
    int n = 1, w = 2;
    double g = 0.5, q = 0, mean_cube = 1.0, chol_g = 1.0;
    double max_elements = 1e6;
};

int cmd_pmf(const Options& o, std::ostream& out) {
    auto pm = parse_param_matrix(read_text_file(o.file_a));
    auto x = parse_point(o.point);
    if (static_cast<int>(x.size()) != pm.k()) throw InvalidArgument("point dimension differs from k");
    double p = pmd_pmf_exact(pm).at(x);
    if (o.as_json)
        out << json{{"schema", kSchema}, {"point", x}, {"p", p}}.dump() << '\n';
    else
        out << fmt12(p) << '\n';
    return kOk;
}

int cmd_tv(const Options& o, std::ostream& out) {
    auto a = parse_distribution(read_text_file(o.file_a));
    auto b = parse_distribution(read_text_file(o.file_b));
    if (a.dims() != b.dims()) throw InvalidArgument("distributions have different dimensions");
    double d = tv_distance(a, b);
    if (o.as_json)
        out << json{{"schema", kSchema}, {"tv", d}}.dump() << '\n';
    else
        out << fmt12(d) << '\n';
    return kOk;
}

int cmd_decompose(const Options& o, std::ostream& out, std::ostream& err) {
    auto pm = parse_param_matrix(read_text_file(o.file_a));
    DecompositionConfig cfg;
    if (o.theory) {
        cfg = DecompositionConfig::theory(o.epsilon, pm.k());
    } else {
        cfg.c = o.c;
        cfg.t = o.t;
        cfg.gamma = o.gamma;
    }
    cfg.validate(pm.k());
    if (o.theory && (o.dry_run || cfg.t > kTheoryExecutionCap)) {
        json j{{"schema", kSchema}, {"c", cfg.c}, {"t", cfg.t}, {"gamma", cfg.gamma},
               {"execution_cap", kTheoryExecutionCap}, {"runnable", cfg.t <= kTheoryExecutionCap}};
        out << j.dump() << '\n';
        if (o.dry_run) return kOk;
        err << "theory constant t exceeds the execution cap; rerun with --dry-run to only print constants\n";
        return kExecutionCap;
    }
    auto res = decompose(pm, cfg);
    std::optional<double> measured;
    if (!o.no_measure) {
        try {
            measured = tv_distance(pmd_pmf_exact(pm), tabulate_decomposition(res.decomposition));
        } catch (const SupportCapExceeded&) {
            err << "support too large; measured tv omitted\n";
        }
    }
    if (o.as_json) {
        out << to_json(res, measured) << '\n';
    } else {
        out << "blocks " << res.decomposition.gaussian.blocks().size() << ", sparse rows "
            << res.decomposition.sparse.n() << '\n';
        for (const auto& e : res.ledger) out << "  " << e.step << " " << fmt12(e.cost) << '\n';
        out << "ledger total " << fmt12(res.ledger_total()) << '\n';
        if (measured) out << "measured tv " << fmt12(*measured) << '\n';
    }
    return kOk;
}

int cmd_learn(const Options& o, bool seed_given, std::ostream& out, std::ostream& err) {
    if (strict_seed() && !seed_given) throw InvalidArgument("PMDLAB_STRICT_SEED=1 requires --seed");
    if (o.kind != "pmd" && o.kind != "siirv") throw InvalidArgument("--kind must be pmd or siirv");
    std::ifstream f(o.file_a);
    if (!f) throw InvalidArgument("cannot open " + o.file_a);
    const auto data = read_samples_csv(f);
    const int expected = o.kind == "pmd" ? o.k : 1;
    if (static_cast<int>(data.front().size()) != expected)
        throw InvalidArgument("samples have dimension " + std::to_string(data.front().size()) + ", expected " +
                              std::to_string(expected));

    // The file is a finite sample; draws are uniform with replacement.
    auto rng = std::make_shared<Rng>(o.seed ^ 0x9e3779b97f4a7c15ULL);
    SampleOracle oracle = [rng, &data]() {
        std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
        return data[pick(*rng)];
    };
    LearnConfig cfg;
    cfg.eps = o.epsilon;
    cfg.delta = o.delta;
    cfg.seed = o.seed;
    auto res = o.kind == "pmd" ? learn_pmd(oracle, o.k, cfg) : learn_siirv(oracle, o.k, cfg);
    if (!o.log_path.empty()) {
        std::ofstream lf(o.log_path);
        if (!lf) throw InvalidArgument("cannot write " + o.log_path);
        lf << to_json(res.report.tournament) << '\n';
    }
    std::optional<double> truth_tv;
    if (!o.truth.empty() && res.hypothesis) {
        auto pm = parse_param_matrix(read_text_file(o.truth));
        SparsePmf truth = pmd_pmf_exact(pm);
        if (o.kind == "siirv") {
            if (pm.k() != o.k) throw InvalidArgument("truth matrix k differs from --k");
            truth = siirv_pmf_exact(pm);
        }
        truth_tv = tv_distance(truth, res.hypothesis->tabulate());
    }
    json j;
    j["schema"] = kSchema;
    j["status"] = res.hypothesis ? "ok" : "failure";
    j["hypothesis"] = res.hypothesis ? json::parse(to_json(*res.hypothesis)) : json(nullptr);
    j["report"] = json::parse(to_json(res.report, o.log_path));
    if (truth_tv) j["tv_to_truth"] = *truth_tv;
    if (!o.out_path.empty()) {
        std::ofstream hf(o.out_path);
        if (!hf) throw InvalidArgument("cannot write " + o.out_path);
        hf << j["hypothesis"].dump() << '\n';
    }
    if (o.as_json) {
        out << j.dump() << '\n';
    } else {
        out << "status " << j["status"].get<std::string>() << '\n';
        if (res.hypothesis) out << "hypothesis " << res.hypothesis->tag() << '\n';
        out << "samples drawn " << res.report.samples_drawn << ", tournament hypotheses "
            << res.report.tournament.hypotheses << '\n';
        if (truth_tv) out << "tv to truth " << fmt12(*truth_tv) << '\n';
    }
    if (!res.hypothesis) {
        err << "tournament failed to select a hypothesis\n";
        return kFailure;
    }
    return kOk;
}

int cmd_cover(const Options& o, std::ostream& out, std::ostream& err) {
    std::ofstream file;
    std::ostream* sink = &out;
    if (!o.out_path.empty()) {
        file.open(o.out_path);
        if (!file) throw InvalidArgument("cannot write " + o.out_path);
        sink = &file;
    }
    std::size_t count = 0;
    if (o.kind == "grid-pmd" || o.kind == "moment-match") {
        GridPmdCover cover(o.n, o.k, o.g);
        if (cover.size() > o.max_elements) {
            err << "cover has " << cover.size() << " elements, above --max-elements\n";
            return kExecutionCap;
        }
        if (o.kind == "grid-pmd") {
            while (auto m = cover.next()) *sink << manifest_line(count++, *m) << '\n';
        } else {
            std::vector<ParamMatrix> all;
            while (auto m = cover.next()) all.push_back(std::move(*m));
            for (auto i : moment_matching_cover(all, o.w, ProfileQuantizer{o.q}))
                *sink << manifest_line(count++, all[i]) << '\n';
        }
    } else if (o.kind == "grid-gauss") {
        GridGaussianCover cover(o.n, o.k, GridSpec{o.g, o.mean_cube, o.chol_g});
        if (cover.size() > o.max_elements) {
            err << "cover has " << cover.size() << " elements, above --max-elements\n";
            return kExecutionCap;
        }
        while (auto b = cover.next()) *sink << manifest_line(count++, *b) << '\n';
    } else {
        throw InvalidArgument("--kind must be grid-pmd, grid-gauss or moment-match");
    }
    if (o.as_json && !o.out_path.empty())
        out << json{{"schema", kSchema}, {"count", count}}.dump() << '\n';
    else
        err << "count " << count << '\n';
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Poisson multinomial distribution toolkit", "pmdlab"};
    app.require_subcommand(1);
    auto add_json = [&](CLI::App* c) { c->add_flag("--json", o.as_json, "Machine-readable output"); };

    auto* pmf = app.add_subcommand("pmf", "Exact probability of a point under a PMD");
    pmf->add_option("matrix", o.file_a, "Parameter matrix JSON")->required();
    pmf->add_option("--point,point", o.point, "Comma-separated lattice point")->required();
    add_json(pmf);

    auto* tv = app.add_subcommand("tv", "Total variation distance between two distributions");
    tv->add_option("a", o.file_a, "Matrix, pmf or hypothesis JSON")->required();
    tv->add_option("b", o.file_b, "Matrix, pmf or hypothesis JSON")->required();
    add_json(tv);

    auto* dec = app.add_subcommand("decompose", "Structural decomposition with TV ledger");
    dec->add_option("matrix", o.file_a, "Parameter matrix JSON")->required();
    dec->add_option("--c", o.c, "Rounding threshold");
    dec->add_option("--t", o.t, "Sparsity threshold");
    dec->add_option("--gamma", o.gamma, "Bucket exponent");
    dec->add_flag("--theory", o.theory, "Use accuracy-derived constants");
    dec->add_option("--epsilon", o.epsilon, "Accuracy for --theory");
    dec->add_flag("--dry-run", o.dry_run, "Print theory constants only");
    dec->add_flag("--no-measure", o.no_measure, "Skip the exact TV measurement");
    add_json(dec);

    auto* learn = app.add_subcommand("learn", "Learn a PMD or SIIRV from samples");
    learn->add_option("samples", o.file_a, "CSV samples")->required();
    learn->add_option("--kind", o.kind, "pmd or siirv")->required();
    learn->add_option("--k", o.k, "Number of categories")->required()->check(CLI::Range(1, 64));
    learn->add_option("--epsilon", o.epsilon, "Target accuracy")->check(CLI::Range(1e-9, 0.999999));
    learn->add_option("--delta", o.delta, "Failure probability")->check(CLI::Range(1e-12, 0.999999));
    auto* seed_opt = learn->add_option("--seed", o.seed, "Random seed");
    learn->add_option("--truth", o.truth, "True parameter matrix, for reporting tv");
    learn->add_option("--log", o.log_path, "Write the tournament log here");
    learn->add_option("--out", o.out_path, "Write the hypothesis JSON here");
    add_json(learn);

    auto* cover = app.add_subcommand("cover", "Emit a cover manifest as JSON lines");
    cover->add_option("--kind", o.kind, "grid-pmd, grid-gauss or moment-match")->required();
    cover->add_option("--n", o.n, "Rows")->check(CLI::Range(0, 1 << 20));
    cover->add_option("--k", o.k, "Categories")->required()->check(CLI::Range(1, 64));
    cover->add_option("--g", o.g, "Parameter granularity")->check(CLI::Range(1e-9, 1.0));
    cover->add_option("--w", o.w, "Moment profile order (moment-match)");
    cover->add_option("--q", o.q, "Profile quantization, 0 for exact (moment-match)");
    cover->add_option("--mean-cube", o.mean_cube, "Mean grid side (grid-gauss)");
    cover->add_option("--chol-g", o.chol_g, "Cholesky grid (grid-gauss)");
    cover->add_option("--max-elements", o.max_elements, "Refuse larger covers");
    cover->add_option("--out", o.out_path, "Write the manifest here");
    add_json(cover);

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << e.what() << '\n';
        return kBadInput;
    }

    try {
        if (*pmf) return cmd_pmf(o, out);
        if (*tv) return cmd_tv(o, out);
        if (*dec) return cmd_decompose(o, out, err);
        if (*learn) return cmd_learn(o, seed_opt->count() > 0, out, err);
        return cmd_cover(o, out, err);
    } catch (const SupportCapExceeded& e) {
        err << e.what() << '\n';
        return kSupportCap;
    } catch (const CapExceeded& e) {
        err << e.what() << '\n';
        return kExecutionCap;
    } catch (const InvalidArgument& e) {
        err << e.what() << '\n';
        return kBadInput;
    } catch (const Error& e) {
        err << e.what() << '\n';
        return kFailure;
    }
}

}  // namespace pmdlab::cli
