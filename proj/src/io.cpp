#include "pmdlab/io.hpp"

#include <cctype>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "pmdlab/errors.hpp"
#include "pmdlab/lattice.hpp"

namespace pmdlab {

using json = nlohmann::ordered_json;

namespace {

json parse(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("malformed JSON: ") + e.what());
    }
}

void check_schema(const json& j) {
    if (j.contains("schema") && j["schema"] != kSchema)
        throw InvalidArgument("unsupported schema " + j["schema"].dump());
}

template <class F>
auto guarded(F&& f) {
    try {
        return f();
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("malformed document: ") + e.what());
    }
}

json vec(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

json mat(const Eigen::MatrixXd& m) {
    json a = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) a.push_back(m(i, j));
    return a;
}

json matrix_json(const ParamMatrix& pm) {
    json j;
    j["schema"] = kSchema;
    j["n"] = pm.n();
    j["k"] = pm.k();
    j["rows"] = pm.rows();
    return j;
}

ParamMatrix matrix_from(const json& j) {
    check_schema(j);
    const int n = j.at("n").get<int>();
    const int k = j.at("k").get<int>();
    const auto& rows = j.at("rows");
    if (!rows.is_array() || static_cast<int>(rows.size()) != n)
        throw InvalidArgument("matrix: row count differs from n");
    std::vector<double> data;
    for (const auto& r : rows) {
        if (!r.is_array() || static_cast<int>(r.size()) != k) throw InvalidArgument("matrix: row length differs from k");
        for (const auto& v : r) data.push_back(v.get<double>());
    }
    return ParamMatrix(n, k, std::move(data));
}

json pmf_json(const SparsePmf& p) {
    json j;
    j["schema"] = kSchema;
    j["k"] = p.dims();
    json pts = json::array();
    for (const auto& [x, q] : p.entries()) pts.push_back({{"x", x}, {"p", q}});
    j["points"] = std::move(pts);
    return j;
}

SparsePmf pmf_from(const json& j) {
    check_schema(j);
    const int k = j.at("k").get<int>();
    std::vector<std::pair<Point, double>> e;
    for (const auto& pt : j.at("points")) {
        auto x = pt.at("x").get<Point>();
        if (static_cast<int>(x.size()) != k) throw InvalidArgument("pmf: point dimension differs from k");
        e.emplace_back(std::move(x), pt.at("p").get<double>());
    }
    return SparsePmf(k, std::move(e));
}

json gaussian_json(const BlockGaussian& bg) {
    json j;
    j["k"] = bg.k();
    json blocks = json::array();
    for (const auto& b : bg.blocks())
        blocks.push_back({{"coords", b.coords}, {"pivot", b.pivot}, {"total", b.total},
                          {"mean", vec(b.mean)}, {"cov", mat(b.cov)}});
    j["blocks"] = std::move(blocks);
    return j;
}

BlockGaussian gaussian_from(const json& j) {
    const int k = j.at("k").get<int>();
    std::vector<GaussianBlock> blocks;
    for (const auto& b : j.at("blocks")) {
        GaussianBlock g;
        g.coords = b.at("coords").get<std::vector<int>>();
        g.pivot = b.at("pivot").get<int>();
        g.total = b.at("total").get<std::int64_t>();
        auto mean = b.at("mean").get<std::vector<double>>();
        auto cov = b.at("cov").get<std::vector<double>>();
        const auto d = static_cast<Eigen::Index>(mean.size());
        if (static_cast<Eigen::Index>(cov.size()) != d * d) throw InvalidArgument("block: covariance size mismatch");
        g.mean = Eigen::Map<Eigen::VectorXd>(mean.data(), d);
        g.cov = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(cov.data(), d, d);
        blocks.push_back(std::move(g));
    }
    return BlockGaussian(k, std::move(blocks));
}

json decomposition_json(const StructuralDecomposition& sd) {
    json j;
    j["schema"] = kSchema;
    j["gaussian"] = gaussian_json(sd.gaussian);
    j["sparse"] = matrix_json(sd.sparse);
    return j;
}

StructuralDecomposition decomposition_from(const json& j) {
    check_schema(j);
    return {gaussian_from(j.at("gaussian")), matrix_from(j.at("sparse"))};
}

json hypothesis_json(const Hypothesis& h) {
    json j;
    j["schema"] = kSchema;
    j["tag"] = h.tag();
    j["label"] = h.label();
    j["dims"] = h.dims();
    std::visit(
        [&](const auto& f) {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, ExactPmd>)
                j["params"] = matrix_json(f.pm);
            else if constexpr (std::is_same_v<T, GaussianPlusSparse>)
                j["params"] = decomposition_json(f.sd);
            else if constexpr (std::is_same_v<T, SiirvForm>)
                j["params"] = {{"scale", f.scale}, {"mean", f.mean}, {"variance", f.variance}, {"residue", f.residue}};
            else
                j["params"] = pmf_json(f.pmf);
        },
        h.form());
    return j;
}

Hypothesis hypothesis_from(const json& j) {
    check_schema(j);
    const auto tag = j.at("tag").get<std::string>();
    const auto label = j.value("label", std::string{});
    const auto& p = j.at("params");
    if (tag == "exact_pmd") return Hypothesis(ExactPmd{matrix_from(p)}, label);
    if (tag == "gaussian_plus_sparse") return Hypothesis(GaussianPlusSparse{decomposition_from(p)}, label);
    if (tag == "siirv")
        return Hypothesis(SiirvForm{p.at("scale").get<int>(), p.at("mean").get<double>(), p.at("variance").get<double>(),
                                    p.at("residue").get<std::vector<double>>()},
                          label);
    if (tag == "tabulated") return Hypothesis(TabulatedPmf{pmf_from(p)}, label);
    throw InvalidArgument("unknown hypothesis tag " + tag);
}

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::First: return "first";
        case Verdict::Second: return "second";
        default: return "draw";
    }
}

json log_json(const TournamentLog& log) {
    json j;
    j["schema"] = kSchema;
    j["hypotheses"] = log.hypotheses;
    j["draws_per_hypothesis"] = log.draws_per_hypothesis;
    j["budget"] = log.budget;
    j["x_samples_used"] = log.x_samples_used;
    j["pmf_evaluations"] = log.pmf_evaluations;
    j["eps"] = log.eps;
    j["delta"] = log.delta;
    json c = json::array();
    for (const auto& r : log.contests)
        c.push_back({{"first", r.first}, {"second", r.second}, {"w_x", r.stat_x}, {"w_1", r.stat_1},
                     {"w_2", r.stat_2}, {"verdict", verdict_name(r.verdict)}});
    j["contests"] = std::move(c);
    j["scores"] = log.scores;
    return j;
}

}  // namespace

std::string to_json(const ParamMatrix& pm) { return matrix_json(pm).dump(); }
std::string to_json(const SparsePmf& pmf) { return pmf_json(pmf).dump(); }
std::string to_json(const StructuralDecomposition& sd) { return decomposition_json(sd).dump(); }
std::string to_json(const Hypothesis& h) { return hypothesis_json(h).dump(); }
std::string to_json(const TournamentLog& log) { return log_json(log).dump(); }

std::string to_json(const DecompositionResult& r, std::optional<double> measured_tv) {
    json j;
    j["schema"] = kSchema;
    j["decomposition"] = decomposition_json(r.decomposition);
    j["sparse_rows"] = r.sparse_rows;
    json ledger = json::array();
    for (const auto& e : r.ledger) ledger.push_back({{"step", e.step}, {"cost", e.cost}});
    j["ledger"] = std::move(ledger);
    j["ledger_total"] = r.ledger_total();
    if (measured_tv) j["measured_tv"] = *measured_tv;
    return j.dump();
}

std::string to_json(const LearnReport& r, const std::string& log_path) {
    json j;
    j["schema"] = kSchema;
    j["kind"] = r.kind;
    j["first_sample"] = r.first_sample;
    j["samples_drawn"] = r.samples_drawn;
    j["moment_samples"] = r.moment_samples;
    j["structures"] = r.structures;
    j["structures_skipped"] = r.structures_skipped;
    j["hypotheses_assembled"] = r.hypotheses_assembled;
    j["hypotheses_pruned"] = r.hypotheses_pruned;
    j["tournament_hypotheses"] = r.tournament.hypotheses;
    j["tournament_draws_per_hypothesis"] = r.tournament.draws_per_hypothesis;
    j["tournament_budget"] = r.tournament.budget;
    j["tournament_x_samples"] = r.tournament.x_samples_used;
    if (!log_path.empty()) j["tournament_log"] = log_path;
    j["notes"] = r.notes;
    return j.dump();
}

ParamMatrix parse_param_matrix(const std::string& text) {
    return guarded([&] { return matrix_from(parse(text)); });
}
SparsePmf parse_sparse_pmf(const std::string& text) {
    return guarded([&] { return pmf_from(parse(text)); });
}
StructuralDecomposition parse_decomposition(const std::string& text) {
    return guarded([&] { return decomposition_from(parse(text)); });
}
Hypothesis parse_hypothesis(const std::string& text) {
    return guarded([&] { return hypothesis_from(parse(text)); });
}

SparsePmf parse_distribution(const std::string& text) {
    auto j = parse(text);
    if (j.contains("rows")) return pmd_pmf_exact(guarded([&] { return matrix_from(j); }));
    if (j.contains("points")) return guarded([&] { return pmf_from(j); });
    if (j.contains("tag")) return guarded([&] { return hypothesis_from(j); }).tabulate();
    throw InvalidArgument("document is neither a matrix, a pmf nor a hypothesis");
}

std::vector<Point> read_samples_csv(std::istream& in) {
    std::vector<Point> out;
    std::string line;
    std::size_t lineno = 0;
    int dims = -1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        Point p;
        bool numeric = true;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            const auto b = cell.find_first_not_of(" \t");
            const auto e = cell.find_last_not_of(" \t");
            if (b == std::string::npos) {
                numeric = false;
                break;
            }
            cell = cell.substr(b, e - b + 1);
            std::size_t used = 0;
            try {
                p.push_back(std::stoll(cell, &used));
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != cell.size()) {
                numeric = false;
                break;
            }
        }
        if (!numeric) {
            if (out.empty() && dims < 0 && lineno == 1) {
                dims = 0;  // header seen
                continue;
            }
            throw InvalidArgument("samples: line " + std::to_string(lineno) + " is not a list of integers");
        }
        if (!out.empty() && p.size() != out.front().size())
            throw InvalidArgument("samples: line " + std::to_string(lineno) + " has a different dimension");
        out.push_back(std::move(p));
    }
    if (out.empty()) throw InvalidArgument("samples: no data lines");
    return out;
}

void write_samples_csv(std::ostream& out, const std::vector<Point>& samples) {
    for (const auto& p : samples) {
        for (std::size_t i = 0; i < p.size(); ++i) out << (i ? "," : "") << p[i];
        out << '\n';
    }
}

std::string manifest_line(std::size_t index, const ParamMatrix& pm) {
    json j;
    j["index"] = index;
    j["type"] = "grid_pmd";
    j["params"] = matrix_json(pm);
    return j.dump();
}

std::string manifest_line(std::size_t index, const BlockGaussian& bg) {
    json j;
    j["index"] = index;
    j["type"] = "grid_gaussian";
    j["params"] = gaussian_json(bg);
    return j.dump();
}

std::string read_text_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw InvalidArgument("cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace pmdlab
