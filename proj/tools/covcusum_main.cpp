#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "covcusum/covcusum.hpp"

namespace {

using namespace covcusum;
using nlohmann::json;
using nlohmann::ordered_json;

std::uint64_t resolve_seed(std::uint64_t configured) {
    if (const char* env = std::getenv("COVCUSUM_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw std::invalid_argument("COVCUSUM_SEED is not an unsigned integer");
        }
    }
    return configured;
}

void emit(const ordered_json& j, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << j.dump(2) << "\n";
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw ParseError(out_path + ": cannot open for writing");
    out << j.dump(2) << "\n";
}

WeightFunction make_weight(bool unweighted, double beta) {
    if (unweighted) return WeightFunction::unweighted();
    return WeightFunction::power(beta);
}

struct LrvChoice {
    LrvMode mode = LrvMode::full;
    std::string learning_path;
};

LrvChoice parse_lrv(const std::string& s) {
    if (s == "full") return {LrvMode::full, {}};
    if (s == "stopped") return {LrvMode::stopped, {}};
    if (s.rfind("learning:", 0) == 0) {
        std::string path = s.substr(9);
        if (path.empty()) throw std::invalid_argument("--lrv learning:FILE needs a file path");
        return {LrvMode::learning, path};
    }
    throw std::invalid_argument("--lrv must be one of learning:FILE, full, stopped");
}

KernelSpec make_kernel(const std::string& kind, const std::string& lag, Eigen::Index n) {
    Eigen::Index m;
    if (lag == "auto") {
        m = KernelSpec::default_for(n).m;
    } else {
        try {
            m = static_cast<Eigen::Index>(std::stoll(lag));
        } catch (const std::exception&) {
            throw std::invalid_argument("--lag must be an integer or 'auto'");
        }
        if (m < 0) throw std::invalid_argument("--lag must be nonnegative");
    }
    if (kind == "bartlett") return KernelSpec::bartlett(m);
    if (kind == "truncated") return KernelSpec::truncated(m);
    throw std::invalid_argument("--kernel must be bartlett or truncated");
}

std::pair<Eigen::Index, Eigen::Index> parse_pair(const std::string& s) {
    std::size_t comma = s.find(',');
    if (comma == std::string::npos) throw std::invalid_argument("--pair expects vIdx,wIdx");
    try {
        Eigen::Index vi = static_cast<Eigen::Index>(std::stoll(s.substr(0, comma)));
        Eigen::Index wi = static_cast<Eigen::Index>(std::stoll(s.substr(comma + 1)));
        if (vi < 1 || wi < 1) throw std::invalid_argument("indices are 1-based");
        return {vi, wi};
    } catch (const std::invalid_argument&) {
        throw;
    } catch (const std::exception&) {
        throw std::invalid_argument("--pair expects vIdx,wIdx");
    }
}

std::vector<std::pair<Eigen::Index, Eigen::Index>> parse_pairs(const std::string& s, std::size_t L) {
    std::vector<std::pair<Eigen::Index, Eigen::Index>> out;
    if (s.empty()) {
        for (std::size_t j = 1; j <= L; ++j)
            out.emplace_back(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j));
        return out;
    }
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ';')) {
        std::size_t colon = item.find(':');
        if (colon == std::string::npos) throw std::invalid_argument("--pairs expects v:w entries separated by ;");
        out.emplace_back(static_cast<Eigen::Index>(std::stoll(item.substr(0, colon))),
                         static_cast<Eigen::Index>(std::stoll(item.substr(colon + 1))));
    }
    if (out.empty()) throw std::invalid_argument("--pairs is empty");
    return out;
}

std::vector<ProjectionPair> resolve_pairs(const std::vector<Vector>& columns,
                                          const std::vector<std::pair<Eigen::Index, Eigen::Index>>& idx) {
    std::vector<ProjectionPair> pairs;
    for (auto [vi, wi] : idx) {
        if (vi < 1 || wi < 1 || vi > static_cast<Eigen::Index>(columns.size()) ||
            wi > static_cast<Eigen::Index>(columns.size()))
            throw std::invalid_argument("pair index outside the projection file");
        pairs.emplace_back(columns[static_cast<std::size_t>(vi - 1)], columns[static_cast<std::size_t>(wi - 1)]);
    }
    return pairs;
}

Matrix coeff_matrix_from_json(const json& rows) {
    if (!rows.is_array() || rows.empty()) throw std::invalid_argument("coefficient array must be a nested array");
    const auto d = static_cast<Eigen::Index>(rows.size());
    const auto cols = static_cast<Eigen::Index>(rows.front().size());
    Matrix a(d, cols);
    for (Eigen::Index i = 0; i < d; ++i) {
        const json& row = rows[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
            throw std::invalid_argument("coefficient array rows have unequal length");
        for (Eigen::Index j = 0; j < cols; ++j) a(i, j) = row[static_cast<std::size_t>(j)].get<double>();
    }
    return a;
}

InnovationSpec innovation_from_config(const json& cfg, std::uint64_t seed) {
    InnovationSpec spec;
    std::string dist = cfg.value("distribution", std::string("gaussian"));
    if (dist == "gaussian") spec.distribution = Distribution::gaussian;
    else if (dist == "rademacher") spec.distribution = Distribution::rademacher;
    else if (dist == "scaled-t") spec.distribution = Distribution::scaled_t;
    else throw std::invalid_argument("distribution must be gaussian, rademacher or scaled-t");
    spec.variance = cfg.value("variance", 1.0);
    spec.df = cfg.value("df", 0.0);
    spec.seed = seed;
    spec.validate();
    return spec;
}

int cmd_simulate(const std::string& config_path, const std::string& out_path) {
    json cfg = load_config(config_path);
    const auto n = cfg.at("n").get<Eigen::Index>();
    std::uint64_t seed = resolve_seed(cfg.value("seed", 0ULL));
    InnovationSpec innov = innovation_from_config(cfg, seed);
    std::string kind = cfg.value("kind", std::string("table1"));
    Series y;
    if (kind == "table1") {
        const auto d = cfg.at("d").get<Eigen::Index>();
        Eigen::Index tau = n;
        if (cfg.contains("tau")) tau = cfg.at("tau").get<Eigen::Index>();
        else if (cfg.contains("theta")) {
            double theta = cfg.at("theta").get<double>();
            tau = theta >= 1.0 ? n : floor_frac_count(n, theta);
        }
        y = simulate_change_model(table1_model(n, d, tau), innov);
    } else if (kind == "linear") {
        CoefficientArray a(coeff_matrix_from_json(cfg.at("a")));
        y = simulate_linear(a, innov, n);
    } else if (kind == "change") {
        CoefficientArray pre(coeff_matrix_from_json(cfg.at("a_pre")));
        CoefficientArray post(coeff_matrix_from_json(cfg.at("a_post")));
        ChangePointModel model{std::move(pre), std::move(post), cfg.at("tau").get<Eigen::Index>(), n};
        y = simulate_change_model(model, innov);
    } else {
        throw std::invalid_argument("kind must be table1, linear or change");
    }
    if (out_path.empty()) throw std::invalid_argument("simulate needs --out FILE.csv");
    save_series_csv(out_path, y);
    return 0;
}

double quantile_for(const WeightFunction& g, double level, const std::string& table_path, Eigen::Index grid,
                    Eigen::Index reps, std::uint64_t seed) {
    const double p = 1.0 - level;
    if (!table_path.empty()) {
        QuantileTable t = load_quantile_table(table_path);
        bool same = (t.g.kind == g.kind) && (g.kind == WeightFunction::Kind::none || t.g.beta == g.beta);
        if (!same) throw std::invalid_argument("quantile table weight does not match the requested weight");
        return t.quantile(p);
    }
    if (g.is_unweighted()) return kolmogorov_quantile(p);
    return bridge_sup_quantile(g, grid, reps, p, seed);
}

Series load_series_checked(const std::string& path) { return load_series_csv(path); }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Projected CUSUM change-point tests for covariance structures"};
    app.require_subcommand(1);

    std::string config_path, out_path, data_path, proj_path, table_path, traj_path;
    std::string pair_str = "1,1", pairs_str, lrv_str = "full", kernel_str = "bartlett", lag_str = "auto";
    std::string which_study;
    bool unweighted = false, centered = false, want_qn = false;
    double beta = -1.0, level = 0.05, prob = 0.95;
    std::uint64_t seed = 0;
    Eigen::Index grid = 1000, reps = 20000, null_reps = 2000, mu_reps = 20000, min_segment = 0;
    int max_depth = 6;

    CLI::App* sim = app.add_subcommand("simulate", "Simulate a (possibly change-point) linear process to CSV");
    sim->add_option("--config", config_path, "model config (TOML subset or JSON)")->required();
    sim->add_option("--out", out_path, "output series CSV")->required();

    CLI::App* test = app.add_subcommand("test", "Run the standardized CUSUM change-point test");
    test->add_option("--data", data_path, "series CSV")->required();
    test->add_option("--proj", proj_path, "projection CSV (default: uniform vectors)");
    test->add_option("--pair", pair_str, "1-based column pair vIdx,wIdx into --proj");
    test->add_flag("--unweighted", unweighted, "use g = 1 (Kolmogorov quantile)");
    test->add_option("--weight-beta", beta, "power weight exponent in [0, 0.5)");
    test->add_flag("--centered", centered, "center the series at its sample mean first");
    test->add_option("--level", level, "test level in (0,1)");
    test->add_option("--lrv", lrv_str, "variance estimation: learning:FILE, full, stopped");
    test->add_option("--kernel", kernel_str, "lag window: bartlett or truncated");
    test->add_option("--lag", lag_str, "lag truncation m, or 'auto' for ceil(n^(1/3))");
    test->add_option("--seed", seed, "seed for Monte Carlo quantiles");
    test->add_option("--quantile-table", table_path, "precomputed quantile table JSON");
    test->add_option("--out", out_path, "report JSON path (default: stdout)");
    test->add_option("--dump-trajectory", traj_path, "write the CUSUM trajectory CSV (k,value)");

    CLI::App* transform = app.add_subcommand("transform", "Multivariate CUSUM transform and Q_n statistic");
    transform->add_option("--data", data_path, "series CSV")->required();
    transform->add_option("--proj", proj_path, "projection CSV")->required();
    transform->add_option("--pairs", pairs_str, "pair list v:w;v:w (default: each column with itself)");
    transform->add_flag("--unweighted", unweighted, "use g = 1");
    transform->add_option("--weight-beta", beta, "power weight exponent in [0, 0.5)");
    transform->add_option("--lrv", lrv_str, "learning:FILE or full (scales and correlations)");
    transform->add_flag("--qn", want_qn, "compute Q_n with its Monte Carlo null quantile");
    transform->add_option("--level", level, "level for the Q_n decision");
    transform->add_option("--grid", grid, "bridge grid for Q_n Monte Carlo");
    transform->add_option("--null-reps", null_reps, "null replications for Q_n");
    transform->add_option("--mu-reps", mu_reps, "replications for the mu* estimate");
    transform->add_option("--seed", seed, "Monte Carlo seed");
    transform->add_option("--out", out_path, "output JSON path (default: stdout)");

    CLI::App* segment = app.add_subcommand("segment", "Locate multiple change points by binary segmentation");
    segment->add_option("--data", data_path, "series CSV")->required();
    segment->add_option("--proj", proj_path, "projection CSV (default: uniform vectors)");
    segment->add_option("--pair", pair_str, "1-based column pair vIdx,wIdx into --proj");
    segment->add_flag("--unweighted", unweighted, "use g = 1");
    segment->add_option("--weight-beta", beta, "power weight exponent in [0, 0.5)");
    segment->add_option("--level", level, "per-test level");
    segment->add_option("--lrv", lrv_str, "variance estimation: learning:FILE, full, stopped");
    segment->add_option("--quantile-table", table_path, "quantile table JSON for weighted tests");
    segment->add_option("--min-segment", min_segment, "smallest segment length (default 2m+2)");
    segment->add_option("--max-depth", max_depth, "recursion depth limit");
    segment->add_option("--seed", seed, "Monte Carlo seed for weighted quantiles");
    segment->add_option("--out", out_path, "segments JSON path (default: stdout)");

    CLI::App* quant = app.add_subcommand("quantiles", "Simulate and persist a weighted-sup quantile table");
    quant->add_flag("--unweighted", unweighted, "table for g = 1");
    quant->add_option("--weight-beta", beta, "power weight exponent in [0, 0.5)");
    quant->add_option("--grid", grid, "bridge grid size");
    quant->add_option("--reps", reps, "Monte Carlo replications");
    quant->add_option("--seed", seed, "Monte Carlo seed");
    quant->add_option("--p", prob, "also report this quantile on stdout");
    quant->add_option("--out", out_path, "table JSON path")->required();

    CLI::App* study = app.add_subcommand("study", "Reproduce the simulation studies");
    study->add_option("which", which_study, "table1 (power study) or table2 (global Q_n study)")->required();
    study->add_option("--config", config_path, "study config (TOML subset or JSON)")->required();
    study->add_option("--out", out_path, "results CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (sim->parsed()) return cmd_simulate(config_path, out_path);

        if (test->parsed()) {
            Series y = load_series_checked(data_path);
            Vector v, w;
            if (proj_path.empty()) {
                v = w = uniform_projection(y.cols());
            } else {
                std::vector<Vector> cols = load_projections_csv(proj_path);
                auto [vi, wi] = parse_pair(pair_str);
                std::vector<ProjectionPair> pr = resolve_pairs(cols, {{vi, wi}});
                v = pr.front().v;
                w = pr.front().w;
            }
            if (v.size() != y.cols()) throw ParseError("projection dimension does not match the series");
            if (!unweighted && beta < 0.0) unweighted = true;
            WeightFunction g = make_weight(unweighted, beta);
            LrvChoice lrv = parse_lrv(lrv_str);
            std::uint64_t s = resolve_seed(seed);
            double q = quantile_for(g, level, table_path, grid, reps, s);
            std::optional<Series> learn;
            if (lrv.mode == LrvMode::learning) learn = load_series_checked(lrv.learning_path);
            Eigen::Index kernel_n = lrv.mode == LrvMode::learning ? learn->rows() : y.rows();
            KernelSpec kernel = make_kernel(kernel_str, lag_str, kernel_n);
            TestReport r = run_test(y, v, w, g, level, q, lrv.mode, learn ? &*learn : nullptr, kernel, centered);
            r.settings["weight"] = g.is_unweighted() ? "unweighted" : "power:" + std::to_string(g.beta);
            r.settings["kernel"] = kernel_str;
            r.settings["level"] = std::to_string(level);
            r.settings["seed"] = std::to_string(s);
            r.settings["data"] = data_path;
            if (!proj_path.empty()) r.settings["proj"] = proj_path + " pair " + pair_str;
            else r.settings["proj"] = "uniform";
            if (!traj_path.empty()) {
                CusumResult c = cusum(y, v, w, g, centered);
                std::ofstream out(traj_path);
                if (!out) throw ParseError(traj_path + ": cannot open for writing");
                out << "k,value\n";
                for (Eigen::Index k = 1; k <= c.trajectory.size(); ++k)
                    out << k << "," << c.trajectory[k - 1] << "\n";
            }
            emit(report_to_json(r), out_path);
            return 0;
        }

        if (transform->parsed()) {
            Series y = load_series_checked(data_path);
            std::vector<Vector> cols = load_projections_csv(proj_path);
            std::vector<ProjectionPair> pairs = resolve_pairs(cols, parse_pairs(pairs_str, cols.size()));
            for (const ProjectionPair& pr : pairs)
                if (pr.d() != y.cols()) throw ParseError("projection dimension does not match the series");
            if (!unweighted && beta < 0.0) unweighted = true;
            WeightFunction g = make_weight(unweighted, beta);
            std::uint64_t s = resolve_seed(seed);
            Vector c_stats = multivariate_transform(y, pairs, g);
            ordered_json out;
            out["c"] = std::vector<double>(c_stats.data(), c_stats.data() + c_stats.size());
            LrvChoice lrv = parse_lrv(lrv_str);
            if (lrv.mode == LrvMode::stopped)
                throw std::invalid_argument("transform supports --lrv full or learning:FILE");
            Series basis = y;
            if (lrv.mode == LrvMode::learning) basis = load_series_checked(lrv.learning_path);
            KernelSpec kernel = KernelSpec::default_for(basis.rows());
            Vector scales(c_stats.size());
            for (std::size_t j = 0; j < pairs.size(); ++j) {
                LrvEstimate e = beta2_hat(basis, pairs[j], pairs[j], 1.0, kernel);
                scales[static_cast<Eigen::Index>(j)] = std::sqrt(e.value);
            }
            Vector T = c_stats.cwiseQuotient(scales);
            Matrix sigma_T = sigma_T_matrix(basis, pairs, 1.0, kernel);
            out["t"] = std::vector<double>(T.data(), T.data() + T.size());
            out["sigma_T"] = json::array();
            for (Eigen::Index i = 0; i < sigma_T.rows(); ++i)
                out["sigma_T"].push_back(
                    std::vector<double>(sigma_T.row(i).data(), sigma_T.row(i).data() + sigma_T.cols()));
            if (want_qn) {
                double mu = mu_star(g, grid, mu_reps, derive_seed(s, {0x6d757374ULL}));
                double qn = qn_statistic(T, Vector::Constant(T.size(), mu), sigma_T);
                double qcrit = qn_null_quantile(sigma_T, g, grid, null_reps, 1.0 - level, s);
                out["mu_star"] = mu;
                out["qn"] = qn;
                out["qn_quantile"] = qcrit;
                out["level"] = level;
                out["decision"] = qn > qcrit;
            }
            emit(out, out_path);
            return 0;
        }

        if (segment->parsed()) {
            Series y = load_series_checked(data_path);
            Vector v, w;
            if (proj_path.empty()) {
                v = w = uniform_projection(y.cols());
            } else {
                std::vector<Vector> cols = load_projections_csv(proj_path);
                auto [vi, wi] = parse_pair(pair_str);
                std::vector<ProjectionPair> pr = resolve_pairs(cols, {{vi, wi}});
                v = pr.front().v;
                w = pr.front().w;
            }
            if (v.size() != y.cols()) throw ParseError("projection dimension does not match the series");
            if (!unweighted && beta < 0.0) unweighted = true;
            WeightFunction g = make_weight(unweighted, beta);
            LrvChoice lrv = parse_lrv(lrv_str);
            std::optional<Series> learn;
            if (lrv.mode == LrvMode::learning) learn = load_series_checked(lrv.learning_path);
            SegmentationOptions opt;
            opt.g = g;
            opt.level = level;
            opt.mode = lrv.mode;
            opt.learning = learn ? &*learn : nullptr;
            opt.min_segment = min_segment;
            opt.max_depth = max_depth;
            if (!g.is_unweighted())
                opt.quantile = quantile_for(g, level, table_path, grid, reps, resolve_seed(seed));
            SegmentationResult res = binary_segmentation(y, v, w, opt);
            ordered_json out;
            out["change_points"] = res.change_points;
            out["depth_reached"] = res.depth_reached;
            out["warnings"] = res.warnings;
            out["segments"] = json::array();
            for (const TestReport& r : res.segment_reports) out["segments"].push_back(report_to_json(r));
            emit(out, out_path);
            return 0;
        }

        if (quant->parsed()) {
            if (!unweighted && beta < 0.0) unweighted = true;
            WeightFunction g = make_weight(unweighted, beta);
            std::uint64_t s = resolve_seed(seed);
            QuantileTable t = bridge_sup_table(g, grid, reps, s);
            save_quantile_table(out_path, t);
            std::cout << "quantile(" << prob << ") = " << t.quantile(prob) << "\n";
            return 0;
        }

        if (study->parsed()) {
            json cfg = load_config(config_path);
            StudyConfig sc;
            sc.n = cfg.value("n", sc.n);
            if (cfg.contains("d")) sc.d_list = cfg.at("d").get<std::vector<Eigen::Index>>();
            if (cfg.contains("r")) sc.d_list = cfg.at("r").get<std::vector<Eigen::Index>>();
            if (cfg.contains("theta")) sc.theta_list = cfg.at("theta").get<std::vector<double>>();
            sc.reps = cfg.value("reps", sc.reps);
            sc.level = cfg.value("level", sc.level);
            if (cfg.contains("weight_beta")) {
                double b = cfg.at("weight_beta").get<double>();
                sc.weight = b < 0.0 ? WeightFunction::unweighted() : WeightFunction::power(b);
            }
            if (cfg.contains("lrv_mode")) {
                std::string m = cfg.at("lrv_mode").get<std::string>();
                if (m == "learning") sc.lrv_mode = LrvMode::learning;
                else if (m == "full") sc.lrv_mode = LrvMode::full;
                else if (m == "stopped") sc.lrv_mode = LrvMode::stopped;
                else throw std::invalid_argument("lrv_mode must be learning, full or stopped");
            }
            sc.learning_size = cfg.value("learning_size", sc.learning_size);
            if (cfg.contains("projection")) {
                std::string p = cfg.at("projection").get<std::string>();
                if (p == "fixed-uniform") sc.projection = ProjectionKind::fixed_uniform;
                else if (p == "dirichlet") sc.projection = ProjectionKind::dirichlet;
                else throw std::invalid_argument("projection must be fixed-uniform or dirichlet");
            }
            sc.base_seed = resolve_seed(cfg.value("base_seed", sc.base_seed));
            sc.quantile_grid = cfg.value("quantile_grid", sc.quantile_grid);
            sc.quantile_reps = cfg.value("quantile_reps", sc.quantile_reps);
            sc.global_d = cfg.value("global_d", sc.global_d);
            sc.global_learning_size = cfg.value("global_learning_size", sc.global_learning_size);
            sc.null_reps = cfg.value("null_reps", sc.null_reps);
            sc.mu_reps = cfg.value("mu_reps", sc.mu_reps);
            StudyTable table;
            if (which_study == "table1") table = run_power_study(sc);
            else if (which_study == "table2") table = run_global_study(sc);
            else throw std::invalid_argument("study expects table1 or table2");
            save_study_csv(out_path, table);
            return 0;
        }
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
