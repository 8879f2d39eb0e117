// Command-line front end: simulation batches, penalty tuning, fitting real
// horizontal/vertical dataset pairs, and dimensionality reduction.
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "tps/errors.hpp"
#include "tps/fit_linear.hpp"
#include "tps/fit_logistic.hpp"
#include "tps/io.hpp"
#include "tps/reduce.hpp"
#include "tps/simulate.hpp"
#include "tps/tune.hpp"
#include "tps/util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kSchemaVersion = 1;

std::string default_out_dir() {
    const char* env = std::getenv("TPS_OUT_DIR");
    return env != nullptr && *env != '\0' ? std::string(env) : std::string(".");
}

int resolve_threads(int threads) {
    if (threads > 0) return threads;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw tps::SchemaError("cannot create output directory '" + dir + "'");
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw tps::SchemaError("cannot write '" + path + "'");
    out << text;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Values from an optional JSON config file replace the parsed flag values.
// Unknown keys are rejected.
class ConfigOverride {
public:
    explicit ConfigOverride(const std::string& path) {
        if (path.empty()) return;
        std::ifstream in(path);
        if (!in) throw tps::ConfigError("cannot open config file '" + path + "'");
        try {
            in >> doc_;
        } catch (const json::exception& e) {
            throw tps::ConfigError("config file '" + path + "': " + e.what());
        }
        if (!doc_.is_object()) throw tps::ConfigError("config file must hold a JSON object");
        for (const auto& [key, value] : doc_.items()) pending_.insert(key);
    }

    template <typename T>
    void apply(const std::string& key, T& target) {
        if (doc_.is_null() || !doc_.contains(key)) return;
        try {
            target = doc_.at(key).get<T>();
        } catch (const json::exception& e) {
            throw tps::ConfigError("config key '" + key + "': " + e.what());
        }
        pending_.erase(key);
    }

    void finish() const {
        if (!pending_.empty())
            throw tps::ConfigError("unknown config key '" + *pending_.begin() + "'");
    }

private:
    json doc_;
    std::set<std::string> pending_;
};

tps::LambdaGrid parse_grid(const std::string& text) {
    // "start:stop:step" inclusive, or a comma list of values.
    if (text.find(':') != std::string::npos) {
        double a = 0, b = 0, s = 0;
        if (std::sscanf(text.c_str(), "%lf:%lf:%lf", &a, &b, &s) != 3)
            throw tps::ConfigError("bad grid '" + text + "', expected start:stop:step");
        return tps::LambdaGrid::regular(a, b, s);
    }
    tps::LambdaGrid g;
    std::vector<double> vals;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
    g.values = Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
    g.validate();
    return g;
}

json grid_json(const tps::LambdaGrid& g) {
    json a = json::array();
    for (Eigen::Index i = 0; i < g.values.size(); ++i) a.push_back(g.values[i]);
    return a;
}

json vector_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
    tps::SimConfig sim;
    tps::FitRecipe recipe;
    int threads = 0;
    std::string out = default_out_dir();
    std::string config_path;
};

int run_simulate(SimulateArgs& a) {
    ConfigOverride cfg(a.config_path);
    cfg.apply("interaction", a.sim.interaction);
    cfg.apply("n", a.sim.n_h);
    cfg.apply("sigma", a.sim.sigma_noise);
    cfg.apply("nsim", a.sim.nsim);
    cfg.apply("seed", a.sim.seed);
    cfg.apply("binary", a.sim.binary);
    cfg.apply("nrep", a.sim.nrep);
    cfg.apply("px", a.sim.px);
    cfg.apply("pz", a.sim.pz);
    cfg.apply("degree", a.sim.degree);
    cfg.apply("lambda1a", a.recipe.lambda1a);
    cfg.apply("lambda1b", a.recipe.lambda1b);
    cfg.apply("lambda2", a.recipe.lambda2);
    cfg.apply("sigma_k", a.sim.sigma_k);
    cfg.apply("n_test", a.sim.n_test);
    cfg.apply("m_z", a.sim.m_z);
    cfg.apply("threads", a.threads);
    cfg.apply("out", a.out);
    cfg.finish();
    a.sim.validate();
    ensure_dir(a.out);

    const tps::BatchResult res = tps::run_batch(a.sim, a.recipe, resolve_threads(a.threads));
    const std::string metric = a.sim.binary ? "wss" : "ss";
    const char* names[3] = {"fit0", "fit1", "fit2"};

    // batch.csv: one row per model.
    std::string csv =
        "interaction,n_h,sigma,binary,px,pz,nrep,nsim,seed,model,mean_" + metric +
        "_fitted,mean_" + metric + "_marginal,n_ok,n_failed\n";
    for (int m = 0; m < 3; ++m) {
        csv += std::string(a.sim.interaction ? "1" : "0") + "," + std::to_string(a.sim.n_h) +
               "," + fmt(a.sim.sigma_noise) + "," + (a.sim.binary ? "1" : "0") + "," +
               std::to_string(a.sim.px) + "," + std::to_string(a.sim.pz) + "," +
               std::to_string(a.sim.nrep) + "," + std::to_string(a.sim.nsim) + "," +
               std::to_string(a.sim.seed) + "," + names[m] + "," + fmt(res.mean_fitted[m]) +
               "," + fmt(res.mean_marginal[m]) + "," + std::to_string(res.n_ok[m]) + "," +
               std::to_string(res.n_failed[m]) + "\n";
    }
    write_text(a.out + "/batch.csv", csv);

    // Plot-ready marginal curves of the first replicate, one file per model.
    for (int m = 0; m < 3; ++m) {
        if (res.first_marginals[m].theta.size() == 0) continue;
        Eigen::MatrixXd table(res.truth_marginal.x_test.size(), 3);
        table.col(0) = res.truth_marginal.x_test;
        table.col(1) = res.truth_marginal.theta;
        table.col(2) = res.first_marginals[m].theta;
        tps::write_csv(a.out + "/marginal_" + names[m] + ".csv",
                       {"x", "theta_true", "theta_hat"}, table);
    }

    json report;
    report["schema_version"] = kSchemaVersion;
    report["command"] = "simulate";
    report["config"] = {{"interaction", a.sim.interaction},
                        {"n", a.sim.n_h},
                        {"sigma", a.sim.sigma_noise},
                        {"binary", a.sim.binary},
                        {"px", a.sim.px},
                        {"pz", a.sim.pz},
                        {"degree", a.sim.degree},
                        {"nrep", a.sim.nrep},
                        {"nsim", a.sim.nsim},
                        {"seed", a.sim.seed},
                        {"lambda1a", a.recipe.lambda1a},
                        {"lambda1b", a.recipe.lambda1b},
                        {"lambda2", a.recipe.lambda2},
                        {"sigma_k", a.sim.sigma_k},
                        {"n_test", a.sim.n_test},
                        {"m_z", a.sim.m_z},
                        {"metric", metric}};
    int total_ok = 0;
    for (int m = 0; m < 3; ++m) {
        report["results"][names[m]] = {{"mean_fitted", res.mean_fitted[m]},
                                       {"mean_marginal", res.mean_marginal[m]},
                                       {"n_ok", res.n_ok[m]},
                                       {"n_failed", res.n_failed[m]}};
        total_ok += res.n_ok[m];
    }
    json reps = json::array();
    for (int r = 0; r < res.per_replicate.rows(); ++r) {
        json row;
        for (int m = 0; m < 3; ++m) {
            const double f = res.per_replicate(r, m), g = res.per_replicate(r, 3 + m);
            row[names[m]] = {{"fitted", std::isfinite(f) ? json(f) : json()},
                             {"marginal", std::isfinite(g) ? json(g) : json()}};
        }
        reps.push_back(std::move(row));
    }
    report["per_replicate"] = std::move(reps);
    write_text(a.out + "/report.json", report.dump(2) + "\n");

    int failures = 0;
    for (int m = 0; m < 3; ++m) failures += res.n_failed[m];
    if (failures > 0)
        std::cerr << "warning: " << failures << " model fits failed and were excluded\n";
    if (total_ok == 0) {
        std::cerr << "error: every replicate failed\n";
        return 3;
    }
    std::cout << "wrote " << a.out << "/batch.csv, report.json and marginal curves\n";
    return 0;
}

// ---------------------------------------------------------------------------
// shared dataset loading for tune/fit/reduce

// Loads an (x[, z], y) dataset, reducing raw covariate blocks when a manifest
// is supplied.
struct LoadedData {
    Eigen::VectorXd x, z, y;  // z empty for vertical files
    json provenance;
};

LoadedData load_dataset(const std::string& csv_path, const std::string& manifest_path,
                        const std::string& method, bool expect_z) {
    const tps::CsvTable t = tps::read_csv(csv_path);
    LoadedData d;
    d.provenance["file"] = csv_path;

    if (manifest_path.empty()) {
        const char* want = expect_z ? "x,z,y" : "x,y";
        if (t.column("x") < 0 || t.column("y") < 0 || (expect_z && t.column("z") < 0))
            throw tps::SchemaError(csv_path + ": expected header " + want +
                                   " (or pass a covariate manifest for raw data)");
        d.x = t.values.col(t.column("x"));
        d.y = t.values.col(t.column("y"));
        if (expect_z) d.z = t.values.col(t.column("z"));
        for (Eigen::Index i = 0; i < d.x.size(); ++i) {
            if (d.x[i] < 0.0 || d.x[i] > 1.0)
                throw tps::SchemaError(csv_path + ": row " + std::to_string(i + 2) +
                                       ": x outside [0,1]; pre-reduced inputs must be rescaled");
            if (expect_z && (d.z[i] < 0.0 || d.z[i] > 1.0))
                throw tps::SchemaError(csv_path + ": row " + std::to_string(i + 2) +
                                       ": z outside [0,1]");
        }
        d.provenance["reduction"] = "pre-reduced";
        return d;
    }

    const tps::BlockManifest manifest = tps::read_manifest(manifest_path);
    if (t.column("y") < 0) throw tps::SchemaError(csv_path + ": missing y column");
    d.y = t.values.col(t.column("y"));

    const auto collect = [&](const std::vector<std::string>& names) {
        tps::CovariateBlock block;
        block.values.resize(t.values.rows(), static_cast<Eigen::Index>(names.size()));
        for (std::size_t j = 0; j < names.size(); ++j) {
            const int c = t.column(names[j]);
            if (c < 0)
                throw tps::SchemaError(csv_path + ": manifest column '" + names[j] +
                                       "' not present");
            block.values.col(static_cast<Eigen::Index>(j)) = t.values.col(c);
        }
        block.names = names;
        return block;
    };
    const auto reduce_block = [&](const tps::CovariateBlock& block) {
        if (method == "pca") return tps::pca_first_component(block);
        return tps::glm_linear_predictor(block, d.y);
    };

    d.x = reduce_block(collect(manifest.x_block)).values;
    if (expect_z) {
        if (manifest.z_block.empty())
            throw tps::SchemaError(manifest_path + ": z_block required for horizontal data");
        d.z = reduce_block(collect(manifest.z_block)).values;
    }
    d.provenance["reduction"] = method;
    d.provenance["manifest"] = manifest_path;
    return d;
}

void require_binary(const Eigen::VectorXd& y, const std::string& path) {
    for (Eigen::Index i = 0; i < y.size(); ++i)
        if (y[i] != 0.0 && y[i] != 1.0)
            throw tps::SchemaError(path + ": row " + std::to_string(i + 2) +
                                   ": response must be 0/1");
}

// ---------------------------------------------------------------------------
// tune

struct TuneArgs {
    std::string mode = "truth";
    tps::SimConfig sim;
    std::string grid1 = "0:100:1";
    std::string grid2 = "0:50:0.5";
    std::string h_csv;
    int folds = 10;
    std::string metric = "ss";
    std::string v_csv;
    int pv = 20;
    double lambda1_v = 1.0;
    std::string rule = "fifty";
    double sigma_k = 0.05;
    int threads = 0;
    std::string out = default_out_dir();
    std::string config_path;
};

tps::CvMetric parse_metric(const std::string& name) {
    if (name == "ss") return tps::CvMetric::SS;
    if (name == "loglik") return tps::CvMetric::LogLik;
    if (name == "auc") return tps::CvMetric::Auc;
    throw tps::ConfigError("unknown metric '" + name + "' (ss|loglik|auc)");
}

json trace_json(const std::vector<tps::TracePoint>& trace) {
    json a = json::array();
    for (const auto& p : trace)
        a.push_back(
            {{"lambda", p.lambda}, {"value", p.ok ? json(p.value) : json()}, {"ok", p.ok}});
    return a;
}

int run_tune(TuneArgs& a) {
    ConfigOverride cfg(a.config_path);
    cfg.apply("mode", a.mode);
    cfg.apply("interaction", a.sim.interaction);
    cfg.apply("n", a.sim.n_h);
    cfg.apply("sigma", a.sim.sigma_noise);
    cfg.apply("nsim", a.sim.nsim);
    cfg.apply("seed", a.sim.seed);
    cfg.apply("px", a.sim.px);
    cfg.apply("pz", a.sim.pz);
    cfg.apply("degree", a.sim.degree);
    cfg.apply("grid1", a.grid1);
    cfg.apply("grid2", a.grid2);
    cfg.apply("h_csv", a.h_csv);
    cfg.apply("folds", a.folds);
    cfg.apply("metric", a.metric);
    cfg.apply("v_csv", a.v_csv);
    cfg.apply("pv", a.pv);
    cfg.apply("lambda1_v", a.lambda1_v);
    cfg.apply("rule", a.rule);
    cfg.apply("sigma_k", a.sigma_k);
    cfg.apply("threads", a.threads);
    cfg.apply("out", a.out);
    cfg.finish();
    ensure_dir(a.out);
    const int threads = resolve_threads(a.threads);
    const tps::LambdaGrid grid1 = parse_grid(a.grid1);
    const tps::LambdaGrid grid2 = parse_grid(a.grid2);

    json report;
    report["schema_version"] = kSchemaVersion;
    report["command"] = "tune";
    report["config"] = {{"mode", a.mode},
                        {"grid1", grid_json(grid1)},
                        {"grid2", grid_json(grid2)},
                        {"seed", a.sim.seed},
                        {"sigma_k", a.sigma_k}};
    std::string trace_csv = "stage,lambda,fold,metric,value\n";

    if (a.mode == "truth") {
        if (a.sim.binary)
            throw tps::ConfigError(
                "truth-based tuning is defined for the continuous-response simulations");
        a.sim.sigma_k = a.sigma_k;
        a.sim.validate();
        report["config"]["simulation"] = {{"interaction", a.sim.interaction},
                                          {"n", a.sim.n_h},
                                          {"sigma", a.sim.sigma_noise},
                                          {"px", a.sim.px},
                                          {"pz", a.sim.pz},
                                          {"nsim", a.sim.nsim}};
        double sum1a = 0, sum1b = 0, sum2 = 0;
        json reps = json::array();
        for (int r = 0; r < a.sim.nsim; ++r) {
            tps::SimConfig rep_cfg = a.sim;
            rep_cfg.seed = tps::derive_seed(a.sim.seed, static_cast<std::uint64_t>(r));
            const tps::FitContext ctx = tps::make_context(tps::gen_linear(rep_cfg), rep_cfg);
            const tps::TuningReport tr = tps::sequential_search(ctx, grid1, grid2, threads);
            sum1a += tr.lambda1a;
            sum1b += tr.lambda1b;
            sum2 += tr.lambda2.value();
            reps.push_back({{"lambda1a", tr.lambda1a},
                            {"lambda1b", tr.lambda1b},
                            {"lambda2", tr.lambda2.value()}});
            if (r == 0) {
                report["traces"] = {{"lambda1a", trace_json(tr.trace1a)},
                                    {"lambda2", trace_json(tr.trace2)},
                                    {"lambda1b", trace_json(tr.trace1b)}};
                for (const auto& p : tr.trace1a)
                    trace_csv += "lambda1a," + fmt(p.lambda) + ",0,ss_fitted_fit1," +
                                 (p.ok ? fmt(p.value) : "") + "\n";
                for (const auto& p : tr.trace2)
                    trace_csv += "lambda2," + fmt(p.lambda) + ",0,ss_fitted_fit2," +
                                 (p.ok ? fmt(p.value) : "") + "\n";
                for (const auto& p : tr.trace1b)
                    trace_csv += "lambda1b," + fmt(p.lambda) + ",0,ss_fitted_fit2," +
                                 (p.ok ? fmt(p.value) : "") + "\n";
            }
        }
        report["per_replicate"] = std::move(reps);
        report["selected"] = {{"lambda1a", sum1a / a.sim.nsim},
                              {"lambda1b", sum1b / a.sim.nsim},
                              {"lambda2", sum2 / a.sim.nsim}};
    } else if (a.mode == "cv") {
        if (a.h_csv.empty()) throw tps::ConfigError("cv mode requires --h-csv");
        const LoadedData h = load_dataset(a.h_csv, "", "", true);
        require_binary(h.y, a.h_csv);
        const tps::BasisSpec spec_x{a.sim.degree, a.sim.px, 0.0, 1.0};
        const tps::BasisSpec spec_z{a.sim.degree, a.sim.pz, 0.0, 1.0};
        const tps::BasisMatrix bx = tps::eval_basis(spec_x, h.x);
        const tps::BasisMatrix bz = tps::eval_basis(spec_z, h.z);
        const tps::DesignMatrix design = a.sim.interaction
                                             ? tps::build_interaction_design(bx, bz)
                                             : tps::build_additive_design(bx, bz);
        const tps::PenaltyPair penalty = tps::build_roughness(design.layout);

        const tps::CvMetric metric = parse_metric(a.metric);
        const tps::CvResult cv = tps::kfold_cv_lambda1(design, h.y, penalty, grid1, a.folds,
                                                       metric, a.sim.seed, threads);
        report["config"]["h"] = h.provenance;
        report["config"]["folds"] = a.folds;
        report["config"]["metric"] = a.metric;
        report["selected"] = {{"lambda1", cv.lambda1}};
        json medians = json::array();
        for (Eigen::Index i = 0; i < grid1.values.size(); ++i)
            medians.push_back({{"lambda", grid1.values[i]},
                               {"median", std::isfinite(cv.median_per_lambda[i])
                                              ? json(cv.median_per_lambda[i])
                                              : json()}});
        report["cv_medians"] = std::move(medians);
        for (const auto& row : cv.trace)
            trace_csv += "cv," + fmt(row[0]) + "," + fmt(row[1]) + "," + a.metric + "," +
                         (std::isfinite(row[2]) ? fmt(row[2]) : "") + "\n";

        if (!a.v_csv.empty()) {
            const LoadedData v = load_dataset(a.v_csv, "", "", false);
            require_binary(v.y, a.v_csv);
            const tps::BasisSpec spec_v{a.sim.degree, a.pv, 0.0, 1.0};
            const tps::DesignMatrix dv =
                tps::build_univariate_design(tps::eval_basis(spec_v, v.x));
            const tps::PenaltyPair pv_pen = tps::build_roughness(dv.layout);
            tps::NewtonConfig ncfg;
            tps::RoughnessTerm rough_v{pv_pen, a.lambda1_v};
            const tps::LogisticFit vfit = tps::newton_raphson(dv, v.y, ncfg, &rough_v);
            const tps::DesignMatrix dh =
                tps::build_univariate_design(tps::eval_basis(spec_v, h.x));
            const Eigen::VectorXd theta_v =
                (dh.values * vfit.beta).unaryExpr([](double t) { return tps::expit(t); });

            const tps::KernelSmoother kernel = tps::build_kernel(h.x, h.x, a.sigma_k);
            const tps::Lambda2Rule rule = a.rule == "best" ? tps::Lambda2Rule::BestFit2
                                                           : tps::Lambda2Rule::FiftyPercent;
            const tps::Lambda2Selection sel = tps::select_lambda2(
                design, h.y, penalty, kernel, theta_v, cv.lambda1, grid2, rule, threads);
            report["selected"]["lambda2"] =
                sel.lambda2.has_value() ? json(*sel.lambda2) : json();
            report["fit1_marginal_ss"] = sel.fit1_marginal_ss;
            report["traces"]["lambda2"] = trace_json(sel.trace);
            for (const auto& p : sel.trace)
                trace_csv += "lambda2," + fmt(p.lambda) + ",0,marginal_ss," +
                             (p.ok ? fmt(p.value) : "") + "\n";
        }
    } else {
        throw tps::ConfigError("unknown mode '" + a.mode + "' (truth|cv)");
    }

    write_text(a.out + "/tuning.json", report.dump(2) + "\n");
    write_text(a.out + "/trace.csv", trace_csv);
    std::cout << "wrote " << a.out << "/tuning.json and trace.csv\n";
    return 0;
}

// ---------------------------------------------------------------------------
// fit

struct FitArgs {
    std::string h_csv, v_csv;
    std::string h_manifest, v_manifest;
    std::string reduce_method = "lp";
    bool interaction = false;
    int px = 8, pz = 8, degree = 3;
    int pv = 20;
    double lambda1_v = 1.0;
    double lambda1 = -1.0;  // < 0 means select by CV
    std::string cv_metric = "ss";
    std::string grid1 = "0:10:1";
    int folds = 10;
    double lambda2 = -1.0;  // < 0 means select by rule
    std::string rule = "fifty";
    std::string grid2 = "0:50:0.5";
    double sigma_k = 0.05;
    double trim_lo = 0.0, trim_hi = 1.0;
    std::uint64_t seed = 0;
    int threads = 0;
    std::string out = default_out_dir();
    std::string config_path;
};

int run_fit(FitArgs& a) {
    ConfigOverride cfg(a.config_path);
    cfg.apply("h_csv", a.h_csv);
    cfg.apply("v_csv", a.v_csv);
    cfg.apply("h_manifest", a.h_manifest);
    cfg.apply("v_manifest", a.v_manifest);
    cfg.apply("reduce_method", a.reduce_method);
    cfg.apply("interaction", a.interaction);
    cfg.apply("px", a.px);
    cfg.apply("pz", a.pz);
    cfg.apply("degree", a.degree);
    cfg.apply("pv", a.pv);
    cfg.apply("lambda1_v", a.lambda1_v);
    cfg.apply("lambda1", a.lambda1);
    cfg.apply("cv_metric", a.cv_metric);
    cfg.apply("grid1", a.grid1);
    cfg.apply("folds", a.folds);
    cfg.apply("lambda2", a.lambda2);
    cfg.apply("rule", a.rule);
    cfg.apply("grid2", a.grid2);
    cfg.apply("sigma_k", a.sigma_k);
    cfg.apply("trim_lo", a.trim_lo);
    cfg.apply("trim_hi", a.trim_hi);
    cfg.apply("seed", a.seed);
    cfg.apply("threads", a.threads);
    cfg.apply("out", a.out);
    cfg.finish();
    if (a.h_csv.empty() || a.v_csv.empty())
        throw tps::ConfigError("fit requires --h-csv and --v-csv");
    ensure_dir(a.out);
    const int threads = resolve_threads(a.threads);

    json report;
    report["schema_version"] = kSchemaVersion;
    report["command"] = "fit";

    // Vertical marginal: once-penalized univariate logistic spline.
    const LoadedData v = load_dataset(a.v_csv, a.v_manifest, a.reduce_method, false);
    require_binary(v.y, a.v_csv);
    const tps::BasisSpec spec_v{a.degree, a.pv, 0.0, 1.0};
    const tps::DesignMatrix dv = tps::build_univariate_design(tps::eval_basis(spec_v, v.x));
    const tps::PenaltyPair pv_pen = tps::build_roughness(dv.layout);
    tps::NewtonConfig ncfg;
    tps::RoughnessTerm rough_v{pv_pen, a.lambda1_v};
    const tps::LogisticFit vfit = tps::newton_raphson(dv, v.y, ncfg, &rough_v);
    if (!vfit.converged) throw tps::NumericalError("vertical marginal fit did not converge");
    report["vertical"] = {{"n", static_cast<int>(v.x.size())},
                          {"pv", a.pv},
                          {"lambda1_v", a.lambda1_v},
                          {"iterations", vfit.iterations},
                          {"provenance", v.provenance}};

    // Horizontal data, optionally trimmed. Trimming here only drops extreme
    // rows; x and z stay on the shared [0,1] scale so the vertical marginal
    // still applies.
    LoadedData h = load_dataset(a.h_csv, a.h_manifest, a.reduce_method, true);
    require_binary(h.y, a.h_csv);
    int removed = 0;
    if (a.trim_lo > 0.0 || a.trim_hi < 1.0) {
        const auto q = [](std::vector<double> s, double p) {
            std::sort(s.begin(), s.end());
            const double t = p * (static_cast<double>(s.size()) - 1.0);
            const std::size_t lo = static_cast<std::size_t>(t);
            const std::size_t hi = std::min(lo + 1, s.size() - 1);
            return s[lo] + (t - lo) * (s[hi] - s[lo]);
        };
        const std::vector<double> xs(h.x.data(), h.x.data() + h.x.size());
        const std::vector<double> zs(h.z.data(), h.z.data() + h.z.size());
        const double xlo = q(xs, a.trim_lo), xhi = q(xs, a.trim_hi);
        const double zlo = q(zs, a.trim_lo), zhi = q(zs, a.trim_hi);
        std::vector<Eigen::Index> keep;
        for (Eigen::Index i = 0; i < h.x.size(); ++i)
            if (h.x[i] >= xlo && h.x[i] <= xhi && h.z[i] >= zlo && h.z[i] <= zhi)
                keep.push_back(i);
        if (keep.empty()) throw tps::ConfigError("trimming removed every row");
        removed = static_cast<int>(h.x.size() - static_cast<Eigen::Index>(keep.size()));
        Eigen::VectorXd nx(keep.size()), nz(keep.size()), ny(keep.size());
        for (std::size_t i = 0; i < keep.size(); ++i) {
            nx[static_cast<Eigen::Index>(i)] = h.x[keep[i]];
            nz[static_cast<Eigen::Index>(i)] = h.z[keep[i]];
            ny[static_cast<Eigen::Index>(i)] = h.y[keep[i]];
        }
        h.x = nx;
        h.z = nz;
        h.y = ny;
    }
    report["horizontal"] = {{"n", static_cast<int>(h.x.size())},
                            {"rows_trimmed", removed},
                            {"provenance", h.provenance}};

    // Design, penalty, kernel at the observed x values (application mode).
    const tps::BasisSpec spec_x{a.degree, a.px, 0.0, 1.0};
    const tps::BasisSpec spec_z{a.degree, a.pz, 0.0, 1.0};
    const tps::BasisMatrix bx = tps::eval_basis(spec_x, h.x);
    const tps::BasisMatrix bz = tps::eval_basis(spec_z, h.z);
    const tps::DesignMatrix design = a.interaction ? tps::build_interaction_design(bx, bz)
                                                   : tps::build_additive_design(bx, bz);
    const tps::PenaltyPair penalty = tps::build_roughness(design.layout);
    const tps::KernelSmoother kernel = tps::build_kernel(h.x, h.x, a.sigma_k);
    const tps::DesignMatrix dh_uni =
        tps::build_univariate_design(tps::eval_basis(spec_v, h.x));
    const Eigen::VectorXd theta_v =
        (dh_uni.values * vfit.beta).unaryExpr([](double t) { return tps::expit(t); });

    // lambda1: fixed or cross-validated.
    double lambda1 = a.lambda1;
    if (lambda1 < 0.0) {
        const tps::LambdaGrid grid1 = parse_grid(a.grid1);
        const tps::CvResult cv = tps::kfold_cv_lambda1(
            design, h.y, penalty, grid1, a.folds, parse_metric(a.cv_metric), a.seed, threads);
        lambda1 = cv.lambda1;
        report["lambda1_selection"] = {{"method", "cv"},
                                       {"metric", a.cv_metric},
                                       {"folds", a.folds},
                                       {"grid", grid_json(grid1)},
                                       {"selected", lambda1}};
    } else {
        report["lambda1_selection"] = {{"method", "fixed"}, {"selected", lambda1}};
    }

    // lambda2: fixed or rule-based.
    std::optional<double> lambda2;
    if (a.lambda2 >= 0.0) {
        lambda2 = a.lambda2;
        report["lambda2_selection"] = {{"method", "fixed"}, {"selected", *lambda2}};
    } else {
        const tps::LambdaGrid grid2 = parse_grid(a.grid2);
        const tps::Lambda2Rule rule = a.rule == "best" ? tps::Lambda2Rule::BestFit2
                                                       : tps::Lambda2Rule::FiftyPercent;
        const tps::Lambda2Selection sel = tps::select_lambda2(design, h.y, penalty, kernel,
                                                              theta_v, lambda1, grid2, rule,
                                                              threads);
        lambda2 = sel.lambda2;
        report["lambda2_selection"] = {
            {"method", a.rule == "best" ? "best_fit2" : "fifty_percent"},
            {"grid", grid_json(grid2)},
            {"fit1_marginal_ss", sel.fit1_marginal_ss},
            {"selected", lambda2.has_value() ? json(*lambda2) : json()}};
        if (!lambda2.has_value())
            std::cerr << "note: no lambda2 on the grid achieved the 50% reduction; "
                         "Fit2 skipped (NA)\n";
    }

    // The three fits.
    tps::RoughnessTerm rough{penalty, lambda1};
    const tps::LogisticFit f0 = tps::newton_raphson(design, h.y, ncfg);
    const tps::LogisticFit f1 = tps::newton_raphson(design, h.y, ncfg, &rough);
    std::optional<tps::LogisticFit> f2;
    if (lambda2.has_value()) {
        tps::MarginalTerm mp{kernel, theta_v, *lambda2};
        f2 = tps::newton_raphson(design, h.y, ncfg, &rough, &mp);
    }

    const auto marginal_ss = [&](const tps::LogisticFit& f) {
        return (kernel.weights * f.theta_hat - theta_v).squaredNorm();
    };
    const auto fit_json = [&](const tps::LogisticFit& f) {
        return json{{"lambda1", f.lambda1},
                    {"lambda2", f.lambda2},
                    {"converged", f.converged},
                    {"iterations", f.iterations},
                    {"separation_flag", f.separation_flag},
                    {"marginal_ss", marginal_ss(f)},
                    {"beta", vector_json(f.beta)}};
    };
    report["fits"]["fit0"] = fit_json(f0);
    report["fits"]["fit1"] = fit_json(f1);
    if (f2) report["fits"]["fit2"] = fit_json(*f2);

    // Marginal curves at the observed x values.
    Eigen::MatrixXd table(h.x.size(), f2 ? 5 : 4);
    table.col(0) = h.x;
    table.col(1) = theta_v;
    table.col(2) = kernel.weights * f0.theta_hat;
    table.col(3) = kernel.weights * f1.theta_hat;
    std::vector<std::string> header{"x", "theta_v", "theta_h_fit0", "theta_h_fit1"};
    if (f2) {
        table.col(4) = kernel.weights * f2->theta_hat;
        header.push_back("theta_h_fit2");
    }
    tps::write_csv(a.out + "/marginals.csv", header, table);

    report["config"] = {{"interaction", a.interaction}, {"px", a.px},
                        {"pz", a.pz},                   {"degree", a.degree},
                        {"pv", a.pv},                   {"sigma_k", a.sigma_k},
                        {"seed", a.seed},               {"trim_lo", a.trim_lo},
                        {"trim_hi", a.trim_hi}};
    write_text(a.out + "/fit_report.json", report.dump(2) + "\n");
    std::cout << "wrote " << a.out << "/fit_report.json and marginals.csv\n";
    return 0;
}

// ---------------------------------------------------------------------------
// reduce

struct ReduceArgs {
    std::string csv;
    std::string manifest;
    std::string method = "lp";
    double trim_lo = 0.0, trim_hi = 1.0;
    std::string out = default_out_dir();
    std::string config_path;
};

int run_reduce(ReduceArgs& a) {
    ConfigOverride cfg(a.config_path);
    cfg.apply("csv", a.csv);
    cfg.apply("manifest", a.manifest);
    cfg.apply("method", a.method);
    cfg.apply("trim_lo", a.trim_lo);
    cfg.apply("trim_hi", a.trim_hi);
    cfg.apply("out", a.out);
    cfg.finish();
    if (a.csv.empty() || a.manifest.empty())
        throw tps::ConfigError("reduce requires --csv and --manifest");
    if (a.method != "lp" && a.method != "pca")
        throw tps::ConfigError("unknown reduction method '" + a.method + "' (lp|pca)");
    ensure_dir(a.out);

    const tps::BlockManifest manifest = tps::read_manifest(a.manifest);
    const bool has_z = !manifest.z_block.empty();
    const LoadedData d = load_dataset(a.csv, a.manifest, a.method, has_z);

    json report;
    report["schema_version"] = kSchemaVersion;
    report["command"] = "reduce";
    report["config"] = {{"csv", a.csv},
                        {"manifest", a.manifest},
                        {"method", a.method},
                        {"trim_lo", a.trim_lo},
                        {"trim_hi", a.trim_hi}};

    Eigen::VectorXd x = d.x, y = d.y, z = d.z;
    int removed = 0;
    if (a.trim_lo > 0.0 || a.trim_hi < 1.0) {
        const tps::TrimResult trim =
            tps::trim_extremes(x, has_z ? z : x, y, a.trim_lo, a.trim_hi);
        x = trim.x;
        if (has_z) z = trim.z;
        y = trim.y;
        removed = trim.removed;
    }
    report["rows_removed"] = removed;
    report["rows_kept"] = static_cast<int>(x.size());

    if (has_z) {
        Eigen::MatrixXd table(x.size(), 3);
        table.col(0) = x;
        table.col(1) = z;
        table.col(2) = y;
        tps::write_csv(a.out + "/reduced.csv", {"x", "z", "y"}, table);
    } else {
        Eigen::MatrixXd table(x.size(), 2);
        table.col(0) = x;
        table.col(1) = y;
        tps::write_csv(a.out + "/reduced.csv", {"x", "y"}, table);
    }
    write_text(a.out + "/reduce_report.json", report.dump(2) + "\n");
    std::cout << "wrote " << a.out << "/reduced.csv and reduce_report.json\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Twice-penalized P-spline modelling for overlapping asymmetric datasets"};
    app.require_subcommand(1);

    SimulateArgs sim_args;
    CLI::App* sim = app.add_subcommand("simulate", "Run a simulation batch");
    sim->add_flag("--interaction,!--no-interaction", sim_args.sim.interaction,
                  "Interaction between x and z (default on)");
    sim->add_option("--n", sim_args.sim.n_h, "Horizontal sample size (perfect square)");
    sim->add_option("--sigma", sim_args.sim.sigma_noise, "Noise sd (continuous response)");
    sim->add_option("--nsim", sim_args.sim.nsim, "Number of simulation replicates");
    sim->add_option("--seed", sim_args.sim.seed, "Master seed");
    sim->add_flag("--binary", sim_args.sim.binary, "Binary response");
    sim->add_option("--nrep", sim_args.sim.nrep, "Row replication (binary)");
    sim->add_option("--px", sim_args.sim.px, "Basis size for x");
    sim->add_option("--pz", sim_args.sim.pz, "Basis size for z");
    sim->add_option("--degree", sim_args.sim.degree, "Spline degree");
    sim->add_option("--lambda1a", sim_args.recipe.lambda1a, "Fit1 roughness penalty");
    sim->add_option("--lambda1b", sim_args.recipe.lambda1b, "Fit2 roughness penalty");
    sim->add_option("--lambda2", sim_args.recipe.lambda2, "Fit2 marginal penalty");
    sim->add_option("--sigma-k", sim_args.sim.sigma_k, "Kernel bandwidth");
    sim->add_option("--n-test", sim_args.sim.n_test, "Marginal test points");
    sim->add_option("--m-z", sim_args.sim.m_z, "z-grid size of the marginal oracle");
    sim->add_option("--threads", sim_args.threads, "Worker threads (0 = auto)");
    sim->add_option("--out", sim_args.out, "Output directory");
    sim->add_option("--config", sim_args.config_path, "JSON config overriding flags");

    TuneArgs tune_args;
    CLI::App* tune = app.add_subcommand("tune", "Select penalty parameters");
    tune->add_option("--mode", tune_args.mode, "truth (simulation) or cv (application)");
    tune->add_flag("--interaction,!--no-interaction", tune_args.sim.interaction,
                   "Interaction between x and z");
    tune->add_option("--n", tune_args.sim.n_h, "Simulated sample size (truth mode)");
    tune->add_option("--sigma", tune_args.sim.sigma_noise, "Noise sd (truth mode)");
    tune->add_option("--nsim", tune_args.sim.nsim, "Tuning repetitions (truth mode)");
    tune->add_option("--seed", tune_args.sim.seed, "Master seed");
    tune->add_option("--px", tune_args.sim.px, "Basis size for x");
    tune->add_option("--pz", tune_args.sim.pz, "Basis size for z");
    tune->add_option("--degree", tune_args.sim.degree, "Spline degree");
    tune->add_option("--grid1", tune_args.grid1, "lambda1 grid start:stop:step");
    tune->add_option("--grid2", tune_args.grid2, "lambda2 grid start:stop:step");
    tune->add_option("--h-csv", tune_args.h_csv, "Horizontal data (cv mode)");
    tune->add_option("--folds", tune_args.folds, "CV folds");
    tune->add_option("--metric", tune_args.metric, "CV metric: ss|loglik|auc");
    tune->add_option("--v-csv", tune_args.v_csv, "Vertical data for lambda2 selection");
    tune->add_option("--pv", tune_args.pv, "Basis size of the vertical marginal fit");
    tune->add_option("--lambda1-v", tune_args.lambda1_v, "Roughness penalty of the V fit");
    tune->add_option("--rule", tune_args.rule, "lambda2 rule: fifty|best");
    tune->add_option("--sigma-k", tune_args.sigma_k, "Kernel bandwidth");
    tune->add_option("--threads", tune_args.threads, "Worker threads (0 = auto)");
    tune->add_option("--out", tune_args.out, "Output directory");
    tune->add_option("--config", tune_args.config_path, "JSON config overriding flags");

    FitArgs fit_args;
    CLI::App* fit = app.add_subcommand("fit", "Fit a horizontal/vertical dataset pair");
    fit->add_option("--h-csv", fit_args.h_csv, "Horizontal data: x,z,y or raw with manifest");
    fit->add_option("--v-csv", fit_args.v_csv, "Vertical data: x,y or raw with manifest");
    fit->add_option("--h-manifest", fit_args.h_manifest, "Covariate-block manifest for H");
    fit->add_option("--v-manifest", fit_args.v_manifest, "Covariate-block manifest for V");
    fit->add_option("--reduce-method", fit_args.reduce_method, "lp|pca for raw inputs");
    fit->add_flag("--interaction,!--no-interaction", fit_args.interaction,
                  "Interaction between x and z");
    fit->add_option("--px", fit_args.px, "Basis size for x");
    fit->add_option("--pz", fit_args.pz, "Basis size for z");
    fit->add_option("--degree", fit_args.degree, "Spline degree");
    fit->add_option("--pv", fit_args.pv, "Basis size of the vertical marginal fit");
    fit->add_option("--lambda1-v", fit_args.lambda1_v, "Roughness penalty of the V fit");
    fit->add_option("--lambda1", fit_args.lambda1, "Fixed lambda1 (otherwise CV)");
    fit->add_option("--cv-metric", fit_args.cv_metric, "CV metric: ss|loglik|auc");
    fit->add_option("--grid1", fit_args.grid1, "lambda1 CV grid");
    fit->add_option("--folds", fit_args.folds, "CV folds");
    fit->add_option("--lambda2", fit_args.lambda2, "Fixed lambda2 (otherwise rule)");
    fit->add_option("--rule", fit_args.rule, "lambda2 rule: fifty|best");
    fit->add_option("--grid2", fit_args.grid2, "lambda2 grid");
    fit->add_option("--sigma-k", fit_args.sigma_k, "Kernel bandwidth");
    fit->add_option("--trim-lo", fit_args.trim_lo, "Lower trim quantile (rows dropped)");
    fit->add_option("--trim-hi", fit_args.trim_hi, "Upper trim quantile");
    fit->add_option("--seed", fit_args.seed, "Seed for CV fold assignment");
    fit->add_option("--threads", fit_args.threads, "Worker threads (0 = auto)");
    fit->add_option("--out", fit_args.out, "Output directory");
    fit->add_option("--config", fit_args.config_path, "JSON config overriding flags");

    ReduceArgs reduce_args;
    CLI::App* reduce = app.add_subcommand("reduce", "Collapse covariate blocks to x (and z)");
    reduce->add_option("--csv", reduce_args.csv, "Raw data: y,<covariates...>");
    reduce->add_option("--manifest", reduce_args.manifest, "Covariate-block manifest");
    reduce->add_option("--method", reduce_args.method, "lp|pca");
    reduce->add_option("--trim-lo", reduce_args.trim_lo, "Lower trim quantile");
    reduce->add_option("--trim-hi", reduce_args.trim_hi, "Upper trim quantile");
    reduce->add_option("--out", reduce_args.out, "Output directory");
    reduce->add_option("--config", reduce_args.config_path, "JSON config overriding flags");

    try {
        app.parse(argc, argv);
        if (sim->parsed()) return run_simulate(sim_args);
        if (tune->parsed()) return run_tune(tune_args);
        if (fit->parsed()) return run_fit(fit_args);
        if (reduce->parsed()) return run_reduce(reduce_args);
        return 1;
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const tps::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const tps::SchemaError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const tps::ShapeError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const tps::DomainError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    }
}
