#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "json.hpp"
#include "wloo/config.hpp"
#include "wloo/experiments.hpp"
#include "wloo/io.hpp"
#include "wloo/testbed.hpp"

using nlohmann::json;
using namespace wloo;

namespace {

constexpr const char* kVersion = "wloo 1.0.0";

std::uint64_t seed_of(const Config& c, const std::string& key) {
    return c.raw(key).empty() ? c.u64("run.seed") : c.u64(key);
}

Mat make_design(const Config& c) {
    const std::string src = c.str("design.source");
    if (src == "file") {
        if (c.str("design.file").empty()) throw Error(Errc::ConfigError, "design.file is required for design.source = file");
        return read_design(c.str("design.file"));
    }
    const int d = static_cast<int>(c.integer("design.d"));
    if (src == "grid") return regular_grid(d, static_cast<int>(c.integer("design.per_axis")));
    const auto n = static_cast<Eigen::Index>(c.integer("design.n"));
    if (src == "sobol") {
        std::optional<std::uint64_t> s;
        if (c.flag("design.scramble")) s = seed_of(c, "design.seed");
        return sobol_points(d, n, s);
    }
    if (src == "packing") {
        const Mat cand = sobol_points(d, static_cast<Eigen::Index>(c.integer("design.candidates")));
        return greedy_packing(cand, n, c.real("design.packing_a"), seed_of(c, "design.seed"));
    }
    throw Error(Errc::ConfigError, "design.source: unknown value '" + src + "'");
}

IntegrationMeasure make_measure(const Config& c, const Mat& X) {
    const std::string src = c.str("measure.source");
    if (src == "sobol") return IntegrationMeasure::uniform(sobol_points(static_cast<int>(X.cols()), c.integer("measure.N")));
    if (src == "design") return IntegrationMeasure::uniform(X);
    if (src == "file") {
        if (c.str("measure.file").empty()) throw Error(Errc::ConfigError, "measure.file is required for measure.source = file");
        const NumericCsv csv = read_csv(c.str("measure.file"));
        IntegrationMeasure mu = IntegrationMeasure::uniform(read_design(c.str("measure.file")));
        const int w = csv.column("weight");
        if (w >= 0) {
            Vec wt = csv.data.col(w);
            if ((wt.array() < 0).any() || !(wt.sum() > 0)) throw Error(Errc::IoError, "measure weights must be >= 0 with a positive sum");
            mu.weights = wt / wt.sum();
        }
        return mu;
    }
    throw Error(Errc::ConfigError, "measure.source: unknown value '" + src + "'");
}

std::optional<KernelSpec> truth_kernel(const Config& c) {
    if (c.str("truth.family").empty()) return std::nullopt;
    return KernelSpec(parse_family(c.str("truth.family")), c.real("truth.theta"), c.real("truth.nugget"));
}

Vec make_data(const Config& c, const Mat& X) {
    const std::string src = c.str("data.source");
    const std::uint64_t seed = seed_of(c, "data.seed");
    Vec y;
    if (src == "file") {
        if (c.str("data.file").empty()) throw Error(Errc::ConfigError, "data.file is required for data.source = file");
        const NumericCsv csv = read_csv(c.str("data.file"));
        int j = csv.column("y");
        if (j < 0 && csv.header.size() == 1) j = 0;
        if (j < 0) throw Error(Errc::IoError, c.str("data.file") + ": no y column");
        y = csv.data.col(j);
        if (y.size() != X.rows()) throw Error(Errc::DimensionMismatch, "data has " + std::to_string(y.size()) + " rows, design has " + std::to_string(X.rows()));
    } else if (src == "gp") {
        const auto k = truth_kernel(c);
        if (!k) throw Error(Errc::ConfigError, "data.source = gp needs truth.family");
        y = sample_gp(*k, X, seed);
    } else if (src == "environmental") {
        y = evaluate(environmental, X);
    } else if (src == "piston") {
        y = evaluate(piston4d, X);
    } else if (src == "zero") {
        y = Vec::Zero(X.rows());
    } else {
        throw Error(Errc::ConfigError, "data.source: unknown value '" + src + "'");
    }
    return add_noise(y, c.real("data.noise"), seed);
}

bool constant_trend(const Config& c) {
    const std::string m = c.str("trend.mode");
    if (m == "zero") return false;
    if (m == "constant") return true;
    throw Error(Errc::ConfigError, "trend.mode must be zero or constant");
}

struct Problem {
    Mat X;
    IntegrationMeasure mu;
    Vec y;
    PredictorPtr pred;
    Mat W, R;
    double theta_p = std::nan("");
    bool constant = false;
};

PredictorPtr make_predictor(const Config& c, const Problem& p, double& theta_used) {
    const std::string v = c.str("predictor.variant");
    if (v == "empirical_mean") return std::make_shared<EmpiricalMean>(p.X);
    if (v == "bayes_polynomial") {
        const int d = static_cast<int>(p.X.cols());
        const int m = static_cast<int>(c.integer("predictor.poly_m"));
        return std::make_shared<BayesPolynomial>(PolyBasis::tensor_legendre(d, m), c.real("predictor.gamma2"), p.X);
    }
    if (v == "table") {
        if (c.str("predictor.weights_file").empty() || c.str("predictor.loo_file").empty())
            throw Error(Errc::ConfigError, "table predictors need predictor.weights_file and predictor.loo_file");
        const Mat WT = read_csv(c.str("predictor.weights_file")).data;  // N x n
        const Mat R = read_csv(c.str("predictor.loo_file")).data;
        return std::make_shared<TablePredictor>(p.X, p.mu.points, WT.transpose(), R);
    }
    if (v != "simple_kriging" && v != "ordinary_kriging")
        throw Error(Errc::ConfigError, "predictor.variant: unknown value '" + v + "'");
    const Family fam = parse_family(c.str("predictor.family"));
    const double r = c.real("predictor.nugget");
    const bool ok = v == "ordinary_kriging";
    theta_used = c.str("predictor.theta") == "loo"
                     ? theta_loo(p.y, p.X, fam, ok ? MeanMode::Constant : MeanMode::Zero, r)
                     : c.real("predictor.theta");
    const KernelSpec k(fam, theta_used, r);
    if (ok) return std::make_shared<OrdinaryKriging>(k, p.X);
    return std::make_shared<SimpleKriging>(k, p.X);
}

Problem make_problem(const Config& c) {
    Problem p;
    p.X = make_design(c);
    p.mu = make_measure(c, p.X);
    p.y = make_data(c, p.X);
    p.constant = constant_trend(c);
    p.pred = make_predictor(c, p, p.theta_p);
    p.W = p.pred->weights(p.mu.points);
    p.R = p.pred->loo_matrix();
    return p;
}

double resolve_theta(const Config& c, const Problem& p, Family fam, const std::string& raw) {
    if (raw != "loo") {
        char* end = nullptr;
        const double t = std::strtod(raw.c_str(), &end);
        if (raw.empty() || *end != '\0') throw Error(Errc::ConfigError, "kernel.theta: expected a number or 'loo'");
        return t;
    }
    double t = theta_loo(p.y, p.X, fam, p.constant ? MeanMode::Constant : MeanMode::Zero, c.real("kernel.nugget"));
    const double lo = c.real("kernel.theta_min"), hi = c.real("kernel.theta_max");
    if (lo > 0) t = std::max(t, lo);
    if (hi > 0) t = std::min(t, hi);
    return t;
}

struct EvalKernel {
    std::vector<KernelSpec> parts;
    Vec nu;
};

EvalKernel eval_kernel(const Config& c, const Problem& p, std::optional<double> theta_override = std::nullopt) {
    EvalKernel e;
    const Family fam = parse_family(c.str("kernel.family"));
    const double r = c.real("kernel.nugget");
    const auto thetas = c.reals("kernel.mixture_thetas");
    if (!thetas.empty() && !theta_override) {
        const auto w = c.reals("kernel.mixture_weights");
        if (w.size() != thetas.size()) throw Error(Errc::ConfigError, "kernel.mixture_weights must match kernel.mixture_thetas");
        if (p.constant) throw Error(Errc::ConfigError, "trend.mode = constant is not supported with a mixture K^(e)");
        e.nu.resize(static_cast<Eigen::Index>(w.size()));
        for (std::size_t t = 0; t < thetas.size(); ++t) {
            e.parts.emplace_back(fam, thetas[t], r);
            e.nu[static_cast<Eigen::Index>(t)] = w[t];
        }
        return e;
    }
    const double th = theta_override ? *theta_override : resolve_theta(c, p, fam, c.str("kernel.theta"));
    e.parts.emplace_back(fam, th, r);
    e.nu = Vec::Ones(1);
    return e;
}

MomentBundle bundle_for(const EvalKernel& e, const Problem& p) {
    if (e.parts.size() == 1) return build_bundle(p.R, p.W, e.parts[0], p.X, p.mu);
    return mixture_bundle(e.parts, e.nu, p.R, p.W, p.X, p.mu);
}

struct Estimates {
    IseEstimate loo, blp, blup;
    MomentBundle B;
};

Estimates estimate(const Config& c, const Problem& p, const EvalKernel& e) {
    Estimates out;
    out.B = bundle_for(e, p);
    const bool clamp = c.flag("estimate.clamp");
    const Vec eps = p.R.transpose() * p.y;
    out.loo = ise_loo(eps);
    if (p.constant) {
        out.blp = trend_corrected_ise(p.y, p.R, p.W, e.parts[0], p.X, out.B, false, clamp);
        out.blup = trend_corrected_ise(p.y, p.R, p.W, e.parts[0], p.X, out.B, true, clamp);
    } else {
        out.blp = ise_blp(out.B, eps, clamp);
        out.blup = ise_blup(out.B, eps, clamp);
    }
    return out;
}

json manifest(const Config& c, const std::string& command) {
    json m;
    m["tool"] = kVersion;
    m["command"] = command;
    m["seed"] = c.u64("run.seed");
    m["config"] = c.serialize(true);
    m["numeric_agreement"] = "bit-identical on one platform; 1e-12 relative across platforms";
    return m;
}

json kernel_json(const EvalKernel& e) {
    json j = json::array();
    for (std::size_t t = 0; t < e.parts.size(); ++t)
        j.push_back({{"family", family_name(e.parts[t].family)},
                     {"theta", e.parts[t].theta},
                     {"nugget", e.parts[t].nugget},
                     {"weight", e.nu[static_cast<Eigen::Index>(t)]}});
    return j;
}

void emit(const Config& c, const std::string& stem, const json& j, const Table& t) {
    const std::string format = c.str("output.format");
    if (format != "json" && format != "csv") throw Error(Errc::ConfigError, "output.format must be csv or json");
    std::ostringstream text;
    if (format == "json")
        text << j.dump(2) << "\n";
    else
        write_csv(text, t);
    std::cout << text.str();
    if (c.is_set("output.dir")) {
        std::filesystem::create_directories(c.str("output.dir"));
        const std::string path = c.str("output.dir") + "/" + stem + (format == "json" ? ".json" : ".csv");
        std::ofstream f(path, std::ios::binary);
        if (!f) throw Error(Errc::IoError, "cannot write '" + path + "'");
        f << text.str();
    }
}

int cmd_estimate(const Config& c) {
    const Problem p = make_problem(c);
    const EvalKernel e = eval_kernel(c, p);
    const Estimates est = estimate(c, p, e);
    const FlatLimitDiagnostics fl = flat_limit_diagnostics(p.R, p.W, p.mu);
    json j;
    j["ise_loo"] = est.loo.value;
    j["ise_blp"] = est.blp.value;
    j["ise_blp_unbiased"] = est.blup.value;
    j["estimators"] = {est.loo.estimator, est.blp.estimator, est.blup.estimator};
    j["trend_info"] = {{"mode", p.constant ? "constant" : "zero"},
                       {"tau_hat", est.blp.tau_hat},
                       {"correction", est.blp.trend_amount}};
    j["theta_used"] = {{"predictor", std::isnan(p.theta_p) ? json(nullptr) : json(p.theta_p)},
                       {"kernel", kernel_json(e)}};
    j["diagnostics"] = {{"n", p.X.rows()},
                        {"N", p.mu.size()},
                        {"d", p.X.cols()},
                        {"predictor", p.pred->name()},
                        {"loo_full_rank", numerically_full_rank(p.R)},
                        {"S_jitter", est.B.s_factor().jitter_applied()},
                        {"J_assumed", est.B.J},
                        {"defect_integral", fl.J0},
                        {"sum_to_one", fl.sum_to_one}};
    if (const auto kt = truth_kernel(c)) {
        BundleOptions o;
        o.keep_c = false;
        o.factorize = false;
        o.compute_V = c.flag("truth.compute_V");
        const MomentBundle Bt = build_bundle(p.R, p.W, *kt, p.X, p.mu, o);
        const PerformanceReport r = performance_report(est.blp.gamma, Bt, o.compute_V);
        j["oracle"] = {{"e_ise", Bt.J}, {"e_estimate", r.mean_estimate}, {"bias", r.bias}, {"mse", r.mse}, {"v_included", r.v_included}};
    }
    j["manifest"] = manifest(c, "estimate");
    Table t;
    t.name = "estimate";
    t.header = {"ise_loo", "ise_blp", "ise_blp_unbiased", "tau_hat", "trend_correction", "theta_kernel"};
    t.add({fmt(est.loo.value), fmt(est.blp.value), fmt(est.blup.value), fmt(est.blp.tau_hat), fmt(est.blp.trend_amount),
           fmt(e.parts[0].theta)});
    emit(c, "estimate", j, t);
    return 0;
}

int cmd_sweep(const Config& c) {
    const auto grid = c.reals("sweep.thetas");
    if (grid.empty()) throw Error(Errc::ConfigError, "sweep.thetas must list at least one value");
    const Problem p = make_problem(c);
    const auto kt = truth_kernel(c);
    std::optional<MomentBundle> Bt;
    if (kt) {
        BundleOptions o;
        o.keep_c = false;
        o.factorize = false;
        o.compute_V = c.flag("truth.compute_V");
        Bt = build_bundle(p.R, p.W, *kt, p.X, p.mu, o);
    }
    Table t;
    t.name = "sweep";
    t.header = {"theta_blp", "estimate", "estimate_unbiased", "e_ise", "e_estimate", "mse", "bias", "singular"};
    json rows = json::array();
    for (double th : grid) {
        const EvalKernel e = eval_kernel(c, p, th);
        std::vector<std::string> row = {fmt(th)};
        json jr = {{"theta_blp", th}};
        try {
            const Estimates est = estimate(c, p, e);
            row.push_back(fmt(est.blp.value));
            row.push_back(fmt(est.blup.value));
            jr["estimate"] = est.blp.value;
            jr["estimate_unbiased"] = est.blup.value;
            if (Bt) {
                const PerformanceReport r = performance_report(est.blp.gamma, *Bt, Bt->V.has_value());
                row.insert(row.end(), {fmt(Bt->J), fmt(r.mean_estimate), fmt(r.mse), fmt(r.bias)});
                jr["e_ise"] = Bt->J;
                jr["e_estimate"] = r.mean_estimate;
                jr["mse"] = r.mse;
                jr["bias"] = r.bias;
            } else {
                row.insert(row.end(), {"", "", "", ""});
            }
            row.push_back("0");
            jr["singular"] = false;
        } catch (const Error& err) {
            if (err.code() != Errc::FlatLimitSingular && err.code() != Errc::DegenerateConstraint) throw;
            row.insert(row.end(), {"", "", "", "", "", "", "1"});
            jr["singular"] = true;
        }
        t.add(std::move(row));
        rows.push_back(jr);
    }
    json j;
    j["rows"] = rows;
    j["manifest"] = manifest(c, "sweep");
    emit(c, "sweep", j, t);
    return 0;
}

int cmd_design(const Config& c) {
    const Mat X = make_design(c);
    json j;
    j["n"] = X.rows();
    j["d"] = X.cols();
    if (X.rows() >= 2) j["packing_radius"] = packing_radius(X);
    const IntegrationMeasure mu = make_measure(c, X);
    j["covering_radius"] = covering_radius(mu.points, X);
    if (c.str("design.source") == "packing") {
        const Mat cand = sobol_points(static_cast<int>(X.cols()), static_cast<Eigen::Index>(c.integer("design.candidates")));
        const EfficiencyBounds b = efficiency_bounds(cand, X);
        j["packing_efficiency_lb"] = b.packing;
        j["covering_efficiency_lb"] = b.covering;
    }
    json pts = json::array();
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        json r = json::array();
        for (Eigen::Index k = 0; k < X.cols(); ++k) r.push_back(X(i, k));
        pts.push_back(r);
    }
    j["points"] = pts;
    j["manifest"] = manifest(c, "design");
    emit(c, "design", j, design_table(X));
    return 0;
}

int cmd_reproduce(const Config& c, const std::string& id) {
    ExperimentOptions o;
    o.seed = c.u64("run.seed");
    o.threads = static_cast<unsigned>(c.integer("run.threads"));
    o.replications = static_cast<int>(c.integer("run.replications"));
    ExperimentResult res = run_experiment(id, o);
    const std::string dir = c.str("output.dir");
    std::filesystem::create_directories(dir);
    for (const auto& t : res.tables) write_csv(dir + "/" + t.name + ".csv", t);
    res.manifest["tool"] = kVersion;
    const std::string mpath = dir + "/" + id + "_manifest.json";
    std::ofstream f(mpath, std::ios::binary);
    if (!f) throw Error(Errc::IoError, "cannot write '" + mpath + "'");
    f << res.manifest.dump(2) << "\n";
    if (c.str("output.format") == "csv") {
        for (const auto& t : res.tables) {
            std::cout << "# " << t.name << "\n";
            write_csv(std::cout, t);
        }
    } else {
        std::cout << res.manifest.dump(2) << "\n";
    }
    return 0;
}

struct Common {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::optional<std::string> out, format;
    std::map<std::string, std::string> keys;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config_path, "config file (key = value)");
    sub->add_option("--seed", c.seed, "base seed (run.seed)");
    sub->add_option("--threads", c.threads, "worker threads (run.threads)");
    sub->add_option("--out", c.out, "output directory (output.dir)");
    sub->add_option("--format", c.format, "csv | json (output.format)")->check(CLI::IsMember({"csv", "json"}));
    for (const auto& k : config_schema()) {
        const std::string name = k.name;
        sub->add_option_function<std::string>(
               "--" + name, [&c, name](const std::string& v) { c.keys[name] = v; }, k.help)
            ->group("Config keys");
    }
}

Config resolve(const Common& cm) {
    Config c = cm.config_path.empty() ? Config() : Config::load(cm.config_path);
    c.apply_process_env();
    for (const auto& [k, v] : cm.keys) c.set(k, v);
    if (cm.seed) c.set("run.seed", std::to_string(*cm.seed));
    if (cm.threads) c.set("run.threads", std::to_string(*cm.threads));
    if (cm.out) c.set("output.dir", *cm.out);
    if (cm.format) c.set("output.format", *cm.format);
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Weighted leave-one-out ISE estimation for linear predictors"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    Common common;
    std::string experiment;
    auto* est = app.add_subcommand("estimate", "estimate the ISE of a predictor on data");
    auto* swp = app.add_subcommand("sweep", "estimates and exact performance over a theta_BLP grid");
    auto* rep = app.add_subcommand("reproduce", "regenerate an experiment table at desk scale");
    auto* des = app.add_subcommand("design", "generate a design");
    auto* st = app.add_subcommand("selftest", "run the invariant suite");
    for (auto* s : {est, swp, rep, des}) add_common(s, common);
    rep->add_option("experiment", experiment, "experiment id")->required();
    app.footer("Environment: every config key can be set as WLOO_<KEY>, e.g. WLOO_RUN_SEED or WLOO_KERNEL_THETA.\n"
               "Precedence: defaults < --config file < environment < command-line flags.\n"
               "Exit codes: 0 success, 2 configuration or input error, 3 numerical failure.");
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    try {
        if (st->parsed()) return cli::run_selftest(std::cout) == 0 ? 0 : 1;
        const Config c = resolve(common);
        if (est->parsed()) return cmd_estimate(c);
        if (swp->parsed()) return cmd_sweep(c);
        if (des->parsed()) return cmd_design(c);
        if (rep->parsed()) return cmd_reproduce(c, experiment);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return is_user_error(e.code()) ? 2 : 3;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: IoError: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
