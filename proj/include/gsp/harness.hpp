#pragma once
#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gsp/backbone.hpp"
#include "gsp/dataset_io.hpp"
#include "gsp/errors.hpp"
#include "gsp/graph.hpp"
#include "gsp/head.hpp"
#include "gsp/pretrain.hpp"
#include "gsp/prompt.hpp"
#include "gsp/sbm.hpp"
#include "gsp/split.hpp"
#include "gsp/svg.hpp"
#include "gsp/train.hpp"

namespace gsp {

inline const std::vector<double> kDefaultLambdaGrid = {0,    1e-4, 3e-4, 1e-3,
                                                       3e-3, 1e-2, 3e-2, 1e-1};

// Shortest decimal string that round-trips the double.
inline std::string num_str(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

struct RunConfig {
    std::string dataset_path;
    std::optional<SbmConfig> synthetic;
    std::string weights_path;
    Method method = Method::Gpf;
    bool lambda_set = false;
    bool k_set = false;
    double lambda = 0.0;
    std::vector<double> lambda_grid = kDefaultLambdaGrid;
    TuneConfig tune;
    int shots = 1;
    std::vector<std::uint64_t> seeds = {0};
    bool stratified_split = false;
    int degree_cap = kDefaultDegreeCap;
    int threads = 0;  // 0 means pick automatically
    std::string out_dir = ".";
    bool plots = false;
    bool adapter_trainable = false;
    PretrainConfig pretrain;
    Json echo;  // the parsed config file, for report provenance
};

struct CliOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<double> lambda;
    std::optional<std::string> method;
    std::optional<std::string> out_dir;
    bool plots = false;
};

namespace detail {

inline SbmConfig sbm_from_json(const Json& j, const std::string& where) {
    SbmConfig cfg;
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& key = it.key();
        if (key == "sizes")
            cfg.sizes = it->get<std::vector<int>>();
        else if (key == "p_in")
            cfg.p_in = it->get<double>();
        else if (key == "p_out")
            cfg.p_out = it->get<double>();
        else if (key == "feature_dim")
            cfg.feature_dim = it->get<int>();
        else if (key == "informative_dims")
            cfg.informative_dims = it->get<int>();
        else if (key == "mean_scale")
            cfg.mean_scale = it->get<double>();
        else if (key == "noise_std")
            cfg.noise_std = it->get<double>();
        else if (key == "seed")
            cfg.seed = it->get<std::uint64_t>();
        else
            throw ValidationError(where + ": unknown key '" + key + "'");
    }
    if (cfg.sizes.empty()) throw ValidationError(where + ".sizes: required");
    return cfg;
}

inline PretrainConfig pretrain_from_json(const Json& j, const std::string& where) {
    PretrainConfig cfg;
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& key = it.key();
        if (key == "epochs")
            cfg.epochs = it->get<int>();
        else if (key == "learning_rate")
            cfg.learning_rate = it->get<double>();
        else if (key == "weight_decay")
            cfg.weight_decay = it->get<double>();
        else if (key == "negative_ratio")
            cfg.negative_ratio = it->get<int>();
        else if (key == "hidden_dim")
            cfg.hidden_dim = it->get<int>();
        else if (key == "layers")
            cfg.layers = it->get<int>();
        else if (key == "adapter_dim")
            cfg.adapter_dim = it->get<int>();
        else if (key == "seed")
            cfg.seed = it->get<std::uint64_t>();
        else
            throw ValidationError(where + ": unknown key '" + key + "'");
    }
    return cfg;
}

}  // namespace detail

inline RunConfig load_run_config(const std::string& path, const CliOverrides& over = {}) {
    RunConfig cfg;
    cfg.echo = detail::parse_file(path);
    if (!cfg.echo.is_object()) throw ValidationError(path + ": top level must be an object");
    for (auto it = cfg.echo.begin(); it != cfg.echo.end(); ++it) {
        const std::string& key = it.key();
        const Json& v = *it;
        if (key == "dataset")
            cfg.dataset_path = v.get<std::string>();
        else if (key == "synthetic")
            cfg.synthetic = detail::sbm_from_json(v, path + ".synthetic");
        else if (key == "weights")
            cfg.weights_path = v.get<std::string>();
        else if (key == "method")
            cfg.method = method_from_name(v.get<std::string>());
        else if (key == "lambda") {
            cfg.lambda = v.get<double>();
            cfg.lambda_set = true;
        } else if (key == "lambda_grid")
            cfg.lambda_grid = v.get<std::vector<double>>();
        else if (key == "eta")
            cfg.tune.eta = v.get<double>();
        else if (key == "epochs")
            cfg.tune.epochs = v.get<int>();
        else if (key == "head_lr")
            cfg.tune.head_lr = v.get<double>();
        else if (key == "weight_decay")
            cfg.tune.head_weight_decay = v.get<double>();
        else if (key == "prompt_weight_decay")
            cfg.tune.prompt_weight_decay = v.get<bool>();
        else if (key == "prox_scaling") {
            std::string s = v.get<std::string>();
            if (s == "direct")
                cfg.tune.prox_scaling = ProxScaling::Direct;
            else if (s == "stepScaled")
                cfg.tune.prox_scaling = ProxScaling::StepScaled;
            else
                throw ValidationError(path +
                                      ".prox_scaling: expected direct|stepScaled, got '" +
                                      s + "'");
        } else if (key == "k") {
            cfg.tune.k = v.get<int>();
            cfg.k_set = true;
        } else if (key == "shots")
            cfg.shots = v.get<int>();
        else if (key == "seeds")
            cfg.seeds = v.get<std::vector<std::uint64_t>>();
        else if (key == "stratified_split")
            cfg.stratified_split = v.get<bool>();
        else if (key == "degree_cap")
            cfg.degree_cap = v.get<int>();
        else if (key == "threads")
            cfg.threads = v.get<int>();
        else if (key == "out")
            cfg.out_dir = v.get<std::string>();
        else if (key == "plots")
            cfg.plots = v.get<bool>();
        else if (key == "adapter_trainable")
            cfg.adapter_trainable = v.get<bool>();
        else if (key == "pretrain")
            cfg.pretrain = detail::pretrain_from_json(v, path + ".pretrain");
        else
            throw ValidationError(path + ": unknown key '" + key + "'");
    }

    if (over.method) cfg.method = method_from_name(*over.method);
    if (over.lambda) {
        cfg.lambda = *over.lambda;
        cfg.lambda_set = true;
    }
    if (over.seed) cfg.seeds = {*over.seed};
    if (over.out_dir) cfg.out_dir = *over.out_dir;
    if (over.plots) cfg.plots = true;

    if (cfg.dataset_path.empty() == !cfg.synthetic.has_value())
        throw ValidationError(path + ": exactly one of 'dataset' or 'synthetic' is required");
    if (cfg.seeds.empty()) throw ValidationError(path + ".seeds: must not be empty");
    if (cfg.shots < 1) throw ValidationError(path + ".shots: must be >= 1");
    if (cfg.lambda_set && !method_uses_lambda(cfg.method))
        throw ValidationError(path + ": lambda applies only to gsfp/gsmfp, not " +
                              method_name(cfg.method));
    if (cfg.k_set && !method_uses_basis(cfg.method))
        throw ValidationError(path + ": k applies only to gpfplus/gsmfp, not " +
                              method_name(cfg.method));
    if (cfg.lambda_grid.empty()) throw ValidationError(path + ".lambda_grid: must not be empty");
    for (double l : cfg.lambda_grid)
        if (l < 0.0) throw ValidationError(path + ".lambda_grid: values must be >= 0");
    // ascending order makes "ties go to the smaller lambda" hold for any input
    std::sort(cfg.lambda_grid.begin(), cfg.lambda_grid.end());
    cfg.tune.lambda = method_uses_lambda(cfg.method) ? cfg.lambda : 0.0;
    cfg.tune.validate();
    return cfg;
}

inline int thread_budget(int configured, int jobs) {
    int n = configured > 0 ? configured : int(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    if (const char* env = std::getenv("GSP_THREADS")) {
        int cap = std::atoi(env);
        if (cap >= 1) n = std::min(n, cap);
    }
    return std::min(n, jobs);
}

// Runs job(i) for i in [0, jobs) on a bounded pool; claims are atomic, so
// any interleaving computes the same set. Callers index results by i.
template <typename F>
inline void parallel_for_jobs(int jobs, int configured_threads, F&& job) {
    int workers = thread_budget(configured_threads, jobs);
    if (workers <= 1) {
        for (int i = 0; i < jobs; ++i) job(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex err_mu;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (;;) {
                int i = next.fetch_add(1);
                if (i >= jobs) return;
                try {
                    job(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mu);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

struct LoadedContext {
    Dataset dataset;
    Batch batch;
    FrozenBackbone backbone;
    bool has_adapter = false;
    DenseMatrix adapter;
};

inline Dataset resolve_dataset(const RunConfig& cfg) {
    if (cfg.synthetic) return synthesize_sbm(*cfg.synthetic);
    return load_dataset(cfg.dataset_path, cfg.degree_cap);
}

inline LoadedContext load_context(const RunConfig& cfg) {
    LoadedContext ctx;
    ctx.dataset = resolve_dataset(cfg);
    ctx.batch = make_batch(ctx.dataset);
    if (cfg.weights_path.empty())
        throw ValidationError("config: 'weights' is required for tune/sweep");
    LoadedWeights lw = load_weights(cfg.weights_path);
    ctx.backbone = std::move(lw.backbone);
    ctx.has_adapter = lw.has_adapter;
    ctx.adapter = std::move(lw.adapter);
    int raw = ctx.dataset.feature_dim();
    if (ctx.has_adapter) {
        if (ctx.adapter.rows != raw)
            throw ValidationError("config: adapter expects raw feature dim " +
                                  std::to_string(ctx.adapter.rows) + ", dataset has " +
                                  std::to_string(raw));
    } else if (ctx.backbone.input_dim() != raw) {
        throw ValidationError("config: backbone input dim " +
                              std::to_string(ctx.backbone.input_dim()) +
                              " does not match dataset feature dim " + std::to_string(raw));
    }
    return ctx;
}

// Single graph covering the whole dataset, for pretraining: graph tasks
// merge block-diagonal, node tasks pass through.
inline Graph merged_graph(const Dataset& ds) {
    if (ds.task == TaskKind::Node) return ds.graphs[0];
    Batch b = make_batch(ds);
    Graph g;
    g.num_nodes = b.features.rows;
    g.features = std::move(b.features);
    std::vector<std::pair<int, int>> rc;
    int base = 0;
    for (const Graph& part : ds.graphs) {
        for (int i = 0; i < part.num_nodes; ++i)
            for (int t = part.adjacency.offsets[i]; t < part.adjacency.offsets[i + 1]; ++t)
                rc.emplace_back(base + i, base + part.adjacency.indices[t]);
        base += part.num_nodes;
    }
    g.adjacency = SparseMatrix::from_sorted_triples(g.num_nodes, g.num_nodes, rc,
                                                    std::vector<double>(rc.size(), 1.0));
    return g;
}

struct SeedOutcome {
    std::uint64_t seed = 0;
    double lambda = 0.0;
    TrainResult result;
    long long wall_ms = 0;
};

inline SeedOutcome run_single(const LoadedContext& ctx, const RunConfig& cfg, Method method,
                              double lambda, std::uint64_t seed) {
    auto t0 = std::chrono::steady_clock::now();
    TuneConfig tc = cfg.tune;
    tc.lambda = method_uses_lambda(method) ? lambda : 0.0;
    tc.seed = seed;
    FewShotSplit split = kshot_split(ctx.dataset, cfg.shots, seed, cfg.stratified_split);
    SeedOutcome out;
    out.seed = seed;
    out.lambda = tc.lambda;
    out.result = tune_one(ctx.dataset, ctx.batch, split, ctx.backbone, method, tc,
                          ctx.has_adapter ? &ctx.adapter : nullptr, cfg.adapter_trainable);
    out.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    return out;
}

inline const char* kResultsHeader = "method,lambda,k,seed,accuracy,nnz,zero_rows,epochs_best,wall_ms";

inline std::string csv_row(Method method, const SeedOutcome& o) {
    const TrainResult& r = o.result;
    std::string lambda_cell = method_uses_lambda(method) ? num_str(o.lambda) : "";
    std::string k_cell = method_uses_basis(method) ? std::to_string(r.basis.k) : "";
    std::string nnz_cell, zr_cell;
    if (method_uses_vector(method)) {
        nnz_cell = std::to_string(nnz_count(r.prompt.p));
    } else if (method_uses_basis(method)) {
        nnz_cell = std::to_string(nnz_count(r.basis.P));
        zr_cell = std::to_string(zero_row_count(r.basis.P));
    }
    return method_name(method) + "," + lambda_cell + "," + k_cell + "," +
           std::to_string(o.seed) + "," + num_str(r.test_accuracy) + "," + nnz_cell + "," +
           zr_cell + "," + std::to_string(r.best_epoch) + "," + std::to_string(o.wall_ms);
}

namespace detail {

inline Json trace_json(const LossTrace& t) {
    Json j;
    j["initial_data_loss"] = t.initial_data_loss;
    j["initial_reg"] = t.initial_reg;
    j["initial_composite"] = t.initial_composite;
    Json data = Json::array(), reg = Json::array(), comp = Json::array(),
         val = Json::array(), nnz = Json::array(), zr = Json::array();
    for (const EpochRecord& e : t.epochs) {
        data.push_back(e.data_loss);
        reg.push_back(e.reg_value);
        comp.push_back(e.composite);
        val.push_back(e.val_accuracy);
        nnz.push_back(e.prompt_nnz);
        zr.push_back(e.zero_rows);
    }
    j["data_loss"] = std::move(data);
    j["reg_value"] = std::move(reg);
    j["composite"] = std::move(comp);
    j["val_accuracy"] = std::move(val);
    j["prompt_nnz"] = std::move(nnz);
    j["zero_rows"] = std::move(zr);
    return j;
}

inline Json seed_json(Method method, const SeedOutcome& o, const DenseMatrix* prompt_input) {
    Json j;
    j["seed"] = o.seed;
    if (method_uses_lambda(method)) j["lambda"] = o.lambda;
    j["accuracy"] = o.result.test_accuracy;
    j["val_accuracy"] = o.result.best_val_accuracy;
    j["best_epoch"] = o.result.best_epoch;
    j["wall_ms"] = o.wall_ms;
    if (method_uses_vector(method)) {
        j["prompt"] = o.result.prompt.p.values;
        j["nnz"] = nnz_count(o.result.prompt.p);
    } else if (method_uses_basis(method)) {
        j["prompt_rows"] = o.result.basis.P.rows;
        j["prompt_cols"] = o.result.basis.P.cols;
        j["prompt"] = o.result.basis.P.values;
        j["nnz"] = nnz_count(o.result.basis.P);
        j["zero_rows"] = zero_row_count(o.result.basis.P);
        if (prompt_input)
            j["zero_cols_increment"] = sparsity_report(o.result.basis, *prompt_input).zero_cols;
    }
    j["trace"] = trace_json(o.result.trace);
    return j;
}

}  // namespace detail

inline void ensure_out_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ValidationError(dir + ": cannot create output directory");
}

inline void run_pretrain(const RunConfig& cfg) {
    if (cfg.weights_path.empty())
        throw ValidationError("config: 'weights' (output path) is required for pretrain");
    Dataset ds = resolve_dataset(cfg);
    Graph g = merged_graph(ds);
    PretrainResult pr = pretrain(g, cfg.pretrain);
    ensure_out_dir(std::filesystem::path(cfg.weights_path).parent_path().string().empty()
                       ? "."
                       : std::filesystem::path(cfg.weights_path).parent_path().string());
    save_weights(pr.backbone, cfg.weights_path, pr.has_adapter ? &pr.adapter : nullptr);
}

inline void write_tune_plots(const RunConfig& cfg, const std::vector<SeedOutcome>& outs) {
    std::vector<Series> comp;
    for (const SeedOutcome& o : outs) {
        Series s;
        s.label = "seed " + std::to_string(o.seed);
        for (std::size_t e = 0; e < o.result.trace.epochs.size(); ++e) {
            s.xs.push_back(double(e));
            s.ys.push_back(o.result.trace.epochs[e].composite);
        }
        comp.push_back(std::move(s));
    }
    write_text_file(cfg.out_dir + "/loss_curve.svg",
                    line_chart_svg("objective per epoch (" + method_name(cfg.method) + ")",
                                   "epoch", "composite objective", comp));
    if (method_uses_basis(cfg.method) && !outs.empty()) {
        write_text_file(cfg.out_dir + "/prompt_heatmap.svg",
                        heatmap_svg("|P| at best epoch, seed " +
                                        std::to_string(outs[0].seed),
                                    outs[0].result.basis.P));
    }
}

inline void run_tune(const RunConfig& cfg) {
    LoadedContext ctx = load_context(cfg);
    ensure_out_dir(cfg.out_dir);
    int jobs = int(cfg.seeds.size());
    std::vector<SeedOutcome> outs(jobs);
    parallel_for_jobs(jobs, cfg.threads, [&](int i) {
        outs[i] = run_single(ctx, cfg, cfg.method, cfg.tune.lambda, cfg.seeds[i]);
    });

    std::string csv = std::string(kResultsHeader) + "\n";
    for (const SeedOutcome& o : outs) csv += csv_row(cfg.method, o) + "\n";
    write_text_file(cfg.out_dir + "/results.csv", csv);

    std::vector<double> accs;
    for (const SeedOutcome& o : outs) accs.push_back(o.result.test_accuracy);
    Aggregate agg = aggregate_runs(accs);

    Json report;
    report["command"] = "tune";
    report["method"] = method_name(cfg.method);
    if (method_uses_lambda(cfg.method)) report["lambda"] = cfg.tune.lambda;
    if (method_uses_basis(cfg.method)) report["k"] = cfg.tune.k;
    report["shots"] = cfg.shots;
    report["mean_accuracy"] = agg.mean;
    report["std_accuracy"] = agg.std_dev;
    DenseMatrix prompt_input;
    const DenseMatrix* pi = nullptr;
    if (method_uses_basis(cfg.method)) {
        prompt_input = ctx.has_adapter ? mm_nn(ctx.batch.features, ctx.adapter)
                                       : ctx.batch.features;
        pi = &prompt_input;
    }
    report["runs"] = Json::array();
    for (const SeedOutcome& o : outs)
        report["runs"].push_back(detail::seed_json(cfg.method, o, pi));
    report["config"] = cfg.echo;
    std::ofstream rf(cfg.out_dir + "/report.json");
    if (!rf) throw ParseError(cfg.out_dir + "/report.json: cannot open for writing");
    rf << report.dump(1) << '\n';

    if (cfg.plots) write_tune_plots(cfg, outs);
}

inline void run_sweep(const RunConfig& cfg) {
    if (!method_uses_lambda(cfg.method))
        throw ValidationError("sweep: method must be gsfp or gsmfp");
    LoadedContext ctx = load_context(cfg);
    ensure_out_dir(cfg.out_dir);
    int ns = int(cfg.seeds.size());
    int jobs = int(cfg.lambda_grid.size()) * ns;
    std::vector<SeedOutcome> outs(jobs);
    parallel_for_jobs(jobs, cfg.threads, [&](int i) {
        double lambda = cfg.lambda_grid[i / ns];
        std::uint64_t seed = cfg.seeds[i % ns];
        outs[i] = run_single(ctx, cfg, cfg.method, lambda, seed);
    });

    std::string csv = std::string(kResultsHeader) + "\n";
    for (const SeedOutcome& o : outs) csv += csv_row(cfg.method, o) + "\n";
    write_text_file(cfg.out_dir + "/sweep.csv", csv);

    int best_idx = 0;
    double best_val = -1.0;
    std::vector<double> mean_val(cfg.lambda_grid.size()), mean_test(cfg.lambda_grid.size()),
        mean_nnz(cfg.lambda_grid.size()), mean_zr(cfg.lambda_grid.size());
    for (std::size_t li = 0; li < cfg.lambda_grid.size(); ++li) {
        double val = 0, test = 0, nnz = 0, zr = 0;
        for (int s = 0; s < ns; ++s) {
            const TrainResult& r = outs[li * ns + s].result;
            val += r.best_val_accuracy;
            test += r.test_accuracy;
            nnz += method_uses_vector(cfg.method) ? nnz_count(r.prompt.p)
                                                  : nnz_count(r.basis.P);
            zr += method_uses_basis(cfg.method) ? zero_row_count(r.basis.P) : 0;
        }
        mean_val[li] = val / ns;
        mean_test[li] = test / ns;
        mean_nnz[li] = nnz / ns;
        mean_zr[li] = zr / ns;
        if (mean_val[li] > best_val) {
            best_val = mean_val[li];
            best_idx = int(li);
        }
    }
    double best_lambda = cfg.lambda_grid[best_idx];

    Json report;
    report["command"] = "sweep";
    report["method"] = method_name(cfg.method);
    report["best_lambda"] = best_lambda;
    report["best_mean_val_accuracy"] = best_val;
    report["grid"] = Json::array();
    for (std::size_t li = 0; li < cfg.lambda_grid.size(); ++li) {
        Json row;
        row["lambda"] = cfg.lambda_grid[li];
        row["mean_val_accuracy"] = mean_val[li];
        row["mean_test_accuracy"] = mean_test[li];
        row["mean_nnz"] = mean_nnz[li];
        if (method_uses_basis(cfg.method)) row["mean_zero_rows"] = mean_zr[li];
        report["grid"].push_back(std::move(row));
    }
    report["config"] = cfg.echo;
    std::ofstream rf(cfg.out_dir + "/sweep_report.json");
    if (!rf) throw ParseError(cfg.out_dir + "/sweep_report.json: cannot open for writing");
    rf << report.dump(1) << '\n';

    if (cfg.plots) {
        std::vector<std::string> tick_labels;
        for (double l : cfg.lambda_grid) tick_labels.push_back(num_str(l));
        std::vector<double> idx;
        for (std::size_t i = 0; i < cfg.lambda_grid.size(); ++i) idx.push_back(double(i));
        write_text_file(cfg.out_dir + "/accuracy_vs_lambda.svg",
                        line_chart_svg("accuracy vs lambda (" + method_name(cfg.method) + ")",
                                       "lambda", "accuracy",
                                       {{"mean val", idx, mean_val},
                                        {"mean test", idx, mean_test}},
                                       tick_labels));
        std::vector<Series> sp = {{"mean nnz", idx, mean_nnz}};
        if (method_uses_basis(cfg.method)) sp.push_back({"mean zero rows", idx, mean_zr});
        write_text_file(cfg.out_dir + "/sparsity_vs_lambda.svg",
                        line_chart_svg("sparsity vs lambda (" + method_name(cfg.method) + ")",
                                       "lambda", "count", sp, tick_labels));
    }
}

// Two-decimal percent cell, the Table II shape.
inline std::string mean_std_cell(double mean, double std_dev) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.2f±%.2f", 100.0 * mean, 100.0 * std_dev);
    return buf;
}

inline void run_report(const std::vector<std::string>& run_dirs, const std::string& out_dir) {
    if (run_dirs.empty()) throw ValidationError("report: no run directories given");
    struct Row {
        std::string dir, method, lambda, cell;
        double mean, stddev;
        int n;
    };
    std::vector<Row> rows;
    for (const std::string& dir : run_dirs) {
        std::string path = dir + "/report.json";
        Json j = detail::parse_file(path);
        Row r;
        r.dir = dir;
        r.method = j.at("method").get<std::string>();
        r.lambda = j.contains("lambda") ? num_str(j["lambda"].get<double>()) : "";
        std::vector<double> accs;
        for (const Json& run : j.at("runs")) accs.push_back(run.at("accuracy").get<double>());
        Aggregate agg = aggregate_runs(accs);
        r.mean = agg.mean;
        r.stddev = agg.std_dev;
        r.n = agg.n;
        r.cell = mean_std_cell(agg.mean, agg.std_dev);
        rows.push_back(std::move(r));
    }

    ensure_out_dir(out_dir);
    std::string csv = "dir,method,lambda,seeds,mean_accuracy,std_accuracy,cell\n";
    for (const Row& r : rows)
        csv += r.dir + "," + r.method + "," + r.lambda + "," + std::to_string(r.n) + "," +
               num_str(r.mean) + "," + num_str(r.stddev) + "," + r.cell + "\n";
    write_text_file(out_dir + "/comparison.csv", csv);

    std::size_t wd = 3, wm = 6;
    for (const Row& r : rows) {
        wd = std::max(wd, r.dir.size());
        wm = std::max(wm, r.method.size());
    }
    std::string text;
    auto pad = [](const std::string& s, std::size_t w) {
        return s + std::string(w - s.size(), ' ');
    };
    text += pad("dir", wd) + "  " + pad("method", wm) + "  " + pad("lambda", 8) +
            "  accuracy (%)\n";
    for (const Row& r : rows)
        text += pad(r.dir, wd) + "  " + pad(r.method, wm) + "  " +
                pad(r.lambda.empty() ? "-" : r.lambda, 8) + "  " + r.cell + "\n";
    write_text_file(out_dir + "/comparison.txt", text);
    std::fputs(text.c_str(), stdout);
}

}  // namespace gsp
