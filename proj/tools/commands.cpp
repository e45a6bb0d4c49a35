#include "commands.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "rankwatch/eval.hpp"
#include "rankwatch/fisher.hpp"
#include "rankwatch/hashrank.hpp"
#include "rankwatch/ingestion.hpp"
#include "rankwatch/parallel.hpp"
#include "rankwatch/synth.hpp"
#include "rankwatch/toprank.hpp"

namespace rankwatch::cli {

using nlohmann::json;

std::string format_g(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

void to_json(json& j, const DetectParams& p) {
    j = json{{"input", p.input},   {"format", p.format},     {"metric", p.metric},
             {"method", p.method}, {"delta", p.delta},       {"window", p.window},
             {"top", p.top},       {"keep", p.keep},         {"alpha", p.alpha},
             {"budget", p.budget}, {"rows", p.rows},         {"buckets", p.buckets},
             {"seed", p.seed},     {"on_error", p.on_error}, {"threads", p.threads}};
}

void from_json(const json& j, DetectParams& p) {
    j.at("input").get_to(p.input);
    j.at("format").get_to(p.format);
    j.at("metric").get_to(p.metric);
    j.at("method").get_to(p.method);
    j.at("delta").get_to(p.delta);
    j.at("window").get_to(p.window);
    j.at("top").get_to(p.top);
    j.at("keep").get_to(p.keep);
    j.at("alpha").get_to(p.alpha);
    j.at("budget").get_to(p.budget);
    j.at("rows").get_to(p.rows);
    j.at("buckets").get_to(p.buckets);
    j.at("seed").get_to(p.seed);
    j.at("on_error").get_to(p.on_error);
    j.at("threads").get_to(p.threads);
}

void to_json(json& j, const SimulateParams& p) {
    j = json{{"dim", p.dim},
             {"bins", p.bins},
             {"change_at", p.change_at},
             {"factor", p.factor},
             {"target_rank", p.target_rank},
             {"pareto_shape", p.pareto_shape},
             {"pareto_scale", p.pareto_scale},
             {"seed", p.seed}};
}

void from_json(const json& j, SimulateParams& p) {
    j.at("dim").get_to(p.dim);
    j.at("bins").get_to(p.bins);
    j.at("change_at").get_to(p.change_at);
    j.at("factor").get_to(p.factor);
    j.at("target_rank").get_to(p.target_rank);
    j.at("pareto_shape").get_to(p.pareto_shape);
    j.at("pareto_scale").get_to(p.pareto_scale);
    j.at("seed").get_to(p.seed);
}

void to_json(json& j, const RocParams& p) {
    j = json{{"data", p.data},       {"method", p.method}, {"runs", p.runs},
             {"budget", p.budget},   {"top", p.top},       {"rows", p.rows},
             {"buckets", p.buckets}, {"thresholds", p.thresholds}, {"threads", p.threads}};
}

void from_json(const json& j, RocParams& p) {
    j.at("data").get_to(p.data);
    j.at("method").get_to(p.method);
    j.at("runs").get_to(p.runs);
    j.at("budget").get_to(p.budget);
    j.at("top").get_to(p.top);
    j.at("rows").get_to(p.rows);
    j.at("buckets").get_to(p.buckets);
    j.at("thresholds").get_to(p.thresholds);
    j.at("threads").get_to(p.threads);
}

void to_json(json& j, const FisherParams& p) {
    j = json{{"theta", p.theta}, {"dims", p.dims}, {"density", p.density},
             {"mc", p.mc},       {"seed", p.seed}, {"grid", p.grid},
             {"dtheta", p.dtheta}, {"threads", p.threads}};
}

void from_json(const json& j, FisherParams& p) {
    j.at("theta").get_to(p.theta);
    j.at("dims").get_to(p.dims);
    j.at("density").get_to(p.density);
    j.at("mc").get_to(p.mc);
    j.at("seed").get_to(p.seed);
    j.at("grid").get_to(p.grid);
    j.at("dtheta").get_to(p.dtheta);
    j.at("threads").get_to(p.threads);
}

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw UsageError(what);
}

// Library validators throw invalid_argument; surface those as usage errors.
template <typename Fn>
void as_usage(Fn&& fn) {
    try {
        fn();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
}

Method parse_method(const std::string& s) {
    if (s == "toprank") return Method::toprank;
    if (s == "hashrank") return Method::hashrank;
    if (s == "full") return Method::comprehensive;
    throw UsageError("unknown method '" + s + "' (toprank, hashrank, full)");
}

SynthConfig synth_config(const SimulateParams& p) {
    SynthConfig c;
    c.dim = p.dim;
    c.bins = p.bins;
    c.pareto_shape = p.pareto_shape;
    c.pareto_scale = p.pareto_scale;
    c.change_rank = p.target_rank;
    c.change_bin = p.change_at;
    c.factor = p.factor;
    c.seed = p.seed;
    return c;
}

WindowConfig window_config(const DetectParams& p) {
    WindowConfig c;
    c.delta = p.delta;
    c.bins_per_window = p.window;
    c.top_m = p.top;
    c.keep_mprime = p.keep;
    c.level_alpha = p.alpha;
    c.metric = parse_metric(p.metric).value_or(MetricKind::syn_flood);
    return c;
}

RocConfig roc_config(const RocParams& p) {
    RocConfig c;
    c.synth = synth_config(p.data);
    c.runs = p.runs;
    c.thresholds = p.thresholds.empty() ? default_thresholds() : p.thresholds;
    c.top_m = p.top;
    c.budget = p.budget;
    c.rows = p.rows;
    c.buckets = p.buckets;
    c.threads = p.threads;
    return c;
}

std::vector<WindowBatch> load_windows(const DetectParams& p, std::istream& in) {
    try {
        if (p.format == "dense") return read_dense_csv(in, p.window).windows;
        const auto policy = p.on_error == "skip" ? ErrorPolicy::skip : ErrorPolicy::abort;
        auto result = read_flow_csv(in, policy);
        for (const auto& e : result.skipped) {
            std::cerr << p.input << ": skipped " << e.what() << '\n';
        }
        return partition_windows(result.records, window_config(p));
    } catch (const ParseError& e) {
        throw DataError(p.input + ": " + e.what());
    }
}

}  // namespace

void validate(const DetectParams& p) {
    require(!p.input.empty(), "--input is required");
    require(p.format == "flow" || p.format == "dense", "--format must be flow or dense");
    require(parse_metric(p.metric).has_value(), "unknown metric '" + p.metric + "'");
    const auto method = parse_method(p.method);
    require(p.on_error == "abort" || p.on_error == "skip", "--on-error must be abort or skip");
    require(p.format == "flow" || p.on_error == "abort", "--on-error skip applies to flow input only");
    require(p.budget >= 0, "--budget must be non-negative");
    require(p.budget == 0 || method == Method::toprank, "--budget applies to --method toprank only");
    require(p.threads >= 1, "--threads must be at least 1");
    require(p.alpha > 0.0 && p.alpha < 1.0, "--alpha must lie in (0, 1)");
    require(p.rows >= 1 && p.buckets >= 2, "need --rows >= 1 and --buckets >= 2");
    as_usage([&] { window_config(p).validate(); });
}

void validate(const SimulateParams& p) {
    as_usage([&] { synth_config(p).validate(); });
}

void validate(RocParams& p) {
    require(p.method == "all" || p.method == "toprank" || p.method == "hashrank" || p.method == "full",
            "unknown method '" + p.method + "' (all, toprank, hashrank, full)");
    require(p.threads >= 1, "--threads must be at least 1");
    if (p.thresholds.empty()) p.thresholds = default_thresholds();
    as_usage([&] { roc_config(p).validate(); });
}

void validate(const FisherParams& p) {
    require(p.theta > 0.0 && p.theta < 1.0, "--theta must lie in (0, 1)");
    require(!p.dims.empty(), "--dims must list at least one dimension");
    for (int d : p.dims) require(d >= 2, "every D in --dims must be at least 2");
    require(fisher::builtin_density(p.density).has_value(),
            "unknown density '" + p.density + "' (built-in: beta33)");
    require(p.mc >= 2, "--mc must be at least 2");
    require(p.grid == 0 || (p.grid >= (1 << 14) && (p.grid & (p.grid - 1)) == 0),
            "--grid must be 0 or a power of two >= 16384");
    require(p.dtheta >= 0.0 && p.dtheta < 0.1 * p.theta && p.theta + p.dtheta < 1.0,
            "--dtheta must be below theta / 10 and keep theta + dtheta below 1");
    require(p.threads >= 1, "--threads must be at least 1");
}

void run_detect(const DetectParams& p, std::ostream& out) {
    validate(p);
    const auto method = parse_method(p.method);
    const auto cfg = window_config(p);

    std::vector<WindowBatch> windows;
    if (p.input == "-") {
        windows = load_windows(p, std::cin);
    } else {
        std::ifstream in(p.input);
        if (!in) throw DataError("cannot open " + p.input);
        windows = load_windows(p, in);
    }

    const auto coeffs = method == Method::hashrank
                            ? sample_coefficients(p.seed, p.rows, p.buckets)
                            : std::vector<HashCoefficients>{};
    const std::optional<int> budget = p.budget > 0 ? std::optional<int>(p.budget) : std::nullopt;

    std::vector<std::vector<Alarm>> alarms(windows.size());
    parallel_for(windows.size(), p.threads, [&](std::size_t w) {
        const auto& batch = windows[w];
        switch (method) {
            case Method::toprank: alarms[w] = run_window(batch, cfg, budget); break;
            case Method::hashrank: alarms[w] = run_window_hashrank(batch, coeffs, p.alpha); break;
            case Method::comprehensive: alarms[w] = comprehensive(batch, p.alpha); break;
        }
    });

    out << "window,key,method,p_value,statistic,change_bin\n";
    for (const auto& window : alarms) {
        for (const auto& a : window) {
            out << a.window_index << ',' << a.key << ',' << to_string(a.method) << ','
                << format_g(a.p_value) << ',' << format_g(a.statistic) << ',' << a.change_bin << '\n';
        }
    }
}

void run_simulate(const SimulateParams& p, std::ostream& out) {
    validate(p);
    const auto ds = generate(synth_config(p));
    write_dense_csv(out, to_window_batch(ds),
                    GroundTruth{ds.anomalous_key(), ds.change_bin, ds.factor});
}

void run_roc(const RocParams& params, std::ostream& out) {
    RocParams p = params;
    validate(p);
    const auto cfg = roc_config(p);
    std::vector<Method> methods;
    if (p.method == "all") {
        methods = {Method::toprank, Method::hashrank, Method::comprehensive};
    } else {
        methods = {parse_method(p.method)};
    }
    out << "method,threshold,fa_rate,det_rate\n";
    for (const auto m : methods) {
        for (const auto& pt : roc(cfg, m)) {
            out << to_string(m) << ',' << format_g(pt.threshold, 10) << ',' << format_g(pt.fa_rate, 10)
                << ',' << format_g(pt.det_rate, 10) << '\n';
        }
    }
}

void run_fisher(const FisherParams& p, std::ostream& out) {
    validate(p);
    const auto& d = fisher::builtin_density(p.density)->get();
    const std::size_t n = p.dims.size();
    std::vector<fisher::FisherEstimate> results(2 * n);
    parallel_for(2 * n, p.threads, [&](std::size_t job) {
        const int dim = p.dims[job / 2];
        if (job % 2 == 0) {
            results[job] = fisher::estimate_info_max(d, p.theta, dim, p.mc,
                                                     substream_seed(p.seed, static_cast<std::uint64_t>(dim)));
        } else {
            const int grid = p.grid > 0 ? p.grid : fisher::default_grid_size(dim, p.theta);
            try {
                results[job] = fisher::estimate_info_sum(d, p.theta, dim, grid, p.dtheta);
            } catch (const fisher::ResolutionError& e) {
                throw DataError(std::string(e.what()) + " (D=" + std::to_string(dim) + ")");
            }
        }
    });
    out << "method,D,theta,estimate,target\n";
    for (const auto& r : results) {
        out << (r.method == fisher::Method::max_analytic ? "MAX_ANALYTIC" : "SUM_FFT") << ',' << r.dim
            << ',' << format_g(r.theta, 10) << ',' << format_g(r.value, 10) << ','
            << format_g(r.target, 10) << '\n';
    }
}

json make_manifest(const std::string& command, const json& params, const std::string& output) {
    return json{{"command", command},
                {"params", params},
                {"output", output},
                {"version", tool_version}};
}

void replay(const json& manifest, std::ostream& out) {
    try {
        const auto command = manifest.at("command").get<std::string>();
        const auto& params = manifest.at("params");
        if (command == "detect") {
            run_detect(params.get<DetectParams>(), out);
        } else if (command == "simulate") {
            run_simulate(params.get<SimulateParams>(), out);
        } else if (command == "roc") {
            run_roc(params.get<RocParams>(), out);
        } else if (command == "fisher") {
            run_fisher(params.get<FisherParams>(), out);
        } else {
            throw DataError("manifest names unknown command '" + command + "'");
        }
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed manifest: ") + e.what());
    }
}

}  // namespace rankwatch::cli
