#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "commands.hpp"

namespace {

using namespace rankwatch::cli;
using nlohmann::json;

struct OutputFlags {
    std::string output;    // empty: stdout
    std::string manifest;  // empty: <output>.manifest.json when --output is given
};

void add_output_flags(CLI::App* cmd, OutputFlags& o) {
    cmd->add_option("-o,--output", o.output, "Write CSV here instead of stdout");
    cmd->add_option("--manifest", o.manifest, "Write the run manifest here");
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot write " + path);
    f << text;
    if (!f) throw DataError("write failed on " + path);
}

template <typename Params, typename Run>
void execute(const std::string& command, const Params& params, const OutputFlags& o, Run run) {
    std::ostringstream buf;
    run(params, buf);
    if (o.output.empty()) {
        std::cout << buf.str();
    } else {
        write_file(o.output, buf.str());
    }
    std::string manifest_path = o.manifest;
    if (manifest_path.empty() && !o.output.empty()) manifest_path = o.output + ".manifest.json";
    if (!manifest_path.empty()) {
        write_file(manifest_path, make_manifest(command, json(params), o.output).dump(2) + "\n");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Rank-based change-point detection on per-key traffic counts"};
    app.set_version_flag("--version", tool_version);
    app.require_subcommand(1);

    DetectParams detect;
    OutputFlags detect_out;
    auto* d = app.add_subcommand("detect", "Detect change points in a flow or dense CSV");
    d->add_option("-i,--input", detect.input, "Input CSV, '-' for stdin")->required();
    d->add_option("--format", detect.format, "flow | dense")->capture_default_str();
    d->add_option("--metric", detect.metric, "syn | udp | portscan | netscan")->capture_default_str();
    d->add_option("--method", detect.method, "toprank | hashrank | full")->capture_default_str();
    d->add_option("--delta", detect.delta, "Bin length in seconds")->capture_default_str();
    d->add_option("--window", detect.window, "Bins per window (P)")->capture_default_str();
    d->add_option("--top", detect.top, "Records kept per bin (M)")->capture_default_str();
    d->add_option("--keep", detect.keep, "Top ranks turned into candidates (M')")->capture_default_str();
    d->add_option("--alpha", detect.alpha, "Test level")->capture_default_str();
    d->add_option("--budget", detect.budget, "TopRank series budget, 0 for the M' rule")->capture_default_str();
    d->add_option("--rows", detect.rows, "HashRank sketch rows (L)")->capture_default_str();
    d->add_option("--buckets", detect.buckets, "HashRank buckets per row (K)")->capture_default_str();
    d->add_option("--seed", detect.seed, "HashRank hash seed")->capture_default_str();
    d->add_option("--on-error", detect.on_error, "abort | skip malformed flow lines")->capture_default_str();
    d->add_option("--threads", detect.threads, "Worker threads")->capture_default_str();
    add_output_flags(d, detect_out);

    SimulateParams sim;
    OutputFlags sim_out;
    auto* s = app.add_subcommand("simulate", "Generate a synthetic dataset with one change point");
    s->add_option("--dim", sim.dim, "Number of keys (D)")->capture_default_str();
    s->add_option("--bins", sim.bins, "Number of bins (P)")->capture_default_str();
    s->add_option("--change-at", sim.change_at, "Last bin at the base rate")->capture_default_str();
    s->add_option("--factor", sim.factor, "Rate multiplier after the change")->capture_default_str();
    s->add_option("--target-rank", sim.target_rank, "Intensity rank of the changed key")->capture_default_str();
    s->add_option("--pareto-shape", sim.pareto_shape)->capture_default_str();
    s->add_option("--pareto-scale", sim.pareto_scale)->capture_default_str();
    s->add_option("--seed", sim.seed)->capture_default_str();
    add_output_flags(s, sim_out);

    RocParams roc;
    OutputFlags roc_out;
    auto* r = app.add_subcommand("roc", "Monte Carlo ROC curves on synthetic data");
    r->add_option("--method", roc.method, "all | toprank | hashrank | full")->capture_default_str();
    r->add_option("--runs", roc.runs)->capture_default_str();
    r->add_option("--budget", roc.budget, "TopRank series budget")->capture_default_str();
    r->add_option("--top", roc.top, "TopRank records per bin (M)")->capture_default_str();
    r->add_option("--rows", roc.rows)->capture_default_str();
    r->add_option("--buckets", roc.buckets)->capture_default_str();
    r->add_option("--thresholds", roc.thresholds, "Comma-separated, ascending in [0, 1]")->delimiter(',');
    r->add_option("--threads", roc.threads)->capture_default_str();
    r->add_option("--dim", roc.data.dim)->capture_default_str();
    r->add_option("--bins", roc.data.bins)->capture_default_str();
    r->add_option("--change-at", roc.data.change_at)->capture_default_str();
    r->add_option("--factor", roc.data.factor)->capture_default_str();
    r->add_option("--target-rank", roc.data.target_rank)->capture_default_str();
    r->add_option("--pareto-shape", roc.data.pareto_shape)->capture_default_str();
    r->add_option("--pareto-scale", roc.data.pareto_scale)->capture_default_str();
    r->add_option("--seed", roc.data.seed, "Base seed; run r uses seed + r")->capture_default_str();
    add_output_flags(r, roc_out);

    FisherParams fis;
    OutputFlags fis_out;
    auto* f = app.add_subcommand("fisher", "Fisher information of the max and the sum");
    f->add_option("--theta", fis.theta)->capture_default_str();
    f->add_option("--dims", fis.dims, "Comma-separated list of D")->delimiter(',')->capture_default_str();
    f->add_option("--density", fis.density)->capture_default_str();
    f->add_option("--mc", fis.mc, "Monte Carlo draws per D")->capture_default_str();
    f->add_option("--seed", fis.seed)->capture_default_str();
    f->add_option("--grid", fis.grid, "FFT grid size, 0 for automatic")->capture_default_str();
    f->add_option("--dtheta", fis.dtheta, "Finite-difference step, 0 for 1e-4 theta")->capture_default_str();
    f->add_option("--threads", fis.threads)->capture_default_str();
    add_output_flags(f, fis_out);

    std::string manifest_in;
    std::string replay_output;
    auto* rp = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
    rp->add_option("manifest", manifest_in, "Manifest JSON")->required();
    rp->add_option("-o,--output", replay_output, "Override the recorded output path, '-' for stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*d) {
            execute("detect", detect, detect_out, run_detect);
        } else if (*s) {
            execute("simulate", sim, sim_out, run_simulate);
        } else if (*r) {
            validate(roc);  // records the resolved threshold grid in the manifest
            execute("roc", roc, roc_out, run_roc);
        } else if (*f) {
            execute("fisher", fis, fis_out, run_fisher);
        } else if (*rp) {
            std::ifstream in(manifest_in);
            if (!in) throw DataError("cannot open " + manifest_in);
            json manifest;
            try {
                in >> manifest;
            } catch (const json::exception& e) {
                throw DataError(manifest_in + ": " + e.what());
            }
            std::string target = manifest.value("output", std::string());
            if (!replay_output.empty()) target = replay_output == "-" ? "" : replay_output;
            std::ostringstream buf;
            replay(manifest, buf);
            if (target.empty()) {
                std::cout << buf.str();
            } else {
                write_file(target, buf.str());
            }
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
