// Command-line front end: train / detect / eval / bench / synth / partition.
// Exit codes: 0 ok, 2 usage, 3 data or format problem, 4 numerical degeneracy.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sarcd/error.hpp"
#include "sarcd/evalstat.hpp"
#include "sarcd/model_io.hpp"
#include "sarcd/pipeline.hpp"
#include "sarcd/raster.hpp"
#include "sarcd/sampling.hpp"
#include "sarcd/synthgen.hpp"

namespace {

using namespace sarcd;

struct CommonFlags {
    RunConfig run;
    std::string strategy = "obuc";
    std::string t1_path, t2_path, ref_path, model_path, out_path;
    int workers = 0; // 0 -> hardware concurrency
};

void add_network_flags(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--patch", f.run.h, "patch side h (odd)")->capture_default_str();
    cmd->add_option("--filter-size", f.run.k, "filter side k (odd)")->capture_default_str();
    cmd->add_option("--filters1", f.run.l1, "stage-1 filter count")->capture_default_str();
    cmd->add_option("--filters2", f.run.l2, "stage-2 filter count")->capture_default_str();
    cmd->add_option("--block", f.run.block_side,
                    "histogram block side (default: patch side)");
    cmd->add_option("--windows", f.run.n_max, "max training sub-windows per stage")
        ->capture_default_str();
    cmd->add_flag("!--raw-hist", f.run.normalize_hist,
                  "keep raw histogram counts instead of frequencies");
}

void add_sampling_flags(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--strategy", f.strategy, "uc|buc|obuc|pseudo|generalize")
        ->capture_default_str();
    cmd->add_option("--rate", f.run.rate, "training sample rate in (0,1]")
        ->capture_default_str();
    cmd->add_option("--radius", f.run.radius, "boundary dilation radius")
        ->capture_default_str();
    cmd->add_option("--lambda", f.run.lambda, "hinge regularization strength")
        ->capture_default_str();
    cmd->add_option("--epochs", f.run.epochs, "classifier training epochs")
        ->capture_default_str();
    cmd->add_option("--offset", f.run.offset, "log-ratio offset (pseudo strategy)")
        ->capture_default_str();
    cmd->add_option("--tau", f.run.tau, "pseudolabel confidence fraction")
        ->capture_default_str();
}

void print_train_stats(const TrainStats& stats) {
    std::cout << "partition: omega_b=" << stats.omega_b << " omega_c=" << stats.omega_c
              << " omega_u=" << stats.omega_u << "\n";
    std::cout << "samples: total=" << stats.n_samples << " changed=" << stats.n_changed
              << " unchanged=" << stats.n_unchanged << "\n";
    std::cout << "windows: stage1=" << stats.fit.stage1_windows
              << " stage2=" << stats.fit.stage2_windows
              << " (stage2 pool " << stats.fit.stage2_pool << " maps)\n";
    std::cout << "feature_dim: " << stats.feature_dim << "\n";
}

int run_cli(int argc, char** argv) {
    CLI::App app{"Supervised PCA-Net change detection for temporal SAR image pairs"};
    app.require_subcommand(1);

    CommonFlags f;
    SceneSpec scene;
    std::string strategies_arg = "uc,buc,obuc";
    std::string rates_arg = "0.02,0.05,0.1";
    int bench_runs = 10;
    std::string pred_path;

    auto* train = app.add_subcommand("train", "train a model on a labeled pair");
    train->add_option("--t1", f.t1_path, "first acquisition (PGM)")->required();
    train->add_option("--t2", f.t2_path, "second acquisition (PGM)")->required();
    train->add_option("--ref", f.ref_path, "reference change map (PGM)")->required();
    train->add_option("--model", f.model_path, "output model path")->required();
    train->add_option("--seed", f.run.seed, "master seed")->capture_default_str();
    add_network_flags(train, f);
    add_sampling_flags(train, f);

    auto* detect = app.add_subcommand("detect", "classify every pixel of a pair");
    detect->add_option("--model", f.model_path, "trained model path")->required();
    detect->add_option("--t1", f.t1_path, "first acquisition (PGM)")->required();
    detect->add_option("--t2", f.t2_path, "second acquisition (PGM)")->required();
    detect->add_option("--out", f.out_path, "output change map (PGM)")->required();
    detect->add_option("--workers", f.workers, "worker threads (0 = auto)")
        ->capture_default_str();

    auto* eval = app.add_subcommand("eval", "score a change map against a reference");
    eval->add_option("--pred", pred_path, "predicted change map (PGM)")->required();
    eval->add_option("--ref", f.ref_path, "reference change map (PGM)")->required();

    auto* bench = app.add_subcommand("bench", "strategy/rate sweep with repeated runs");
    bench->add_option("--strategies", strategies_arg, "comma list of strategies")
        ->capture_default_str();
    bench->add_option("--rates", rates_arg, "comma list of sampling rates")
        ->capture_default_str();
    bench->add_option("--runs", bench_runs, "repetitions per cell")->capture_default_str();
    bench->add_option("--out", f.out_path, "CSV output path (default: stdout)");
    bench->add_option("--seed", f.run.seed, "master seed")->capture_default_str();
    bench->add_option("--t1", f.t1_path, "optional fixed pair instead of synthetic scenes");
    bench->add_option("--t2", f.t2_path, "second acquisition of the fixed pair");
    bench->add_option("--ref", f.ref_path, "reference of the fixed pair");
    bench->add_option("--workers", f.workers, "worker threads (0 = auto)")
        ->capture_default_str();
    add_network_flags(bench, f);
    add_sampling_flags(bench, f);
    bench->add_option("--width", scene.width, "synthetic scene width")->capture_default_str();
    bench->add_option("--height", scene.height, "synthetic scene height")->capture_default_str();
    bench->add_option("--blobs", scene.n_blobs, "synthetic change discs")->capture_default_str();
    bench->add_option("--looks", scene.looks, "speckle looks")->capture_default_str();

    auto* synth = app.add_subcommand("synth", "generate a synthetic speckled scene");
    synth->add_option("--out", f.out_path, "output directory")->required();
    synth->add_option("--seed", scene.seed, "scene seed")->capture_default_str();
    synth->add_option("--width", scene.width, "scene width")->capture_default_str();
    synth->add_option("--height", scene.height, "scene height")->capture_default_str();
    synth->add_option("--blobs", scene.n_blobs, "change disc count")->capture_default_str();
    synth->add_option("--radius-min", scene.radius_min, "min disc radius")->capture_default_str();
    synth->add_option("--radius-max", scene.radius_max, "max disc radius")->capture_default_str();
    synth->add_option("--looks", scene.looks, "speckle looks")->capture_default_str();
    synth->add_option("--bg", scene.bg_level, "background reflectivity")->capture_default_str();
    synth->add_option("--fg", scene.fg_level, "changed-region reflectivity")
        ->capture_default_str();

    auto* part_cmd = app.add_subcommand("partition", "write the boundary/inner partition map");
    part_cmd->add_option("--ref", f.ref_path, "reference change map (PGM)")->required();
    part_cmd->add_option("--out", f.out_path, "output visualization (PGM)")->required();
    part_cmd->add_option("--radius", f.run.radius, "boundary dilation radius")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e); // prints help or the parse error
        return code == 0 ? 0 : 2;
    }

    if (train->parsed()) {
        f.run.strategy = strategy_from_name(f.strategy);
        const TemporalPair pair = load_pair(f.t1_path, f.t2_path);
        const ReferenceMap ref = load_reference(f.ref_path);
        TrainStats stats;
        const PcaNetModel model = train_pipeline(pair, ref, f.run, &stats);
        print_train_stats(stats);
        save_model(model, f.model_path);
        std::cout << "model written: " << f.model_path << "\n";
    } else if (detect->parsed()) {
        const PcaNetModel model = load_model(f.model_path);
        const TemporalPair pair = load_pair(f.t1_path, f.t2_path);
        const ReferenceMap pred = detect_map(model, pair, f.workers);
        save_reference(pred, f.out_path);
    } else if (eval->parsed()) {
        const ReferenceMap pred = load_reference(pred_path);
        const ReferenceMap ref = load_reference(f.ref_path);
        const EvalReport rep = evaluate(pred, ref);
        std::cout << "kappa,fa,missed,oe,pcc\n"
                  << csv_num(rep.kappa) << "," << csv_opt(rep.rates.false_alarm) << ","
                  << csv_opt(rep.rates.missed) << "," << csv_num(rep.rates.overall_error)
                  << "," << csv_num(rep.rates.pcc) << "\n";
    } else if (bench->parsed()) {
        BenchConfig bc;
        bc.base = f.run;
        bc.runs = bench_runs;
        bc.workers = f.workers;
        bc.scene = scene;
        bc.scene.seed = f.run.seed;
        bc.strategies.clear();
        std::stringstream ss(strategies_arg);
        for (std::string item; std::getline(ss, item, ',');)
            bc.strategies.push_back(strategy_from_name(item));
        bc.rates.clear();
        std::stringstream rs(rates_arg);
        for (std::string item; std::getline(rs, item, ',');) {
            try {
                bc.rates.push_back(std::stod(item));
            } catch (const std::exception&) {
                throw param_error("bench: bad rate '" + item + "'");
            }
        }
        TemporalPair pair;
        ReferenceMap ref;
        if (!f.t1_path.empty() || !f.t2_path.empty() || !f.ref_path.empty()) {
            if (f.t1_path.empty() || f.t2_path.empty() || f.ref_path.empty())
                throw param_error("bench: --t1, --t2 and --ref must be given together");
            pair = load_pair(f.t1_path, f.t2_path);
            ref = load_reference(f.ref_path);
            bc.use_files = true;
            bc.pair = &pair;
            bc.ref = &ref;
        }
        if (f.out_path.empty()) {
            bench_run(bc, std::cout);
        } else {
            std::ofstream out(f.out_path, std::ios::trunc);
            if (!out)
                throw format_error("cannot open '" + f.out_path + "' for writing");
            bench_run(bc, out);
        }
    } else if (synth->parsed()) {
        const Scene s = generate_quantized_scene(scene);
        const std::string dir = f.out_path;
        save_raster(s.pair.t1, dir + "/t1.pgm", 16);
        save_raster(s.pair.t2, dir + "/t2.pgm", 16);
        save_reference(s.ref, dir + "/ref.pgm");
        std::ofstream manifest(dir + "/scene.txt", std::ios::trunc);
        if (!manifest)
            throw format_error("cannot open '" + dir + "/scene.txt' for writing");
        manifest << "width=" << scene.width << "\nheight=" << scene.height
                 << "\nblobs=" << scene.n_blobs << "\nradius_min=" << scene.radius_min
                 << "\nradius_max=" << scene.radius_max << "\nlooks=" << scene.looks
                 << "\nbg=" << scene.bg_level << "\nfg=" << scene.fg_level
                 << "\nseed=" << scene.seed << "\nbit_depth=16\n";
        std::cout << "scene written to " << dir << "\n";
    } else if (part_cmd->parsed()) {
        const ReferenceMap ref = load_reference(f.ref_path);
        const SamplePartition part = partition(ref, f.run.radius);
        save_raster(partition_visualization(part), f.out_path, 8);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const sarcd::param_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const sarcd::degeneracy_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const sarcd::format_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
