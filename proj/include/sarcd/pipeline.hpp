#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <map>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "sarcd/classifier.hpp"
#include "sarcd/error.hpp"
#include "sarcd/evalstat.hpp"
#include "sarcd/pcanet.hpp"
#include "sarcd/raster.hpp"
#include "sarcd/rng.hpp"
#include "sarcd/sampling.hpp"
#include "sarcd/synthgen.hpp"

namespace sarcd {

// One training/detection run, fully determined by these fields plus the
// input scene. All randomness is split from `seed` per purpose.
struct RunConfig {
    int h = 7;
    int k = 5;
    int l1 = 8;
    int l2 = 8;
    int block_side = 0; // 0 means "use h"
    int radius = 2;
    Strategy strategy = Strategy::obuc;
    double rate = 0.05;
    std::uint64_t seed = 0;
    double lambda = 5e-4;
    int epochs = 1500;
    long long n_max = 50000;
    bool normalize_hist = true;
    double offset = 1.0; // log-ratio guard, pseudolabel strategy only
    double tau = 0.5;    // pseudolabel confidence fraction
};

struct TrainStats {
    long long omega_b = 0;
    long long omega_c = 0;
    long long omega_u = 0;
    long long n_samples = 0;
    long long n_changed = 0;
    long long n_unchanged = 0;
    long long feature_dim = 0;
    FitInfo fit;
};

inline TrainingSet draw_training_set(const TemporalPair& pair, const ReferenceMap& ref,
                                     const SamplePartition& part, const RunConfig& cfg,
                                     Rng& rng) {
    switch (cfg.strategy) {
    case Strategy::uc:
        return draw_uc(ref, cfg.rate, rng);
    case Strategy::buc:
        return draw_buc(part, ref, cfg.rate, rng);
    case Strategy::obuc:
        return oversample_balance(draw_buc(part, ref, cfg.rate, rng), rng);
    case Strategy::pseudo:
        return pseudolabel_baseline(log_ratio(pair, cfg.offset), cfg.tau, rng);
    case Strategy::generalize:
        return draw_generalize(part, ref, rng);
    }
    throw param_error("draw_training_set: unknown strategy");
}

// Rejects invalid configuration up front, before any sampling or filter
// work happens.
inline void validate_config(const RunConfig& cfg) {
    if (cfg.h < 1 || cfg.h % 2 == 0)
        throw param_error("config: patch side must be odd and positive");
    if (cfg.k < 1 || cfg.k % 2 == 0)
        throw param_error("config: filter side must be odd and positive");
    if (cfg.k > cfg.h)
        throw param_error("config: filter side exceeds patch side");
    if (cfg.l1 < 1 || cfg.l1 > cfg.k * cfg.k)
        throw param_error("config: stage-1 filter count outside [1, k^2]");
    if (cfg.l2 < 1 || cfg.l2 > cfg.k * cfg.k || cfg.l2 > 24)
        throw param_error("config: stage-2 filter count outside [1, min(k^2, 24)]");
    if (cfg.radius < 0)
        throw param_error("config: dilation radius must be >= 0");
    if (!(cfg.lambda > 0.0))
        throw param_error("config: lambda must be positive");
    if (cfg.epochs < 1)
        throw param_error("config: epochs must be >= 1");
    if (cfg.n_max < 1)
        throw param_error("config: training window budget must be >= 1");
    const bool uses_rate = cfg.strategy == Strategy::uc || cfg.strategy == Strategy::buc ||
                           cfg.strategy == Strategy::obuc;
    if (uses_rate && (!(cfg.rate > 0.0) || cfg.rate > 1.0))
        throw param_error("config: sampling rate must be in (0, 1]");
    if (cfg.strategy == Strategy::pseudo) {
        if (!(cfg.tau > 0.0) || cfg.tau > 1.0)
            throw param_error("config: pseudolabel confidence must be in (0, 1]");
        if (!(cfg.offset > 0.0))
            throw param_error("config: log-ratio offset must be positive");
    }
    const int block_side = cfg.block_side > 0 ? cfg.block_side : cfg.h;
    feature_length(cfg.h, block_side, cfg.l1, cfg.l2); // divisibility check
}

// partition -> draw samples -> fit filter banks on the sample coordinates ->
// extract features -> train the linear classifier.
inline PcaNetModel train_pipeline(const TemporalPair& pair, const ReferenceMap& ref,
                                  const RunConfig& cfg, TrainStats* stats = nullptr) {
    if (pair.t1.width != ref.width || pair.t1.height != ref.height)
        throw format_error("train_pipeline: pair and reference dimensions disagree");
    validate_config(cfg);
    const int block_side = cfg.block_side > 0 ? cfg.block_side : cfg.h;

    const SamplePartition part = partition(ref, cfg.radius);
    Rng sampling_rng(derive_seed(cfg.seed, RngPurpose::sampling));
    const TrainingSet ts = draw_training_set(pair, ref, part, cfg, sampling_rng);

    std::vector<Coord> coords;
    coords.reserve(ts.samples.size());
    std::vector<int> labels;
    labels.reserve(ts.samples.size());
    for (const Sample& s : ts.samples) {
        coords.push_back(s.at);
        labels.push_back(s.label);
    }

    FitParams fit_params;
    fit_params.h = cfg.h;
    fit_params.k = cfg.k;
    fit_params.l1 = cfg.l1;
    fit_params.l2 = cfg.l2;
    fit_params.n_max = cfg.n_max;
    Rng fit_rng(derive_seed(cfg.seed, RngPurpose::filter_windows));
    FitInfo fit_info;
    StageBanks banks = fit_feature_extractor(pair, coords, fit_params, fit_rng, &fit_info);

    PcaNetModel model;
    model.h = cfg.h;
    model.k = cfg.k;
    model.block_side = block_side;
    model.normalize_hist = cfg.normalize_hist;
    model.stage1 = std::move(banks.stage1);
    model.stage2 = std::move(banks.stage2);

    FeatureWorkspace ws;
    std::vector<std::vector<double>> features(coords.size());
    for (std::size_t i = 0; i < coords.size(); ++i)
        extract_feature_into(model, pair, coords[i], ws, features[i]);

    model.classifier = train_linear(features, labels, cfg.lambda, cfg.epochs,
                                    derive_seed(cfg.seed, RngPurpose::classifier_shuffle));

    if (stats) {
        stats->omega_b = part.omega_b.count();
        stats->omega_c = part.omega_c.count();
        stats->omega_u = part.omega_u.count();
        stats->n_samples = static_cast<long long>(ts.samples.size());
        stats->n_changed = ts.n_changed;
        stats->n_unchanged = ts.n_unchanged;
        stats->feature_dim = static_cast<long long>(model.classifier.weights.size());
        stats->fit = fit_info;
    }
    return model;
}

// Classifies every pixel. Workers split the image into contiguous row
// bands; the output does not depend on the worker count.
inline ReferenceMap detect_map(const PcaNetModel& model, const TemporalPair& pair,
                               int workers = 1) {
    if (model.stage1.filters.empty() || model.stage2.filters.empty())
        throw param_error("detect_map: model has no trained filter banks");
    const int height = pair.t1.height;
    const int width = pair.t1.width;
    ReferenceMap out(width, height);

    int n_threads = workers;
    if (n_threads <= 0) {
        n_threads = static_cast<int>(std::thread::hardware_concurrency());
        if (n_threads < 1)
            n_threads = 1;
    }
    n_threads = std::min(n_threads, height);

    auto worker = [&](int row_begin, int row_end, std::exception_ptr& err) {
        try {
            FeatureWorkspace ws;
            std::vector<double> feature;
            for (int r = row_begin; r < row_end; ++r)
                for (int c = 0; c < width; ++c) {
                    extract_feature_into(model, pair, Coord{r, c}, ws, feature);
                    out.at(r, c) = static_cast<std::uint8_t>(predict(model.classifier, feature));
                }
        } catch (...) {
            err = std::current_exception();
        }
    };

    if (n_threads == 1) {
        std::exception_ptr err;
        worker(0, height, err);
        if (err)
            std::rethrow_exception(err);
        return out;
    }

    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_threads));
    const int rows_per = (height + n_threads - 1) / n_threads;
    for (int i = 0; i < n_threads; ++i) {
        const int begin = i * rows_per;
        const int end = std::min(height, begin + rows_per);
        threads.emplace_back(worker, begin, end, std::ref(errors[static_cast<std::size_t>(i)]));
    }
    for (std::thread& t : threads)
        t.join();
    for (const std::exception_ptr& err : errors)
        if (err)
            std::rethrow_exception(err);
    return out;
}

// --- benchmark ---------------------------------------------------------------

struct BenchConfig {
    std::vector<Strategy> strategies{Strategy::uc, Strategy::buc, Strategy::obuc};
    std::vector<double> rates{0.02, 0.05, 0.10};
    int runs = 10;
    RunConfig base;
    SceneSpec scene;          // synthetic source (scene seeds scene.seed + run)
    bool use_files = false;   // when set, pair/ref replace the synthetic scenes
    const TemporalPair* pair = nullptr;
    const ReferenceMap* ref = nullptr;
    int workers = 1;
};

inline std::string csv_num(double v) {
    if (std::isnan(v))
        return "NA";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string csv_opt(const std::optional<double>& v) {
    return v ? csv_num(*v) : "NA";
}

inline const char* bench_csv_header() {
    return "row,strategy,rate,seed,kappa,fa,missed,oe,pcc,n_changed,n_unchanged,"
           "mean,std,t,dof,p,note";
}

// Full protocol: every (strategy, rate) cell is run `runs` times; per-run
// rows are followed by per-cell mean/std rows and by Welch t-test rows
// comparing buc and obuc against uc at each rate. Strategies share the
// scene and the derived seed at equal run index, so per-run comparisons
// are paired. Cell failures become `fail` rows and the sweep continues.
inline void bench_run(const BenchConfig& cfg, std::ostream& out) {
    if (cfg.runs < 1)
        throw param_error("bench_run: runs must be >= 1");
    if (cfg.use_files && (!cfg.pair || !cfg.ref))
        throw param_error("bench_run: file mode without pair/reference");

    out << bench_csv_header() << "\n";

    std::vector<Scene> scenes;
    if (!cfg.use_files) {
        scenes.reserve(static_cast<std::size_t>(cfg.runs));
        for (int run = 0; run < cfg.runs; ++run) {
            SceneSpec spec = cfg.scene;
            spec.seed = cfg.scene.seed + static_cast<std::uint64_t>(run);
            scenes.push_back(generate_quantized_scene(spec));
        }
    }
    const std::uint64_t bench_seed = derive_seed(cfg.base.seed, RngPurpose::bench_run);

    std::map<std::pair<int, int>, std::vector<double>> cell_kappas; // (strategy idx, rate idx)
    for (std::size_t si = 0; si < cfg.strategies.size(); ++si) {
        for (std::size_t ri = 0; ri < cfg.rates.size(); ++ri) {
            for (int run = 0; run < cfg.runs; ++run) {
                const TemporalPair& pair =
                    cfg.use_files ? *cfg.pair : scenes[static_cast<std::size_t>(run)].pair;
                const ReferenceMap& ref =
                    cfg.use_files ? *cfg.ref : scenes[static_cast<std::size_t>(run)].ref;
                RunConfig rc = cfg.base;
                rc.strategy = cfg.strategies[si];
                rc.rate = cfg.rates[ri];
                rc.seed = derive_seed(bench_seed, static_cast<std::uint64_t>(run));
                try {
                    TrainStats stats;
                    const PcaNetModel model = train_pipeline(pair, ref, rc, &stats);
                    const ReferenceMap pred = detect_map(model, pair, cfg.workers);
                    const EvalReport rep = evaluate(pred, ref);
                    cell_kappas[{static_cast<int>(si), static_cast<int>(ri)}].push_back(rep.kappa);
                    out << "run," << strategy_name(rc.strategy) << "," << csv_num(rc.rate) << ","
                        << run << "," << csv_num(rep.kappa) << "," << csv_opt(rep.rates.false_alarm)
                        << "," << csv_opt(rep.rates.missed) << "," << csv_num(rep.rates.overall_error)
                        << "," << csv_num(rep.rates.pcc) << "," << stats.n_changed << ","
                        << stats.n_unchanged << ",,,,,,\n";
                } catch (const std::exception& e) {
                    std::string msg = e.what();
                    for (char& c : msg)
                        if (c == ',' || c == '\n')
                            c = ';';
                    out << "fail," << strategy_name(rc.strategy) << "," << csv_num(rc.rate) << ","
                        << run << ",,,,,,,,,,,,," << msg << "\n";
                }
            }
        }
    }

    for (std::size_t si = 0; si < cfg.strategies.size(); ++si)
        for (std::size_t ri = 0; ri < cfg.rates.size(); ++ri) {
            const auto it = cell_kappas.find({static_cast<int>(si), static_cast<int>(ri)});
            if (it == cell_kappas.end() || it->second.empty())
                continue;
            const RunAggregate agg = aggregate(it->second);
            out << "aggregate," << strategy_name(cfg.strategies[si]) << ","
                << csv_num(cfg.rates[ri]) << ",,,,,,,,," << csv_num(agg.mean) << ","
                << csv_opt(agg.std_dev) << ",,,,\n";
        }

    int uc_index = -1;
    for (std::size_t si = 0; si < cfg.strategies.size(); ++si)
        if (cfg.strategies[si] == Strategy::uc)
            uc_index = static_cast<int>(si);
    if (uc_index >= 0) {
        for (std::size_t ri = 0; ri < cfg.rates.size(); ++ri) {
            for (std::size_t si = 0; si < cfg.strategies.size(); ++si) {
                const Strategy s = cfg.strategies[si];
                if (s != Strategy::buc && s != Strategy::obuc)
                    continue;
                const auto a = cell_kappas.find({uc_index, static_cast<int>(ri)});
                const auto b = cell_kappas.find({static_cast<int>(si), static_cast<int>(ri)});
                if (a == cell_kappas.end() || b == cell_kappas.end() || a->second.size() < 2 ||
                    b->second.size() < 2)
                    continue;
                const TTestReport tt = welch_t_test(a->second, b->second);
                out << "ttest," << strategy_name(s) << "," << csv_num(cfg.rates[ri])
                    << ",,,,,,,,,,," << csv_num(tt.t_value) << "," << csv_num(tt.dof) << ","
                    << csv_num(tt.p_value) << ",vs uc\n";
            }
        }
    }
}

} // namespace sarcd
