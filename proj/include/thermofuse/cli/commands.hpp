#ifndef THERMOFUSE_CLI_COMMANDS_HPP
#define THERMOFUSE_CLI_COMMANDS_HPP

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "thermofuse/bench/timing.hpp"
#include "thermofuse/cli/chart.hpp"
#include "thermofuse/cli/config.hpp"
#include "thermofuse/data/class_weights.hpp"
#include "thermofuse/data/loader.hpp"
#include "thermofuse/data/manifest.hpp"
#include "thermofuse/data/split.hpp"
#include "thermofuse/explain/gradcam.hpp"
#include "thermofuse/explain/overlay.hpp"
#include "thermofuse/metrics/confusion.hpp"
#include "thermofuse/metrics/report.hpp"
#include "thermofuse/metrics/roc.hpp"
#include "thermofuse/nn/model.hpp"
#include "thermofuse/nn/train.hpp"
#include "thermofuse/synth/generator.hpp"
#include "thermofuse/thermal/pipeline.hpp"

namespace thermofuse::cli {

namespace fs = std::filesystem;

inline void write_text(const fs::path& p, const std::string& s) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << s;
}

inline void write_json(const fs::path& p, const nlohmann::json& j) {
    write_text(p, j.dump(2) + "\n");
}

inline std::string env_report() {
    std::ostringstream os;
    os << "compiler: " <<
#if defined(__clang__)
        "clang " << __clang_major__ << "." << __clang_minor__
#elif defined(__GNUC__)
        "gcc " << __GNUC__ << "." << __GNUC_MINOR__
#else
        "unknown"
#endif
       << "\nstandard: " << __cplusplus << "\neigen: " << EIGEN_WORLD_VERSION << "."
       << EIGEN_MAJOR_VERSION << "." << EIGEN_MINOR_VERSION << "\npointer_bits: "
       << 8 * sizeof(void*) << "\n";
    return os.str();
}

// ---------------------------------------------------------------- metrics io

inline nlohmann::json class_metrics_to_json(const metrics::ClassMetrics& c) {
    return {{"precision", c.precision}, {"recall", c.recall},
            {"f1", c.f1},               {"sensitivity", c.sensitivity},
            {"specificity", c.specificity}, {"defined", c.defined}};
}

inline metrics::ClassMetrics class_metrics_from_json(const nlohmann::json& j) {
    metrics::ClassMetrics c;
    c.precision = j.at("precision").get<double>();
    c.recall = j.at("recall").get<double>();
    c.f1 = j.at("f1").get<double>();
    c.sensitivity = j.at("sensitivity").get<double>();
    c.specificity = j.at("specificity").get<double>();
    c.defined = j.at("defined").get<bool>();
    return c;
}

inline nlohmann::json metrics_to_json(const metrics::MetricsReport& r) {
    nlohmann::json j;
    auto cm = nlohmann::json::array();
    for (int t = 0; t < r.cm.k; ++t) {
        auto row = nlohmann::json::array();
        for (int p = 0; p < r.cm.k; ++p) row.push_back(r.cm.at(t, p));
        cm.push_back(std::move(row));
    }
    j["confusion"] = std::move(cm);
    auto pc = nlohmann::json::array();
    for (std::size_t c = 0; c < r.per_class.size(); ++c) {
        nlohmann::json e = class_metrics_to_json(r.per_class[c]);
        e["support"] = c < r.support.size() ? r.support[c] : 0;
        if (c < r.auc_per_class.size() && r.auc_per_class[c])
            e["auc"] = *r.auc_per_class[c];
        else
            e["auc"] = nullptr;
        pc.push_back(std::move(e));
    }
    j["per_class"] = std::move(pc);
    j["macro"] = class_metrics_to_json(r.macro);
    j["mcc"] = r.mcc;
    j["accuracy"] = r.accuracy;
    if (r.auc_macro) j["auc"] = *r.auc_macro; else j["auc"] = nullptr;
    j["support"] = r.support;
    j["has_undefined"] = r.has_undefined;
    j["averaging"] = "macro";  // D19: macro, chosen for the class imbalance
    return j;
}

inline metrics::MetricsReport metrics_from_json(const nlohmann::json& j) {
    metrics::MetricsReport r;
    const auto& cm = j.at("confusion");
    const int k = int(cm.size());
    r.cm = metrics::ConfusionMatrix(k);
    for (int t = 0; t < k; ++t)
        for (int p = 0; p < k; ++p) {
            const auto v = cm[std::size_t(t)][std::size_t(p)].get<std::int64_t>();
            r.cm.m[std::size_t(t) * std::size_t(k) + std::size_t(p)] = v;
            r.cm.total += v;
        }
    for (const auto& e : j.at("per_class")) {
        r.per_class.push_back(class_metrics_from_json(e));
        r.support.push_back(e.at("support").get<std::int64_t>());
        if (e.at("auc").is_null())
            r.auc_per_class.emplace_back(std::nullopt);
        else
            r.auc_per_class.emplace_back(e.at("auc").get<double>());
    }
    r.macro = class_metrics_from_json(j.at("macro"));
    r.mcc = j.at("mcc").get<double>();
    r.accuracy = j.at("accuracy").get<double>();
    if (!j.at("auc").is_null()) r.auc_macro = j.at("auc").get<double>();
    r.has_undefined = j.at("has_undefined").get<bool>();
    return r;
}

inline std::string metrics_markdown_header() {
    return "| Model | Modality | Accuracy | Precision | Recall | F1 | Specificity | MCC | AUC |\n"
           "|---|---|---|---|---|---|---|---|---|";
}

// percentages with two decimals, like the published tables
inline std::string metrics_markdown_row(const std::string& model, const std::string& modality,
                                        const metrics::MetricsReport& r) {
    char auc[32];
    if (r.auc_macro)
        std::snprintf(auc, sizeof auc, "%.4f", *r.auc_macro);
    else
        std::snprintf(auc, sizeof auc, "n/a");
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "| %s | %s | %.2f | %.2f | %.2f | %.2f | %.2f | %.4f | %s |", model.c_str(),
                  modality.c_str(), 100 * r.accuracy, 100 * r.macro.precision,
                  100 * r.macro.recall, 100 * r.macro.f1, 100 * r.macro.specificity, r.mcc, auc);
    return buf;
}

inline std::string metrics_csv_row(const std::string& model, const std::string& modality,
                                   const metrics::MetricsReport& r) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s,%s,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f", model.c_str(),
                  modality.c_str(), r.accuracy, r.macro.precision, r.macro.recall, r.macro.f1,
                  r.macro.specificity, r.mcc, r.auc_macro.value_or(-1.0));
    return std::string("model,modality,accuracy,precision,recall,f1,specificity,mcc,auc\n") +
           buf + "\n";
}

// ------------------------------------------------------------- model helpers

inline nn::ModelConfig model_config_for(const RunConfig& cfg, std::uint64_t seed) {
    nn::ModelConfig mc;
    mc.backbone = nn::backbone_from_string(cfg.backbone).id;
    mc.modality = data::modality_from_string(cfg.modality);
    mc.inflation = nn::inflation_from_string(cfg.inflation);
    mc.pretrained_path = cfg.pretrained;
    mc.seed = seed;
    return mc;
}

inline data::SampleLoader make_loader(const RunConfig& cfg, const data::DatasetManifest& mf) {
    data::LoaderOptions opt;
    opt.modality = data::modality_from_string(cfg.modality);
    opt.input_size = nn::backbone_from_string(cfg.backbone).input_size;
    opt.window_step = cfg.window_step;
    opt.window_floor = cfg.window_floor;
    return data::SampleLoader(mf, opt);
}

template <typename T>
metrics::MetricsReport evaluate_ids(nn::Model<T>& model, data::SampleLoader& loader,
                                    const std::vector<std::string>& ids, int batch_size) {
    std::vector<int> y_true, y_pred;
    std::vector<double> probs;
    probs.reserve(ids.size() * std::size_t(data::kNumGrades));
    std::size_t at = 0;
    while (at < ids.size()) {
        const std::size_t take = std::min(std::size_t(batch_size), ids.size() - at);
        std::vector<data::FusedSample> batch;
        for (std::size_t i = 0; i < take; ++i) batch.push_back(loader.load(ids[at + i]));
        at += take;
        Tensor<T> x = data::stack_batch<T>(batch);
        Tensor<T> z = model.logits(x, false);
        Tensor<T> p = nn::softmax(z);
        for (std::size_t i = 0; i < take; ++i) {
            const T* pi = p.sample_ptr(int(i));
            int arg = 0;
            for (int c = 1; c < z.c; ++c)
                if (pi[c] > pi[arg]) arg = c;
            y_true.push_back(batch[i].label);
            y_pred.push_back(arg);
            for (int c = 0; c < z.c; ++c) probs.push_back(double(pi[c]));
        }
    }
    metrics::MetricsReport rep = metrics::evaluate(metrics::confusion(y_true, y_pred));
    try {
        const metrics::RocResult roc = metrics::roc_auc(y_true, probs, data::kNumGrades);
        rep.auc_per_class = roc.per_class;
        rep.auc_macro = roc.macro;
    } catch (const metrics::SingleClassOnly&) {
        // no class defined — leave AUC absent
    }
    return rep;
}

// ------------------------------------------------------------ fold execution

inline fs::path run_base(const RunConfig& cfg) {
    return fs::path(cfg.out) / (cfg.backbone + "_" + cfg.modality);
}

// One fold: train, snapshot artifacts, evaluate on the frozen test set.
// A fold whose metrics.json already exists is skipped wholesale — this is
// what makes interrupted sweeps resumable.
inline metrics::MetricsReport run_single_fold(const RunConfig& cfg,
                                              const data::DatasetManifest& manifest,
                                              data::SampleLoader& loader,
                                              const data::SplitPlan& split, int fold) {
    const fs::path run_dir = run_base(cfg) / ("fold" + std::to_string(fold));
    const fs::path done = run_dir / "metrics.json";
    if (fs::exists(done)) {
        std::cout << "  fold " << fold << ": already complete, skipping\n";
        std::ifstream in(done);
        nlohmann::json j;
        in >> j;
        return metrics_from_json(j);
    }
    fs::create_directories(run_dir);

    auto model = nn::build_model<float>(model_config_for(cfg, derive_seed(cfg.model_seed,
                                                                          std::uint64_t(fold))));
    const auto weights = data::class_weights(manifest, model.config.modality);

    nn::TrainConfig tc;
    tc.epochs = cfg.epochs;
    tc.batch_size = cfg.batch_size;
    tc.learning_rate = cfg.learning_rate;
    tc.optimizer_id = cfg.optimizer;
    tc.early_stop_patience = cfg.patience;
    tc.seed = derive_seed(cfg.train_seed, std::uint64_t(fold));
    tc.freeze_backbone = cfg.freeze_backbone;
    tc.augment = cfg.augment;

    const nn::TrainedRun run = nn::train(model, loader, split, fold, weights, tc);

    nlohmann::json rj;
    rj["config"] = config_to_json(cfg);
    rj["fold"] = fold;
    rj["model_seed"] = derive_seed(cfg.model_seed, std::uint64_t(fold));
    rj["train_seed"] = tc.seed;
    rj["split_seed"] = split.seed;
    rj["class_weights"] = weights.w;
    rj["best_epoch"] = run.best_epoch;
    rj["best_val_loss"] = run.best_epoch > 0 ? run.best_val_loss : 0.0;
    rj["early_stopped"] = run.early_stopped;
    rj["epochs_run"] = run.history.size();
    write_json(run_dir / "run.json", rj);
    nn::write_history_csv(run.history, run_dir / "history.csv");
    nn::save_checkpoint(model.net, run_dir / "best.ckpt");
    write_text(run_dir / "env.txt", env_report());

    metrics::MetricsReport rep =
        evaluate_ids(model, loader, split.test_id_list(), cfg.batch_size);
    write_json(done, metrics_to_json(rep));
    write_text(run_dir / "metrics.csv", metrics_csv_row(cfg.backbone, cfg.modality, rep));
    std::cout << "  fold " << fold << ": test accuracy " << 100 * rep.accuracy << "%, mcc "
              << rep.mcc << "\n";
    return rep;
}

inline data::SplitPlan obtain_split(const RunConfig& cfg, const data::DatasetManifest& manifest,
                                    const fs::path& save_to) {
    if (!cfg.split_file.empty()) return data::load_split(cfg.split_file);
    if (fs::exists(save_to)) return data::load_split(save_to);
    const data::SplitPlan plan =
        data::make_split(manifest, data::modality_from_string(cfg.modality), cfg.split_seed);
    data::save_split(plan, save_to);
    return plan;
}

// ------------------------------------------------------------------ commands

inline int cmd_synth(const RunConfig& cfg) {
    synth::SynthSpec spec;
    if (cfg.synth_table1) {
        spec = synth::table1_spec(cfg.synth_seed);
    } else {
        spec.seed = cfg.synth_seed;
        spec.n_per_class = cfg.synth_per_class;
    }
    const fs::path out = fs::path(cfg.out) / "synth";
    const synth::SynthResult res = synth::generate(spec, out);
    std::cout << "generated " << res.manifest.records.size() << " samples under " << out.string()
              << "\nmanifest: " << res.manifest_path.string() << "\n";
    return 0;
}

inline int cmd_prepare(const RunConfig& cfg) {
    const data::DatasetManifest mf = data::load_manifest(cfg.manifest);
    nlohmann::json j;
    j["n_records"] = mf.records.size();
    for (data::Modality m :
         {data::Modality::RGB, data::Modality::THERMAL, data::Modality::FUSED}) {
        const auto counts = mf.class_counts(m);
        j["counts"][data::to_string(m)] = counts;
        std::cout << data::to_string(m) << ": total " << mf.count(m) << ", per grade [";
        for (int g = 0; g < data::kNumGrades; ++g)
            std::cout << counts[std::size_t(g)] << (g + 1 < data::kNumGrades ? ", " : "]\n");
    }
    const auto w = data::class_weights(mf, data::modality_from_string(cfg.modality));
    j["modality"] = cfg.modality;
    j["class_weights"] = w.w;
    std::cout << "class weights (" << cfg.modality << "): [";
    for (int g = 0; g < data::kNumGrades; ++g)
        std::cout << w.w[std::size_t(g)] << (g + 1 < data::kNumGrades ? ", " : "]\n");
    fs::create_directories(cfg.out);
    write_json(fs::path(cfg.out) / "prepare.json", j);
    return 0;
}

inline int cmd_convert(const RunConfig& cfg, const std::string& in_dir,
                       const std::string& out_dir) {
    if (!fs::is_directory(in_dir)) {
        std::cerr << "convert: input directory " << in_dir << " does not exist\n";
        return 1;
    }
    std::vector<fs::path> inputs;
    for (const auto& e : fs::directory_iterator(in_dir)) {
        if (!e.is_regular_file()) continue;
        const std::string ext = e.path().extension().string();
        if (ext == ".tif" || ext == ".tiff") inputs.push_back(e.path());
    }
    std::sort(inputs.begin(), inputs.end());
    if (inputs.empty()) {
        std::cout << "convert: no TIFF files in " << in_dir << ", nothing to do\n";
        return 0;
    }
    fs::create_directories(out_dir);
    int failures = 0;
    for (const auto& p : inputs) {
        try {
            const auto raw = io::read_file(p.string());
            const thermal::RawThermalFrame frame = thermal::decode_raw(raw);
            const thermal::ProcessedThermal pt =
                thermal::process_frame(frame, cfg.window_step, cfg.window_floor);

            io::PngImage png;
            png.width = thermal::kFrameWidth;
            png.height = thermal::kFrameHeight;
            png.channels = 1;
            png.bit_depth = 16;
            png.samples.resize(pt.normalized.values.size());
            for (std::size_t i = 0; i < png.samples.size(); ++i)
                png.samples[i] =
                    std::uint16_t(std::lround(double(pt.normalized.values[i]) * 65535.0));
            const std::string stem = p.stem().string();
            io::write_file((fs::path(out_dir) / (stem + "_norm.png")).string(),
                           io::write_png(png));

            nlohmann::json side;
            side["source"] = p.filename().string();
            side["window"] = {{"lo", pt.diagnostics.window.lo},
                              {"hi", pt.diagnostics.window.hi}};
            side["mean_c"] = pt.diagnostics.mean_c;
            side["steps"] = pt.diagnostics.steps;
            side["floor_saturated"] = pt.diagnostics.floor_saturated;
            write_json(fs::path(out_dir) / (stem + ".json"), side);
        } catch (const std::exception& e) {
            std::cerr << "convert: " << p.string() << ": " << e.what() << "\n";
            ++failures;
        }
    }
    std::cout << "converted " << (inputs.size() - std::size_t(failures)) << "/" << inputs.size()
              << " files into " << out_dir << "\n";
    return failures ? 1 : 0;
}

inline int cmd_split(const RunConfig& cfg) {
    const data::DatasetManifest mf = data::load_manifest(cfg.manifest);
    const data::Modality m = data::modality_from_string(cfg.modality);
    const data::SplitPlan plan = data::make_split(mf, m, cfg.split_seed);
    fs::create_directories(cfg.out);
    const fs::path out = fs::path(cfg.out) / "split.json";
    data::save_split(plan, out);
    std::cout << "split over " << mf.count(m) << " " << cfg.modality << " samples: test "
              << plan.test_ids.size();
    for (int f = 1; f <= data::kNumFolds; ++f)
        std::cout << ", fold" << f << " " << plan.ids_in_fold(f).size();
    std::cout << " -> " << out.string() << "\n";
    return 0;
}

inline int cmd_train(const RunConfig& cfg) {
    const data::DatasetManifest mf = data::load_manifest(cfg.manifest);
    fs::create_directories(run_base(cfg));
    const data::SplitPlan split = obtain_split(cfg, mf, run_base(cfg) / "split.json");
    data::SampleLoader loader = make_loader(cfg, mf);
    const metrics::MetricsReport rep = run_single_fold(cfg, mf, loader, split, cfg.fold);
    std::cout << metrics_markdown_header() << "\n"
              << metrics_markdown_row(cfg.backbone, cfg.modality, rep) << "\n";
    return 0;
}

// the full protocol: freeze the test set, train the five folds, evaluate each
// fold's model on the test set, mean the fold reports
inline int cmd_eval(const RunConfig& cfg) {
    const data::DatasetManifest mf = data::load_manifest(cfg.manifest);
    const fs::path base = run_base(cfg);
    fs::create_directories(base);
    const data::SplitPlan split = obtain_split(cfg, mf, base / "split.json");
    data::SampleLoader loader = make_loader(cfg, mf);

    std::cout << cfg.backbone << " / " << cfg.modality << "\n";
    std::vector<metrics::MetricsReport> reports;
    for (int fold = 1; fold <= data::kNumFolds; ++fold)
        reports.push_back(run_single_fold(cfg, mf, loader, split, fold));

    const metrics::MetricsReport agg = metrics::aggregate_folds(reports);
    nlohmann::json aj = metrics_to_json(agg);
    aj["model"] = cfg.backbone;
    aj["modality"] = cfg.modality;
    aj["folds"] = data::kNumFolds;
    write_json(base / "aggregate_metrics.json", aj);
    const std::string row = metrics_markdown_row(cfg.backbone, cfg.modality, agg);
    write_text(base / "row.md", metrics_markdown_header() + "\n" + row + "\n");
    std::cout << metrics_markdown_header() << "\n" << row << "\n";
    return 0;
}

inline const std::vector<std::string>& published_backbones() {
    static const std::vector<std::string> ids = {"densenet121", "efficientnet_v2_s",
                                                 "inception_v3", "resnet50", "vgg16"};
    return ids;
}

// sweep backbones x {rgb, thermal, fused}; completed cells are skipped by
// the per-fold resume logic, so an interrupted sweep picks up where it died
inline int cmd_matrix(const RunConfig& base_cfg, std::vector<std::string> backbones = {}) {
    if (backbones.empty()) backbones = published_backbones();
    const std::vector<std::string> modalities = {"rgb", "thermal", "fused"};

    std::vector<std::vector<double>> acc(modalities.size(),
                                         std::vector<double>(backbones.size(), 0.0));
    std::string table = metrics_markdown_header() + "\n";
    for (std::size_t bi = 0; bi < backbones.size(); ++bi) {
        for (std::size_t mi = 0; mi < modalities.size(); ++mi) {
            RunConfig cfg = base_cfg;
            cfg.backbone = backbones[bi];
            cfg.modality = modalities[mi];
            const int rc = cmd_eval(cfg);
            if (rc != 0) return rc;
            std::ifstream in(run_base(cfg) / "aggregate_metrics.json");
            nlohmann::json j;
            in >> j;
            const metrics::MetricsReport rep = metrics_from_json(j);
            acc[mi][bi] = 100.0 * rep.accuracy;
            table += metrics_markdown_row(cfg.backbone, cfg.modality, rep) + "\n";
        }
    }
    fs::create_directories(base_cfg.out);
    write_text(fs::path(base_cfg.out) / "comparison.md", table);

    BarChart chart;
    chart.title = "Overall accuracy by model and modality";
    chart.groups = backbones;
    chart.series = modalities;
    chart.values = acc;
    io::write_file((fs::path(base_cfg.out) / "fig5.png").string(),
                   io::write_png(image_to_png8(render_bar_chart(chart))));
    std::cout << table << "wrote comparison.md and fig5.png under " << base_cfg.out << "\n";
    return 0;
}

inline int cmd_gradcam(const RunConfig& cfg, const std::string& sample_id, int target_class,
                       const std::string& layer) {
    const data::DatasetManifest mf = data::load_manifest(cfg.manifest);
    data::SampleLoader loader = make_loader(cfg, mf);
    auto model = nn::build_model<float>(model_config_for(cfg, cfg.model_seed));
    if (!cfg.checkpoint.empty())
        nn::load_checkpoint(model.net, cfg.checkpoint);
    else
        std::cout << "gradcam: no checkpoint given, using a randomly initialized model\n";

    const data::FusedSample sample = loader.load(sample_id);
    const explain::CamResult cam = explain::gradcam(model, sample, target_class, layer);

    const fs::path out = fs::path(cfg.out) / "gradcam";
    fs::create_directories(out);
    ImageF rgb(3, sample.image.height, sample.image.width);
    std::copy(sample.image.v.begin(), sample.image.v.begin() + rgb.v.size(), rgb.v.begin());
    const ImageF blended = explain::overlay_cam(rgb, cam.heat);
    const fs::path png_path =
        out / (sample_id + "_" + std::to_string(cam.target_class) + "_cam.png");
    io::write_file(png_path.string(), io::write_png(image_to_png8(blended)));

    float lo = 1.0f, hi = 0.0f;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < cam.heat.v.size(); ++i) {
        lo = std::min(lo, cam.heat.v[i]);
        hi = std::max(hi, cam.heat.v[i]);
        if (cam.heat.v[i] > cam.heat.v[arg]) arg = i;
    }
    nlohmann::json j;
    j["layer_id"] = cam.layer;
    j["target_class"] = cam.target_class;
    j["heat_min"] = lo;
    j["heat_max"] = hi;
    j["argmax_xy"] = {int(arg % std::size_t(cam.heat.width)),
                      int(arg / std::size_t(cam.heat.width))};
    j["probs"] = cam.probs;
    write_json(out / (sample_id + "_" + std::to_string(cam.target_class) + "_cam.json"), j);
    std::cout << "wrote " << png_path.string() << "\n";
    return 0;
}

inline int cmd_bench(const RunConfig& cfg) {
    auto model = nn::build_model<float>(model_config_for(cfg, cfg.model_seed));
    if (!cfg.checkpoint.empty()) nn::load_checkpoint(model.net, cfg.checkpoint);

    Tensor<float> x(1, model.in_channels, model.spec.input_size, model.spec.input_size);
    Rng rng(derive_seed(cfg.model_seed, 0xbe7c));
    for (auto& v : x.data) v = float(rng.uniform());

    const bench::TimingReport rep = bench::time_inference(
        [&] { model.logits(x, false); }, cfg.n_warmup, cfg.n_iter);
    const nn::ParamCounts counts = nn::count_params(model);
    const double params_m = double(counts.total()) / 1e6;

    nlohmann::json j;
    j["model"] = cfg.backbone;
    j["modality"] = cfg.modality;
    j["params"] = counts.total();
    j["params_m"] = params_m;
    j["mean_ms"] = rep.mean_ms;
    j["min_ms"] = rep.min_ms;
    j["max_ms"] = rep.max_ms;
    j["fps"] = rep.fps;
    j["n_warmup"] = rep.n_warmup;
    j["n_iter"] = rep.n_iter;
    j["batch_size"] = rep.batch_size;
    fs::create_directories(cfg.out);
    write_json(fs::path(cfg.out) / "bench.json", j);

    bench::TimingReport named = rep;
    named.model_id = cfg.backbone;
    named.modality = cfg.modality;
    const std::string md =
        bench::markdown_header() + "\n" + bench::markdown_row(named, params_m) + "\n";
    write_text(fs::path(cfg.out) / "bench.md", md);
    std::cout << md;
    return 0;
}

}  // namespace thermofuse::cli

#endif
