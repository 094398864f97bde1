#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "thermofuse/cli/chart.hpp"
#include "thermofuse/cli/commands.hpp"
#include "thermofuse/cli/config.hpp"

using namespace thermofuse;
using Catch::Approx;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
    fs::path p;
    explicit TempDir(const char* name) : p(fs::temp_directory_path() / name) {
        fs::remove_all(p);
        fs::create_directories(p);
    }
    ~TempDir() { fs::remove_all(p); }
};

}  // namespace

TEST_CASE("config document parses into every section") {
    const json doc = {
        {"data", {{"manifest", "m.csv"}, {"modality", "thermal"}, {"window_step", 0.5}}},
        {"split", {{"seed", 9}, {"file", "s.json"}}},
        {"model", {{"backbone", "resnet50"}, {"inflation", "zeros"}, {"seed", 3}}},
        {"train",
         {{"epochs", 12},
          {"batch_size", 8},
          {"learning_rate", 0.001},
          {"freeze_backbone", true},
          {"fold", 4}}},
        {"bench", {{"n_iter", 50}}},
        {"synth", {{"per_class", {7, 7, 7, 7, 7, 7}}, {"table1", true}}},
        {"out", "elsewhere"},
    };
    const cli::RunConfig c = cli::config_from_json(doc);
    REQUIRE(c.manifest == "m.csv");
    REQUIRE(c.modality == "thermal");
    REQUIRE(c.window_step == 0.5);
    REQUIRE(c.window_floor == 0.0);  // untouched default
    REQUIRE(c.split_seed == 9);
    REQUIRE(c.split_file == "s.json");
    REQUIRE(c.backbone == "resnet50");
    REQUIRE(c.inflation == "zeros");
    REQUIRE(c.model_seed == 3);
    REQUIRE(c.epochs == 12);
    REQUIRE(c.batch_size == 8);
    REQUIRE(c.learning_rate == 0.001);
    REQUIRE(c.freeze_backbone);
    REQUIRE(c.fold == 4);
    REQUIRE(c.n_iter == 50);
    REQUIRE(c.n_warmup == 20);
    REQUIRE(c.synth_per_class[0] == 7);
    REQUIRE(c.synth_table1);
    REQUIRE(c.out == "elsewhere");
}

TEST_CASE("config rejects unknown keys, sections and wrong types") {
    REQUIRE_THROWS_AS(cli::config_from_json(json{{"train", {{"momentum", 0.9}}}}),
                      cli::ConfigError);
    REQUIRE_THROWS_AS(cli::config_from_json(json{{"optimizer", {{"lr", 1}}}}), cli::ConfigError);
    REQUIRE_THROWS_AS(cli::config_from_json(json{{"train", {{"epochs", "ten"}}}}),
                      cli::ConfigError);
    REQUIRE_THROWS_AS(cli::config_from_json(json{{"train", {{"augment", 1}}}}), cli::ConfigError);
    REQUIRE_THROWS_AS(cli::config_from_json(json{{"split", {{"seed", -3}}}}), cli::ConfigError);
    REQUIRE_THROWS_AS(cli::config_from_json(json{{"synth", {{"per_class", {1, 2, 3}}}}}),
                      cli::ConfigError);
    REQUIRE_THROWS_AS(cli::config_from_json(json::array()), cli::ConfigError);
    REQUIRE_THROWS_AS(cli::config_from_json(json{{"data", "m.csv"}}), cli::ConfigError);
}

TEST_CASE("config survives a json round trip") {
    cli::RunConfig c;
    c.manifest = "x/mf.csv";
    c.modality = "rgb";
    c.window_step = 0.25;
    c.window_floor = 5.0;
    c.split_seed = 11;
    c.split_file = "sp.json";
    c.backbone = "vgg16";
    c.inflation = "zeros";
    c.pretrained = "weights.ckpt";
    c.model_seed = 22;
    c.epochs = 3;
    c.batch_size = 4;
    c.learning_rate = 0.02;
    c.optimizer = "adam";
    c.patience = 2;
    c.train_seed = 33;
    c.freeze_backbone = true;
    c.augment = false;
    c.fold = 5;
    c.checkpoint = "best.ckpt";
    c.n_warmup = 1;
    c.n_iter = 2;
    c.synth_seed = 44;
    c.synth_per_class = {9, 9, 9, 9, 9, 10};
    c.synth_table1 = true;
    c.out = "odir";

    const cli::RunConfig r = cli::config_from_json(cli::config_to_json(c));
    REQUIRE(r.manifest == c.manifest);
    REQUIRE(r.modality == c.modality);
    REQUIRE(r.window_step == c.window_step);
    REQUIRE(r.window_floor == c.window_floor);
    REQUIRE(r.split_seed == c.split_seed);
    REQUIRE(r.split_file == c.split_file);
    REQUIRE(r.backbone == c.backbone);
    REQUIRE(r.inflation == c.inflation);
    REQUIRE(r.pretrained == c.pretrained);
    REQUIRE(r.model_seed == c.model_seed);
    REQUIRE(r.epochs == c.epochs);
    REQUIRE(r.batch_size == c.batch_size);
    REQUIRE(r.learning_rate == c.learning_rate);
    REQUIRE(r.optimizer == c.optimizer);
    REQUIRE(r.patience == c.patience);
    REQUIRE(r.train_seed == c.train_seed);
    REQUIRE(r.freeze_backbone == c.freeze_backbone);
    REQUIRE(r.augment == c.augment);
    REQUIRE(r.fold == c.fold);
    REQUIRE(r.checkpoint == c.checkpoint);
    REQUIRE(r.n_warmup == c.n_warmup);
    REQUIRE(r.n_iter == c.n_iter);
    REQUIRE(r.synth_seed == c.synth_seed);
    REQUIRE(r.synth_per_class == c.synth_per_class);
    REQUIRE(r.synth_table1 == c.synth_table1);
    REQUIRE(r.out == c.out);
}

TEST_CASE("seed override and environment override") {
    cli::RunConfig c;
    cli::override_seeds(c, 321);
    REQUIRE(c.split_seed == 321);
    REQUIRE(c.model_seed == 321);
    REQUIRE(c.train_seed == 321);
    REQUIRE(c.synth_seed == 321);

    ::setenv("THERMOFUSE_SEED", "777", 1);
    cli::apply_env_overrides(c);
    REQUIRE(c.split_seed == 777);
    REQUIRE(c.train_seed == 777);

    ::setenv("THERMOFUSE_SEED", "12x", 1);
    REQUIRE_THROWS_AS(cli::apply_env_overrides(c), cli::ConfigError);
    ::setenv("THERMOFUSE_SEED", "", 1);
    REQUIRE_THROWS_AS(cli::apply_env_overrides(c), cli::ConfigError);
    ::unsetenv("THERMOFUSE_SEED");

    c.split_seed = 5;
    cli::apply_env_overrides(c);  // no variable: nothing changes
    REQUIRE(c.split_seed == 5);
}

TEST_CASE("load_config wants a real json file") {
    REQUIRE_THROWS_AS(cli::load_config("/nonexistent/cfg.json"), cli::ConfigError);
    TempDir d("tf_cli_cfg");
    const auto bad = d.p / "bad.json";
    std::ofstream(bad) << "{ not json";
    REQUIRE_THROWS_AS(cli::load_config(bad.string()), cli::ConfigError);
    const auto good = d.p / "good.json";
    std::ofstream(good) << R"({"train": {"epochs": 2}})";
    REQUIRE(cli::load_config(good.string()).epochs == 2);
}

TEST_CASE("metrics reports round-trip through json") {
    const std::vector<int> y_true = {0, 1, 2, 3, 4, 5, 0, 1, 2, 3, 4, 5, 0, 2, 2, 4};
    const std::vector<int> y_pred = {0, 1, 2, 3, 4, 5, 0, 2, 2, 3, 4, 5, 1, 2, 3, 4};
    metrics::MetricsReport rep = metrics::evaluate(metrics::confusion(y_true, y_pred));

    Rng rng(8);
    std::vector<double> probs;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        std::array<double, 6> row{};
        double s = 0;
        for (auto& v : row) s += v = 0.05 + rng.uniform();
        row[std::size_t(y_true[i])] += 2.0;  // make scores informative
        s += 2.0;
        for (double v : row) probs.push_back(v / s);
    }
    const metrics::RocResult roc = metrics::roc_auc(y_true, probs, 6);
    rep.auc_per_class = roc.per_class;
    rep.auc_macro = roc.macro;

    const metrics::MetricsReport r2 = cli::metrics_from_json(cli::metrics_to_json(rep));
    REQUIRE(r2.accuracy == rep.accuracy);
    REQUIRE(r2.mcc == rep.mcc);
    REQUIRE(r2.has_undefined == rep.has_undefined);
    REQUIRE(r2.support == rep.support);
    REQUIRE(r2.per_class.size() == rep.per_class.size());
    for (std::size_t c = 0; c < rep.per_class.size(); ++c) {
        REQUIRE(r2.per_class[c].precision == rep.per_class[c].precision);
        REQUIRE(r2.per_class[c].recall == rep.per_class[c].recall);
        REQUIRE(r2.per_class[c].f1 == rep.per_class[c].f1);
        REQUIRE(r2.per_class[c].specificity == rep.per_class[c].specificity);
        REQUIRE(r2.per_class[c].defined == rep.per_class[c].defined);
        REQUIRE(r2.auc_per_class[c].has_value() == rep.auc_per_class[c].has_value());
        if (rep.auc_per_class[c]) REQUIRE(*r2.auc_per_class[c] == *rep.auc_per_class[c]);
    }
    REQUIRE(r2.auc_macro.has_value());
    REQUIRE(*r2.auc_macro == *rep.auc_macro);
    REQUIRE(r2.cm.k == rep.cm.k);
    REQUIRE(r2.cm.m == rep.cm.m);
    REQUIRE(r2.cm.total == rep.cm.total);
}

TEST_CASE("markdown and csv rows format like the published tables") {
    metrics::MetricsReport r;
    r.accuracy = 0.9337;
    r.macro.precision = 0.9109;
    r.macro.recall = 0.8734;
    r.macro.f1 = 0.8908;
    r.macro.specificity = 0.9856;
    r.mcc = 0.9012;
    r.auc_macro = 0.9934;

    REQUIRE(cli::metrics_markdown_row("resnet50", "fused", r) ==
            "| resnet50 | fused | 93.37 | 91.09 | 87.34 | 89.08 | 98.56 | 0.9012 | 0.9934 |");
    r.auc_macro.reset();
    REQUIRE(cli::metrics_markdown_row("resnet50", "fused", r) ==
            "| resnet50 | fused | 93.37 | 91.09 | 87.34 | 89.08 | 98.56 | 0.9012 | n/a |");

    const std::string header = cli::metrics_markdown_header();
    REQUIRE(header.find("| Model | Modality | Accuracy |") == 0);
    REQUIRE(header.find("|---|") != std::string::npos);

    const std::string csv = cli::metrics_csv_row("resnet50", "fused", r);
    REQUIRE(csv.rfind("model,modality,accuracy,precision,recall,f1,specificity,mcc,auc\n", 0) ==
            0);
    REQUIRE(csv.find("resnet50,fused,0.933700,") != std::string::npos);
    REQUIRE(csv.find(",-1.000000\n") != std::string::npos);  // absent AUC sentinel
}

TEST_CASE("bar chart renders to a decodable png") {
    cli::BarChart chart;
    chart.title = "accuracy";
    chart.groups = {"resnet50", "vgg16"};
    chart.series = {"rgb", "thermal", "fused"};
    chart.values = {{61.2, 58.9}, {72.4, 70.0}, {93.4, 91.0}};
    const ImageF img = cli::render_bar_chart(chart);
    REQUIRE(img.channels == 3);
    REQUIRE(img.width == 880);
    REQUIRE(img.height == 480);
    REQUIRE(img.at(0, 0, 0) == 1.0f);  // white background corner

    int colored = 0;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            if (img.at(0, y, x) != img.at(1, y, x) || img.at(1, y, x) != img.at(2, y, x))
                ++colored;
    REQUIRE(colored > 1000);  // the bars actually got painted

    const auto bytes = io::write_png(image_to_png8(img));
    const io::PngImage back = io::read_png(bytes);
    REQUIRE(back.width == 880);
    REQUIRE(back.height == 480);
    REQUIRE(back.channels == 3);
}

TEST_CASE("convert normalizes every tiff and writes window sidecars") {
    TempDir in("tf_cli_conv_in"), out("tf_cli_conv_out");

    // half the frame at 17 degC, half at 37 degC: mean 27, window [27,42]
    thermal::RawThermalFrame frame;
    frame.pixels.assign(thermal::kFramePixels, 29015);
    for (std::size_t i = thermal::kFramePixels / 2; i < thermal::kFramePixels; ++i)
        frame.pixels[i] = 31015;
    io::write_file((in.p / "b.tif").string(), thermal::encode_raw(frame));
    io::write_file((in.p / "a.tiff").string(), thermal::encode_raw(frame));

    cli::RunConfig cfg;
    REQUIRE(cli::cmd_convert(cfg, in.p.string(), out.p.string()) == 0);

    for (const char* stem : {"a", "b"}) {
        REQUIRE(fs::exists(out.p / (std::string(stem) + "_norm.png")));
        REQUIRE(fs::exists(out.p / (std::string(stem) + ".json")));
    }

    const io::PngImage png =
        io::read_png(io::read_file((out.p / "b_norm.png").string()));
    REQUIRE(png.width == thermal::kFrameWidth);
    REQUIRE(png.height == thermal::kFrameHeight);
    REQUIRE(png.channels == 1);
    REQUIRE(png.bit_depth == 16);
    REQUIRE(png.samples[0] == 0);                            // 17 degC clamps below window
    REQUIRE(png.samples[thermal::kFramePixels - 1] == 43690);  // (37-27)/15 of 65535

    std::ifstream jf(out.p / "b.json");
    json side;
    jf >> side;
    REQUIRE(side.at("window").at("lo").get<double>() == Approx(27.0));
    REQUIRE(side.at("window").at("hi").get<double>() == Approx(42.0));
    REQUIRE(side.at("mean_c").get<double>() == Approx(27.0).margin(1e-9));
    REQUIRE(side.at("steps").get<int>() == -3);
    REQUIRE_FALSE(side.at("floor_saturated").get<bool>());
    REQUIRE(side.at("source").get<std::string>() == "b.tif");
}

TEST_CASE("convert flags bad files but still converts the good ones") {
    TempDir in("tf_cli_conv_bad_in"), out("tf_cli_conv_bad_out");
    thermal::RawThermalFrame frame;
    frame.pixels.assign(thermal::kFramePixels, 30315);
    io::write_file((in.p / "ok.tif").string(), thermal::encode_raw(frame));
    io::write_file((in.p / "broken.tif").string(), {'n', 'o', 't', 'a', 't', 'i', 'f', 'f'});

    cli::RunConfig cfg;
    REQUIRE(cli::cmd_convert(cfg, in.p.string(), out.p.string()) == 1);
    REQUIRE(fs::exists(out.p / "ok_norm.png"));
    REQUIRE_FALSE(fs::exists(out.p / "broken_norm.png"));

    TempDir empty("tf_cli_conv_empty");
    REQUIRE(cli::cmd_convert(cfg, empty.p.string(), out.p.string()) == 0);
    REQUIRE(cli::cmd_convert(cfg, (empty.p / "missing").string(), out.p.string()) == 1);
}

TEST_CASE("run_base and model plumbing agree with the config") {
    cli::RunConfig cfg;
    cfg.out = "runs_x";
    cfg.backbone = "resnet50";
    cfg.modality = "thermal";
    REQUIRE(cli::run_base(cfg) == fs::path("runs_x") / "resnet50_thermal");

    cfg.backbone = "tiny_dfu";
    cfg.inflation = "zeros";
    cfg.pretrained = "w.ckpt";
    const nn::ModelConfig mc = cli::model_config_for(cfg, 55);
    REQUIRE(mc.backbone == nn::BackboneId::TinyDfu);
    REQUIRE(mc.modality == data::Modality::THERMAL);
    REQUIRE(mc.inflation == nn::InflationMode::Zeros);
    REQUIRE(mc.pretrained_path == "w.ckpt");
    REQUIRE(mc.seed == 55);

    REQUIRE(cli::env_report().find("compiler:") != std::string::npos);
    REQUIRE(cli::env_report().find("eigen:") != std::string::npos);
}

TEST_CASE("synth, split and train commands cooperate end to end") {
    TempDir out("tf_cli_e2e");

    cli::RunConfig cfg;
    cfg.out = out.p.string();
    cfg.synth_seed = 77;
    cfg.synth_per_class = {8, 8, 8, 8, 8, 8};
    REQUIRE(cli::cmd_synth(cfg) == 0);
    const fs::path manifest = out.p / "synth" / "manifest.csv";
    REQUIRE(fs::exists(manifest));

    cfg.manifest = manifest.string();
    cfg.modality = "fused";
    REQUIRE(cli::cmd_prepare(cfg) == 0);
    {
        std::ifstream jf(out.p / "prepare.json");
        json j;
        jf >> j;
        REQUIRE(j.at("n_records").get<int>() == 48);
        REQUIRE(j.at("class_weights").size() == 6);
        REQUIRE(j.at("class_weights")[0].get<double>() == Approx(1.0));  // balanced synth
    }

    REQUIRE(cli::cmd_split(cfg) == 0);
    const data::SplitPlan plan = data::load_split(out.p / "split.json");
    REQUIRE(plan.test_ids.size() == 7);  // round(0.15 * 48)
    std::size_t in_folds = 0;
    for (int f = 1; f <= data::kNumFolds; ++f) in_folds += plan.ids_in_fold(f).size();
    REQUIRE(in_folds == 41);

    // one quick fold end to end through the command layer
    cfg.backbone = "tiny_dfu";
    cfg.epochs = 1;
    cfg.batch_size = 8;
    cfg.learning_rate = 1e-3;
    cfg.augment = false;
    cfg.fold = 1;
    REQUIRE(cli::cmd_train(cfg) == 0);

    const fs::path fold_dir = out.p / "tiny_dfu_fused" / "fold1";
    for (const char* f : {"run.json", "history.csv", "best.ckpt", "metrics.json", "metrics.csv",
                          "env.txt"})
        REQUIRE(fs::exists(fold_dir / f));

    std::ifstream rf(fold_dir / "run.json");
    json run;
    rf >> run;
    REQUIRE(run.at("fold").get<int>() == 1);
    REQUIRE(run.at("class_weights").size() == 6);
    REQUIRE(run.at("epochs_run").get<int>() == 1);

    const auto stored = nn::read_checkpoint(fold_dir / "best.ckpt");
    REQUIRE(stored.count("backbone.stem.conv.weight") == 1);
    REQUIRE(stored.count("head.fc3.bias") == 1);

    // a second run resumes off the saved metrics instead of retraining
    const auto before = io::read_file((fold_dir / "metrics.json").string());
    REQUIRE(cli::cmd_train(cfg) == 0);
    REQUIRE(io::read_file((fold_dir / "metrics.json").string()) == before);
}
