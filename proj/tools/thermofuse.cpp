// thermofuse — multimodal foot-ulcer staging pipeline, one binary for the
// whole workflow: synthesize or prepare data, split, train, evaluate, sweep,
// explain, benchmark.

#include <cstdint>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "thermofuse/cli/commands.hpp"
#include "thermofuse/cli/config.hpp"

namespace {

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    std::size_t at = 0;
    while (at <= csv.size()) {
        const std::size_t comma = csv.find(',', at);
        const std::string item = csv.substr(at, comma == std::string::npos ? comma : comma - at);
        if (!item.empty()) out.push_back(item);
        if (comma == std::string::npos) break;
        at = comma + 1;
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multimodal diabetic foot ulcer staging pipeline"};
    app.require_subcommand(1);
    // let `thermofuse train --manifest ...` work without forcing the shared
    // options in front of the subcommand name
    app.fallthrough();

    std::string config_path;
    std::string manifest, modality, backbone, out_dir, pretrained, checkpoint;
    std::uint64_t seed = 0;
    int epochs = -1, fold = -1;
    bool has_seed = false;

    app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("--manifest", manifest, "dataset manifest CSV");
    app.add_option("--modality", modality, "rgb | thermal | fused");
    app.add_option("--backbone", backbone, "backbone id");
    app.add_option("--out", out_dir, "output tree");
    app.add_option("--pretrained", pretrained, "backbone checkpoint to start from");
    app.add_option("--checkpoint", checkpoint, "full model checkpoint");
    app.add_option("--epochs", epochs, "training epochs");
    app.add_option("--fold", fold, "validation fold (train)");
    auto* seed_opt = app.add_option("--seed", seed, "override every seed");

    auto* c_convert = app.add_subcommand("convert", "batch-normalize raw thermal TIFFs");
    std::string conv_in, conv_out;
    c_convert->add_option("in_dir", conv_in, "directory of raw TIFFs")->required();
    c_convert->add_option("out_dir", conv_out, "output directory")->required();

    auto* c_prepare = app.add_subcommand("prepare", "validate a manifest, report counts/weights");
    auto* c_split = app.add_subcommand("split", "compute the stratified test + 5-fold split");
    auto* c_train = app.add_subcommand("train", "train one fold");
    auto* c_eval = app.add_subcommand("eval", "full protocol: 5 folds + test + aggregation");

    auto* c_matrix = app.add_subcommand("matrix", "sweep backbones x modalities");
    std::string matrix_backbones;
    c_matrix->add_option("--backbones", matrix_backbones,
                         "comma-separated backbone ids (default: the five published ones)");

    auto* c_gradcam = app.add_subcommand("gradcam", "class activation map for one sample");
    std::string cam_id, cam_layer;
    int cam_class = -1;
    c_gradcam->add_option("--id", cam_id, "sample id")->required();
    c_gradcam->add_option("--class", cam_class, "target grade (default: predicted)");
    c_gradcam->add_option("--layer", cam_layer, "feature layer (default: backbone-specific)");

    auto* c_bench = app.add_subcommand("bench", "single-image inference latency");
    auto* c_synth = app.add_subcommand("synth", "generate a synthetic dataset");
    bool synth_table1 = false;
    c_synth->add_flag("--table1", synth_table1, "use the published per-class ratios");

    CLI11_PARSE(app, argc, argv);
    has_seed = seed_opt->count() > 0;

    try {
        thermofuse::cli::RunConfig cfg;
        if (!config_path.empty()) cfg = thermofuse::cli::load_config(config_path);
        thermofuse::cli::apply_env_overrides(cfg);
        if (has_seed) thermofuse::cli::override_seeds(cfg, seed);
        if (!manifest.empty()) cfg.manifest = manifest;
        if (!modality.empty()) cfg.modality = modality;
        if (!backbone.empty()) cfg.backbone = backbone;
        if (!out_dir.empty()) cfg.out = out_dir;
        if (!pretrained.empty()) cfg.pretrained = pretrained;
        if (!checkpoint.empty()) cfg.checkpoint = checkpoint;
        if (epochs >= 0) cfg.epochs = epochs;
        if (fold >= 1) cfg.fold = fold;
        if (synth_table1) cfg.synth_table1 = true;

        if (c_convert->parsed()) return thermofuse::cli::cmd_convert(cfg, conv_in, conv_out);
        if (c_prepare->parsed()) return thermofuse::cli::cmd_prepare(cfg);
        if (c_split->parsed()) return thermofuse::cli::cmd_split(cfg);
        if (c_train->parsed()) return thermofuse::cli::cmd_train(cfg);
        if (c_eval->parsed()) return thermofuse::cli::cmd_eval(cfg);
        if (c_matrix->parsed())
            return thermofuse::cli::cmd_matrix(cfg, split_list(matrix_backbones));
        if (c_gradcam->parsed())
            return thermofuse::cli::cmd_gradcam(cfg, cam_id, cam_class, cam_layer);
        if (c_bench->parsed()) return thermofuse::cli::cmd_bench(cfg);
        if (c_synth->parsed()) return thermofuse::cli::cmd_synth(cfg);
        std::cerr << "no subcommand\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
