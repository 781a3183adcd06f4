#pragma once

#include "gsmart/densify.hpp"
#include "gsmart/metrics.hpp"
#include "gsmart/view_select.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace gsmart::pipeline {

enum class Stage { Filter, Cluster, Fuse, Densify, Evaluate };

struct PipelineConfig {
    std::filesystem::path model_dir;
    std::filesystem::path mask_dir;
    std::filesystem::path embedding_dir;
    std::filesystem::path image_dir;
    std::filesystem::path output_dir = "out";
    std::uint64_t seed = 0;
    int threads = 0; // 0 = library default

    // filter
    double hull_threshold = 0.05;
    std::uint64_t min_track = 3;
    double error_quantile = 0.9;
    bool report_removed_ids = true;

    // cluster
    std::size_t k_min = 3;
    double alpha = 0.5;
    double beta = 0.5;
    view_select::ForwardConvention forward_convention = view_select::ForwardConvention::NegZ;

    // fuse
    double overlap_threshold = 0.5;
    bool strict_visibility = false;
    bool y_flip = false;

    // densify
    double gamma = 0.1;
    std::uint64_t n_min = 10;
    densify::SampleMode mode = densify::SampleMode::Isotropic;

    // evaluate
    double lambda_dino = 0.05;
    double lambda_dssim = 0.2;
    metrics::DinoSign dino_sign = metrics::DinoSign::Dissimilarity;

    std::vector<Stage> stages = {Stage::Filter, Stage::Cluster, Stage::Fuse, Stage::Densify,
                                 Stage::Evaluate};
};

// Parses a "key = value" config file ('#' comments). Unknown keys are errors
// with a nearest-key suggestion; out-of-range values are errors with the line
// number. An empty file yields all defaults.
PipelineConfig parse_config_file(const std::filesystem::path& path);

// value-range checks only; stage input-directory requirements are not applied
void validate_ranges(const PipelineConfig& cfg);

// validate_ranges plus per-stage input-directory requirements
void validate(const PipelineConfig& cfg);

// Runs the configured stages in order, each reading its inputs from disk and
// writing its artifacts into output_dir. Throws on the first failing stage;
// artifacts of completed stages remain on disk.
void run_pipeline(const PipelineConfig& cfg);

std::vector<Stage> parse_stage_list(const std::string& csv);
std::string stage_name(Stage s);

} // namespace gsmart::pipeline
