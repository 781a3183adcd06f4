#include "gsmart/pipeline.hpp"

#include "gsmart/colmap.hpp"
#include "gsmart/embedding.hpp"
#include "gsmart/error.hpp"
#include "gsmart/hull_filter.hpp"
#include "gsmart/mask_io.hpp"
#include "gsmart/ply.hpp"
#include "gsmart/segment_fusion.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

namespace gsmart::pipeline {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::ostringstream ss;
    ss << std::setprecision(17) << v;
    return ss.str();
}

std::uint64_t fnv1a(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string file_hash(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    std::ostringstream hex;
    hex << std::hex << std::setw(16) << std::setfill('0') << fnv1a(ss.str());
    return hex.str();
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j)
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1,
                               prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> keys = {
        "model_dir",        "mask_dir",         "embedding_dir", "image_dir",
        "output_dir",       "seed",             "threads",       "hull_threshold",
        "min_track",        "error_quantile",   "report_removed_ids",
        "k_min",            "alpha",            "beta",          "forward_convention",
        "overlap_threshold","strict_visibility","y_flip",        "gamma",
        "n_min",            "mode",             "lambda_dino",   "lambda_dssim",
        "dino_sign",        "stages"};
    return keys;
}

bool parse_bool(const std::string& v, const std::string& where) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(where + ": expected boolean, got '" + v + "'");
}

double parse_double(const std::string& v, const std::string& where) {
    try {
        std::size_t pos;
        double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError(where + ": expected number, got '" + v + "'");
    }
}

std::uint64_t parse_u64(const std::string& v, const std::string& where) {
    try {
        std::size_t pos;
        long long d = std::stoll(v, &pos);
        if (pos != v.size() || d < 0) throw std::invalid_argument(v);
        return static_cast<std::uint64_t>(d);
    } catch (const std::exception&) {
        throw ConfigError(where + ": expected non-negative integer, got '" + v + "'");
    }
}

void apply_key(PipelineConfig& cfg, const std::string& key, const std::string& value,
               const std::string& where) {
    if (key == "model_dir") cfg.model_dir = value;
    else if (key == "mask_dir") cfg.mask_dir = value;
    else if (key == "embedding_dir") cfg.embedding_dir = value;
    else if (key == "image_dir") cfg.image_dir = value;
    else if (key == "output_dir") cfg.output_dir = value;
    else if (key == "seed") cfg.seed = parse_u64(value, where);
    else if (key == "threads") cfg.threads = static_cast<int>(parse_u64(value, where));
    else if (key == "hull_threshold") cfg.hull_threshold = parse_double(value, where);
    else if (key == "min_track") cfg.min_track = parse_u64(value, where);
    else if (key == "error_quantile") cfg.error_quantile = parse_double(value, where);
    else if (key == "report_removed_ids") cfg.report_removed_ids = parse_bool(value, where);
    else if (key == "k_min") cfg.k_min = parse_u64(value, where);
    else if (key == "alpha") cfg.alpha = parse_double(value, where);
    else if (key == "beta") cfg.beta = parse_double(value, where);
    else if (key == "forward_convention") {
        if (value == "neg-z") cfg.forward_convention = view_select::ForwardConvention::NegZ;
        else if (value == "pos-z") cfg.forward_convention = view_select::ForwardConvention::PosZ;
        else throw ConfigError(where + ": forward_convention must be neg-z or pos-z");
    } else if (key == "overlap_threshold") cfg.overlap_threshold = parse_double(value, where);
    else if (key == "strict_visibility") cfg.strict_visibility = parse_bool(value, where);
    else if (key == "y_flip") cfg.y_flip = parse_bool(value, where);
    else if (key == "gamma") cfg.gamma = parse_double(value, where);
    else if (key == "n_min") cfg.n_min = parse_u64(value, where);
    else if (key == "mode") {
        if (value == "isotropic") cfg.mode = densify::SampleMode::Isotropic;
        else if (value == "covariance") cfg.mode = densify::SampleMode::Covariance;
        else throw ConfigError(where + ": mode must be isotropic or covariance");
    } else if (key == "lambda_dino") cfg.lambda_dino = parse_double(value, where);
    else if (key == "lambda_dssim") cfg.lambda_dssim = parse_double(value, where);
    else if (key == "dino_sign") {
        if (value == "paper_literal") cfg.dino_sign = metrics::DinoSign::PaperLiteral;
        else if (value == "dissimilarity") cfg.dino_sign = metrics::DinoSign::Dissimilarity;
        else throw ConfigError(where + ": dino_sign must be paper_literal or dissimilarity");
    } else if (key == "stages") cfg.stages = parse_stage_list(value);
    else {
        std::string best;
        std::size_t best_d = 1000;
        for (const auto& k : known_keys()) {
            std::size_t d = edit_distance(key, k);
            if (d < best_d) {
                best_d = d;
                best = k;
            }
        }
        std::string msg = where + ": unknown key '" + key + "'";
        if (best_d <= 3) msg += " (did you mean '" + best + "'?)";
        throw ConfigError(msg);
    }
}

// -------------------------------------------------------------- artifacts ---

struct FilterArtifact {
    hull_filter::FilterResult result;
};

void write_filter_report(const fs::path& path, const hull_filter::FilterResult& r,
                         bool with_removed_ids) {
    std::ofstream f(path, std::ios::trunc);
    f << "# hull filter report\n";
    f << "kept " << r.kept.size() << '\n';
    f << "removed " << r.removed.size() << '\n';
    f << "threshold_used " << fmt(r.threshold_used) << '\n';
    f << "core_size " << r.core_size << '\n';
    f << "core_degraded " << (r.core_degraded ? 1 : 0) << '\n';
    if (with_removed_ids) {
        f << "removed_ids";
        for (auto id : r.removed) f << ' ' << id;
        f << '\n';
    }
}

// returns the removed ids, or empty when the report (or its id list) is absent
std::set<std::uint64_t> read_removed_ids(const fs::path& path) {
    std::set<std::uint64_t> removed;
    std::ifstream f(path);
    if (!f) return removed;
    std::string line;
    while (std::getline(f, line)) {
        std::istringstream ss(line);
        std::string key;
        ss >> key;
        if (key == "removed_ids") {
            std::uint64_t id;
            while (ss >> id) removed.insert(id);
        }
    }
    return removed;
}

void write_selection(const fs::path& path, const view_select::SelectionResult& sel) {
    std::ofstream f(path, std::ios::trunc);
    f << "# view selection\n";
    f << "chosen_k " << sel.chosen_k << '\n';
    for (const auto& [k, score] : sel.score_per_k) f << "score " << k << ' ' << fmt(score) << '\n';
    for (const auto& rep : sel.representatives) f << "representative " << rep << '\n';
}

std::vector<std::string> read_representatives(const fs::path& path) {
    std::ifstream f(path);
    if (!f) throw DataError("missing selection artifact " + path.string() +
                            " (run the cluster stage first)");
    std::vector<std::string> reps;
    std::string line;
    while (std::getline(f, line)) {
        std::istringstream ss(line);
        std::string key, name;
        ss >> key >> name;
        if (key == "representative") reps.push_back(name);
    }
    return reps;
}

void write_segment_map(const fs::path& txt_path, const fs::path& bin_path,
                       const fusion::SegmentMap& map) {
    std::ofstream f(txt_path, std::ios::trunc);
    f << "# global segment map: global <id> <view>:<local label>...\n";
    for (const auto& [gid, members] : map.merged_from) {
        f << "global " << gid;
        for (const auto& [view, label] : members) f << ' ' << view << ':' << label;
        f << '\n';
    }

    std::ofstream b(bin_path, std::ios::binary | std::ios::trunc);
    for (const auto& [pid, gid] : map.point_labels) {
        b.write(reinterpret_cast<const char*>(&pid), 8);
        b.write(reinterpret_cast<const char*>(&gid), 4);
    }
}

std::map<std::uint64_t, std::uint32_t> read_point_labels(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("missing point-label artifact " + path.string() +
                            " (run the fuse stage first)");
    std::map<std::uint64_t, std::uint32_t> labels;
    while (true) {
        std::uint64_t pid;
        std::uint32_t gid;
        if (!f.read(reinterpret_cast<char*>(&pid), 8)) break;
        if (!f.read(reinterpret_cast<char*>(&gid), 4))
            throw ParseError(path.string() + ": truncated record");
        labels[pid] = gid;
    }
    return labels;
}

std::map<std::uint32_t, std::vector<fusion::ViewLabelKey>> read_segment_members(
    const fs::path& path) {
    std::ifstream f(path);
    if (!f) throw DataError("missing segment-map artifact " + path.string() +
                            " (run the fuse stage first)");
    std::map<std::uint32_t, std::vector<fusion::ViewLabelKey>> members;
    std::string line;
    while (std::getline(f, line)) {
        std::istringstream ss(line);
        std::string key;
        ss >> key;
        if (key != "global") continue;
        std::uint32_t gid;
        ss >> gid;
        std::string tok;
        while (ss >> tok) {
            auto colon = tok.rfind(':');
            if (colon == std::string::npos) continue;
            members[gid].emplace_back(tok.substr(0, colon),
                                      static_cast<std::uint16_t>(std::stoul(tok.substr(colon + 1))));
        }
    }
    return members;
}

void write_densify_report(const fs::path& path, const densify::DensifyReport& r) {
    std::ofstream f(path, std::ios::trunc);
    f << "# densification report\n";
    f << "points_added_total " << r.points_added_total << '\n';
    f << "segments_touched " << r.segments_touched << '\n';
    for (const auto& s : r.per_segment)
        f << "segment " << s.global_id << " area " << s.area << " existing " << s.existing
          << " n_target " << s.n_target << " n_add " << s.n_add << " sigma " << fmt(s.sigma)
          << '\n';
    for (const auto& w : r.warnings) f << "warning " << w << '\n';
}

// ----------------------------------------------------------------- stages ---

SceneModel load_filtered_model(const PipelineConfig& cfg) {
    SceneModel model = colmap::read_model_dir(cfg.model_dir);
    auto removed = read_removed_ids(cfg.output_dir / "filter_report.txt");
    if (!removed.empty()) {
        std::erase_if(model.points,
                      [&](const ScenePoint& p) { return removed.count(p.point_id) > 0; });
    }
    return model;
}

void stage_filter(const PipelineConfig& cfg) {
    SceneModel model = colmap::read_model_dir(cfg.model_dir);
    hull_filter::FilterParams params;
    params.rel_threshold = cfg.hull_threshold;
    params.min_track = cfg.min_track;
    params.max_error_quantile = cfg.error_quantile;
    auto result = hull_filter::filter_outliers(model.points, params);

    std::set<std::uint64_t> kept(result.kept.begin(), result.kept.end());
    std::vector<ScenePoint> kept_points;
    for (const auto& p : model.points)
        if (kept.count(p.point_id)) kept_points.push_back(p);
    ply::write(kept_points, cfg.output_dir / "filtered.ply");
    write_filter_report(cfg.output_dir / "filter_report.txt", result, cfg.report_removed_ids);
}

void stage_cluster(const PipelineConfig& cfg) {
    SceneModel model = colmap::read_model_dir(cfg.model_dir);
    auto features = view_select::extract_features(model, cfg.forward_convention);
    view_select::SelectParams params;
    params.k_min = cfg.k_min;
    params.alpha = cfg.alpha;
    params.beta = cfg.beta;
    params.seed = cfg.seed;
    params.forward = cfg.forward_convention;
    auto selection = view_select::select_views(features, params);
    write_selection(cfg.output_dir / "selection.txt", selection);
}

void stage_fuse(const PipelineConfig& cfg) {
    SceneModel model = load_filtered_model(cfg);
    auto reps = read_representatives(cfg.output_dir / "selection.txt");

    fusion::AssignOptions opts;
    opts.strict_visibility = cfg.strict_visibility;
    opts.y_flip = cfg.y_flip;

    std::vector<fusion::ViewAssignment> assignments;
    for (const auto& rep : reps) {
        fs::path raster = cfg.mask_dir / (rep + ".png");
        if (!fs::exists(raster)) throw DataError("no mask for representative view '" + rep + "' at " +
                                                 raster.string());
        auto mask = mask_io::load_mask(raster,
                                       [](const std::string& w) { std::cerr << "warning: " << w << '\n'; });
        mask.view_name = rep;
        assignments.push_back({rep, fusion::assign_view_labels(model, rep, mask, opts)});
    }
    auto map = fusion::build_global_map(assignments, cfg.overlap_threshold);
    write_segment_map(cfg.output_dir / "segment_map.txt", cfg.output_dir / "point_labels.bin", map);
}

void stage_densify(const PipelineConfig& cfg) {
    SceneModel model = load_filtered_model(cfg);
    auto labels = read_point_labels(cfg.output_dir / "point_labels.bin");
    auto members = read_segment_members(cfg.output_dir / "segment_map.txt");

    // A_i per global segment = max linked per-view mask area
    std::map<std::string, SegmentMask> masks;
    std::map<std::uint32_t, std::uint64_t> areas;
    for (const auto& [gid, links] : members) {
        std::uint64_t best = 0;
        for (const auto& [view, label] : links) {
            auto it = masks.find(view);
            if (it == masks.end())
                it = masks.emplace(view, mask_io::load_mask(cfg.mask_dir / (view + ".png"))).first;
            auto a = it->second.areas.find(label);
            if (a != it->second.areas.end()) best = std::max(best, a->second);
        }
        areas[gid] = best;
    }

    densify::LabeledCloud cloud;
    cloud.points = model.points;
    cloud.labels = labels;
    densify::DensifyParams params;
    params.gamma = cfg.gamma;
    params.n_min = cfg.n_min;
    params.mode = cfg.mode;
    params.seed = cfg.seed;
    densify::DensifyReport report;
    auto augmented = densify::densify_cloud(cloud, areas, params, report);
    ply::write(augmented.points, cfg.output_dir / "augmented.ply");
    write_densify_report(cfg.output_dir / "densify_report.txt", report);
}

void stage_evaluate(const PipelineConfig& cfg) {
    metrics::LossWeights weights;
    weights.lambda_dino = cfg.lambda_dino;
    weights.lambda_dssim = cfg.lambda_dssim;
    weights.dino_sign = cfg.dino_sign;

    struct Row {
        std::map<std::string, std::string> values; // metric name -> formatted value
    };
    std::map<std::string, Row> rows; // keyed by pair stem

    std::map<std::string, std::pair<fs::path, fs::path>> image_pairs;
    if (!cfg.image_dir.empty() && fs::exists(cfg.image_dir)) {
        for (const auto& e : fs::directory_iterator(cfg.image_dir)) {
            auto name = e.path().filename().string();
            auto pos = name.rfind("_gt.png");
            if (pos == std::string::npos || pos + 7 != name.size()) continue;
            std::string stem = name.substr(0, pos);
            fs::path render = cfg.image_dir / (stem + "_render.png");
            if (fs::exists(render)) image_pairs[stem] = {e.path(), render};
        }
    }
    std::map<std::string, std::pair<fs::path, fs::path>> emb_pairs;
    if (!cfg.embedding_dir.empty() && fs::exists(cfg.embedding_dir)) {
        for (const auto& e : fs::directory_iterator(cfg.embedding_dir)) {
            auto name = e.path().filename().string();
            auto pos = name.rfind("_gt.emb");
            if (pos == std::string::npos || pos + 7 != name.size()) continue;
            std::string stem = name.substr(0, pos);
            fs::path render = cfg.embedding_dir / (stem + "_render.emb");
            if (fs::exists(render)) emb_pairs[stem] = {e.path(), render};
        }
    }

    for (const auto& [stem, pair] : image_pairs) {
        auto gt = png_io::read_image(pair.first);
        auto r = png_io::read_image(pair.second);
        Row& row = rows[stem];
        row.values["psnr"] = fmt(metrics::psnr(gt, r));
        row.values["ssim"] = fmt(metrics::ssim(gt, r));
        row.values["l1"] = fmt(metrics::l1(gt, r));
        row.values["l_photo"] = fmt(metrics::l_photo(gt, r, weights));
        auto emb = emb_pairs.find(stem);
        if (emb != emb_pairs.end()) {
            auto fg = embedding::load(emb->second.first);
            auto fr = embedding::load(emb->second.second);
            row.values["l_total"] = fmt(metrics::l_total(gt, r, fg, fr, weights));
        }
    }
    for (const auto& [stem, pair] : emb_pairs) {
        auto fg = embedding::load(pair.first);
        auto fr = embedding::load(pair.second);
        Row& row = rows[stem];
        row.values["cosine"] = fmt(metrics::cosine(fg, fr));
        row.values["dino_loss"] = fmt(metrics::dino_loss(fg, fr, weights));
    }

    // d2s here is point-to-point nearest neighbor (no mesh in this pipeline)
    std::ofstream txt(cfg.output_dir / "metrics.txt", std::ios::trunc);
    std::ofstream kv(cfg.output_dir / "metrics.kv", std::ios::trunc);
    txt << "# metric report (distances are point-to-point nearest neighbor)\n";
    for (const auto& [stem, row] : rows) {
        txt << stem << ":\n";
        for (const auto& [metric, value] : row.values) {
            txt << "  " << std::left << std::setw(12) << metric << ' ' << value << '\n';
            kv << stem << '.' << metric << '=' << value << '\n';
        }
    }
}

} // namespace

std::string stage_name(Stage s) {
    switch (s) {
    case Stage::Filter: return "filter";
    case Stage::Cluster: return "cluster";
    case Stage::Fuse: return "fuse";
    case Stage::Densify: return "densify";
    case Stage::Evaluate: return "evaluate";
    }
    return "?";
}

std::vector<Stage> parse_stage_list(const std::string& csv) {
    std::vector<Stage> stages;
    std::istringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok == "filter") stages.push_back(Stage::Filter);
        else if (tok == "cluster") stages.push_back(Stage::Cluster);
        else if (tok == "fuse") stages.push_back(Stage::Fuse);
        else if (tok == "densify") stages.push_back(Stage::Densify);
        else if (tok == "evaluate") stages.push_back(Stage::Evaluate);
        else if (!tok.empty())
            throw ConfigError("unknown stage '" + tok +
                              "' (expected filter,cluster,fuse,densify,evaluate)");
    }
    if (stages.empty()) throw ConfigError("stage list is empty");
    return stages;
}

PipelineConfig parse_config_file(const fs::path& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file " + path.string());
    PipelineConfig cfg;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto eq = line.find('=');
        std::string where = path.filename().string() + " line " + std::to_string(lineno);
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r") != std::string::npos)
                throw ConfigError(where + ": expected 'key = value'");
            continue;
        }
        auto trim = [](std::string s) {
            auto b = s.find_first_not_of(" \t\r");
            auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        apply_key(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)), where);
    }
    validate_ranges(cfg);
    return cfg;
}

void validate_ranges(const PipelineConfig& cfg) {
    if (cfg.hull_threshold < 0) throw ConfigError("hull_threshold must be >= 0");
    if (cfg.error_quantile <= 0 || cfg.error_quantile > 1)
        throw ConfigError("error_quantile must be in (0, 1]");
    if (cfg.alpha < 0 || cfg.beta < 0) throw ConfigError("alpha and beta must be >= 0");
    if (cfg.k_min < 1) throw ConfigError("k_min must be >= 1");
    if (cfg.overlap_threshold < 0 || cfg.overlap_threshold > 1)
        throw ConfigError("overlap_threshold must be in [0, 1]");
    if (cfg.gamma < 0) throw ConfigError("gamma must be >= 0");
    if (cfg.lambda_dino < 0) throw ConfigError("lambda_dino must be >= 0");
    if (cfg.lambda_dssim < 0 || cfg.lambda_dssim > 1)
        throw ConfigError("lambda_dssim must be in [0, 1]");
    if (cfg.threads < 0) throw ConfigError("threads must be >= 0");
}

void validate(const PipelineConfig& cfg) {
    validate_ranges(cfg);

    auto needs = [&](Stage s) {
        return std::find(cfg.stages.begin(), cfg.stages.end(), s) != cfg.stages.end();
    };
    auto require_dir = [](const fs::path& p, const std::string& what, const std::string& stage) {
        if (p.empty() || !fs::exists(p))
            throw ConfigError(stage + " stage requires " + what + " (got '" + p.string() + "')");
    };
    if (needs(Stage::Filter) || needs(Stage::Cluster) || needs(Stage::Fuse) ||
        needs(Stage::Densify))
        require_dir(cfg.model_dir, "model_dir", "a model-consuming");
    if (needs(Stage::Fuse)) require_dir(cfg.mask_dir, "mask_dir", "the fuse");
    if (needs(Stage::Densify)) require_dir(cfg.mask_dir, "mask_dir", "the densify");
    if (needs(Stage::Evaluate) &&
        (cfg.image_dir.empty() || !fs::exists(cfg.image_dir)) &&
        (cfg.embedding_dir.empty() || !fs::exists(cfg.embedding_dir)))
        throw ConfigError("the evaluate stage requires image_dir and/or embedding_dir");
}

void run_pipeline(const PipelineConfig& cfg) {
    validate(cfg);
    fs::create_directories(cfg.output_dir);

    nlohmann::ordered_json manifest;
    manifest["tool"] = "gsmart";
    manifest["version"] = "1.0.0";
    manifest["seed"] = cfg.seed;
    manifest["parameters"] = {
        {"hull_threshold", cfg.hull_threshold},
        {"min_track", cfg.min_track},
        {"error_quantile", cfg.error_quantile},
        {"k_min", cfg.k_min},
        {"alpha", cfg.alpha},
        {"beta", cfg.beta},
        {"forward_convention",
         cfg.forward_convention == view_select::ForwardConvention::NegZ ? "neg-z" : "pos-z"},
        {"overlap_threshold", cfg.overlap_threshold},
        {"strict_visibility", cfg.strict_visibility},
        {"y_flip", cfg.y_flip},
        {"gamma", cfg.gamma},
        {"n_min", cfg.n_min},
        {"mode", cfg.mode == densify::SampleMode::Isotropic ? "isotropic" : "covariance"},
        {"lambda_dino", cfg.lambda_dino},
        {"lambda_dssim", cfg.lambda_dssim},
        {"dino_sign",
         cfg.dino_sign == metrics::DinoSign::PaperLiteral ? "paper_literal" : "dissimilarity"},
        {"threads", cfg.threads},
    };

    nlohmann::ordered_json inputs = nlohmann::ordered_json::object();
    for (const fs::path& dir : {cfg.model_dir, cfg.mask_dir}) {
        if (dir.empty() || !fs::exists(dir)) continue;
        for (const auto& e : fs::directory_iterator(dir))
            if (e.is_regular_file()) inputs[e.path().string()] = file_hash(e.path());
    }
    manifest["input_hashes"] = inputs;

    nlohmann::ordered_json stage_log = nlohmann::ordered_json::array();
    for (Stage stage : cfg.stages) {
        auto t0 = std::chrono::steady_clock::now();
        try {
            switch (stage) {
            case Stage::Filter: stage_filter(cfg); break;
            case Stage::Cluster: stage_cluster(cfg); break;
            case Stage::Fuse: stage_fuse(cfg); break;
            case Stage::Densify: stage_densify(cfg); break;
            case Stage::Evaluate: stage_evaluate(cfg); break;
            }
        } catch (const DegeneracyError& e) {
            throw DegeneracyError("stage '" + stage_name(stage) + "' failed: " + e.what(), e.rank);
        } catch (const ConfigError& e) {
            throw ConfigError("stage '" + stage_name(stage) + "' failed: " + e.what());
        } catch (const std::exception& e) {
            throw DataError("stage '" + stage_name(stage) + "' failed: " + e.what());
        }
        auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0);
        stage_log.push_back({{"stage", stage_name(stage)}, {"wall_time_ms", ms.count()}});
    }
    manifest["stages"] = stage_log;

    std::ofstream mf(cfg.output_dir / "manifest.json", std::ios::trunc);
    mf << manifest.dump(2) << '\n';
}

} // namespace gsmart::pipeline
