#include <doctest.h>

#include "gsmart/colmap.hpp"
#include "gsmart/error.hpp"
#include "gsmart/mask_io.hpp"
#include "gsmart/segment_fusion.hpp"
#include "gsmart/synth.hpp"

#include <filesystem>
#include <fstream>

using namespace gsmart;
using namespace gsmart::synth;
namespace fs = std::filesystem;

TEST_CASE("synthetic scene structure") {
    SynthConfig cfg;
    cfg.n_points = 200;
    cfg.seed = 1;
    auto gt = make_scene(cfg);

    CHECK(gt.scene.views.size() == cfg.n_cameras);
    CHECK(gt.scene.points.size() == cfg.n_points);
    CHECK(gt.masks.size() == cfg.n_cameras);
    CHECK(gt.true_outlier_ids.empty()); // default outlier_fraction is 0
    CHECK(gt.true_segment_of_point.size() == cfg.n_points);

    // every segment receives at least the 5-point minimum
    std::map<std::uint16_t, int> counts;
    for (const auto& [pid, seg] : gt.true_segment_of_point) ++counts[seg];
    CHECK(counts.size() == cfg.n_segments);
    for (const auto& [seg, c] : counts) CHECK(c >= 5);

    // cameras look at the origin: the scene centroid projects near the center
    const auto& intr = gt.scene.cameras.at(1);
    for (const auto& view : gt.scene.views) {
        auto pr = fusion::project_point(Vec3::Zero(), intr, view);
        REQUIRE(pr.has_value());
        CHECK(std::abs(pr->u - intr.cx) < 1.0);
        CHECK(std::abs(pr->v - intr.cy) < 1.0);
        CHECK(pr->depth > 0);
    }
}

TEST_CASE("ring rig cameras are equidistant from the origin") {
    SynthConfig cfg;
    cfg.n_points = 100;
    auto gt = make_scene(cfg);
    double r0 = gt.scene.views[0].center().norm();
    for (const auto& v : gt.scene.views)
        CHECK(v.center().norm() == doctest::Approx(r0).epsilon(1e-12));
    // distinct azimuths
    for (std::size_t i = 1; i < gt.scene.views.size(); ++i)
        CHECK((gt.scene.views[i].center() - gt.scene.views[0].center()).norm() > 0.1);
}

TEST_CASE("same seed reproduces the scene, different seed does not") {
    SynthConfig cfg;
    cfg.n_points = 150;
    cfg.outlier_fraction = 0.1;
    cfg.seed = 42;
    auto a = make_scene(cfg);
    auto b = make_scene(cfg);
    REQUIRE(a.scene.points.size() == b.scene.points.size());
    for (std::size_t i = 0; i < a.scene.points.size(); ++i) {
        CHECK(a.scene.points[i].position == b.scene.points[i].position);
        CHECK(a.scene.points[i].reprojection_error == b.scene.points[i].reprojection_error);
    }
    CHECK(a.true_outlier_ids == b.true_outlier_ids);
    for (std::size_t m = 0; m < a.masks.size(); ++m) CHECK(a.masks[m].labels == b.masks[m].labels);

    cfg.seed = 43;
    auto c = make_scene(cfg);
    bool any_differs = false;
    for (std::size_t i = 0; i < a.scene.points.size(); ++i)
        any_differs |= a.scene.points[i].position != c.scene.points[i].position;
    CHECK(any_differs);
}

TEST_CASE("outlier bookkeeping") {
    SynthConfig cfg;
    cfg.n_points = 300;
    cfg.outlier_fraction = 0.2;
    cfg.seed = 7;
    auto gt = make_scene(cfg);
    CHECK(gt.true_outlier_ids.size() == 60);
    CHECK(gt.true_segment_of_point.size() == 240);

    double inlier_max = 0;
    for (const auto& pt : gt.scene.points)
        if (!gt.true_outlier_ids.count(pt.point_id))
            inlier_max = std::max(inlier_max, pt.position.norm());
    for (const auto& pt : gt.scene.points) {
        if (gt.true_outlier_ids.count(pt.point_id)) {
            CHECK(pt.position.norm() >= cfg.outlier_radius_multiplier * inlier_max - 1e-9);
            CHECK(pt.track_image_ids.size() == 1);
            CHECK(pt.reprojection_error >= 1.5);
            CHECK(gt.true_segment_of_point.count(pt.point_id) == 0);
        } else {
            CHECK(pt.track_image_ids.size() == cfg.n_cameras);
            CHECK(pt.reprojection_error < 0.1);
        }
    }
}

TEST_CASE("masks agree with point projections") {
    SynthConfig cfg;
    cfg.n_points = 400;
    cfg.seed = 3;
    auto gt = make_scene(cfg);
    const auto& intr = gt.scene.cameras.at(1);

    std::size_t checked = 0;
    for (std::size_t v = 0; v < gt.scene.views.size(); ++v) {
        const auto& mask = gt.masks[v];
        CHECK(mask.width == cfg.image_width);
        CHECK(mask.view_name == gt.scene.views[v].view_name);
        for (const auto& pt : gt.scene.points) {
            auto seg_it = gt.true_segment_of_point.find(pt.point_id);
            if (seg_it == gt.true_segment_of_point.end()) continue;
            auto pr = fusion::project_point(pt.position, intr, gt.scene.views[v]);
            if (!pr) continue;
            auto label = mask.at(static_cast<std::uint32_t>(pr->u), static_cast<std::uint32_t>(pr->v));
            // a labeled pixel always carries the point's own segment
            if (label != 0) CHECK(label == seg_it->second);
            ++checked;
        }
        // stats match the raster
        std::map<std::uint16_t, std::uint64_t> areas;
        for (auto l : mask.labels)
            if (l != 0) ++areas[l];
        CHECK(areas == mask.areas);
    }
    CHECK(checked > 1000);
}

TEST_CASE("configuration validation") {
    SynthConfig cfg;
    cfg.n_points = 200;
    SynthConfig bad = cfg;
    bad.outlier_fraction = 1.5;
    CHECK_THROWS_AS(make_scene(bad), ConfigError);
    bad = cfg;
    bad.outlier_radius_multiplier = 1.0;
    CHECK_THROWS_AS(make_scene(bad), ConfigError);
    bad = cfg;
    bad.n_cameras = 0;
    CHECK_THROWS_AS(make_scene(bad), ConfigError);
    bad = cfg;
    bad.n_segments = 0;
    CHECK_THROWS_AS(make_scene(bad), ConfigError);
    bad = cfg;
    bad.n_points = 20; // 20 inliers < 5 * 5 segments
    CHECK_THROWS_AS(make_scene(bad), ConfigError);
}

TEST_CASE("alternative rigs produce valid scenes") {
    for (auto rig : {CameraRig::Sphere, CameraRig::TwoRings}) {
        SynthConfig cfg;
        cfg.n_points = 100;
        cfg.camera_rig = rig;
        cfg.n_cameras = 9;
        auto gt = make_scene(cfg);
        CHECK(gt.scene.views.size() == 9);
        const auto& intr = gt.scene.cameras.at(1);
        for (const auto& view : gt.scene.views) {
            auto pr = fusion::project_point(Vec3::Zero(), intr, view);
            REQUIRE(pr.has_value());
            CHECK(pr->depth > 0);
        }
    }
}

TEST_CASE("written dataset round-trips through the loaders") {
    SynthConfig cfg;
    cfg.n_points = 120;
    cfg.outlier_fraction = 0.1;
    cfg.seed = 9;
    auto gt = make_scene(cfg);

    auto dir = fs::temp_directory_path() / "gsmart_test_synth_ds";
    fs::remove_all(dir);
    write_dataset(gt, dir);

    auto model = colmap::read_model_dir(dir / "sparse");
    REQUIRE(model.points.size() == gt.scene.points.size());
    REQUIRE(model.views.size() == gt.scene.views.size());
    for (std::size_t i = 0; i < model.points.size(); ++i) {
        CHECK(model.points[i].point_id == gt.scene.points[i].point_id);
        CHECK(model.points[i].position == gt.scene.points[i].position);
        CHECK(model.points[i].track_image_ids == gt.scene.points[i].track_image_ids);
    }

    for (const auto& mask : gt.masks) {
        auto loaded = mask_io::load_mask(dir / "masks" / (mask.view_name + ".png"));
        CHECK(loaded.labels == mask.labels);
        CHECK(loaded.areas == mask.areas);
    }

    // ground-truth sidecar lists every outlier and segment assignment
    std::ifstream f(dir / "ground_truth.txt");
    REQUIRE(f.good());
    std::set<std::uint64_t> outliers;
    std::map<std::uint64_t, std::uint16_t> segs;
    std::string word;
    while (f >> word) {
        if (word == "outlier") {
            std::uint64_t id;
            f >> id;
            outliers.insert(id);
        } else if (word == "segment") {
            std::uint64_t id;
            int seg;
            f >> id >> seg;
            segs[id] = static_cast<std::uint16_t>(seg);
        } else {
            std::getline(f, word);
        }
    }
    CHECK(outliers == gt.true_outlier_ids);
    CHECK(segs == gt.true_segment_of_point);
}
