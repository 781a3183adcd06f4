#include <doctest.h>

#include "gsmart/colmap.hpp"
#include "gsmart/embedding.hpp"
#include "gsmart/error.hpp"
#include "gsmart/mask_io.hpp"
#include "gsmart/ply.hpp"
#include "gsmart/png_io.hpp"
#include "gsmart/rng.hpp"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

using namespace gsmart;
namespace fs = std::filesystem;

namespace {

// independent byte-level fixture writer, kept free of the production encoder
struct RawWriter {
    std::string bytes;
    template <typename T>
    void put(T v) {
        const char* p = reinterpret_cast<const char*>(&v);
        bytes.append(p, sizeof(T));
    }
    void put_str(const std::string& s) {
        bytes.append(s);
        bytes.push_back('\0');
    }
};

std::string fixture_cameras_bin() {
    RawWriter w;
    w.put<std::uint64_t>(1);
    w.put<std::int32_t>(1); // camera_id
    w.put<std::int32_t>(1); // PINHOLE
    w.put<std::uint64_t>(640);
    w.put<std::uint64_t>(480);
    w.put<double>(500.0);
    w.put<double>(510.0);
    w.put<double>(320.0);
    w.put<double>(240.0);
    return w.bytes;
}

std::string fixture_images_bin() {
    RawWriter w;
    w.put<std::uint64_t>(2);
    for (int i = 1; i <= 2; ++i) {
        w.put<std::int32_t>(i);
        w.put<double>(1.0);
        w.put<double>(0.0);
        w.put<double>(0.0);
        w.put<double>(0.0);
        w.put<double>(0.1 * i);
        w.put<double>(0.2 * i);
        w.put<double>(0.3 * i);
        w.put<std::int32_t>(1);
        w.put_str("view" + std::to_string(i));
        w.put<std::uint64_t>(1); // one 2D observation
        w.put<double>(10.0);
        w.put<double>(20.0);
        w.put<std::int64_t>(-1);
    }
    return w.bytes;
}

std::string fixture_points_bin() {
    RawWriter w;
    w.put<std::uint64_t>(3);
    for (int i = 0; i < 3; ++i) {
        w.put<std::uint64_t>(100 + i);
        w.put<double>(i);
        w.put<double>(2.0 * i);
        w.put<double>(3.0 * i);
        w.put<std::uint8_t>(10);
        w.put<std::uint8_t>(20);
        w.put<std::uint8_t>(30);
        w.put<double>(0.5);
        w.put<std::uint64_t>(2);
        w.put<std::int32_t>(1);
        w.put<std::int32_t>(0);
        w.put<std::int32_t>(2);
        w.put<std::int32_t>(0);
    }
    return w.bytes;
}

fs::path temp_dir(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("gsmart_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("colmap binary fixture parses with declared counts") {
    auto model = colmap::parse_model(fixture_cameras_bin(), fixture_images_bin(),
                                     fixture_points_bin(), colmap::Format::Binary);
    CHECK(model.cameras.size() == 1);
    CHECK(model.views.size() == 2);
    CHECK(model.points.size() == 3);
    CHECK(model.cameras.at(1).fx == 500.0);
    CHECK(model.cameras.at(1).fy == 510.0);
    CHECK(model.views[0].view_name == "view1");
    CHECK(model.points[0].point_id == 100);
    CHECK(model.points[0].track_length() == 2);
}

TEST_CASE("colmap empty points stream gives zero points") {
    auto model = colmap::parse_model(fixture_cameras_bin(), fixture_images_bin(), "",
                                     colmap::Format::Binary);
    CHECK(model.points.empty());
}

TEST_CASE("colmap truncated stream reports the byte offset") {
    auto cams = fixture_cameras_bin();
    cams.resize(cams.size() - 4);
    CHECK_THROWS_WITH_AS(
        colmap::parse_model(cams, fixture_images_bin(), "", colmap::Format::Binary),
        doctest::Contains("truncated"), ParseError);
}

TEST_CASE("colmap unknown camera model is rejected") {
    RawWriter w;
    w.put<std::uint64_t>(1);
    w.put<std::int32_t>(1);
    w.put<std::int32_t>(4); // OPENCV, has distortion
    w.put<std::uint64_t>(640);
    w.put<std::uint64_t>(480);
    CHECK_THROWS_WITH_AS(colmap::parse_model(w.bytes, "", "", colmap::Format::Binary),
                         doctest::Contains("camera model"), ParseError);
}

TEST_CASE("colmap dangling camera reference is rejected") {
    RawWriter w;
    w.put<std::uint64_t>(1);
    w.put<std::int32_t>(7);
    w.put<double>(1);
    w.put<double>(0);
    w.put<double>(0);
    w.put<double>(0);
    w.put<double>(0);
    w.put<double>(0);
    w.put<double>(0);
    w.put<std::int32_t>(99); // no such camera
    w.put_str("orphan");
    w.put<std::uint64_t>(0);
    CHECK_THROWS_WITH_AS(
        colmap::parse_model(fixture_cameras_bin(), w.bytes, "", colmap::Format::Binary),
        doctest::Contains("unknown camera"), ParseError);
}

TEST_CASE("colmap dangling track reference is rejected") {
    RawWriter w;
    w.put<std::uint64_t>(1);
    w.put<std::uint64_t>(1);
    w.put<double>(0);
    w.put<double>(0);
    w.put<double>(0);
    w.put<std::uint8_t>(0);
    w.put<std::uint8_t>(0);
    w.put<std::uint8_t>(0);
    w.put<double>(0);
    w.put<std::uint64_t>(1);
    w.put<std::int32_t>(42); // no such view
    w.put<std::int32_t>(0);
    CHECK_THROWS_WITH_AS(
        colmap::parse_model(fixture_cameras_bin(), fixture_images_bin(), w.bytes,
                            colmap::Format::Binary),
        doctest::Contains("unknown view"), ParseError);
}

TEST_CASE("colmap text and binary encodings of one model parse identically") {
    auto model = colmap::parse_model(fixture_cameras_bin(), fixture_images_bin(),
                                     fixture_points_bin(), colmap::Format::Binary);
    for (auto fmt : {colmap::Format::Text, colmap::Format::Binary}) {
        std::string c, i, p;
        colmap::encode_model(model, fmt, c, i, p);
        auto re = colmap::parse_model(c, i, p, fmt);
        REQUIRE(re.cameras.size() == model.cameras.size());
        REQUIRE(re.views.size() == model.views.size());
        REQUIRE(re.points.size() == model.points.size());
        for (const auto& [id, cam] : model.cameras) {
            CHECK(re.cameras.at(id).fx == cam.fx);
            CHECK(re.cameras.at(id).fy == cam.fy);
            CHECK(re.cameras.at(id).cx == cam.cx);
            CHECK(re.cameras.at(id).cy == cam.cy);
            CHECK(re.cameras.at(id).width == cam.width);
        }
        for (std::size_t v = 0; v < model.views.size(); ++v) {
            CHECK(re.views[v].view_name == model.views[v].view_name);
            CHECK(re.views[v].rotation.coeffs() == model.views[v].rotation.coeffs());
            CHECK(re.views[v].translation == model.views[v].translation);
        }
        for (std::size_t j = 0; j < model.points.size(); ++j) {
            CHECK(re.points[j].point_id == model.points[j].point_id);
            CHECK(re.points[j].position == model.points[j].position);
            CHECK(re.points[j].color == model.points[j].color);
            CHECK(re.points[j].reprojection_error == model.points[j].reprojection_error);
            CHECK(re.points[j].track_image_ids == model.points[j].track_image_ids);
        }
    }
}

TEST_CASE("quaternion normalization: near-unit accepted, corrupt rejected") {
    auto images = [](double scale) {
        RawWriter w;
        w.put<std::uint64_t>(1);
        w.put<std::int32_t>(1);
        w.put<double>(scale);
        w.put<double>(0);
        w.put<double>(0);
        w.put<double>(0);
        w.put<double>(0);
        w.put<double>(0);
        w.put<double>(0);
        w.put<std::int32_t>(1);
        w.put_str("v");
        w.put<std::uint64_t>(0);
        return w.bytes;
    };
    auto ok = colmap::parse_model(fixture_cameras_bin(), images(1.0 + 5e-7), "",
                                  colmap::Format::Binary);
    CHECK(std::abs(ok.views[0].rotation.norm() - 1.0) < 1e-12);
    CHECK_THROWS_AS(
        colmap::parse_model(fixture_cameras_bin(), images(1.01), "", colmap::Format::Binary),
        ParseError);
}

TEST_CASE("ply round-trips") {
    auto dir = temp_dir("ply");

    SUBCASE("empty cloud") {
        ply::write({}, dir / "empty.ply");
        CHECK(ply::read(dir / "empty.ply").empty());
    }

    SUBCASE("single exact point") {
        ScenePoint p;
        p.position = {1, 2, 3};
        p.color = {255, 0, 0};
        ply::write({p}, dir / "one.ply");
        auto back = ply::read(dir / "one.ply");
        REQUIRE(back.size() == 1);
        CHECK(back[0].position == Vec3(1, 2, 3));
        CHECK(back[0].color[0] == 255);
        CHECK(back[0].color[1] == 0);
    }

    SUBCASE("10k random points within float32 rounding") {
        Rng rng(7);
        std::vector<ScenePoint> pts;
        for (int i = 0; i < 10000; ++i) {
            ScenePoint p;
            p.point_id = i;
            p.position = {rng.uniform(-100, 100), rng.uniform(-100, 100), rng.uniform(-100, 100)};
            p.color = {static_cast<std::uint8_t>(rng.uniform_index(256)),
                       static_cast<std::uint8_t>(rng.uniform_index(256)),
                       static_cast<std::uint8_t>(rng.uniform_index(256))};
            pts.push_back(p);
        }
        ply::write(pts, dir / "rand.ply");
        auto back = ply::read(dir / "rand.ply");
        REQUIRE(back.size() == pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i) {
            for (int a = 0; a < 3; ++a) {
                float f = static_cast<float>(pts[i].position[a]);
                CHECK(back[i].position[a] == static_cast<double>(f));
            }
            CHECK(back[i].color == pts[i].color);
        }
    }

    SUBCASE("malformed header") {
        std::ofstream f(dir / "bad.ply");
        f << "ply\nformat ascii 1.0\nend_header\n";
        f.close();
        CHECK_THROWS_AS(ply::read(dir / "bad.ply"), ParseError);
    }

    SUBCASE("element count mismatch") {
        ScenePoint p;
        ply::write({p, p}, dir / "short.ply");
        auto bytes = [&] {
            std::ifstream f(dir / "short.ply", std::ios::binary);
            std::string s((std::istreambuf_iterator<char>(f)), {});
            return s;
        }();
        std::ofstream f(dir / "short.ply", std::ios::binary | std::ios::trunc);
        f.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 5));
        f.close();
        CHECK_THROWS_WITH_AS(ply::read(dir / "short.ply"), doctest::Contains("count mismatch"),
                             ParseError);
    }
}

TEST_CASE("mask loading") {
    auto dir = temp_dir("mask");

    SUBCASE("all-zero raster has no segments") {
        png_io::Gray16 img{4, 4, std::vector<std::uint16_t>(16, 0)};
        png_io::write_gray16(img, dir / "z.png");
        auto mask = mask_io::load_mask(dir / "z.png");
        CHECK(mask.areas.empty());
    }

    SUBCASE("half-and-half raster counts areas") {
        png_io::Gray16 img{4, 4, {}};
        for (int y = 0; y < 4; ++y)
            for (int x = 0; x < 4; ++x) img.pixels.push_back(x < 2 ? 1 : 2);
        png_io::write_gray16(img, dir / "h.png");
        auto mask = mask_io::load_mask(dir / "h.png");
        CHECK(mask.areas.at(1) == 8);
        CHECK(mask.areas.at(2) == 8);
        CHECK(mask.bboxes.at(1).w == 2);
        CHECK(mask.bboxes.at(1).h == 4);
    }

    SUBCASE("inconsistent sidecar loses to the recount, with a warning") {
        png_io::Gray16 img{4, 4, {}};
        for (int i = 0; i < 16; ++i) img.pixels.push_back(i < 8 ? 1 : 0);
        png_io::write_gray16(img, dir / "s.png");
        std::ofstream sc(mask_io::sidecar_path(dir / "s.png"));
        sc << "1 7 0 0 4 2\n";
        sc.close();
        std::vector<std::string> warnings;
        auto mask = mask_io::load_mask(dir / "s.png", [&](const std::string& w) { warnings.push_back(w); });
        CHECK(mask.areas.at(1) == 8);
        REQUIRE(!warnings.empty());
        CHECK(warnings[0].find("recount wins") != std::string::npos);
    }

    SUBCASE("area partition covers the raster") {
        png_io::Gray16 img{8, 8, {}};
        Rng rng(3);
        for (int i = 0; i < 64; ++i) img.pixels.push_back(static_cast<std::uint16_t>(rng.uniform_index(4)));
        png_io::write_gray16(img, dir / "p.png");
        auto mask = mask_io::load_mask(dir / "p.png");
        std::uint64_t labeled = 0;
        for (const auto& [k, a] : mask.areas) labeled += a;
        std::uint64_t unlabeled = 0;
        for (auto v : mask.labels)
            if (v == 0) ++unlabeled;
        CHECK(labeled + unlabeled == 64);
    }
}

TEST_CASE("embedding file round-trip and errors") {
    auto dir = temp_dir("emb");

    SUBCASE("small fixture") {
        // independent writer
        std::ofstream f(dir / "e.emb", std::ios::binary);
        f.write("EMB1", 4);
        std::uint32_t dim = 3;
        f.write(reinterpret_cast<const char*>(&dim), 4);
        float vals[3] = {1, 0, 0};
        f.write(reinterpret_cast<const char*>(vals), 12);
        f.close();
        auto v = embedding::load(dir / "e.emb");
        REQUIRE(v.dim() == 3);
        CHECK(v.values[0] == 1.0);
        CHECK(v.values[1] == 0.0);
    }

    SUBCASE("768-dim random values are bit-exact") {
        Rng rng(11);
        std::vector<float> vals(768);
        for (auto& x : vals) x = static_cast<float>(rng.uniform(-5, 5));
        std::ofstream f(dir / "big.emb", std::ios::binary);
        f.write("EMB1", 4);
        std::uint32_t dim = 768;
        f.write(reinterpret_cast<const char*>(&dim), 4);
        f.write(reinterpret_cast<const char*>(vals.data()), 768 * 4);
        f.close();
        auto v = embedding::load(dir / "big.emb");
        REQUIRE(v.dim() == 768);
        for (int i = 0; i < 768; ++i) CHECK(static_cast<float>(v.values[i]) == vals[i]);
    }

    SUBCASE("truncation, bad magic, NaN") {
        std::ofstream f(dir / "t.emb", std::ios::binary);
        f.write("EMB1", 4);
        std::uint32_t dim = 4;
        f.write(reinterpret_cast<const char*>(&dim), 4);
        float vals[2] = {1, 2}; // payload short by half
        f.write(reinterpret_cast<const char*>(vals), 8);
        f.close();
        CHECK_THROWS_WITH_AS(embedding::load(dir / "t.emb"), doctest::Contains("byte length"),
                             ParseError);

        std::ofstream g(dir / "m.emb", std::ios::binary);
        g.write("XXXX", 4);
        g.write(reinterpret_cast<const char*>(&dim), 4);
        g.close();
        CHECK_THROWS_WITH_AS(embedding::load(dir / "m.emb"), doctest::Contains("magic"), ParseError);

        std::ofstream h(dir / "n.emb", std::ios::binary);
        h.write("EMB1", 4);
        std::uint32_t d1 = 1;
        h.write(reinterpret_cast<const char*>(&d1), 4);
        float nanv = std::nanf("");
        h.write(reinterpret_cast<const char*>(&nanv), 4);
        h.close();
        CHECK_THROWS_WITH_AS(embedding::load(dir / "n.emb"), doctest::Contains("non-finite"),
                             ParseError);
    }

    SUBCASE("save/load round-trip") {
        EmbeddingVector v;
        v.values.resize(5);
        v.values << 0.25, -1.5, 3.0, 0.0, 42.0;
        embedding::save(v, dir / "rt.emb");
        auto back = embedding::load(dir / "rt.emb");
        CHECK(back.values == v.values);
    }
}
