#include "gsmart/colmap.hpp"
#include "gsmart/error.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace gsmart::colmap {

namespace {

// COLMAP model ids
constexpr std::int32_t kSimplePinholeId = 0;
constexpr std::int32_t kPinholeId = 1;

constexpr double kQuatUnitTol = 1e-6;

class ByteReader {
public:
    ByteReader(const std::string& data, std::string stream_name)
        : data_(data), name_(std::move(stream_name)) {}

    template <typename T>
    T read() {
        static_assert(std::is_trivially_copyable_v<T>);
        if (pos_ + sizeof(T) > data_.size())
            throw ParseError(name_ + ": truncated stream at byte offset " + std::to_string(pos_));
        T v;
        std::memcpy(&v, data_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }

    std::string read_cstring() {
        std::string s;
        while (true) {
            if (pos_ >= data_.size())
                throw ParseError(name_ + ": unterminated string at byte offset " + std::to_string(pos_));
            char c = data_[pos_++];
            if (c == '\0') break;
            s.push_back(c);
        }
        return s;
    }

    std::size_t offset() const { return pos_; }
    bool exhausted() const { return pos_ >= data_.size(); }

private:
    const std::string& data_;
    std::string name_;
    std::size_t pos_ = 0;
};

class ByteWriter {
public:
    template <typename T>
    void write(T v) {
        static_assert(std::is_trivially_copyable_v<T>);
        const char* p = reinterpret_cast<const char*>(&v);
        out_.append(p, sizeof(T));
    }
    void write_cstring(const std::string& s) {
        out_.append(s);
        out_.push_back('\0');
    }
    std::string take() { return std::move(out_); }

private:
    std::string out_;
};

Eigen::Quaterniond normalize_quat(double qw, double qx, double qy, double qz,
                                  const std::string& where) {
    Eigen::Quaterniond q(qw, qx, qy, qz);
    double n = q.norm();
    if (std::abs(n - 1.0) > kQuatUnitTol)
        throw ParseError(where + ": quaternion norm " + std::to_string(n) + " is not unit");
    // renormalize only when the deviation exceeds double-precision dust, so
    // parsing an already-unit quaternion is bit-exact (round-trip stability)
    if (std::abs(n - 1.0) > 1e-12) q.normalize();
    if (q.w() < 0) q.coeffs() = -q.coeffs();
    return q;
}

CameraIntrinsics make_camera(std::int32_t id, std::int32_t model_id,
                             std::uint64_t w, std::uint64_t h,
                             const std::vector<double>& params,
                             const std::string& where) {
    CameraIntrinsics cam;
    cam.camera_id = id;
    cam.width = w;
    cam.height = h;
    if (model_id == kSimplePinholeId) {
        cam.model_kind = CameraModelKind::SimplePinhole;
        cam.fx = cam.fy = params.at(0);
        cam.cx = params.at(1);
        cam.cy = params.at(2);
    } else if (model_id == kPinholeId) {
        cam.model_kind = CameraModelKind::Pinhole;
        cam.fx = params.at(0);
        cam.fy = params.at(1);
        cam.cx = params.at(2);
        cam.cy = params.at(3);
    } else {
        throw ParseError(where + ": unsupported camera model id " + std::to_string(model_id) +
                         " (only PINHOLE and SIMPLE_PINHOLE are accepted)");
    }
    if (cam.width == 0 || cam.height == 0)
        throw ParseError(where + ": camera " + std::to_string(id) + " has zero dimension");
    if (cam.fx <= 0 || cam.fy <= 0)
        throw ParseError(where + ": camera " + std::to_string(id) + " has non-positive focal length");
    return cam;
}

std::size_t param_count(std::int32_t model_id, const std::string& where) {
    if (model_id == kSimplePinholeId) return 3;
    if (model_id == kPinholeId) return 4;
    throw ParseError(where + ": unsupported camera model id " + std::to_string(model_id) +
                     " (only PINHOLE and SIMPLE_PINHOLE are accepted)");
}

// ---------------------------------------------------------------- binary ---

void parse_cameras_bin(const std::string& bytes, SceneModel& model) {
    ByteReader r(bytes, "cameras.bin");
    auto n = r.read<std::uint64_t>();
    for (std::uint64_t i = 0; i < n; ++i) {
        std::string where = "cameras.bin record " + std::to_string(i) +
                            " (offset " + std::to_string(r.offset()) + ")";
        auto id = r.read<std::int32_t>();
        auto model_id = r.read<std::int32_t>();
        auto w = r.read<std::uint64_t>();
        auto h = r.read<std::uint64_t>();
        std::vector<double> params(param_count(model_id, where));
        for (auto& p : params) p = r.read<double>();
        model.cameras[id] = make_camera(id, model_id, w, h, params, where);
    }
    if (model.cameras.size() != n)
        throw ParseError("cameras.bin: duplicate camera ids");
}

void parse_images_bin(const std::string& bytes, SceneModel& model) {
    ByteReader r(bytes, "images.bin");
    auto n = r.read<std::uint64_t>();
    for (std::uint64_t i = 0; i < n; ++i) {
        std::string where = "images.bin record " + std::to_string(i) +
                            " (offset " + std::to_string(r.offset()) + ")";
        CameraPose pose;
        pose.image_id = r.read<std::int32_t>();
        double qw = r.read<double>(), qx = r.read<double>(), qy = r.read<double>(), qz = r.read<double>();
        pose.rotation = normalize_quat(qw, qx, qy, qz, where);
        pose.translation = {r.read<double>(), r.read<double>(), r.read<double>()};
        pose.camera_id = r.read<std::int32_t>();
        pose.view_name = r.read_cstring();
        if (!model.cameras.count(pose.camera_id))
            throw ParseError(where + ": view '" + pose.view_name + "' references unknown camera " +
                             std::to_string(pose.camera_id));
        auto n2d = r.read<std::uint64_t>();
        for (std::uint64_t j = 0; j < n2d; ++j) {
            r.read<double>();
            r.read<double>();
            r.read<std::int64_t>();
        }
        model.views.push_back(std::move(pose));
    }
}

void parse_points_bin(const std::string& bytes, SceneModel& model) {
    ByteReader r(bytes, "points3D.bin");
    if (bytes.empty()) return; // empty stream = no points
    auto n = r.read<std::uint64_t>();
    std::set<std::int32_t> view_ids;
    for (const auto& v : model.views) view_ids.insert(v.image_id);
    for (std::uint64_t i = 0; i < n; ++i) {
        std::string where = "points3D.bin record " + std::to_string(i) +
                            " (offset " + std::to_string(r.offset()) + ")";
        ScenePoint pt;
        pt.point_id = r.read<std::uint64_t>();
        pt.position = {r.read<double>(), r.read<double>(), r.read<double>()};
        pt.color[0] = r.read<std::uint8_t>();
        pt.color[1] = r.read<std::uint8_t>();
        pt.color[2] = r.read<std::uint8_t>();
        pt.reprojection_error = r.read<double>();
        if (!pt.position.allFinite())
            throw ParseError(where + ": non-finite position");
        auto track_len = r.read<std::uint64_t>();
        pt.track_image_ids.reserve(track_len);
        for (std::uint64_t j = 0; j < track_len; ++j) {
            auto image_id = r.read<std::int32_t>();
            r.read<std::int32_t>(); // point2D index, unused
            if (!view_ids.count(image_id))
                throw ParseError(where + ": track references unknown view " + std::to_string(image_id));
            pt.track_image_ids.push_back(image_id);
        }
        model.points.push_back(std::move(pt));
    }
}

// ------------------------------------------------------------------ text ---

// yields non-comment, non-blank lines with their 1-based line numbers
std::vector<std::pair<std::size_t, std::string>> content_lines(const std::string& text) {
    std::vector<std::pair<std::size_t, std::string>> out;
    std::istringstream ss(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        out.emplace_back(lineno, line);
    }
    return out;
}

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> toks;
    std::istringstream ss(line);
    std::string t;
    while (ss >> t) toks.push_back(t);
    return toks;
}

double to_double(const std::string& s, std::size_t lineno, const char* stream) {
    try {
        std::size_t pos;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError(std::string(stream) + " line " + std::to_string(lineno) +
                         ": expected number, got '" + s + "'");
    }
}

long long to_int(const std::string& s, std::size_t lineno, const char* stream) {
    try {
        std::size_t pos;
        long long v = std::stoll(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError(std::string(stream) + " line " + std::to_string(lineno) +
                         ": expected integer, got '" + s + "'");
    }
}

void parse_cameras_txt(const std::string& text, SceneModel& model) {
    for (const auto& [lineno, line] : content_lines(text)) {
        auto toks = tokenize(line);
        std::string where = "cameras.txt line " + std::to_string(lineno);
        if (toks.size() < 4) throw ParseError(where + ": too few fields");
        auto id = static_cast<std::int32_t>(to_int(toks[0], lineno, "cameras.txt"));
        std::int32_t model_id;
        if (toks[1] == "SIMPLE_PINHOLE") model_id = kSimplePinholeId;
        else if (toks[1] == "PINHOLE") model_id = kPinholeId;
        else
            throw ParseError(where + ": unsupported camera model '" + toks[1] +
                             "' (only PINHOLE and SIMPLE_PINHOLE are accepted)");
        auto w = static_cast<std::uint64_t>(to_int(toks[2], lineno, "cameras.txt"));
        auto h = static_cast<std::uint64_t>(to_int(toks[3], lineno, "cameras.txt"));
        std::size_t np = param_count(model_id, where);
        if (toks.size() != 4 + np) throw ParseError(where + ": wrong parameter count");
        std::vector<double> params(np);
        for (std::size_t i = 0; i < np; ++i) params[i] = to_double(toks[4 + i], lineno, "cameras.txt");
        model.cameras[id] = make_camera(id, model_id, w, h, params, where);
    }
}

void parse_images_txt(const std::string& text, SceneModel& model) {
    // keep blank lines: a view with no observations has an empty 2D-point line
    std::vector<std::pair<std::size_t, std::string>> lines;
    {
        std::istringstream ss(text);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(ss, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            auto first = line.find_first_not_of(" \t");
            if (first != std::string::npos && line[first] == '#') continue;
            lines.emplace_back(lineno, line);
        }
        while (!lines.empty() && lines.back().second.empty() &&
               lines.size() % 2 == 1)
            lines.pop_back(); // trailing newline artifact
    }
    // images.txt alternates pose lines and 2D-point lines
    for (std::size_t i = 0; i < lines.size(); i += 2) {
        const auto& [lineno, line] = lines[i];
        std::string where = "images.txt line " + std::to_string(lineno);
        auto toks = tokenize(line);
        if (toks.size() < 10) throw ParseError(where + ": too few fields for a pose line");
        CameraPose pose;
        pose.image_id = static_cast<std::int32_t>(to_int(toks[0], lineno, "images.txt"));
        double qw = to_double(toks[1], lineno, "images.txt");
        double qx = to_double(toks[2], lineno, "images.txt");
        double qy = to_double(toks[3], lineno, "images.txt");
        double qz = to_double(toks[4], lineno, "images.txt");
        pose.rotation = normalize_quat(qw, qx, qy, qz, where);
        pose.translation = {to_double(toks[5], lineno, "images.txt"),
                            to_double(toks[6], lineno, "images.txt"),
                            to_double(toks[7], lineno, "images.txt")};
        pose.camera_id = static_cast<std::int32_t>(to_int(toks[8], lineno, "images.txt"));
        pose.view_name = toks[9];
        if (!model.cameras.count(pose.camera_id))
            throw ParseError(where + ": view '" + pose.view_name + "' references unknown camera " +
                             std::to_string(pose.camera_id));
        if (i + 1 >= lines.size())
            throw ParseError(where + ": missing 2D-point line for view '" + pose.view_name + "'");
        model.views.push_back(std::move(pose));
    }
}

void parse_points_txt(const std::string& text, SceneModel& model) {
    std::set<std::int32_t> view_ids;
    for (const auto& v : model.views) view_ids.insert(v.image_id);
    for (const auto& [lineno, line] : content_lines(text)) {
        std::string where = "points3D.txt line " + std::to_string(lineno);
        auto toks = tokenize(line);
        if (toks.size() < 8) throw ParseError(where + ": too few fields");
        if ((toks.size() - 8) % 2 != 0) throw ParseError(where + ": dangling track element");
        ScenePoint pt;
        pt.point_id = static_cast<std::uint64_t>(to_int(toks[0], lineno, "points3D.txt"));
        pt.position = {to_double(toks[1], lineno, "points3D.txt"),
                       to_double(toks[2], lineno, "points3D.txt"),
                       to_double(toks[3], lineno, "points3D.txt")};
        if (!pt.position.allFinite()) throw ParseError(where + ": non-finite position");
        for (int c = 0; c < 3; ++c) {
            long long v = to_int(toks[4 + c], lineno, "points3D.txt");
            if (v < 0 || v > 255) throw ParseError(where + ": color channel out of [0,255]");
            pt.color[c] = static_cast<std::uint8_t>(v);
        }
        pt.reprojection_error = to_double(toks[7], lineno, "points3D.txt");
        for (std::size_t j = 8; j < toks.size(); j += 2) {
            auto image_id = static_cast<std::int32_t>(to_int(toks[j], lineno, "points3D.txt"));
            if (!view_ids.count(image_id))
                throw ParseError(where + ": track references unknown view " + std::to_string(image_id));
            pt.track_image_ids.push_back(image_id);
        }
        model.points.push_back(std::move(pt));
    }
}

// --------------------------------------------------------------- encoding ---

std::string encode_cameras_bin(const SceneModel& model) {
    ByteWriter w;
    w.write<std::uint64_t>(model.cameras.size());
    for (const auto& [id, cam] : model.cameras) {
        w.write<std::int32_t>(id);
        if (cam.model_kind == CameraModelKind::SimplePinhole) {
            w.write<std::int32_t>(kSimplePinholeId);
            w.write<std::uint64_t>(cam.width);
            w.write<std::uint64_t>(cam.height);
            w.write<double>(cam.fx);
            w.write<double>(cam.cx);
            w.write<double>(cam.cy);
        } else {
            w.write<std::int32_t>(kPinholeId);
            w.write<std::uint64_t>(cam.width);
            w.write<std::uint64_t>(cam.height);
            w.write<double>(cam.fx);
            w.write<double>(cam.fy);
            w.write<double>(cam.cx);
            w.write<double>(cam.cy);
        }
    }
    return w.take();
}

std::string encode_images_bin(const SceneModel& model) {
    ByteWriter w;
    w.write<std::uint64_t>(model.views.size());
    for (const auto& v : model.views) {
        w.write<std::int32_t>(v.image_id);
        w.write<double>(v.rotation.w());
        w.write<double>(v.rotation.x());
        w.write<double>(v.rotation.y());
        w.write<double>(v.rotation.z());
        w.write<double>(v.translation.x());
        w.write<double>(v.translation.y());
        w.write<double>(v.translation.z());
        w.write<std::int32_t>(v.camera_id);
        w.write_cstring(v.view_name);
        w.write<std::uint64_t>(0); // 2D observations are not retained
    }
    return w.take();
}

std::string encode_points_bin(const SceneModel& model) {
    ByteWriter w;
    w.write<std::uint64_t>(model.points.size());
    for (const auto& p : model.points) {
        w.write<std::uint64_t>(p.point_id);
        w.write<double>(p.position.x());
        w.write<double>(p.position.y());
        w.write<double>(p.position.z());
        w.write<std::uint8_t>(p.color[0]);
        w.write<std::uint8_t>(p.color[1]);
        w.write<std::uint8_t>(p.color[2]);
        w.write<double>(p.reprojection_error);
        w.write<std::uint64_t>(p.track_image_ids.size());
        for (std::size_t j = 0; j < p.track_image_ids.size(); ++j) {
            w.write<std::int32_t>(p.track_image_ids[j]);
            w.write<std::int32_t>(static_cast<std::int32_t>(j));
        }
    }
    return w.take();
}

std::string fmt(double v) {
    std::ostringstream ss;
    ss << std::setprecision(17) << v;
    return ss.str();
}

std::string encode_cameras_txt(const SceneModel& model) {
    std::ostringstream ss;
    ss << "# Camera list: CAMERA_ID MODEL WIDTH HEIGHT PARAMS[]\n";
    for (const auto& [id, cam] : model.cameras) {
        if (cam.model_kind == CameraModelKind::SimplePinhole)
            ss << id << " SIMPLE_PINHOLE " << cam.width << ' ' << cam.height << ' ' << fmt(cam.fx)
               << ' ' << fmt(cam.cx) << ' ' << fmt(cam.cy) << '\n';
        else
            ss << id << " PINHOLE " << cam.width << ' ' << cam.height << ' ' << fmt(cam.fx) << ' '
               << fmt(cam.fy) << ' ' << fmt(cam.cx) << ' ' << fmt(cam.cy) << '\n';
    }
    return ss.str();
}

std::string encode_images_txt(const SceneModel& model) {
    std::ostringstream ss;
    ss << "# Image list: IMAGE_ID QW QX QY QZ TX TY TZ CAMERA_ID NAME\n";
    for (const auto& v : model.views) {
        ss << v.image_id << ' ' << fmt(v.rotation.w()) << ' ' << fmt(v.rotation.x()) << ' '
           << fmt(v.rotation.y()) << ' ' << fmt(v.rotation.z()) << ' ' << fmt(v.translation.x())
           << ' ' << fmt(v.translation.y()) << ' ' << fmt(v.translation.z()) << ' ' << v.camera_id
           << ' ' << v.view_name << '\n';
        ss << '\n'; // empty 2D-point line (observations are not retained)
    }
    return ss.str();
}

std::string encode_points_txt(const SceneModel& model) {
    std::ostringstream ss;
    ss << "# 3D point list: POINT3D_ID X Y Z R G B ERROR TRACK[] as (IMAGE_ID POINT2D_IDX)\n";
    for (const auto& p : model.points) {
        ss << p.point_id << ' ' << fmt(p.position.x()) << ' ' << fmt(p.position.y()) << ' '
           << fmt(p.position.z()) << ' ' << int(p.color[0]) << ' ' << int(p.color[1]) << ' '
           << int(p.color[2]) << ' ' << fmt(p.reprojection_error);
        for (std::size_t j = 0; j < p.track_image_ids.size(); ++j)
            ss << ' ' << p.track_image_ids[j] << ' ' << j;
        ss << '\n';
    }
    return ss.str();
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    if (!f) throw DataError("cannot open " + p.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void spit(const std::filesystem::path& p, const std::string& data) {
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("cannot write " + p.string());
    f.write(data.data(), static_cast<std::streamsize>(data.size()));
}

} // namespace

SceneModel parse_model(const std::string& camera_bytes, const std::string& image_bytes,
                       const std::string& point_bytes, Format format) {
    SceneModel model;
    if (format == Format::Binary) {
        parse_cameras_bin(camera_bytes, model);
        parse_images_bin(image_bytes, model);
        parse_points_bin(point_bytes, model);
    } else {
        parse_cameras_txt(camera_bytes, model);
        parse_images_txt(image_bytes, model);
        parse_points_txt(point_bytes, model);
    }
    std::sort(model.views.begin(), model.views.end(),
              [](const CameraPose& a, const CameraPose& b) { return a.image_id < b.image_id; });
    return model;
}

SceneModel read_model_dir(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    if (fs::exists(dir / "cameras.bin"))
        return parse_model(slurp(dir / "cameras.bin"), slurp(dir / "images.bin"),
                           slurp(dir / "points3D.bin"), Format::Binary);
    if (fs::exists(dir / "cameras.txt"))
        return parse_model(slurp(dir / "cameras.txt"), slurp(dir / "images.txt"),
                           slurp(dir / "points3D.txt"), Format::Text);
    throw DataError("no COLMAP model (cameras.bin or cameras.txt) found in " + dir.string());
}

void encode_model(const SceneModel& model, Format format, std::string& camera_bytes,
                  std::string& image_bytes, std::string& point_bytes) {
    if (format == Format::Binary) {
        camera_bytes = encode_cameras_bin(model);
        image_bytes = encode_images_bin(model);
        point_bytes = encode_points_bin(model);
    } else {
        camera_bytes = encode_cameras_txt(model);
        image_bytes = encode_images_txt(model);
        point_bytes = encode_points_txt(model);
    }
}

void write_model_dir(const SceneModel& model, const std::filesystem::path& dir, Format format) {
    std::filesystem::create_directories(dir);
    std::string c, i, p;
    encode_model(model, format, c, i, p);
    const char* ext = format == Format::Binary ? ".bin" : ".txt";
    spit(dir / (std::string("cameras") + ext), c);
    spit(dir / (std::string("images") + ext), i);
    spit(dir / (std::string("points3D") + ext), p);
}

} // namespace gsmart::colmap
