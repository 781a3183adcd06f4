#include "gsmart/ply.hpp"
#include "gsmart/error.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

namespace gsmart::ply {

namespace {

struct Property {
    std::string type;
    std::string name;
};

std::size_t type_size(const std::string& t) {
    if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
    if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
    if (t == "int" || t == "uint" || t == "float" || t == "int32" || t == "uint32" ||
        t == "float32")
        return 4;
    if (t == "double" || t == "float64" || t == "int64" || t == "uint64") return 8;
    throw ParseError("PLY: unknown property type '" + t + "'");
}

} // namespace

void write(const std::vector<ScenePoint>& points, const std::filesystem::path& path) {
    for (const auto& p : points)
        if (!p.position.allFinite())
            throw DataError("PLY write: non-finite position for point " + std::to_string(p.point_id));
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("cannot write " + path.string());
    f << "ply\nformat binary_little_endian 1.0\n"
      << "element vertex " << points.size() << '\n'
      << "property float x\nproperty float y\nproperty float z\n"
      << "property uchar red\nproperty uchar green\nproperty uchar blue\n"
      << "end_header\n";
    for (const auto& p : points) {
        float xyz[3] = {static_cast<float>(p.position.x()), static_cast<float>(p.position.y()),
                        static_cast<float>(p.position.z())};
        f.write(reinterpret_cast<const char*>(xyz), 12);
        f.write(reinterpret_cast<const char*>(p.color.data()), 3);
    }
}

std::vector<ScenePoint> read(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open " + path.string());

    std::string line;
    if (!std::getline(f, line) || (line != "ply" && line != "ply\r"))
        throw ParseError(path.string() + ": missing 'ply' magic");
    bool binary_le = false;
    std::size_t vertex_count = 0;
    std::vector<Property> props;
    bool in_vertex = false;
    bool seen_end = false;
    while (std::getline(f, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ss(line);
        std::string kw;
        ss >> kw;
        if (kw == "comment") continue;
        if (kw == "format") {
            std::string fmt;
            ss >> fmt;
            binary_le = (fmt == "binary_little_endian");
            if (!binary_le) throw ParseError(path.string() + ": only binary_little_endian supported");
        } else if (kw == "element") {
            std::string name;
            std::size_t n;
            ss >> name >> n;
            in_vertex = (name == "vertex");
            if (in_vertex) vertex_count = n;
            else if (n != 0)
                throw ParseError(path.string() + ": unsupported non-empty element '" + name + "'");
        } else if (kw == "property") {
            if (!in_vertex) continue;
            Property p;
            ss >> p.type >> p.name;
            if (p.type == "list") throw ParseError(path.string() + ": list property on vertex");
            props.push_back(p);
        } else if (kw == "end_header") {
            seen_end = true;
            break;
        } else {
            throw ParseError(path.string() + ": malformed header line '" + line + "'");
        }
    }
    if (!seen_end) throw ParseError(path.string() + ": header missing end_header");

    std::size_t stride = 0;
    long off_x = -1, off_y = -1, off_z = -1, off_r = -1, off_g = -1, off_b = -1;
    for (const auto& p : props) {
        if (p.name == "x") off_x = static_cast<long>(stride);
        if (p.name == "y") off_y = static_cast<long>(stride);
        if (p.name == "z") off_z = static_cast<long>(stride);
        if (p.name == "red") off_r = static_cast<long>(stride);
        if (p.name == "green") off_g = static_cast<long>(stride);
        if (p.name == "blue") off_b = static_cast<long>(stride);
        stride += type_size(p.type);
    }
    if (off_x < 0 || off_y < 0 || off_z < 0 || off_r < 0 || off_g < 0 || off_b < 0)
        throw ParseError(path.string() + ": vertex element lacks x,y,z,red,green,blue");

    std::vector<char> rec(stride);
    std::vector<ScenePoint> out;
    out.reserve(vertex_count);
    for (std::size_t i = 0; i < vertex_count; ++i) {
        f.read(rec.data(), static_cast<std::streamsize>(stride));
        if (static_cast<std::size_t>(f.gcount()) != stride)
            throw ParseError(path.string() + ": element count mismatch, expected " +
                             std::to_string(vertex_count) + " vertices, stream ended at " +
                             std::to_string(i));
        ScenePoint pt;
        pt.point_id = i;
        float v;
        std::memcpy(&v, rec.data() + off_x, 4);
        pt.position.x() = v;
        std::memcpy(&v, rec.data() + off_y, 4);
        pt.position.y() = v;
        std::memcpy(&v, rec.data() + off_z, 4);
        pt.position.z() = v;
        pt.color[0] = static_cast<std::uint8_t>(rec[off_r]);
        pt.color[1] = static_cast<std::uint8_t>(rec[off_g]);
        pt.color[2] = static_cast<std::uint8_t>(rec[off_b]);
        out.push_back(pt);
    }
    return out;
}

} // namespace gsmart::ply
