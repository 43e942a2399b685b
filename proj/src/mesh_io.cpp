#include "esm/mesh_io.h"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <sstream>

namespace esm {

namespace {

std::string lowercase_ext(const std::string& path) {
    auto pos = path.find_last_of('.');
    if (pos == std::string::npos) return "";
    std::string ext = path.substr(pos + 1);
    std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
    return ext;
}

// Strips comments and returns the next non-empty line.
bool next_content_line(std::istream& in, std::string& line) {
    while (std::getline(in, line)) {
        auto h = line.find('#');
        if (h != std::string::npos) line.erase(h);
        if (line.find_first_not_of(" \t\r\n") != std::string::npos) return true;
    }
    return false;
}

Shape parse_off(std::istream& in, const std::string& path) {
    std::string line;
    if (!next_content_line(in, line)) throw parse_error(path + ": empty OFF file");
    {
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag != "OFF") throw parse_error(path + ": missing OFF header");
    }
    if (!next_content_line(in, line)) throw parse_error(path + ": missing OFF counts");
    std::size_t nv = 0, nf = 0, ne = 0;
    {
        std::istringstream ls(line);
        if (!(ls >> nv >> nf >> ne)) throw parse_error(path + ": bad OFF counts line");
    }
    std::vector<Vec3> verts(nv);
    for (std::size_t i = 0; i < nv; ++i) {
        if (!next_content_line(in, line)) throw parse_error(path + ": truncated vertex list");
        std::istringstream ls(line);
        if (!(ls >> verts[i].x >> verts[i].y >> verts[i].z))
            throw parse_error(path + ": bad vertex line");
    }
    std::vector<Triangle> tris(nf);
    for (std::size_t i = 0; i < nf; ++i) {
        if (!next_content_line(in, line)) throw parse_error(path + ": truncated face list");
        std::istringstream ls(line);
        int cnt = 0;
        if (!(ls >> cnt)) throw parse_error(path + ": bad face line");
        if (cnt != 3) throw parse_error(path + ": only triangle faces are supported");
        long a, b, c;
        if (!(ls >> a >> b >> c)) throw parse_error(path + ": bad face indices");
        tris[i] = {static_cast<index_t>(a), static_cast<index_t>(b), static_cast<index_t>(c)};
    }
    return Shape::build(std::move(verts), std::move(tris));
}

struct PlyProperty {
    std::string type;       // float, double, uchar, int, ...
    std::string name;
    bool is_list = false;
    std::string count_type;  // for lists
};

std::size_t scalar_size(const std::string& t) {
    if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
    if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
    if (t == "int" || t == "uint" || t == "int32" || t == "uint32" || t == "float" ||
        t == "float32")
        return 4;
    if (t == "double" || t == "float64") return 8;
    throw parse_error("unknown PLY scalar type: " + t);
}

double read_binary_scalar(std::istream& in, const std::string& t) {
    unsigned char buf[8];
    std::size_t n = scalar_size(t);
    in.read(reinterpret_cast<char*>(buf), static_cast<std::streamsize>(n));
    if (!in) throw parse_error("truncated PLY binary data");
    // Host is assumed little-endian (x86/ARM); data is little-endian per header.
    if (t == "float" || t == "float32") {
        float f;
        std::memcpy(&f, buf, 4);
        return f;
    }
    if (t == "double" || t == "float64") {
        double d;
        std::memcpy(&d, buf, 8);
        return d;
    }
    std::uint64_t u = 0;
    for (std::size_t i = 0; i < n; ++i) u |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    if (t[0] == 'u' || t == "uchar") return static_cast<double>(u);
    // sign-extend
    std::int64_t s = static_cast<std::int64_t>(u << (64 - 8 * n)) >> (64 - 8 * n);
    return static_cast<double>(s);
}

Shape parse_ply(std::istream& in, const std::string& path, std::optional<VertexColors>* colors) {
    std::string line;
    if (!std::getline(in, line)) throw parse_error(path + ": empty PLY file");
    if (line.rfind("ply", 0) != 0) throw parse_error(path + ": missing ply magic");

    bool binary = false;
    struct Element {
        std::string name;
        std::size_t count = 0;
        std::vector<PlyProperty> props;
    };
    std::vector<Element> elements;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::string kw;
        ls >> kw;
        if (kw == "comment" || kw == "obj_info" || kw.empty()) continue;
        if (kw == "format") {
            std::string fmt;
            ls >> fmt;
            if (fmt == "ascii")
                binary = false;
            else if (fmt == "binary_little_endian")
                binary = true;
            else
                throw parse_error(path + ": unsupported PLY format " + fmt);
        } else if (kw == "element") {
            Element el;
            ls >> el.name >> el.count;
            elements.push_back(el);
        } else if (kw == "property") {
            if (elements.empty()) throw parse_error(path + ": property before element");
            PlyProperty p;
            std::string t;
            ls >> t;
            if (t == "list") {
                p.is_list = true;
                ls >> p.count_type >> p.type >> p.name;
            } else {
                p.type = t;
                ls >> p.name;
            }
            elements.back().props.push_back(p);
        } else if (kw == "end_header") {
            break;
        } else {
            throw parse_error(path + ": unknown PLY header keyword " + kw);
        }
    }

    std::vector<Vec3> verts;
    std::vector<Triangle> tris;
    std::vector<std::array<std::uint8_t, 3>> rgb;
    bool has_rgb = false;

    auto read_ascii_tokens = [&](std::vector<double>& out, std::size_t n) {
        out.clear();
        double v;
        while (out.size() < n && in >> v) out.push_back(v);
        if (out.size() < n) throw parse_error(path + ": truncated PLY ascii data");
    };

    for (const auto& el : elements) {
        if (el.name == "vertex") {
            int xi = -1, yi = -1, zi = -1, ri = -1, gi = -1, bi = -1;
            for (std::size_t i = 0; i < el.props.size(); ++i) {
                const std::string& n = el.props[i].name;
                if (n == "x") xi = static_cast<int>(i);
                if (n == "y") yi = static_cast<int>(i);
                if (n == "z") zi = static_cast<int>(i);
                if (n == "red") ri = static_cast<int>(i);
                if (n == "green") gi = static_cast<int>(i);
                if (n == "blue") bi = static_cast<int>(i);
            }
            if (xi < 0 || yi < 0 || zi < 0) throw parse_error(path + ": vertex lacks x/y/z");
            has_rgb = ri >= 0 && gi >= 0 && bi >= 0;
            std::vector<double> vals;
            for (std::size_t v = 0; v < el.count; ++v) {
                vals.clear();
                for (const auto& p : el.props) {
                    if (p.is_list) throw parse_error(path + ": list property on vertex");
                    if (binary)
                        vals.push_back(read_binary_scalar(in, p.type));
                    else {
                        double d;
                        if (!(in >> d)) throw parse_error(path + ": truncated vertex data");
                        vals.push_back(d);
                    }
                }
                verts.push_back({vals[xi], vals[yi], vals[zi]});
                if (has_rgb)
                    rgb.push_back({static_cast<std::uint8_t>(vals[ri]),
                                   static_cast<std::uint8_t>(vals[gi]),
                                   static_cast<std::uint8_t>(vals[bi])});
            }
        } else if (el.name == "face") {
            for (std::size_t f = 0; f < el.count; ++f) {
                for (const auto& p : el.props) {
                    if (p.is_list && (p.name == "vertex_indices" || p.name == "vertex_index")) {
                        std::size_t cnt;
                        std::vector<double> idx;
                        if (binary) {
                            cnt = static_cast<std::size_t>(read_binary_scalar(in, p.count_type));
                            idx.resize(cnt);
                            for (std::size_t i = 0; i < cnt; ++i)
                                idx[i] = read_binary_scalar(in, p.type);
                        } else {
                            double c;
                            if (!(in >> c)) throw parse_error(path + ": truncated face data");
                            cnt = static_cast<std::size_t>(c);
                            read_ascii_tokens(idx, cnt);
                        }
                        if (cnt != 3)
                            throw parse_error(path + ": only triangle faces are supported");
                        tris.push_back({static_cast<index_t>(idx[0]), static_cast<index_t>(idx[1]),
                                        static_cast<index_t>(idx[2])});
                    } else if (p.is_list) {
                        // skip unknown list
                        std::size_t cnt;
                        if (binary) {
                            cnt = static_cast<std::size_t>(read_binary_scalar(in, p.count_type));
                            for (std::size_t i = 0; i < cnt; ++i) read_binary_scalar(in, p.type);
                        } else {
                            double c;
                            in >> c;
                            cnt = static_cast<std::size_t>(c);
                            double d;
                            for (std::size_t i = 0; i < cnt; ++i) in >> d;
                        }
                    } else {
                        if (binary)
                            read_binary_scalar(in, p.type);
                        else {
                            double d;
                            in >> d;
                        }
                    }
                }
            }
        } else {
            // skip unknown element
            for (std::size_t r = 0; r < el.count; ++r) {
                for (const auto& p : el.props) {
                    if (p.is_list) {
                        std::size_t cnt;
                        if (binary)
                            cnt = static_cast<std::size_t>(read_binary_scalar(in, p.count_type));
                        else {
                            double c;
                            in >> c;
                            cnt = static_cast<std::size_t>(c);
                        }
                        for (std::size_t i = 0; i < cnt; ++i) {
                            if (binary)
                                read_binary_scalar(in, p.type);
                            else {
                                double d;
                                in >> d;
                            }
                        }
                    } else if (binary)
                        read_binary_scalar(in, p.type);
                    else {
                        double d;
                        in >> d;
                    }
                }
            }
        }
    }
    if (colors && has_rgb) *colors = VertexColors{std::move(rgb)};
    return Shape::build(std::move(verts), std::move(tris));
}

Shape parse_obj(std::istream& in, const std::string& path) {
    std::vector<Vec3> verts;
    std::vector<Triangle> tris;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string kw;
        if (!(ls >> kw)) continue;
        if (kw == "v") {
            Vec3 p;
            if (!(ls >> p.x >> p.y >> p.z)) throw parse_error(path + ": bad OBJ vertex line");
            verts.push_back(p);
        } else if (kw == "f") {
            std::vector<index_t> ids;
            std::string tok;
            while (ls >> tok) {
                // "i", "i/t", "i/t/n", "i//n"
                long i = std::strtol(tok.c_str(), nullptr, 10);
                if (i == 0) throw parse_error(path + ": bad OBJ face index");
                if (i < 0) i = static_cast<long>(verts.size()) + i + 1;
                ids.push_back(static_cast<index_t>(i - 1));
            }
            if (ids.size() != 3) throw parse_error(path + ": only triangle faces are supported");
            tris.push_back({ids[0], ids[1], ids[2]});
        }
    }
    return Shape::build(std::move(verts), std::move(tris));
}

}  // namespace

MeshFormat format_from_path(const std::string& path) {
    std::string ext = lowercase_ext(path);
    if (ext == "off") return MeshFormat::OFF;
    if (ext == "ply") return MeshFormat::PLY;
    if (ext == "obj") return MeshFormat::OBJ;
    throw parse_error("cannot infer mesh format from extension: " + path);
}

Shape load_shape(const std::string& path, MeshFormat format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw error("cannot open mesh file: " + path);
    switch (format) {
        case MeshFormat::OFF:
            return parse_off(in, path);
        case MeshFormat::PLY:
            return parse_ply(in, path, nullptr);
        case MeshFormat::OBJ:
            return parse_obj(in, path);
    }
    throw error("unreachable");
}

Shape load_shape(const std::string& path) { return load_shape(path, format_from_path(path)); }

Shape load_shape_with_colors(const std::string& path, std::optional<VertexColors>& colors) {
    colors.reset();
    std::ifstream in(path, std::ios::binary);
    if (!in) throw error("cannot open mesh file: " + path);
    if (format_from_path(path) != MeshFormat::PLY) return load_shape(path);
    return parse_ply(in, path, &colors);
}

void save_ply(const std::string& path, const Shape& shape,
              const std::optional<VertexColors>& colors) {
    if (colors && static_cast<index_t>(colors->rgb.size()) != shape.num_vertices())
        throw error("color count does not match vertex count");
    std::ofstream out(path);
    if (!out) throw error("cannot open output file: " + path);
    out << "ply\nformat ascii 1.0\n";
    out << "element vertex " << shape.num_vertices() << "\n";
    out << "property double x\nproperty double y\nproperty double z\n";
    if (colors)
        out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    out << "element face " << shape.num_triangles() << "\n";
    out << "property list uchar int vertex_indices\nend_header\n";
    out.precision(17);
    for (index_t v = 0; v < shape.num_vertices(); ++v) {
        const Vec3& p = shape.vertices()[v];
        out << p.x << " " << p.y << " " << p.z;
        if (colors) {
            const auto& c = colors->rgb[v];
            out << " " << int(c[0]) << " " << int(c[1]) << " " << int(c[2]);
        }
        out << "\n";
    }
    for (const Triangle& t : shape.triangles())
        out << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
    if (!out) throw error("failed writing " + path);
}

void save_off(const std::string& path, const Shape& shape) {
    std::ofstream out(path);
    if (!out) throw error("cannot open output file: " + path);
    out << "OFF\n" << shape.num_vertices() << " " << shape.num_triangles() << " 0\n";
    out.precision(17);
    for (const Vec3& p : shape.vertices()) out << p.x << " " << p.y << " " << p.z << "\n";
    for (const Triangle& t : shape.triangles())
        out << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
    if (!out) throw error("failed writing " + path);
}

}  // namespace esm
