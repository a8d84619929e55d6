#include "fivec/medium_io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "fivec/errors.hpp"

namespace fivec {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'F', 'I', 'V', 'E', 'C', 'G', 'R', 'D'};

template <typename T>
void put(std::ofstream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& is, const std::filesystem::path& path) {
    T v{};
    if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw IoError("truncated grid file " + path.string());
    return v;
}

double field(const json& j, const char* key, const char* alt, double fallback) {
    if (j.contains(key)) return j.at(key).get<double>();
    if (alt && j.contains(alt)) return j.at(alt).get<double>();
    return fallback;
}

Vec3 vec3(const json& j) {
    if (!j.is_array() || j.size() < 1 || j.size() > 3) throw ValidationError("expected an array of 1 to 3 numbers");
    Vec3 v = Vec3::Zero();
    for (size_t k = 0; k < j.size(); ++k) v[k] = j[k].get<double>();
    return v;
}

}  // namespace

void write_grid_file(const std::filesystem::path& path, const GridMedium& g) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    os.write(kMagic, 8);
    put<uint32_t>(os, 1);
    put<uint32_t>(os, static_cast<uint32_t>(std::max(1, g.ndim())));
    for (int k = 0; k < 3; ++k) put<uint32_t>(os, static_cast<uint32_t>(g.dims()[k]));
    for (int k = 0; k < 3; ++k) put<double>(os, g.spacing()[k]);
    for (int k = 0; k < 3; ++k) put<double>(os, g.origin()[k]);
    put<uint32_t>(os, 5);
    put<uint32_t>(os, 0);
    for (int ch = 0; ch < 5; ++ch) {
        for (const Moduli& m : g.nodes()) {
            const double v[5] = {m.lambda, m.mu, m.a, m.b, m.c};
            put<double>(os, v[ch]);
        }
    }
    if (!os) throw IoError("failed writing " + path.string());
}

std::shared_ptr<GridMedium> read_grid_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open grid file " + path.string());
    char magic[8];
    if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) {
        throw IoError("grid file " + path.string() + " has a bad magic header");
    }
    const auto version = get<uint32_t>(is, path);
    if (version != 1) throw IoError("unsupported grid file version " + std::to_string(version));
    const auto ndim = get<uint32_t>(is, path);
    if (ndim < 1 || ndim > 3) throw IoError("grid file ndim must be 1..3");
    std::array<int, 3> dims{};
    std::array<double, 3> spacing{};
    Vec3 origin;
    for (int k = 0; k < 3; ++k) dims[k] = static_cast<int>(get<uint32_t>(is, path));
    for (int k = 0; k < 3; ++k) spacing[k] = get<double>(is, path);
    for (int k = 0; k < 3; ++k) origin[k] = get<double>(is, path);
    const auto channels = get<uint32_t>(is, path);
    (void)get<uint32_t>(is, path);
    if (channels != 5) throw IoError("grid file must carry 5 channels (lambda, mu, A, B, C)");
    size_t count = 1;
    for (int k = 0; k < 3; ++k) {
        if (dims[k] < 1) throw IoError("grid file has a zero dimension");
        count *= static_cast<size_t>(dims[k]);
    }
    std::vector<Moduli> nodes(count);
    for (int ch = 0; ch < 5; ++ch) {
        for (size_t i = 0; i < count; ++i) {
            const double v = get<double>(is, path);
            Moduli& m = nodes[i];
            (ch == 0 ? m.lambda : ch == 1 ? m.mu : ch == 2 ? m.a : ch == 3 ? m.b : m.c) = v;
        }
    }
    return std::make_shared<GridMedium>(dims, spacing, origin, std::move(nodes));
}

Moduli moduli_from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("moduli must be a JSON object");
    Moduli m;
    m.lambda = field(j, "lambda", nullptr, 0.0);
    m.mu = field(j, "mu", nullptr, 0.0);
    m.a = field(j, "A", "a", 0.0);
    m.b = field(j, "B", "b", 0.0);
    m.c = field(j, "C", "c", 0.0);
    return m;
}

json moduli_to_json(const Moduli& m) {
    return json{{"lambda", m.lambda}, {"mu", m.mu}, {"A", m.a}, {"B", m.b}, {"C", m.c}};
}

MediumPtr medium_from_json(const json& j, const std::filesystem::path& base_dir) {
    try {
        const std::string type = j.value("type", "constant");
        if (type == "constant") {
            return std::make_shared<ConstantMedium>(MaterialPoint(moduli_from_json(j)));
        }
        if (type == "linear_gradient") {
            const Moduli base = moduli_from_json(j.at("base"));
            std::array<Moduli, 3> grad{};
            if (j.contains("gradient")) {
                const json& g = j.at("gradient");
                if (!g.is_array() || g.size() > 3) throw ValidationError("gradient must be an array of up to 3 objects");
                for (size_t k = 0; k < g.size(); ++k) grad[k] = moduli_from_json(g[k]);
            }
            const Vec3 origin = j.contains("origin") ? vec3(j.at("origin")) : Vec3::Zero();
            std::optional<Box> bounds;
            if (j.contains("bounds")) bounds = Box{vec3(j.at("bounds").at("lo")), vec3(j.at("bounds").at("hi"))};
            return std::make_shared<LinearGradientMedium>(base, grad, origin, bounds);
        }
        if (type == "grid") {
            std::filesystem::path file = j.at("file").get<std::string>();
            if (file.is_relative() && !base_dir.empty()) file = base_dir / file;
            return read_grid_file(file);
        }
        throw ValidationError("unknown medium type '" + type + "'");
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed medium description: ") + e.what());
    }
}

json report_to_json(const MediumReport& r) {
    json out = json::array();
    for (const auto& v : r.violations) {
        out.push_back({{"where", v.where},
                       {"position", {v.position[0], v.position[1], v.position[2]}},
                       {"values", moduli_to_json(v.values)},
                       {"reason", v.reason}});
    }
    return out;
}

}  // namespace fivec
