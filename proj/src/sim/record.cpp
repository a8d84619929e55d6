#include <cstdint>
#include <cstring>
#include <fstream>

#include "fivec/errors.hpp"
#include "fivec/simulator.hpp"

namespace fivec {

namespace {

constexpr char kMagic[8] = {'F', 'I', 'V', 'E', 'C', 'W', 'F', 'R'};

template <class T>
void put(std::ofstream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& is, const std::filesystem::path& path) {
    T v{};
    if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw IoError("truncated snapshot file " + path.string());
    return v;
}

std::filesystem::path with_suffix(const std::filesystem::path& stem, const char* ext) {
    return std::filesystem::path(stem.string() + ext);
}

}  // namespace

void WavefieldRecord::write(const std::filesystem::path& stem) const {
    const auto bin = with_suffix(stem, ".bin");
    const auto side = with_suffix(stem, ".json");
    if (stem.has_parent_path()) std::filesystem::create_directories(stem.parent_path());
    std::ofstream os(bin, std::ios::binary);
    if (!os) throw IoError("cannot open " + bin.string() + " for writing");
    os.write(kMagic, 8);
    put<uint32_t>(os, 1);
    put<uint32_t>(os, static_cast<uint32_t>(grid.n1));
    put<uint32_t>(os, static_cast<uint32_t>(grid.n2));
    put<uint32_t>(os, 3);
    put<uint32_t>(os, static_cast<uint32_t>(snapshots.size()));
    put<uint32_t>(os, 0);
    put<double>(os, grid.dx);
    for (double t : times) put<double>(os, t);
    for (const auto& snap : snapshots)
        for (const auto& comp : snap)
            os.write(reinterpret_cast<const char*>(comp.data()), static_cast<std::streamsize>(comp.size() * sizeof(double)));
    if (!os) throw IoError("failed writing " + bin.string());

    nlohmann::json j;
    j["format"] = "FIVECWFR";
    j["version"] = 1;
    j["binary"] = bin.filename().string();
    j["layout"] = "float64 [snapshot][component u1,u2,u3][i][j], j fastest, node (i*dx, j*dx)";
    j["grid"] = {{"n1", grid.n1}, {"n2", grid.n2}, {"dx", grid.dx}};
    j["times"] = times;
    j["eps1"] = eps1;
    j["eps2"] = eps2;
    j["meta"] = meta;
    std::ofstream js(side);
    if (!js) throw IoError("cannot open " + side.string() + " for writing");
    js << j.dump(2) << "\n";
}

WavefieldRecord WavefieldRecord::read(const std::filesystem::path& stem) {
    const auto bin = with_suffix(stem, ".bin");
    const auto side = with_suffix(stem, ".json");
    std::ifstream is(bin, std::ios::binary);
    if (!is) throw IoError("cannot open snapshot file " + bin.string());
    char magic[8];
    if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0)
        throw IoError("snapshot file " + bin.string() + " has a bad magic header");
    if (get<uint32_t>(is, bin) != 1) throw IoError("unsupported snapshot file version in " + bin.string());
    WavefieldRecord r;
    r.grid.n1 = static_cast<int>(get<uint32_t>(is, bin));
    r.grid.n2 = static_cast<int>(get<uint32_t>(is, bin));
    if (get<uint32_t>(is, bin) != 3) throw IoError("snapshot file " + bin.string() + " must have 3 components");
    const uint32_t count = get<uint32_t>(is, bin);
    (void)get<uint32_t>(is, bin);
    r.grid.dx = get<double>(is, bin);
    r.times.resize(count);
    for (auto& t : r.times) t = get<double>(is, bin);
    r.snapshots.resize(count);
    for (auto& snap : r.snapshots)
        for (auto& comp : snap) {
            comp.resize(r.grid.cells());
            if (!is.read(reinterpret_cast<char*>(comp.data()), static_cast<std::streamsize>(comp.size() * sizeof(double))))
                throw IoError("truncated snapshot file " + bin.string());
        }
    std::ifstream js(side);
    if (js) {
        try {
            const auto j = nlohmann::json::parse(js);
            r.eps1 = j.value("eps1", 0.0);
            r.eps2 = j.value("eps2", 0.0);
            r.meta = j.value("meta", nlohmann::json::object());
        } catch (const nlohmann::json::exception& e) {
            throw IoError("malformed sidecar " + side.string() + ": " + e.what());
        }
    }
    return r;
}

}  // namespace fivec
