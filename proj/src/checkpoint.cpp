#include "cotrain/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include "json.hpp"
#include <string>

#include "cotrain/error.hpp"

namespace cotrain {

namespace {

static_assert(sizeof(double) == sizeof(std::uint64_t));

void put_le(std::ostream& out, double v) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    unsigned char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(bits >> (8 * i));
    out.write(reinterpret_cast<const char*>(bytes), 8);
}

double get_le(const unsigned char* bytes) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    return std::bit_cast<double>(bits);
}

}  // namespace

void save_checkpoint(const ViewModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write checkpoint " + path.string());
    nlohmann::json header{{"layer_dims", model.layer_dims()}, {"seed", model.seed()}};
    out << header.dump() << '\n';
    for (const auto* p : model.parameters()) {
        for (double v : p->data()) put_le(out, v);
    }
    if (!out) throw IoError("write failed for checkpoint " + path.string());
}

ViewModel load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint " + path.string());
    std::string header_line;
    if (!std::getline(in, header_line)) throw IoError("empty checkpoint " + path.string());

    std::vector<std::size_t> dims;
    std::uint64_t seed = 0;
    try {
        const auto header = nlohmann::json::parse(header_line);
        dims = header.at("layer_dims").get<std::vector<std::size_t>>();
        seed = header.at("seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw IoError("corrupt checkpoint header in " + path.string() + ": " + e.what());
    }

    ViewModel model;
    try {
        model = ViewModel::init(dims, seed);
    } catch (const Error& e) {
        throw IoError("corrupt checkpoint " + path.string() + ": " + e.what());
    }
    const std::string payload((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (payload.size() != model.parameter_count() * 8) {
        throw IoError("corrupt checkpoint " + path.string() + ": expected " +
                      std::to_string(model.parameter_count() * 8) + " payload bytes, found " +
                      std::to_string(payload.size()));
    }
    const auto* bytes = reinterpret_cast<const unsigned char*>(payload.data());
    for (auto* p : model.parameters()) {
        for (auto& v : p->values()) {
            v = get_le(bytes);
            bytes += 8;
        }
    }
    return model;
}

std::filesystem::path checkpoint_path(const std::filesystem::path& dir, std::size_t view) {
    return dir / ("view_" + std::to_string(view) + ".ckpt");
}

void save_checkpoints(const std::vector<const ViewModel*>& views, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    for (std::size_t v = 0; v < views.size(); ++v) save_checkpoint(*views[v], checkpoint_path(dir, v));
}

std::vector<ViewModel> load_checkpoints(const std::filesystem::path& dir) {
    std::vector<ViewModel> views;
    while (std::filesystem::exists(checkpoint_path(dir, views.size()))) {
        views.push_back(load_checkpoint(checkpoint_path(dir, views.size())));
    }
    if (views.empty()) throw IoError("no checkpoints (view_0.ckpt) in " + dir.string());
    return views;
}

}  // namespace cotrain
