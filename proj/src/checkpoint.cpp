#include "g2g/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace g2g {

namespace {

constexpr char kMagic[4] = {'G', '2', 'G', 'M'};

void write_u32(std::ostream& out, std::uint32_t value) {
    unsigned char bytes[4];
    for (int i = 0; i < 4; ++i) bytes[i] = static_cast<unsigned char>((value >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(bytes), 4);
}

std::uint32_t read_u32(std::istream& in, const std::string& path) {
    unsigned char bytes[4];
    if (!in.read(reinterpret_cast<char*>(bytes), 4)) {
        throw DataError(path + ": truncated checkpoint");
    }
    std::uint32_t value = 0;
    for (int i = 0; i < 4; ++i) value |= static_cast<std::uint32_t>(bytes[i]) << (8 * i);
    return value;
}

void write_doubles(std::ostream& out, const std::vector<double>& values) {
    for (double v : values) {
        const auto bits = std::bit_cast<std::uint64_t>(v);
        unsigned char bytes[8];
        for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
        out.write(reinterpret_cast<const char*>(bytes), 8);
    }
}

void read_doubles(std::istream& in, std::vector<double>& values, const std::string& path) {
    for (double& v : values) {
        unsigned char bytes[8];
        if (!in.read(reinterpret_cast<char*>(bytes), 8)) {
            throw DataError(path + ": truncated checkpoint (tensor data)");
        }
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
        v = std::bit_cast<double>(bits);
    }
}

} // namespace

void save_model(const EncoderParameters& params, const std::string& path,
                const nlohmann::json& extra_metadata) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write checkpoint: " + path);

    nlohmann::json meta = extra_metadata;
    meta["input_dim"] = params.input_dim;
    meta["hidden_sizes"] = params.hidden_sizes();
    meta["half_dim"] = params.half_dim();
    meta["activation"] = "relu";
    meta["var_activation"] = "elu_plus_one";
    const std::string meta_str = meta.dump();

    out.write(kMagic, 4);
    write_u32(out, kCheckpointVersion);
    write_u32(out, static_cast<std::uint32_t>(meta_str.size()));
    out.write(meta_str.data(), static_cast<std::streamsize>(meta_str.size()));
    for (const auto& [name, tensor] : tensor_list(params)) write_doubles(out, *tensor);
    if (!out) throw DataError("failed writing checkpoint: " + path);
}

EncoderParameters load_model(const std::string& path, nlohmann::json* metadata) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint: " + path);

    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
        throw DataError(path + ": not a G2GM checkpoint (bad magic)");
    }
    const std::uint32_t version = read_u32(in, path);
    if (version != kCheckpointVersion) {
        throw DataError(path + ": unsupported checkpoint version " + std::to_string(version) +
                        " (expected " + std::to_string(kCheckpointVersion) + ")");
    }
    const std::uint32_t meta_len = read_u32(in, path);
    std::string meta_str(meta_len, '\0');
    if (!in.read(meta_str.data(), meta_len)) throw DataError(path + ": truncated metadata");
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(meta_str);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + ": corrupt metadata: " + e.what());
    }

    const int input_dim = meta.at("input_dim").get<int>();
    const auto hidden_sizes = meta.at("hidden_sizes").get<std::vector<int>>();
    const int half_dim = meta.at("half_dim").get<int>();

    EncoderParameters params;
    params.input_dim = input_dim;
    int prev = input_dim;
    for (int s : hidden_sizes) {
        params.hidden.push_back({Matrix(prev, s), std::vector<double>(s, 0.0)});
        prev = s;
    }
    params.mu_head = {Matrix(prev, half_dim), std::vector<double>(half_dim, 0.0)};
    params.var_head = {Matrix(prev, half_dim), std::vector<double>(half_dim, 0.0)};

    for (auto& [name, tensor] : tensor_list(params)) read_doubles(in, *tensor, path);
    char extra;
    if (in.read(&extra, 1)) throw DataError(path + ": trailing bytes after tensor data");
    if (metadata) *metadata = meta;
    return params;
}

} // namespace g2g
