#include "paraqa/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "paraqa/errors.hpp"

namespace paraqa {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'P', 'Q', 'A', 'C', 'K', 'P', 'T', '1'};

static_assert(std::endian::native == std::endian::little,
              "checkpoint container assumes a little-endian host");

json encoder_to_json(const EncoderConfig& cfg) {
    return json{{"d_model", cfg.d_model},       {"n_layers", cfg.n_layers},
                {"n_heads", cfg.n_heads},       {"ffn_dim", cfg.ffn_dim},
                {"local_window", cfg.local_window}, {"max_len", cfg.max_len},
                {"vocab_size", cfg.vocab_size}, {"seed", cfg.seed}};
}

EncoderConfig encoder_from_json(const json& j) {
    EncoderConfig cfg;
    cfg.d_model = j.at("d_model").get<int>();
    cfg.n_layers = j.at("n_layers").get<int>();
    cfg.n_heads = j.at("n_heads").get<int>();
    cfg.ffn_dim = j.at("ffn_dim").get<int>();
    cfg.local_window = j.at("local_window").get<int>();
    cfg.max_len = j.at("max_len").get<int>();
    cfg.vocab_size = j.at("vocab_size").get<int>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    return cfg;
}

}  // namespace

void save_checkpoint(const Checkpoint& ck, const std::string& path) {
    json header;
    header["version"] = 1;
    header["encoder"] = encoder_to_json(ck.encoder);
    json tensors = json::array();
    std::uint64_t offset = 0;
    for (std::size_t i = 0; i < ck.params.size(); ++i) {
        const Tensor& t = ck.params.tensor(i);
        tensors.push_back(
            {{"name", ck.params.name(i)}, {"shape", t.shape}, {"offset", offset}});
        offset += t.numel();
    }
    header["tensors"] = tensors;
    const std::string header_bytes = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out.is_open()) {
        throw InputError("cannot write checkpoint: " + path);
    }
    out.write(kMagic, sizeof(kMagic));
    const std::uint64_t header_len = header_bytes.size();
    out.write(reinterpret_cast<const char*>(&header_len), sizeof(header_len));
    out.write(header_bytes.data(), static_cast<std::streamsize>(header_bytes.size()));
    for (std::size_t i = 0; i < ck.params.size(); ++i) {
        const Tensor& t = ck.params.tensor(i);
        out.write(reinterpret_cast<const char*>(t.data.data()),
                  static_cast<std::streamsize>(t.numel() * sizeof(double)));
    }
    if (!out.good()) {
        throw InputError("failed while writing checkpoint: " + path);
    }
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in.is_open()) {
        throw InputError("cannot open checkpoint: " + path);
    }
    char magic[sizeof(kMagic)];
    in.read(magic, sizeof(magic));
    if (!in.good() || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw StateError("not a checkpoint file: " + path);
    }
    std::uint64_t header_len = 0;
    in.read(reinterpret_cast<char*>(&header_len), sizeof(header_len));
    std::string header_bytes(header_len, '\0');
    in.read(header_bytes.data(), static_cast<std::streamsize>(header_len));
    if (!in.good()) {
        throw StateError("truncated checkpoint header: " + path);
    }
    json header;
    try {
        header = json::parse(header_bytes);
    } catch (const json::exception& ex) {
        throw StateError("corrupt checkpoint header: " + std::string(ex.what()));
    }
    if (header.at("version").get<int>() != 1) {
        throw StateError("unsupported checkpoint version");
    }

    Checkpoint ck;
    ck.encoder = encoder_from_json(header.at("encoder"));
    std::uint64_t expected_offset = 0;
    for (const json& tj : header.at("tensors")) {
        if (tj.at("offset").get<std::uint64_t>() != expected_offset) {
            throw StateError("checkpoint tensor table is not contiguous");
        }
        Tensor& t = ck.params.add(tj.at("name").get<std::string>(),
                                  tj.at("shape").get<std::vector<int>>());
        in.read(reinterpret_cast<char*>(t.data.data()),
                static_cast<std::streamsize>(t.numel() * sizeof(double)));
        expected_offset += t.numel();
    }
    if (!in.good()) {
        throw StateError("truncated checkpoint payload: " + path);
    }
    return ck;
}

}  // namespace paraqa
