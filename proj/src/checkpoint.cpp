#include "fmda/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fmda/errors.hpp"

namespace fmda {

namespace {

constexpr char kMagic[8] = {'F', 'M', 'D', 'A', 'C', 'K', 'P', 'T'};

template <typename T>
void put_le(std::string& out, T value) {
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        out.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
    }
}

class Reader {
public:
    explicit Reader(std::string_view bytes) : bytes_(bytes) {}

    template <typename T>
    T get_le() {
        need(sizeof(T));
        T value = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            value |= static_cast<T>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
        }
        pos_ += sizeof(T);
        return value;
    }

    std::string_view take(std::size_t count) {
        need(count);
        auto out = bytes_.substr(pos_, count);
        pos_ += count;
        return out;
    }

    bool at_end() const { return pos_ == bytes_.size(); }

private:
    void need(std::size_t count) const {
        if (bytes_.size() - pos_ < count) throw IoError("checkpoint: truncated data");
    }

    std::string_view bytes_;
    std::size_t pos_ = 0;
};

Phase parse_phase(const std::string& s) {
    if (s == "pretrain") return Phase::kPretrain;
    if (s == "adapt") return Phase::kAdapt;
    throw IoError("checkpoint: unknown phase '" + s + "'");
}

}  // namespace

std::string_view to_string(Phase p) { return p == Phase::kPretrain ? "pretrain" : "adapt"; }

std::string serialize(const Checkpoint& ckpt) {
    nlohmann::json layers = nlohmann::json::array();
    for (const DenseLayer& l : ckpt.params.extractor) {
        layers.push_back({{"rows", l.weight.rows()}, {"cols", l.weight.cols()}, {"relu", l.relu}});
    }
    const DenseLayer& h = ckpt.params.head;
    layers.push_back({{"rows", h.weight.rows()}, {"cols", h.weight.cols()}, {"relu", h.relu}});
    const nlohmann::json header = {
        {"config", to_json(ckpt.config)},
        {"phase", std::string(to_string(ckpt.phase))},
        {"iteration", ckpt.iteration},
        {"input_dim", ckpt.params.input_dim},
        {"layers", layers},
    };
    const std::string header_text = header.dump();

    std::string out(kMagic, sizeof(kMagic));
    put_le<std::uint32_t>(out, kCheckpointVersion);
    put_le<std::uint64_t>(out, header_text.size());
    out += header_text;
    const auto tensors = ckpt.params.tensors();
    put_le<std::uint64_t>(out, tensors.size());
    for (const Matrix* t : tensors) {
        put_le<std::uint64_t>(out, t->rows());
        put_le<std::uint64_t>(out, t->cols());
        for (double v : t->values()) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
    }
    return out;
}

Checkpoint deserialize(std::string_view bytes) {
    Reader in(bytes);
    if (std::memcmp(in.take(sizeof(kMagic)).data(), kMagic, sizeof(kMagic)) != 0) {
        throw IoError("checkpoint: bad magic");
    }
    const auto version = in.get_le<std::uint32_t>();
    if (version != kCheckpointVersion) {
        throw IoError("checkpoint: unsupported version " + std::to_string(version));
    }
    const auto header_len = in.get_le<std::uint64_t>();
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(in.take(header_len));
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("checkpoint: bad header: ") + e.what());
    }

    Checkpoint ckpt;
    try {
        ckpt.config = run_config_from_json(header.at("config"));
        ckpt.phase = parse_phase(header.at("phase").get<std::string>());
        ckpt.iteration = header.at("iteration").get<std::uint64_t>();
        ckpt.params.input_dim = header.at("input_dim").get<std::size_t>();
        const auto& layers = header.at("layers");
        if (layers.empty()) throw IoError("checkpoint: no layers");
        for (std::size_t i = 0; i < layers.size(); ++i) {
            DenseLayer l{Matrix(layers[i].at("rows").get<std::size_t>(), layers[i].at("cols").get<std::size_t>()),
                         Matrix(1, layers[i].at("cols").get<std::size_t>()),
                         layers[i].at("relu").get<bool>()};
            if (i + 1 == layers.size()) {
                ckpt.params.head = std::move(l);
            } else {
                ckpt.params.extractor.push_back(std::move(l));
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("checkpoint: bad header: ") + e.what());
    }

    auto tensors = ckpt.params.tensors();
    const auto count = in.get_le<std::uint64_t>();
    if (count != tensors.size()) throw IoError("checkpoint: tensor count does not match header");
    for (Matrix* t : tensors) {
        const auto rows = in.get_le<std::uint64_t>();
        const auto cols = in.get_le<std::uint64_t>();
        if (rows != t->rows() || cols != t->cols()) {
            throw IoError("checkpoint: tensor shape does not match header");
        }
        for (double& v : t->values()) v = std::bit_cast<double>(in.get_le<std::uint64_t>());
    }
    if (!in.at_end()) throw IoError("checkpoint: trailing bytes");
    try {
        ckpt.params.validate();
    } catch (const Error& e) {
        throw IoError(std::string("checkpoint: ") + e.what());
    }
    return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
    const std::string bytes = serialize(ckpt);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return deserialize(buf.str());
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

}  // namespace fmda
