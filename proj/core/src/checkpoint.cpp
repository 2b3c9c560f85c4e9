#include "oahu/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "oahu/errors.hpp"

namespace oahu {
namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

class Writer {
public:
    void raw(const void* p, std::size_t n) { out_.append(static_cast<const char*>(p), n); }
    void u32(std::uint32_t v) { raw(&v, sizeof v); }
    void u64(std::uint64_t v) { raw(&v, sizeof v); }
    void f64(double v) { raw(&v, sizeof v); }
    void matrix(const Matrix& m) {
        u32(static_cast<std::uint32_t>(m.rows()));
        u32(static_cast<std::uint32_t>(m.cols()));
        raw(m.data(), sizeof(double) * static_cast<std::size_t>(m.size()));
    }
    std::string take() { return std::move(out_); }

private:
    std::string out_;
};

class Reader {
public:
    explicit Reader(const std::string& in) : in_(in) {}
    void raw(void* p, std::size_t n) {
        if (in_.size() - pos_ < n) throw CorruptionError("checkpoint truncated at byte " + std::to_string(pos_));
        std::memcpy(p, in_.data() + pos_, n);
        pos_ += n;
    }
    std::uint32_t u32() { std::uint32_t v; raw(&v, sizeof v); return v; }
    std::uint64_t u64() { std::uint64_t v; raw(&v, sizeof v); return v; }
    double f64() { double v; raw(&v, sizeof v); return v; }
    Matrix matrix() {
        const auto rows = u32();
        const auto cols = u32();
        const std::size_t count = std::size_t{rows} * cols;
        if ((in_.size() - pos_) / sizeof(double) < count)
            throw CorruptionError("checkpoint truncated inside a matrix payload");
        Matrix m(rows, cols);
        raw(m.data(), sizeof(double) * count);
        return m;
    }
    bool done() const { return pos_ == in_.size(); }

private:
    const std::string& in_;
    std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_checkpoint(const ParameterSet& params, const ModelConfig& config) {
    params.check_against(config);
    Writer w;
    w.raw(kCheckpointMagic, 4);
    w.u32(kCheckpointVersion);
    w.u32(config.input_dim);
    w.u32(config.hidden_layers);
    w.u32(config.hidden_units);
    w.u32(config.embedding_dim);
    w.f64(config.tau);
    w.f64(config.beta);
    w.f64(config.smoothing);
    w.f64(config.learning_rate);
    w.u64(config.rng_seed);
    for (const auto& m : params.hidden) w.matrix(m);
    for (const auto& m : params.heads) w.matrix(m);
    w.u32(static_cast<std::uint32_t>(params.alpha.size()));
    for (double a : params.alpha) w.f64(a);
    return w.take();
}

std::pair<ParameterSet, ModelConfig> deserialize_checkpoint(const std::string& bytes) {
    if (bytes.size() < 8 || std::memcmp(bytes.data(), kCheckpointMagic, 4) != 0)
        throw FormatError("not an OAHU checkpoint (bad magic)");
    Reader r(bytes);
    char magic[4];
    r.raw(magic, 4);
    if (const auto version = r.u32(); version != kCheckpointVersion)
        throw FormatError("unsupported checkpoint version " + std::to_string(version));

    ModelConfig config;
    config.input_dim = r.u32();
    config.hidden_layers = r.u32();
    config.hidden_units = r.u32();
    config.embedding_dim = r.u32();
    config.tau = r.f64();
    config.beta = r.f64();
    config.smoothing = r.f64();
    config.learning_rate = r.f64();
    config.rng_seed = r.u64();
    try {
        config.validate();
    } catch (const ConfigError& e) {
        throw CorruptionError(std::string("checkpoint header: ") + e.what());
    }

    ParameterSet params;
    for (std::uint32_t l = 0; l < config.hidden_layers; ++l) params.hidden.push_back(r.matrix());
    for (std::uint32_t l = 0; l <= config.hidden_layers; ++l) params.heads.push_back(r.matrix());
    const auto count = r.u32();
    if (count != config.num_models()) throw CorruptionError("alpha length does not match header");
    params.alpha.resize(count);
    for (auto& a : params.alpha) a = r.f64();
    if (!r.done()) throw CorruptionError("trailing bytes after checkpoint payload");
    try {
        params.check_against(config);
    } catch (const Error& e) {
        throw CorruptionError(std::string("checkpoint payload: ") + e.what());
    }
    return {std::move(params), config};
}

void save_checkpoint(const ParameterSet& params, const ModelConfig& config,
                     const std::filesystem::path& path) {
    const std::string bytes = serialize_checkpoint(params, config);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("failed writing checkpoint '" + path.string() + "'");
}

std::pair<ParameterSet, ModelConfig> load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot open checkpoint '" + path.string() + "'");
    const std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return deserialize_checkpoint(bytes);
}

}  // namespace oahu
