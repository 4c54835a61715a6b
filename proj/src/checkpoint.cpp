#include "pigan/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace pigan {

namespace {

constexpr char kMagic[] = "PIGANCKPT";  // 9 bytes, no terminator on disk

class Writer {
public:
    explicit Writer(const std::string& path) : out_(path, std::ios::binary) {
        if (!out_) throw FormatError("cannot open " + path + " for writing");
    }
    void bytes(const void* p, std::size_t n) { out_.write(static_cast<const char*>(p), n); }
    void u8(std::uint8_t v) { bytes(&v, 1); }
    void u32(std::uint32_t v) { bytes(&v, 4); }
    void u64(std::uint64_t v) { bytes(&v, 8); }
    void f64(double v) { bytes(&v, 8); }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        bytes(s.data(), s.size());
    }
    void done() {
        out_.flush();
        if (!out_) throw FormatError("checkpoint write failed");
    }

private:
    std::ofstream out_;
};

class Reader {
public:
    explicit Reader(const std::string& path) : in_(path, std::ios::binary) {
        if (!in_) throw FormatError("cannot open " + path);
    }
    void bytes(void* p, std::size_t n) {
        in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in_.gcount()) != n)
            throw FormatError("truncated file at byte offset " + std::to_string(offset_));
        offset_ += n;
    }
    std::uint8_t u8() {
        std::uint8_t v;
        bytes(&v, 1);
        return v;
    }
    std::uint32_t u32() {
        std::uint32_t v;
        bytes(&v, 4);
        return v;
    }
    std::uint64_t u64() {
        std::uint64_t v;
        bytes(&v, 8);
        return v;
    }
    double f64() {
        double v;
        bytes(&v, 8);
        return v;
    }
    std::string str() {
        const std::uint32_t n = u32();
        std::string s(n, '\0');
        bytes(s.data(), n);
        return s;
    }
    std::size_t offset() const { return offset_; }

private:
    std::ifstream in_;
    std::size_t offset_ = 0;
};

void write_tensor(Writer& w, const Tensor& t) {
    w.u8(static_cast<std::uint8_t>(t.rank()));
    for (std::size_t d : t.shape) w.u64(d);
    if (t.numel()) w.bytes(t.data.data(), t.numel() * sizeof(double));
}

Tensor read_tensor(Reader& r) {
    const std::uint8_t rank = r.u8();
    if (rank == 0) return Tensor();
    std::vector<std::size_t> shape(rank);
    for (auto& d : shape) d = r.u64();
    Tensor t(shape);
    if (t.numel() > (1ULL << 32))
        throw FormatError("implausible tensor size at byte offset " + std::to_string(r.offset()));
    if (t.numel()) r.bytes(t.data.data(), t.numel() * sizeof(double));
    return t;
}

void write_spec(Writer& w, const NetworkSpec& net) {
    w.u32(static_cast<std::uint32_t>(net.layers.size()));
    for (const LayerSpec& l : net.layers) {
        w.u8(static_cast<std::uint8_t>(l.kind));
        w.u64(l.in_features);
        w.u64(l.out_features);
        w.u64(l.in_channels);
        w.u64(l.out_channels);
        w.u64(l.kernel);
        w.u64(l.features);
        w.u8(l.use_bias ? 1 : 0);
        w.f64(l.slope);
        w.u32(static_cast<std::uint32_t>(l.target.size()));
        for (std::size_t d : l.target) w.u64(d);
    }
}

NetworkSpec read_spec(Reader& r) {
    NetworkSpec net;
    const std::uint32_t n = r.u32();
    net.layers.resize(n);
    for (LayerSpec& l : net.layers) {
        const std::uint8_t kind = r.u8();
        if (kind > static_cast<std::uint8_t>(LayerSpec::Kind::Reshape))
            throw FormatError("unknown layer kind at byte offset " + std::to_string(r.offset()));
        l.kind = static_cast<LayerSpec::Kind>(kind);
        l.in_features = r.u64();
        l.out_features = r.u64();
        l.in_channels = r.u64();
        l.out_channels = r.u64();
        l.kernel = r.u64();
        l.features = r.u64();
        l.use_bias = r.u8() != 0;
        l.slope = r.f64();
        l.target.resize(r.u32());
        for (std::size_t& d : l.target) d = r.u64();
    }
    net.validate();
    return net;
}

void write_params(Writer& w, const ParameterSet& p) {
    w.u32(static_cast<std::uint32_t>(p.layers.size()));
    for (const LayerParams& lp : p.layers) {
        write_tensor(w, lp.weight);
        write_tensor(w, lp.bias);
        write_tensor(w, lp.gamma);
        write_tensor(w, lp.beta);
        write_tensor(w, lp.running_mean);
        write_tensor(w, lp.running_var);
    }
}

ParameterSet read_params(Reader& r) {
    ParameterSet p;
    p.layers.resize(r.u32());
    for (LayerParams& lp : p.layers) {
        lp.weight = read_tensor(r);
        lp.bias = read_tensor(r);
        lp.gamma = read_tensor(r);
        lp.beta = read_tensor(r);
        lp.running_mean = read_tensor(r);
        lp.running_var = read_tensor(r);
    }
    return p;
}

void write_adam(Writer& w, const AdamState& s) {
    w.f64(s.cfg.learning_rate);
    w.f64(s.cfg.beta1);
    w.f64(s.cfg.beta2);
    w.f64(s.cfg.eps);
    w.u64(s.step);
    w.u32(static_cast<std::uint32_t>(s.m.size()));
    for (std::size_t i = 0; i < s.m.size(); ++i) {
        write_tensor(w, s.m[i].weight);
        write_tensor(w, s.m[i].bias);
        write_tensor(w, s.m[i].gamma);
        write_tensor(w, s.m[i].beta);
        write_tensor(w, s.v[i].weight);
        write_tensor(w, s.v[i].bias);
        write_tensor(w, s.v[i].gamma);
        write_tensor(w, s.v[i].beta);
    }
}

AdamState read_adam(Reader& r) {
    AdamState s;
    s.cfg.learning_rate = r.f64();
    s.cfg.beta1 = r.f64();
    s.cfg.beta2 = r.f64();
    s.cfg.eps = r.f64();
    s.step = r.u64();
    const std::uint32_t n = r.u32();
    s.m.resize(n);
    s.v.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        s.m[i].weight = read_tensor(r);
        s.m[i].bias = read_tensor(r);
        s.m[i].gamma = read_tensor(r);
        s.m[i].beta = read_tensor(r);
        s.v[i].weight = read_tensor(r);
        s.v[i].bias = read_tensor(r);
        s.v[i].gamma = read_tensor(r);
        s.v[i].beta = read_tensor(r);
    }
    return s;
}

}  // namespace

void save_checkpoint(const std::string& path, const TrainedState& state) {
    Writer w(path);
    w.bytes(kMagic, 9);
    w.u32(kCheckpointVersion);
    w.u64(state.iteration);
    w.f64(state.cfg.pi);
    w.u64(state.cfg.k);
    w.u64(state.cfg.batch_size);
    w.u64(state.cfg.latent_dim);
    w.u64(state.cfg.iterations);
    w.f64(state.cfg.learning_rate);
    w.f64(state.cfg.init_std);
    w.u64(state.cfg.seed);
    w.u8(static_cast<std::uint8_t>(state.cfg.prior));
    write_spec(w, state.g_spec);
    write_params(w, state.g_params);
    write_spec(w, state.d_spec);
    write_params(w, state.d_params);
    write_adam(w, state.g_opt);
    write_adam(w, state.d_opt);
    w.str(state.rng_state);
    w.done();
}

TrainedState load_checkpoint(const std::string& path) {
    Reader r(path);
    char magic[9];
    r.bytes(magic, 9);
    if (std::memcmp(magic, kMagic, 9) != 0)
        throw FormatError(path + " is not a PIGANCKPT checkpoint (bad magic)");
    const std::uint32_t version = r.u32();
    if (version != kCheckpointVersion)
        throw FormatError("unsupported checkpoint version " + std::to_string(version) +
                          " (expected " + std::to_string(kCheckpointVersion) + ")");
    TrainedState st;
    st.iteration = r.u64();
    st.cfg.pi = r.f64();
    st.cfg.k = r.u64();
    st.cfg.batch_size = r.u64();
    st.cfg.latent_dim = r.u64();
    st.cfg.iterations = r.u64();
    st.cfg.learning_rate = r.f64();
    st.cfg.init_std = r.f64();
    st.cfg.seed = r.u64();
    st.cfg.prior = static_cast<Prior>(r.u8());
    st.g_spec = read_spec(r);
    st.g_params = read_params(r);
    st.d_spec = read_spec(r);
    st.d_params = read_params(r);
    st.g_opt = read_adam(r);
    st.d_opt = read_adam(r);
    st.rng_state = r.str();
    return st;
}

}  // namespace pigan
