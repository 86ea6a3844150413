// Copyright Contributors to the cbcd project.
// SPDX-License-Identifier: Apache-2.0

#include "cbcd/model.hpp"

#include <cstring>
#include <fstream>

#include "cbcd/train.hpp"

namespace cbcd {

namespace {

constexpr char kMagic[4] = {'C', 'B', 'C', 'D'};
constexpr char kStateMagic[4] = {'C', 'B', 'O', 'S'};

void put_u8(std::ostream& out, std::uint8_t v) { out.put(static_cast<char>(v)); }

void put_u16(std::ostream& out, std::uint16_t v) {
    out.put(static_cast<char>(v & 0xff));
    out.put(static_cast<char>((v >> 8) & 0xff));
}

void put_u64(std::ostream& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f32(std::ostream& out, double v) {
    const float f = static_cast<float>(v);
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    for (int i = 0; i < 4; ++i) out.put(static_cast<char>((bits >> (8 * i)) & 0xff));
}

std::uint8_t get_u8(std::istream& in) {
    const int c = in.get();
    if (c == EOF) throw DataError("model file truncated");
    return static_cast<std::uint8_t>(c);
}

std::uint16_t get_u16(std::istream& in) {
    const std::uint16_t lo = get_u8(in), hi = get_u8(in);
    return static_cast<std::uint16_t>(lo | (hi << 8));
}

std::uint64_t get_u64(std::istream& in) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(get_u8(in)) << (8 * i);
    return v;
}

double get_f32(std::istream& in) {
    std::uint32_t bits = 0;
    for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(get_u8(in)) << (8 * i);
    float f;
    std::memcpy(&f, &bits, 4);
    return static_cast<double>(f);
}

void put_array(std::ostream& out, const std::vector<double>& a) {
    for (double v : a) put_f32(out, v);
}

void get_array(std::istream& in, std::vector<double>& a, std::size_t count) {
    a.resize(count);
    for (std::size_t i = 0; i < count; ++i) a[i] = get_f32(in);
}

void write_record(std::ostream& out, const NetworkSpec& spec, const NetworkWeights& w) {
    spec.validate();
    if (w.layers.size() != spec.layers.size())
        throw DataError("save_model: weights do not match spec");
    put_u8(out, static_cast<std::uint8_t>(spec.name));
    put_u16(out, static_cast<std::uint16_t>(spec.input_channels));
    put_u16(out, static_cast<std::uint16_t>(spec.width));
    put_u16(out, static_cast<std::uint16_t>(spec.layers.size()));
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        const LayerSpec& l = spec.layers[i];
        put_u8(out, static_cast<std::uint8_t>(l.kind));
        put_u16(out, static_cast<std::uint16_t>(l.in_channels));
        put_u16(out, static_cast<std::uint16_t>(l.out_channels));
        put_u8(out, static_cast<std::uint8_t>(l.dilation));
        put_u8(out, static_cast<std::uint8_t>(l.skip_sources.size()));
        for (int s : l.skip_sources) put_u16(out, static_cast<std::uint16_t>(s));
    }
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        const LayerWeights& lw = w.layers[i];
        const std::size_t cin = static_cast<std::size_t>(spec.layer_input_channels(static_cast<int>(i)));
        const std::size_t cout = static_cast<std::size_t>(spec.layers[i].out_channels);
        if (lw.conv.w.size() != 9 * cin * cout || lw.conv.b.size() != cout)
            throw DataError("save_model: conv shape mismatch");
        put_array(out, lw.conv.w);
        put_array(out, lw.conv.b);
        if (spec.layers[i].kind == LayerKind::HiddenConvBnRelu) {
            if (lw.bn.gamma.size() != cout) throw DataError("save_model: BN shape mismatch");
            put_array(out, lw.bn.gamma);
            put_array(out, lw.bn.beta);
            put_array(out, lw.bn.mean);
            put_array(out, lw.bn.var);
        }
    }
}

void read_record(std::istream& in, Subnet expect, NetworkSpec& spec, NetworkWeights& w) {
    const std::uint8_t tag = get_u8(in);
    if (tag != static_cast<std::uint8_t>(expect))
        throw DataError("model file: unexpected network record order");
    spec = NetworkSpec{};
    spec.name = expect;
    spec.input_channels = get_u16(in);
    spec.width = get_u16(in);
    const std::uint16_t nlayers = get_u16(in);
    spec.layers.resize(nlayers);
    for (auto& l : spec.layers) {
        const std::uint8_t kind = get_u8(in);
        if (kind > 2) throw DataError("model file: bad layer kind");
        l.kind = static_cast<LayerKind>(kind);
        l.in_channels = get_u16(in);
        l.out_channels = get_u16(in);
        l.dilation = get_u8(in);
        const std::uint8_t nskips = get_u8(in);
        l.skip_sources.resize(nskips);
        for (auto& s : l.skip_sources) s = get_u16(in);
    }
    spec.validate();
    if (spec.input_channels != subnet_input_channels(expect))
        throw DataError("model file: input channel count mismatch for " + to_string(expect));

    w.layers.resize(nlayers);
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        const std::size_t cin = static_cast<std::size_t>(spec.layer_input_channels(static_cast<int>(i)));
        const std::size_t cout = static_cast<std::size_t>(spec.layers[i].out_channels);
        get_array(in, w.layers[i].conv.w, 9 * cin * cout);
        get_array(in, w.layers[i].conv.b, cout);
        if (spec.layers[i].kind == LayerKind::HiddenConvBnRelu) {
            get_array(in, w.layers[i].bn.gamma, cout);
            get_array(in, w.layers[i].bn.beta, cout);
            get_array(in, w.layers[i].bn.mean, cout);
            get_array(in, w.layers[i].bn.var, cout);
            for (double v : w.layers[i].bn.var)
                if (v < 0.0) throw DataError("model file: negative BN variance");
        }
    }
}

}  // namespace

const NetworkSpec& DemosaicModel::spec(Subnet s) const {
    switch (s) {
        case Subnet::Green: return spec_g;
        case Subnet::GreenRed: return spec_gr;
        case Subnet::GreenBlue: return spec_gb;
    }
    return spec_g;
}

const NetworkWeights& DemosaicModel::weights(Subnet s) const {
    switch (s) {
        case Subnet::Green: return w_g;
        case Subnet::GreenRed: return w_gr;
        case Subnet::GreenBlue: return w_gb;
    }
    return w_g;
}

void DemosaicModel::set(Subnet s, NetworkSpec spec, NetworkWeights weights) {
    switch (s) {
        case Subnet::Green:
            spec_g = std::move(spec);
            w_g = std::move(weights);
            return;
        case Subnet::GreenRed:
            spec_gr = std::move(spec);
            w_gr = std::move(weights);
            return;
        case Subnet::GreenBlue:
            spec_gb = std::move(spec);
            w_gb = std::move(weights);
            return;
    }
}

DemosaicModel DemosaicModel::zero_default() {
    DemosaicModel m;
    m.spec_g = default_spec(Subnet::Green);
    m.spec_gr = default_spec(Subnet::GreenRed);
    m.spec_gb = default_spec(Subnet::GreenBlue);
    m.w_g = zero_weights(m.spec_g);
    m.w_gr = zero_weights(m.spec_gr);
    m.w_gb = zero_weights(m.spec_gb);
    return m;
}

void save_model(const std::string& path, const DemosaicModel& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write model: " + path);
    out.write(kMagic, 4);
    put_u16(out, model.version);
    write_record(out, model.spec_g, model.w_g);
    write_record(out, model.spec_gr, model.w_gr);
    write_record(out, model.spec_gb, model.w_gb);
    if (!out) throw DataError("model write failed: " + path);
}

DemosaicModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw DataError("not a cbcd model file: " + path);
    DemosaicModel m;
    m.version = get_u16(in);
    if (m.version != 1) throw DataError("unsupported model format version");
    read_record(in, Subnet::Green, m.spec_g, m.w_g);
    read_record(in, Subnet::GreenRed, m.spec_gr, m.w_gr);
    read_record(in, Subnet::GreenBlue, m.spec_gb, m.w_gb);
    in.peek();
    if (!in.eof()) throw DataError("trailing bytes in model file: " + path);
    return m;
}

void save_optimizer_state(const std::string& path, const OptimizerState& state) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write optimizer state: " + path);
    out.write(kStateMagic, 4);
    put_u16(out, 1);
    put_u64(out, static_cast<std::uint64_t>(state.t));
    auto dump = [&](const NetworkWeights& w) {
        put_u16(out, static_cast<std::uint16_t>(w.layers.size()));
        for (const LayerWeights& lw : w.layers) {
            put_u64(out, lw.conv.w.size());
            put_array(out, lw.conv.w);
            put_array(out, lw.conv.b);
            put_u64(out, lw.bn.gamma.size());
            put_array(out, lw.bn.gamma);
            put_array(out, lw.bn.beta);
        }
    };
    dump(state.m);
    dump(state.v);
}

OptimizerState load_optimizer_state(const std::string& path, const NetworkSpec& spec) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open optimizer state: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kStateMagic, 4) != 0)
        throw DataError("not an optimizer state file: " + path);
    if (get_u16(in) != 1) throw DataError("unsupported optimizer state version");
    OptimizerState s = OptimizerState::zero(spec);
    s.t = static_cast<long long>(get_u64(in));
    auto fill = [&](NetworkWeights& w) {
        const std::uint16_t n = get_u16(in);
        if (n != w.layers.size()) throw DataError("optimizer state does not match spec");
        for (LayerWeights& lw : w.layers) {
            const std::uint64_t nw = get_u64(in);
            if (nw != lw.conv.w.size()) throw DataError("optimizer state shape mismatch");
            get_array(in, lw.conv.w, lw.conv.w.size());
            get_array(in, lw.conv.b, lw.conv.b.size());
            const std::uint64_t ng = get_u64(in);
            if (ng != lw.bn.gamma.size()) throw DataError("optimizer state shape mismatch");
            get_array(in, lw.bn.gamma, lw.bn.gamma.size());
            get_array(in, lw.bn.beta, lw.bn.beta.size());
        }
    };
    fill(s.m);
    fill(s.v);
    return s;
}

}  // namespace cbcd
