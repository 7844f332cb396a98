#pragma once

// Policy checkpoint file, version 1. Binary layout (native little-endian):
//
//   magic   8 bytes  "DVNPCKPT"
//   u32     format version (1)
//   string  task name           (u32 length + bytes)
//   u32 x3  observation, goal, action sizes
//   spec    actor  (u32 n; i32 sizes[n]; u8 hidden act; u8 output act)
//   spec    critic
//   f64[]   actor, critic, actor_target, critic_target parameters
//           (u64 count + raw doubles; weight matrices row-major, then bias)
//   norm    i32 dim; f64 clip; f64 count; f64 mean[dim]; f64 m2[dim]
//   string  training config (key = value text)
//
// Round-trips bit-exactly on the writing platform.

#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "davenport/ddpg.hpp"

namespace davenport::rl {

struct Checkpoint {
    std::string task;
    PolicyParams params;
    TrainConfig config;
};

namespace detail {

template <typename T>
void write_pod(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw std::runtime_error("checkpoint load error: truncated file");
    return v;
}

inline void write_string(std::ostream& out, const std::string& s) {
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string read_string(std::istream& in) {
    const auto n = read_pod<std::uint32_t>(in);
    if (n > (1u << 24)) throw std::runtime_error("checkpoint load error: oversized string");
    std::string s(n, '\0');
    in.read(s.data(), n);
    if (!in) throw std::runtime_error("checkpoint load error: truncated string");
    return s;
}

inline void write_doubles(std::ostream& out, const std::vector<double>& v) {
    write_pod<std::uint64_t>(out, v.size());
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
}

inline std::vector<double> read_doubles(std::istream& in) {
    const auto n = read_pod<std::uint64_t>(in);
    if (n > (1ull << 32)) throw std::runtime_error("checkpoint load error: oversized array");
    std::vector<double> v(n);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw std::runtime_error("checkpoint load error: truncated array");
    return v;
}

inline void write_spec(std::ostream& out, const MlpSpec& spec) {
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(spec.sizes.size()));
    for (int s : spec.sizes) write_pod<std::int32_t>(out, s);
    write_pod<std::uint8_t>(out, static_cast<std::uint8_t>(spec.hidden));
    write_pod<std::uint8_t>(out, static_cast<std::uint8_t>(spec.output));
}

inline MlpSpec read_spec(std::istream& in) {
    MlpSpec spec;
    const auto n = read_pod<std::uint32_t>(in);
    if (n < 2 || n > 64) throw std::runtime_error("checkpoint load error: bad layer count");
    spec.sizes.resize(n);
    for (auto& s : spec.sizes) s = read_pod<std::int32_t>(in);
    spec.hidden = static_cast<Activation>(read_pod<std::uint8_t>(in));
    spec.output = static_cast<Activation>(read_pod<std::uint8_t>(in));
    return spec;
}

}  // namespace detail

inline constexpr char kCheckpointMagic[9] = "DVNPCKPT";
inline constexpr std::uint32_t kCheckpointVersion = 1;

inline void save_checkpoint(std::ostream& out, const std::string& task,
                            const PolicyParams& params, const TrainConfig& config) {
    out.write(kCheckpointMagic, 8);
    detail::write_pod<std::uint32_t>(out, kCheckpointVersion);
    detail::write_string(out, task);
    detail::write_pod<std::uint32_t>(out, PolicyParams::kObsSize);
    detail::write_pod<std::uint32_t>(out, PolicyParams::kGoalSize);
    detail::write_pod<std::uint32_t>(out, PolicyParams::kActionSize);
    detail::write_spec(out, params.actor.spec());
    detail::write_spec(out, params.critic.spec());
    detail::write_doubles(out, params.actor.params());
    detail::write_doubles(out, params.critic.params());
    detail::write_doubles(out, params.actor_target.params());
    detail::write_doubles(out, params.critic_target.params());
    detail::write_pod<std::int32_t>(out, params.normalizer.dim());
    detail::write_pod<double>(out, params.normalizer.clip());
    detail::write_pod<double>(out, params.normalizer.count());
    detail::write_doubles(out, params.normalizer.mean());
    detail::write_doubles(out, params.normalizer.m2());
    std::ostringstream cfg;
    save_train_config(cfg, config);
    detail::write_string(out, cfg.str());
    if (!out) throw std::runtime_error("checkpoint write failed");
}

inline void save_checkpoint(const std::string& path, const std::string& task,
                            const PolicyParams& params, const TrainConfig& config) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    save_checkpoint(f, task, params, config);
}

inline Checkpoint load_checkpoint(std::istream& in) {
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kCheckpointMagic, 8) != 0) {
        throw std::runtime_error("checkpoint load error: bad magic");
    }
    const auto version = detail::read_pod<std::uint32_t>(in);
    if (version != kCheckpointVersion) {
        throw std::runtime_error("checkpoint load error: unsupported version " +
                                 std::to_string(version));
    }
    const std::string task = detail::read_string(in);
    const auto obs = detail::read_pod<std::uint32_t>(in);
    const auto goal = detail::read_pod<std::uint32_t>(in);
    const auto action = detail::read_pod<std::uint32_t>(in);
    if (obs != PolicyParams::kObsSize || goal != PolicyParams::kGoalSize ||
        action != PolicyParams::kActionSize) {
        throw std::runtime_error("checkpoint load error: interface size mismatch");
    }
    const MlpSpec actor_spec = detail::read_spec(in);
    const MlpSpec critic_spec = detail::read_spec(in);
    if (actor_spec.sizes.front() != PolicyParams::kInputSize ||
        actor_spec.sizes.back() != PolicyParams::kActionSize ||
        critic_spec.sizes.front() != PolicyParams::kInputSize + PolicyParams::kActionSize ||
        critic_spec.sizes.back() != 1) {
        throw std::runtime_error("checkpoint load error: architecture mismatch");
    }

    const auto actor_p = detail::read_doubles(in);
    const auto critic_p = detail::read_doubles(in);
    const auto actor_t = detail::read_doubles(in);
    const auto critic_t = detail::read_doubles(in);
    const auto dim = detail::read_pod<std::int32_t>(in);
    const auto clip = detail::read_pod<double>(in);
    const auto count = detail::read_pod<double>(in);
    auto mean = detail::read_doubles(in);
    auto m2 = detail::read_doubles(in);
    if (dim != PolicyParams::kInputSize) {
        throw std::runtime_error("checkpoint load error: normalizer size mismatch");
    }

    std::istringstream cfg_in(detail::read_string(in));
    TrainConfig config = load_train_config(cfg_in);

    Checkpoint ck{task,
                  PolicyParams{Mlp(actor_spec), Mlp(critic_spec), Mlp(actor_spec),
                               Mlp(critic_spec), RunningNormalizer(dim, clip)},
                  config};
    ck.params.actor.set_params(actor_p);
    ck.params.critic.set_params(critic_p);
    ck.params.actor_target.set_params(actor_t);
    ck.params.critic_target.set_params(critic_t);
    ck.params.normalizer.set_state(count, std::move(mean), std::move(m2));
    return ck;
}

inline Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open checkpoint: " + path);
    return load_checkpoint(f);
}

}  // namespace davenport::rl
