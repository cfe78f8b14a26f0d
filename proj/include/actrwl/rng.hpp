#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace actrwl {

/// Identifies one reproducible random stream: the pair fully determines the
/// generator state, and distinct stream ids give statistically independent
/// streams under the same master seed.
struct StreamSpec {
    std::uint64_t master_seed = 0;
    std::uint64_t stream_id = 0;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& s) {
    s += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

} // namespace detail

/// Philox4x32-10 counter-based generator. Counter-based means the k-th
/// block is a pure function of (key, k): streams can be split per replicate
/// and produce schedule-independent output.
class Philox4x32 {
public:
    explicit Philox4x32(StreamSpec spec) {
        std::uint64_t s = spec.master_seed;
        const std::uint64_t k = detail::splitmix64(s);
        key_[0] = static_cast<std::uint32_t>(k);
        key_[1] = static_cast<std::uint32_t>(k >> 32);
        std::uint64_t s2 = spec.stream_id ^ 0xda3e39cb94b95bdbull;
        const std::uint64_t sid = detail::splitmix64(s2);
        ctr_[0] = 0;
        ctr_[1] = 0;
        ctr_[2] = static_cast<std::uint32_t>(sid);
        ctr_[3] = static_cast<std::uint32_t>(sid >> 32);
    }

    std::uint32_t next_u32() {
        if (idx_ == 4) {
            block();
            idx_ = 0;
        }
        return out_[idx_++];
    }

    std::uint64_t next_u64() {
        const std::uint64_t lo = next_u32();
        const std::uint64_t hi = next_u32();
        return (hi << 32) | lo;
    }

private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kW0 = 0x9E3779B9u;
    static constexpr std::uint32_t kW1 = 0xBB67AE85u;

    static void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
        const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
        hi = static_cast<std::uint32_t>(p >> 32);
        lo = static_cast<std::uint32_t>(p);
    }

    void block() {
        std::uint32_t c0 = ctr_[0], c1 = ctr_[1], c2 = ctr_[2], c3 = ctr_[3];
        std::uint32_t k0 = key_[0], k1 = key_[1];
        for (int round = 0; round < 10; ++round) {
            std::uint32_t hi0, lo0, hi1, lo1;
            mulhilo(kMul0, c0, hi0, lo0);
            mulhilo(kMul1, c2, hi1, lo1);
            const std::uint32_t n0 = hi1 ^ c1 ^ k0;
            const std::uint32_t n1 = lo1;
            const std::uint32_t n2 = hi0 ^ c3 ^ k1;
            const std::uint32_t n3 = lo0;
            c0 = n0;
            c1 = n1;
            c2 = n2;
            c3 = n3;
            k0 += kW0;
            k1 += kW1;
        }
        out_[0] = c0;
        out_[1] = c1;
        out_[2] = c2;
        out_[3] = c3;
        // 64-bit block counter in words 0..1
        if (++ctr_[0] == 0) ++ctr_[1];
    }

    std::array<std::uint32_t, 2> key_{};
    std::array<std::uint32_t, 4> ctr_{};
    std::array<std::uint32_t, 4> out_{};
    int idx_ = 4;
};

/// Seeded stream of variates. All transforms are hand-rolled so output is
/// bit-reproducible across platforms and thread schedules.
class Stream {
public:
    explicit Stream(StreamSpec spec) : gen_(spec), spec_(spec) {}
    Stream(std::uint64_t master_seed, std::uint64_t stream_id)
        : Stream(StreamSpec{master_seed, stream_id}) {}

    const StreamSpec& spec() const { return spec_; }

    /// Substream derived from this stream's identity; independent of draws
    /// already consumed here.
    Stream substream(std::uint64_t k) const {
        return Stream(StreamSpec{spec_.master_seed, spec_.stream_id * 0x100000001b3ull + k + 1});
    }

    /// Uniform on (0,1), 53-bit resolution, endpoints excluded.
    double uniform01() {
        return (static_cast<double>(gen_.next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    double exponential() { return -std::log(uniform01()); }

    /// Standard normal; Box-Muller pair, second value cached.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform01()));
        const double th = 2.0 * M_PI * uniform01();
        spare_ = r * std::sin(th);
        have_spare_ = true;
        return r * std::cos(th);
    }

    double cauchy() { return std::tan(M_PI * (uniform01() - 0.5)); }

    /// Standard one-sided alpha-stable, E[exp(-s S)] = exp(-s^alpha)
    /// (Kanter's representation), alpha in (0,1).
    double stable_onesided(double alpha) {
        const double om = 1.0 - alpha;
        const double th = M_PI * uniform01();
        const double w = exponential();
        const double la = (alpha / om) * std::log(std::sin(alpha * th)) +
                          std::log(std::sin(om * th)) - (1.0 / om) * std::log(std::sin(th));
        return std::exp((om / alpha) * (la - std::log(w)));
    }

    /// Standard symmetric beta-stable, E[exp(i k X)] = exp(-|k|^beta),
    /// beta in (0,2] (Chambers-Mallows-Stuck).
    double stable_symmetric(double beta) {
        if (beta == 2.0) {
            const double th = M_PI * (uniform01() - 0.5);
            return 2.0 * std::sin(th) * std::sqrt(exponential());
        }
        if (beta == 1.0) return cauchy();
        const double th = M_PI * (uniform01() - 0.5);
        const double w = exponential();
        const double a = std::sin(beta * th) / std::pow(std::cos(th), 1.0 / beta);
        const double b = std::pow(std::cos((1.0 - beta) * th) / w, (1.0 - beta) / beta);
        return a * b;
    }

    /// Gamma(shape), unit scale (Marsaglia-Tsang; boosted below shape 1).
    double gamma(double shape) {
        if (!(shape > 0.0)) throw std::invalid_argument("Stream::gamma: shape > 0 required");
        if (shape < 1.0) {
            const double u = uniform01();
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform01();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    double beta(double a, double b) {
        const double x = gamma(a);
        const double y = gamma(b);
        return x / (x + y);
    }

    /// Poisson(mean) by exponential race; exact, O(mean) work.
    std::uint64_t poisson(double mean) {
        if (!(mean >= 0.0)) throw std::invalid_argument("Stream::poisson: mean >= 0 required");
        if (mean == 0.0) return 0;
        std::uint64_t n = 0;
        double acc = exponential();
        while (acc <= mean) {
            ++n;
            acc += exponential();
        }
        return n;
    }

private:
    Philox4x32 gen_;
    StreamSpec spec_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace actrwl
