#include "groupinv/rng.hpp"

#include <cmath>

#include "groupinv/errors.hpp"

namespace groupinv {

uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double Rng::uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

int Rng::uniform_int(int n) {
    if (n <= 0) throw ContractError("uniform_int requires n > 0");
    const uint64_t un = static_cast<uint64_t>(n);
    // Mask-and-reject keeps the draw unbiased and engine-portable.
    uint64_t mask = un - 1;
    mask |= mask >> 1;
    mask |= mask >> 2;
    mask |= mask >> 4;
    mask |= mask >> 8;
    mask |= mask >> 16;
    mask |= mask >> 32;
    uint64_t v;
    do {
        v = gen_() & mask;
    } while (v >= un);
    return static_cast<int>(v);
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u, v, s;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
}

double Rng::normal(double mean, double stddev) { return mean + stddev * normal(); }

Rng Rng::substream(uint64_t tag) const {
    return Rng(mix64(seed_ ^ mix64(tag)));
}

}  // namespace groupinv
