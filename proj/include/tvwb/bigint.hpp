#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace tvwb {

// Minimal arbitrary-precision unsigned integer, just enough to report the
// synchronization bound N^{3N} exactly.
class BigUint {
public:
    BigUint() : limbs_{0} {}
    explicit BigUint(std::uint64_t v) {
        limbs_.clear();
        limbs_.push_back(static_cast<std::uint32_t>(v & 0xffffffffu));
        std::uint32_t hi = static_cast<std::uint32_t>(v >> 32);
        if (hi) limbs_.push_back(hi);
    }

    void mul_small(std::uint64_t m) {
        std::uint64_t carry = 0;
        for (auto& limb : limbs_) {
            __uint128_t cur = static_cast<__uint128_t>(limb) * m + carry;
            limb = static_cast<std::uint32_t>(cur & 0xffffffffu);
            carry = static_cast<std::uint64_t>(cur >> 32);
        }
        while (carry) {
            limbs_.push_back(static_cast<std::uint32_t>(carry & 0xffffffffu));
            carry >>= 32;
        }
    }

    static BigUint pow(std::uint64_t base, std::uint64_t exp) {
        BigUint out(1);
        for (std::uint64_t i = 0; i < exp; ++i) out.mul_small(base);
        return out;
    }

    bool fits_u64() const { return limbs_.size() <= 2; }

    std::uint64_t as_u64() const {
        std::uint64_t v = limbs_[0];
        if (limbs_.size() > 1) v |= static_cast<std::uint64_t>(limbs_[1]) << 32;
        return v;
    }

    std::string str() const {
        std::vector<std::uint32_t> work = limbs_;
        std::string out;
        bool zero = true;
        for (auto limb : work)
            if (limb) zero = false;
        if (zero) return "0";
        while (!work.empty()) {
            // divide by 1e9, collecting the remainder as the next digit group
            std::uint64_t rem = 0;
            for (std::size_t i = work.size(); i-- > 0;) {
                std::uint64_t cur = (rem << 32) | work[i];
                work[i] = static_cast<std::uint32_t>(cur / 1000000000ull);
                rem = cur % 1000000000ull;
            }
            while (!work.empty() && work.back() == 0) work.pop_back();
            std::string group = std::to_string(rem);
            if (!work.empty())
                group.insert(group.begin(), 9 - group.size(), '0');
            out.insert(0, group);
        }
        return out;
    }

private:
    std::vector<std::uint32_t> limbs_; // little-endian base 2^32
};

} // namespace tvwb
