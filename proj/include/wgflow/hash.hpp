#pragma once

#include <cstdint>
#include <cstdio>
#include <span>
#include <string>
#include <string_view>

namespace wgflow {

/// 64-bit FNV-1a; used for stable content digests in manifests and records.
class Fnv1a {
public:
    void update(std::string_view bytes) noexcept {
        for (unsigned char c : bytes) {
            state_ ^= c;
            state_ *= 0x100000001b3ULL;
        }
    }
    void update(std::span<const double> values) noexcept {
        for (double v : values) {
            unsigned char raw[sizeof(double)];
            __builtin_memcpy(raw, &v, sizeof raw);
            update(std::string_view(reinterpret_cast<const char*>(raw), sizeof raw));
        }
    }
    std::uint64_t value() const noexcept { return state_; }
    std::string hex() const {
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(state_));
        return buf;
    }

private:
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

}  // namespace wgflow
