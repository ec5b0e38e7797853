#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "bellnav/umps.hpp"

namespace bellnav {

inline constexpr int kCacheSchemaVersion = 1;

/// Identity of one cached ground state.
struct CacheKey {
    ModelSpec spec;
    int chi = 16;
    ImaginaryTimeSchedule schedule;

    /// Canonical text form; hashing it gives the file name.
    [[nodiscard]] std::string canonical() const;
    [[nodiscard]] std::string digest() const;
};

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

/// One binary file per state under `dir`. Reads verify a trailing checksum and
/// the stored key fields; any mismatch is logged and treated as a miss.
class GroundStateCache {
  public:
    explicit GroundStateCache(std::filesystem::path dir);

    [[nodiscard]] std::filesystem::path path_for(const CacheKey &key) const;
    [[nodiscard]] std::optional<UniformMPS> load(const CacheKey &key) const;
    void store(const CacheKey &key, const UniformMPS &mps) const;

    /// Cached state or a fresh solve (then stored). `hit` reports which.
    UniformMPS get_or_compute(const CacheKey &key, bool *hit = nullptr) const;

  private:
    std::filesystem::path dir_;
};

} // namespace bellnav
