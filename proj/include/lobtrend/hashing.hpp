#pragma once

#include <cstdint>
#include <string>

namespace lobtrend {

// FNV-1a, 64-bit: stable across runs and platforms, good enough for
// change-detection manifests (not security).
uint64_t fnv1a64(const void* data, size_t len);
uint64_t fnv1a64(const std::string& s);

std::string hash_hex(uint64_t h);

// Hash of a file's bytes. Throws DataError if unreadable.
uint64_t hash_file(const std::string& path);

} // namespace lobtrend
