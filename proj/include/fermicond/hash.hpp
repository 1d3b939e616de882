#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace fermicond {

std::array<unsigned char, 32> sha256(std::string_view data);
std::string sha256_hex(std::string_view data);
std::string to_hex(const unsigned char* p, std::size_t n);

// FNV-1a, 64-bit
std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h = 1469598103934665603ULL);

} // namespace fermicond
