#ifndef KNNICL_DIGEST_H_
#define KNNICL_DIGEST_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace knnicl {

using Sha256 = std::array<std::uint8_t, 32>;

Sha256 sha256(std::string_view data);
std::string sha256_hex(std::string_view data);
std::string sha256_file_hex(const std::filesystem::path& path);
std::string to_hex(const Sha256& digest);

}  // namespace knnicl

#endif  // KNNICL_DIGEST_H_
