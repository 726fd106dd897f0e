#include "knnicl/digest.h"

#include <openssl/evp.h>

#include <fstream>
#include <memory>

#include "knnicl/types.h"

namespace knnicl {

Sha256 sha256(std::string_view data) {
  Sha256 out{};
  unsigned int written = 0;
  if (EVP_Digest(data.data(), data.size(), out.data(), &written,
                 EVP_sha256(), nullptr) != 1 ||
      written != out.size()) {
    throw RuntimeFailure("SHA-256 computation failed");
  }
  return out;
}

std::string to_hex(const Sha256& digest) {
  static const char* kHex = "0123456789abcdef";
  std::string out;
  out.reserve(64);
  for (std::uint8_t b : digest) {
    out.push_back(kHex[b >> 4]);
    out.push_back(kHex[b & 0xF]);
  }
  return out;
}

std::string sha256_hex(std::string_view data) { return to_hex(sha256(data)); }

std::string sha256_file_hex(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw RuntimeFailure("cannot open file for digest: " + path.string());
  }
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(
      EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw RuntimeFailure("SHA-256 initialization failed");
  }
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    if (in.gcount() > 0 &&
        EVP_DigestUpdate(ctx.get(), buf,
                         static_cast<std::size_t>(in.gcount())) != 1) {
      throw RuntimeFailure("SHA-256 update failed");
    }
  }
  Sha256 out{};
  unsigned int written = 0;
  if (EVP_DigestFinal_ex(ctx.get(), out.data(), &written) != 1 ||
      written != out.size()) {
    throw RuntimeFailure("SHA-256 finalization failed");
  }
  return to_hex(out);
}

}  // namespace knnicl
