#include "reacfuse/hash.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdio>

#include "reacfuse/errors.hpp"
#include "reacfuse/io.hpp"

namespace reacfuse {

std::string sha256_hex(const void* data, std::size_t n) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(data, n, md.data(), &len, EVP_sha256(), nullptr) != 1)
    throw NumericError("HashFailed", "EVP_Digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 0xf]);
  }
  return out;
}

std::string sha256_hex(const std::string& s) { return sha256_hex(s.data(), s.size()); }

std::string sha256_file(const std::filesystem::path& p) {
  return sha256_hex(read_file(p));
}

}  // namespace reacfuse
