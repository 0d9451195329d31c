#ifndef REACFUSE_HASH_HPP
#define REACFUSE_HASH_HPP

#include <filesystem>
#include <string>

namespace reacfuse {

// SHA-256, lowercase hex. Used for artifact manifests, split identity and
// frozen-checkpoint binding.
std::string sha256_hex(const void* data, std::size_t n);
std::string sha256_hex(const std::string& s);
std::string sha256_file(const std::filesystem::path& p);

}  // namespace reacfuse

#endif
