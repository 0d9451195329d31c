#ifndef REACFUSE_IO_HPP
#define REACFUSE_IO_HPP

#include <filesystem>
#include <string>
#include <vector>

namespace reacfuse {

std::string read_file(const std::filesystem::path& p);
std::vector<std::string> read_lines(const std::filesystem::path& p);

// Writes to a temp file in the same directory, then renames over the target,
// so interrupted runs never leave a half-written artifact.
void atomic_write(const std::filesystem::path& p, const std::string& bytes);

void write_lines(const std::filesystem::path& p, const std::vector<std::string>& lines);

}  // namespace reacfuse

#endif
