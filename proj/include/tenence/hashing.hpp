// SHA-256 digests for artifact provenance.

#ifndef TENENCE_HASHING_HPP
#define TENENCE_HASHING_HPP

#include <filesystem>
#include <string>
#include <string_view>

namespace tenence {

/// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);
/// Same, over a file's bytes. Throws std::runtime_error if unreadable.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace tenence

#endif  // TENENCE_HASHING_HPP
