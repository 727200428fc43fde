#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "holgraph/numerics.hpp"

namespace holgraph {

/// Versioned binary container of named matrices plus JSON metadata.
///
/// Layout (little-endian host order):
///   magic "HGCKPT01", u32 scalar bytes, u64 metadata bytes, metadata (JSON),
///   u64 tensor count, then per tensor: u32 name bytes, name, u64 rows,
///   u64 cols, rows*cols raw scalars (row-major).
template <typename T>
struct Checkpoint {
  nlohmann::json metadata = nlohmann::json::object();
  std::vector<std::pair<std::string, Matrix<T>>> tensors;

  const Matrix<T>& tensor(std::string_view name) const;
};

template <typename T>
void save_checkpoint(const std::filesystem::path& path, const Checkpoint<T>& checkpoint);

/// Throws std::runtime_error on a bad magic, version or scalar width.
template <typename T>
Checkpoint<T> load_checkpoint(const std::filesystem::path& path);

/// Scalar width (4 or 8) recorded in a checkpoint file header.
int checkpoint_scalar_bytes(const std::filesystem::path& path);

/// FNV-1a over metadata and tensor bytes; identifies a parameter set.
template <typename T>
std::uint64_t checkpoint_identity(const Checkpoint<T>& checkpoint);

std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::uint64_t fnv1a64(std::string_view text, std::uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace holgraph
