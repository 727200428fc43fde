#include "holgraph/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace holgraph {

namespace {

constexpr char kMagic[8] = {'H', 'G', 'C', 'K', 'P', 'T', '0', '1'};

template <typename V>
void put(std::ostream& out, V value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(V));
}

template <typename V>
V get(std::istream& in) {
  V value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(V))) throw std::runtime_error("checkpoint: truncated file");
  return value;
}

std::string get_string(std::istream& in, std::size_t size) {
  std::string s(size, '\0');
  if (size > 0 && !in.read(s.data(), static_cast<std::streamsize>(size))) {
    throw std::runtime_error("checkpoint: truncated file");
  }
  return s;
}

std::ifstream open_checked(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) {
    throw std::runtime_error("not a checkpoint file (bad magic): " + path.string());
  }
  return in;
}

}  // namespace

std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t seed) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fnv1a64(std::string_view text, std::uint64_t seed) { return fnv1a64(text.data(), text.size(), seed); }

template <typename T>
const Matrix<T>& Checkpoint<T>::tensor(std::string_view name) const {
  for (const auto& [n, m] : tensors) {
    if (n == name) return m;
  }
  throw std::runtime_error("checkpoint has no tensor named " + std::string(name));
}

template <typename T>
void save_checkpoint(const std::filesystem::path& path, const Checkpoint<T>& checkpoint) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out.write(kMagic, 8);
  put<std::uint32_t>(out, sizeof(T));
  const std::string meta = checkpoint.metadata.dump();
  put<std::uint64_t>(out, meta.size());
  out.write(meta.data(), static_cast<std::streamsize>(meta.size()));
  put<std::uint64_t>(out, checkpoint.tensors.size());
  for (const auto& [name, m] : checkpoint.tensors) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put<std::uint64_t>(out, static_cast<std::uint64_t>(m.rows()));
    put<std::uint64_t>(out, static_cast<std::uint64_t>(m.cols()));
    out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(T)));
  }
  if (!out) throw std::runtime_error("failed writing checkpoint " + path.string());
}

int checkpoint_scalar_bytes(const std::filesystem::path& path) {
  auto in = open_checked(path);
  return static_cast<int>(get<std::uint32_t>(in));
}

template <typename T>
Checkpoint<T> load_checkpoint(const std::filesystem::path& path) {
  auto in = open_checked(path);
  const auto scalar = get<std::uint32_t>(in);
  if (scalar != sizeof(T)) {
    throw std::runtime_error("checkpoint stores " + std::to_string(scalar * 8) + "-bit values, expected " +
                             std::to_string(sizeof(T) * 8));
  }
  Checkpoint<T> checkpoint;
  const auto meta_size = get<std::uint64_t>(in);
  checkpoint.metadata = nlohmann::json::parse(get_string(in, meta_size));
  const auto count = get<std::uint64_t>(in);
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto name_size = get<std::uint32_t>(in);
    std::string name = get_string(in, name_size);
    const auto rows = get<std::uint64_t>(in);
    const auto cols = get<std::uint64_t>(in);
    Matrix<T> m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    if (m.size() > 0 &&
        !in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(T)))) {
      throw std::runtime_error("checkpoint: truncated tensor " + name);
    }
    checkpoint.tensors.emplace_back(std::move(name), std::move(m));
  }
  return checkpoint;
}

template <typename T>
std::uint64_t checkpoint_identity(const Checkpoint<T>& checkpoint) {
  std::uint64_t h = fnv1a64(checkpoint.metadata.dump());
  for (const auto& [name, m] : checkpoint.tensors) {
    h = fnv1a64(name, h);
    h = fnv1a64(m.data(), static_cast<std::size_t>(m.size()) * sizeof(T), h);
  }
  return h;
}

template struct Checkpoint<float>;
template struct Checkpoint<double>;
template void save_checkpoint<float>(const std::filesystem::path&, const Checkpoint<float>&);
template void save_checkpoint<double>(const std::filesystem::path&, const Checkpoint<double>&);
template Checkpoint<float> load_checkpoint<float>(const std::filesystem::path&);
template Checkpoint<double> load_checkpoint<double>(const std::filesystem::path&);
template std::uint64_t checkpoint_identity<float>(const Checkpoint<float>&);
template std::uint64_t checkpoint_identity<double>(const Checkpoint<double>&);

}  // namespace holgraph
