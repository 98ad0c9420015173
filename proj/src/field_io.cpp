#include "chq/field_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace chq {

namespace {
constexpr std::array<char, 4> kMagic{'C', 'H', 'Q', 'F'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put_le(std::ostream& os, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::array<unsigned char, sizeof(T)> b;
  std::memcpy(b.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b.begin(), b.end());
  os.write(reinterpret_cast<const char*>(b.data()), sizeof(T));
}

template <class T>
T get_le(std::istream& is) {
  std::array<unsigned char, sizeof(T)> b;
  if (!is.read(reinterpret_cast<char*>(b.data()), sizeof(T)))
    throw Error("CHQF: unexpected end of file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(b.begin(), b.end());
  T value;
  std::memcpy(&value, b.data(), sizeof(T));
  return value;
}
}  // namespace

void write_chqf(std::ostream& os, const Field& f) {
  const Grid& g = f.grid();
  os.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(os, kVersion);
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(g.dim()));
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(g.points_per_axis()));
  put_le<double>(os, g.box_length());
  for (double v : f.values()) put_le<double>(os, v);
  if (!os) throw Error("CHQF: write failed");
}

void write_chqf(const std::filesystem::path& path, const Field& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("CHQF: cannot open " + path.string() + " for writing");
  write_chqf(os, f);
}

Field read_chqf(std::istream& is) {
  std::array<char, 4> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kMagic) throw Error("CHQF: bad magic");
  auto version = get_le<std::uint32_t>(is);
  if (version != kVersion) throw Error("CHQF: unsupported version " + std::to_string(version));
  auto n = get_le<std::uint32_t>(is);
  auto m = get_le<std::uint32_t>(is);
  auto l = get_le<double>(is);
  Grid g(static_cast<int>(n), static_cast<int>(m), l);
  std::vector<double> v(g.size());
  for (auto& x : v) x = get_le<double>(is);
  return Field(g, std::move(v));
}

Field read_chqf(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("CHQF: cannot open " + path.string());
  return read_chqf(is);
}

}  // namespace chq
