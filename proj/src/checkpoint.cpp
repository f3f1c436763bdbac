#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "qball/error.hpp"
#include "qball/evolve.hpp"

namespace qball {

namespace {

constexpr char kMagic[8] = {'Q', 'B', 'C', 'K', 'P', 'T', '0', '1'};

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian platforms are not supported");

template <class T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    std::memcpy(&v, b, sizeof(T));
  }
  return v;
}

template <class T>
void put(std::ofstream& out, T v) {
  v = to_little(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw Error(ErrorKind::Io, "checkpoint truncated");
  return to_little(v);
}

}  // namespace

void save_checkpoint(const std::string& path, const FieldState& state) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open checkpoint for writing: " + path);
  const Grid& g = state.grid;
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(g.dim));
  put<std::uint32_t>(out, 0);
  put<std::uint64_t>(out, g.nx);
  put<std::uint64_t>(out, g.ny);
  put<double>(out, g.dx);
  put<double>(out, g.dy);
  put<double>(out, g.dt);
  put<double>(out, state.t);
  put<double>(out, g.x(0));
  put<double>(out, g.y(0));
  for (const auto* arr : {&state.re, &state.im, &state.vre, &state.vim}) {
    for (double v : *arr) put<double>(out, v);
  }
  if (!out) throw Error(ErrorKind::Io, "failed writing checkpoint: " + path);
}

FieldState load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw Error(ErrorKind::Io, "not a Q-ball checkpoint: " + path);
  }
  Grid g;
  g.dim = static_cast<int>(get<std::uint32_t>(in));
  (void)get<std::uint32_t>(in);
  g.nx = get<std::uint64_t>(in);
  g.ny = get<std::uint64_t>(in);
  g.dx = get<double>(in);
  g.dy = get<double>(in);
  g.dt = get<double>(in);
  const double t = get<double>(in);
  (void)get<double>(in);
  (void)get<double>(in);
  g.validate();
  FieldState state(g);
  state.t = t;
  for (auto* arr : {&state.re, &state.im, &state.vre, &state.vim}) {
    for (double& v : *arr) v = get<double>(in);
  }
  return state;
}

}  // namespace qball
