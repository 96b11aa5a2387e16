#include "fieldelim/snapshot.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "fieldelim/errors.hpp"

namespace fieldelim {

namespace {

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian hosts are not supported");

void put_double(std::ostream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  char bytes[8];
  for (int b = 0; b < 8; ++b) bytes[b] = static_cast<char>((bits >> (8 * b)) & 0xff);
  out.write(bytes, 8);
}

double get_double(std::istream& in) {
  unsigned char bytes[8];
  in.read(reinterpret_cast<char*>(bytes), 8);
  std::uint64_t bits = 0;
  for (int b = 0; b < 8; ++b) bits |= std::uint64_t(bytes[b]) << (8 * b);
  double v;
  std::memcpy(&v, &bits, sizeof v);
  return v;
}

}  // namespace

void write_snapshot(const std::filesystem::path& path,
                    std::span<const GridField> components,
                    const std::string& label) {
  if (components.empty()) {
    throw Error(ErrorKind::PreconditionViolated, "snapshot needs a component");
  }
  const Lattice& lat = components[0].lattice();
  for (const auto& c : components) {
    if (!(c.lattice() == lat)) {
      throw Error(ErrorKind::LatticeMismatch,
                  "snapshot components on different lattices");
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorKind::IoError, "cannot open snapshot for writing",
                {{"path", path.string()}});
  }
  const nlohmann::json header = {{"dims", lat.dims()},
                                 {"spacings", lat.spacings()},
                                 {"label", label},
                                 {"components", components.size()}};
  out << header.dump() << '\n';
  for (const auto& c : components) {
    for (const auto& z : c.values()) {
      put_double(out, z.real());
      put_double(out, z.imag());
    }
  }
  if (!out) {
    throw Error(ErrorKind::IoError, "snapshot write failed",
                {{"path", path.string()}});
  }
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorKind::IoError, "cannot open snapshot",
                {{"path", path.string()}});
  }
  std::string line;
  std::getline(in, line);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::IoError, "malformed snapshot header",
                {{"path", path.string()}, {"reason", e.what()}});
  }
  const auto dims = header.at("dims").get<std::array<int, 3>>();
  const auto h = header.at("spacings").get<std::array<double, 3>>();
  const Lattice lat(dims[0], dims[1], dims[2], h[0], h[1], h[2]);
  Snapshot snap;
  snap.label = header.value("label", "");
  const auto count = header.at("components").get<std::size_t>();
  for (std::size_t c = 0; c < count; ++c) {
    std::vector<cplx> v(lat.size());
    for (auto& z : v) {
      const double re = get_double(in);
      const double im = get_double(in);
      z = {re, im};
    }
    if (!in) {
      throw Error(ErrorKind::IoError, "truncated snapshot",
                  {{"path", path.string()}, {"component", c}});
    }
    snap.components.emplace_back(lat, std::move(v), false);
  }
  return snap;
}

}  // namespace fieldelim
