#include "disslab/storage.hpp"

#include "disslab/errors.hpp"

#include <yaml-cpp/yaml.h>

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace disslab {

namespace {

constexpr char kMagic[16] = {'D', 'I', 'S', 'S', 'L', 'A', 'B', '0', 0, 0, 0, 0, 0, 0, 0, 0};

static_assert(std::endian::native == std::endian::little, "snapshot IO assumes a little-endian host");

template <class T> void put(std::ofstream &os, T v) { os.write(reinterpret_cast<const char *>(&v), sizeof(T)); }

template <class T> T get(std::ifstream &is) {
  T v{};
  is.read(reinterpret_cast<char *>(&v), sizeof(T));
  if (!is)
    fail_config("bad_snapshot", "truncated snapshot header");
  return v;
}

} // namespace

std::string sidecar_path(const std::string &path) { return path + ".meta.yaml"; }

void write_snapshot(const std::string &path, const SpectralField &f, const SnapshotMeta &meta) {
  std::ofstream os(path, std::ios::binary);
  if (!os)
    fail_config("io_error", "cannot open " + path + " for writing");
  os.write(kMagic, 16);
  put<std::int64_t>(os, f.grid.dim);
  put<std::int64_t>(os, f.ncomp);
  put<std::int64_t>(os, f.grid.n);
  put<double>(os, f.grid.length);
  auto phys = inverse(f);
  for (const auto &comp : phys)
    os.write(reinterpret_cast<const char *>(comp.data()), static_cast<std::streamsize>(comp.size() * sizeof(double)));

  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "time" << YAML::Value << meta.time;
  out << YAML::Key << "viscosity" << YAML::Value << meta.viscosity;
  out << YAML::Key << "parameters" << YAML::Value << YAML::BeginMap;
  for (const auto &[k, v] : meta.params)
    out << YAML::Key << k << YAML::Value << v;
  out << YAML::EndMap << YAML::EndMap;
  std::ofstream ms(sidecar_path(path));
  ms << out.c_str() << "\n";
}

SpectralField read_snapshot(const std::string &path, SnapshotMeta *meta) {
  std::ifstream is(path, std::ios::binary);
  if (!is)
    fail_config("io_error", "cannot open snapshot " + path);
  char magic[16];
  is.read(magic, 16);
  if (!is || std::memcmp(magic, kMagic, 16) != 0)
    fail_config("bad_snapshot", path + " is not a DISSLAB0 snapshot");
  Grid g;
  g.dim = static_cast<int>(get<std::int64_t>(is));
  auto ncomp = get<std::int64_t>(is);
  g.n = static_cast<int>(get<std::int64_t>(is));
  g.length = get<double>(is);
  g.validate();
  if (ncomp < 1 || ncomp > 3)
    fail_config("bad_snapshot", "snapshot component count out of range");
  std::vector<Samples> comps(ncomp, Samples(g.points()));
  for (auto &comp : comps) {
    is.read(reinterpret_cast<char *>(comp.data()), static_cast<std::streamsize>(comp.size() * sizeof(double)));
    if (!is)
      fail_config("bad_snapshot", "snapshot payload truncated");
  }
  if (meta) {
    *meta = SnapshotMeta{};
    std::ifstream ms(sidecar_path(path));
    if (ms) {
      YAML::Node node = YAML::LoadFile(sidecar_path(path));
      if (node["time"])
        meta->time = node["time"].as<double>();
      if (node["viscosity"])
        meta->viscosity = node["viscosity"].as<double>();
      if (node["parameters"])
        for (const auto &kv : node["parameters"])
          meta->params[kv.first.as<std::string>()] = kv.second.as<std::string>();
    }
  }
  return transform(g, comps);
}

} // namespace disslab
