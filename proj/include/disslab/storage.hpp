#pragma once

#include "disslab/spectral.hpp"

#include <map>
#include <string>

namespace disslab {

struct SnapshotMeta {
  double time = 0.0;
  double viscosity = 0.0;
  std::map<std::string, std::string> params;
};

// Binary layout: 16-byte magic, int64 dim, int64 components, int64 n_per_axis,
// float64 box_length (all little endian), then row-major float64 samples per component.
// The metadata sidecar is written next to the snapshot as <path>.meta.yaml.
void write_snapshot(const std::string &path, const SpectralField &f, const SnapshotMeta &meta);
SpectralField read_snapshot(const std::string &path, SnapshotMeta *meta = nullptr);
std::string sidecar_path(const std::string &path);

} // namespace disslab
