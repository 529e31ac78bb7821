#pragma once

// PNG and perturbation sidecar persistence.
//
// Sidecar layout, all little-endian: the bytes "LGPG", then uint32 height,
// width and channels, then height * width * channels float32 values in
// row-major, channel-interleaved order.

#include <string>

#include "lgp/attack_loop.hpp"
#include "lgp/types.hpp"

namespace lgp {

/// 8-bit RGB; values are rounded to the nearest level.
void write_png(const std::string& path, const Image& img);
/// Any PNG libpng can read, converted to 8-bit RGB and scaled to [0, 1].
Image read_png(const std::string& path);

/// Round-trips a value through the 8-bit quantizer used by write_png.
Image quantize8(const Image& img);

void write_gamma_sidecar(const std::string& path, const Image& gamma);
Image read_gamma_sidecar(const std::string& path);

/// Per-pixel max |gamma| over channels, normalized by its image maximum and
/// mapped from blue (0) to red (1). An all-zero field is uniformly blue.
Image perturbation_heat(const Image& gamma);

struct AePaths {
  std::string image;
  std::string gamma;
  std::string heat;
};

/// Writes `<stem>_adv.png`, `<stem>.lgpg` and `<stem>_heat.png` into
/// out_dir, creating it when needed.
AePaths save_ae(const AEResult& result, const std::string& out_dir, const std::string& stem);

}  // namespace lgp
