#include "lgp/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "lgp/errors.hpp"

namespace lgp {

namespace fs = std::filesystem;

namespace {

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

void put_u32(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                     static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(b, 4);
}

std::uint32_t get_u32(const unsigned char* b) {
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void write_png(const std::string& path, const Image& img) {
  if (img.height <= 0 || img.width <= 0) throw IoError(path + ": empty image");
  std::vector<std::uint8_t> bytes(img.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = to_byte(img.data[i]);

  png_image desc;
  std::memset(&desc, 0, sizeof desc);
  desc.version = PNG_IMAGE_VERSION;
  desc.width = static_cast<png_uint_32>(img.width);
  desc.height = static_cast<png_uint_32>(img.height);
  desc.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&desc, path.c_str(), 0, bytes.data(), 0, nullptr)) {
    const std::string msg = desc.message;
    png_image_free(&desc);
    throw IoError(path + ": " + msg);
  }
}

Image read_png(const std::string& path) {
  png_image desc;
  std::memset(&desc, 0, sizeof desc);
  desc.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&desc, path.c_str())) {
    throw IoError(path + ": " + std::string(desc.message));
  }
  desc.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> bytes(PNG_IMAGE_SIZE(desc));
  if (!png_image_finish_read(&desc, nullptr, bytes.data(), 0, nullptr)) {
    const std::string msg = desc.message;
    png_image_free(&desc);
    throw IoError(path + ": " + msg);
  }
  Image img(static_cast<int>(desc.height), static_cast<int>(desc.width));
  for (std::size_t i = 0; i < img.size(); ++i) img.data[i] = bytes[i] / 255.0;
  return img;
}

Image quantize8(const Image& img) {
  Image out = img;
  for (double& v : out.data) v = to_byte(v) / 255.0;
  return out;
}

void write_gamma_sidecar(const std::string& path, const Image& gamma) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out.write("LGPG", 4);
  put_u32(out, static_cast<std::uint32_t>(gamma.height));
  put_u32(out, static_cast<std::uint32_t>(gamma.width));
  put_u32(out, static_cast<std::uint32_t>(Image::kChannels));
  for (const double v : gamma.data) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  if (!out) throw IoError("write failed: " + path);
}

Image read_gamma_sidecar(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::array<unsigned char, 16> header{};
  in.read(reinterpret_cast<char*>(header.data()), 16);
  if (in.gcount() != 16 || std::memcmp(header.data(), "LGPG", 4) != 0) {
    throw IoError(path + ": not a perturbation sidecar");
  }
  const std::uint32_t h = get_u32(&header[4]);
  const std::uint32_t w = get_u32(&header[8]);
  const std::uint32_t c = get_u32(&header[12]);
  if (c != Image::kChannels || h == 0 || w == 0 || h > (1u << 16) || w > (1u << 16)) {
    throw IoError(path + ": unsupported sidecar shape");
  }
  Image gamma(static_cast<int>(h), static_cast<int>(w));
  std::vector<unsigned char> payload(gamma.size() * 4);
  in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
  if (in.gcount() != static_cast<std::streamsize>(payload.size())) {
    throw IoError(path + ": truncated payload");
  }
  for (std::size_t i = 0; i < gamma.size(); ++i) {
    gamma.data[i] = std::bit_cast<float>(get_u32(&payload[4 * i]));
  }
  return gamma;
}

Image perturbation_heat(const Image& gamma) {
  Image heat(gamma.height, gamma.width);
  std::vector<double> mag(static_cast<std::size_t>(gamma.height) * gamma.width, 0.0);
  double peak = 0.0;
  for (std::size_t p = 0; p < mag.size(); ++p) {
    for (int c = 0; c < Image::kChannels; ++c) {
      mag[p] = std::max(mag[p], std::abs(gamma.data[p * Image::kChannels + c]));
    }
    peak = std::max(peak, mag[p]);
  }
  for (std::size_t p = 0; p < mag.size(); ++p) {
    const double t = peak > 0.0 ? mag[p] / peak : 0.0;
    heat.data[p * 3 + 0] = t;
    heat.data[p * 3 + 1] = 0.0;
    heat.data[p * 3 + 2] = 1.0 - t;
  }
  return heat;
}

AePaths save_ae(const AEResult& result, const std::string& out_dir, const std::string& stem) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir + ": " + ec.message());
  const fs::path dir(out_dir);
  AePaths paths{(dir / (stem + "_adv.png")).string(), (dir / (stem + ".lgpg")).string(),
                (dir / (stem + "_heat.png")).string()};
  write_png(paths.image, result.x_adv);
  write_gamma_sidecar(paths.gamma, result.gamma);
  write_png(paths.heat, perturbation_heat(result.gamma));
  return paths;
}

}  // namespace lgp
