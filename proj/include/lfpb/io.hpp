#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "lfpb/image.hpp"
#include "lfpb/lightfield.hpp"

namespace lfpb {

namespace fs = std::filesystem;

/// Decoded PNG: one plane per channel (1 = gray, 3 = RGB), values in [0, 1].
struct PngImage {
  std::vector<Image> channels;
  int bit_depth = 8;
};

PngImage read_png(const fs::path& path);
void write_png(const fs::path& path, const std::vector<const Image*>& channels,
               int bit_depth);
void write_png(const fs::path& path, const Image& gray, int bit_depth);

/// Binary 16-bit PGM (P5, maxval 65535, big-endian samples).
void write_pgm16(std::ostream& out, const Image& img);
std::string encode_pgm16(const Image& img);
/// Accepts any maxval in [1, 65535]; throws DataError on malformed input.
Image decode_pgm(const std::string& bytes);

struct Manifest {
  int rows = 0;  // P
  int cols = 0;  // Q
  int width = 0;
  int height = 0;
  int bit_depth = 8;
  ColorSpace color_space = ColorSpace::luma;
};

std::string view_filename(int s, int t);

/// Loads a light field container: manifest.json plus view_<s>_<t>.png files.
LightField load_lightfield(const fs::path& dir);
LightField load_lightfield(const fs::path& dir, const Manifest& manifest);
Manifest read_manifest(const fs::path& dir);

void save_lightfield(const LightField& lf, const fs::path& dir, int bit_depth);

}  // namespace lfpb
