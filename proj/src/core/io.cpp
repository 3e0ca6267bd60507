#include "lfpb/io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "lfpb/error.hpp"
#include "lfpb/parallel.hpp"

namespace lfpb {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void png_warning_silent(png_structp, png_const_charp) {}

float quantize_unit(float v, int maxval) {
  return std::round(std::clamp(v, 0.0f, 1.0f) * static_cast<float>(maxval));
}

}  // namespace

PngImage read_png(const fs::path& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw IoError("cannot open " + path.string());
  png_byte sig[8];
  if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw DataError(path.string() + " is not a PNG file");
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr,
                                           png_warning_silent);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("libpng initialization failed");
  }

  png_uint_32 width = 0, height = 0;
  int depth = 0, color_type = 0;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("corrupt PNG header in " + path.string());
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  png_get_IHDR(png, info, &width, &height, &depth, &color_type, nullptr, nullptr, nullptr);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);
  const int channels = png_get_channels(png, info);
  const int out_depth = png_get_bit_depth(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);

  std::vector<png_byte> buffer(rowbytes * height);
  std::vector<png_bytep> rows(height);
  for (png_uint_32 y = 0; y < height; ++y) rows[y] = buffer.data() + y * rowbytes;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("corrupt PNG data in " + path.string());
  }
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  PngImage out;
  out.bit_depth = out_depth == 16 ? 16 : 8;
  const float maxval = out_depth == 16 ? 65535.0f : 255.0f;
  out.channels.assign(channels, Image(static_cast<int>(width), static_cast<int>(height)));
  for (png_uint_32 y = 0; y < height; ++y) {
    const png_byte* r = rows[y];
    for (png_uint_32 x = 0; x < width; ++x) {
      for (int c = 0; c < channels; ++c) {
        const std::size_t k = static_cast<std::size_t>(x) * channels + c;
        const unsigned sample =
            out_depth == 16 ? (static_cast<unsigned>(r[2 * k]) << 8) | r[2 * k + 1] : r[k];
        out.channels[c].at(static_cast<int>(x), static_cast<int>(y)) =
            static_cast<float>(sample) / maxval;
      }
    }
  }
  if (channels == 2 || channels == 4) out.channels.resize(channels - 1);
  return out;
}

void write_png(const fs::path& path, const std::vector<const Image*>& channels,
               int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) {
    throw UsageError("bit depth must be 8 or 16, got " + std::to_string(bit_depth));
  }
  if (channels.size() != 1 && channels.size() != 3) {
    throw UsageError("PNG output needs 1 or 3 channels");
  }
  const Image& first = *channels.front();
  for (const Image* c : channels) require_same_shape(first, *c, "write_png");
  const int nc = static_cast<int>(channels.size());
  const int bytes = bit_depth / 8;
  const int maxval = bit_depth == 16 ? 65535 : 255;
  const std::size_t rowbytes = static_cast<std::size_t>(first.width) * nc * bytes;
  std::vector<png_byte> buffer(rowbytes * first.height);
  for (int y = 0; y < first.height; ++y) {
    for (int x = 0; x < first.width; ++x) {
      for (int c = 0; c < nc; ++c) {
        const auto q = static_cast<unsigned>(quantize_unit(channels[c]->at(x, y), maxval));
        const std::size_t k = y * rowbytes + (static_cast<std::size_t>(x) * nc + c) * bytes;
        if (bytes == 2) {
          buffer[k] = static_cast<png_byte>(q >> 8);
          buffer[k + 1] = static_cast<png_byte>(q & 0xFF);
        } else {
          buffer[k] = static_cast<png_byte>(q);
        }
      }
    }
  }
  std::vector<png_bytep> rows(first.height);
  for (int y = 0; y < first.height; ++y) rows[y] = buffer.data() + y * rowbytes;

  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) throw IoError("cannot write " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr,
                                            png_warning_silent);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("failed writing " + path.string());
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(first.width),
               static_cast<png_uint_32>(first.height), bit_depth,
               nc == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  if (std::fflush(file.get()) != 0) throw IoError("failed writing " + path.string());
}

void write_png(const fs::path& path, const Image& gray, int bit_depth) {
  write_png(path, std::vector<const Image*>{&gray}, bit_depth);
}

std::string encode_pgm16(const Image& img) {
  std::string header = "P5\n" + std::to_string(img.width) + " " +
                       std::to_string(img.height) + "\n65535\n";
  std::string out = header;
  out.resize(header.size() + img.size() * 2);
  std::size_t k = header.size();
  for (float v : img.data) {
    const auto q = static_cast<unsigned>(quantize_unit(v, 65535));
    out[k++] = static_cast<char>(q >> 8);
    out[k++] = static_cast<char>(q & 0xFF);
  }
  return out;
}

void write_pgm16(std::ostream& out, const Image& img) {
  const std::string bytes = encode_pgm16(img);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Image decode_pgm(const std::string& bytes) {
  std::size_t pos = 0;
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      const char c = bytes[pos];
      if (c == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&](const char* field) {
    skip_space();
    long value = 0;
    const std::size_t start = pos;
    while (pos < bytes.size() && bytes[pos] >= '0' && bytes[pos] <= '9') {
      value = value * 10 + (bytes[pos] - '0');
      if (value > 1'000'000'000) throw DataError(std::string("PGM ") + field + " too large");
      ++pos;
    }
    if (pos == start) throw DataError(std::string("PGM header: missing ") + field);
    return value;
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    throw DataError("not a binary PGM (expected P5 magic)");
  }
  pos = 2;
  const long width = read_int("width");
  const long height = read_int("height");
  const long maxval = read_int("maxval");
  if (width <= 0 || height <= 0) throw DataError("PGM has empty dimensions");
  if (maxval < 1 || maxval > 65535) throw DataError("PGM maxval out of range");
  if (pos >= bytes.size()) throw DataError("PGM truncated after header");
  ++pos;  // single whitespace before the raster
  const int bps = maxval > 255 ? 2 : 1;
  const std::size_t need = static_cast<std::size_t>(width) * height * bps;
  if (bytes.size() - pos < need) {
    throw DataError("PGM raster truncated (" + std::to_string(bytes.size() - pos) +
                    " of " + std::to_string(need) + " bytes)");
  }
  Image img(static_cast<int>(width), static_cast<int>(height));
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + pos);
  for (std::size_t i = 0; i < img.size(); ++i) {
    const unsigned sample = bps == 2 ? (static_cast<unsigned>(p[2 * i]) << 8) | p[2 * i + 1] : p[i];
    img.data[i] = static_cast<float>(sample) / static_cast<float>(maxval);
  }
  return img;
}

std::string view_filename(int s, int t) {
  char name[32];
  std::snprintf(name, sizeof name, "view_%02d_%02d.png", s, t);
  return name;
}

Manifest read_manifest(const fs::path& dir) {
  const fs::path path = dir / "manifest.json";
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
    Manifest m;
    m.rows = j.at("P").get<int>();
    m.cols = j.at("Q").get<int>();
    m.width = j.at("X").get<int>();
    m.height = j.at("Y").get<int>();
    m.bit_depth = j.value("bit_depth", 8);
    m.color_space = color_space_from_string(j.value("color_space", std::string("luma")));
    if (m.rows < 1 || m.cols < 1 || m.width < 1 || m.height < 1) {
      throw DataError("manifest dimensions must be positive");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed manifest " + path.string() + ": " + e.what());
  }
}

LightField load_lightfield(const fs::path& dir) { return load_lightfield(dir, read_manifest(dir)); }

LightField load_lightfield(const fs::path& dir, const Manifest& m) {
  for (int s = 0; s < m.rows; ++s) {
    for (int t = 0; t < m.cols; ++t) {
      if (!fs::exists(dir / view_filename(s, t))) {
        throw DataError("missing view (" + std::to_string(s) + "," + std::to_string(t) +
                        "): " + (dir / view_filename(s, t)).string());
      }
    }
  }
  LightField lf(m.rows, m.cols, m.width, m.height, m.color_space);
  parallel_for(lf.view_count(), [&](int i) {
    const int s = i / m.cols;
    const int t = i % m.cols;
    PngImage png = read_png(dir / view_filename(s, t));
    const Image& c0 = png.channels.front();
    if (c0.width != m.width || c0.height != m.height) {
      throw DataError("inconsistent dimensions: view (" + std::to_string(s) + "," +
                      std::to_string(t) + ") is " + shape_string(c0.width, c0.height) +
                      ", manifest says " + shape_string(m.width, m.height));
    }
    if (png.channels.size() == 1) {
      lf.views[i] = c0;
      return;
    }
    Image& y = lf.views[i];
    for (std::size_t k = 0; k < y.size(); ++k) {
      const Ycc ycc = rgb_to_ycc(png.channels[0].data[k], png.channels[1].data[k],
                                 png.channels[2].data[k]);
      y.data[k] = ycc.y;
      if (lf.has_chroma()) {
        lf.cb[i].data[k] = ycc.cb;
        lf.cr[i].data[k] = ycc.cr;
      }
    }
  });
  return lf;
}

void save_lightfield(const LightField& lf, const fs::path& dir, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) {
    throw UsageError("bit depth must be 8 or 16, got " + std::to_string(bit_depth));
  }
  lf.validate();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create directory " + dir.string() +
                  (ec ? ": " + ec.message() : std::string()));
  }
  nlohmann::json j = {{"P", lf.rows},        {"Q", lf.cols},
                      {"X", lf.width()},     {"Y", lf.height()},
                      {"bit_depth", bit_depth}, {"color_space", to_string(lf.color_space)}};
  {
    std::ofstream out(dir / "manifest.json");
    if (!out) throw IoError("cannot write " + (dir / "manifest.json").string());
    out << j.dump(2) << "\n";
    if (!out) throw IoError("failed writing " + (dir / "manifest.json").string());
  }
  parallel_for(lf.view_count(), [&](int i) {
    const fs::path path = dir / view_filename(i / lf.cols, i % lf.cols);
    if (!lf.has_chroma()) {
      write_png(path, lf.views[i], bit_depth);
      return;
    }
    Image r(lf.width(), lf.height()), g(lf.width(), lf.height()), b(lf.width(), lf.height());
    for (std::size_t k = 0; k < r.size(); ++k) {
      ycc_to_rgb({lf.views[i].data[k], lf.cb[i].data[k], lf.cr[i].data[k]}, r.data[k],
                 g.data[k], b.data[k]);
    }
    write_png(path, std::vector<const Image*>{&r, &g, &b}, bit_depth);
  });
}

}  // namespace lfpb
