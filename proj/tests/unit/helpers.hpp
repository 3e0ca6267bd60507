#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include <unistd.h>

#include "lfpb/image.hpp"
#include "lfpb/lightfield.hpp"

namespace testutil {

inline lfpb::Image random_image(int w, int h, std::uint64_t seed, float lo = 0.0f,
                                float hi = 1.0f) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> dist(lo, hi);
  lfpb::Image img(w, h);
  for (float& v : img.data) v = dist(rng);
  return img;
}

inline lfpb::LightField random_lightfield(int p, int q, int w, int h, std::uint64_t seed) {
  lfpb::LightField lf(p, q, w, h);
  for (int i = 0; i < lf.view_count(); ++i) lf.views[i] = random_image(w, h, seed * 131 + i);
  return lf;
}

// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("lfpb_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace testutil
