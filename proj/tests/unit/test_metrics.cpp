#include <doctest.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "helpers.hpp"
#include "lfpb/error.hpp"
#include "lfpb/metrics.hpp"
#include "lfpb/synth.hpp"

using namespace lfpb;

namespace {

double psnr_oracle(const Image& a, const Image& b) {
  double mse = 0.0;
  for (int y = 0; y < a.height; ++y)
    for (int x = 0; x < a.width; ++x) mse += std::pow(double(a.at(x, y)) - b.at(x, y), 2);
  mse /= a.width * a.height;
  return 10.0 * std::log10(1.0 / mse);
}

// SSIM from its definition: a full 2-D Gaussian window at every valid
// position, statistics accumulated directly.
double ssim_oracle(const Image& a, const Image& b) {
  constexpr int n = 11;
  constexpr double sigma = 1.5;
  double g[n][n];
  double total = 0.0;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      g[j][i] = std::exp(-((i - 5.0) * (i - 5.0) + (j - 5.0) * (j - 5.0)) / (2.0 * sigma * sigma));
      total += g[j][i];
    }
  }
  const double c1 = 0.01 * 0.01;
  const double c2 = 0.03 * 0.03;
  double acc = 0.0;
  int count = 0;
  for (int y0 = 0; y0 + n <= a.height; ++y0) {
    for (int x0 = 0; x0 + n <= a.width; ++x0) {
      double ma = 0, mb = 0;
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
          const double w = g[j][i] / total;
          ma += w * a.at(x0 + i, y0 + j);
          mb += w * b.at(x0 + i, y0 + j);
        }
      double va = 0, vb = 0, cov = 0;
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
          const double w = g[j][i] / total;
          const double da = a.at(x0 + i, y0 + j) - ma;
          const double db = b.at(x0 + i, y0 + j) - mb;
          va += w * da * da;
          vb += w * db * db;
          cov += w * da * db;
        }
      acc += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++count;
    }
  }
  return acc / count;
}

double laplacian_oracle(const Image& img) {
  std::vector<double> vals;
  for (int y = 1; y < img.height - 1; ++y)
    for (int x = 1; x < img.width - 1; ++x)
      vals.push_back(4.0 * img.at(x, y) - img.at(x - 1, y) - img.at(x + 1, y) - img.at(x, y - 1) -
                     img.at(x, y + 1));
  double mean = 0.0;
  for (double v : vals) mean += v;
  mean /= vals.size();
  double var = 0.0;
  for (double v : vals) var += (v - mean) * (v - mean);
  return var / vals.size();
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("PSNR and SSIM agree with direct definitions") {
    for (int trial = 0; trial < 20; ++trial) {
      const int w = 11 + trial % 22;
      const int h = 11 + (trial * 7) % 22;
      const Image a = testutil::random_image(w, h, 500 + trial);
      Image b = a;
      const Image noise = testutil::random_image(w, h, 900 + trial, -0.1f, 0.1f);
      for (std::size_t k = 0; k < b.size(); ++k) b.data[k] += noise.data[k] * (trial % 3 + 1);
      CHECK(psnr(a, b) == doctest::Approx(psnr_oracle(a, b)).epsilon(1e-9));
      CHECK(std::fabs(ssim(a, b) - ssim_oracle(a, b)) < 1e-9);
    }
  }

  TEST_CASE("identical images") {
    const Image a = testutil::random_image(16, 16, 1);
    CHECK(std::isinf(psnr(a, a)));
    CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(ssim(Image(10, 20), Image(10, 20)), DataError);
    CHECK_THROWS_AS(psnr(Image(3, 3), Image(3, 4)), DataError);
  }

  TEST_CASE("PSNR peak scaling") {
    const Image a(4, 4, 0.5f);
    const Image b(4, 4, 0.6f);
    CHECK(psnr(a, b) == doctest::Approx(20.0).epsilon(1e-5));
    CHECK(psnr(a, b, 2.0) == doctest::Approx(20.0 + 20.0 * std::log10(2.0)).epsilon(1e-5));
  }

  TEST_CASE("default border crop") {
    CHECK(default_border_crop(16.0, 3) == 19);
    CHECK(default_border_crop(2.5, 2) == 5);
  }

  TEST_CASE("evaluation crops borders and averages views") {
    const LightField truth = testutil::random_lightfield(2, 2, 30, 28, 1);
    LightField restored = truth;
    for (int i = 0; i < 3; ++i)
      for (float& v : restored.views[i].data) v = std::min(1.0f, v + 0.01f * (i + 1));
    // Damage only the border of the last view: cropping hides it.
    restored.views[3].at(0, 0) = 1.0f - restored.views[3].at(0, 0);
    const EvalReport r = evaluate_lf(restored, truth, 3);
    REQUIRE(r.per_view.size() == 4);
    CHECK(std::isinf(r.per_view[3].psnr_db));
    CHECK(r.per_view[2].s == 1);
    CHECK(r.per_view[2].t == 0);
    for (int i = 0; i < 3; ++i) {
      const Image a = crop(restored.views[i], 3, 3, 24, 22);
      const Image b = crop(truth.views[i], 3, 3, 24, 22);
      CHECK(r.per_view[i].psnr_db == doctest::Approx(psnr(a, b)));
      CHECK(r.per_view[i].ssim == doctest::Approx(ssim(a, b)));
    }
    CHECK(std::isinf(r.mean_psnr));
    CHECK(evaluate_lf(restored, truth, 0).per_view[3].psnr_db < 100.0);

    CHECK_THROWS_AS(evaluate_lf(restored, truth, -1), UsageError);
    CHECK_THROWS_AS(evaluate_lf(restored, truth, 15), DataError);
    CHECK_THROWS_AS(evaluate_lf(testutil::random_lightfield(2, 2, 30, 27, 1), truth, 0), DataError);
    CHECK_THROWS_AS(evaluate_lf(testutil::random_lightfield(1, 4, 30, 28, 1), truth, 0), DataError);
  }

  TEST_CASE("report serialization") {
    const LightField truth = testutil::random_lightfield(1, 3, 20, 20, 2);
    LightField restored = truth;
    for (float& v : restored.views[0].data) v *= 0.9f;
    for (float& v : restored.views[2].data) v *= 0.95f;
    EvalReport r = evaluate_lf(restored, truth, 2);
    r.stage_seconds = {{"flow", 1.5}};

    const auto j = nlohmann::json::parse(report_to_json(r, false));
    CHECK(j["per_view"][1]["psnr_db"] == "inf");
    CHECK(j["per_view"][0]["psnr_db"].get<double>() == r.per_view[0].psnr_db);
    CHECK(j["border_crop"] == 2);
    CHECK(j["diagnostics"]["variance_before"].is_null());
    CHECK_FALSE(j["diagnostics"].contains("wall_clock_seconds"));
    CHECK(nlohmann::json::parse(report_to_json(r, true))["diagnostics"].contains("wall_clock_seconds"));

    // The CSV rows reproduce the per-view numbers, and the finite means agree.
    r.per_view.erase(r.per_view.begin() + 1);
    std::istringstream csv(report_to_csv(r));
    std::string line;
    std::getline(csv, line);
    CHECK(line == "index,s,t,psnr_db,ssim");
    double psnr_sum = 0.0;
    int rows = 0;
    while (std::getline(csv, line)) {
      std::istringstream fields(line);
      std::string cell;
      std::vector<std::string> cells;
      while (std::getline(fields, cell, ',')) cells.push_back(cell);
      REQUIRE(cells.size() == 5);
      CHECK(std::stod(cells[3]) == r.per_view[rows].psnr_db);
      CHECK(std::stod(cells[4]) == r.per_view[rows].ssim);
      psnr_sum += std::stod(cells[3]);
      ++rows;
    }
    CHECK(rows == 2);
    CHECK(psnr_sum / rows == doctest::Approx((r.per_view[0].psnr_db + r.per_view[1].psnr_db) / 2));

    testutil::TempDir dir("report");
    write_report(r, dir.path(), false);
    CHECK(std::filesystem::exists(dir / "report.json"));
    CHECK(std::filesystem::exists(dir / "report.csv"));
  }

  TEST_CASE("refocus") {
    // Zero slope averages the views; identical views give the view back.
    LightField same(3, 3, 12, 10);
    const Image v = testutil::random_image(12, 10, 3);
    for (auto& view : same.views) view = v;
    const Image flat = refocus(same, 0.0);
    for (std::size_t k = 0; k < v.size(); ++k) CHECK(flat.data[k] == doctest::Approx(v.data[k]).epsilon(1e-6));

    // The slope matching the disparity brings a translated plane into focus.
    const SyntheticLightField s = synth_translational(value_noise(60, 60, 4, 4, 2.0), 3, 3, 2.0);
    const Image center = s.lf.views[4];
    const Image focused = refocus(s.lf, 2.0);
    for (int y = 4; y < center.height - 4; ++y)
      for (int x = 4; x < center.width - 4; ++x)
        CHECK(focused.at(x, y) == doctest::Approx(center.at(x, y)).epsilon(1e-5));
    CHECK(laplacian_variance(focused) > laplacian_variance(refocus(s.lf, 0.0)));
    CHECK_THROWS_AS(refocus(s.lf, std::numeric_limits<double>::quiet_NaN()), UsageError);
  }

  TEST_CASE("laplacian variance") {
    for (int trial = 0; trial < 5; ++trial) {
      const Image img = testutil::random_image(9 + trial, 7, trial);
      CHECK(laplacian_variance(img) == doctest::Approx(laplacian_oracle(img)).epsilon(1e-9));
    }
    CHECK(laplacian_variance(Image(5, 5, 0.7f)) == doctest::Approx(0.0));
    CHECK_THROWS_AS(laplacian_variance(Image(2, 8)), DataError);
  }
}
