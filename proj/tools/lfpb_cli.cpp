// Command-line front end. Talks to the library exclusively through lfpb.h.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lfpb/lfpb.h"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kBackend = 3, kProperty = 4 };

struct Failure {
  int code;
  std::string message;
};

int exit_code(lfpb_status s) {
  switch (s) {
    case LFPB_OK: return kOk;
    case LFPB_ERR_USAGE: return kUsage;
    case LFPB_ERR_BACKEND_SPAWN:
    case LFPB_ERR_BACKEND_EXIT:
    case LFPB_ERR_BACKEND_TIMEOUT:
    case LFPB_ERR_BACKEND_DIMS:
    case LFPB_ERR_BACKEND_FORMAT: return kBackend;
    default: return kData;
  }
}

// Throws with the stage name prefixed to the library message.
void check(lfpb_status s, const std::string& stage) {
  if (s == LFPB_OK) return;
  std::string msg = lfpb_last_error();
  if (msg.rfind(stage + ":", 0) != 0) msg = stage + ": " + msg;
  throw Failure{exit_code(s), msg + " [" + lfpb_status_name(s) + "]"};
}

[[noreturn]] void usage_error(const std::string& msg) { throw Failure{kUsage, msg}; }

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using LightFieldPtr = std::unique_ptr<lfpb_lightfield, Deleter<lfpb_lightfield, lfpb_lightfield_free>>;
using ImagePtr = std::unique_ptr<lfpb_image, Deleter<lfpb_image, lfpb_image_free>>;
using ConfigPtr = std::unique_ptr<lfpb_config, Deleter<lfpb_config, lfpb_config_free>>;
using ResultPtr = std::unique_ptr<lfpb_result, Deleter<lfpb_result, lfpb_result_free>>;
using ReportPtr = std::unique_ptr<lfpb_report, Deleter<lfpb_report, lfpb_report_free>>;

// ---------------------------------------------------------------------------
// Layered configuration: defaults < --config file < explicit flags.

struct OptionSpec {
  std::string key;
  json fallback;  // default value; also fixes the type
  std::string help;
};

class Command {
 public:
  Command(CLI::App& parent, std::string name, std::string help, std::vector<OptionSpec> specs)
      : name_(std::move(name)), specs_(std::move(specs)) {
    app_ = parent.add_subcommand(name_, std::move(help));
    for (const auto& s : specs_) {
      if (s.fallback.is_boolean()) {
        app_->add_flag("--" + s.key, flags_[s.key], s.help);
      } else {
        app_->add_option("--" + s.key, raw_[s.key], s.help);
      }
    }
    app_->add_option("--config", config_file_, "JSON file with the same keys as the flags");
  }

  CLI::App* app() const { return app_; }
  const std::string& name() const { return name_; }

  json resolve() const {
    json cfg = json::object();
    for (const auto& s : specs_) cfg[s.key] = s.fallback;
    if (!config_file_.empty()) {
      std::ifstream in(config_file_);
      if (!in) throw Failure{kData, "cannot read config file " + config_file_};
      json file;
      try {
        file = json::parse(in);
      } catch (const json::exception& e) {
        throw Failure{kData, "config file " + config_file_ + ": " + e.what()};
      }
      if (!file.is_object()) throw Failure{kData, "config file must hold a JSON object"};
      for (const auto& [k, v] : file.items()) {
        const std::string key = normalize(k);
        if (key == "threads" || key == "config") continue;
        if (!cfg.contains(key)) usage_error("unknown key '" + k + "' in " + config_file_);
        cfg[key] = coerce(key, v, cfg[key]);
      }
    }
    for (const auto& s : specs_) {
      const CLI::Option* opt = app_->get_option("--" + s.key);
      if (opt->count() == 0) continue;
      if (s.fallback.is_boolean()) {
        cfg[s.key] = flags_.at(s.key);
      } else {
        cfg[s.key] = parse_flag(s.key, raw_.at(s.key), s.fallback);
      }
    }
    return cfg;
  }

 private:
  static std::string normalize(std::string k) {
    for (char& c : k) {
      if (c == '_') c = '-';
    }
    return k;
  }

  static json coerce(const std::string& key, const json& v, const json& like) {
    if (like.is_boolean() && v.is_boolean()) return v;
    if (like.is_string() && v.is_string()) return v;
    if (like.is_number_unsigned() && v.is_number_unsigned()) return v;
    if (like.is_number_integer() && v.is_number_integer()) return v;
    if (like.is_number_float() && v.is_number()) return v.get<double>();
    usage_error("config key '" + key + "' has the wrong type");
  }

  static json parse_flag(const std::string& key, const std::string& text, const json& like) {
    try {
      std::size_t used = 0;
      if (like.is_string()) return text;
      if (like.is_number_unsigned()) {
        if (!text.empty() && text[0] == '-') throw std::invalid_argument("negative");
        const unsigned long long v = std::stoull(text, &used);
        if (used == text.size()) return v;
      } else if (like.is_number_integer()) {
        const long long v = std::stoll(text, &used);
        if (used == text.size()) return v;
      } else {
        const double v = std::stod(text, &used);
        if (used == text.size() && std::isfinite(v)) return v;
      }
    } catch (const std::exception&) {
    }
    usage_error("invalid value '" + text + "' for --" + key);
  }

  std::string name_;
  std::vector<OptionSpec> specs_;
  CLI::App* app_ = nullptr;
  std::map<std::string, std::string> raw_;
  std::map<std::string, bool> flags_;
  std::string config_file_;
};

std::string str(const json& cfg, const char* key) { return cfg.at(key).get<std::string>(); }
int integer(const json& cfg, const char* key) { return cfg.at(key).get<int>(); }
double real(const json& cfg, const char* key) { return cfg.at(key).get<double>(); }
bool flag(const json& cfg, const char* key) { return cfg.at(key).get<bool>(); }

std::string require_path(const json& cfg, const char* key) {
  std::string p = str(cfg, key);
  if (p.empty()) usage_error("--" + std::string(key) + " is required");
  return p;
}

int checked_alpha(const json& cfg) {
  const int a = integer(cfg, "alpha");
  if (a < 2 || a > 4) usage_error("--alpha must be 2, 3 or 4, got " + std::to_string(a));
  return a;
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw Failure{kData, "cannot create output directory " + dir.string()};
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Failure{kData, "cannot write " + path.string()};
  out << text;
  if (!out) throw Failure{kData, "failed writing " + path.string()};
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

// Output paths are deliberately left out so identical runs into different
// directories produce identical trees.
void write_run_config(const fs::path& dir, const std::string& command, json cfg,
                      const json& extra = json::object()) {
  cfg.erase("output");
  json rc;
  rc["command"] = command;
  rc["version"] = lfpb_version();
  rc["config"] = std::move(cfg);
  for (const auto& [k, v] : extra.items()) rc[k] = v;
  write_json(dir / "run_config.json", rc);
}

json number(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

LightFieldPtr load(const std::string& dir, const std::string& what) {
  if (!fs::exists(dir)) throw Failure{kData, what + ": " + dir + " does not exist"};
  lfpb_lightfield* lf = nullptr;
  check(lfpb_lightfield_load(dir.c_str(), &lf), "load " + what);
  return LightFieldPtr(lf);
}

lfpb_lightfield_info info_of(const lfpb_lightfield* lf) {
  lfpb_lightfield_info i{};
  check(lfpb_lightfield_info_get(lf, &i), "inspect");
  return i;
}

// A truth argument is either a container or a directory holding the
// ground_truth.json pointer written by `degrade`; the pointer wins.
LightFieldPtr load_truth(const std::string& dir) {
  const fs::path pointer = fs::path(dir) / "ground_truth.json";
  if (fs::exists(pointer)) {
    std::ifstream in(pointer);
    json p;
    try {
      p = json::parse(in);
    } catch (const json::exception& e) {
      throw Failure{kData, "ground truth pointer " + pointer.string() + ": " + e.what()};
    }
    LightFieldPtr src = load(p.at("source").get<std::string>(), "ground truth");
    const int w = p.at("crop").at(0).get<int>();
    const int h = p.at("crop").at(1).get<int>();
    lfpb_lightfield* cropped = nullptr;
    check(lfpb_lightfield_crop(src.get(), w, h, &cropped), "crop ground truth");
    return LightFieldPtr(cropped);
  }
  return load(dir, "ground truth");
}

ConfigPtr pipeline_config(const json& cfg) {
  lfpb_config* raw = nullptr;
  check(lfpb_config_create(&raw), "config");
  ConfigPtr c(raw);
  check(lfpb_config_set_alpha(c.get(), checked_alpha(cfg)), "config");
  const double timeout = real(cfg, "backend-timeout");
  if (!(timeout > 0.0)) usage_error("--backend-timeout must be positive");
  check(lfpb_config_set_backend(c.get(), str(cfg, "backend").c_str(),
                                static_cast<int>(std::lround(timeout * 1000.0))),
        "backend");
  check(lfpb_config_set_max_disparity(c.get(), real(cfg, "max-disparity")), "config");
  const std::string cache = str(cfg, "flow-cache");
  check(lfpb_config_set_flow_cache(c.get(), cache.empty() ? nullptr : cache.c_str()), "config");
  check(lfpb_config_set_crack_fill(c.get(), str(cfg, "crack-fill").c_str()), "config");
  check(lfpb_config_set_consistency_tolerance(c.get(), real(cfg, "consistency-tolerance")),
        "config");
  check(lfpb_config_set_fallback(c.get(), flag(cfg, "fallback") ? 1 : 0), "config");
  return c;
}

json diagnostics_json(const lfpb_result* result, bool with_timings) {
  lfpb_diagnostics d{};
  check(lfpb_result_diagnostics(result, &d), "diagnostics");
  json j;
  j["variance_before"] = number(d.variance_before);
  j["variance_after"] = number(d.variance_after);
  json ent = json::array();
  json sv = json::array();
  for (int i = 0; i < d.basis_count; ++i) {
    double s = 0.0, e = 0.0;
    check(lfpb_result_basis(result, i, &s, &e), "diagnostics");
    sv.push_back(s);
    ent.push_back(e);
  }
  j["basis_entropy"] = ent;
  j["singular_values"] = sv;
  j["backend_calls"] = d.backend_calls;
  j["backend_fell_back"] = d.backend_fell_back != 0;
  j["flow_cache_hit"] = d.flow_cache_hit != 0;
  j["crack_pixels"] = d.crack_pixels;
  if (with_timings) {
    json t = json::object();
    for (int i = 0; i < d.stage_count; ++i) {
      const char* name = nullptr;
      double seconds = 0.0;
      check(lfpb_result_stage(result, i, &name, &seconds), "diagnostics");
      t[name] = seconds;
    }
    j["wall_clock_seconds"] = t;
  }
  return j;
}

// ---------------------------------------------------------------------------
// Subcommands.

int run_degrade(const json& cfg) {
  const std::string input = require_path(cfg, "input");
  const fs::path out = require_path(cfg, "output");
  const int alpha = checked_alpha(cfg);
  LightFieldPtr hr = load(input, "input");
  const lfpb_lightfield_info in = info_of(hr.get());
  const int w = in.width / alpha * alpha;
  const int h = in.height / alpha * alpha;
  if (w == 0 || h == 0) throw Failure{kData, "views are smaller than alpha"};

  lfpb_degrade_params p;
  lfpb_degrade_params_init(&p);
  p.alpha = alpha;
  const std::string blur = str(cfg, "blur");
  if (blur == "none") p.blur = LFPB_BLUR_NONE;
  else if (blur == "box") p.blur = LFPB_BLUR_BOX;
  else if (blur == "gaussian") p.blur = LFPB_BLUR_GAUSSIAN;
  else usage_error("--blur must be none, box or gaussian");
  p.blur_sigma = real(cfg, "blur-sigma");
  const std::string dec = str(cfg, "decimation");
  if (dec == "bicubic") p.decimation = LFPB_DECIMATE_BICUBIC;
  else if (dec == "point") p.decimation = LFPB_DECIMATE_POINT;
  else usage_error("--decimation must be bicubic or point");
  p.noise_sigma = real(cfg, "noise");
  p.seed = cfg.at("seed").get<std::uint64_t>();

  lfpb_lightfield* lr_raw = nullptr;
  check(lfpb_degrade(hr.get(), &p, &lr_raw), "degrade");
  LightFieldPtr lr(lr_raw);
  check(lfpb_lightfield_save(lr.get(), out.string().c_str(), integer(cfg, "bit-depth")), "save");

  std::error_code ec;
  const fs::path source = fs::weakly_canonical(fs::absolute(input), ec);
  write_json(out / "ground_truth.json",
             json{{"source", (ec ? fs::absolute(input) : source).string()}, {"crop", {w, h}}});
  json crop{{"applied", w != in.width || h != in.height},
            {"from", {in.width, in.height}},
            {"to", {w, h}}};
  write_run_config(out, "degrade", cfg, json{{"crop", crop}});
  const lfpb_lightfield_info o = info_of(lr.get());
  std::cerr << "degrade: " << in.width << "x" << in.height << " -> " << o.width << "x" << o.height
            << (w != in.width || h != in.height ? " (cropped to " + std::to_string(w) + "x" +
                                                      std::to_string(h) + " first)"
                                                : std::string())
            << "\n";
  return kOk;
}

int run_superres(const json& cfg) {
  const std::string input = require_path(cfg, "input");
  const fs::path out = require_path(cfg, "output");
  if (str(cfg, "pipeline-order") != "upsample-first") {
    usage_error("--pipeline-order supports only 'upsample-first'");
  }
  ConfigPtr pc = pipeline_config(cfg);
  LightFieldPtr lr = load(input, "input");
  lfpb_result* raw = nullptr;
  check(lfpb_superresolve(lr.get(), pc.get(), &raw), "superres");
  ResultPtr result(raw);
  check(lfpb_lightfield_save(lfpb_result_output(result.get()), out.string().c_str(),
                             integer(cfg, "bit-depth")),
        "save");
  const bool timings = flag(cfg, "timings");
  const json diag = diagnostics_json(result.get(), timings);
  write_json(out / "diagnostics.json", diag);
  write_run_config(out, "superres", cfg);
  std::cerr << "superres: backend " << str(cfg, "backend") << " calls=" << diag["backend_calls"]
            << " flow_cache=" << (diag["flow_cache_hit"].get<bool>() ? "hit" : "miss")
            << " crack_pixels=" << diag["crack_pixels"] << "\n";
  return kOk;
}

int run_evaluate(const json& cfg) {
  const std::string input = require_path(cfg, "input");
  const std::string truth_dir = require_path(cfg, "truth");
  const fs::path out = require_path(cfg, "output");
  LightFieldPtr restored = load(input, "restored");
  LightFieldPtr truth = load_truth(truth_dir);
  int crop = integer(cfg, "border-crop");
  if (crop < 0) crop = lfpb_default_border_crop(real(cfg, "max-disparity"), checked_alpha(cfg));
  lfpb_report* raw = nullptr;
  check(lfpb_evaluate(restored.get(), truth.get(), crop, &raw), "evaluate");
  ReportPtr report(raw);
  make_dir(out);
  const bool timings = flag(cfg, "timings");
  check(lfpb_report_write(report.get(), out.string().c_str(), timings ? 1 : 0), "write report");

  // Fold the pipeline diagnostics of the restored container into the report.
  const fs::path diag_path = fs::path(input) / "diagnostics.json";
  if (fs::exists(diag_path)) {
    std::ifstream din(diag_path);
    std::ifstream rin(out / "report.json");
    try {
      json diag = json::parse(din);
      json rep = json::parse(rin);
      for (const char* key : {"variance_before", "variance_after", "basis_entropy"}) {
        if (diag.contains(key)) rep["diagnostics"][key] = diag[key];
      }
      if (timings && diag.contains("wall_clock_seconds")) {
        rep["diagnostics"]["wall_clock_seconds"] = diag["wall_clock_seconds"];
      }
      write_json(out / "report.json", rep);
    } catch (const json::exception& e) {
      throw Failure{kData, "diagnostics " + diag_path.string() + ": " + e.what()};
    }
  }
  write_run_config(out, "evaluate", cfg, json{{"border_crop_used", crop}});
  double mp = 0.0, ms = 0.0;
  int n = 0;
  check(lfpb_report_means(report.get(), &mp, &ms, &n), "evaluate");
  std::cout << "views " << n << "  mean PSNR " << mp << " dB  mean SSIM " << ms << "\n";
  return kOk;
}

int run_decompose(const json& cfg) {
  const std::string input = require_path(cfg, "input");
  const fs::path out = require_path(cfg, "output");
  LightFieldPtr lf = load(input, "input");
  make_dir(out);
  lfpb_compaction_stats st{};
  check(lfpb_compaction(lf.get(), real(cfg, "max-disparity"), out.string().c_str(), &st),
        "decompose");
  json summary{{"basis_count", st.basis_count},
               {"residual_energy", {{"unaligned", st.residual_unaligned},
                                    {"aligned", st.residual_aligned}}},
               {"view_variance", {{"unaligned", st.variance_unaligned},
                                  {"aligned", st.variance_aligned}}},
               {"entropy_b1", {{"unaligned", number(st.entropy_b1_unaligned)},
                               {"aligned", number(st.entropy_b1_aligned)}}}};
  write_json(out / "compaction.json", summary);
  write_run_config(out, "decompose", cfg);
  std::cout << "residual energy unaligned " << st.residual_unaligned << " aligned "
            << st.residual_aligned << "\n";
  return kOk;
}

int run_refocus(const json& cfg) {
  const std::string input = require_path(cfg, "input");
  const fs::path out = require_path(cfg, "output");
  LightFieldPtr lf = load(input, "input");
  lfpb_image* raw = nullptr;
  check(lfpb_refocus(lf.get(), real(cfg, "slope"), &raw), "refocus");
  ImagePtr img(raw);
  make_dir(out);
  check(lfpb_image_save_png(img.get(), (out / "refocus.png").string().c_str(),
                            integer(cfg, "bit-depth")),
        "save");
  write_run_config(out, "refocus", cfg);
  return kOk;
}

// Synthetic end-to-end run that checks the headline properties.
int run_demo(const json& cfg) {
  const fs::path out = require_path(cfg, "output");
  const int alpha = checked_alpha(cfg);
  const std::uint64_t seed = cfg.at("seed").get<std::uint64_t>();
  const int views = integer(cfg, "views");
  const int size = integer(cfg, "size");
  if (views < 3 || views % 2 == 0) usage_error("--views must be odd and >= 3");
  if (size < 48 || size % alpha != 0) usage_error("--size must be >= 48 and a multiple of alpha");
  make_dir(out);

  lfpb_scene_params sp{views, views, size, size, seed, 1.0, 3.0, 0.0};
  lfpb_lightfield* raw = nullptr;
  check(lfpb_synthesize_scene(&sp, &raw), "synthesize");
  LightFieldPtr truth(raw);
  check(lfpb_lightfield_save(truth.get(), (out / "ground_truth").string().c_str(), 16), "save");

  lfpb_degrade_params dp;
  lfpb_degrade_params_init(&dp);
  dp.alpha = alpha;
  dp.seed = seed;
  check(lfpb_degrade(truth.get(), &dp, &raw), "degrade");
  LightFieldPtr lr(raw);
  check(lfpb_lightfield_save(lr.get(), (out / "lr").string().c_str(), 16), "save");

  const int crop = lfpb_default_border_crop(real(cfg, "max-disparity"), alpha);
  const bool timings = flag(cfg, "timings");
  auto report_for = [&](const lfpb_lightfield* lf, const fs::path& dir,
                        const lfpb_result* result) {
    lfpb_report* r = nullptr;
    check(lfpb_evaluate(lf, truth.get(), crop, &r), "evaluate");
    ReportPtr rep(r);
    if (result) check(lfpb_report_attach(rep.get(), result), "evaluate");
    check(lfpb_report_write(rep.get(), dir.string().c_str(), timings ? 1 : 0), "write report");
    double mp = 0.0;
    check(lfpb_report_means(rep.get(), &mp, nullptr, nullptr), "evaluate");
    return mp;
  };

  check(lfpb_upsample(lr.get(), alpha, &raw), "upsample");
  LightFieldPtr bicubic(raw);
  const double psnr_bicubic = report_for(bicubic.get(), out / "bicubic", nullptr);

  json pcfg = cfg;
  pcfg["flow-cache"] = "";
  pcfg["crack-fill"] = "collocated_lr";
  pcfg["consistency-tolerance"] = 0.02;
  pcfg["fallback"] = false;
  pcfg["backend-timeout"] = 120.0;
  ConfigPtr pc = pipeline_config(pcfg);
  lfpb_result* res_raw = nullptr;
  check(lfpb_superresolve(lr.get(), pc.get(), &res_raw), "superres");
  ResultPtr result(res_raw);
  const lfpb_lightfield* restored = lfpb_result_output(result.get());
  check(lfpb_lightfield_save(restored, (out / "restored").string().c_str(), 16), "save");
  const double psnr_pb = report_for(restored, out / "report", result.get());
  lfpb_diagnostics diag{};
  check(lfpb_result_diagnostics(result.get(), &diag), "diagnostics");

  lfpb_compaction_stats st{};
  check(lfpb_compaction(truth.get(), real(cfg, "max-disparity"),
                        (out / "compaction").string().c_str(), &st),
        "decompose");

  // Refocus sweep over the restored light field.
  std::string sweep = "slope,sharpness\n";
  double best_slope = 0.0;
  double best_sharp = -1.0;
  for (int k = 0; k <= 80; ++k) {
    const double slope = 0.05 * k;
    lfpb_image* img = nullptr;
    check(lfpb_refocus(restored, slope, &img), "refocus");
    ImagePtr im(img);
    double sharp = 0.0;
    check(lfpb_image_sharpness(im.get(), &sharp), "refocus");
    char line[64];
    std::snprintf(line, sizeof line, "%.2f,%.17g\n", slope, sharp);
    sweep += line;
    if (sharp > best_sharp) {
      best_sharp = sharp;
      best_slope = slope;
    }
  }
  make_dir(out / "refocus");
  write_text(out / "refocus" / "sweep.csv", sweep);
  {
    lfpb_image* img = nullptr;
    check(lfpb_refocus(restored, best_slope, &img), "refocus");
    ImagePtr im(img);
    check(lfpb_image_save_png(im.get(), (out / "refocus" / "best.png").string().c_str(), 8),
          "save");
  }

  const bool near_layer =
      std::abs(best_slope - sp.background_disparity) <= 0.1 + 1e-9 ||
      std::abs(best_slope - sp.foreground_disparity) <= 0.1 + 1e-9;
  json props = json::array();
  bool all_ok = true;
  auto prop = [&](const char* name, bool ok, json detail) {
    all_ok = all_ok && ok;
    props.push_back({{"name", name}, {"pass", ok}, {"detail", std::move(detail)}});
  };
  prop("pb_beats_bicubic", psnr_pb > psnr_bicubic,
       {{"pb_mean_psnr", number(psnr_pb)}, {"bicubic_mean_psnr", number(psnr_bicubic)}});
  prop("single_backend_call", diag.backend_calls == 1, {{"backend_calls", diag.backend_calls}});
  prop("alignment_reduces_variance", diag.variance_after < diag.variance_before,
       {{"before", number(diag.variance_before)}, {"after", number(diag.variance_after)}});
  prop("alignment_compacts_energy", st.residual_aligned < st.residual_unaligned,
       {{"unaligned", st.residual_unaligned}, {"aligned", st.residual_aligned}});
  prop("alignment_lowers_b1_entropy", st.entropy_b1_aligned < st.entropy_b1_unaligned,
       {{"unaligned", number(st.entropy_b1_unaligned)},
        {"aligned", number(st.entropy_b1_aligned)}});
  prop("refocus_peak_at_layer_depth", near_layer,
       {{"best_slope", best_slope},
        {"layer_disparities", {sp.background_disparity, sp.foreground_disparity}}});

  json summary{{"seed", seed}, {"alpha", alpha}, {"properties", props}, {"pass", all_ok}};
  write_json(out / "summary.json", summary);
  write_run_config(out, "demo", cfg);
  for (const auto& p : props) {
    std::cout << (p["pass"].get<bool>() ? "PASS " : "FAIL ") << p["name"].get<std::string>()
              << "\n";
  }
  std::cout << "PB " << psnr_pb << " dB vs bicubic " << psnr_bicubic << " dB\n";
  return all_ok ? kOk : kProperty;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Principal-basis light field super-resolution"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);

  const OptionSpec input{"input", "", "input light field directory"};
  const OptionSpec output{"output", "", "output directory"};
  const OptionSpec alpha{"alpha", 2, "magnification factor {2,3,4}"};
  const OptionSpec backend{"backend", "sharpen", "identity | sharpen | external:<cmd>"};
  const OptionSpec maxd{"max-disparity", 16.0, "flow search range in pixels"};
  const OptionSpec timings{"timings", false, "record per-stage wall-clock times"};
  const OptionSpec bit_depth{"bit-depth", 16, "PNG bit depth (8 or 16)"};

  Command degrade(app, "degrade", "blur, decimate and add noise to a light field",
                  {input, output, alpha,
                   {"blur", "none", "none | box | gaussian"},
                   {"blur-sigma", 1.0, "gaussian blur sigma"},
                   {"decimation", "bicubic", "bicubic | point"},
                   {"noise", 0.0, "additive Gaussian noise sigma"},
                   {"seed", std::uint64_t{0}, "noise seed"},
                   bit_depth});
  Command superres(app, "superres", "principal-basis super-resolution",
                   {input, output, alpha, backend, maxd,
                    {"flow-cache", "", "directory for cached flows"},
                    {"crack-fill", "collocated_lr", "collocated_lr | inverse_warp | none"},
                    {"consistency-tolerance", 0.02, "round-trip tolerance for trusted pixels"},
                    {"fallback", false, "fall back to identity if the backend fails"},
                    {"backend-timeout", 120.0, "external backend timeout in seconds"},
                    {"pipeline-order", "upsample-first", "only upsample-first is supported"},
                    timings, bit_depth});
  Command evaluate(app, "evaluate", "per-view PSNR / SSIM against ground truth",
                   {input, {"truth", "", "ground truth container or degrade output"}, output,
                    {"border-crop", -1, "pixels removed per side (-1 = ceil(max-disparity)+alpha)"},
                    maxd, alpha, timings});
  Command decompose(app, "decompose", "basis images and entropy before/after alignment",
                    {input, output, maxd});
  Command refocus(app, "refocus", "shift-and-add refocus at a slope",
                  {input, output, {"slope", 0.0, "pixels of shift per view step"},
                   {"bit-depth", 8, "PNG bit depth (8 or 16)"}});
  Command demo(app, "demo", "synthetic end-to-end run with property checks",
               {output, alpha, backend, maxd, {"seed", std::uint64_t{7}, "texture and noise seed"},
                {"views", 5, "angular views per side"},
                {"size", 120, "high-resolution view size in pixels"},
                timings});

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }
  lfpb_set_threads(threads);

  const std::vector<std::pair<Command*, int (*)(const json&)>> table = {
      {&degrade, run_degrade},   {&superres, run_superres}, {&evaluate, run_evaluate},
      {&decompose, run_decompose}, {&refocus, run_refocus}, {&demo, run_demo}};
  try {
    for (const auto& [cmd, fn] : table) {
      if (cmd->app()->parsed()) return fn(cmd->resolve());
    }
  } catch (const Failure& f) {
    std::cerr << "lfpb: " << f.message << "\n";
    return f.code;
  } catch (const std::exception& e) {
    std::cerr << "lfpb: " << e.what() << "\n";
    return kData;
  }
  return kUsage;
}
