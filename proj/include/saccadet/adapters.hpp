#pragma once

// Detector adapters: ground-truth oracle, seeded noisy oracle, a cost-metering
// wrapper, and the file-exchange bridge to external detectors.

#include <algorithm>
#include <atomic>
#include <bit>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "saccadet/core.hpp"
#include "saccadet/error.hpp"
#include "saccadet/gaze.hpp"
#include "saccadet/io.hpp"
#include "saccadet/random.hpp"

namespace saccadet {

// Answers from ground truth: every annotation whose center lies in the patch
// region, mapped into the patch frame and clipped to it. The score is the
// fraction of the box that stays visible, so full views score 1.0.
class OracleDetector final : public DetectorAdapter {
 public:
  explicit OracleDetector(std::vector<Annotation> ground_truth) : truth_(std::move(ground_truth)) {}

  std::vector<PatchDetection> detect(const NormalizedPatch& np) const override {
    std::vector<PatchDetection> out;
    for (const Annotation& a : truth_) {
      if (!contains_point(np.patch.region, a.bbox.center_x(), a.bbox.center_y())) continue;
      const BoundingBox local = np.to_normalized(a.bbox);
      const auto clipped = clip_to(local, np.frame_width(), np.frame_height());
      if (!clipped) continue;
      const double visible = std::clamp(clipped->area() / local.area(), 0.0, 1.0);
      out.push_back({*clipped, visible, a.category});
    }
    return out;
  }

 private:
  std::vector<Annotation> truth_;
};

inline std::shared_ptr<const DetectorAdapter> oracle_detector(std::vector<Annotation> ground_truth) {
  return std::make_shared<OracleDetector>(std::move(ground_truth));
}

struct NoiseModel {
  double jitter = 0.0;     // std-dev in original-image pixels
  double miss_rate = 0.0;  // probability of dropping a true object
  double fp_rate = 0.0;    // probability of one spurious box per patch
  std::uint64_t seed = 0;
};

inline void validate(const NoiseModel& noise) {
  if (!(noise.jitter >= 0.0) || !std::isfinite(noise.jitter)) throw ConfigError("jitter must be >= 0");
  if (!(noise.miss_rate >= 0.0 && noise.miss_rate <= 1.0)) throw ConfigError("miss rate must be in [0, 1]");
  if (!(noise.fp_rate >= 0.0 && noise.fp_rate <= 1.0)) throw ConfigError("false-positive rate must be in [0, 1]");
}

// Identifies a patch independently of list position or worker.
inline std::uint64_t patch_key(const Patch& p) noexcept {
  std::uint64_t h = mix64(index_of(p.scale));
  for (std::uint64_t v : {static_cast<std::uint64_t>(p.cell_i), static_cast<std::uint64_t>(p.cell_j),
                          std::bit_cast<std::uint64_t>(p.region.x), std::bit_cast<std::uint64_t>(p.region.y),
                          std::bit_cast<std::uint64_t>(p.region.width), std::bit_cast<std::uint64_t>(p.region.height)}) {
    h = combine_seed(h, v);
  }
  return h;
}

// Oracle output perturbed by a per-patch RNG, so results are reproducible
// under any scheduling.
class NoisyDetector final : public DetectorAdapter {
 public:
  NoisyDetector(std::vector<Annotation> ground_truth, NoiseModel noise)
      : oracle_(std::move(ground_truth)), noise_(noise) {
    validate(noise_);
  }

  std::vector<PatchDetection> detect(const NormalizedPatch& np) const override {
    auto truth = oracle_.detect(np);
    if (noise_.jitter == 0.0 && noise_.miss_rate == 0.0 && noise_.fp_rate == 0.0) return truth;

    std::mt19937_64 rng(combine_seed(noise_.seed, patch_key(np.patch)));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    std::vector<PatchDetection> out;
    for (PatchDetection d : truth) {
      if (unit(rng) < noise_.miss_rate) continue;
      if (noise_.jitter > 0.0) {
        const double s = noise_.jitter * np.zoom;
        d.bbox.x += s * gauss(rng);
        d.bbox.y += s * gauss(rng);
        d.bbox.width = std::max(1.0, d.bbox.width + s * gauss(rng));
        d.bbox.height = std::max(1.0, d.bbox.height + s * gauss(rng));
        d.score *= 0.7 + 0.3 * unit(rng);
      }
      out.push_back(d);
    }
    if (unit(rng) < noise_.fp_rate) {
      const double fw = np.frame_width();
      const double fh = np.frame_height();
      const double w = fw * (0.02 + 0.08 * unit(rng));
      const double h = fh * (0.02 + 0.08 * unit(rng));
      out.push_back({{unit(rng) * (fw - w), unit(rng) * (fh - h), w, h}, 0.05 + 0.55 * unit(rng), 0});
    }
    return out;
  }

 private:
  OracleDetector oracle_;
  NoiseModel noise_;
};

inline std::shared_ptr<const DetectorAdapter> noisy_detector(std::vector<Annotation> ground_truth, NoiseModel noise) {
  return std::make_shared<NoisyDetector>(std::move(ground_truth), noise);
}

// Atomic tally of detector work, readable after a run.
class PixelLedger {
 public:
  void add(std::uint64_t pixels) noexcept {
    pixels_.fetch_add(pixels, std::memory_order_relaxed);
    calls_.fetch_add(1, std::memory_order_relaxed);
  }
  std::uint64_t pixels() const noexcept { return pixels_.load(); }
  std::uint64_t calls() const noexcept { return calls_.load(); }
  void reset() noexcept {
    pixels_ = 0;
    calls_ = 0;
  }

 private:
  std::atomic<std::uint64_t> pixels_{0};
  std::atomic<std::uint64_t> calls_{0};
};

// Forwards to an inner adapter and records the standard-frame pixels each call
// costs. With cost_per_pixel > 0 it also burns that many work units per pixel
// so wall-clock comparisons track the pixel budget.
class CostedDetector final : public DetectorAdapter {
 public:
  CostedDetector(std::shared_ptr<const DetectorAdapter> inner, double cost_per_pixel)
      : inner_(std::move(inner)), cost_per_pixel_(cost_per_pixel), ledger_(std::make_shared<PixelLedger>()) {
    if (!inner_) throw ConfigError("costed detector needs an inner adapter");
    if (!(cost_per_pixel >= 0.0) || !std::isfinite(cost_per_pixel)) throw ConfigError("cost per pixel must be >= 0");
  }

  std::vector<PatchDetection> detect(const NormalizedPatch& np) const override {
    const auto pixels = static_cast<std::uint64_t>(np.standard_size.area());
    ledger_->add(pixels);
    if (cost_per_pixel_ > 0.0) burn(static_cast<std::uint64_t>(cost_per_pixel_ * static_cast<double>(pixels)));
    return inner_->detect(np);
  }

  const PixelLedger& ledger() const noexcept { return *ledger_; }
  PixelLedger& ledger() noexcept { return *ledger_; }

 private:
  static void burn(std::uint64_t units) noexcept {
    volatile std::uint64_t sink = 0;
    std::uint64_t x = 0x2545f4914f6cdd1dULL;
    for (std::uint64_t i = 0; i < units; ++i) {
      x ^= x << 13;
      x ^= x >> 7;
      x ^= x << 17;
    }
    sink = x;
    (void)sink;
  }

  std::shared_ptr<const DetectorAdapter> inner_;
  double cost_per_pixel_;
  std::shared_ptr<PixelLedger> ledger_;
};

// Bridges to an external detector process. For each batch it writes a request
// JSON, runs `<command> <request.json> <response.json>`, and reads the
// response. A non-zero exit status fails the batch.
class ExecDetector final : public BatchDetectorAdapter {
 public:
  explicit ExecDetector(std::string command, std::size_t batch_size = 0)
      : command_(std::move(command)), batch_size_(batch_size) {
    if (command_.empty()) throw ConfigError("external detector command is empty");
  }

  std::vector<std::vector<PatchDetection>> detect_batch(std::span<const NormalizedPatch> patches) const override {
    std::vector<std::vector<PatchDetection>> out;
    out.reserve(patches.size());
    const std::size_t step = batch_size_ == 0 ? std::max<std::size_t>(patches.size(), 1) : batch_size_;
    for (std::size_t start = 0; start < patches.size(); start += step) {
      const auto batch = patches.subspan(start, std::min(step, patches.size() - start));
      try {
        auto part = run_batch(batch);
        for (auto& dets : part) out.push_back(std::move(dets));
      } catch (const std::exception& e) {
        throw AdapterError(start, e.what());
      }
    }
    return out;
  }

 private:
  static std::string quote(const std::string& s) {
    std::string q = "'";
    for (char c : s) {
      if (c == '\'') q += "'\\''";
      else q += c;
    }
    return q + "'";
  }

  std::vector<std::vector<PatchDetection>> run_batch(std::span<const NormalizedPatch> batch) const {
    static std::atomic<std::uint64_t> counter{0};
    const auto dir = std::filesystem::temp_directory_path() /
                     ("saccadet-" + std::to_string(::getpid()) + "-" + std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(dir);
    struct Cleanup {
      std::filesystem::path path;
      ~Cleanup() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
      }
    } cleanup{dir};

    const auto request = dir / "request.json";
    const auto response = dir / "response.json";
    write_text(request, exchange_request(batch).dump(2) + "\n");
    const std::string cmd = command_ + " " + quote(request.string()) + " " + quote(response.string());
    const int status = std::system(cmd.c_str());
    if (status != 0) {
      const int code = WIFEXITED(status) ? WEXITSTATUS(status) : status;
      throw Error("command '" + command_ + "' exited with status " + std::to_string(code));
    }
    return exchange_response(parse_json(read_text(response), "detector response"), batch.size());
  }

  std::string command_;
  std::size_t batch_size_;
};

}  // namespace saccadet
