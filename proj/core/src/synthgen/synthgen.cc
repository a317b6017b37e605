/*
 * Copyright 2026 The CasNN Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "casnn/synthgen/synthgen.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <vector>

#include "casnn/common/error.h"
#include "casnn/common/parallel.h"
#include "casnn/common/rng.h"

namespace casnn::synthgen {
namespace {

constexpr std::uint8_t kBackground = 0;
constexpr std::uint8_t kBenign = 1;
constexpr std::uint8_t kDcis = 2;
constexpr std::uint8_t kIdc = 3;

// Bilinear value noise in [0, 1) on a `cell`-pixel lattice.
class ValueNoise {
 public:
  ValueNoise(Rng& rng, std::size_t width, std::size_t height, std::size_t cell)
      : cell_(static_cast<double>(cell)), gw_(width / cell + 2), gh_(height / cell + 2),
        grid_(gw_ * gh_) {
    for (double& v : grid_) v = uniform01(rng);
  }

  double at(std::size_t x, std::size_t y) const {
    const double fx = static_cast<double>(x) / cell_;
    const double fy = static_cast<double>(y) / cell_;
    const auto ix = static_cast<std::size_t>(fx);
    const auto iy = static_cast<std::size_t>(fy);
    const double tx = smooth(fx - static_cast<double>(ix));
    const double ty = smooth(fy - static_cast<double>(iy));
    const double a = grid_[iy * gw_ + ix], b = grid_[iy * gw_ + ix + 1];
    const double c = grid_[(iy + 1) * gw_ + ix], d = grid_[(iy + 1) * gw_ + ix + 1];
    return (a + (b - a) * tx) * (1 - ty) + (c + (d - c) * tx) * ty;
  }

 private:
  static double smooth(double t) { return t * t * (3 - 2 * t); }
  double cell_;
  std::size_t gw_, gh_;
  std::vector<double> grid_;
};

struct Disc {
  double x, y, r;
};

std::uint8_t clamp_channel(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0l, 255l));
}

// Calls fn(x, y, d2) for every pixel centre inside the disc.
template <typename Fn>
void for_disc(const Disc& d, std::size_t size, Fn&& fn) {
  const long n = static_cast<long>(size);
  const long y0 = std::max(0l, static_cast<long>(std::floor(d.y - d.r)));
  const long y1 = std::min(n - 1, static_cast<long>(std::ceil(d.y + d.r)));
  const long x0 = std::max(0l, static_cast<long>(std::floor(d.x - d.r)));
  const long x1 = std::min(n - 1, static_cast<long>(std::ceil(d.x + d.r)));
  for (long y = y0; y <= y1; ++y) {
    for (long x = x0; x <= x1; ++x) {
      const double dx = static_cast<double>(x) - d.x, dy = static_cast<double>(y) - d.y;
      const double d2 = dx * dx + dy * dy;
      if (d2 <= d.r * d.r) fn(static_cast<std::size_t>(x), static_cast<std::size_t>(y), d2);
    }
  }
}

class SlidePainter {
 public:
  SlidePainter(const SynthConfig& config, Rng& rng)
      : cfg_(config), rng_(rng), size_(config.image_size), mask_(size_, size_, 1, kBackground) {}

  SyntheticSlide paint(int label) {
    draw_tissue();
    if (label == 2) place_ducts(cfg_.dcis_fraction);
    if (label == 3) {
      grow_mass(cfg_.idc_fraction);
      if (uniform01(rng_) < cfg_.idc_with_dcis) place_ducts(cfg_.dcis_fraction / 2);
    }
    SyntheticSlide slide;
    slide.label = label;
    slide.image = render();
    slide.mask = std::move(mask_);
    return slide;
  }

 private:
  void draw_tissue() {
    const double s = static_cast<double>(size_);
    cx_ = s / 2 + uniform(rng_, -0.05, 0.05) * s;
    cy_ = s / 2 + uniform(rng_, -0.05, 0.05) * s;
    radius_ = s * uniform(rng_, 0.36, 0.44);
    std::array<double, 4> amp{}, phase{};
    for (std::size_t k = 0; k < amp.size(); ++k) {
      amp[k] = uniform(rng_, 0.0, 0.12 / static_cast<double>(k + 2));
      phase[k] = uniform(rng_, 0.0, 2 * std::numbers::pi);
    }
    for (std::size_t y = 0; y < size_; ++y) {
      for (std::size_t x = 0; x < size_; ++x) {
        const double dx = static_cast<double>(x) - cx_, dy = static_cast<double>(y) - cy_;
        const double theta = std::atan2(dy, dx);
        double r = 1.0;
        for (std::size_t k = 0; k < amp.size(); ++k) {
          r += amp[k] * std::cos(static_cast<double>(k + 2) * theta + phase[k]);
        }
        if (dx * dx + dy * dy < radius_ * radius_ * r * r) {
          mask_.at(x, y) = kBenign;
          ++tissue_;
        }
      }
    }
  }

  std::size_t count(std::uint8_t value) const {
    return static_cast<std::size_t>(std::count(mask_.pixels.begin(), mask_.pixels.end(), value));
  }

  // Random tissue point within `spread` * radius of the tissue centre.
  std::pair<double, double> tissue_point(double spread) {
    for (int attempt = 0; attempt < 10000; ++attempt) {
      const double a = uniform(rng_, 0.0, 2 * std::numbers::pi);
      const double d = radius_ * spread * std::sqrt(uniform01(rng_));
      const double x = cx_ + d * std::cos(a), y = cy_ + d * std::sin(a);
      if (x < 0 || y < 0 || x >= static_cast<double>(size_) || y >= static_cast<double>(size_)) {
        continue;
      }
      if (mask_.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) == kBenign) {
        return {x, y};
      }
    }
    return {cx_, cy_};
  }

  // Union of overlapping discs, each centred inside an earlier one, clipped
  // to tissue. The last disc is shrunk so the total lands near the target.
  void grow_mass(double fraction) {
    const auto target = static_cast<std::size_t>(fraction * static_cast<double>(tissue_));
    std::vector<Disc> discs;
    const auto [x0, y0] = tissue_point(0.4);
    std::size_t area = 0;
    for (int iter = 0; iter < 4000 && area < target; ++iter) {
      Disc d{x0, y0, 0};
      if (!discs.empty()) {
        const Disc& parent = discs[uniform_index(rng_, discs.size())];
        const double a = uniform(rng_, 0.0, 2 * std::numbers::pi);
        const double off = parent.r * uniform(rng_, 0.3, 0.9);
        d.x = parent.x + off * std::cos(a);
        d.y = parent.y + off * std::sin(a);
      }
      const double remaining = static_cast<double>(target - area);
      d.r = std::min(uniform(rng_, cfg_.mass_disc_radius_min, cfg_.mass_disc_radius_max),
                     std::max(8.0, std::sqrt(remaining / std::numbers::pi)));
      std::size_t added = 0;
      for_disc(d, size_, [&](std::size_t x, std::size_t y, double) {
        if (mask_.at(x, y) == kBenign) {
          mask_.at(x, y) = kIdc;
          ++added;
        }
      });
      area += added;
      discs.push_back(d);
    }
  }

  // Separate ducts around a few cluster centres, each wholly inside benign
  // tissue and clear of other lesions.
  void place_ducts(double fraction) {
    const auto target = static_cast<std::size_t>(fraction * static_cast<double>(tissue_));
    const double min_r = 20.0;
    const double min_area = std::numbers::pi * min_r * min_r / 2;
    std::vector<std::pair<double, double>> clusters;
    const std::size_t n_clusters = 2 + uniform_index(rng_, 3);
    for (std::size_t c = 0; c < n_clusters; ++c) clusters.push_back(tissue_point(0.75));
    std::size_t area = 0;
    bool placed_any = false;
    for (int attempt = 0; attempt < 20000; ++attempt) {
      const double remaining = static_cast<double>(target) - static_cast<double>(area);
      if (placed_any && remaining < min_area) break;
      const auto [ccx, ccy] = clusters[uniform_index(rng_, clusters.size())];
      const double spread = 40.0 + 8.0 * static_cast<double>(attempt / 200);
      Disc d{ccx + spread * standard_normal(rng_), ccy + spread * standard_normal(rng_), 0};
      d.r = std::min(uniform(rng_, cfg_.duct_radius_min, cfg_.duct_radius_max),
                     std::max(min_r, std::sqrt(std::max(remaining, 0.0) / std::numbers::pi)));
      if (!fits(d)) continue;
      for_disc(d, size_, [&](std::size_t x, std::size_t y, double) {
        mask_.at(x, y) = kDcis;
        ++area;
      });
      ducts_.push_back(d);
      placed_any = true;
    }
  }

  bool fits(const Disc& d) const {
    const double s = static_cast<double>(size_);
    if (d.x - d.r < 0 || d.y - d.r < 0 || d.x + d.r >= s || d.y + d.r >= s) return false;
    for (const Disc& o : ducts_) {
      const double gap = d.r + o.r + 8.0;
      if ((d.x - o.x) * (d.x - o.x) + (d.y - o.y) * (d.y - o.y) < gap * gap) return false;
    }
    bool ok = true;
    // Benign margin of 6 px around the duct.
    for_disc({d.x, d.y, d.r + 6.0}, size_, [&](std::size_t x, std::size_t y, double) {
      if (mask_.at(x, y) != kBenign) ok = false;
    });
    return ok;
  }

  const ClassTexture& texture(std::uint8_t cls) const {
    return cls == kDcis ? cfg_.dcis : cls == kIdc ? cfg_.idc : cfg_.benign;
  }

  Image8 render() {
    Image8 img(size_, size_, 3);
    const ValueNoise coarse(rng_, size_, size_, 48);
    const ValueNoise fine(rng_, size_, size_, 6);
    for (std::size_t y = 0; y < size_; ++y) {
      for (std::size_t x = 0; x < size_; ++x) {
        const std::uint8_t cls = mask_.at(x, y);
        const double grain = fine.at(x, y) - 0.5;
        if (cls == kBackground) {
          const std::uint8_t v = clamp_channel(247 + 12 * grain);
          for (std::size_t c = 0; c < 3; ++c) img.at(x, y, c) = v;
          continue;
        }
        const double tone = 24 * (coarse.at(x, y) - 0.5) + 14 * grain;
        const Rgb& g = texture(cls).ground;
        for (std::size_t c = 0; c < 3; ++c) img.at(x, y, c) = clamp_channel(g[c] + tone);
      }
    }
    // Sparse benign glands: pale lumen ringed by nuclei.
    const std::size_t benign_px = count(kBenign);
    const std::size_t n_glands = benign_px / 40000;
    for (std::size_t i = 0; i < n_glands; ++i) {
      const Disc g = random_disc_in(kBenign, 10.0, 20.0);
      if (g.r == 0) continue;
      for_disc(g, size_, [&](std::size_t x, std::size_t y, double d2) {
        if (mask_.at(x, y) != kBenign) return;
        const bool rim = d2 > (g.r - 3) * (g.r - 3);
        const Rgb c = rim ? Rgb{120, 60, 145} : Rgb{232, 205, 222};
        for (std::size_t k = 0; k < 3; ++k) img.at(x, y, k) = c[k];
      });
    }
    for (std::uint8_t cls : {kBenign, kDcis, kIdc}) stamp_nuclei(img, cls);
    // Duct rims: a dark myoepithelial-like border confining each duct.
    for (const Disc& d : ducts_) {
      const double inner = d.r - cfg_.duct_rim_width;
      for_disc(d, size_, [&](std::size_t x, std::size_t y, double d2) {
        if (d2 < inner * inner) return;
        const double grain = 10 * (uniform01(rng_) - 0.5);
        img.at(x, y, 0) = clamp_channel(110 + grain);
        img.at(x, y, 1) = clamp_channel(55 + grain);
        img.at(x, y, 2) = clamp_channel(140 + grain);
      });
    }
    return img;
  }

  Disc random_disc_in(std::uint8_t cls, double rmin, double rmax) {
    for (int attempt = 0; attempt < 200; ++attempt) {
      const auto x = static_cast<std::size_t>(uniform_index(rng_, size_));
      const auto y = static_cast<std::size_t>(uniform_index(rng_, size_));
      if (mask_.at(x, y) == cls) {
        return {static_cast<double>(x), static_cast<double>(y), uniform(rng_, rmin, rmax)};
      }
    }
    return {0, 0, 0};
  }

  void stamp_nuclei(Image8& img, std::uint8_t cls) {
    const ClassTexture& t = texture(cls);
    const double px = static_cast<double>(count(cls));
    const auto n = static_cast<std::size_t>(px * t.nuclei_per_kpx / 1000.0);
    std::size_t placed = 0;
    for (std::size_t attempt = 0; placed < n && attempt < 50 * n + 100; ++attempt) {
      const auto x = static_cast<std::size_t>(uniform_index(rng_, size_));
      const auto y = static_cast<std::size_t>(uniform_index(rng_, size_));
      if (mask_.at(x, y) != cls) continue;
      ++placed;
      const Disc d{static_cast<double>(x), static_cast<double>(y),
                   uniform(rng_, t.nucleus_radius_min, t.nucleus_radius_max)};
      const double shade = 20 * (uniform01(rng_) - 0.5);
      for_disc(d, size_, [&](std::size_t u, std::size_t v, double) {
        if (mask_.at(u, v) != cls) return;
        for (std::size_t c = 0; c < 3; ++c) img.at(u, v, c) = clamp_channel(t.nucleus[c] + shade);
      });
    }
  }

  const SynthConfig& cfg_;
  Rng& rng_;
  std::size_t size_;
  Image8 mask_;
  double cx_ = 0, cy_ = 0, radius_ = 0;
  std::size_t tissue_ = 0;
  std::vector<Disc> ducts_;
};

nlohmann::json texture_json(const ClassTexture& t) {
  return {{"nucleus_radius_min", t.nucleus_radius_min},
          {"nucleus_radius_max", t.nucleus_radius_max},
          {"nuclei_per_kpx", t.nuclei_per_kpx},
          {"ground", t.ground},
          {"nucleus", t.nucleus}};
}

ClassTexture texture_from_json(const nlohmann::json& j, ClassTexture t) {
  t.nucleus_radius_min = j.value("nucleus_radius_min", t.nucleus_radius_min);
  t.nucleus_radius_max = j.value("nucleus_radius_max", t.nucleus_radius_max);
  t.nuclei_per_kpx = j.value("nuclei_per_kpx", t.nuclei_per_kpx);
  t.ground = j.value("ground", t.ground);
  t.nucleus = j.value("nucleus", t.nucleus);
  return t;
}

}  // namespace

nlohmann::json to_json(const SynthConfig& c) {
  return {{"image_size", c.image_size},
          {"slides_per_class", c.slides_per_class},
          {"test_fraction", c.test_fraction},
          {"val_fraction", c.val_fraction},
          {"seed", c.seed},
          {"pixel_spacing_um", c.pixel_spacing_um},
          {"dcis_fraction", c.dcis_fraction},
          {"idc_fraction", c.idc_fraction},
          {"idc_with_dcis", c.idc_with_dcis},
          {"duct_radius_min", c.duct_radius_min},
          {"duct_radius_max", c.duct_radius_max},
          {"duct_rim_width", c.duct_rim_width},
          {"mass_disc_radius_min", c.mass_disc_radius_min},
          {"mass_disc_radius_max", c.mass_disc_radius_max},
          {"textures",
           {{"benign", texture_json(c.benign)},
            {"dcis", texture_json(c.dcis)},
            {"idc", texture_json(c.idc)}}}};
}

SynthConfig synth_config_from_json(const nlohmann::json& j, SynthConfig c) {
  try {
    c.image_size = j.value("image_size", c.image_size);
    c.slides_per_class = j.value("slides_per_class", c.slides_per_class);
    c.test_fraction = j.value("test_fraction", c.test_fraction);
    c.val_fraction = j.value("val_fraction", c.val_fraction);
    c.seed = j.value("seed", c.seed);
    c.pixel_spacing_um = j.value("pixel_spacing_um", c.pixel_spacing_um);
    c.dcis_fraction = j.value("dcis_fraction", c.dcis_fraction);
    c.idc_fraction = j.value("idc_fraction", c.idc_fraction);
    c.idc_with_dcis = j.value("idc_with_dcis", c.idc_with_dcis);
    c.duct_radius_min = j.value("duct_radius_min", c.duct_radius_min);
    c.duct_radius_max = j.value("duct_radius_max", c.duct_radius_max);
    c.duct_rim_width = j.value("duct_rim_width", c.duct_rim_width);
    c.mass_disc_radius_min = j.value("mass_disc_radius_min", c.mass_disc_radius_min);
    c.mass_disc_radius_max = j.value("mass_disc_radius_max", c.mass_disc_radius_max);
    if (j.contains("textures")) {
      const auto& t = j.at("textures");
      if (t.contains("benign")) c.benign = texture_from_json(t.at("benign"), c.benign);
      if (t.contains("dcis")) c.dcis = texture_from_json(t.at("dcis"), c.dcis);
      if (t.contains("idc")) c.idc = texture_from_json(t.at("idc"), c.idc);
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad synth config: ") + e.what());
  }
  if (c.slides_per_class == 0) throw DataError("synth config needs slides_per_class >= 1");
  if (c.image_size < 64) throw DataError("synth image_size must be at least 64");
  if (c.test_fraction < 0 || c.val_fraction < 0 || c.test_fraction + c.val_fraction > 1) {
    throw DataError("synth split fractions must be non-negative and sum to at most 1");
  }
  const auto unit = [](double v) { return v > 0 && v < 1; };
  if (!unit(c.dcis_fraction) || !unit(c.idc_fraction) || c.idc_with_dcis < 0 ||
      c.idc_with_dcis > 1) {
    throw DataError("synth lesion fractions must lie in (0, 1)");
  }
  if (c.duct_radius_min <= 0 || c.duct_radius_min > c.duct_radius_max ||
      c.mass_disc_radius_min <= 0 || c.mass_disc_radius_min > c.mass_disc_radius_max) {
    throw DataError("synth radius ranges must be positive and ordered");
  }
  return c;
}

SyntheticSlide generate_slide(const SynthConfig& config, int label, std::uint64_t seed) {
  if (label < 0 || label > 2) throw ContractError("slide label must be 0, 1 or 2");
  Rng rng(seed);
  SlidePainter painter(config, rng);
  SyntheticSlide slide = painter.paint(label + 1);
  slide.label = label;
  return slide;
}

trainproto::DatasetIndex generate(const SynthConfig& config, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(out_dir) / "images");
  fs::create_directories(fs::path(out_dir) / "masks");

  const std::size_t per_class = config.slides_per_class;
  const auto n_test = static_cast<std::size_t>(std::lround(config.test_fraction * static_cast<double>(per_class)));
  const auto n_val = static_cast<std::size_t>(std::lround(config.val_fraction * static_cast<double>(per_class)));
  Rng split_rng(derive_seed(config.seed, "split"));

  trainproto::DatasetIndex index;
  index.root = out_dir;
  index.pixel_spacing_um = config.pixel_spacing_um;
  for (int label = 0; label < 3; ++label) {
    std::vector<trainproto::Split> splits(per_class, trainproto::Split::kTrain);
    for (std::size_t i = 0; i < std::min(per_class, n_test); ++i) splits[i] = trainproto::Split::kTest;
    for (std::size_t i = n_test; i < std::min(per_class, n_test + n_val); ++i) {
      splits[i] = trainproto::Split::kVal;
    }
    for (std::size_t i = 0; i + 1 < splits.size(); ++i) {
      std::swap(splits[i], splits[i + uniform_index(split_rng, splits.size() - i)]);
    }
    for (std::size_t i = 0; i < per_class; ++i) {
      char id[32];
      std::snprintf(id, sizeof id, "slide_%03zu", index.slides.size());
      trainproto::SlideRecord r;
      r.id = id;
      r.image = std::string("images/") + id + ".png";
      r.mask = std::string("masks/") + id + ".png";
      r.split = splits[i];
      r.label = label;
      index.slides.push_back(std::move(r));
    }
  }
  parallel_for(index.slides.size(), config.threads, [&](std::size_t i) {
    const trainproto::SlideRecord& r = index.slides[i];
    const SyntheticSlide slide = generate_slide(config, r.label, derive_seed(config.seed, i));
    write_png(index.path(r.image), slide.image);
    write_png(index.path(r.mask), slide.mask);
  });
  trainproto::save_dataset_index(out_dir, index);
  return index;
}

}  // namespace casnn::synthgen
