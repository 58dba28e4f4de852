#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "terraseg/date.hpp"
#include "terraseg/geobox.hpp"

namespace terraseg {

enum class Satellite {
  Sentinel1,
  Sentinel2,
  Landsat5,
  Landsat8,
  VNP09H1,
  VNP13A1,
  MCD15A2H,
  FIRMS,
  DeforestationMask,
  FireCCI,
  Synthetic,
};

constexpr int kSatelliteCount = 11;

const char* satellite_name(Satellite s);
std::optional<Satellite> satellite_from_name(const std::string& name);

// Band catalog per sensor, in canonical order. Synthetic is unconstrained.
const std::vector<std::string>& satellite_bands(Satellite s);

// Grid spacing relative to the finest (Sentinel) grid: 1 / 3 / 25 / 50.
int resolution_factor(Satellite s);

bool is_mask_satellite(Satellite s);

// Per-sensor QA screening: which band carries the bitmask and which bits mark
// a pixel unusable. Sensors without QA have an empty band name.
struct QaSpec {
  std::string band;
  uint32_t unusable_bits = 0;
};

QaSpec default_qa_spec(Satellite s);

enum class ResampleMethod { Nearest, Bilinear };

// Geo-referenced multi-band float grid. Nodata is NaN in memory; all
// operations below are pure, so shared rasters are safe across threads.
struct Raster {
  GeoBox geobox;
  std::vector<std::string> bands;
  std::vector<float> data;  // band-major, row-major within a band
  Satellite satellite = Satellite::Synthetic;
  Date timestamp;

  int64_t band_count() const { return static_cast<int64_t>(bands.size()); }
  int64_t plane_size() const { return geobox.pixels(); }

  float& at(int64_t band, int64_t row, int64_t col) {
    return data[static_cast<size_t>((band * geobox.height + row) * geobox.width + col)];
  }
  float at(int64_t band, int64_t row, int64_t col) const {
    return data[static_cast<size_t>((band * geobox.height + row) * geobox.width + col)];
  }

  const float* plane(int64_t band) const { return data.data() + band * plane_size(); }
  float* plane(int64_t band) { return data.data() + band * plane_size(); }

  int64_t band_index(const std::string& name) const;  // -1 if absent

  static Raster make(const GeoBox& g, std::vector<std::string> bands, Satellite sat, Date ts,
                     float fill = std::nanf(""));
};

// Enforces the container invariants (sizes, unique band names, mask rasters
// restricted to {0, 1, nodata}). Throws Error on violation.
void validate_raster(const Raster& r, const std::string& context);

inline bool is_nodata(float v) { return std::isnan(v); }

// Same-grid window copy: target pixels covered by `r` take the source pixel
// whose cell contains the target center, everything else nodata.
Raster crop_window(const Raster& r, const GeoBox& g);

// Regrid onto `target`. Nearest picks the closest source center; Bilinear
// blends the four surrounding centers (clamped at the source border) and is
// nodata wherever any contributor is nodata. Targets outside the source
// footprint are nodata.
Raster resample(const Raster& r, const GeoBox& target, ResampleMethod method);

// Single-band usable/cloudy flag (1 = usable) from the sensor's QA bitmask.
// Sensors without a QA definition yield all-usable.
Raster cloud_mask(const Raster& r);
Raster cloud_mask(const Raster& r, const QaSpec& qa);

}  // namespace terraseg
