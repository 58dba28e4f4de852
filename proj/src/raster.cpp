#include "terraseg/raster.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "terraseg/error.hpp"

namespace terraseg {

namespace {

const char* kSatelliteNames[kSatelliteCount] = {
    "Sentinel1", "Sentinel2", "Landsat5",          "Landsat8", "VNP09H1", "VNP13A1",
    "MCD15A2H",  "FIRMS",     "DeforestationMask", "FireCCI",  "Synthetic"};

std::vector<std::string> make_sentinel2_bands() {
  std::vector<std::string> b;
  for (int i = 1; i <= 9; ++i) b.push_back("B" + std::to_string(i));
  b.push_back("B11");
  b.push_back("B12");
  b.push_back("QA60");
  return b;
}

}  // namespace

const char* satellite_name(Satellite s) { return kSatelliteNames[static_cast<int>(s)]; }

std::optional<Satellite> satellite_from_name(const std::string& name) {
  for (int i = 0; i < kSatelliteCount; ++i)
    if (name == kSatelliteNames[i]) return static_cast<Satellite>(i);
  return std::nullopt;
}

const std::vector<std::string>& satellite_bands(Satellite s) {
  static const std::vector<std::string> sentinel1 = {"VV", "VH"};
  static const std::vector<std::string> sentinel2 = make_sentinel2_bands();
  static const std::vector<std::string> landsat5 = {"SR_B1", "SR_B2", "SR_B3", "SR_B4",
                                                    "SR_B5", "ST_B6", "ST_B7", "QA_PIXEL"};
  static const std::vector<std::string> landsat8 = {"SR_B1", "SR_B2", "SR_B3",  "SR_B4",  "SR_B5",
                                                    "SR_B6", "SR_B7", "ST_B10", "QA_PIXEL"};
  static const std::vector<std::string> vnp09h1 = {"I1", "I2", "I3"};
  static const std::vector<std::string> vnp13a1 = {"EVI", "NDVI", "NIR", "SWIR1", "SWIR2"};
  static const std::vector<std::string> mcd15a2h = {"LAI", "FPAR"};
  static const std::vector<std::string> firms = {"ActiveFire"};
  static const std::vector<std::string> deforestation = {"Deforestation"};
  static const std::vector<std::string> firecci = {"BurnedArea"};
  static const std::vector<std::string> synthetic = {};
  switch (s) {
    case Satellite::Sentinel1: return sentinel1;
    case Satellite::Sentinel2: return sentinel2;
    case Satellite::Landsat5: return landsat5;
    case Satellite::Landsat8: return landsat8;
    case Satellite::VNP09H1: return vnp09h1;
    case Satellite::VNP13A1: return vnp13a1;
    case Satellite::MCD15A2H: return mcd15a2h;
    case Satellite::FIRMS: return firms;
    case Satellite::DeforestationMask: return deforestation;
    case Satellite::FireCCI: return firecci;
    case Satellite::Synthetic: return synthetic;
  }
  return synthetic;
}

int resolution_factor(Satellite s) {
  switch (s) {
    case Satellite::Sentinel1:
    case Satellite::Sentinel2:
    case Satellite::DeforestationMask: return 1;
    case Satellite::Landsat5:
    case Satellite::Landsat8: return 3;
    case Satellite::FireCCI: return 25;
    case Satellite::VNP09H1:
    case Satellite::VNP13A1:
    case Satellite::MCD15A2H:
    case Satellite::FIRMS: return 50;
    case Satellite::Synthetic: return 1;
  }
  return 1;
}

bool is_mask_satellite(Satellite s) {
  return s == Satellite::DeforestationMask || s == Satellite::FireCCI;
}

QaSpec default_qa_spec(Satellite s) {
  switch (s) {
    case Satellite::Sentinel2:
      // QA60: bit 10 opaque cloud, bit 11 cirrus
      return {"QA60", (1u << 10) | (1u << 11)};
    case Satellite::Landsat5:
    case Satellite::Landsat8:
      // QA_PIXEL: bit 1 dilated cloud, bit 3 cloud, bit 4 cloud shadow
      return {"QA_PIXEL", (1u << 1) | (1u << 3) | (1u << 4)};
    default: return {"", 0};
  }
}

int64_t Raster::band_index(const std::string& name) const {
  for (size_t i = 0; i < bands.size(); ++i)
    if (bands[i] == name) return static_cast<int64_t>(i);
  return -1;
}

Raster Raster::make(const GeoBox& g, std::vector<std::string> bands, Satellite sat, Date ts,
                    float fill) {
  Raster r;
  r.geobox = g;
  r.bands = std::move(bands);
  r.satellite = sat;
  r.timestamp = ts;
  r.data.assign(static_cast<size_t>(r.band_count() * g.pixels()), fill);
  return r;
}

void validate_raster(const Raster& r, const std::string& context) {
  validate_geobox(r.geobox, context);
  if (r.bands.empty()) fail(ErrorCode::BadConfig, context + ": raster has no bands");
  const size_t expected = static_cast<size_t>(r.band_count() * r.plane_size());
  if (r.data.size() != expected)
    fail(ErrorCode::ShapeMismatch,
         context + ": data length " + std::to_string(r.data.size()) + " != bands*height*width " +
             std::to_string(expected));
  std::unordered_set<std::string> seen;
  for (const auto& b : r.bands)
    if (!seen.insert(b).second)
      fail(ErrorCode::BadConfig, context + ": duplicate band name '" + b + "'");
  if (is_mask_satellite(r.satellite)) {
    for (float v : r.data)
      if (!is_nodata(v) && v != 0.0f && v != 1.0f)
        fail(ErrorCode::BadConfig, context + ": mask raster holds value " + std::to_string(v) +
                                       ", expected only {0, 1, nodata}");
  }
}

namespace {

bool same_pixel_size(const GeoBox& a, const GeoBox& b) {
  return std::abs(a.pixel_size_x() - b.pixel_size_x()) <= 1e-9 &&
         std::abs(a.pixel_size_y() - b.pixel_size_y()) <= 1e-9;
}

}  // namespace

Raster crop_window(const Raster& r, const GeoBox& g) {
  validate_geobox(g, "crop_window");
  if (!same_pixel_size(r.geobox, g))
    fail(ErrorCode::GridMismatch, "crop_window: pixel sizes differ (" + describe(r.geobox) +
                                      " vs " + describe(g) + ")");
  if (!r.geobox.intersects(g)) fail(ErrorCode::NoOverlap, "crop_window: no spatial overlap");

  Raster out = Raster::make(g, r.bands, r.satellite, r.timestamp);
  const GeoBox& src = r.geobox;
  const double psx = src.pixel_size_x();
  const double psy = src.pixel_size_y();
  for (int64_t row = 0; row < g.height; ++row) {
    const double cy = g.center_y(row);
    const int64_t srow = static_cast<int64_t>(std::floor((src.north - cy) / psy));
    if (srow < 0 || srow >= src.height) continue;
    for (int64_t col = 0; col < g.width; ++col) {
      const double cx = g.center_x(col);
      const int64_t scol = static_cast<int64_t>(std::floor((cx - src.west) / psx));
      if (scol < 0 || scol >= src.width) continue;
      for (int64_t b = 0; b < r.band_count(); ++b) out.at(b, row, col) = r.at(b, srow, scol);
    }
  }
  return out;
}

Raster resample(const Raster& r, const GeoBox& target, ResampleMethod method) {
  validate_geobox(target, "resample");
  if (!r.geobox.intersects(target)) fail(ErrorCode::NoOverlap, "resample: no spatial overlap");

  Raster out = Raster::make(target, r.bands, r.satellite, r.timestamp);
  const GeoBox& src = r.geobox;
  const double psx = src.pixel_size_x();
  const double psy = src.pixel_size_y();
  const int64_t nb = r.band_count();

  for (int64_t row = 0; row < target.height; ++row) {
    const double cy = target.center_y(row);
    if (cy < src.south || cy > src.north) continue;
    // fy: fractional source row index in center coordinates
    const double fy = (src.north - cy) / psy - 0.5;
    for (int64_t col = 0; col < target.width; ++col) {
      const double cx = target.center_x(col);
      if (cx < src.west || cx > src.east) continue;
      const double fx = (cx - src.west) / psx - 0.5;

      if (method == ResampleMethod::Nearest) {
        int64_t sr = static_cast<int64_t>(std::llround(fy));
        int64_t sc = static_cast<int64_t>(std::llround(fx));
        sr = std::clamp<int64_t>(sr, 0, src.height - 1);
        sc = std::clamp<int64_t>(sc, 0, src.width - 1);
        for (int64_t b = 0; b < nb; ++b) out.at(b, row, col) = r.at(b, sr, sc);
      } else {
        const int64_t r0 = static_cast<int64_t>(std::floor(fy));
        const int64_t c0 = static_cast<int64_t>(std::floor(fx));
        const double wy = fy - static_cast<double>(r0);
        const double wx = fx - static_cast<double>(c0);
        const int64_t ra = std::clamp<int64_t>(r0, 0, src.height - 1);
        const int64_t rb = std::clamp<int64_t>(r0 + 1, 0, src.height - 1);
        const int64_t ca = std::clamp<int64_t>(c0, 0, src.width - 1);
        const int64_t cb = std::clamp<int64_t>(c0 + 1, 0, src.width - 1);
        for (int64_t b = 0; b < nb; ++b) {
          const double v00 = r.at(b, ra, ca);
          const double v01 = r.at(b, ra, cb);
          const double v10 = r.at(b, rb, ca);
          const double v11 = r.at(b, rb, cb);
          // NaN contributors poison the sum, which is exactly the contract
          const double v = (1.0 - wy) * ((1.0 - wx) * v00 + wx * v01) +
                           wy * ((1.0 - wx) * v10 + wx * v11);
          out.at(b, row, col) = static_cast<float>(v);
        }
      }
    }
  }
  return out;
}

Raster cloud_mask(const Raster& r) { return cloud_mask(r, default_qa_spec(r.satellite)); }

Raster cloud_mask(const Raster& r, const QaSpec& qa) {
  Raster out = Raster::make(r.geobox, {"usable"}, r.satellite, r.timestamp, 1.0f);
  if (qa.band.empty()) return out;  // sensor defines no QA: everything usable
  const int64_t qb = r.band_index(qa.band);
  if (qb < 0)
    fail(ErrorCode::MissingBand, std::string("cloud_mask: ") + satellite_name(r.satellite) +
                                     " raster lacks QA band '" + qa.band + "'");
  const float* q = r.plane(qb);
  float* m = out.plane(0);
  const int64_t n = r.plane_size();
  for (int64_t i = 0; i < n; ++i) {
    if (is_nodata(q[i])) {
      m[i] = 0.0f;
      continue;
    }
    const uint32_t flags = static_cast<uint32_t>(q[i]);
    m[i] = (flags & qa.unusable_bits) ? 0.0f : 1.0f;
  }
  return out;
}

}  // namespace terraseg
