#pragma once

#include <filesystem>
#include <string>

#include "terraseg/raster.hpp"

namespace terraseg {

// TSRF v1 raster container.
//
//   <file>       : "TSRF0001" magic, u32le width, u32le height, u32le bands,
//                  then f32le pixels, band-major, row-major within a band.
//   <file>.json  : sidecar with satellite, timestamp, band names, geobox
//                  (west/south/east/north decimal degrees) and the nodata
//                  sentinel used in the binary payload.
//
// In memory nodata is NaN; on disk it is the declared sentinel.

inline constexpr char kTsrfMagic[8] = {'T', 'S', 'R', 'F', '0', '0', '0', '1'};
inline constexpr float kDefaultNodataSentinel = -9999.0f;

void write_tsrf(const std::filesystem::path& file, const Raster& r,
                float nodata_sentinel = kDefaultNodataSentinel);

Raster read_tsrf(const std::filesystem::path& file);

// Sidecar-only probe used by the catalog builder; throws Error{Parse} on a
// malformed sidecar and Error{IoRead} when files are missing.
struct TsrfHeader {
  Satellite satellite;
  Date timestamp;
  GeoBox geobox;
  std::vector<std::string> bands;
  float nodata_sentinel;
};

TsrfHeader read_tsrf_header(const std::filesystem::path& file);

}  // namespace terraseg
