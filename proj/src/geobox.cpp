#include "terraseg/geobox.hpp"

#include <cstdio>

#include "terraseg/error.hpp"

namespace terraseg {

void validate_geobox(const GeoBox& g, const std::string& context) {
  if (!(g.west < g.east) || !(g.south < g.north))
    fail(ErrorCode::BadConfig, context + ": geobox extent is empty (" + describe(g) + ")");
  if (g.width < 1 || g.height < 1)
    fail(ErrorCode::BadConfig, context + ": geobox needs at least one pixel per axis");
}

GeoBox subwindow(const GeoBox& g, int64_t col0, int64_t row0, int64_t w, int64_t h) {
  const double psx = g.pixel_size_x();
  const double psy = g.pixel_size_y();
  GeoBox out;
  out.west = g.west + static_cast<double>(col0) * psx;
  out.east = out.west + static_cast<double>(w) * psx;
  out.north = g.north - static_cast<double>(row0) * psy;
  out.south = out.north - static_cast<double>(h) * psy;
  out.width = w;
  out.height = h;
  return out;
}

std::string describe(const GeoBox& g) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "[%.6f,%.6f..%.6f,%.6f %lldx%lld]", g.west, g.south, g.east,
                g.north, static_cast<long long>(g.width), static_cast<long long>(g.height));
  return buf;
}

}  // namespace terraseg
