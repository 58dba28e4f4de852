#pragma once

#include <cstdint>
#include <string>

namespace terraseg {

// Axis-aligned WGS84 lon/lat footprint on a plate-carree grid, plus its pixel
// raster. Row 0 is the northernmost row, column 0 the westernmost column;
// pixel centers sit half a pixel inside the edges.
struct GeoBox {
  double west = 0.0;
  double south = 0.0;
  double east = 0.0;
  double north = 0.0;
  int64_t width = 0;   // pixels
  int64_t height = 0;  // pixels

  double pixel_size_x() const { return (east - west) / static_cast<double>(width); }
  double pixel_size_y() const { return (north - south) / static_cast<double>(height); }

  double center_x(int64_t col) const { return west + (static_cast<double>(col) + 0.5) * pixel_size_x(); }
  double center_y(int64_t row) const { return north - (static_cast<double>(row) + 0.5) * pixel_size_y(); }

  int64_t pixels() const { return width * height; }

  bool contains_point(double x, double y) const {
    return x >= west && x <= east && y >= south && y <= north;
  }

  bool intersects(const GeoBox& other) const {
    return west < other.east && other.west < east && south < other.north && other.south < north;
  }

  bool operator==(const GeoBox& other) const = default;
};

// Throws Error{BadConfig} when the extent or pixel counts are degenerate.
void validate_geobox(const GeoBox& g, const std::string& context);

// Sub-window of `g` on the same grid: `col0/row0` are pixel offsets, the
// result keeps g's pixel size.
GeoBox subwindow(const GeoBox& g, int64_t col0, int64_t row0, int64_t w, int64_t h);

std::string describe(const GeoBox& g);

}  // namespace terraseg
