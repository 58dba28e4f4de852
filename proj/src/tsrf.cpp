#include "terraseg/tsrf.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "terraseg/error.hpp"

namespace terraseg {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "TSRF i/o assumes a little-endian host");

namespace {

json geobox_to_json(const GeoBox& g) {
  return json{{"west", g.west}, {"south", g.south}, {"east", g.east}, {"north", g.north}};
}

void write_exact(std::ofstream& out, const void* p, size_t n) {
  out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

json load_sidecar(const std::filesystem::path& file) {
  const std::filesystem::path sidecar = file.string() + ".json";
  std::ifstream in(sidecar);
  if (!in) fail(ErrorCode::IoRead, "cannot open sidecar " + sidecar.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, "sidecar " + sidecar.string() + ": " + e.what());
  }
  return j;
}

TsrfHeader header_from_sidecar(const json& j, const std::string& context) {
  TsrfHeader h;
  try {
    const std::string sat = j.at("satellite").get<std::string>();
    auto parsed = satellite_from_name(sat);
    if (!parsed) fail(ErrorCode::Parse, context + ": unknown satellite '" + sat + "'");
    h.satellite = *parsed;
    h.timestamp = parse_date(j.at("timestamp").get<std::string>());
    h.bands = j.at("bands").get<std::vector<std::string>>();
    const json& g = j.at("geobox");
    h.geobox.west = g.at("west").get<double>();
    h.geobox.south = g.at("south").get<double>();
    h.geobox.east = g.at("east").get<double>();
    h.geobox.north = g.at("north").get<double>();
    h.nodata_sentinel = j.value("nodata", kDefaultNodataSentinel);
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, context + ": " + e.what());
  }
  return h;
}

}  // namespace

void write_tsrf(const std::filesystem::path& file, const Raster& r, float nodata_sentinel) {
  validate_raster(r, "write_tsrf(" + file.string() + ")");

  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoWrite, "cannot create " + file.string());
  write_exact(out, kTsrfMagic, sizeof kTsrfMagic);
  const uint32_t w = static_cast<uint32_t>(r.geobox.width);
  const uint32_t h = static_cast<uint32_t>(r.geobox.height);
  const uint32_t b = static_cast<uint32_t>(r.band_count());
  write_exact(out, &w, 4);
  write_exact(out, &h, 4);
  write_exact(out, &b, 4);
  if (r.data.empty()) fail(ErrorCode::Internal, "raster without payload");
  std::vector<float> payload(r.data);
  for (float& v : payload)
    if (is_nodata(v)) v = nodata_sentinel;
  write_exact(out, payload.data(), payload.size() * sizeof(float));
  if (!out) fail(ErrorCode::IoWrite, "short write to " + file.string());
  out.close();

  json side{
      {"satellite", satellite_name(r.satellite)},
      {"timestamp", format_date(r.timestamp)},
      {"bands", r.bands},
      {"geobox", geobox_to_json(r.geobox)},
      {"nodata", nodata_sentinel},
  };
  const std::filesystem::path sidecar = file.string() + ".json";
  std::ofstream sout(sidecar, std::ios::trunc);
  if (!sout) fail(ErrorCode::IoWrite, "cannot create " + sidecar.string());
  sout << side.dump(2) << "\n";
  if (!sout) fail(ErrorCode::IoWrite, "short write to " + sidecar.string());
}

TsrfHeader read_tsrf_header(const std::filesystem::path& file) {
  if (!std::filesystem::exists(file))
    fail(ErrorCode::IoRead, "raster payload missing: " + file.string());
  return header_from_sidecar(load_sidecar(file), file.string());
}

Raster read_tsrf(const std::filesystem::path& file) {
  TsrfHeader h = read_tsrf_header(file);

  std::ifstream in(file, std::ios::binary);
  if (!in) fail(ErrorCode::IoRead, "cannot open " + file.string());
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kTsrfMagic, 8) != 0)
    fail(ErrorCode::Parse, file.string() + ": bad TSRF magic");
  uint32_t w = 0, ht = 0, b = 0;
  in.read(reinterpret_cast<char*>(&w), 4);
  in.read(reinterpret_cast<char*>(&ht), 4);
  in.read(reinterpret_cast<char*>(&b), 4);
  if (!in || w == 0 || ht == 0 || b == 0)
    fail(ErrorCode::Parse, file.string() + ": bad TSRF dimensions");
  if (b != h.bands.size())
    fail(ErrorCode::Parse, file.string() + ": band count differs between payload and sidecar");

  Raster r;
  r.geobox = h.geobox;
  r.geobox.width = w;
  r.geobox.height = ht;
  r.bands = h.bands;
  r.satellite = h.satellite;
  r.timestamp = h.timestamp;
  r.data.resize(static_cast<size_t>(w) * ht * b);
  in.read(reinterpret_cast<char*>(r.data.data()),
          static_cast<std::streamsize>(r.data.size() * sizeof(float)));
  if (!in) fail(ErrorCode::Parse, file.string() + ": truncated pixel payload");

  for (float& v : r.data)
    if (v == h.nodata_sentinel) v = std::nanf("");
  validate_raster(r, file.string());
  return r;
}

}  // namespace terraseg
