#include "terraseg/catalog.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <string_view>
#include <tuple>

#include <json.hpp>

#include "terraseg/error.hpp"
#include "terraseg/tsrf.hpp"

namespace terraseg {

using nlohmann::json;

std::pair<int, int> Window::month_range(const Date& target) const {
  const int m = target.month_index();
  if (kind == Kind::PlusMinusMonths) return {m - months, m + months};
  return {m - months, m};
}

namespace {

bool bands_are_known(Satellite sat, const std::vector<std::string>& bands) {
  if (sat == Satellite::Synthetic) return true;
  const auto& known = satellite_bands(sat);
  for (const auto& b : bands)
    if (std::find(known.begin(), known.end(), b) == known.end()) return false;
  return true;
}

void sort_records(std::vector<SceneRecord>& records) {
  std::sort(records.begin(), records.end(), [](const SceneRecord& a, const SceneRecord& b) {
    if (a.satellite != b.satellite) return a.satellite < b.satellite;
    if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
    return a.path < b.path;
  });
}

}  // namespace

CatalogBuildReport build_catalog(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  if (!fs::exists(root) || !fs::is_directory(root))
    fail(ErrorCode::IoRead, "catalog root is not a readable directory: " + root.string());

  CatalogBuildReport report;
  std::vector<fs::path> sidecars;
  std::error_code ec;
  for (fs::recursive_directory_iterator it(root, fs::directory_options::follow_directory_symlink,
                                           ec),
       end = fs::recursive_directory_iterator();
       it != end; it.increment(ec)) {
    if (ec) fail(ErrorCode::IoRead, "walking " + root.string() + ": " + ec.message());
    if (!it->is_regular_file()) continue;
    const fs::path& p = it->path();
    if (p.extension() == ".json" && p.stem().has_extension()) sidecars.push_back(p);
  }
  std::sort(sidecars.begin(), sidecars.end());

  std::set<std::tuple<Satellite, Date, std::string>> seen;
  for (const fs::path& sidecar : sidecars) {
    // sidecar is <payload>.json
    fs::path payload = sidecar;
    payload.replace_extension();
    try {
      TsrfHeader h = read_tsrf_header(payload);
      if (!bands_are_known(h.satellite, h.bands))
        fail(ErrorCode::Parse, payload.string() + ": band list is not a subset of the " +
                                   std::string(satellite_name(h.satellite)) + " band catalog");
      SceneRecord rec;
      rec.satellite = h.satellite;
      rec.timestamp = h.timestamp;
      rec.geobox = h.geobox;
      // pixel counts come from the binary header
      {
        std::ifstream in(payload, std::ios::binary);
        char magic[8];
        uint32_t w = 0, ht = 0, b = 0;
        in.read(magic, 8);
        in.read(reinterpret_cast<char*>(&w), 4);
        in.read(reinterpret_cast<char*>(&ht), 4);
        in.read(reinterpret_cast<char*>(&b), 4);
        if (!in || std::string_view(magic, 8) != std::string_view(kTsrfMagic, 8))
          fail(ErrorCode::Parse, payload.string() + ": bad TSRF payload header");
        rec.geobox.width = w;
        rec.geobox.height = ht;
      }
      rec.bands = h.bands;
      rec.path = fs::weakly_canonical(payload).string();
      validate_geobox(rec.geobox, payload.string());
      if (seen.emplace(rec.satellite, rec.timestamp, rec.path).second)
        report.catalog.records.push_back(std::move(rec));
    } catch (const Error& e) {
      report.diagnostics.push_back({sidecar.string(), e.what()});
    }
  }
  sort_records(report.catalog.records);
  return report;
}

std::vector<SceneRecord> query_window(const Catalog& c, const GeoBox& g, const Date& target,
                                      const Window& window,
                                      const std::vector<Satellite>& satellites) {
  const auto [first_month, last_month] = window.month_range(target);
  std::vector<SceneRecord> out;
  for (const SceneRecord& rec : c.records) {
    if (std::find(satellites.begin(), satellites.end(), rec.satellite) == satellites.end())
      continue;
    const int m = rec.timestamp.month_index();
    if (m < first_month || m > last_month) continue;
    if (!rec.geobox.intersects(g)) continue;
    out.push_back(rec);
  }
  sort_records(out);  // catalog order already matches, but keep the contract explicit
  return out;
}

void save_catalog(const Catalog& c, const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::trunc);
  if (!out) fail(ErrorCode::IoWrite, "cannot create " + file.string());
  for (const SceneRecord& rec : c.records) {
    json j{{"satellite", satellite_name(rec.satellite)},
           {"timestamp", format_date(rec.timestamp)},
           {"geobox",
            {{"west", rec.geobox.west},
             {"south", rec.geobox.south},
             {"east", rec.geobox.east},
             {"north", rec.geobox.north},
             {"width", rec.geobox.width},
             {"height", rec.geobox.height}}},
           {"bands", rec.bands},
           {"path", rec.path}};
    out << j.dump() << "\n";
  }
  if (!out) fail(ErrorCode::IoWrite, "short write to " + file.string());
}

Catalog load_catalog(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) fail(ErrorCode::IoRead, "cannot open " + file.string());
  Catalog c;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      SceneRecord rec;
      auto sat = satellite_from_name(j.at("satellite").get<std::string>());
      if (!sat) throw Error(ErrorCode::Parse, "unknown satellite");
      rec.satellite = *sat;
      rec.timestamp = parse_date(j.at("timestamp").get<std::string>());
      const json& g = j.at("geobox");
      rec.geobox = {g.at("west"), g.at("south"), g.at("east"),
                    g.at("north"), g.at("width"), g.at("height")};
      rec.bands = j.at("bands").get<std::vector<std::string>>();
      rec.path = j.at("path").get<std::string>();
      c.records.push_back(std::move(rec));
    } catch (const std::exception& e) {
      fail(ErrorCode::Parse, file.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  sort_records(c.records);
  return c;
}

}  // namespace terraseg
