#include "wellcap/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "wellcap/errors.hpp"

namespace wellcap::grid {

namespace {

// Subsquare counts along each axis over the whole globe: 18 fields x 10
// squares x 24 subsquares.
constexpr int kCellsPerAxis = 18 * 10 * 24;
constexpr double kLonCellsPerDegree = 12.0;  // 5'
constexpr double kLatCellsPerDegree = 24.0;  // 2.5'

bool in_range(char c, char lo, char hi) { return c >= lo && c <= hi; }

void check_chars(std::string_view code, std::size_t expected_len) {
  if (code.size() != expected_len) {
    std::ostringstream msg;
    msg << "locator '" << code << "' must have " << expected_len
        << " characters, got " << code.size();
    throw ParseError(msg.str(), std::min(code.size(), expected_len));
  }
  for (std::size_t i = 0; i < code.size(); ++i) {
    const char c = code[i];
    bool ok = false;
    if (i < 2) {
      ok = in_range(c, 'A', 'R');
    } else if (i < 4) {
      ok = in_range(c, '0', '9');
    } else {
      ok = in_range(c, 'a', 'x');
    }
    if (!ok) {
      std::ostringstream msg;
      msg << "invalid character '" << c << "' at position " << i
          << " of locator '" << code << "'";
      throw ParseError(msg.str(), i);
    }
  }
}

struct CellIndex {
  int lon;  // 0 .. kCellsPerAxis-1
  int lat;
};

CellIndex to_index(const Locator6& loc) {
  const std::string& s = loc.str();
  const int lon = (s[0] - 'A') * 240 + (s[2] - '0') * 24 + (s[4] - 'a');
  const int lat = (s[1] - 'A') * 240 + (s[3] - '0') * 24 + (s[5] - 'a');
  return {lon, lat};
}

}  // namespace

Locator6 Locator6::parse(std::string_view code) {
  check_chars(code, 6);
  return Locator6(std::string(code));
}

Locator4 Locator4::parse(std::string_view code) {
  check_chars(code, 4);
  return Locator4(std::string(code));
}

Locator6 encode_locator(double lat, double lon) {
  if (!(lat >= -90.0 && lat < 90.0)) {
    std::ostringstream msg;
    msg << "latitude " << lat << " outside [-90, 90)";
    throw DomainError(msg.str());
  }
  if (!(lon >= -180.0 && lon < 180.0)) {
    std::ostringstream msg;
    msg << "longitude " << lon << " outside [-180, 180)";
    throw DomainError(msg.str());
  }
  int ilon = static_cast<int>(std::floor((lon + 180.0) * kLonCellsPerDegree));
  int ilat = static_cast<int>(std::floor((lat + 90.0) * kLatCellsPerDegree));
  // lon just below 180 can round up to the excluded edge
  ilon = std::min(ilon, kCellsPerAxis - 1);
  ilat = std::min(ilat, kCellsPerAxis - 1);

  std::string code(6, ' ');
  code[0] = static_cast<char>('A' + ilon / 240);
  code[1] = static_cast<char>('A' + ilat / 240);
  code[2] = static_cast<char>('0' + (ilon / 24) % 10);
  code[3] = static_cast<char>('0' + (ilat / 24) % 10);
  code[4] = static_cast<char>('a' + ilon % 24);
  code[5] = static_cast<char>('a' + ilat % 24);
  return Locator6::parse(code);
}

LatLon block_center(const Locator6& loc) {
  const CellIndex idx = to_index(loc);
  return {-90.0 + (idx.lat + 0.5) / kLatCellsPerDegree,
          -180.0 + (idx.lon + 0.5) / kLonCellsPerDegree};
}

Locator4 prefix4(const Locator6& loc) {
  return Locator4::parse(std::string_view(loc.str()).substr(0, 4));
}

double block_area_sq_miles(const Locator6& loc) {
  const double miles_per_degree = kEarthRadiusMiles * std::numbers::pi / 180.0;
  const double height = miles_per_degree / kLatCellsPerDegree;
  const double center_lat = block_center(loc).lat * std::numbers::pi / 180.0;
  const double width =
      miles_per_degree / kLonCellsPerDegree * std::cos(center_lat);
  return height * width;
}

}  // namespace wellcap::grid
