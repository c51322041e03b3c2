#pragma once

#include <compare>
#include <string>
#include <string_view>

namespace wellcap::grid {

/// Six-character Maidenhead locator, e.g. "DN87gm".
///
/// Field pair A-R, square pair 0-9, subsquare pair a-x. A subsquare spans
/// 5 arc-minutes of longitude and 2.5 arc-minutes of latitude.
class Locator6 {
 public:
  /// Validates `code`; throws ParseError carrying the first bad position.
  static Locator6 parse(std::string_view code);

  const std::string& str() const noexcept { return code_; }

  auto operator<=>(const Locator6&) const = default;

 private:
  explicit Locator6(std::string code) : code_(std::move(code)) {}
  std::string code_;
};

/// Four-character prefix of a Locator6 (field + square).
class Locator4 {
 public:
  static Locator4 parse(std::string_view code);

  const std::string& str() const noexcept { return code_; }

  auto operator<=>(const Locator4&) const = default;

 private:
  explicit Locator4(std::string code) : code_(std::move(code)) {}
  std::string code_;
};

struct LatLon {
  double lat = 0.0;
  double lon = 0.0;
};

/// Mean earth radius used for cell areas.
inline constexpr double kEarthRadiusMiles = 3958.8;

/// Cell containing (lat, lon). Cells are half-open [low, high) on both axes.
/// Requires -90 <= lat < 90 and -180 <= lon < 180, otherwise DomainError.
Locator6 encode_locator(double lat, double lon);

LatLon block_center(const Locator6& loc);

Locator4 prefix4(const Locator6& loc);

/// Spherical-earth area: 2.5' of latitude times 5' of longitude at the
/// cell's center latitude.
double block_area_sq_miles(const Locator6& loc);

}  // namespace wellcap::grid
