#pragma once

#include <cmath>

namespace iab {

inline constexpr double kSpeedOfLight = 299792458.0;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }
inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watt_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }
inline double wavelength(double carrier_hz) { return kSpeedOfLight / carrier_hz; }

}  // namespace iab
