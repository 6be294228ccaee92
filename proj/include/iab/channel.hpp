#pragma once

// Air-to-ground (MISO) and air-to-air (MIMO) channel model: probabilistic LoS
// path loss, elevation-dependent Rician fading, ULA steering vectors.
//
// Large-scale quantities are losses (linear ratio >= 1). Received power is
// transmit power divided by the loss, so the fading coefficient is scaled by
// sqrt(1 / loss).

#include <complex>
#include <span>
#include <vector>

#include "iab/config.hpp"
#include "iab/geometry.hpp"
#include "iab/rng.hpp"

namespace iab {

using cplx = std::complex<double>;
using CVector = std::vector<cplx>;

struct LinkGeometry {
  double distance = 0.0;       // m
  double elevation_deg = 0.0;  // [0, 90]
  double wavelength = 0.0;     // m
  int tx_antennas = 1;
  int rx_antennas = 1;
};

LinkGeometry make_geometry(const Vec3& tx, const Vec3& rx, double carrier_hz, int tx_antennas,
                           int rx_antennas = 1);

/// Dense rx x tx complex matrix, row-major. A2G channels are 1 x A rows.
struct ChannelCoefficient {
  int rows = 0;
  int cols = 0;
  CVector data;

  ChannelCoefficient() = default;
  ChannelCoefficient(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c) {}

  bool empty() const { return data.empty(); }
  cplx& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  cplx operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
  std::span<const cplx> row(int r) const {
    return {data.data() + static_cast<std::size_t>(r) * cols, static_cast<std::size_t>(cols)};
  }
};

double los_probability(double elevation_deg, const ChannelParams& p);

/// (4 pi d / lambda)^alpha, the distance-dependent core shared by both link types.
double free_space_factor(const LinkGeometry& g, const ChannelParams& p);

/// Expected A2G loss: free-space factor times the LoS/NLoS attenuation mixture.
double large_scale_a2g(const LinkGeometry& g, const ChannelParams& p);

/// A2A loss: free-space factor times the LoS attenuation only.
double large_scale_a2a(const LinkGeometry& g, const ChannelParams& p);

/// Linear Rician K factor; the elevation is converted to radians for the exponent.
double rician_factor(double elevation_deg, const ChannelParams& p);

/// ULA response exp(-j pi i cos(angle)), i = 0..n-1.
CVector steering_vector(double angle_rad, int n);

/// Transmit/receive incidence angle for a link at the given elevation.
inline double incidence_angle(double elevation_deg) {
  return std::numbers::pi / 2.0 - elevation_deg * std::numbers::pi / 180.0;
}

/// 1 x tx_antennas MISO coefficient.
ChannelCoefficient sample_a2g_channel(const LinkGeometry& g, const ChannelParams& p,
                                      rng::Engine& rng);

/// rx_antennas x tx_antennas MIMO coefficient with a rank-one LoS part.
ChannelCoefficient sample_a2a_channel(const LinkGeometry& g, const ChannelParams& p,
                                      rng::Engine& rng);

double rssi_dbm(double tx_power_dbm, double loss_linear);

/// Thermal noise power in watts over the given bandwidth.
double noise_power_w(const ChannelParams& p, double bandwidth_hz);

}  // namespace iab
