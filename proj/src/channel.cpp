#include "iab/channel.hpp"

#include <cmath>
#include <limits>

#include "iab/errors.hpp"
#include "iab/kernels.hpp"
#include "iab/units.hpp"

namespace iab {

namespace {

void check_distance(const LinkGeometry& g) {
  if (!(g.distance > 0.0) || !std::isfinite(g.distance)) {
    throw Error(Errc::domain_error, "link distance must be positive and finite");
  }
}

CVector sample_cscg(int n, rng::Engine& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  CVector out(static_cast<std::size_t>(n));
  for (auto& v : out) {
    const double re = normal(rng);
    const double im = normal(rng);
    v = cplx(re, im);
  }
  return out;
}

struct RicianWeights {
  double los;
  double nlos;
};

RicianWeights rician_weights(double k) {
  if (std::isinf(k)) return {1.0, 0.0};
  return {std::sqrt(k / (k + 1.0)), std::sqrt(1.0 / (k + 1.0))};
}

}  // namespace

LinkGeometry make_geometry(const Vec3& tx, const Vec3& rx, double carrier_hz, int tx_antennas,
                           int rx_antennas) {
  LinkGeometry g;
  g.distance = distance(tx, rx);
  if (!(g.distance > 0.0)) throw Error(Errc::domain_error, "coincident link endpoints");
  g.elevation_deg = elevation_deg(tx, rx);
  g.wavelength = wavelength(carrier_hz);
  g.tx_antennas = tx_antennas;
  g.rx_antennas = rx_antennas;
  return g;
}

double los_probability(double elevation_deg, const ChannelParams& p) {
  return 1.0 / (1.0 + p.los_a * std::exp(-p.los_b * (elevation_deg - p.los_a)));
}

double free_space_factor(const LinkGeometry& g, const ChannelParams& p) {
  check_distance(g);
  return std::pow(4.0 * std::numbers::pi * g.distance / g.wavelength, p.path_loss_exponent);
}

double large_scale_a2g(const LinkGeometry& g, const ChannelParams& p) {
  const double pr = los_probability(g.elevation_deg, p);
  const double attenuation =
      db_to_linear(p.mu_los_db) * pr + db_to_linear(p.mu_nlos_db) * (1.0 - pr);
  return free_space_factor(g, p) * attenuation;
}

double large_scale_a2a(const LinkGeometry& g, const ChannelParams& p) {
  return free_space_factor(g, p) * db_to_linear(p.mu_los_db);
}

double rician_factor(double elevation_deg, const ChannelParams& p) {
  return p.rician_a1 * std::exp(p.rician_a2 * elevation_deg * std::numbers::pi / 180.0);
}

CVector steering_vector(double angle_rad, int n) {
  CVector e(static_cast<std::size_t>(n));
  const double c = std::cos(angle_rad);
  for (int i = 0; i < n; ++i) {
    const double phase = -std::numbers::pi * i * c;
    e[static_cast<std::size_t>(i)] = cplx(std::cos(phase), std::sin(phase));
  }
  return e;
}

ChannelCoefficient sample_a2g_channel(const LinkGeometry& g, const ChannelParams& p,
                                      rng::Engine& rng) {
  if (g.rx_antennas != 1) throw Error(Errc::domain_error, "A2G links have one receive antenna");
  const double loss = large_scale_a2g(g, p);
  const auto w = rician_weights(rician_factor(g.elevation_deg, p));
  const double carrier_phase = -2.0 * std::numbers::pi * g.distance / g.wavelength;
  const cplx los_weight =
      std::sqrt(1.0 / loss) * w.los * cplx(std::cos(carrier_phase), std::sin(carrier_phase));

  const CVector los = steering_vector(incidence_angle(g.elevation_deg), g.tx_antennas);
  const CVector nlos = sample_cscg(g.tx_antennas, rng);
  ChannelCoefficient out(1, g.tx_antennas);
  kernels::active().mix(out.data.data(), los.data(), nlos.data(), los_weight,
                        std::sqrt(1.0 / loss) * w.nlos, los.size());
  return out;
}

ChannelCoefficient sample_a2a_channel(const LinkGeometry& g, const ChannelParams& p,
                                      rng::Engine& rng) {
  const double loss = large_scale_a2a(g, p);
  const auto w = rician_weights(rician_factor(g.elevation_deg, p));
  const double carrier_phase = -2.0 * std::numbers::pi * g.distance / g.wavelength;
  const cplx los_weight =
      std::sqrt(1.0 / loss) * w.los * cplx(std::cos(carrier_phase), std::sin(carrier_phase));

  const double angle = incidence_angle(g.elevation_deg);
  const CVector e_r = steering_vector(angle, g.rx_antennas);
  const CVector e_t = steering_vector(angle, g.tx_antennas);
  ChannelCoefficient los(g.rx_antennas, g.tx_antennas);
  for (int r = 0; r < g.rx_antennas; ++r) {
    for (int c = 0; c < g.tx_antennas; ++c) {
      los(r, c) = e_r[static_cast<std::size_t>(r)] * std::conj(e_t[static_cast<std::size_t>(c)]);
    }
  }
  const CVector nlos = sample_cscg(g.rx_antennas * g.tx_antennas, rng);
  ChannelCoefficient out(g.rx_antennas, g.tx_antennas);
  kernels::active().mix(out.data.data(), los.data.data(), nlos.data(), los_weight,
                        std::sqrt(1.0 / loss) * w.nlos, out.data.size());
  return out;
}

double rssi_dbm(double tx_power_dbm, double loss_linear) {
  return tx_power_dbm - linear_to_db(loss_linear);
}

double noise_power_w(const ChannelParams& p, double bandwidth_hz) {
  return dbm_to_watt(p.noise_density_dbm_hz + linear_to_db(bandwidth_hz) + p.noise_figure_db);
}

}  // namespace iab
