#include "iab/link.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "iab/errors.hpp"
#include "iab/kernels.hpp"

namespace iab {

std::vector<int> AssociationMap::users_of(int uav) const {
  std::vector<int> out;
  for (std::size_t m = 0; m < server.size(); ++m) {
    if (server[m] == uav) out.push_back(static_cast<int>(m));
  }
  return out;
}

AssociationMap associate(const std::vector<std::vector<double>>& rssi) {
  if (rssi.empty()) throw Error(Errc::domain_error, "association needs at least one UAV");
  AssociationMap a;
  a.n_uav = static_cast<int>(rssi.size());
  const std::size_t users = rssi.front().size();
  a.server.assign(users, 0);
  for (std::size_t m = 0; m < users; ++m) {
    int best = 0;
    for (int k = 1; k < a.n_uav; ++k) {
      if (rssi[static_cast<std::size_t>(k)][m] > rssi[static_cast<std::size_t>(best)][m]) best = k;
    }
    a.server[m] = best;
  }
  return a;
}

std::vector<std::vector<LinkTarget>> candidate_sets(const AssociationMap& assoc) {
  std::vector<std::vector<LinkTarget>> sets(static_cast<std::size_t>(assoc.n_uav));
  for (int k = 1; k < assoc.n_uav; ++k) sets[0].push_back({TargetKind::uuav, k});
  for (std::size_t m = 0; m < assoc.server.size(); ++m) {
    sets[static_cast<std::size_t>(assoc.server[m])].push_back(
        {TargetKind::gue, static_cast<int>(m)});
  }
  return sets;
}

std::size_t ScheduleDecision::count(int uav) const {
  std::size_t n = 0;
  for (auto b : mask[static_cast<std::size_t>(uav)]) n += b ? 1 : 0;
  return n;
}

CVector mrt_precoder(const ChannelCoefficient& g) {
  if (g.rows == 1) {
    const double norm = std::sqrt(kernels::norm_sq(g.data));
    if (!(norm > 0.0)) throw Error(Errc::degenerate_channel, "zero channel has no MRT direction");
    CVector w(g.data.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::conj(g.data[i]) / norm;
    return w;
  }
  using Mat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const Mat> m(g.data.data(), g.rows, g.cols);
  if (!(m.norm() > 0.0)) throw Error(Errc::degenerate_channel, "zero channel has no MRT direction");
  // Principal right singular vector via the smaller Gram matrix.
  Eigen::VectorXcd v;
  if (g.rows < g.cols) {
    const Eigen::MatrixXcd gram = m * m.adjoint();
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram);
    v = m.adjoint() * es.eigenvectors().col(g.rows - 1);
  } else {
    const Eigen::MatrixXcd gram = m.adjoint() * m;
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram);
    v = es.eigenvectors().col(g.cols - 1);
  }
  const double norm = v.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw Error(Errc::degenerate_channel, "channel has no finite MRT direction");
  }
  v /= norm;
  // Fix the arbitrary phase: first entry real and non-negative.
  const cplx first = v(0);
  const cplx rot = std::abs(first) > 0.0 ? std::conj(first) / std::abs(first) : cplx(1.0, 0.0);
  CVector w(static_cast<std::size_t>(g.cols));
  for (int i = 0; i < g.cols; ++i) w[static_cast<std::size_t>(i)] = v(i) * rot;
  return w;
}

double received_gain(const ChannelCoefficient& g, std::span<const cplx> w) {
  const auto& k = kernels::active();
  double total = 0.0;
  for (int r = 0; r < g.rows; ++r) total += std::norm(k.dot(g.row(r).data(), w.data(), w.size()));
  return total;
}

double equal_power_share(double total_w, std::size_t n_scheduled) {
  return n_scheduled == 0 ? 0.0 : total_w / static_cast<double>(n_scheduled);
}

namespace {

double donor_sinr(const CellTransmission& donor, std::size_t victim, double noise_w) {
  const ScheduledLink& v = donor.links.at(victim);
  const double signal = v.power_w * received_gain(v.channel, v.precoder);
  double interference = 0.0;
  for (std::size_t j = 0; j < donor.links.size(); ++j) {
    if (j == victim) continue;
    interference += v.power_w * received_gain(v.channel, donor.links[j].precoder);
  }
  return signal / (interference + noise_w);
}

}  // namespace

double sinr_tuav_to_gue(const CellTransmission& donor, std::size_t victim, double noise_w) {
  if (donor.links.at(victim).target.kind != TargetKind::gue) {
    throw Error(Errc::domain_error, "victim is not a user link");
  }
  return donor_sinr(donor, victim, noise_w);
}

double sinr_tuav_to_uuav(const CellTransmission& donor, std::size_t victim, double noise_w) {
  if (donor.links.at(victim).target.kind != TargetKind::uuav) {
    throw Error(Errc::domain_error, "victim is not a backhaul link");
  }
  return donor_sinr(donor, victim, noise_w);
}

double sinr_uuav_to_gue(std::span<const CellTransmission> cells, std::size_t cell,
                        std::size_t victim, std::span<const ChannelCoefficient> cross,
                        double noise_w) {
  const CellTransmission& own = cells[cell];
  const ScheduledLink& v = own.links.at(victim);
  const double signal = v.power_w * received_gain(v.channel, v.precoder);
  double intra = 0.0;
  for (std::size_t j = 0; j < own.links.size(); ++j) {
    if (j == victim) continue;
    intra += v.power_w * received_gain(v.channel, own.links[j].precoder);
  }
  double inter = 0.0;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    if (c == cell || cells[c].links.empty()) continue;
    const ChannelCoefficient& g = cross[c];
    for (const auto& l : cells[c].links) inter += l.power_w * received_gain(g, l.precoder);
  }
  return signal / (intra + inter + noise_w);
}

std::int64_t quantized_capacity(double bandwidth_hz, double sinr, double slot_s,
                                double packet_bits) {
  if (!(sinr >= 0.0)) throw Error(Errc::domain_error, "SINR must be non-negative");
  const double packets = bandwidth_hz * std::log2(1.0 + sinr) * slot_s / packet_bits;
  return static_cast<std::int64_t>(std::floor(packets));
}

}  // namespace iab
