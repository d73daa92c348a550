#include "lhvswap/oracle.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

namespace lhvswap::oracle {

namespace {

constexpr double kTieTolerance = 1e-12;

// Work is split into a fixed number of chunks and reduced in chunk order, so
// results do not depend on the number of threads.
constexpr std::size_t kChunks = 64;

template <typename Acc, typename Body>
Acc reduce_chunks(std::size_t n_items, const Acc& zero, Body body) {
  const std::size_t n_chunks = std::min(kChunks, std::max<std::size_t>(n_items, 1));
  std::vector<Acc> partial(n_chunks, zero);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t c = next++; c < n_chunks; c = next++) {
      const std::size_t begin = n_items * c / n_chunks;
      const std::size_t end = n_items * (c + 1) / n_chunks;
      body(begin, end, partial[c]);
    }
  };
  const std::size_t n_threads =
      std::min<std::size_t>(n_chunks, std::max(1u, std::thread::hardware_concurrency()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  Acc total = zero;
  for (const Acc& p : partial) {
    for (std::size_t i = 0; i < total.size(); ++i) total[i] += p[i];
  }
  return total;
}

std::vector<std::size_t> octant_nodes(const SphereGrid& grid) {
  std::vector<std::size_t> nodes;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid.xs()[i] > 0.0 && grid.ys()[i] > 0.0 && grid.zs()[i] > 0.0) nodes.push_back(i);
  }
  return nodes;
}

// Outer nodes and the multiplicity each represents.
std::pair<std::vector<std::size_t>, double> symmetric_outer_nodes(const SphereGrid& grid) {
  if (grid.octant_symmetric()) return {octant_nodes(grid), 8.0};
  std::vector<std::size_t> all(grid.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return {std::move(all), 1.0};
}

}  // namespace

SphereGrid::SphereGrid(std::size_t n_z, std::size_t n_phi) : n_z_(n_z), n_phi_(n_phi) {
  if (n_z == 0 || n_phi == 0) throw std::invalid_argument("SphereGrid needs n_z, n_phi >= 1");
  xs_.reserve(n_z * n_phi);
  ys_.reserve(n_z * n_phi);
  zs_.reserve(n_z * n_phi);
  for (std::size_t i = 0; i < n_z; ++i) {
    const double z = -1.0 + (static_cast<double>(i) + 0.5) * 2.0 / static_cast<double>(n_z);
    const double r = std::sqrt(1.0 - z * z);
    for (std::size_t j = 0; j < n_phi; ++j) {
      const double phi =
          (static_cast<double>(j) + 0.5) * 2.0 * std::numbers::pi / static_cast<double>(n_phi);
      xs_.push_back(r * std::cos(phi));
      ys_.push_back(r * std::sin(phi));
      zs_.push_back(z);
    }
  }
}

SphereGrid SphereGrid::oriented(const UnitVec3& pole) const {
  // Orthonormal frame (u, v, pole); u is the unit vector orthogonal to pole
  // built from the coordinate axis least aligned with it.
  const double ax = std::abs(pole.x()), ay = std::abs(pole.y()), az = std::abs(pole.z());
  std::array<double, 3> seed{0.0, 0.0, 0.0};
  if (ax <= ay && ax <= az) {
    seed[0] = 1.0;
  } else if (ay <= az) {
    seed[1] = 1.0;
  } else {
    seed[2] = 1.0;
  }
  const std::array<double, 3> p{pole.x(), pole.y(), pole.z()};
  const double proj = seed[0] * p[0] + seed[1] * p[1] + seed[2] * p[2];
  std::array<double, 3> u{seed[0] - proj * p[0], seed[1] - proj * p[1], seed[2] - proj * p[2]};
  const double un = std::sqrt(u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
  for (double& c : u) c /= un;
  const std::array<double, 3> v{p[1] * u[2] - p[2] * u[1], p[2] * u[0] - p[0] * u[2],
                                p[0] * u[1] - p[1] * u[0]};

  SphereGrid out = *this;
  for (std::size_t i = 0; i < size(); ++i) {
    const double x = xs_[i], y = ys_[i], z = zs_[i];
    out.xs_[i] = x * u[0] + y * v[0] + z * p[0];
    out.ys_[i] = x * u[1] + y * v[1] + z * p[1];
    out.zs_[i] = x * u[2] + y * v[2] + z * p[2];
  }
  return out;
}

PartialSwapValues oracle_partial_swap(double eta, const UnitVec3& a, const UnitVec3& b,
                                      const SphereGrid& grid) {
  const PartialSwapParams params(eta);
  const double threshold = params.overlap_threshold();
  // The acceptance region {lambda1 . lambda3 >= 1} is a null set; antipodal
  // grid nodes must not put mass on it.
  if (threshold >= 1.0) return {0.0, 0.0, std::nullopt};

  // Bob's sign(b . lambda4) is exact on a lambda4 grid whose pole is b.
  const SphereGrid bob_grid = grid.oriented(b);
  const std::size_t n = grid.size();
  const auto xs = grid.xs();
  const auto ys = grid.ys();
  const auto zs = grid.zs();
  const auto xs4 = bob_grid.xs();
  const auto ys4 = bob_grid.ys();
  const auto zs4 = bob_grid.zs();
  std::vector<double> alice_proj(n);
  for (std::size_t i = 0; i < n; ++i) alice_proj[i] = a.x() * xs[i] + a.y() * ys[i] + a.z() * zs[i];

  // [count, sum |a.l1|, sum sign(b.l4) a.l1]
  using Acc = std::array<double, 3>;
  const Acc total = reduce_chunks(n, Acc{}, [&](std::size_t begin, std::size_t end, Acc& acc) {
    for (std::size_t m = begin; m < end; ++m) {
      // lambda4 = -lambda3, so the singlet condition reads lambda1 . lambda4 <= -threshold.
      const double x4 = xs4[m], y4 = ys4[m], z4 = zs4[m];
      const double bob = (b.x() * x4 + b.y() * y4 + b.z() * z4) >= 0.0 ? 1.0 : -1.0;
      double count = 0.0, abs_sum = 0.0, signed_sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = xs[i] * x4 + ys[i] * y4 + zs[i] * z4;
        if (d <= -threshold) {
          count += 1.0;
          abs_sum += std::abs(alice_proj[i]);
          signed_sum += alice_proj[i];
        }
      }
      acc[0] += count;
      acc[1] += abs_sum;
      acc[2] += bob * signed_sum;
    }
  });
  const double w2 = grid.weight() * grid.weight();
  PartialSwapValues out{total[0] * w2, total[1] * w2, std::nullopt};
  if (total[1] > 0.0) out.correlation = total[2] / total[1];
  return out;
}

double oracle_partial_swap_singlet_prob(double eta, const SphereGrid& grid) {
  const double threshold = PartialSwapParams(eta).overlap_threshold();
  if (threshold >= 1.0) return 0.0;
  const auto [outer, multiplicity] = symmetric_outer_nodes(grid);
  const auto xs = grid.xs();
  const auto ys = grid.ys();
  const auto zs = grid.zs();
  const std::size_t n = grid.size();
  using Acc = std::array<double, 1>;
  const Acc total =
      reduce_chunks(outer.size(), Acc{}, [&](std::size_t begin, std::size_t end, Acc& acc) {
        for (std::size_t o = begin; o < end; ++o) {
          const std::size_t m = outer[o];
          const double x1 = xs[m], y1 = ys[m], z1 = zs[m];
          double count = 0.0;
          for (std::size_t i = 0; i < n; ++i) {
            count += (x1 * xs[i] + y1 * ys[i] + z1 * zs[i]) >= threshold ? 1.0 : 0.0;
          }
          acc[0] += count;
        }
      });
  return total[0] * multiplicity * grid.weight() * grid.weight();
}

std::vector<double> oracle_bell_result_curve(std::span<const double> limits,
                                             const SphereGrid& grid) {
  for (const double l : limits) static_cast<void>(CompleteSwapParams{l});
  std::vector<double> sorted(limits.begin(), limits.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n_limits = sorted.size();

  const auto [outer, multiplicity] = symmetric_outer_nodes(grid);
  const auto xs = grid.xs();
  const auto ys = grid.ys();
  const auto zs = grid.zs();
  const std::size_t n = grid.size();

  // bins[j] counts pairs accepted for exactly the sorted limits 0..j.
  const std::vector<double> zero(n_limits, 0.0);
  const std::vector<double> bins =
      reduce_chunks(outer.size(), zero, [&](std::size_t begin, std::size_t end, auto& acc) {
        for (std::size_t o = begin; o < end; ++o) {
          const std::size_t m = outer[o];
          const double x1 = xs[m], y1 = ys[m], z1 = zs[m];
          for (std::size_t i = 0; i < n; ++i) {
            const double px = x1 * xs[i], py = y1 * ys[i], pz = z1 * zs[i];
            // Products of unit vectors lie in [-1, 1]; rounding must not push
            // an antipodal node pair past limit = 1.
            const double min_product = std::max(
                -1.0, std::min(std::min(px + py + pz, px - py - pz),
                               std::min(-px + py - pz, -px - py + pz)));
            const auto accepted = static_cast<std::size_t>(
                std::lower_bound(sorted.begin(), sorted.end(), -min_product) - sorted.begin());
            if (accepted > 0) acc[accepted - 1] += 1.0;
          }
        }
      });

  const double scale = multiplicity * grid.weight() * grid.weight();
  std::vector<double> sorted_prob(n_limits);
  double running = 0.0;
  for (std::size_t j = n_limits; j-- > 0;) {
    running += bins[j];
    sorted_prob[j] = running * scale;
  }
  std::vector<double> out;
  out.reserve(n_limits);
  for (const double l : limits) {
    const auto j = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), l) -
                                            sorted.begin());
    out.push_back(sorted_prob[j]);
  }
  return out;
}

double oracle_bell_result_prob(double limit, const SphereGrid& grid) {
  const std::array<double, 1> limits{limit};
  return oracle_bell_result_curve(limits, grid)[0];
}

double oracle_limit_for_result_prob(double target, const SphereGrid& grid, double tolerance) {
  if (!(target > 0.0 && target < 1.0)) {
    throw std::invalid_argument("target result probability must lie in (0, 1)");
  }
  constexpr std::size_t kProbes = 64;
  double lo = 0.0;
  double hi = 1.0;
  while (hi - lo > tolerance) {
    std::vector<double> probes(kProbes + 1);
    for (std::size_t j = 0; j <= kProbes; ++j) {
      probes[j] = lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(kProbes);
    }
    const std::vector<double> prob = oracle_bell_result_curve(probes, grid);
    // prob is non-increasing; bracket the first probe at or below target.
    std::size_t j = 0;
    while (j <= kProbes && prob[j] > target) ++j;
    if (j == 0) return lo;
    if (j > kProbes) return hi;
    const double new_lo = probes[j - 1];
    const double new_hi = probes[j];
    if (new_hi - new_lo >= hi - lo) break;
    lo = new_lo;
    hi = new_hi;
  }
  return 0.5 * (lo + hi);
}

double OracleCell::correlation() const {
  const double total = coincidence_mass();
  if (!(total > 0.0)) throw EmptyBranchError("Bell branch has no coincidence mass on this grid");
  return (joint_mass[0] + joint_mass[3] - joint_mass[1] - joint_mass[2]) / total;
}

std::array<double, 4> OracleCell::joint_probabilities() const {
  const double total = coincidence_mass();
  if (!(total > 0.0)) throw EmptyBranchError("Bell branch has no coincidence mass on this grid");
  return {joint_mass[0] / total, joint_mass[1] / total, joint_mass[2] / total,
          joint_mass[3] / total};
}

CompleteSwapTable::CompleteSwapTable(std::vector<double> limits, std::size_t n_alice,
                                     std::size_t n_bob)
    : limits_(std::move(limits)),
      n_alice_(n_alice),
      n_bob_(n_bob),
      cells_(limits_.size() * kBellStateCount * n_alice * n_bob),
      result_mass_(limits_.size(), 0.0) {}

std::size_t CompleteSwapTable::offset(std::size_t limit_index, BellOutcome outcome,
                                      std::size_t alice, std::size_t bob) const {
  if (limit_index >= limits_.size() || alice >= n_alice_ || bob >= n_bob_ ||
      outcome == BellOutcome::NoResult) {
    throw std::out_of_range("CompleteSwapTable index out of range");
  }
  const auto k = static_cast<std::size_t>(outcome);
  return ((limit_index * kBellStateCount + k) * n_alice_ + alice) * n_bob_ + bob;
}

const OracleCell& CompleteSwapTable::cell(std::size_t limit_index, BellOutcome outcome,
                                          std::size_t alice, std::size_t bob) const {
  return cells_[offset(limit_index, outcome, alice, bob)];
}

OracleCell& CompleteSwapTable::cell(std::size_t limit_index, BellOutcome outcome,
                                    std::size_t alice, std::size_t bob) {
  return cells_[offset(limit_index, outcome, alice, bob)];
}

CompleteSwapTable oracle_complete_swap(std::span<const double> limits,
                                       std::span<const UnitVec3> alices,
                                       std::span<const UnitVec3> bobs, const SphereGrid& grid) {
  return oracle_complete_swap(limits, alices, bobs, grid, grid);
}

CompleteSwapTable oracle_complete_swap(std::span<const double> limits,
                                       std::span<const UnitVec3> alices,
                                       std::span<const UnitVec3> bobs,
                                       const SphereGrid& alice_grid, const SphereGrid& bob_grid) {
  for (const double l : limits) static_cast<void>(CompleteSwapParams{l});
  std::vector<double> sorted(limits.begin(), limits.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n_limits = sorted.size();
  const std::size_t n_alice = alices.size();
  const std::size_t n_bob = bobs.size();
  const std::size_t n = alice_grid.size();
  const auto xs = alice_grid.xs();
  const auto ys = alice_grid.ys();
  const auto zs = alice_grid.zs();
  const auto xs4 = bob_grid.xs();
  const auto ys4 = bob_grid.ys();
  const auto zs4 = bob_grid.zs();

  std::vector<double> alice_proj(n_alice * n);
  for (std::size_t a = 0; a < n_alice; ++a) {
    for (std::size_t i = 0; i < n; ++i) {
      alice_proj[a * n + i] = alices[a].x() * xs[i] + alices[a].y() * ys[i] + alices[a].z() * zs[i];
    }
  }

  // Accumulator layout: [bin][branch][alice][bob][joint] followed by [bin][branch] masses.
  const std::size_t joint_size = n_limits * kBellStateCount * n_alice * n_bob * 4;
  const std::size_t acc_size = joint_size + n_limits * kBellStateCount;
  const std::size_t inner_size = n_limits * kBellStateCount * n_alice * 2;

  const std::vector<double> zero(acc_size, 0.0);
  const std::vector<double> acc =
      reduce_chunks(bob_grid.size(), zero, [&](std::size_t begin, std::size_t end, auto& out) {
        std::vector<double> alice_mass(inner_size);
        std::vector<double> branch_mass(n_limits * kBellStateCount);
        std::vector<int> bob_plus(n_bob);
        for (std::size_t m = begin; m < end; ++m) {
          const double x4 = xs4[m], y4 = ys4[m], z4 = zs4[m];
          std::fill(alice_mass.begin(), alice_mass.end(), 0.0);
          std::fill(branch_mass.begin(), branch_mass.end(), 0.0);
          for (std::size_t i = 0; i < n; ++i) {
            const double px = xs[i] * x4, py = ys[i] * y4, pz = zs[i] * z4;
            const std::array<double, 4> s = {px + py + pz, px - py - pz, -px + py - pz,
                                             -px - py + pz};
            std::size_t k = 0;
            for (std::size_t j = 1; j < 4; ++j) {
              if (s[j] < s[k]) k = j;
            }
            const auto accepted = static_cast<std::size_t>(
                std::lower_bound(sorted.begin(), sorted.end(), -std::max(-1.0, s[k])) -
                sorted.begin());
            if (accepted == 0) continue;
            const std::size_t bin = accepted - 1;
            // Grid nodes produce exact score ties; tied branches share the node mass.
            std::array<bool, 4> tied{};
            std::size_t n_tied = 0;
            for (std::size_t j = 0; j < 4; ++j) {
              tied[j] = s[j] - s[k] <= kTieTolerance;
              n_tied += tied[j];
            }
            const double w = 1.0 / static_cast<double>(n_tied);
            for (std::size_t kk = 0; kk < 4; ++kk) {
              if (!tied[kk]) continue;
              branch_mass[bin * kBellStateCount + kk] += w;
              double* row = &alice_mass[(bin * kBellStateCount + kk) * n_alice * 2];
              for (std::size_t a = 0; a < n_alice; ++a) {
                const double d = w * alice_proj[a * n + i];
                if (d > 0.0) {
                  row[2 * a] += d;
                } else {
                  row[2 * a + 1] -= d;
                }
              }
            }
          }
          for (std::size_t bb = 0; bb < n_bob; ++bb) {
            bob_plus[bb] = (bobs[bb].x() * x4 + bobs[bb].y() * y4 + bobs[bb].z() * z4) >= 0.0;
          }
          for (std::size_t bk = 0; bk < n_limits * kBellStateCount; ++bk) {
            out[joint_size + bk] += branch_mass[bk];
            if (branch_mass[bk] == 0.0) continue;
            for (std::size_t a = 0; a < n_alice; ++a) {
              const double plus = alice_mass[(bk * n_alice + a) * 2];
              const double minus = alice_mass[(bk * n_alice + a) * 2 + 1];
              double* dst = &out[((bk * n_alice + a) * n_bob) * 4];
              for (std::size_t bb = 0; bb < n_bob; ++bb) {
                if (bob_plus[bb]) {
                  dst[bb * 4 + 0] += plus;
                  dst[bb * 4 + 2] += minus;
                } else {
                  dst[bb * 4 + 1] += plus;
                  dst[bb * 4 + 3] += minus;
                }
              }
            }
          }
        }
      });

  // Pairs in bin j are accepted for sorted limits 0..j: suffix-sum over bins.
  const double w2 = alice_grid.weight() * bob_grid.weight();
  std::vector<double> sorted_copy = sorted;
  CompleteSwapTable sorted_table(std::move(sorted_copy), n_alice, n_bob);
  for (std::size_t k = 0; k < kBellStateCount; ++k) {
    const BellOutcome outcome = kBellStates[k];
    for (std::size_t a = 0; a < n_alice; ++a) {
      for (std::size_t bb = 0; bb < n_bob; ++bb) {
        std::array<double, 4> joint{};
        double mass = 0.0;
        for (std::size_t j = n_limits; j-- > 0;) {
          const std::size_t base = (((j * kBellStateCount + k) * n_alice + a) * n_bob + bb) * 4;
          for (std::size_t q = 0; q < 4; ++q) joint[q] += acc[base + q];
          mass += acc[joint_size + j * kBellStateCount + k];
          OracleCell& c = sorted_table.cell(j, outcome, a, bb);
          for (std::size_t q = 0; q < 4; ++q) c.joint_mass[q] = joint[q] * w2;
          c.branch_mass = mass * w2;
        }
      }
    }
  }
  {
    double mass = 0.0;
    for (std::size_t j = n_limits; j-- > 0;) {
      for (std::size_t k = 0; k < kBellStateCount; ++k) mass += acc[joint_size + j * kBellStateCount + k];
      sorted_table.result_prob(j) = mass * w2;
    }
  }

  CompleteSwapTable table(std::vector<double>(limits.begin(), limits.end()), n_alice, n_bob);
  for (std::size_t li = 0; li < limits.size(); ++li) {
    const auto j = static_cast<std::size_t>(
        std::lower_bound(sorted.begin(), sorted.end(), limits[li]) - sorted.begin());
    table.result_prob(li) = sorted_table.result_prob(j);
    for (const BellOutcome outcome : kBellStates) {
      for (std::size_t a = 0; a < n_alice; ++a) {
        for (std::size_t bb = 0; bb < n_bob; ++bb) {
          table.cell(li, outcome, a, bb) = sorted_table.cell(j, outcome, a, bb);
        }
      }
    }
  }
  return table;
}

double oracle_complete_swap_correlation(double limit, BellOutcome outcome, const UnitVec3& a,
                                        const UnitVec3& b, const SphereGrid& grid) {
  if (outcome == BellOutcome::NoResult) {
    throw std::invalid_argument("conditional correlation needs a Bell outcome, not NoResult");
  }
  const std::array<double, 1> limits{limit};
  const std::array<UnitVec3, 1> alices{a};
  const std::array<UnitVec3, 1> bobs{b};
  return oracle_complete_swap(limits, alices, bobs, grid).correlation(0, outcome, 0, 0);
}

std::vector<double> oracle_fidelity_curve(std::span<const double> limits, const SphereGrid& grid) {
  const std::array<UnitVec3, 3> axes = {UnitVec3::from_unit(1, 0, 0), UnitVec3::from_unit(0, 1, 0),
                                        UnitVec3::from_unit(0, 0, 1)};
  const CompleteSwapTable table = oracle_complete_swap(limits, axes, axes, grid);
  std::vector<double> out;
  out.reserve(limits.size());
  for (std::size_t li = 0; li < limits.size(); ++li) {
    double signed_sum = 0.0;
    double total = 0.0;
    for (const BellOutcome outcome : kBellStates) {
      for (std::size_t i = 0; i < axes.size(); ++i) {
        const double sign = dot(axes[i], branch_frame(outcome, axes[i]));
        const OracleCell& c = table.cell(li, outcome, i, i);
        signed_sum += sign * (c.joint_mass[0] + c.joint_mass[3] - c.joint_mass[1] - c.joint_mass[2]);
        total += c.coincidence_mass();
      }
    }
    if (!(total > 0.0)) throw EmptyBranchError("no accepted mass at limit " + fmt::format("{}", limits[li]));
    const double visibility = -signed_sum / total;
    out.push_back((1.0 + 3.0 * visibility) / 4.0);
  }
  return out;
}

void write_fixture(std::ostream& out, const Fixture& fixture) {
  for (const auto& [key, entry] : fixture) {
    out << fmt::format("{}\t{}\t{}\n", key, entry.value, entry.error_bound);
  }
}

Fixture read_fixture(std::istream& in) {
  Fixture fixture;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto tab1 = line.find('\t');
    const auto tab2 = tab1 == std::string::npos ? tab1 : line.find('\t', tab1 + 1);
    if (tab2 == std::string::npos) {
      throw std::runtime_error(fmt::format("fixture line {}: expected key<TAB>value<TAB>error", line_no));
    }
    try {
      std::size_t used = 0;
      const std::string value_text = line.substr(tab1 + 1, tab2 - tab1 - 1);
      const std::string error_text = line.substr(tab2 + 1);
      const double value = std::stod(value_text, &used);
      if (used != value_text.size()) throw std::invalid_argument(value_text);
      const double error = std::stod(error_text, &used);
      if (used != error_text.size()) throw std::invalid_argument(error_text);
      fixture[line.substr(0, tab1)] = FixtureEntry{value, error};
    } catch (const std::logic_error&) {
      throw std::runtime_error(fmt::format("fixture line {}: malformed number", line_no));
    }
  }
  return fixture;
}

Fixture load_fixture(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open fixture file " + path);
  return read_fixture(in);
}

}  // namespace lhvswap::oracle
