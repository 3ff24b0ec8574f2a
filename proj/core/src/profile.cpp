#include "govern/sim.hpp"

#include <algorithm>
#include <stdexcept>

namespace govern {

namespace {

std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double u01(std::uint64_t& state) {
  return static_cast<double>(splitmix64_next(state) >> 11) * 0x1.0p-53;
}

}  // namespace

double ReferenceProfile::at(int t) const {
  if (t < 0 || t >= total_steps) throw std::out_of_range("ReferenceProfile::at");
  if (breakpoints.empty()) throw std::logic_error("ReferenceProfile: no breakpoints");
  double level = breakpoints.front().second;
  for (const auto& [idx, lvl] : breakpoints) {
    if (idx <= t) level = lvl;
    else break;
  }
  return level;
}

std::string ReferenceProfile::id() const {
  const char* k = kind == Kind::steps          ? "steps"
                  : kind == Kind::prbs_steps   ? "prbs_steps"
                                               : "drive_cycle_like";
  return std::string(k) + "/seed=" + std::to_string(seed) +
         "/steps=" + std::to_string(total_steps) +
         "/segments=" + std::to_string(breakpoints.size());
}

ReferenceProfile make_profile(const std::vector<std::pair<int, double>>& breakpoints,
                              int total_steps) {
  if (breakpoints.empty()) throw std::invalid_argument("make_profile: no breakpoints");
  if (total_steps <= 0) throw std::invalid_argument("make_profile: total_steps must be > 0");
  for (std::size_t i = 1; i < breakpoints.size(); ++i) {
    if (breakpoints[i].first <= breakpoints[i - 1].first) {
      throw std::invalid_argument("make_profile: breakpoints must be strictly increasing");
    }
  }
  if (breakpoints.front().first != 0) {
    throw std::invalid_argument("make_profile: first breakpoint must be at step 0");
  }
  ReferenceProfile p;
  p.kind = ReferenceProfile::Kind::steps;
  p.breakpoints = breakpoints;
  p.total_steps = total_steps;
  return p;
}

ReferenceProfile make_profile(ReferenceProfile::Kind kind, std::uint64_t seed, int total_steps,
                              const std::vector<double>& levels) {
  if (kind == ReferenceProfile::Kind::steps) {
    throw std::invalid_argument("make_profile: steps kind takes explicit breakpoints");
  }
  if (levels.empty()) throw std::invalid_argument("make_profile: levels must be nonempty");
  if (total_steps <= 0) throw std::invalid_argument("make_profile: total_steps must be > 0");

  const double lo = *std::min_element(levels.begin(), levels.end());
  const double hi = *std::max_element(levels.begin(), levels.end());

  ReferenceProfile p;
  p.kind = kind;
  p.seed = seed;
  p.total_steps = total_steps;

  std::uint64_t rng = seed ^ 0xc0ffee123ULL;
  int t = 0;
  double level = 0.0;
  while (t < total_steps) {
    int dwell;
    if (kind == ReferenceProfile::Kind::prbs_steps) {
      level = lo + u01(rng) * (hi - lo);
      dwell = 50 + static_cast<int>(u01(rng) * 351.0);
    } else {  // drive_cycle_like: clipped random walk, shorter dwells
      if (t == 0) {
        level = lo + u01(rng) * 0.5 * (hi - lo);
      } else {
        level += (2.0 * u01(rng) - 1.0) * 0.35 * (hi - lo);
        level = std::clamp(level, lo, hi);
      }
      dwell = 30 + static_cast<int>(u01(rng) * 91.0);
    }
    p.breakpoints.emplace_back(t, level);
    t += dwell;
  }
  return p;
}

}  // namespace govern
