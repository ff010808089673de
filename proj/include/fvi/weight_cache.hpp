#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <tuple>

#include "fvi/cq.hpp"

namespace fvi {

/// Shared store of weight sequences keyed by (tableau, exponent, h, N and the
/// contour options). Weights are trajectory-independent and dominate the cost
/// of a run, so stepping code fetches them here once and never recomputes.
class WeightCache {
 public:
  std::shared_ptr<const WeightSequence> get(const ButcherTableau& tab, double exponent, double h,
                                            std::size_t n_max, const ContourOptions& options = {});

  std::size_t size() const;
  std::size_t misses() const;
  void clear();

  static WeightCache& global();

 private:
  using Key = std::tuple<std::string, double, double, std::size_t, double, double, std::size_t, int, double>;

  mutable std::mutex mutex_;
  std::map<Key, std::shared_ptr<const WeightSequence>> entries_;
  std::size_t misses_ = 0;
};

/// FNV-1a over the raw bytes of every weight entry; identifies the exact
/// weights a run used in its manifest.
std::uint64_t weights_fingerprint(const WeightSequence& w);
std::uint64_t weights_fingerprint(const ScalarWeightSequence& w);

}  // namespace fvi
