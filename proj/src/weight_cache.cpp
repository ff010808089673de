#include "fvi/weight_cache.hpp"


namespace fvi {

std::shared_ptr<const WeightSequence> WeightCache::get(const ButcherTableau& tab, double exponent, double h,
                                                       std::size_t n_max, const ContourOptions& options) {
  const Key key{tab.label(), exponent, h, n_max, options.eps, options.radius.value_or(-1.0), options.oversampling,
                static_cast<int>(options.backend), options.max_condition};
  {
    std::lock_guard lock(mutex_);
    if (auto it = entries_.find(key); it != entries_.end()) return it->second;
  }
  auto computed = std::make_shared<const WeightSequence>(compute_weights(tab, exponent, h, n_max, options));
  std::lock_guard lock(mutex_);
  auto [it, inserted] = entries_.emplace(key, std::move(computed));
  if (inserted) ++misses_;
  return it->second;
}

std::size_t WeightCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

std::size_t WeightCache::misses() const {
  std::lock_guard lock(mutex_);
  return misses_;
}

void WeightCache::clear() {
  std::lock_guard lock(mutex_);
  entries_.clear();
  misses_ = 0;
}

WeightCache& WeightCache::global() {
  static WeightCache cache;
  return cache;
}

namespace {

void fnv1a(std::uint64_t& hash, const double* data, std::size_t count) {
  const auto* bytes = reinterpret_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < count * sizeof(double); ++i) {
    hash ^= bytes[i];
    hash *= 1099511628211ull;
  }
}

constexpr std::uint64_t kFnvOffset = 14695981039346656037ull;

}  // namespace

std::uint64_t weights_fingerprint(const WeightSequence& w) {
  std::uint64_t hash = kFnvOffset;
  for (const auto& wn : w.matrices()) fnv1a(hash, wn.data(), static_cast<std::size_t>(wn.size()));
  return hash;
}

std::uint64_t weights_fingerprint(const ScalarWeightSequence& w) {
  std::uint64_t hash = kFnvOffset;
  fnv1a(hash, w.w.data(), w.w.size());
  return hash;
}

}  // namespace fvi
