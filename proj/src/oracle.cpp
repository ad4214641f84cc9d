#include "fusionattack/oracle.hpp"

#include <cmath>
#include <string>

#include "fusionattack/errors.hpp"

namespace fusion {

bool QueryLedger::try_acquire(std::size_t n) {
  std::size_t current = used_.load();
  do {
    if (current + n > budget_) return false;
  } while (!used_.compare_exchange_weak(current, current + n));
  return true;
}

void QueryLedger::release(std::size_t n) { used_.fetch_sub(n); }

std::vector<double> Oracle::fake_probabilities(std::span<const Image> imgs) {
  std::vector<double> out;
  out.reserve(imgs.size());
  for (const auto& img : imgs) out.push_back(fake_probability(img));
  return out;
}

namespace {

double checked_probability(double p) {
  if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
    throw ProtocolError("fake probability out of range: " + std::to_string(p));
  }
  return p;
}

}  // namespace

DetectorScore score(Oracle& oracle, const Image& img, QueryLedger& ledger) {
  if (!ledger.try_acquire()) {
    throw BudgetExhausted("query budget of " + std::to_string(ledger.budget()) + " exhausted");
  }
  try {
    return DetectorScore{checked_probability(oracle.fake_probability(img))};
  } catch (...) {
    ledger.release();
    throw;
  }
}

std::vector<DetectorScore> score_batch(Oracle& oracle, std::span<const Image> imgs,
                                       QueryLedger& ledger) {
  if (!ledger.try_acquire(imgs.size())) {
    throw BudgetExhausted("batch of " + std::to_string(imgs.size()) +
                          " exceeds remaining budget " + std::to_string(ledger.remaining()));
  }
  try {
    const auto raw = oracle.fake_probabilities(imgs);
    if (raw.size() != imgs.size()) {
      throw ProtocolError("batch response has " + std::to_string(raw.size()) +
                          " scores for " + std::to_string(imgs.size()) + " images");
    }
    std::vector<DetectorScore> out;
    out.reserve(raw.size());
    for (double p : raw) out.push_back({checked_probability(p)});
    return out;
  } catch (...) {
    ledger.release(imgs.size());
    throw;
  }
}

}  // namespace fusion
