#pragma once

#include <atomic>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fusionattack/image.hpp"

namespace fusion {

// Fake probabilities at or above this value mean "detected as fake".
inline constexpr double kDecisionThreshold = 0.5;
inline constexpr std::size_t kDefaultQueryBudget = 1000;

struct DetectorScore {
  double fake_probability = 0.0;
};

inline bool is_adversarial(DetectorScore s) { return s.fake_probability < kDecisionThreshold; }

// Counts scoring calls against a fixed budget. Thread-safe: slots are
// reserved atomically before a call and handed back if the call fails, so
// only successful evaluations are ever charged.
class QueryLedger {
 public:
  explicit QueryLedger(std::size_t budget = kDefaultQueryBudget) : budget_(budget) {}
  QueryLedger(const QueryLedger&) = delete;
  QueryLedger& operator=(const QueryLedger&) = delete;

  std::size_t used() const { return used_.load(); }
  std::size_t budget() const { return budget_; }
  std::size_t remaining() const { return budget_ - used(); }

  bool try_acquire(std::size_t n = 1);
  void release(std::size_t n = 1);

 private:
  std::size_t budget_;
  std::atomic<std::size_t> used_{0};
};

// Black-box detector. Implementations return a raw fake probability; range
// validation and query accounting happen in score().
class Oracle {
 public:
  virtual ~Oracle() = default;

  virtual double fake_probability(const Image& img) = 0;
  virtual std::vector<double> fake_probabilities(std::span<const Image> imgs);

  // Stable identifier persisted with run records, e.g. "synthetic:highfreq".
  virtual std::string id() const = 0;

  // True when fake_probability may be called from several threads at once.
  virtual bool concurrent_safe() const { return false; }
};

// One query: charges the ledger, scores, validates the range. Throws
// BudgetExhausted without touching the ledger when no budget is left, and
// ProtocolError (ledger unchanged) for values outside [0,1].
DetectorScore score(Oracle& oracle, const Image& img, QueryLedger& ledger);

// All-or-nothing batch: charges one unit per image.
std::vector<DetectorScore> score_batch(Oracle& oracle, std::span<const Image> imgs,
                                       QueryLedger& ledger);

}  // namespace fusion
