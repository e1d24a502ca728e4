#pragma once

#include <cstddef>
#include <deque>
#include <iosfwd>
#include <vector>

namespace maem {

// One m-dimensional discriminator output, stored as plain values with no
// differentiation history.
using EmbeddingCode = std::vector<double>;

struct NearestResult {
  EmbeddingCode code;
  double similarity = 0.0;
  std::size_t index = 0;  // position in the buffer, oldest = 0
};

// Fixed-capacity FIFO store of embedding codes with an exact exhaustive
// cosine nearest-neighbor query. Capacities stay small (<= a few thousand),
// so the O(n*m) scan is microseconds.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, std::size_t dim);

  std::size_t capacity() const { return capacity_; }
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  // Appends at the tail; evicts the oldest entry when full.
  void push(EmbeddingCode v);

  // Entry maximizing cosine similarity with `query`; ties broken by lowest
  // index (oldest). Norms are floored at 1e-12. Throws on an empty buffer;
  // callers skip the entropy term for that step.
  NearestResult nearest_by_cosine(const EmbeddingCode& query) const;

  const EmbeddingCode& entry(std::size_t i) const { return entries_[i]; }

  // One line per entry, comma-separated, oldest first.
  void dump(std::ostream& os) const;

 private:
  std::size_t capacity_;
  std::size_t dim_;
  std::deque<EmbeddingCode> entries_;
};

double cosine_similarity_values(const EmbeddingCode& a, const EmbeddingCode& b);

}  // namespace maem
