#include "maem/replay_buffer.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace maem {

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::size_t dim)
    : capacity_(capacity), dim_(dim) {
  if (capacity == 0) throw std::invalid_argument("ReplayBuffer: capacity must be positive");
  if (dim == 0) throw std::invalid_argument("ReplayBuffer: dim must be positive");
}

void ReplayBuffer::push(EmbeddingCode v) {
  if (v.size() != dim_) {
    throw std::invalid_argument("ReplayBuffer::push: code width " +
                                std::to_string(v.size()) + " does not match dim " +
                                std::to_string(dim_));
  }
  entries_.push_back(std::move(v));
  if (entries_.size() > capacity_) entries_.pop_front();
}

double cosine_similarity_values(const EmbeddingCode& a, const EmbeddingCode& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("cosine_similarity_values: width mismatch");
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double denom = std::max(std::sqrt(na), 1e-12) * std::max(std::sqrt(nb), 1e-12);
  return dot / denom;
}

NearestResult ReplayBuffer::nearest_by_cosine(const EmbeddingCode& query) const {
  if (entries_.empty()) throw std::runtime_error("ReplayBuffer: buffer empty");
  if (query.size() != dim_) {
    throw std::invalid_argument("ReplayBuffer::nearest_by_cosine: query width mismatch");
  }
  NearestResult best;
  best.index = 0;
  best.similarity = cosine_similarity_values(query, entries_[0]);
  for (std::size_t i = 1; i < entries_.size(); ++i) {
    const double s = cosine_similarity_values(query, entries_[i]);
    if (s > best.similarity) {  // strict: ties keep the oldest
      best.similarity = s;
      best.index = i;
    }
  }
  best.code = entries_[best.index];
  return best;
}

void ReplayBuffer::dump(std::ostream& os) const {
  for (const auto& e : entries_) {
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (i) os << ',';
      os << e[i];
    }
    os << '\n';
  }
}

}  // namespace maem
