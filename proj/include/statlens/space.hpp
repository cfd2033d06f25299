#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace statlens {

// A labelled finite outcome set. Immutable; copies share the payload.
//
// Product spaces flatten left-associatively: (X⊗Y)⊗Z and X⊗(Y⊗Z) carry the
// same outcome list, so associators are identities. The monoidal unit I is a
// distinguished one-outcome space that tensor elides, making unitors
// identities as well. Equality compares the outcome list (plus the unit
// flag); the recorded binary split is construction metadata only.
class FiniteSpace {
 public:
  // Default-constructs the unit space I.
  FiniteSpace();

  // Atomic space. Outcomes must be non-empty and pairwise distinct.
  static FiniteSpace make(std::string label, std::vector<std::string> outcomes);

  // The monoidal unit: one outcome "()", elided by tensor.
  static const FiniteSpace& unit();

  const std::string& label() const;
  std::size_t size() const;
  const std::vector<std::string>& outcomes() const;
  const std::string& outcome(std::size_t i) const;

  // Index of an outcome label; throws UnknownOutcome if absent.
  std::size_t index_of(std::string_view outcome) const;
  bool contains(std::string_view outcome) const;

  bool is_unit() const;

  // True when this space was built by a (non-elided) tensor.
  bool is_product() const;
  // Components of the outermost tensor; throw NotAProductSpace if atomic.
  const FiniteSpace& left() const;
  const FiniteSpace& right() const;

  // Sizes of the flattened atomic factors (empty for the unit space).
  const std::vector<std::size_t>& factor_sizes() const;
  // Flattened atomic factors, left to right (empty for the unit space).
  std::vector<FiniteSpace> factors() const;

  bool operator==(const FiniteSpace& other) const;
  bool operator!=(const FiniteSpace& other) const { return !(*this == other); }

  friend FiniteSpace tensor(const FiniteSpace& a, const FiniteSpace& b);

 private:
  struct Data;
  explicit FiniteSpace(std::shared_ptr<const Data> data);
  std::shared_ptr<const Data> data_;
};

// Monoidal product of spaces. Outcomes in lexicographic order of factors
// (left-major); outcome labels join the factor labels with ",".
FiniteSpace tensor(const FiniteSpace& a, const FiniteSpace& b);

// Left-fold of tensor over a factor list (empty list gives the unit).
FiniteSpace tensor_all(const std::vector<FiniteSpace>& factors);

// Index arithmetic for the lexicographic product: pair (i, j) in A⊗B.
inline std::size_t pair_index(std::size_t i, std::size_t j, std::size_t b_size) {
  return i * b_size + j;
}

}  // namespace statlens
