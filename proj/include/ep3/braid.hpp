#pragma once

// Braid words in the three-strand Artin group B3 and the left-greedy
// Garside normal form used to decide word equivalence.

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace ep3 {

/// Permutation of three strand positions: perm[p] is where the strand that
/// starts at position p ends up.
using Perm3 = std::array<int, 3>;

inline constexpr Perm3 identity_perm{0, 1, 2};

Perm3 compose(const Perm3& first, const Perm3& then);
Perm3 inverse(const Perm3& p);
int inversion_count(const Perm3& p);
int cycle_count(const Perm3& p);

/// Letters are +1, -1, +2, -2 for s1, s1^-1, s2, s2^-1.
struct BraidWord {
  std::vector<int> letters;

  BraidWord() = default;
  BraidWord(std::initializer_list<int> l);
  explicit BraidWord(std::vector<int> l);

  bool empty() const { return letters.empty(); }
  std::size_t size() const { return letters.size(); }

  /// Text form "s1 s2 s1^-1"; the empty word prints as "e".
  std::string str() const;
  static BraidWord parse(std::string_view text);

  Perm3 permutation() const;
  int exponent_sum() const;
  BraidWord inverse() const;

  friend BraidWord operator*(const BraidWord& a, const BraidWord& b);
  friend bool operator==(const BraidWord&, const BraidWord&) = default;
};

BraidWord free_reduce(const BraidWord& w);

/// Delta^power * factors[0] * ... * factors[r-1], each factor a simple
/// (permutation) braid different from 1 and Delta, consecutive pairs
/// left-weighted.
struct GarsideForm {
  int delta_power{0};
  std::vector<Perm3> factors;

  std::string str() const;
  friend bool operator==(const GarsideForm&, const GarsideForm&) = default;
};

GarsideForm normal_form(const BraidWord& w);
bool words_equivalent(const BraidWord& a, const BraidWord& b);

struct ClosureInvariants {
  Perm3 permutation;
  int component_count;
  int exponent_sum;
};

ClosureInvariants closure_invariants(const BraidWord& w);

}  // namespace ep3
