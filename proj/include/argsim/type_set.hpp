#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace argsim {

/// Largest supported sample size (labels are bits of a 64-bit mask).
inline constexpr int kMaxSamples = 64;

/// A subset of the sample labels {1, ..., N}.
class TypeSet {
 public:
  constexpr TypeSet() = default;
  constexpr explicit TypeSet(std::uint64_t bits) : bits_(bits) {}

  static TypeSet singleton(int label) {
    check_label(label);
    return TypeSet(std::uint64_t{1} << (label - 1));
  }

  /// {1, ..., n}
  static TypeSet full(int n) {
    if (n < 1 || n > kMaxSamples) throw std::invalid_argument("sample size out of range");
    return TypeSet(n == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1);
  }

  static TypeSet of(std::initializer_list<int> labels) {
    TypeSet s;
    for (int l : labels) s = s | singleton(l);
    return s;
  }

  constexpr std::uint64_t bits() const { return bits_; }
  constexpr bool empty() const { return bits_ == 0; }
  int size() const { return std::popcount(bits_); }
  bool contains(int label) const {
    return label >= 1 && label <= kMaxSamples && ((bits_ >> (label - 1)) & 1U);
  }
  /// Smallest label; the set must be nonempty.
  int min_label() const { return std::countr_zero(bits_) + 1; }
  /// Largest label; the set must be nonempty.
  int max_label() const { return 64 - std::countl_zero(bits_); }

  bool intersects(TypeSet o) const { return (bits_ & o.bits_) != 0; }
  bool subset_of(TypeSet o) const { return (bits_ & ~o.bits_) == 0; }

  friend constexpr TypeSet operator|(TypeSet a, TypeSet b) { return TypeSet(a.bits_ | b.bits_); }
  friend constexpr TypeSet operator&(TypeSet a, TypeSet b) { return TypeSet(a.bits_ & b.bits_); }
  /// Set difference.
  friend constexpr TypeSet operator-(TypeSet a, TypeSet b) { return TypeSet(a.bits_ & ~b.bits_); }
  friend constexpr bool operator==(TypeSet, TypeSet) = default;

  std::vector<int> labels() const {
    std::vector<int> out;
    for (std::uint64_t b = bits_; b != 0; b &= b - 1) out.push_back(std::countr_zero(b) + 1);
    return out;
  }

  /// Sorted comma-joined labels; the empty set renders as "".
  std::string to_string() const {
    std::string s;
    for (int l : labels()) {
      if (!s.empty()) s += ',';
      s += std::to_string(l);
    }
    return s;
  }

 private:
  static void check_label(int label) {
    if (label < 1 || label > kMaxSamples) throw std::invalid_argument("sample label out of range");
  }

  std::uint64_t bits_ = 0;
};

/// Orders blocks of a partition by smallest label.
struct ByMinLabel {
  bool operator()(TypeSet a, TypeSet b) const {
    if (a.empty() || b.empty()) return a.bits() < b.bits();
    return a.min_label() < b.min_label();
  }
};

}  // namespace argsim
