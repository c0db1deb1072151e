#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

// Partial boolean functions f : D -> {0,1}, D a subset of {0,1}^n, stored
// as explicit truth tables. Bitstrings are big-endian text: bit j (1-based)
// of "x1 x2 ... xn" is the j-th character.

namespace advq::boolfn {

class BooleanFunction {
 public:
  BooleanFunction() = default;

  // Validates lengths, duplicates and output values; keeps domain order.
  static BooleanFunction fromEntries(
      int n, const std::vector<std::pair<std::string, int>>& entries);

  int n() const { return n_; }
  const std::vector<std::string>& domain() const { return domain_; }
  std::size_t domainSize() const { return domain_.size(); }

  bool contains(const std::string& x) const;
  int value(const std::string& x) const;  // throws Domain if x not in D
  std::optional<int> tryValue(const std::string& x) const;
  std::size_t domainIndex(const std::string& x) const;

  bool isTotal() const;
  bool isConstant() const;

  // 1-based bit accessor following the j in [n] convention.
  static int bit(const std::string& x, int j) { return x[j - 1] == '1'; }

 private:
  int n_ = 0;
  std::vector<std::string> domain_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<int> values_;
};

// Truth-table file I/O: {"n": int, "entries": [{"x": "...", "f": 0|1}, ...]}.
BooleanFunction load(const std::string& path);
void save(const BooleanFunction& f, const std::string& path);

// (F0, F1) in domain order.
std::pair<std::vector<std::string>, std::vector<std::string>> partition(
    const BooleanFunction& f);

// f on n bits composed with g on m bits: (f.g)(x) applies g to each of the
// n consecutive m-bit blocks of x. Both functions must be total; the result
// is total on nm bits. Guarded by a dimension cap.
BooleanFunction compose(const BooleanFunction& f, const BooleanFunction& g,
                        int bitCap = 12);

// Canonical test functions.
BooleanFunction ident1();
BooleanFunction orN(int n);
BooleanFunction andN(int n);
BooleanFunction parityN(int n);
BooleanFunction maj3();

// All bitstrings of length n in lexicographic (counting) order.
std::vector<std::string> allBitstrings(int n);

} // namespace advq::boolfn
