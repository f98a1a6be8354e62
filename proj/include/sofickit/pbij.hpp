#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "sofickit/errors.hpp"
#include "sofickit/rational.hpp"

namespace sofickit {

// A partial bijection of {0..n-1}: an injective partial self-map, the element
// type of the inverse monoid [[n]]. map()[i] is the image of i or kUndef.
// Immutable after construction.
class PartialBijection {
public:
  static constexpr int kUndef = -1;

  PartialBijection() : n_(0) {}

  PartialBijection(int n, std::vector<int> map) : n_(n), map_(std::move(map)) {
    if (static_cast<int>(map_.size()) != n_)
      throw SizeMismatch("map length != ground size");
    std::vector<char> seen(static_cast<std::size_t>(n_), 0);
    for (int i = 0; i < n_; ++i) {
      int j = map_[i];
      if (j == kUndef) continue;
      if (j < 0 || j >= n_) throw IndexOutOfRange("target outside ground set");
      if (seen[j]) throw NotInjective("target " + std::to_string(j) + " hit twice");
      seen[j] = 1;
    }
  }

  static PartialBijection identity(int n) {
    std::vector<int> m(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) m[i] = i;
    return PartialBijection(n, std::move(m));
  }

  static PartialBijection empty(int n) {
    return PartialBijection(n, std::vector<int>(static_cast<std::size_t>(n), kUndef));
  }

  // The idempotent 1_A.
  static PartialBijection partial_identity(int n, const std::vector<int>& points) {
    std::vector<int> m(static_cast<std::size_t>(n), kUndef);
    for (int p : points) {
      if (p < 0 || p >= n) throw IndexOutOfRange("point outside ground set");
      m[p] = p;
    }
    return PartialBijection(n, std::move(m));
  }

  static PartialBijection from_pairs(int n, const std::vector<std::pair<int, int>>& pairs) {
    std::vector<int> m(static_cast<std::size_t>(n), kUndef);
    for (auto [i, j] : pairs) {
      if (i < 0 || i >= n) throw IndexOutOfRange("source outside ground set");
      if (m[i] != kUndef) throw NotInjective("source " + std::to_string(i) + " listed twice");
      m[i] = j;
    }
    return PartialBijection(n, std::move(m));
  }

  // E_{j,i}: the one-point map i -> j.
  static PartialBijection matrix_unit(int n, int j, int i) {
    if (i < 0 || i >= n || j < 0 || j >= n) throw IndexOutOfRange("matrix unit index");
    std::vector<int> m(static_cast<std::size_t>(n), kUndef);
    m[i] = j;
    return PartialBijection(n, std::move(m));
  }

  int n() const { return n_; }
  bool defined(int i) const { return map_[i] != kUndef; }
  int operator[](int i) const { return map_[i]; }
  const std::vector<int>& map() const { return map_; }

  int dom_size() const {
    int c = 0;
    for (int v : map_) c += (v != kUndef);
    return c;
  }

  bool is_full() const { return dom_size() == n_; }

  bool is_idempotent() const {
    for (int i = 0; i < n_; ++i)
      if (map_[i] != kUndef && map_[i] != i) return false;
    return true;
  }

  friend bool operator==(const PartialBijection& a, const PartialBijection& b) {
    return a.n_ == b.n_ && a.map_ == b.map_;
  }
  friend bool operator!=(const PartialBijection& a, const PartialBijection& b) {
    return !(a == b);
  }
  friend bool operator<(const PartialBijection& a, const PartialBijection& b) {
    if (a.n_ != b.n_) return a.n_ < b.n_;
    return a.map_ < b.map_;
  }

private:
  int n_;
  std::vector<int> map_;
};

// (hg)(x) = h(g(x)); dom(hg) = g^{-1}(ran g \cap dom h).
inline PartialBijection compose(const PartialBijection& h, const PartialBijection& g) {
  if (h.n() != g.n()) throw SizeMismatch("compose on different ground sizes");
  int n = g.n();
  std::vector<int> m(static_cast<std::size_t>(n), PartialBijection::kUndef);
  for (int x = 0; x < n; ++x) {
    if (!g.defined(x)) continue;
    int y = g[x];
    if (h.defined(y)) m[x] = h[y];
  }
  return PartialBijection(n, std::move(m));
}

inline PartialBijection operator*(const PartialBijection& h, const PartialBijection& g) {
  return compose(h, g);
}

inline PartialBijection inverse(const PartialBijection& f) {
  int n = f.n();
  std::vector<int> m(static_cast<std::size_t>(n), PartialBijection::kUndef);
  for (int x = 0; x < n; ++x)
    if (f.defined(x)) m[f[x]] = x;
  return PartialBijection(n, std::move(m));
}

// f v g, defined when f^{-1}g and fg^{-1} are both idempotents. Domain
// agreement alone does not force injectivity of the union, so the idempotent
// form is the authoritative precondition.
inline PartialBijection join(const PartialBijection& f, const PartialBijection& g) {
  if (f.n() != g.n()) throw SizeMismatch("join on different ground sizes");
  if (!compose(inverse(f), g).is_idempotent() || !compose(f, inverse(g)).is_idempotent())
    throw JoinConflict("f^-1 g or f g^-1 not idempotent");
  int n = f.n();
  std::vector<int> m(static_cast<std::size_t>(n), PartialBijection::kUndef);
  for (int x = 0; x < n; ++x) {
    if (f.defined(x)) m[x] = f[x];
    else if (g.defined(x)) m[x] = g[x];
  }
  return PartialBijection(n, std::move(m));
}

struct Parts {
  std::vector<int> dom;
  std::vector<int> ran;
  std::vector<int> fix;
  std::vector<int> supp;  // (dom u ran) \ fix
};

inline Parts parts(const PartialBijection& f) {
  Parts p;
  std::vector<char> in_ran(static_cast<std::size_t>(f.n()), 0);
  std::vector<char> in_fix(static_cast<std::size_t>(f.n()), 0);
  for (int x = 0; x < f.n(); ++x) {
    if (!f.defined(x)) continue;
    p.dom.push_back(x);
    in_ran[f[x]] = 1;
    if (f[x] == x) { p.fix.push_back(x); in_fix[x] = 1; }
  }
  for (int x = 0; x < f.n(); ++x)
    if (in_ran[x]) p.ran.push_back(x);
  for (int x = 0; x < f.n(); ++x)
    if ((f.defined(x) || in_ran[x]) && !in_fix[x]) p.supp.push_back(x);
  return p;
}

inline int fix_count(const PartialBijection& f) {
  int c = 0;
  for (int x = 0; x < f.n(); ++x)
    if (f.defined(x) && f[x] == x) ++c;
  return c;
}

// tr f = mu_#{x : fx = x}
inline Rational trace(const PartialBijection& f) {
  if (f.n() == 0) throw SizeMismatch("trace on empty ground set");
  return Rational(fix_count(f), f.n());
}

// d_#(f,g) = mu(dom f symdiff dom g) + mu{x in both doms : fx != gx}
inline Rational hamming_distance(const PartialBijection& f, const PartialBijection& g) {
  if (f.n() != g.n()) throw SizeMismatch("distance on different ground sizes");
  if (f.n() == 0) throw SizeMismatch("distance on empty ground set");
  int bad = 0;
  for (int x = 0; x < f.n(); ++x) {
    bool df = f.defined(x), dg = g.defined(x);
    if (df != dg) ++bad;
    else if (df && f[x] != g[x]) ++bad;
  }
  return Rational(bad, f.n());
}

// (f tensor g)(i,j) = (f(i), g(j)), pairs flattened row-major: (i,j) -> i*g.n + j.
inline PartialBijection tensor(const PartialBijection& f, const PartialBijection& g) {
  int n = f.n(), m = g.n();
  std::vector<int> out(static_cast<std::size_t>(n) * m, PartialBijection::kUndef);
  for (int i = 0; i < n; ++i) {
    if (!f.defined(i)) continue;
    for (int j = 0; j < m; ++j) {
      if (!g.defined(j)) continue;
      out[static_cast<std::size_t>(i) * m + j] = f[i] * m + g[j];
    }
  }
  return PartialBijection(n * m, std::move(out));
}

// First block acts as f, second as g shifted by f.n.
inline PartialBijection direct_sum(const PartialBijection& f, const PartialBijection& g) {
  int n = f.n(), m = g.n();
  std::vector<int> out(static_cast<std::size_t>(n) + m, PartialBijection::kUndef);
  for (int i = 0; i < n; ++i)
    if (f.defined(i)) out[i] = f[i];
  for (int j = 0; j < m; ++j)
    if (g.defined(j)) out[n + j] = g[j] + n;
  return PartialBijection(n + m, std::move(out));
}

// Embed [[n]] into [[p]] for p >= n: with p = q*n + r, f -> (f tensor 1_[q]) + 1_[r].
// For p > n the distance between any two images differs from the original by
// at most n/(p-n); for n | p it is preserved exactly.
inline PartialBijection pad_embed(const PartialBijection& f, int p) {
  int n = f.n();
  if (p < n) throw SizeMismatch("pad target smaller than ground set");
  if (n == 0) return PartialBijection::identity(p);
  int q = p / n, r = p % n;
  return direct_sum(tensor(f, PartialBijection::identity(q)),
                    PartialBijection::identity(r));
}

// Embed each f_j in [[n_j]] into [[L]], L = lcm of the sizes, via tensoring
// with an identity. Distances and traces are preserved exactly.
inline std::vector<PartialBijection> lift_common(const std::vector<PartialBijection>& fs) {
  std::vector<PartialBijection> out;
  if (fs.empty()) return out;
  std::int64_t L = 1;
  for (const auto& f : fs) {
    if (f.n() == 0) throw SizeMismatch("lift of an element on empty ground set");
    L = lcm64(L, f.n());
  }
  out.reserve(fs.size());
  for (const auto& f : fs)
    out.push_back(tensor(f, PartialBijection::identity(static_cast<int>(L / f.n()))));
  return out;
}

struct PbijHash {
  std::size_t operator()(const PartialBijection& f) const {
    std::size_t h = static_cast<std::size_t>(f.n()) * 0x9E3779B97F4A7C15ULL;
    for (int v : f.map())
      h = (h ^ static_cast<std::size_t>(v + 2)) * 0x100000001B3ULL;
    return h;
  }
};

}  // namespace sofickit
