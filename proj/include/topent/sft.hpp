#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "topent/errors.hpp"
#include "topent/estimate.hpp"
#include "topent/finite_system.hpp"

namespace topent {

using BigInt = boost::multiprecision::cpp_int;

// Natural log of a positive big integer, exact to double precision.
inline double log_big(const BigInt& x) {
  if (x <= 0) throw std::invalid_argument("log_big needs a positive value");
  if (x <= (BigInt(1) << 52)) return std::log(x.convert_to<double>());
  const int bits = static_cast<int>(boost::multiprecision::msb(x));
  const int drop = bits - 52;
  const double top = BigInt(x >> drop).convert_to<double>();
  return std::log(top) + drop * std::log(2.0);
}

// A shift of finite type over a finite alphabet. Forbidden-word constraints
// are compiled into a suffix automaton (the higher-block presentation plus
// the transient short-prefix states), so every counting question becomes a
// path count. Instances are immutable; the word-count cache is internally
// synchronized.
class SftSpec {
 public:
  struct Automaton {
    int n_letters = 0;
    int memory = 1;  // block length of the presentation (L - 1 for max forbidden length L)
    int start = 0;   // empty-prefix state
    std::vector<std::vector<int>> next;  // [state][letter] -> state or -1
    std::vector<int> depth;              // prefix length represented, capped at memory
    std::vector<std::vector<int>> word;  // representative suffix per state
    std::vector<char> alive;             // admits an infinite continuation
    std::vector<int> block_states;       // states at depth == memory
  };

  static SftSpec from_matrix(std::vector<std::string> alphabet,
                             std::vector<std::vector<int>> transitions) {
    const int k = static_cast<int>(alphabet.size());
    if (k < 1) throw config_error("alphabet must be nonempty");
    if (static_cast<int>(transitions.size()) != k)
      throw config_error("transition matrix must be square of alphabet size");
    for (const auto& row : transitions) {
      if (static_cast<int>(row.size()) != k)
        throw config_error("transition matrix must be square of alphabet size");
      for (int v : row)
        if (v != 0 && v != 1) throw config_error("transition matrix entries must be 0 or 1");
    }
    auto aut = std::make_shared<Automaton>();
    aut->n_letters = k;
    aut->memory = 1;
    aut->next.assign(static_cast<std::size_t>(k) + 1, std::vector<int>(k, -1));
    aut->depth.assign(static_cast<std::size_t>(k) + 1, 1);
    aut->depth[0] = 0;
    aut->word.assign(static_cast<std::size_t>(k) + 1, {});
    for (int a = 0; a < k; ++a) {
      aut->next[0][a] = 1 + a;
      aut->word[1 + a] = {a};
      aut->block_states.push_back(1 + a);
      for (int b = 0; b < k; ++b)
        if (transitions[a][b]) aut->next[1 + a][b] = 1 + b;
    }
    return finish(std::move(alphabet), std::move(aut), false);
  }

  static SftSpec from_forbidden(std::vector<std::string> alphabet,
                                std::vector<std::vector<int>> forbidden,
                                std::size_t state_cap = 200000) {
    const int k = static_cast<int>(alphabet.size());
    if (k < 1) throw config_error("alphabet must be nonempty");
    std::size_t max_len = 1;
    for (const auto& f : forbidden) {
      if (f.empty()) throw config_error("forbidden words must be nonempty");
      for (int a : f)
        if (a < 0 || a >= k) throw config_error("forbidden word uses a symbol outside the alphabet");
      max_len = std::max(max_len, f.size());
    }
    const int memory = std::max<int>(1, static_cast<int>(max_len) - 1);

    auto aut = std::make_shared<Automaton>();
    aut->n_letters = k;
    aut->memory = memory;
    std::map<std::vector<int>, int> ids;
    auto state_of = [&](const std::vector<int>& w) -> int {
      auto it = ids.find(w);
      if (it != ids.end()) return it->second;
      if (aut->next.size() >= state_cap)
        throw resource_error("forbidden-word automaton exceeds the state cap");
      const int id = static_cast<int>(aut->next.size());
      ids.emplace(w, id);
      aut->next.emplace_back(k, -1);
      aut->depth.push_back(static_cast<int>(w.size()));
      aut->word.push_back(w);
      return id;
    };
    auto banned_suffix = [&](const std::vector<int>& w) {
      for (const auto& f : forbidden) {
        if (f.size() > w.size()) continue;
        if (std::equal(f.begin(), f.end(), w.end() - f.size())) return true;
      }
      return false;
    };

    state_of({});
    for (std::size_t q = 0; q < aut->next.size(); ++q) {
      const std::vector<int> w = aut->word[q];
      for (int a = 0; a < k; ++a) {
        std::vector<int> wa = w;
        wa.push_back(a);
        if (banned_suffix(wa)) continue;
        if (static_cast<int>(wa.size()) > memory) wa.erase(wa.begin());
        aut->next[q][a] = state_of(wa);
      }
    }
    for (std::size_t q = 0; q < aut->next.size(); ++q)
      if (aut->depth[q] == memory) aut->block_states.push_back(static_cast<int>(q));
    return finish(std::move(alphabet), std::move(aut), true);
  }

  static SftSpec full_shift(int k) {
    std::vector<std::string> alphabet;
    for (int i = 0; i < k; ++i) alphabet.push_back(std::to_string(i));
    std::vector<std::vector<int>> m(static_cast<std::size_t>(k), std::vector<int>(k, 1));
    return from_matrix(std::move(alphabet), std::move(m));
  }

  int alphabet_size() const { return static_cast<int>(alphabet_.size()); }
  const std::vector<std::string>& alphabet() const { return alphabet_; }
  int memory() const { return aut_->memory; }
  bool built_from_forbidden() const { return forbidden_form_; }
  const Automaton& automaton() const { return *aut_; }

  // Count of admissible words of length n (words free of forbidden patterns,
  // equivalently labelled paths).
  BigInt count_words(int n) const {
    if (n < 1) throw std::invalid_argument("count_words needs n >= 1");
    std::lock_guard<std::mutex> lock(cache_->mu);
    extend_arrive_locked(n);
    BigInt total = 0;
    for (const BigInt& c : cache_->arrive[static_cast<std::size_t>(n)]) total += c;
    return total;
  }

  // Count of length-n prefixes of points of the shift space.
  BigInt count_extendable(int n) const {
    if (n < 1) throw std::invalid_argument("count_extendable needs n >= 1");
    std::lock_guard<std::mutex> lock(cache_->mu);
    extend_arrive_locked(n);
    const auto& row = cache_->arrive[static_cast<std::size_t>(n)];
    BigInt total = 0;
    for (std::size_t q = 0; q < row.size(); ++q)
      if (aut_->alive[q]) total += row[q];
    return total;
  }

  // Number of length-len continuations from `state` that end in an alive
  // state (i.e. extend to points of the space).
  BigInt continuations_to_alive(int state, int len) const {
    if (len < 0) throw std::invalid_argument("negative continuation length");
    std::lock_guard<std::mutex> lock(cache_->mu);
    extend_alive_locked(len);
    return cache_->alive_from[static_cast<std::size_t>(len)][static_cast<std::size_t>(state)];
  }

  // Walk the automaton; returns -1 if the word is inadmissible.
  int state_of_word(const std::vector<int>& w) const {
    int q = aut_->start;
    for (int a : w) {
      if (a < 0 || a >= aut_->n_letters) throw std::invalid_argument("symbol out of range");
      q = aut_->next[q][a];
      if (q < 0) return -1;
    }
    return q;
  }

  bool word_extendable(const std::vector<int>& w) const {
    const int q = state_of_word(w);
    return q >= 0 && aut_->alive[q];
  }

  // The higher-block presentation: a matrix-form SFT over the block alphabet.
  SftSpec block_presentation() const {
    const auto& a = *aut_;
    const int nb = static_cast<int>(a.block_states.size());
    std::vector<int> pos(a.next.size(), -1);
    for (int i = 0; i < nb; ++i) pos[a.block_states[i]] = i;
    std::vector<std::string> names;
    names.reserve(nb);
    for (int q : a.block_states) {
      std::string n;
      for (int letter : a.word[q]) n += alphabet_[letter];
      names.push_back(std::move(n));
    }
    std::vector<std::vector<int>> m(static_cast<std::size_t>(nb), std::vector<int>(nb, 0));
    for (int i = 0; i < nb; ++i)
      for (int letter = 0; letter < a.n_letters; ++letter) {
        const int to = a.next[a.block_states[i]][letter];
        if (to >= 0) m[i][pos[to]] = 1;
      }
    return from_matrix(std::move(names), std::move(m));
  }

  // Dense 0/1 transition counts between block states, for the growth-rate
  // cross-check.
  std::vector<std::vector<double>> block_transition_matrix() const {
    const auto& a = *aut_;
    const int nb = static_cast<int>(a.block_states.size());
    std::vector<int> pos(a.next.size(), -1);
    for (int i = 0; i < nb; ++i) pos[a.block_states[i]] = i;
    std::vector<std::vector<double>> m(static_cast<std::size_t>(nb),
                                       std::vector<double>(nb, 0.0));
    for (int i = 0; i < nb; ++i)
      for (int letter = 0; letter < a.n_letters; ++letter) {
        const int to = a.next[a.block_states[i]][letter];
        if (to >= 0) m[i][pos[to]] += 1.0;
      }
    return m;
  }

 private:
  static SftSpec finish(std::vector<std::string> alphabet, std::shared_ptr<Automaton> aut,
                        bool forbidden_form) {
    // Alive fixpoint: a state survives if some successor survives.
    const std::size_t ns = aut->next.size();
    aut->alive.assign(ns, 1);
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t q = 0; q < ns; ++q) {
        if (!aut->alive[q]) continue;
        bool ok = false;
        for (int a = 0; a < aut->n_letters && !ok; ++a) {
          const int to = aut->next[q][a];
          ok = to >= 0 && aut->alive[static_cast<std::size_t>(to)];
        }
        if (!ok) {
          aut->alive[q] = 0;
          changed = true;
        }
      }
    }
    if (!aut->alive[static_cast<std::size_t>(aut->start)])
      throw config_error("the constraint admits no infinite sequence: the shift space is empty");

    SftSpec s;
    s.alphabet_ = std::move(alphabet);
    s.aut_ = std::move(aut);
    s.forbidden_form_ = forbidden_form;
    s.cache_ = std::make_shared<Cache>();
    return s;
  }

  struct Cache {
    std::mutex mu;
    std::vector<std::vector<BigInt>> arrive;      // arrive[j][q]: paths of j letters from start
    std::vector<std::vector<BigInt>> alive_from;  // alive_from[j][q]: alive-ending continuations
  };

  void extend_arrive_locked(int n) const {
    auto& tbl = cache_->arrive;
    const std::size_t ns = aut_->next.size();
    if (tbl.empty()) {
      tbl.emplace_back(ns, BigInt(0));
      tbl[0][static_cast<std::size_t>(aut_->start)] = 1;
    }
    while (static_cast<int>(tbl.size()) <= n) {
      const auto& prev = tbl.back();
      std::vector<BigInt> row(ns, BigInt(0));
      for (std::size_t q = 0; q < ns; ++q) {
        if (prev[q] == 0) continue;
        for (int a = 0; a < aut_->n_letters; ++a) {
          const int to = aut_->next[q][a];
          if (to >= 0) row[static_cast<std::size_t>(to)] += prev[q];
        }
      }
      tbl.push_back(std::move(row));
    }
  }

  void extend_alive_locked(int n) const {
    auto& tbl = cache_->alive_from;
    const std::size_t ns = aut_->next.size();
    if (tbl.empty()) {
      std::vector<BigInt> row(ns, BigInt(0));
      for (std::size_t q = 0; q < ns; ++q)
        if (aut_->alive[q]) row[q] = 1;
      tbl.push_back(std::move(row));
    }
    while (static_cast<int>(tbl.size()) <= n) {
      const auto& prev = tbl.back();
      std::vector<BigInt> row(ns, BigInt(0));
      for (std::size_t q = 0; q < ns; ++q)
        for (int a = 0; a < aut_->n_letters; ++a) {
          const int to = aut_->next[q][a];
          if (to >= 0) row[q] += prev[static_cast<std::size_t>(to)];
        }
      tbl.push_back(std::move(row));
    }
  }

  std::vector<std::string> alphabet_;
  std::shared_ptr<const Automaton> aut_;
  std::shared_ptr<Cache> cache_;
  bool forbidden_form_ = false;
};

// Dyadic radius epsilon = 2^{-m} on the shift metric d(x, y) = 2^{-j}, j the
// first disagreement index. Under d_n(x, y) = 2^{-max(0, j-n+1)}, separated
// and spanning counts at radius 2^{-m} reduce to depth-(n+m-1) prefix counts.
struct SymbolicScale {
  int m = 1;

  double radius() const { return std::ldexp(1.0, -m); }

  static SymbolicScale from_epsilon(double eps) {
    if (!(eps > 0.0)) throw config_error("radius must be positive");
    const int m = static_cast<int>(std::lround(-std::log2(eps)));
    if (m < 1 || std::fabs(std::ldexp(1.0, -m) - eps) > 1e-12 * eps)
      throw config_error("the symbolic track supports dyadic radii 2^-m with m >= 1 only");
    return SymbolicScale{m};
  }
};

inline void validate(const SymbolicScale& s) {
  if (s.m < 1) throw std::invalid_argument("symbolic scale needs m >= 1");
}

// Finite unions of cylinders (or the full space). Base words are kept
// sorted, deduplicated and prefix-free.
struct SymbolicSubset {
  bool full = true;
  std::vector<std::vector<int>> bases;

  static SymbolicSubset whole() { return SymbolicSubset{}; }

  static SymbolicSubset cylinders(const SftSpec& sft, std::vector<std::vector<int>> words) {
    if (words.empty()) throw std::invalid_argument("a cylinder union needs at least one word");
    for (const auto& w : words) {
      if (w.empty()) return whole();  // the empty word is the whole space
      if (!sft.word_extendable(w)) {
        std::ostringstream os;
        os << "cylinder word [";
        for (int a : w) os << sft.alphabet()[static_cast<std::size_t>(a)];
        os << "] names an empty cylinder";
        throw std::invalid_argument(os.str());
      }
    }
    std::sort(words.begin(), words.end());
    words.erase(std::unique(words.begin(), words.end()), words.end());
    std::vector<std::vector<int>> keep;
    for (const auto& w : words) {
      bool covered = false;
      for (const auto& b : keep)
        if (b.size() <= w.size() && std::equal(b.begin(), b.end(), w.begin())) {
          covered = true;
          break;
        }
      if (!covered) keep.push_back(w);
    }
    SymbolicSubset z;
    z.full = false;
    z.bases = std::move(keep);
    return z;
  }

  std::size_t max_base_length() const {
    std::size_t m = 0;
    for (const auto& b : bases) m = std::max(m, b.size());
    return m;
  }
};

inline SymbolicSubset symbolic_union(const SymbolicSubset& a, const SymbolicSubset& b) {
  if (a.full || b.full) return SymbolicSubset::whole();
  std::vector<std::vector<int>> words = a.bases;
  words.insert(words.end(), b.bases.begin(), b.bases.end());
  std::sort(words.begin(), words.end());
  words.erase(std::unique(words.begin(), words.end()), words.end());
  std::vector<std::vector<int>> keep;
  for (const auto& w : words) {
    bool covered = false;
    for (const auto& kk : keep)
      if (kk.size() <= w.size() && std::equal(kk.begin(), kk.end(), w.begin())) {
        covered = true;
        break;
      }
    if (!covered) keep.push_back(w);
  }
  SymbolicSubset z;
  z.full = false;
  z.bases = std::move(keep);
  return z;
}

namespace detail_sym {

// Shared walk for counting/enumerating depth-`depth` prefix classes whose
// cylinders intersect a cylinder union.
template <class OnSubtree>
inline void walk_classes(const SftSpec& sft, const SymbolicSubset& z, int depth,
                         OnSubtree&& on_subtree) {
  const auto& aut = sft.automaton();
  struct Frame {
    int state;
    int d;
    std::vector<int> word;
    std::vector<int> viable;  // base ids still prefix-compatible, all longer than d
  };
  std::vector<int> all(z.bases.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);

  std::vector<Frame> stack;
  stack.push_back(Frame{aut.start, 0, {}, std::move(all)});
  while (!stack.empty()) {
    Frame f = std::move(stack.back());
    stack.pop_back();
    bool matched = false;
    for (int b : f.viable)
      if (static_cast<int>(z.bases[static_cast<std::size_t>(b)].size()) <= f.d) matched = true;
    if (matched) {
      on_subtree(f.state, f.d, f.word);
      continue;
    }
    if (f.viable.empty()) continue;
    if (f.d == depth) {
      // Some strictly longer base agrees with this word, so the word is a
      // prefix of a nonempty cylinder and its class intersects z.
      on_subtree(f.state, f.d, f.word);
      continue;
    }
    // Descend in reverse letter order so the stack pops ascending.
    for (int a = aut.n_letters - 1; a >= 0; --a) {
      const int to = aut.next[static_cast<std::size_t>(f.state)][a];
      if (to < 0) continue;
      std::vector<int> viable;
      for (int b : f.viable)
        if (z.bases[static_cast<std::size_t>(b)][static_cast<std::size_t>(f.d)] == a)
          viable.push_back(b);
      if (viable.empty()) continue;
      Frame nf;
      nf.state = to;
      nf.d = f.d + 1;
      nf.word = f.word;
      nf.word.push_back(a);
      nf.viable = std::move(viable);
      stack.push_back(std::move(nf));
    }
  }
}

}  // namespace detail_sym

// Number of admissible depth-`depth` words whose cylinder meets z.
inline BigInt class_count(const SftSpec& sft, const SymbolicSubset& z, int depth) {
  if (depth < 1) throw std::invalid_argument("class_count needs depth >= 1");
  if (z.full) return sft.count_extendable(depth);
  BigInt total = 0;
  detail_sym::walk_classes(sft, z, depth, [&](int state, int d, const std::vector<int>&) {
    total += sft.continuations_to_alive(state, depth - d);
  });
  return total;
}

// Explicit class list (sorted); guarded by a cap because it materializes
// words. Used for decomposition validation and tests.
inline std::vector<std::vector<int>> class_words(const SftSpec& sft, const SymbolicSubset& z,
                                                 int depth, std::size_t cap = 1u << 20) {
  if (depth < 1) throw std::invalid_argument("class_words needs depth >= 1");
  const auto& aut = sft.automaton();
  std::vector<std::vector<int>> out;

  // Enumerate extendable continuations of a given prefix.
  auto expand = [&](int state, const std::vector<int>& prefix) {
    struct F {
      int state;
      std::vector<int> word;
    };
    std::vector<F> st;
    st.push_back(F{state, prefix});
    while (!st.empty()) {
      F f = std::move(st.back());
      st.pop_back();
      const int remaining = depth - static_cast<int>(f.word.size());
      if (sft.continuations_to_alive(f.state, remaining) == 0) continue;
      if (remaining == 0) {
        if (out.size() >= cap) throw resource_error("class_words exceeds the enumeration cap");
        out.push_back(f.word);
        continue;
      }
      for (int a = aut.n_letters - 1; a >= 0; --a) {
        const int to = aut.next[static_cast<std::size_t>(f.state)][a];
        if (to < 0) continue;
        F nf;
        nf.state = to;
        nf.word = f.word;
        nf.word.push_back(a);
        st.push_back(std::move(nf));
      }
    }
  };

  if (z.full) {
    expand(aut.start, {});
  } else {
    detail_sym::walk_classes(sft, z, depth,
                             [&](int state, int, const std::vector<int>& w) { expand(state, w); });
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct SymbolicCounts {
  BigInt separated;  // r_n(z, 2^-m)
  BigInt spanning;   // r~_n(z, 2^-m); equals r_n at dyadic radii
};

inline SymbolicCounts symbolic_separated_count(const SftSpec& sft, const SymbolicSubset& z, int n,
                                               SymbolicScale scale) {
  if (n < 1) throw std::invalid_argument("symbolic_separated_count needs n >= 1");
  validate(scale);
  const BigInt c = class_count(sft, z, n + scale.m - 1);
  return SymbolicCounts{c, c};
}

struct PowerResult {
  double log_rate = 0.0;
  bool converged = false;
  int iterations = 0;
};

// Power iteration with 1-norm normalization on a nonnegative matrix.
inline PowerResult power_growth_rate(const std::vector<std::vector<double>>& m,
                                     double tol = 1e-12, int max_iter = 100000) {
  const int n = static_cast<int>(m.size());
  if (n == 0) return PowerResult{0.0, true, 0};
  std::vector<double> v(static_cast<std::size_t>(n), 1.0 / n), w(static_cast<std::size_t>(n));
  double prev = -1.0;
  double rate = 0.0;
  int it = 0;
  for (; it < max_iter; ++it) {
    std::fill(w.begin(), w.end(), 0.0);
    for (int i = 0; i < n; ++i) {
      if (v[static_cast<std::size_t>(i)] == 0.0) continue;
      for (int j = 0; j < n; ++j)
        w[static_cast<std::size_t>(j)] += v[static_cast<std::size_t>(i)] * m[i][j];
    }
    double norm = 0.0;
    for (double x : w) norm += x;
    if (norm == 0.0) return PowerResult{-std::numeric_limits<double>::infinity(), true, it};
    rate = norm;  // v is 1-normalized
    for (int j = 0; j < n; ++j) v[static_cast<std::size_t>(j)] = w[static_cast<std::size_t>(j)] / norm;
    if (it > 0 && std::fabs(rate - prev) < tol) return PowerResult{std::log(rate), true, it + 1};
    prev = rate;
  }
  return PowerResult{std::log(rate), false, it};
}

// Exact entropy of the full shift space: stabilized word-count ratios with a
// mandatory dominant-growth-rate cross-check on the block matrix.
inline EntropyEstimate sft_entropy_exact(const SftSpec& sft, int n_max,
                                         double agree_tol = 1e-9) {
  if (n_max < 8) throw config_error("sft_entropy_exact needs n_max >= 8");
  std::vector<double> logs(static_cast<std::size_t>(n_max) + 1, 0.0);
  for (int n = 1; n <= n_max; ++n) logs[static_cast<std::size_t>(n)] = log_big(sft.count_words(n));

  std::vector<double> ratios;
  for (int n = 1; n < n_max; ++n)
    ratios.push_back(logs[static_cast<std::size_t>(n) + 1] - logs[static_cast<std::size_t>(n)]);

  EntropyEstimate est;
  est.value = ratios.back();
  const std::size_t window = std::min<std::size_t>(5, ratios.size());
  double lo = est.value, hi = est.value;
  for (std::size_t i = ratios.size() - window; i < ratios.size(); ++i) {
    lo = std::min(lo, ratios[i]);
    hi = std::max(hi, ratios[i]);
  }
  est.stats["word_ratio"] = est.value;
  est.stats["ratio_spread"] = hi - lo;
  if (hi - lo > 1e-9) est.note("ratio_no_convergence");

  const PowerResult pm = power_growth_rate(sft.block_transition_matrix());
  est.stats["power_method"] = pm.log_rate;
  est.stats["power_iterations"] = static_cast<double>(pm.iterations);
  if (!pm.converged) est.note("power_method_no_convergence");
  if (std::fabs(est.value - pm.log_rate) > agree_tol) est.note("track_disagreement");

  est.lower = std::min({lo, pm.log_rate});
  est.upper = std::max({hi, pm.log_rate});
  return est;
}

// Product shift: pair alphabet of the factors' block presentations, a
// transition being allowed when both factor transitions are.
inline SftSpec product_sft(const SftSpec& a, const SftSpec& b, std::size_t alphabet_cap = 4096) {
  const SftSpec pa = a.block_presentation();
  const SftSpec pb = b.block_presentation();
  const int ka = pa.alphabet_size();
  const int kb = pb.alphabet_size();
  if (static_cast<std::size_t>(ka) * static_cast<std::size_t>(kb) > alphabet_cap)
    throw resource_error("product alphabet exceeds the cap");
  const auto ma = pa.block_transition_matrix();
  const auto mb = pb.block_transition_matrix();
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(ka) * kb);
  for (int i = 0; i < ka; ++i)
    for (int j = 0; j < kb; ++j) names.push_back(pa.alphabet()[i] + "|" + pb.alphabet()[j]);
  std::vector<std::vector<int>> m(static_cast<std::size_t>(ka) * kb,
                                  std::vector<int>(static_cast<std::size_t>(ka) * kb, 0));
  for (int i = 0; i < ka; ++i)
    for (int j = 0; j < kb; ++j)
      for (int i2 = 0; i2 < ka; ++i2)
        for (int j2 = 0; j2 < kb; ++j2)
          if (ma[i][i2] > 0 && mb[j][j2] > 0) m[i * kb + j][i2 * kb + j2] = 1;
  return SftSpec::from_matrix(std::move(names), std::move(m));
}

// All extendable words of a given length (lexicographic order).
inline std::vector<std::vector<int>> enumerate_extendable_words(const SftSpec& sft, int len,
                                                                std::size_t cap = 1u << 20) {
  return class_words(sft, SymbolicSubset::whole(), len, cap);
}

// Extendable extensions of a base word out to `len` symbols.
inline std::vector<std::vector<int>> extend_base_word(const SftSpec& sft,
                                                      const std::vector<int>& base, int len,
                                                      std::size_t cap = 1u << 20) {
  if (static_cast<int>(base.size()) > len)
    throw std::invalid_argument("extension length shorter than the base word");
  if (static_cast<int>(base.size()) == len)
    return sft.word_extendable(base) ? std::vector<std::vector<int>>{base}
                                     : std::vector<std::vector<int>>{};
  return class_words(sft, SymbolicSubset::cylinders(sft, {base}), len, cap);
}

// Subset of a product shift matching za in the first coordinate and zb in the
// second. Non-full factors must have memory 1 so factor letters and product
// letters line up.
inline SymbolicSubset product_symbolic_subset(const SftSpec& a, const SftSpec& b,
                                              const SymbolicSubset& za, const SymbolicSubset& zb,
                                              std::size_t cap = 1u << 16) {
  if (za.full && zb.full) return SymbolicSubset::whole();
  if ((!za.full && a.memory() != 1) || (!zb.full && b.memory() != 1))
    throw config_error("product cylinders need memory-1 factors");
  const int kb = static_cast<int>(b.block_presentation().alphabet_size());
  std::size_t len = std::max<std::size_t>({za.max_base_length(), zb.max_base_length(), 1});

  auto words_for = [&](const SftSpec& sft, const SymbolicSubset& z) {
    std::vector<std::vector<int>> out;
    if (z.full) return enumerate_extendable_words(sft, static_cast<int>(len), cap);
    for (const auto& bse : z.bases) {
      auto ext = extend_base_word(sft, bse, static_cast<int>(len), cap);
      out.insert(out.end(), ext.begin(), ext.end());
    }
    return out;
  };
  const auto wa = words_for(a, za);
  const auto wb = words_for(b, zb);
  if (wa.size() * wb.size() > cap)
    throw resource_error("product cylinder family exceeds the cap");

  std::vector<std::vector<int>> pairs;
  pairs.reserve(wa.size() * wb.size());
  for (const auto& u : wa)
    for (const auto& v : wb) {
      std::vector<int> w(len);
      for (std::size_t i = 0; i < len; ++i) w[i] = u[i] * kb + v[i];
      pairs.push_back(std::move(w));
    }
  const SftSpec prod = product_sft(a, b);
  return SymbolicSubset::cylinders(prod, std::move(pairs));
}

// Desk-scale stand-in for a shift space: extendable words of a fixed depth,
// with the shift-and-extend map (dropped tail refilled with the smallest
// admissible extendable symbol) and the 2^{-j} prefix metric.
inline FiniteSystem truncate_shift(const SftSpec& sft, int depth,
                                   std::size_t cap = std::size_t{1} << 16) {
  if (depth < 1) throw std::invalid_argument("truncate_shift needs depth >= 1");
  auto words = enumerate_extendable_words(sft, depth, cap);
  if (words.size() > cap) throw resource_error("truncated shift exceeds the point cap");
  std::map<std::vector<int>, int> index;
  for (std::size_t i = 0; i < words.size(); ++i) index[words[i]] = static_cast<int>(i);

  const auto& aut = sft.automaton();
  std::vector<int> step(words.size());
  std::vector<std::string> names(words.size());
  for (std::size_t i = 0; i < words.size(); ++i) {
    std::vector<int> shifted(words[i].begin() + 1, words[i].end());
    int q = sft.state_of_word(shifted);
    int chosen = -1;
    for (int a = 0; a < aut.n_letters; ++a) {
      const int to = aut.next[static_cast<std::size_t>(q)][a];
      if (to >= 0 && aut.alive[static_cast<std::size_t>(to)]) {
        chosen = a;
        break;
      }
    }
    shifted.push_back(chosen);
    step[i] = index.at(shifted);
    std::string nm;
    for (int aa : words[i]) nm += sft.alphabet()[static_cast<std::size_t>(aa)];
    names[i] = std::move(nm);
  }
  return FiniteSystem::from_words(std::move(words), std::move(step), std::move(names));
}

// Members of a truncated shift lying in the cylinder of `base`.
inline SubsetRef shift_cylinder_subset(const FiniteSystem& truncated,
                                       const std::vector<int>& base) {
  const auto* wm = dynamic_cast<const WordMetric*>(truncated.metric().get());
  if (!wm) throw std::invalid_argument("shift_cylinder_subset needs a truncated shift system");
  std::vector<int> members;
  const auto& words = wm->words();
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (base.size() > words[i].size()) continue;
    if (std::equal(base.begin(), base.end(), words[i].begin()))
      members.push_back(static_cast<int>(i));
  }
  return SubsetRef(truncated, std::move(members));
}

}  // namespace topent
