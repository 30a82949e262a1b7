#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "topent/errors.hpp"

namespace topent {

// Point-indexed metric. Backends are immutable and shared, so derived systems
// (products, extensions) reference their factors' metrics without copying.
class MetricBackend {
 public:
  virtual ~MetricBackend() = default;
  virtual double dist(int i, int j) const = 0;
};

// Explicit pairwise distances, packed upper triangle (i < j), row-major.
class TableMetric final : public MetricBackend {
 public:
  TableMetric(int n_points, std::vector<double> upper_triangle)
      : n_(n_points), tri_(std::move(upper_triangle)) {
    const std::size_t want = static_cast<std::size_t>(n_) * (n_ - 1) / 2;
    if (tri_.size() != want) {
      std::ostringstream os;
      os << "metric table has " << tri_.size() << " entries, expected " << want;
      throw config_error(os.str());
    }
    for (double d : tri_) {
      if (!std::isfinite(d) || d < 0.0)
        throw config_error("metric table entries must be finite and nonnegative");
    }
  }

  double dist(int i, int j) const override {
    if (i == j) return 0.0;
    if (i > j) std::swap(i, j);
    return tri_[static_cast<std::size_t>(i) * (2 * n_ - i - 1) / 2 + (j - i - 1)];
  }

 private:
  int n_;
  std::vector<double> tri_;
};

class CoordMetric final : public MetricBackend {
 public:
  enum class Norm { chebyshev, euclidean };

  CoordMetric(std::vector<std::vector<double>> coords, Norm norm)
      : pts_(std::move(coords)), norm_(norm) {
    if (pts_.empty()) throw config_error("coordinate metric needs at least one point");
    const std::size_t dim = pts_.front().size();
    for (const auto& p : pts_) {
      if (p.size() != dim) throw config_error("coordinate vectors must share one dimension");
      for (double v : p)
        if (!std::isfinite(v)) throw config_error("coordinates must be finite");
    }
  }

  double dist(int i, int j) const override {
    const auto& a = pts_[i];
    const auto& b = pts_[j];
    if (norm_ == Norm::chebyshev) {
      double m = 0.0;
      for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::fabs(a[k] - b[k]));
      return m;
    }
    double q = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      const double d = a[k] - b[k];
      q += d * d;
    }
    return std::sqrt(q);
  }

 private:
  std::vector<std::vector<double>> pts_;
  Norm norm_;
};

// Shift-space truncations: d(x, y) = 2^{-j} where j is the first index at
// which the symbol sequences disagree.
class WordMetric final : public MetricBackend {
 public:
  explicit WordMetric(std::vector<std::vector<int>> words) : words_(std::move(words)) {
    if (words_.empty()) throw config_error("word metric needs at least one word");
    for (const auto& w : words_)
      if (w.size() != words_.front().size()) throw config_error("words must share one length");
  }

  double dist(int i, int j) const override {
    const auto& a = words_[i];
    const auto& b = words_[j];
    for (std::size_t k = 0; k < a.size(); ++k)
      if (a[k] != b[k]) return std::ldexp(1.0, -static_cast<int>(k));
    return 0.0;
  }

  const std::vector<std::vector<int>>& words() const { return words_; }

 private:
  std::vector<std::vector<int>> words_;
};

// Max of the factor distances; index layout is a-major (i = ia * |B| + ib).
class ProductMetric final : public MetricBackend {
 public:
  ProductMetric(std::shared_ptr<const MetricBackend> a, std::shared_ptr<const MetricBackend> b,
                int b_size)
      : a_(std::move(a)), b_(std::move(b)), bsize_(b_size) {}

  double dist(int i, int j) const override {
    return std::max(a_->dist(i / bsize_, j / bsize_), b_->dist(i % bsize_, j % bsize_));
  }

 private:
  std::shared_ptr<const MetricBackend> a_, b_;
  int bsize_;
};

// A finite point set with a metric and a total self-map. Immutable after
// construction; handles share the underlying state and are cheap to copy.
class FiniteSystem {
 private:
  struct Impl;

 public:
  struct ProductInfo {
    std::shared_ptr<const Impl> a, b;
    int a_size = 0, b_size = 0;
  };

  FiniteSystem() = default;

  static FiniteSystem from_table(std::vector<std::string> names, std::vector<double> upper_triangle,
                                 std::vector<int> step, bool validate_triangle = true) {
    const int n = static_cast<int>(names.size());
    auto metric = std::make_shared<TableMetric>(n, std::move(upper_triangle));
    if (validate_triangle) check_triangle(*metric, names);
    return make(std::move(names), std::move(step), std::move(metric));
  }

  static FiniteSystem from_coords(std::vector<std::string> names,
                                  std::vector<std::vector<double>> coords, CoordMetric::Norm norm,
                                  std::vector<int> step) {
    if (coords.size() != names.size()) throw config_error("one coordinate vector per point required");
    auto metric = std::make_shared<CoordMetric>(std::move(coords), norm);
    return make(std::move(names), std::move(step), std::move(metric));
  }

  static FiniteSystem from_words(std::vector<std::vector<int>> words, std::vector<int> step,
                                 std::vector<std::string> names) {
    if (words.size() != names.size()) throw config_error("one word per point required");
    auto metric = std::make_shared<WordMetric>(std::move(words));
    return make(std::move(names), std::move(step), std::move(metric));
  }

  bool valid() const { return impl_ != nullptr; }
  int size() const { return static_cast<int>(impl_->names.size()); }
  const std::string& name(int i) const { return impl_->names[check_index(i)]; }
  const std::vector<std::string>& names() const { return impl_->names; }
  int step(int i) const { return impl_->step[check_index(i)]; }

  int iterate(int i, int k) const {
    int p = check_index(i);
    for (int t = 0; t < k; ++t) p = impl_->step[p];
    return p;
  }

  double dist(int i, int j) const { return impl_->metric->dist(check_index(i), check_index(j)); }

  // O(P^2); intended for small systems and diagnostics.
  double diameter() const {
    double m = 0.0;
    for (int i = 0; i < size(); ++i)
      for (int j = i + 1; j < size(); ++j) m = std::max(m, dist(i, j));
    return m;
  }

  double min_positive_distance() const {
    double m = std::numeric_limits<double>::infinity();
    for (int i = 0; i < size(); ++i)
      for (int j = i + 1; j < size(); ++j) {
        const double d = dist(i, j);
        if (d > 0.0) m = std::min(m, d);
      }
    return m;
  }

  std::shared_ptr<const MetricBackend> metric() const { return impl_->metric; }
  bool same_object(const FiniteSystem& o) const { return impl_ == o.impl_; }

  const ProductInfo* product_info() const { return impl_->product.get(); }

  FiniteSystem product_factor_a() const {
    const auto* info = product_info();
    if (!info) throw std::invalid_argument("not a product system");
    return from_impl(info->a);
  }
  FiniteSystem product_factor_b() const {
    const auto* info = product_info();
    if (!info) throw std::invalid_argument("not a product system");
    return from_impl(info->b);
  }

  static FiniteSystem make_product(std::vector<std::string> names, std::vector<int> step,
                                   std::shared_ptr<const MetricBackend> metric,
                                   const FiniteSystem& a, const FiniteSystem& b) {
    FiniteSystem s = make(std::move(names), std::move(step), std::move(metric));
    auto info = std::make_shared<ProductInfo>();
    info->a = a.impl_;
    info->b = b.impl_;
    info->a_size = a.size();
    info->b_size = b.size();
    const_cast<Impl*>(s.impl_.get())->product = std::move(info);
    return s;
  }

  static FiniteSystem make_custom(std::vector<std::string> names, std::vector<int> step,
                                  std::shared_ptr<const MetricBackend> metric) {
    return make(std::move(names), std::move(step), std::move(metric));
  }

 private:
  struct Impl {
    std::vector<std::string> names;
    std::vector<int> step;
    std::shared_ptr<const MetricBackend> metric;
    std::shared_ptr<const ProductInfo> product;
  };

  static FiniteSystem from_impl(std::shared_ptr<const Impl> impl) {
    FiniteSystem s;
    s.impl_ = std::move(impl);
    return s;
  }

  static FiniteSystem make(std::vector<std::string> names, std::vector<int> step,
                           std::shared_ptr<const MetricBackend> metric) {
    if (names.empty()) throw config_error("a system needs at least one point");
    if (step.size() != names.size()) throw config_error("map must assign an image to every point");
    for (int t : step)
      if (t < 0 || t >= static_cast<int>(names.size()))
        throw config_error("map image out of range: the map must be total");
    auto impl = std::make_shared<Impl>();
    impl->names = std::move(names);
    impl->step = std::move(step);
    impl->metric = std::move(metric);
    FiniteSystem s;
    s.impl_ = std::move(impl);
    return s;
  }

  static void check_triangle(const TableMetric& m, const std::vector<std::string>& names) {
    const int n = static_cast<int>(names.size());
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        for (int k = 0; k < n; ++k) {
          if (k == i || k == j) continue;
          const double lhs = m.dist(i, k);
          const double rhs = m.dist(i, j) + m.dist(j, k);
          if (lhs > rhs) {
            std::ostringstream os;
            os << "metric table violates the triangle inequality: d(" << names[i] << ","
               << names[k] << ")=" << lhs << " > d(" << names[i] << "," << names[j] << ")+d("
               << names[j] << "," << names[k] << ")=" << rhs;
            throw config_error(os.str());
          }
        }
      }
  }

  int check_index(int i) const {
    if (!impl_ || i < 0 || i >= static_cast<int>(impl_->names.size()))
      throw std::invalid_argument("point index out of range");
    return i;
  }

  std::shared_ptr<const Impl> impl_;
};

// A subset of a system's points, kept sorted and deduplicated.
class SubsetRef {
 public:
  SubsetRef() = default;

  SubsetRef(FiniteSystem sys, std::vector<int> members) : sys_(std::move(sys)) {
    if (!sys_.valid()) throw std::invalid_argument("subset needs a valid system");
    std::sort(members.begin(), members.end());
    members.erase(std::unique(members.begin(), members.end()), members.end());
    for (int p : members)
      if (p < 0 || p >= sys_.size()) throw std::invalid_argument("subset member out of range");
    members_ = std::move(members);
  }

  static SubsetRef whole(FiniteSystem sys) {
    std::vector<int> all(static_cast<std::size_t>(sys.size()));
    for (int i = 0; i < static_cast<int>(all.size()); ++i) all[i] = i;
    return SubsetRef(std::move(sys), std::move(all));
  }

  const FiniteSystem& system() const { return sys_; }
  const std::vector<int>& members() const { return members_; }
  int size() const { return static_cast<int>(members_.size()); }
  bool empty() const { return members_.empty(); }
  bool contains(int p) const { return std::binary_search(members_.begin(), members_.end(), p); }
  bool same_system(const SubsetRef& o) const { return sys_.same_object(o.sys_); }

  bool is_subset_of(const SubsetRef& o) const {
    if (!same_system(o)) return false;
    return std::includes(o.members_.begin(), o.members_.end(), members_.begin(), members_.end());
  }

 private:
  FiniteSystem sys_;
  std::vector<int> members_;
};

struct BowenBallSpec {
  int center = 0;
  int order = 1;       // n
  double radius = 1.0; // epsilon
  bool closed = false;
};

inline void validate(const BowenBallSpec& spec) {
  if (spec.order < 1) throw std::invalid_argument("ball order must be >= 1");
  if (!(spec.radius > 0.0)) throw std::invalid_argument("ball radius must be positive");
}

// d_n(x, y) = max over the first n iterates of the base distance.
inline double bowen_distance(const FiniteSystem& sys, int x, int y, int n) {
  if (n < 1) throw std::invalid_argument("bowen_distance needs order n >= 1");
  double m = 0.0;
  for (int k = 0; k < n; ++k) {
    m = std::max(m, sys.dist(x, y));
    x = sys.step(x);
    y = sys.step(y);
  }
  return m;
}

// Early-exit membership predicate: closed checks d_n <= eps, open d_n < eps.
inline bool bowen_within(const FiniteSystem& sys, int x, int y, int n, double eps, bool closed) {
  for (int k = 0; k < n; ++k) {
    const double d = sys.dist(x, y);
    if (closed ? d > eps : d >= eps) return false;
    x = sys.step(x);
    y = sys.step(y);
  }
  return true;
}

inline std::vector<int> bowen_ball(const SubsetRef& domain, const BowenBallSpec& spec) {
  validate(spec);
  if (domain.empty()) throw std::invalid_argument("bowen_ball needs a nonempty domain");
  if (spec.center < 0 || spec.center >= domain.system().size())
    throw std::invalid_argument("ball center out of range");
  std::vector<int> out;
  for (int p : domain.members())
    if (bowen_within(domain.system(), spec.center, p, spec.order, spec.radius, spec.closed))
      out.push_back(p);
  return out;
}

inline SubsetRef union_subset(const SubsetRef& a, const SubsetRef& b) {
  if (!a.same_system(b)) throw std::invalid_argument("union_subset needs subsets of one system");
  std::vector<int> m = a.members();
  m.insert(m.end(), b.members().begin(), b.members().end());
  return SubsetRef(a.system(), std::move(m));
}

inline FiniteSystem product_system(const FiniteSystem& a, const FiniteSystem& b,
                                   std::size_t cap = std::size_t{1} << 20) {
  const std::size_t total = static_cast<std::size_t>(a.size()) * static_cast<std::size_t>(b.size());
  if (total > cap) {
    std::ostringstream os;
    os << "product size " << total << " exceeds cap " << cap;
    throw resource_error(os.str());
  }
  std::vector<std::string> names;
  std::vector<int> step;
  names.reserve(total);
  step.reserve(total);
  for (int i = 0; i < a.size(); ++i)
    for (int j = 0; j < b.size(); ++j) {
      names.push_back(a.name(i) + "|" + b.name(j));
      step.push_back(a.step(i) * b.size() + b.step(j));
    }
  auto metric = std::make_shared<ProductMetric>(a.metric(), b.metric(), b.size());
  return FiniteSystem::make_product(std::move(names), std::move(step), std::move(metric), a, b);
}

inline int product_index(const FiniteSystem& prod, int ia, int ib) {
  const auto* info = prod.product_info();
  if (!info) throw std::invalid_argument("not a product system");
  return ia * info->b_size + ib;
}

inline std::pair<int, int> factor_indices(const FiniteSystem& prod, int i) {
  const auto* info = prod.product_info();
  if (!info) throw std::invalid_argument("not a product system");
  return {i / info->b_size, i % info->b_size};
}

inline SubsetRef product_subset(const FiniteSystem& prod, const SubsetRef& z1,
                                const SubsetRef& z2) {
  const auto* info = prod.product_info();
  if (!info) throw std::invalid_argument("product_subset needs a product system");
  if (!z1.system().same_object(prod.product_factor_a()) ||
      !z2.system().same_object(prod.product_factor_b()))
    throw std::invalid_argument("product_subset factors do not match the product's factors");
  std::vector<int> members;
  members.reserve(static_cast<std::size_t>(z1.size()) * z2.size());
  for (int p : z1.members())
    for (int q : z2.members()) members.push_back(p * info->b_size + q);
  return SubsetRef(prod, std::move(members));
}

struct ExtensionResult {
  FiniteSystem system;
  SubsetRef embedded;  // the copy of the base system sitting at fiber value 1
};

// The skew extension Z = X x {1, 1/2, ..., 1/depth, 0}: points climb the
// fiber toward 1, the base map acts only at fiber value 1, and 0 is fixed.
inline ExtensionResult example_extension(const FiniteSystem& base, int depth,
                                         std::size_t cap = std::size_t{1} << 20) {
  if (depth < 1) throw std::invalid_argument("example_extension needs depth >= 1");
  const int fibers = depth + 1;
  const std::size_t total = static_cast<std::size_t>(base.size()) * fibers;
  if (total > cap) {
    std::ostringstream os;
    os << "extension size " << total << " exceeds cap " << cap;
    throw resource_error(os.str());
  }

  std::vector<std::vector<double>> fiber_coords(fibers);
  std::vector<std::string> fiber_labels(fibers);
  for (int f = 0; f < fibers; ++f) {
    const double v = (f < depth) ? 1.0 / (f + 1) : 0.0;
    fiber_coords[f] = {v};
    if (f == 0)
      fiber_labels[f] = "1";
    else if (f < depth)
      fiber_labels[f] = "1/" + std::to_string(f + 1);
    else
      fiber_labels[f] = "0";
  }

  std::vector<std::string> names;
  std::vector<int> step;
  names.reserve(total);
  step.reserve(total);
  for (int i = 0; i < base.size(); ++i)
    for (int f = 0; f < fibers; ++f) {
      names.push_back(base.name(i) + "@" + fiber_labels[f]);
      int ti, tf;
      if (f == 0) {
        ti = base.step(i);
        tf = 0;
      } else if (f < depth) {
        ti = i;
        tf = f - 1;
      } else {
        ti = i;
        tf = depth;
      }
      step.push_back(ti * fibers + tf);
    }

  auto fiber_metric =
      std::make_shared<CoordMetric>(std::move(fiber_coords), CoordMetric::Norm::euclidean);
  auto metric = std::make_shared<ProductMetric>(base.metric(), std::move(fiber_metric), fibers);
  FiniteSystem sys =
      FiniteSystem::make_custom(std::move(names), std::move(step), std::move(metric));

  std::vector<int> embedded(static_cast<std::size_t>(base.size()));
  for (int i = 0; i < base.size(); ++i) embedded[i] = i * fibers;
  SubsetRef emb(sys, std::move(embedded));
  return ExtensionResult{std::move(sys), std::move(emb)};
}

}  // namespace topent
