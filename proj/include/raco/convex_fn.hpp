#ifndef RACO_CONVEX_FN_HPP
#define RACO_CONVEX_FN_HPP

// Small sparse convex functions of the form
//   f(z) = q0(z) + sum_k 1/2 w_k q_k(z)^2
// where every q is "separable quadratic": c + sum a_i z_i + sum b_i z_i^2.
// Convexity needs b >= 0 in q0 and, for squared terms with b != 0, q_k >= 0
// on the region of interest. Every function used by the solvers has this
// shape, so gradients and Hessians are exact and cheap.

#include <algorithm>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace raco {

struct Coef {
  int index = 0;
  double value = 0.0;
};

struct QuadForm {
  double constant = 0.0;
  std::vector<Coef> linear;
  std::vector<Coef> square;

  QuadForm& add_linear(int i, double a) {
    if (a != 0.0) linear.push_back({i, a});
    return *this;
  }
  QuadForm& add_square(int i, double b) {
    if (b != 0.0) square.push_back({i, b});
    return *this;
  }

  double value(const Eigen::VectorXd& z) const {
    double v = constant;
    for (const auto& c : linear) v += c.value * z[c.index];
    for (const auto& c : square) v += c.value * z[c.index] * z[c.index];
    return v;
  }

  // Sparse gradient, duplicates merged. Returns the number of entries used.
  int gradient(const Eigen::VectorXd& z, Coef* out, int cap) const {
    int n = 0;
    auto put = [&](int i, double g) {
      for (int k = 0; k < n; ++k)
        if (out[k].index == i) {
          out[k].value += g;
          return;
        }
      if (n < cap) out[n++] = {i, g};
    };
    for (const auto& c : linear) put(c.index, c.value);
    for (const auto& c : square) put(c.index, 2.0 * c.value * z[c.index]);
    return n;
  }

  void scale(double s) {
    constant *= s;
    for (auto& c : linear) c.value *= s;
    for (auto& c : square) c.value *= s;
  }
};

struct SquaredForm {
  double weight = 0.0;
  QuadForm q;
};

class ConvexFn {
public:
  QuadForm base;
  std::vector<SquaredForm> squares;

  void add_squared(double weight, QuadForm q) {
    if (weight != 0.0) squares.push_back({weight, std::move(q)});
  }

  double value(const Eigen::VectorXd& z) const {
    double v = base.value(z);
    for (const auto& s : squares) {
      const double h = s.q.value(z);
      v += 0.5 * s.weight * h * h;
    }
    return v;
  }

  /// g += scale * grad f(z)
  void add_gradient(const Eigen::VectorXd& z, double scale, Eigen::VectorXd& g) const {
    for (const auto& c : base.linear) g[c.index] += scale * c.value;
    for (const auto& c : base.square) g[c.index] += scale * 2.0 * c.value * z[c.index];
    Coef buf[kMaxTermVars];
    for (const auto& s : squares) {
      const double h = s.q.value(z);
      const int n = s.q.gradient(z, buf, kMaxTermVars);
      for (int k = 0; k < n; ++k) g[buf[k].index] += scale * s.weight * h * buf[k].value;
    }
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& z) const {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(z.size());
    add_gradient(z, 1.0, g);
    return g;
  }

  /// H += scale * hess f(z)
  void add_hessian(const Eigen::VectorXd& z, double scale, Eigen::MatrixXd& H) const {
    for (const auto& c : base.square) H(c.index, c.index) += scale * 2.0 * c.value;
    Coef buf[kMaxTermVars];
    for (const auto& s : squares) {
      const double h = s.q.value(z);
      const int n = s.q.gradient(z, buf, kMaxTermVars);
      const double w = scale * s.weight;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) H(buf[a].index, buf[b].index) += w * buf[a].value * buf[b].value;
      for (const auto& c : s.q.square) H(c.index, c.index) += w * h * 2.0 * c.value;
    }
  }

  /// Multiply the whole function by s > 0.
  void scale(double s) {
    base.scale(s);
    for (auto& sq : squares) sq.weight *= s;
  }

  /// Sorted indices of the variables f depends on.
  std::vector<int> support() const {
    std::vector<int> idx;
    auto take = [&](const QuadForm& q) {
      for (const auto& c : q.linear) idx.push_back(c.index);
      for (const auto& c : q.square) idx.push_back(c.index);
    };
    take(base);
    for (const auto& s : squares) take(s.q);
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    return idx;
  }

  /// Gradient norm at z, used to normalise constraints.
  double gradient_norm(const Eigen::VectorXd& z) const { return gradient(z).norm(); }

  static constexpr int kMaxTermVars = 8;
};

/// Substitute z_i -> s_i z_i, i.e. express f in coordinates scaled by s.
inline void rescale(QuadForm& q, const Eigen::VectorXd& s) {
  for (auto& c : q.linear) c.value *= s[c.index];
  for (auto& c : q.square) c.value *= s[c.index] * s[c.index];
}

inline void rescale(ConvexFn& f, const Eigen::VectorXd& s) {
  rescale(f.base, s);
  for (auto& sq : f.squares) rescale(sq.q, s);
}

} // namespace raco

#endif // RACO_CONVEX_FN_HPP
