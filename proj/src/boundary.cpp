#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>

#include "hybridlab/stability.hpp"

namespace hybridlab {

namespace {

using Point3 = std::array<double, 3>;  // normalized (tau, p, omega) in [0, 1]^3

class BoxMap {
 public:
  explicit BoxMap(const SearchBox& b)
      : lo_{b.tau_min, b.p_min, b.omega_min},
        span_{b.tau_max - b.tau_min, b.p_max - b.p_min, b.omega_max - b.omega_min} {}

  Point3 to_physical(const Point3& u) const {
    return {lo_[0] + u[0] * span_[0], lo_[1] + u[1] * span_[1], lo_[2] + u[2] * span_[2]};
  }

 private:
  Point3 lo_, span_;
};

// D(i omega) scaled by the Hadamard bound so that values are comparable
// across the box.
Complex scaled_char(const HybridFamily& family, const Point3& x) {
  const auto model = family(x[0], x[1]);
  const Complex d = char_fn(model, Complex(0.0, x[2]));
  const double r = normalized_char_residual(model, x[2]);
  const double mag = std::abs(d);
  return mag > 0.0 ? d * (r / mag) : d;
}

struct SignPair {
  bool re, im;
};

SignPair signs(Complex v) { return {v.real() >= 0.0, v.imag() >= 0.0}; }

bool brackets(const std::array<SignPair, 8>& corner) {
  bool re_pos = false, re_neg = false, im_pos = false, im_neg = false;
  for (const auto& s : corner) {
    (s.re ? re_pos : re_neg) = true;
    (s.im ? im_pos : im_neg) = true;
  }
  return re_pos && re_neg && im_pos && im_neg;
}

struct Cell {
  Point3 lo, size;
};

class Bisector {
 public:
  Bisector(const HybridFamily& family, const BoxMap& map, int depth)
      : family_(family), map_(map), depth_(depth) {}

  void refine(const Cell& cell, int level, std::vector<Cell>& out) {
    std::array<SignPair, 8> corner{};
    for (int c = 0; c < 8; ++c) {
      Point3 u = cell.lo;
      for (int a = 0; a < 3; ++a)
        if (c & (1 << a)) u[a] += cell.size[a];
      corner[c] = signs(family_char(u));
    }
    if (!brackets(corner)) return;
    if (level >= depth_) {
      out.push_back(cell);
      return;
    }
    const Point3 half{cell.size[0] / 2, cell.size[1] / 2, cell.size[2] / 2};
    for (int c = 0; c < 8; ++c) {
      Cell child{cell.lo, half};
      for (int a = 0; a < 3; ++a)
        if (c & (1 << a)) child.lo[a] += half[a];
      refine(child, level + 1, out);
    }
  }

  Complex family_char(const Point3& u) const {
    const Point3 x = map_.to_physical(u);
    return char_fn(family_(x[0], x[1]), Complex(0.0, x[2]));
  }

 private:
  const HybridFamily& family_;
  const BoxMap& map_;
  int depth_;
};

// Minimum-norm Gauss-Newton on (Re, Im) of the scaled characteristic
// function over all three normalized coordinates.
bool polish(const HybridFamily& family, const BoxMap& map, Point3& u, double tolerance) {
  auto eval = [&](const Point3& v) -> Eigen::Vector2d {
    try {
      const Complex d = scaled_char(family, map.to_physical(v));
      return {d.real(), d.imag()};
    } catch (const ValidationError&) {
      // stepped outside the family's parameter domain
      return Eigen::Vector2d::Constant(std::numeric_limits<double>::quiet_NaN());
    }
  };
  constexpr double kFd = 1e-7;
  Eigen::Vector2d r = eval(u);
  for (int it = 0; it < 40; ++it) {
    if (r.norm() <= tolerance) return true;
    Eigen::Matrix<double, 2, 3> J;
    for (int a = 0; a < 3; ++a) {
      Point3 v = u;
      v[a] += kFd;
      J.col(a) = (eval(v) - r) / kFd;
    }
    const Eigen::Vector3d step = J.completeOrthogonalDecomposition().solve(-r);
    if (!step.allFinite()) return false;
    double damping = 1.0;
    bool improved = false;
    for (int ls = 0; ls < 8; ++ls, damping *= 0.5) {
      Point3 v{u[0] + damping * step(0), u[1] + damping * step(1), u[2] + damping * step(2)};
      const Eigen::Vector2d rv = eval(v);
      if (rv.allFinite() && rv.norm() < r.norm()) {
        u = v;
        r = rv;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  return r.norm() <= tolerance;
}

double distance(const Point3& a, const Point3& b) {
  double s = 0.0;
  for (int i = 0; i < 3; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

std::vector<BoundaryCurve> find_oscillatory_boundaries(const HybridFamily& family,
                                                       const SearchBox& box,
                                                       const BisectionSettings& settings) {
  for (double v : {box.tau_min, box.tau_max, box.p_min, box.p_max, box.omega_min, box.omega_max})
    require(std::isfinite(v), "search box must be finite");
  require(box.tau_max > box.tau_min && box.p_max > box.p_min && box.omega_max > box.omega_min,
          "search box must have positive extent");
  require(settings.seed_tau >= 2 && settings.seed_p >= 2 && settings.seed_omega >= 2,
          "bisection needs at least 2 seed cells per axis");
  require(settings.depth >= 0 && settings.tolerance > 0.0, "invalid bisection settings");

  const BoxMap map(box);
  Bisector bisector(family, map, settings.depth);
  const int n[3] = {settings.seed_tau, settings.seed_p, settings.seed_omega};

  // seed grid corners, one model per (tau, p) node
  std::vector<SignPair> grid(static_cast<std::size_t>((n[0] + 1) * (n[1] + 1) * (n[2] + 1)));
  auto idx = [&](int i, int j, int k) {
    return static_cast<std::size_t>((i * (n[1] + 1) + j) * (n[2] + 1) + k);
  };
  for (int i = 0; i <= n[0]; ++i) {
    for (int j = 0; j <= n[1]; ++j) {
      const Point3 x = map.to_physical({double(i) / n[0], double(j) / n[1], 0.0});
      const auto model = family(x[0], x[1]);
      for (int k = 0; k <= n[2]; ++k) {
        const double omega = map.to_physical({0.0, 0.0, double(k) / n[2]})[2];
        grid[idx(i, j, k)] = signs(char_fn(model, Complex(0.0, omega)));
      }
    }
  }

  std::vector<Cell> leaves;
  const Point3 seed_size{1.0 / n[0], 1.0 / n[1], 1.0 / n[2]};
  for (int i = 0; i < n[0]; ++i) {
    for (int j = 0; j < n[1]; ++j) {
      for (int k = 0; k < n[2]; ++k) {
        std::array<SignPair, 8> corner{};
        for (int c = 0; c < 8; ++c)
          corner[c] = grid[idx(i + (c & 1), j + ((c >> 1) & 1), k + ((c >> 2) & 1))];
        if (!brackets(corner)) continue;
        const Cell cell{{i * seed_size[0], j * seed_size[1], k * seed_size[2]}, seed_size};
        bisector.refine(cell, 0, leaves);
      }
    }
  }

  // polish leaf centres and drop duplicates / spurious brackets
  const double leaf_scale = std::ldexp(1.0, -settings.depth);
  const Point3 leaf{seed_size[0] * leaf_scale, seed_size[1] * leaf_scale, seed_size[2] * leaf_scale};
  const double leaf_diag = std::sqrt(leaf[0] * leaf[0] + leaf[1] * leaf[1] + leaf[2] * leaf[2]);
  std::vector<Point3> points;
  for (const auto& c : leaves) {
    Point3 u{c.lo[0] + 0.5 * c.size[0], c.lo[1] + 0.5 * c.size[1], c.lo[2] + 0.5 * c.size[2]};
    const Point3 start = u;
    if (!polish(family, map, u, settings.tolerance)) continue;
    if (distance(u, start) > 2.0 * leaf_diag) continue;  // converged onto a different branch
    if (std::any_of(u.begin(), u.end(), [](double v) { return v < 0.0 || v > 1.0; })) continue;
    const bool duplicate = std::any_of(points.begin(), points.end(), [&](const Point3& q) {
      return distance(q, u) < 0.25 * leaf_diag;
    });
    if (!duplicate) points.push_back(u);
  }

  // connected components under a few leaf diagonals
  std::vector<std::size_t> parent(points.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  const double link = 3.0 * leaf_diag;
  for (std::size_t a = 0; a < points.size(); ++a)
    for (std::size_t b = a + 1; b < points.size(); ++b)
      if (distance(points[a], points[b]) < link) parent[find(a)] = find(b);

  std::vector<std::vector<std::size_t>> groups;
  std::vector<long> group_of(points.size(), -1);
  for (std::size_t a = 0; a < points.size(); ++a) {
    const std::size_t r = find(a);
    if (group_of[r] < 0) {
      group_of[r] = static_cast<long>(groups.size());
      groups.emplace_back();
    }
    groups[static_cast<std::size_t>(group_of[r])].push_back(a);
  }

  std::vector<BoundaryCurve> curves;
  for (auto& g : groups) {
    // greedy nearest-neighbour ordering from the smallest-tau point
    std::sort(g.begin(), g.end(), [&](std::size_t a, std::size_t b) { return points[a] < points[b]; });
    std::vector<std::size_t> order{g.front()};
    std::vector<bool> used(g.size(), false);
    used[0] = true;
    for (std::size_t step = 1; step < g.size(); ++step) {
      const Point3& last = points[order.back()];
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t m = 0; m < g.size(); ++m) {
        if (used[m]) continue;
        const double d = distance(last, points[g[m]]);
        if (d < best_d) {
          best_d = d;
          best = m;
        }
      }
      used[best] = true;
      order.push_back(g[best]);
    }
    BoundaryCurve curve;
    for (std::size_t a : order) {
      const Point3 x = map.to_physical(points[a]);
      curve.points.push_back({x[0], x[1], x[2]});
    }
    curves.push_back(std::move(curve));
  }
  std::sort(curves.begin(), curves.end(), [](const BoundaryCurve& a, const BoundaryCurve& b) {
    const auto& pa = a.points.front();
    const auto& pb = b.points.front();
    return std::tie(pa.tau, pa.p, pa.omega) < std::tie(pb.tau, pb.p, pb.omega);
  });
  return curves;
}

}  // namespace hybridlab
