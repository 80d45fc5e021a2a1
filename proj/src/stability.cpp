#include "hybridlab/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hybridlab {

namespace {

ComplexMatrix char_matrix(const DelayedHybridModel& m, Complex lambda) {
  const Complex e = std::exp(-lambda * m.tau);
  const Complex l2 = lambda * lambda;
  ComplexMatrix out = (l2 * e) * m.Mt.cast<Complex>();
  out += l2 * m.M0.cast<Complex>();
  out += (lambda * e) * m.Ct.cast<Complex>();
  out += lambda * m.C0.cast<Complex>();
  out += e * m.Kt.cast<Complex>();
  out += m.K0.cast<Complex>();
  return out;
}

/// Chebyshev points x_j = cos(j pi / N) and the differentiation matrix on them.
Matrix chebyshev_differentiation(int N, Vector& x) {
  x.resize(N + 1);
  for (int j = 0; j <= N; ++j) x(j) = std::cos(kPi * j / N);
  Vector c(N + 1);
  for (int j = 0; j <= N; ++j) {
    c(j) = (j == 0 || j == N) ? 2.0 : 1.0;
    if (j % 2) c(j) = -c(j);
  }
  Matrix D = Matrix::Zero(N + 1, N + 1);
  for (int i = 0; i <= N; ++i) {
    for (int j = 0; j <= N; ++j) {
      if (i != j) D(i, j) = (c(i) / c(j)) / (x(i) - x(j));
    }
  }
  // negative-sum trick for the diagonal
  for (int i = 0; i <= N; ++i) D(i, i) = -D.row(i).sum();
  return D;
}

}  // namespace

Complex char_fn(const DelayedHybridModel& model, Complex lambda) {
  return char_matrix(model, lambda).partialPivLu().determinant();
}

double static_boundary_value(const DelayedHybridModel& model) {
  return (model.K0 + model.Kt).determinant();
}

double normalized_char_residual(const DelayedHybridModel& model, double omega) {
  const ComplexMatrix A = char_matrix(model, Complex(0.0, omega));
  // entry-wise magnitude bound without cancellation, then Hadamard's inequality
  const double w = std::abs(omega);
  const Matrix B = w * w * (model.Mt.cwiseAbs() + model.M0.cwiseAbs()) +
                   w * (model.Ct.cwiseAbs() + model.C0.cwiseAbs()) + model.Kt.cwiseAbs() +
                   model.K0.cwiseAbs();
  double bound = 1.0;
  for (Eigen::Index r = 0; r < B.rows(); ++r) bound *= std::max(B.row(r).norm(), 1e-300);
  return std::abs(A.partialPivLu().determinant()) / bound;
}

Matrix semidiscretize(const DelayedHybridModel& model, int nodes) {
  model.validate();
  require(model.tau > 0.0, "semi-discretization needs tau > 0");
  require(nodes >= 4, "semi-discretization needs at least 4 nodes");

  const int N = nodes - 1;
  Vector x;
  Matrix D = chebyshev_differentiation(N, x);
  D *= 2.0 / model.tau;  // theta = tau (x - 1) / 2 maps [-1, 1] onto [-tau, 0]

  const Eigen::Index l = model.dof();
  const bool first_order = model.is_first_order();
  const Eigen::Index s = first_order ? l : 2 * l;
  const Eigen::Index dim = static_cast<Eigen::Index>(nodes) * s;
  Matrix A = Matrix::Zero(dim, dim);

  // history nodes: d/dt y(t + theta_j) = d/dtheta y(t + theta_j)
  for (int j = 1; j <= N; ++j) {
    for (int k = 0; k <= N; ++k) {
      A.block(j * s, k * s, s, s).diagonal().setConstant(D(j, k));
    }
  }

  const Eigen::Index last = static_cast<Eigen::Index>(N) * s;
  if (first_order) {
    Eigen::FullPivLU<Matrix> lead(model.C0);
    require(lead.isInvertible(), "first-order delayed model needs an invertible C0");
    const Matrix Ci = lead.inverse();
    A.block(0, 0, l, l) = -Ci * model.K0;
    A.block(0, last, l, l) += -Ci * model.Kt;
    for (int k = 0; k <= N; ++k) A.block(0, k * s, l, l) += -D(N, k) * (Ci * model.Ct);
    return A;
  }

  Eigen::FullPivLU<Matrix> lead(model.M0);
  require(lead.isInvertible(), "semi-discretization needs an invertible M0");
  const Matrix Mi = lead.inverse();
  A.block(0, l, l, l).setIdentity();
  A.block(l, 0, l, l) = -Mi * model.K0;
  A.block(l, l, l, l) = -Mi * model.C0;
  A.block(l, last, l, l) += -Mi * model.Kt;
  A.block(l, last + l, l, l) += -Mi * model.Ct;
  const Matrix MiMt = Mi * model.Mt;
  for (int k = 0; k <= N; ++k) A.block(l, k * s + l, l, l) += -D(N, k) * MiMt;
  return A;
}

Complex rightmost_eigenvalue(const Matrix& A) {
  require(A.rows() == A.cols() && A.rows() > 0, "rightmost_eigenvalue needs a square matrix");
  require(A.allFinite(), "rightmost_eigenvalue needs a finite matrix");
  Eigen::EigenSolver<Matrix> es(A, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) throw SolverError("eigensolver did not converge");
  const auto& ev = es.eigenvalues();
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < ev.size(); ++i) {
    const auto& a = ev(i);
    const auto& b = ev(best);
    if (a.real() > b.real() || (a.real() == b.real() && a.imag() > b.imag())) best = i;
  }
  return ev(best);
}

std::string to_string(CellLabel label) {
  switch (label) {
    case CellLabel::stabilisable: return "stabilisable";
    case CellLabel::unstable: return "unstable";
    case CellLabel::failed: return "failed";
  }
  return "failed";
}

std::vector<double> cell_centres(double lo, double hi, std::size_t cells) {
  require(cells >= 1 && hi >= lo, "cell_centres needs hi >= lo and at least one cell");
  std::vector<double> out(cells);
  const double w = (hi - lo) / static_cast<double>(cells);
  for (std::size_t i = 0; i < cells; ++i) out[i] = lo + (static_cast<double>(i) + 0.5) * w;
  return out;
}

StabilityGrid stability_chart(const HybridFamily& family, const std::vector<double>& taus,
                              const std::vector<double>& ps, int nodes) {
  require(!taus.empty() && !ps.empty(), "stability chart needs non-empty axes");
  require(std::is_sorted(taus.begin(), taus.end()) &&
              std::adjacent_find(taus.begin(), taus.end()) == taus.end(),
          "tau axis must be strictly increasing");
  require(std::is_sorted(ps.begin(), ps.end()) &&
              std::adjacent_find(ps.begin(), ps.end()) == ps.end(),
          "p axis must be strictly increasing");
  require(taus.front() > 0.0, "stability chart needs tau > 0");

  StabilityGrid grid;
  grid.taus = taus;
  grid.ps = ps;
  grid.cells.reserve(taus.size() * ps.size());
  for (double tau : taus) {
    for (double p : ps) {
      StabilityCell cell;
      cell.tau = tau;
      cell.p = p;
      try {
        cell.rightmost_re = rightmost_eigenvalue(semidiscretize(family(tau, p), nodes)).real();
        cell.label = cell.rightmost_re < 0.0 ? CellLabel::stabilisable : CellLabel::unstable;
      } catch (const std::exception& e) {
        cell.rightmost_re = std::numeric_limits<double>::quiet_NaN();
        cell.label = CellLabel::failed;
        cell.error = e.what();
      }
      grid.cells.push_back(std::move(cell));
    }
  }
  return grid;
}

double asymptotic_boundary(const HybridFamily& family) {
  auto f = [&](double p) {
    const auto m = family(0.0, p);
    return (m.M0 - m.Mt).determinant();
  };
  constexpr int kScan = 200;
  double lo = 0.0, hi = 0.0;
  bool found = false;
  double prev_p = 1.0 / (2.0 * kScan);
  double prev_f = f(prev_p);
  if (prev_f == 0.0) return prev_p;
  for (int i = 1; i < kScan; ++i) {
    const double p = (i + 0.5) / kScan;
    const double v = f(p);
    if (v == 0.0) return p;
    if ((v > 0.0) != (prev_f > 0.0)) {
      lo = prev_p;
      hi = p;
      found = true;
      break;
    }
    prev_p = p;
    prev_f = v;
  }
  if (!found) throw SolverError("det(M0 - Mt) has no root for p in (0, 1)");
  double flo = f(lo);
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double neutral_spectrum_abscissa(const DelayedHybridModel& model) {
  const bool first_order = model.is_first_order();
  const Matrix& lead = first_order ? model.C0 : model.M0;
  const Matrix& delayed = first_order ? model.Ct : model.Mt;
  if (delayed.isZero(0.0) || model.tau <= 0.0) return -std::numeric_limits<double>::infinity();
  Eigen::FullPivLU<Matrix> lu(lead);
  require(lu.isInvertible(), "neutral abscissa needs an invertible leading matrix");
  Eigen::EigenSolver<Matrix> es(lu.inverse() * delayed, false);
  if (es.info() != Eigen::Success) throw SolverError("eigensolver did not converge");
  double radius = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    radius = std::max(radius, std::abs(es.eigenvalues()(i)));
  if (radius == 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(radius) / model.tau;
}

}  // namespace hybridlab
