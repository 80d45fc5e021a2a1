#include "hybridlab/model.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>

namespace hybridlab {

void StoreySpec::validate() const {
  require(std::isfinite(mass) && mass > 0.0, "storey mass must be positive");
  require(std::isfinite(damping) && damping >= 0.0, "storey damping must be non-negative");
  require(std::isfinite(stiffness) && stiffness > 0.0, "storey stiffness must be positive");
}

void StoreyChainSpec::validate() const {
  require(storeys.size() >= 2, "a storey chain needs at least 2 storeys");
  for (const auto& s : storeys) s.validate();
}

StructuralMatrices assemble_true_assembly(const StoreyChainSpec& chain) {
  chain.validate();
  const auto l = static_cast<Eigen::Index>(chain.size());
  StructuralMatrices out{Matrix::Zero(l, l), Matrix::Zero(l, l), Matrix::Zero(l, l)};
  for (Eigen::Index r = 0; r < l; ++r) {
    const auto& s = chain.storeys[static_cast<std::size_t>(r)];
    out.M(r, r) = s.mass;
    // leg r joins floor r to floor r-1 (ground for r = 0)
    out.C(r, r) += s.damping;
    out.K(r, r) += s.stiffness;
    if (r > 0) {
      out.C(r - 1, r - 1) += s.damping;
      out.K(r - 1, r - 1) += s.stiffness;
      out.C(r, r - 1) -= s.damping;
      out.C(r - 1, r) -= s.damping;
      out.K(r, r - 1) -= s.stiffness;
      out.K(r - 1, r) -= s.stiffness;
    }
  }
  return out;
}

PartitionSpec PartitionSpec::at_storey(const StoreyChainSpec& chain, std::size_t interface_storey,
                                       double mass_split) {
  PartitionSpec p;
  p.physical_dof = interface_storey;
  p.interface_dof = 1;
  p.numerical_dof = (interface_storey >= 1 && interface_storey <= chain.size())
                        ? chain.size() - interface_storey + 1
                        : 0;
  p.mass_split = mass_split;
  return p;
}

void PartitionSpec::validate(const StoreyChainSpec& chain) const {
  require(interface_dof >= 1, "partition needs at least one interface coordinate");
  require(interface_dof == 1, "storey chains share exactly one interface coordinate");
  require(physical_dof >= interface_dof && numerical_dof >= interface_dof,
          "each substructure must contain the interface");
  require(physical_dof + numerical_dof - interface_dof == chain.size(),
          "inconsistent DoF counts: l must equal k + n - m");
  require(physical_dof >= 1 && physical_dof <= chain.size(), "interface storey outside the chain");
  auto fraction_ok = [](double f) { return std::isfinite(f) && f > 0.0 && f < 1.0; };
  // p = 1 (all interface mass numerical) is the closed end of the chart domain
  require(std::isfinite(mass_split) && mass_split > 0.0 && mass_split <= 1.0,
          "interface mass split must lie in (0, 1]");
  if (damping_split) require(fraction_ok(*damping_split), "damping split must lie in (0, 1)");
  if (stiffness_split) require(fraction_ok(*stiffness_split), "stiffness split must lie in (0, 1)");
}

namespace {

struct InterfaceShares {
  double mass_phy, damping_phy, stiffness_phy;
};

// Physical share of the interface diagonal entries of M, C, K.
InterfaceShares physical_shares(const StoreyChainSpec& chain, const PartitionSpec& part,
                                const StructuralMatrices& full) {
  const auto i = static_cast<Eigen::Index>(part.interface_index());
  const auto& leg = chain.storeys[part.interface_index()];
  InterfaceShares s{};
  s.mass_phy = (1.0 - part.mass_split) * full.M(i, i);
  s.damping_phy = part.damping_split ? (1.0 - *part.damping_split) * full.C(i, i) : leg.damping;
  s.stiffness_phy =
      part.stiffness_split ? (1.0 - *part.stiffness_split) * full.K(i, i) : leg.stiffness;
  return s;
}

}  // namespace

Substructures split_substructures(const StoreyChainSpec& chain, const PartitionSpec& part) {
  part.validate(chain);
  const auto full = assemble_true_assembly(chain);
  const auto shares = physical_shares(chain, part, full);
  const auto k = static_cast<Eigen::Index>(part.physical_dof);
  const auto n = static_cast<Eigen::Index>(part.numerical_dof);
  const auto i = static_cast<Eigen::Index>(part.interface_index());

  Substructures out;
  out.interface_index = part.interface_index();
  out.physical = {full.M.topLeftCorner(k, k), full.C.topLeftCorner(k, k),
                  full.K.topLeftCorner(k, k)};
  out.numerical = {full.M.block(i, i, n, n), full.C.block(i, i, n, n), full.K.block(i, i, n, n)};

  out.physical.M(k - 1, k - 1) = shares.mass_phy;
  out.physical.C(k - 1, k - 1) = shares.damping_phy;
  out.physical.K(k - 1, k - 1) = shares.stiffness_phy;
  out.numerical.M(0, 0) -= shares.mass_phy;
  out.numerical.C(0, 0) -= shares.damping_phy;
  out.numerical.K(0, 0) -= shares.stiffness_phy;
  return out;
}

bool DelayedHybridModel::is_first_order() const {
  return M0.isZero(0.0) && Mt.isZero(0.0);
}

void DelayedHybridModel::validate() const {
  const auto l = M0.rows();
  require(l >= 1, "delayed model needs at least one coordinate");
  for (const Matrix* m : {&M0, &Mt, &C0, &Ct, &K0, &Kt}) {
    require(m->rows() == l && m->cols() == l, "delayed model matrices must be square and equal size");
    require(m->allFinite(), "delayed model matrices must be finite");
  }
  require(std::isfinite(tau) && tau >= 0.0, "delay must be non-negative");
}

DelayedHybridModel assemble_delayed(const StoreyChainSpec& chain, const PartitionSpec& part,
                                    double tau) {
  part.validate(chain);
  require(std::isfinite(tau) && tau >= 0.0, "delay must be non-negative");
  const auto full = assemble_true_assembly(chain);
  const auto shares = physical_shares(chain, part, full);
  const auto i = static_cast<Eigen::Index>(part.interface_index());
  const auto l = full.dof();

  // The physical rows see the interface through the delayed coordinate
  // xi_int(t - tau); the interface row carries the physical share of the
  // interface block (force feedback) on the delayed coordinate as well.
  auto split = [&](const Matrix& X, double phy_share, Matrix& X0, Matrix& Xt) {
    X0 = X;
    Xt = Matrix::Zero(l, l);
    for (Eigen::Index r = 0; r < i; ++r) {
      Xt(r, i) = X(r, i);
      X0(r, i) = 0.0;
    }
    Xt(i, i) = phy_share;
    X0(i, i) = X(i, i) - phy_share;
  };

  DelayedHybridModel model;
  split(full.M, shares.mass_phy, model.M0, model.Mt);
  split(full.C, shares.damping_phy, model.C0, model.Ct);
  split(full.K, shares.stiffness_phy, model.K0, model.Kt);
  model.tau = tau;
  return model;
}

HybridFamily storey_family(StoreyChainSpec chain, std::size_t interface_storey) {
  chain.validate();
  return [chain = std::move(chain), interface_storey](double tau, double p) {
    return assemble_delayed(chain, PartitionSpec::at_storey(chain, interface_storey, p), tau);
  };
}

StoreyChainSpec reference_building(int storeys) {
  require(storeys == 4 || storeys == 5, "reference building has 4 or 5 storeys");
  StoreyChainSpec chain;
  chain.storeys = {
      {5.37, 4.4062, 53048.0},
      {5.37, 3.7979, 45724.0},
      {kReferenceInterfaceMass, 3.7421, 45052.0},
      {10.74, 3.7421, 45052.0},
  };
  if (storeys == 5) {
    // extra numerical storey: mu5 = m1, gamma5 = gamma4, sigma5 = sigma4
    chain.storeys.push_back({chain.storeys[0].mass, chain.storeys[3].damping,
                             chain.storeys[3].stiffness});
  }
  return chain;
}

void write_matrix_csv(const std::string& path, const Matrix& matrix) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << std::setprecision(17);
  for (Eigen::Index r = 0; r < matrix.rows(); ++r) {
    for (Eigen::Index c = 0; c < matrix.cols(); ++c) {
      if (c) out << ',';
      out << matrix(r, c);
    }
    out << '\n';
  }
}

}  // namespace hybridlab
