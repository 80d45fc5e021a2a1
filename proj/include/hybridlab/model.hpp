#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hybridlab/types.hpp"

namespace hybridlab {

/// Lumped parameters of one storey: the floor mass and the leg element that
/// connects it to the storey below (or to the ground for the first storey).
struct StoreySpec {
  double mass = 0.0;       // kg
  double damping = 0.0;    // N s/m
  double stiffness = 0.0;  // N/m

  void validate() const;
};

/// Storeys listed ground-up. For a hybrid test the interface storey carries
/// the *total* floor mass; the partition decides how it is split.
struct StoreyChainSpec {
  std::vector<StoreySpec> storeys;

  std::size_t size() const { return storeys.size(); }
  void validate() const;
};

struct StructuralMatrices {
  Matrix M, C, K;

  Eigen::Index dof() const { return M.rows(); }
};

/// Split of a chain into a physical part (storeys 1..k) and a numerical part
/// (storeys k..l) sharing the k-th storey as interface (m = 1).
///
/// `mass_split` is the numerical share of the interface floor mass,
/// p = mu / (m + mu). Leg damping and stiffness on the interface diagonal
/// default to the chain split (leg below belongs to the physical side, leg
/// above to the numerical side); the optional fractions override that with
/// a numerical share of the full diagonal entry.
struct PartitionSpec {
  std::size_t physical_dof = 0;
  std::size_t numerical_dof = 0;
  std::size_t interface_dof = 1;
  double mass_split = 0.5;
  std::optional<double> damping_split;
  std::optional<double> stiffness_split;

  /// Partition with the interface at 1-based storey `interface_storey`.
  static PartitionSpec at_storey(const StoreyChainSpec& chain, std::size_t interface_storey,
                                 double mass_split);

  std::size_t interface_index() const { return physical_dof - interface_dof; }
  void validate(const StoreyChainSpec& chain) const;
};

struct Substructures {
  StructuralMatrices physical;   // coordinates x_1..x_k, interface last
  StructuralMatrices numerical;  // coordinates xi_k..xi_l, interface first
  std::size_t interface_index = 0;
};

/// Delayed displacement-feedback model
///   Mt q''(t-tau) + M0 q''(t) + Ct q'(t-tau) + C0 q'(t) + Kt q(t-tau) + K0 q(t) = F.
/// Coordinates are (x_phy, xi_int, xi_num), which for a chain is the storey order.
struct DelayedHybridModel {
  Matrix M0, Mt, C0, Ct, K0, Kt;
  double tau = 0.0;

  Eigen::Index dof() const { return M0.rows(); }
  /// No inertia terms at all: the model is a first-order delay equation in q.
  bool is_first_order() const;
  void validate() const;
};

using HybridFamily = std::function<DelayedHybridModel(double tau, double mass_ratio)>;

StructuralMatrices assemble_true_assembly(const StoreyChainSpec& chain);
Substructures split_substructures(const StoreyChainSpec& chain, const PartitionSpec& part);
DelayedHybridModel assemble_delayed(const StoreyChainSpec& chain, const PartitionSpec& part,
                                    double tau);

/// (tau, p) -> delayed model for a chain with its interface at `interface_storey`.
HybridFamily storey_family(StoreyChainSpec chain, std::size_t interface_storey);

/// Identified bench-top building: three physical storeys and a numerical top
/// storey (`storeys` = 4), optionally with a second numerical storey (5).
StoreyChainSpec reference_building(int storeys = 4);
inline constexpr double kReferenceInterfaceMass = 5.37;  // kg, m3 + mu3
inline constexpr std::size_t kReferenceInterfaceStorey = 3;

void write_matrix_csv(const std::string& path, const Matrix& matrix);

}  // namespace hybridlab
