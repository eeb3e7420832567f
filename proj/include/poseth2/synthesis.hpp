#pragma once

#include <string>
#include <vector>

#include "poseth2/config.hpp"
#include "poseth2/poset.hpp"
#include "poseth2/riccati.hpp"
#include "poseth2/statespace.hpp"

namespace poseth2 {

/// Unvalidated plant  x' = A x + F w + B u,  z = C x + D u,  with matrices in
/// linear-extension block order.
struct PlantSpec {
  Poset poset;
  BlockPartition partition;
  Matrix A;
  Matrix B;
  Matrix C;
  Matrix D;
  Matrix F;
};

/// A plant that passed validate_plant(): A and B poset-causal, F block
/// diagonal with full-column-rank blocks, C^T D = 0, D^T D > 0 and every
/// diagonal pair (A_jj, B_jj) stabilizable.
class PlantData {
 public:
  const Poset& poset() const noexcept { return spec_.poset; }
  const BlockPartition& partition() const noexcept { return spec_.partition; }
  const Matrix& A() const noexcept { return spec_.A; }
  const Matrix& B() const noexcept { return spec_.B; }
  const Matrix& C() const noexcept { return spec_.C; }
  const Matrix& D() const noexcept { return spec_.D; }
  const Matrix& F() const noexcept { return spec_.F; }
  const PlantSpec& spec() const noexcept { return spec_; }

  IncidencePattern state_pattern() const;        // states x states (A, Phi, Gamma)
  IncidencePattern input_pattern() const;        // states x inputs (B)
  IncidencePattern controller_pattern() const;   // inputs x states (K*, K_Phi)
  IncidencePattern parameter_pattern() const;    // inputs x disturbances (Q)

 private:
  explicit PlantData(PlantSpec spec) : spec_(std::move(spec)) {}
  friend PlantData validate_plant(PlantSpec raw, const Config& config);

  PlantSpec spec_;
};

/// Checks every plant invariant, reporting the first failure with the
/// offending block, e.g. "NotPosetCausal(1,2)". Throws DimensionMismatch,
/// NotPosetCausal, FNotBlockDiagonal, FRankDeficient, CrossTermNonzero,
/// InputWeightSingular, SubsystemNotStabilizable.
PlantData validate_plant(PlantSpec raw, const Config& config = {});

/// Data of the subproblem on the downstream set of j.
struct SubPlant {
  std::vector<ElementIndex> elements;  // downstream of j, j first
  Matrix A;         // A(dj, dj)
  Matrix B;         // B(dj, dj)
  Matrix C;         // C(dj), the state columns of dj
  Matrix D;         // D(dj), the input columns of dj
  Matrix F_jj;      // diagonal disturbance block of j
  Matrix F_lifted;  // F_jj placed in the rows of j's own states (E1 F_jj)
};

SubPlant extract(const PlantData& plant, ElementIndex j);

/// Zero-pads a gain over the downstream set of j (inputs x states of dj) to
/// the full inputs x states size.
Matrix embed_hat(const Poset& poset, const BlockPartition& partition, const Matrix& k_sub,
                 ElementIndex j);

/// Ric on every downstream set, in element order.
std::vector<RiccatiSolution> solve_subproblems(const PlantData& plant, bool parallel = true);

/// Block matrices built from the per-element gains. Closed-loop states are
/// ordered element by element; block j holds the states of dj with j's own
/// states first.
struct AssemblyMatrices {
  Matrix bigA;   // diag(A(dj,dj) - B(dj,dj) K(dj,dj))
  Matrix bigK;   // diag(K(dj,dj))
  Matrix Pi1;    // selects each block's own states
  Matrix Pi2;    // selects the remaining (strictly downstream) states
  Matrix Rsel;   // [E_d1 ... E_dp] over states
  Matrix Rsel_inputs;  // the same selector over inputs
  Matrix A_Phi;
  Matrix B_Phi;
  Matrix C_Phi;
  Matrix C_Q;
  std::vector<Eigen::Index> block_offsets;        // start of block j in the stacked states
  std::vector<Eigen::Index> input_block_offsets;  // start of block j in the stacked inputs

  /// K(dj,dj) as stored in bigK.
  Matrix gain(ElementIndex j) const;
};

/// Assembles from gains K(dj,dj) (inputs x states of dj). Verifies that
/// [Pi1 Pi2] is a permutation, the three structural identities relating
/// Rsel, bigA and the plant, and that bigA is stable.
/// Throws AssemblyIdentityViolated, DimensionMismatch.
AssemblyMatrices assemble(const PlantData& plant, const std::vector<Matrix>& gains,
                          double identity_tol = 1e-9, double stability_margin = 0.0);

/// The optimal decentralized controller
///     [ A_Phi - B_Phi C_Phi | B_Phi         ]
///     [ C_Q (Pi2 - Pi1 C_Phi) | C_Q Pi1     ].
StateSpace controller(const AssemblyMatrices& assembly);

struct Filters {
  StateSpace Phi;    // propagation filter
  StateSpace Gamma;  // differential filter, the inverse of Phi
  StateSpace K_Phi;  // column j: -Khat_j Phi(j), so that K* = K_Phi Gamma
};

/// Builds Phi and K_Phi column by column and concatenates them.
Filters filters(const PlantData& plant, const AssemblyMatrices& assembly);

/// Optimal parameter Q* = (bigA, Pi1 F, C_Q, 0).
StateSpace q_star(const PlantData& plant, const AssemblyMatrices& assembly);

/// Recovers K(s) = Q P21+ (I + P22 Q P21+)^-1 with P21+ = F+ (sI - A).
/// Throws ResolventSingular.
CMatrix recover_K_from_Q(const PlantData& plant, const CMatrix& q_value, Complex s);

/// [ A | F  B ]
/// [ C | 0  D ]
/// [ I | 0  0 ]
StateSpace generalized_plant(const PlantData& plant);

/// Closed-loop map w -> z under state feedback u = K x.
StateSpace closed_loop(const PlantData& plant, const StateSpace& k);

/// Sum over j of the state count of the strict downstream set of j.
Eigen::Index degree_bound(const PlantData& plant);

/// Names of the controller states: "q_k(j)" is the differential improvement
/// of x_k held at element j (suffixed "[c]" for multi-state blocks).
std::vector<std::string> controller_state_labels(const PlantData& plant);

struct NormReport {
  double h_open = 0.0;  // +inf when A is unstable
  double h_centralized = 0.0;
  double h_decentralized = 0.0;
};

/// Open-loop, unconstrained-optimal and closed-loop-with-k H2 norms.
NormReport compute_norms(const PlantData& plant, const StateSpace& k);

struct ControllerArtifacts {
  StateSpace K_star;
  StateSpace Phi;
  StateSpace Gamma;
  StateSpace K_Phi;
  StateSpace Q_star;
};

struct SynthesisResult {
  std::vector<RiccatiSolution> gains;  // per element, gain L = K(dj,dj)
  AssemblyMatrices assembly;
  ControllerArtifacts artifacts;
  Eigen::Index degree_bound = 0;
  NormReport norms;
};

/// Full pipeline: subproblems, assembly, controller, filters, Q*, norms.
SynthesisResult synthesize(const PlantData& plant, const Config& config = {});

/// Same pipeline from given gains (no Riccati solves; norms left at zero).
SynthesisResult synthesize_from_gains(const PlantData& plant, const std::vector<Matrix>& gains,
                                      const Config& config = {});

}  // namespace poseth2
