#include "poseth2/synthesis.hpp"

#include <future>
#include <optional>
#include <string>

#include "poseth2/error.hpp"

namespace poseth2 {

namespace {

using IndexList = std::vector<Eigen::Index>;

IndexList indices_of(const BlockDims& dims, const std::vector<ElementIndex>& elements) {
  IndexList out;
  for (auto e : elements)
    for (Eigen::Index r = 0; r < dims.size(e); ++r) out.push_back(dims.offset(e) + r);
  return out;
}

std::string pair_label(const Poset& poset, ElementIndex i, ElementIndex j) {
  return "(" + poset.label(i) + "," + poset.label(j) + ")";
}

void require_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols, const char* name) {
  if (m.rows() != rows || m.cols() != cols) {
    throw Error(ErrorKind::DimensionMismatch,
                std::string(name) + " is " + std::to_string(m.rows()) + "x" +
                    std::to_string(m.cols()) + ", partition implies " + std::to_string(rows) +
                    "x" + std::to_string(cols));
  }
}

// Largest absolute deviation, 0 for empty matrices.
double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace

IncidencePattern PlantData::state_pattern() const {
  return {poset(), partition().states, partition().states};
}
IncidencePattern PlantData::input_pattern() const {
  return {poset(), partition().states, partition().inputs};
}
IncidencePattern PlantData::controller_pattern() const {
  return {poset(), partition().inputs, partition().states};
}
IncidencePattern PlantData::parameter_pattern() const {
  return {poset(), partition().inputs, partition().disturbances};
}

PlantData validate_plant(PlantSpec raw, const Config& config) {
  const Poset& poset = raw.poset;
  const BlockPartition& part = raw.partition;
  const std::size_t p = poset.size();
  if (part.states.count() != p || part.inputs.count() != p || part.disturbances.count() != p) {
    throw Error(ErrorKind::DimensionMismatch, "partition lists must have one entry per element");
  }
  const auto n = part.states.total();
  const auto m = part.inputs.total();
  const auto w = part.disturbances.total();
  const auto l = part.output_dim;
  require_shape(raw.A, n, n, "A");
  require_shape(raw.B, n, m, "B");
  require_shape(raw.C, l, n, "C");
  require_shape(raw.D, l, m, "D");
  require_shape(raw.F, n, w, "F");

  const IncidencePattern a_pattern(poset, part.states, part.states);
  if (auto bad = a_pattern.first_violation(raw.A, config.atol)) {
    auto [i, j] = *bad;
    throw Error(ErrorKind::NotPosetCausal,
                pair_label(poset, i, j) + ": block A[" + poset.label(i) + "," + poset.label(j) +
                    "] is nonzero but " + poset.label(j) + " does not precede " + poset.label(i));
  }
  const IncidencePattern b_pattern(poset, part.states, part.inputs);
  if (auto bad = b_pattern.first_violation(raw.B, config.atol)) {
    auto [i, j] = *bad;
    throw Error(ErrorKind::NotPosetCausal,
                pair_label(poset, i, j) + ": block B[" + poset.label(i) + "," + poset.label(j) +
                    "] is nonzero but " + poset.label(j) + " does not precede " + poset.label(i));
  }

  for (ElementIndex i = 0; i < p; ++i)
    for (ElementIndex j = 0; j < p; ++j) {
      const Matrix blk = raw.F.block(part.states.offset(i), part.disturbances.offset(j),
                                     part.states.size(i), part.disturbances.size(j));
      if (i != j && max_abs(blk) > config.atol) {
        throw Error(ErrorKind::FNotBlockDiagonal,
                    pair_label(poset, i, j) + ": off-diagonal block F[" + poset.label(i) + "," +
                        poset.label(j) + "] is nonzero");
      }
      if (i == j) {
        Eigen::ColPivHouseholderQR<Matrix> qr(blk);
        qr.setThreshold(1e-10);
        if (qr.rank() < blk.cols()) {
          throw Error(ErrorKind::FRankDeficient,
                      "(" + poset.label(j) + "): F[" + poset.label(j) + "," + poset.label(j) +
                          "] lacks full column rank");
        }
      }
    }

  const double cross = (raw.C.transpose() * raw.D).norm();
  if (cross > config.atol * std::max(1.0, raw.C.norm() * raw.D.norm())) {
    throw Error(ErrorKind::CrossTermNonzero, "C^T D has norm " + std::to_string(cross));
  }
  const Matrix r = raw.D.transpose() * raw.D;
  Eigen::SelfAdjointEigenSolver<Matrix> r_eig(r);
  if (r_eig.eigenvalues().minCoeff() <= 1e-12 * std::max(1.0, r.norm())) {
    throw Error(ErrorKind::InputWeightSingular, "D^T D is not positive definite");
  }

  for (ElementIndex j = 0; j < p; ++j) {
    const Matrix ajj = raw.A.block(part.states.offset(j), part.states.offset(j),
                                   part.states.size(j), part.states.size(j));
    const Matrix bjj = raw.B.block(part.states.offset(j), part.inputs.offset(j),
                                   part.states.size(j), part.inputs.size(j));
    if (!hautus_stabilizable(ajj, bjj)) {
      throw Error(ErrorKind::SubsystemNotStabilizable,
                  "(" + poset.label(j) + "): (A_jj, B_jj) is not stabilizable");
    }
  }
  return PlantData(std::move(raw));
}

SubPlant extract(const PlantData& plant, ElementIndex j) {
  const auto& part = plant.partition();
  SubPlant sub;
  sub.elements = plant.poset().downstream(j);
  const IndexList xs = indices_of(part.states, sub.elements);
  const IndexList us = indices_of(part.inputs, sub.elements);
  sub.A = plant.A()(xs, xs);
  sub.B = plant.B()(xs, us);
  sub.C = plant.C()(Eigen::all, xs);
  sub.D = plant.D()(Eigen::all, us);
  sub.F_jj = plant.F().block(part.states.offset(j), part.disturbances.offset(j),
                             part.states.size(j), part.disturbances.size(j));
  sub.F_lifted = Matrix::Zero(static_cast<Eigen::Index>(xs.size()), sub.F_jj.cols());
  sub.F_lifted.topRows(sub.F_jj.rows()) = sub.F_jj;
  return sub;
}

Matrix embed_hat(const Poset& poset, const BlockPartition& partition, const Matrix& k_sub,
                 ElementIndex j) {
  const auto elements = poset.downstream(j);
  const IndexList us = indices_of(partition.inputs, elements);
  const IndexList xs = indices_of(partition.states, elements);
  if (k_sub.rows() != static_cast<Eigen::Index>(us.size()) ||
      k_sub.cols() != static_cast<Eigen::Index>(xs.size())) {
    throw Error(ErrorKind::DimensionMismatch, "gain does not match the downstream set of '" +
                                                  poset.label(j) + "'");
  }
  Matrix full = Matrix::Zero(partition.inputs.total(), partition.states.total());
  full(us, xs) = k_sub;
  return full;
}

std::vector<RiccatiSolution> solve_subproblems(const PlantData& plant, bool parallel) {
  const std::size_t p = plant.poset().size();
  auto solve_one = [&plant](ElementIndex j) {
    const SubPlant sub = extract(plant, j);
    try {
      return ric(RiccatiProblem{sub.A, sub.B, sub.C, sub.D, sub.F_lifted});
    } catch (const Error& e) {
      throw Error(e.kind(), "subproblem of '" + plant.poset().label(j) + "': " + e.detail());
    }
  };

  std::vector<RiccatiSolution> out;
  out.reserve(p);
  if (!parallel) {
    for (ElementIndex j = 0; j < p; ++j) out.push_back(solve_one(j));
    return out;
  }
  std::vector<std::future<RiccatiSolution>> pending;
  for (ElementIndex j = 0; j < p; ++j) pending.push_back(std::async(std::launch::async, solve_one, j));
  for (auto& f : pending) out.push_back(f.get());
  return out;
}

AssemblyMatrices assemble(const PlantData& plant, const std::vector<Matrix>& gains,
                          double identity_tol, double stability_margin) {
  const Poset& poset = plant.poset();
  const auto& part = plant.partition();
  const std::size_t p = poset.size();
  if (gains.size() != p) {
    throw Error(ErrorKind::DimensionMismatch, "need one gain per poset element");
  }
  const auto n = part.states.total();
  const auto m = part.inputs.total();

  // Block sizes of the stacked closed-loop states and stacked inputs.
  std::vector<std::vector<ElementIndex>> down(p);
  Eigen::Index big_n = 0, big_m = 0;
  AssemblyMatrices as;
  auto& input_offsets = as.input_block_offsets;
  for (ElementIndex j = 0; j < p; ++j) {
    down[j] = poset.downstream(j);
    as.block_offsets.push_back(big_n);
    input_offsets.push_back(big_m);
    big_n += part.states.total(down[j]);
    big_m += part.inputs.total(down[j]);
  }

  as.bigA = Matrix::Zero(big_n, big_n);
  as.bigK = Matrix::Zero(big_m, big_n);
  as.Pi1 = Matrix::Zero(big_n, n);
  as.Pi2 = Matrix::Zero(big_n, big_n - n);
  as.Rsel = Matrix::Zero(n, big_n);
  as.Rsel_inputs = Matrix::Zero(m, big_m);

  Eigen::Index pi2_col = 0;
  for (ElementIndex j = 0; j < p; ++j) {
    const SubPlant sub = extract(plant, j);
    const auto nj = sub.A.rows();
    const auto mj = sub.B.cols();
    const Matrix& k = gains[j];
    if (k.rows() != mj || k.cols() != nj) {
      throw Error(ErrorKind::DimensionMismatch,
                  "gain of '" + poset.label(j) + "' must be " + std::to_string(mj) + "x" +
                      std::to_string(nj));
    }
    const auto off = as.block_offsets[j];
    const auto uoff = input_offsets[j];
    as.bigA.block(off, off, nj, nj) = sub.A - sub.B * k;
    as.bigK.block(uoff, off, mj, nj) = k;

    const auto own = part.states.size(j);
    as.Pi1.block(off, part.states.offset(j), own, own).setIdentity();
    for (Eigen::Index r = own; r < nj; ++r) as.Pi2(off + r, pi2_col++) = 1.0;

    const IndexList xs = indices_of(part.states, down[j]);
    const IndexList us = indices_of(part.inputs, down[j]);
    for (Eigen::Index c = 0; c < nj; ++c) as.Rsel(xs[c], off + c) = 1.0;
    for (Eigen::Index c = 0; c < mj; ++c) as.Rsel_inputs(us[c], uoff + c) = 1.0;
  }

  as.A_Phi = as.Pi2.transpose() * as.bigA * as.Pi2;
  as.B_Phi = as.Pi2.transpose() * as.bigA * as.Pi1;
  as.C_Phi = as.Rsel * as.Pi2;
  as.C_Q = -as.Rsel_inputs * as.bigK;

  auto require = [&](double deviation, const std::string& name) {
    if (!(deviation <= identity_tol)) {
      throw Error(ErrorKind::AssemblyIdentityViolated,
                  name + " (deviation " + std::to_string(deviation) + ")");
    }
  };
  Matrix perm(big_n, big_n);
  perm << as.Pi1, as.Pi2;
  require(max_abs(perm.transpose() * perm - Matrix::Identity(big_n, big_n)),
          "[Pi1 Pi2] is a permutation");
  require(max_abs(as.Rsel * as.Pi2 * as.Pi2.transpose() + as.Pi1.transpose() - as.Rsel),
          "Rsel Pi2 Pi2^T + Pi1^T = Rsel");
  require(max_abs(as.Rsel * as.bigA - plant.B() * as.C_Q - plant.A() * as.Rsel),
          "Rsel bigA - B C_Q = A Rsel");
  require(max_abs(plant.A() * as.Rsel * as.Pi1 - plant.A()), "A Rsel Pi1 = A");
  if (!is_stable(as.bigA, stability_margin)) {
    throw Error(ErrorKind::AssemblyIdentityViolated, "bigA is not stable");
  }
  return as;
}

Matrix AssemblyMatrices::gain(ElementIndex j) const {
  const auto next_x = j + 1 < block_offsets.size() ? block_offsets[j + 1] : bigK.cols();
  const auto next_u = j + 1 < input_block_offsets.size() ? input_block_offsets[j + 1] : bigK.rows();
  return bigK.block(input_block_offsets[j], block_offsets[j], next_u - input_block_offsets[j],
                    next_x - block_offsets[j]);
}

StateSpace controller(const AssemblyMatrices& as) {
  return StateSpace(as.A_Phi - as.B_Phi * as.C_Phi, as.B_Phi,
                    as.C_Q * (as.Pi2 - as.Pi1 * as.C_Phi), as.C_Q * as.Pi1);
}

Filters filters(const PlantData& plant, const AssemblyMatrices& as) {
  const Poset& poset = plant.poset();
  const auto& part = plant.partition();
  const auto n = part.states.total();

  // Column j of Phi and K_Phi share the states q(j) and
  //     Phi(j)   = [ A_Phi(j) | B_Phi(j)            ]
  //                [ E_ddj    | E_j                 ]
  //     K_Phi(j) = [ -Khat_j E_ddj | -Khat_j E_j    ].
  std::optional<StateSpace> phi, k_phi;
  Eigen::Index q = 0;  // offset of q(j) in the rows of A_Phi
  for (ElementIndex j = 0; j < poset.size(); ++j) {
    const auto below = poset.strict_downstream(j);
    const auto nq = part.states.total(below);
    const auto own = part.states.size(j);

    Matrix e_below = Matrix::Zero(n, nq);
    const IndexList xs = indices_of(part.states, below);
    for (Eigen::Index c = 0; c < nq; ++c) e_below(xs[c], c) = 1.0;
    Matrix e_own = Matrix::Zero(n, own);
    e_own.middleRows(part.states.offset(j), own).setIdentity();

    const Matrix a_j = as.A_Phi.block(q, q, nq, nq);
    const Matrix b_j = as.B_Phi.block(q, part.states.offset(j), nq, own);
    const Matrix k_hat = embed_hat(poset, part, as.gain(j), j);

    StateSpace phi_j(a_j, b_j, e_below, e_own);
    StateSpace k_phi_j(a_j, b_j, -k_hat * e_below, -k_hat * e_own);
    phi = phi ? hcat(*phi, phi_j) : phi_j;
    k_phi = k_phi ? hcat(*k_phi, k_phi_j) : k_phi_j;
    q += nq;
  }

  Filters out;
  out.Phi = std::move(*phi);
  out.K_Phi = std::move(*k_phi);
  out.Gamma = StateSpace(out.Phi.A - out.Phi.B * out.Phi.C, out.Phi.B, -out.Phi.C,
                         Matrix::Identity(n, n));
  return out;
}

StateSpace q_star(const PlantData& plant, const AssemblyMatrices& as) {
  return StateSpace(as.bigA, as.Pi1 * plant.F(), as.C_Q,
                    Matrix::Zero(as.C_Q.rows(), plant.F().cols()));
}

CMatrix recover_K_from_Q(const PlantData& plant, const CMatrix& q_value, Complex s) {
  const auto n = plant.A().rows();
  const CMatrix resolvent = s * CMatrix::Identity(n, n) - plant.A().cast<Complex>();
  Eigen::PartialPivLU<CMatrix> lu(resolvent);
  if (!(lu.rcond() > 1e-13)) {
    throw Error(ErrorKind::ResolventSingular, "sI - A is singular at a sample point");
  }
  const Matrix f_pinv = plant.F().completeOrthogonalDecomposition().pseudoInverse();
  const CMatrix p21_left_inverse = f_pinv.cast<Complex>() * resolvent;
  const CMatrix p22 = lu.solve(plant.B().cast<Complex>());
  const CMatrix r = q_value * p21_left_inverse;  // K (I - P22 K)^-1
  return r * (CMatrix::Identity(n, n) + p22 * r).inverse();
}

StateSpace generalized_plant(const PlantData& plant) {
  const auto n = plant.A().rows();
  const auto m = plant.B().cols();
  const auto w = plant.F().cols();
  const auto l = plant.C().rows();
  Matrix b(n, w + m);
  b << plant.F(), plant.B();
  Matrix c(l + n, n);
  c << plant.C(), Matrix::Identity(n, n);
  Matrix d = Matrix::Zero(l + n, w + m);
  d.topRightCorner(l, m) = plant.D();
  return StateSpace(plant.A(), std::move(b), std::move(c), std::move(d));
}

StateSpace closed_loop(const PlantData& plant, const StateSpace& k) {
  return lft(generalized_plant(plant), plant.F().cols(), plant.C().rows(), k);
}

Eigen::Index degree_bound(const PlantData& plant) {
  Eigen::Index total = 0;
  for (ElementIndex j = 0; j < plant.poset().size(); ++j)
    total += plant.partition().states.total(plant.poset().strict_downstream(j));
  return total;
}

std::vector<std::string> controller_state_labels(const PlantData& plant) {
  const Poset& poset = plant.poset();
  std::vector<std::string> labels;
  for (ElementIndex j = 0; j < poset.size(); ++j)
    for (auto k : poset.strict_downstream(j)) {
      const auto nk = plant.partition().states.size(k);
      const std::string base = "q_" + poset.label(k) + "(" + poset.label(j) + ")";
      if (nk == 1) {
        labels.push_back(base);
        continue;
      }
      for (Eigen::Index c = 0; c < nk; ++c) labels.push_back(base + "[" + std::to_string(c) + "]");
    }
  return labels;
}

NormReport compute_norms(const PlantData& plant, const StateSpace& k) {
  NormReport norms;
  const Matrix zero_d = Matrix::Zero(plant.C().rows(), plant.F().cols());
  norms.h_open = h2_norm(StateSpace(plant.A(), plant.F(), plant.C(), zero_d));

  const RiccatiSolution central =
      ric(RiccatiProblem{plant.A(), plant.B(), plant.C(), plant.D(), plant.F()});
  norms.h_centralized = h2_norm(StateSpace(plant.A() - plant.B() * central.L, plant.F(),
                                           plant.C() - plant.D() * central.L, zero_d));
  norms.h_decentralized = h2_norm(closed_loop(plant, k));
  return norms;
}

SynthesisResult synthesize_from_gains(const PlantData& plant, const std::vector<Matrix>& gains,
                                      const Config& config) {
  SynthesisResult result;
  result.assembly = assemble(plant, gains, config.identity_tol, config.stability_margin);
  result.artifacts.K_star = controller(result.assembly);
  Filters f = filters(plant, result.assembly);
  result.artifacts.Phi = std::move(f.Phi);
  result.artifacts.Gamma = std::move(f.Gamma);
  result.artifacts.K_Phi = std::move(f.K_Phi);
  result.artifacts.Q_star = q_star(plant, result.assembly);
  result.degree_bound = degree_bound(plant);
  return result;
}

SynthesisResult synthesize(const PlantData& plant, const Config& config) {
  std::vector<RiccatiSolution> solutions = solve_subproblems(plant, config.parallel);
  std::vector<Matrix> gains;
  for (const auto& s : solutions) gains.push_back(s.L);
  SynthesisResult result = synthesize_from_gains(plant, gains, config);
  result.gains = std::move(solutions);
  result.norms = compute_norms(plant, result.artifacts.K_star);
  return result;
}

}  // namespace poseth2
