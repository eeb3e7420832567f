#include "poseth2/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <unsupported/Eigen/MatrixFunctions>

#include "poseth2/error.hpp"

namespace poseth2 {

namespace {

struct CheckSpec {
  const char* name;
  const char* reference;
};

// Registry order is the report order.
constexpr CheckSpec kChecks[] = {
    {"bigA_stable", "assembled closed-loop matrix bigA is Hurwitz"},
    {"closed_loop_stable", "plant in feedback with K* is internally stable"},
    {"closed_loop_spectrum", "closed-loop spectrum equals spec(bigA) as a multiset"},
    {"controller_degree_bound", "deg K* = sum of n(strict downstream) <= sigma * n_max"},
    {"controller_feedthrough_incidence", "D_K lies exactly in the incidence algebra"},
    {"controller_incidence", "K*(s) lies in the incidence algebra"},
    {"phi_incidence", "Phi(s) lies in the incidence algebra"},
    {"gamma_incidence", "Gamma(s) lies in the incidence algebra"},
    {"k_phi_incidence", "K_Phi(s) lies in the incidence algebra"},
    {"q_star_incidence", "Q*(s) lies in the incidence algebra"},
    {"filter_diagonal_identity", "diagonal blocks of Phi and Gamma are identities"},
    {"filter_inversion", "Phi Gamma = Gamma Phi = I"},
    {"gamma_path_formula", "Gamma_{i<-j} is the chain sum of products of -Phi"},
    {"controller_factorization", "K* = K_Phi Gamma"},
    {"reparametrization", "Q* = K* (I - P22 K*)^-1 P21"},
    {"recovered_controller", "Q* P21+ (I + P22 Q* P21+)^-1 = K*"},
    {"h2_column_separability", "||T_zw||^2 is the sum of its squared block-column norms"},
    {"centralized_lower_bound", "h_centralized <= h_decentralized"},
};

double max_over(const std::vector<Complex>& points, const std::function<double(Complex)>& f) {
  double worst = 0.0;
  for (Complex s : points) worst = std::max(worst, f(s));
  return worst;
}

void require_fit(const StateSpace& sys, Eigen::Index outputs, Eigen::Index inputs,
                 const char* name) {
  if (sys.outputs() != outputs || sys.inputs() != inputs) {
    throw Error(ErrorKind::DimensionMismatch,
                std::string(name) + " is " + std::to_string(sys.outputs()) + "x" +
                    std::to_string(sys.inputs()) + ", plant needs " + std::to_string(outputs) +
                    "x" + std::to_string(inputs));
  }
}

// Multiset distance between two spectra: greedy nearest matching after the
// lexicographic sort.
double spectrum_distance(std::vector<Complex> a, std::vector<Complex> b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  std::vector<bool> used(b.size(), false);
  for (Complex x : a) {
    std::size_t best = b.size();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < b.size(); ++k) {
      if (used[k]) continue;
      const double d = std::abs(x - b[k]);
      if (d < best_d) {
        best_d = d;
        best = k;
      }
    }
    used[best] = true;
    worst = std::max(worst, best_d);
  }
  return worst;
}

}  // namespace

bool VerifyReport::all_passed() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.passed; });
}

const std::vector<std::string>& check_registry() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& c : kChecks) out.emplace_back(c.name);
    return out;
  }();
  return names;
}

CMatrix gamma_from_chains(const Poset& poset, const BlockDims& states, const CMatrix& phi_value) {
  const auto n = states.total();
  CMatrix gamma = CMatrix::Zero(n, n);
  auto phi = [&](ElementIndex l, ElementIndex k) {
    return phi_value.block(states.offset(l), states.offset(k), states.size(l), states.size(k));
  };
  for (ElementIndex i = 0; i < poset.size(); ++i)
    for (ElementIndex j = 0; j < poset.size(); ++j) {
      if (!poset.leq(j, i)) continue;
      CMatrix sum = CMatrix::Zero(states.size(i), states.size(j));
      for (const Chain& chain : poset.chains_between(j, i)) {
        CMatrix term = CMatrix::Identity(states.size(i), states.size(i));
        for (auto link = chain.rbegin(); link != chain.rend(); ++link) {
          term = term * (-phi(link->second, link->first));
        }
        sum += term;
      }
      gamma.block(states.offset(i), states.offset(j), states.size(i), states.size(j)) = sum;
    }
  return gamma;
}

VerifyReport run_all(const PlantData& plant, const ControllerArtifacts& art, const Config& config) {
  const auto& part = plant.partition();
  const auto n = part.states.total();
  const auto m = part.inputs.total();
  const auto w = part.disturbances.total();
  require_fit(art.K_star, m, n, "controller");
  require_fit(art.Phi, n, n, "Phi");
  require_fit(art.Gamma, n, n, "Gamma");
  require_fit(art.K_Phi, m, n, "K_Phi");
  require_fit(art.Q_star, m, w, "Q*");

  VerifyReport report;
  std::size_t next = 0;
  auto record = [&](double measured, double tolerance) {
    const CheckSpec& spec = kChecks[next++];
    report.verdicts.push_back(
        Verdict{spec.name, measured <= tolerance, measured, tolerance, spec.reference});
  };

  const double stable_tol = -std::max(config.stability_margin, 1e-12);
  const StateSpace loop = closed_loop(plant, art.K_star);
  const std::vector<Complex> points = sample_points(
      config.freq_samples, {plant.A(), art.K_star.A, art.Phi.A, art.Gamma.A, art.Q_star.A,
                            art.K_Phi.A});
  const CMatrix eye = CMatrix::Identity(n, n);

  record(spectral_abscissa(art.Q_star.A), stable_tol);
  record(spectral_abscissa(loop.A), stable_tol);
  record(spectrum_distance(sorted_eigenvalues(loop.A), sorted_eigenvalues(art.Q_star.A)),
         config.spectrum_tol);

  {
    // Excess over the exact count plus excess over the coarse bound.
    const auto exact = degree_bound(plant);
    Eigen::Index n_max = 0;
    for (auto s : part.states.sizes()) n_max = std::max(n_max, s);
    const auto coarse = static_cast<Eigen::Index>(plant.poset().sigma()) * n_max;
    const auto order = art.K_star.order();
    record(static_cast<double>(std::abs(order - exact) + std::max<Eigen::Index>(0, order - coarse)),
           0.0);
  }

  const IncidencePattern ctrl = plant.controller_pattern();
  const IncidencePattern st = plant.state_pattern();
  const IncidencePattern par = plant.parameter_pattern();
  record(ctrl.violation(art.K_star.D), 0.0);
  record(max_over(points, [&](Complex s) { return ctrl.violation(evaluate(art.K_star, s)); }),
         config.transfer_atol);
  record(max_over(points, [&](Complex s) { return st.violation(evaluate(art.Phi, s)); }),
         config.transfer_atol);
  record(max_over(points, [&](Complex s) { return st.violation(evaluate(art.Gamma, s)); }),
         config.transfer_atol);
  record(max_over(points, [&](Complex s) { return ctrl.violation(evaluate(art.K_Phi, s)); }),
         config.transfer_atol);
  record(max_over(points, [&](Complex s) { return par.violation(evaluate(art.Q_star, s)); }),
         config.transfer_atol);

  record(max_over(points,
                  [&](Complex s) {
                    const CMatrix phi = evaluate(art.Phi, s);
                    const CMatrix gamma = evaluate(art.Gamma, s);
                    double worst = 0.0;
                    for (ElementIndex j = 0; j < plant.poset().size(); ++j) {
                      const auto o = part.states.offset(j);
                      const auto k = part.states.size(j);
                      const CMatrix id = CMatrix::Identity(k, k);
                      worst = std::max({worst, (phi.block(o, o, k, k) - id).norm(),
                                        (gamma.block(o, o, k, k) - id).norm()});
                    }
                    return worst;
                  }),
         config.transfer_atol);

  record(max_over(points,
                  [&](Complex s) {
                    const CMatrix phi = evaluate(art.Phi, s);
                    const CMatrix gamma = evaluate(art.Gamma, s);
                    return std::max((phi * gamma - eye).norm(), (gamma * phi - eye).norm());
                  }),
         config.inversion_tol);

  record(max_over(points,
                  [&](Complex s) {
                    const CMatrix chains =
                        gamma_from_chains(plant.poset(), part.states, evaluate(art.Phi, s));
                    return (chains - evaluate(art.Gamma, s)).norm();
                  }),
         config.path_formula_tol);

  record(max_over(points,
                  [&](Complex s) {
                    return (evaluate(art.K_star, s) -
                            evaluate(art.K_Phi, s) * evaluate(art.Gamma, s))
                        .norm();
                  }),
         config.factorization_tol);

  const CMatrix a_c = plant.A().cast<Complex>();
  record(max_over(points,
                  [&](Complex s) {
                    const CMatrix resolvent = s * eye - a_c;
                    Eigen::PartialPivLU<CMatrix> lu(resolvent);
                    const CMatrix p21 = lu.solve(plant.F().cast<Complex>());
                    const CMatrix p22 = lu.solve(plant.B().cast<Complex>());
                    const CMatrix k = evaluate(art.K_star, s);
                    const CMatrix q_bar =
                        k * (CMatrix::Identity(n, n) - p22 * k).partialPivLu().solve(p21);
                    return (q_bar - evaluate(art.Q_star, s)).norm();
                  }),
         config.factorization_tol);

  record(max_over(points,
                  [&](Complex s) {
                    return (recover_K_from_Q(plant, evaluate(art.Q_star, s), s) -
                            evaluate(art.K_star, s))
                        .norm();
                  }),
         config.factorization_tol);

  report.norms = compute_norms(plant, art.K_star);
  {
    const double total = report.norms.h_decentralized;
    double column_sum = 0.0;
    for (ElementIndex j = 0; j < plant.poset().size(); ++j) {
      StateSpace column = loop;
      column.B = loop.B.middleCols(part.disturbances.offset(j), part.disturbances.size(j));
      column.D = loop.D.middleCols(part.disturbances.offset(j), part.disturbances.size(j));
      const double h = h2_norm(column);
      column_sum += h * h;
    }
    const double gap = std::isfinite(total)
                           ? std::abs(total * total - column_sum) / std::max(1.0, total * total)
                           : std::numeric_limits<double>::infinity();
    record(gap, config.identity_tol);
  }
  record(report.norms.h_centralized - report.norms.h_decentralized, config.norm_order_tol);
  return report;
}

double empirical_h2(const StateSpace& sys, double horizon, double step) {
  if (sys.order() == 0) return 0.0;
  if (!is_stable(sys.A)) throw Error(ErrorKind::UnstableSystem, "empirical H2 needs a stable A");
  if (sys.D.size() > 0 && sys.D.cwiseAbs().maxCoeff() != 0.0) {
    return std::numeric_limits<double>::infinity();
  }
  auto intervals = static_cast<long>(std::ceil(horizon / step));
  if (intervals % 2 == 1) ++intervals;
  const double h = horizon / static_cast<double>(intervals);
  const Matrix propagator = (sys.A * h).exp();

  // Simpson weights 1, 4, 2, 4, ..., 4, 1.
  Matrix impulse = sys.B;  // e^{At} B
  double sum = 0.0;
  for (long k = 0; k <= intervals; ++k) {
    const double weight = (k == 0 || k == intervals) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    sum += weight * (sys.C * impulse).squaredNorm();
    impulse = propagator * impulse;
  }
  return std::sqrt(sum * h / 3.0);
}

}  // namespace poseth2
