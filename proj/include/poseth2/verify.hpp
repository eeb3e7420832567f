#pragma once

#include <string>
#include <vector>

#include "poseth2/config.hpp"
#include "poseth2/synthesis.hpp"

namespace poseth2 {

/// Outcome of one structural or numerical check. `passed` holds exactly when
/// `measured <= tolerance`.
struct Verdict {
  std::string check_name;
  bool passed = false;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string reference;  // the property being checked, in words
};

struct VerifyReport {
  std::vector<Verdict> verdicts;
  NormReport norms;

  bool all_passed() const;
};

/// Check names in the fixed order run_all() reports them.
const std::vector<std::string>& check_registry();

/// Re-checks a controller and its companion realizations against the plant:
/// internal stability, closed-loop spectrum, degree bound, incidence
/// membership at sampled frequencies, filter inversion, chain formula for
/// Gamma, factorization K* = K_Phi Gamma, reparametrization identities, H2
/// column separability and the centralized lower bound.
///
/// Failed checks are verdicts, not exceptions. Throws DimensionMismatch when
/// the realizations do not fit the plant.
VerifyReport run_all(const PlantData& plant, const ControllerArtifacts& artifacts,
                     const Config& config = {});

/// Gamma(s) from Phi(s) by summing, over every chain j -> ... -> i, the
/// product of -Phi_{l<-k} along the chain.
CMatrix gamma_from_chains(const Poset& poset, const BlockDims& states, const CMatrix& phi_value);

/// H2 norm by fixed-step Simpson quadrature of ||C e^{At} B||_F^2 over
/// [0, horizon]. Test oracle for h2_norm(). Throws UnstableSystem.
double empirical_h2(const StateSpace& sys, double horizon, double step);

}  // namespace poseth2
