#pragma once

namespace poseth2 {

/// Numerical settings shared by synthesis and verification. Reports echo the
/// values used so stored results stay interpretable if defaults change.
struct Config {
  double atol = 1e-9;              // zero test for incidence patterns on plant data
  double stability_margin = 0.0;   // stable means every Re(lambda) < -margin
  int freq_samples = 20;           // evaluation points for transfer-matrix checks
  bool parallel = true;            // solve the per-element Riccati problems concurrently

  double identity_tol = 1e-9;      // assembly identities
  double transfer_atol = 1e-8;     // incidence membership of sampled transfer matrices
  double inversion_tol = 1e-8;     // Phi Gamma = Gamma Phi = I
  double path_formula_tol = 1e-7;  // Gamma entries against chain sums of -Phi
  double factorization_tol = 1e-7; // K* = K_Phi Gamma, Q* against K*, recovered K
  double spectrum_tol = 1e-6;      // closed-loop spectrum against the assembled A
  double norm_order_tol = 1e-9;    // h_centralized <= h_decentralized
};

}  // namespace poseth2
