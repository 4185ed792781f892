#pragma once

#include <cstdint>
#include <string>

#include "ydl/system.hpp"

namespace ydl {

/// Empirically calibrated constant: minimal value that makes its bound hold on
/// a registered ensemble, stored with a safety factor and the ensemble
/// fingerprint so reports can disclose provenance.
struct FittedConstant {
  double value = 0.0;      ///< raw * safety, the number used in bounds
  double raw = 0.0;        ///< minimal empirical constant
  double safety = 1.5;
  std::string provenance = "unset";  ///< "fitted" once calibrated
  std::uint64_t ensemble_seed = 0;
  int ensemble_paths = 0;
  double grid_h = 0.0;
  int intervals = 0;

  bool is_set() const { return provenance != "unset"; }
};

/// Every constant of the estimates in one place. Closed-form entries are
/// computed here; existential constants (M2, M4, M9, D) are calibrated by the
/// bounds engine and injected via the set_fitted_* helpers, which also refresh
/// the entries derived from them (M6, M8).
struct ConstantsLedger {
  // Exponents and geometry.
  double beta0 = 0.0, beta = 0.0, nu = 0.0, r = 0.0;
  // Functional data.
  double c_f = 0.0;    ///< Lipschitz constant of the drift functional
  double c_g = 0.0;    ///< Lipschitz constant of the diffusion functional
  double f0 = 0.0;     ///< ||f(0)||
  double g0 = 0.0;     ///< ||g(0)||
  double norm_a = 0.0; ///< ||A||
  // Young–Loève constants at beta+nu and beta0+nu.
  double k_big = 0.0, k0_big = 0.0;
  // Semigroup decay and the induced rates.
  double margin = 0.0;
  double c_a = 0.0, lambda = 0.0;
  double l_f = 0.0;     ///< ||A|| + C_f
  double kappa = 0.0;   ///< 4 L_f r + 2
  double l_big = 0.0;   ///< L = C_A C_f e^{lambda r}
  double lambda0 = 0.0; ///< lambda - L
  bool hypothesis_ok = false;  ///< C_A C_f < lambda e^{-lambda r}
  // Greedy stopping thresholds (the paper overloads one symbol for this and
  // for the deterministic solution component; here they get distinct names).
  double greedy_threshold = 0.0;        ///< 1 / (2 (K+1) C_g r^beta)
  double greedy_threshold_first = 0.0;  ///< 1 / (2 (K0+1) C_g r^beta0)
  // Closed-form M constants.
  double m1 = 0.0;  ///< K C_A e^{4 lambda r} r^nu (1 + ||A|| r)
  double m3 = 0.0;  ///< K r^nu e^{(L_f + 4 lambda) r} [1 + C_A L_f r (1 + ||A|| r)]
  double m5 = 0.0;  ///< M1 + M3
  double m7 = 0.0;  ///< M5 e^{4 C_f r}
  // Calibrated constants and the entries derived from them.
  FittedConstant m2, m4, m9, d_first;
  double m6 = 0.0;  ///< M2 + M4 (once fitted)
  double m8 = 0.0;  ///< 1 + M6 + M5 e^{4 C_f r} (4 C_g r + 1) (once fitted)
};

/// Populates all closed-form entries; margin overrides spec.margin.
ConstantsLedger build_ledger(const SystemSpec& spec, double margin);
ConstantsLedger build_ledger(const SystemSpec& spec);

/// Inject calibrated constants; refreshes M6 and M8.
void set_fitted_m2_m4(ConstantsLedger& led, const FittedConstant& m2,
                      const FittedConstant& m4);
void set_fitted_m9(ConstantsLedger& led, const FittedConstant& m9);
void set_fitted_d(ConstantsLedger& led, const FittedConstant& d);

/// JSON rendering (constants plus provenance), for reports and the CLI.
std::string ledger_json(const ConstantsLedger& led);

}  // namespace ydl
