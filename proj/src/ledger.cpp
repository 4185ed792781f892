#include "ydl/ledger.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "ydl/expm.hpp"
#include "ydl/young.hpp"

namespace ydl {

ConstantsLedger build_ledger(const SystemSpec& spec, double margin) {
  spec.validate();
  ConstantsLedger led;
  led.beta0 = spec.beta0;
  led.beta = spec.beta;
  led.nu = spec.nu;
  led.r = spec.r;
  led.margin = margin;

  led.c_f = functional_lipschitz(spec.drift);
  led.c_g = functional_lipschitz(spec.diffusion);
  led.f0 = functional_value_at_zero(spec.drift).norm();
  led.g0 = functional_value_at_zero(spec.diffusion).norm();
  led.norm_a = operator_norm(spec.A);

  led.k_big = k_constant(spec.beta, spec.nu);
  led.k0_big = k_constant(spec.beta0, spec.nu);

  const DecayConstants dc = decay_constants(spec.A, margin);
  led.c_a = dc.c_a;
  led.lambda = dc.lambda;

  led.l_f = led.norm_a + led.c_f;
  led.kappa = 4.0 * led.l_f * led.r + 2.0;
  led.l_big = led.c_a * led.c_f * std::exp(led.lambda * led.r);
  led.lambda0 = led.lambda - led.l_big;
  led.hypothesis_ok = led.c_a * led.c_f < led.lambda * std::exp(-led.lambda * led.r);

  const double inf = std::numeric_limits<double>::infinity();
  led.greedy_threshold =
      led.c_g > 0.0
          ? 1.0 / (2.0 * (led.k_big + 1.0) * led.c_g * std::pow(led.r, led.beta))
          : inf;
  led.greedy_threshold_first =
      led.c_g > 0.0
          ? 1.0 / (2.0 * (led.k0_big + 1.0) * led.c_g * std::pow(led.r, led.beta0))
          : inf;

  led.m1 = led.k_big * led.c_a * std::exp(4.0 * led.lambda * led.r) *
           std::pow(led.r, led.nu) * (1.0 + led.norm_a * led.r);
  led.m3 = led.k_big * std::pow(led.r, led.nu) *
           std::exp((led.l_f + 4.0 * led.lambda) * led.r) *
           (1.0 + led.c_a * led.l_f * led.r * (1.0 + led.norm_a * led.r));
  led.m5 = led.m1 + led.m3;
  led.m7 = led.m5 * std::exp(4.0 * led.c_f * led.r);
  return led;
}

ConstantsLedger build_ledger(const SystemSpec& spec) {
  return build_ledger(spec, spec.margin);
}

namespace {
void refresh_derived(ConstantsLedger& led) {
  if (led.m2.is_set() && led.m4.is_set()) {
    led.m6 = led.m2.value + led.m4.value;
    led.m8 = 1.0 + led.m6 +
             led.m5 * std::exp(4.0 * led.c_f * led.r) * (4.0 * led.c_g * led.r + 1.0);
  }
}
}  // namespace

void set_fitted_m2_m4(ConstantsLedger& led, const FittedConstant& m2,
                      const FittedConstant& m4) {
  led.m2 = m2;
  led.m4 = m4;
  refresh_derived(led);
}

void set_fitted_m9(ConstantsLedger& led, const FittedConstant& m9) { led.m9 = m9; }

void set_fitted_d(ConstantsLedger& led, const FittedConstant& d) { led.d_first = d; }

std::string ledger_json(const ConstantsLedger& led) {
  nlohmann::json j;
  auto num = [](double v) -> nlohmann::json {
    if (std::isfinite(v)) return v;
    return v > 0 ? "inf" : "-inf";
  };
  j["exponents"] = {{"beta0", led.beta0}, {"beta", led.beta}, {"nu", led.nu}};
  j["r"] = led.r;
  j["margin"] = led.margin;
  j["functional"] = {{"C_f", led.c_f}, {"C_g", led.c_g}, {"f0", led.f0},
                     {"g0", led.g0},   {"norm_A", led.norm_a}};
  j["young"] = {{"K", led.k_big}, {"K0", led.k0_big}};
  j["decay"] = {{"C_A", led.c_a},
                {"lambda", led.lambda},
                {"L_f", led.l_f},
                {"kappa", led.kappa},
                {"L", led.l_big},
                {"lambda0", led.lambda0},
                {"hypothesis_ok", led.hypothesis_ok}};
  j["greedy_threshold"] = num(led.greedy_threshold);
  j["greedy_threshold_first"] = num(led.greedy_threshold_first);
  j["closed_form"] = {{"M1", led.m1}, {"M3", led.m3}, {"M5", led.m5}, {"M7", led.m7}};
  auto fitted = [](const FittedConstant& f) {
    return nlohmann::json{{"value", f.value},
                          {"raw", f.raw},
                          {"safety", f.safety},
                          {"provenance", f.provenance},
                          {"ensemble_seed", f.ensemble_seed},
                          {"ensemble_paths", f.ensemble_paths},
                          {"grid_h", f.grid_h},
                          {"intervals", f.intervals}};
  };
  j["fitted"] = {{"M2", fitted(led.m2)},
                 {"M4", fitted(led.m4)},
                 {"M9", fitted(led.m9)},
                 {"D", fitted(led.d_first)}};
  j["derived"] = {{"M6", led.m6}, {"M8", led.m8}};
  return j.dump(2);
}

}  // namespace ydl
