#pragma once

// Named, tolerance-quantified checks of the identities, inequalities and
// variational formulas satisfied by translating solitons, evaluated on
// sampled graph patches. Each check computes its two sides through disjoint
// code paths and reports the worst pointwise violation against a
// refinement-validated tolerance C * h^2 * scale.

#include "translab/operators.hpp"
#include "translab/patch.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace translab {

struct CheckResult {
  std::string name;
  std::string anchor;  // the formula being verified, in plain notation
  double max_violation = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  long nodes_evaluated = 0;
  bool asserted = true;  // report-only entries set this false
  std::map<std::string, double> info;
};

struct GridInfo {
  Eigen::Index n = 0, m = 0;
  std::vector<int> shape;
  std::vector<double> spacing;
};

struct DiagnosticsReport {
  std::vector<CheckResult> checks;
  GridInfo grid;
  std::string provenance;  // resolved-config hash, filled by the caller

  bool all_pass() const {
    for (const auto& c : checks) {
      if (c.asserted && !c.pass) return false;
    }
    return true;
  }
  const CheckResult* find(const std::string& name) const {
    for (const auto& c : checks) {
      if (c.name == name) return &c;
    }
    return nullptr;
  }
};

enum class TranslatorAssumption { Auto, Yes, No };

struct DiagnosticsOptions {
  TranslatorAssumption assume = TranslatorAssumption::Auto;
  double tolerance_constant = 10.0;       // C in C * h^2 * scale
  double translator_detect_tol = 1e-8;    // residual bar for Auto
  bool include_boundary_layer = false;
  std::vector<std::string> selected;      // empty = all applicable
  std::optional<int> force_simons_k;      // override the codimension branch
};

// Pointwise identities: H-gradient relation, tension field of the Gauss map,
// the drift equations of the Gauss pairing w and slope v, the composition
// formula, |dGauss|^2 = |B|^2, the radius Laplacian, and the graph slope
// identity. Translator-only checks are skipped on non-translator patches
// unless the assumption forces them.
DiagnosticsReport identity_suite(const GraphPatch& patch,
                                 const DiagnosticsOptions& options = {});

// Pointwise inequalities: the Simons-type bound with its codimension branch,
// |grad v|^2 <= v^4 |B|^2, the h-drift bound on {v < 2}, nonnegativity of
// the v-drift on {v < 3}, and the reported (never asserted) ratio
// inf L v / |B|^2 on {v <= b0}.
DiagnosticsReport inequality_suite(const GraphPatch& patch,
                                   const DiagnosticsOptions& options = {});

struct VariationCheck {
  double fd_value = 0.0;       // central second difference of F at step delta
  double formula_value = 0.0;  // -int phi (L phi + |B|^2 phi) e^{<V,X>} dmu
  double rel_err = 0.0;
  double first_variation = 0.0;  // (F(delta) - F(-delta)) / (2 delta)
  double scale = 0.0;            // F(0)
};

// m = 1 only; phi must vanish on a two-node boundary collar.
VariationCheck second_variation_check(const GraphPatch& patch,
                                      const Field& phi, double delta = 1e-3);

// A bump profile exp(-1 / (1 - |x-center|^2/radius^2)) clipped to 0 outside.
Field bump_field(const Grid& grid, const Eigen::VectorXd& center,
                 double radius);

struct RayleighProbe {
  double min_quotient = 0.0;
  std::vector<double> quotients;
};

// min over seeded random compactly supported phi of
// int phi (-L phi - |B|^2 phi) e^{<V,X>} dmu / int phi^2 e^{<V,X>} dmu.
RayleighProbe stability_rayleigh_probe(const GraphPatch& patch, int trials,
                                       std::uint64_t seed);

struct CompetitorProbe {
  double min_gap = 0.0;
  double min_gap_relative = 0.0;
  bool positive_for_nonzero = true;
  double fitted_exponent = 0.0;  // growth of the gap in the amplitude
  double base_volume = 0.0;
};

// F(graph(u + psi)) - F(graph(u)) over seeded random psi vanishing on the
// boundary with |psi| <= amplitude; includes the small-amplitude growth fit.
CompetitorProbe minimality_competitor_test(const GraphPatch& patch, int trials,
                                           double amplitude,
                                           std::uint64_t seed);

struct GrowthOptions {
  std::optional<Eigen::VectorXd> origin_base;  // base coordinates; default center
  int steps = 24;
  double rho_min_fraction = 0.2;
  double ambient_spacing = 0.0;  // 0 = min(patch spacing) / 2
  std::optional<double> rho_max;  // request; truncated to the inscribed radius
};

struct GrowthProfile {
  std::vector<double> rho;
  std::vector<double> volume;  // conformal volume of D(rho)
  std::vector<double> ratio;   // volume / rho^n
  double max_relative_dip = 0.0;
  bool truncated = false;
  double rho_limit = 0.0;  // inscribed conformal radius actually used

  bool monotone_within(double slack) const {
    return max_relative_dip <= slack;
  }
};

// vol(D(rho)) / rho^n with rho the conformal ambient distance from the
// origin (fast marching) and the conformal volume e^{<V,X>} dmu.
GrowthProfile volume_growth_profile(const GraphPatch& patch,
                                    const GrowthOptions& options = {});

struct OmoriYauSample {
  double epsilon = 0.0;
  Eigen::Index argmax = 0;
  double f_value = 0.0;
  double gradient_norm = 0.0;
  double drift_laplacian = 0.0;
};

struct OmoriYauProbe {
  std::vector<OmoriYauSample> samples;
  bool sublinear_hypothesis = true;  // false when f grows like r or faster
  double fitted_slope = 0.0;         // df/dr fit over the outer radius band

  bool gradient_trend_ok(double slack = 0.10) const {
    for (size_t k = 1; k < samples.size(); ++k) {
      if (samples[k].gradient_norm >
          samples[k - 1].gradient_norm * (1.0 + slack)) {
        return false;
      }
    }
    return true;
  }
};

// Maximize f - eps_k r for a decreasing epsilon ladder; reports |grad f| and
// L f at the argmax. A qualitative desk-scale illustration.
OmoriYauProbe omori_yau_probe(const GraphPatch& patch, const Field& f,
                              const std::vector<double>& epsilons,
                              const Eigen::VectorXd& base);

struct CurvatureGrowthProbe {
  std::vector<double> radii;
  std::vector<double> max_f;  // max of (a^2-r^2)^2 |B|^2 / (h2-h)^2 on D_a
  double fitted_exponent = 0.0;
  bool zero_function = false;
};

// Local curvature-estimate probe on nested extrinsic balls D_a. Requires
// v < 2 and h < h2 on the largest ball.
CurvatureGrowthProbe curvature_estimate_probe(const GraphPatch& patch,
                                              const Eigen::VectorXd& base,
                                              const std::vector<double>& radii,
                                              double h2);

// sqrt(4(n-1) / (k n^2 kappa)); the integral smallness threshold.
double sobolev_threshold(int n, int k, double kappa);

}  // namespace translab
