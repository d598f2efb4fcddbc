#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "translab/diagnostics.hpp"
#include "translab/references.hpp"

#include <cmath>

using namespace translab;

namespace {

Eigen::VectorXd vertical(Eigen::Index n) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n + 1);
  v(n) = 1.0;
  return v;
}

GraphPatch grim_reaper_patch(int nodes, double half_width = 1.2) {
  return sample_patch(
      interval_grid(-half_width, half_width, nodes), 1,
      [](const Eigen::VectorXd& x) {
        return Eigen::VectorXd::Constant(1, grim_reaper_reference(x(0)));
      },
      vertical(1));
}

GraphPatch rotated_grim_reaper_patch(int nodes, double psi) {
  Eigen::VectorXd v(3);
  v << 0.0, std::cos(psi), std::sin(psi);
  return sample_patch(
      interval_grid(-1.2, 1.2, nodes), 2,
      [psi](const Eigen::VectorXd& x) {
        Eigen::VectorXd u(2);
        const double g = grim_reaper_reference(x(0));
        u << g * std::cos(psi), g * std::sin(psi);
        return u;
      },
      v);
}

GraphPatch paraboloid_patch(int nodes) {
  return sample_patch(
      interval_grid(-1.0, 1.0, nodes), 1,
      [](const Eigen::VectorXd& x) {
        return Eigen::VectorXd::Constant(1, 0.5 * x.squaredNorm());
      },
      vertical(1));
}

DiagnosticsOptions assume_translator() {
  DiagnosticsOptions opts;
  opts.assume = TranslatorAssumption::Yes;
  return opts;
}

}  // namespace

TEST_CASE("identity suite passes on the sampled grim reaper") {
  const auto patch = grim_reaper_patch(801);
  const auto report = identity_suite(patch, assume_translator());
  REQUIRE(report.checks.size() >= 7);
  for (const auto& check : report.checks) {
    INFO(check.name, " violation ", check.max_violation, " tol ",
         check.tolerance);
    CHECK(check.pass);
  }
  // The w identity is tight: violation <= 5e-4 at 801 nodes.
  const auto* w_check = report.find("w_identity");
  REQUIRE(w_check != nullptr);
  CHECK(w_check->max_violation <= 5e-4);

  // Refinement shrinks identity violations at second order.
  const auto coarse = identity_suite(grim_reaper_patch(401), assume_translator());
  for (const char* name : {"w_identity", "H_gradient", "tension",
                           "radius_laplacian"}) {
    const auto* fine_check = report.find(name);
    const auto* coarse_check = coarse.find(name);
    REQUIRE(fine_check != nullptr);
    REQUIRE(coarse_check != nullptr);
    const double ratio = fine_check->max_violation / coarse_check->max_violation;
    INFO(name, " refinement ratio ", ratio);
    CHECK(ratio > 0.15);
    CHECK(ratio < 0.45);
  }
}

TEST_CASE("identity suite on the rotated grim reaper in R^3") {
  const auto patch = rotated_grim_reaper_patch(801, EIGEN_PI / 6);
  const auto report = identity_suite(patch, assume_translator());
  for (const auto& check : report.checks) {
    INFO(check.name, " violation ", check.max_violation, " tol ",
         check.tolerance);
    CHECK(check.pass);
  }
  // The flat-normal-bundle branch applies and the general formula reduces
  // to it.
  CHECK(report.find("w_identity") != nullptr);
  CHECK(report.find("w_identity_general") != nullptr);
  // v < 2 nodes exist and are checked.
  CHECK(report.find("v_identity")->nodes_evaluated > 100);
}

TEST_CASE("identity suite on a flat tangent-direction plane") {
  Eigen::VectorXd tangent(2);
  tangent << 1.0, 0.0;
  const auto plane = sample_patch(
      interval_grid(0.0, 1.0, 41), 1,
      [](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(1); }, tangent);
  const auto report = identity_suite(plane);  // auto-detects a translator
  for (const auto& check : report.checks) {
    INFO(check.name);
    CHECK(check.pass);
    CHECK(check.info.at("translator") == 1.0);
    if (check.name != "radius_laplacian") {
      CHECK(check.max_violation <= 1e-10);
    }
  }
}

TEST_CASE("negative control: the paraboloid fails translator-only checks") {
  const auto patch = paraboloid_patch(201);

  // Auto detection flags it as a non-translator and skips those checks.
  const auto auto_report = identity_suite(patch);
  CHECK(auto_report.find("w_identity") == nullptr);
  CHECK(auto_report.find("gauss_energy") != nullptr);

  // Forcing the assumption shows every translator-only identity broken by
  // more than ten times its tolerance.
  const auto forced = identity_suite(patch, assume_translator());
  for (const char* name :
       {"w_identity", "H_gradient", "tension", "v_identity", "composition"}) {
    const auto* check = forced.find(name);
    REQUIRE(check != nullptr);
    INFO(name, " violation ", check->max_violation, " tol ", check->tolerance);
    CHECK_FALSE(check->pass);
    CHECK(check->max_violation > 10.0 * check->tolerance);
  }
  // Definition-level identities still hold on the non-translator.
  for (const char* name : {"gauss_energy", "radius_laplacian", "graph_slope"}) {
    const auto* check = forced.find(name);
    REQUIRE(check != nullptr);
    CHECK(check->pass);
  }
}

TEST_CASE("check selection filter") {
  auto opts = assume_translator();
  opts.selected = {"w_identity", "graph_slope"};
  const auto report = identity_suite(grim_reaper_patch(201), opts);
  CHECK(report.checks.size() == 2);
  CHECK(report.find("w_identity") != nullptr);
  CHECK(report.find("graph_slope") != nullptr);
}

TEST_CASE("inequality suite on the grim reaper") {
  const auto patch = grim_reaper_patch(801);
  const auto report = inequality_suite(patch, assume_translator());
  for (const auto& check : report.checks) {
    INFO(check.name, " violation ", check.max_violation, " tol ",
         check.tolerance);
    CHECK(check.pass);
  }
  const auto* simons = report.find("simons");
  REQUIRE(simons != nullptr);
  CHECK(simons->info.at("k") == 2.0);  // m = 1 branch

  // The grim reaper is the equality case of the Simons bound: the slack
  // stays within discretization error of zero on both sides.
  CHECK(std::abs(simons->info.at("min_slack")) <= 1e-3);

  // h_drift attains near-equality at x = 0 but stays nonnegative.
  const auto* h_drift = report.find("h_drift");
  REQUIRE(h_drift != nullptr);
  CHECK(h_drift->info.at("min_slack") >= -h_drift->tolerance);
  CHECK(h_drift->info.at("min_slack") <= 0.01);

  // K0 ratio is reported, never asserted.
  const auto* ratio = report.find("v_drift_ratio");
  REQUIRE(ratio != nullptr);
  CHECK_FALSE(ratio->asserted);
  CHECK(ratio->info.at("K0_estimate") > 0.0);
}

TEST_CASE("simons branch selection and forcing") {
  // Rotated grim reaper: m = 2 with flat normal bundle -> k = 2.
  const auto rotated = rotated_grim_reaper_patch(401, EIGEN_PI / 6);
  const auto report = inequality_suite(rotated, assume_translator());
  CHECK(report.find("simons")->info.at("k") == 2.0);
  CHECK(report.find("simons")->pass);

  // Forcing k = 3 on an m >= 2 patch only adds slack.
  auto opts = assume_translator();
  opts.force_simons_k = 3;
  const auto forced = inequality_suite(rotated, opts);
  CHECK(forced.find("simons")->info.at("k") == 3.0);
  CHECK(forced.find("simons")->pass);
  CHECK(forced.find("simons")->info.at("min_slack") >=
        report.find("simons")->info.at("min_slack"));

  // A genuinely curved normal bundle selects k = 3 (definition-level run on
  // a non-translator patch).
  const auto curved = sample_patch(
      square_grid(-1.0, 1.0, 41), 2,
      [](const Eigen::VectorXd& x) {
        Eigen::VectorXd u(2);
        u << 0.5 * x(0) * x(0), x(0) * x(1);
        return u;
      },
      Eigen::Vector4d(0.0, 0.0, 0.0, 1.0));
  const auto curved_report = inequality_suite(curved);
  REQUIRE(!curved_report.checks.empty());
  CHECK(curved_report.checks.front().info.at("k_branch") == 3.0);
}

TEST_CASE("second variation check") {
  const auto patch = grim_reaper_patch(801);
  const Field phi = bump_field(patch.grid, Eigen::VectorXd::Zero(1), 0.8);

  // phi = 0: both sides vanish.
  const auto zero = second_variation_check(
      patch, Field::Zero(patch.grid.size()), 1e-3);
  CHECK(std::abs(zero.fd_value) < 1e-8);
  CHECK(zero.formula_value == 0.0);
  CHECK(std::abs(zero.first_variation) < 1e-12);

  const auto check = second_variation_check(patch, phi, 1e-3);
  CHECK(check.rel_err <= 1e-2);
  CHECK(check.formula_value > 0.0);  // stable direction

  // phi without compact support is rejected.
  CHECK_THROWS_AS(
      (void)second_variation_check(patch, Field::Ones(patch.grid.size()), 1e-3),
      std::invalid_argument);
}

TEST_CASE("first variation vanishes on the solved translator") {
  // Criticality of the weighted volume at a translator.
  const auto patch = grim_reaper_patch(1601);
  const Field phi = bump_field(patch.grid, Eigen::VectorXd::Zero(1), 0.8);
  const auto check = second_variation_check(patch, phi, 1e-3);
  CHECK(std::abs(check.first_variation) <= 1e-6 * check.scale);
}

TEST_CASE("stability rayleigh probe") {
  const auto patch = grim_reaper_patch(401);
  const auto probe = stability_rayleigh_probe(patch, 25, 42);
  CHECK(probe.min_quotient >= -1e-6);

  // Deterministic for a fixed seed.
  const auto again = stability_rayleigh_probe(patch, 25, 42);
  CHECK(probe.min_quotient == again.min_quotient);

  // On a flat patch the quotient is a positive Dirichlet quotient.
  Eigen::VectorXd tangent(2);
  tangent << 1.0, 0.0;
  const auto plane = sample_patch(
      interval_grid(0.0, 1.0, 101), 1,
      [](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(1); }, tangent);
  CHECK(stability_rayleigh_probe(plane, 10, 7).min_quotient > 0.0);
}

TEST_CASE("minimality competitor test") {
  const auto patch = grim_reaper_patch(401);
  const auto probe = minimality_competitor_test(patch, 50, 0.1, 42);
  CHECK(probe.positive_for_nonzero);
  CHECK(probe.min_gap > 0.0);
  CHECK(probe.min_gap_relative >= -1e-8);
  CHECK(probe.fitted_exponent > 1.8);
  CHECK(probe.fitted_exponent < 2.2);

  // The unperturbed graph is the equality case.
  GraphPatch same = patch;
  CHECK(weighted_volume(same) == weighted_volume(patch));
}

TEST_CASE("volume growth profile") {
  // Flat line through the origin with tangent V: the profile is constant 2.
  Eigen::VectorXd tangent(2);
  tangent << 1.0, 0.0;
  const auto line = sample_patch(
      interval_grid(-0.6, 0.6, 241), 1,
      [](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(1); }, tangent);
  GrowthOptions line_opts;
  line_opts.steps = 20;
  line_opts.ambient_spacing = 0.002;
  const auto line_profile = volume_growth_profile(line, line_opts);
  for (const double ratio : line_profile.ratio) {
    CHECK(std::abs(ratio - 2.0) / 2.0 < 0.02);
  }

  // Grim reaper: nondecreasing ratio within slack (coarse ambient grid
  // here; the acceptance suite runs the fine one).
  const auto patch = grim_reaper_patch(401);
  GrowthOptions opts;
  opts.steps = 20;
  opts.ambient_spacing = 0.003;
  const auto profile = volume_growth_profile(patch, opts);
  CHECK(profile.rho.size() == 20);
  CHECK(profile.max_relative_dip <= 5e-3);

  // Volume is monotone in rho by set inclusion.
  for (size_t k = 0; k + 1 < profile.volume.size(); ++k) {
    CHECK(profile.volume[k] <= profile.volume[k + 1] + 1e-12);
  }

  // Truncation is reported when the request exceeds the inscribed radius.
  GrowthOptions truncated = opts;
  truncated.rho_max = 100.0;
  CHECK(volume_growth_profile(patch, truncated).truncated);
}

TEST_CASE("omori yau probe") {
  const auto patch = grim_reaper_patch(561, 1.4);
  const Eigen::VectorXd base = Eigen::VectorXd::Zero(2);
  const Field r = extrinsic_radius(patch, base);

  // Constant f: gradient and drift Laplacian vanish at the argmax.
  const auto flat_probe = omori_yau_probe(
      patch, Field::Constant(patch.grid.size(), 2.0), {0.5, 0.2}, base);
  CHECK(flat_probe.sublinear_hypothesis);
  for (const auto& sample : flat_probe.samples) {
    CHECK(std::abs(sample.gradient_norm) < 1e-9);
    CHECK(std::abs(sample.drift_laplacian) < 1e-8);
  }

  // Sublinear f = sqrt(1 + r): |grad f| at the argmax is nonincreasing in
  // the epsilon ladder, within ten percent slack.
  Field f(patch.grid.size());
  for (Eigen::Index node = 0; node < patch.grid.size(); ++node) {
    f(node) = std::sqrt(1.0 + r(node));
  }
  const auto probe =
      omori_yau_probe(patch, f, {0.5, 0.2, 0.1, 0.05}, base);
  CHECK(probe.sublinear_hypothesis);
  CHECK(probe.gradient_trend_ok(0.10));

  // Linear f = r violates the sublinearity hypothesis; flagged.
  CHECK_FALSE(omori_yau_probe(patch, r, {0.5, 0.2}, base).sublinear_hypothesis);
}

TEST_CASE("curvature estimate probe") {
  // Flat plane family: the function is identically zero.
  Eigen::VectorXd tangent(2);
  tangent << 1.0, 0.0;
  const auto plane = sample_patch(
      interval_grid(-1.0, 1.0, 201), 1,
      [](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(1); }, tangent);
  const auto flat_probe = curvature_estimate_probe(
      plane, Eigen::VectorXd::Zero(2), {0.3, 0.5, 0.8}, 2.95);
  CHECK(flat_probe.zero_function);

  // Grim reaper on extrinsic balls small enough to keep h below h2 < 3.
  const auto patch = grim_reaper_patch(801);
  const auto probe = curvature_estimate_probe(
      patch, Eigen::VectorXd::Zero(2), {0.5, 0.6, 0.7, 0.78}, 2.95);
  CHECK_FALSE(probe.zero_function);
  CHECK(probe.fitted_exponent <= 3.5);
  for (size_t k = 0; k + 1 < probe.max_f.size(); ++k) {
    CHECK(probe.max_f[k] <= probe.max_f[k + 1] + 1e-12);
  }

  // Larger balls push h past h2 and are rejected.
  CHECK_THROWS_AS(
      (void)curvature_estimate_probe(patch, Eigen::VectorXd::Zero(2),
                                     {0.6, 0.8, 1.0, 1.2}, 2.95),
      std::domain_error);
}

TEST_CASE("sobolev threshold") {
  CHECK(sobolev_threshold(2, 2, 1.0) ==
        doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
  CHECK(sobolev_threshold(3, 3, 1.0) ==
        doctest::Approx(std::sqrt(8.0 / 27.0)).epsilon(1e-15));
  // Homogeneity in kappa.
  for (const double kappa : {0.5, 2.0, 7.3}) {
    CHECK(sobolev_threshold(2, 2, kappa) ==
          doctest::Approx(sobolev_threshold(2, 2, 1.0) / std::sqrt(kappa))
              .epsilon(1e-14));
  }
  CHECK_THROWS_AS((void)sobolev_threshold(1, 2, 1.0), std::domain_error);
  CHECK_THROWS_AS((void)sobolev_threshold(2, 4, 1.0), std::domain_error);
  CHECK_THROWS_AS((void)sobolev_threshold(2, 2, 0.0), std::domain_error);
}
