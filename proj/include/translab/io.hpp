#pragma once

// File formats: the patch container (one-line JSON header + CSV node table,
// bit-exact doubles via shortest round-trip formatting), solver problem
// definitions (JSON), and diagnostics reports (JSON + CSV summary).

#include "translab/diagnostics.hpp"
#include "translab/patch.hpp"
#include "translab/solver.hpp"

#include <cstdint>
#include <string>

namespace translab {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shortest decimal representation that parses back to the identical double.
std::string format_double(double value);

std::string patch_to_string(const GraphPatch& patch);
GraphPatch patch_from_string(const std::string& text);
void write_patch(const std::string& path, const GraphPatch& patch);
GraphPatch read_patch(const std::string& path);

struct Problem {
  Grid grid;
  Eigen::Index codim = 1;
  Eigen::VectorXd direction;
  std::string boundary_kind;       // "exact:grim_reaper" | "exact:bowl" |
                                   // "affine" | "values"
  Eigen::VectorXd affine_offset;   // m
  Eigen::MatrixXd affine_slope;    // m x n
  Eigen::MatrixXd boundary_values; // size x m when kind == "values"
  Formulation formulation = Formulation::Codim1;
  SolverConfig solver;

  BoundaryData boundary() const;
};

Problem problem_from_json(const std::string& text);
Problem read_problem(const std::string& path);

std::string report_to_json(const DiagnosticsReport& report);
std::string report_to_csv(const DiagnosticsReport& report);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// FNV-1a of the canonical resolved-config text; the report provenance tag.
std::string config_hash(const std::string& canonical_config);

}  // namespace translab
