#include "translab/io.hpp"

#include "translab/references.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <sstream>

namespace translab {

using nlohmann::json;

std::string format_double(double value) {
  char buffer[40];
  const auto result =
      std::to_chars(buffer, buffer + sizeof(buffer), value,
                    std::chars_format::general);
  return std::string(buffer, result.ptr);
}

namespace {

double parse_double(std::string_view token) {
  double value = 0.0;
  const auto result =
      std::from_chars(token.data(), token.data() + token.size(), value);
  if (result.ec != std::errc() || result.ptr != token.data() + token.size()) {
    throw IoError("patch table: malformed number '" + std::string(token) + "'");
  }
  return value;
}

json grid_to_json(const Grid& grid) {
  json j;
  for (Eigen::Index i = 0; i < grid.dim(); ++i) {
    j["lo"].push_back(grid.lo()(i));
    j["hi"].push_back(grid.hi()(i));
    j["shape"].push_back(grid.shape()(i));
  }
  return j;
}

Grid grid_from_json(const json& j) {
  const auto& lo = j.at("lo");
  const auto& hi = j.at("hi");
  const auto& shape = j.at("shape");
  const Eigen::Index d = static_cast<Eigen::Index>(lo.size());
  Eigen::VectorXd glo(d), ghi(d);
  Eigen::VectorXi gshape(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    glo(i) = lo.at(i).get<double>();
    ghi(i) = hi.at(i).get<double>();
    gshape(i) = shape.at(i).get<int>();
  }
  return Grid(glo, ghi, gshape);
}

}  // namespace

std::string patch_to_string(const GraphPatch& patch) {
  json header;
  header["format"] = "translator-lab-patch";
  header["version"] = 1;
  header["n"] = patch.n();
  header["m"] = patch.m();
  header["domain"] = grid_to_json(patch.grid);
  for (Eigen::Index c = 0; c < patch.direction.size(); ++c) {
    header["direction"].push_back(patch.direction(c));
  }

  std::ostringstream out;
  out << header.dump() << "\n";
  for (Eigen::Index i = 0; i < patch.n(); ++i) {
    out << "x" << (i + 1) << ",";
  }
  for (Eigen::Index a = 0; a < patch.m(); ++a) {
    out << "u" << (a + 1) << (a + 1 < patch.m() ? "," : "");
  }
  out << "\n";
  for (Eigen::Index node = 0; node < patch.grid.size(); ++node) {
    const Eigen::VectorXd x = patch.grid.node(node);
    for (Eigen::Index i = 0; i < patch.n(); ++i) {
      out << format_double(x(i)) << ",";
    }
    for (Eigen::Index a = 0; a < patch.m(); ++a) {
      out << format_double(patch.values(node, a))
          << (a + 1 < patch.m() ? "," : "");
    }
    out << "\n";
  }
  return out.str();
}

GraphPatch patch_from_string(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw IoError("patch file: empty");
  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception& e) {
    throw IoError(std::string("patch file: bad header: ") + e.what());
  }
  if (header.value("format", "") != "translator-lab-patch") {
    throw IoError("patch file: unrecognized format tag");
  }
  const Grid grid = grid_from_json(header.at("domain"));
  const Eigen::Index m = header.at("m").get<Eigen::Index>();
  Eigen::VectorXd direction(grid.dim() + m);
  for (Eigen::Index c = 0; c < direction.size(); ++c) {
    direction(c) = header.at("direction").at(c).get<double>();
  }

  if (!std::getline(in, line)) throw IoError("patch file: missing table header");
  Eigen::MatrixXd values(grid.size(), m);
  for (Eigen::Index node = 0; node < grid.size(); ++node) {
    if (!std::getline(in, line)) {
      throw IoError("patch file: truncated node table");
    }
    std::string_view row(line);
    Eigen::Index column = 0;
    size_t start = 0;
    while (start <= row.size()) {
      const size_t comma = row.find(',', start);
      const std::string_view token =
          row.substr(start, comma == std::string_view::npos ? row.size() - start
                                                            : comma - start);
      if (column >= grid.dim()) {
        const Eigen::Index a = column - grid.dim();
        if (a >= m) throw IoError("patch file: too many columns");
        values(node, a) = parse_double(token);
      }
      ++column;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (column != grid.dim() + m) {
      throw IoError("patch file: wrong column count");
    }
  }
  return make_patch(grid, std::move(values), std::move(direction));
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write file: " + path);
  out << content;
}

void write_patch(const std::string& path, const GraphPatch& patch) {
  write_text_file(path, patch_to_string(patch));
}

GraphPatch read_patch(const std::string& path) {
  return patch_from_string(read_text_file(path));
}

// ---------------------------------------------------------------------------
// Problem files
// ---------------------------------------------------------------------------

BoundaryData Problem::boundary() const {
  if (boundary_kind == "exact:grim_reaper") {
    if (grid.dim() != 1 || codim != 1) {
      throw IoError("exact:grim_reaper boundary requires n = 1, m = 1");
    }
    return sample_boundary(grid, 1, [](const Eigen::VectorXd& x) {
      return Eigen::VectorXd::Constant(1, grim_reaper_reference(x(0)));
    });
  }
  if (boundary_kind == "exact:bowl") {
    if (codim != 1 || grid.dim() < 2) {
      throw IoError("exact:bowl boundary requires n >= 2, m = 1");
    }
    const int n = static_cast<int>(grid.dim());
    return sample_boundary(grid, 1, [n](const Eigen::VectorXd& x) {
      return Eigen::VectorXd::Constant(1, bowl_reference(x.norm(), n));
    });
  }
  if (boundary_kind == "affine") {
    const Eigen::VectorXd offset = affine_offset;
    const Eigen::MatrixXd slope = affine_slope;
    return sample_boundary(grid, codim, [&](const Eigen::VectorXd& x) {
      return Eigen::VectorXd(offset + slope * x);
    });
  }
  if (boundary_kind == "values") {
    BoundaryData data;
    data.values = boundary_values;
    return data;
  }
  throw IoError("unknown boundary kind: " + boundary_kind);
}

Problem problem_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw IoError(std::string("problem file: ") + e.what());
  }
  Problem problem;
  try {
    problem.grid = grid_from_json(j.at("domain"));
    const auto& direction = j.at("direction");
    problem.direction.resize(static_cast<Eigen::Index>(direction.size()));
    for (Eigen::Index c = 0; c < problem.direction.size(); ++c) {
      problem.direction(c) = direction.at(c).get<double>();
    }
    problem.codim = problem.direction.size() - problem.grid.dim();
    if (problem.codim < 1) {
      throw IoError("problem file: direction shorter than base dimension");
    }

    const auto& boundary = j.at("boundary");
    if (boundary.is_string()) {
      problem.boundary_kind = boundary.get<std::string>();
    } else {
      problem.boundary_kind = boundary.at("type").get<std::string>();
      if (problem.boundary_kind == "affine") {
        problem.affine_offset.resize(problem.codim);
        problem.affine_slope.resize(problem.codim, problem.grid.dim());
        for (Eigen::Index a = 0; a < problem.codim; ++a) {
          problem.affine_offset(a) = boundary.at("offset").at(a).get<double>();
          for (Eigen::Index i = 0; i < problem.grid.dim(); ++i) {
            problem.affine_slope(a, i) =
                boundary.at("slope").at(a).at(i).get<double>();
          }
        }
      } else if (problem.boundary_kind == "values") {
        const auto& rows = boundary.at("values");
        problem.boundary_values =
            Eigen::MatrixXd::Zero(problem.grid.size(), problem.codim);
        if (static_cast<Eigen::Index>(rows.size()) != problem.grid.size()) {
          throw IoError("problem file: boundary values row count mismatch");
        }
        for (Eigen::Index node = 0; node < problem.grid.size(); ++node) {
          for (Eigen::Index a = 0; a < problem.codim; ++a) {
            problem.boundary_values(node, a) =
                rows.at(node).at(a).get<double>();
          }
        }
      }
    }

    const std::string formulation = j.value("formulation", "auto");
    if (formulation == "codim1") {
      problem.formulation = Formulation::Codim1;
    } else if (formulation == "system") {
      problem.formulation = Formulation::System;
    } else if (formulation == "auto") {
      const bool vertical =
          problem.codim == 1 &&
          problem.direction.head(problem.grid.dim()).cwiseAbs().maxCoeff() <
              1e-12;
      problem.formulation =
          vertical ? Formulation::Codim1 : Formulation::System;
    } else {
      throw IoError("problem file: unknown formulation: " + formulation);
    }

    if (j.contains("solver")) {
      const auto& s = j.at("solver");
      problem.solver.newton_tol =
          s.value("newton_tol", problem.solver.newton_tol);
      problem.solver.max_iter = s.value("max_iter", problem.solver.max_iter);
      problem.solver.damping = s.value("damping", problem.solver.damping);
      problem.solver.linear_tol =
          s.value("linear_tol", problem.solver.linear_tol);
    }
  } catch (const json::exception& e) {
    throw IoError(std::string("problem file: ") + e.what());
  }
  return problem;
}

Problem read_problem(const std::string& path) {
  return problem_from_json(read_text_file(path));
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

std::string report_to_json(const DiagnosticsReport& report) {
  json j;
  j["grid"]["n"] = report.grid.n;
  j["grid"]["m"] = report.grid.m;
  j["grid"]["shape"] = report.grid.shape;
  j["grid"]["spacing"] = report.grid.spacing;
  j["provenance"] = report.provenance;
  j["all_pass"] = report.all_pass();
  j["checks"] = json::array();
  for (const auto& check : report.checks) {
    json c;
    c["name"] = check.name;
    c["anchor"] = check.anchor;
    c["max_violation"] = check.max_violation;
    c["tolerance"] = check.tolerance;
    c["pass"] = check.pass;
    c["nodes_evaluated"] = check.nodes_evaluated;
    c["asserted"] = check.asserted;
    for (const auto& [key, value] : check.info) {
      c["info"][key] = value;
    }
    j["checks"].push_back(std::move(c));
  }
  return j.dump(2) + "\n";
}

std::string report_to_csv(const DiagnosticsReport& report) {
  std::ostringstream out;
  out << "name,anchor,max_violation,tolerance,pass,nodes_evaluated\n";
  for (const auto& check : report.checks) {
    std::string anchor = check.anchor;
    for (char& c : anchor) {
      if (c == ',') c = ';';
    }
    out << check.name << "," << anchor << ","
        << format_double(check.max_violation) << ","
        << format_double(check.tolerance) << ","
        << (check.pass ? "true" : "false") << "," << check.nodes_evaluated
        << "\n";
  }
  return out.str();
}

std::string config_hash(const std::string& canonical_config) {
  std::uint64_t hash = 1469598103934665603ull;
  for (const unsigned char c : canonical_config) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx",
                static_cast<unsigned long long>(hash));
  return std::string(buffer);
}

}  // namespace translab
