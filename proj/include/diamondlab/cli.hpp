// Copyright 2026 The diamondlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Command-line harness. Every subcommand that writes an output file also
// writes `<output>.summary.json` (for `construct`, `<dir>/construct.summary.json`)
// which `report` aggregates.
//
// Exit codes: 0 all PASS, 1 a verdict FAILed, 2 usage or invalid parameters,
// 3 IO error.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "diamondlab/bounds.hpp"
#include "diamondlab/ensembles.hpp"
#include "diamondlab/errors.hpp"
#include "diamondlab/io.hpp"
#include "diamondlab/moments.hpp"
#include "diamondlab/weingarten.hpp"

namespace diamondlab::cli {

enum ExitCode : int { kExitPass = 0, kExitFail = 1, kExitUsage = 2, kExitIo = 3 };

struct RunConfig {
  std::string command;
  std::string case_name = "equal";
  std::size_t d_A = 4;
  std::size_t d_B = 2;
  std::size_t r = 2;
  double eps = 0.1;
  std::size_t M = 10;
  std::uint64_t seed = 0;
  std::size_t samples = 5000;
  std::size_t fourth_samples = 20000;
  std::size_t lipschitz_samples = 500;
  double perturbation = kDefaultPerturbationScale;
  std::string in;
  std::string out;
  std::optional<double> threshold;
  std::optional<double> eta;
  std::optional<double> log_m;
  std::size_t n_queries = 3;
  std::size_t aux_dim = 2;
  std::size_t d = 3;
  double c_ensemble = 1.0;
  double c_pack = 1.0;
  double sigmas = kVerdictSigmas;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

namespace detail {

template <class T>
Json optional_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

template <class T>
void read_field(const Json& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}

template <class T>
void read_optional(const Json& j, const char* key, std::optional<T>& field) {
  if (!j.contains(key)) return;
  if (j.at(key).is_null())
    field.reset();
  else
    field = j.at(key).get<T>();
}

}  // namespace detail

inline Json to_json(const RunConfig& c) {
  Json j;
  j["command"] = c.command;
  j["case"] = c.case_name;
  j["d_A"] = c.d_A;
  j["d_B"] = c.d_B;
  j["r"] = c.r;
  j["eps"] = c.eps;
  j["M"] = c.M;
  j["seed"] = c.seed;
  j["samples"] = c.samples;
  j["fourth_samples"] = c.fourth_samples;
  j["lipschitz_samples"] = c.lipschitz_samples;
  j["perturbation"] = c.perturbation;
  j["in"] = c.in;
  j["out"] = c.out;
  j["threshold"] = detail::optional_json(c.threshold);
  j["eta"] = detail::optional_json(c.eta);
  j["log_m"] = detail::optional_json(c.log_m);
  j["n_queries"] = c.n_queries;
  j["aux_dim"] = c.aux_dim;
  j["d"] = c.d;
  j["c_ensemble"] = c.c_ensemble;
  j["c_pack"] = c.c_pack;
  j["sigmas"] = c.sigmas;
  return j;
}

/// Fields absent from `j` keep the values already in `base`.
inline RunConfig config_from_json(const Json& j, RunConfig base = {}) {
  try {
    if (!j.is_object()) throw IoError("config: top level must be an object");
    detail::read_field(j, "command", base.command);
    detail::read_field(j, "case", base.case_name);
    detail::read_field(j, "d_A", base.d_A);
    detail::read_field(j, "d_B", base.d_B);
    detail::read_field(j, "r", base.r);
    detail::read_field(j, "eps", base.eps);
    detail::read_field(j, "M", base.M);
    detail::read_field(j, "seed", base.seed);
    detail::read_field(j, "samples", base.samples);
    detail::read_field(j, "fourth_samples", base.fourth_samples);
    detail::read_field(j, "lipschitz_samples", base.lipschitz_samples);
    detail::read_field(j, "perturbation", base.perturbation);
    detail::read_field(j, "in", base.in);
    detail::read_field(j, "out", base.out);
    detail::read_optional(j, "threshold", base.threshold);
    detail::read_optional(j, "eta", base.eta);
    detail::read_optional(j, "log_m", base.log_m);
    detail::read_field(j, "n_queries", base.n_queries);
    detail::read_field(j, "aux_dim", base.aux_dim);
    detail::read_field(j, "d", base.d);
    detail::read_field(j, "c_ensemble", base.c_ensemble);
    detail::read_field(j, "c_pack", base.c_pack);
    detail::read_field(j, "sigmas", base.sigmas);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("config: ") + e.what());
  }
  return base;
}

inline void save_config(const fs::path& path, const RunConfig& c) { write_text_atomic(path, dump_json(to_json(c))); }

inline RunConfig load_config(const fs::path& path, RunConfig base = {}) {
  return config_from_json(parse_json_file(path), std::move(base));
}

// ---------------------------------------------------------------------------
// Run summaries

struct SummaryRow {
  std::string name;
  std::string anchor;
  double value = 0.0;
  double target = 0.0;
  bool pass = false;
};

struct RunSummary {
  std::string command;
  std::uint64_t seed = 0;
  std::size_t samples = 0;
  double tolerance = 0.0;
  std::string anchor;
  Json params = Json::object();
  std::vector<SummaryRow> rows;

  bool pass() const {
    for (const auto& r : rows)
      if (!r.pass) return false;
    return true;
  }
};

inline const char* verdict(bool pass) { return pass ? "PASS" : "FAIL"; }

inline Json to_json(const RunSummary& s) {
  Json rows = Json::array();
  for (const auto& r : s.rows)
    rows.push_back(Json{{"name", r.name},
                        {"anchor", r.anchor},
                        {"value", r.value},
                        {"target", r.target},
                        {"verdict", verdict(r.pass)}});
  Json j;
  j["command"] = s.command;
  j["verdict"] = verdict(s.pass());
  j["seed"] = s.seed;
  j["samples"] = s.samples;
  j["tolerance"] = s.tolerance;
  j["anchor"] = s.anchor;
  j["params"] = s.params;
  j["rows"] = rows;
  return j;
}

inline fs::path summary_path_for(const fs::path& output) { return fs::path(output.string() + ".summary.json"); }

inline void write_summary(const fs::path& path, const RunSummary& s) { write_text_atomic(path, dump_json(to_json(s))); }

/// Writes `text` to `out`, or to `stdout_stream` when `out` is empty.
inline void emit(const std::string& out, const std::string& text, std::ostream& stdout_stream) {
  if (out.empty())
    stdout_stream << text;
  else
    write_text_atomic(out, text);
}

inline Json ensemble_params_json(const EnsembleParams& p) {
  return Json{{"case", to_string(p.kind)}, {"d_A", p.d_A}, {"d_B", p.d_B}, {"r", p.r},
              {"eps", p.eps},              {"M", p.M},     {"seed", p.seed}};
}

inline EnsembleParams ensemble_params(const RunConfig& c) {
  EnsembleParams p{c.d_A, c.d_B, c.r, c.eps, c.M, c.seed, parse_ensemble_case(c.case_name)};
  p.validate();
  return p;
}

// ---------------------------------------------------------------------------
// Subcommands. Each returns an exit code and may throw DomainError,
// DimensionError, ContractViolation (usage) or IoError.

inline int run_construct(const RunConfig& c, std::ostream& os) {
  if (c.out.empty()) throw DomainError("construct: --out is required");
  const EnsembleParams p = ensemble_params(c);
  const ChannelEnsemble ens = generate_ensemble(p);
  save_ensemble(ens, c.out);
  RunSummary s{"construct", p.seed, p.M, kIsometryTolerance, "||V^dag V - 1||_op <= 1e-10; ||V_x - V_y||_op <= 2 eps",
               ensemble_params_json(p), {}};
  double worst = 0.0;
  for (const auto& v : ens.isometries) worst = std::max(worst, v.residual());
  s.rows.push_back({"max isometry residual", "||V^dag V - 1||_op", worst, kIsometryTolerance, worst <= kIsometryTolerance});
  const double eta = max_isometry_distance(ens.isometries);
  s.rows.push_back({"max isometry distance", "||V_x - V_y||_op <= 2 eps", eta, 2.0 * p.eps,
                    eta <= 2.0 * p.eps + kClosenessSlack});
  write_summary(fs::path(c.out) / "construct.summary.json", s);
  os << "construct: " << p.M << " " << to_string(p.kind) << " members written to " << c.out << " ("
     << verdict(s.pass()) << ")\n";
  return s.pass() ? kExitPass : kExitFail;
}

inline int run_certify(const RunConfig& c, std::ostream& os) {
  if (c.in.empty()) throw DomainError("certify: --in is required");
  const ChannelEnsemble ens = load_ensemble(c.in);
  const double threshold = c.threshold.value_or(default_separation_threshold(ens));
  const double eta = c.eta.value_or(2.0 * ens.params.eps);
  const CertificationReport rep = certify_ensemble(ens, threshold, eta);
  CsvWriter csv({"pair", "choi_dist", "iso_dist", "verdict"});
  for (const auto& pr : rep.pairs)
    csv.add({std::to_string(pr.i) + "-" + std::to_string(pr.j), format_double(pr.choi_distance),
             format_double(pr.isometry_distance), verdict(pr.separated && pr.close)});
  const std::string out = c.out.empty() ? (fs::path(c.in) / "certify.csv").string() : c.out;
  write_text_atomic(out, csv.text());
  Json params = ensemble_params_json(ens.params);
  params["threshold"] = threshold;
  params["eta"] = eta;
  RunSummary s{"certify", ens.params.seed, rep.pairs.size(), threshold, "||J_x - J_y||_1 > threshold; ||V_x - V_y||_op <= eta",
               params, {}};
  const double min_sep = rep.pairs.empty() ? 0.0 : rep.min_separation;
  s.rows.push_back({"min separation", "||J_x - J_y||_1 > threshold", min_sep, threshold,
                    rep.pairs.empty() || min_sep > threshold});
  s.rows.push_back({"max closeness", "||V_x - V_y||_op <= eta", rep.max_closeness, eta,
                    rep.max_closeness <= eta + kClosenessSlack});
  write_summary(summary_path_for(out), s);
  os << "certify: " << rep.pairs.size() << " pairs, min separation " << format_double(min_sep) << " (threshold "
     << format_double(threshold) << "), max closeness " << format_double(rep.max_closeness) << " (eta "
     << format_double(eta) << "): " << verdict(rep.pass) << "\n";
  return rep.pass ? kExitPass : kExitFail;
}

/// All MomentReport rows for one parameter point, in a fixed order.
inline std::vector<MomentReport> moment_rows(const RunConfig& c) {
  const EnsembleParams p = ensemble_params(c);
  const SeededRng root{c.seed, 0};
  auto stream = [&](std::uint64_t k) { return derive_substream(root, k); };
  std::vector<MomentReport> rows;
  if (p.kind == EnsembleCase::Tilted) {
    rows.push_back(estimate_c_second_moment(p, c.samples, stream(1)));
    rows.push_back(estimate_c_fourth_moment(p, c.fourth_samples, stream(2)));
    rows.push_back(estimate_c_first_moment(p, c.fourth_samples, stream(2)));
    rows.push_back(estimate_first_moment_tilted(p, c.samples, stream(3)));
  } else {
    rows.push_back(estimate_d_second_moment(p, c.samples, stream(1)));
    rows.push_back(estimate_d_second_moment_weingarten(p, c.samples, stream(1)));
    rows.push_back(estimate_d_second_moment_lower(p, c.samples, stream(1)));
    rows.push_back(estimate_d_fourth_moment(p, c.fourth_samples, stream(2)));
  }
  rows.push_back(estimate_lipschitz_ratio(p, c.lipschitz_samples, c.perturbation, stream(4)));
  const TailReport tail = concentration_experiment(p, c.samples, default_t_grid(p.eps), stream(5));
  for (const auto& t : tail.rows) {
    MomentReport r{"tail t=" + format_double(t.t), "P[|f - E f| >= t] <= exp(-d t^2 / (12 L^2)) per tail",
                   std::max(t.upper_frequency, t.lower_frequency), t.slack / kVerdictSigmas, t.bound,
                   Relation::AtMost, tail.samples, c.seed, false};
    rows.push_back(r);
  }
  for (auto& r : rows) {
    r.seed = c.seed;
    r.pass = r.quantity == "max Lipschitz ratio" ? r.samples > 0 && r.estimate <= r.target
                                                  : moment_verdict(r.estimate, r.std_error, r.target, r.relation,
                                                                   c.sigmas);
  }
  return rows;
}

inline int run_moments(const RunConfig& c, std::ostream& os) {
  const auto rows = moment_rows(c);
  CsvWriter csv({"quantity", "anchor", "estimate", "stderr", "target", "relation", "samples", "seed", "verdict"});
  RunSummary s{"moments", c.seed, c.samples, c.sigmas, "Haar moment identities", ensemble_params_json(ensemble_params(c)),
               {}};
  for (const auto& r : rows) {
    csv.add({r.quantity, r.anchor, format_double(r.estimate), format_double(r.std_error), format_double(r.target),
             to_string(r.relation), std::to_string(r.samples), std::to_string(r.seed), verdict(r.pass)});
    s.rows.push_back({r.quantity, r.anchor, r.estimate, r.target, r.pass});
  }
  emit(c.out, csv.text(), os);
  if (!c.out.empty()) {
    write_summary(summary_path_for(c.out), s);
    os << "moments: " << rows.size() << " rows written to " << c.out << " (" << verdict(s.pass()) << ")\n";
  }
  return s.pass() ? kExitPass : kExitFail;
}

inline Json to_json(const BoundEntry& e) {
  Json notes = Json::array();
  for (const auto& n : e.notes) notes.push_back(n);
  return Json{{"name", e.name}, {"N", e.n}, {"log_M", e.log_m}, {"eta", e.eta}, {"formula", e.formula},
              {"notes", notes}};
}

inline Json to_json(const BoundReport& b) {
  Json j;
  j["inputs"] = Json{{"d_A", b.d_A},
                     {"d_B", b.d_B},
                     {"r", b.r},
                     {"eps", b.eps},
                     {"c_ensemble", b.c_ensemble},
                     {"c_pack", b.c_pack},
                     {"log_M", detail::optional_json(b.log_m)}};
  j["N_general"] = b.general ? to_json(*b.general) : Json(nullptr);
  j["N_main"] = b.main ? to_json(*b.main) : Json(nullptr);
  j["N_packing"] = b.packing ? to_json(*b.packing) : Json(nullptr);
  return j;
}

inline int run_bounds(const RunConfig& c, std::ostream& os) {
  const BoundReport b = compute_bounds(c.d_A, c.d_B, c.r, c.eps, c.c_ensemble, c.c_pack, c.log_m);
  RunSummary s{"bounds", 0, 0, 0.0, "query-count lower bounds", to_json(b)["inputs"], {}};
  for (const auto* e : {&b.general, &b.main, &b.packing})
    if (*e) s.rows.push_back({(*e)->name, (*e)->formula, static_cast<double>((*e)->n), 1.0, (*e)->n >= 1});
  emit(c.out, dump_json(to_json(b)), os);
  if (!c.out.empty()) {
    write_summary(summary_path_for(c.out), s);
    os << "bounds: report written to " << c.out << "\n";
  }
  return s.pass() ? kExitPass : kExitFail;
}

inline constexpr double kGapSlack = 1e-9;

inline int run_simulate(const RunConfig& c, std::ostream& os) {
  if (c.in.empty()) throw DomainError("simulate: --in is required");
  ProtocolConfig pc{load_ensemble(c.in), c.n_queries, c.aux_dim, c.seed};
  const ProtocolTrace t = simulate_protocol_gap(pc);
  const bool tilted = pc.ensemble.params.kind == EnsembleCase::Tilted;
  std::vector<std::string> header{"step", "gap", "bound", "verdict"};
  if (tilted) header.push_back("flag_deviation");
  CsvWriter csv(header);
  RunSummary s{"simulate", c.seed, c.n_queries, kGapSlack, "||pi_k - xi_k||_1 <= 2 eta",
               ensemble_params_json(pc.ensemble.params), {}};
  s.params["N"] = c.n_queries;
  s.params["aux_dim"] = c.aux_dim;
  s.params["eta"] = t.eta;
  for (std::size_t k = 0; k < t.gaps.size(); ++k) {
    const bool ok = t.gaps[k] <= 2.0 * t.eta + kGapSlack;
    std::vector<std::string> row{std::to_string(k + 1), format_double(t.gaps[k]), format_double(2.0 * t.eta),
                                 verdict(ok)};
    if (tilted) row.push_back(format_double(t.flag_deviation[k]));
    csv.add(row);
    s.rows.push_back({"gap step " + std::to_string(k + 1), "||pi_k - xi_k||_1 <= 2 eta", t.gaps[k], 2.0 * t.eta, ok});
  }
  const std::string out = c.out.empty() ? (fs::path(c.in) / "simulate.csv").string() : c.out;
  write_text_atomic(out, csv.text());
  write_summary(summary_path_for(out), s);
  os << "simulate: " << t.gaps.size() << " steps, eta " << format_double(t.eta) << " (" << verdict(s.pass()) << ")\n";
  return s.pass() ? kExitPass : kExitFail;
}

struct WeingartenCase {
  std::string name;
  cplx closed_form;
  ComplexEstimate mc;
};

inline std::vector<WeingartenCase> weingarten_cases(std::size_t d, std::size_t samples, std::uint64_t seed) {
  if (d < 2) throw DomainError("weingarten-check: d must be at least 2");
  const SeededRng root{seed, 0};
  RandomStream inputs(derive_substream(root, 0));
  auto herm = [&] { return Operator(random_unit_hermitian(d, inputs)); };
  const Operator one = Operator::identity(d), e00 = Operator::unit(d, 0, 0);
  const Operator a = herm(), b = herm(), a2 = herm(), b2 = herm();
  struct Spec {
    std::string name;
    std::vector<Operator> a, b;
  };
  const std::vector<Spec> specs{{"n1_identity", {one}, {one}},
                                {"n1_random", {a}, {b}},
                                {"n2_identity", {one, one}, {one, one}},
                                {"n2_random", {a2, a2}, {b2, b2}},
                                {"u11_fourth", {e00, e00}, {e00, e00}}};
  std::vector<WeingartenCase> out;
  for (std::size_t k = 0; k < specs.size(); ++k)
    out.push_back({specs[k].name, haar_moment_closed_form(specs[k].a, specs[k].b, d),
                   mc_haar_moment(specs[k].a, specs[k].b, d, samples, derive_substream(root, k + 1))});
  return out;
}

/// |estimate - closed form| / stderr; 0 or inf when stderr is 0.
inline double z_score(const WeingartenCase& w) {
  const double diff = std::abs(w.mc.estimate - w.closed_form);
  if (w.mc.std_error > 0.0) return diff / w.mc.std_error;
  return diff <= 1e-12 * std::max(1.0, std::abs(w.closed_form)) ? 0.0 : std::numeric_limits<double>::infinity();
}

inline int run_weingarten_check(const RunConfig& c, std::ostream& os) {
  const auto cases = weingarten_cases(c.d, c.samples, c.seed);
  CsvWriter csv({"case", "closed_form", "estimate", "stderr", "z_score", "verdict"});
  RunSummary s{"weingarten-check", c.seed, c.samples, c.sigmas, "E Tr(U B1 U^dag A1 ...) = sum Wg Tr Tr",
               Json{{"d", c.d}}, {}};
  for (const auto& w : cases) {
    const double z = z_score(w);
    const bool ok = z <= c.sigmas;
    csv.add({w.name, format_double(w.closed_form.real()), format_double(w.mc.estimate.real()),
             format_double(w.mc.std_error), format_double(z), verdict(ok)});
    s.rows.push_back({w.name, "Weingarten closed form", w.mc.estimate.real(), w.closed_form.real(), ok});
  }
  emit(c.out, csv.text(), os);
  if (!c.out.empty()) write_summary(summary_path_for(c.out), s);
  return s.pass() ? kExitPass : kExitFail;
}

struct ReportSummary {
  Json document;
  bool pass = true;
  std::size_t rows = 0;
};

/// Aggregates every `*.summary.json` below `dir`, in path order.
inline ReportSummary report_summary(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("report: " + dir.string() + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && name.size() > 13 && name.ends_with(".summary.json")) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  ReportSummary rep;
  Json runs = Json::array(), rows = Json::array();
  for (const auto& f : files) {
    const Json j = parse_json_file(f);
    try {
      const std::string command = j.at("command").get<std::string>();
      const bool pass = j.at("verdict").get<std::string>() == "PASS";
      rep.pass = rep.pass && pass;
      const std::string rel = fs::relative(f, dir).generic_string();
      runs.push_back(Json{{"file", rel},
                          {"command", command},
                          {"verdict", j.at("verdict")},
                          {"seed", j.at("seed")},
                          {"samples", j.at("samples")},
                          {"tolerance", j.at("tolerance")},
                          {"params", j.at("params")}});
      for (const auto& r : j.at("rows")) {
        rows.push_back(Json{{"file", rel},
                            {"command", command},
                            {"name", r.at("name")},
                            {"anchor", r.at("anchor")},
                            {"value", r.at("value")},
                            {"target", r.at("target")},
                            {"verdict", r.at("verdict")}});
        ++rep.rows;
      }
    } catch (const nlohmann::json::exception& e) {
      throw IoError("report: corrupt summary " + f.string() + ": " + e.what());
    }
  }
  rep.document["verdict"] = verdict(rep.pass);
  rep.document["runs"] = runs;
  rep.document["rows"] = rows;
  return rep;
}

inline int run_report(const RunConfig& c, std::ostream& os) {
  if (c.in.empty()) throw DomainError("report: --in is required");
  const ReportSummary rep = report_summary(c.in);
  const std::string text = dump_json(rep.document);
  emit(c.out, text, os);
  if (!c.out.empty())
    os << "report: " << rep.document["runs"].size() << " runs, " << rep.rows << " rows (" << verdict(rep.pass)
       << ")\n";
  return rep.pass ? kExitPass : kExitFail;
}

/// Dispatches on c.command and maps exceptions to exit codes.
inline int run(const RunConfig& c, std::ostream& os = std::cout, std::ostream& es = std::cerr) {
  try {
    if (c.command == "construct") return run_construct(c, os);
    if (c.command == "certify") return run_certify(c, os);
    if (c.command == "moments") return run_moments(c, os);
    if (c.command == "bounds") return run_bounds(c, os);
    if (c.command == "simulate") return run_simulate(c, os);
    if (c.command == "weingarten-check") return run_weingarten_check(c, os);
    if (c.command == "report") return run_report(c, os);
    es << "error: unknown command '" << c.command << "'\n";
    return kExitUsage;
  } catch (const IoError& e) {
    es << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    es << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    es << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::domain_error& e) {
    es << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

// ---------------------------------------------------------------------------
// Argument parsing

namespace detail {

/// Value of --config in argv, if any.
inline std::optional<std::string> find_config_flag(int argc, const char* const* argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--config" && i + 1 < argc) return std::string(argv[i + 1]);
    if (a.rfind("--config=", 0) == 0) return a.substr(9);
  }
  return std::nullopt;
}

}  // namespace detail

/// Defaults, then DIAMONDLAB_SEED, then the --config file, then flags.
inline int main(int argc, const char* const* argv, std::ostream& os = std::cout, std::ostream& es = std::cerr) {
  RunConfig cfg;
  if (const char* env = std::getenv("DIAMONDLAB_SEED")) {
    try {
      cfg.seed = std::stoull(env);
    } catch (const std::exception&) {
      es << "error: DIAMONDLAB_SEED must be an unsigned integer\n";
      return kExitUsage;
    }
  }
  const auto config_path = detail::find_config_flag(argc, argv);
  if (config_path) {
    try {
      cfg = load_config(*config_path, cfg);
    } catch (const IoError& e) {
      es << "io error: " << e.what() << "\n";
      return kExitIo;
    }
  }

  CLI::App app{"diamondlab: channel-learning lower-bound verification harness"};
  app.require_subcommand(1);
  std::string config_flag;
  app.add_option("--config", config_flag, "JSON run config; flags override its values");
  std::string save_config_path;
  app.add_option("--save-config", save_config_path, "write the effective run config to this path");

  double threshold_v = 0.0, eta_v = 0.0, log_m_v = 0.0;

  auto add_case = [&](CLI::App* s) {
    s->add_option("--case", cfg.case_name, "equal or tilted")->check(CLI::IsMember({"equal", "tilted"}));
    s->add_option("--dA", cfg.d_A, "input dimension");
    s->add_option("--dB", cfg.d_B, "output dimension");
    s->add_option("--r", cfg.r, "Kraus rank");
    s->add_option("--eps", cfg.eps, "closeness parameter");
  };

  auto* construct = app.add_subcommand("construct", "generate an ensemble and write its channel directory");
  add_case(construct);
  construct->add_option("--M", cfg.M, "number of members");
  construct->add_option("--seed", cfg.seed, "random seed");
  construct->add_option("--out", cfg.out, "output directory");

  auto* certify = app.add_subcommand("certify", "check pairwise separation and closeness of an ensemble");
  certify->add_option("--in", cfg.in, "channel directory");
  auto* threshold_opt = certify->add_option("--threshold", threshold_v, "Choi separation threshold");
  auto* eta_opt = certify->add_option("--eta", eta_v, "isometry closeness bound");
  certify->add_option("--out", cfg.out, "CSV path (default <in>/certify.csv)");

  auto* moments = app.add_subcommand("moments", "Monte Carlo moment identities for one parameter point");
  add_case(moments);
  moments->add_option("--samples", cfg.samples, "samples for second moments and tails");
  moments->add_option("--fourth-samples", cfg.fourth_samples, "samples for fourth moments");
  moments->add_option("--lipschitz-samples", cfg.lipschitz_samples, "perturbed pairs for the Lipschitz ratio");
  moments->add_option("--perturbation", cfg.perturbation, "Lipschitz perturbation scale");
  moments->add_option("--sigmas", cfg.sigmas, "verdict slack in standard errors");
  moments->add_option("--seed", cfg.seed, "random seed");
  moments->add_option("--out", cfg.out, "CSV path (default stdout)");

  auto* bounds = app.add_subcommand("bounds", "query-count lower-bound calculators");
  bounds->add_option("--dA", cfg.d_A, "input dimension");
  bounds->add_option("--dB", cfg.d_B, "output dimension");
  bounds->add_option("--r", cfg.r, "Kraus rank");
  bounds->add_option("--eps", cfg.eps, "accuracy");
  bounds->add_option("--cEnsemble", cfg.c_ensemble, "log M = cEnsemble d_A d_B r");
  bounds->add_option("--cPack", cfg.c_pack, "log M = cPack r d_A d_B for the packing bound");
  auto* log_m_opt = bounds->add_option("--logM", log_m_v, "explicit log M");
  bounds->add_option("--out", cfg.out, "JSON path (default stdout)");

  auto* simulate = app.add_subcommand("simulate", "coherent-protocol trace-distance gaps");
  simulate->add_option("--in", cfg.in, "channel directory");
  simulate->add_option("--N", cfg.n_queries, "number of queries");
  simulate->add_option("--auxDim", cfg.aux_dim, "auxiliary register dimension");
  simulate->add_option("--seed", cfg.seed, "interleaving seed");
  simulate->add_option("--out", cfg.out, "CSV path (default <in>/simulate.csv)");

  auto* wg = app.add_subcommand("weingarten-check", "closed-form Haar moments against Monte Carlo");
  wg->add_option("--d", cfg.d, "unitary dimension");
  wg->add_option("--samples", cfg.samples, "Monte Carlo samples");
  wg->add_option("--seed", cfg.seed, "random seed");
  wg->add_option("--sigmas", cfg.sigmas, "verdict slack in standard errors");
  wg->add_option("--out", cfg.out, "CSV path (default stdout)");

  auto* report = app.add_subcommand("report", "aggregate *.summary.json files under a directory");
  report->add_option("--in", cfg.in, "directory of run outputs");
  report->add_option("--out", cfg.out, "JSON path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, os, es);
    return code == 0 ? kExitPass : kExitUsage;
  }
  if (threshold_opt->count()) cfg.threshold = threshold_v;
  if (eta_opt->count()) cfg.eta = eta_v;
  if (log_m_opt->count()) cfg.log_m = log_m_v;
  for (auto* s : app.get_subcommands()) cfg.command = s->get_name();

  if (!save_config_path.empty()) {
    try {
      save_config(save_config_path, cfg);
    } catch (const IoError& e) {
      es << "io error: " << e.what() << "\n";
      return kExitIo;
    }
  }
  return run(cfg, os, es);
}

}  // namespace diamondlab::cli
