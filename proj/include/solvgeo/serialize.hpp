#pragma once

// JSON forms of the result types. 64-bit digests travel as hex strings so that readers with
// double-only numbers do not round them.

#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "solvgeo/checks.hpp"
#include "solvgeo/distance.hpp"
#include "solvgeo/entropy.hpp"
#include "solvgeo/hyperbolic.hpp"
#include "solvgeo/volume.hpp"

namespace solvgeo {

using json = nlohmann::json;

inline std::string hex64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline std::uint64_t parse_hex64(const std::string& s) {
  std::size_t used = 0;
  const auto v = std::stoull(s, &used, 16);
  if (used != s.size()) throw std::invalid_argument("parse_hex64: trailing characters");
  return v;
}

inline json to_json(const BoundReport& r) {
  return json{{"rho", r.rho},
              {"lower", r.lower},
              {"upper", r.upper},
              {"formula_tags", r.formula_tags},
              {"printed_upper", r.printed_upper},
              {"envelope_volume", r.envelope_volume}};
}

inline json to_json(const VolumeEstimate& e) {
  json j{{"value", e.value},
         {"std_error", e.std_error},
         {"method", to_string(e.method)},
         {"samples", e.samples},
         {"rho", e.rho},
         {"seed", e.seed},
         {"params_hash", hex64(e.params_hash)}};
  if (e.method == VolumeMethod::mc_rejection) {
    j["stages"] = json{{"rejected_height", e.rejected_height},
                       {"rejected_projection", e.rejected_projection},
                       {"rejected_block", e.rejected_block},
                       {"rejected_envelope", e.rejected_envelope},
                       {"accepted_upper", e.accepted_upper},
                       {"skipped_roulette", e.skipped_roulette},
                       {"distance_calls", e.distance_calls},
                       {"distance_failures", e.distance_failures}};
    j["flagged"] = e.flagged;
    j["proposal_volume"] = e.proposal_volume;
  } else if (e.method == VolumeMethod::pushforward) {
    j["conjugate_crossings"] = e.conjugate_crossings;
  }
  return j;
}

inline VolumeEstimate volume_from_json(const json& j) {
  VolumeEstimate e;
  e.value = j.at("value").get<double>();
  e.std_error = j.at("std_error").get<double>();
  const auto m = j.at("method").get<std::string>();
  e.method = m == "pushforward"   ? VolumeMethod::pushforward
             : m == "closed_form" ? VolumeMethod::closed_form
                                  : VolumeMethod::mc_rejection;
  e.samples = j.at("samples").get<std::uint64_t>();
  e.rho = j.at("rho").get<double>();
  e.seed = j.at("seed").get<std::uint64_t>();
  e.params_hash = parse_hex64(j.at("params_hash").get<std::string>());
  if (j.contains("stages")) {
    const auto& s = j.at("stages");
    e.rejected_height = s.at("rejected_height").get<std::uint64_t>();
    e.rejected_projection = s.at("rejected_projection").get<std::uint64_t>();
    e.rejected_block = s.at("rejected_block").get<std::uint64_t>();
    e.rejected_envelope = s.at("rejected_envelope").get<std::uint64_t>();
    e.accepted_upper = s.at("accepted_upper").get<std::uint64_t>();
    e.skipped_roulette = s.at("skipped_roulette").get<std::uint64_t>();
    e.distance_calls = s.at("distance_calls").get<std::uint64_t>();
    e.distance_failures = s.at("distance_failures").get<std::uint64_t>();
  }
  if (j.contains("flagged")) e.flagged = j.at("flagged").get<bool>();
  if (j.contains("proposal_volume")) e.proposal_volume = j.at("proposal_volume").get<double>();
  if (j.contains("conjugate_crossings")) e.conjugate_crossings = j.at("conjugate_crossings").get<std::uint64_t>();
  return e;
}

inline json to_json(const DistanceResult& r) {
  json j{{"value", r.value},
         {"direction", r.direction},
         {"residual", r.residual},
         {"status", to_string(r.status)},
         {"restarts_used", r.restarts_used}};
  if (!std::isfinite(r.value)) j["value"] = nullptr;
  if (!std::isfinite(r.residual)) j["residual"] = nullptr;
  return j;
}

inline json to_json(const EntropyFit& f) {
  json pts = json::array();
  for (std::size_t i = 0; i < f.window.size(); ++i) {
    pts.push_back(json{{"rho", f.window[i].rho},
                       {"value", f.window[i].value},
                       {"std_error", f.window[i].std_error},
                       {"residual", f.residuals[i]}});
  }
  return json{{"slope", f.slope},
              {"intercept", f.intercept},
              {"slope_std_error", f.slope_std_error},
              {"rho_window", json::array({f.rho_lo, f.rho_hi})},
              {"points_used", f.points_used},
              {"r_squared", f.r_squared},
              {"points", pts}};
}

inline json to_json(const ProjectionReport& r) {
  return json{{"rho", r.rho},
              {"tolerance", r.tolerance},
              {"forward_samples", r.forward_samples},
              {"forward_violations", r.forward_violations},
              {"max_excess", r.max_excess},
              {"lift_samples", r.lift_samples},
              {"lift_found", r.lift_found},
              {"lift_failures", r.lift_failures},
              {"max_lift_error", r.max_lift_error},
              {"passed", r.passed()}};
}

inline json to_json(const RecursionReport& r) {
  json j{{"rho", r.rho},
         {"lhs", to_json(r.lhs)},
         {"rhs", r.rhs},
         {"rhs_std_error", r.rhs_std_error},
         {"holds", r.holds},
         {"passed", r.passed()}};
  if (r.has_pushforward) {
    j["pushforward"] = to_json(r.pushforward);
    j["below_pushforward"] = r.below_pushforward;
  }
  return j;
}

}  // namespace solvgeo
