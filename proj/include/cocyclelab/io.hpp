// Copyright 2026 the cocycle-lab developers.
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cocyclelab/arithmetic.hpp"
#include "cocyclelab/cocycle.hpp"
#include "cocyclelab/fourier.hpp"
#include "cocyclelab/reduction.hpp"
#include "cocyclelab/renorm.hpp"

namespace cocyclelab {

using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// FourierMap: {period, entries: [[k, re, im], ...], symmetry}; exact
// round-trip (nlohmann emits shortest-round-trip doubles).
// ---------------------------------------------------------------------------

inline Json to_json(const FourierMap& f) {
  Json entries = Json::array();
  for (const auto& [k, v] : f.coeffs()) {
    entries.push_back({k, v.real(), v.imag()});
  }
  return Json{{"period", f.period()},
              {"entries", entries},
              {"symmetry", f.symmetry() == Symmetry::REAL_VALUED ? "REAL_VALUED" : "NONE"}};
}

inline FourierMap fourier_from_json(const Json& j) {
  FourierMap f(j.at("period").get<int>(),
               j.at("symmetry").get<std::string>() == "REAL_VALUED"
                   ? Symmetry::REAL_VALUED
                   : Symmetry::NONE);
  for (const auto& e : j.at("entries")) {
    f.set_coeff(e.at(0).get<long>(), Complex(e.at(1).get<double>(), e.at(2).get<double>()));
  }
  return f;
}

// ---------------------------------------------------------------------------
// Cocycle: {freq, period, kind, payload}.  Grid payload stores quaternion
// samples; closed forms store their defining parameters.
// ---------------------------------------------------------------------------

inline Json to_json(const GroupElement& g) { return Json{g.w, g.x, g.y, g.z}; }

inline GroupElement group_from_json(const Json& j) {
  return GroupElement{j.at(0).get<double>(), j.at(1).get<double>(),
                      j.at(2).get<double>(), j.at(3).get<double>()};
}

inline Json to_json(const Cocycle& c) {
  Json j{{"freq", c.freq()}, {"period", c.period()}, {"label", c.label()}};
  if (c.kind() == GeneratorKind::grid) {
    j["kind"] = "grid";
    Json samples = Json::array();
    for (const auto& q : c.grid_samples()) samples.push_back(to_json(q));
    j["payload"] = Json{{"samples", samples}};
    return j;
  }
  j["kind"] = "closed_form";
  switch (c.form()) {
    case Cocycle::Form::constant:
      j["payload"] = Json{{"type", "constant"}, {"value", to_json(c.constant_value())}};
      break;
    case Cocycle::Form::exponent:
      j["payload"] = Json{{"type", "exponent"}, {"r", c.exponent_r()}};
      break;
    case Cocycle::Form::normal_form:
      j["payload"] = Json{{"type", "normal_form"},
                          {"z", {c.normal_form_z().real(), c.normal_form_z().imag()}}};
      break;
    case Cocycle::Form::model_chart:
      j["payload"] = Json{{"type", "model_chart"},
                          {"u_t", to_json(c.chart_u_t())},
                          {"u_z", to_json(c.chart_u_z())}};
      break;
    case Cocycle::Form::custom:
      throw PreconditionViolation(
          "to_json: custom closed-form generators serialize as grids; resample first");
  }
  return j;
}

inline Cocycle cocycle_from_json(const Json& j) {
  double freq = j.at("freq").get<double>();
  int period = j.at("period").get<int>();
  std::string label = j.value("label", std::string("cocycle"));
  if (j.at("kind").get<std::string>() == "grid") {
    std::vector<GroupElement> samples;
    for (const auto& q : j.at("payload").at("samples")) {
      samples.push_back(group_from_json(q));
    }
    return Cocycle::from_grid(freq, period, samples, label);
  }
  const Json& p = j.at("payload");
  std::string type = p.at("type").get<std::string>();
  if (type == "constant") {
    return Cocycle::constant(freq, group_from_json(p.at("value")), period, label);
  }
  if (type == "exponent") {
    return Cocycle::rotation_model(freq, p.at("r").get<double>(), label);
  }
  if (type == "normal_form") {
    return Cocycle::normal_form(
        {freq, Complex(p.at("z").at(0).get<double>(), p.at("z").at(1).get<double>())}, label);
  }
  if (type == "model_chart") {
    return Cocycle::model_chart(freq, fourier_from_json(p.at("u_t")),
                                fourier_from_json(p.at("u_z")), label);
  }
  throw PreconditionViolation("cocycle_from_json: unknown closed form '" + type + "'");
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

inline Json to_json(const DiophantineReport& r) {
  return Json{{"condition", r.condition == DiophCondition::DC ? "DC" : "DC_TILDE"},
              {"gamma", r.gamma},
              {"tau", r.tau},
              {"depth_K", r.depth_K},
              {"min_margin", r.min_margin},
              {"worst_k", r.worst_k},
              {"satisfied", r.satisfied}};
}

inline std::string reduction_csv_header() {
  return "step_index,truncation_N,input_size,output_size,min_denominator,conjugation_size";
}

inline std::string to_csv_row(const ReductionStepReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << r.step_index << ',' << r.truncation_N << ',' << r.input_size << ','
     << r.output_size << ',' << r.min_denominator << ',' << r.conjugation_size;
  return os.str();
}

inline Json to_json(const PipelineResult& r) {
  Json stages = Json::array();
  for (const auto& s : r.stages) stages.push_back(s);
  return Json{
      {"stages", stages},
      {"distance_to_constant", r.distance_to_constant},
      {"make_action_defect", r.make_action_defect},
      {"base_change_defect", r.base_change_defect},
      {"base_change_roundtrip", r.base_change_roundtrip},
      {"first_defect", r.first_defect},
      {"nf_alpha_periodicity", r.nf_alpha_periodicity},
      {"nf2_identity", r.nf2_identity},
      {"nf2_telescope", r.nf2_telescope},
      {"dm_shift_consistency", r.dm_shift_consistency},
      {"final_constant", to_json(r.final_constant)},
      {"renorm_freqs",
       {{r.renorm_freqs[0].m, r.renorm_freqs[0].n}, {r.renorm_freqs[1].m, r.renorm_freqs[1].n}}}};
}

}  // namespace cocyclelab
