/*******************************************************************************
 * Copyright (c) 2026 The nvsim Authors.                                       *
 * All rights reserved.                                                        *
 *                                                                             *
 * This source code and the accompanying materials are made available under    *
 * the terms of the Apache License 2.0 which accompanies this distribution.    *
 ******************************************************************************/
#include "nvsim/node_model.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace nvsim::node {

namespace {

using nlohmann::json;

double number_field(const json &rec, const char *name, std::size_t index) {
  if (!rec.contains(name))
    throw std::invalid_argument("spins[" + std::to_string(index) +
                                "]: missing field '" + name + "'");
  const json &v = rec.at(name);
  if (!v.is_number())
    throw std::invalid_argument("spins[" + std::to_string(index) + "]." +
                                name + ": expected a number");
  return v.get<double>();
}

} // namespace

Register parse_register_json(const std::string &text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error &e) {
    throw std::invalid_argument(std::string("register file is not valid JSON: ") +
                                e.what());
  }
  if (!doc.is_object() || !doc.contains("spins") || !doc["spins"].is_array())
    throw std::invalid_argument("register file: missing array field 'spins'");
  static const std::set<std::string> known = {
      "id", "a_par_khz", "a_perp_khz", "delta_omega_khz", "t2_star_ms", "f_ir"};
  Register reg;
  std::set<int> seen;
  std::size_t index = 0;
  for (const json &rec : doc["spins"]) {
    if (!rec.is_object())
      throw std::invalid_argument("spins[" + std::to_string(index) +
                                  "]: expected an object");
    for (const auto &item : rec.items())
      if (!known.count(item.key()))
        throw std::invalid_argument("spins[" + std::to_string(index) +
                                    "]: unknown field '" + item.key() + "'");
    if (!rec.contains("id") || !rec["id"].is_number_integer())
      throw std::invalid_argument("spins[" + std::to_string(index) +
                                  "].id: expected an integer");
    NuclearSpinParams s;
    s.id = rec["id"].get<int>();
    s.a_par_khz = number_field(rec, "a_par_khz", index);
    s.a_perp_khz = number_field(rec, "a_perp_khz", index);
    s.delta_omega_khz = number_field(rec, "delta_omega_khz", index);
    s.t2_star_ms = number_field(rec, "t2_star_ms", index);
    s.f_ir = number_field(rec, "f_ir", index);
    s.validate();
    if (!seen.insert(s.id).second)
      throw std::invalid_argument("register: duplicate spin id " +
                                  std::to_string(s.id));
    reg.push_back(s);
    ++index;
  }
  if (reg.empty())
    throw std::invalid_argument("register file: 'spins' is empty");
  return reg;
}

Register load_register(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw std::invalid_argument("cannot open register file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_register_json(ss.str());
}

std::string register_to_json(const Register &reg) {
  json arr = json::array();
  for (const auto &s : reg)
    arr.push_back({{"id", s.id},
                   {"a_par_khz", s.a_par_khz},
                   {"a_perp_khz", s.a_perp_khz},
                   {"delta_omega_khz", s.delta_omega_khz},
                   {"t2_star_ms", s.t2_star_ms},
                   {"f_ir", s.f_ir}});
  return json{{"spins", arr}}.dump(2) + "\n";
}

} // namespace nvsim::node
