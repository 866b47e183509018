/*******************************************************************************
 * Copyright (c) 2026 The nvsim Authors.                                       *
 * All rights reserved.                                                        *
 *                                                                             *
 * This source code and the accompanying materials are made available under    *
 * the terms of the Apache License 2.0 which accompanies this distribution.    *
 ******************************************************************************/
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "nvsim/analysis.hpp"
#include "nvsim/app.hpp"

namespace nvsim::app {
namespace {

using nlohmann::ordered_json;

// Every CSV layout the runner emits, identified by its exact header.
struct Schema {
  const char *name;
  std::vector<std::string> header;
  const char *x, *y, *err; // err may be empty
  const char *group;       // column splitting the file into series, or ""
  const char *x_label, *y_label;
  const char *default_model; // "" when no natural fit exists
  bool log_y;
};

const std::vector<Schema> &schemas() {
  static const std::vector<Schema> s = {
      {"pump",
       {"t_ns", "p_0", "p_m1", "p_p1", "p_ex", "p_singlet"},
       "t_ns", "p_0", "", "",
       "pump time t [ns]", "ground-state population p_0", "double-exp", false},
      {"dephase",
       {"n", "xy_len", "xy_err", "z", "survival"},
       "n", "xy_len", "xy_err", "",
       "entanglement attempts N", "XY Bloch length", "exponential", false},
      {"sweep-tau",
       {"spin_id", "tau_us", "n", "xy_len", "xy_err", "z", "z_err", "survival"},
       "tau_us", "xy_len", "xy_err", "spin_id",
       "echo asymmetry tau [us]", "XY Bloch length", "gaussian", false},
      {"sweep-t",
       {"spin_id", "t_us", "n", "xy_len", "xy_err", "z", "z_err", "survival"},
       "t_us", "z", "z_err", "spin_id",
       "echo wait t [us]", "Z Bloch component", "", false},
      {"scan-traces",
       {"subspace", "n", "xy_len", "xy_err", "z", "survival", "t2_factor",
        "flags"},
       "n", "xy_len", "xy_err", "subspace",
       "entanglement attempts N", "XY Bloch length (T2* corrected)",
       "exponential", false},
      {"scaling",
       {"subspace", "delta_omega_khz", "n_1e", "err", "predicted_n_1e",
        "n_reps", "flags"},
       "delta_omega_khz", "n_1e", "err", "",
       "effective coupling |dw| [kHz]", "N_1/e [attempts]", "scaling", true},
      {"ionization",
       {"n", "survival", "survival_err", "analytic"},
       "n", "survival", "survival_err", "",
       "optical resets N", "charge-state survival", "exponential", false},
      {"init-fidelity",
       {"spin_id", "f_ir", "err"},
       "spin_id", "f_ir", "err", "",
       "nuclear spin id", "initialization-readout fidelity F_i,r", "", false},
  };
  return s;
}

const Schema &detect(const CsvTable &t) {
  for (const auto &s : schemas())
    if (s.header == t.header)
      return s;
  std::string h;
  for (std::size_t i = 0; i < t.header.size(); ++i)
    h += (i ? "," : "") + t.header[i];
  throw std::invalid_argument("unknown CSV schema (header: " + h + ")");
}

struct Series {
  std::string group;
  std::vector<std::size_t> rows;
};

std::vector<Series> split(const CsvTable &t, const Schema &s) {
  std::vector<Series> out;
  if (!*s.group) {
    Series all;
    for (std::size_t r = 0; r < t.rows.size(); ++r)
      all.rows.push_back(r);
    out.push_back(std::move(all));
    return out;
  }
  const std::size_t g = t.column(s.group);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (out.empty() || out.back().group != t.rows[r][g])
      out.push_back({t.rows[r][g], {}});
    out.back().rows.push_back(r);
  }
  return out;
}

bool row_flagged(const CsvTable &t, std::size_t r) {
  for (std::size_t c = 0; c < t.header.size(); ++c)
    if (t.header[c] == "flags")
      return t.rows[r][c] != "0";
  return false;
}

std::vector<analysis::DataPoint> series_points(const CsvTable &t,
                                               const Schema &s,
                                               const Series &series) {
  const std::size_t xc = t.column(s.x), yc = t.column(s.y);
  const bool has_err = *s.err;
  const std::size_t ec = has_err ? t.column(s.err) : 0;
  std::vector<analysis::DataPoint> pts;
  double min_err = std::numeric_limits<double>::infinity();
  for (std::size_t r : series.rows) {
    if (row_flagged(t, r))
      continue;
    analysis::DataPoint p{t.number(r, xc), t.number(r, yc),
                          has_err ? t.number(r, ec) : 1.0};
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.err))
      continue;
    if (p.err > 0.0)
      min_err = std::min(min_err, p.err);
    pts.push_back(p);
  }
  // Zero error bars (for example the first checkpoint of a trace) would get
  // infinite weight; floor them at the smallest positive error.
  for (auto &p : pts)
    if (!(p.err > 0.0))
      p.err = std::isfinite(min_err) ? min_err : 1.0;
  return pts;
}

ordered_json num(double v) {
  return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr);
}

ordered_json flags_json(unsigned flags) {
  ordered_json a = ordered_json::array();
  for (const auto &f : analysis::flag_names(flags))
    a.push_back(f);
  return a;
}

ordered_json fit_series(const std::string &model,
                        std::vector<analysis::DataPoint> pts) {
  ordered_json j;
  j["model"] = model;
  if (model == "exponential") {
    const auto f = analysis::fit_exponential(std::move(pts));
    j["params"] = {{"amplitude", num(f.amplitude)}, {"n_1e", num(f.n_1e)}};
    j["errs"] = {{"amplitude", num(f.amplitude_err)},
                 {"n_1e", num(f.n_1e_err)}};
    j["residual_norm"] = num(f.residual_norm);
    j["flags"] = flags_json(f.flags);
  } else if (model == "gaussian") {
    const auto f = analysis::fit_gaussian_peak(std::move(pts));
    j["params"] = {{"center", num(f.center)}, {"width", num(f.width)},
                   {"amplitude", num(f.amplitude)}, {"offset", num(f.offset)}};
    j["errs"] = {{"center", num(f.center_err)}, {"width", num(f.width_err)},
                 {"amplitude", num(f.amplitude_err)},
                 {"offset", num(f.offset_err)}};
    j["residual_norm"] = num(f.residual_norm);
    j["flags"] = flags_json(f.flags);
  } else if (model == "double-exp") {
    // Pump data: the recovery 1 - p_0 is the double exponential.
    for (auto &p : pts)
      p.y = 1.0 - p.y;
    const auto f = analysis::fit_double_exponential(std::move(pts));
    j["params"] = {{"w", num(f.w)}, {"t_fast", num(f.t_fast)},
                   {"t_slow", num(f.t_slow)}};
    j["errs"] = {{"w", num(f.w_err)}, {"t_fast", num(f.t_fast_err)},
                 {"t_slow", num(f.t_slow_err)}};
    j["residual_norm"] = num(f.residual_norm);
    j["flags"] = flags_json(f.flags);
  } else if (model == "scaling") {
    std::vector<analysis::ScalingPoint> sp;
    for (const auto &p : pts)
      if (p.x > 0.0 && p.y > 0.0)
        sp.push_back({p.x, p.y, p.err});
    const auto f = analysis::fit_scaling_model(std::move(sp));
    j["params"] = {{"tau_us", num(f.tau_us)}, {"c_khz", num(f.c_khz)}};
    j["errs"] = {{"tau_us", num(f.tau_err)}, {"c_khz", num(f.c_err)}};
    j["residual_norm"] = num(f.residual_norm);
    j["flags"] = flags_json(f.flags);
  } else {
    throw std::invalid_argument("unknown fit model '" + model +
                                "' (exponential, gaussian, double-exp, scaling)");
  }
  return j;
}

} // namespace

PlotKind plot_kind_from_string(const std::string &s) {
  if (s == "line")
    return PlotKind::line;
  if (s == "scatter-logy")
    return PlotKind::scatter_logy;
  throw std::invalid_argument("unknown plot kind '" + s +
                              "' (line, scatter-logy)");
}

std::string plotdata_text(const CsvTable &table, PlotKind kind) {
  const Schema &s = detect(table);
  const bool has_err = *s.err;
  std::string out;
  out += std::string("# schema: ") + s.name + "\n";
  out += std::string("# x: ") + s.x + " = " + s.x_label + "\n";
  out += std::string("# y: ") + s.y + " = " + s.y_label + "\n";
  if (has_err)
    out += std::string("# yerr: ") + s.err + " (one standard error)\n";
  out += std::string("# style: ") +
         (kind == PlotKind::line ? "line" : "scatter") +
         ((kind == PlotKind::scatter_logy || s.log_y) ? ", log-y" : "") + "\n";
  out += std::string("# columns: ") + s.x + " " + s.y +
         (has_err ? std::string(" ") + s.err : std::string()) + "\n";

  const std::size_t xc = table.column(s.x), yc = table.column(s.y);
  const std::size_t ec = has_err ? table.column(s.err) : 0;
  const auto series = split(table, s);
  for (std::size_t k = 0; k < series.size(); ++k) {
    if (k)
      out += "\n\n"; // gnuplot index separator
    if (*s.group)
      out += std::string("# ") + s.group + " = " + series[k].group + "\n";
    for (std::size_t r : series[k].rows) {
      out += table.rows[r][xc] + " " + table.rows[r][yc];
      if (has_err)
        out += " " + table.rows[r][ec];
      out += "\n";
    }
  }
  return out;
}

void emit_plotdata(const std::string &csv_path, PlotKind kind,
                   const std::string &out_path) {
  const std::string text = plotdata_text(read_csv(csv_path), kind);
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  out << text;
  out.close();
  if (!out)
    throw std::runtime_error("cannot write " + out_path);
}

std::string fit_csv_text(const CsvTable &table, const std::string &model) {
  const Schema &s = detect(table);
  std::string m = model;
  if (m.empty() || m == "auto") {
    m = s.default_model;
    if (m.empty())
      throw std::invalid_argument(std::string("schema ") + s.name +
                                  " has no default fit model; pass one");
  }
  const auto series = split(table, s);
  if (series.size() == 1 && !*s.group)
    return fit_series(m, series_points(table, s, series[0])).dump(2) + "\n";

  ordered_json j;
  j["model"] = m;
  ordered_json groups = ordered_json::array();
  for (const auto &ser : series) {
    ordered_json g = fit_series(m, series_points(table, s, ser));
    g.erase("model");
    ordered_json entry;
    entry[s.group] = ser.group;
    entry.update(g);
    groups.push_back(entry);
  }
  j["groups"] = groups;
  return j.dump(2) + "\n";
}

} // namespace nvsim::app
