#include "ellcount/report.hpp"

#include "ellcount/io.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace ellcount::report {

using nlohmann::json;

json to_json(const dimension::DimEstimate& est) {
  const auto& c = est.config;
  return {{"d", est.d},
          {"exact_laplacian", est.exact},
          {"estimated", est.estimated},
          {"ambiguous", est.ambiguous},
          {"flags", est.flags},
          {"member_degrees", est.degrees},
          {"growth_exponents", est.growth_exponents},
          {"singular_values", est.singular_values},
          {"config",
           {{"R", c.R},
            {"h", c.h},
            {"r0", c.r0},
            {"growth_window", {c.r0, c.R / 2}},
            {"growth_radii", c.growth_radii},
            {"circle_samples", c.circle_samples},
            {"growth_margin", c.growth_margin},
            {"flag_band", c.flag_band},
            {"rank_threshold", c.rank_threshold}}}};
}

json to_json(const dimension::DetGrowth& g) {
  return {{"r0", g.r0},
          {"radii", g.radii},
          {"log_det_ratio", g.log_det_ratio},
          {"excluded_radii", g.excluded_radii},
          {"slope", g.slope},
          {"s", g.s}};
}

json to_json(const dimension::Check& c) {
  return {{"name", c.name},     {"value", c.value},         {"bound", c.bound}, {"margin", c.margin},
          {"tolerance", c.tolerance}, {"pass", c.pass}, {"detail", c.detail}};
}

json to_json(const dimension::BoundReport& r) {
  json checks = json::array();
  for (const auto& c : r.checks) checks.push_back(to_json(c));
  json doc = {{"field", r.field_id},
              {"ellipticity",
               {{"lambda_inf", r.lambda_inf},
                {"Lambda_inf", r.Lambda_inf},
                {"ratio_inf", r.ratio_inf},
                {"provenance", r.provenance}}},
              {"seed", r.seed},
              {"n", r.n},
              {"d", r.d},
              {"dims_source", r.exact_dims ? "exact" : "estimated"},
              {"exact_laplacian", r.exact},
              {"dims", r.dims},
              {"partition", r.partition_degrees},
              {"s", r.s},
              {"rhs_2_12", {{"h_opt", r.rhs_max.h_opt}, {"max_value", r.rhs_max.max_value}, {"at_hprime_d", r.rhs_at_hprime}}},
              {"theorem2",
               {{"weighted_sum", r.weighted_sum},
                {"weighted_bound", r.weighted_bound},
                {"dim_sum", r.dim_sum},
                {"dim_sum_bound", r.dim_sum_env}}},
              {"corollary3", {{"liminf_bound", r.liminf_env}, {"sharp", r.sharp}}},
              {"checks", checks},
              {"pass", r.pass()}};
  if (r.estimate) doc["estimate"] = to_json(*r.estimate);
  if (r.growth) doc["det_growth"] = to_json(*r.growth);
  const auto& c = r.config;
  doc["tolerances"] = {{"lemma1", c.lemma1_tol},
                       {"eigen28", c.eigen_tol},
                       {"integrated", c.integrated_tol},
                       {"growth_relative", c.growth_rel_tol}};
  doc["discretization"] = {{"R", c.dims.R},
                           {"h", c.dims.h},
                           {"r0", c.dims.r0},
                           {"spectral_grid", c.spectral_grid},
                           {"points_per_octave", c.points_per_octave},
                           {"mollify_epsilon", c.mollify_epsilon},
                           {"mollify_epsilon_used", r.mollify_epsilon}};
  return doc;
}

json to_json(const EllipticityProfile& p) {
  return {{"radii", p.radii},         {"lambda_r", p.lambda_r},   {"Lambda_r", p.Lambda_r},
          {"lambda_inf", p.lambda_inf}, {"Lambda_inf", p.Lambda_inf}, {"ratio_inf", p.ratio_inf},
          {"provenance", p.provenance()}, {"seed", p.seed}};
}

void write_json(const std::filesystem::path& path, const json& doc) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << doc.dump(2) << '\n';
}

void write_checks_csv(const std::filesystem::path& path, const std::vector<dimension::Check>& checks) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& c : checks) {
    std::string detail = c.detail;
    for (char& ch : detail)
      if (ch == ',') ch = ';';
    rows.push_back({c.name, io::fmt(c.value), io::fmt(c.bound), io::fmt(c.margin), io::fmt(c.tolerance),
                    c.pass ? "1" : "0", detail});
  }
  io::write_csv(path, {"name", "value", "bound", "margin", "tolerance", "pass", "detail"}, rows);
}

void write_growth_csv(const std::filesystem::path& path, const dimension::DetGrowth& g) {
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < g.radii.size(); ++i) {
    rows.push_back({io::fmt(g.radii[i]), io::fmt(std::log(g.radii[i])), io::fmt(g.log_det_ratio[i])});
  }
  io::write_csv(path, {"r", "log_r", "log_det_ratio"}, rows);
}

}  // namespace ellcount::report
