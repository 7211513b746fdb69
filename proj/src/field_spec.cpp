#include "ellcount/field_spec.hpp"

#include <fstream>
#include <set>

namespace ellcount {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& prefix) {
  for (const auto& [k, v] : obj.items()) {
    if (!allowed.count(k)) throw FieldSpecError(prefix + k, "unknown key");
  }
}

double number(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.contains(key)) throw FieldSpecError(path, "missing");
  const auto& v = obj.at(key);
  if (!v.is_number()) throw FieldSpecError(path, "expected a number");
  return v.get<double>();
}

std::vector<double> numbers(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.contains(key)) throw FieldSpecError(path, "missing");
  const auto& v = obj.at(key);
  if (!v.is_array()) throw FieldSpecError(path, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw FieldSpecError(path, "expected an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

Mat matrix(const json& obj, const std::string& key, const std::string& path, int n) {
  if (!obj.contains(key)) throw FieldSpecError(path, "missing");
  const auto& v = obj.at(key);
  if (!v.is_array() || static_cast<int>(v.size()) != n) throw FieldSpecError(path, "expected an n x n array");
  Mat m(n, n);
  for (int i = 0; i < n; ++i) {
    const auto& row = v[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<int>(row.size()) != n) throw FieldSpecError(path, "expected an n x n array");
    for (int j = 0; j < n; ++j) {
      if (!row[static_cast<std::size_t>(j)].is_number()) throw FieldSpecError(path, "entries must be numbers");
      m(i, j) = row[static_cast<std::size_t>(j)].get<double>();
    }
  }
  return m;
}

json matrix_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

std::shared_ptr<const CoefficientField> parse_field_spec(const json& doc) {
  if (!doc.is_object()) throw FieldSpecError("<root>", "expected a JSON object");
  reject_unknown(doc, {"family", "n", "lambda", "Lambda", "params", "tail", "seed"}, "");
  if (!doc.contains("family") || !doc["family"].is_string()) throw FieldSpecError("family", "missing or not a string");
  Family family;
  try {
    family = parse_family(doc["family"].get<std::string>());
  } catch (const std::exception& e) {
    throw FieldSpecError("family", e.what());
  }
  int n = 2;
  if (doc.contains("n")) {
    if (!doc["n"].is_number_integer() || doc["n"].get<int>() < 2 || doc["n"].get<int>() > kMaxDim) {
      throw FieldSpecError("n", "expected an integer in [2, " + std::to_string(kMaxDim) + "]");
    }
    n = doc["n"].get<int>();
  }
  std::optional<double> lambda, Lambda;
  if (doc.contains("lambda")) lambda = number(doc, "lambda", "lambda");
  if (doc.contains("Lambda")) Lambda = number(doc, "Lambda", "Lambda");
  std::uint64_t seed = 0;
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned()) throw FieldSpecError("seed", "expected a nonnegative integer");
    seed = doc["seed"].get<std::uint64_t>();
  }
  TailMode tail = TailMode::automatic;
  double r_max = 16.0;
  if (doc.contains("tail")) {
    const auto& t = doc["tail"];
    if (!t.is_object()) throw FieldSpecError("tail", "expected an object");
    reject_unknown(t, {"kind", "R_max"}, "tail.");
    if (t.contains("kind")) {
      if (!t["kind"].is_string()) throw FieldSpecError("tail.kind", "expected a string");
      const auto kind = t["kind"].get<std::string>();
      if (kind == "analytic") tail = TailMode::analytic;
      else if (kind == "sampled") tail = TailMode::sampled;
      else if (kind == "auto") tail = TailMode::automatic;
      else throw FieldSpecError("tail.kind", "expected analytic, sampled or auto");
    }
    if (t.contains("R_max")) {
      r_max = number(t, "R_max", "tail.R_max");
      if (!(r_max > 0)) throw FieldSpecError("tail.R_max", "must be positive");
    }
  }
  const json params = doc.contains("params") ? doc["params"] : json::object();
  if (!params.is_object()) throw FieldSpecError("params", "expected an object");

  FamilyParams fp;
  switch (family) {
    case Family::identity:
      reject_unknown(params, {}, "params.");
      break;
    case Family::constant_spd:
      reject_unknown(params, {"matrix", "diagonal"}, "params.");
      if (params.contains("diagonal")) {
        const auto diag = numbers(params, "diagonal", "params.diagonal");
        if (static_cast<int>(diag.size()) != n) throw FieldSpecError("params.diagonal", "expected n entries");
        Mat m = Mat::Zero(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = diag[static_cast<std::size_t>(i)];
        fp = ConstantParams{m};
      } else {
        fp = ConstantParams{matrix(params, "matrix", "params.matrix", n)};
      }
      break;
    case Family::radial_piecewise:
      reject_unknown(params, {"breaks", "values"}, "params.");
      fp = RadialParams{numbers(params, "breaks", "params.breaks"), numbers(params, "values", "params.values")};
      break;
    case Family::periodic_checkerboard: {
      reject_unknown(params, {"period", "values", "origin"}, "params.");
      CheckerboardParams cp;
      cp.period = number(params, "period", "params.period");
      const auto vals = numbers(params, "values", "params.values");
      if (vals.size() != 2) throw FieldSpecError("params.values", "expected two values");
      cp.values[0] = vals[0];
      cp.values[1] = vals[1];
      cp.origin = Vec::Zero(n);
      if (params.contains("origin")) {
        const auto o = numbers(params, "origin", "params.origin");
        if (static_cast<int>(o.size()) != n) throw FieldSpecError("params.origin", "expected n entries");
        for (int i = 0; i < n; ++i) cp.origin[i] = o[static_cast<std::size_t>(i)];
      }
      fp = cp;
      break;
    }
    case Family::conic_decay: {
      reject_unknown(params, {"base", "amplitude", "scale"}, "params.");
      ConicDecayParams cp;
      cp.base = params.contains("base") ? matrix(params, "base", "params.base", n) : Mat(Mat::Identity(n, n));
      cp.amplitude = number(params, "amplitude", "params.amplitude");
      if (params.contains("scale")) cp.scale = number(params, "scale", "params.scale");
      fp = cp;
      break;
    }
    case Family::random_measurable:
      reject_unknown(params, {"cell"}, "params.");
      fp = RandomParams{number(params, "cell", "params.cell")};
      break;
  }
  try {
    return std::make_shared<const CoefficientField>(n, family, fp, lambda, Lambda, seed, tail, r_max);
  } catch (const std::invalid_argument& e) {
    throw FieldSpecError("params", e.what());
  }
}

std::shared_ptr<const CoefficientField> load_field_spec(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw FieldSpecError("<file>", "cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(is);
  } catch (const json::parse_error& e) {
    throw FieldSpecError("<file>", std::string("invalid JSON: ") + e.what());
  }
  return parse_field_spec(doc);
}

json field_spec_json(const CoefficientField& field) {
  json doc;
  doc["family"] = family_name(field.family());
  doc["n"] = field.dim();
  doc["lambda"] = field.lambda();
  doc["Lambda"] = field.Lambda();
  doc["seed"] = field.seed();
  json params = json::object();
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, ConstantParams>) {
          params["matrix"] = matrix_json(p.matrix);
        } else if constexpr (std::is_same_v<P, RadialParams>) {
          params["breaks"] = p.breaks;
          params["values"] = p.values;
        } else if constexpr (std::is_same_v<P, CheckerboardParams>) {
          params["period"] = p.period;
          params["values"] = {p.values[0], p.values[1]};
          params["origin"] = std::vector<double>(p.origin.data(), p.origin.data() + p.origin.size());
        } else if constexpr (std::is_same_v<P, ConicDecayParams>) {
          params["base"] = matrix_json(p.base);
          params["amplitude"] = p.amplitude;
          params["scale"] = p.scale;
        } else if constexpr (std::is_same_v<P, RandomParams>) {
          params["cell"] = p.cell;
        }
      },
      field.params());
  doc["params"] = params;
  const char* kind = field.tail_mode() == TailMode::analytic  ? "analytic"
                     : field.tail_mode() == TailMode::sampled ? "sampled"
                                                              : "auto";
  doc["tail"] = {{"kind", kind}, {"R_max", field.r_max()}};
  return doc;
}

}  // namespace ellcount
