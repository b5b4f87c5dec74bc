#include "wsrm/instance_io.hpp"

#include <fstream>
#include <sstream>

#include "wsrm/error.hpp"

namespace wsrm {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw InputError("instance field '" + field + "': " + what);
}

Complex complex_from_json(const json& node, const std::string& field) {
  if (node.is_number()) return {node.get<double>(), 0.0};
  if (!node.is_array() || node.size() != 2 || !node[0].is_number() || !node[1].is_number()) {
    fail(field, "expected a [re, im] pair");
  }
  return {node[0].get<double>(), node[1].get<double>()};
}

double positive_number(const json& obj, const std::string& key, const std::string& field) {
  if (!obj.contains(key)) fail(field, "missing '" + key + "'");
  const json& v = obj.at(key);
  if (!v.is_number()) fail(field + "." + key, "expected a number");
  const double x = v.get<double>();
  if (!(x > 0.0)) fail(field + "." + key, "must be positive");
  return x;
}

}  // namespace

CVector complex_vector_from_json(const json& node, const std::string& field) {
  if (!node.is_array() || node.empty()) fail(field, "expected a nonempty array of [re, im] pairs");
  CVector v(static_cast<Index>(node.size()));
  for (std::size_t i = 0; i < node.size(); ++i) {
    v(static_cast<Index>(i)) = complex_from_json(node[i], field + "[" + std::to_string(i) + "]");
  }
  return v;
}

json complex_vector_to_json(const CVector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back({v(i).real(), v(i).imag()});
  return out;
}

Instance instance_from_json(const json& doc) {
  if (!doc.is_object()) fail("<root>", "expected a JSON object");
  if (!doc.contains("H")) fail("H", "missing");
  const json& h = doc.at("H");
  if (!h.is_array() || h.empty()) fail("H", "expected a nonempty array of channel columns");
  const Index K = static_cast<Index>(h.size());
  CVector first = complex_vector_from_json(h[0], "H[0]");
  const Index M = first.size();
  CMatrix H(M, K);
  H.col(0) = first;
  for (Index k = 1; k < K; ++k) {
    const std::string field = "H[" + std::to_string(k) + "]";
    CVector col = complex_vector_from_json(h[static_cast<std::size_t>(k)], field);
    if (col.size() != M) fail(field, "column length differs from H[0]");
    H.col(k) = col;
  }

  RVector W = RVector::Ones(K);
  if (doc.contains("W")) {
    const json& w = doc.at("W");
    if (!w.is_array() || static_cast<Index>(w.size()) != K) {
      fail("W", "expected " + std::to_string(K) + " weights");
    }
    for (Index k = 0; k < K; ++k) {
      const json& wk = w[static_cast<std::size_t>(k)];
      if (!wk.is_number()) fail("W[" + std::to_string(k) + "]", "expected a number");
      W(k) = wk.get<double>();
      if (!(W(k) > 0.0)) fail("W[" + std::to_string(k) + "]", "weights must be positive");
    }
  }

  if (!doc.contains("constraints")) fail("constraints", "missing");
  const json& cs = doc.at("constraints");
  if (!cs.is_array() || cs.empty()) fail("constraints", "expected a nonempty array");
  std::vector<LinearConstraint> constraints;
  for (std::size_t l = 0; l < cs.size(); ++l) {
    const std::string field = "constraints[" + std::to_string(l) + "]";
    const json& c = cs[l];
    if (!c.is_object()) fail(field, "expected an object");
    if (!c.contains("kind") || !c.at("kind").is_string()) fail(field + ".kind", "missing or not a string");
    const std::string kind_name = c.at("kind").get<std::string>();
    ConstraintKind kind;
    try {
      kind = constraint_kind_from_string(kind_name);
    } catch (const InputError&) {
      fail(field + ".kind", "unknown kind '" + kind_name + "'");
    }
    const double gamma = positive_number(c, "gamma", field);
    if ((l == 0) != (kind == ConstraintKind::SumPower)) {
      fail(field + ".kind", "the first constraint, and only the first, must be sum-power");
    }
    try {
      switch (kind) {
        case ConstraintKind::SumPower:
          constraints.push_back(LinearConstraint::sum_power(M, gamma));
          break;
        case ConstraintKind::InterferenceDirection: {
          if (!c.contains("c")) fail(field + ".c", "missing");
          CVector dir = complex_vector_from_json(c.at("c"), field + ".c");
          if (dir.size() != M) fail(field + ".c", "length must equal antenna count");
          constraints.push_back(LinearConstraint::interference(std::move(dir), gamma));
          break;
        }
        case ConstraintKind::PerAntenna: {
          if (!c.contains("antennas") || !c.at("antennas").is_array()) {
            fail(field + ".antennas", "expected an array of antenna indices");
          }
          std::vector<Index> group;
          for (const auto& a : c.at("antennas")) {
            if (!a.is_number_integer()) fail(field + ".antennas", "indices must be integers");
            group.push_back(a.get<Index>());
          }
          constraints.push_back(LinearConstraint::per_antenna(M, group, gamma));
          break;
        }
        case ConstraintKind::General: {
          if (!c.contains("phi") || !c.at("phi").is_array() ||
              static_cast<Index>(c.at("phi").size()) != M) {
            fail(field + ".phi", "expected " + std::to_string(M) + " rows");
          }
          CMatrix phi(M, M);
          for (Index r = 0; r < M; ++r) {
            const std::string row_field = field + ".phi[" + std::to_string(r) + "]";
            CVector row = complex_vector_from_json(c.at("phi")[static_cast<std::size_t>(r)], row_field);
            if (row.size() != M) fail(row_field, "row length must equal antenna count");
            phi.row(r) = row.transpose();
          }
          constraints.push_back(LinearConstraint::general(std::move(phi), gamma));
          break;
        }
      }
    } catch (const InputError& e) {
      const std::string msg = e.what();
      if (msg.rfind("instance field", 0) == 0) throw;
      fail(field, msg);
    }
  }
  return Instance(std::move(H), std::move(W), std::move(constraints));
}

json instance_to_json(const Instance& instance) {
  json doc;
  json h = json::array();
  for (Index k = 0; k < instance.users(); ++k) h.push_back(complex_vector_to_json(instance.channel(k)));
  doc["H"] = std::move(h);
  doc["W"] = std::vector<double>(instance.weights().data(),
                                 instance.weights().data() + instance.weights().size());
  json cs = json::array();
  for (const auto& c : instance.constraints()) {
    json node;
    node["kind"] = std::string(to_string(c.kind()));
    node["gamma"] = c.gamma();
    switch (c.kind()) {
      case ConstraintKind::SumPower:
        break;
      case ConstraintKind::InterferenceDirection:
        node["c"] = complex_vector_to_json(c.direction());
        break;
      case ConstraintKind::PerAntenna:
        node["antennas"] = c.antennas();
        break;
      case ConstraintKind::General: {
        json rows = json::array();
        for (Index r = 0; r < c.phi().rows(); ++r) rows.push_back(complex_vector_to_json(c.phi().row(r).transpose()));
        node["phi"] = std::move(rows);
        break;
      }
    }
    cs.push_back(std::move(node));
  }
  doc["constraints"] = std::move(cs);
  return doc;
}

Instance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open instance file '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError("instance file '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return instance_from_json(doc);
}

}  // namespace wsrm
