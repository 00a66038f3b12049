#include "hsense/io.hpp"

#include <nlohmann/json.hpp>

#include <fstream>

namespace hsense::io {

using nlohmann::json;

json matrix_to_json(const MatR& m) {
  json data = json::array();
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
  return json{{"ambient_dim", m.rows()}, {"ncols", m.cols()}, {"data", data}, {"field", "real"}};
}

json matrix_to_json(const MatC& m) {
  json data = json::array();
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j)
      data.push_back(json::array({m(i, j).real(), m(i, j).imag()}));
  return json{{"ambient_dim", m.rows()}, {"ncols", m.cols()}, {"data", data}, {"field", "complex"}};
}

bool json_field_is_complex(const json& j) { return j.value("field", "real") == std::string("complex"); }

MatR matrix_from_json(const json& j) {
  if (json_field_is_complex(j))
    throw std::invalid_argument("matrix_from_json: expected a real matrix");
  const Index rows = j.at("ambient_dim").get<Index>();
  const Index cols = j.at("ncols").get<Index>();
  const auto& data = j.at("data");
  if (static_cast<Index>(data.size()) != rows * cols)
    throw std::invalid_argument("matrix_from_json: data length mismatch");
  MatR m(rows, cols);
  Index k = 0;
  for (Index i = 0; i < rows; ++i)
    for (Index jj = 0; jj < cols; ++jj) m(i, jj) = data[k++].get<double>();
  return m;
}

MatC matrix_from_json_c(const json& j) {
  if (!json_field_is_complex(j)) return complexify(matrix_from_json(j));
  const Index rows = j.at("ambient_dim").get<Index>();
  const Index cols = j.at("ncols").get<Index>();
  const auto& data = j.at("data");
  if (static_cast<Index>(data.size()) != rows * cols)
    throw std::invalid_argument("matrix_from_json: data length mismatch");
  MatC m(rows, cols);
  Index k = 0;
  for (Index i = 0; i < rows; ++i)
    for (Index jj = 0; jj < cols; ++jj) {
      const auto& cell = data[k++];
      m(i, jj) = Complex(cell.at(0).get<double>(), cell.at(1).get<double>());
    }
  return m;
}

json subspace_to_json(const SubspaceR& s) { return matrix_to_json(s.basis()); }
json subspace_to_json(const SubspaceC& s) { return matrix_to_json(s.basis()); }

SubspaceR subspace_from_json(const json& j) {
  return SubspaceR::span_of(matrix_from_json(j));
}

json map_to_json(const LinearMap& t) {
  json j;
  switch (t.kind()) {
    case MapKind::Permutation: j["kind"] = "perm"; break;
    case MapKind::Selection: j["kind"] = "sel"; break;
    case MapKind::Sign: j["kind"] = "sign"; break;
    case MapKind::SignedSelection: j["kind"] = "selsign"; break;
    case MapKind::Explicit: j["kind"] = "explicit"; break;
  }
  json params;
  params["source_dim"] = t.source_dim();
  params["target_dim"] = t.target_dim();
  if (t.kind() == MapKind::Explicit) {
    params["matrix"] = matrix_to_json(t.structured_matrix());
  } else {
    params["indices"] = t.indices();
    if (!t.signs().empty()) params["signs"] = t.signs();
  }
  j["params"] = params;
  if (t.is_composed()) j["compose_with"] = matrix_to_json(t.sensing());
  return j;
}

LinearMap map_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const auto& p = j.at("params");
  LinearMap t;
  if (kind == "perm") {
    t = LinearMap::permutation(p.at("indices").get<std::vector<int>>());
  } else if (kind == "sel") {
    t = LinearMap::selection(p.at("source_dim").get<int>(),
                             p.at("indices").get<std::vector<int>>());
  } else if (kind == "sign") {
    t = LinearMap::sign_map(p.at("signs").get<std::vector<int>>());
  } else if (kind == "selsign") {
    t = LinearMap::signed_selection(p.at("source_dim").get<int>(),
                                    p.at("indices").get<std::vector<int>>(),
                                    p.at("signs").get<std::vector<int>>());
  } else if (kind == "explicit") {
    t = LinearMap::explicit_matrix(matrix_from_json(p.at("matrix")));
  } else {
    throw std::invalid_argument("map_from_json: unknown kind " + kind);
  }
  if (j.contains("compose_with"))
    t = t.composed_with(std::make_shared<const MatR>(matrix_from_json(j.at("compose_with"))));
  return t;
}

json family_to_json(const MapFamily& f) {
  json j;
  switch (f.kind()) {
    case FamilyKind::Permutations: j["descriptor"] = "perm"; break;
    case FamilyKind::Selections: j["descriptor"] = "sel"; break;
    case FamilyKind::Signs: j["descriptor"] = "sign"; break;
    case FamilyKind::SignedSelections: j["descriptor"] = "selsign"; break;
    case FamilyKind::List: j["descriptor"] = "list"; break;
  }
  json params{{"m", f.m()}, {"r", f.r()}};
  if (f.kind() == FamilyKind::List) {
    json maps = json::array();
    for (std::uint64_t i = 0; i < f.cardinality(); ++i) maps.push_back(map_to_json(f.at(i)));
    params["maps"] = maps;
  }
  j["params"] = params;
  if (f.is_composed()) j["compose_with"] = matrix_to_json(*f.sensing_ptr());
  return j;
}

MapFamily family_from_json(const json& j) {
  const std::string d = j.at("descriptor").get<std::string>();
  const auto& p = j.at("params");
  MapFamily f;
  if (d == "perm") f = MapFamily::permutations(p.at("m").get<int>());
  else if (d == "sel") f = MapFamily::selections(p.at("r").get<int>(), p.at("m").get<int>());
  else if (d == "sign") f = MapFamily::signs(p.at("m").get<int>());
  else if (d == "selsign")
    f = MapFamily::signed_selections(p.at("r").get<int>(), p.at("m").get<int>());
  else if (d == "list") {
    std::vector<LinearMap> maps;
    for (const auto& mj : p.at("maps")) maps.push_back(map_from_json(mj));
    f = MapFamily::explicit_list(std::move(maps));
  } else {
    throw std::invalid_argument("family_from_json: unknown descriptor " + d);
  }
  if (j.contains("compose_with")) f = f.composed_with(matrix_from_json(j.at("compose_with")));
  return f;
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  in >> j;
  return j;
}

void save_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << j.dump(2) << "\n";
}

MatR load_matrix_file(const std::string& path) { return matrix_from_json(load_json_file(path)); }

VecR load_vector_file(const std::string& path) {
  MatR m = load_matrix_file(path);
  if (m.cols() != 1) throw std::invalid_argument(path + ": expected a single-column vector");
  return m.col(0);
}

}  // namespace hsense::io
