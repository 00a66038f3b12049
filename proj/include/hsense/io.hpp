#pragma once

#include <nlohmann/json_fwd.hpp>
#include <string>

#include "hsense/maps.hpp"
#include "hsense/numkit.hpp"

// Single JSON schema for matrices and subspaces:
//   {ambient_dim, ncols, data: row-major array, field: "real"|"complex"}
// with complex entries encoded as [re, im] pairs. Subspaces are matrices with
// orthonormal columns; vectors have ncols = 1.

namespace hsense::io {

nlohmann::json matrix_to_json(const MatR& m);
nlohmann::json matrix_to_json(const MatC& m);
MatR matrix_from_json(const nlohmann::json& j);
MatC matrix_from_json_c(const nlohmann::json& j);
bool json_field_is_complex(const nlohmann::json& j);

nlohmann::json subspace_to_json(const SubspaceR& s);
nlohmann::json subspace_to_json(const SubspaceC& s);
SubspaceR subspace_from_json(const nlohmann::json& j);

nlohmann::json map_to_json(const LinearMap& t);
LinearMap map_from_json(const nlohmann::json& j);

nlohmann::json family_to_json(const MapFamily& f);
MapFamily family_from_json(const nlohmann::json& j);

nlohmann::json load_json_file(const std::string& path);
void save_json_file(const std::string& path, const nlohmann::json& j);

MatR load_matrix_file(const std::string& path);
VecR load_vector_file(const std::string& path);

}  // namespace hsense::io
