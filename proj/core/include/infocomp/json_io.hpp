#pragma once

// JSON schemas for every on-disk artifact.
//
//   distribution   {"universe": N, "probs": [..]}
//   joint          {"x_size": M, "y_size": N, "probs": [M*N row-major]}
//   cpj instance   {"rounds": K, "root": <node>}
//     internal     {"owner": "A"|"B", "dist_a": [..], "dist_b": [..],
//                   "children": [{"label": "0", "node": <node>}, ..]}
//     leaf         {"output": v}
//   protocol       {"x_size": M, "y_size": N,
//                   "variants": [{"prob": p, "root": <node>}, ..]}
//                  (or "root" directly for a private-coin protocol)
//     internal     {"owner": "A", "dists": {"<input>": [..], ..},
//                   "children": [{"label": "0", "node": <node>}, ..]}
//     leaf         {"output": v}
//   engine spec    {"engine": "sample"|"cpj"|"compress", "eps": f,
//                   "t_max": n, "k_bits": n,
//                   "a": {"p": <distribution>}, "b": {"q": <distribution>},
//                   "instance": <cpj>, "protocol": <protocol>, "mu": <joint>}
//
// Endpoint loading is role-scoped: role A never parses the "b" section
// and vice versa.

#include <string>

#include "infocomp/cpj.hpp"
#include "infocomp/dist.hpp"
#include "infocomp/protocol.hpp"
#include "infocomp/wire.hpp"
#include "json.hpp"

namespace infocomp {

nlohmann::json to_json(const Dist& d);
Dist dist_from_json(const nlohmann::json& j);

nlohmann::json to_json(const JointDist& j);
JointDist joint_from_json(const nlohmann::json& j);

nlohmann::json to_json(const CpjInstance& f);
CpjInstance cpj_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ProtocolTree& pi);
ProtocolTree protocol_from_json(const nlohmann::json& j);

/// Loads one role's engine view; the other role's private section is
/// never read.
EngineSpec engine_spec_from_json(const nlohmann::json& j, Owner role);

nlohmann::json load_json_file(const std::string& path);
void save_json_file(const std::string& path, const nlohmann::json& j);

}  // namespace infocomp
