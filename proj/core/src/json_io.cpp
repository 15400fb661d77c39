#include "infocomp/json_io.hpp"

#include <fstream>

namespace infocomp {

using nlohmann::json;

json to_json(const Dist& d) {
  return json{{"universe", d.size()}, {"probs", std::vector<double>(d.probs().begin(), d.probs().end())}};
}

Dist dist_from_json(const json& j) {
  if (!j.is_object() || !j.contains("universe") || !j.contains("probs"))
    throw std::invalid_argument("distribution JSON needs {universe, probs}");
  const auto size = j.at("universe").get<std::size_t>();
  auto probs = j.at("probs").get<std::vector<double>>();
  return Dist(Universe{size}, std::move(probs));
}

json to_json(const JointDist& jd) {
  return json{{"x_size", jd.x_size()},
              {"y_size", jd.y_size()},
              {"probs", std::vector<double>(jd.probs().begin(), jd.probs().end())}};
}

JointDist joint_from_json(const json& j) {
  if (!j.is_object() || !j.contains("x_size") || !j.contains("y_size") || !j.contains("probs"))
    throw std::invalid_argument("joint JSON needs {x_size, y_size, probs}");
  return JointDist(j.at("x_size").get<std::size_t>(), j.at("y_size").get<std::size_t>(),
                   j.at("probs").get<std::vector<double>>());
}

namespace {

json cpj_node_to_json(const CpjNode& n) {
  if (n.is_leaf()) return json{{"output", *n.output}};
  json children = json::array();
  for (std::size_t i = 0; i < n.children.size(); ++i)
    children.push_back(json{{"label", n.labels[i]}, {"node", cpj_node_to_json(n.children[i])}});
  return json{{"owner", n.owner == Owner::a ? "A" : "B"},
              {"dist_a", std::vector<double>(n.dist_a->probs().begin(), n.dist_a->probs().end())},
              {"dist_b", std::vector<double>(n.dist_b->probs().begin(), n.dist_b->probs().end())},
              {"children", std::move(children)}};
}

CpjNode cpj_node_from_json(const json& j) {
  CpjNode n;
  if (j.contains("output")) {
    n.output = j.at("output").get<std::int64_t>();
    return n;
  }
  const auto owner = j.at("owner").get<std::string>();
  if (owner != "A" && owner != "B")
    throw std::invalid_argument("cpj node: owner must be \"A\" or \"B\"");
  n.owner = owner == "A" ? Owner::a : Owner::b;
  for (const json& c : j.at("children")) {
    n.labels.push_back(c.at("label").get<std::string>());
    n.children.push_back(cpj_node_from_json(c.at("node")));
  }
  n.dist_a = Dist(Universe{n.children.size()}, j.at("dist_a").get<std::vector<double>>());
  n.dist_b = Dist(Universe{n.children.size()}, j.at("dist_b").get<std::vector<double>>());
  return n;
}

json proto_node_to_json(const ProtoNode& n) {
  if (n.is_leaf()) return json{{"output", *n.output}};
  json children = json::array();
  for (std::size_t i = 0; i < n.children.size(); ++i)
    children.push_back(json{{"label", n.labels[i]}, {"node", proto_node_to_json(n.children[i])}});
  json dists = json::object();
  for (std::size_t in = 0; in < n.dists.size(); ++in)
    dists[std::to_string(in)] =
        std::vector<double>(n.dists[in].probs().begin(), n.dists[in].probs().end());
  return json{{"owner", n.owner == Owner::a ? "A" : "B"},
              {"dists", std::move(dists)},
              {"children", std::move(children)}};
}

ProtoNode proto_node_from_json(const json& j, std::size_t x_size, std::size_t y_size) {
  ProtoNode n;
  if (j.contains("output")) {
    n.output = j.at("output").get<std::int64_t>();
    return n;
  }
  const auto owner = j.at("owner").get<std::string>();
  if (owner != "A" && owner != "B")
    throw std::invalid_argument("protocol node: owner must be \"A\" or \"B\"");
  n.owner = owner == "A" ? Owner::a : Owner::b;
  for (const json& c : j.at("children")) {
    n.labels.push_back(c.at("label").get<std::string>());
    n.children.push_back(proto_node_from_json(c.at("node"), x_size, y_size));
  }
  const std::size_t inputs = n.owner == Owner::a ? x_size : y_size;
  const json& dists = j.at("dists");
  for (std::size_t in = 0; in < inputs; ++in) {
    const std::string key = std::to_string(in);
    if (!dists.contains(key))
      throw std::invalid_argument("protocol node: missing distribution for input " + key);
    n.dists.emplace_back(Universe{n.children.size()}, dists.at(key).get<std::vector<double>>());
  }
  return n;
}

}  // namespace

json to_json(const CpjInstance& f) {
  return json{{"rounds", f.rounds}, {"root", cpj_node_to_json(f.root)}};
}

CpjInstance cpj_from_json(const json& j) {
  CpjInstance f;
  f.rounds = j.at("rounds").get<std::uint32_t>();
  f.root = cpj_node_from_json(j.at("root"));
  f.validate();
  return f;
}

json to_json(const ProtocolTree& pi) {
  json variants = json::array();
  for (const ProtocolVariant& v : pi.variants)
    variants.push_back(json{{"prob", v.prob}, {"root", proto_node_to_json(v.root)}});
  return json{{"x_size", pi.x_size}, {"y_size", pi.y_size}, {"variants", std::move(variants)}};
}

ProtocolTree protocol_from_json(const json& j) {
  ProtocolTree pi;
  pi.x_size = j.at("x_size").get<std::size_t>();
  pi.y_size = j.at("y_size").get<std::size_t>();
  if (j.contains("root")) {
    pi.variants.push_back(ProtocolVariant{1.0, proto_node_from_json(j.at("root"), pi.x_size, pi.y_size)});
  } else {
    for (const json& v : j.at("variants"))
      pi.variants.push_back(ProtocolVariant{v.at("prob").get<double>(),
                                            proto_node_from_json(v.at("root"), pi.x_size, pi.y_size)});
  }
  pi.validate();
  return pi;
}

EngineSpec engine_spec_from_json(const json& j, Owner role) {
  EngineSpec spec;
  const auto kind = j.at("engine").get<std::string>();
  if (kind == "sample") spec.kind = EngineSpec::Kind::sample;
  else if (kind == "cpj") spec.kind = EngineSpec::Kind::cpj;
  else if (kind == "compress") spec.kind = EngineSpec::Kind::compress;
  else throw std::invalid_argument("engine spec: unknown engine \"" + kind + "\"");

  if (j.contains("eps")) spec.cfg.eps = j.at("eps").get<double>();
  if (j.contains("t_max")) spec.cfg.t_max = j.at("t_max").get<std::uint32_t>();
  if (j.contains("k_bits")) spec.cfg.k_bits = j.at("k_bits").get<std::uint32_t>();

  switch (spec.kind) {
    case EngineSpec::Kind::sample:
      if (role == Owner::a) spec.p = dist_from_json(j.at("a").at("p"));
      else spec.q = dist_from_json(j.at("b").at("q"));
      break;
    case EngineSpec::Kind::cpj:
      spec.instance = cpj_from_json(j.at("instance"));
      break;
    case EngineSpec::Kind::compress:
      spec.protocol = protocol_from_json(j.at("protocol"));
      spec.mu = joint_from_json(j.at("mu"));
      break;
  }
  return spec;
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error("invalid JSON in " + path + ": " + e.what());
  }
  return j;
}

void save_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
}

}  // namespace infocomp
