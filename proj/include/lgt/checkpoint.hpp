#pragma once

// Field checkpoint format (JSON, version 1):
//
//   {
//     "format": "lgt-gauge-field", "version": 1,
//     "group": "U(2)", "extents": [8, 8, 8],
//     "links": [...],           // U(1): angles; Z_m: integers k;
//                               // U(n): per link 2 n^2 doubles, row-major (re, im)
//     "rng": {"seed": s, "stream": id, "counter": c, "engine": "<mt19937_64 state>"},
//     "chain": {"beta": b, "width": w, "sweeps_done": k, "proposals": p, "accepted": a}
//   }
//
// "rng" and "chain" are present for chain checkpoints only. Doubles are
// written in shortest round-trip form, so a restore is bit-exact.

#include <fstream>
#include <json.hpp>
#include <string>

#include "lgt/sampler.hpp"

namespace lgt {

inline constexpr int kCheckpointVersion = 1;

namespace detail {

inline nlohmann::json link_to_json(const CircleGroup&, double a) { return a; }
inline nlohmann::json link_to_json(const CyclicGroup&, int k) { return k; }
inline nlohmann::json link_to_json(const UnitaryGroup& g, const Matrix& u) {
  nlohmann::json arr = nlohmann::json::array();
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j) {
      arr.push_back(u(i, j).real());
      arr.push_back(u(i, j).imag());
    }
  return arr;
}

inline double link_from_json(const CircleGroup&, const nlohmann::json& j) { return j.get<double>(); }
inline int link_from_json(const CyclicGroup& g, const nlohmann::json& j) {
  const int k = j.get<int>();
  if (k < 0 || k >= g.m) throw ConfigError("checkpoint: Z_m link index out of range");
  return k;
}
inline Matrix link_from_json(const UnitaryGroup& g, const nlohmann::json& j) {
  if (!j.is_array() || static_cast<int>(j.size()) != 2 * g.n * g.n) throw ConfigError("checkpoint: bad U(n) link size");
  Matrix u(g.n, g.n);
  for (int i = 0; i < g.n; ++i)
    for (int k = 0; k < g.n; ++k) u(i, k) = Complex(j[2 * (i * g.n + k)].get<double>(), j[2 * (i * g.n + k) + 1].get<double>());
  return u;
}

}  // namespace detail

template <class G>
G make_group(const GroupId& id);
template <>
inline CircleGroup make_group<CircleGroup>(const GroupId& id) {
  require_config(id.kind() == GroupId::Kind::CircleU1, "expected U(1), got " + id.name());
  return {};
}
template <>
inline CyclicGroup make_group<CyclicGroup>(const GroupId& id) {
  require_config(id.kind() == GroupId::Kind::CyclicZm, "expected Z_m, got " + id.name());
  return CyclicGroup(id.m());
}
template <>
inline UnitaryGroup make_group<UnitaryGroup>(const GroupId& id) {
  require_config(id.kind() == GroupId::Kind::UnitaryN, "expected U(n), got " + id.name());
  return UnitaryGroup(id.n());
}

template <class G>
nlohmann::json field_to_json(const GaugeField<G>& u) {
  nlohmann::json j;
  j["format"] = "lgt-gauge-field";
  j["version"] = kCheckpointVersion;
  j["group"] = u.group().id().name();
  j["extents"] = u.geometry().extents();
  nlohmann::json links = nlohmann::json::array();
  for (const auto& l : u.links()) links.push_back(detail::link_to_json(u.group(), l));
  j["links"] = std::move(links);
  return j;
}

template <class G>
GaugeField<G> field_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "lgt-gauge-field") throw ConfigError("checkpoint: not an lgt-gauge-field document");
  if (j.value("version", 0) != kCheckpointVersion)
    throw ConfigError("checkpoint: unsupported version " + std::to_string(j.value("version", 0)));
  const GroupId id = GroupId::parse(j.at("group").get<std::string>());
  const auto extents = j.at("extents").get<std::vector<int>>();
  auto geo = std::make_shared<const LatticeGeometry>(static_cast<int>(extents.size()), extents);
  GaugeField<G> u(geo, make_group<G>(id));
  const auto& links = j.at("links");
  if (static_cast<int>(links.size()) != u.num_edges()) throw ConfigError("checkpoint: link count does not match the geometry");
  for (int e = 0; e < u.num_edges(); ++e) u[e] = detail::link_from_json(u.group(), links[e]);
  return u;
}

inline nlohmann::json rng_to_json(const RngStream& r) {
  return {{"seed", r.seed()}, {"stream", r.stream_id()}, {"counter", r.counter()}, {"engine", r.engine_state()}};
}

inline RngStream rng_from_json(const nlohmann::json& j) {
  RngStream r(j.at("seed").get<std::uint64_t>(), j.at("stream").get<std::uint64_t>());
  r.restore(j.at("counter").get<std::uint64_t>(), j.at("engine").get<std::string>());
  return r;
}

template <class G>
nlohmann::json chain_to_json(const GaugeChain<G>& c) {
  nlohmann::json j = field_to_json(c.field());
  j["rng"] = rng_to_json(c.rng());
  j["chain"] = {{"beta", c.beta()},
                {"width", c.width()},
                {"sweeps_done", c.sweeps_done()},
                {"proposals", c.totals().proposals},
                {"accepted", c.totals().accepted}};
  return j;
}

/// Restore field, RNG and sampler state into a chain built with the same parameters.
template <class G>
void chain_from_json(GaugeChain<G>& c, const nlohmann::json& j) {
  auto field = field_from_json<G>(j);
  if (!(field.geometry() == c.field().geometry())) throw ConfigError("checkpoint: geometry differs from the chain's");
  const auto& ch = j.at("chain");
  if (ch.at("beta").get<double>() != c.beta()) throw ConfigError("checkpoint: beta differs from the chain's");
  // Keep the chain's shared geometry object.
  GaugeField<G> into(c.field().geometry_ptr(), field.group());
  for (int e = 0; e < into.num_edges(); ++e) into[e] = field[e];
  c.restore(std::move(into), rng_from_json(j.at("rng")), ch.at("width").get<double>(), ch.at("sweeps_done").get<long>(),
            SweepStats{ch.at("proposals").get<long>(), ch.at("accepted").get<long>()});
}

inline void write_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  os << j.dump(1) << "\n";
  if (!os) throw std::runtime_error("write failed for '" + path + "'");
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("'" + path + "': " + e.what());
  }
}

}  // namespace lgt
