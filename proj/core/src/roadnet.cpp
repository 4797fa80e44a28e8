#include "oasd/roadnet.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "oasd/error.hpp"

namespace oasd {

using nlohmann::json;

namespace {

std::size_t line_of_offset(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

}  // namespace

RoadNetwork RoadNetwork::load(std::istream& in) {
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw parse_error(fmt::format("network file line {}: {}",
                                  line_of_offset(text, e.byte), e.what()));
  }

  std::vector<Vertex> vertices;
  std::vector<Segment> segments;
  std::unordered_map<std::string, VertexIdx> vertex_ids;

  if (!doc.contains("vertices") || !doc.contains("segments")) {
    throw parse_error("network file must contain 'vertices' and 'segments'");
  }

  for (const auto& v : doc.at("vertices")) {
    Vertex vx;
    try {
      vx.id = v.at("id").get<std::string>();
      vx.x = v.value("x", 0.0);
      vx.y = v.value("y", 0.0);
    } catch (const json::exception& e) {
      throw parse_error(fmt::format("bad vertex record: {}", e.what()));
    }
    if (vertex_ids.contains(vx.id)) {
      throw validation_error(fmt::format("duplicate vertex id '{}'", vx.id));
    }
    vertex_ids.emplace(vx.id, static_cast<VertexIdx>(vertices.size()));
    vertices.push_back(std::move(vx));
  }

  std::unordered_map<std::string, SegIdx> seg_ids;
  for (const auto& s : doc.at("segments")) {
    std::string id, from, to;
    double length = 0.0;
    try {
      id = s.at("id").get<std::string>();
      from = s.at("from").get<std::string>();
      to = s.at("to").get<std::string>();
      length = s.value("length", 0.0);
    } catch (const json::exception& e) {
      throw parse_error(fmt::format("bad segment record: {}", e.what()));
    }
    auto fit = vertex_ids.find(from);
    if (fit == vertex_ids.end()) {
      throw validation_error(
          fmt::format("segment '{}' references unknown vertex '{}'", id, from));
    }
    auto tit = vertex_ids.find(to);
    if (tit == vertex_ids.end()) {
      throw validation_error(
          fmt::format("segment '{}' references unknown vertex '{}'", id, to));
    }
    if (length < 0.0) {
      throw validation_error(fmt::format("segment '{}' has negative length", id));
    }
    if (seg_ids.contains(id)) {
      throw validation_error(fmt::format("duplicate segment id '{}'", id));
    }
    seg_ids.emplace(id, static_cast<SegIdx>(segments.size()));
    segments.push_back(Segment{std::move(id), fit->second, tit->second, length});
  }

  return from_parts(std::move(vertices), std::move(segments));
}

RoadNetwork RoadNetwork::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error(fmt::format("cannot open network file '{}'", path));
  return load(in);
}

RoadNetwork RoadNetwork::from_parts(std::vector<Vertex> vertices,
                                    std::vector<Segment> segments) {
  RoadNetwork net;
  net.vertices_ = std::move(vertices);
  net.segments_ = std::move(segments);
  for (std::size_t i = 0; i < net.vertices_.size(); ++i) {
    net.vertex_by_id_.emplace(net.vertices_[i].id, static_cast<VertexIdx>(i));
  }
  for (std::size_t i = 0; i < net.segments_.size(); ++i) {
    const Segment& s = net.segments_[i];
    if (s.from >= net.vertices_.size() || s.to >= net.vertices_.size()) {
      throw validation_error(
          fmt::format("segment '{}' references a vertex index out of range", s.id));
    }
    net.segment_by_id_.emplace(s.id, static_cast<SegIdx>(i));
  }
  net.build_indices();
  return net;
}

void RoadNetwork::build_indices() {
  out_by_vertex_.assign(vertices_.size(), {});
  in_by_vertex_.assign(vertices_.size(), {});
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    out_by_vertex_[segments_[i].from].push_back(static_cast<SegIdx>(i));
    in_by_vertex_[segments_[i].to].push_back(static_cast<SegIdx>(i));
  }
}

void RoadNetwork::save(std::ostream& out) const {
  json doc;
  doc["vertices"] = json::array();
  for (const Vertex& v : vertices_) {
    doc["vertices"].push_back({{"id", v.id}, {"x", v.x}, {"y", v.y}});
  }
  doc["segments"] = json::array();
  for (const Segment& s : segments_) {
    doc["segments"].push_back({{"id", s.id},
                               {"from", vertices_[s.from].id},
                               {"to", vertices_[s.to].id},
                               {"length", s.length}});
  }
  out << doc.dump(2) << "\n";
}

void RoadNetwork::save_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw io_error(fmt::format("cannot write network file '{}'", path));
  save(out);
}

const RoadNetwork::Segment& RoadNetwork::segment(SegIdx idx) const {
  if (idx >= segments_.size()) {
    throw not_found_error(fmt::format("segment index {} out of range", idx));
  }
  return segments_[idx];
}

const RoadNetwork::Vertex& RoadNetwork::vertex(VertexIdx idx) const {
  if (idx >= vertices_.size()) {
    throw not_found_error(fmt::format("vertex index {} out of range", idx));
  }
  return vertices_[idx];
}

std::optional<SegIdx> RoadNetwork::find_segment(const std::string& id) const {
  auto it = segment_by_id_.find(id);
  if (it == segment_by_id_.end()) return std::nullopt;
  return it->second;
}

std::optional<VertexIdx> RoadNetwork::find_vertex(const std::string& id) const {
  auto it = vertex_by_id_.find(id);
  if (it == vertex_by_id_.end()) return std::nullopt;
  return it->second;
}

SegIdx RoadNetwork::require_segment(const std::string& id) const {
  auto idx = find_segment(id);
  if (!idx) throw not_found_error(fmt::format("unknown segment id '{}'", id));
  return *idx;
}

std::size_t RoadNetwork::out_degree(SegIdx e) const {
  return out_by_vertex_[segment(e).to].size();
}

std::size_t RoadNetwork::in_degree(SegIdx e) const {
  return in_by_vertex_[segment(e).from].size();
}

bool RoadNetwork::is_adjacent(SegIdx e1, SegIdx e2) const {
  return segment(e1).to == segment(e2).from;
}

std::span<const SegIdx> RoadNetwork::outgoing(VertexIdx v) const {
  if (v >= out_by_vertex_.size()) {
    throw not_found_error(fmt::format("vertex index {} out of range", v));
  }
  return out_by_vertex_[v];
}

std::span<const SegIdx> RoadNetwork::incoming(VertexIdx v) const {
  if (v >= in_by_vertex_.size()) {
    throw not_found_error(fmt::format("vertex index {} out of range", v));
  }
  return in_by_vertex_[v];
}

bool RoadNetwork::logical_equal(const RoadNetwork& other) const {
  if (vertices_.size() != other.vertices_.size()) return false;
  if (segments_.size() != other.segments_.size()) return false;
  for (const Vertex& v : vertices_) {
    auto idx = other.find_vertex(v.id);
    if (!idx) return false;
    const Vertex& ov = other.vertices_[*idx];
    if (ov.x != v.x || ov.y != v.y) return false;
  }
  for (const Segment& s : segments_) {
    auto idx = other.find_segment(s.id);
    if (!idx) return false;
    const Segment& os = other.segments_[*idx];
    if (other.vertices_[os.from].id != vertices_[s.from].id) return false;
    if (other.vertices_[os.to].id != vertices_[s.to].id) return false;
    if (os.length != s.length) return false;
  }
  return true;
}

}  // namespace oasd
