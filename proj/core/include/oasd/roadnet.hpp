#ifndef OASD_ROADNET_HPP
#define OASD_ROADNET_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace oasd {

using SegIdx = std::uint32_t;
using VertexIdx = std::uint32_t;

// Directed road-network graph over segments (edges). Degrees are defined
// over segment-to-segment transitions: out_degree(e) counts the segments
// that can follow e, in_degree(e) the segments that can precede it. A
// network is immutable after construction and safe to share read-only
// across any number of detection sessions.
class RoadNetwork {
 public:
  struct Vertex {
    std::string id;
    double x = 0.0;
    double y = 0.0;
  };

  struct Segment {
    std::string id;
    VertexIdx from = 0;
    VertexIdx to = 0;
    double length = 0.0;
  };

  RoadNetwork() = default;

  // Network file format: one JSON object with "vertices" and "segments".
  // Malformed input raises a parse error with the line number; a segment
  // referencing an unknown vertex raises a validation error naming it.
  static RoadNetwork load(std::istream& in);
  static RoadNetwork load_file(const std::string& path);
  static RoadNetwork from_parts(std::vector<Vertex> vertices,
                                std::vector<Segment> segments);

  // Deterministic serialization; load(serialize(net)) equals net.
  void save(std::ostream& out) const;
  void save_file(const std::string& path) const;

  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t segment_count() const { return segments_.size(); }

  const Segment& segment(SegIdx idx) const;
  const Vertex& vertex(VertexIdx idx) const;
  const std::string& segment_name(SegIdx idx) const { return segment(idx).id; }

  std::optional<SegIdx> find_segment(const std::string& id) const;
  std::optional<VertexIdx> find_vertex(const std::string& id) const;
  // Throwing variant used by file ingestion paths.
  SegIdx require_segment(const std::string& id) const;

  std::size_t out_degree(SegIdx e) const;
  std::size_t in_degree(SegIdx e) const;
  bool is_adjacent(SegIdx e1, SegIdx e2) const;

  // Segments starting at the given vertex (successor candidates of any
  // segment ending there).
  std::span<const SegIdx> outgoing(VertexIdx v) const;
  std::span<const SegIdx> incoming(VertexIdx v) const;

  bool operator==(const RoadNetwork& other) const {
    return logical_equal(other);
  }

 private:
  void build_indices();
  bool logical_equal(const RoadNetwork& other) const;

  std::vector<Vertex> vertices_;
  std::vector<Segment> segments_;
  std::unordered_map<std::string, VertexIdx> vertex_by_id_;
  std::unordered_map<std::string, SegIdx> segment_by_id_;
  std::vector<std::vector<SegIdx>> out_by_vertex_;
  std::vector<std::vector<SegIdx>> in_by_vertex_;
};

}  // namespace oasd

#endif  // OASD_ROADNET_HPP
