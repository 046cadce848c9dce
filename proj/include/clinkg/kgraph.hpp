#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "clinkg/extraction.hpp"

namespace clinkg {

enum class NodeKind { Disease, Entity };

std::string_view to_string(NodeKind kind);

struct GraphNode {
  std::string label;
  NodeKind kind = NodeKind::Entity;

  friend bool operator==(const GraphNode&, const GraphNode&) = default;
};

/// Directed edge disease -> entity.
struct GraphEdge {
  std::string disease;
  /// Normalized entity; the node's display label is entity_label(entity).
  std::string entity;
  EntityCategory category = EntityCategory::Treatment;
  double avg_score = 0.0;
  std::size_t count = 0;

  friend bool operator==(const GraphEdge&, const GraphEdge&) = default;
};

/// Disease and entity nodes joined by typed edges, at most one edge per
/// (disease, entity). Immutable once built.
class KnowledgeGraph {
 public:
  KnowledgeGraph() = default;

  /// Disease nodes first, then entity nodes, each sorted by label.
  std::vector<GraphNode> nodes() const;
  /// Sorted by (disease, category, entity).
  const std::vector<GraphEdge>& edges() const noexcept { return edges_; }
  /// Display label of a normalized entity; throws std::out_of_range if absent.
  const std::string& entity_label(const std::string& entity) const;
  /// The edges as relations, sorted by (disease, category, entity).
  std::vector<Relation> relations() const;

  bool empty() const noexcept { return edges_.empty() && diseases_.empty(); }

  friend bool operator==(const KnowledgeGraph&, const KnowledgeGraph&) = default;

 private:
  friend KnowledgeGraph build_graph(const std::vector<Relation>&, const std::vector<std::string>&);
  friend KnowledgeGraph import_graph_json(std::string_view);

  std::vector<std::string> diseases_;
  // (normalized entity, display label), sorted by entity
  std::vector<std::pair<std::string, std::string>> entities_;
  std::vector<GraphEdge> edges_;
};

/// One disease node per distinct disease (plus `extra_diseases`, which may
/// have no edges), one entity node per normalized entity labelled with its
/// highest-scoring surface form. A relation repeated with the same category
/// collapses to one edge; a (disease, entity) pair with two categories
/// throws std::invalid_argument.
KnowledgeGraph build_graph(const std::vector<Relation>& relations,
                           const std::vector<std::string>& extra_diseases = {});

enum class ExportFormat { Json, Dot, Csv };

std::optional<ExportFormat> parse_export_format(std::string_view name);
ExportFormat format_for_extension(std::string_view path);

/// json: {"schema_version":1,"nodes":[{"kind","label"}],"edges":[{"avg_score",
/// "category","count","from","to"}]} with sorted keys; dot: a digraph with
/// category edge labels; csv: disease,category,entity,avg_score,count rows.
/// Byte-stable for equal graphs.
std::string export_graph(const KnowledgeGraph& kg, ExportFormat format);

/// Inverse of export_graph(kg, Json). Throws std::invalid_argument on schema
/// violations.
KnowledgeGraph import_graph_json(std::string_view content);

}  // namespace clinkg
