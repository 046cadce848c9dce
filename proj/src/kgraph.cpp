#include "clinkg/kgraph.hpp"

#include <json.hpp>

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "clinkg/postprocess.hpp"
#include "clinkg/text.hpp"

namespace clinkg {

using nlohmann::json;

std::string_view to_string(NodeKind kind) { return kind == NodeKind::Disease ? "disease" : "entity"; }

std::vector<GraphNode> KnowledgeGraph::nodes() const {
  std::vector<GraphNode> out;
  for (const auto& d : diseases_) out.push_back({d, NodeKind::Disease});
  std::vector<GraphNode> entities;
  for (const auto& [key, label] : entities_) entities.push_back({label, NodeKind::Entity});
  std::sort(entities.begin(), entities.end(), [](const auto& a, const auto& b) { return a.label < b.label; });
  out.insert(out.end(), entities.begin(), entities.end());
  return out;
}

const std::string& KnowledgeGraph::entity_label(const std::string& entity) const {
  auto it = std::lower_bound(entities_.begin(), entities_.end(), entity,
                             [](const auto& e, const std::string& key) { return e.first < key; });
  if (it == entities_.end() || it->first != entity) throw std::out_of_range("no entity node \"" + entity + "\"");
  return it->second;
}

std::vector<Relation> KnowledgeGraph::relations() const {
  std::vector<Relation> out;
  for (const auto& e : edges_) {
    out.push_back({e.disease, e.category, e.entity, entity_label(e.entity), e.avg_score, e.count});
  }
  return out;
}

KnowledgeGraph build_graph(const std::vector<Relation>& relations, const std::vector<std::string>& extra_diseases) {
  std::map<std::pair<std::string, std::string>, GraphEdge> edges;
  std::map<std::string, std::pair<double, std::string>> labels;  // entity -> (best score, surface)
  std::set<std::string> diseases(extra_diseases.begin(), extra_diseases.end());

  for (const auto& r : relations) {
    if (r.disease.empty()) throw std::invalid_argument("build_graph: relation without disease");
    const std::string surface = r.surface.empty() ? r.entity : r.surface;
    const auto entity = normalize(surface);
    if (!entity) throw std::invalid_argument("build_graph: entity \"" + surface + "\" normalizes to nothing");
    diseases.insert(r.disease);

    GraphEdge edge{r.disease, *entity, r.category, r.avg_score, r.count};
    auto [it, inserted] = edges.try_emplace({r.disease, *entity}, edge);
    if (!inserted) {
      if (it->second.category != r.category) {
        throw std::invalid_argument("build_graph: \"" + r.disease + "\" -> \"" + *entity +
                                    "\" has conflicting categories " + std::string(to_string(it->second.category)) +
                                    " and " + std::string(to_string(r.category)));
      }
      if (wins_argmax(Relation{r.disease, r.category, *entity, surface, r.avg_score, r.count},
                      Relation{r.disease, r.category, *entity, surface, it->second.avg_score, it->second.count})) {
        it->second = edge;
      }
    }

    auto [lit, fresh] = labels.try_emplace(*entity, r.avg_score, surface);
    if (!fresh && (r.avg_score > lit->second.first || (r.avg_score == lit->second.first && surface < lit->second.second))) {
      lit->second = {r.avg_score, surface};
    }
  }

  KnowledgeGraph kg;
  kg.diseases_.assign(diseases.begin(), diseases.end());
  for (auto& [entity, best] : labels) kg.entities_.emplace_back(entity, best.second);
  for (auto& [key, e] : edges) kg.edges_.push_back(e);
  std::sort(kg.edges_.begin(), kg.edges_.end(), [](const GraphEdge& a, const GraphEdge& b) {
    return std::tie(a.disease, a.category, a.entity) < std::tie(b.disease, b.category, b.entity);
  });
  return kg;
}

std::optional<ExportFormat> parse_export_format(std::string_view name) {
  const auto n = text::to_lower(text::trim(name));
  if (n == "json") return ExportFormat::Json;
  if (n == "dot" || n == "gv") return ExportFormat::Dot;
  if (n == "csv") return ExportFormat::Csv;
  return std::nullopt;
}

ExportFormat format_for_extension(std::string_view path) {
  const auto dot = path.rfind('.');
  if (dot != std::string_view::npos) {
    if (auto f = parse_export_format(path.substr(dot + 1))) return *f;
  }
  return ExportFormat::Json;
}

namespace {

std::string number(double v) { return json(v).dump(); }

std::string dot_quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string to_json_text(const KnowledgeGraph& kg) {
  json nodes = json::array();
  for (const auto& n : kg.nodes()) nodes.push_back({{"kind", to_string(n.kind)}, {"label", n.label}});
  json edges = json::array();
  for (const auto& e : kg.edges()) {
    edges.push_back({{"from", e.disease},
                     {"to", kg.entity_label(e.entity)},
                     {"category", to_string(e.category)},
                     {"avg_score", e.avg_score},
                     {"count", e.count}});
  }
  json doc = {{"schema_version", 1}, {"nodes", nodes}, {"edges", edges}};
  return doc.dump(2) + "\n";
}

std::string to_dot(const KnowledgeGraph& kg) {
  std::ostringstream out;
  out << "digraph knowledge_graph {\n";
  out << "  rankdir=LR;\n";
  for (const auto& n : kg.nodes()) {
    const bool disease = n.kind == NodeKind::Disease;
    out << "  " << dot_quote((disease ? "disease:" : "entity:") + n.label) << " [label=" << dot_quote(n.label)
        << ", kind=" << to_string(n.kind) << ", shape=" << (disease ? "box" : "ellipse") << "];\n";
  }
  for (const auto& e : kg.edges()) {
    out << "  " << dot_quote("disease:" + e.disease) << " -> " << dot_quote("entity:" + kg.entity_label(e.entity))
        << " [label=" << dot_quote(to_string(e.category)) << ", avg_score=" << dot_quote(number(e.avg_score))
        << ", count=" << e.count << "];\n";
  }
  out << "}\n";
  return out.str();
}

std::string to_csv(const KnowledgeGraph& kg) {
  std::vector<std::tuple<std::string, std::string, std::string, double, std::size_t>> rows;
  for (const auto& e : kg.edges()) {
    rows.emplace_back(e.disease, std::string(to_string(e.category)), kg.entity_label(e.entity), e.avg_score, e.count);
  }
  std::sort(rows.begin(), rows.end());
  std::string out = "disease,category,entity,avg_score,count\n";
  for (const auto& [d, c, e, avg, count] : rows) {
    out += csv_field(d) + "," + c + "," + csv_field(e) + "," + number(avg) + "," + std::to_string(count) + "\n";
  }
  return out;
}

}  // namespace

std::string export_graph(const KnowledgeGraph& kg, ExportFormat format) {
  switch (format) {
    case ExportFormat::Json: return to_json_text(kg);
    case ExportFormat::Dot: return to_dot(kg);
    case ExportFormat::Csv: return to_csv(kg);
  }
  throw std::invalid_argument("export_graph: unknown format");
}

KnowledgeGraph import_graph_json(std::string_view content) {
  json doc;
  try {
    doc = json::parse(content);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("graph json: ") + e.what());
  }
  if (!doc.is_object() || doc.value("schema_version", 0) != 1) {
    throw std::invalid_argument("graph json: expected schema_version 1");
  }
  try {
    std::vector<std::string> diseases;
    std::set<std::string> entity_labels;
    for (const auto& n : doc.at("nodes")) {
      const auto kind = n.at("kind").get<std::string>();
      const auto label = n.at("label").get<std::string>();
      if (kind == "disease") diseases.push_back(label);
      else if (kind == "entity") entity_labels.insert(label);
      else throw std::invalid_argument("graph json: unknown node kind \"" + kind + "\"");
    }
    const std::set<std::string> disease_set(diseases.begin(), diseases.end());
    std::vector<Relation> relations;
    for (const auto& e : doc.at("edges")) {
      Relation r;
      r.disease = e.at("from").get<std::string>();
      r.surface = e.at("to").get<std::string>();
      if (!disease_set.contains(r.disease)) throw std::invalid_argument("graph json: edge from unknown disease \"" + r.disease + "\"");
      if (!entity_labels.contains(r.surface)) throw std::invalid_argument("graph json: edge to unknown entity \"" + r.surface + "\"");
      const auto category = parse_category(e.at("category").get<std::string>());
      if (!category) throw std::invalid_argument("graph json: unknown category");
      r.category = *category;
      r.entity = normalize(r.surface).value_or("");
      r.avg_score = e.at("avg_score").get<double>();
      r.count = e.at("count").get<std::size_t>();
      relations.push_back(std::move(r));
    }
    KnowledgeGraph kg = build_graph(relations, diseases);
    // keep display labels exactly as exported, even for ties
    for (auto& [key, label] : kg.entities_) {
      for (const auto& e : doc.at("edges")) {
        const auto to = e.at("to").get<std::string>();
        if (normalize(to).value_or("") == key) {
          label = to;
          break;
        }
      }
    }
    return kg;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("graph json: ") + e.what());
  }
}

}  // namespace clinkg
