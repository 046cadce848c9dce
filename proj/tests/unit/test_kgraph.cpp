#include <doctest.h>

#include <json.hpp>

#include "clinkg/kgraph.hpp"

using namespace clinkg;

namespace {

std::vector<Relation> sample_relations() {
  return {{"armd", EntityCategory::Treatment, "areds vitamins", "AREDS vitamins", 0.7, 10},
          {"armd", EntityCategory::Factor, "smoking", "Smoking", 0.5, 12},
          {"glaucoma", EntityCategory::CoexistsWith, "vision loss", "vision loss", 0.3, 10},
          {"glaucoma", EntityCategory::Treatment, "areds vitamins", "areds vitamins", 0.2, 11}};
}

}  // namespace

TEST_SUITE("kgraph") {
  TEST_CASE("nodes and edges are ordered and shared entities appear once") {
    const auto kg = build_graph(sample_relations(), {"cataract"});
    const auto nodes = kg.nodes();
    REQUIRE(nodes.size() == 6);
    CHECK(nodes[0] == GraphNode{"armd", NodeKind::Disease});
    CHECK(nodes[2] == GraphNode{"glaucoma", NodeKind::Disease});
    CHECK(nodes[3] == GraphNode{"AREDS vitamins", NodeKind::Entity});
    CHECK(kg.edges().size() == 4);
    CHECK(kg.edges()[0].category == EntityCategory::Treatment);
    CHECK(kg.edges()[1].entity == "smoking");
    CHECK(kg.entity_label("areds vitamins") == "AREDS vitamins");
    CHECK_THROWS_AS(kg.entity_label("nothing"), std::out_of_range);
  }

  TEST_CASE("conflicting categories are rejected, duplicates collapse") {
    auto rels = sample_relations();
    rels.push_back({"armd", EntityCategory::CoexistsWith, "smoking", "smoking", 0.9, 10});
    CHECK_THROWS_AS(build_graph(rels), std::invalid_argument);
    rels.back().category = EntityCategory::Factor;
    const auto kg = build_graph(rels);
    CHECK(kg.edges().size() == 4);
    CHECK(kg.edges()[1].avg_score == 0.9);
  }

  TEST_CASE("json export round trips and is byte-stable") {
    const auto kg = build_graph(sample_relations(), {"cataract"});
    const auto text = export_graph(kg, ExportFormat::Json);
    CHECK(text == export_graph(build_graph(sample_relations(), {"cataract"}), ExportFormat::Json));
    const auto back = import_graph_json(text);
    CHECK(back == kg);
    CHECK(export_graph(back, ExportFormat::Json) == text);
    const auto doc = nlohmann::json::parse(text);
    CHECK(doc.at("schema_version") == 1);
    CHECK(doc.at("edges")[0].at("from") == "armd");
    CHECK(doc.at("edges")[0].at("to") == "AREDS vitamins");
  }

  TEST_CASE("json import validates the schema") {
    CHECK_THROWS_AS(import_graph_json("{"), std::invalid_argument);
    CHECK_THROWS_AS(import_graph_json(R"({"schema_version":2,"nodes":[],"edges":[]})"), std::invalid_argument);
    CHECK_THROWS_AS(import_graph_json(
                        R"({"schema_version":1,"nodes":[{"kind":"disease","label":"armd"}],
                            "edges":[{"from":"armd","to":"x","category":"Treatment","avg_score":0.5,"count":10}]})"),
                    std::invalid_argument);
  }

  TEST_CASE("csv export") {
    const auto csv = export_graph(build_graph(sample_relations()), ExportFormat::Csv);
    CHECK(csv.starts_with("disease,category,entity,avg_score,count\n"));
    CHECK(csv.find("armd,Factor,Smoking,0.5,12\n") != std::string::npos);
  }

  TEST_CASE("csv quotes fields with commas") {
    const auto kg = build_graph({{"armd", EntityCategory::Treatment, "diet fish", "diet, fish", 0.5, 10}});
    CHECK(export_graph(kg, ExportFormat::Csv).find("\"diet, fish\"") != std::string::npos);
  }

  TEST_CASE("dot export") {
    const auto dot = export_graph(build_graph(sample_relations()), ExportFormat::Dot);
    CHECK(dot.starts_with("digraph knowledge_graph {"));
    CHECK(dot.find("\"disease:armd\" -> \"entity:Smoking\"") != std::string::npos);
    CHECK(dot.find("label=\"Factor\"") != std::string::npos);
  }

  TEST_CASE("formats by name and extension") {
    CHECK(parse_export_format("DOT") == ExportFormat::Dot);
    CHECK_FALSE(parse_export_format("xml").has_value());
    CHECK(format_for_extension("out/kg.csv") == ExportFormat::Csv);
    CHECK(format_for_extension("kg.gv") == ExportFormat::Dot);
    CHECK(format_for_extension("kg") == ExportFormat::Json);
  }

  TEST_CASE("graph relations reproduce the input") {
    const auto kg = build_graph(sample_relations());
    const auto rels = kg.relations();
    REQUIRE(rels.size() == 4);
    CHECK(rels[0].surface == "AREDS vitamins");
    CHECK(rels[3].disease == "glaucoma");
  }
}
