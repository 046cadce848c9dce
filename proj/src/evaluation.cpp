#include "clinkg/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <stdexcept>
#include <tuple>

#include "clinkg/errors.hpp"
#include "clinkg/postprocess.hpp"
#include "clinkg/text.hpp"

namespace clinkg {

using nlohmann::json;

std::vector<GoldAnnotation> parse_gold_json(std::string_view content, const std::string& source) {
  json doc;
  try {
    doc = json::parse(content);
  } catch (const json::exception& e) {
    throw InputError(source, 0, e.what());
  }
  if (!doc.is_array()) throw InputError(source, 0, "expected a JSON list of annotations");
  std::vector<GoldAnnotation> out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& item = doc[i];
    const std::string where = "annotation " + std::to_string(i) + ": ";
    try {
      GoldAnnotation g;
      g.disease = item.at("disease").get<std::string>();
      const auto category = parse_category(item.at("category").get<std::string>());
      if (!category) throw InputError(source, 0, where + "unknown category");
      g.category = *category;
      g.values = item.at("values").get<std::vector<std::string>>();
      if (g.values.empty()) throw InputError(source, 0, where + "values must be non-empty");
      out.push_back(std::move(g));
    } catch (const json::exception& e) {
      throw InputError(source, 0, where + e.what());
    }
  }
  return out;
}

std::vector<GoldAnnotation> load_gold(const std::string& path) { return parse_gold_json(text::read_file(path), path); }

std::vector<std::pair<std::string, std::string>> match_entities(const std::vector<std::string>& predicted,
                                                                const std::vector<std::string>& gold,
                                                                const SimilarityProvider& sim, double threshold) {
  const std::set<std::string> preds(predicted.begin(), predicted.end());
  const std::set<std::string> golds(gold.begin(), gold.end());

  std::vector<std::pair<std::string, std::string>> out;
  std::set<std::string> used_pred;
  std::set<std::string> used_gold;
  for (const auto& p : preds) {
    if (golds.contains(p)) {
      out.emplace_back(p, p);
      used_pred.insert(p);
      used_gold.insert(p);
    }
  }

  std::map<std::string, EmbeddingVector> vectors;
  auto vec = [&](const std::string& s) -> const EmbeddingVector& {
    auto it = vectors.find(s);
    if (it == vectors.end()) it = vectors.emplace(s, sim.embed(s)).first;
    return it->second;
  };
  std::vector<std::tuple<double, std::string, std::string>> pairs;
  for (const auto& p : preds) {
    if (used_pred.contains(p) || text::trim(p).empty()) continue;
    for (const auto& g : golds) {
      if (used_gold.contains(g) || text::trim(g).empty()) continue;
      const auto& u = vec(p);
      const auto& v = vec(g);
      if (u.is_zero() || v.is_zero()) continue;
      const double s = cosine(u, v);
      if (s > threshold) pairs.emplace_back(s, p, g);
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) {
    if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
    return std::tie(std::get<1>(a), std::get<2>(a)) < std::tie(std::get<1>(b), std::get<2>(b));
  });
  for (const auto& [s, p, g] : pairs) {
    if (used_pred.contains(p) || used_gold.contains(g)) continue;
    out.emplace_back(p, g);
    used_pred.insert(p);
    used_gold.insert(g);
  }
  return out;
}

namespace {

void finish(CategoryMetrics& m) {
  m.matched = m.matches.size();
  if (m.predicted == 0) {
    m.empty_prediction = m.gold > 0;
    m.precision = m.gold == 0 ? 1.0 : 0.0;
  } else {
    m.precision = static_cast<double>(m.matched) / static_cast<double>(m.predicted);
  }
  m.recall = m.gold == 0 ? 1.0 : static_cast<double>(m.matched) / static_cast<double>(m.gold);
}

}  // namespace

MetricsReport precision_recall(const KnowledgeGraph& kg, const std::vector<GoldAnnotation>& gold,
                               const SimilarityProvider& sim, double match_threshold) {
  using Key = std::pair<std::string, EntityCategory>;
  std::map<Key, std::set<std::string>> gold_sets;
  std::set<std::string> gold_diseases;
  for (const auto& g : gold) {
    gold_diseases.insert(g.disease);
    auto& set = gold_sets[{g.disease, g.category}];
    for (const auto& v : g.values) {
      if (auto n = normalize(v)) set.insert(*n);
    }
  }
  std::map<Key, std::set<std::string>> pred_sets;
  std::set<std::string> uncovered;
  for (const auto& e : kg.edges()) {
    if (!gold_diseases.contains(e.disease)) {
      uncovered.insert(e.disease);
      continue;
    }
    pred_sets[{e.disease, e.category}].insert(e.entity);
  }

  MetricsReport report;
  report.uncovered_diseases.assign(uncovered.begin(), uncovered.end());
  std::map<EntityCategory, CategoryMetrics> pooled;
  for (auto c : kCategories) pooled[c].category = c;

  for (const auto& disease : gold_diseases) {
    for (auto c : kCategories) {
      const auto& preds = pred_sets[{disease, c}];
      const auto& golds = gold_sets[{disease, c}];
      CategoryMetrics m;
      m.disease = disease;
      m.category = c;
      m.predicted = preds.size();
      m.gold = golds.size();
      m.matches = match_entities({preds.begin(), preds.end()}, {golds.begin(), golds.end()}, sim, match_threshold);
      finish(m);

      auto& p = pooled[c];
      p.predicted += m.predicted;
      p.gold += m.gold;
      p.matches.insert(p.matches.end(), m.matches.begin(), m.matches.end());
      report.rows.push_back(std::move(m));
    }
  }
  for (auto c : kCategories) {
    auto& p = pooled[c];
    p.disease = "*";
    finish(p);
    report.overall.push_back(std::move(p));
  }
  return report;
}

SafetyReport safety_metrics(const std::vector<QueryRecord>& records) {
  if (records.empty()) throw std::invalid_argument("safety_metrics: no query records");
  std::map<std::string, BackendSafety> by_backend;
  for (const auto& r : records) {
    auto& s = by_backend[r.backend];
    s.backend = r.backend;
    ++s.total_queries;
    switch (r.parsed.outcome) {
      case ParseOutcome::Answers: ++s.answers; break;
      case ParseOutcome::DontKnow:
        ++s.dont_know;
        if (s.dont_know_examples.size() < SafetyReport::kMaxExamples) s.dont_know_examples.push_back(r.raw_response);
        break;
      case ParseOutcome::Unstructured:
        ++s.unstructured;
        if (s.unstructured_examples.size() < SafetyReport::kMaxExamples) {
          s.unstructured_examples.push_back(r.raw_response);
        }
        break;
    }
  }
  SafetyReport report;
  for (auto& [name, s] : by_backend) {
    const auto total = static_cast<double>(s.total_queries);
    s.unstructured_rate = static_cast<double>(s.unstructured) / total;
    s.dontknow_rate = static_cast<double>(s.dont_know) / total;
    report.backends.push_back(std::move(s));
  }
  return report;
}

namespace {

json metrics_json(const CategoryMetrics& m) {
  json matches = json::array();
  for (const auto& [p, g] : m.matches) matches.push_back({{"predicted", p}, {"gold", g}});
  return {{"disease", m.disease},     {"category", to_string(m.category)},
          {"predicted", m.predicted}, {"gold", m.gold},
          {"matched", m.matched},     {"precision", m.precision},
          {"recall", m.recall},       {"empty_prediction", m.empty_prediction},
          {"matches", matches}};
}

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string cell(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out += "\\|";
    else if (c == '\n') out += ' ';
    else out.push_back(c);
  }
  return out;
}

}  // namespace

json to_json(const MetricsReport& report) {
  json rows = json::array();
  for (const auto& m : report.rows) rows.push_back(metrics_json(m));
  json overall = json::array();
  for (const auto& m : report.overall) overall.push_back(metrics_json(m));
  return {{"schema_version", 1}, {"rows", rows}, {"overall", overall}, {"uncovered_diseases", report.uncovered_diseases}};
}

json to_json(const SafetyReport& report) {
  json backends = json::array();
  for (const auto& s : report.backends) {
    backends.push_back({{"backend", s.backend},
                        {"total_queries", s.total_queries},
                        {"answers", s.answers},
                        {"dont_know", s.dont_know},
                        {"unstructured", s.unstructured},
                        {"unstructured_rate", s.unstructured_rate},
                        {"dontknow_rate", s.dontknow_rate},
                        {"unstructured_examples", s.unstructured_examples},
                        {"dont_know_examples", s.dont_know_examples}});
  }
  return {{"schema_version", 1}, {"backends", backends}};
}

std::string to_markdown(const MetricsReport& report) {
  std::string out = "| Disease | Category | Predicted | Gold | Matched | Precision | Recall |\n";
  out += "|---|---|---:|---:|---:|---:|---:|\n";
  auto row = [&](const CategoryMetrics& m, std::string_view disease) {
    out += "| " + cell(disease) + " | " + std::string(to_string(m.category)) + " | " + std::to_string(m.predicted) +
           " | " + std::to_string(m.gold) + " | " + std::to_string(m.matched) + " | " + fixed3(m.precision) +
           (m.empty_prediction ? " (no predictions)" : "") + " | " + fixed3(m.recall) + " |\n";
  };
  for (const auto& m : report.rows) row(m, m.disease);
  for (const auto& m : report.overall) row(m, "all");
  if (!report.uncovered_diseases.empty()) {
    out += "\nNot covered by the gold file:";
    for (const auto& d : report.uncovered_diseases) out += " " + d + ";";
    out.back() = '\n';
  }
  return out;
}

std::string to_markdown(const SafetyReport& report) {
  std::string out = "| Backend | Queries | Answers | Don't know | Unstructured | Don't-know rate | Unstructured rate |\n";
  out += "|---|---:|---:|---:|---:|---:|---:|\n";
  for (const auto& s : report.backends) {
    out += "| " + cell(s.backend) + " | " + std::to_string(s.total_queries) + " | " + std::to_string(s.answers) +
           " | " + std::to_string(s.dont_know) + " | " + std::to_string(s.unstructured) + " | " +
           fixed3(s.dontknow_rate) + " | " + fixed3(s.unstructured_rate) + " |\n";
  }
  return out;
}

}  // namespace clinkg
