// clinkg: build a disease knowledge graph from clinical notes.
//
// Exit codes: 0 ok, 2 invalid configuration or arguments, 3 stage failure,
// 4 backend retries exhausted.

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "clinkg/config.hpp"
#include "clinkg/errors.hpp"
#include "clinkg/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitStage = 3;
constexpr int kExitBackend = 4;

struct Options {
  std::string config;
  clinkg::StageRequest req;
  std::string style;
  std::string format;
};

void report(const clinkg::StageManifest& m) {
  std::cerr << m.stage << ": " << clinkg::to_string(m.status);
  for (const auto& [k, v] : m.counts) std::cerr << ' ' << k << '=' << v;
  std::cerr << '\n';
  for (const auto& f : m.failures) std::cerr << "  failed: " << f.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Build a disease knowledge graph from clinical notes with language-model backends"};
  app.require_subcommand(1);
  Options opt;

  using Stage = clinkg::StageManifest (*)(const clinkg::Runtime&, const clinkg::StageRequest&);
  struct Command {
    const char* name;
    const char* help;
    Stage run;
  };
  const std::vector<Command> commands = {
      {"ingest", "Read notes (JSONL or CSV) and write them as JSONL", clinkg::run_ingest},
      {"preprocess", "Drop short notes and near duplicates", clinkg::run_preprocess},
      {"identify", "Select the notes relevant to each disease", clinkg::run_identify},
      {"extract", "Query the model backend for every note and question", clinkg::run_extract},
      {"postprocess", "Aggregate, filter and group answers into relations", clinkg::run_postprocess},
      {"build-kg", "Assemble relations into a graph and export it", clinkg::run_build_kg},
      {"eval", "Score a graph against gold annotations", clinkg::run_eval},
      {"pipeline", "Run every stage, writing artifacts into a directory", clinkg::run_pipeline},
  };

  std::vector<std::pair<CLI::App*, Stage>> subs;
  for (const auto& c : commands) {
    auto* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--config", opt.config, "Pipeline config (JSON)");
    sub->add_option("--in", opt.req.in, "Input artifact")->required();
    sub->add_option("--out", opt.req.out, "Output artifact (directory for pipeline)")->required();
    sub->add_option("--disease", opt.req.diseases, "Disease to cover; repeatable, overrides the config");
    sub->add_option("--style", opt.style, "Prompt style")->check(CLI::IsMember({"zero", "few", "instruct", "guided"}));
    sub->add_option("--backend", opt.req.backend, "Backend name from the config");
    sub->add_flag("--resume", opt.req.resume, "Keep completed queries from an earlier run");
    sub->add_option("--format", opt.format, "Graph export format")->check(CLI::IsMember({"json", "dot", "csv"}));
    sub->add_option("--gold", opt.req.gold, "Gold annotations (JSON)");
    sub->add_option("--records", opt.req.records, "Query records for safety metrics");
    subs.emplace_back(sub, c.run);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    clinkg::PipelineConfig config;
    if (!opt.config.empty()) config = clinkg::load_config(opt.config);
    if (!opt.style.empty()) {
      config.prompt_style = *clinkg::parse_prompt_style(opt.style);
      clinkg::validate(config);
    }
    if (!opt.format.empty()) opt.req.format = clinkg::parse_export_format(opt.format);

    clinkg::Runtime runtime(std::move(config));
    for (const auto& [sub, run] : subs) {
      if (!sub->parsed()) continue;
      const auto manifest = run(runtime, opt.req);
      report(manifest);
      return manifest.status == clinkg::StageManifest::Status::Ok ? kExitOk : kExitBackend;
    }
  } catch (const clinkg::ValidationError& e) {
    std::cerr << "invalid configuration: " << e.what() << '\n';
    return kExitValidation;
  } catch (const clinkg::BackendError& e) {
    std::cerr << "backend failure: " << e.what() << '\n';
    return kExitBackend;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitStage;
  }
  return kExitStage;
}
