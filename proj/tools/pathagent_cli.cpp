// pathagent: benchmark runner, session server and script utilities.
#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "pathagent/bench/scoring.hpp"
#include "pathagent/model/replay_adapter.hpp"
#include "pathagent/model/wire_adapter.hpp"
#include "pathagent/runner/runner.hpp"
#include "pathagent/script/interpreter.hpp"
#include "pathagent/script/value.hpp"
#include "pathagent/service/http_server.hpp"
#include "pathagent/tools/catalog.hpp"

namespace fs = std::filesystem;
using namespace pathagent;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::optional<std::set<tools::Category>> parse_categories(const std::vector<std::string>& names) {
  if (names.empty()) return std::nullopt;
  std::set<tools::Category> out;
  for (const auto& n : names) out.insert(tools::category_from_string(n));
  return out;
}

int cmd_run(const runner::RunConfig& config) {
  auto outcome = runner::run_benchmark(config);
  const auto& r = outcome.report;
  std::cout << "mode " << agent::to_string(config.mode) << ", " << r.trials << " trial(s), "
            << r.n_questions << " question(s)\n";
  for (const auto& c : r.categories) {
    std::printf("  %-11s n=%-3zu score %.3f +/- %.3f  failure %.3f +/- %.3f\n", c.category.c_str(), c.n_questions,
                c.score.mean, c.score.se, c.failure_rate.mean, c.failure_rate.se);
  }
  std::printf("  %-11s       score %.3f +/- %.3f  failure %.3f +/- %.3f\n", "overall", r.overall_score.mean,
              r.overall_score.se, r.overall_failure_rate.mean, r.overall_failure_rate.se);
  std::cout << "report: " << (config.output_dir / "report.json").string() << "\n";
  for (const auto& p : outcome.problems) std::cerr << "problem: " << p << "\n";
  return outcome.all_completed ? 0 : 2;
}

int cmd_exec(const fs::path& file, const fs::path& workdir, std::uint64_t max_ops, std::uint64_t seed) {
  script::InterpreterLimits limits;
  limits.max_operations = max_ops;
  limits.random_seed = seed;
  fs::create_directories(workdir);
  limits.working_dir = fs::absolute(workdir);
  script::ScriptSession session;
  auto result = session.run_source(read_file(file), limits);
  std::cout << result.stdout_text;
  if (result.final_answer) std::cout << "Final answer: " << script::repr(*result.final_answer) << "\n";
  std::cerr << "operations: " << result.operations_used << "\n";
  if (result.error) {
    std::cerr << result.error->render() << "\n";
    return 1;
  }
  return 0;
}

int cmd_evaluate(const fs::path& question, const fs::path& truth, const fs::path& answer) {
  auto spec = bench::load_question(question);
  auto truth_json = nlohmann::json::parse(read_file(truth));
  auto score = bench::evaluate_answer(answer, truth_json, spec);
  nlohmann::ordered_json j;
  j["question_id"] = score.question_id;
  j["score"] = score.score;
  j["failed"] = score.failed;
  j["produced_valid_file"] = score.produced_valid_file;
  j["fields"] = nlohmann::ordered_json::array();
  for (const auto& f : score.field_scores) {
    j["fields"].push_back({{"record", f.record}, {"field", f.field}, {"score", f.score}});
  }
  std::cout << j.dump(2) << "\n";
  return 0;
}

service::HttpServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pathology agent runner"};
  app.require_subcommand(1);

  // run
  runner::RunConfig rc;
  std::string mode = "with_tools", adapter = "wire";
  auto* run = app.add_subcommand("run", "run a question suite and score it");
  run->add_option("--suite", rc.suite, "directory of question files")->required()->check(CLI::ExistingDirectory);
  run->add_option("--dataset", rc.dataset_root, "dataset root")->required()->check(CLI::ExistingDirectory);
  run->add_option("--mode", mode, "llm_only | single_shot | iterative | with_tools")->capture_default_str();
  run->add_option("--adapter", adapter, "wire | replay:PATH")->capture_default_str();
  run->add_option("--trials", rc.trials)->capture_default_str();
  run->add_option("--parallel", rc.parallelism)->capture_default_str();
  run->add_option("--out", rc.output_dir, "output directory")->required();
  run->add_option("--seed", rc.seed)->capture_default_str();
  run->add_option("--max-steps", rc.max_steps)->capture_default_str();
  run->add_option("--time-budget", rc.time_budget_seconds, "seconds per question")->capture_default_str();

  // serve
  service::ServerOptions so;
  fs::path serve_root = "sessions_root", serve_dataset;
  std::string serve_adapter = "wire", serve_mode;
  auto* serve = app.add_subcommand("serve", "serve interactive sessions over HTTP");
  serve->add_option("--root", serve_root, "where session working directories live")->capture_default_str();
  serve->add_option("--dataset", serve_dataset, "dataset root with tool fixtures");
  serve->add_option("--host", so.host)->capture_default_str();
  serve->add_option("--port", so.port)->capture_default_str();
  serve->add_option("--adapter", serve_adapter, "wire | replay:FILE")->capture_default_str();
  serve->add_option("--mode", serve_mode, "default agent mode for new sessions");

  // exec
  fs::path exec_file, exec_dir = ".";
  std::uint64_t exec_ops = 10'000'000, exec_seed = 42;
  auto* exec = app.add_subcommand("exec", "run a script in the sandboxed interpreter");
  exec->add_option("file", exec_file)->required()->check(CLI::ExistingFile);
  exec->add_option("--workdir", exec_dir)->capture_default_str();
  exec->add_option("--max-ops", exec_ops)->capture_default_str();
  exec->add_option("--seed", exec_seed)->capture_default_str();

  // tools
  std::vector<std::string> categories;
  bool names_only = false;
  auto* tls = app.add_subcommand("tools", "print the tool catalog as the agent sees it");
  tls->add_option("--category", categories);
  tls->add_flag("--names", names_only);

  // evaluate
  fs::path ev_question, ev_truth, ev_answer;
  auto* ev = app.add_subcommand("evaluate", "score one answer file");
  ev->add_option("--question", ev_question)->required()->check(CLI::ExistingFile);
  ev->add_option("--truth", ev_truth)->required()->check(CLI::ExistingFile);
  ev->add_option("--answer", ev_answer)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      rc.mode = agent::mode_from_string(mode);
      rc.adapter = runner::parse_adapter(adapter);
      if (rc.adapter.kind == runner::AdapterSpec::Kind::wire) rc.model = model::ModelConfig::from_environment();
      return cmd_run(rc);
    }
    if (*serve) {
      if (const char* tok = std::getenv("PATHAGENT_SERVICE_TOKEN"); tok && *tok) so.bearer_token = tok;
      auto spec = runner::parse_adapter(serve_adapter);
      std::optional<tools::Registry> registry;
      if (!serve_dataset.empty()) registry = tools::default_registry(serve_dataset);
      service::ManagerOptions mo;
      mo.root = fs::absolute(serve_root);
      if (!serve_mode.empty()) mo.defaults.mode = agent::mode_from_string(serve_mode);
      model::ModelConfig mc;
      if (spec.kind == runner::AdapterSpec::Kind::wire) {
        mc = model::ModelConfig::from_environment();
        mc.validate();
      }
      service::AdapterFactory factory = [spec, mc, root = mo.root](const std::string& sid)
          -> std::unique_ptr<model::ModelAdapter> {
        if (spec.kind == runner::AdapterSpec::Kind::replay) {
          std::map<std::string, std::string> subs{{"working_dir", (root / "sessions" / sid).string()}};
          return std::make_unique<model::ReplayAdapter>(model::ReplayAdapter::from_file(spec.replay_path, subs));
        }
        return std::make_unique<model::WireAdapter>(mc, [](std::string_view line) { std::cerr << line << "\n"; });
      };
      service::SessionManager manager(mo, factory, registry ? &*registry : nullptr);
      service::HttpServer server(manager, so);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      int port = server.bind();
      std::cerr << "listening on " << so.host << ":" << port << "\n";
      server.listen();
      g_server = nullptr;
      return 0;
    }
    if (*exec) return cmd_exec(exec_file, exec_dir, exec_ops, exec_seed);
    if (*tls) {
      auto catalog = tools::load_catalog(tools::asset_dir() / "tool_catalog.json");
      auto reg = tools::build_registry(catalog, nullptr);
      auto cats = parse_categories(categories);
      if (names_only) {
        for (const auto& t : reg.tools()) {
          if (!cats || cats->count(t.descriptor.category)) {
            std::cout << t.descriptor.name << "\t" << tools::to_string(t.descriptor.category) << "\n";
          }
        }
      } else {
        std::cout << reg.render_tool_docs(cats);
      }
      return 0;
    }
    if (*ev) return cmd_evaluate(ev_question, ev_truth, ev_answer);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
