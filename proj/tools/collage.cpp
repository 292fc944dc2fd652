// Command-line entry point: collage maps|generate|criteria|learn|render|serve|toy

#include <csignal>
#include <iostream>

#include "CLI11.hpp"

#include "collage/collage.hpp"
#include "toy_images.hpp"

using namespace collage;

namespace {

Canvas parse_canvas(const std::string& s, int scale) {
  Canvas c;
  c.render_scale = scale;
  const auto x = s.find('x');
  try {
    if (x == std::string::npos) {
      c.width = c.height = std::stoi(s);
    } else {
      c.width = std::stoi(s.substr(0, x));
      c.height = std::stoi(s.substr(x + 1));
    }
  } catch (const std::exception&) {
    throw ValidationError("invalid canvas '" + s + "' (expected N or WxH)");
  }
  if (c.width < 1 || c.height < 1 || c.render_scale < 1) throw ValidationError("invalid canvas '" + s + "'");
  return c;
}

CollageConfiguration read_config_file(const std::string& path) {
  try {
    return parse_config_document(json::parse(read_text_file(path)));
  } catch (const json::exception& e) {
    throw LoadError(path + ": " + e.what());
  }
}

void print(const json& j) { std::cout << j.dump(2) << '\n'; }

Service* g_service = nullptr;
void on_signal(int) {
  if (g_service) g_service->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Photo collage generation, preference collection and weight learning"};
  app.require_subcommand(1);

  std::string workspace = Workspace::default_root().string();
  std::string manifest, weights, basic, out, canvas_arg = "400", config_path;
  std::uint64_t seed = 1;
  int iters = 50, grid = 50, scale = 4, threads = 1, restarts = 1;
  app.add_option("--workspace", workspace, "Workspace root (default: $COLLAGE_WORKSPACE or ./collage-workspace)");

  auto add_manifest = [&](CLI::App* c) { c->add_option("--manifest", manifest, "Dataset manifest JSON")->required(); };
  auto add_search = [&](CLI::App* c) {
    c->add_option("--seed", seed, "Random seed");
    c->add_option("--iters", iters, "Maximum sweeps");
    c->add_option("--grid", grid, "Placement grid step in pixels");
    c->add_option("--canvas", canvas_arg, "Canvas side N or WxH");
    c->add_option("--scale", scale, "Render magnification");
    c->add_option("--threads", threads, "Worker threads for candidate evaluation");
    c->add_option("--restarts", restarts, "Independent random starts (best kept)");
  };

  auto* maps_cmd = app.add_subcommand("maps", "Compute or load importance maps into the workspace");
  add_manifest(maps_cmd);

  auto* gen_cmd = app.add_subcommand("generate", "Optimize a collage layout");
  add_manifest(gen_cmd);
  add_search(gen_cmd);
  auto* basic_opt = gen_cmd->add_option("--basic", basic, "Basic fitness on one map")
                        ->check(CLI::IsMember({"saliency", "harmony", "quality"}));
  gen_cmd->add_option("--weights", weights, "Weights JSON file or workspace weights id")->excludes(basic_opt);
  gen_cmd->add_option("--out", out, "Also write the rendered PNG here");

  auto* crit_cmd = app.add_subcommand("criteria", "Evaluate the ten criteria of a configuration");
  add_manifest(crit_cmd);
  crit_cmd->add_option("--config", config_path, "Configuration JSON")->required();
  crit_cmd->add_option("--weights", weights, "Weights JSON file (default: basic saliency)");

  auto* render_cmd = app.add_subcommand("render", "Render a configuration to PNG");
  add_manifest(render_cmd);
  render_cmd->add_option("--config", config_path, "Configuration JSON")->required();
  render_cmd->add_option("--out", out, "Output PNG")->required();
  render_cmd->add_option("--scale", scale, "Render magnification (default: the configuration's)");

  auto* learn_cmd = app.add_subcommand("learn", "Learn weights from the preference log");
  std::string prefs;
  std::vector<std::string> rounds;
  double eta = 1.0, bound = 10.0;
  int learn_restarts = 8;
  learn_cmd->add_option("--prefs", prefs, "Preference log JSONL (default: the workspace log)");
  learn_cmd->add_option("--round", rounds, "Restrict to these rounds");
  learn_cmd->add_option("--seed", seed, "Random seed");
  learn_cmd->add_option("--eta", eta, "Ratio-penalty weight");
  learn_cmd->add_option("--bound", bound, "Lambda magnitude bound");
  learn_cmd->add_option("--restarts", learn_restarts, "Random restarts");
  learn_cmd->add_option("--out", out, "Also write the weights JSON here");

  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
  std::vector<std::string> manifests;
  std::string host = "127.0.0.1";
  int port = 8080, workers = 1, queue = 8;
  serve_cmd->add_option("--manifest", manifests, "Dataset manifests to expose")->required();
  serve_cmd->add_option("--host", host);
  serve_cmd->add_option("--port", port);
  serve_cmd->add_option("--workers", workers, "Generation workers");
  serve_cmd->add_option("--queue", queue, "Job queue capacity");
  add_search(serve_cmd);

  auto* toy_cmd = app.add_subcommand("toy", "Write the procedural toy dataset");
  int toy_n = 14;
  std::string toy_name = "toy";
  toy_cmd->add_option("--out", out, "Output directory")->required();
  toy_cmd->add_option("-n,--count", toy_n, "Number of images");
  toy_cmd->add_option("--seed", seed, "Random seed");
  toy_cmd->add_option("--name", toy_name, "Dataset name");

  CLI11_PARSE(app, argc, argv);

  auto search_spec = [&] {
    SearchSpec s = SearchSpec::standard(parse_canvas(canvas_arg, scale), grid);
    s.max_iterations = iters;
    s.seed = seed;
    s.threads = threads;
    s.restarts = restarts;
    return s;
  };

  try {
    if (*toy_cmd) {
      print(versioned({{"manifest", toy::write_toy_dataset(out, toy_n, seed, toy_name).string()}}));
      return 0;
    }
    Workspace ws(workspace);
    if (*maps_cmd) {
      const auto r = cmd_maps(ws, manifest);
      print(versioned({{"dataset", r.dataset_id}, {"maps", r.map_ids}, {"computed", r.computed},
                       {"loaded", r.loaded}, {"reused", r.reused}}));
    } else if (*gen_cmd) {
      GenerateOptions o;
      o.spec = search_spec();
      if (!basic.empty()) o.basic = map_kind_from_string(basic);
      else if (weights.empty()) throw ValidationError("generate needs --basic or --weights");
      else if (std::filesystem::exists(weights)) o.weights_file = weights;
      else o.weights_id = weights;
      const auto r = cmd_generate(ws, manifest, o);
      if (!out.empty()) std::filesystem::copy_file(ws.path_of(r.render_id), out,
                                                    std::filesystem::copy_options::overwrite_existing);
      print(versioned({{"config_id", r.config_id}, {"config", json(r.config)}, {"render", ws.path_of(r.render_id).string()},
                       {"trace", ws.path_of(r.trace_id).string()}, {"fitness", r.fitness}, {"criteria", r.criteria},
                       {"weights", json(r.weights)}, {"cached", r.cached}}));
    } else if (*crit_cmd) {
      const WeightSet w = weights.empty() ? WeightSet::basic(MapKind::saliency) : load_weights_file(weights);
      const auto r = cmd_criteria(ws, manifest, read_config_file(config_path), w);
      print(versioned({{"criteria", r.criteria}, {"fitness", r.fitness}, {"weights", json(w)}}));
    } else if (*render_cmd) {
      auto cfg = read_config_file(config_path);
      if (render_cmd->count("--scale")) cfg.canvas.render_scale = scale;
      const auto img = cmd_render(manifest, cfg);
      write_image(img, out);
      print(versioned({{"out", out}, {"width", img.width}, {"height", img.height}}));
    } else if (*learn_cmd) {
      std::vector<PreferenceRecord> recs;
      if (!prefs.empty()) {
        std::istringstream in(read_text_file(prefs));
        std::string line;
        while (std::getline(in, line))
          if (!line.empty()) recs.push_back(parse_preference_line(json::parse(line)));
        if (!rounds.empty())
          std::erase_if(recs, [&](const PreferenceRecord& r) {
            return std::find(rounds.begin(), rounds.end(), r.round) == rounds.end();
          });
      } else {
        recs = select_records(ws, rounds);
      }
      LearnSpec spec;
      spec.seed = seed;
      spec.eta = eta;
      spec.lambda_bound = bound;
      spec.restarts = learn_restarts;
      const auto r = cmd_learn(ws, recs, spec);
      const json doc = weights_document(r.document);
      if (!out.empty()) std::ofstream(out) << doc.dump(2) << '\n';
      json body = doc;
      body["weights_id"] = r.weights_id;
      body["evaluations"] = r.result.evaluations;
      print(body);
    } else if (*serve_cmd) {
      ServiceOptions opt;
      for (const auto& m : manifests) opt.manifests.emplace_back(m);
      opt.spec = search_spec();
      opt.workers = workers;
      opt.queue_capacity = std::size_t(queue);
      Service svc(ws, opt);
      g_service = &svc;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cerr << "listening on http://" << host << ":" << port << '\n';
      svc.listen(host, port);
      g_service = nullptr;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
