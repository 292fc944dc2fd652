#pragma once

// HTTP/JSON service for ranking rounds, preference collection, learning and
// generation. Generation runs on a bounded job queue whose status is polled.
//
//   GET  /api/datasets
//   POST /api/rounds                    {dataset, n_candidates?, weights_id?, seed?}      -> 202 job
//   GET  /api/rounds/{id}
//   POST /api/rounds/{id}/preferences   {subject, ranking: [ids]} | {subject, pair: [winner, loser]}
//   POST /api/rounds/{id}/close
//   GET  /api/renders/{id}.png
//   POST /api/learn                     {rounds: [ids], seed?}
//   POST /api/generate                  {dataset, weights_id, n_candidates?, compare_with?, seed?} -> 202 job
//   GET  /api/jobs/{id}

#include <condition_variable>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "httplib.h"

#include "collage/commands.hpp"

namespace collage {

struct Job {
  std::string id;
  std::string kind;
  std::string status = "queued";  // queued | running | done | failed
  json result;
  std::string error;
};

/// Fixed worker pool over a bounded FIFO queue.
class JobQueue {
 public:
  JobQueue(std::size_t capacity, int workers) : capacity_(capacity) {
    for (int i = 0; i < std::max(1, workers); ++i)
      threads_.emplace_back([this](std::stop_token st) { run(st); });
  }
  ~JobQueue() { stop(); }

  /// Returns the job id, or nothing when the queue is full.
  std::optional<std::string> submit(std::string kind, std::function<json()> fn) {
    std::lock_guard lock(mu_);
    if (stopped_ || pending_.size() >= capacity_) return std::nullopt;
    const std::string id = "job-" + std::to_string(++counter_);
    jobs_[id] = Job{id, std::move(kind)};
    pending_.push_back({id, std::move(fn)});
    cv_.notify_one();
    return id;
  }

  std::optional<Job> status(const std::string& id) const {
    std::lock_guard lock(mu_);
    const auto it = jobs_.find(id);
    if (it == jobs_.end()) return std::nullopt;
    return it->second;
  }

  /// Blocks until the job finishes; used by tests and the CLI.
  Job wait(const std::string& id) {
    std::unique_lock lock(mu_);
    done_cv_.wait(lock, [&] {
      const auto& s = jobs_.at(id).status;
      return s == "done" || s == "failed";
    });
    return jobs_.at(id);
  }

  void stop() {
    {
      std::lock_guard lock(mu_);
      stopped_ = true;
    }
    for (auto& t : threads_) t.request_stop();
    cv_.notify_all();
    threads_.clear();
  }

 private:
  void run(std::stop_token st) {
    while (true) {
      std::pair<std::string, std::function<json()>> task;
      {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [&] { return st.stop_requested() || !pending_.empty(); });
        if (st.stop_requested()) return;
        task = std::move(pending_.front());
        pending_.pop_front();
        jobs_[task.first].status = "running";
      }
      json result;
      std::string error;
      try {
        result = task.second();
      } catch (const std::exception& e) {
        error = e.what();
      }
      {
        std::lock_guard lock(mu_);
        auto& j = jobs_[task.first];
        j.status = error.empty() ? "done" : "failed";
        j.result = std::move(result);
        j.error = std::move(error);
      }
      done_cv_.notify_all();
    }
  }

  std::size_t capacity_;
  mutable std::mutex mu_;
  std::condition_variable cv_, done_cv_;
  std::deque<std::pair<std::string, std::function<json()>>> pending_;
  std::map<std::string, Job> jobs_;
  long counter_ = 0;
  bool stopped_ = false;
  std::vector<std::jthread> threads_;
};

struct ServiceOptions {
  std::vector<std::filesystem::path> manifests;
  SearchSpec spec = SearchSpec::standard();
  MapProviderConfig maps;
  LearnSpec learn;
  std::size_t queue_capacity = 8;
  int workers = 1;
};

/// Status code plus JSON body.
struct Reply {
  int status = 200;
  json body;
};

class Service {
 public:
  Service(Workspace& ws, ServiceOptions opt)
      : ws_(&ws), opt_(std::move(opt)), jobs_(opt_.queue_capacity, opt_.workers) {
    for (const auto& p : opt_.manifests) {
      const auto m = read_manifest(p);
      datasets_[m.name] = {detail::canonical_manifest_path(p), m.images.size()};
    }
    routes();
  }
  ~Service() {
    server_.stop();
    jobs_.stop();
  }

  httplib::Server& server() { return server_; }
  JobQueue& jobs() { return jobs_; }

  /// Binds to an ephemeral port on host and serves in a background thread.
  int start_background(const std::string& host = "127.0.0.1") {
    const int port = server_.bind_to_any_port(host);
    if (port < 0) throw Error("cannot bind " + host);
    thread_ = std::jthread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    return port;
  }

  void listen(const std::string& host, int port) {
    if (!server_.listen(host, port)) throw Error("cannot listen on " + host + ":" + std::to_string(port));
  }

  void stop() { server_.stop(); }

  // --- handlers (callable without a socket) --------------------------------

  Reply list_datasets() const {
    json arr = json::array();
    for (const auto& [name, d] : datasets_) arr.push_back({{"name", name}, {"manifest", d.manifest}, {"images", d.images}});
    return {200, versioned({{"datasets", arr}})};
  }

  Reply open_round(const json& body) {
    const auto ds = dataset_of(body);
    if (!ds) return error(404, "unknown dataset");
    const int n = body.value("n_candidates", 3);
    if (n < 2 || n > 8) return error(422, "n_candidates must be in 2..8");
    const std::string weights_id = body.value("weights_id", std::string{});
    if (!weights_id.empty() && !is_kind(weights_id, "weights")) return error(404, "unknown weights id");
    const std::uint64_t seed = body.value("seed", opt_.spec.seed);
    const std::string manifest = *ds;
    auto job = jobs_.submit("round", [this, manifest, n, weights_id, seed] {
      std::vector<std::string> ids;
      for (int k = 0; k < n; ++k) {
        GenerateOptions o;
        o.spec = opt_.spec;
        o.spec.seed = seed + std::uint64_t(k);
        o.maps = opt_.maps;
        // Without learned weights, candidates cycle through the basic fitness
        // on each map.
        if (weights_id.empty()) o.basic = kBaseMapKinds[k % 3];
        else o.weights_id = weights_id;
        ids.push_back(cmd_generate(*ws_, manifest, o).config_id);
      }
      const auto r = ws_->open_round(manifest, ids, weights_id);
      return json{{"round", r.id}, {"candidates", ids}};
    });
    if (!job) return error(503, "job queue full");
    return {202, versioned({{"job", *job}})};
  }

  Reply get_round(const std::string& id) const {
    const auto r = ws_->find_round(id);
    if (!r) return error(404, "unknown round");
    json cands = json::array();
    for (const auto& c : r->candidates) {
      const auto a = ws_->get(c);
      cands.push_back({{"id", c},
                       {"render", "/api/renders/" + a.meta.value("render", std::string{}) + ".png"},
                       {"fitness", a.meta.value("fitness", 0.0)},
                       {"basic", a.meta.value("basic", std::string{})},
                       {"weights_id", a.meta.value("weights_id", std::string{})}});
    }
    const auto recs = select_records(*ws_, {id});
    std::set<std::string> subjects;
    for (const auto& rec : recs) subjects.insert(rec.subject);
    const auto tally = tally_records(recs, r->candidates);
    return {200, versioned({{"id", r->id},
                            {"dataset", r->dataset},
                            {"weights_id", r->weights_id},
                            {"open", r->open},
                            {"candidates", cands},
                            {"subjects", subjects.size()},
                            {"tally", tally.counts},
                            {"scores", f1_score(tally)}})};
  }

  Reply submit_preference(const std::string& round_id, const json& body) {
    std::lock_guard lock(pref_mu_);
    const auto r = ws_->find_round(round_id);
    if (!r) return error(404, "unknown round");
    if (!r->open) return error(409, "round is closed");
    PreferenceRecord rec;
    rec.dataset = r->dataset;
    rec.round = r->id;
    rec.candidates = r->candidates;
    rec.timestamp = unix_millis();
    try {
      rec.subject = detail::get_field<std::string>(body, "subject");
      if (body.contains("pair")) {
        const auto p = detail::get_field<std::vector<std::string>>(body, "pair");
        if (p.size() != 2) return error(422, "pair must be [winner, loser]");
        rec.pair = std::pair{p[0], p[1]};
      } else {
        rec.ranking = detail::get_field<std::vector<std::string>>(body, "ranking");
      }
      rec.validate();
    } catch (const ValidationError& e) {
      return error(422, e.what());
    }
    std::vector<std::pair<std::string, std::string>> edges;
    for (const auto& prev : select_records(*ws_, {round_id})) {
      if (prev.subject != rec.subject) continue;
      if (!prev.is_pairwise() || !rec.is_pairwise()) return error(422, "subject already submitted for this round");
      if (*prev.pair == *rec.pair) return error(422, "duplicate pairwise choice");
      edges.push_back(*prev.pair);
    }
    if (rec.pair) {
      edges.push_back(*rec.pair);
      if (has_cycle(edges)) return error(422, "circular preferences for subject " + rec.subject);
    }
    ws_->append_preference(rec);
    return {201, versioned({{"accepted", true}, {"round", round_id}})};
  }

  Reply close_round(const std::string& id) {
    std::lock_guard lock(pref_mu_);
    if (!ws_->find_round(id)) return error(404, "unknown round");
    ws_->close_round(id);
    return {200, versioned({{"round", id}, {"open", false}})};
  }

  Reply learn(const json& body) {
    std::vector<std::string> rounds;
    try {
      rounds = detail::get_field<std::vector<std::string>>(body, "rounds");
    } catch (const ValidationError& e) {
      return error(422, e.what());
    }
    if (rounds.empty()) return error(422, "no rounds selected");
    for (const auto& r : rounds)
      if (!ws_->find_round(r)) return error(404, "unknown round " + r);
    LearnSpec spec = opt_.learn;
    spec.seed = body.value("seed", spec.seed);
    const auto recs = select_records(*ws_, rounds);
    try {
      const auto out = cmd_learn(*ws_, recs, spec, opt_.maps);
      return {200, versioned({{"weights_id", out.weights_id},
                              {"objective", out.result.breakdown.objective},
                              {"tau_sum", out.result.breakdown.tau_sum},
                              {"penalty", out.result.breakdown.penalty},
                              {"rounds", out.rounds},
                              {"signs", weights_document(out.document)["signs"]}})};
    } catch (const ValidationError& e) {
      return error(422, e.what());
    }
  }

  Reply generate(const json& body) {
    const auto ds = dataset_of(body);
    if (!ds) return error(404, "unknown dataset");
    const std::string weights_id = body.value("weights_id", std::string{});
    if (!is_kind(weights_id, "weights")) return error(404, "unknown weights id");
    const int n = body.value("n_candidates", 1);
    if (n < 1 || n > 8) return error(422, "n_candidates must be in 1..8");
    const auto compare = body.value("compare_with", std::vector<std::string>{});
    for (const auto& c : compare)
      if (!is_kind(c, "configs")) return error(404, "unknown candidate " + c);
    const std::uint64_t seed = body.value("seed", opt_.spec.seed);
    const std::string manifest = *ds;
    auto job = jobs_.submit("generate", [this, manifest, weights_id, n, compare, seed] {
      std::vector<std::string> ids;
      for (int k = 0; k < n; ++k) {
        GenerateOptions o;
        o.spec = opt_.spec;
        o.spec.seed = seed + std::uint64_t(k);
        o.maps = opt_.maps;
        o.weights_id = weights_id;
        ids.push_back(cmd_generate(*ws_, manifest, o).config_id);
      }
      json out = {{"configs", ids}};
      std::vector<std::string> all = ids;
      for (const auto& c : compare)
        if (std::find(all.begin(), all.end(), c) == all.end()) all.push_back(c);
      if (all.size() >= 2) out["round"] = ws_->open_round(manifest, all, weights_id).id;
      return out;
    });
    if (!job) return error(503, "job queue full");
    return {202, versioned({{"job", *job}})};
  }

  Reply job_status(const std::string& id) const {
    const auto j = jobs_.status(id);
    if (!j) return error(404, "unknown job");
    json body = {{"id", j->id}, {"kind", j->kind}, {"status", j->status}};
    if (j->status == "done") body["result"] = j->result;
    if (j->status == "failed") body["error"] = j->error;
    return {200, versioned(body)};
  }

 private:
  struct DatasetInfo {
    std::string manifest;
    std::size_t images = 0;
  };

  static Reply error(int status, const std::string& reason) { return {status, versioned({{"error", reason}})}; }

  std::optional<std::string> dataset_of(const json& body) const {
    if (!body.is_object() || !body.contains("dataset") || !body["dataset"].is_string()) return std::nullopt;
    const auto it = datasets_.find(body["dataset"].get<std::string>());
    if (it == datasets_.end()) return std::nullopt;
    return it->second.manifest;
  }

  bool is_kind(const std::string& id, const std::string& kind) const {
    const auto a = ws_->find(id);
    return a && a->kind == kind;
  }

  static void send(httplib::Response& res, const Reply& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json; charset=utf-8");
  }

  template <class F>
  static void with_body(const httplib::Request& req, httplib::Response& res, F&& f) {
    json body;
    try {
      body = req.body.empty() ? json::object() : json::parse(req.body);
    } catch (const json::exception&) {
      send(res, error(400, "invalid JSON body"));
      return;
    }
    if (!body.is_object()) {
      send(res, error(400, "body must be a JSON object"));
      return;
    }
    send(res, f(body));
  }

  void routes() {
    server_.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
      std::string what = "internal error";
      int status = 500;
      try {
        std::rethrow_exception(ep);
      } catch (const ValidationError& e) {
        what = e.what();
        status = 422;
      } catch (const std::exception& e) {
        what = e.what();
      }
      send(res, error(status, what));
    });
    server_.Get("/api/datasets", [this](const httplib::Request&, httplib::Response& res) { send(res, list_datasets()); });
    server_.Post("/api/rounds", [this](const httplib::Request& req, httplib::Response& res) {
      with_body(req, res, [&](const json& b) { return open_round(b); });
    });
    server_.Get(R"(/api/rounds/([A-Za-z0-9_-]+))", [this](const httplib::Request& req, httplib::Response& res) {
      send(res, get_round(req.matches[1]));
    });
    server_.Post(R"(/api/rounds/([A-Za-z0-9_-]+)/preferences)",
                 [this](const httplib::Request& req, httplib::Response& res) {
                   with_body(req, res, [&](const json& b) { return submit_preference(req.matches[1], b); });
                 });
    server_.Post(R"(/api/rounds/([A-Za-z0-9_-]+)/close)", [this](const httplib::Request& req, httplib::Response& res) {
      send(res, close_round(req.matches[1]));
    });
    server_.Get(R"(/api/renders/([A-Za-z0-9_-]+)\.png)", [this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.matches[1];
      if (!is_kind(id, "renders")) {
        send(res, error(404, "unknown render"));
        return;
      }
      res.set_content(read_text_file(ws_->path_of(id)), "image/png");
    });
    server_.Post("/api/learn", [this](const httplib::Request& req, httplib::Response& res) {
      with_body(req, res, [&](const json& b) { return learn(b); });
    });
    server_.Post("/api/generate", [this](const httplib::Request& req, httplib::Response& res) {
      with_body(req, res, [&](const json& b) { return generate(b); });
    });
    server_.Get(R"(/api/jobs/([A-Za-z0-9_-]+))", [this](const httplib::Request& req, httplib::Response& res) {
      send(res, job_status(req.matches[1]));
    });
  }

  Workspace* ws_;
  ServiceOptions opt_;
  std::map<std::string, DatasetInfo> datasets_;
  std::mutex pref_mu_;
  JobQueue jobs_;
  httplib::Server server_;
  std::jthread thread_;
};

}  // namespace collage
