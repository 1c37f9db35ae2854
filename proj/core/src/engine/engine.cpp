#include "muit/engine/engine.hpp"

#include <algorithm>
#include <thread>

#include "muit/dsl/checker.hpp"
#include "muit/dsl/diagnostic.hpp"
#include "muit/dsl/evaluator.hpp"
#include "muit/dsl/parser.hpp"
#include "muit/util/xml.hpp"
#include "muit/wsdl/wsdl.hpp"
#include "../util/logger.hpp"

namespace muit::engine {

using nlohmann::json;
using instance::DeliveryAction;
using instance::HandlingInstance;
using instance::InstanceErrc;
using instance::InstanceError;
using instance::State;

namespace {

constexpr std::string_view kAnonymous = "http://www.w3.org/2005/08/addressing/anonymous";

bool valid_name(const std::string& s) {
  return !s.empty() && s.size() <= 64 &&
         std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'; });
}

std::string dump(const json& j) { return j.dump(-1, ' ', false, json::error_handler_t::replace); }

HttpResponse status_json(int status, json body) { return json_response(status, dump(body)); }

HttpResponse fault(int status, std::string_view code, std::string_view message, std::string_view relates_to = {}) {
  return soap_response(status, bridge::soap_fault(code, message, relates_to));
}

std::string engine_envelope(const std::string& cid, const std::string& body) {
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<soapenv:Envelope xmlns:soapenv=\"" +
                    std::string(bridge::kSoap11Ns) + "\" xmlns:wsa=\"" + std::string(bridge::kAddressingNs) +
                    "\" xmlns:muit=\"" + std::string(kEngineNs) + "\">";
  if (!cid.empty()) out += "<soapenv:Header><wsa:RelatesTo>" + xml::escape(cid) + "</wsa:RelatesTo></soapenv:Header>";
  return out + "<soapenv:Body>" + body + "</soapenv:Body></soapenv:Envelope>";
}

HttpResponse accepted_ack(const std::string& cid) {
  return soap_response(202, engine_envelope(cid, "<muit:accepted><muit:status>AwaitingUser</muit:status></muit:accepted>"));
}

HttpResponse pending_ack(const std::string& cid, const std::string& token) {
  auto r = soap_response(
      202, engine_envelope(cid, "<muit:pending><muit:resumeToken>" + token + "</muit:resumeToken></muit:pending>"));
  r.headers.emplace_back(std::string(kResumeHeader), token);
  return r;
}

HttpResponse html_page(int status, const std::string& title, const std::string& text) {
  HttpResponse r;
  r.status = status;
  r.content_type = "text/html; charset=utf-8";
  r.body = "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>" + xml::escape(title) +
           "</title></head><body><h1>" + xml::escape(title) + "</h1><p>" + xml::escape(text) + "</p></body></html>\n";
  return r;
}

std::string content_type_for(const std::string& path) {
  auto ends = [&](std::string_view ext) {
    return path.size() >= ext.size() && path.compare(path.size() - ext.size(), ext.size(), ext) == 0;
  };
  if (ends(".html")) return "text/html; charset=utf-8";
  if (ends(".js")) return "application/javascript; charset=utf-8";
  if (ends(".css")) return "text/css; charset=utf-8";
  if (ends(".json")) return "application/json";
  return "application/octet-stream";
}

std::string task_title(const HandlingInstance& i) {
  const auto& p = i.request.payload;
  if (p.contains("task_name") && p["task_name"].is_string()) return p["task_name"].get<std::string>();
  for (const auto& [k, v] : p.items())
    if (v.is_object() && v.contains("task_name") && v["task_name"].is_string()) return v["task_name"].get<std::string>();
  return i.request.operation;
}

// Inline JSON must not close the surrounding script element.
std::string script_json(const json& j) {
  std::string s = dump(j);
  std::string out;
  out.reserve(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (s[k] == '<' && k + 1 < s.size() && s[k + 1] == '/') {
      out += "<\\/";
      ++k;
    } else {
      out += s[k];
    }
  }
  return out;
}

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> parts;
  std::size_t pos = 0;
  while (pos <= path.size()) {
    auto next = path.find('/', pos);
    if (next == std::string_view::npos) next = path.size();
    if (next > pos) parts.emplace_back(path.substr(pos, next - pos));
    pos = next + 1;
  }
  return parts;
}

}  // namespace

Deployment make_deployment(const std::string& name, std::string_view muit_source, std::string_view wsdl_document,
                           const std::string& recipient) {
  if (!valid_name(name)) throw DeploymentError("invalid service name '" + name + "'");
  auto parsed = dsl::parse_source(muit_source, name);
  auto module = std::make_shared<dsl::DslModule>(std::move(parsed.module));
  auto diags = std::move(parsed.diagnostics);
  if (!dsl::has_errors(diags)) {
    auto more = dsl::check(*module);
    diags.insert(diags.end(), more.begin(), more.end());
  }
  if (dsl::has_errors(diags)) {
    std::string text;
    for (const auto& d : diags) text += dsl::format(d, name + ".muit") + "\n";
    throw DeploymentError(text);
  }
  Deployment d;
  d.name = name;
  try {
    d.bundle = codegen::compile(*module);
    d.schema = std::make_shared<bridge::ServiceSchema>(wsdl::parse_wsdl(wsdl_document));
  } catch (const std::exception& e) {
    throw DeploymentError(e.what());
  }
  d.module = std::move(module);
  d.recipient = recipient;
  return d;
}

json EngineCounters::to_json() const {
  return {{"soap_accepted", accepted},
          {"soap_rejected", rejected},
          {"callbacks_posted", callbacks_posted},
          {"callback_failures", callback_failures},
          {"parked_answered", parked_answered},
          {"results_accepted", results_accepted},
          {"results_rejected", results_rejected},
          {"notifications_sent", notifications_sent},
          {"notifications_undeliverable", notifications_undeliverable}};
}

Engine::Engine(EngineConfig config, std::shared_ptr<instance::InstanceStore> store, const instance::Clock& clock,
               std::shared_ptr<HttpClient> client, std::function<std::string()> id_generator)
    : config_(std::move(config)),
      store_(store ? std::move(store) : std::make_shared<instance::MemoryStore>()),
      clock_(clock),
      client_(std::move(client)),
      manager_(config_.instances, store_, clock_, std::move(id_generator)),
      deployments_(std::make_shared<const std::map<std::string, std::shared_ptr<const Deployment>>>()) {
  while (!config_.public_url.empty() && config_.public_url.back() == '/') config_.public_url.pop_back();
  manager_.set_delivery_sink([this](const DeliveryAction& a) { deliver(a); });
}

void Engine::set_executor(Executor executor) { executor_ = std::move(executor); }

void Engine::deploy(Deployment deployment) {
  if (!valid_name(deployment.name)) throw DeploymentError("invalid service name '" + deployment.name + "'");
  if (!deployment.schema) throw DeploymentError("deployment " + deployment.name + " has no schema");
  std::lock_guard lock(deploy_mu_);
  auto next = std::make_shared<std::map<std::string, std::shared_ptr<const Deployment>>>(*deployments_);
  auto name = deployment.name;
  (*next)[name] = std::make_shared<const Deployment>(std::move(deployment));
  deployments_ = std::move(next);
}

std::vector<std::string> Engine::deployments() const {
  std::lock_guard lock(deploy_mu_);
  std::vector<std::string> out;
  for (const auto& [name, d] : *deployments_) out.push_back(name);
  return out;
}

std::shared_ptr<const Deployment> Engine::deployment(const std::string& name) const {
  std::lock_guard lock(deploy_mu_);
  auto it = deployments_->find(name);
  return it == deployments_->end() ? nullptr : it->second;
}

std::size_t Engine::recover() {
  auto n = manager_.recover();
  std::lock_guard lock(park_mu_);
  for (const auto& id : manager_.ids()) {
    auto i = manager_.find(id);
    if (!i) continue;
    if (!i->resume_token.empty()) tokens_[i->resume_token] = id;
    if (!i->request.correlation_id.empty()) cids_[i->service + "\n" + i->request.correlation_id] = id;
  }
  return n;
}

Handled Engine::handle(const HttpRequest& req) {
  std::string_view target = req.target;
  auto q = target.find('?');
  auto raw_parts = split_path(target.substr(0, q));
  std::vector<std::string> parts;
  for (const auto& p : raw_parts) {
    auto decoded = percent_decode(p);
    if (!decoded) return {status_json(400, {{"error", "malformed path"}}), std::nullopt};
    parts.push_back(std::move(*decoded));
  }
  auto method_not_allowed = [] { return Handled{status_json(405, {{"error", "method not allowed"}}), std::nullopt}; };

  if (parts.size() == 2 && parts[0] == "svc") {
    if (req.method != "POST") return method_not_allowed();
    return handle_soap(parts[1], req.body, req.header(std::string(kResumeHeader)));
  }
  if (parts.size() == 3 && parts[0] == "task" && parts[2] == "ui") {
    if (req.method != "GET") return method_not_allowed();
    return {serve_task_ui(parts[1]), std::nullopt};
  }
  if (parts.size() == 3 && parts[0] == "task" && parts[2] == "result") {
    if (req.method != "POST") return method_not_allowed();
    return {submit_result(parts[1], req.body), std::nullopt};
  }
  if (parts.size() == 1 && parts[0] == "sync") {
    if (req.method != "POST") return method_not_allowed();
    return {sync(req.body), std::nullopt};
  }
  if (parts.size() == 1 && parts[0] == "metrics") {
    if (req.method != "GET") return method_not_allowed();
    return {metrics(), std::nullopt};
  }
  if (parts.size() >= 3 && parts[0] == "bundle") {
    if (req.method != "GET") return method_not_allowed();
    std::string path;
    for (std::size_t k = 2; k < parts.size(); ++k) path += (k > 2 ? "/" : "") + parts[k];
    return {bundle_asset(parts[1], path), std::nullopt};
  }
  return {status_json(404, {{"error", "not found"}}), std::nullopt};
}

Handled Engine::handle_soap(const std::string& service, std::string_view body, const std::string& resume_token) {
  auto d = deployment(service);
  if (!d) {
    ++rejected_;
    return {fault(404, "Client", "no service deployed at /svc/" + service), std::nullopt};
  }

  if (!resume_token.empty()) {
    std::lock_guard lock(park_mu_);
    auto it = tokens_.find(resume_token);
    if (it == tokens_.end()) return {fault(404, "Client", "unknown resume token"), std::nullopt};
    auto st = manager_.state(it->second);
    if (!mailbox_.count(resume_token) && st && instance::is_terminal(*st))
      return {fault(410, "Client", "instance already answered"), std::nullopt};
    return {pending_ack("", resume_token), resume_token};
  }

  bridge::TaskEnvelope request;
  try {
    auto env = bridge::parse_soap(body);
    request = bridge::soap_to_canonical(env, d->schema.get(), bridge::Direction::Request);
    bridge::validate(request.payload, *d->schema, request.operation, bridge::Direction::Request);
  } catch (const bridge::BridgeError& e) {
    ++rejected_;
    return {fault(500, "Client", e.what()), std::nullopt};
  }

  bool async = !request.reply_to.empty() && request.reply_to != kAnonymous;
  std::string key = service + "\n" + request.correlation_id;
  if (!request.correlation_id.empty()) {
    std::lock_guard lock(park_mu_);
    auto it = cids_.find(key);
    if (it != cids_.end()) {
      // A retried request: attach to the instance it created.
      auto existing = manager_.find(it->second);
      if (existing && existing->mode == instance::Mode::Sync)
        return {pending_ack(request.correlation_id, existing->resume_token), existing->resume_token};
      return {accepted_ack(request.correlation_id), std::nullopt};
    }
  }

  HandlingInstance inst;
  try {
    std::string callback = async ? request.reply_to : std::string();
    inst = manager_.create(request, async ? instance::Mode::Async : instance::Mode::Sync, callback, d->recipient,
                           std::nullopt, service);
  } catch (const InstanceError& e) {
    ++rejected_;
    if (e.code() == InstanceErrc::Backpressure)
      return {fault(503, "Server", "engine busy: pending queue at capacity", request.correlation_id), std::nullopt};
    return {fault(500, "Client", e.what(), request.correlation_id), std::nullopt};
  }
  ++accepted_;
  {
    std::lock_guard lock(park_mu_);
    if (!request.correlation_id.empty()) cids_[key] = inst.instance_id;
    if (!inst.resume_token.empty()) tokens_[inst.resume_token] = inst.instance_id;
  }
  notify(*d, inst);
  if (async) return {accepted_ack(request.correlation_id), std::nullopt};
  return {pending_ack(request.correlation_id, inst.resume_token), inst.resume_token};
}

void Engine::notify(const Deployment& d, const HandlingInstance& i) {
  Notification n{i.instance_id, d.recipient, task_title(i), config_.public_url + "/task/" + i.instance_id + "/ui"};
  std::shared_ptr<Notifier> notifier;
  std::string spec;
  {
    std::lock_guard lock(notify_mu_);
    auto route = config_.routes.find(d.recipient);
    if (route != config_.routes.end()) {
      spec = route->second;
      auto& cached = notifiers_[spec];
      if (!cached) cached = make_notifier(spec, client_);
      notifier = cached;
    }
  }
  auto record = [this](NotificationRecord r) {
    r.at_ms = clock_.now();
    if (r.delivered)
      ++notifications_sent_;
    else
      ++notifications_undeliverable_;
    std::lock_guard lock(notify_mu_);
    notifications_.push_back(std::move(r));
  };
  if (!notifier) {
    record({n, spec, false, 0, spec.empty() ? "no route for recipient" : "unknown notifier " + spec});
    return;
  }
  auto job = [n, notifier, record] {
    try {
      notifier->send(n);
      record({n, notifier->channel(), true, 0, {}});
    } catch (const std::exception& e) {
      record({n, notifier->channel(), false, 0, e.what()});
    }
  };
  if (executor_)
    executor_(job);
  else
    job();
}

HttpResponse Engine::serve_task_ui(const std::string& id) {
  auto st = manager_.state(id);
  if (!st) return html_page(404, "Task not found", "No task is known under this link.");
  if (instance::is_terminal(*st)) return html_page(410, "Task completed", "This task has already been handled.");
  auto i = manager_.find(id);
  if (!i) return html_page(404, "Task not found", "No task is known under this link.");
  auto d = deployment(i->service);
  if (!d) return html_page(404, "Task not found", "The service of this task is no longer deployed.");
  if (*st == State::AwaitingUser) {
    try {
      manager_.touch(id);
    } catch (const InstanceError&) {
    }
  }

  std::string screen = d->bundle.screens.count(i->request.operation) ? i->request.operation : d->bundle.entry;
  auto path = d->bundle.screens.find(screen);
  const auto* doc = path == d->bundle.screens.end() ? nullptr : d->bundle.asset(path->second);
  if (!doc) return html_page(500, "Task unavailable", "The task UI could not be found.");
  std::string html = doc->content;
  std::string result_url = "/task/" + id + "/result";
  json boot = {{"instance", id},
               {"operation", i->request.operation},
               {"cid", i->request.correlation_id},
               {"data", i->request.payload},
               {"result_url", result_url},
               {"sync_url", "/sync"},
               {"manifest", "/bundle/" + d->name + "/manifest.json"}};

  auto head = html.find("<head>");
  if (head != std::string::npos)
    html.insert(head + 6, "\n<base href=\"/bundle/" + d->name + "/screens/\">");
  auto body = html.find("<body");
  if (body != std::string::npos)
    html.insert(body + 5, " data-instance=\"" + id + "\" data-result-url=\"" + result_url + "\" data-cid=\"" +
                              xml::escape(i->request.correlation_id) + "\"");
  auto end = html.rfind("</body>");
  if (end != std::string::npos)
    html.insert(end, "<script type=\"application/json\" id=\"muit-bootstrap\">" + script_json(boot) + "</script>\n");

  HttpResponse r;
  r.content_type = "text/html; charset=utf-8";
  r.body = std::move(html);
  r.headers.emplace_back("Cache-Control", "no-store");
  return r;
}

bridge::TaskEnvelope Engine::build_response(const Deployment& d, const HandlingInstance& i, const json& data) const {
  const auto& op = i.request.operation;
  json merged = i.request.payload.is_object() ? i.request.payload : json::object();
  for (const auto& [k, v] : data.items()) merged[k] = v;

  const auto* in = d.schema->body_element(op, bridge::Direction::Request);
  const auto* out = d.schema->body_element(op, bridge::Direction::Response);
  std::vector<json> args;
  json ret;
  const dsl::OperationDecl* decl = d.module ? d.module->find_operation(op) : nullptr;
  if (decl) {
    if (in && !in->type_name.empty()) {
      args.push_back(merged);
    } else if (in) {
      for (const auto& f : d.schema->children(*in)) args.push_back(merged.value(f.name, json()));
    }
    args.resize(decl->params.size());
    dsl::Interpreter interp(*d.module);
    interp.set_step_limit(100'000);
    ret = interp.call_operation(op, args);
  }

  bridge::TaskEnvelope r;
  r.operation = op;
  r.correlation_id = i.request.correlation_id;
  r.direction = bridge::Direction::Response;
  if (!out) return r;
  const auto& fields = d.schema->children(*out);
  for (const auto& f : fields) {
    if (!ret.is_null() && !ret.is_object() && fields.size() == 1) {
      r.payload[f.name] = ret;
      continue;
    }
    const json* found = nullptr;
    if (ret.is_object() && ret.contains(f.name)) found = &ret[f.name];
    for (const auto& a : args)
      if (!found && a.is_object() && a.contains(f.name)) found = &a[f.name];
    if (!found && merged.contains(f.name)) found = &merged[f.name];
    if (found && !found->is_null()) r.payload[f.name] = *found;
  }
  return r;
}

HttpResponse Engine::submit_result(const std::string& id, std::string_view body) {
  auto r = apply_result(id, body);
  if (r.status == 200)
    ++results_accepted_;
  else
    ++results_rejected_;
  return r;
}

HttpResponse Engine::apply_result(const std::string& id, std::string_view body) {
  auto st = manager_.state(id);
  if (!st) return status_json(404, {{"status", "NotFound"}, {"instance", id}});
  if (instance::is_terminal(*st)) {
    try {
      manager_.complete(id, {});
    } catch (const InstanceError&) {
    }
    return status_json(200, {{"status", "AlreadyCompleted"}, {"instance", id}, {"state", to_string(*st)}});
  }
  auto i = manager_.find(id);
  if (!i) return status_json(404, {{"status", "NotFound"}, {"instance", id}});
  auto d = deployment(i->service);
  if (!d) return status_json(404, {{"status", "NotFound"}, {"instance", id}, {"error", "service not deployed"}});
  const auto& op = i->request.operation;

  json parsed = json::parse(body, nullptr, false);
  if (parsed.is_discarded())
    return status_json(400, {{"status", "Invalid"}, {"error", "MalformedJson"}, {"path", "$"}});
  json data;
  std::string root = "$";
  if (parsed.is_object() && parsed.contains("data") &&
      std::all_of(parsed.items().begin(), parsed.items().end(),
                  [](const auto& kv) { return kv.key() == "op" || kv.key() == "cid" || kv.key() == "data"; })) {
    if (parsed.contains("op") && parsed["op"] != op)
      return status_json(422, {{"status", "Invalid"}, {"error", "OperationMismatch"}, {"path", "$.op"}});
    data = parsed["data"];
    root = "$.data";
  } else {
    data = parsed;
  }
  const auto* in = d->schema->body_element(op, bridge::Direction::Request);
  if (data.is_array()) {
    // Positional operation arguments as posted by the page runtime.
    json obj = json::object();
    if (in && !in->type_name.empty()) {
      if (!data.empty()) obj = data[0];
    } else if (in) {
      const auto& fields = d->schema->children(*in);
      for (std::size_t k = 0; k < data.size() && k < fields.size(); ++k)
        if (!data[k].is_null()) obj[fields[k].name] = data[k];
    }
    data = obj;
  }
  if (!data.is_object())
    return status_json(422, {{"status", "Invalid"}, {"error", "SchemaViolation"}, {"path", root}});

  bridge::TaskEnvelope response;
  try {
    bridge::validate(data, *d->schema, op, bridge::Direction::Request, bridge::Completeness::Partial, root);
  } catch (const bridge::BridgeError& e) {
    return status_json(422, {{"status", "Invalid"},
                             {"error", std::string(bridge::to_string(e.code()))},
                             {"path", e.path()},
                             {"message", e.what()}});
  }
  try {
    response = build_response(*d, *i, data);
    bridge::canonical_to_soap(response, d->schema.get());
  } catch (const std::exception& e) {
    log::get().error("result of {} could not be turned into a response: {}", id, e.what());
    try {
      manager_.fail(id, std::string("result processing failed: ") + e.what());
    } catch (const InstanceError&) {
    }
    return status_json(500, {{"status", "Failed"}, {"instance", id}, {"error", e.what()}});
  }

  DeliveryAction a;
  try {
    a = manager_.complete(id, response);
  } catch (const InstanceError& e) {
    if (e.code() == InstanceErrc::NotFound) return status_json(404, {{"status", "NotFound"}, {"instance", id}});
    return status_json(422, {{"status", "Invalid"}, {"error", std::string(to_string(e.code()))}, {"message", e.what()}});
  }
  if (a.kind == DeliveryAction::Kind::AlreadyCompleted)
    return status_json(200, {{"status", "AlreadyCompleted"}, {"instance", id}, {"state", to_string(a.state)}});
  return status_json(200, {{"status", a.state == State::Completed ? "Completed" : "Failed"},
                           {"instance", id},
                           {"state", to_string(a.state)},
                           {"response", a.message.payload}});
}

HttpResponse Engine::sync(std::string_view body) {
  json batch = json::parse(body, nullptr, false);
  auto bad = [](const std::string& path, const std::string& msg) {
    return status_json(400, {{"error", msg}, {"path", path}});
  };
  if (batch.is_discarded() || !batch.is_object()) return bad("$", "malformed batch");
  if (!batch.contains("device") || !batch["device"].is_string() || batch["device"].get<std::string>().empty())
    return bad("$.device", "device id required");
  std::string device = batch["device"];
  if (device.find_first_of(" \n\r") != std::string::npos) return bad("$.device", "invalid device id");
  if (!batch.contains("items") || !batch["items"].is_array()) return bad("$.items", "items must be an array");
  const auto& items = batch["items"];
  std::optional<std::int64_t> prev;
  for (std::size_t k = 0; k < items.size(); ++k) {
    const auto& it = items[k];
    std::string path = "$.items[" + std::to_string(k) + "]";
    if (!it.is_object()) return bad(path, "item must be an object");
    if (!it.contains("instance") || !it["instance"].is_string()) return bad(path + ".instance", "instance id required");
    if (!it.contains("seq") || !it["seq"].is_number_integer()) return bad(path + ".seq", "integer seq required");
    if (!it.contains("result")) return bad(path + ".result", "result required");
    auto seq = it["seq"].get<std::int64_t>();
    if (prev && seq <= *prev) return bad(path + ".seq", "sequence numbers must increase");
    prev = seq;
  }

  std::lock_guard lock(sync_mu_);
  std::string key = "device/" + device;
  std::int64_t last = -1;
  if (auto rec = store_->get(key)) {
    auto j = json::parse(*rec, nullptr, false);
    if (j.is_object() && j.contains("last_seq")) last = j["last_seq"].get<std::int64_t>();
  }
  json acks = json::array();
  for (const auto& it : items) {
    auto seq = it["seq"].get<std::int64_t>();
    std::string id = it["instance"];
    json ack = {{"seq", seq}, {"instance", id}};
    if (seq <= last) {
      ack["status"] = "AlreadyApplied";
      acks.push_back(ack);
      continue;
    }
    auto r = submit_result(id, dump(it["result"]));
    json rj = json::parse(r.body, nullptr, false);
    ack["status"] = rj.is_object() && rj.contains("status") ? rj["status"] : json("Invalid");
    ack["http_status"] = r.status;
    if (rj.is_object() && rj.contains("path")) ack["path"] = rj["path"];
    acks.push_back(ack);
    last = seq;
    store_->put(key, dump({{"last_seq", last}}));
  }
  return status_json(200, {{"device", device}, {"acks", acks}});
}

HttpResponse Engine::metrics() const {
  json deployments = json::array();
  for (const auto& n : this->deployments()) deployments.push_back(n);
  std::size_t mailbox;
  std::size_t waiting;
  {
    std::lock_guard lock(park_mu_);
    mailbox = mailbox_.size();
    waiting = waiting_.size();
  }
  return status_json(200, {{"instances", manager_.metrics().to_json()},
                           {"engine", counters().to_json()},
                           {"parked_connections", waiting},
                           {"unclaimed_answers", mailbox},
                           {"deployments", deployments}});
}

HttpResponse Engine::bundle_asset(const std::string& service, const std::string& path) const {
  auto d = deployment(service);
  if (!d) return status_json(404, {{"error", "unknown service"}});
  for (const auto& seg : split_path(path))
    if (seg == ".." || seg == ".") return status_json(404, {{"error", "not found"}});
  HttpResponse r;
  if (path == "manifest.json") {
    r.content_type = content_type_for(path);
    r.body = d->bundle.manifest_text();
    return r;
  }
  const auto* a = d->bundle.asset(path);
  if (!a) return status_json(404, {{"error", "not found"}});
  r.content_type = content_type_for(path);
  r.body = a->content;
  r.headers.emplace_back("ETag", "\"" + a->sha256 + "\"");
  return r;
}

std::uint64_t Engine::park(const std::string& token, Waiter waiter) {
  std::optional<HttpResponse> ready;
  std::optional<Waiter> superseded;
  std::uint64_t ticket;
  {
    std::lock_guard lock(park_mu_);
    ticket = next_ticket_++;
    auto m = mailbox_.find(token);
    if (m != mailbox_.end()) {
      ready = std::move(m->second);
      mailbox_.erase(m);
    } else {
      auto w = waiting_.find(token);
      if (w != waiting_.end()) superseded = std::move(w->second.waiter);
      waiting_[token] = Parked{ticket, std::move(waiter)};
    }
  }
  if (superseded) (*superseded)(fault(409, "Client", "superseded by a newer connection for this token"));
  if (ready) {
    ++parked_answered_;
    waiter(std::move(*ready));
  }
  return ticket;
}

bool Engine::unpark(const std::string& token, std::uint64_t ticket) {
  std::lock_guard lock(park_mu_);
  auto w = waiting_.find(token);
  if (w == waiting_.end() || w->second.ticket != ticket) return false;
  waiting_.erase(w);
  return true;
}

void Engine::return_answer(const std::string& token, HttpResponse response) {
  std::lock_guard lock(park_mu_);
  mailbox_.emplace(token, std::move(response));
}

std::size_t Engine::parked() const {
  std::lock_guard lock(park_mu_);
  return waiting_.size();
}

void Engine::answer(const std::string& token, HttpResponse response) {
  std::optional<Waiter> waiter;
  {
    std::lock_guard lock(park_mu_);
    auto w = waiting_.find(token);
    if (w != waiting_.end()) {
      waiter = std::move(w->second.waiter);
      waiting_.erase(w);
    } else {
      mailbox_[token] = std::move(response);
      return;
    }
  }
  ++parked_answered_;
  (*waiter)(std::move(response));
}

void Engine::post_callback(const std::string& url, const std::string& soap) {
  for (int attempt = 1; attempt <= std::max(1, config_.callback_attempts); ++attempt) {
    try {
      if (!client_) throw std::runtime_error("no HTTP client configured");
      int status = client_->post(url, "text/xml; charset=utf-8", soap, {{"SOAPAction", "\"\""}});
      if (status >= 200 && status < 300) {
        ++callbacks_posted_;
        return;
      }
      log::get().warn("callback {} answered {} (attempt {})", url, status, attempt);
    } catch (const std::exception& e) {
      log::get().warn("callback {} failed: {} (attempt {})", url, e.what(), attempt);
    }
    if (attempt < config_.callback_attempts) std::this_thread::sleep_for(config_.retry_backoff * attempt);
  }
  ++callback_failures_;
}

void Engine::deliver(const DeliveryAction& a) {
  if (a.kind == DeliveryAction::Kind::AlreadyCompleted) return;
  std::string soap;
  int status = 200;
  if (a.fault) {
    soap = bridge::soap_fault("Server", a.fault_message, a.message.correlation_id);
    status = 500;
  } else {
    auto d = deployment(a.service);
    try {
      soap = bridge::serialize_soap(bridge::canonical_to_soap(a.message, d ? d->schema.get() : nullptr));
    } catch (const bridge::BridgeError& e) {
      soap = bridge::soap_fault("Server", e.what(), a.message.correlation_id);
      status = 500;
    }
  }
  if (a.kind == DeliveryAction::Kind::AnswerParked) {
    answer(a.address, soap_response(status, soap));
    return;
  }
  auto job = [this, url = a.address, soap = std::move(soap)] { post_callback(url, soap); };
  if (executor_)
    executor_(job);
  else
    job();
}

void Engine::tick() {
  manager_.passivate_idle();
  manager_.expire(clock_.now());
}

std::vector<NotificationRecord> Engine::notifications() const {
  std::lock_guard lock(notify_mu_);
  return notifications_;
}

EngineCounters Engine::counters() const {
  EngineCounters c;
  c.accepted = accepted_;
  c.rejected = rejected_;
  c.callbacks_posted = callbacks_posted_;
  c.callback_failures = callback_failures_;
  c.parked_answered = parked_answered_;
  c.results_accepted = results_accepted_;
  c.results_rejected = results_rejected_;
  c.notifications_sent = notifications_sent_;
  c.notifications_undeliverable = notifications_undeliverable_;
  return c;
}

}  // namespace muit::engine
