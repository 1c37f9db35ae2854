#include "muit/instance/manager.hpp"

#include <openssl/rand.h>

#include <algorithm>
#include <chrono>

#include "../util/logger.hpp"

namespace muit::instance {

using nlohmann::json;

namespace {

constexpr int kRecordVersion = 1;

constexpr std::string_view kStateNames[] = {"Created",        "AwaitingUser", "PassivatedAsync", "PassivatedSync",
                                            "Restoring",      "Completed",    "Failed",          "TimedOut"};

}  // namespace

std::string_view to_string(Mode mode) { return mode == Mode::Sync ? "sync" : "async"; }

std::string_view to_string(State state) { return kStateNames[static_cast<int>(state)]; }

std::optional<Mode> mode_from_string(std::string_view s) {
  if (s == "sync") return Mode::Sync;
  if (s == "async") return Mode::Async;
  return std::nullopt;
}

std::optional<State> state_from_string(std::string_view s) {
  for (int i = 0; i < 8; ++i)
    if (kStateNames[i] == s) return static_cast<State>(i);
  return std::nullopt;
}

bool transition_allowed(State from, State to) {
  switch (from) {
    case State::Created:
      return to == State::AwaitingUser;
    case State::AwaitingUser:
      return to == State::PassivatedAsync || to == State::PassivatedSync || to == State::Completed ||
             to == State::Failed || to == State::TimedOut;
    case State::PassivatedAsync:
    case State::PassivatedSync:
      return to == State::Restoring;
    case State::Restoring:
      return to == State::Completed || to == State::Failed;
    default:
      return false;
  }
}

bool is_terminal(State s) { return s == State::Completed || s == State::Failed || s == State::TimedOut; }

bool is_passivated(State s) { return s == State::PassivatedAsync || s == State::PassivatedSync; }

Millis SystemClock::now() const {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

std::string random_id() {
  unsigned char bytes[16];
  if (RAND_bytes(bytes, sizeof bytes) != 1) throw std::runtime_error("RAND_bytes failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(32);
  for (unsigned char b : bytes) {
    out += hex[b >> 4];
    out += hex[b & 15];
  }
  return out;
}

std::string_view to_string(InstanceErrc code) {
  switch (code) {
    case InstanceErrc::NotFound: return "NotFound";
    case InstanceErrc::Backpressure: return "Backpressure";
    case InstanceErrc::StateViolation: return "StateViolation";
    case InstanceErrc::NotIdle: return "NotIdle";
    case InstanceErrc::OperationMismatch: return "OperationMismatch";
    case InstanceErrc::InvalidRequest: return "InvalidRequest";
  }
  return "?";
}

std::string_view to_string(DeliveryAction::Kind kind) {
  switch (kind) {
    case DeliveryAction::Kind::PostCallback: return "PostCallback";
    case DeliveryAction::Kind::AnswerParked: return "AnswerParked";
    case DeliveryAction::Kind::AlreadyCompleted: return "AlreadyCompleted";
  }
  return "?";
}

namespace {

json optional_ms(const std::optional<Millis>& v) { return v ? json(*v) : json(nullptr); }

std::optional<Millis> read_ms(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<Millis>();
}

}  // namespace

std::string encode_record(const HandlingInstance& i) {
  json history = json::array();
  for (State s : i.history) history.push_back(std::string(to_string(s)));
  json j = {
      {"v", kRecordVersion},
      {"instance_id", i.instance_id},
      {"mode", std::string(to_string(i.mode))},
      {"state", std::string(to_string(i.state))},
      {"request",
       {{"op", i.request.operation},
        {"cid", i.request.correlation_id},
        {"data", i.request.payload},
        {"reply_to", i.request.reply_to}}},
      {"callback_address", i.callback_address},
      {"assigned_user", i.assigned_user},
      {"service", i.service},
      {"resume_token", i.resume_token},
      {"timestamps",
       {{"created_at", i.created_at},
        {"last_activity", i.last_activity},
        {"passivated_at", optional_ms(i.passivated_at)},
        {"completed_at", optional_ms(i.completed_at)},
        {"deadline", optional_ms(i.deadline)}}},
      {"history", history},
  };
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

HandlingInstance decode_record(std::string_view record) {
  json j;
  try {
    j = json::parse(record);
  } catch (const json::exception& e) {
    throw InstanceError(InstanceErrc::InvalidRequest, std::string("corrupt instance record: ") + e.what());
  }
  try {
    if (j.at("v").get<int>() != kRecordVersion)
      throw InstanceError(InstanceErrc::InvalidRequest, "unsupported record version");
    HandlingInstance i;
    i.instance_id = j.at("instance_id").get<std::string>();
    auto mode = mode_from_string(j.at("mode").get<std::string>());
    auto state = state_from_string(j.at("state").get<std::string>());
    if (!mode || !state) throw InstanceError(InstanceErrc::InvalidRequest, "corrupt instance record: bad enum");
    i.mode = *mode;
    i.state = *state;
    const auto& r = j.at("request");
    i.request.operation = r.at("op").get<std::string>();
    i.request.correlation_id = r.at("cid").get<std::string>();
    i.request.payload = r.at("data");
    i.request.reply_to = r.value("reply_to", "");
    i.request.direction = bridge::Direction::Request;
    i.callback_address = j.at("callback_address").get<std::string>();
    i.assigned_user = j.at("assigned_user").get<std::string>();
    i.service = j.value("service", "");
    i.resume_token = j.value("resume_token", "");
    const auto& t = j.at("timestamps");
    i.created_at = t.at("created_at").get<Millis>();
    i.last_activity = t.at("last_activity").get<Millis>();
    i.passivated_at = read_ms(t, "passivated_at");
    i.completed_at = read_ms(t, "completed_at");
    i.deadline = read_ms(t, "deadline");
    for (const auto& h : j.at("history")) {
      auto s = state_from_string(h.get<std::string>());
      if (!s) throw InstanceError(InstanceErrc::InvalidRequest, "corrupt instance record: bad history");
      i.history.push_back(*s);
    }
    return i;
  } catch (const json::exception& e) {
    throw InstanceError(InstanceErrc::InvalidRequest, std::string("corrupt instance record: ") + e.what());
  }
}

bool PendingQueue::push(const std::string& id, bool force) {
  std::lock_guard lock(mu_);
  if (index_.count(id)) return false;
  if (!force && order_.size() >= capacity_) return false;
  order_.push_back(id);
  index_[id] = std::prev(order_.end());
  return true;
}

bool PendingQueue::remove(const std::string& id) {
  std::lock_guard lock(mu_);
  auto it = index_.find(id);
  if (it == index_.end()) return false;
  order_.erase(it->second);
  index_.erase(it);
  return true;
}

bool PendingQueue::contains(const std::string& id) const {
  std::lock_guard lock(mu_);
  return index_.count(id) > 0;
}

std::size_t PendingQueue::size() const {
  std::lock_guard lock(mu_);
  return order_.size();
}

std::vector<std::string> PendingQueue::snapshot() const {
  std::lock_guard lock(mu_);
  return {order_.begin(), order_.end()};
}

json Metrics::to_json() const {
  return {{"live_instances", live},
          {"passivated_instances", passivated},
          {"queue_depth", queue_depth},
          {"created", created},
          {"completed", completed},
          {"failed", failed},
          {"timed_out", timed_out},
          {"restored", restored},
          {"responses_delivered", responses_delivered},
          {"faults_delivered", faults_delivered},
          {"already_completed", already_completed},
          {"backpressure_rejections", backpressure},
          {"art_ms", art_ms},
          {"art_samples", art_samples}};
}

InstanceManager::InstanceManager(ManagerConfig config, std::shared_ptr<InstanceStore> store, const Clock& clock,
                                 std::function<std::string()> id_generator)
    : config_(config),
      store_(std::move(store)),
      clock_(clock),
      id_generator_(std::move(id_generator)),
      queue_(config.queue_capacity) {
  if (!store_) store_ = std::make_shared<MemoryStore>();
}

std::shared_ptr<InstanceManager::Slot> InstanceManager::slot(const std::string& id) const {
  std::shared_lock lock(index_mu_);
  auto it = slots_.find(id);
  return it == slots_.end() ? nullptr : it->second;
}

void InstanceManager::transition(Slot& s, const std::string& id, State to) {
  if (!transition_allowed(s.state, to))
    throw InstanceError(InstanceErrc::StateViolation, "illegal transition " + std::string(to_string(s.state)) +
                                                          " -> " + std::string(to_string(to)) + " for " + id);
  log::get().info("instance={} from={} to={} mode={} op={}", id, to_string(s.state), to_string(to),
                  to_string(s.mode), s.operation);
  s.state = to;
  s.history.push_back(to);
  if (s.live) {
    s.live->state = to;
    s.live->history = s.history;
  }
}

void InstanceManager::persist(const HandlingInstance& instance) { store_->put(instance.instance_id, encode_record(instance)); }

std::size_t InstanceManager::recover() {
  std::size_t n = 0;
  for (const auto& [key, record] : store_->load_all()) {
    if (key.find('/') != std::string::npos) continue;  // other record kinds share the store
    HandlingInstance i;
    try {
      i = decode_record(record);
    } catch (const InstanceError& e) {
      log::get().error("skipping store record {}: {}", key, e.what());
      continue;
    }
    auto s = std::make_shared<Slot>();
    s->state = i.state;
    s->mode = i.mode;
    s->operation = i.request.operation;
    s->deadline = i.deadline;
    s->history = i.history;
    if (i.state == State::AwaitingUser) {
      queue_.push(i.instance_id, true);
      s->live = std::move(i);
      ++live_;
    } else if (is_passivated(i.state)) {
      ++passivated_;
    } else if (!is_terminal(i.state)) {
      log::get().error("skipping store record {} in state {}", key, to_string(i.state));
      continue;
    }
    std::unique_lock lock(index_mu_);
    if (s->deadline && !is_terminal(s->state)) deadlines_.emplace(*s->deadline, key);
    if (slots_.emplace(key, std::move(s)).second) ++n;
  }
  return n;
}

HandlingInstance InstanceManager::create(bridge::TaskEnvelope request, Mode mode, std::string callback_address,
                                         std::string assigned_user, std::optional<Millis> deadline,
                                         std::string service) {
  if (request.operation.empty()) throw InstanceError(InstanceErrc::InvalidRequest, "request has no operation");
  if (mode == Mode::Async && callback_address.empty())
    throw InstanceError(InstanceErrc::InvalidRequest, "async request without callback address");
  if (mode == Mode::Sync) callback_address.clear();

  HandlingInstance i;
  i.instance_id = id_generator_();
  i.mode = mode;
  i.request = std::move(request);
  i.request.direction = bridge::Direction::Request;
  i.callback_address = std::move(callback_address);
  i.assigned_user = std::move(assigned_user);
  i.service = std::move(service);
  if (mode == Mode::Sync) i.resume_token = id_generator_();
  i.created_at = i.last_activity = clock_.now();
  if (deadline) {
    i.deadline = deadline;
  } else if (config_.instance_deadline > 0) {
    i.deadline = i.created_at + config_.instance_deadline;
  }

  if (!queue_.push(i.instance_id)) {
    ++backpressure_;
    throw InstanceError(InstanceErrc::Backpressure, "pending queue at capacity");
  }
  auto s = std::make_shared<Slot>();
  s->mode = mode;
  s->operation = i.request.operation;
  s->deadline = i.deadline;
  std::lock_guard slot_lock(s->mu);
  s->history.push_back(State::Created);
  i.history = s->history;
  s->live = i;
  transition(*s, i.instance_id, State::AwaitingUser);
  try {
    persist(*s->live);
  } catch (...) {
    queue_.remove(i.instance_id);
    throw;
  }
  {
    std::unique_lock lock(index_mu_);
    if (!slots_.emplace(i.instance_id, s).second) {
      queue_.remove(i.instance_id);
      throw InstanceError(InstanceErrc::InvalidRequest, "duplicate instance id");
    }
    if (s->deadline) deadlines_.emplace(*s->deadline, i.instance_id);
  }
  ++created_;
  ++live_;
  return *s->live;
}

void InstanceManager::passivate(const std::string& id) {
  auto s = slot(id);
  if (!s) throw InstanceError(InstanceErrc::NotFound, "unknown instance " + id);
  std::lock_guard lock(s->mu);
  if (s->state != State::AwaitingUser)
    throw InstanceError(InstanceErrc::StateViolation,
                        "cannot passivate " + id + " in state " + std::string(to_string(s->state)));
  Millis now = clock_.now();
  if (now - s->live->last_activity < config_.idle_threshold)
    throw InstanceError(InstanceErrc::NotIdle, "instance " + id + " is not idle");
  HandlingInstance record = *s->live;
  record.state = s->mode == Mode::Async ? State::PassivatedAsync : State::PassivatedSync;
  record.history.push_back(record.state);
  record.passivated_at = now;
  persist(record);
  transition(*s, id, record.state);
  s->live.reset();
  queue_.remove(id);
  --live_;
  ++passivated_;
}

std::vector<std::string> InstanceManager::passivate_idle() {
  std::vector<std::string> done;
  for (const auto& id : queue_.snapshot()) {
    try {
      passivate(id);
      done.push_back(id);
    } catch (const InstanceError&) {
      // completed, touched or already passivated meanwhile
    }
  }
  return done;
}

bool InstanceManager::restore(Slot& s, const std::string& id) {
  transition(s, id, State::Restoring);
  --passivated_;
  try {
    auto record = store_->get(id);
    if (!record) throw InstanceError(InstanceErrc::NotFound, "missing store record for " + id);
    HandlingInstance i = decode_record(*record);
    if (i.instance_id != id) throw InstanceError(InstanceErrc::InvalidRequest, "store record id mismatch");
    i.state = State::Restoring;
    i.history = s.history;
    s.live = std::move(i);
    ++live_;
    ++restored_;
    return true;
  } catch (const std::exception& e) {
    log::get().error("restore of {} failed: {}", id, e.what());
    return false;
  }
}

DeliveryAction InstanceManager::finish(Slot& s, const std::string& id, State to, bridge::TaskEnvelope message,
                                       bool fault, std::string fault_message) {
  bool was_queued = s.state == State::AwaitingUser;
  bool passivated_before = s.live && s.live->passivated_at.has_value();
  transition(s, id, to);
  Millis now = clock_.now();

  DeliveryAction a;
  a.instance_id = id;
  a.state = to;
  a.fault = fault;
  a.fault_message = std::move(fault_message);
  a.message = std::move(message);
  a.message.operation = s.operation;
  a.message.direction = bridge::Direction::Response;
  a.message.reply_to.clear();

  HandlingInstance tomb;
  if (s.live) {
    const auto& i = *s.live;
    a.message.correlation_id = i.request.correlation_id;
    a.service = i.service;
    if (s.mode == Mode::Async) {
      a.kind = DeliveryAction::Kind::PostCallback;
      a.address = i.callback_address;
    } else {
      a.kind = DeliveryAction::Kind::AnswerParked;
      a.address = i.resume_token;
    }
    tomb = i;
    if (to == State::Completed && !passivated_before) {
      std::lock_guard lock(art_mu_);
      art_sum_ms_ += static_cast<double>(now - i.created_at);
      ++art_samples_;
    }
    --live_;
  } else {
    // Restore failed: nothing is known about the caller beyond the mode.
    a.kind = s.mode == Mode::Async ? DeliveryAction::Kind::PostCallback : DeliveryAction::Kind::AnswerParked;
    tomb.instance_id = id;
    tomb.mode = s.mode;
    tomb.request.operation = s.operation;
  }
  tomb.state = to;
  tomb.history = s.history;
  tomb.completed_at = now;
  tomb.request.payload = json::object();
  s.live.reset();
  if (was_queued) queue_.remove(id);
  try {
    persist(tomb);
  } catch (const std::exception& e) {
    log::get().error("persisting terminal record of {} failed: {}", id, e.what());
  }

  if (to == State::Completed) ++completed_;
  if (to == State::Failed) ++failed_;
  if (to == State::TimedOut) ++timed_out_;
  if (fault)
    ++faults_;
  else
    ++responses_;
  if (sink_) sink_(a);
  return a;
}

DeliveryAction InstanceManager::complete(const std::string& id, bridge::TaskEnvelope result) {
  auto s = slot(id);
  if (!s) throw InstanceError(InstanceErrc::NotFound, "unknown instance " + id);
  std::lock_guard lock(s->mu);
  if (is_terminal(s->state)) {
    ++already_completed_;
    DeliveryAction a;
    a.kind = DeliveryAction::Kind::AlreadyCompleted;
    a.instance_id = id;
    a.state = s->state;
    return a;
  }
  if (!result.operation.empty() && result.operation != s->operation)
    throw InstanceError(InstanceErrc::OperationMismatch,
                        "result for " + result.operation + " does not match operation " + s->operation);
  if (is_passivated(s->state) && !restore(*s, id))
    return finish(*s, id, State::Failed, {}, true, "instance could not be restored");
  return finish(*s, id, State::Completed, std::move(result), false, {});
}

DeliveryAction InstanceManager::fail(const std::string& id, const std::string& reason) {
  auto s = slot(id);
  if (!s) throw InstanceError(InstanceErrc::NotFound, "unknown instance " + id);
  std::lock_guard lock(s->mu);
  if (is_terminal(s->state)) {
    DeliveryAction a;
    a.instance_id = id;
    a.state = s->state;
    return a;
  }
  if (is_passivated(s->state)) restore(*s, id);
  return finish(*s, id, State::Failed, {}, true, reason);
}

std::vector<std::string> InstanceManager::expire(Millis now) {
  std::vector<std::string> due;
  {
    std::unique_lock lock(index_mu_);
    auto end = deadlines_.upper_bound(now);
    for (auto it = deadlines_.begin(); it != end; ++it) due.push_back(it->second);
    deadlines_.erase(deadlines_.begin(), end);
  }
  std::vector<std::string> expired;
  for (const auto& id : due) {
    auto s = slot(id);
    if (!s) continue;
    std::lock_guard lock(s->mu);
    if (s->state == State::AwaitingUser) {
      finish(*s, id, State::TimedOut, {}, true, "deadline exceeded");
      expired.push_back(id);
    } else if (is_passivated(s->state)) {
      restore(*s, id);
      finish(*s, id, State::Failed, {}, true, "deadline exceeded");
      expired.push_back(id);
    }
  }
  return expired;
}

void InstanceManager::touch(const std::string& id) {
  auto s = slot(id);
  if (!s) throw InstanceError(InstanceErrc::NotFound, "unknown instance " + id);
  std::lock_guard lock(s->mu);
  if (s->live && s->state == State::AwaitingUser) s->live->last_activity = clock_.now();
}

std::optional<State> InstanceManager::state(const std::string& id) const {
  auto s = slot(id);
  if (!s) return std::nullopt;
  std::lock_guard lock(s->mu);
  return s->state;
}

std::vector<State> InstanceManager::history(const std::string& id) const {
  auto s = slot(id);
  if (!s) return {};
  std::lock_guard lock(s->mu);
  return s->history;
}

std::optional<HandlingInstance> InstanceManager::find(const std::string& id) const {
  auto s = slot(id);
  if (!s) return std::nullopt;
  std::lock_guard lock(s->mu);
  if (s->live) return *s->live;
  auto record = store_->get(id);
  if (!record) return std::nullopt;
  HandlingInstance i = decode_record(*record);
  if (is_passivated(i.state)) i.continuation = *record;
  return i;
}

std::vector<std::string> InstanceManager::ids() const {
  std::shared_lock lock(index_mu_);
  std::vector<std::string> out;
  out.reserve(slots_.size());
  for (const auto& [id, s] : slots_) out.push_back(id);
  std::sort(out.begin(), out.end());
  return out;
}

Metrics InstanceManager::metrics() const {
  Metrics m;
  m.live = live_;
  m.passivated = passivated_;
  m.queue_depth = queue_.size();
  m.created = created_;
  m.completed = completed_;
  m.failed = failed_;
  m.timed_out = timed_out_;
  m.restored = restored_;
  m.responses_delivered = responses_;
  m.faults_delivered = faults_;
  m.already_completed = already_completed_;
  m.backpressure = backpressure_;
  std::lock_guard lock(art_mu_);
  m.art_samples = art_samples_;
  m.art_ms = art_samples_ ? art_sum_ms_ / static_cast<double>(art_samples_) : 0.0;
  return m;
}

}  // namespace muit::instance
