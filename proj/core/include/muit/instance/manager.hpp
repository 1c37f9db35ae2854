#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "muit/bridge/bridge.hpp"
#include "muit/instance/store.hpp"

namespace muit::instance {

enum class Mode { Sync, Async };

enum class State { Created, AwaitingUser, PassivatedAsync, PassivatedSync, Restoring, Completed, Failed, TimedOut };

std::string_view to_string(Mode mode);
std::string_view to_string(State state);
std::optional<Mode> mode_from_string(std::string_view s);
std::optional<State> state_from_string(std::string_view s);

bool transition_allowed(State from, State to);
bool is_terminal(State s);
bool is_passivated(State s);

// Milliseconds since the epoch (or since the start of a simulation).
using Millis = std::int64_t;

class Clock {
 public:
  virtual ~Clock() = default;
  virtual Millis now() const = 0;
};

class SystemClock final : public Clock {
 public:
  Millis now() const override;
};

class ManualClock final : public Clock {
 public:
  explicit ManualClock(Millis start = 0) : now_(start) {}
  Millis now() const override { return now_.load(); }
  void set(Millis t) { now_.store(t); }
  void advance(Millis d) { now_.fetch_add(d); }

 private:
  std::atomic<Millis> now_;
};

// 128 random bits as 32 lowercase hex digits.
std::string random_id();

enum class InstanceErrc { NotFound, Backpressure, StateViolation, NotIdle, OperationMismatch, InvalidRequest };

std::string_view to_string(InstanceErrc code);

class InstanceError : public std::runtime_error {
 public:
  InstanceError(InstanceErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  InstanceErrc code() const { return code_; }

 private:
  InstanceErrc code_;
};

struct HandlingInstance {
  std::string instance_id;
  Mode mode = Mode::Async;
  State state = State::Created;
  bridge::TaskEnvelope request;
  std::string callback_address;  // async only
  std::string assigned_user;
  std::string service;  // deployment that accepted the request
  std::string resume_token;  // sync only: names the parked caller connection
  Millis created_at = 0;
  Millis last_activity = 0;
  std::optional<Millis> passivated_at;
  std::optional<Millis> completed_at;
  std::optional<Millis> deadline;
  std::optional<std::string> continuation;  // present iff passivated
  std::vector<State> history;

  friend bool operator==(const HandlingInstance&, const HandlingInstance&) = default;
};

// Versioned JSON record {v, instance_id, mode, state, request, callback_address,
// assigned_user, resume_token, timestamps, history}. The continuation field
// itself is not part of the record.
std::string encode_record(const HandlingInstance& instance);
HandlingInstance decode_record(std::string_view record);

// What to send when an instance reaches a terminal state.
struct DeliveryAction {
  enum class Kind { PostCallback, AnswerParked, AlreadyCompleted };
  Kind kind = Kind::AlreadyCompleted;
  std::string instance_id;
  std::string service;
  State state = State::Completed;
  // Callback URL for PostCallback, resume token for AnswerParked.
  std::string address;
  bridge::TaskEnvelope message;  // response envelope; payload empty for faults
  bool fault = false;
  std::string fault_message;
};

std::string_view to_string(DeliveryAction::Kind kind);

// Insertion-ordered set of AwaitingUser instance ids with a capacity bound.
class PendingQueue {
 public:
  explicit PendingQueue(std::size_t capacity) : capacity_(capacity) {}
  // False when the id is already queued or the queue is full (unless forced).
  bool push(const std::string& id, bool force = false);
  bool remove(const std::string& id);
  bool contains(const std::string& id) const;
  std::size_t size() const;
  std::size_t capacity() const { return capacity_; }
  std::vector<std::string> snapshot() const;

 private:
  mutable std::mutex mu_;
  std::size_t capacity_;
  std::list<std::string> order_;
  std::unordered_map<std::string, std::list<std::string>::iterator> index_;
};

struct ManagerConfig {
  Millis idle_threshold = 60'000;
  std::size_t queue_capacity = 10'000;
  Millis instance_deadline = 0;  // 0: instances never expire
};

struct Metrics {
  std::uint64_t live = 0;
  std::uint64_t passivated = 0;
  std::uint64_t queue_depth = 0;
  std::uint64_t created = 0;
  std::uint64_t completed = 0;
  std::uint64_t failed = 0;
  std::uint64_t timed_out = 0;
  std::uint64_t restored = 0;
  std::uint64_t responses_delivered = 0;
  std::uint64_t faults_delivered = 0;
  std::uint64_t already_completed = 0;
  std::uint64_t backpressure = 0;
  // Mean create-to-complete time of instances completed without passivation.
  double art_ms = 0;
  std::uint64_t art_samples = 0;

  nlohmann::json to_json() const;
};

using DeliverySink = std::function<void(const DeliveryAction&)>;

// Owns every HandlingInstance. Operations on one instance are serialized;
// operations on distinct instances run in parallel. The delivery sink runs
// under the instance's lock, once per terminal transition.
class InstanceManager {
 public:
  InstanceManager(ManagerConfig config, std::shared_ptr<InstanceStore> store, const Clock& clock,
                  std::function<std::string()> id_generator = random_id);
  InstanceManager(const InstanceManager&) = delete;
  InstanceManager& operator=(const InstanceManager&) = delete;

  void set_delivery_sink(DeliverySink sink) { sink_ = std::move(sink); }

  // Reloads instances persisted by a previous run; returns how many.
  std::size_t recover();

  HandlingInstance create(bridge::TaskEnvelope request, Mode mode, std::string callback_address = {},
                          std::string assigned_user = {}, std::optional<Millis> deadline = std::nullopt,
                          std::string service = {});
  void passivate(const std::string& id);
  // Passivates every AwaitingUser instance idle for at least the threshold.
  std::vector<std::string> passivate_idle();
  DeliveryAction complete(const std::string& id, bridge::TaskEnvelope result);
  DeliveryAction fail(const std::string& id, const std::string& reason);
  // Instances whose deadline is at or before `now`: AwaitingUser ones time
  // out, passivated ones are restored and fail. Returns their ids.
  std::vector<std::string> expire(Millis now);
  // Records user interaction, resetting the idle timer of a live instance.
  void touch(const std::string& id);

  std::optional<State> state(const std::string& id) const;
  std::vector<State> history(const std::string& id) const;
  // Snapshot of an instance; passivated ones are read back from the store
  // and carry their continuation.
  std::optional<HandlingInstance> find(const std::string& id) const;
  std::vector<std::string> ids() const;

  Metrics metrics() const;
  const PendingQueue& queue() const { return queue_; }
  const ManagerConfig& config() const { return config_; }
  const Clock& clock() const { return clock_; }

 private:
  struct Slot {
    mutable std::mutex mu;
    State state = State::Created;
    Mode mode = Mode::Async;
    std::string operation;
    std::optional<Millis> deadline;
    std::optional<HandlingInstance> live;
    std::vector<State> history;
  };

  std::shared_ptr<Slot> slot(const std::string& id) const;
  void transition(Slot& s, const std::string& id, State to);
  DeliveryAction finish(Slot& s, const std::string& id, State to, bridge::TaskEnvelope message, bool fault,
                        std::string fault_message);
  bool restore(Slot& s, const std::string& id);
  void persist(const HandlingInstance& instance);

  ManagerConfig config_;
  std::shared_ptr<InstanceStore> store_;
  const Clock& clock_;
  std::function<std::string()> id_generator_;
  DeliverySink sink_;
  PendingQueue queue_;

  mutable std::shared_mutex index_mu_;
  std::unordered_map<std::string, std::shared_ptr<Slot>> slots_;
  std::multimap<Millis, std::string> deadlines_;

  std::atomic<std::uint64_t> live_{0}, passivated_{0}, created_{0}, completed_{0}, failed_{0}, timed_out_{0},
      restored_{0}, responses_{0}, faults_{0}, already_completed_{0}, backpressure_{0};
  mutable std::mutex art_mu_;
  double art_sum_ms_ = 0;
  std::uint64_t art_samples_ = 0;
};

}  // namespace muit::instance
