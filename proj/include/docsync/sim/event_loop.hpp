#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <vector>

namespace docsync::sim {

/// Single-threaded discrete-event scheduler on a virtual millisecond clock.
/// Events at the same instant run in the order they were scheduled.
class EventLoop {
 public:
  using Task = std::function<void()>;

  std::uint64_t now() const { return now_; }

  void schedule_at(std::uint64_t at_ms, Task task);
  void schedule_in(std::uint64_t delay_ms, Task task) { schedule_at(now_ + delay_ms, std::move(task)); }

  /// Runs every event with time <= until_ms, then parks the clock at until_ms.
  void run_until(std::uint64_t until_ms);
  /// Runs until no events remain.
  void drain();

  std::size_t pending() const { return queue_.size(); }
  std::uint64_t executed() const { return executed_; }

 private:
  struct Event {
    std::uint64_t at;
    std::uint64_t seq;
    Task task;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      return a.at != b.at ? a.at > b.at : a.seq > b.seq;
    }
  };

  void run_one();

  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  std::uint64_t now_ = 0;
  std::uint64_t next_seq_ = 0;
  std::uint64_t executed_ = 0;
};

}  // namespace docsync::sim
