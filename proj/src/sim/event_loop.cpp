#include "docsync/sim/event_loop.hpp"

#include <stdexcept>

namespace docsync::sim {

void EventLoop::schedule_at(std::uint64_t at_ms, Task task) {
  if (at_ms < now_) {
    throw std::logic_error("cannot schedule an event in the past");
  }
  queue_.push(Event{at_ms, next_seq_++, std::move(task)});
}

void EventLoop::run_one() {
  Event ev = queue_.top();
  queue_.pop();
  now_ = ev.at;
  ++executed_;
  ev.task();
}

void EventLoop::run_until(std::uint64_t until_ms) {
  while (!queue_.empty() && queue_.top().at <= until_ms) {
    run_one();
  }
  if (until_ms > now_) {
    now_ = until_ms;
  }
}

void EventLoop::drain() {
  while (!queue_.empty()) {
    run_one();
  }
}

}  // namespace docsync::sim
