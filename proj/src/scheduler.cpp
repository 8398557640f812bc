#include "swarm/scheduler.hpp"

#include <algorithm>
#include <cstdio>

namespace swarm {

namespace {
// Both sides of the comparison are sums of exact microsecond counts; this
// only absorbs their decimal rounding.
constexpr double kTimeTol = 1e-9;
}  // namespace

double estimate_delay(const TrajectoryMessage& msg, double t_rec) {
  const double d = t_rec - msg.payload.gen_end;
  if (d < -kTimeTol) throw ClockSkew("message from agent " + std::to_string(msg.sender) + " received before it was sent");
  return d < 0.0 ? 0.0 : d;
}

const char* to_string(SkipReason reason) {
  switch (reason) {
    case SkipReason::None: return "none";
    case SkipReason::EmptyBuffer: return "empty_buffer";
    case SkipReason::NotYetReceived: return "not_yet_received";
    case SkipReason::Busy: return "busy";
  }
  return "unknown";
}

void Scheduler::receive(TrajectoryMessage msg, double t_rec) {
  if (msg.sender == self_) throw ContractError("Scheduler: received own message");
  if (msg.payload.gen_end < msg.payload.gen_start) throw ContractError("Scheduler: gen_end precedes gen_start");
  delay_[msg.sender] = estimate_delay(msg, t_rec);
  buffers_[msg.sender].push_back(std::move(msg));
}

Decision Scheduler::gate(const std::vector<AgentId>& peers, const DiscreteTrajectory* own_last, double t_cur) {
  Decision d;
  for (AgentId p : peers) {
    auto it = buffers_.find(p);
    if (it == buffers_.end() || it->second.empty()) {
      d.reason = SkipReason::EmptyBuffer;
      d.blocking_peer = p;
      return d;
    }
  }
  if (own_last) {
    for (AgentId p : peers) {
      if (delay_.at(p) + own_last->gen_end > t_cur + kTimeTol) {
        d.reason = SkipReason::NotYetReceived;
        d.blocking_peer = p;
        return d;
      }
    }
  }
  d.plan = true;
  std::vector<AgentId> sorted = peers;
  std::sort(sorted.begin(), sorted.end());
  for (AgentId p : sorted) {
    auto& q = buffers_.at(p);
    d.consumed.push_back(std::move(q.front()));
    q.pop_front();
  }
  return d;
}

std::size_t Scheduler::buffered(AgentId peer) const {
  auto it = buffers_.find(peer);
  return it == buffers_.end() ? 0 : it->second.size();
}

std::optional<double> Scheduler::last_delay(AgentId peer) const {
  auto it = delay_.find(peer);
  if (it == delay_.end()) return std::nullopt;
  return it->second;
}

std::string format_decision(long iteration, double t, AgentId agent, const Decision& d) {
  char head[96];
  std::snprintf(head, sizeof head, "k=%ld t=%.6f agent=%d ", iteration, t, agent);
  std::string line = head;
  if (d.plan) {
    line += "PLAN consumed=";
    for (std::size_t i = 0; i < d.consumed.size(); ++i) {
      if (i) line += ',';
      line += std::to_string(d.consumed[i].sender) + '@' + std::to_string(d.consumed[i].payload.iteration);
    }
    if (d.consumed.empty()) line += '-';
  } else {
    line += "SKIP ";
    line += to_string(d.reason);
    if (d.blocking_peer >= 0) line += " peer=" + std::to_string(d.blocking_peer);
  }
  return line;
}

}  // namespace swarm
