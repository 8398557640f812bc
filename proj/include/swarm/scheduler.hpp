#pragma once

#include <deque>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "swarm/trajectory.hpp"

namespace swarm {

// A message arrived before its own generation ended: the clocks disagree.
class ClockSkew : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrajectoryMessage {
  AgentId sender = -1;
  DiscreteTrajectory payload;  // carries iteration, gen_start and gen_end
};

// Reception time minus the sender's generation end.
double estimate_delay(const TrajectoryMessage& msg, double t_rec);

enum class SkipReason { None, EmptyBuffer, NotYetReceived, Busy };

const char* to_string(SkipReason reason);

struct Decision {
  bool plan = false;
  SkipReason reason = SkipReason::None;
  AgentId blocking_peer = -1;              // peer that caused the skip
  std::vector<TrajectoryMessage> consumed;  // one per peer, sorted by sender
};

// Per-agent planning gate. Owns the buffers of unused peer trajectories and
// the latest delay estimate per peer.
class Scheduler {
 public:
  explicit Scheduler(AgentId self) : self_(self) {}

  AgentId self() const { return self_; }

  void receive(TrajectoryMessage msg, double t_rec);

  // Plan when every listed peer has an unused message and has had time to
  // receive own_last; consumes the oldest message of each peer. own_last
  // may be null before the first plan.
  Decision gate(const std::vector<AgentId>& peers, const DiscreteTrajectory* own_last, double t_cur);

  std::size_t buffered(AgentId peer) const;
  std::optional<double> last_delay(AgentId peer) const;

 private:
  AgentId self_;
  std::map<AgentId, std::deque<TrajectoryMessage>> buffers_;
  std::map<AgentId, double> delay_;
};

// One decision as a log line, e.g.
//   "k=12 t=1.200000 agent=3 PLAN consumed=1@10,4@11"
//   "k=13 t=1.300000 agent=3 SKIP empty_buffer peer=1"
std::string format_decision(long iteration, double t, AgentId agent, const Decision& d);

}  // namespace swarm
