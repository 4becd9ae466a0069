#pragma once
#include <functional>

#include "anongbdt/mpc.hpp"

namespace ag {

struct PairRun {
  TrafficReport report[2];
  OpCounters counters[2];
};

// Runs `body` once per party on two threads joined by an in-process channel.
// An exception in either party closes the channel and is rethrown here.
PairRun run_pair(const std::function<void(Party&)>& body, u64 dealer_seed = 1, u64 local_seed = 2,
                 RevealLog* log = nullptr);

// Same, over caller-supplied channel endpoints.
PairRun run_pair_on(Channel& c0, Channel& c1, const std::function<void(Party&)>& body, u64 dealer_seed,
                    u64 local_seed, RevealLog* log);

}  // namespace ag
