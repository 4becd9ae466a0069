#include "anongbdt/runner.hpp"

#include <exception>
#include <thread>

namespace ag {

PairRun run_pair_on(Channel& c0, Channel& c1, const std::function<void(Party&)>& body, u64 dealer_seed,
                    u64 local_seed, RevealLog* log) {
  PairRun out;
  std::exception_ptr err[2];
  Channel* ch[2] = {&c0, &c1};
  auto work = [&](int id) {
    try {
      Party P(id, *ch[id], dealer_seed, local_seed, log);
      body(P);
      out.counters[id] = P.ctr;
    } catch (...) {
      err[id] = std::current_exception();
      ch[id]->close();
    }
  };
  std::thread t1(work, 1);
  work(0);
  t1.join();
  out.report[0] = c0.report();
  out.report[1] = c1.report();
  // Prefer the original failure over the peer's "channel closed" echo.
  for (int id : {0, 1}) {
    if (!err[id]) continue;
    try {
      std::rethrow_exception(err[id]);
    } catch (const ProtocolError&) {
      if (err[1 - id]) continue;
      throw;
    }
  }
  for (int id : {0, 1})
    if (err[id]) std::rethrow_exception(err[id]);
  return out;
}

PairRun run_pair(const std::function<void(Party&)>& body, u64 dealer_seed, u64 local_seed, RevealLog* log) {
  auto [a, b] = make_inproc_pair();
  return run_pair_on(*a, *b, body, dealer_seed, local_seed, log);
}

}  // namespace ag
