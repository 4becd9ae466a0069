#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "anongbdt/gbdt.hpp"
#include "anongbdt/runner.hpp"

using namespace ag;
using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ANONGBDT_LOG=quiet|info|debug (default info). Messages go to stderr.
int log_level() {
  static int lvl = [] {
    const char* v = std::getenv("ANONGBDT_LOG");
    if (!v) return 1;
    std::string s = v;
    return s == "quiet" ? 0 : s == "debug" ? 2 : 1;
  }();
  return lvl;
}

void info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "[anongbdt] " << msg << "\n";
}

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Options {
  std::string role = "both";
  std::string protocol = "otsa";
  std::string config;
  std::vector<std::string> data;
  std::vector<std::string> models;
  std::string peer;
  std::string shape;
  u64 seed = 1;
  std::string out = ".";
};

struct Settings {
  TrainConfig cfg;
  Protocol protocol = Protocol::Otsa;
  HeParams he = HeParams::desk();
  HashingParams hp;
};

Settings load_settings(const Options& o) {
  Settings s;
  if (!o.config.empty()) {
    std::ifstream in(o.config);
    if (!in) throw ConfigError("cannot open config " + o.config);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw ConfigError("config " + o.config + ": " + e.what());
    }
    for (auto& [k, v] : j.items()) {
      if (k == "T") s.cfg.T = v.get<int>();
      else if (k == "D") s.cfg.D = v.get<int>();
      else if (k == "B") s.cfg.B = v.get<int>();
      else if (k == "alpha") s.cfg.alpha = v.get<double>();
      else if (k == "gamma") s.cfg.gamma = v.get<double>();
      else if (k == "shrinkage") s.cfg.shrinkage = v.get<double>();
      else if (k == "kappa") s.hp.kappa = v.get<int>();
      else if (k == "he") {
        std::string p = v.get<std::string>();
        if (p == "desk") s.he = HeParams::desk();
        else if (p == "paper") s.he = HeParams::paper();
        else throw ConfigError("config: he must be desk or paper");
      } else {
        throw ConfigError("config: unknown key " + k);
      }
    }
  }
  if (o.protocol == "base") s.protocol = Protocol::Base;
  else if (o.protocol == "otsa") s.protocol = Protocol::Otsa;
  else throw ConfigError("--protocol must be base or otsa");
  s.hp.seed = o.seed;
  try {
    s.cfg.validate();
    s.he.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return s;
}

json config_json(const TrainConfig& c) {
  return {{"T", c.T}, {"D", c.D}, {"B", c.B}, {"alpha", c.alpha}, {"gamma", c.gamma}, {"shrinkage", c.shrinkage}};
}

json traffic_json(const TrafficReport& r) { return json::parse(r.to_json()); }

void write_json(const fs::path& p, const json& j) {
  std::ofstream out(p);
  if (!out) throw ConfigError("cannot write " + p.string());
  out << j.dump(2) << "\n";
}

void write_bytes(const fs::path& p, const Bytes& b) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + p.string());
  out.write(reinterpret_cast<const char*>(b.data()), std::streamsize(b.size()));
}

Bytes read_bytes(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + p);
  return Bytes(std::istreambuf_iterator<char>(in), {});
}

int party_of(const std::string& role) {
  if (role == "party0") return 0;
  if (role == "party1") return 1;
  if (role == "both") return -1;
  throw ConfigError("--role must be party0, party1 or both");
}

// Party 0 listens on the port of --peer, party 1 connects to it.
std::unique_ptr<Channel> open_channel(int party, const Options& o) {
  auto colon = o.peer.rfind(':');
  if (o.peer.empty() || colon == std::string::npos) throw ConfigError("--peer HOST:PORT is required for " + o.role);
  int port = 0;
  try {
    port = std::stoi(o.peer.substr(colon + 1));
  } catch (const std::exception&) {
    throw ConfigError("bad port in --peer");
  }
  std::unique_ptr<Channel> ch = party == 0 ? listen_tcp(port) : connect_tcp(o.peer.substr(0, colon), port);
  if (!o.shape.empty()) ch = shape(std::move(ch), parse_shape(o.shape));
  return ch;
}

// Runs `body` for the selected role(s) and returns the traffic report of each party that ran.
std::map<int, TrafficReport> run_roles(const Options& o, const std::function<void(Party&)>& body,
                                       std::map<int, OpCounters>* counters = nullptr) {
  const int party = party_of(o.role);
  std::map<int, TrafficReport> rep;
  if (party < 0) {
    auto [a, b] = make_inproc_pair();
    std::unique_ptr<Channel> c0 = std::move(a), c1 = std::move(b);
    if (!o.shape.empty()) {
      LinkShape s = parse_shape(o.shape);
      c0 = shape(std::move(c0), s);
      c1 = shape(std::move(c1), s);
    }
    PairRun r = run_pair_on(*c0, *c1, body, o.seed, o.seed + 1, nullptr);
    rep[0] = r.report[0];
    rep[1] = r.report[1];
    if (counters) {
      (*counters)[0] = r.counters[0];
      (*counters)[1] = r.counters[1];
    }
    return rep;
  }
  auto ch = open_channel(party, o);
  Party P(party, *ch, o.seed, o.seed + 1);
  body(P);
  if (counters) (*counters)[party] = P.ctr;
  rep[party] = ch->report();
  return rep;
}

std::vector<Dataset> load_data(const Options& o) {
  const int party = party_of(o.role);
  const std::size_t need = party < 0 ? 2 : 1;
  if (o.data.size() != need)
    throw ConfigError("--data must be given " + std::to_string(need) + " time(s) for role " + o.role);
  std::vector<Dataset> d;
  for (const auto& p : o.data) {
    try {
      d.push_back(load_csv(p));
    } catch (const CsvError& e) {
      throw ConfigError(e.what());
    }
  }
  if (party < 0) return d;
  std::vector<Dataset> out(2);
  out[party] = std::move(d[0]);
  return out;
}

std::vector<int> parties(const Options& o) {
  int p = party_of(o.role);
  return p < 0 ? std::vector<int>{0, 1} : std::vector<int>{p};
}

// ---- subcommands ----

int cmd_gen(std::size_t n0, std::size_t n1, std::size_t m0, std::size_t m1, double overlap, double noise,
            const Options& o) {
  if (overlap < 0 || overlap > 1) throw ConfigError("--overlap must be in [0, 1]");
  auto sp = gen_synthetic(n0, n1, m0, m1, overlap, o.seed, noise);
  fs::create_directories(o.out);
  save_csv(sp.d0, (fs::path(o.out) / "party0.csv").string());
  save_csv(sp.d1, (fs::path(o.out) / "party1.csv").string());
  write_json(fs::path(o.out) / "rule.json",
             {{"schema_version", 1}, {"weights", sp.rule}, {"common", sp.common}, {"noise", noise}, {"seed", o.seed}});
  info("wrote " + std::to_string(sp.d0.n()) + " + " + std::to_string(sp.d1.n()) + " rows, " +
       std::to_string(sp.common) + " common, to " + o.out);
  return 0;
}

int cmd_train(const Options& o) {
  Settings s = load_settings(o);
  auto data = load_data(o);
  HeContext ctx(s.he);
  TrainOptions opt;
  opt.protocol = s.protocol;
  opt.hp = s.hp;
  opt.he = &ctx;
  PartyModel model[2];
  auto t0 = Clock::now();
  auto rep = run_roles(o, [&](Party& P) { model[P.id] = train(P, data[P.id], s.cfg, opt); });
  const double secs = since(t0);
  fs::create_directories(o.out);
  json m = {{"schema_version", 1}, {"command", "train"}, {"protocol", o.protocol}, {"seed", o.seed},
            {"config", config_json(s.cfg)}, {"runtime_seconds", {{"train", secs}}}};
  for (int p : parties(o)) {
    write_bytes(fs::path(o.out) / ("model_p" + std::to_string(p) + ".bin"), model[p].serialize());
    m["parties"][std::to_string(p)] = {{"model_hash", model[p].hash_hex()}, {"traffic", traffic_json(rep[p])}};
  }
  write_json(fs::path(o.out) / "metrics_train.json", m);
  info("trained " + std::to_string(s.cfg.T) + " tree(s) in " + std::to_string(secs) + " s");
  return 0;
}

int cmd_infer(const Options& o) {
  Settings s = load_settings(o);
  auto data = load_data(o);
  const auto ps = parties(o);
  if (o.models.size() != ps.size()) throw ConfigError("--model must be given once per party that runs");
  PartyModel model[2];
  for (std::size_t i = 0; i < ps.size(); ++i) {
    try {
      model[ps[i]] = PartyModel::deserialize(read_bytes(o.models[i]));
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(o.models[i] + ": " + e.what());
    }
  }
  std::vector<double> p;
  auto t0 = Clock::now();
  auto rep = run_roles(o, [&](Party& P) {
    auto r = infer(P, data[P.id], model[P.id], s.hp);
    if (P.id == 0) p = std::move(r);
  });
  fs::create_directories(o.out);
  json m = {{"schema_version", 1}, {"command", "infer"}, {"seed", o.seed}, {"runtime_seconds", {{"infer", since(t0)}}}};
  for (int q : ps) m["parties"][std::to_string(q)] = {{"traffic", traffic_json(rep[q])}};
  if (std::find(ps.begin(), ps.end(), 0) != ps.end()) {
    std::ofstream out(fs::path(o.out) / "predictions.csv");
    out << "id,p\n";
    out.precision(10);
    for (std::size_t i = 0; i < p.size(); ++i) out << data[0].ids[i] << "," << p[i] << "\n";
    if (data[0].labeled()) m["f1"] = f1_score(p, data[0].y);
  }
  write_json(fs::path(o.out) / "metrics_infer.json", m);
  return 0;
}

// Base vs OTSA on one synthetic configuration, plus the packing comparison.
int cmd_bench(std::size_t n, std::size_t m, double overlap, const Options& o) {
  Settings s = load_settings(o);
  if (m < 2) throw ConfigError("--m must be at least 2");
  auto sp = gen_synthetic(n, n, m / 2, m - m / 2, overlap, o.seed);
  HeContext ctx(s.he);
  json rows = json::array();
  std::printf("%-6s %14s %12s %10s\n", "proto", "bytes", "seconds", "rounds");
  for (Protocol pr : {Protocol::Base, Protocol::Otsa}) {
    TrainOptions opt;
    opt.protocol = pr;
    opt.hp = s.hp;
    opt.he = &ctx;
    auto t0 = Clock::now();
    PairRun r = run_pair([&](Party& P) { train(P, P.id ? sp.d1 : sp.d0, s.cfg, opt); }, o.seed, o.seed + 1);
    const double secs = since(t0);
    const char* name = pr == Protocol::Base ? "base" : "otsa";
    const u64 bytes = r.report[0].total() + r.report[1].total();
    std::printf("%-6s %14llu %12.2f %10llu\n", name, (unsigned long long)bytes, secs,
                (unsigned long long)(r.report[0].rounds + r.report[1].rounds));
    rows.push_back({{"protocol", name}, {"bytes", bytes}, {"seconds", secs}, {"traffic_p0", traffic_json(r.report[0])},
                    {"traffic_p1", traffic_json(r.report[1])}});
  }
  // Packing: fast path vs lift-then-pack baseline at 128 inputs.
  Prg rng(o.seed, "bench-pack");
  KeyMaterial km = keygen(ctx, rng);
  const int cnt = 128, LD = ctx.params().log_delta();
  std::vector<Lwe> small;
  for (int i = 0; i < cnt; ++i) small.push_back(lwe_encrypt(ctx, km.sk, ctx.params().N_small, rng.next(), LD - 7, rng));
  auto t0 = Clock::now();
  fast_pack_lwes(ctx, small, km.ev);
  const double fast = since(t0);
  t0 = Clock::now();
  std::vector<Lwe> lifted;
  for (const auto& c : small) lifted.push_back(lwe_dim_lift(ctx, c, km.ev));
  pack_lwes(ctx, lifted, km.ev);
  const double base = since(t0);
  std::printf("packing %d inputs: fast %.3f s, baseline %.3f s (ratio %.2f)\n", cnt, fast, base, fast / base);
  fs::create_directories(o.out);
  write_json(fs::path(o.out) / "metrics_bench.json",
             {{"schema_version", 1}, {"command", "bench"}, {"n", n}, {"m", m}, {"overlap", overlap},
              {"config", config_json(s.cfg)}, {"training", rows},
              {"packing", {{"inputs", cnt}, {"fast_seconds", fast}, {"baseline_seconds", base}}}});
  return 0;
}

int cmd_micro(const Options& o) {
  Settings s = load_settings(o);
  HeContext ctx(s.he);
  json j = {{"schema_version", 1}, {"command", "micro"}, {"he", {{"N", ctx.params().N}, {"N_small", ctx.params().N_small}}}};

  // Sigmoid accuracy on a 0.01 grid.
  Shares x;
  for (int i = -560; i <= 560; ++i) x.push_back(encode_fixed(i * 0.01));
  Prg g(o.seed, "micro");
  auto [s0, s1] = share_arith(x, g);
  Shares out[2];
  auto t0 = Clock::now();
  PairRun r = run_pair([&](Party& P) { out[P.id] = sigmoid(P, P.id ? s1 : s0, SigmoidParams::ours()); }, o.seed,
                       o.seed + 1);
  const double sig_s = since(t0);
  double mx = 0, sum = 0;
  auto y = reconstruct_arith(out[0], out[1]);
  for (std::size_t i = 0; i < x.size(); ++i) {
    double e = std::fabs(decode_fixed(y[i]) - 1 / (1 + std::exp(-decode_fixed(x[i]))));
    mx = std::max(mx, e);
    sum += e;
  }
  j["sigmoid"] = {{"points", x.size()}, {"max_error", mx}, {"mean_error", sum / double(x.size())},
                  {"seconds", sig_s}, {"bytes", r.report[0].total() + r.report[1].total()}};

  KeyMaterial km = keygen(ctx, g);
  const int LD = ctx.params().log_delta();
  j["packing"] = json::array();
  std::printf("%8s %10s %10s %8s %10s %10s\n", "inputs", "fast_s", "base_s", "ratio", "fast_ks", "base_ks");
  for (int cnt : {16, 128, 512}) {
    int tau = 0;
    while ((1 << tau) < cnt) ++tau;
    std::vector<Lwe> small;
    for (int i = 0; i < cnt; ++i) small.push_back(lwe_encrypt(ctx, km.sk, ctx.params().N_small, g.next(), LD - tau, g));
    u64 k0 = ctx.counters().keyswitch;
    t0 = Clock::now();
    fast_pack_lwes(ctx, small, km.ev);
    const double fast = since(t0);
    const u64 fks = ctx.counters().keyswitch - k0;
    k0 = ctx.counters().keyswitch;
    t0 = Clock::now();
    std::vector<Lwe> lifted;
    for (const auto& c : small) lifted.push_back(lwe_dim_lift(ctx, c, km.ev));
    pack_lwes(ctx, lifted, km.ev);
    const double base = since(t0);
    const u64 bks = ctx.counters().keyswitch - k0;
    std::printf("%8d %10.3f %10.3f %8.2f %10llu %10llu\n", cnt, fast, base, fast / base, (unsigned long long)fks,
                (unsigned long long)bks);
    j["packing"].push_back({{"inputs", cnt}, {"fast_seconds", fast}, {"baseline_seconds", base},
                            {"fast_keyswitch", fks}, {"baseline_keyswitch", bks}});
  }
  std::printf("sigmoid: max error %.5f, mean %.5f over %zu points\n", mx, sum / double(x.size()), x.size());
  fs::create_directories(o.out);
  write_json(fs::path(o.out) / "metrics_micro.json", j);
  return 0;
}

void common_flags(CLI::App* c, Options& o, bool roles) {
  c->add_option("--config", o.config, "JSON file with T, D, B, alpha, gamma, shrinkage, kappa, he (desk|paper)");
  c->add_option("--protocol", o.protocol, "base or otsa")->check(CLI::IsMember({"base", "otsa"}));
  c->add_option("--seed", o.seed, "seed for the dealer, hashing and local randomness");
  c->add_option("--out", o.out, "output directory");
  c->add_option("--shape", o.shape, "link shaping BW,LAT (bits/s, one-way ms)");
  if (roles) {
    c->add_option("--role", o.role, "party0, party1 or both (in-process)")
        ->check(CLI::IsMember({"party0", "party1", "both"}));
    c->add_option("--data", o.data, "CSV per running party (party 0 first for role both)");
    c->add_option("--peer", o.peer, "HOST:PORT; party 0 listens on PORT, party 1 connects");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-party gradient boosting over vertically partitioned data with private alignment"};
  app.require_subcommand(1);
  Options o;

  auto* train_c = app.add_subcommand("train", "train a model");
  common_flags(train_c, o, true);

  auto* infer_c = app.add_subcommand("infer", "score party 0's rows with a trained model");
  common_flags(infer_c, o, true);
  infer_c->add_option("--model", o.models, "model file per running party");

  std::size_t bn = 1000, bm = 10;
  double boverlap = 0.6;
  auto* bench_c = app.add_subcommand("bench", "base vs otsa on synthetic data, plus the packing comparison");
  common_flags(bench_c, o, false);
  bench_c->add_option("--n", bn, "rows per party");
  bench_c->add_option("--m", bm, "total features (split between the parties)");
  bench_c->add_option("--overlap", boverlap, "fraction of common ids");

  auto* micro_c = app.add_subcommand("micro", "sigmoid accuracy and packing microbenchmarks");
  common_flags(micro_c, o, false);

  std::size_t n0 = 1000, n1 = 1000, m0 = 4, m1 = 4;
  double overlap = 0.6, noise = 0.05;
  auto* gen_c = app.add_subcommand("gen", "write a synthetic two-party dataset");
  gen_c->add_option("--n0", n0);
  gen_c->add_option("--n1", n1);
  gen_c->add_option("--m0", m0);
  gen_c->add_option("--m1", m1);
  gen_c->add_option("--overlap", overlap);
  gen_c->add_option("--noise", noise, "fraction of flipped labels");
  gen_c->add_option("--seed", o.seed);
  gen_c->add_option("--out", o.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  try {
    if (*gen_c) return cmd_gen(n0, n1, m0, m1, overlap, noise, o);
    if (*train_c) return cmd_train(o);
    if (*infer_c) return cmd_infer(o);
    if (*bench_c) return cmd_bench(bn, bm, boverlap, o);
    if (*micro_c) return cmd_micro(o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "protocol abort: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
