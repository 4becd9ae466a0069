#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "anongbdt/gbdt.hpp"
#include "anongbdt/runner.hpp"

namespace py = pybind11;
using namespace ag;

namespace {

const HeContext& desk_context() {
  static HeContext c(HeParams::desk());
  return c;
}

Protocol parse_protocol(const std::string& s) {
  if (s == "base") return Protocol::Base;
  if (s == "otsa") return Protocol::Otsa;
  throw std::invalid_argument("protocol must be 'base' or 'otsa'");
}

py::bytes to_py(const Bytes& b) { return py::bytes(reinterpret_cast<const char*>(b.data()), b.size()); }

Bytes from_py(const py::bytes& b) {
  std::string s = b;
  return Bytes(s.begin(), s.end());
}

py::dict traffic(const TrafficReport& r) {
  py::dict d;
  d["bytes_sent"] = r.bytes_sent;
  d["bytes_recv"] = r.bytes_recv;
  d["rounds"] = r.rounds;
  return d;
}

py::dict train_inproc(const Dataset& d0, const Dataset& d1, const TrainConfig& cfg, const std::string& protocol,
                      u64 seed) {
  TrainOptions opt;
  opt.protocol = parse_protocol(protocol);
  opt.hp.seed = seed;
  opt.he = &desk_context();
  PartyModel m[2];
  PairRun r;
  {
    py::gil_scoped_release nogil;
    r = run_pair([&](Party& P) { m[P.id] = train(P, P.id ? d1 : d0, cfg, opt); }, seed, seed + 1);
  }
  py::dict out;
  out["models"] = py::make_tuple(to_py(m[0].serialize()), to_py(m[1].serialize()));
  out["hashes"] = py::make_tuple(m[0].hash_hex(), m[1].hash_hex());
  out["traffic"] = py::make_tuple(traffic(r.report[0]), traffic(r.report[1]));
  return out;
}

std::vector<double> infer_inproc(const Dataset& d0, const Dataset& d1, const py::bytes& model0,
                                 const py::bytes& model1, u64 seed) {
  PartyModel m[2] = {PartyModel::deserialize(from_py(model0)), PartyModel::deserialize(from_py(model1))};
  HashingParams hp;
  hp.seed = seed;
  std::vector<double> p;
  py::gil_scoped_release nogil;
  run_pair([&](Party& P) {
    auto r = infer(P, P.id ? d1 : d0, m[P.id], hp);
    if (P.id == 0) p = std::move(r);
  }, seed, seed + 1);
  return p;
}

// Plaintext reference trained on the common rows; returns predictions for those rows in party 0 order.
py::dict plain_reference(const Dataset& d0, const Dataset& d1, const TrainConfig& cfg) {
  Binning b0 = fit_bins(d0, cfg.B), b1 = fit_bins(d1, cfg.B);
  JointData J = join_common(d0, d1, b0, b1);
  PlainModel M = train_plain(J, cfg);
  py::dict out;
  out["p"] = predict_plain(M, J);
  out["y"] = J.y;
  py::list trees;
  for (const auto& t : M.trees) {
    py::dict d;
    d["feature"] = t.feature;
    d["bin"] = t.bin;
    d["leaf"] = t.leaf;
    trees.append(d);
  }
  out["trees"] = trees;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Core bindings; see the package docstring.";

  py::class_<Dataset>(m, "Dataset")
      .def(py::init<>())
      .def_readwrite("ids", &Dataset::ids)
      .def_readwrite("m", &Dataset::m)
      .def_readwrite("X", &Dataset::X)
      .def_readwrite("y", &Dataset::y)
      .def_readwrite("names", &Dataset::names)
      .def_property_readonly("n", &Dataset::n)
      .def("validate", &Dataset::validate)
      .def("__repr__", [](const Dataset& d) {
        return "<Dataset n=" + std::to_string(d.n()) + " m=" + std::to_string(d.m) +
               (d.labeled() ? " labeled>" : ">");
      });

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init([](int T, int D, int B, double alpha, double gamma, double shrinkage) {
             TrainConfig c{T, D, B, alpha, gamma, shrinkage};
             c.validate();
             return c;
           }),
           py::arg("T") = 1, py::arg("D") = 3, py::arg("B") = 8, py::arg("alpha") = 0.001, py::arg("gamma") = 0.0,
           py::arg("shrinkage") = 1.0)
      .def_readwrite("T", &TrainConfig::T)
      .def_readwrite("D", &TrainConfig::D)
      .def_readwrite("B", &TrainConfig::B)
      .def_readwrite("alpha", &TrainConfig::alpha)
      .def_readwrite("gamma", &TrainConfig::gamma)
      .def_readwrite("shrinkage", &TrainConfig::shrinkage);

  py::register_exception<CsvError>(m, "CsvError", PyExc_ValueError);
  py::register_exception<ProtocolError>(m, "ProtocolError", PyExc_RuntimeError);

  m.def("load_csv", &load_csv, py::arg("path"));
  m.def("save_csv", &save_csv, py::arg("dataset"), py::arg("path"));
  m.def("gen_synthetic", [](std::size_t n0, std::size_t n1, std::size_t m0, std::size_t m1, double overlap, u64 seed,
                            double noise) {
          auto sp = gen_synthetic(n0, n1, m0, m1, overlap, seed, noise);
          return py::make_tuple(sp.d0, sp.d1, sp.common);
        },
        py::arg("n0"), py::arg("n1"), py::arg("m0"), py::arg("m1"), py::arg("overlap"), py::arg("seed"),
        py::arg("noise") = 0.05);
  m.def("f1_score", &f1_score, py::arg("p"), py::arg("y"), py::arg("threshold") = 0.5);
  m.def("sigmoid_approx", [](double x) { return sigmoid_approx(x, SigmoidParams::ours()); }, py::arg("x"));
  m.def("train", &train_inproc, py::arg("party0"), py::arg("party1"), py::arg("config") = TrainConfig{},
        py::arg("protocol") = "otsa", py::arg("seed") = 1,
        "Runs both parties in-process. Returns a dict with serialized models, model hashes and traffic.");
  m.def("infer", &infer_inproc, py::arg("party0"), py::arg("party1"), py::arg("model0"), py::arg("model1"),
        py::arg("seed") = 1, "Probabilities for party 0's rows; 0.5 where party 1 has no matching id.");
  m.def("plain_reference", &plain_reference, py::arg("party0"), py::arg("party1"), py::arg("config") = TrainConfig{});
}
