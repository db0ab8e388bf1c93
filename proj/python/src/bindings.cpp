/*
 * Copyright 2026 The widir Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <set>
#include <string>
#include <vector>

#include "widir/abtest.hpp"
#include "widir/error.hpp"
#include "widir/evaluator.hpp"
#include "widir/model.hpp"
#include "widir/pipeline.hpp"
#include "widir/trainer.hpp"

namespace py = pybind11;
using namespace widir;

namespace {

RankedSlate SlateFromOrder(const std::vector<std::string>& ranked) {
  std::vector<double> scores;
  for (std::size_t i = 0; i < ranked.size(); ++i) scores.push_back(-static_cast<double>(i));
  return MakeSlate("", "", ranked, scores);
}

py::dict ReproduceDict(const ReproduceResult& r) {
  py::dict d;
  d["phase"] = r.phase;
  d["matched"] = r.matched;
  d["mismatched"] = r.mismatched;
  d["skipped"] = r.skipped;
  d["ok"] = r.ok();
  return d;
}

}  // namespace

PYBIND11_MODULE(_widir, m) {
  m.doc() = "Pairwise contest ranking model, metrics and pipeline";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<DimensionError>(m, "DimensionError", base.ptr());

  py::class_<WidirDims>(m, "Dims")
      .def(py::init([](int p, int c, int i) { return WidirDims{p, c, i}; }), py::arg("player") = kPlayerFeatureDims,
           py::arg("contest") = kContestFeatureDims, py::arg("interaction") = kInteractionFeatureDims)
      .def_readwrite("player", &WidirDims::player)
      .def_readwrite("contest", &WidirDims::contest)
      .def_readwrite("interaction", &WidirDims::interaction)
      .def("__eq__", [](const WidirDims& a, const WidirDims& b) { return a == b; })
      .def("__repr__", [](const WidirDims& d) {
        return "Dims(" + std::to_string(d.player) + ", " + std::to_string(d.contest) + ", " +
               std::to_string(d.interaction) + ")";
      });

  m.def(
      "param_count",
      [](const WidirDims& dims) {
        const ParamCounts c = ParamCount(dims);
        py::dict d;
        for (std::size_t i = 0; i < kNumComponents; ++i) {
          d[py::str(std::string(ComponentName(kAllComponents[i])))] = c.per_component[i];
        }
        d["total"] = c.total;
        return d;
      },
      py::arg("dims") = WidirDims{}, "Parameter count per component plus the total.");

  py::class_<WidirParams>(m, "Params")
      .def_readonly("dims", &WidirParams::dims)
      .def("size", [](const WidirParams& p) {
        std::size_t n = 0;
        p.ForEach([&](const float&) { ++n; });
        return n;
      })
      .def(
          "score",
          [](const WidirParams& p, std::vector<float> player, std::vector<float> contest,
             std::vector<float> interaction) {
            py::gil_scoped_release release;
            return Forward(p, FeatureTriple{std::move(player), std::move(contest), std::move(interaction)});
          },
          py::arg("player"), py::arg("contest"), py::arg("interaction"))
      .def(
          "score_batch",
          [](const WidirParams& p, const std::vector<float>& player, const std::vector<std::vector<float>>& contests,
             const std::vector<std::vector<float>>& interactions) {
            if (contests.size() != interactions.size()) {
              throw DimensionError("contests and interactions differ in length");
            }
            std::vector<float> c, i;
            for (const auto& row : contests) c.insert(c.end(), row.begin(), row.end());
            for (const auto& row : interactions) i.insert(i.end(), row.begin(), row.end());
            py::gil_scoped_release release;
            return ScoreBatch(p, ScoringInput{player, c, i, contests.size()});
          },
          py::arg("player"), py::arg("contests"), py::arg("interactions"))
      .def("to_bytes", [](const WidirParams& p) { return py::bytes(SerializeParams(p)); })
      .def_static("from_bytes", [](const py::bytes& b) { return DeserializeParams(std::string(b)); })
      .def("save", [](const WidirParams& p, const std::filesystem::path& path) { SaveParams(path, p); })
      .def("__eq__", [](const WidirParams& a, const WidirParams& b) { return a == b; });

  m.def("init_params", &InitParams<float>, py::arg("dims") = WidirDims{}, py::arg("seed") = 1);
  m.def("zero_params", &ZeroParams<float>, py::arg("dims") = WidirDims{});
  m.def("load_params", &LoadParams, py::arg("path"));

  m.def("hinge_loss", &HingeLoss<double>, py::arg("pos"), py::arg("neg"), "max(0, 1 - pos + neg)");

  m.def(
      "build_pairs",
      [](const std::vector<int>& counts, std::size_t max_pairs, std::uint64_t seed) {
        OrderedContestList list;
        for (std::size_t i = 0; i < counts.size(); ++i) list.entries.push_back({"t" + std::to_string(i), counts[i]});
        std::vector<std::pair<int, int>> out;
        for (const auto& p : BuildPairs(list, max_pairs, seed)) out.emplace_back(p.pos_index, p.neg_index);
        return out;
      },
      py::arg("counts"), py::arg("max_pairs") = 0, py::arg("seed") = 1,
      "Strict-preference (pos, neg) position pairs for a list of join counts.");

  m.def(
      "precision_at",
      [](const std::vector<std::string>& ranked, const std::set<std::string>& joined, int h) {
        return PrecisionAt(SlateFromOrder(ranked), joined, h);
      },
      py::arg("ranked"), py::arg("joined"), py::arg("h"));
  m.def(
      "recall_at",
      [](const std::vector<std::string>& ranked, const std::set<std::string>& joined, int h) {
        return RecallAt(SlateFromOrder(ranked), joined, h);
      },
      py::arg("ranked"), py::arg("joined"), py::arg("h"));

  m.def("delta", &Delta, py::arg("tg_pre"), py::arg("cg_pre"), py::arg("tg_post"), py::arg("cg_post"));

  py::class_<Pipeline>(m, "Pipeline")
      .def(py::init<std::filesystem::path, std::string>(), py::arg("output_root"), py::arg("run_id"))
      .def_property_readonly("run_dir", &Pipeline::run_dir)
      .def(
          "generate",
          [](Pipeline& p, const std::filesystem::path& config, std::uint64_t seed) {
            py::gil_scoped_release release;
            p.Generate(config, seed);
          },
          py::arg("config"), py::arg("seed") = 1)
      .def("features",
           [](Pipeline& p) {
             py::gil_scoped_release release;
             p.Features({});
           })
      .def(
          "train",
          [](Pipeline& p, const std::filesystem::path& config) {
            py::gil_scoped_release release;
            p.Train(config);
          },
          py::arg("config"))
      .def("eval",
           [](Pipeline& p) {
             py::gil_scoped_release release;
             p.Eval();
           })
      .def(
          "infer",
          [](Pipeline& p, int horizon_days) {
            py::gil_scoped_release release;
            p.Infer(std::nullopt, horizon_days);
          },
          py::arg("horizon_days") = 3)
      .def(
          "abtest",
          [](Pipeline& p, double boost, int exposed, std::uint64_t seed) {
            py::gil_scoped_release release;
            p.AbTest({boost, exposed, seed});
          },
          py::arg("boost") = 2.0, py::arg("exposed") = 5, py::arg("seed") = 1)
      .def("reproduce", [](const Pipeline& p, const std::string& phase) { return ReproduceDict(p.Reproduce(phase)); },
           py::arg("phase"))
      .def("manifest_json", [](const Pipeline& p) { return p.LoadManifest().ToJson(); });
}
