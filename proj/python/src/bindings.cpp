/* Copyright 2026 The memaudit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Python bindings: thin wrappers over the C++ core.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <memory>
#include <optional>

#include "memaudit/audit.hpp"
#include "memaudit/corpus.hpp"
#include "memaudit/error.hpp"
#include "memaudit/mock_backend.hpp"
#include "memaudit/prompts.hpp"
#include "memaudit/records_io.hpp"
#include "memaudit/report.hpp"
#include "memaudit/stats.hpp"
#include "memaudit/vector.hpp"

namespace py = pybind11;

// Records cross the boundary as one opaque object, not a list of dicts.
PYBIND11_MAKE_OPAQUE(std::vector<memaudit::PromptAuditRecord>)

namespace memaudit {
namespace {

using Records = std::vector<PromptAuditRecord>;

EmbeddingVector to_vector(const std::vector<double>& v) { return EmbeddingVector(v); }

EmbeddingMatrix to_matrix(const std::vector<std::vector<double>>& rows) {
  std::vector<EmbeddingVector> vs;
  vs.reserve(rows.size());
  for (const auto& r : rows) vs.emplace_back(r);
  return EmbeddingMatrix::from_vectors(vs);
}

AuditConfig make_config(double tau, std::size_t seeds, std::vector<std::string> strategies,
                        std::uint64_t rng_seed) {
  AuditConfig cfg;
  cfg.tau = tau;
  cfg.seeds_per_run = seeds;
  if (!strategies.empty()) cfg.strategies = std::move(strategies);
  cfg.rng_seed = rng_seed;
  return cfg;
}

py::list summary_rows(const Records& records, const AuditConfig& cfg) {
  py::list out;
  for (const auto& s : summarize(records, cfg)) {
    py::dict d;
    d["strategy"] = s.strategy;
    d["memorized_generations"] = s.memorized_generations;
    d["gen_frequency_pct"] = s.memorized_generation_frequency.str();
    d["high_mean_prompts"] = s.high_mean_prompts;
    d["prompt_frequency_pct"] = s.high_mean_prompt_frequency.str();
    d["failed_generations"] = s.failed_generations;
    out.append(d);
  }
  return out;
}

}  // namespace
}  // namespace memaudit

PYBIND11_MODULE(_memaudit, m) {
  using namespace memaudit;
  m.doc() = "memorization audit harness for text-to-image backends";

  static py::exception<Error> error(m, "MemauditError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, (std::string(error_code_name(e.code())) + ": " + e.what()).c_str());
    } catch (const BackendError& e) {
      PyErr_SetString(PyExc_RuntimeError, e.what());
    }
  });

  m.def("strategies", [] { return TemplateLibrary::builtin().names(); });
  m.def("render_prompt",
        [](const std::string& strategy, const std::string& caption) {
          return TemplateLibrary::builtin().get(strategy).render(caption);
        },
        py::arg("strategy"), py::arg("caption"));
  m.def("template_digests", [] { return TemplateLibrary::builtin().digests(); });

  m.def("cosine_similarity",
        [](const std::vector<double>& a, const std::vector<double>& b) {
          return cosine_similarity(to_vector(a), to_vector(b)).value();
        });
  m.def("top_k_similar",
        [](const std::vector<double>& q, const std::vector<std::vector<double>>& rows,
           std::size_t k) {
          std::vector<std::pair<std::size_t, double>> out;
          for (const auto& n : top_k_similar(to_vector(q), to_matrix(rows), k)) {
            out.emplace_back(n.row, n.score.value());
          }
          return out;
        },
        py::arg("query"), py::arg("rows"), py::arg("k"));
  m.def("pearson", [](const std::vector<double>& x, const std::vector<double>& y) {
    return pearson(x, y);
  });
  m.def("percent2", [](std::uint64_t c, std::uint64_t d) { return Percent2::of(c, d).str(); });
  m.def("recommend_strategy", [](const std::string& tier) {
    const auto t = parse_risk_tier(tier);
    if (!t) throw Error(ErrorCode::kInvalidConfig, "tier must be high, medium or low");
    return std::string(strategy_name(recommend_strategy(*t)));
  });

  py::class_<CorpusIndex, std::shared_ptr<CorpusIndex>>(m, "Corpus")
      .def_static("load",
                  [](const std::filesystem::path& manifest, const std::filesystem::path& store) {
                    return std::make_shared<CorpusIndex>(load_corpus(manifest, store));
                  })
      .def("__len__", &CorpusIndex::size)
      .def_property_readonly("digest", &CorpusIndex::source_digest)
      .def("ids",
           [](const CorpusIndex& c) {
             std::vector<std::string> ids;
             for (const auto& r : c.records()) ids.push_back(r.record_id);
             return ids;
           })
      .def("caption", [](const CorpusIndex& c, const std::string& id) { return c.at(id).caption; })
      .def("sample", [](const CorpusIndex& c, std::size_t n, std::uint64_t seed) {
        std::vector<std::string> ids;
        for (const auto& r : sample_captions(c, n, seed)) ids.push_back(r.record_id);
        return ids;
      });

  py::class_<MockBackend, std::shared_ptr<MockBackend>>(m, "MockBackend")
      .def(py::init([](const std::filesystem::path& config) {
             return std::make_shared<MockBackend>(load_mock_config(config));
           }),
           py::arg("config_path"))
      .def("handshake",
           [](MockBackend& b) {
             const auto d = b.handshake();
             py::dict out;
             out["model_label"] = d.model_label;
             out["embedding_dim"] = d.embedding_dim;
             out["deterministic"] = d.deterministic;
             return out;
           })
      .def("generate",
           [](MockBackend& b, const std::string& prompt, std::uint64_t seed) {
             const auto img = b.generate(prompt, seed);
             return py::make_tuple(img.image_id, py::bytes(img.bytes));
           })
      .def("embed_text", [](MockBackend& b, const std::string& t) {
        const auto v = b.embed_text(t).values();
        return std::vector<double>(v.begin(), v.end());
      });

  py::class_<Records>(m, "Records")
      .def_static("from_json", [](const std::string& text) { return decode_records(text); })
      .def("to_json", [](const Records& r) { return encode_records(r); })
      .def("__len__", [](const Records& r) { return r.size(); })
      .def("outcome_count",
           [](const Records& r) {
             std::size_t n = 0;
             for (const auto& rec : r) n += rec.outcomes.size();
             return n;
           })
      .def("summary",
           [](const Records& r, double tau, std::size_t seeds) {
             return summary_rows(r, make_config(tau, seeds, {}, 0));
           },
           py::arg("tau") = kDefaultTau, py::arg("seeds_per_run") = 75)
      .def("write_report",
           [](const Records& r, const std::filesystem::path& out, double tau, std::size_t seeds,
              bool svg) {
             ReportContext ctx;
             ctx.config = make_config(tau, seeds, {}, 0);
             ctx.backend_label = "python";
             ctx.svg = svg;
             write_report(out, r, ctx);
           },
           py::arg("out_dir"), py::arg("tau") = kDefaultTau, py::arg("seeds_per_run") = 75,
           py::arg("svg") = false);

  m.def("mine",
        [](const CorpusIndex& corpus, MockBackend& backend, std::size_t sample_n, double tau,
           std::size_t mining_seeds, std::uint64_t rng_seed) {
          py::gil_scoped_release release;
          BackendSession session(backend);
          AuditConfig cfg = make_config(tau, 75, {}, rng_seed);
          cfg.sample_n = sample_n;
          cfg.mining_seeds = mining_seeds;
          return mine_high_risk(corpus, session, cfg).caption_ids;
        },
        py::arg("corpus"), py::arg("backend"), py::arg("sample_n") = 5000,
        py::arg("tau") = kDefaultTau, py::arg("mining_seeds") = 8, py::arg("rng_seed") = 0);

  m.def("run_audit",
        [](const std::vector<std::string>& caption_ids, const CorpusIndex& corpus,
           MockBackend& backend, std::size_t seeds_per_run, std::vector<std::string> strategies,
           double tau, const std::optional<std::filesystem::path>& checkpoint, bool resume,
           std::size_t concurrency) {
          py::gil_scoped_release release;
          BackendSession session(backend);
          const auto cfg = make_config(tau, seeds_per_run, std::move(strategies), 0);
          RunOptions opts;
          if (checkpoint) opts.checkpoint_path = *checkpoint;
          opts.resume = resume;
          opts.concurrency = concurrency;
          return run_audit(caption_ids, corpus, session, cfg, opts);
        },
        py::arg("caption_ids"), py::arg("corpus"), py::arg("backend"),
        py::arg("seeds_per_run") = 75, py::arg("strategies") = std::vector<std::string>{},
        py::arg("tau") = kDefaultTau, py::arg("checkpoint") = py::none(),
        py::arg("resume") = false, py::arg("concurrency") = 1);

  m.attr("__version__") = "0.1.0";
}
