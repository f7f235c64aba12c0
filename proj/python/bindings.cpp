#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "motifscope/pipeline.hpp"
#include "motifscope/synth.hpp"
#include "motifscope/util.hpp"

namespace py = pybind11;
using namespace motifscope;

namespace {

py::object parse_json(const std::string& text) { return py::module_::import("json").attr("loads")(text); }
std::string dump_json(const py::object& obj) { return py::module_::import("json").attr("dumps")(obj).cast<std::string>(); }

py::dict features_dict(const FeatureVector& fv) {
  py::dict d;
  for (const auto& [k, v] : fv.features) d[py::str(k)] = v;
  return d;
}

FeatureVector to_feature_vector(const py::dict& features, FeatureMode mode) {
  FeatureVector fv;
  fv.mode = mode;
  for (const auto& [k, v] : features) fv.features.emplace_back(k.cast<std::string>(), v.cast<std::int64_t>());
  std::sort(fv.features.begin(), fv.features.end());
  return fv;
}

AccountType account_type(const std::string& s) {
  const auto t = parse_account_type(s);
  if (!t) throw ConfigError("unknown account type \"" + s + "\"");
  return *t;
}

/// edges: (source, target, category); types: account -> type name. The
/// ego is node 0; accounts missing from `types` are plain addresses.
EgoTransferNetwork make_etn(const std::string& ego, const std::vector<std::tuple<std::string, std::string, std::string>>& edges,
                            const std::map<std::string, std::string>& types) {
  EgoTransferNetwork g(ego);
  auto node = [&](const std::string& a) {
    if (a == ego) return std::uint32_t{0};
    auto it = types.find(a);
    AccountType t = it == types.end() ? (is_null_address(a) ? AccountType::Null : AccountType::Address)
                                      : account_type(it->second);
    return g.add_node(a, t);
  };
  for (const auto& [s, t, c] : edges) {
    const auto cat = parse_category(c);
    if (!cat) throw ConfigError("unknown token category \"" + c + "\"");
    g.add_edge(node(s), node(t), *cat);
  }
  return g;
}

}  // namespace

PYBIND11_MODULE(_motifscope, m) {
  m.doc() = "Ego-network motif features, method-group inference and account profiling";
  m.attr("__version__") = std::string(kVersion);

  static py::exception<InputError> input_error(m, "InputError", PyExc_ValueError);
  static py::exception<ConfigError> config_error(m, "ConfigError", PyExc_ValueError);
  static py::exception<StageError> stage_error(m, "StageError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const StageError& e) {
      PyErr_SetString(stage_error.ptr(), (e.stage() + ": " + e.what()).c_str());
    } catch (const InputError& e) {
      PyErr_SetString(input_error.ptr(), e.what());
    } catch (const ConfigError& e) {
      PyErr_SetString(config_error.ptr(), e.what());
    }
  });

  m.def(
      "featurize_edges",
      [](const std::string& ego, const std::vector<std::tuple<std::string, std::string, std::string>>& edges,
         const std::map<std::string, std::string>& types, const std::string& mode, const std::string& semantics) {
        FeaturizerOptions opt;
        opt.mode = parse_mode(mode);
        opt.semantics = parse_semantics(semantics);
        const Featurizer fz(enumerate_catalog(), opt);
        return features_dict(fz.featurize(make_etn(ego, edges, types)));
      },
      py::arg("ego"), py::arg("edges"), py::arg("types") = std::map<std::string, std::string>{},
      py::arg("mode") = "ME", py::arg("semantics") = "induced",
      "Feature counts of one ego network given as (source, target, category) edges.");

  m.def(
      "etn_dot",
      [](const std::string& ego, const std::vector<std::tuple<std::string, std::string, std::string>>& edges,
         const std::map<std::string, std::string>& types) { return etn_to_dot(make_etn(ego, edges, types)); },
      py::arg("ego"), py::arg("edges"), py::arg("types") = std::map<std::string, std::string>{});

  m.def(
      "ingest",
      [](const std::string& transfers, const std::string& tokens, const std::string& accounts, const std::string& out,
         const std::string& methods, const std::string& method_groups) {
        IngestOptions o{transfers, tokens, accounts, methods, method_groups, out};
        IngestSummary s;
        {
          py::gil_scoped_release release;
          s = run_ingest(o);
        }
        py::dict d;
        d["rows_accepted"] = s.rows_accepted;
        d["rows_rejected"] = s.rows_rejected;
        d["transactions"] = s.transactions_after_spam;
        d["labeled"] = s.labeled;
        return d;
      },
      py::arg("transfers"), py::arg("tokens"), py::arg("accounts"), py::arg("out"), py::arg("methods") = "",
      py::arg("method_groups") = "");

  m.def(
      "stats", [](const std::string& store) { return parse_json(compute_stats(load_store(store)).to_json_text()); },
      py::arg("store"));

  m.def(
      "featurize_store",
      [](const std::string& store_dir, const std::string& mode, const std::string& semantics, unsigned threads) {
        std::vector<FeatureVector> rows;
        {
          py::gil_scoped_release release;
          const auto store = load_store(store_dir);
          FeaturizerOptions opt;
          opt.mode = parse_mode(mode);
          opt.semantics = parse_semantics(semantics);
          rows = Featurizer(enumerate_catalog(), opt)
                     .featurize_all(store.transactions, store.accounts, store.tokens, threads ? threads : default_threads());
        }
        py::list out;
        for (const auto& fv : rows) {
          py::dict d;
          d["tx_hash"] = fv.tx_hash;
          d["ego"] = fv.ego;
          d["features"] = features_dict(fv);
          out.append(std::move(d));
        }
        return out;
      },
      py::arg("store"), py::arg("mode") = "ME", py::arg("semantics") = "induced", py::arg("threads") = 0u);

  py::class_<TrainedModel>(m, "Model")
      .def_static("load", &TrainedModel::load, py::arg("path"))
      .def_property_readonly("classes", [](const TrainedModel& t) { return t.classes; })
      .def_property_readonly("kind", [](const TrainedModel& t) { return std::string(model_kind_name(t.kind)); })
      .def_property_readonly("mode", [](const TrainedModel& t) { return std::string(mode_name(t.mode)); })
      .def(
          "predict",
          [](const TrainedModel& t, const py::dict& features) {
            return t.classes[static_cast<std::size_t>(t.predict(to_feature_vector(features, t.mode)))];
          },
          py::arg("features"), "Predicted group name for one feature dict.")
      .def("save", &TrainedModel::save, py::arg("path"));

  py::class_<SignatureSet>(m, "Signatures")
      .def_static("load", [](const std::string& path) { return SignatureSet::from_json_text(read_file(path)); })
      .def("to_json", [](const SignatureSet& s) { return parse_json(s.to_json_text()); })
      .def("__len__", [](const SignatureSet& s) { return s.signatures.size(); })
      .def(
          "match",
          [](const SignatureSet& s, const py::dict& features) {
            const auto r = match_signatures(to_feature_vector(features, s.mode), s);
            py::list out;
            for (std::size_t i = 0; i < r.leaves.size(); ++i) out.append(py::make_tuple(r.leaves[i], r.groups[i]));
            return out;
          },
          py::arg("features"), "(leaf, group) pairs whose signature the transaction holds.");

  m.def(
      "mine_itemset",
      [](const std::vector<std::map<std::string, std::int64_t>>& samples, double threshold, const std::string& mode) {
        std::vector<SparseCounts> rows;
        for (const auto& s : samples) rows.emplace_back(s.begin(), s.end());
        std::vector<const SparseCounts*> ptrs;
        for (const auto& r : rows) ptrs.push_back(&r);
        const auto set = mine_itemset(ptrs, threshold, parse_itemset_mode(mode));
        std::vector<std::string> keys;
        for (const auto& it : set.items) keys.push_back(it.key);
        return py::make_tuple(keys, set.support);
      },
      py::arg("samples"), py::arg("threshold") = 0.8, py::arg("mode") = "greedy",
      "Frequent itemset (keys, joint support) over binarized samples; support must exceed threshold.");

  m.def(
      "linkage",
      [](const std::vector<std::vector<double>>& points, const std::string& method) {
        py::list out;
        for (const auto& z : linkage(points, parse_linkage(method))) out.append(py::make_tuple(z.a, z.b, z.height, z.size));
        return out;
      },
      py::arg("points"), py::arg("method") = "ward", "Merges as (a, b, height, size) rows.");
  m.def(
      "cut_tree",
      [](const std::vector<std::tuple<std::size_t, std::size_t, double, std::size_t>>& merges, std::size_t n,
         std::size_t k) {
        std::vector<Merge> z;
        for (const auto& [a, b, h, s] : merges) z.push_back({a, b, h, s});
        return cut_tree(z, n, k);
      },
      py::arg("merges"), py::arg("n"), py::arg("k"));
  m.def("silhouette", &silhouette, py::arg("points"), py::arg("labels"));

  m.def(
      "cluster",
      [](const std::string& profiles_csv, const std::string& method, std::size_t max_k) {
        return parse_json(hcluster(ProfileTable::from_csv(read_file(profiles_csv)), parse_linkage(method), max_k)
                              .to_json_text());
      },
      py::arg("profiles"), py::arg("linkage") = "ward", py::arg("max_k") = 15);

  m.def("default_archetypes", [] { return parse_json(SynthConfig::defaults().to_json_text()); });
  m.def(
      "synth",
      [](const std::string& out, std::size_t n, std::uint64_t seed, const py::object& config, const std::string& skew) {
        auto c = config.is_none() ? SynthConfig::defaults() : SynthConfig::from_json_text(dump_json(config));
        apply_skew(c, parse_skew(skew));
        SynthSummary s;
        {
          py::gil_scoped_release release;
          s = generate(c, n, seed, out);
        }
        py::dict d;
        d["transactions"] = s.transactions;
        d["transfers"] = s.transfers;
        d["per_group"] = s.per_group;
        return d;
      },
      py::arg("out"), py::arg("n"), py::arg("seed") = 0, py::arg("config") = py::none(), py::arg("skew") = "config");

  m.def(
      "run_pipeline",
      [](const py::dict& config) {
        const auto c = PipelineConfig::from_json_text(dump_json(config));
        PipelineResult r;
        {
          py::gil_scoped_release release;
          r = run_pipeline(c);
        }
        py::dict d;
        d["supervised"] = r.supervised;
        d["artifacts"] = r.artifacts;
        return d;
      },
      py::arg("config"), "Runs every stage; `config` uses the pipeline config file keys.");
}
