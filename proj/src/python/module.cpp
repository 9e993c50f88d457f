#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cmath>
#include <json.hpp>

#include "s2gen/config.hpp"
#include "s2gen/dataset.hpp"
#include "s2gen/expr_sampler.hpp"
#include "s2gen/grammar.hpp"
#include "s2gen/patch.hpp"
#include "s2gen/pipeline.hpp"
#include "s2gen/rng.hpp"
#include "s2gen/series_sampler.hpp"
#include "s2gen/stats/adf.hpp"
#include "s2gen/stats/features.hpp"
#include "s2gen/stats/ordinal.hpp"
#include "s2gen/stats/spectral.hpp"
#include "s2gen/stats/stl.hpp"
#include "s2gen/stats/trend.hpp"
#include "s2gen/storage.hpp"

namespace py = pybind11;
using nlohmann::json;
using namespace s2gen;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

py::object to_python(const json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

json from_python(const py::handle& obj) {
    return json::parse(py::module_::import("json").attr("dumps")(obj).cast<std::string>());
}

/// Partial dicts overlay the defaults; None gives the defaults.
GenConfig config_arg(const py::object& obj) {
    if (obj.is_none()) return {};
    GenConfig cfg = config_from_json(from_python(obj));
    cfg.validate();
    return cfg;
}

Array matrix_to_array(const SeriesMatrix& m) {
    Array out({m.channels(), m.length()});
    std::copy(m.data().begin(), m.data().end(), out.mutable_data());
    return out;
}

SeriesMatrix array_to_matrix(const Array& a) {
    if (a.ndim() == 1) {
        SeriesMatrix m(1, static_cast<std::size_t>(a.shape(0)));
        std::copy(a.data(), a.data() + a.size(), m.data().begin());
        return m;
    }
    if (a.ndim() != 2) throw std::invalid_argument("expected a 1-D or 2-D array (channels x length)");
    SeriesMatrix m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
    std::copy(a.data(), a.data() + a.size(), m.data().begin());
    return m;
}

std::span<const double> series_arg(const Array& a) {
    if (a.ndim() != 1) throw std::invalid_argument("expected a 1-D array");
    return {a.data(), static_cast<std::size_t>(a.size())};
}

Array series_to_array(const Series& s) {
    Array out(std::vector<py::ssize_t>{static_cast<py::ssize_t>(s.size())});
    std::copy(s.begin(), s.end(), out.mutable_data());
    return out;
}

py::dict rejections_to_dict(const RejectionCounts& r) {
    py::dict d;
    d["non_finite"] = r.non_finite;
    d["log_nonpositive"] = r.log_nonpositive;
    d["sqrt_negative"] = r.sqrt_negative;
    d["div_by_zero"] = r.div_by_zero;
    d["y_limit"] = r.y_limit;
    d["x_limit"] = r.x_limit;
    d["input_divergence"] = r.input_divergence;
    return d;
}

py::dict features_to_dict(const stats::Characterization& c) {
    const auto& f = c.features;
    py::dict d;
    d["adf_stat"] = f.adf_stat;
    d["adf_p"] = f.adf_p;
    d["forecastability"] = f.forecastability;
    d["fft_mean"] = f.fft_mean;
    d["perm_entropy"] = f.perm_entropy;
    d["seasonality"] = f.seasonality;
    d["mk_trend"] = f.mk_trend;
    py::dict errors;
    for (const auto& e : c.errors) errors[py::str(e.metric)] = e.message;
    d["errors"] = errors;
    return d;
}

std::vector<std::string> expression_texts(const S2Pair& p) {
    std::vector<std::string> out;
    for (const auto& e : p.system.expressions) out.push_back(to_text(e));
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Synthetic series-symbol pair generator";
    m.attr("__version__") = kGeneratorVersion;

    static py::exception<ParseError> parse_error(m, "ParseError", PyExc_ValueError);
    static py::exception<ShardError> shard_error(m, "ShardError", PyExc_OSError);
    static py::exception<RejectionBudgetExhausted> exhausted_error(m, "BudgetExhausted", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ParseError& e) {
            py::object err = py::handle(parse_error.ptr())(py::str(e.what()));
            err.attr("offset") = e.offset();
            err.attr("kind") = e.kind() == ParseError::Kind::syntax               ? "syntax"
                               : e.kind() == ParseError::Kind::unknown_identifier ? "unknown_identifier"
                                                                                  : "bad_variable";
            PyErr_SetObject(parse_error.ptr(), err.ptr());
        } catch (const ShardError& e) {
            py::object err = py::handle(shard_error.ptr())(py::str(e.what()));
            err.attr("kind") = to_string(e.kind());
            PyErr_SetObject(shard_error.ptr(), err.ptr());
        } catch (const RejectionBudgetExhausted& e) {
            PyErr_SetString(exhausted_error.ptr(), e.what());
        }
    });

    m.def("default_config", [] { return to_python(config_to_json(GenConfig{})); },
          "Every generator setting with its default value.");
    m.def("validate_config", [](const py::object& cfg) { return to_python(config_to_json(config_arg(cfg))); },
          py::arg("config"), "Fills in defaults and validates; raises ValueError naming the bad field.");

    py::class_<Expr>(m, "Expr")
        .def_static("parse", [](const std::string& text) { return parse_text(text); }, py::arg("text"))
        .def("__str__", [](const Expr& e) { return to_text(e); })
        .def("__repr__", [](const Expr& e) { return "Expr('" + to_text(e) + "')"; })
        .def("__eq__", [](const Expr& a, const Expr& b) { return a == b; })
        .def(
            "evaluate",
            [](const Expr& e, const Array& x) -> py::object {
                const EvalOutcome out = evaluate(e, array_to_matrix(x));
                if (out.ok()) return series_to_array(out.values());
                const auto& v = out.violation();
                throw py::value_error(std::string(name(v.reason)) + " at index " + std::to_string(v.first_bad_index));
            },
            py::arg("x"), "Element-wise over the columns of x (channels x length); raises ValueError on a domain breach.")
        .def("stats",
             [](const Expr& e) {
                 const TreeStats s = tree_stats(e);
                 py::dict d;
                 d["binary"] = s.n_binary;
                 d["unary"] = s.n_unary;
                 d["leaves"] = s.n_leaves;
                 d["depth"] = s.depth;
                 d["variables"] = s.distinct_variables;
                 d["nodes"] = node_count(e);
                 return d;
             })
        .def_property_readonly("max_variable", [](const Expr& e) { return max_variable_index(e); });

    m.def(
        "sample_system",
        [](int m_inputs, int n_outputs, std::uint64_t seed, const py::object& cfg) {
            const GenConfig c = config_arg(cfg);
            std::vector<Expr> out;
            for (int i = 0; i < n_outputs; ++i) {
                Rng rng(seed, StreamTag::expression, grid_slot(m_inputs, n_outputs, i), 0);
                out.push_back(sample_expression(m_inputs, c.expr, rng));
            }
            return out;
        },
        py::arg("m"), py::arg("n"), py::arg("seed") = 0, py::arg("config") = py::none(),
        "The uncurated starting system that generate_pair begins from.");

    py::class_<S2Pair>(m, "Pair")
        .def_property_readonly("x", [](const S2Pair& p) { return matrix_to_array(p.x); })
        .def_property_readonly("y", [](const S2Pair& p) { return matrix_to_array(p.y); })
        .def_property_readonly("m", [](const S2Pair& p) { return p.x.channels(); })
        .def_property_readonly("n", [](const S2Pair& p) { return p.y.channels(); })
        .def_property_readonly("length", &S2Pair::length)
        .def_property_readonly("expressions", &expression_texts)
        .def_property_readonly("system", [](const S2Pair& p) { return p.system.expressions; })
        .def_property_readonly("provenance", [](const S2Pair& p) { return to_python(provenance_to_json(p.provenance)); })
        .def("patches",
             [](const S2Pair& p, std::size_t pad_to) {
                 const PatchMatrix pm = patchify(p, pad_to);
                 Array out({pm.padded_to, pm.kernel});
                 std::copy(pm.values.begin(), pm.values.end(), out.mutable_data());
                 return py::make_tuple(out, pm.n_valid);
             },
             py::arg("pad_to") = kPatchPadTo, "(padded patch matrix, number of valid rows)")
        .def("__eq__", [](const S2Pair& a, const S2Pair& b) { return a == b; })
        .def("__repr__", [](const S2Pair& p) {
            return "<Pair m=" + std::to_string(p.x.channels()) + " n=" + std::to_string(p.y.channels()) +
                   " L=" + std::to_string(p.length()) + ">";
        });

    m.def(
        "generate_pair",
        [](int m_inputs, int n_outputs, std::uint64_t seed, const py::object& cfg) {
            PairResult r;
            const GenConfig c = config_arg(cfg);
            {
                py::gil_scoped_release release;
                r = generate_pair(m_inputs, n_outputs, c, seed);
            }
            if (r.exhausted()) throw RejectionBudgetExhausted("rejection budget exhausted");
            return py::make_tuple(std::move(*r.pair), rejections_to_dict(r.rejections));
        },
        py::arg("m"), py::arg("n"), py::arg("seed") = 0, py::arg("config") = py::none(),
        "(pair, rejection counts); raises BudgetExhausted when no valid draw was found.");

    m.def(
        "generate_dataset",
        [](const std::filesystem::path& out_dir, const py::object& cfg, int workers) {
            const GenConfig c = config_arg(cfg);
            DatasetSummary s;
            {
                py::gil_scoped_release release;
                s = generate_dataset(c, out_dir, DatasetOptions{workers, {}});
            }
            py::dict d;
            d["pairs"] = s.pairs;
            d["timestamps"] = s.timestamps;
            d["exhausted"] = s.exhausted;
            d["shards"] = s.shards.size();
            d["rejections"] = rejections_to_dict(s.rejections);
            d["wall_seconds"] = s.wall_seconds;
            return d;
        },
        py::arg("out_dir"), py::arg("config") = py::none(), py::arg("workers") = 1);

    m.def("load_dataset", &load_dataset, py::arg("root"), "Every pair listed in the manifest, in order.");
    m.def("read_shard", &read_shard, py::arg("path"));
    m.def(
        "write_shard",
        [](const std::vector<S2Pair>& pairs, const std::filesystem::path& path) {
            const ShardEntry e = write_shard(pairs, path);
            py::dict d;
            d["pairs"] = e.pairs;
            d["timestamps"] = e.timestamps;
            d["checksum"] = e.checksum;
            return d;
        },
        py::arg("pairs"), py::arg("path"));
    m.def("read_manifest", [](const std::filesystem::path& p) { return to_python(manifest_to_json(read_manifest(p))); },
          py::arg("path"));

    m.def(
        "simulate_arma",
        [](std::vector<double> phi, std::vector<double> theta, const Array& innovations) {
            return series_to_array(simulate_arma(ArmaParams{std::move(phi), std::move(theta)}, series_arg(innovations)));
        },
        py::arg("phi"), py::arg("theta"), py::arg("innovations"),
        "Zero initial state, no burn-in; MA terms enter with a minus sign.");

    m.def("characterize", [](const Array& s) { return features_to_dict(stats::characterize(series_arg(s))); },
          py::arg("series"), "All six metrics; failed metrics are NaN with a message under 'errors'.");
    m.def(
        "adf_test",
        [](const Array& s, std::optional<int> max_lag, bool autolag) {
            stats::AdfOptions o;
            o.max_lag = max_lag;
            o.lag_selection = autolag ? stats::LagSelection::aic : stats::LagSelection::fixed;
            const auto r = stats::adf_test(series_arg(s), o);
            py::dict d;
            d["statistic"] = r.statistic;
            d["p_value"] = r.p_value;
            d["used_lag"] = r.used_lag;
            d["nobs"] = r.nobs;
            return d;
        },
        py::arg("series"), py::arg("max_lag") = py::none(), py::arg("autolag") = true);
    m.def("forecastability", [](const Array& s) { return stats::forecastability(series_arg(s)); }, py::arg("series"));
    m.def("fft_mean", [](const Array& s) { return stats::fft_mean(series_arg(s)); }, py::arg("series"));
    m.def(
        "permutation_entropy",
        [](const Array& s, int order, int delay) { return stats::permutation_entropy(series_arg(s), order, delay); },
        py::arg("series"), py::arg("order") = 3, py::arg("delay") = 1);
    m.def(
        "mann_kendall",
        [](const Array& s, double alpha) {
            const auto r = stats::mann_kendall_test(series_arg(s), alpha);
            py::dict d;
            d["s"] = r.s;
            d["variance"] = r.variance;
            d["z"] = r.z;
            d["trend"] = r.trend;
            return d;
        },
        py::arg("series"), py::arg("alpha") = 0.05);
    m.def(
        "stl_seasonality",
        [](const Array& s, std::optional<int> period) { return stats::stl_seasonality(series_arg(s), period); },
        py::arg("series"), py::arg("period") = py::none());

    m.def(
        "bench_scaling",
        [](const std::vector<int>& lengths, int repeats, const py::object& cfg) {
            const GenConfig c = config_arg(cfg);
            ScalingReport r;
            {
                py::gil_scoped_release release;
                r = bench_scaling(lengths, repeats, c);
            }
            py::list points;
            for (const auto& p : r.points) {
                py::dict d;
                d["L"] = p.length;
                d["mean_ms"] = p.mean_ms;
                d["std_ms"] = p.std_ms;
                d["samples"] = p.samples;
                points.append(d);
            }
            py::dict d;
            d["points"] = points;
            if (r.fit) {
                d["slope"] = r.fit->slope;
                d["intercept"] = r.fit->intercept;
                d["r_squared"] = r.fit->r_squared;
            }
            return d;
        },
        py::arg("lengths"), py::arg("repeats") = 64, py::arg("config") = py::none());
}
