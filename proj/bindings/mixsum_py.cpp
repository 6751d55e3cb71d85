#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "mixsum/bundle_io.hpp"
#include "mixsum/clustering.hpp"
#include "mixsum/discrepancy.hpp"
#include "mixsum/dpm.hpp"
#include "mixsum/evaluation.hpp"
#include "mixsum/gmm.hpp"
#include "mixsum/pipeline.hpp"
#include "mixsum/projection.hpp"
#include "mixsum/sim_data.hpp"

namespace py = pybind11;
using namespace mixsum;

namespace {

Kernel make_kernel(const py::object& spec) {
  const py::dict d = spec.cast<py::dict>();
  const std::string family = d["family"].cast<std::string>();
  if (family == "gaussian_uni")
    return Kernel::gaussian(d["mean"].cast<double>(), d["var"].cast<double>());
  if (family == "gaussian_multi")
    return Kernel::gaussian(d["mean"].cast<Vector>(), d["cov"].cast<Matrix>());
  if (family == "beta")
    return Kernel::beta(d["alpha"].cast<double>(), d["beta"].cast<double>());
  throw ValidationError("unknown kernel family '" + family + "'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "posterior summarization of Bayesian mixture models";
  m.attr("__version__") = MIXSUM_VERSION;

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);

  py::class_<RngStream>(m, "RngStream")
      .def(py::init<std::uint64_t, std::uint64_t>(), py::arg("seed"), py::arg("stream_id") = 0)
      .def("child", py::overload_cast<std::uint64_t>(&RngStream::child, py::const_))
      .def("uniform", &RngStream::uniform)
      .def("normal", &RngStream::normal)
      .def_property_readonly("seed", &RngStream::seed)
      .def_property_readonly("stream_id", &RngStream::stream_id);

  py::class_<Dataset>(m, "Dataset")
      .def(py::init<Matrix, std::vector<int>>(), py::arg("points"),
           py::arg("labels") = std::vector<int>{})
      .def_readwrite("points", &Dataset::points)
      .def_readwrite("labels", &Dataset::labels)
      .def_property_readonly("n", &Dataset::size)
      .def_property_readonly("dim", &Dataset::dim);

  py::class_<Kernel>(m, "Kernel")
      .def(py::init(&make_kernel), py::arg("spec"),
           "Build from a dict like {'family': 'gaussian_uni', 'mean': 0.0, 'var': 1.0}")
      .def_static("gaussian_uni",
                  [](double mean, double var) { return Kernel::gaussian(mean, var); })
      .def_static("gaussian_multi",
                  [](const Vector& mean, const Matrix& cov) {
                    return Kernel::gaussian(mean, cov);
                  })
      .def_static("beta", &Kernel::beta)
      .def_property_readonly("family", [](const Kernel& k) { return family_name(k.family()); })
      .def_property_readonly("dim", &Kernel::dim)
      .def("log_density",
           py::overload_cast<const Matrix&>(&Kernel::log_density, py::const_))
      .def("sample", [](const Kernel& k, RngStream& rng, long n) { return sample(k, rng, n); });

  py::class_<MixtureDraw>(m, "MixtureDraw")
      .def(py::init<Vector, std::vector<Kernel>, int>(), py::arg("weights"), py::arg("kernels"),
           py::arg("draw_index") = 0)
      .def_readonly("weights", &MixtureDraw::weights)
      .def_readonly("kernels", &MixtureDraw::kernels)
      .def_readonly("draw_index", &MixtureDraw::draw_index)
      .def_property_readonly("k", &MixtureDraw::size)
      .def_property_readonly("dim", &MixtureDraw::dim)
      .def("log_density",
           py::overload_cast<const Matrix&>(&MixtureDraw::log_density, py::const_))
      .def("sample", &MixtureDraw::sample_n);

  py::class_<BundleMeta>(m, "BundleMeta")
      .def(py::init<>())
      .def_readwrite("model", &BundleMeta::model)
      .def_readwrite("d", &BundleMeta::d)
      .def_readwrite("m_count", &BundleMeta::m_count)
      .def_readwrite("seed", &BundleMeta::seed);

  py::class_<DrawBundle>(m, "DrawBundle")
      .def(py::init<BundleMeta, std::vector<MixtureDraw>>())
      .def_readonly("meta", &DrawBundle::meta)
      .def_readonly("draws", &DrawBundle::draws)
      .def_property_readonly("m", &DrawBundle::size)
      .def_property_readonly("dim", &DrawBundle::dim);

  m.def("sim_univariate_truth", &sim_univariate_truth);
  m.def("sim_bivariate_truth", &sim_bivariate_truth);
  m.def("generate_sim_univariate", &generate_sim_univariate, py::arg("n"), py::arg("rng"));
  m.def("generate_sim_bivariate", &generate_sim_bivariate, py::arg("n"), py::arg("rng"));

  py::class_<DpmConfig>(m, "DpmConfig")
      .def(py::init<>())
      .def_readwrite("mu0", &DpmConfig::mu0)
      .def_readwrite("k0", &DpmConfig::k0)
      .def_readwrite("alpha0", &DpmConfig::alpha0)
      .def_readwrite("beta0", &DpmConfig::beta0)
      .def_readwrite("concentration_shape", &DpmConfig::concentration_shape)
      .def_readwrite("concentration_rate", &DpmConfig::concentration_rate)
      .def_readwrite("iterations", &DpmConfig::iterations)
      .def_readwrite("burn_in", &DpmConfig::burn_in)
      .def_readwrite("thinning", &DpmConfig::thinning)
      .def_readwrite("max_clusters", &DpmConfig::max_clusters);

  py::class_<DpmSweepStats>(m, "DpmSweepStats")
      .def_readonly("sweep", &DpmSweepStats::sweep)
      .def_readonly("occupied_clusters", &DpmSweepStats::occupied_clusters)
      .def_readonly("alpha", &DpmSweepStats::alpha);

  py::class_<DpmResult>(m, "DpmResult")
      .def_readonly("bundle", &DpmResult::bundle)
      .def_readonly("diagnostics", &DpmResult::diagnostics);

  m.def("dpm_gibbs", &dpm_gibbs, py::arg("data"), py::arg("config"), py::arg("rng"),
        py::call_guard<py::gil_scoped_release>());
  m.def("ingest_bundle", &ingest_bundle, py::arg("path"));
  m.def("export_bundle", &export_bundle, py::arg("bundle"), py::arg("path"));
  m.def("read_dataset_csv", &read_dataset_csv, py::arg("path"), py::arg("labeled") = false);
  m.def("write_dataset_csv", &write_dataset_csv, py::arg("data"), py::arg("path"),
        py::arg("with_labels") = true);
  m.def("predictive_sample", &predictive_sample, py::arg("bundle"), py::arg("n_total"),
        py::arg("rng"));
  m.def("per_draw_predictive", &per_draw_predictive, py::arg("draw"), py::arg("h"),
        py::arg("rng"));

  py::class_<EmConfig>(m, "EmConfig")
      .def(py::init<>())
      .def_readwrite("max_iters", &EmConfig::max_iters)
      .def_readwrite("rel_tol", &EmConfig::rel_tol)
      .def_readwrite("restarts", &EmConfig::restarts)
      .def_readwrite("ridge", &EmConfig::ridge)
      .def_readwrite("family", &EmConfig::family);

  py::class_<GmmSummary>(m, "GmmSummary")
      .def(py::init<>())
      .def_readwrite("k", &GmmSummary::k)
      .def_readwrite("weights", &GmmSummary::weights)
      .def_readwrite("means", &GmmSummary::means)
      .def_readwrite("covariances", &GmmSummary::covariances)
      .def_readwrite("loglik", &GmmSummary::loglik)
      .def_readonly("loglik_trace", &GmmSummary::loglik_trace)
      .def_property_readonly("dim", &GmmSummary::dim)
      .def("log_density", py::overload_cast<const Matrix&>(&GmmSummary::log_density, py::const_))
      .def("responsibilities", &GmmSummary::responsibilities)
      .def("canonicalize", &GmmSummary::canonicalize)
      .def("to_mixture", &GmmSummary::to_mixture, py::arg("draw_index") = 0);

  m.def("fit_gmm", &fit_gmm, py::arg("samples"), py::arg("k"), py::arg("config"), py::arg("rng"),
        py::call_guard<py::gil_scoped_release>());
  m.def("fit_summary_sequence", &fit_summary_sequence, py::arg("samples"), py::arg("k_max"),
        py::arg("config"), py::arg("rng"), py::arg("threads") = 0,
        py::call_guard<py::gil_scoped_release>());

  py::class_<DiscrepancyTable>(m, "DiscrepancyTable")
      .def_readonly("k_values", &DiscrepancyTable::k_values)
      .def_readonly("samples", &DiscrepancyTable::samples)
      .def_readonly("mean_d", &DiscrepancyTable::mean_d)
      .def_readonly("sd_d", &DiscrepancyTable::sd_d)
      .def_readonly("k_star", &DiscrepancyTable::k_star)
      .def_readonly("selected_by_rule", &DiscrepancyTable::selected_by_rule)
      .def_readonly("delta", &DiscrepancyTable::delta)
      .def_readonly("sd_cap", &DiscrepancyTable::sd_cap)
      .def_readonly("mean_positive_warning", &DiscrepancyTable::mean_positive_warning);

  m.def("posterior_predictive_logdensity", &posterior_predictive_logdensity, py::arg("bundle"),
        py::arg("points"), py::call_guard<py::gil_scoped_release>());
  m.def("discrepancy_samples", &discrepancy_samples, py::arg("bundle"), py::arg("summaries"),
        py::arg("predictive"), py::call_guard<py::gil_scoped_release>());
  m.def("select_k_star", &select_k_star, py::arg("table"), py::arg("delta") = 0.1,
        py::arg("sd_cap") = std::numeric_limits<double>::quiet_NaN());

  py::class_<ProjectionConfig>(m, "ProjectionConfig")
      .def(py::init<>())
      .def_readwrite("h_per_draw", &ProjectionConfig::h_per_draw)
      .def_readwrite("em", &ProjectionConfig::em)
      .def_readwrite("warm_start", &ProjectionConfig::warm_start)
      .def_readwrite("threads", &ProjectionConfig::threads)
      .def_readwrite("max_failure_fraction", &ProjectionConfig::max_failure_fraction);

  py::class_<PosteriorSummarySet>(m, "PosteriorSummarySet")
      .def_readonly("k_star", &PosteriorSummarySet::k_star)
      .def_readonly("h_per_draw", &PosteriorSummarySet::h_per_draw)
      .def_readonly("summaries", &PosteriorSummarySet::summaries)
      .def_readonly("draw_indices", &PosteriorSummarySet::draw_indices)
      .def_readonly("failed_draws", &PosteriorSummarySet::failed_draws)
      .def("aligned", &PosteriorSummarySet::aligned);

  py::class_<DensityRibbon>(m, "DensityRibbon")
      .def_readonly("grid", &DensityRibbon::grid)
      .def_readonly("lower2_5", &DensityRibbon::lower2_5)
      .def_readonly("upper97_5", &DensityRibbon::upper97_5)
      .def_readonly("mean", &DensityRibbon::mean);

  m.def("project_posterior", &project_posterior, py::arg("bundle"), py::arg("k_star"),
        py::arg("config"), py::arg("warm_start"), py::arg("rng"),
        py::call_guard<py::gil_scoped_release>());
  m.def("align_labels", &align_labels, py::arg("set"));
  m.def("density_ribbon", &density_ribbon, py::arg("set"), py::arg("grid"),
        py::call_guard<py::gil_scoped_release>());
  m.def("posterior_mean_logdensity", &posterior_mean_logdensity, py::arg("set"),
        py::arg("points"), py::call_guard<py::gil_scoped_release>());
  m.def("default_grid_univariate", &default_grid_univariate, py::arg("data"),
        py::arg("points") = 512);

  py::enum_<ClusterLoss>(m, "ClusterLoss")
      .value("conditional", ClusterLoss::Conditional)
      .value("kmeans", ClusterLoss::KMeans);

  py::class_<AllocationReport>(m, "AllocationReport")
      .def_readonly("loss", &AllocationReport::loss)
      .def_readonly("k_star", &AllocationReport::k_star)
      .def_readonly("labels", &AllocationReport::labels)
      .def_readonly("uncertainty", &AllocationReport::uncertainty)
      .def_readonly("draw_labels", &AllocationReport::draw_labels);

  py::class_<CentroidSet>(m, "CentroidSet")
      .def_readonly("centroids", &CentroidSet::centroids)
      .def_readonly("wcss", &CentroidSet::wcss)
      .def_readonly("wcss_trace", &CentroidSet::wcss_trace);

  m.def("conditional_allocate", &conditional_allocate, py::arg("summary"), py::arg("data"));
  m.def("conditional_posterior_allocate", &conditional_posterior_allocate, py::arg("set"),
        py::arg("data"), py::call_guard<py::gil_scoped_release>());
  m.def("kmeans_fit", &kmeans_fit, py::arg("samples"), py::arg("k"), py::arg("rng"),
        py::arg("restarts") = 10, py::call_guard<py::gil_scoped_release>());
  m.def("kmeans_assign", &kmeans_assign, py::arg("centroids"), py::arg("data"));
  m.def("kmeans_posterior_allocate", &kmeans_posterior_allocate, py::arg("bundle"),
        py::arg("k_star"), py::arg("h"), py::arg("data"), py::arg("rng"),
        py::arg("threads") = 0, py::arg("restarts") = 4,
        py::arg("max_failure_fraction") = 0.10, py::call_guard<py::gil_scoped_release>());

  py::class_<EvalScore>(m, "EvalScore")
      .def_readonly("metric", &EvalScore::metric)
      .def_readonly("value", &EvalScore::value)
      .def_readonly("standard_error", &EvalScore::standard_error)
      .def_readonly("excluded", &EvalScore::excluded);

  m.def(
      "hellinger_mc",
      [](const MixtureDraw& truth, const py::object& candidate, const Dataset& samples) {
        LogDensityFn fn;
        if (py::isinstance<GmmSummary>(candidate)) {
          const auto& s = candidate.cast<const GmmSummary&>();
          fn = [&s](const Matrix& pts) { return s.log_density(pts); };
        } else if (py::isinstance<DrawBundle>(candidate)) {
          const auto& b = candidate.cast<const DrawBundle&>();
          fn = [&b](const Matrix& pts) { return posterior_predictive_logdensity(b, pts); };
        } else if (py::isinstance<PosteriorSummarySet>(candidate)) {
          const auto& st = candidate.cast<const PosteriorSummarySet&>();
          fn = [&st](const Matrix& pts) { return posterior_mean_logdensity(st, pts); };
        } else if (py::isinstance<MixtureDraw>(candidate)) {
          const auto& d = candidate.cast<const MixtureDraw&>();
          fn = [&d](const Matrix& pts) { return d.log_density(pts); };
        } else {
          fn = [candidate](const Matrix& pts) { return candidate(pts).cast<Vector>(); };
        }
        return hellinger_mc(truth, fn, samples);
      },
      py::arg("truth"), py::arg("candidate"), py::arg("samples_from_truth"),
      "candidate: GmmSummary | DrawBundle | PosteriorSummarySet | MixtureDraw | callable");
  m.def("hellinger_gaussian", &hellinger_gaussian);
  m.def("adjusted_rand_index", &adjusted_rand_index, py::arg("a"), py::arg("b"));
  m.def("classification_error", &classification_error, py::arg("a"), py::arg("b"));

  m.def("load_config", &load_config, py::arg("path"));
  m.def("parse_config_json", &parse_config_json, py::arg("text"));
  m.def(
      "run_stage",
      [](const std::string& config_json, const std::string& stage) {
        run_stage(parse_config_json(config_json), stage);
      },
      py::arg("config_json"), py::arg("stage"), py::call_guard<py::gil_scoped_release>());
}
