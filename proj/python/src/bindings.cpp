#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fasr/evalkit.hpp"
#include "fasr/pipeline.hpp"
#include "fasr/rng.hpp"
#include "fasr/scorenet.hpp"
#include "fasr/sde.hpp"
#include "fasr/solver.hpp"
#include "fasr/synthdata.hpp"

namespace py = pybind11;
using namespace fasr;

namespace {

Tensor to_tensor(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  std::vector<std::size_t> shape(a.ndim());
  for (py::ssize_t i = 0; i < a.ndim(); ++i) {
    shape[static_cast<std::size_t>(i)] = static_cast<std::size_t>(a.shape(i));
  }
  Tensor t(shape);
  std::copy(a.data(), a.data() + t.size(), t.data());
  return t;
}

py::array_t<double> to_array(const Tensor& t) {
  std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
  py::array_t<double> a(shape);
  std::copy(t.data(), t.data() + t.size(), a.mutable_data());
  return a;
}

}  // namespace

PYBIND11_MODULE(_fasr, m) {
  m.doc() = "feature-assisted score-SDE super-resolution core";

  py::class_<NoiseSchedule>(m, "NoiseSchedule")
      .def(py::init<double, double, double>(), py::arg("sigma_min") = 0.001,
           py::arg("sigma_max") = 348.0, py::arg("horizon") = 1.0)
      .def_readonly("sigma_min", &NoiseSchedule::sigma_min)
      .def_readonly("sigma_max", &NoiseSchedule::sigma_max)
      .def_readonly("horizon", &NoiseSchedule::horizon)
      .def("t_floor", &NoiseSchedule::t_floor)
      .def("sigma", &NoiseSchedule::sigma)
      .def("diffusion_coeff", &NoiseSchedule::diffusion_coeff)
      .def("marginal_std", &NoiseSchedule::marginal_std);

  m.def("gaussian",
        [](std::uint64_t seed, std::uint64_t stream,
           const std::vector<std::size_t>& shape) {
          RngStream rng(seed, stream);
          return to_array(gaussian(rng, shape));
        },
        py::arg("seed"), py::arg("stream"), py::arg("shape"));

  m.def("time_embedding",
        [](double t, std::size_t dim, const NoiseSchedule& sched) {
          return to_array(time_embedding(t, dim, sched));
        });

  m.def("render",
        [](const std::vector<double>& latent, int shift_x, int shift_y,
           double gain, double noise_std, std::uint64_t seed) {
          NuisanceParams nu{shift_x, shift_y, gain, noise_std};
          RngStream rng(seed, 0);
          return to_array(render(latent, nu, rng));
        },
        py::arg("latent"), py::arg("shift_x") = 0, py::arg("shift_y") = 0,
        py::arg("gain") = 1.0, py::arg("noise_std") = 0.0, py::arg("seed") = 0);

  m.def("degrade", [](const py::array_t<double>& hr, std::size_t scale) {
    return to_array(degrade(to_tensor(hr), scale));
  });

  py::class_<FeatureExtractor>(m, "FeatureExtractor")
      .def(py::init<std::uint64_t, std::size_t, std::size_t>(),
           py::arg("seed"), py::arg("feature_dim") = kFeatureDim,
           py::arg("image_size") = kImageSize)
      .def("extract", [](const FeatureExtractor& fx, const py::array_t<double>& img) {
        return to_array(fx.extract(to_tensor(img)).values);
      });

  m.def("merge_features",
        [](const std::vector<py::array_t<double>>& feats, bool renormalize) {
          std::vector<FeatureVector> fv;
          for (const auto& f : feats) fv.push_back({to_tensor(f)});
          return to_array(merge_features(fv, renormalize).values);
        },
        py::arg("features"), py::arg("renormalize") = true);

  m.def("cosine_similarity",
        [](const py::array_t<double>& a, const py::array_t<double>& b) {
          return cosine_similarity({to_tensor(a)}, {to_tensor(b)});
        });
  m.def("verification_auc", &verification_auc);
  m.def("cmc_rank_k",
        [](const py::array_t<double>& values,
           const std::vector<std::size_t>& truth, std::size_t k) {
          SimilarityMatrix sim{to_tensor(values), truth};
          return cmc_rank_k(sim, k);
        });
  m.def("psnr", [](const py::array_t<double>& ref, const py::array_t<double>& cand,
                   double peak) { return psnr(to_tensor(ref), to_tensor(cand), peak); },
        py::arg("reference"), py::arg("candidate"), py::arg("peak") = 1.0);

  py::class_<ScoreNetwork>(m, "ScoreNetwork")
      .def_static("load", &ScoreNetwork::load)
      .def("forward",
           [](const ScoreNetwork& net, const py::array_t<double>& x_t,
              const py::array_t<double>& y, const py::array_t<double>& feat,
              double t, const NoiseSchedule& sched) {
             return to_array(net.forward(to_tensor(x_t), to_tensor(y),
                                         to_tensor(feat), t, sched));
           });

  m.def("load_eval_network", &load_eval_network);

  m.def("super_resolve",
        [](const ScoreNetwork& net, const py::array_t<double>& lr,
           const py::array_t<double>& fm, std::size_t steps,
           bool denoise_final, const NoiseSchedule& sched, std::uint64_t seed) {
          SamplerConfig cfg{steps, sched, denoise_final};
          RngStream rng(seed, 0);
          return to_array(
              super_resolve(net, to_tensor(lr), {to_tensor(fm)}, cfg, rng));
        },
        py::arg("net"), py::arg("lr"), py::arg("fm"), py::arg("steps") = 2000,
        py::arg("denoise_final") = true, py::arg("sched") = NoiseSchedule(),
        py::arg("seed") = 0);
}
