#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>

#include "fusionattack/codec.hpp"
#include "fusionattack/config.hpp"
#include "fusionattack/errors.hpp"
#include "fusionattack/harness.hpp"
#include "fusionattack/metrics.hpp"
#include "fusionattack/ops.hpp"
#include "fusionattack/pso.hpp"
#include "fusionattack/synthetic.hpp"

namespace py = pybind11;
using namespace fusion;

namespace {

using Array = py::array_t<float, py::array::c_style | py::array::forcecast>;

Image to_image(const Array& a) {
  if (a.ndim() != 3 || a.shape(2) != 3) throw InvalidArgument("expected an H x W x 3 array");
  const int h = static_cast<int>(a.shape(0));
  const int w = static_cast<int>(a.shape(1));
  std::vector<float> data(a.data(), a.data() + a.size());
  return Image(w, h, std::move(data));
}

Array to_array(const Image& img) {
  Array out({static_cast<py::ssize_t>(img.height()), static_cast<py::ssize_t>(img.width()),
             static_cast<py::ssize_t>(Image::kChannels)});
  std::memcpy(out.mutable_data(), img.data().data(), img.size() * sizeof(float));
  return out;
}

// Wraps a Python callable taking an H x W x 3 float32 array.
class CallableOracle : public Oracle {
 public:
  explicit CallableOracle(py::function fn) : fn_(std::move(fn)) {}
  double fake_probability(const Image& img) override { return fn_(to_array(img)).cast<double>(); }
  std::string id() const override { return "python"; }

 private:
  py::function fn_;
};

std::unique_ptr<Oracle> as_oracle(const py::object& o) {
  if (py::isinstance<py::str>(o)) return make_oracle(o.cast<std::string>());
  if (py::isinstance<py::function>(o)) return std::make_unique<CallableOracle>(o.cast<py::function>());
  throw InvalidArgument("oracle must be a spec string or a callable");
}

}  // namespace

PYBIND11_MODULE(_fusionattack, m) {
  m.doc() = "Black-box post-processing attack toolkit";

  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<BudgetExhausted>(m, "BudgetExhausted", PyExc_RuntimeError);
  py::register_exception<TransportError>(m, "TransportError", PyExc_ConnectionError);
  py::register_exception<ProtocolError>(m, "ProtocolError", PyExc_RuntimeError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  m.attr("DECISION_THRESHOLD") = kDecisionThreshold;

  m.def("read_png", [](const std::string& path) { return to_array(read_png(path)); }, py::arg("path"));
  m.def("write_png", [](const std::string& path, const Array& a) { write_png(path, to_image(a)); },
        py::arg("path"), py::arg("image"));
  m.def("quantize8", [](const Array& a) { return to_array(quantize8(to_image(a))); }, py::arg("image"));

  m.def("gaussian_blur", [](const Array& a, int size, double sigma) {
    return to_array(gaussian_blur(to_image(a), size, sigma));
  }, py::arg("image"), py::arg("size"), py::arg("sigma"));
  m.def("jpeg_roundtrip", [](const Array& a, int quality) { return to_array(jpeg_roundtrip(to_image(a), quality)); },
        py::arg("image"), py::arg("quality"));
  m.def("add_gaussian_noise", [](const Array& a, double variance, std::uint64_t seed) {
    Rng rng(seed);
    return to_array(add_gaussian_noise(to_image(a), variance, rng));
  }, py::arg("image"), py::arg("variance"), py::arg("seed"));
  m.def("apply_light_spot", [](const Array& a, int cx, int cy, double gain, int radius) {
    return to_array(apply_light_spot(to_image(a), cx, cy, gain, radius));
  }, py::arg("image"), py::arg("cx"), py::arg("cy"), py::arg("gain"), py::arg("radius"));

  m.def("ssim", [](const Array& a, const Array& b) { return ssim(to_image(a), to_image(b)); }, py::arg("a"),
        py::arg("b"));
  m.def("psnr", [](const Array& a, const Array& b) { return psnr(to_image(a), to_image(b)); }, py::arg("a"),
        py::arg("b"));
  m.def("compute_asr", [](const std::vector<double>& s) { return compute_asr(s); }, py::arg("scores"));

  py::class_<PostProcParams>(m, "PostProcParams")
      .def(py::init<>())
      .def(py::init([](int blur_size, double blur_sigma, int jpeg_quality, double noise_variance, int spot_x,
                       int spot_y, double spot_gain, int spot_radius) {
             return PostProcParams{blur_size, blur_sigma, jpeg_quality, noise_variance,
                                   spot_x,    spot_y,     spot_gain,    spot_radius};
           }),
           py::arg("blur_size"), py::arg("blur_sigma"), py::arg("jpeg_quality"), py::arg("noise_variance"),
           py::arg("spot_x"), py::arg("spot_y"), py::arg("spot_gain"), py::arg("spot_radius"))
      .def_readwrite("blur_size", &PostProcParams::blur_size)
      .def_readwrite("blur_sigma", &PostProcParams::blur_sigma)
      .def_readwrite("jpeg_quality", &PostProcParams::jpeg_quality)
      .def_readwrite("noise_variance", &PostProcParams::noise_variance)
      .def_readwrite("spot_x", &PostProcParams::spot_x)
      .def_readwrite("spot_y", &PostProcParams::spot_y)
      .def_readwrite("spot_gain", &PostProcParams::spot_gain)
      .def_readwrite("spot_radius", &PostProcParams::spot_radius)
      .def("to_list", [](const PostProcParams& p) {
        const auto v = p.to_vector();
        return std::vector<double>(v.begin(), v.end());
      })
      .def(py::self == py::self)
      .def("__repr__", [](const PostProcParams& p) {
        return py::str("PostProcParams(blur_size={}, blur_sigma={}, jpeg_quality={}, noise_variance={}, "
                       "spot_x={}, spot_y={}, spot_gain={}, spot_radius={})")
            .format(p.blur_size, p.blur_sigma, p.jpeg_quality, p.noise_variance, p.spot_x, p.spot_y,
                    p.spot_gain, p.spot_radius);
      });

  m.def("apply_fusion", [](const Array& a, const PostProcParams& p, std::uint64_t noise_seed) {
    return to_array(apply_fusion(to_image(a), p, noise_seed));
  }, py::arg("image"), py::arg("params"), py::arg("noise_seed"));

  py::class_<PsoConfig>(m, "PsoConfig")
      .def(py::init<>())
      .def_readwrite("particles", &PsoConfig::particles)
      .def_readwrite("iterations", &PsoConfig::iterations)
      .def_readwrite("w_min", &PsoConfig::w_min)
      .def_readwrite("w_max", &PsoConfig::w_max)
      .def_readwrite("c_personal", &PsoConfig::c_personal)
      .def_readwrite("c_global", &PsoConfig::c_global)
      .def_readwrite("modification_prob", &PsoConfig::modification_prob)
      .def_readwrite("seed", &PsoConfig::seed)
      .def_readwrite("budget", &PsoConfig::budget)
      .def_readwrite("workers", &PsoConfig::workers)
      .def("set_bounds", [](PsoConfig& c, const std::string& name, double lo, double hi) {
        for (std::size_t i = 0; i < kParamCount; ++i)
          if (param_name(static_cast<Param>(i)) == name) {
            c.bounds.set(static_cast<Param>(i), lo, hi);
            c.bounds.validate();
            return;
          }
        throw InvalidArgument("unknown parameter: " + name);
      }, py::arg("name"), py::arg("lo"), py::arg("hi"))
      .def("load", [](PsoConfig& c, const std::string& text) { apply_config_text(text, c); }, py::arg("text"))
      .def("validate", &PsoConfig::validate);

  py::class_<AttackOutcome>(m, "AttackOutcome")
      .def_readonly("success", &AttackOutcome::success)
      .def_readonly("selected_position", &AttackOutcome::selected_position)
      .def_readonly("selected_particle", &AttackOutcome::selected_particle)
      .def_readonly("selected_noise_seed", &AttackOutcome::selected_noise_seed)
      .def_property_readonly("adversarial_image", [](const AttackOutcome& o) { return to_array(o.adversarial_image); })
      .def_readonly("final_fitness", &AttackOutcome::final_fitness)
      .def_readonly("ssim_to_original", &AttackOutcome::ssim_to_original)
      .def_readonly("queries_used", &AttackOutcome::queries_used)
      .def_readonly("queries_to_success", &AttackOutcome::queries_to_success)
      .def_readonly("iterations_run", &AttackOutcome::iterations_run)
      .def_property_readonly("fitness_trace", [](const AttackOutcome& o) {
        std::vector<std::pair<std::size_t, double>> t;
        for (const auto& p : o.fitness_trace) t.emplace_back(p.iteration, p.best_fitness);
        return t;
      });

  m.def("score", [](const py::object& oracle, const Array& a) {
    auto o = as_oracle(oracle);
    QueryLedger ledger(1);
    return score(*o, to_image(a), ledger).fake_probability;
  }, py::arg("oracle"), py::arg("image"), "Scores one image; oracle is a spec string or a callable.");

  m.def("run_attack", [](const Array& a, const py::object& oracle, const PsoConfig& cfg) {
    auto o = as_oracle(oracle);
    return run_attack(to_image(a), *o, cfg);
  }, py::arg("image"), py::arg("oracle"), py::arg("config") = PsoConfig{});

  m.def("run_random_search", [](const Array& a, const py::object& oracle, const PsoConfig& cfg) {
    auto o = as_oracle(oracle);
    return run_random_search(to_image(a), *o, cfg);
  }, py::arg("image"), py::arg("oracle"), py::arg("config") = PsoConfig{});
}
