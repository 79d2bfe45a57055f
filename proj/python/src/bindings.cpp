#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "oceannet/cli.hpp"
#include "oceannet/config.hpp"
#include "oceannet/evaluate.hpp"
#include "oceannet/metrics.hpp"
#include "oceannet/ops.hpp"
#include "oceannet/spectral.hpp"
#include "oceannet/train.hpp"

namespace py = pybind11;
using namespace oceannet;

namespace {

using RealArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using ComplexArray = py::array_t<cplx, py::array::c_style | py::array::forcecast>;

Shape shape_of(const py::buffer_info& info) { return {info.shape.begin(), info.shape.end()}; }

Tensor to_tensor(const RealArray& a) {
  const auto info = a.request();
  const auto* p = static_cast<const double*>(info.ptr);
  return Tensor::from(shape_of(info), std::vector<double>(p, p + info.size));
}

Tensor to_tensor(const ComplexArray& a) {
  const auto info = a.request();
  const auto* p = static_cast<const cplx*>(info.ptr);
  return Tensor::from_complex(shape_of(info), std::vector<cplx>(p, p + info.size));
}

py::array to_numpy(const Tensor& t) {
  std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
  if (t.is_complex()) {
    py::array_t<cplx> out(shape);
    std::copy(t.cdata().begin(), t.cdata().end(), out.mutable_data());
    return out;
  }
  py::array_t<double> out(shape);
  std::copy(t.real().begin(), t.real().end(), out.mutable_data());
  return out;
}

Mask to_mask(const py::object& obj, std::size_t h, std::size_t w) {
  if (obj.is_none()) return Mask::all_ocean(h, w);
  const auto a = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>::ensure(obj);
  if (!a || a.ndim() != 2 || static_cast<std::size_t>(a.shape(0)) != h || static_cast<std::size_t>(a.shape(1)) != w) {
    throw DimensionError("mask must be a " + std::to_string(h) + "x" + std::to_string(w) + " array");
  }
  std::vector<std::uint8_t> bytes(a.data(), a.data() + a.size());
  for (auto& b : bytes) b = b != 0;
  return Mask(h, w, std::move(bytes));
}

FieldState to_field(const RealArray& a, const py::object& mask) {
  Tensor t = to_tensor(a);
  if (t.rank() != 2) throw DimensionError("expected a 2-D field");
  Mask m = to_mask(mask, t.dim(0), t.dim(1));
  return {std::move(t), std::move(m)};
}

py::array mask_array(const Mask& m) {
  py::array_t<std::uint8_t> out({m.height(), m.width()});
  std::copy(m.bytes().begin(), m.bytes().end(), out.mutable_data());
  return out;
}

py::dict dataset_dict(const OceanDataset& ds) {
  py::array_t<double> frames({ds.n_time(), ds.height(), ds.width()});
  double* dst = frames.mutable_data();
  for (const auto& f : ds.frames) dst = std::copy(f.values.real().begin(), f.values.real().end(), dst);
  py::dict d;
  d["frames"] = frames;
  d["mask"] = mask_array(ds.mask);
  d["n_train"] = ds.n_train;
  d["lead_days"] = ds.lead_days;
  d["ocean_mean"] = ds.ocean_mean;
  d["ocean_std"] = ds.ocean_std;
  return d;
}

py::array contour_points(const ContourSet& c) {
  py::array_t<double> out({c.points.size(), std::size_t{2}});
  double* p = out.mutable_data();
  for (const auto& q : c.points) *p++ = q.row, *p++ = q.col;
  return out;
}

ContourSet to_contour(const RealArray& a) {
  if (a.ndim() != 2 || a.shape(1) != 2) throw DimensionError("contour points must be an (n, 2) array");
  ContourSet c;
  for (py::ssize_t i = 0; i < a.shape(0); ++i) c.points.push_back({a.at(i, 0), a.at(i, 1)});
  return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Fourier neural operator forecasting of gridded sea-surface height.";

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
  py::register_exception<UndefinedMetricError>(m, "UndefinedMetricError", PyExc_ValueError);

  m.def("fft2", [](const ComplexArray& x) {
        ad::NoGradGuard guard;
        return to_numpy(ad::fft2(ad::Var(to_tensor(x))).value());
      },
        "Unnormalized 2-D DFT over the last two axes.");
  m.def("ifft2", [](const ComplexArray& x) {
        ad::NoGradGuard guard;
        return to_numpy(ad::ifft2(ad::Var(to_tensor(x))).value());
      },
        "Inverse 2-D DFT (divides by H*W).");

  m.def(
      "spectral_conv",
      [](const RealArray& x, const ComplexArray& w, std::size_t kmax_x, std::size_t kmax_y) {
        ad::NoGradGuard guard;
        return to_numpy(ad::spectral_conv(ad::Var(to_tensor(x)), ad::Var(to_tensor(w)), {kmax_x, kmax_y}).value());
      },
      py::arg("x"), py::arg("weights"), py::arg("kmax_x"), py::arg("kmax_y"));
  m.def("zonal_spectrum", [](const RealArray& f) { return zonal_spectrum(to_tensor(f)).values; });

  m.def("rmse", [](const RealArray& a, const RealArray& b, const py::object& mask) {
        return rmse(to_field(a, mask), to_field(b, mask));
      }, py::arg("pred"), py::arg("target"), py::arg("mask") = py::none());
  m.def("pearson_cc", [](const RealArray& a, const RealArray& b, const py::object& mask) {
        return pearson_cc(to_field(a, mask), to_field(b, mask));
      }, py::arg("pred"), py::arg("target"), py::arg("mask") = py::none());
  m.def("extract_contour", [](const RealArray& f, double level, const py::object& mask) {
        return contour_points(extract_contour(to_field(f, mask), level));
      }, py::arg("field"), py::arg("level"), py::arg("mask") = py::none());
  m.def("mhd", [](const RealArray& a, const RealArray& b, double km) { return mhd(to_contour(a), to_contour(b), km); },
        py::arg("a"), py::arg("b"), py::arg("km_per_cell") = 1.0);
  m.def("hausdorff", [](const RealArray& a, const RealArray& b, double km) {
        return hausdorff(to_contour(a), to_contour(b), km);
      }, py::arg("a"), py::arg("b"), py::arg("km_per_cell") = 1.0);

  m.def("gen_dataset", [](const std::string& config_json) {
        return dataset_dict(gen_dataset(gen_config_from_json(nlohmann::json::parse(config_json))));
      }, py::arg("config_json"));
  m.def("read_dataset", [](const std::string& path) { return dataset_dict(read_dataset(path)); });

  m.def("param_count", [](std::size_t width, std::size_t n_layers, std::size_t modes_x, std::size_t modes_y,
                          std::size_t height, std::size_t grid_width) {
        FnoConfig c{width, n_layers, {modes_x, modes_y}, 2, 1, height, grid_width};
        c.validate();
        return param_count(c);
      }, py::arg("width"), py::arg("n_layers"), py::arg("modes_x"), py::arg("modes_y"), py::arg("height"),
      py::arg("grid_width"));

  py::class_<Checkpoint>(m, "Checkpoint")
      .def_static("load", [](const std::string& path) { return load_checkpoint(path); })
      .def("save", [](const Checkpoint& c, const std::string& path) { save_checkpoint(path, c); })
      .def_readonly("ocean_mean", &Checkpoint::ocean_mean)
      .def_readonly("ocean_std", &Checkpoint::ocean_std)
      .def_readonly("step", &Checkpoint::step)
      .def_property_readonly("param_count", [](const Checkpoint& c) { return c.params.scalar_count(); })
      .def_property_readonly("tensors", [](const Checkpoint& c) {
        py::dict d;
        for (const auto& t : c.params.tensors) d[py::str(t.name)] = to_numpy(t.value);
        return d;
      })
      .def("tendency", [](const Checkpoint& c, const RealArray& x, const py::object& mask) {
        return to_numpy(forward(c.params, to_field(x, mask)).reshaped({c.params.config.grid_h, c.params.config.grid_w}));
      }, py::arg("field"), py::arg("mask") = py::none(),
         "Operator output for a standardized field.");

  m.def("train", [](const std::string& data_path, const std::string& config_json) {
        const OceanDataset ds = read_dataset(data_path);
        const auto j = nlohmann::json::parse(config_json);
        TrainConfig cfg = train_config_from_json(j);
        const bool cutoff_given = j.contains("loss") && j["loss"].contains("cutoff_k");
        resolve_grid(cfg, ds.height(), ds.width(), cutoff_given);
        TrainResult r;
        {
          py::gil_scoped_release release;
          r = train(ds, cfg);
        }
        py::list log;
        for (const auto& e : r.log) {
          py::dict row;
          row["epoch"] = e.epoch;
          row["train_loss"] = e.train_loss;
          row["val_loss"] = e.val_loss;
          row["val_mse"] = e.val_mse;
          row["val_mu"] = e.val_mu;
          log.append(row);
        }
        return py::make_tuple(log, r.best, r.last);
      }, py::arg("data_path"), py::arg("config_json"));

  m.def("forecast", [](const Checkpoint& c, const std::string& data_path, std::size_t init_index, std::size_t steps) {
        const Forecast f = make_forecast(c, read_dataset(data_path), init_index, steps);
        const py::dict d = dataset_dict(f.data);
        return py::array(d["frames"]);
      }, py::arg("checkpoint"), py::arg("data_path"), py::arg("init_index"), py::arg("steps"));

  m.def("run_cli", [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = cli::run(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      }, py::arg("args"), "Run an `oceannet` subcommand; returns (exit_code, stdout, stderr).");
}
