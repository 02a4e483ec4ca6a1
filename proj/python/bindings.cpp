// Copyright 2026 The wearseg Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>
#include <sstream>

#include "wearseg/acquisition.hpp"
#include "wearseg/augment.hpp"
#include "wearseg/bayesopt.hpp"
#include "wearseg/dataio.hpp"
#include "wearseg/dataset_dir.hpp"
#include "wearseg/metrics.hpp"
#include "wearseg/parallel.hpp"
#include "wearseg/run_config.hpp"
#include "wearseg/synth.hpp"
#include "wearseg/training.hpp"
#include "wearseg/unet.hpp"
#include "wearseg/version.hpp"

namespace py = pybind11;
using namespace wearseg;

namespace {

using U8Array = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

GrayImage to_gray(const U8Array& a) {
  if (a.ndim() != 2) throw ConfigError("expected a 2-D uint8 image (H x W)");
  GrayImage img(a.shape(1), a.shape(0));
  std::memcpy(img.pixels.data(), a.data(), img.pixels.size());
  return img;
}

LabelMask to_mask(const U8Array& a) {
  if (a.ndim() != 2) throw ConfigError("expected a 2-D uint8 label mask (H x W)");
  LabelMask m(a.shape(1), a.shape(0));
  std::memcpy(m.classes.data(), a.data(), m.classes.size());
  for (auto c : m.classes)
    if (c >= kNumClasses) throw DataError("label mask values must be below 6");
  return m;
}

U8Array from_bytes(const std::vector<std::uint8_t>& v, std::size_t w, std::size_t h) {
  U8Array a({h, w});
  std::memcpy(a.mutable_data(), v.data(), v.size());
  return a;
}

U8Array from_gray(const GrayImage& g) { return from_bytes(g.pixels, g.width, g.height); }
U8Array from_mask(const LabelMask& m) { return from_bytes(m.classes, m.width, m.height); }

// Accepts H x W or N x H x W uint8 images.
Tensor batch_from_array(const U8Array& a) {
  if (a.ndim() == 2) return image_to_tensor(to_gray(a));
  if (a.ndim() != 3) throw ConfigError("expected images shaped H x W or N x H x W");
  const std::size_t n = a.shape(0), h = a.shape(1), w = a.shape(2);
  std::vector<GrayImage> imgs(n, GrayImage(w, h));
  for (std::size_t i = 0; i < n; ++i) std::memcpy(imgs[i].pixels.data(), a.data(i, 0, 0), w * h);
  std::vector<const GrayImage*> ptrs;
  for (const auto& g : imgs) ptrs.push_back(&g);
  return images_to_tensor(ptrs);
}

py::array_t<float> tensor_to_array(const Tensor& t) {
  py::array_t<float> a(t.shape());
  std::memcpy(a.mutable_data(), t.data().data(), t.numel() * sizeof(float));
  return a;
}

py::object opt(const std::optional<double>& v) {
  return v ? py::object(py::float_(*v)) : py::object(py::none());
}

py::list iou_list(const ClassIou& iou) {
  py::list out;
  for (const auto& v : iou) out.append(opt(v));
  return out;
}

py::dict report_dict(const MetricsReport& r) {
  py::dict d;
  d["iou"] = iou_list(r.iou);
  d["mean_iou"] = opt(r.mean_iou);
  d["pred_counts"] = r.pred_counts;
  d["truth_counts"] = r.truth_counts;
  d["confusion"] = r.confusion;
  d["pixels"] = r.pixels;
  return d;
}

py::list history_list(const std::vector<HistoryRow>& rows) {
  py::list out;
  for (const auto& r : rows) {
    py::dict d;
    d["epoch"] = r.epoch;
    d["train_loss"] = r.train_loss;
    d["val_mean_iou"] = opt(r.val_mean_iou);
    d["val_iou"] = iou_list(r.val_iou);
    out.append(d);
  }
  return out;
}

std::vector<DatasetItem> items_from(const std::vector<U8Array>& images,
                                    const std::vector<U8Array>& masks, const char* prefix) {
  if (images.size() != masks.size()) throw DataError("images and masks differ in count");
  std::vector<DatasetItem> out;
  for (std::size_t i = 0; i < images.size(); ++i)
    out.push_back({std::string(prefix) + std::to_string(i), to_gray(images[i]), to_mask(masks[i])});
  return out;
}

}  // namespace

PYBIND11_MODULE(_wearseg, m) {
  m.doc() = "Punch wear segmentation toolkit";
  m.attr("__version__") = kVersion;
  m.attr("NUM_CLASSES") = kNumClasses;

  auto base = py::register_exception<Error>(m, "WearsegError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());
  py::register_exception<VersionError>(m, "VersionError", base.ptr());
  py::register_exception<RangeError>(m, "RangeError", base.ptr());

  m.def("set_max_threads", &set_max_threads, py::arg("n"));

  // -- network --------------------------------------------------------------
  py::class_<UNetConfig>(m, "UNetConfig")
      .def(py::init([](const std::string& phi, double delta, std::size_t base_filters,
                       std::size_t depth, std::vector<double> base_dropout) {
             UNetConfig c;
             c.phi = Rational::parse(phi);
             c.delta = delta;
             c.base_filters = base_filters;
             c.depth = depth;
             c.base_dropout = std::move(base_dropout);
             c.validate();
             return c;
           }),
           py::arg("phi") = "1/16", py::arg("delta") = 0.48, py::arg("base_filters") = 64,
           py::arg("depth") = 4, py::arg("base_dropout") = std::vector<double>{0.1, 0.1, 0.2, 0.2, 0.3})
      .def_property_readonly("phi", [](const UNetConfig& c) { return c.phi.str(); })
      .def_readonly("delta", &UNetConfig::delta)
      .def_readonly("base_filters", &UNetConfig::base_filters)
      .def_readonly("depth", &UNetConfig::depth)
      .def("widths", &UNetConfig::widths)
      .def("__repr__", [](const UNetConfig& c) {
        return "UNetConfig(phi='" + c.phi.str() + "', delta=" + std::to_string(c.delta) + ")";
      });

  m.def("param_count", [](const UNetConfig& c) { return param_count(c); }, py::arg("config"));
  m.def(
      "param_count",
      [](const std::string& phi) {
        UNetConfig c;
        c.phi = Rational::parse(phi);
        return param_count(c);
      },
      py::arg("phi"));

  py::class_<UNet>(m, "UNet")
      .def_static("build", &UNet::build, py::arg("config"), py::arg("seed") = 0)
      .def_static(
          "load", [](const std::filesystem::path& p) { return load_checkpoint(p).model; },
          py::arg("path"))
      .def_property_readonly("config", &UNet::config)
      .def("param_count", &UNet::materialized_param_count)
      .def(
          "save",
          [](const UNet& net, const std::filesystem::path& p, std::int64_t epoch, std::uint64_t seed) {
            save_checkpoint(net, {epoch, seed, {}}, p);
          },
          py::arg("path"), py::arg("epoch") = 0, py::arg("seed") = 0)
      .def(
          "forward",
          [](const UNet& net, const U8Array& images) {
            return tensor_to_array(net.forward(batch_from_array(images), false));
          },
          py::arg("images"), "Class probabilities, N x 6 x H x W, for uint8 images.")
      .def(
          "predict",
          [](const UNet& net, const U8Array& images) {
            const auto masks = net.predict(batch_from_array(images));
            if (images.ndim() == 2) return from_mask(masks.front());
            const std::size_t h = masks.front().height, w = masks.front().width;
            U8Array out({masks.size(), h, w});
            for (std::size_t i = 0; i < masks.size(); ++i)
              std::memcpy(out.mutable_data(i, 0, 0), masks[i].classes.data(), w * h);
            return out;
          },
          py::arg("images"), "Argmax label masks for H x W or N x H x W uint8 images.");

  // -- synthetic data -------------------------------------------------------
  py::class_<synth::SyntheticSpec>(m, "SyntheticSpec")
      .def(py::init<>())
      .def_readwrite("width", &synth::SyntheticSpec::width)
      .def_readwrite("height", &synth::SyntheticSpec::height)
      .def_readwrite("band_fractions", &synth::SyntheticSpec::band_fractions)
      .def_readwrite("band_jitter", &synth::SyntheticSpec::band_jitter)
      .def_readwrite("wear_level", &synth::SyntheticSpec::wear_level)
      .def_readwrite("max_dot_density", &synth::SyntheticSpec::max_dot_density)
      .def_readwrite("dot_radius_min", &synth::SyntheticSpec::dot_radius_min)
      .def_readwrite("dot_radius_max", &synth::SyntheticSpec::dot_radius_max)
      .def_readwrite("adhesive_gray", &synth::SyntheticSpec::adhesive_gray)
      .def_readwrite("groove_count", &synth::SyntheticSpec::groove_count)
      .def_readwrite("groove_amplitude", &synth::SyntheticSpec::groove_amplitude)
      .def_readwrite("groove_darkness", &synth::SyntheticSpec::groove_darkness)
      .def_readwrite("contamination_blobs", &synth::SyntheticSpec::contamination_blobs)
      .def_readwrite("gray_levels", &synth::SyntheticSpec::gray_levels)
      .def_readwrite("noise_sigma", &synth::SyntheticSpec::noise_sigma)
      .def_readwrite("seed", &synth::SyntheticSpec::seed)
      .def("validate", &synth::SyntheticSpec::validate);

  m.def(
      "generate",
      [](const synth::SyntheticSpec& spec) {
        auto s = synth::generate(spec);
        return py::make_tuple(from_gray(s.image), from_mask(s.mask));
      },
      py::arg("spec"), "One (image, mask) pair of uint8 arrays.");

  m.def(
      "generate_sequence",
      [](const synth::SyntheticSpec& spec, std::size_t num_frames, std::uint64_t stroke_step,
         double wear_tau, std::vector<std::uint64_t> cleaning_strokes) {
        synth::SequenceSpec q;
        q.num_frames = num_frames;
        q.stroke_step = stroke_step;
        q.wear_tau = wear_tau;
        q.cleaning_strokes = std::move(cleaning_strokes);
        py::list out;
        synth::generate_sequence(q, spec, [&](const synth::Frame& f) {
          out.append(py::make_tuple(f.stroke, from_gray(f.sample.image), from_mask(f.sample.mask)));
        });
        return out;
      },
      py::arg("spec"), py::arg("num_frames") = 200, py::arg("stroke_step") = 500,
      py::arg("wear_tau") = 15000.0, py::arg("cleaning_strokes") = std::vector<std::uint64_t>{},
      "List of (stroke, image, mask) tuples.");

  m.def(
      "write_synthetic_dataset",
      [](const std::filesystem::path& dir, std::size_t count, std::uint64_t seed,
         const synth::SyntheticSpec& spec) {
        const auto gen = make_synthetic_dataset(spec, count, {0.6, 0.2, 0.2}, seed);
        write_dataset(dir, gen.data, ClassPalette::standard());
        return py::make_tuple(gen.split.train.size(), gen.split.validation.size(),
                              gen.split.test.size());
      },
      py::arg("dir"), py::arg("count") = 64, py::arg("seed") = 0,
      py::arg("spec") = synth::SyntheticSpec{},
      "Writes images/, masks/ and split.tsv; returns (train, validation, test) sizes.");

  // -- augmentation ---------------------------------------------------------
  m.def(
      "augment_pair",
      [](const U8Array& image, const U8Array& mask, std::uint64_t seed) {
        AugmentSpec spec;
        Rng rng(seed);
        auto out = augment_pair(to_gray(image), to_mask(mask), spec, rng);
        return py::make_tuple(from_gray(out.image), from_mask(out.mask));
      },
      py::arg("image"), py::arg("mask"), py::arg("seed") = 0);

  // -- metrics --------------------------------------------------------------
  m.def(
      "iou",
      [](const U8Array& pred, const U8Array& truth, std::size_t cls) {
        return opt(iou(to_mask(pred), to_mask(truth), cls));
      },
      py::arg("pred"), py::arg("truth"), py::arg("cls"));
  m.def(
      "confusion_matrix",
      [](const U8Array& pred, const U8Array& truth) {
        const auto cm = confusion_matrix(to_mask(pred), to_mask(truth));
        py::array_t<std::uint64_t> a({kNumClasses, kNumClasses});
        for (std::size_t i = 0; i < kNumClasses; ++i)
          for (std::size_t j = 0; j < kNumClasses; ++j) a.mutable_at(i, j) = cm[i][j];
        return a;
      },
      py::arg("pred"), py::arg("truth"), "counts[truth][pred]");
  m.def(
      "evaluate",
      [](const U8Array& pred, const U8Array& truth) {
        return report_dict(evaluate(to_mask(pred), to_mask(truth)));
      },
      py::arg("pred"), py::arg("truth"));
  m.def(
      "pearson",
      [](const std::vector<double>& a, const std::vector<double>& b) { return opt(pearson(a, b)); },
      py::arg("a"), py::arg("b"));

  // -- training -------------------------------------------------------------
  m.def(
      "train",
      [](const UNetConfig& net, const std::vector<U8Array>& train_images,
         const std::vector<U8Array>& train_masks, const std::vector<U8Array>& val_images,
         const std::vector<U8Array>& val_masks, std::size_t epochs, std::size_t batch_size,
         double learning_rate, std::uint64_t seed, std::array<double, kNumClasses> class_weights) {
        Dataset d;
        d.train = items_from(train_images, train_masks, "train_");
        d.validation = items_from(val_images, val_masks, "val_");
        TrainConfig tc;
        tc.epochs = epochs;
        tc.batch_size = batch_size;
        tc.learning_rate = learning_rate;
        tc.seed = seed;
        tc.class_weights = class_weights;
        TrainResult r = [&] {
          py::gil_scoped_release release;
          return train(UNet::build(net, seed), d, tc);
        }();
        py::dict out;
        out["model"] = r.model;
        out["best_model"] = r.best_model;
        out["history"] = history_list(r.history);
        out["best_val_mean_iou"] = opt(r.best_val_mean_iou);
        out["best_epoch"] = r.best_epoch;
        return out;
      },
      py::arg("net"), py::arg("train_images"), py::arg("train_masks"), py::arg("val_images"),
      py::arg("val_masks"), py::arg("epochs") = 60, py::arg("batch_size") = 4,
      py::arg("learning_rate") = 5.4e-4, py::arg("seed") = 0,
      py::arg("class_weights") = std::array<double, kNumClasses>{1, 1, 1, 1, 1, 1});

  m.def(
      "run_config_text",
      [](const std::string& text, const std::vector<std::string>& overrides) {
        RunConfig c;
        c.load_text(text, "<string>");
        for (const auto& o : overrides) c.apply_override(o);
        return py::make_tuple(c.canonical_text(), c.hash());
      },
      py::arg("text") = "", py::arg("overrides") = std::vector<std::string>{},
      "Validates a configuration; returns (canonical text, FNV-1a hash).");

  // -- acquisition ----------------------------------------------------------
  py::class_<acquisition::PressKinematics>(m, "PressKinematics")
      .def(py::init([](double stroke_length, double spm, double exposure, double offset) {
             acquisition::PressKinematics k{stroke_length, spm, exposure, offset};
             k.validate();
             return k;
           }),
           py::arg("stroke_length") = 0.035, py::arg("strokes_per_minute") = 600.0,
           py::arg("exposure") = 50e-6, py::arg("trigger_offset") = 0.0)
      .def_readwrite("stroke_length", &acquisition::PressKinematics::stroke_length)
      .def_readwrite("strokes_per_minute", &acquisition::PressKinematics::strokes_per_minute)
      .def_readwrite("exposure", &acquisition::PressKinematics::exposure)
      .def_readwrite("trigger_offset", &acquisition::PressKinematics::trigger_offset);
  m.def("exposure_displacement", &acquisition::exposure_displacement, py::arg("kinematics"));
  m.def("solve_trigger_offset", &acquisition::solve_trigger_offset, py::arg("kinematics"),
        py::arg("target"));
  m.def("blur_in_pixels", &acquisition::blur_in_pixels, py::arg("kinematics"),
        py::arg("field_of_view"), py::arg("image_width_px"));

  // -- Bayesian optimization ------------------------------------------------
  m.def(
      "bayes_opt",
      [](const std::function<double(double, double)>& objective, Point2 lower, Point2 upper,
         std::size_t initial_samples, std::size_t iterations, std::uint64_t seed) {
        BayesOptSpec spec;
        spec.lower = lower;
        spec.upper = upper;
        spec.initial_samples = initial_samples;
        spec.iterations = iterations;
        spec.seed = seed;
        const auto r = bayes_opt(spec, [&](const Point2& p) { return objective(p[0], p[1]); });
        py::list trace;
        for (const auto& row : r.trace) {
          py::dict d;
          d["point"] = row.point;
          d["value"] = row.value;
          d["incumbent"] = row.incumbent;
          d["initial"] = row.initial;
          trace.append(d);
        }
        py::dict out;
        out["best_point"] = r.best_point;
        out["best_value"] = r.best_value;
        out["trace"] = trace;
        return out;
      },
      py::arg("objective"), py::arg("lower") = Point2{1.0, 1.0}, py::arg("upper") = Point2{10.0, 10.0},
      py::arg("initial_samples") = 5, py::arg("iterations") = 20, py::arg("seed") = 0);
}
