#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>

#include "aquaperc/calib.hpp"
#include "aquaperc/cli.hpp"
#include "aquaperc/config.hpp"
#include "aquaperc/guide.hpp"
#include "aquaperc/harness.hpp"
#include "aquaperc/image_io.hpp"
#include "aquaperc/imstats.hpp"
#include "aquaperc/learn.hpp"
#include "aquaperc/optics.hpp"
#include "aquaperc/phase.hpp"
#include "aquaperc/render.hpp"

namespace py = pybind11;
using namespace aquaperc;

namespace {

py::array_t<float> image_to_numpy(const ImageF& img) {
    py::array_t<float> arr({img.height, img.width, 3});
    std::memcpy(arr.mutable_data(), img.data.data(), img.data.size() * sizeof(float));
    return arr;
}

ImageF numpy_to_image(const py::array_t<float, py::array::c_style | py::array::forcecast>& arr) {
    if (arr.ndim() != 3 || arr.shape(2) != 3)
        throw std::invalid_argument("expected an image array of shape (H, W, 3)");
    ImageF img(static_cast<int>(arr.shape(1)), static_cast<int>(arr.shape(0)));
    std::memcpy(img.data.data(), arr.data(), img.data.size() * sizeof(float));
    return img;
}

py::tuple rgb_tuple(const Rgb& v) { return py::make_tuple(v.r, v.g, v.b); }

}  // namespace

PYBIND11_MODULE(_aquaperc, m) {
    m.doc() = "Underwater imaging simulation and active perception core";

    // --- optics ---------------------------------------------------------
    m.def("list_water_types", &optics::list_water_types);
    m.def("default_data_dir", &optics::default_data_dir);
    m.def(
        "wideband_from_type",
        [](const std::string& type_id, const std::string& data_dir) {
            auto table = optics::load_water_type(
                type_id, data_dir.empty() ? optics::default_data_dir() : data_dir);
            auto [a, b] = optics::wideband_from_table(table, optics::BandRanges{});
            return py::make_tuple(rgb_tuple(a), rgb_tuple(b));
        },
        py::arg("water_type"), py::arg("data_dir") = "",
        "Band-averaged (absorption, scattering) for a bundled water type");

    // --- phase ----------------------------------------------------------
    m.def("eval_hg", &phase::eval_hg, py::arg("g"), py::arg("psi"));
    m.def("eval_ff", &phase::eval_ff, py::arg("n"), py::arg("mu"), py::arg("psi"));
    m.def("backscatter_fraction", &phase::backscatter_fraction, py::arg("n"), py::arg("mu"));
    m.def("mu_from_backscatter", &phase::mu_from_backscatter, py::arg("n"), py::arg("backscatter"));
    m.def("hg_g_for_backscatter", &phase::hg_g_for_backscatter, py::arg("backscatter"));

    py::class_<phase::PhaseSpec, std::shared_ptr<phase::PhaseSpec>>(m, "PhaseSpec")
        .def_static(
            "ff",
            [](double n, double mu, int n_table) {
                return std::make_shared<phase::PhaseSpec>(
                    phase::PhaseSpec::build(phase::FfParams{n, mu}, n_table));
            },
            py::arg("n"), py::arg("mu"), py::arg("n_table") = 2048)
        .def_static(
            "hg",
            [](double g, int n_table) {
                return std::make_shared<phase::PhaseSpec>(
                    phase::PhaseSpec::build(phase::HgParams{g}, n_table));
            },
            py::arg("g"), py::arg("n_table") = 2048)
        .def("evaluate", &phase::PhaseSpec::evaluate)
        .def("cdf", &phase::PhaseSpec::cdf)
        .def("sample_angle", &phase::PhaseSpec::sample_angle);

    // --- scene / render ---------------------------------------------------
    py::class_<config::SceneConfig>(m, "SceneConfig")
        .def_static("from_file", &config::load_scene, py::arg("path"))
        .def_static(
            "from_string",
            [](const std::string& text) {
                return config::scene_from_config(config::Config::parse_string(text));
            },
            py::arg("text"))
        .def_property(
            "depth", [](const config::SceneConfig& sc) { return sc.scene.depth; },
            [](config::SceneConfig& sc, double v) { sc.scene.depth = v; })
        .def_property(
            "distance", [](const config::SceneConfig& sc) { return sc.scene.distance; },
            [](config::SceneConfig& sc, double v) { sc.scene.distance = v; })
        .def_property(
            "light", [](const config::SceneConfig& sc) { return sc.scene.light; },
            [](config::SceneConfig& sc, double v) { sc.scene.light = v; })
        .def_property(
            "look",
            [](const config::SceneConfig& sc) {
                return sc.scene.look == render::LookDir::up ? "up" : "horizontal";
            },
            [](config::SceneConfig& sc, const std::string& v) {
                sc.scene.look = v == "up" ? render::LookDir::up : render::LookDir::horizontal;
            });

    m.def(
        "render",
        [](const config::SceneConfig& sc, int spp, uint64_t seed, bool with_noise) {
            ImageF img = render::render(sc.scene, spp, seed);
            if (with_noise) img = render::apply_noise(img, sc.noise, seed + 1);
            return image_to_numpy(img);
        },
        py::arg("scene"), py::arg("spp") = 64, py::arg("seed") = 1, py::arg("with_noise") = false,
        "Path-traced image as a (H, W, 3) float32 array");
    m.def(
        "apply_noise",
        [](const py::array_t<float, py::array::c_style | py::array::forcecast>& arr, double alpha,
           double sigma, bool clip, double saturation, uint64_t seed) {
            return image_to_numpy(render::apply_noise(
                numpy_to_image(arr), render::NoiseParams{alpha, sigma, clip, saturation}, seed));
        },
        py::arg("image"), py::arg("poisson_scale") = 0.0, py::arg("gaussian_sigma") = 0.0,
        py::arg("clip") = true, py::arg("saturation") = 1.0, py::arg("seed") = 1);

    m.def("write_pfm", [](const py::array_t<float, py::array::c_style | py::array::forcecast>& a,
                          const std::string& path) { io::write_pfm(numpy_to_image(a), path); });
    m.def("read_pfm", [](const std::string& path) { return image_to_numpy(io::read_pfm(path)); });
    m.def("write_png", [](const py::array_t<float, py::array::c_style | py::array::forcecast>& a,
                          const std::string& path) { io::write_png(numpy_to_image(a), path); });

    // --- image statistics -------------------------------------------------
    m.def("channel_mean", [](const py::array_t<float, py::array::c_style | py::array::forcecast>& a) {
        return rgb_tuple(imstats::channel_mean(numpy_to_image(a)));
    });
    m.def(
        "patch_contrast",
        [](const py::array_t<float, py::array::c_style | py::array::forcecast>& a, int cols,
           int rows) {
            ImageF img = numpy_to_image(a);
            return rgb_tuple(imstats::patch_contrast(img, imstats::PatchGrid::fit(img, cols, rows)));
        },
        py::arg("image"), py::arg("cols") = 10, py::arg("rows") = 6);
    m.def("whole_stdev", [](const py::array_t<float, py::array::c_style | py::array::forcecast>& a) {
        return rgb_tuple(imstats::whole_stdev(numpy_to_image(a)));
    });
    m.def(
        "clahe",
        [](const py::array_t<float, py::array::c_style | py::array::forcecast>& a,
           double clip_limit, int tiles) {
            return image_to_numpy(imstats::clahe(numpy_to_image(a), clip_limit, tiles));
        },
        py::arg("image"), py::arg("clip_limit") = 2.0, py::arg("tiles") = 8);
    m.def("mean_gradient_y",
          [](const py::array_t<float, py::array::c_style | py::array::forcecast>& a) {
              return imstats::mean_gradient_y(numpy_to_image(a));
          });
    m.def("coverage_area", &imstats::coverage_area, py::arg("d"), py::arg("fov_h"),
          py::arg("aspect"), py::arg("usable"));
    m.def(
        "match_consecutive",
        [](const py::array_t<float, py::array::c_style | py::array::forcecast>& a,
           const py::array_t<float, py::array::c_style | py::array::forcecast>& b) {
            auto report = imstats::match_consecutive(numpy_to_image(a), numpy_to_image(b));
            py::dict d;
            d["n_features"] = report.n_features;
            d["n_matches"] = report.n_matches;
            d["n_inliers"] = report.n_inliers;
            d["inlier_ratio"] = report.inlier_ratio;
            d["tx"] = report.tx;
            d["ty"] = report.ty;
            return d;
        },
        py::arg("a"), py::arg("b"));

    // --- calibration --------------------------------------------------------
    py::class_<calib::CalibProfiles>(m, "CalibProfiles")
        .def_static(
            "load",
            [](const std::string& path) { return calib::load_profiles(path).first; },
            py::arg("path"))
        .def_property_readonly("depth_grid",
                               [](const calib::CalibProfiles& p) { return p.depth_grid; })
        .def_property_readonly("dist_grid",
                               [](const calib::CalibProfiles& p) { return p.dist_grid; })
        .def("lookup", [](const calib::CalibProfiles& p, const std::string& which, double coord) {
            calib::ProfileKind kind = which == "kz" ? calib::ProfileKind::kz
                                      : which == "kc_on" ? calib::ProfileKind::kc_on
                                                         : calib::ProfileKind::kc_off;
            return rgb_tuple(calib::lookup(p, kind, coord));
        });
    m.def(
        "calibrate",
        [](const config::SceneConfig& sc, const std::vector<double>& depths,
           const std::vector<double>& distances, int spp, uint64_t seed, const std::string& save) {
            calib::CalibRunOptions opts;
            opts.spp = spp;
            opts.noise = sc.noise;
            calib::CalibProfiles p =
                calib::run_calibration(sc.scene, depths, distances, spp, seed, opts);
            calib::CalibSummary s = calib::summarize(p);
            if (!save.empty()) calib::save_profiles(p, s, save);
            py::dict d;
            d["profiles"] = p;
            d["kz_decay"] = rgb_tuple(s.kz_decay);
            d["kc_on_decay"] = rgb_tuple(s.kc_on_decay);
            d["kc_off_decay"] = rgb_tuple(s.kc_off_decay);
            return d;
        },
        py::arg("scene"), py::arg("depths"), py::arg("distances"), py::arg("spp") = 32,
        py::arg("seed") = 1, py::arg("save") = "");

    // --- learning -------------------------------------------------------------
    py::class_<learn::MlpModel>(m, "MlpModel")
        .def_static("load", &learn::MlpModel::load, py::arg("path"))
        .def("save", &learn::MlpModel::save, py::arg("path"))
        .def_property_readonly("input_dim", &learn::MlpModel::input_dim)
        .def("predict", [](const learn::MlpModel& model, const std::vector<double>& x) {
            return rgb_tuple(model.predict(x));
        });
    m.def(
        "train_on_csv",
        [](const std::string& csv_path, int epochs, uint64_t seed, bool use_calibration,
           const std::string& save) {
            auto rows = learn::read_dataset_csv(csv_path);
            learn::TrainConfig cfg;
            if (epochs > 0) cfg.epochs = epochs;
            cfg.seed = seed;
            cfg.use_calibration = use_calibration;
            auto [model, metrics] = learn::train(rows, cfg);
            if (!save.empty()) model.save(save);
            py::dict d;
            d["model"] = model;
            d["train_mae"] = metrics.train_mae;
            d["test_mae"] = metrics.test_mae;
            return d;
        },
        py::arg("csv_path"), py::arg("epochs") = 0, py::arg("seed") = 1,
        py::arg("use_calibration") = true, py::arg("save") = "");

    // --- guidance -----------------------------------------------------------
    m.def(
        "suggest",
        [](const learn::MlpModel& model, const calib::CalibProfiles& profiles, double dist,
           double light, double depth, py::sequence img_mean, py::sequence img_std,
           double lambda_c, double lambda_d, double kappa_b, double kappa_c, double d_min,
           double d_max) {
            guide::GuideState state;
            state.dist = dist;
            state.light = light;
            state.depth = depth;
            state.img_mean = {img_mean[0].cast<double>(), img_mean[1].cast<double>(),
                              img_mean[2].cast<double>()};
            state.img_std = {img_std[0].cast<double>(), img_std[1].cast<double>(),
                             img_std[2].cast<double>()};
            guide::GuideParams params;
            params.lambda_c = lambda_c;
            params.lambda_d = lambda_d;
            params.kappa_b = kappa_b;
            params.kappa_c = kappa_c;
            params.d_min = d_min;
            params.d_max = d_max;
            guide::Suggestion s =
                guide::suggest(state, calib::summarize(profiles), profiles, model, params);
            py::dict d;
            d["delta_d"] = s.delta_d;
            d["delta_l"] = s.delta_l;
            d["y"] = s.y;
            d["m_c"] = s.m_c;
            d["m_d"] = s.m_d;
            return d;
        },
        py::arg("model"), py::arg("profiles"), py::arg("dist"), py::arg("light"), py::arg("depth"),
        py::arg("img_mean"), py::arg("img_std"), py::arg("lambda_c") = 1.0,
        py::arg("lambda_d") = 1.0, py::arg("kappa_b") = 8.0, py::arg("kappa_c") = 1.0,
        py::arg("d_min") = 0.5, py::arg("d_max") = 3.0);
    m.def(
        "nelder_mead_2d",
        [](const std::function<double(double, double)>& f, double x0, double y0, int max_iters,
           double tol) {
            guide::NmResult r = guide::nelder_mead_2d(
                f, {{{x0, y0}, {x0 + 0.25, y0}, {x0, y0 + 0.1}}}, {1.0, 1.0},
                guide::NmOptions{max_iters, tol});
            py::dict d;
            d["x"] = py::make_tuple(r.x[0], r.x[1]);
            d["value"] = r.value;
            d["iterations"] = r.iterations;
            d["converged"] = r.converged;
            return d;
        },
        py::arg("f"), py::arg("x0") = 0.0, py::arg("y0") = 0.0, py::arg("max_iters") = 200,
        py::arg("tol") = 1e-3);

    // --- harness -------------------------------------------------------------
    m.def(
        "simulate",
        [](const std::string& scenario_path, const std::string& policies,
           const std::string& out_dir, const std::string& model_path, uint64_t seed) {
            std::vector<std::string> args{"simulate", "--scenario", scenario_path, "--policies",
                                          policies,   "--out",      out_dir,       "--seed",
                                          std::to_string(seed)};
            if (!model_path.empty()) {
                args.push_back("--model");
                args.push_back(model_path);
            }
            return cli::dispatch(args);
        },
        py::arg("scenario_path"), py::arg("policies") = "fixed:1:0.5,fixed:2:0.25,gradient",
        py::arg("out_dir") = "report", py::arg("model_path") = "", py::arg("seed") = 1);
}
