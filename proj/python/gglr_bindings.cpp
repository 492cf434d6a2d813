#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "gglr/gradient_prior.hpp"
#include "gglr/pipeline.hpp"
#include "gglr/selftest.hpp"
#include "gglr/solvers.hpp"

namespace py = pybind11;
using namespace gglr;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> to_vec(const Array& a) {
  return {a.data(), a.data() + a.size()};
}

Array to_array(const std::vector<double>& v) {
  Array a({static_cast<py::ssize_t>(v.size())});
  std::copy(v.begin(), v.end(), a.mutable_data());
  return a;
}

Array to_matrix(const std::vector<double>& v, int rows, int cols) {
  Array a({static_cast<py::ssize_t>(rows), static_cast<py::ssize_t>(cols)});
  std::copy(v.begin(), v.end(), a.mutable_data());
  return a;
}

Array rect_to_array(const RectSparse& r) { return to_matrix(r.dense(), r.rows, r.cols); }

SparseSym sparse_from_dense(const Array& a, bool symmetric) {
  if (a.ndim() != 2 || a.shape(0) != a.shape(1))
    throw std::invalid_argument("expected a square matrix");
  const int n = static_cast<int>(a.shape(0));
  std::vector<Triplet> t;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double v = a.at(i, j);
      if (v != 0.0) t.push_back({i, j, v});
    }
  return SparseSym::from_triplets(n, std::move(t), symmetric);
}

Image image_from_array(const Array& a) {
  if (a.ndim() == 2) {
    Image img(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)), 1);
    std::copy(a.data(), a.data() + a.size(), img.data.begin());
    return img;
  }
  if (a.ndim() == 3 && a.shape(2) == 3) {
    Image img(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)), 3);
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x)
        for (int ch = 0; ch < 3; ++ch) img.at(ch, y, x) = a.at(y, x, ch);
    return img;
  }
  throw std::invalid_argument("expected an (H, W) or (H, W, 3) array");
}

py::array image_to_array(const Image& img) {
  if (img.channels == 1) {
    Array a({static_cast<py::ssize_t>(img.height), static_cast<py::ssize_t>(img.width)});
    std::copy(img.data.begin(), img.data.end(), a.mutable_data());
    return a;
  }
  Array a({static_cast<py::ssize_t>(img.height), static_cast<py::ssize_t>(img.width),
           static_cast<py::ssize_t>(3)});
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int ch = 0; ch < 3; ++ch) *a.mutable_data(y, x, ch) = img.at(ch, y, x);
  return a;
}

SolverFamily family_from_aux(int aux) {
  switch (aux) {
    case 0:
      return SolverFamily::Direct;
    case 1:
      return SolverFamily::Aux1;
    case 2:
      return SolverFamily::Aux2;
    case 4:
      return SolverFamily::Aux4;
    default:
      throw std::invalid_argument("aux must be 0, 1, 2 or 4");
  }
}

struct SolverSettings {
  int aux = 1;
  int layers = 10;
  int cg_iters = 10;
  double cg_tol = 1e-8;
  double rho = 1.0;
  double rho_tilde = 1.0;
  double mu = 0.5;
  double mu_tilde = 0.5;
  double sigma_f = 1.0;
  double sigma_x = 0.2;
  double sigma_a = 0.2;
  bool normalized = false;
  bool relearn = true;
  std::string prior = "gglr";
  int patch = 0;
  int stride = 0;
  int threads = 0;
};

AdmmConfig to_cfg(const SolverSettings& s) {
  AdmmConfig cfg;
  cfg.family = family_from_aux(s.aux);
  cfg.rho = s.rho;
  cfg.rho_tilde = s.rho_tilde;
  cfg.outer_layers = s.layers;
  cfg.cg_iters = s.cg_iters;
  cfg.cg_tol = s.cg_tol;
  cfg.relearn_graphs = s.relearn;
  return cfg;
}

RestoreParams to_params(const SolverSettings& s) {
  RestoreParams p;
  p.kernel = {s.sigma_f, s.sigma_x, s.sigma_a};
  p.mu = s.mu;
  p.mu_tilde = s.mu_tilde;
  p.normalization = s.normalized ? Normalization::RandomWalk : Normalization::Combinatorial;
  p.prior = s.prior == "glr" ? PriorKind::Glr : PriorKind::Gglr;
  p.patch_size = s.patch;
  p.stride = s.stride;
  p.threads = s.threads;
  return p;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Gradient graph Laplacian regularized image restoration";

  // ---------------------------------------------------------------- graphs
  m.def(
      "laplacian",
      [](int nodes, const std::vector<std::tuple<int, int, double>>& edges) {
        Graph g;
        g.node_count = nodes;
        for (const auto& [i, j, w] : edges) g.edges.push_back({i, j, w});
        const SparseSym L = laplacian(g);
        return to_matrix(L.dense(), L.dim, L.dim);
      },
      py::arg("nodes"), py::arg("edges"),
      "Combinatorial Laplacian of an undirected weighted graph (dense).");

  m.def(
      "glr",
      [](const Array& L, const Array& x) { return sparse_from_dense(L, true).quad(to_vec(x)); },
      py::arg("L"), py::arg("x"), "Quadratic form x^T L x.");

  m.def(
      "normalized_weights",
      [](const Array& d) { return to_array(normalized_weights(to_vec(d))); }, py::arg("sq_dists"),
      "Softmax weights over negative squared distances.");

  m.def(
      "random_walk_laplacian",
      [](const Array& L) {
        const SparseSym rw = random_walk_laplacian(sparse_from_dense(L, true));
        return to_matrix(rw.dense(), rw.dim, rw.dim);
      },
      py::arg("L"));

  m.def(
      "spectrum",
      [](const Array& L, int k) {
        const auto pairs = spectrum(sparse_from_dense(L, true), k);
        const int n = static_cast<int>(pairs[0].vector.size());
        Array values({static_cast<py::ssize_t>(pairs.size())});
        Array vectors({static_cast<py::ssize_t>(n), static_cast<py::ssize_t>(pairs.size())});
        for (size_t q = 0; q < pairs.size(); ++q) {
          *values.mutable_data(q) = pairs[q].value;
          for (int i = 0; i < n; ++i) *vectors.mutable_data(i, q) = pairs[q].vector[i];
        }
        return py::make_tuple(values, vectors);
      },
      py::arg("L"), py::arg("k"),
      "k smallest eigenpairs; returns (values, column eigenvectors).");

  m.def(
      "gft", [](const Array& L, const Array& x) { return to_array(gft(sparse_from_dense(L, true), to_vec(x))); },
      py::arg("L"), py::arg("x"), "Graph Fourier transform V^T x.");

  m.def(
      "tse_filter",
      [](const Array& L_rw, double mu) {
        const DenseMat f = tse_filter(sparse_from_dense(L_rw, false), mu);
        return to_matrix(f.a, f.rows, f.cols);
      },
      py::arg("L_rw"), py::arg("mu"),
      "First-order truncated approximation of (I + mu L_rw)^-1.");

  // ------------------------------------------------------- gradient prior
  m.def("grad_op", [](int n) { return rect_to_array(grad_op(n)); }, py::arg("n"));
  m.def("interleave_grad_op", [](int n) { return rect_to_array(interleave_grad_op(n)); },
        py::arg("n"));
  m.def("row_selector", [](int n, int k) { return rect_to_array(row_selector(n, k)); },
        py::arg("n"), py::arg("k"));
  m.def("col_selector", [](int n, int k) { return rect_to_array(col_selector(n, k)); },
        py::arg("n"), py::arg("k"));
  m.def("col_pair_selector",
        [](int n, int k) { return rect_to_array(col_pair_selector(n, k)); }, py::arg("n"),
        py::arg("k"));
  m.def("row_pair_selector",
        [](int n, int k) { return rect_to_array(row_pair_selector(n, k)); }, py::arg("n"),
        py::arg("k"));

  m.def(
      "build_prior",
      [](const Array& patch, double mu, double mu_tilde, bool normalized, double sigma_f,
         double sigma_x, double sigma_a, int neighbor_radius) {
        if (patch.ndim() != 2 || patch.shape(0) != patch.shape(1))
          throw std::invalid_argument("expected a square (N, N) patch");
        const int side = static_cast<int>(patch.shape(0));
        const std::vector<double> x = to_vec(patch);
        const FeatureField f = compute_features(x, side);
        PriorOptions opts;
        opts.mu = mu;
        opts.mu_tilde = mu_tilde;
        opts.normalization = normalized ? Normalization::RandomWalk : Normalization::Combinatorial;
        opts.neighbor_radius = neighbor_radius;
        const GngPrior prior = build_prior(x, side, f, {sigma_f, sigma_x, sigma_a}, opts);
        return py::make_tuple(to_matrix(prior.L_inline.dense(), side * side, side * side),
                              to_matrix(prior.L_cross.dense(), side * side, side * side));
      },
      py::arg("patch"), py::arg("mu") = 0.5, py::arg("mu_tilde") = 0.5,
      py::arg("normalized") = false, py::arg("sigma_f") = 1.0, py::arg("sigma_x") = 0.2,
      py::arg("sigma_a") = 0.2, py::arg("neighbor_radius") = 1,
      "Aggregate GNG Laplacians (L_inline, L_cross) for a patch (dense).");

  m.def(
      "gglr",
      [](const Array& L_inline, const Array& L_cross, const Array& x, double mu,
         double mu_tilde) {
        GngPrior prior;
        prior.L_inline = sparse_from_dense(L_inline, true);
        prior.L_cross = sparse_from_dense(L_cross, true);
        prior.mu = mu;
        prior.mu_tilde = mu_tilde;
        return gglr::gglr(prior, to_vec(x));
      },
      py::arg("L_inline"), py::arg("L_cross"), py::arg("x"), py::arg("mu") = 0.5,
      py::arg("mu_tilde") = 0.5, "mu x^T L x + mu~ x^T L~ x.");

  // ------------------------------------------------------------ formation
  m.def(
      "make_mask",
      [](int n2, double keep_fraction, std::uint64_t seed) {
        const auto keep = make_mask(n2, keep_fraction, seed);
        py::array_t<std::uint8_t> a({static_cast<py::ssize_t>(keep.size())});
        std::copy(keep.begin(), keep.end(), a.mutable_data());
        return a;
      },
      py::arg("n2"), py::arg("keep_fraction"), py::arg("seed") = 0);

  m.def(
      "add_awgn",
      [](const Array& x, double sigma, std::uint64_t seed) {
        return to_array(add_awgn(to_vec(x), {sigma, seed}));
      },
      py::arg("x"), py::arg("sigma"), py::arg("seed") = 0,
      "Add AWGN with sigma on the 0-255 scale to a [0,1] signal.");

  m.def(
      "make_gaussian_kernel",
      [](int size, double std) {
        const Stencil k = make_gaussian_kernel(size, std);
        return to_matrix(k.vals, k.rows, k.cols);
      },
      py::arg("size"), py::arg("std") = 2.0);

  // -------------------------------------------------------------- metrics
  m.def(
      "psnr", [](const Array& a, const Array& b) { return psnr(image_from_array(a), image_from_array(b)); },
      py::arg("a"), py::arg("b"), "PSNR in dB on the [0,1] scale, capped at 99.");
  m.def(
      "ssim", [](const Array& a, const Array& b) { return ssim(image_from_array(a), image_from_array(b)); },
      py::arg("a"), py::arg("b"));

  // -------------------------------------------------------------- solvers
  py::class_<SolverSettings>(m, "SolverSettings")
      .def(py::init<>())
      .def_readwrite("aux", &SolverSettings::aux)
      .def_readwrite("layers", &SolverSettings::layers)
      .def_readwrite("cg_iters", &SolverSettings::cg_iters)
      .def_readwrite("cg_tol", &SolverSettings::cg_tol)
      .def_readwrite("rho", &SolverSettings::rho)
      .def_readwrite("rho_tilde", &SolverSettings::rho_tilde)
      .def_readwrite("mu", &SolverSettings::mu)
      .def_readwrite("mu_tilde", &SolverSettings::mu_tilde)
      .def_readwrite("sigma_f", &SolverSettings::sigma_f)
      .def_readwrite("sigma_x", &SolverSettings::sigma_x)
      .def_readwrite("sigma_a", &SolverSettings::sigma_a)
      .def_readwrite("normalized", &SolverSettings::normalized)
      .def_readwrite("relearn", &SolverSettings::relearn)
      .def_readwrite("prior", &SolverSettings::prior)
      .def_readwrite("patch", &SolverSettings::patch)
      .def_readwrite("stride", &SolverSettings::stride)
      .def_readwrite("threads", &SolverSettings::threads);

  m.def(
      "restore",
      [](const Array& observed, const std::string& task, const SolverSettings& settings,
         py::object mask, py::object kernel, py::object reference) {
        const Image img = image_from_array(observed);
        TaskKind kind;
        FormationModel model = FormationModel::identity(img.pixels());
        if (task == "denoise") {
          kind = TaskKind::Denoise;
        } else if (task == "interpolate") {
          kind = TaskKind::Interpolate;
          if (mask.is_none()) throw std::invalid_argument("interpolate needs mask=");
          const auto ma = py::cast<py::array_t<std::uint8_t>>(mask);
          std::vector<std::uint8_t> keep(ma.data(), ma.data() + ma.size());
          if (static_cast<int>(keep.size()) != img.pixels())
            throw std::invalid_argument("mask size must match the image");
          model = FormationModel::mask(std::move(keep));
        } else if (task == "deblur") {
          kind = TaskKind::Deblur;
          if (kernel.is_none()) throw std::invalid_argument("deblur needs kernel=");
          const Array ka = py::cast<Array>(kernel);
          Stencil k;
          k.rows = static_cast<int>(ka.shape(0));
          k.cols = static_cast<int>(ka.shape(1));
          k.vals = to_vec(ka);
          model = FormationModel::blur(img.height, img.width, std::move(k));
        } else {
          throw std::invalid_argument("task must be denoise, interpolate or deblur");
        }
        Image ref;
        const bool have_ref = !reference.is_none();
        if (have_ref) ref = image_from_array(py::cast<Array>(reference));
        auto [out, report] = restore(img, kind, model, to_cfg(settings), to_params(settings),
                                     have_ref ? &ref : nullptr);
        py::dict rep;
        rep["patch_count"] = report.patch_count;
        rep["seconds"] = report.seconds;
        if (have_ref) {
          rep["psnr_db"] = report.psnr_db;
          rep["ssim"] = report.ssim;
        }
        return py::make_tuple(image_to_array(out), rep);
      },
      py::arg("observed"), py::arg("task"), py::arg("settings") = SolverSettings(),
      py::arg("mask") = py::none(), py::arg("kernel") = py::none(),
      py::arg("reference") = py::none(),
      "Patch-based restoration; returns (image, report dict).");

  m.def(
      "solve_patch",
      [](const Array& y, const SolverSettings& settings) {
        if (y.ndim() != 2 || y.shape(0) != y.shape(1))
          throw std::invalid_argument("expected a square (N, N) observation");
        const int side = static_cast<int>(y.shape(0));
        const FormationModel m = FormationModel::identity(side * side);
        const auto out = solve_patch({to_vec(y)}, m, side, to_cfg(settings), to_params(settings));
        return to_matrix(out[0], side, side);
      },
      py::arg("y"), py::arg("settings") = SolverSettings(),
      "Single-patch denoising solve under the identity model.");

  m.def("selftest", []() {
    std::ostringstream out;
    const int failures = run_selftest(out);
    py::print(out.str());
    return failures;
  });
}
