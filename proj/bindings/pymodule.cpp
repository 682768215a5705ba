// Python module exposing the main operations.

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "wprg/derand.hpp"
#include "wprg/harness.hpp"
#include "wprg/perm.hpp"

namespace py = pybind11;
using namespace wprg;

namespace {

std::vector<std::vector<double>> mat_to_rows(const Mat& m) {
  std::vector<std::vector<double>> rows(m.rows());
  for (int i = 0; i < m.rows(); ++i) {
    rows[i].resize(m.cols());
    for (int j = 0; j < m.cols(); ++j) rows[i][j] = m(i, j);
  }
  return rows;
}

Mat rows_to_mat(const std::vector<std::vector<double>>& rows) {
  Mat m(rows.size(), rows.empty() ? 0 : rows[0].size());
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  return m;
}

}  // namespace

PYBIND11_MODULE(wprg, m) {
  m.doc() = "weighted pseudorandom generators and derandomization for "
            "read-once branching programs";

  py::enum_<RobpClass>(m, "RobpClass")
      .value("General", RobpClass::General)
      .value("Regular", RobpClass::Regular)
      .value("Permutation", RobpClass::Permutation);

  py::class_<Robp>(m, "Robp")
      .def(py::init<int, int, int, std::vector<std::vector<uint32_t>>, uint32_t,
                    std::vector<uint8_t>>(),
           py::arg("n"), py::arg("w"), py::arg("s"), py::arg("transitions"),
           py::arg("start_state"), py::arg("accept"))
      .def_property_readonly("n", &Robp::length)
      .def_property_readonly("w", &Robp::width)
      .def_property_readonly("s", &Robp::symbol_bits)
      .def("step", &Robp::step)
      .def("evaluate",
           [](const Robp& f, const std::vector<uint32_t>& input) {
             return evaluate(f, input);
           })
      .def("exact_expectation", [](const Robp& f) { return exact_expectation(f); })
      .def("exact_expectation_rational",
           [](const Robp& f, uint64_t cap) {
             return exact_expectation_rational(f, cap).to_string();
           },
           py::arg("cap") = uint64_t(1) << 24)
      .def("classify", [](const Robp& f) { return classify(f); })
      .def("weight", [](const Robp& f) { return robp_weight(f); })
      .def("to_text", [](const Robp& f) { return robp_to_string(f); })
      .def("__repr__", [](const Robp& f) {
        return "<Robp n=" + std::to_string(f.length()) +
               " w=" + std::to_string(f.width()) +
               " s=" + std::to_string(f.symbol_bits()) + ">";
      });

  m.def("robp_from_text",
        [](const std::string& t) { return robp_from_string(t); });
  m.def("transition_matrix",
        [](const Robp& f, int i, int j, const std::vector<uint32_t>& input) {
          return mat_to_rows(transition_matrix(f, i, j, input));
        });
  m.def("regular_to_permutation_binary", &regular_to_permutation_binary,
        py::arg("robp"), py::arg("faithful_visit_check") = false);
  m.def("random_permutation_robp", [](int n, int w, int s, uint64_t seed) {
    CounterRng rng(seed);
    return random_permutation_robp(n, w, s, rng);
  });
  m.def("random_regular_robp", [](int n, int w, int s, uint64_t seed) {
    CounterRng rng(seed);
    return random_regular_robp(n, w, s, rng);
  });

  m.def("sv_approx_error",
        [](const std::vector<std::vector<double>>& wt,
           const std::vector<std::vector<double>>& w) {
          return sv_approx_error(rows_to_mat(wt), rows_to_mat(w));
        });

  m.def("mgg_lambda", [](uint64_t side, int power) {
    Expander h = mgg_expander(side);
    if (power > 1) h = power_expander(h, power);
    return lambda_measure(h);
  }, py::arg("side"), py::arg("power") = 1);

  m.def("extractor_eval", [](int n_src, int d_ext, int m_out, uint64_t x, uint64_t y) {
    return extractor_eval(ExtractorSpec::leftover_hash(n_src, d_ext, m_out, n_src), x, y);
  });

  py::class_<TermSet>(m, "TermSet")
      .def_readonly("n", &TermSet::n)
      .def_readonly("k", &TermSet::k)
      .def_readonly("count", &TermSet::count)
      .def_readonly("factors", &TermSet::factors)
      .def("to_text", &termset_to_text);
  m.def("richardson_terms", &richardson_terms);
  m.def("binary_splitting_terms", &binary_splitting_terms);
  m.def("richardson_bound", &richardson_bound);

  py::class_<PermSchedule>(m, "PermSchedule").def(py::init<>());
  m.def("perm_estimate",
        [](const Robp& f, double eps, int levels, int k) {
          PermSchedule ps;
          for (int i = 0; i < levels; ++i) ps.levels.push_back({k, 0.0, 24});
          Shape shape{f.length(), f.symbol_bits(), f.width()};
          Wprg g = perm_wprg(shape, eps, ps);
          return estimate(f, g);
        },
        py::arg("robp"), py::arg("eps"), py::arg("levels") = 2, py::arg("k") = 1);
  m.def("multi_accept_estimate",
        [](const Robp& f, double eps, int levels, int k) {
          PermSchedule ps;
          for (int i = 0; i < levels; ++i) ps.levels.push_back({k, 0.0, 24});
          return multi_accept_estimate(f, eps, ps);
        },
        py::arg("robp"), py::arg("eps"), py::arg("levels") = 2, py::arg("k") = 1);
  m.def("regular_estimate",
        [](const Robp& f, int k, double lambda_target) {
          auto rep = regular_estimator(f, {{k, lambda_target, 24}});
          return py::make_tuple(rep.estimate, rep.declared_eps);
        },
        py::arg("robp"), py::arg("k") = 1, py::arg("lambda_target") = 0.0);
}
