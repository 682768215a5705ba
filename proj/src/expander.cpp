#include "wprg/expander.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace wprg {

std::pair<std::pair<uint64_t, uint64_t>, uint64_t> mgg_rot(
    uint64_t m, std::pair<uint64_t, uint64_t> v, uint64_t label) {
  if (label >= 8) throw std::invalid_argument("mgg_rot: label out of range");
  auto [x, y] = v;
  auto add = [m](uint64_t a, uint64_t b) { return (a + b) % m; };
  auto sub = [m](uint64_t a, uint64_t b) { return (a + m - b % m) % m; };
  std::pair<uint64_t, uint64_t> out;
  switch (label) {
    case 0: out = {add(x, y), y}; break;
    case 1: out = {sub(x, y), y}; break;
    case 2: out = {add(add(x, y), 1), y}; break;
    case 3: out = {sub(sub(x, y), 1) , y}; break;
    case 4: out = {x, add(y, x)}; break;
    case 5: out = {x, sub(y, x)}; break;
    case 6: out = {x, add(add(y, x), 1)}; break;
    case 7: out = {x, sub(sub(y, x), 1)}; break;
  }
  // the incoming label is the inverse map's index
  return {out, label ^ 1};
}

Expander mgg_expander(uint64_t m) {
  if (m < 1 || m > (uint64_t(1) << 20))
    throw std::invalid_argument("mgg_expander: side length out of range");
  Expander h;
  h.vertices = m * m;
  h.label_bits = 3;
  h.lambda_nominal = m == 1 ? 0.0 : 5.0 * std::sqrt(2.0) / 8.0;
  h.descriptor = "mgg(" + std::to_string(m) + ")";
  h.rot = [m](uint64_t v, uint64_t l) {
    auto [out, back] = mgg_rot(m, {v % m, v / m}, l);
    return std::make_pair(out.first + m * out.second, back);
  };
  return h;
}

Expander power_expander(const Expander& h, int t) {
  if (t < 1) throw std::invalid_argument("power_expander: t must be >= 1");
  if (t == 1) return h;
  Expander p;
  p.vertices = h.vertices;
  p.label_bits = h.label_bits * t;
  p.lambda_nominal = std::pow(h.lambda_nominal, t);
  p.descriptor = h.descriptor + "^" + std::to_string(t);
  const int b = h.label_bits;
  auto base = h.rot;
  p.rot = [base, b, t](uint64_t v, uint64_t l) {
    const uint64_t mask = (uint64_t(1) << b) - 1;
    uint64_t back = 0;
    for (int j = 0; j < t; ++j) {
      auto [v2, l2] = base(v, (l >> (b * j)) & mask);
      v = v2;
      back |= l2 << (b * (t - 1 - j));
    }
    return std::make_pair(v, back);
  };
  return p;
}

Expander complete_expander(int vertex_bits) {
  if (vertex_bits < 0 || vertex_bits > 62)
    throw std::invalid_argument("complete_expander: bits out of range");
  Expander h;
  h.vertices = uint64_t(1) << vertex_bits;
  h.label_bits = vertex_bits;
  h.lambda_nominal = 0.0;
  h.descriptor = "complete(" + std::to_string(vertex_bits) + ")";
  h.rot = [](uint64_t v, uint64_t l) { return std::make_pair(l, v); };
  return h;
}

Expander xor_expander(int vertex_bits) {
  if (vertex_bits < 0 || vertex_bits > 62)
    throw std::invalid_argument("xor_expander: bits out of range");
  Expander h;
  h.vertices = uint64_t(1) << vertex_bits;
  h.label_bits = vertex_bits;
  h.lambda_nominal = 0.0;
  h.descriptor = "xor(" + std::to_string(vertex_bits) + ")";
  h.rot = [](uint64_t v, uint64_t l) { return std::make_pair(v ^ l, l); };
  return h;
}

Expander with_consistent_labels(const Expander& h) {
  Expander c = h;
  c.descriptor = h.descriptor + "/consistent";
  auto base = h.rot;
  c.rot = [base](uint64_t v, uint64_t l) {
    return std::make_pair(base(v, l).first, l);
  };
  return c;
}

Expander tensor_double(const Expander& h) {
  Expander d;
  d.vertices = 2 * h.vertices;
  d.label_bits = h.label_bits + 1;
  d.lambda_nominal = h.lambda_nominal;
  d.descriptor = h.descriptor + "x2";
  auto base = h.rot;
  const uint64_t n = h.vertices;
  const int b = h.label_bits;
  d.rot = [base, n, b](uint64_t v, uint64_t l) {
    uint64_t bit = v / n, core = v % n;
    uint64_t j = (l >> b) & 1, i = l & ((uint64_t(1) << b) - 1);
    auto [v1, i1] = base(core, i);
    return std::make_pair(v1 + n * j, i1 | (bit << b));
  };
  return d;
}

Expander expander_for_bits(int vertex_bits, int power) {
  if (vertex_bits < 1) throw std::invalid_argument("expander_for_bits: bits >= 1");
  Expander base;
  if (vertex_bits % 2 == 0)
    base = mgg_expander(uint64_t(1) << (vertex_bits / 2));
  else if (vertex_bits == 1)
    base = complete_expander(1);
  else
    base = tensor_double(mgg_expander(uint64_t(1) << ((vertex_bits - 1) / 2)));
  return power <= 1 ? base : power_expander(base, power);
}

Mat expander_matrix(const Expander& h, uint64_t cap) {
  if (h.vertices * h.degree() > cap)
    throw std::invalid_argument("expander_matrix: size cap exceeded");
  Mat w = Mat::Zero(h.vertices, h.vertices);
  const double p = 1.0 / double(h.degree());
  for (uint64_t v = 0; v < h.vertices; ++v)
    for (uint64_t l = 0; l < h.degree(); ++l) w(v, h.step(v, l)) += p;
  return w;
}

double lambda_measure(const Expander& h, uint64_t dense_cap) {
  if (h.vertices > dense_cap)
    throw std::invalid_argument("lambda_measure: vertex count above dense cap");
  Mat w = expander_matrix(h);
  Mat d = w - Mat::Constant(w.rows(), w.cols(), 1.0 / double(w.rows()));
  Eigen::SelfAdjointEigenSolver<Mat> es(d * d.transpose(), Eigen::EigenvaluesOnly);
  double top = es.eigenvalues().maxCoeff();
  return top <= 0 ? 0.0 : std::sqrt(top);
}

}  // namespace wprg
