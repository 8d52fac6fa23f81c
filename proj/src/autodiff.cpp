#include "pfa/autodiff.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <string>

#include "pfa/error.hpp"

namespace pfa::ad {

namespace {

using ConstMap = Eigen::Map<const Eigen::MatrixXd>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;
using VecMap = Eigen::Map<Eigen::VectorXd>;

// Index of the element of operand `n`-sized vector matching output element i.
inline std::uint32_t bidx(std::uint32_t n, std::uint32_t i) { return n == 1 ? 0 : i; }

}  // namespace

std::size_t Var::size() const { return tape->values(*this).size(); }
double Var::value() const { return tape->values(*this)[0]; }
std::span<const double> Var::values() const { return tape->values(*this); }

std::span<const double> Gradients::wrt(Var v) const {
  if (v.id >= offsets_.size()) fail(ErrorKind::invalid_argument, "gradient requested for a node not on the tape");
  return {adjoint_.data() + offsets_[v.id], sizes_[v.id]};
}

void Tape::clear() {
  nodes_.clear();
  values_.clear();
}

const Tape::Node& Tape::node(Var v) const { return nodes_[v.id]; }

void Tape::check_operand(Var v) const {
  if (v.tape != this || v.id >= nodes_.size()) fail(ErrorKind::invalid_argument, "variable does not belong to this tape");
}

std::span<const double> Tape::values(Var v) const {
  check_operand(v);
  const Node& n = nodes_[v.id];
  return {values_.data() + n.offset, n.size};
}

Var Tape::push(Op op, std::uint32_t a, std::uint32_t b, std::uint32_t size, std::uint32_t aux, double k,
               const double* external) {
  const auto offset = static_cast<std::uint32_t>(values_.size());
  values_.resize(values_.size() + size);
  nodes_.push_back(Node{op, a, b, offset, size, aux, k, external});
  return Var{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

void Tape::check_finite(Var v, const char* what) const {
  for (double x : values(v)) {
    if (!std::isfinite(x)) fail(ErrorKind::numeric, std::string("non-finite value produced by ") + what);
  }
}

Var Tape::input(double v) { return input(std::span<const double>(&v, 1)); }

Var Tape::input(std::span<const double> v) {
  Var out = push(Op::input, 0, 0, static_cast<std::uint32_t>(v.size()));
  std::copy(v.begin(), v.end(), values_.begin() + nodes_.back().offset);
  check_finite(out, "input");
  return out;
}

Var Tape::constant(double v) { return constant(std::span<const double>(&v, 1)); }

Var Tape::constant(std::span<const double> v) {
  Var out = push(Op::constant, 0, 0, static_cast<std::uint32_t>(v.size()));
  std::copy(v.begin(), v.end(), values_.begin() + nodes_.back().offset);
  return out;
}

Var Tape::elementwise(Op op, Var a, Var b) {
  check_operand(a);
  check_operand(b);
  const std::uint32_t na = nodes_[a.id].size;
  const std::uint32_t nb = nodes_[b.id].size;
  if (na != nb && na != 1 && nb != 1) fail(ErrorKind::invalid_argument, "operand sizes do not broadcast");
  const std::uint32_t n = std::max(na, nb);
  Var out = push(op, a.id, b.id, n);
  const double* pa = values_.data() + nodes_[a.id].offset;
  const double* pb = values_.data() + nodes_[b.id].offset;
  double* po = values_.data() + nodes_[out.id].offset;
  for (std::uint32_t i = 0; i < n; ++i) {
    const double x = pa[bidx(na, i)];
    const double y = pb[bidx(nb, i)];
    switch (op) {
      case Op::add: po[i] = x + y; break;
      case Op::sub: po[i] = x - y; break;
      case Op::mul: po[i] = x * y; break;
      case Op::div:
        if (y == 0.0) fail(ErrorKind::domain, "division by zero");
        po[i] = x / y;
        break;
      case Op::max: po[i] = x > y ? x : y; break;
      case Op::indicator_ge: po[i] = x >= y ? 1.0 : 0.0; break;
      default: fail(ErrorKind::invalid_argument, "not an elementwise binary op");
    }
  }
  if (op == Op::div || op == Op::mul) check_finite(out, "multiplication/division");
  return out;
}

Var Tape::unary(Op op, Var a, double k) {
  check_operand(a);
  const std::uint32_t n = nodes_[a.id].size;
  Var out = push(op, a.id, 0, n, 0, k);
  const double* pa = values_.data() + nodes_[a.id].offset;
  double* po = values_.data() + nodes_[out.id].offset;
  for (std::uint32_t i = 0; i < n; ++i) {
    const double x = pa[i];
    switch (op) {
      case Op::neg: po[i] = -x; break;
      case Op::add_scalar: po[i] = x + k; break;
      case Op::scale: po[i] = x * k; break;
      case Op::square: po[i] = x * x; break;
      case Op::tanh: po[i] = std::tanh(x); break;
      case Op::sigmoid: po[i] = x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); break;
      case Op::exp: po[i] = std::exp(x); break;
      case Op::log:
        if (!(x > 0.0)) fail(ErrorKind::domain, "log of non-positive value");
        po[i] = std::log(x);
        break;
      case Op::sqrt:
        if (x < 0.0) fail(ErrorKind::domain, "sqrt of negative value");
        po[i] = std::sqrt(x);
        break;
      default: fail(ErrorKind::invalid_argument, "not a unary op");
    }
  }
  if (op == Op::exp || op == Op::square || op == Op::scale || op == Op::add_scalar) check_finite(out, "exp/scale");
  return out;
}

Var Tape::add(Var a, Var b) { return elementwise(Op::add, a, b); }
Var Tape::sub(Var a, Var b) { return elementwise(Op::sub, a, b); }
Var Tape::mul(Var a, Var b) { return elementwise(Op::mul, a, b); }
Var Tape::div(Var a, Var b) { return elementwise(Op::div, a, b); }
Var Tape::max(Var a, Var b) { return elementwise(Op::max, a, b); }
Var Tape::indicator_ge(Var a, Var b) { return elementwise(Op::indicator_ge, a, b); }
Var Tape::neg(Var a) { return unary(Op::neg, a); }
Var Tape::add_scalar(Var a, double k) { return unary(Op::add_scalar, a, k); }
Var Tape::scale(Var a, double k) { return unary(Op::scale, a, k); }
Var Tape::square(Var a) { return unary(Op::square, a); }
Var Tape::tanh(Var a) { return unary(Op::tanh, a); }
Var Tape::sigmoid(Var a) { return unary(Op::sigmoid, a); }
Var Tape::exp(Var a) { return unary(Op::exp, a); }
Var Tape::log(Var a) { return unary(Op::log, a); }
Var Tape::sqrt(Var a) { return unary(Op::sqrt, a); }

Var Tape::matvec_const(const double* w, std::uint32_t rows, std::uint32_t cols, Var x) {
  check_operand(x);
  if (nodes_[x.id].size != cols) fail(ErrorKind::invalid_argument, "matvec: column count mismatch");
  Var out = push(Op::matvec_const, x.id, 0, rows, cols, 0.0, w);
  VecMap(values_.data() + nodes_[out.id].offset, rows).noalias() =
      ConstMap(w, rows, cols) * ConstVecMap(values_.data() + nodes_[x.id].offset, cols);
  return out;
}

Var Tape::matvec(Var w, std::uint32_t rows, Var x) {
  check_operand(w);
  check_operand(x);
  const std::uint32_t cols = nodes_[x.id].size;
  if (nodes_[w.id].size != rows * cols) fail(ErrorKind::invalid_argument, "matvec: matrix size mismatch");
  Var out = push(Op::matvec, w.id, x.id, rows, rows);
  VecMap(values_.data() + nodes_[out.id].offset, rows).noalias() =
      ConstMap(values_.data() + nodes_[w.id].offset, rows, cols) *
      ConstVecMap(values_.data() + nodes_[x.id].offset, cols);
  return out;
}

Var Tape::sum(Var a) {
  check_operand(a);
  Var out = push(Op::sum, a.id, 0, 1);
  const Node& na = nodes_[a.id];
  double s = 0.0;
  for (std::uint32_t i = 0; i < na.size; ++i) s += values_[na.offset + i];
  values_[nodes_[out.id].offset] = s;
  return out;
}

Var Tape::slice(Var a, std::uint32_t offset, std::uint32_t length) {
  check_operand(a);
  if (offset + length > nodes_[a.id].size) fail(ErrorKind::invalid_argument, "slice out of range");
  Var out = push(Op::slice, a.id, 0, length, offset);
  std::copy_n(values_.begin() + nodes_[a.id].offset + offset, length, values_.begin() + nodes_[out.id].offset);
  return out;
}

Var Tape::concat(Var a, Var b) {
  check_operand(a);
  check_operand(b);
  const std::uint32_t na = nodes_[a.id].size;
  const std::uint32_t nb = nodes_[b.id].size;
  Var out = push(Op::concat, a.id, b.id, na + nb);
  const std::uint32_t o = nodes_[out.id].offset;
  std::copy_n(values_.begin() + nodes_[a.id].offset, na, values_.begin() + o);
  std::copy_n(values_.begin() + nodes_[b.id].offset, nb, values_.begin() + o + na);
  return out;
}

Var Tape::max_reduce(Var a) {
  check_operand(a);
  if (nodes_[a.id].size == 0) fail(ErrorKind::invalid_argument, "max of empty vector");
  Var out = push(Op::max_reduce, a.id, 0, 1);
  const auto v = values(a);
  values_[nodes_[out.id].offset] = *std::max_element(v.begin(), v.end());
  return out;
}

Var Tape::min_reduce(Var a) {
  check_operand(a);
  if (nodes_[a.id].size == 0) fail(ErrorKind::invalid_argument, "min of empty vector");
  Var out = push(Op::min_reduce, a.id, 0, 1);
  const auto v = values(a);
  values_[nodes_[out.id].offset] = *std::min_element(v.begin(), v.end());
  return out;
}

Gradients Tape::backward(Var output, double seed) const {
  Gradients g;
  backward(output, seed, g);
  return g;
}

void Tape::backward(Var output, double seed, Gradients& into) const {
  check_operand(output);
  if (!std::isfinite(seed)) fail(ErrorKind::numeric, "non-finite backward seed");
  auto& adj = into.adjoint_;
  adj.assign(values_.size(), 0.0);
  into.offsets_.resize(nodes_.size());
  into.sizes_.resize(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    into.offsets_[i] = nodes_[i].offset;
    into.sizes_[i] = nodes_[i].size;
  }
  {
    const Node& o = nodes_[output.id];
    std::fill_n(adj.begin() + o.offset, o.size, seed);
  }
  const double* val = values_.data();

  for (std::size_t id = output.id + 1; id-- > 0;) {
    const Node& n = nodes_[id];
    const double* g = adj.data() + n.offset;
    const double* out = val + n.offset;
    bool any = false;
    for (std::uint32_t i = 0; i < n.size; ++i) {
      if (g[i] != 0.0) {
        any = true;
        break;
      }
    }
    if (!any) continue;

    switch (n.op) {
      case Op::input:
      case Op::constant:
        break;
      case Op::add:
      case Op::sub:
      case Op::mul:
      case Op::div:
      case Op::max: {
        const Node& na = nodes_[n.a];
        const Node& nb = nodes_[n.b];
        double* ga = adj.data() + na.offset;
        double* gb = adj.data() + nb.offset;
        const double* pa = val + na.offset;
        const double* pb = val + nb.offset;
        for (std::uint32_t i = 0; i < n.size; ++i) {
          const std::uint32_t ia = bidx(na.size, i);
          const std::uint32_t ib = bidx(nb.size, i);
          switch (n.op) {
            case Op::add:
              ga[ia] += g[i];
              gb[ib] += g[i];
              break;
            case Op::sub:
              ga[ia] += g[i];
              gb[ib] -= g[i];
              break;
            case Op::mul:
              ga[ia] += g[i] * pb[ib];
              gb[ib] += g[i] * pa[ia];
              break;
            case Op::div:
              ga[ia] += g[i] / pb[ib];
              gb[ib] -= g[i] * out[i] / pb[ib];
              break;
            case Op::max:
              if (pa[ia] > pb[ib]) ga[ia] += g[i];
              else if (pb[ib] > pa[ia]) gb[ib] += g[i];
              break;
            default: break;
          }
        }
        break;
      }
      case Op::indicator_ge:
        break;
      case Op::neg:
      case Op::add_scalar:
      case Op::scale:
      case Op::square:
      case Op::tanh:
      case Op::sigmoid:
      case Op::exp:
      case Op::log:
      case Op::sqrt: {
        const Node& na = nodes_[n.a];
        double* ga = adj.data() + na.offset;
        const double* pa = val + na.offset;
        for (std::uint32_t i = 0; i < n.size; ++i) {
          switch (n.op) {
            case Op::neg: ga[i] -= g[i]; break;
            case Op::add_scalar: ga[i] += g[i]; break;
            case Op::scale: ga[i] += g[i] * n.k; break;
            case Op::square: ga[i] += 2.0 * g[i] * pa[i]; break;
            case Op::tanh: ga[i] += g[i] * (1.0 - out[i] * out[i]); break;
            case Op::sigmoid: ga[i] += g[i] * out[i] * (1.0 - out[i]); break;
            case Op::exp: ga[i] += g[i] * out[i]; break;
            case Op::log: ga[i] += g[i] / pa[i]; break;
            case Op::sqrt: ga[i] += g[i] * 0.5 / out[i]; break;
            default: break;
          }
        }
        break;
      }
      case Op::matvec_const: {
        const Node& nx = nodes_[n.a];
        VecMap(adj.data() + nx.offset, nx.size).noalias() +=
            ConstMap(n.external, n.size, nx.size).transpose() * ConstVecMap(g, n.size);
        break;
      }
      case Op::matvec: {
        const Node& nw = nodes_[n.a];
        const Node& nx = nodes_[n.b];
        const std::uint32_t rows = n.aux;
        const std::uint32_t cols = nx.size;
        ConstVecMap gv(g, rows);
        Eigen::Map<Eigen::MatrixXd>(adj.data() + nw.offset, rows, cols).noalias() +=
            gv * ConstVecMap(val + nx.offset, cols).transpose();
        VecMap(adj.data() + nx.offset, cols).noalias() += ConstMap(val + nw.offset, rows, cols).transpose() * gv;
        break;
      }
      case Op::sum: {
        const Node& na = nodes_[n.a];
        double* ga = adj.data() + na.offset;
        for (std::uint32_t i = 0; i < na.size; ++i) ga[i] += g[0];
        break;
      }
      case Op::slice: {
        const Node& na = nodes_[n.a];
        double* ga = adj.data() + na.offset + n.aux;
        for (std::uint32_t i = 0; i < n.size; ++i) ga[i] += g[i];
        break;
      }
      case Op::concat: {
        const Node& na = nodes_[n.a];
        const Node& nb = nodes_[n.b];
        double* ga = adj.data() + na.offset;
        double* gb = adj.data() + nb.offset;
        for (std::uint32_t i = 0; i < na.size; ++i) ga[i] += g[i];
        for (std::uint32_t i = 0; i < nb.size; ++i) gb[i] += g[na.size + i];
        break;
      }
      case Op::max_reduce:
      case Op::min_reduce: {
        const Node& na = nodes_[n.a];
        const double* pa = val + na.offset;
        std::uint32_t hits = 0;
        std::uint32_t where = 0;
        for (std::uint32_t i = 0; i < na.size; ++i) {
          if (pa[i] == out[0]) {
            ++hits;
            where = i;
          }
        }
        if (hits == 1) adj[na.offset + where] += g[0];
        break;
      }
    }
  }

  for (std::size_t id = 0; id <= output.id; ++id) {
    if (nodes_[id].op != Op::input) continue;
    const Node& n = nodes_[id];
    for (std::uint32_t i = 0; i < n.size; ++i) {
      if (!std::isfinite(adj[n.offset + i])) fail(ErrorKind::numeric, "non-finite gradient during backward pass");
    }
  }
}

Var operator+(Var a, Var b) { return a.tape->add(a, b); }
Var operator-(Var a, Var b) { return a.tape->sub(a, b); }
Var operator*(Var a, Var b) { return a.tape->mul(a, b); }
Var operator/(Var a, Var b) { return a.tape->div(a, b); }
Var operator-(Var a) { return a.tape->neg(a); }
Var operator+(Var a, double k) { return a.tape->add_scalar(a, k); }
Var operator+(double k, Var a) { return a.tape->add_scalar(a, k); }
Var operator-(Var a, double k) { return a.tape->add_scalar(a, -k); }
Var operator-(double k, Var a) { return a.tape->add_scalar(a.tape->neg(a), k); }
Var operator*(Var a, double k) { return a.tape->scale(a, k); }
Var operator*(double k, Var a) { return a.tape->scale(a, k); }
Var operator/(Var a, double k) {
  if (k == 0.0) fail(ErrorKind::domain, "division by zero");
  return a.tape->scale(a, 1.0 / k);
}

Var tanh(Var a) { return a.tape->tanh(a); }
Var sigmoid(Var a) { return a.tape->sigmoid(a); }
Var exp(Var a) { return a.tape->exp(a); }
Var log(Var a) { return a.tape->log(a); }
Var sqrt(Var a) { return a.tape->sqrt(a); }
Var square(Var a) { return a.tape->square(a); }
Var max(Var a, Var b) { return a.tape->max(a, b); }
Var sum(Var a) { return a.tape->sum(a); }

FiniteDifferenceReport finite_difference_check(const TapeFunction& f, std::span<const double> point, double step,
                                               double abs_floor) {
  if (!(step > 0.0)) fail(ErrorKind::invalid_argument, "finite-difference step must be positive");
  FiniteDifferenceReport report;
  Tape tape;
  {
    Var x = tape.input(point);
    Var y = f(tape, x);
    const auto grads = tape.backward(y);
    const auto g = grads.wrt(x);
    report.analytic.assign(g.begin(), g.end());
  }
  std::vector<double> probe(point.begin(), point.end());
  auto eval = [&](double xi, std::size_t i) {
    probe[i] = xi;
    tape.clear();
    Var x = tape.input(probe);
    return f(tape, x).value();
  };
  report.numeric.resize(point.size());
  for (std::size_t i = 0; i < point.size(); ++i) {
    const double up = eval(point[i] + step, i);
    const double down = eval(point[i] - step, i);
    probe[i] = point[i];
    report.numeric[i] = (up - down) / (2.0 * step);
    const double a = report.analytic[i];
    const double n = report.numeric[i];
    const double denom = std::max({std::abs(a), std::abs(n), abs_floor});
    const double err = std::abs(a - n) / denom;
    if (err > report.max_relative_error) {
      report.max_relative_error = err;
      report.worst_index = i;
    }
  }
  return report;
}

}  // namespace pfa::ad
