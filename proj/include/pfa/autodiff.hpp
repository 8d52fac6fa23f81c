#pragma once

// Reverse-mode differentiation over a dynamic tape of vector-valued nodes.
//
// Every node holds a dense vector (size 1 for scalars) stored in one flat
// pool owned by the tape. Forward values are computed eagerly while the
// expression is recorded; backward() sweeps the nodes in reverse order.
// Binary elementwise ops broadcast a size-1 operand against a size-n one.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace pfa::ad {

class Tape;

enum class Op : std::uint8_t {
  input,
  constant,
  add,
  sub,
  mul,
  div,
  neg,
  add_scalar,
  scale,
  square,
  tanh,
  sigmoid,
  exp,
  log,
  sqrt,
  max,
  indicator_ge,
  matvec_const,
  matvec,
  sum,
  slice,
  concat,
  max_reduce,
  min_reduce,
};

/// Handle to a node on a tape. Cheap to copy; valid until the tape is cleared.
struct Var {
  Tape* tape = nullptr;
  std::uint32_t id = 0;

  std::size_t size() const;
  double value() const;  // first element; the usual accessor for scalars
  std::span<const double> values() const;
  double operator[](std::size_t i) const { return values()[i]; }
};

class Gradients {
 public:
  Gradients() = default;

  /// d(output)/d(v), one entry per element of v. Zero for unreachable nodes.
  std::span<const double> wrt(Var v) const;
  double scalar(Var v) const { return wrt(v)[0]; }

 private:
  friend class Tape;
  std::vector<double> adjoint_;
  std::vector<std::uint32_t> offsets_;
  std::vector<std::uint32_t> sizes_;
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Drop every node but keep the allocated capacity.
  void clear();
  std::size_t node_count() const { return nodes_.size(); }

  Var input(double v);
  Var input(std::span<const double> v);
  Var constant(double v);
  Var constant(std::span<const double> v);

  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var div(Var a, Var b);
  Var neg(Var a);
  Var add_scalar(Var a, double k);
  Var scale(Var a, double k);
  Var square(Var a);
  Var tanh(Var a);
  Var sigmoid(Var a);
  Var exp(Var a);
  Var log(Var a);
  Var sqrt(Var a);
  /// Elementwise max; ties propagate no gradient to either side.
  Var max(Var a, Var b);
  /// 1 where a >= b else 0; gradient is identically zero.
  Var indicator_ge(Var a, Var b);

  /// W x with W a column-major rows x cols matrix living outside the tape.
  /// The storage must outlive every use of the tape.
  Var matvec_const(const double* w, std::uint32_t rows, std::uint32_t cols, Var x);
  /// W x with W recorded on the tape as a column-major vector of rows*cols.
  Var matvec(Var w, std::uint32_t rows, Var x);

  Var sum(Var a);
  Var slice(Var a, std::uint32_t offset, std::uint32_t length);
  Var element(Var a, std::uint32_t index) { return slice(a, index, 1); }
  Var concat(Var a, Var b);
  /// Max/min over the elements; gradient flows to a unique extremum only.
  Var max_reduce(Var a);
  Var min_reduce(Var a);

  std::span<const double> values(Var v) const;

  /// Reverse sweep from `output` (all of its elements seeded with `seed`).
  Gradients backward(Var output, double seed = 1.0) const;
  void backward(Var output, double seed, Gradients& into) const;

 private:
  struct Node {
    Op op;
    std::uint32_t a;
    std::uint32_t b;
    std::uint32_t offset;
    std::uint32_t size;
    std::uint32_t aux;  // slice offset, matvec rows
    double k;
    const double* external;
  };

  Var push(Op op, std::uint32_t a, std::uint32_t b, std::uint32_t size, std::uint32_t aux = 0,
           double k = 0.0, const double* external = nullptr);
  const Node& node(Var v) const;
  void check_operand(Var v) const;
  void check_finite(Var v, const char* what) const;
  Var elementwise(Op op, Var a, Var b);
  Var unary(Op op, Var a, double k = 0.0);

  std::vector<Node> nodes_;
  std::vector<double> values_;
};

Var operator+(Var a, Var b);
Var operator-(Var a, Var b);
Var operator*(Var a, Var b);
Var operator/(Var a, Var b);
Var operator-(Var a);
Var operator+(Var a, double k);
Var operator+(double k, Var a);
Var operator-(Var a, double k);
Var operator-(double k, Var a);
Var operator*(Var a, double k);
Var operator*(double k, Var a);
Var operator/(Var a, double k);

Var tanh(Var a);
Var sigmoid(Var a);
Var exp(Var a);
Var log(Var a);
Var sqrt(Var a);
Var square(Var a);
Var max(Var a, Var b);
Var sum(Var a);

/// Records a scalar-valued function of one vector input onto a fresh tape.
using TapeFunction = std::function<Var(Tape&, Var)>;

struct FiniteDifferenceReport {
  double max_relative_error = 0.0;
  std::size_t worst_index = 0;
  std::vector<double> analytic;
  std::vector<double> numeric;
};

/// Compares the tape gradient against central differences component-wise.
/// Relative error is |g - fd| / max(|g|, |fd|, abs_floor).
FiniteDifferenceReport finite_difference_check(const TapeFunction& f, std::span<const double> point,
                                               double step, double abs_floor = 1e-8);

}  // namespace pfa::ad
