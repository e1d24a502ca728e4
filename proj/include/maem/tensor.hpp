#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

// Reverse-mode automatic differentiation over dense double tensors.
//
// Tensors are cheap shared handles to value/grad storage. Ops record nodes on
// the innermost live Tape (define-by-run; a fresh tape per forward pass).
// Backward rules are themselves expressed through tensor ops, so a backward
// pass run with create_graph=true extends the same tape and a second backward
// yields second derivatives. Only the gradient penalty uses that path.

namespace maem::ad {

using Shape = std::vector<long>;

std::string shape_str(const Shape& s);
long numel(const Shape& s);

namespace detail {
struct TensorImpl {
  Shape shape;
  std::vector<double> values;
  std::vector<double> grad;  // allocated when gradients accumulate here
  bool requires_grad = false;
};
}  // namespace detail

class Tensor {
 public:
  Tensor() = default;  // null handle

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value);
  static Tensor from_values(Shape shape, std::vector<double> values,
                            bool requires_grad = false);
  static Tensor scalar(double value);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const;
  long size() const;
  long rows() const;  // rank-2 only
  long cols() const;  // rank-2 only

  bool requires_grad() const;
  void set_requires_grad(bool on);

  std::span<const double> values() const;
  std::span<double> values_mut();
  std::span<const double> grad() const;
  void zero_grad();
  void add_to_grad(std::span<const double> g);

  double item() const;     // scalar extraction; error unless size() == 1
  Tensor detach() const;   // value copy with no grad tracking
  Tensor clone() const;    // value copy, keeps requires_grad as a fresh leaf

  bool all_finite() const;

  detail::TensorImpl* impl() const { return impl_.get(); }

 private:
  explicit Tensor(std::shared_ptr<detail::TensorImpl> impl)
      : impl_(std::move(impl)) {}
  std::shared_ptr<detail::TensorImpl> impl_;
};

// Disables node recording while alive (used for plain first-order backward
// passes and for evaluation code that must not build graphs).
struct NoGradGuard {
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;
};

bool grad_enabled();

class Tape {
 public:
  Tape();
  ~Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Accumulates d(loss)/d(leaf) into every requires_grad leaf reachable from
  // `loss`. Repeated calls accumulate additively.
  void backward(const Tensor& loss);

  // Returns d(loss)/d(wrt) as a tensor without touching .grad buffers. With
  // create_graph=true the returned tensor is differentiable (the backward
  // pass is recorded onto this tape).
  Tensor grad(const Tensor& loss, const Tensor& wrt, bool create_graph);

  std::size_t node_count() const { return nodes_.size(); }

  static Tape* current();

  using Vjp = std::function<std::vector<Tensor>(const Tensor&)>;
  void record(std::vector<Tensor> inputs, Tensor output, Vjp vjp);

 private:
  struct Node {
    std::vector<Tensor> inputs;
    Tensor output;
    Vjp vjp;
  };
  std::unordered_map<const detail::TensorImpl*, Tensor> run_backward(
      const Tensor& loss, bool create_graph);

  std::vector<Node> nodes_;
  std::unordered_set<const detail::TensorImpl*> produced_;
};

// Free-function forms operating on the innermost live tape.
void backward(const Tensor& loss);
Tensor grad(const Tensor& loss, const Tensor& wrt, bool create_graph = false);

// ---- primitive and composite ops ----

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);  // elementwise
Tensor matmul(const Tensor& a, const Tensor& b);
// x[n,k] * w[k,m] + bias[1,m] broadcast over rows, as one node.
Tensor linear(const Tensor& x, const Tensor& w, const Tensor& bias);
Tensor transpose(const Tensor& a);
Tensor scalar_mul(double c, const Tensor& a);
Tensor add_scalar(const Tensor& a, double c);
Tensor relu(const Tensor& a);   // subgradient at 0 is 0
Tensor tanh(const Tensor& a);
Tensor sum(const Tensor& a);    // full reduction to a scalar
Tensor mean(const Tensor& a);
Tensor expand(const Tensor& scalar, Shape shape);
Tensor sqrt(const Tensor& a);   // errors on negative input
Tensor recip(const Tensor& a);
Tensor clamp_min(const Tensor& a, double lo);
Tensor square(const Tensor& a);
Tensor concat(std::span<const Tensor> parts);  // along the leading axis
Tensor rows(const Tensor& a, long i0, long i1);
Tensor row_permute(const Tensor& a, std::span<const long> perm);

Tensor l2_norm(const Tensor& a);
Tensor dot(const Tensor& a, const Tensor& b);
// Both norms are floored at 1e-12 before the division.
Tensor cosine_similarity(const Tensor& a, const Tensor& b);

// Rank-2 helpers, all [n,m] -> [n,1].
Tensor row_sum(const Tensor& a);
Tensor row_mean(const Tensor& a);
Tensor row_l2_norm(const Tensor& a);
Tensor row_dot(const Tensor& a, const Tensor& b);

// Constant [n, cols] tensor tiling `col` across columns (no grad).
Tensor tile_col(std::span<const double> col, long n_cols);

// ---- string-dispatched op surface ----

enum class OpKind {
  add,
  sub,
  mul_elementwise,
  matmul,
  scalar_mul,
  relu,
  tanh,
  mean,
  sum,
  l2_norm,
  dot,
  cosine_similarity,
  square,
  sqrt,
  concat,
};

OpKind op_kind_from_string(const std::string& name);
const char* op_kind_name(OpKind kind);

// Uniform entry point; validates arity and shapes, names the op in errors.
// scalar_mul expects inputs[0] to be a scalar tensor.
Tensor forward_op(OpKind kind, std::span<const Tensor> inputs);

}  // namespace maem::ad
