#include "maem/tensor.hpp"

#include <Eigen/Core>

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace maem::ad {

namespace {

using MatMap =
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using ConstMatMap = Eigen::Map<
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using ArrMap = Eigen::Map<Eigen::ArrayXd>;
using ConstArrMap = Eigen::Map<const Eigen::ArrayXd>;

thread_local std::vector<Tape*> g_tape_stack;
thread_local int g_no_grad_depth = 0;

[[noreturn]] void fail(const std::string& msg) {
  throw std::invalid_argument(msg);
}

void require_defined(const Tensor& t, const char* op) {
  if (!t.defined()) fail(std::string(op) + ": undefined tensor");
}

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    fail(std::string(op) + ": shape mismatch " + shape_str(a.shape()) +
         " vs " + shape_str(b.shape()));
  }
}

bool tracking(std::initializer_list<const Tensor*> inputs) {
  if (!grad_enabled() || Tape::current() == nullptr) return false;
  for (const Tensor* t : inputs) {
    if (t->requires_grad()) return true;
  }
  return false;
}

// Marks `out` differentiable and records the node.
void record(std::vector<Tensor> inputs, Tensor& out, Tape::Vjp vjp) {
  out.impl()->requires_grad = true;
  Tape::current()->record(std::move(inputs), out, std::move(vjp));
}

}  // namespace

// ---- Shape helpers ----

std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) os << ',';
    os << s[i];
  }
  os << ']';
  return os.str();
}

long numel(const Shape& s) {
  long n = 1;
  for (long d : s) n *= d;
  return n;
}

// ---- Tensor ----

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  long n = numel(shape);
  if (n <= 0) fail("Tensor::zeros: non-positive shape " + shape_str(shape));
  auto impl = std::make_shared<detail::TensorImpl>();
  impl->shape = std::move(shape);
  impl->values.assign(static_cast<std::size_t>(n), 0.0);
  impl->requires_grad = requires_grad;
  if (requires_grad) impl->grad.assign(static_cast<std::size_t>(n), 0.0);
  return Tensor(std::move(impl));
}

Tensor Tensor::full(Shape shape, double value) {
  Tensor t = zeros(std::move(shape), false);
  for (double& v : t.impl()->values) v = value;
  return t;
}

Tensor Tensor::from_values(Shape shape, std::vector<double> values,
                           bool requires_grad) {
  long n = numel(shape);
  if (n <= 0) fail("Tensor::from_values: non-positive shape " + shape_str(shape));
  if (static_cast<std::size_t>(n) != values.size()) {
    fail("Tensor::from_values: shape " + shape_str(shape) + " expects " +
         std::to_string(n) + " values, got " + std::to_string(values.size()));
  }
  auto impl = std::make_shared<detail::TensorImpl>();
  impl->shape = std::move(shape);
  impl->values = std::move(values);
  impl->requires_grad = requires_grad;
  if (requires_grad) impl->grad.assign(impl->values.size(), 0.0);
  return Tensor(std::move(impl));
}

Tensor Tensor::scalar(double value) { return from_values({1}, {value}); }

const Shape& Tensor::shape() const {
  require_defined(*this, "shape");
  return impl_->shape;
}

long Tensor::size() const {
  require_defined(*this, "size");
  return static_cast<long>(impl_->values.size());
}

long Tensor::rows() const {
  if (shape().size() != 2) fail("rows: tensor is not rank-2, shape " + shape_str(shape()));
  return shape()[0];
}

long Tensor::cols() const {
  if (shape().size() != 2) fail("cols: tensor is not rank-2, shape " + shape_str(shape()));
  return shape()[1];
}

bool Tensor::requires_grad() const {
  return impl_ != nullptr && impl_->requires_grad;
}

void Tensor::set_requires_grad(bool on) {
  require_defined(*this, "set_requires_grad");
  impl_->requires_grad = on;
  if (on && impl_->grad.size() != impl_->values.size()) {
    impl_->grad.assign(impl_->values.size(), 0.0);
  }
}

std::span<const double> Tensor::values() const {
  require_defined(*this, "values");
  return impl_->values;
}

std::span<double> Tensor::values_mut() {
  require_defined(*this, "values_mut");
  return impl_->values;
}

std::span<const double> Tensor::grad() const {
  require_defined(*this, "grad");
  if (!impl_->requires_grad) fail("grad: tensor does not require grad");
  if (impl_->grad.size() != impl_->values.size()) fail("grad: no gradient accumulated");
  return impl_->grad;
}

void Tensor::zero_grad() {
  require_defined(*this, "zero_grad");
  impl_->grad.assign(impl_->values.size(), 0.0);
}

void Tensor::add_to_grad(std::span<const double> g) {
  require_defined(*this, "add_to_grad");
  if (g.size() != impl_->values.size()) fail("add_to_grad: size mismatch");
  if (impl_->grad.size() != impl_->values.size()) {
    impl_->grad.assign(impl_->values.size(), 0.0);
  }
  for (std::size_t i = 0; i < g.size(); ++i) impl_->grad[i] += g[i];
}

double Tensor::item() const {
  if (size() != 1) fail("item: tensor has shape " + shape_str(shape()) + ", expected a scalar");
  return impl_->values[0];
}

Tensor Tensor::detach() const {
  require_defined(*this, "detach");
  return from_values(impl_->shape, impl_->values, false);
}

Tensor Tensor::clone() const {
  require_defined(*this, "clone");
  return from_values(impl_->shape, impl_->values, impl_->requires_grad);
}

bool Tensor::all_finite() const {
  require_defined(*this, "all_finite");
  for (double v : impl_->values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

// ---- Tape ----

NoGradGuard::NoGradGuard() { ++g_no_grad_depth; }
NoGradGuard::~NoGradGuard() { --g_no_grad_depth; }

bool grad_enabled() { return g_no_grad_depth == 0; }

Tape::Tape() { g_tape_stack.push_back(this); }

Tape::~Tape() {
  if (!g_tape_stack.empty() && g_tape_stack.back() == this) {
    g_tape_stack.pop_back();
  }
}

Tape* Tape::current() {
  return g_tape_stack.empty() ? nullptr : g_tape_stack.back();
}

void Tape::record(std::vector<Tensor> inputs, Tensor output, Vjp vjp) {
  produced_.insert(output.impl());
  nodes_.push_back(Node{std::move(inputs), std::move(output), std::move(vjp)});
}

std::unordered_map<const detail::TensorImpl*, Tensor> Tape::run_backward(
    const Tensor& loss, bool create_graph) {
  std::unordered_map<const detail::TensorImpl*, Tensor> gmap;
  gmap.emplace(loss.impl(), Tensor::full(loss.shape(), 1.0));

  // VJP rules call ops; without create_graph those must not record.
  std::unique_ptr<NoGradGuard> guard;
  if (!create_graph) guard = std::make_unique<NoGradGuard>();

  // Visit the nodes recorded so far in reverse. With create_graph=true, VJP
  // ops append new nodes beyond `upto`; the vector may reallocate, so each
  // node is copied out before its rule runs.
  const std::size_t upto = nodes_.size();
  for (std::size_t i = upto; i-- > 0;) {
    Node node = nodes_[i];
    auto it = gmap.find(node.output.impl());
    if (it == gmap.end()) continue;
    Tensor gout = it->second;
    std::vector<Tensor> gins = node.vjp(gout);
    if (gins.size() != node.inputs.size()) {
      throw std::logic_error("tape: vjp arity mismatch");
    }
    for (std::size_t j = 0; j < gins.size(); ++j) {
      if (!gins[j].defined()) continue;
      const detail::TensorImpl* key = node.inputs[j].impl();
      auto found = gmap.find(key);
      if (found == gmap.end()) {
        gmap.emplace(key, gins[j]);
      } else {
        found->second = add(found->second, gins[j]);
      }
    }
  }
  return gmap;
}

void Tape::backward(const Tensor& loss) {
  require_defined(loss, "backward");
  if (loss.size() != 1) {
    fail("backward: loss must be scalar, got shape " + shape_str(loss.shape()));
  }
  auto gmap = run_backward(loss, /*create_graph=*/false);
  for (auto& [impl, gt] : gmap) {
    if (!impl->requires_grad) continue;
    if (produced_.count(impl)) continue;  // leaves only
    auto* mut = const_cast<detail::TensorImpl*>(impl);
    if (mut->grad.size() != mut->values.size()) {
      mut->grad.assign(mut->values.size(), 0.0);
    }
    auto gv = gt.values();
    for (std::size_t i = 0; i < gv.size(); ++i) mut->grad[i] += gv[i];
  }
}

Tensor Tape::grad(const Tensor& loss, const Tensor& wrt, bool create_graph) {
  require_defined(loss, "grad");
  require_defined(wrt, "grad");
  if (loss.size() != 1) {
    fail("grad: loss must be scalar, got shape " + shape_str(loss.shape()));
  }
  auto gmap = run_backward(loss, create_graph);
  auto it = gmap.find(wrt.impl());
  if (it == gmap.end()) return Tensor::zeros(wrt.shape());
  return it->second;
}

void backward(const Tensor& loss) {
  Tape* t = Tape::current();
  if (t == nullptr) fail("backward: no live tape");
  t->backward(loss);
}

Tensor grad(const Tensor& loss, const Tensor& wrt, bool create_graph) {
  Tape* t = Tape::current();
  if (t == nullptr) fail("grad: no live tape");
  return t->grad(loss, wrt, create_graph);
}

// ---- elementwise primitives ----

Tensor add(const Tensor& a, const Tensor& b) {
  require_defined(a, "add");
  require_defined(b, "add");
  require_same_shape("add", a, b);
  Tensor out = Tensor::zeros(a.shape());
  ArrMap(out.values_mut().data(), out.size()) =
      ConstArrMap(a.values().data(), a.size()) +
      ConstArrMap(b.values().data(), b.size());
  if (tracking({&a, &b})) {
    record({a, b}, out, [](const Tensor& g) -> std::vector<Tensor> {
      return {g, g};
    });
  }
  return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_defined(a, "sub");
  require_defined(b, "sub");
  require_same_shape("sub", a, b);
  Tensor out = Tensor::zeros(a.shape());
  ArrMap(out.values_mut().data(), out.size()) =
      ConstArrMap(a.values().data(), a.size()) -
      ConstArrMap(b.values().data(), b.size());
  if (tracking({&a, &b})) {
    record({a, b}, out, [](const Tensor& g) -> std::vector<Tensor> {
      return {g, scalar_mul(-1.0, g)};
    });
  }
  return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_defined(a, "mul_elementwise");
  require_defined(b, "mul_elementwise");
  require_same_shape("mul_elementwise", a, b);
  Tensor out = Tensor::zeros(a.shape());
  ArrMap(out.values_mut().data(), out.size()) =
      ConstArrMap(a.values().data(), a.size()) *
      ConstArrMap(b.values().data(), b.size());
  if (tracking({&a, &b})) {
    record({a, b}, out, [a, b](const Tensor& g) -> std::vector<Tensor> {
      return {mul(g, b), mul(g, a)};
    });
  }
  return out;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_defined(a, "matmul");
  require_defined(b, "matmul");
  if (a.shape().size() != 2 || b.shape().size() != 2 || a.cols() != b.rows()) {
    fail("matmul: incompatible shapes " + shape_str(a.shape()) + " and " +
         shape_str(b.shape()));
  }
  const long n = a.rows(), k = a.cols(), m = b.cols();
  Tensor out = Tensor::zeros({n, m});
  MatMap(out.values_mut().data(), n, m).noalias() =
      ConstMatMap(a.values().data(), n, k) * ConstMatMap(b.values().data(), k, m);
  if (tracking({&a, &b})) {
    record({a, b}, out, [a, b](const Tensor& g) -> std::vector<Tensor> {
      Tensor ga = a.requires_grad() ? matmul(g, transpose(b)) : Tensor();
      Tensor gb = b.requires_grad() ? matmul(transpose(a), g) : Tensor();
      return {ga, gb};
    });
  }
  return out;
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& bias) {
  require_defined(x, "linear");
  require_defined(w, "linear");
  require_defined(bias, "linear");
  if (x.shape().size() != 2 || w.shape().size() != 2 || x.cols() != w.rows() ||
      bias.shape().size() != 2 || bias.rows() != 1 || bias.cols() != w.cols()) {
    fail("linear: incompatible shapes " + shape_str(x.shape()) + ", " +
         shape_str(w.shape()) + ", " + shape_str(bias.shape()));
  }
  const long n = x.rows(), k = x.cols(), m = w.cols();
  Tensor out = Tensor::zeros({n, m});
  MatMap o(out.values_mut().data(), n, m);
  o.noalias() = ConstMatMap(x.values().data(), n, k) * ConstMatMap(w.values().data(), k, m);
  o.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(bias.values().data(), m);
  if (tracking({&x, &w, &bias})) {
    record({x, w, bias}, out, [x, w, bias](const Tensor& g) -> std::vector<Tensor> {
      Tensor gx = x.requires_grad() ? matmul(g, transpose(w)) : Tensor();
      Tensor gw = w.requires_grad() ? matmul(transpose(x), g) : Tensor();
      Tensor gb;
      if (bias.requires_grad()) {
        Tensor ones_row = Tensor::full({1, g.rows()}, 1.0);
        gb = matmul(ones_row, g);  // column sums
      }
      return {gx, gw, gb};
    });
  }
  return out;
}

Tensor transpose(const Tensor& a) {
  require_defined(a, "transpose");
  if (a.shape().size() != 2) {
    fail("transpose: rank-2 required, got " + shape_str(a.shape()));
  }
  const long n = a.rows(), m = a.cols();
  Tensor out = Tensor::zeros({m, n});
  MatMap(out.values_mut().data(), m, n) =
      ConstMatMap(a.values().data(), n, m).transpose();
  if (tracking({&a})) {
    record({a}, out, [](const Tensor& g) -> std::vector<Tensor> {
      return {transpose(g)};
    });
  }
  return out;
}

Tensor scalar_mul(double c, const Tensor& a) {
  require_defined(a, "scalar_mul");
  Tensor out = Tensor::zeros(a.shape());
  ArrMap(out.values_mut().data(), out.size()) =
      c * ConstArrMap(a.values().data(), a.size());
  if (tracking({&a})) {
    record({a}, out, [c](const Tensor& g) -> std::vector<Tensor> {
      return {scalar_mul(c, g)};
    });
  }
  return out;
}

Tensor add_scalar(const Tensor& a, double c) {
  require_defined(a, "add_scalar");
  Tensor out = Tensor::zeros(a.shape());
  ArrMap(out.values_mut().data(), out.size()) =
      ConstArrMap(a.values().data(), a.size()) + c;
  if (tracking({&a})) {
    record({a}, out, [](const Tensor& g) -> std::vector<Tensor> {
      return {g};
    });
  }
  return out;
}

Tensor relu(const Tensor& a) {
  require_defined(a, "relu");
  Tensor out = Tensor::zeros(a.shape());
  auto av = a.values();
  auto ov = out.values_mut();
  for (long i = 0; i < a.size(); ++i) ov[i] = av[i] > 0.0 ? av[i] : 0.0;
  if (tracking({&a})) {
    // The 0/1 mask is a constant of the backward graph (piecewise-linear op).
    Tensor mask = Tensor::zeros(a.shape());
    auto mv = mask.values_mut();
    for (long i = 0; i < a.size(); ++i) mv[i] = av[i] > 0.0 ? 1.0 : 0.0;
    record({a}, out, [mask](const Tensor& g) -> std::vector<Tensor> {
      return {mul(g, mask)};
    });
  }
  return out;
}

Tensor tanh(const Tensor& a) {
  require_defined(a, "tanh");
  Tensor out = Tensor::zeros(a.shape());
  auto av = a.values();
  auto ov = out.values_mut();
  for (long i = 0; i < a.size(); ++i) ov[i] = std::tanh(av[i]);
  if (tracking({&a})) {
    record({a}, out, [out](const Tensor& g) -> std::vector<Tensor> {
      // d tanh = 1 - tanh^2, written on the output so it stays differentiable
      Tensor one_minus = add_scalar(scalar_mul(-1.0, mul(out, out)), 1.0);
      return {mul(g, one_minus)};
    });
  }
  return out;
}

Tensor sum(const Tensor& a) {
  require_defined(a, "sum");
  double s = 0.0;
  for (double v : a.values()) s += v;
  Tensor out = Tensor::scalar(s);
  if (tracking({&a})) {
    Shape in_shape = a.shape();
    record({a}, out, [in_shape](const Tensor& g) -> std::vector<Tensor> {
      return {expand(g, in_shape)};
    });
  }
  return out;
}

Tensor mean(const Tensor& a) {
  require_defined(a, "mean");
  return scalar_mul(1.0 / static_cast<double>(a.size()), sum(a));
}

Tensor expand(const Tensor& scalar, Shape shape) {
  require_defined(scalar, "expand");
  if (scalar.size() != 1) {
    fail("expand: input must be scalar, got " + shape_str(scalar.shape()));
  }
  Tensor out = Tensor::full(shape, scalar.values()[0]);
  if (tracking({&scalar})) {
    record({scalar}, out, [](const Tensor& g) -> std::vector<Tensor> {
      return {sum(g)};
    });
  }
  return out;
}

Tensor sqrt(const Tensor& a) {
  require_defined(a, "sqrt");
  Tensor out = Tensor::zeros(a.shape());
  auto av = a.values();
  auto ov = out.values_mut();
  for (long i = 0; i < a.size(); ++i) {
    if (av[i] < 0.0) {
      fail("sqrt: negative input " + std::to_string(av[i]) + " at index " +
           std::to_string(i));
    }
    ov[i] = std::sqrt(av[i]);
  }
  if (tracking({&a})) {
    record({a}, out, [out](const Tensor& g) -> std::vector<Tensor> {
      // d sqrt = g / (2 sqrt); denominator floored at 1e-12 so a zero input
      // yields zero gradient instead of inf
      Tensor denom = recip(clamp_min(out, 1e-12));
      return {scalar_mul(0.5, mul(g, denom))};
    });
  }
  return out;
}

Tensor recip(const Tensor& a) {
  require_defined(a, "recip");
  Tensor out = Tensor::zeros(a.shape());
  ArrMap(out.values_mut().data(), out.size()) =
      ConstArrMap(a.values().data(), a.size()).inverse();
  if (tracking({&a})) {
    record({a}, out, [out](const Tensor& g) -> std::vector<Tensor> {
      return {scalar_mul(-1.0, mul(g, mul(out, out)))};
    });
  }
  return out;
}

Tensor clamp_min(const Tensor& a, double lo) {
  require_defined(a, "clamp_min");
  Tensor out = Tensor::zeros(a.shape());
  auto av = a.values();
  auto ov = out.values_mut();
  for (long i = 0; i < a.size(); ++i) ov[i] = av[i] > lo ? av[i] : lo;
  if (tracking({&a})) {
    Tensor mask = Tensor::zeros(a.shape());
    auto mv = mask.values_mut();
    for (long i = 0; i < a.size(); ++i) mv[i] = av[i] > lo ? 1.0 : 0.0;
    record({a}, out, [mask](const Tensor& g) -> std::vector<Tensor> {
      return {mul(g, mask)};
    });
  }
  return out;
}

Tensor square(const Tensor& a) { return mul(a, a); }

Tensor concat(std::span<const Tensor> parts) {
  if (parts.empty()) fail("concat: no inputs");
  for (const Tensor& p : parts) require_defined(p, "concat");
  const Shape& first = parts[0].shape();
  const bool rank2 = first.size() == 2;
  long total_lead = 0;
  for (const Tensor& p : parts) {
    if (p.shape().size() != first.size() ||
        (rank2 && p.shape()[1] != first[1])) {
      fail("concat: incompatible shapes " + shape_str(first) + " and " +
           shape_str(p.shape()));
    }
    total_lead += p.shape()[0];
  }
  Shape out_shape = first;
  out_shape[0] = total_lead;
  Tensor out = Tensor::zeros(out_shape);
  auto ov = out.values_mut();
  std::size_t off = 0;
  for (const Tensor& p : parts) {
    auto pv = p.values();
    std::copy(pv.begin(), pv.end(), ov.begin() + static_cast<long>(off));
    off += pv.size();
  }
  bool track = grad_enabled() && Tape::current() != nullptr;
  bool any_grad = false;
  for (const Tensor& p : parts) any_grad = any_grad || p.requires_grad();
  if (track && any_grad) {
    std::vector<Tensor> inputs(parts.begin(), parts.end());
    std::vector<long> lead_sizes;
    for (const Tensor& p : parts) lead_sizes.push_back(p.shape()[0]);
    record(inputs, out, [lead_sizes, inputs](const Tensor& g) -> std::vector<Tensor> {
      std::vector<Tensor> gins;
      long r = 0;
      for (std::size_t j = 0; j < lead_sizes.size(); ++j) {
        gins.push_back(inputs[j].requires_grad() ? rows(g, r, r + lead_sizes[j])
                                                 : Tensor());
        r += lead_sizes[j];
      }
      return gins;
    });
  }
  return out;
}

namespace {

// Adjoint of rows(): writes `g` back into a zero tensor of `full_shape`
// starting at leading index i0.
Tensor pad_rows(const Tensor& g, const Shape& full_shape, long i0) {
  Tensor out = Tensor::zeros(full_shape);
  const long row_w =
      full_shape.size() == 2 ? full_shape[1] : 1;  // rank-1 slices elementwise
  auto gv = g.values();
  auto ov = out.values_mut();
  std::copy(gv.begin(), gv.end(), ov.begin() + i0 * row_w);
  if (tracking({&g})) {
    long i1 = i0 + g.shape()[0];
    record({g}, out, [i0, i1](const Tensor& gg) -> std::vector<Tensor> {
      return {rows(gg, i0, i1)};
    });
  }
  return out;
}

}  // namespace

Tensor rows(const Tensor& a, long i0, long i1) {
  require_defined(a, "rows");
  const Shape& s = a.shape();
  if (s.empty() || i0 < 0 || i1 > s[0] || i0 >= i1) {
    fail("rows: bad range [" + std::to_string(i0) + "," + std::to_string(i1) +
         ") for shape " + shape_str(s));
  }
  Shape out_shape = s;
  out_shape[0] = i1 - i0;
  const long row_w = s.size() == 2 ? s[1] : 1;
  Tensor out = Tensor::zeros(out_shape);
  auto av = a.values();
  auto ov = out.values_mut();
  std::copy(av.begin() + i0 * row_w, av.begin() + i1 * row_w, ov.begin());
  if (tracking({&a})) {
    Shape full = a.shape();
    record({a}, out, [full, i0](const Tensor& g) -> std::vector<Tensor> {
      return {pad_rows(g, full, i0)};
    });
  }
  return out;
}

Tensor row_permute(const Tensor& a, std::span<const long> perm) {
  require_defined(a, "row_permute");
  if (a.shape().size() != 2) {
    fail("row_permute: rank-2 required, got " + shape_str(a.shape()));
  }
  const long n = a.rows(), m = a.cols();
  if (static_cast<long>(perm.size()) != n) fail("row_permute: permutation size mismatch");
  Tensor out = Tensor::zeros({n, m});
  auto av = a.values();
  auto ov = out.values_mut();
  for (long r = 0; r < n; ++r) {
    const long src = perm[r];
    if (src < 0 || src >= n) fail("row_permute: index out of range");
    std::copy(av.begin() + src * m, av.begin() + (src + 1) * m, ov.begin() + r * m);
  }
  if (tracking({&a})) {
    std::vector<long> inverse(perm.size());
    for (long r = 0; r < n; ++r) inverse[static_cast<std::size_t>(perm[r])] = r;
    record({a}, out, [inverse](const Tensor& g) -> std::vector<Tensor> {
      return {row_permute(g, inverse)};
    });
  }
  return out;
}

// ---- composites ----

Tensor l2_norm(const Tensor& a) {
  require_defined(a, "l2_norm");
  return sqrt(sum(square(a)));
}

Tensor dot(const Tensor& a, const Tensor& b) {
  require_defined(a, "dot");
  require_defined(b, "dot");
  require_same_shape("dot", a, b);
  return sum(mul(a, b));
}

Tensor cosine_similarity(const Tensor& a, const Tensor& b) {
  require_defined(a, "cosine_similarity");
  require_defined(b, "cosine_similarity");
  require_same_shape("cosine_similarity", a, b);
  Tensor na = clamp_min(l2_norm(a), 1e-12);
  Tensor nb = clamp_min(l2_norm(b), 1e-12);
  return mul(dot(a, b), recip(mul(na, nb)));
}

Tensor row_sum(const Tensor& a) {
  require_defined(a, "row_sum");
  Tensor ones = Tensor::full({a.cols(), 1}, 1.0);
  return matmul(a, ones);
}

Tensor row_mean(const Tensor& a) {
  require_defined(a, "row_mean");
  Tensor w = Tensor::full({a.cols(), 1}, 1.0 / static_cast<double>(a.cols()));
  return matmul(a, w);
}

Tensor row_l2_norm(const Tensor& a) { return sqrt(row_sum(square(a))); }

Tensor row_dot(const Tensor& a, const Tensor& b) {
  require_same_shape("row_dot", a, b);
  return row_sum(mul(a, b));
}

Tensor tile_col(std::span<const double> col, long n_cols) {
  const long n = static_cast<long>(col.size());
  Tensor out = Tensor::zeros({n, n_cols});
  auto ov = out.values_mut();
  for (long r = 0; r < n; ++r) {
    for (long c = 0; c < n_cols; ++c) ov[r * n_cols + c] = col[r];
  }
  return out;
}

// ---- forward_op dispatch ----

namespace {
struct OpName {
  OpKind kind;
  const char* name;
};
constexpr OpName kOpNames[] = {
    {OpKind::add, "add"},
    {OpKind::sub, "sub"},
    {OpKind::mul_elementwise, "mul_elementwise"},
    {OpKind::matmul, "matmul"},
    {OpKind::scalar_mul, "scalar_mul"},
    {OpKind::relu, "relu"},
    {OpKind::tanh, "tanh"},
    {OpKind::mean, "mean"},
    {OpKind::sum, "sum"},
    {OpKind::l2_norm, "l2_norm"},
    {OpKind::dot, "dot"},
    {OpKind::cosine_similarity, "cosine_similarity"},
    {OpKind::square, "square"},
    {OpKind::sqrt, "sqrt"},
    {OpKind::concat, "concat"},
};

void require_arity(OpKind kind, std::span<const Tensor> inputs, std::size_t n) {
  if (inputs.size() != n) {
    fail(std::string(op_kind_name(kind)) + ": expected " + std::to_string(n) +
         " inputs, got " + std::to_string(inputs.size()));
  }
}
}  // namespace

const char* op_kind_name(OpKind kind) {
  for (const auto& e : kOpNames) {
    if (e.kind == kind) return e.name;
  }
  return "?";
}

OpKind op_kind_from_string(const std::string& name) {
  for (const auto& e : kOpNames) {
    if (name == e.name) return e.kind;
  }
  fail("unknown op_kind '" + name + "'");
}

Tensor forward_op(OpKind kind, std::span<const Tensor> inputs) {
  switch (kind) {
    case OpKind::add:
      require_arity(kind, inputs, 2);
      return add(inputs[0], inputs[1]);
    case OpKind::sub:
      require_arity(kind, inputs, 2);
      return sub(inputs[0], inputs[1]);
    case OpKind::mul_elementwise:
      require_arity(kind, inputs, 2);
      return mul(inputs[0], inputs[1]);
    case OpKind::matmul:
      require_arity(kind, inputs, 2);
      return matmul(inputs[0], inputs[1]);
    case OpKind::scalar_mul: {
      require_arity(kind, inputs, 2);
      // inputs[0] is a scalar tensor; kept differentiable via expand+mul.
      if (inputs[0].size() != 1) {
        fail("scalar_mul: first input must be scalar, got shape " +
             shape_str(inputs[0].shape()));
      }
      return mul(expand(inputs[0], inputs[1].shape()), inputs[1]);
    }
    case OpKind::relu:
      require_arity(kind, inputs, 1);
      return relu(inputs[0]);
    case OpKind::tanh:
      require_arity(kind, inputs, 1);
      return tanh(inputs[0]);
    case OpKind::mean:
      require_arity(kind, inputs, 1);
      return mean(inputs[0]);
    case OpKind::sum:
      require_arity(kind, inputs, 1);
      return sum(inputs[0]);
    case OpKind::l2_norm:
      require_arity(kind, inputs, 1);
      return l2_norm(inputs[0]);
    case OpKind::dot:
      require_arity(kind, inputs, 2);
      return dot(inputs[0], inputs[1]);
    case OpKind::cosine_similarity:
      require_arity(kind, inputs, 2);
      return cosine_similarity(inputs[0], inputs[1]);
    case OpKind::square:
      require_arity(kind, inputs, 1);
      return square(inputs[0]);
    case OpKind::sqrt:
      require_arity(kind, inputs, 1);
      return sqrt(inputs[0]);
    case OpKind::concat:
      if (inputs.empty()) fail("concat: expected at least 1 input, got 0");
      return concat(inputs);
  }
  fail("forward_op: unhandled op kind");
}

}  // namespace maem::ad
