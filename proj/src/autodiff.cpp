#include "mcddpm/autodiff.hpp"

#include <cmath>
#include <complex>

#include "mcddpm/error.hpp"
#include "mcddpm/kernels.hpp"

namespace mcddpm::ad {

Var Tape::constant(Tensor value) { return record(std::move(value), false, nullptr); }

Var Tape::variable(Tensor value) { return record(std::move(value), true, nullptr); }

Var Tape::record(Tensor value, bool requires_grad, Backward backward) {
  nodes_.push_back(Node{std::move(value), Tensor{}, requires_grad, std::move(backward)});
  return Var{nodes_.size() - 1};
}

Tensor& Tape::grad_ref(std::size_t id) {
  Node& n = nodes_[id];
  if (n.grad.data.empty() && !n.value.data.empty()) n.grad = Tensor::zeros_like(n.value);
  return n.grad;
}

Tensor Tape::grad(Var v) const {
  const Node& n = nodes_[v.id];
  return n.grad.data.empty() ? Tensor::zeros_like(n.value) : n.grad;
}

void Tape::backward(Var root) {
  require(nodes_[root.id].value.size() == 1, ErrorKind::InvalidArgument, "Tape::backward: root must be a scalar");
  for (auto& n : nodes_) n.grad = Tensor{};
  grad_ref(root.id)[0] = 1.0;
  for (std::size_t i = root.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || !n.backward || n.grad.data.empty()) continue;
    n.backward(*this, i);
  }
}

namespace {

kernels::ConvShape conv_shape(const Tensor& x, const Tensor& w) {
  require(x.rank() == 3 && w.rank() == 4 && w.dim(1) == x.dim(0) && w.dim(2) == w.dim(3) && w.dim(2) % 2 == 1,
          ErrorKind::ShapeMismatch, "conv2d: incompatible input/weight shapes");
  return {x.dim(0), w.dim(0), x.dim(1), x.dim(2), w.dim(2)};
}

}  // namespace

Var conv2d(Tape& tape, Var x, Var w, Var b) {
  const Tensor& xv = tape.value(x);
  const Tensor& wv = tape.value(w);
  const auto s = conv_shape(xv, wv);
  require(tape.value(b).size() == std::size_t(s.out_channels), ErrorKind::ShapeMismatch, "conv2d: bias size");
  Tensor out({s.out_channels, s.height, s.width});
  kernels::parallel::conv2d_forward(s, xv.span(), wv.span(), tape.value(b).span(), out.span());
  const bool rg = tape.needs(x) || tape.needs(w) || tape.needs(b);
  return tape.record(std::move(out), rg, [x, w, b, s](Tape& t, std::size_t self) {
    const Tensor& g = t.grad_of(self);
    if (t.needs(x)) kernels::parallel::conv2d_backward_input(s, g.span(), t.value(w).span(), t.grad_ref(x.id).span());
    if (t.needs(w) || t.needs(b)) {
      // Weight and bias gradients come from one fused kernel; a constant side gets a scratch buffer.
      Tensor scratch_w, scratch_b;
      Tensor& gw = t.needs(w) ? t.grad_ref(w.id) : (scratch_w = Tensor::zeros_like(t.value(w)));
      Tensor& gb = t.needs(b) ? t.grad_ref(b.id) : (scratch_b = Tensor::zeros_like(t.value(b)));
      kernels::parallel::conv2d_backward_params(s, t.value(x).span(), g.span(), gw.span(), gb.span());
    }
  });
}

Var add_channel_bias(Tape& tape, Var x, Var v) {
  const Tensor& xv = tape.value(x);
  const Tensor& vv = tape.value(v);
  require(xv.rank() == 3 && vv.size() == std::size_t(xv.dim(0)), ErrorKind::ShapeMismatch,
          "add_channel_bias: bias length must equal channel count");
  const std::size_t plane = std::size_t(xv.dim(1)) * xv.dim(2);
  Tensor out = xv;
  for (int c = 0; c < xv.dim(0); ++c)
    for (std::size_t i = 0; i < plane; ++i) out[c * plane + i] += vv[c];
  return tape.record(std::move(out), tape.needs(x) || tape.needs(v), [x, v, plane](Tape& t, std::size_t self) {
    const Tensor& g = t.grad_of(self);
    if (t.needs(x)) {
      Tensor& gx = t.grad_ref(x.id);
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
    }
    if (t.needs(v)) {
      Tensor& gv = t.grad_ref(v.id);
      for (std::size_t c = 0; c < gv.size(); ++c) {
        double acc = 0.0;
        for (std::size_t i = 0; i < plane; ++i) acc += g[c * plane + i];
        gv[c] += acc;
      }
    }
  });
}

Var add(Tape& tape, Var a, Var b) {
  const Tensor& av = tape.value(a);
  const Tensor& bv = tape.value(b);
  require(av.same_shape(bv), ErrorKind::ShapeMismatch, "add: shape mismatch");
  Tensor out = av;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  return tape.record(std::move(out), tape.needs(a) || tape.needs(b), [a, b](Tape& t, std::size_t self) {
    const Tensor& g = t.grad_of(self);
    for (Var in : {a, b}) {
      if (!t.needs(in)) continue;
      Tensor& gi = t.grad_ref(in.id);
      for (std::size_t i = 0; i < g.size(); ++i) gi[i] += g[i];
    }
  });
}

Var scale(Tape& tape, Var x, double s) {
  Tensor out = tape.value(x);
  for (auto& v : out.data) v *= s;
  return tape.record(std::move(out), tape.needs(x), [x, s](Tape& t, std::size_t self) {
    const Tensor& g = t.grad_of(self);
    Tensor& gx = t.grad_ref(x.id);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += s * g[i];
  });
}

Var gain(Tape& tape, Var k, Var x) {
  const Tensor& kv = tape.value(k);
  require(kv.size() == 1, ErrorKind::ShapeMismatch, "gain: the gain must hold one element");
  Tensor out = tape.value(x);
  for (auto& v : out.data) v *= kv[0];
  return tape.record(std::move(out), tape.needs(k) || tape.needs(x), [k, x](Tape& t, std::size_t self) {
    const Tensor& g = t.grad_of(self);
    if (t.needs(x)) {
      const double kv = t.value(k)[0];
      Tensor& gx = t.grad_ref(x.id);
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += kv * g[i];
    }
    if (t.needs(k)) {
      const Tensor& xv = t.value(x);
      double acc = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) acc += g[i] * xv[i];
      t.grad_ref(k.id)[0] += acc;
    }
  });
}

Var silu(Tape& tape, Var x) {
  const Tensor& xv = tape.value(x);
  Tensor out = Tensor::zeros_like(xv);
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = xv[i] / (1.0 + std::exp(-xv[i]));
  return tape.record(std::move(out), tape.needs(x), [x](Tape& t, std::size_t self) {
    const Tensor& g = t.grad_of(self);
    const Tensor& xv = t.value(x);
    Tensor& gx = t.grad_ref(x.id);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double sig = 1.0 / (1.0 + std::exp(-xv[i]));
      gx[i] += g[i] * sig * (1.0 + xv[i] * (1.0 - sig));
    }
  });
}

Var linear(Tape& tape, Var w, Var b, Var v) {
  const Tensor& wv = tape.value(w);
  const Tensor& bv = tape.value(b);
  const Tensor& vv = tape.value(v);
  require(wv.rank() == 2 && bv.size() == std::size_t(wv.dim(0)) && vv.size() == std::size_t(wv.dim(1)),
          ErrorKind::ShapeMismatch, "linear: incompatible shapes");
  const int rows = wv.dim(0), cols = wv.dim(1);
  Tensor out({rows});
  for (int r = 0; r < rows; ++r) {
    double acc = bv[r];
    for (int c = 0; c < cols; ++c) acc += wv[std::size_t(r) * cols + c] * vv[c];
    out[r] = acc;
  }
  const bool rg = tape.needs(w) || tape.needs(b) || tape.needs(v);
  return tape.record(std::move(out), rg, [w, b, v, rows, cols](Tape& t, std::size_t self) {
    const Tensor& g = t.grad_of(self);
    if (t.needs(b)) {
      Tensor& gb = t.grad_ref(b.id);
      for (int r = 0; r < rows; ++r) gb[r] += g[r];
    }
    if (t.needs(w)) {
      Tensor& gw = t.grad_ref(w.id);
      const Tensor& vv = t.value(v);
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) gw[std::size_t(r) * cols + c] += g[r] * vv[c];
    }
    if (t.needs(v)) {
      Tensor& gv = t.grad_ref(v.id);
      const Tensor& wv = t.value(w);
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) gv[c] += g[r] * wv[std::size_t(r) * cols + c];
    }
  });
}

namespace {

// [2,H,W] planes -> unitary transform -> [2,H,W] planes.
Tensor transform_planes(const Tensor& x, int sign) {
  const int h = x.dim(1), w = x.dim(2);
  const std::size_t plane = std::size_t(h) * w;
  std::vector<std::complex<double>> buf(plane);
  for (std::size_t i = 0; i < plane; ++i) buf[i] = {x[i], x[plane + i]};
  kernels::parallel::dft2(buf, h, w, sign);
  const double norm = 1.0 / std::sqrt(double(h) * double(w));
  Tensor out(x.shape);
  for (std::size_t i = 0; i < plane; ++i) {
    out[i] = buf[i].real() * norm;
    out[plane + i] = buf[i].imag() * norm;
  }
  return out;
}

}  // namespace

Var unitary_dft2(Tape& tape, Var x, int sign) {
  const Tensor& xv = tape.value(x);
  require(xv.rank() == 3 && xv.dim(0) == 2, ErrorKind::ShapeMismatch, "unitary_dft2: expects [2,H,W]");
  return tape.record(transform_planes(xv, sign), tape.needs(x), [x, sign](Tape& t, std::size_t self) {
    // The real-linear adjoint of a unitary map is its inverse.
    const Tensor back = transform_planes(t.grad_of(self), -sign);
    Tensor& gx = t.grad_ref(x.id);
    for (std::size_t i = 0; i < back.size(); ++i) gx[i] += back[i];
  });
}

Var column_mask(Tape& tape, Var x, std::vector<std::uint8_t> keep) {
  const Tensor& xv = tape.value(x);
  require(xv.rank() == 3 && keep.size() == std::size_t(xv.dim(2)), ErrorKind::ShapeMismatch,
          "column_mask: flag count must equal width");
  const int w = xv.dim(2);
  Tensor out = xv;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (!keep[i % w]) out[i] = 0.0;
  return tape.record(std::move(out), tape.needs(x), [x, keep = std::move(keep), w](Tape& t, std::size_t self) {
    const Tensor& g = t.grad_of(self);
    Tensor& gx = t.grad_ref(x.id);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (keep[i % w]) gx[i] += g[i];
  });
}

Var squared_error(Tape& tape, Var x, const Tensor& target) {
  const Tensor& xv = tape.value(x);
  require(xv.same_shape(target), ErrorKind::ShapeMismatch, "squared_error: shape mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < xv.size(); ++i) {
    const double d = xv[i] - target[i];
    acc += d * d;
  }
  return tape.record(Tensor::scalar(acc), tape.needs(x), [x, target](Tape& t, std::size_t self) {
    const double g = t.grad_of(self)[0];
    const Tensor& xv = t.value(x);
    Tensor& gx = t.grad_ref(x.id);
    for (std::size_t i = 0; i < xv.size(); ++i) gx[i] += 2.0 * g * (xv[i] - target[i]);
  });
}

}  // namespace mcddpm::ad
