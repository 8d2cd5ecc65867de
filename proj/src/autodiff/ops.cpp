#include "autodiff/ops.hpp"

#include <cmath>
#include <cstring>

#include "common/errors.hpp"

namespace racelab {

namespace {

Tape* common_tape(std::initializer_list<const Tensor*> operands) {
  Tape* tape = nullptr;
  for (const Tensor* t : operands) {
    if (!t->attached()) continue;
    if (tape && tape != t->tape())
      throw ContractError("operands recorded on different tapes");
    tape = t->tape();
  }
  return tape;
}

Tensor finish(Tape* tape, Tensor value, BackwardFn backward) {
  if (!tape) return value;
  return tape->emit(std::move(value), std::move(backward));
}

double stable_softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double stable_sigmoid(double x) {
  if (x >= 0) {
    double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  double e = std::exp(x);
  return e / (1.0 + e);
}

struct ConvDims {
  int c, h, w;    // input
  int o, kh, kw;  // kernels
  int oh, ow;     // output
  int s;
};

// y[o,oh,ow] = x[c,h,w] (*) k[o,c,kh,kw], valid, stride s. Accumulates.
void conv_fwd(const double* __restrict x, const double* __restrict k,
              double* __restrict y, const ConvDims& d) {
  for (int o = 0; o < d.o; ++o)
    for (int c = 0; c < d.c; ++c)
      for (int di = 0; di < d.kh; ++di)
        for (int dj = 0; dj < d.kw; ++dj) {
          double kv = k[((o * d.c + c) * d.kh + di) * d.kw + dj];
          if (kv == 0.0) continue;
          for (int i = 0; i < d.oh; ++i) {
            const double* xr = x + (c * d.h + i * d.s + di) * d.w + dj;
            double* yr = y + (o * d.oh + i) * d.ow;
            for (int j = 0; j < d.ow; ++j) yr[j] += kv * xr[j * d.s];
          }
        }
}

// dx[c, i*s+di, j*s+dj] += g[o,i,j] * k[o,c,di,dj]  (adjoint scatter)
void conv_scatter(const double* __restrict g, const double* __restrict k,
                  double* __restrict dx, const ConvDims& d) {
  for (int o = 0; o < d.o; ++o)
    for (int c = 0; c < d.c; ++c)
      for (int di = 0; di < d.kh; ++di)
        for (int dj = 0; dj < d.kw; ++dj) {
          double kv = k[((o * d.c + c) * d.kh + di) * d.kw + dj];
          if (kv == 0.0) continue;
          for (int i = 0; i < d.oh; ++i) {
            const double* gr = g + (o * d.oh + i) * d.ow;
            double* xr = dx + (c * d.h + i * d.s + di) * d.w + dj;
            for (int j = 0; j < d.ow; ++j) xr[j * d.s] += kv * gr[j];
          }
        }
}

// dk[o,c,di,dj] += sum_{i,j} g[o,i,j] * x[c, i*s+di, j*s+dj]
void conv_kgrad(const double* __restrict g, const double* __restrict x,
                double* __restrict dk, const ConvDims& d) {
  for (int o = 0; o < d.o; ++o)
    for (int c = 0; c < d.c; ++c)
      for (int di = 0; di < d.kh; ++di)
        for (int dj = 0; dj < d.kw; ++dj) {
          double acc = 0.0;
          for (int i = 0; i < d.oh; ++i) {
            const double* gr = g + (o * d.oh + i) * d.ow;
            const double* xr = x + (c * d.h + i * d.s + di) * d.w + dj;
            for (int j = 0; j < d.ow; ++j) acc += gr[j] * xr[j * d.s];
          }
          dk[((o * d.c + c) * d.kh + di) * d.kw + dj] += acc;
        }
}

using UnaryGrad = void (*)(const double* g, const double* xv, const double* yv,
                           double* dx, int n);

Tensor unary_op(const Tensor& x, double (*f)(double), UnaryGrad grad) {
  Tape* tape = common_tape({&x});
  int n = x.size();
  Tensor y(x.shape());
  {
    const double* xd = x.data().data();
    double* yd = y.mutable_data();
    for (int i = 0; i < n; ++i) yd[i] = f(xd[i]);
  }
  if (!tape) return y;
  return finish(tape, std::move(y),
                [node = x.node(), xv = x.detached(), yv = y.detached(), grad,
                 n](const double* g, GradAccum& acc) {
                  if (node < 0) return;
                  grad(g, xv.data().data(), yv.data().data(), acc.buf(node), n);
                });
}

enum class BinKind { Add, Sub, Mul, Div };

Tensor binary_op(const Tensor& a, const Tensor& b, BinKind kind, const char* name) {
  Tape* tape = common_tape({&a, &b});
  bool a_scalar = a.size() == 1;
  bool b_scalar = b.size() == 1;
  if (!a_scalar && !b_scalar && a.shape() != b.shape())
    throw DimensionError(std::string(name) + ": incompatible shapes " +
                         shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  const Tensor& big = (a_scalar && !b_scalar) ? b : a;
  int n = big.size();
  const double* ad = a.data().data();
  const double* bd = b.data().data();
  if (kind == BinKind::Div) {
    for (int i = 0; i < b.size(); ++i)
      if (bd[i] == 0.0) throw DomainError("div: zero divisor");
  }
  Tensor y(big.shape());
  {
    double* yd = y.mutable_data();
    for (int i = 0; i < n; ++i) {
      double av = ad[a_scalar ? 0 : i];
      double bv = bd[b_scalar ? 0 : i];
      switch (kind) {
        case BinKind::Add: yd[i] = av + bv; break;
        case BinKind::Sub: yd[i] = av - bv; break;
        case BinKind::Mul: yd[i] = av * bv; break;
        case BinKind::Div: yd[i] = av / bv; break;
      }
    }
  }
  if (!tape) return y;
  return finish(
      tape, std::move(y),
      [na = a.node(), nb = b.node(), av = a.detached(), bv = b.detached(),
       a_scalar, b_scalar, n, kind](const double* g, GradAccum& acc) {
        const double* ad = av.data().data();
        const double* bd = bv.data().data();
        if (na >= 0) {
          double* da = acc.buf(na);
          for (int i = 0; i < n; ++i) {
            double gi = g[i];
            double d = 0.0;
            switch (kind) {
              case BinKind::Add:
              case BinKind::Sub: d = gi; break;
              case BinKind::Mul: d = gi * bd[b_scalar ? 0 : i]; break;
              case BinKind::Div: d = gi / bd[b_scalar ? 0 : i]; break;
            }
            da[a_scalar ? 0 : i] += d;
          }
        }
        if (nb >= 0) {
          double* db = acc.buf(nb);
          for (int i = 0; i < n; ++i) {
            double gi = g[i];
            double aa = ad[a_scalar ? 0 : i];
            double bb = bd[b_scalar ? 0 : i];
            double d = 0.0;
            switch (kind) {
              case BinKind::Add: d = gi; break;
              case BinKind::Sub: d = -gi; break;
              case BinKind::Mul: d = gi * aa; break;
              case BinKind::Div: d = -gi * aa / (bb * bb); break;
            }
            db[b_scalar ? 0 : i] += d;
          }
        }
      });
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2)
    throw DimensionError("matmul expects rank-2 tensors, got " +
                         shape_str(a.shape()) + " and " + shape_str(b.shape()));
  int m = a.dim(0), k = a.dim(1), k2 = b.dim(0), n = b.dim(1);
  if (k != k2)
    throw DimensionError("matmul: inner dimensions disagree: " +
                         shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  Tape* tape = common_tape({&a, &b});
  Tensor y({m, n});
  {
    const double* ad = a.data().data();
    const double* bd = b.data().data();
    double* yd = y.mutable_data();
    for (int i = 0; i < m; ++i)
      for (int p = 0; p < k; ++p) {
        double av = ad[i * k + p];
        if (av == 0.0) continue;
        const double* br = bd + p * n;
        double* yr = yd + i * n;
        for (int j = 0; j < n; ++j) yr[j] += av * br[j];
      }
  }
  if (!tape) return y;
  return finish(tape, std::move(y),
                [na = a.node(), nb = b.node(), av = a.detached(),
                 bv = b.detached(), m, k, n](const double* g, GradAccum& acc) {
                  const double* ad = av.data().data();
                  const double* bd = bv.data().data();
                  if (na >= 0) {
                    double* da = acc.buf(na);  // dA = G * B^T
                    for (int i = 0; i < m; ++i)
                      for (int p = 0; p < k; ++p) {
                        double acc_v = 0.0;
                        const double* gr = g + i * n;
                        const double* br = bd + p * n;
                        for (int j = 0; j < n; ++j) acc_v += gr[j] * br[j];
                        da[i * k + p] += acc_v;
                      }
                  }
                  if (nb >= 0) {
                    double* db = acc.buf(nb);  // dB = A^T * G
                    for (int i = 0; i < m; ++i) {
                      const double* gr = g + i * n;
                      const double* ar = ad + i * k;
                      for (int p = 0; p < k; ++p) {
                        double av_ = ar[p];
                        if (av_ == 0.0) continue;
                        double* dbr = db + p * n;
                        for (int j = 0; j < n; ++j) dbr[j] += av_ * gr[j];
                      }
                    }
                  }
                });
}

namespace {

ConvDims kernel_dims(const std::vector<int>& ks, int stride) {
  if (ks.size() != 4)
    throw DimensionError("conv kernels must be [o,c,kh,kw], got " + shape_str(ks));
  if (stride < 1) throw ParameterError("conv stride must be >= 1");
  ConvDims d{};
  d.o = ks[0];
  d.c = ks[1];
  d.kh = ks[2];
  d.kw = ks[3];
  d.s = stride;
  return d;
}

}  // namespace

Tensor conv2d(const Tensor& x, const Tensor& kernels, int stride) {
  const auto& xs = x.shape();
  const auto& ks = kernels.shape();
  if (xs.size() != 3 && xs.size() != 4)
    throw DimensionError("conv2d input must be [c,h,w] or [b,c,h,w], got " +
                         shape_str(xs));
  ConvDims d = kernel_dims(ks, stride);
  bool batched = xs.size() == 4;
  int batch = batched ? xs[0] : 1;
  int c = xs[batched ? 1 : 0], h = xs[batched ? 2 : 1], w = xs[batched ? 3 : 2];
  if (c != d.c)
    throw DimensionError("conv2d: input channels " + std::to_string(c) +
                         " do not match kernel channels " + std::to_string(d.c));
  if (d.kh > h || d.kw > w)
    throw DimensionError("conv2d: kernel " + shape_str(ks) +
                         " larger than input " + shape_str(xs));
  d.h = h;
  d.w = w;
  d.oh = (h - d.kh) / stride + 1;
  d.ow = (w - d.kw) / stride + 1;

  Tape* tape = common_tape({&x, &kernels});
  std::vector<int> yshape = batched ? std::vector<int>{batch, d.o, d.oh, d.ow}
                                    : std::vector<int>{d.o, d.oh, d.ow};
  Tensor y(yshape);
  {
    const double* xd = x.data().data();
    const double* kd = kernels.data().data();
    double* yd = y.mutable_data();
    int xn = c * h * w, yn = d.o * d.oh * d.ow;
    for (int b = 0; b < batch; ++b) conv_fwd(xd + b * xn, kd, yd + b * yn, d);
  }
  if (!tape) return y;
  return finish(tape, std::move(y),
                [nx = x.node(), nk = kernels.node(), xv = x.detached(),
                 kv = kernels.detached(), d, batch](const double* g, GradAccum& acc) {
                  int xn = d.c * d.h * d.w, yn = d.o * d.oh * d.ow;
                  int kn = d.o * d.c * d.kh * d.kw;
                  (void)kn;
                  if (nx >= 0) {
                    double* dx = acc.buf(nx);
                    const double* kd = kv.data().data();
                    for (int b = 0; b < batch; ++b)
                      conv_scatter(g + b * yn, kd, dx + b * xn, d);
                  }
                  if (nk >= 0) {
                    double* dk = acc.buf(nk);
                    const double* xd = xv.data().data();
                    for (int b = 0; b < batch; ++b)
                      conv_kgrad(g + b * yn, xd + b * xn, dk, d);
                  }
                });
}

Tensor conv2d_transpose(const Tensor& y, const Tensor& kernels, int stride) {
  const auto& ys = y.shape();
  const auto& ks = kernels.shape();
  if (ys.size() != 3 && ys.size() != 4)
    throw DimensionError("conv2d_transpose input must be [o,h,w] or [b,o,h,w], got " +
                         shape_str(ys));
  ConvDims d = kernel_dims(ks, stride);
  bool batched = ys.size() == 4;
  int batch = batched ? ys[0] : 1;
  int o = ys[batched ? 1 : 0], oh = ys[batched ? 2 : 1], ow = ys[batched ? 3 : 2];
  if (o != d.o)
    throw DimensionError("conv2d_transpose: input channels " + std::to_string(o) +
                         " do not match kernel output channels " + std::to_string(d.o));
  d.oh = oh;
  d.ow = ow;
  d.h = (oh - 1) * stride + d.kh;
  d.w = (ow - 1) * stride + d.kw;

  Tape* tape = common_tape({&y, &kernels});
  std::vector<int> xshape = batched ? std::vector<int>{batch, d.c, d.h, d.w}
                                    : std::vector<int>{d.c, d.h, d.w};
  Tensor x(xshape);
  {
    const double* yd = y.data().data();
    const double* kd = kernels.data().data();
    double* xd = x.mutable_data();
    int xn = d.c * d.h * d.w, yn = d.o * d.oh * d.ow;
    for (int b = 0; b < batch; ++b) conv_scatter(yd + b * yn, kd, xd + b * xn, d);
  }
  if (!tape) return x;
  return finish(tape, std::move(x),
                [ny = y.node(), nk = kernels.node(), yv = y.detached(),
                 kv = kernels.detached(), d, batch](const double* g, GradAccum& acc) {
                  int xn = d.c * d.h * d.w, yn = d.o * d.oh * d.ow;
                  if (ny >= 0) {
                    double* dy = acc.buf(ny);
                    const double* kd = kv.data().data();
                    for (int b = 0; b < batch; ++b)
                      conv_fwd(g + b * xn, kd, dy + b * yn, d);
                  }
                  if (nk >= 0) {
                    double* dk = acc.buf(nk);
                    const double* yd = yv.data().data();
                    for (int b = 0; b < batch; ++b)
                      conv_kgrad(yd + b * yn, g + b * xn, dk, d);
                  }
                });
}

Tensor tanh(const Tensor& x) {
  return unary_op(
      x, [](double v) { return std::tanh(v); },
      [](const double* g, const double*, const double* yv, double* dx, int n) {
        for (int i = 0; i < n; ++i) dx[i] += g[i] * (1.0 - yv[i] * yv[i]);
      });
}

Tensor relu(const Tensor& x) {
  return unary_op(
      x, [](double v) { return v > 0 ? v : 0.0; },
      [](const double* g, const double* xv, const double*, double* dx, int n) {
        for (int i = 0; i < n; ++i) dx[i] += xv[i] > 0 ? g[i] : 0.0;
      });
}

Tensor softplus(const Tensor& x) {
  return unary_op(
      x, &stable_softplus,
      [](const double* g, const double* xv, const double*, double* dx, int n) {
        for (int i = 0; i < n; ++i) dx[i] += g[i] * stable_sigmoid(xv[i]);
      });
}

Tensor exp(const Tensor& x) {
  return unary_op(
      x, [](double v) { return std::exp(v); },
      [](const double* g, const double*, const double* yv, double* dx, int n) {
        for (int i = 0; i < n; ++i) dx[i] += g[i] * yv[i];
      });
}

Tensor log(const Tensor& x) {
  for (int i = 0; i < x.size(); ++i)
    if (x[i] <= 0.0) throw DomainError("log of non-positive entry");
  return unary_op(
      x, [](double v) { return std::log(v); },
      [](const double* g, const double* xv, const double*, double* dx, int n) {
        for (int i = 0; i < n; ++i) dx[i] += g[i] / xv[i];
      });
}

Tensor sqrt(const Tensor& x) {
  for (int i = 0; i < x.size(); ++i)
    if (x[i] < 0.0) throw DomainError("sqrt of negative entry");
  return unary_op(
      x, [](double v) { return std::sqrt(v); },
      [](const double* g, const double*, const double* yv, double* dx, int n) {
        for (int i = 0; i < n; ++i) dx[i] += 0.5 * g[i] / yv[i];
      });
}

Tensor sigmoid(const Tensor& x) {
  return unary_op(
      x, &stable_sigmoid,
      [](const double* g, const double*, const double* yv, double* dx, int n) {
        for (int i = 0; i < n; ++i) dx[i] += g[i] * yv[i] * (1.0 - yv[i]);
      });
}

Tensor neg(const Tensor& x) {
  return unary_op(
      x, [](double v) { return -v; },
      [](const double* g, const double*, const double*, double* dx, int n) {
        for (int i = 0; i < n; ++i) dx[i] -= g[i];
      });
}

Tensor square(const Tensor& x) {
  return unary_op(
      x, [](double v) { return v * v; },
      [](const double* g, const double* xv, const double*, double* dx, int n) {
        for (int i = 0; i < n; ++i) dx[i] += 2.0 * g[i] * xv[i];
      });
}

Tensor add(const Tensor& a, const Tensor& b) { return binary_op(a, b, BinKind::Add, "add"); }
Tensor sub(const Tensor& a, const Tensor& b) { return binary_op(a, b, BinKind::Sub, "sub"); }
Tensor mul(const Tensor& a, const Tensor& b) { return binary_op(a, b, BinKind::Mul, "mul"); }
Tensor div(const Tensor& a, const Tensor& b) { return binary_op(a, b, BinKind::Div, "div"); }

Tensor affine(const Tensor& x, double scale, double shift) {
  Tape* tape = common_tape({&x});
  int n = x.size();
  Tensor y(x.shape());
  {
    const double* xd = x.data().data();
    double* yd = y.mutable_data();
    for (int i = 0; i < n; ++i) yd[i] = scale * xd[i] + shift;
  }
  if (!tape) return y;
  return finish(tape, std::move(y),
                [node = x.node(), scale, n](const double* g, GradAccum& acc) {
                  if (node < 0) return;
                  double* dx = acc.buf(node);
                  for (int i = 0; i < n; ++i) dx[i] += scale * g[i];
                });
}

Tensor sum(const Tensor& x) {
  Tape* tape = common_tape({&x});
  int n = x.size();
  double s = 0.0;
  const double* xd = x.data().data();
  for (int i = 0; i < n; ++i) s += xd[i];
  Tensor y = Tensor::scalar(s);
  if (!tape) return y;
  return finish(tape, std::move(y),
                [node = x.node(), n](const double* g, GradAccum& acc) {
                  if (node < 0) return;
                  double* dx = acc.buf(node);
                  for (int i = 0; i < n; ++i) dx[i] += g[0];
                });
}

Tensor mean(const Tensor& x) {
  Tape* tape = common_tape({&x});
  int n = x.size();
  double s = 0.0;
  const double* xd = x.data().data();
  for (int i = 0; i < n; ++i) s += xd[i];
  Tensor y = Tensor::scalar(s / n);
  if (!tape) return y;
  return finish(tape, std::move(y),
                [node = x.node(), n](const double* g, GradAccum& acc) {
                  if (node < 0) return;
                  double* dx = acc.buf(node);
                  double gi = g[0] / n;
                  for (int i = 0; i < n; ++i) dx[i] += gi;
                });
}

Tensor add_rowvec(const Tensor& x, const Tensor& v) {
  if (x.rank() != 2)
    throw DimensionError("add_rowvec expects a rank-2 tensor, got " +
                         shape_str(x.shape()));
  int m = x.dim(0), n = x.dim(1);
  if (v.size() != n)
    throw DimensionError("add_rowvec: bias length " + std::to_string(v.size()) +
                         " does not match columns " + std::to_string(n));
  Tape* tape = common_tape({&x, &v});
  Tensor y({m, n});
  {
    const double* xd = x.data().data();
    const double* vd = v.data().data();
    double* yd = y.mutable_data();
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) yd[i * n + j] = xd[i * n + j] + vd[j];
  }
  if (!tape) return y;
  return finish(tape, std::move(y),
                [nx = x.node(), nv = v.node(), m, n](const double* g, GradAccum& acc) {
                  if (nx >= 0) {
                    double* dx = acc.buf(nx);
                    for (int i = 0; i < m * n; ++i) dx[i] += g[i];
                  }
                  if (nv >= 0) {
                    double* dv = acc.buf(nv);
                    for (int i = 0; i < m; ++i)
                      for (int j = 0; j < n; ++j) dv[j] += g[i * n + j];
                  }
                });
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ContractError("concat_cols of an empty list");
  int m = -1, total = 0;
  for (const Tensor& p : parts) {
    if (p.rank() != 2)
      throw DimensionError("concat_cols expects rank-2 tensors, got " +
                           shape_str(p.shape()));
    if (m < 0) m = p.dim(0);
    if (p.dim(0) != m)
      throw DimensionError("concat_cols: row counts differ: " +
                           std::to_string(m) + " vs " + std::to_string(p.dim(0)));
    total += p.dim(1);
  }
  std::vector<const Tensor*> ptrs;
  for (const Tensor& p : parts) ptrs.push_back(&p);
  Tape* tape = nullptr;
  for (const Tensor* p : ptrs) {
    if (!p->attached()) continue;
    if (tape && tape != p->tape())
      throw ContractError("operands recorded on different tapes");
    tape = p->tape();
  }
  Tensor y({m, total});
  {
    double* yd = y.mutable_data();
    int off = 0;
    for (const Tensor& p : parts) {
      int w = p.dim(1);
      const double* pd = p.data().data();
      for (int i = 0; i < m; ++i)
        std::memcpy(yd + i * total + off, pd + i * w, sizeof(double) * w);
      off += w;
    }
  }
  if (!tape) return y;
  std::vector<int> nodes;
  std::vector<int> widths;
  for (const Tensor& p : parts) {
    nodes.push_back(p.node());
    widths.push_back(p.dim(1));
  }
  return finish(tape, std::move(y),
                [nodes, widths, m, total](const double* g, GradAccum& acc) {
                  int off = 0;
                  for (size_t pi = 0; pi < nodes.size(); ++pi) {
                    int w = widths[pi];
                    if (nodes[pi] >= 0) {
                      double* dp = acc.buf(nodes[pi]);
                      for (int i = 0; i < m; ++i)
                        for (int j = 0; j < w; ++j)
                          dp[i * w + j] += g[i * total + off + j];
                    }
                    off += w;
                  }
                });
}

Tensor slice_cols(const Tensor& x, int col0, int col1) {
  if (x.rank() != 2)
    throw DimensionError("slice_cols expects a rank-2 tensor, got " +
                         shape_str(x.shape()));
  int m = x.dim(0), n = x.dim(1);
  if (col0 < 0 || col1 > n || col0 >= col1)
    throw DimensionError("slice_cols: bad range [" + std::to_string(col0) + "," +
                         std::to_string(col1) + ") for " + shape_str(x.shape()));
  int w = col1 - col0;
  Tape* tape = common_tape({&x});
  Tensor y({m, w});
  {
    const double* xd = x.data().data();
    double* yd = y.mutable_data();
    for (int i = 0; i < m; ++i)
      std::memcpy(yd + i * w, xd + i * n + col0, sizeof(double) * w);
  }
  if (!tape) return y;
  return finish(tape, std::move(y),
                [node = x.node(), m, n, w, col0](const double* g, GradAccum& acc) {
                  if (node < 0) return;
                  double* dx = acc.buf(node);
                  for (int i = 0; i < m; ++i)
                    for (int j = 0; j < w; ++j) dx[i * n + col0 + j] += g[i * w + j];
                });
}

Tensor reshape(const Tensor& x, std::vector<int> shape) {
  Tensor y(shape, std::vector<double>(x.data().begin(), x.data().end()));
  if (y.size() != x.size())
    throw DimensionError("reshape: size mismatch " + shape_str(x.shape()) +
                         " -> " + shape_str(shape));
  Tape* tape = common_tape({&x});
  if (!tape) return y;
  return finish(tape, std::move(y),
                [node = x.node(), n = x.size()](const double* g, GradAccum& acc) {
                  if (node < 0) return;
                  double* dx = acc.buf(node);
                  for (int i = 0; i < n; ++i) dx[i] += g[i];
                });
}

}  // namespace racelab
