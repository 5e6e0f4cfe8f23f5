#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "twinsync/rng.hpp"

namespace twinsync {

enum class Act { Identity, Relu, Tanh, Sigmoid };

inline const char* act_name(Act a) {
  switch (a) {
    case Act::Identity: return "identity";
    case Act::Relu: return "relu";
    case Act::Tanh: return "tanh";
    case Act::Sigmoid: return "sigmoid";
  }
  throw std::invalid_argument("act_name: bad activation");
}

inline Act act_from_name(const std::string& s) {
  if (s == "identity") return Act::Identity;
  if (s == "relu") return Act::Relu;
  if (s == "tanh") return Act::Tanh;
  if (s == "sigmoid") return Act::Sigmoid;
  throw std::invalid_argument("act_from_name: unknown activation '" + s + "'");
}

inline double act_apply(Act a, double z) {
  switch (a) {
    case Act::Identity: return z;
    case Act::Relu: return z > 0.0 ? z : 0.0;
    case Act::Tanh: return std::tanh(z);
    case Act::Sigmoid: return 1.0 / (1.0 + std::exp(-z));
  }
  return z;
}

// Derivative dy/dz given pre-activation z and output y.
inline double act_derivative(Act a, double z, double y) {
  switch (a) {
    case Act::Identity: return 1.0;
    case Act::Relu: return z > 0.0 ? 1.0 : 0.0;
    case Act::Tanh: return 1.0 - y * y;
    case Act::Sigmoid: return y * (1.0 - y);
  }
  return 1.0;
}

struct Layer {
  int in = 0;
  int out = 0;
  std::vector<double> w;   // row-major [out][in]
  std::vector<double> b;   // [out]
  std::vector<Act> act;    // size 1 (uniform) or size out (per output unit)

  Act unit_act(int o) const { return act.size() == 1 ? act[0] : act[static_cast<std::size_t>(o)]; }
};

struct DenseNet {
  std::vector<Layer> layers;

  int in_dim() const { return layers.empty() ? 0 : layers.front().in; }
  int out_dim() const { return layers.empty() ? 0 : layers.back().out; }

  std::size_t param_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.w.size() + l.b.size();
    return n;
  }

  void validate() const {
    if (layers.empty()) throw std::invalid_argument("DenseNet: no layers");
    for (std::size_t i = 0; i < layers.size(); ++i) {
      const auto& l = layers[i];
      if (l.in < 1 || l.out < 1) throw std::invalid_argument("DenseNet: non-positive layer dim");
      if (l.w.size() != static_cast<std::size_t>(l.in) * static_cast<std::size_t>(l.out) ||
          l.b.size() != static_cast<std::size_t>(l.out))
        throw std::invalid_argument("DenseNet: parameter shape mismatch");
      if (l.act.size() != 1 && l.act.size() != static_cast<std::size_t>(l.out))
        throw std::invalid_argument("DenseNet: activation list size mismatch");
      if (i > 0 && layers[i - 1].out != l.in)
        throw std::invalid_argument("DenseNet: layer dimensions do not chain");
      for (double v : l.w)
        if (!std::isfinite(v)) throw std::invalid_argument("DenseNet: non-finite weight");
      for (double v : l.b)
        if (!std::isfinite(v)) throw std::invalid_argument("DenseNet: non-finite bias");
    }
  }
};

namespace detail {

inline Layer make_layer(int in, int out, std::vector<Act> act, Rng& rng) {
  Layer l;
  l.in = in;
  l.out = out;
  l.act = std::move(act);
  l.w.resize(static_cast<std::size_t>(in) * static_cast<std::size_t>(out));
  l.b.resize(static_cast<std::size_t>(out));
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));  // uniform fan-in scaling
  for (auto& v : l.w) v = rng.uniform(-bound, bound);
  for (auto& v : l.b) v = rng.uniform(-bound, bound);
  return l;
}

}  // namespace detail

inline DenseNet make_mlp(int in, const std::vector<int>& hidden, int out, Act hidden_act,
                         std::vector<Act> out_act, Rng& rng) {
  DenseNet net;
  int prev = in;
  for (int h : hidden) {
    net.layers.push_back(detail::make_layer(prev, h, {hidden_act}, rng));
    prev = h;
  }
  net.layers.push_back(detail::make_layer(prev, out, std::move(out_act), rng));
  net.validate();
  return net;
}

inline DenseNet make_mlp(int in, const std::vector<int>& hidden, int out, Act hidden_act,
                         Act out_act, Rng& rng) {
  return make_mlp(in, hidden, out, hidden_act, std::vector<Act>{out_act}, rng);
}

// Per-layer pre-activations and outputs of one forward pass; reused across
// calls to keep the training loops allocation-free.
struct ForwardTrace {
  std::vector<std::vector<double>> pre;   // pre[l]: layer l pre-activation
  std::vector<std::vector<double>> act;   // act[l]: layer l output
  std::vector<double> input;              // copy of x

  std::span<const double> output() const { return act.back(); }
};

inline void forward_trace(const DenseNet& net, std::span<const double> x, ForwardTrace& tr) {
  if (static_cast<int>(x.size()) != net.in_dim())
    throw std::invalid_argument("forward: input size " + std::to_string(x.size()) +
                                " != in_dim " + std::to_string(net.in_dim()));
  const std::size_t n_layers = net.layers.size();
  tr.pre.resize(n_layers);
  tr.act.resize(n_layers);
  tr.input.assign(x.begin(), x.end());
  const double* cur = tr.input.data();
  for (std::size_t li = 0; li < n_layers; ++li) {
    const Layer& l = net.layers[li];
    tr.pre[li].resize(static_cast<std::size_t>(l.out));
    tr.act[li].resize(static_cast<std::size_t>(l.out));
    double* z = tr.pre[li].data();
    double* y = tr.act[li].data();
    const double* wp = l.w.data();
    for (int o = 0; o < l.out; ++o) {
      const double* row = wp + static_cast<std::size_t>(o) * static_cast<std::size_t>(l.in);
      double acc = l.b[static_cast<std::size_t>(o)];
      for (int i = 0; i < l.in; ++i) acc += row[i] * cur[i];
      z[o] = acc;
      y[o] = act_apply(l.unit_act(o), acc);
    }
    cur = y;
  }
}

inline std::vector<double> forward(const DenseNet& net, std::span<const double> x) {
  ForwardTrace tr;
  forward_trace(net, x, tr);
  return std::vector<double>(tr.output().begin(), tr.output().end());
}

// Parameter and input gradients of a scalar loss, given dL/d(output).
struct NetGrads {
  std::vector<std::vector<double>> dw;
  std::vector<std::vector<double>> db;
  std::vector<double> dx;

  void init_like(const DenseNet& net) {
    dw.resize(net.layers.size());
    db.resize(net.layers.size());
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
      dw[i].assign(net.layers[i].w.size(), 0.0);
      db[i].assign(net.layers[i].b.size(), 0.0);
    }
    dx.assign(static_cast<std::size_t>(net.in_dim()), 0.0);
  }

  void zero() {
    for (auto& v : dw) std::fill(v.begin(), v.end(), 0.0);
    for (auto& v : db) std::fill(v.begin(), v.end(), 0.0);
    std::fill(dx.begin(), dx.end(), 0.0);
  }

  void scale(double s) {
    for (auto& v : dw)
      for (auto& x : v) x *= s;
    for (auto& v : db)
      for (auto& x : v) x *= s;
    for (auto& x : dx) x *= s;
  }
};

namespace detail {

// Shared backward core. When grads == nullptr only the input gradient is
// produced (actor updates differentiate the critic w.r.t. its action input
// without touching critic parameters).
inline void backward_core(const DenseNet& net, const ForwardTrace& tr,
                          std::span<const double> upstream, NetGrads* grads, bool accumulate,
                          std::vector<double>* dx_out, std::vector<double>& delta_buf,
                          std::vector<double>& delta_prev_buf) {
  const std::size_t n_layers = net.layers.size();
  if (static_cast<int>(upstream.size()) != net.out_dim())
    throw std::invalid_argument("backward: upstream size != out_dim");
  if (grads && !accumulate) grads->zero();

  std::vector<double>& delta = delta_buf;
  std::vector<double>& delta_prev = delta_prev_buf;
  delta.assign(upstream.begin(), upstream.end());

  for (std::size_t li_plus = n_layers; li_plus-- > 0;) {
    const Layer& l = net.layers[li_plus];
    const double* z = tr.pre[li_plus].data();
    const double* y = tr.act[li_plus].data();
    const double* below = li_plus == 0 ? tr.input.data() : tr.act[li_plus - 1].data();

    // dL/dz = dL/dy * act'(z)
    for (int o = 0; o < l.out; ++o)
      delta[static_cast<std::size_t>(o)] *= act_derivative(l.unit_act(o), z[o], y[o]);

    if (grads) {
      double* dwp = grads->dw[li_plus].data();
      double* dbp = grads->db[li_plus].data();
      for (int o = 0; o < l.out; ++o) {
        const double d = delta[static_cast<std::size_t>(o)];
        dbp[o] += d;
        double* dwr = dwp + static_cast<std::size_t>(o) * static_cast<std::size_t>(l.in);
        for (int i = 0; i < l.in; ++i) dwr[i] += d * below[i];
      }
    }

    // dL/d(below) unless this is the first layer and nobody wants dx.
    const bool need_below = li_plus > 0 || dx_out != nullptr;
    if (need_below) {
      delta_prev.assign(static_cast<std::size_t>(l.in), 0.0);
      const double* wp = l.w.data();
      for (int o = 0; o < l.out; ++o) {
        const double d = delta[static_cast<std::size_t>(o)];
        const double* row = wp + static_cast<std::size_t>(o) * static_cast<std::size_t>(l.in);
        for (int i = 0; i < l.in; ++i) delta_prev[static_cast<std::size_t>(i)] += d * row[i];
      }
      delta.swap(delta_prev);
    }
  }
  if (dx_out) {
    if (grads) {
      for (std::size_t i = 0; i < delta.size(); ++i) grads->dx[i] += delta[i];
      if (dx_out != &grads->dx) dx_out->assign(delta.begin(), delta.end());
    } else {
      dx_out->assign(delta.begin(), delta.end());
    }
  }
}

}  // namespace detail

// Workspace wrapper so hot loops avoid reallocating the delta buffers.
class BackwardScratch {
 public:
  void run(const DenseNet& net, const ForwardTrace& tr, std::span<const double> upstream,
           NetGrads& grads, bool accumulate) {
    detail::backward_core(net, tr, upstream, &grads, accumulate, &grads.dx, delta_, delta_prev_);
  }

  void input_gradient(const DenseNet& net, const ForwardTrace& tr,
                      std::span<const double> upstream, std::vector<double>& dx) {
    detail::backward_core(net, tr, upstream, nullptr, false, &dx, delta_, delta_prev_);
  }

 private:
  std::vector<double> delta_;
  std::vector<double> delta_prev_;
};

// One-shot analytic gradients of all parameters and of the input.
inline NetGrads backward(const DenseNet& net, std::span<const double> x,
                         std::span<const double> upstream) {
  ForwardTrace tr;
  forward_trace(net, x, tr);
  NetGrads g;
  g.init_like(net);
  BackwardScratch scratch;
  scratch.run(net, tr, upstream, g, false);
  return g;
}

// Whole-minibatch forward/backward. The forward kernel runs on transposed
// weights so the inner loop streams across output units with unit stride;
// buffers persist across calls to keep the training loops allocation-free.
class BatchRunner {
 public:
  // x: batch rows of net.in_dim values, row-major.
  void forward(const DenseNet& net, std::span<const double> x, int batch) {
    const std::size_t n_layers = net.layers.size();
    if (batch < 1 || x.size() != static_cast<std::size_t>(batch) *
                                     static_cast<std::size_t>(net.in_dim()))
      throw std::invalid_argument("BatchRunner: input shape mismatch");
    batch_ = batch;
    wt_.resize(n_layers);
    pre_.resize(n_layers);
    act_.resize(n_layers);
    input_.assign(x.begin(), x.end());
    const double* cur = input_.data();
    int cur_dim = net.in_dim();
    for (std::size_t li = 0; li < n_layers; ++li) {
      const Layer& l = net.layers[li];
      auto& wt = wt_[li];
      wt.resize(l.w.size());
      for (int o = 0; o < l.out; ++o)
        for (int i = 0; i < l.in; ++i)
          wt[static_cast<std::size_t>(i) * l.out + o] =
              l.w[static_cast<std::size_t>(o) * l.in + i];
      auto& z = pre_[li];
      auto& y = act_[li];
      z.resize(static_cast<std::size_t>(batch) * l.out);
      y.resize(z.size());
      for (int b = 0; b < batch; ++b) {
        double* zr = z.data() + static_cast<std::size_t>(b) * l.out;
        const double* xr = cur + static_cast<std::size_t>(b) * cur_dim;
        for (int o = 0; o < l.out; ++o) zr[o] = l.b[static_cast<std::size_t>(o)];
        for (int i = 0; i < l.in; ++i) {
          const double xv = xr[i];
          if (xv == 0.0) continue;  // relu outputs: exact zeros contribute nothing
          const double* wr = wt.data() + static_cast<std::size_t>(i) * l.out;
          for (int o = 0; o < l.out; ++o) zr[o] += xv * wr[o];
        }
        double* yr = y.data() + static_cast<std::size_t>(b) * l.out;
        for (int o = 0; o < l.out; ++o) yr[o] = act_apply(l.unit_act(o), zr[o]);
      }
      cur = y.data();
      cur_dim = l.out;
    }
  }

  int batch() const { return batch_; }
  // batch x out_dim, row-major.
  std::span<const double> output() const { return act_.back(); }

  // upstream: batch x out_dim of dL/dy. Parameter gradients accumulate into
  // grads (callers zero it first); dx_out, when given, receives batch x in.
  // Pass grads = nullptr to differentiate w.r.t. the input only.
  void backward(const DenseNet& net, std::span<const double> upstream, NetGrads* grads,
                std::vector<double>* dx_out) {
    const std::size_t n_layers = net.layers.size();
    if (upstream.size() != static_cast<std::size_t>(batch_) *
                               static_cast<std::size_t>(net.out_dim()))
      throw std::invalid_argument("BatchRunner: upstream shape mismatch");
    delta_.assign(upstream.begin(), upstream.end());
    for (std::size_t li_plus = n_layers; li_plus-- > 0;) {
      const Layer& l = net.layers[li_plus];
      const double* z = pre_[li_plus].data();
      const double* y = act_[li_plus].data();
      const double* below = li_plus == 0 ? input_.data() : act_[li_plus - 1].data();
      for (int b = 0; b < batch_; ++b) {
        double* dr = delta_.data() + static_cast<std::size_t>(b) * l.out;
        const double* zr = z + static_cast<std::size_t>(b) * l.out;
        const double* yr = y + static_cast<std::size_t>(b) * l.out;
        for (int o = 0; o < l.out; ++o) dr[o] *= act_derivative(l.unit_act(o), zr[o], yr[o]);
      }
      if (grads) {
        double* dwp = grads->dw[li_plus].data();
        double* dbp = grads->db[li_plus].data();
        for (int b = 0; b < batch_; ++b) {
          const double* dr = delta_.data() + static_cast<std::size_t>(b) * l.out;
          const double* xr = below + static_cast<std::size_t>(b) * l.in;
          for (int o = 0; o < l.out; ++o) {
            const double d = dr[o];
            if (d == 0.0) continue;
            dbp[o] += d;
            double* dwr = dwp + static_cast<std::size_t>(o) * l.in;
            for (int i = 0; i < l.in; ++i) dwr[i] += d * xr[i];
          }
        }
      }
      const bool need_below = li_plus > 0 || dx_out != nullptr;
      if (need_below) {
        delta_prev_.assign(static_cast<std::size_t>(batch_) * l.in, 0.0);
        const double* wp = net.layers[li_plus].w.data();
        for (int b = 0; b < batch_; ++b) {
          const double* dr = delta_.data() + static_cast<std::size_t>(b) * l.out;
          double* pr = delta_prev_.data() + static_cast<std::size_t>(b) * l.in;
          for (int o = 0; o < l.out; ++o) {
            const double d = dr[o];
            if (d == 0.0) continue;
            const double* wr = wp + static_cast<std::size_t>(o) * l.in;
            for (int i = 0; i < l.in; ++i) pr[i] += d * wr[i];
          }
        }
        delta_.swap(delta_prev_);
      }
    }
    if (dx_out) dx_out->assign(delta_.begin(), delta_.end());
  }

 private:
  int batch_ = 0;
  std::vector<std::vector<double>> wt_;   // per layer: in x out
  std::vector<std::vector<double>> pre_;  // per layer: batch x out
  std::vector<std::vector<double>> act_;
  std::vector<double> input_;
  std::vector<double> delta_, delta_prev_;
};

// Adam state; moments are shaped like the network parameters.
struct OptState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::int64_t step = 0;
  std::vector<std::vector<double>> m_w, v_w, m_b, v_b;
};

inline OptState make_opt_state(const DenseNet& net, double lr = 1e-3) {
  OptState s;
  s.lr = lr;
  s.m_w.resize(net.layers.size());
  s.v_w.resize(net.layers.size());
  s.m_b.resize(net.layers.size());
  s.v_b.resize(net.layers.size());
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    s.m_w[i].assign(net.layers[i].w.size(), 0.0);
    s.v_w[i].assign(net.layers[i].w.size(), 0.0);
    s.m_b[i].assign(net.layers[i].b.size(), 0.0);
    s.v_b[i].assign(net.layers[i].b.size(), 0.0);
  }
  return s;
}

namespace detail {

inline void adam_apply(std::span<double> p, std::span<const double> g, std::span<double> m,
                       std::span<double> v, const OptState& s, double corr1, double corr2) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!std::isfinite(g[i])) throw std::runtime_error("opt_step: non-finite gradient");
    m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * g[i];
    v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * g[i] * g[i];
    const double mhat = m[i] / corr1;
    const double vhat = v[i] / corr2;
    p[i] -= s.lr * mhat / (std::sqrt(vhat) + s.eps);
  }
}

}  // namespace detail

inline void opt_step(DenseNet& net, const NetGrads& grads, OptState& opt) {
  if (grads.dw.size() != net.layers.size())
    throw std::invalid_argument("opt_step: gradient shape mismatch");
  opt.step += 1;
  const double corr1 = 1.0 - std::pow(opt.beta1, static_cast<double>(opt.step));
  const double corr2 = 1.0 - std::pow(opt.beta2, static_cast<double>(opt.step));
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    detail::adam_apply(net.layers[i].w, grads.dw[i], opt.m_w[i], opt.v_w[i], opt, corr1, corr2);
    detail::adam_apply(net.layers[i].b, grads.db[i], opt.m_b[i], opt.v_b[i], opt, corr1, corr2);
  }
}

inline bool same_architecture(const DenseNet& a, const DenseNet& b) {
  if (a.layers.size() != b.layers.size()) return false;
  for (std::size_t i = 0; i < a.layers.size(); ++i) {
    if (a.layers[i].in != b.layers[i].in || a.layers[i].out != b.layers[i].out) return false;
    if (a.layers[i].act != b.layers[i].act) return false;
  }
  return true;
}

// rho*target + (1-rho)*online, element-wise; neither argument is mutated.
inline DenseNet polyak(const DenseNet& target, const DenseNet& online, double rho) {
  if (!(rho >= 0.0 && rho <= 1.0)) throw std::invalid_argument("polyak: rho outside [0, 1]");
  if (!same_architecture(target, online))
    throw std::invalid_argument("polyak: architecture mismatch");
  DenseNet out = target;
  for (std::size_t i = 0; i < out.layers.size(); ++i) {
    for (std::size_t j = 0; j < out.layers[i].w.size(); ++j)
      out.layers[i].w[j] = rho * target.layers[i].w[j] + (1.0 - rho) * online.layers[i].w[j];
    for (std::size_t j = 0; j < out.layers[i].b.size(); ++j)
      out.layers[i].b[j] = rho * target.layers[i].b[j] + (1.0 - rho) * online.layers[i].b[j];
  }
  return out;
}

inline nlohmann::json net_to_json(const DenseNet& net) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : net.layers) {
    nlohmann::json acts = nlohmann::json::array();
    for (Act a : l.act) acts.push_back(act_name(a));
    layers.push_back({{"in", l.in}, {"out", l.out}, {"act", acts}, {"w", l.w}, {"b", l.b}});
  }
  return {{"format", "twinsync-net-v1"}, {"layers", layers}};
}

inline DenseNet net_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "twinsync-net-v1")
    throw std::runtime_error("net_from_json: unknown checkpoint format");
  DenseNet net;
  for (const auto& jl : j.at("layers")) {
    Layer l;
    l.in = jl.at("in").get<int>();
    l.out = jl.at("out").get<int>();
    for (const auto& a : jl.at("act")) l.act.push_back(act_from_name(a.get<std::string>()));
    l.w = jl.at("w").get<std::vector<double>>();
    l.b = jl.at("b").get<std::vector<double>>();
    net.layers.push_back(std::move(l));
  }
  net.validate();
  return net;
}

}  // namespace twinsync
