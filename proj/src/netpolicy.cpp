#include "acrl/netpolicy.hpp"

#include <cmath>
#include <stdexcept>

namespace acrl {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
}

template <class S>
void MlpGradsT<S>::zero() {
  for (auto& m : dW) m.setZero();
  for (auto& v : db) v.setZero();
}

template <class S>
void MlpGradsT<S>::add(const MlpGradsT& o) {
  for (std::size_t i = 0; i < dW.size(); ++i) dW[i] += o.dW[i];
  for (std::size_t i = 0; i < db.size(); ++i) db[i] += o.db[i];
}

template <class S>
bool MlpGradsT<S>::all_finite() const {
  for (const auto& m : dW) {
    if (!m.allFinite()) return false;
  }
  for (const auto& v : db) {
    if (!v.allFinite()) return false;
  }
  return true;
}

template <class S>
const VecX<S>& MlpT<S>::forward(const VecX<S>& x, Workspace& ws) const {
  std::size_t L = layers.size();
  ws.act.resize(L + 1);
  ws.act[0] = x;
  for (std::size_t i = 0; i < L; ++i) {
    VecX<S>& out = ws.act[i + 1];
    out.noalias() = layers[i].W * ws.act[i];
    out += layers[i].b;
    if (i + 1 < L || tanh_output) {
      out = out.array().tanh().matrix();
    }
  }
  return ws.act[L];
}

template <class S>
void MlpT<S>::backward(const Workspace& ws, const VecX<S>& dy, MlpGradsT<S>& g) const {
  std::size_t L = layers.size();
  VecX<S> delta;  // dL/dz of the current layer
  if (tanh_output) {
    delta = dy.array() * (S(1) - ws.act[L].array().square());
  } else {
    delta = dy;
  }
  for (std::size_t i = L; i-- > 0;) {
    g.dW[i].noalias() += delta * ws.act[i].transpose();
    g.db[i] += delta;
    if (i > 0) {
      VecX<S> back = layers[i].W.transpose() * delta;
      delta = back.array() * (S(1) - ws.act[i].array().square());
    }
  }
}

template <class S>
MlpGradsT<S> MlpT<S>::make_grads() const {
  MlpGradsT<S> g;
  for (const Layer& l : layers) {
    g.dW.push_back(MatX<S>::Zero(l.W.rows(), l.W.cols()));
    g.db.push_back(VecX<S>::Zero(l.b.size()));
  }
  return g;
}

template <class S>
MlpT<S> init_mlp(const std::vector<int>& dims, bool tanh_output, double out_gain, Rng& rng) {
  MlpT<S> net;
  net.tanh_output = tanh_output;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    typename MlpT<S>::Layer l;
    l.W.resize(dims[i + 1], dims[i]);
    l.b = VecX<S>::Zero(dims[i + 1]);
    double gain = (i + 2 == dims.size()) ? out_gain : 1.0;
    double limit = gain * std::sqrt(3.0 / static_cast<double>(dims[i]));
    for (Eigen::Index r = 0; r < l.W.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.W.cols(); ++c) {
        l.W(r, c) = static_cast<S>(rng.uniform(-limit, limit));
      }
    }
    net.layers.push_back(std::move(l));
  }
  return net;
}

template <class S>
PolicyParametersT<S> init_policy(const NetConfig& cfg, std::uint64_t seed) {
  PolicyParametersT<S> p;
  Rng actor_rng(derive_seed(seed, Stream::Init, 0));
  Rng critic_rng(derive_seed(seed, Stream::Init, 1));
  p.actor = init_mlp<S>({cfg.obs_dim, cfg.hidden1, cfg.hidden2, cfg.act_dim}, true, 0.01, actor_rng);
  p.critic = init_mlp<S>({cfg.obs_dim, cfg.hidden1, cfg.hidden2, 1}, false, 1.0, critic_rng);
  p.log_std = VecX<S>::Constant(cfg.act_dim, static_cast<S>(cfg.log_std_init));
  p.version = 0;
  return p;
}

PolicyParametersT<double> widen(const PolicyParameters& p) {
  PolicyParametersT<double> w;
  w.actor.tanh_output = p.actor.tanh_output;
  for (const auto& l : p.actor.layers) {
    w.actor.layers.push_back({l.W.cast<double>(), l.b.cast<double>()});
  }
  w.critic.tanh_output = p.critic.tanh_output;
  for (const auto& l : p.critic.layers) {
    w.critic.layers.push_back({l.W.cast<double>(), l.b.cast<double>()});
  }
  w.log_std = p.log_std.cast<double>();
  w.version = p.version;
  return w;
}

template <class S>
ActionDistT<S> forward_actor(const PolicyParametersT<S>& p, const VecX<S>& obs,
                             typename MlpT<S>::Workspace& ws) {
  ActionDistT<S> d;
  d.mean = p.actor.forward(obs, ws);
  d.std_dev = p.log_std.array().exp().matrix();
  return d;
}

template <class S>
S forward_critic(const PolicyParametersT<S>& p, const VecX<S>& obs,
                 typename MlpT<S>::Workspace& ws) {
  return p.critic.forward(obs, ws)(0);
}

template <class S>
VecX<S> sample_action(const ActionDistT<S>& d, Rng& rng) {
  VecX<S> a(d.mean.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    a(i) = d.mean(i) + d.std_dev(i) * static_cast<S>(rng.normal());
  }
  return a;
}

template <class S>
S log_prob(const ActionDistT<S>& d, const VecX<S>& action) {
  S lp = S(0);
  for (Eigen::Index i = 0; i < action.size(); ++i) {
    S z = (action(i) - d.mean(i)) / d.std_dev(i);
    lp += S(-0.5) * z * z - std::log(d.std_dev(i)) - S(0.5) * S(kLog2Pi);
  }
  return lp;
}

template <class S>
S dist_entropy(const ActionDistT<S>& d) {
  S h = S(0);
  for (Eigen::Index i = 0; i < d.std_dev.size(); ++i) {
    h += std::log(d.std_dev(i)) + S(0.5) * (S(1) + S(kLog2Pi));
  }
  return h;
}

template <class S>
AdamStateT<S> make_adam(const MlpT<S>& net, const VecX<S>* extra) {
  AdamStateT<S> st;
  for (const auto& l : net.layers) {
    st.m.push_back(ArrX<S>::Zero(l.W.size()));
    st.v.push_back(ArrX<S>::Zero(l.W.size()));
    st.m.push_back(ArrX<S>::Zero(l.b.size()));
    st.v.push_back(ArrX<S>::Zero(l.b.size()));
  }
  if (extra) {
    st.m.push_back(ArrX<S>::Zero(extra->size()));
    st.v.push_back(ArrX<S>::Zero(extra->size()));
  }
  st.step = 0;
  return st;
}

namespace {

template <class S>
void adam_tensor(S* p, const S* g, Eigen::Index n, ArrX<S>& m, ArrX<S>& v, double lr, S bc1,
                 S bc2, const AdamConfig& ac) {
  S b1 = static_cast<S>(ac.beta1);
  S b2 = static_cast<S>(ac.beta2);
  S eps = static_cast<S>(ac.eps);
  S a = static_cast<S>(lr);
  for (Eigen::Index i = 0; i < n; ++i) {
    m(i) = b1 * m(i) + (S(1) - b1) * g[i];
    v(i) = b2 * v(i) + (S(1) - b2) * g[i] * g[i];
    S mhat = m(i) / bc1;
    S vhat = v(i) / bc2;
    p[i] -= a * mhat / (std::sqrt(vhat) + eps);
  }
}

}  // namespace

template <class S>
void adam_update(MlpT<S>& net, VecX<S>* extra, const MlpGradsT<S>& g, const VecX<S>* extra_grad,
                 AdamStateT<S>& st, double lr, const AdamConfig& ac) {
  if (!g.all_finite() || (extra_grad && !extra_grad->allFinite())) {
    throw std::runtime_error("adam_update: non-finite gradient");
  }
  st.step += 1;
  S bc1 = static_cast<S>(1.0 - std::pow(ac.beta1, static_cast<double>(st.step)));
  S bc2 = static_cast<S>(1.0 - std::pow(ac.beta2, static_cast<double>(st.step)));
  std::size_t t = 0;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    auto& l = net.layers[i];
    adam_tensor<S>(l.W.data(), g.dW[i].data(), l.W.size(), st.m[t], st.v[t], lr, bc1, bc2, ac);
    ++t;
    adam_tensor<S>(l.b.data(), g.db[i].data(), l.b.size(), st.m[t], st.v[t], lr, bc1, bc2, ac);
    ++t;
  }
  if (extra) {
    adam_tensor<S>(extra->data(), extra_grad->data(), extra->size(), st.m[t], st.v[t], lr, bc1,
                   bc2, ac);
  }
}

OptimizerState make_optimizer(const PolicyParameters& p) {
  OptimizerState o;
  o.actor = make_adam<float>(p.actor, &p.log_std);
  o.critic = make_adam<float>(p.critic, nullptr);
  return o;
}

template struct MlpGradsT<float>;
template struct MlpGradsT<double>;
template struct MlpT<float>;
template struct MlpT<double>;

template MlpT<float> init_mlp<float>(const std::vector<int>&, bool, double, Rng&);
template MlpT<double> init_mlp<double>(const std::vector<int>&, bool, double, Rng&);
template PolicyParametersT<float> init_policy<float>(const NetConfig&, std::uint64_t);
template PolicyParametersT<double> init_policy<double>(const NetConfig&, std::uint64_t);
template ActionDistT<float> forward_actor<float>(const PolicyParametersT<float>&,
                                                 const VecX<float>&, MlpT<float>::Workspace&);
template ActionDistT<double> forward_actor<double>(const PolicyParametersT<double>&,
                                                   const VecX<double>&, MlpT<double>::Workspace&);
template float forward_critic<float>(const PolicyParametersT<float>&, const VecX<float>&,
                                     MlpT<float>::Workspace&);
template double forward_critic<double>(const PolicyParametersT<double>&, const VecX<double>&,
                                       MlpT<double>::Workspace&);
template VecX<float> sample_action<float>(const ActionDistT<float>&, Rng&);
template VecX<double> sample_action<double>(const ActionDistT<double>&, Rng&);
template float log_prob<float>(const ActionDistT<float>&, const VecX<float>&);
template double log_prob<double>(const ActionDistT<double>&, const VecX<double>&);
template float dist_entropy<float>(const ActionDistT<float>&);
template double dist_entropy<double>(const ActionDistT<double>&);
template AdamStateT<float> make_adam<float>(const MlpT<float>&, const VecX<float>*);
template AdamStateT<double> make_adam<double>(const MlpT<double>&, const VecX<double>*);
template void adam_update<float>(MlpT<float>&, VecX<float>*, const MlpGradsT<float>&,
                                 const VecX<float>*, AdamStateT<float>&, double,
                                 const AdamConfig&);
template void adam_update<double>(MlpT<double>&, VecX<double>*, const MlpGradsT<double>&,
                                  const VecX<double>*, AdamStateT<double>&, double,
                                  const AdamConfig&);

}  // namespace acrl
