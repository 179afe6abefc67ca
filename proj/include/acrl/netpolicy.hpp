#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "acrl/rng.hpp"

namespace acrl {

struct NetConfig {
  int obs_dim = 11;
  int act_dim = 4;
  int hidden1 = 256;
  int hidden2 = 256;
  double log_std_init = -0.5;
};

template <class S>
using MatX = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S>
using VecX = Eigen::Matrix<S, Eigen::Dynamic, 1>;
template <class S>
using ArrX = Eigen::Array<S, Eigen::Dynamic, 1>;

template <class S>
struct MlpGradsT {
  std::vector<MatX<S>> dW;
  std::vector<VecX<S>> db;
  void zero();
  void add(const MlpGradsT& o);
  bool all_finite() const;
};

// Fully connected net, tanh hidden activations; the output layer is tanh when
// tanh_output is set (actor mean head) and linear otherwise (critic).
// Templated on the scalar: float for training, double for gradient checks.
template <class S>
struct MlpT {
  struct Layer {
    MatX<S> W;
    VecX<S> b;
  };
  std::vector<Layer> layers;
  bool tanh_output = false;

  // act[0] is the input, act[i+1] the output of layer i. Reused across calls.
  struct Workspace {
    std::vector<VecX<S>> act;
  };

  int in_dim() const { return static_cast<int>(layers.front().W.cols()); }
  int out_dim() const { return static_cast<int>(layers.back().W.rows()); }

  const VecX<S>& forward(const VecX<S>& x, Workspace& ws) const;

  // dy = dL/d(output). Accumulates into g; ws must hold the matching forward.
  void backward(const Workspace& ws, const VecX<S>& dy, MlpGradsT<S>& g) const;

  MlpGradsT<S> make_grads() const;
};

// Weights uniform in +-gain*sqrt(3/fan_in) (row-major draw order), biases
// zero. Hidden layers use gain 1; the output layer uses out_gain.
template <class S>
MlpT<S> init_mlp(const std::vector<int>& dims, bool tanh_output, double out_gain, Rng& rng);

template <class S>
struct ActionDistT {
  VecX<S> mean;
  VecX<S> std_dev;
};

template <class S>
struct PolicyParametersT {
  MlpT<S> actor;    // tanh head: action mean componentwise in (-1,1)
  MlpT<S> critic;   // linear scalar head
  VecX<S> log_std;  // state-independent, trained with the actor
  std::uint32_t version = 0;
};

using PolicyParameters = PolicyParametersT<float>;

template <class S>
PolicyParametersT<S> init_policy(const NetConfig& cfg, std::uint64_t seed);

// Casts a float policy to double for 64-bit checks.
PolicyParametersT<double> widen(const PolicyParameters& p);

template <class S>
ActionDistT<S> forward_actor(const PolicyParametersT<S>& p, const VecX<S>& obs,
                             typename MlpT<S>::Workspace& ws);

template <class S>
S forward_critic(const PolicyParametersT<S>& p, const VecX<S>& obs,
                 typename MlpT<S>::Workspace& ws);

// One normal draw per component, in component order.
template <class S>
VecX<S> sample_action(const ActionDistT<S>& d, Rng& rng);

// Diagonal Gaussian log density.
template <class S>
S log_prob(const ActionDistT<S>& d, const VecX<S>& action);

template <class S>
S dist_entropy(const ActionDistT<S>& d);

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Moments are kept per tensor, enumeration order W0,b0,W1,b1,...,extra.
template <class S>
struct AdamStateT {
  std::vector<ArrX<S>> m;
  std::vector<ArrX<S>> v;
  std::uint64_t step = 0;
};

template <class S>
AdamStateT<S> make_adam(const MlpT<S>& net, const VecX<S>* extra);

// One bias-corrected Adam step over the net (and the extra tensor when
// given). Throws std::runtime_error on non-finite gradients; zero gradients
// leave parameters unchanged while the step counter still advances.
template <class S>
void adam_update(MlpT<S>& net, VecX<S>* extra, const MlpGradsT<S>& g, const VecX<S>* extra_grad,
                 AdamStateT<S>& st, double lr, const AdamConfig& ac);

struct OptimizerState {
  AdamStateT<float> actor;  // log_std rides along as the trailing tensor
  AdamStateT<float> critic;
};

OptimizerState make_optimizer(const PolicyParameters& p);

}  // namespace acrl
