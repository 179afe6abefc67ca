#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "acrl/checkpoint.hpp"
#include "acrl/netpolicy.hpp"

using namespace acrl;

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

template <class S>
bool same_net(const MlpT<S>& a, const MlpT<S>& b) {
  if (a.layers.size() != b.layers.size() || a.tanh_output != b.tanh_output) return false;
  for (std::size_t i = 0; i < a.layers.size(); ++i) {
    if (a.layers[i].W != b.layers[i].W) return false;
    if (a.layers[i].b != b.layers[i].b) return false;
  }
  return true;
}

MlpT<double> random_net(const std::vector<int>& dims, bool tanh_output, std::uint64_t seed) {
  Rng rng(seed);
  return init_mlp<double>(dims, tanh_output, 1.0, rng);
}

}  // namespace

TEST_CASE("initialization is deterministic in the seed") {
  NetConfig cfg;
  cfg.hidden1 = 32;
  cfg.hidden2 = 32;
  PolicyParameters a = init_policy<float>(cfg, 5);
  PolicyParameters b = init_policy<float>(cfg, 5);
  PolicyParameters c = init_policy<float>(cfg, 6);
  CHECK(same_net(a.actor, b.actor));
  CHECK(same_net(a.critic, b.critic));
  CHECK(a.log_std == b.log_std);
  CHECK_FALSE(same_net(a.actor, c.actor));
  CHECK(a.version == 0);
  CHECK(a.actor.tanh_output);
  CHECK_FALSE(a.critic.tanh_output);
  CHECK(a.actor.in_dim() == 11);
  CHECK(a.actor.out_dim() == 4);
  CHECK(a.critic.out_dim() == 1);
  for (Eigen::Index i = 0; i < a.log_std.size(); ++i) CHECK(a.log_std(i) == -0.5f);
}

TEST_CASE("weight draws are row-major uniform with the fan-in limit") {
  Rng rng(17);
  MlpT<double> net = init_mlp<double>({2, 3}, false, 0.25, rng);
  REQUIRE(net.layers.size() == 1);
  const auto& l = net.layers[0];
  REQUIRE(l.W.rows() == 3);
  REQUIRE(l.W.cols() == 2);
  CHECK(l.b.isZero(0.0));

  double limit = 0.25 * std::sqrt(3.0 / 2.0);
  Rng ref(17);
  for (Eigen::Index r = 0; r < 3; ++r) {
    for (Eigen::Index c = 0; c < 2; ++c) {
      CHECK(l.W(r, c) == ref.uniform(-limit, limit));
    }
  }
}

TEST_CASE("hidden layers use unit gain, output layer the configured gain") {
  NetConfig cfg;
  cfg.hidden1 = 64;
  cfg.hidden2 = 64;
  PolicyParameters p = init_policy<float>(cfg, 3);
  double hid_limit = std::sqrt(3.0 / 11.0);
  double out_limit = 0.01 * std::sqrt(3.0 / 64.0);
  CHECK(p.actor.layers[0].W.cwiseAbs().maxCoeff() <= hid_limit);
  CHECK(p.actor.layers[2].W.cwiseAbs().maxCoeff() <= out_limit);
  // the critic head is not squashed small
  CHECK(p.critic.layers[2].W.cwiseAbs().maxCoeff() > out_limit);
}

TEST_CASE("float and double forward passes agree") {
  NetConfig cfg;
  cfg.hidden1 = 64;
  cfg.hidden2 = 64;
  PolicyParameters p = init_policy<float>(cfg, 9);
  PolicyParametersT<double> w = widen(p);

  Rng rng(4);
  MlpT<float>::Workspace wf;
  MlpT<double>::Workspace wd;
  for (int i = 0; i < 50; ++i) {
    VecX<double> xd(11);
    for (int k = 0; k < 11; ++k) xd(k) = rng.uniform(-1.0, 1.0);
    VecX<float> xf = xd.cast<float>();

    ActionDistT<float> df = forward_actor(p, xf, wf);
    ActionDistT<double> dd = forward_actor(w, xd, wd);
    for (int k = 0; k < 4; ++k) {
      CHECK(std::fabs(static_cast<double>(df.mean(k)) - dd.mean(k)) < 1e-5);
      CHECK(std::fabs(df.mean(k)) < 1.0);  // tanh head
    }
    double vf = forward_critic(p, xf, wf);
    double vd = forward_critic(w, xd, wd);
    CHECK(std::fabs(vf - vd) < 1e-4);
  }
}

TEST_CASE("gaussian log density and entropy closed forms") {
  ActionDistT<double> d;
  d.mean = VecX<double>::Zero(1);
  d.std_dev = VecX<double>::Ones(1);

  VecX<double> a0 = VecX<double>::Zero(1);
  CHECK(log_prob(d, a0) == doctest::Approx(-0.5 * kLog2Pi).epsilon(1e-15));
  VecX<double> a1 = VecX<double>::Ones(1);
  CHECK(log_prob(d, a1) == doctest::Approx(-0.5 - 0.5 * kLog2Pi).epsilon(1e-15));

  // shifting by the mean and scaling by sigma
  d.mean(0) = 2.0;
  d.std_dev(0) = 3.0;
  VecX<double> a2(1);
  a2(0) = 5.0;  // one sigma out
  CHECK(log_prob(d, a2) ==
        doctest::Approx(-0.5 - std::log(3.0) - 0.5 * kLog2Pi).epsilon(1e-15));
  CHECK(dist_entropy(d) == doctest::Approx(std::log(3.0) + 0.5 * (1.0 + kLog2Pi)).epsilon(1e-15));

  // independent components add
  ActionDistT<double> d4;
  d4.mean = VecX<double>::Zero(4);
  d4.std_dev = VecX<double>::Constant(4, std::exp(-0.5));
  CHECK(dist_entropy(d4) ==
        doctest::Approx(4.0 * (-0.5 + 0.5 * (1.0 + kLog2Pi))).epsilon(1e-15));
  VecX<double> z4 = VecX<double>::Zero(4);
  CHECK(log_prob(d4, z4) == doctest::Approx(4.0 * (0.5 - 0.5 * kLog2Pi)).epsilon(1e-15));
}

TEST_CASE("action sampling is one normal draw per component in order") {
  ActionDistT<float> d;
  d.mean = VecX<float>::LinSpaced(4, -0.3f, 0.3f);
  d.std_dev = VecX<float>::Constant(4, 0.6065f);

  Rng rng(88);
  VecX<float> a = sample_action(d, rng);
  Rng ref(88);
  for (int i = 0; i < 4; ++i) {
    float expect = d.mean(i) + d.std_dev(i) * static_cast<float>(ref.normal());
    CHECK(a(i) == expect);
  }
}

TEST_CASE("backward matches central finite differences") {
  for (bool tanh_out : {true, false}) {
    MlpT<double> net = random_net({3, 5, 2}, tanh_out, tanh_out ? 21u : 22u);
    Rng rng(33);
    VecX<double> x(3);
    for (int i = 0; i < 3; ++i) x(i) = rng.uniform(-1.0, 1.0);
    VecX<double> w(2);
    for (int i = 0; i < 2; ++i) w(i) = rng.uniform(-1.0, 1.0);

    MlpT<double>::Workspace ws;
    auto loss = [&]() { return w.dot(net.forward(x, ws)); };

    MlpGradsT<double> g = net.make_grads();
    net.forward(x, ws);
    net.backward(ws, w, g);

    const double h = 1e-6;
    for (std::size_t li = 0; li < net.layers.size(); ++li) {
      auto& L = net.layers[li];
      for (Eigen::Index k = 0; k < L.W.size(); ++k) {
        double save = L.W.data()[k];
        L.W.data()[k] = save + h;
        double up = loss();
        L.W.data()[k] = save - h;
        double dn = loss();
        L.W.data()[k] = save;
        double fd = (up - dn) / (2.0 * h);
        double an = g.dW[li].data()[k];
        CHECK(std::fabs(fd - an) <= 1e-6 * std::max(1.0, std::fabs(fd)));
      }
      for (Eigen::Index k = 0; k < L.b.size(); ++k) {
        double save = L.b(k);
        L.b(k) = save + h;
        double up = loss();
        L.b(k) = save - h;
        double dn = loss();
        L.b(k) = save;
        double fd = (up - dn) / (2.0 * h);
        CHECK(std::fabs(fd - g.db[li](k)) <= 1e-6 * std::max(1.0, std::fabs(fd)));
      }
    }
  }
}

TEST_CASE("backward accumulates instead of overwriting") {
  MlpT<double> net = random_net({3, 4, 2}, true, 51);
  MlpT<double>::Workspace ws;
  VecX<double> x = VecX<double>::Constant(3, 0.2);
  VecX<double> dy = VecX<double>::Constant(2, 1.0);
  net.forward(x, ws);

  MlpGradsT<double> once = net.make_grads();
  net.backward(ws, dy, once);
  MlpGradsT<double> twice = net.make_grads();
  net.backward(ws, dy, twice);
  net.backward(ws, dy, twice);
  for (std::size_t i = 0; i < once.dW.size(); ++i) {
    CHECK((twice.dW[i] - 2.0 * once.dW[i]).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((twice.db[i] - 2.0 * once.db[i]).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("adam first and second steps match the hand recurrence") {
  MlpT<double> net;
  net.tanh_output = false;
  MlpT<double>::Layer l;
  l.W = MatX<double>::Constant(1, 1, 0.5);
  l.b = VecX<double>::Constant(1, 0.1);
  net.layers.push_back(l);

  AdamStateT<double> st = make_adam<double>(net, nullptr);
  REQUIRE(st.m.size() == 2);
  AdamConfig ac;
  const double lr = 0.01;

  MlpGradsT<double> g = net.make_grads();
  g.dW[0](0, 0) = 0.2;
  g.db[0](0) = -0.1;

  // hand recurrence, same update expression
  auto expect_step = [&](double p, double grad, double& m, double& v, std::uint64_t step) {
    m = ac.beta1 * m + (1.0 - ac.beta1) * grad;
    v = ac.beta2 * v + (1.0 - ac.beta2) * grad * grad;
    double bc1 = 1.0 - std::pow(ac.beta1, static_cast<double>(step));
    double bc2 = 1.0 - std::pow(ac.beta2, static_cast<double>(step));
    return p - lr * (m / bc1) / (std::sqrt(v / bc2) + ac.eps);
  };

  double mw = 0.0, vw = 0.0, mb = 0.0, vb = 0.0;
  double ew = expect_step(0.5, 0.2, mw, vw, 1);
  double eb = expect_step(0.1, -0.1, mb, vb, 1);
  adam_update<double>(net, nullptr, g, nullptr, st, lr, ac);
  CHECK(st.step == 1);
  CHECK(net.layers[0].W(0, 0) == doctest::Approx(ew).epsilon(1e-15));
  CHECK(net.layers[0].b(0) == doctest::Approx(eb).epsilon(1e-15));

  g.dW[0](0, 0) = -0.05;
  g.db[0](0) = 0.3;
  ew = expect_step(ew, -0.05, mw, vw, 2);
  eb = expect_step(eb, 0.3, mb, vb, 2);
  adam_update<double>(net, nullptr, g, nullptr, st, lr, ac);
  CHECK(st.step == 2);
  CHECK(net.layers[0].W(0, 0) == doctest::Approx(ew).epsilon(1e-15));
  CHECK(net.layers[0].b(0) == doctest::Approx(eb).epsilon(1e-15));
}

TEST_CASE("zero gradients advance the step but leave parameters fixed") {
  MlpT<float> net;
  net.tanh_output = false;
  net.layers.push_back({MatX<float>::Constant(2, 2, 0.25f), VecX<float>::Constant(2, -0.5f)});
  AdamStateT<float> st = make_adam<float>(net, nullptr);
  MlpGradsT<float> g = net.make_grads();
  adam_update<float>(net, nullptr, g, nullptr, st, 0.1, AdamConfig{});
  CHECK(st.step == 1);
  CHECK(net.layers[0].W == MatX<float>::Constant(2, 2, 0.25f));
  CHECK(net.layers[0].b == VecX<float>::Constant(2, -0.5f));
}

TEST_CASE("non-finite gradients are rejected") {
  MlpT<float> net;
  net.tanh_output = false;
  net.layers.push_back({MatX<float>::Zero(2, 2), VecX<float>::Zero(2)});
  AdamStateT<float> st = make_adam<float>(net, nullptr);
  MlpGradsT<float> g = net.make_grads();
  g.dW[0](0, 0) = std::numeric_limits<float>::quiet_NaN();
  CHECK_THROWS_AS(adam_update<float>(net, nullptr, g, nullptr, st, 0.1, AdamConfig{}),
                  std::runtime_error);
  CHECK(st.step == 0);
}

TEST_CASE("log_std trails the actor tensors in the optimizer") {
  NetConfig cfg;
  cfg.hidden1 = 8;
  cfg.hidden2 = 8;
  PolicyParameters p = init_policy<float>(cfg, 12);
  OptimizerState opt = make_optimizer(p);
  CHECK(opt.actor.m.size() == 2 * p.actor.layers.size() + 1);
  CHECK(opt.critic.m.size() == 2 * p.critic.layers.size());
  CHECK(opt.actor.m.back().size() == p.log_std.size());

  MlpGradsT<float> g = p.actor.make_grads();
  VecX<float> gls = VecX<float>::Constant(4, 0.5f);
  VecX<float> before = p.log_std;
  adam_update<float>(p.actor, &p.log_std, g, &gls, opt.actor, 0.01, AdamConfig{});
  CHECK(p.log_std != before);
}

TEST_CASE("checkpoint round-trip is bit exact") {
  NetConfig cfg;
  cfg.hidden1 = 16;
  cfg.hidden2 = 16;
  PolicyParameters p = init_policy<float>(cfg, 77);
  p.version = 42;
  OptimizerState opt = make_optimizer(p);

  // make the optimizer state nontrivial
  Rng rng(3);
  for (int it = 0; it < 3; ++it) {
    MlpGradsT<float> ag = p.actor.make_grads();
    for (auto& m : ag.dW) m = MatX<float>::NullaryExpr(m.rows(), m.cols(), [&]() {
      return static_cast<float>(rng.uniform(-0.1, 0.1));
    });
    VecX<float> gls = VecX<float>::NullaryExpr(4, [&]() {
      return static_cast<float>(rng.uniform(-0.1, 0.1));
    });
    adam_update<float>(p.actor, &p.log_std, ag, &gls, opt.actor, 0.003, AdamConfig{});
    MlpGradsT<float> cg = p.critic.make_grads();
    for (auto& m : cg.dW) m = MatX<float>::NullaryExpr(m.rows(), m.cols(), [&]() {
      return static_cast<float>(rng.uniform(-0.1, 0.1));
    });
    adam_update<float>(p.critic, nullptr, cg, nullptr, opt.critic, 0.001, AdamConfig{});
  }

  std::vector<std::uint8_t> bytes = serialize_checkpoint(p, opt);
  CheckpointData rt = deserialize_checkpoint(bytes);

  CHECK(rt.params.version == 42);
  CHECK(same_net(rt.params.actor, p.actor));
  CHECK(same_net(rt.params.critic, p.critic));
  CHECK(rt.params.log_std == p.log_std);
  CHECK(rt.opt.actor.step == opt.actor.step);
  CHECK(rt.opt.critic.step == opt.critic.step);
  REQUIRE(rt.opt.actor.m.size() == opt.actor.m.size());
  for (std::size_t i = 0; i < opt.actor.m.size(); ++i) {
    CHECK((rt.opt.actor.m[i] == opt.actor.m[i]).all());
    CHECK((rt.opt.actor.v[i] == opt.actor.v[i]).all());
  }
  for (std::size_t i = 0; i < opt.critic.m.size(); ++i) {
    CHECK((rt.opt.critic.m[i] == opt.critic.m[i]).all());
    CHECK((rt.opt.critic.v[i] == opt.critic.v[i]).all());
  }

  // serialize(deserialize(bytes)) reproduces the bytes
  CHECK(serialize_checkpoint(rt.params, rt.opt) == bytes);
}

TEST_CASE("checkpoint corruption is detected") {
  NetConfig cfg;
  cfg.hidden1 = 8;
  cfg.hidden2 = 8;
  PolicyParameters p = init_policy<float>(cfg, 13);
  OptimizerState opt = make_optimizer(p);
  std::vector<std::uint8_t> bytes = serialize_checkpoint(p, opt);

  SUBCASE("flipped payload byte fails the checksum") {
    bytes[bytes.size() / 2] ^= 0x01;
    CHECK_THROWS_WITH_AS(deserialize_checkpoint(bytes), doctest::Contains("checksum"),
                         std::runtime_error);
  }
  SUBCASE("bad magic") {
    bytes[0] ^= 0xff;
    CHECK_THROWS_AS(deserialize_checkpoint(bytes), std::runtime_error);
  }
  SUBCASE("truncation") {
    bytes.resize(bytes.size() / 2);
    CHECK_THROWS_AS(deserialize_checkpoint(bytes), std::runtime_error);
  }
  SUBCASE("trailing garbage") {
    bytes.push_back(0);
    CHECK_THROWS_AS(deserialize_checkpoint(bytes), std::runtime_error);
  }
  SUBCASE("unsupported format version") {
    // format version lives right after the 4-byte magic
    bytes[4] ^= 0xff;
    CHECK_THROWS_AS(deserialize_checkpoint(bytes), std::runtime_error);
  }
}

TEST_CASE("policy crc tracks parameters, not optimizer state") {
  NetConfig cfg;
  cfg.hidden1 = 8;
  cfg.hidden2 = 8;
  PolicyParameters p = init_policy<float>(cfg, 1);
  std::uint32_t crc0 = policy_crc(p);
  CHECK(crc0 == policy_crc(p));
  CHECK(crc0 != policy_crc(init_policy<float>(cfg, 2)));

  PolicyParameters q = p;
  q.actor.layers[0].W(0, 0) += 1e-3f;
  CHECK(policy_crc(q) != crc0);
}
