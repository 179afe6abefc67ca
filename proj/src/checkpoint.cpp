#include "acrl/checkpoint.hpp"

#include <zlib.h>

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace acrl {

namespace {

void put_u32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  b.push_back(static_cast<std::uint8_t>(v & 0xff));
  b.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
  b.push_back(static_cast<std::uint8_t>((v >> 16) & 0xff));
  b.push_back(static_cast<std::uint8_t>((v >> 24) & 0xff));
}

void put_u64(std::vector<std::uint8_t>& b, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) b.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

void put_f32(std::vector<std::uint8_t>& b, float f) {
  std::uint32_t u;
  std::memcpy(&u, &f, 4);
  put_u32(b, u);
}

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& b) : b_(b) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b_[pos_ + static_cast<std::size_t>(i)];
    pos_ += 4;
    return v;
  }

  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b_[pos_ + static_cast<std::size_t>(i)];
    pos_ += 8;
    return v;
  }

  float f32() {
    std::uint32_t u = u32();
    float f;
    std::memcpy(&f, &u, 4);
    return f;
  }

  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return b_.size() - pos_; }

 private:
  void need(std::size_t n) {
    if (pos_ + n > b_.size()) throw std::runtime_error("checkpoint: truncated file");
  }
  const std::vector<std::uint8_t>& b_;
  std::size_t pos_ = 0;
};

// Weights go out row-major while Eigen stores column-major; the Adam moment
// arrays are indexed in storage order, so they share the same remapping.
void put_matrix_rowmajor(std::vector<std::uint8_t>& b, const MatX<float>& W) {
  for (Eigen::Index r = 0; r < W.rows(); ++r) {
    for (Eigen::Index c = 0; c < W.cols(); ++c) put_f32(b, W(r, c));
  }
}

void put_moments_rowmajor(std::vector<std::uint8_t>& b, const ArrX<float>& a, Eigen::Index rows,
                          Eigen::Index cols) {
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) put_f32(b, a(c * rows + r));
  }
}

void put_net(std::vector<std::uint8_t>& b, const MlpT<float>& net) {
  for (const auto& l : net.layers) {
    put_matrix_rowmajor(b, l.W);
    for (Eigen::Index i = 0; i < l.b.size(); ++i) put_f32(b, l.b(i));
  }
}

void put_adam_group(std::vector<std::uint8_t>& b, const MlpT<float>& net,
                    const VecX<float>* extra, const AdamStateT<float>& st) {
  put_u64(b, st.step);
  for (int pass = 0; pass < 2; ++pass) {
    const auto& bank = pass == 0 ? st.m : st.v;
    std::size_t t = 0;
    for (const auto& l : net.layers) {
      put_moments_rowmajor(b, bank[t++], l.W.rows(), l.W.cols());
      const ArrX<float>& bm = bank[t++];
      for (Eigen::Index i = 0; i < bm.size(); ++i) put_f32(b, bm(i));
    }
    if (extra) {
      const ArrX<float>& em = bank[t];
      for (Eigen::Index i = 0; i < em.size(); ++i) put_f32(b, em(i));
    }
  }
}

void read_net(Reader& r, MlpT<float>& net, const std::vector<std::pair<int, int>>& dims) {
  for (const auto& [in, out] : dims) {
    typename MlpT<float>::Layer l;
    l.W.resize(out, in);
    l.b.resize(out);
    for (Eigen::Index rr = 0; rr < out; ++rr) {
      for (Eigen::Index cc = 0; cc < in; ++cc) l.W(rr, cc) = r.f32();
    }
    for (Eigen::Index i = 0; i < out; ++i) l.b(i) = r.f32();
    net.layers.push_back(std::move(l));
  }
}

void read_adam_group(Reader& r, const MlpT<float>& net, Eigen::Index extra_size,
                     AdamStateT<float>& st) {
  st = AdamStateT<float>{};
  st.step = r.u64();
  std::size_t n_tensors = net.layers.size() * 2 + (extra_size > 0 ? 1 : 0);
  st.m.resize(n_tensors);
  st.v.resize(n_tensors);
  for (int pass = 0; pass < 2; ++pass) {
    auto& bank = pass == 0 ? st.m : st.v;
    std::size_t t = 0;
    for (const auto& l : net.layers) {
      ArrX<float>& wm = bank[t++];
      wm.resize(l.W.size());
      for (Eigen::Index rr = 0; rr < l.W.rows(); ++rr) {
        for (Eigen::Index cc = 0; cc < l.W.cols(); ++cc) wm(cc * l.W.rows() + rr) = r.f32();
      }
      ArrX<float>& bm = bank[t++];
      bm.resize(l.b.size());
      for (Eigen::Index i = 0; i < bm.size(); ++i) bm(i) = r.f32();
    }
    if (extra_size > 0) {
      ArrX<float>& em = bank[t];
      em.resize(extra_size);
      for (Eigen::Index i = 0; i < extra_size; ++i) em(i) = r.f32();
    }
  }
}

std::uint32_t crc_of(const std::vector<std::uint8_t>& b, std::size_t len) {
  uLong c = crc32(0L, Z_NULL, 0);
  c = crc32(c, b.data(), static_cast<uInt>(len));
  return static_cast<std::uint32_t>(c);
}

}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(const PolicyParameters& p,
                                               const OptimizerState& opt) {
  std::vector<std::uint8_t> b;
  b.push_back('A');
  b.push_back('C');
  b.push_back('R');
  b.push_back('L');
  put_u32(b, kCheckpointFormatVersion);
  put_u32(b, p.version);

  put_u32(b, static_cast<std::uint32_t>(p.actor.layers.size()));
  for (const auto& l : p.actor.layers) {
    put_u32(b, static_cast<std::uint32_t>(l.W.cols()));
    put_u32(b, static_cast<std::uint32_t>(l.W.rows()));
  }
  put_u32(b, static_cast<std::uint32_t>(p.critic.layers.size()));
  for (const auto& l : p.critic.layers) {
    put_u32(b, static_cast<std::uint32_t>(l.W.cols()));
    put_u32(b, static_cast<std::uint32_t>(l.W.rows()));
  }
  put_u32(b, static_cast<std::uint32_t>(p.log_std.size()));

  put_net(b, p.actor);
  put_net(b, p.critic);
  for (Eigen::Index i = 0; i < p.log_std.size(); ++i) put_f32(b, p.log_std(i));

  put_adam_group(b, p.actor, &p.log_std, opt.actor);
  put_adam_group(b, p.critic, nullptr, opt.critic);

  put_u32(b, crc_of(b, b.size()));
  return b;
}

CheckpointData deserialize_checkpoint(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 8 || bytes[0] != 'A' || bytes[1] != 'C' || bytes[2] != 'R' ||
      bytes[3] != 'L') {
    throw std::runtime_error("checkpoint: bad magic");
  }
  std::uint32_t stored_crc = 0;
  {
    const std::size_t n = bytes.size();
    for (int i = 3; i >= 0; --i) stored_crc = (stored_crc << 8) | bytes[n - 4 + static_cast<std::size_t>(i)];
  }
  if (crc_of(bytes, bytes.size() - 4) != stored_crc) {
    throw std::runtime_error("checkpoint: checksum mismatch");
  }

  Reader r(bytes);
  r.u32();  // magic, already checked
  std::uint32_t version = r.u32();
  if (version != kCheckpointFormatVersion) {
    throw std::runtime_error("checkpoint: unsupported format version");
  }

  CheckpointData cd;
  cd.params.version = r.u32();

  auto read_dims = [&r]() {
    std::vector<std::pair<int, int>> dims;
    std::uint32_t n = r.u32();
    if (n == 0 || n > 64) throw std::runtime_error("checkpoint: bad layer table");
    for (std::uint32_t i = 0; i < n; ++i) {
      int in = static_cast<int>(r.u32());
      int out = static_cast<int>(r.u32());
      if (in <= 0 || out <= 0 || in > (1 << 20) || out > (1 << 20)) {
        throw std::runtime_error("checkpoint: bad layer table");
      }
      dims.emplace_back(in, out);
    }
    return dims;
  };
  auto actor_dims = read_dims();
  auto critic_dims = read_dims();
  Eigen::Index act_dim = static_cast<Eigen::Index>(r.u32());

  cd.params.actor.tanh_output = true;
  cd.params.critic.tanh_output = false;
  read_net(r, cd.params.actor, actor_dims);
  read_net(r, cd.params.critic, critic_dims);
  cd.params.log_std.resize(act_dim);
  for (Eigen::Index i = 0; i < act_dim; ++i) cd.params.log_std(i) = r.f32();

  read_adam_group(r, cd.params.actor, act_dim, cd.opt.actor);
  read_adam_group(r, cd.params.critic, 0, cd.opt.critic);

  if (r.remaining() != 4) {
    throw std::runtime_error("checkpoint: trailing bytes");
  }
  return cd;
}

void save_checkpoint(const std::string& path, const PolicyParameters& p,
                     const OptimizerState& opt) {
  std::vector<std::uint8_t> b = serialize_checkpoint(p, opt);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("checkpoint: cannot open for write: " + path);
  f.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
  if (!f) throw std::runtime_error("checkpoint: write failed: " + path);
}

CheckpointData load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("checkpoint: cannot open: " + path);
  std::vector<std::uint8_t> b((std::istreambuf_iterator<char>(f)),
                              std::istreambuf_iterator<char>());
  return deserialize_checkpoint(b);
}

std::uint32_t policy_crc(const PolicyParameters& p) {
  OptimizerState zero = make_optimizer(p);
  std::vector<std::uint8_t> b = serialize_checkpoint(p, zero);
  // payload only: a CRC over a message with its own CRC appended is the same
  // constant residue for every message
  return crc_of(b, b.size() - 4);
}

}  // namespace acrl
