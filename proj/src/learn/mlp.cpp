#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>

#include "whisker/errors.hpp"
#include "whisker/learn.hpp"

namespace whisker::learn {

MlpParams::MlpParams(int in, int hid, int out)
    : inputs(in),
      hidden(hid),
      outputs(out),
      w1(static_cast<std::size_t>(in) * hid, 0.0),
      b1(static_cast<std::size_t>(hid), 0.0),
      w2(static_cast<std::size_t>(hid) * out, 0.0),
      b2(static_cast<std::size_t>(out), 0.0) {}

MlpParams init_params(int inputs, int hidden, int outputs, Rng& rng) {
  MlpParams p(inputs, hidden, outputs);
  const double a1 = 1.0 / std::sqrt(static_cast<double>(inputs));
  const double a2 = 1.0 / std::sqrt(static_cast<double>(hidden));
  for (auto& w : p.w1) w = rng.uniform(-a1, a1);
  for (auto& b : p.b1) b = rng.uniform(-a1, a1);
  for (auto& w : p.w2) w = rng.uniform(-a2, a2);
  for (auto& b : p.b2) b = rng.uniform(-a2, a2);
  return p;
}

std::vector<double> mlp_forward(std::span<const double> x, const MlpParams& p,
                                ForwardCache* cache) {
  if (x.size() != static_cast<std::size_t>(p.inputs))
    throw ContractError("mlp_forward: expected " + std::to_string(p.inputs) + " inputs, got " +
                        std::to_string(x.size()));
  for (double v : x)
    if (!std::isfinite(v)) throw ContractError("mlp_forward: non-finite input");
  const auto in = static_cast<std::size_t>(p.inputs);
  const auto hid = static_cast<std::size_t>(p.hidden);
  const auto out = static_cast<std::size_t>(p.outputs);

  std::vector<double> pre(hid), h(hid);
  for (std::size_t j = 0; j < hid; ++j) {
    double s = p.b1[j];
    const double* row = &p.w1[j * in];
    for (std::size_t i = 0; i < in; ++i) s += row[i] * x[i];
    pre[j] = s;
    h[j] = s > 0.0 ? s : 0.0;
  }
  std::vector<double> logits(out);
  for (std::size_t o = 0; o < out; ++o) {
    double s = p.b2[o];
    const double* row = &p.w2[o * hid];
    for (std::size_t j = 0; j < hid; ++j) s += row[j] * h[j];
    logits[o] = s;
  }
  if (cache) {
    cache->pre = std::move(pre);
    cache->hidden = std::move(h);
  }
  return logits;
}

LossGrad cross_entropy_loss_and_grad(const std::vector<std::vector<double>>& logits,
                                     std::span<const int> labels) {
  if (logits.size() != labels.size() || logits.empty())
    throw ContractError("cross_entropy: need one label per logit row, batch > 0");
  LossGrad out;
  const double inv_b = 1.0 / static_cast<double>(logits.size());
  out.dlogits.resize(logits.size());
  double total = 0.0;
  for (std::size_t n = 0; n < logits.size(); ++n) {
    const auto& z = logits[n];
    const int y = labels[n];
    if (y < 0 || static_cast<std::size_t>(y) >= z.size())
      throw ContractError("cross_entropy: label out of range");
    double m = z[0];
    for (double v : z) m = std::max(m, v);
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - m);
    const double lse = m + std::log(sum);
    total += lse - z[static_cast<std::size_t>(y)];
    auto& g = out.dlogits[n];
    g.resize(z.size());
    for (std::size_t k = 0; k < z.size(); ++k) g[k] = std::exp(z[k] - lse) * inv_b;
    g[static_cast<std::size_t>(y)] -= inv_b;
  }
  out.loss = total * inv_b;
  return out;
}

double loss_and_param_grad(const MlpParams& p, std::span<const std::vector<double>> xs,
                           std::span<const int> labels, MlpParams& grad) {
  grad = MlpParams(p.inputs, p.hidden, p.outputs);
  std::vector<ForwardCache> caches(xs.size());
  std::vector<std::vector<double>> logits(xs.size());
  for (std::size_t n = 0; n < xs.size(); ++n) logits[n] = mlp_forward(xs[n], p, &caches[n]);
  const LossGrad lg = cross_entropy_loss_and_grad(logits, labels);

  const auto in = static_cast<std::size_t>(p.inputs);
  const auto hid = static_cast<std::size_t>(p.hidden);
  const auto out = static_cast<std::size_t>(p.outputs);
  std::vector<double> dh(hid);
  for (std::size_t n = 0; n < xs.size(); ++n) {
    const auto& dl = lg.dlogits[n];
    const auto& h = caches[n].hidden;
    std::fill(dh.begin(), dh.end(), 0.0);
    for (std::size_t o = 0; o < out; ++o) {
      grad.b2[o] += dl[o];
      for (std::size_t j = 0; j < hid; ++j) {
        grad.w2[o * hid + j] += dl[o] * h[j];
        dh[j] += p.w2[o * hid + j] * dl[o];
      }
    }
    const auto& x = xs[n];
    for (std::size_t j = 0; j < hid; ++j) {
      if (!(caches[n].pre[j] > 0.0)) continue;  // relu gate
      grad.b1[j] += dh[j];
      for (std::size_t i = 0; i < in; ++i) grad.w1[j * in + i] += dh[j] * x[i];
    }
  }
  return lg.loss;
}

AdamState make_adam_state(const MlpParams& params) {
  MlpParams zero(params.inputs, params.hidden, params.outputs);
  return {zero, zero};
}

void adam_step(MlpParams& params, const MlpParams& grad, AdamState& state, int t,
               const AdamHyper& hyper) {
  if (t < 1) throw ContractError("adam_step: t must be >= 1");
  const double c1 = 1.0 - std::pow(hyper.beta1, t);
  const double c2 = 1.0 - std::pow(hyper.beta2, t);
  auto pb = params.blocks();
  auto gb = grad.blocks();
  auto mb = state.m.blocks();
  auto vb = state.v.blocks();
  for (std::size_t b = 0; b < pb.size(); ++b) {
    auto& p = *pb[b];
    const auto& g = *gb[b];
    auto& m = *mb[b];
    auto& v = *vb[b];
    if (g.size() != p.size() || m.size() != p.size() || v.size() != p.size())
      throw ContractError("adam_step: shape mismatch");
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = hyper.beta1 * m[i] + (1.0 - hyper.beta1) * g[i];
      v[i] = hyper.beta2 * v[i] + (1.0 - hyper.beta2) * g[i] * g[i];
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      p[i] -= hyper.lr * mhat / (std::sqrt(vhat) + hyper.eps);
    }
  }
}

namespace {

constexpr char kMagic[4] = {'W', 'M', 'L', 'P'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double d) {
  const auto v = std::bit_cast<std::uint64_t>(d);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_le(const std::string& in, std::size_t& pos, int bytes) {
  if (pos + static_cast<std::size_t>(bytes) > in.size()) throw FormatError("model file truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i)
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  pos += static_cast<std::size_t>(bytes);
  return v;
}

}  // namespace

std::string encode_model(const MlpParams& params) {
  std::string out(kMagic, 4);
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(params.inputs));
  put_u32(out, static_cast<std::uint32_t>(params.hidden));
  put_u32(out, static_cast<std::uint32_t>(params.outputs));
  for (const auto* block : params.blocks())
    for (double d : *block) put_f64(out, d);
  return out;
}

void write_model(const MlpParams& params, const std::filesystem::path& path) {
  const std::string out = encode_model(params);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("failed writing " + path.string());
}

MlpParams decode_model(const std::string& in) {
  if (in.size() < 4 || in.compare(0, 4, std::string(kMagic, 4)) != 0)
    throw FormatError("model file: bad magic");
  std::size_t pos = 4;
  if (get_le(in, pos, 4) != kVersion) throw FormatError("model file: unsupported version");
  const auto inputs = get_le(in, pos, 4), hidden = get_le(in, pos, 4), outputs = get_le(in, pos, 4);
  if (inputs == 0 || hidden == 0 || outputs == 0 || inputs > 4096 || hidden > 4096 ||
      outputs > 4096)
    throw FormatError("model file: implausible dimensions");
  MlpParams p(static_cast<int>(inputs), static_cast<int>(hidden), static_cast<int>(outputs));
  for (auto* block : p.blocks())
    for (double& d : *block) d = std::bit_cast<double>(get_le(in, pos, 8));
  if (pos != in.size()) throw FormatError("model file: trailing bytes");
  return p;
}

MlpParams read_model(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  return decode_model(
      std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>()));
}

}  // namespace whisker::learn
