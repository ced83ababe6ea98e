#include "wgan/networks.hpp"

#include <algorithm>
#include <bit>

#include "common/error.hpp"
#include "common/rng.hpp"

namespace inpaint_lab::wgan {

namespace {

bool power_of_two_at_least_8(int s) { return s >= 8 && std::has_single_bit(static_cast<unsigned>(s)); }

int log2_int(int v) { return std::bit_width(static_cast<unsigned>(v)) - 1; }

}  // namespace

void GeneratorArch::validate() const {
  require(z_dim >= 1, "generator z_dim must be >= 1");
  require(power_of_two_at_least_8(image_size), "image_size must be a power of two >= 8");
  require(base_width >= 1, "base_width must be >= 1");
}

int GeneratorArch::upsample_blocks() const { return log2_int(image_size / 4); }

void CriticArch::validate() const {
  require(power_of_two_at_least_8(image_size), "image_size must be a power of two >= 8");
  require(base_width >= 1, "base_width must be >= 1");
  require(leaky_slope > 0.0 && leaky_slope <= 1.0, "leaky_slope must be in (0, 1]");
}

int CriticArch::downsample_blocks() const { return log2_int(image_size / 4); }

// ------------------------------------------------------------- Generator

template <class T>
Generator<T>::Generator(GeneratorArch arch) : arch_(arch) {
  arch_.validate();
  const int c0 = 8 * arch_.base_width;
  fc_ = nn::Linear<T>("gen.fc", arch_.z_dim, c0 * 16);
  bns_.emplace_back("gen.bn0", c0);
  const int blocks = arch_.upsample_blocks();
  int c = c0;
  for (int i = 0; i < blocks; ++i) {
    const bool last = i + 1 == blocks;
    const int next = last ? 3 : std::max(c / 2, 1);
    ups_.emplace_back("gen.up" + std::to_string(i), c, next, 4, 2, 1);
    if (!last) bns_.emplace_back("gen.bn" + std::to_string(i + 1), next);
    c = next;
  }
}

template <class T>
void Generator<T>::init(Rng& rng) {
  nn::fill_normal(fc_.weight.value, rng, 0.02);
  fc_.bias.value.fill(T(0));
  for (auto& bn : bns_) {
    nn::fill_normal(bn.gamma.value, rng, 0.02);
    for (auto& g : bn.gamma.value.values()) g += T(1);
    bn.beta.value.fill(T(0));
    bn.running_mean.fill(T(0));
    bn.running_var.fill(T(1));
  }
  for (auto& up : ups_) {
    nn::fill_normal(up.weight.value, rng, 0.02);
    up.bias.value.fill(T(0));
  }
}

template <class T>
Tensor<T> Generator<T>::forward(const Tensor<T>& z, bool train, GeneratorTape<T>* tape) {
  if (static_cast<int>(z.shape().per_sample()) != arch_.z_dim)
    fail_validation("generator expects z of dimension " + std::to_string(arch_.z_dim) + ", got " +
                    z.shape().str());
  const int n = z.n();
  GeneratorTape<T> local;
  GeneratorTape<T>& t = tape ? *tape : local;
  t.train = train;
  t.z = z;
  t.bn.assign(bns_.size(), {});
  t.activations.clear();

  auto normalize = [&](std::size_t i, const Tensor<T>& x) {
    return train ? bns_[i].forward_train(x, &t.bn[i]) : bns_[i].forward_eval(x, &t.bn[i]);
  };

  Tensor<T> h = fc_.forward(z).reshaped({n, 8 * arch_.base_width, 4, 4});
  Tensor<T> a = nn::relu(normalize(0, h));
  for (std::size_t i = 0; i < ups_.size(); ++i) {
    t.activations.push_back(a);
    Tensor<T> u = ups_[i].forward(a);
    if (i + 1 < ups_.size())
      a = nn::relu(normalize(i + 1, u));
    else
      a = nn::bounded_tanh(u);
  }
  t.out = a;
  return a;
}

template <class T>
void Generator<T>::backward(const GeneratorTape<T>& tape, const Tensor<T>& dout, Tensor<T>* dz,
                            bool param_grads) {
  auto bn_backward = [&](std::size_t i, const Tensor<T>& dy, Tensor<T>* dx) {
    if (tape.train)
      bns_[i].backward_train(tape.bn[i], dy, dx, param_grads);
    else
      bns_[i].backward_eval(tape.bn[i], dy, dx, param_grads);
  };

  Tensor<T> d = nn::tanh_backward(tape.out, dout);
  for (std::size_t i = ups_.size(); i-- > 0;) {
    Tensor<T> da;
    ups_[i].backward(tape.activations[i], d, &da, param_grads);
    Tensor<T> dpre = nn::relu_backward(tape.activations[i], da);
    bn_backward(i, dpre, &d);
  }
  const int n = tape.z.n();
  const Tensor<T> dh = d.reshaped({n, 8 * arch_.base_width * 16});
  fc_.backward(tape.z.reshaped({n, arch_.z_dim}), dh, dz, param_grads);
  if (dz) *dz = dz->reshaped(tape.z.shape());
}

template <class T>
std::vector<Parameter<T>*> Generator<T>::parameters() {
  std::vector<Parameter<T>*> out{&fc_.weight, &fc_.bias};
  for (std::size_t i = 0; i < ups_.size(); ++i) {
    out.push_back(&bns_[i].gamma);
    out.push_back(&bns_[i].beta);
    out.push_back(&ups_[i].weight);
    out.push_back(&ups_[i].bias);
  }
  return out;
}

template <class T>
std::vector<StateEntry<T>> Generator<T>::state() {
  std::vector<StateEntry<T>> out;
  for (auto* p : parameters()) out.push_back({p->name, &p->value});
  for (auto& bn : bns_) {
    out.push_back({bn.name + ".running_mean", &bn.running_mean});
    out.push_back({bn.name + ".running_var", &bn.running_var});
  }
  return out;
}

// ---------------------------------------------------------------- Critic

template <class T>
Critic<T>::Critic(CriticArch arch) : arch_(arch) {
  arch_.validate();
  int c = 3;
  const int blocks = arch_.downsample_blocks();
  for (int i = 0; i < blocks; ++i) {
    const int next = arch_.base_width << i;
    convs_.emplace_back("critic.conv" + std::to_string(i), c, next, 4, 2, 1);
    c = next;
  }
  head_ = nn::Linear<T>("critic.head", c * 16, 1);
}

template <class T>
void Critic<T>::init(Rng& rng) {
  for (auto& conv : convs_) {
    nn::fill_normal(conv.weight.value, rng, 0.02);
    conv.bias.value.fill(T(0));
  }
  nn::fill_normal(head_.weight.value, rng, 0.02);
  head_.bias.value.fill(T(0));
}

template <class T>
Tensor<T> Critic<T>::forward(const Tensor<T>& x, CriticTape<T>* tape) const {
  const Shape s = x.shape();
  if (s.c != 3 || s.h != arch_.image_size || s.w != arch_.image_size)
    fail_validation("critic expects [N,3," + std::to_string(arch_.image_size) + "," +
                    std::to_string(arch_.image_size) + "] input, got " + s.str());
  const T slope = static_cast<T>(arch_.leaky_slope);
  if (tape) {
    tape->inputs.clear();
    tape->pre.clear();
  }
  Tensor<T> a = x;
  for (const auto& conv : convs_) {
    Tensor<T> pre = conv.forward(a);
    Tensor<T> next = nn::leaky_relu(pre, slope);
    if (tape) {
      tape->inputs.push_back(std::move(a));
      tape->pre.push_back(std::move(pre));
    }
    a = std::move(next);
  }
  Tensor<T> features = a.reshaped({s.n, static_cast<int>(a.shape().per_sample())});
  Tensor<T> scores = head_.forward(features);
  if (tape) tape->features = std::move(features);
  return scores;
}

template <class T>
void Critic<T>::backward(const CriticTape<T>& tape, const Tensor<T>& dscores, Tensor<T>* dx,
                         bool param_grads) {
  const T slope = static_cast<T>(arch_.leaky_slope);
  Tensor<T> d;
  head_.backward(tape.features, dscores, &d, param_grads);
  d = d.reshaped(tape.pre.back().shape());
  for (std::size_t i = convs_.size(); i-- > 0;) {
    const Tensor<T> dpre = nn::leaky_relu_backward(tape.pre[i], d, slope);
    const bool need_dx = i > 0 || dx != nullptr;
    Tensor<T> din;
    convs_[i].backward(tape.inputs[i], dpre, need_dx ? &din : nullptr, param_grads);
    d = std::move(din);
  }
  if (dx) *dx = std::move(d);
}

template <class T>
Tensor<T> Critic<T>::directional(const CriticTape<T>& tape, const Tensor<T>& dir,
                                 CriticTape<T>* tangent) const {
  if (!(dir.shape() == tape.inputs.front().shape()))
    fail_validation("critic direction shape " + dir.shape().str() + " does not match input");
  const T slope = static_cast<T>(arch_.leaky_slope);
  if (tangent) {
    tangent->inputs.clear();
    tangent->pre.clear();
  }
  Tensor<T> t = dir;
  for (std::size_t i = 0; i < convs_.size(); ++i) {
    Tensor<T> tp = convs_[i].forward(t, /*with_bias=*/false);
    Tensor<T> next = nn::leaky_relu_backward(tape.pre[i], tp, slope);
    if (tangent) {
      tangent->inputs.push_back(std::move(t));
      tangent->pre.push_back(std::move(tp));
    }
    t = std::move(next);
  }
  Tensor<T> features = t.reshaped({dir.n(), static_cast<int>(t.shape().per_sample())});
  Tensor<T> out = head_.forward(features, /*with_bias=*/false);
  if (tangent) tangent->features = std::move(features);
  return out;
}

template <class T>
void Critic<T>::directional_backward(const CriticTape<T>& tape, const CriticTape<T>& tangent,
                                     const Tensor<T>& dD) {
  const T slope = static_cast<T>(arch_.leaky_slope);
  Tensor<T> d;
  head_.backward(tangent.features, dD, &d, true, /*bias_grad=*/false);
  d = d.reshaped(tape.pre.back().shape());
  for (std::size_t i = convs_.size(); i-- > 0;) {
    const Tensor<T> dtp = nn::leaky_relu_backward(tape.pre[i], d, slope);
    Tensor<T> din;
    convs_[i].backward(tangent.inputs[i], dtp, i > 0 ? &din : nullptr, true, /*bias_grad=*/false);
    d = std::move(din);
  }
}

template <class T>
std::vector<Parameter<T>*> Critic<T>::parameters() {
  std::vector<Parameter<T>*> out;
  for (auto& conv : convs_) {
    out.push_back(&conv.weight);
    out.push_back(&conv.bias);
  }
  out.push_back(&head_.weight);
  out.push_back(&head_.bias);
  return out;
}

template <class T>
std::vector<StateEntry<T>> Critic<T>::state() {
  std::vector<StateEntry<T>> out;
  for (auto* p : parameters()) out.push_back({p->name, &p->value});
  return out;
}

template class Generator<float>;
template class Generator<double>;
template class Critic<float>;
template class Critic<double>;

}  // namespace inpaint_lab::wgan
