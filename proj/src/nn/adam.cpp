#include "nn/adam.hpp"

#include <cmath>

namespace inpaint_lab::nn {

template <class T>
Adam<T>::Adam(AdamConfig config, std::vector<Parameter<T>*> params)
    : config_(config), params_(std::move(params)) {
  for (const auto* p : params_) {
    m_.emplace_back(p->value.shape());
    v_.emplace_back(p->value.shape());
  }
}

template <class T>
void Adam<T>::zero_grad() {
  for (auto* p : params_) p->zero_grad();
}

template <class T>
void Adam<T>::step() {
  ++steps_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  const T step_size = static_cast<T>(config_.learning_rate / c1);
  const T inv_sqrt_c2 = static_cast<T>(1.0 / std::sqrt(c2));
  const T eps = static_cast<T>(config_.eps);
  const T tb1 = static_cast<T>(b1), tb2 = static_cast<T>(b2);
  for (std::size_t k = 0; k < params_.size(); ++k) {
    Parameter<T>& p = *params_[k];
    T* m = m_[k].data();
    T* v = v_[k].data();
    const T* g = p.grad.data();
    T* w = p.value.data();
    for (std::size_t i = 0; i < p.value.numel(); ++i) {
      m[i] = tb1 * m[i] + (T(1) - tb1) * g[i];
      v[i] = tb2 * v[i] + (T(1) - tb2) * g[i] * g[i];
      w[i] -= step_size * m[i] / (std::sqrt(v[i]) * inv_sqrt_c2 + eps);
    }
  }
}

template <class T>
std::vector<StateEntry<T>> Adam<T>::state() {
  std::vector<StateEntry<T>> out;
  for (std::size_t k = 0; k < params_.size(); ++k) {
    out.push_back({"adam.m." + params_[k]->name, &m_[k]});
    out.push_back({"adam.v." + params_[k]->name, &v_[k]});
  }
  return out;
}

template class Adam<float>;
template class Adam<double>;

}  // namespace inpaint_lab::nn
