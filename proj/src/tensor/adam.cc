#include "smooth/tensor/adam.h"

#include <cmath>
#include <string>

#include "smooth/core/errors.h"

namespace smooth {

AdamState AdamState::for_params(std::span<const Tensor* const> params,
                                AdamHyper hyper) {
  AdamState state;
  state.hyper = hyper;
  for (const Tensor* p : params) {
    state.first_moment.push_back(Tensor::zeros_like(*p));
    state.second_moment.push_back(Tensor::zeros_like(*p));
  }
  return state;
}

void adam_step(AdamState& state, std::span<Tensor* const> params,
               std::span<const Tensor> grads) {
  if (params.size() != grads.size() ||
      params.size() != state.first_moment.size()) {
    throw ShapeError("adam_step: " + std::to_string(params.size()) +
                     " params, " + std::to_string(grads.size()) + " grads, " +
                     std::to_string(state.first_moment.size()) + " moments");
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (params[k]->shape() != grads[k].shape() ||
        params[k]->shape() != state.first_moment[k].shape()) {
      throw ShapeError("adam_step: shape mismatch at parameter " +
                       std::to_string(k) + ": " +
                       shape_string(params[k]->shape()) + " vs grad " +
                       shape_string(grads[k].shape()));
    }
  }

  const AdamHyper& h = state.hyper;
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(h.beta1, t);
  const double correction2 = 1.0 - std::pow(h.beta2, t);

  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& p = *params[k];
    Tensor& m = state.first_moment[k];
    Tensor& v = state.second_moment[k];
    const Tensor& g = grads[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = h.beta1 * m[i] + (1.0 - h.beta1) * g[i];
      v[i] = h.beta2 * v[i] + (1.0 - h.beta2) * g[i] * g[i];
      double m_hat = m[i] / correction1;
      double v_hat = v[i] / correction2;
      p[i] -= h.lr * m_hat / (std::sqrt(v_hat) + h.epsilon);
    }
  }
}

double clip_grad_norm(std::span<Tensor> grads, double max_norm) {
  double sq = 0.0;
  for (const Tensor& g : grads) {
    for (double x : g.data()) sq += x * x;
  }
  double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    double factor = max_norm / (norm + 1e-12);
    for (Tensor& g : grads) {
      for (double& x : g.data()) x *= factor;
    }
  }
  return norm;
}

}  // namespace smooth
