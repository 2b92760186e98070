#ifndef SMOOTH_TENSOR_ADAM_H_
#define SMOOTH_TENSOR_ADAM_H_

#include <cstdint>
#include <span>
#include <vector>

#include "smooth/tensor/tensor.h"

namespace smooth {

struct AdamHyper {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Moments for a fixed list of parameter tensors.
struct AdamState {
  AdamHyper hyper;
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
  std::int64_t step = 0;

  static AdamState for_params(std::span<const Tensor* const> params,
                              AdamHyper hyper);
};

// One bias-corrected Adam update, in place. Shapes of params, grads and the
// state's moments must agree index by index.
void adam_step(AdamState& state, std::span<Tensor* const> params,
               std::span<const Tensor> grads);

// Scales grads in place so their joint L2 norm is at most max_norm. Returns
// the norm before scaling.
double clip_grad_norm(std::span<Tensor> grads, double max_norm);

}  // namespace smooth

#endif  // SMOOTH_TENSOR_ADAM_H_
