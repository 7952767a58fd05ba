#include "coregae/adam.h"

#include <cmath>
#include <string>

#include "coregae/error.h"

namespace coregae {

void adam_step(AdamState& state, std::span<DenseMatrix* const> params,
               std::span<const DenseMatrix* const> grads) {
  if (params.size() != grads.size()) {
    throw ValidationError("adam_step: parameter and gradient counts differ");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i]->same_shape(*grads[i])) {
      throw ValidationError("adam_step: gradient " + std::to_string(i) +
                            " does not match its parameter shape");
    }
  }
  if (state.first_moment.empty()) {
    for (const DenseMatrix* p : params) {
      state.first_moment.emplace_back(p->rows(), p->cols());
      state.second_moment.emplace_back(p->rows(), p->cols());
    }
  } else if (state.first_moment.size() != params.size()) {
    throw ValidationError("adam_step: parameter list changed between steps");
  }

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    DenseMatrix& m = state.first_moment[i];
    DenseMatrix& v = state.second_moment[i];
    if (!m.same_shape(*params[i])) {
      throw ValidationError("adam_step: moment shape mismatch");
    }
    auto p = params[i]->data();
    auto g = grads[i]->data();
    auto mv = m.data();
    auto vv = v.data();
    for (std::size_t j = 0; j < p.size(); ++j) {
      mv[j] = state.beta1 * mv[j] + (1.0 - state.beta1) * g[j];
      vv[j] = state.beta2 * vv[j] + (1.0 - state.beta2) * g[j] * g[j];
      const double m_hat = mv[j] / correction1;
      const double v_hat = vv[j] / correction2;
      p[j] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  }
}

}  // namespace coregae
