#include "strebm/adam.hpp"

#include <cmath>

#include "strebm/errors.hpp"

namespace strebm {

void adam_update(std::span<double> param, std::span<const double> grad, AdamMoments& moments,
                 const AdamConfig& config, double learning_rate, std::size_t step) {
  if (grad.size() != param.size()) throw InvalidArgument("adam_update: gradient size mismatch");
  if (step == 0) throw InvalidArgument("adam_update: step is 1-based");
  if (moments.m.size() != param.size()) moments.m.assign(param.size(), 0.0);
  if (moments.v.size() != param.size()) moments.v.assign(param.size(), 0.0);
  const double t = static_cast<double>(step);
  const double bc1 = 1.0 - std::pow(config.beta1, t);
  const double bc2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t k = 0; k < param.size(); ++k) {
    const double g = grad[k];
    moments.m[k] = config.beta1 * moments.m[k] + (1.0 - config.beta1) * g;
    moments.v[k] = config.beta2 * moments.v[k] + (1.0 - config.beta2) * g * g;
    const double m_hat = moments.m[k] / bc1;
    const double v_hat = moments.v[k] / bc2;
    param[k] -= learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
  }
}

}  // namespace strebm
