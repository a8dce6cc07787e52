#include "tcs/ndgrad/masking.hpp"

#include "tcs/error.hpp"

namespace tcs::ndgrad {

Matrix time_since_observed(const MaskMatrix &mask) {
  const Eigen::Index T = mask.rows(), D = mask.cols();
  Matrix delta(T, D);
  for (Eigen::Index d = 0; d < D; ++d) {
    Eigen::Index last = -1;
    for (Eigen::Index t = 0; t < T; ++t) {
      delta(t, d) = static_cast<double>(last < 0 ? t : t - last);
      if (mask(t, d))
        last = t;
    }
  }
  return delta;
}

Matrix MaskedSequence::features() const {
  const Eigen::Index T = mask.rows(), D = mask.cols();
  Matrix out(T, 3 * D + 1);
  out.leftCols(D) = mask.cast<double>();
  out.middleCols(D, D) = delta;
  out.middleCols(2 * D, D) = x;
  for (Eigen::Index t = 0; t < T; ++t)
    out(t, 3 * D) = treatment[static_cast<std::size_t>(t)];
  return out;
}

MaskedSequence mask_transform(const LongitudinalSample &sample, int first_step,
                              int last_step) {
  if (last_step < first_step)
    throw UsageError("mask_transform: empty window [" +
                     std::to_string(first_step) + ", " +
                     std::to_string(last_step) + "]");
  if (first_step < 1 || last_step > sample.steps())
    throw StructuralError("mask_transform: window outside panel bounds");
  const int T = last_step - first_step + 1;
  const int row0 = first_step - 1;
  MaskedSequence out;
  out.first_step = first_step;
  out.mask = sample.mask.middleRows(row0, T);
  out.delta = time_since_observed(out.mask);
  out.x = sample.x.middleRows(row0, T).cwiseProduct(out.mask.cast<double>());
  out.treatment.assign(sample.treatment.begin() + row0,
                       sample.treatment.begin() + row0 + T);
  return out;
}

} // namespace tcs::ndgrad
