#include "tcs/sample.hpp"

#include "tcs/error.hpp"

namespace tcs {

void LongitudinalSample::validate() const {
  const auto where = [this](const std::string &msg) {
    return DataError("sample '" + id + "': " + msg);
  };
  if (history < 1 || followup < 1)
    throw where("history and follow-up lengths must be >= 1");
  if (x.rows() != steps())
    throw where("covariate panel has " + std::to_string(x.rows()) +
                " rows, expected " + std::to_string(steps()));
  if (mask.rows() != x.rows() || mask.cols() != x.cols())
    throw where("mask shape does not match covariate panel");
  if (static_cast<int>(treatment.size()) != steps())
    throw where("treatment path length does not match panel length");
  for (int a : treatment)
    if (a != 0 && a != 1)
      throw where("treatment entries must be binary");
  if (event_time < 1 || event_time > followup + 1)
    throw where("event time " + std::to_string(event_time) +
                " outside 1..q+1");
  if (censor_time < 1 || censor_time > followup)
    throw where("censor time " + std::to_string(censor_time) +
                " outside 1..q");
}

LongitudinalSample make_sample(std::string id, int history, int followup,
                               int dims) {
  LongitudinalSample s;
  s.id = std::move(id);
  s.history = history;
  s.followup = followup;
  s.x = Matrix::Zero(history + followup, dims);
  s.mask = MaskMatrix::Ones(history + followup, dims);
  s.treatment.assign(history + followup, 0);
  s.event_time = followup + 1;
  s.censor_time = followup;
  return s;
}

} // namespace tcs
