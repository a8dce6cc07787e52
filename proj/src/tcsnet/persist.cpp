#include "tcs/tcsnet/persist.hpp"

#include "tcs/error.hpp"
#include "tcs/ndgrad/checkpoint.hpp"

namespace tcs::tcsnet {

using namespace ndgrad;

namespace {

std::string prefix(int m) { return "m" + std::to_string(m) + "/"; }

std::vector<Parameter *> renamed(std::vector<Parameter *> params, int m,
                                 std::vector<std::string> &saved) {
  for (Parameter *p : params) {
    saved.push_back(p->name);
    p->name = prefix(m) + p->name;
  }
  return params;
}

} // namespace

void save_ensemble(const std::filesystem::path &path, const EnsembleModel &model) {
  nlohmann::json meta = {{"config", model.config},
                         {"layout", model.layout},
                         {"standardizer", model.standardizer}};
  nlohmann::json members = nlohmann::json::array();
  // Copies so the live model keeps its parameter names.
  std::vector<Member> copies = model.members;
  std::vector<const Parameter *> all;
  for (int m = 0; m < static_cast<int>(copies.size()); ++m) {
    Member &mem = copies[static_cast<std::size_t>(m)];
    nlohmann::json jm = {{"seed", mem.seed},
                         {"hidden", mem.net.hidden()},
                         {"epoch_loss", mem.epoch_loss}};
    std::vector<std::string> names;
    for (Parameter *p : renamed(mem.net.parameters(), m, names))
      all.push_back(p);
    if (mem.propensity) {
      jm["propensity_hidden"] = mem.propensity->hidden();
      jm["propensity_standardizer"] = mem.propensity->standardizer();
      for (Parameter *p : renamed(mem.propensity->parameters(), m, names))
        all.push_back(p);
    }
    members.push_back(jm);
  }
  meta["members"] = members;
  save_checkpoint(path, meta, all);
}

EnsembleModel load_ensemble(const std::filesystem::path &path) {
  const Checkpoint ckpt = load_checkpoint(path);
  EnsembleModel model;
  try {
    model.config = ckpt.meta.at("config").get<TrainConfig>();
    model.layout = ckpt.meta.at("layout").get<LambdaLayout>();
    model.standardizer = ckpt.meta.at("standardizer").get<Standardizer>();
  } catch (const nlohmann::json::exception &e) {
    throw IoError("ensemble checkpoint " + path.string() +
                  " has an invalid header: " + e.what());
  }
  const auto &members = ckpt.meta.at("members");
  Rng dummy(0);
  for (std::size_t m = 0; m < members.size(); ++m) {
    const auto &jm = members[m];
    Member mem;
    mem.seed = jm.at("seed").get<std::uint64_t>();
    mem.epoch_loss = jm.value("epoch_loss", std::vector<double>{});
    mem.net = OutcomeNet("outcome", model.layout, jm.at("hidden").get<int>(),
                         model.kind() == ModelKind::Binary
                             ? HeadMode::Single
                             : HeadMode::PotentialOutcomes,
                         dummy);
    std::vector<std::string> names;
    auto params = renamed(mem.net.parameters(), static_cast<int>(m), names);
    if (jm.contains("propensity_hidden")) {
      mem.propensity = PropensityNet(
          "propensity", model.layout.dims, model.layout.steps(),
          jm.at("propensity_hidden").get<int>(),
          jm.at("propensity_standardizer").get<Standardizer>(), dummy);
      for (Parameter *p : renamed(mem.propensity->parameters(),
                                  static_cast<int>(m), names))
        params.push_back(p);
    }
    restore_parameters(ckpt, params);
    for (std::size_t k = 0; k < params.size(); ++k)
      params[k]->name = names[k];
    model.members.push_back(std::move(mem));
  }
  return model;
}

} // namespace tcs::tcsnet
