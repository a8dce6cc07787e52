#pragma once

#include "tcs/simgen/generator.hpp"

#include <filesystem>

// Canonical long-format dataset files.
//
//   <name>.csv   id,time,x_1..x_D,a,event_time,censor_time,y
//                one row per (subject, grid step); time is the grid step s;
//                an empty x cell marks a missing value
//   <name>.json  sidecar with history/followup/dims, seed and scenario config
namespace tcs::simgen {

struct DatasetFile {
  int history = 0;
  int followup = 0;
  int dims = 0;
  std::uint64_t seed = 0;
  std::optional<ScenarioConfig> config;
  std::vector<LongitudinalSample> samples;
};

std::filesystem::path sidecar_path(const std::filesystem::path &csv);

void write_dataset(const std::filesystem::path &csv,
                   const std::vector<LongitudinalSample> &samples,
                   std::uint64_t seed,
                   const std::optional<ScenarioConfig> &config);

// Reads the CSV and its sidecar. Throws IoError / DataError.
DatasetFile read_dataset(const std::filesystem::path &csv);

// id,time,ite,s1,s0,h1,h0 with time the follow-up step.
void write_truth(const std::filesystem::path &csv,
                 const std::vector<LongitudinalSample> &samples,
                 const GroundTruth &truth);

} // namespace tcs::simgen
