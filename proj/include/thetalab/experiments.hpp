#pragma once
#include "thetalab/io.hpp"
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace thetalab
{

struct ExperimentOptions
{
   std::optional<std::vector<int>> Ls;   // override the pinned sizes
   double max_seconds = 0.0;             // 0: no budget
   std::uint64_t seed = 1;
   double warmup_sweeps = 500;
   double measure_sweeps = 1e5;
   int replicas = 10;
   bool keep_histograms = true;
};

struct Experiment
{
   std::string id;
   io::json summary;
   std::map<std::string, io::Table> tables;   // file name -> table
   std::vector<std::string> warnings;
   bool partial = false;                       // budget exhausted before all sizes were done
   double seconds = 0.0;
};

std::vector<std::string> experiment_ids();

// throws ValidationError on an unknown id
Experiment reproduce(std::string const& id, ExperimentOptions const& opt = {});

// pinned defaults, exposed for the manifest
std::vector<int> default_sizes(std::string const& id);

} // namespace thetalab
