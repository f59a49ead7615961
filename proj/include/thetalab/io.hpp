#pragma once
#include "thetalab/analysis.hpp"
#include "thetalab/mcvisaw.hpp"
#include <json.hpp>
#include <map>
#include <string>
#include <vector>

namespace thetalab::io
{

using json = nlohmann::json;

std::string sha256_hex(std::string const& bytes);
std::string sha256_file(std::string const& path);

// 17 significant digits
std::string fmt(double x);

struct Table
{
   std::vector<std::string> header;
   std::vector<std::vector<double>> rows;

   int column(std::string const& name) const;   // -1 when absent
   std::vector<double> col(std::string const& name) const;
};

std::string to_csv(Table const& t);
void write_text(std::string const& path, std::string const& text);   // creates parent dirs
std::string read_text(std::string const& path);
Table read_csv(std::string const& path);
Table parse_csv(std::string const& text);

// key = value lines, '#' comments
std::map<std::string, std::string> parse_config(std::string const& text);
std::map<std::string, std::string> read_config(std::string const& path);

json to_json(FitReport const& r);
json to_json(VirialReport const& v);
json to_json(DensitySweep const& d);
json to_json(mc::G1Histogram const& h);
Table histogram_table(mc::G1Histogram const& h);

struct RunManifest
{
   std::string command_line;
   json config;
   std::string version;
   std::vector<std::uint64_t> seeds;
   int threads = 1;
   double wall_time = 0.0;
   std::map<std::string, std::string> outputs;   // file -> sha256
   std::vector<std::string> warnings;

   json to_json() const;
};

// writes text under dir and records its hash in the manifest
void emit(std::string const& dir, std::string const& name, std::string const& text, RunManifest& m);
void write_manifest(std::string const& dir, RunManifest const& m);

std::string version();

} // namespace thetalab::io
