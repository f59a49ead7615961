#include "thetalab/io.hpp"
#include "thetalab/error.hpp"
#include <openssl/evp.h>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace thetalab::io
{

std::string version()
{
   return "0.1.0";
}

std::string sha256_hex(std::string const& bytes)
{
   unsigned char md[EVP_MAX_MD_SIZE];
   unsigned int len = 0;
   if (!EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr))
      throw Error("sha256 failed");
   static char const* hex = "0123456789abcdef";
   std::string s;
   for (unsigned i = 0; i < len; ++i)
   {
      s += hex[md[i] >> 4];
      s += hex[md[i] & 15];
   }
   return s;
}

std::string read_text(std::string const& path)
{
   std::ifstream in(path, std::ios::binary);
   if (!in) throw ValidationError("cannot read " + path);
   std::ostringstream ss;
   ss << in.rdbuf();
   return ss.str();
}

std::string sha256_file(std::string const& path)
{
   return sha256_hex(read_text(path));
}

std::string fmt(double x)
{
   char buf[40];
   std::snprintf(buf, sizeof buf, "%.17g", x);
   return buf;
}

int Table::column(std::string const& name) const
{
   for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return int(i);
   return -1;
}

std::vector<double> Table::col(std::string const& name) const
{
   int c = column(name);
   if (c < 0) throw ValidationError("missing column " + name);
   std::vector<double> v;
   for (auto const& r : rows)
      v.push_back(r.at(c));
   return v;
}

std::string to_csv(Table const& t)
{
   std::string s;
   for (std::size_t i = 0; i < t.header.size(); ++i)
      s += (i ? "," : "") + t.header[i];
   s += '\n';
   for (auto const& r : t.rows)
   {
      for (std::size_t i = 0; i < r.size(); ++i)
         s += (i ? "," : "") + fmt(r[i]);
      s += '\n';
   }
   return s;
}

void write_text(std::string const& path, std::string const& text)
{
   std::filesystem::path p(path);
   if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
   std::ofstream out(path, std::ios::binary);
   if (!out) throw ValidationError("cannot write " + path);
   out << text;
}

static std::string trim(std::string s)
{
   auto b = s.find_first_not_of(" \t\r");
   auto e = s.find_last_not_of(" \t\r");
   return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

Table parse_csv(std::string const& text)
{
   Table t;
   std::istringstream in(text);
   std::string line;
   bool head = true;
   int lineno = 0;
   while (std::getline(in, line))
   {
      ++lineno;
      line = trim(line);
      if (line.empty() || line[0] == '#') continue;
      std::vector<std::string> cells;
      std::stringstream ls(line);
      std::string c;
      while (std::getline(ls, c, ','))
         cells.push_back(trim(c));
      if (head)
      {
         t.header = cells;
         head = false;
         continue;
      }
      if (cells.size() != t.header.size())
         throw ValidationError("csv line " + std::to_string(lineno) + ": wrong number of fields");
      std::vector<double> row;
      for (auto const& x : cells)
      {
         std::size_t used = 0;
         double v;
         try
         {
            v = std::stod(x, &used);
         }
         catch (std::exception const&)
         {
            used = 0;
         }
         if (used != x.size() || x.empty())
            throw ValidationError("csv line " + std::to_string(lineno) + ": not a number: " + x);
         row.push_back(v);
      }
      t.rows.push_back(std::move(row));
   }
   if (head) throw ValidationError("csv has no header");
   return t;
}

Table read_csv(std::string const& path)
{
   return parse_csv(read_text(path));
}

std::map<std::string, std::string> parse_config(std::string const& text)
{
   std::map<std::string, std::string> m;
   std::istringstream in(text);
   std::string line;
   int lineno = 0;
   while (std::getline(in, line))
   {
      ++lineno;
      auto h = line.find('#');
      if (h != std::string::npos) line.resize(h);
      line = trim(line);
      if (line.empty()) continue;
      auto eq = line.find('=');
      if (eq == std::string::npos)
         throw ValidationError("config line " + std::to_string(lineno) + ": expected key = value");
      auto k = trim(line.substr(0, eq));
      if (k.empty()) throw ValidationError("config line " + std::to_string(lineno) + ": empty key");
      m[k] = trim(line.substr(eq + 1));
   }
   return m;
}

std::map<std::string, std::string> read_config(std::string const& path)
{
   return parse_config(read_text(path));
}

json to_json(FitReport const& r)
{
   json j;
   j["model"] = r.model;
   json p = json::object();
   for (std::size_t i = 0; i < r.names.size(); ++i)
      p[r.names[i]] = {{"value", r.values[i]}, {"error", r.errors[i]}};
   j["parameters"] = p;
   j["chi2"] = r.chi2;
   j["dof"] = r.dof;
   j["aic"] = r.aic;
   j["converged"] = r.converged;
   json res = json::array();
   for (auto const& row : r.residuals)
      res.push_back({{"x", row.x}, {"y", row.y}, {"fit", row.fit}, {"residual", row.y - row.fit}});
   j["residuals"] = res;
   if (!r.sequence.empty())
   {
      json s = json::array();
      for (auto const& [x, y] : r.sequence)
         s.push_back({x, y});
      j["sequence"] = s;
   }
   j["provenance"] = r.provenance;
   j["extra"] = r.extra;
   j["flags"] = r.flags;
   return j;
}

json to_json(VirialReport const& v)
{
   json j = to_json(v.report);
   j["L"] = v.L;
   j["a1_by_L"] = v.a1;
   j["a2_by_L"] = v.a2;
   j["n_tilde"] = v.n_tilde;
   j["L_log_lambda0"] = v.llog;
   j["a1_omega"] = v.a1_inf.omega;
   j["a2_omega"] = v.a2_inf.omega;
   return j;
}

json to_json(DensitySweep const& d)
{
   json j;
   j["K"] = d.K;
   j["p"] = d.p;
   j["tau"] = d.tau;
   j["n_tilde"] = d.n_tilde;
   json sz = json::array();
   for (auto const& s : d.sizes)
   {
      json e;
      e["L"] = s.L;
      e["f0"] = s.f0;
      e["density"] = s.density;
      e["crossings"] = s.crossings;
      e["jump"] = s.jump;
      e["steepness"] = s.steepness;
      e["levels"] = s.levels.curves;
      sz.push_back(e);
   }
   j["sizes"] = sz;
   j["warnings"] = d.warnings;
   return j;
}

json to_json(mc::G1Histogram const& h)
{
   json j;
   j["L"] = h.L;
   j["replicas"] = h.counts.size();
   j["samples"] = h.samples;
   j["couplings"] = {{"p", h.config.couplings.p}, {"K", h.config.couplings.K}, {"tau", h.config.couplings.tau}};
   j["seed"] = h.config.seed;
   j["warmup_sweeps"] = h.config.warmup_sweeps;
   j["measure_sweeps"] = h.config.measure_sweeps;
   j["move_mix"] = {{"grow", h.config.mix.grow},
                    {"retract", h.config.mix.retract},
                    {"backbite", h.config.mix.backbite},
                    {"special", h.config.mix.special}};
   json acc = json::array();
   char const* names[] = {"grow", "retract", "backbite", "special"};
   for (auto const& st : h.stats)
   {
      json a;
      for (int m = 0; m < mc::n_moves; ++m)
         a[names[m]] = st.rate(mc::Move(m));
      acc.push_back(a);
   }
   j["acceptance"] = acc;
   j["warnings"] = h.warnings;
   return j;
}

Table histogram_table(mc::G1Histogram const& h)
{
   Table t;
   t.header = {"r2", "multiplicity", "count", "mean", "err", "g1"};
   auto pooled = h.pooled();
   auto g = mc::g1_profile(h);
   for (std::size_t r = 0; r < pooled.size(); ++r)
   {
      int m = mc::multiplicity(int(r), h.L);
      if (m == 0) continue;
      t.rows.push_back({double(r), double(m), pooled[r], h.mean[r], h.err[r], g[r]});
   }
   return t;
}

json RunManifest::to_json() const
{
   json j;
   j["command_line"] = command_line;
   j["config"] = config;
   j["version"] = version;
   j["seeds"] = seeds;
   j["threads"] = threads;
   j["wall_time"] = wall_time;
   j["outputs"] = outputs;
   j["warnings"] = warnings;
   return j;
}

void emit(std::string const& dir, std::string const& name, std::string const& text, RunManifest& m)
{
   write_text((std::filesystem::path(dir) / name).string(), text);
   m.outputs[name] = sha256_hex(text);
}

void write_manifest(std::string const& dir, RunManifest const& m)
{
   write_text((std::filesystem::path(dir) / "manifest.json").string(), m.to_json().dump(2) + "\n");
}

} // namespace thetalab::io
