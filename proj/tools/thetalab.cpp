#include "thetalab/analysis.hpp"
#include "thetalab/cftpred.hpp"
#include "thetalab/error.hpp"
#include "thetalab/experiments.hpp"
#include "thetalab/io.hpp"
#include "thetalab/linkstate.hpp"
#include "thetalab/looptm.hpp"
#include "thetalab/mcvisaw.hpp"
#include "thetalab/vertextm.hpp"
#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <iostream>
#include <numbers>

using namespace thetalab;
using io::json;
using ojson = nlohmann::ordered_json;

namespace
{

constexpr double pi = std::numbers::pi;

// couplings given either by a named point or explicitly
struct PointArgs
{
   std::string point = "theta-bn";
   std::optional<double> p, K, tau, n;

   bool has_K = true;

   void add(CLI::App* a, bool custom = true, bool with_K = true)
   {
      a->add_option("--point", point, "theta-bn | theta-ds | dense | dilute | regime2" +
                                          std::string(custom ? " | custom" : ""))
          ->capture_default_str();
      if (!custom) return;
      a->add_option("--p", p, "custom p");
      has_K = with_K;
      if (with_K) a->add_option("--K", K, "custom monomer fugacity");
      a->add_option("--tau", tau, "custom contact weight");
      a->add_option("--n", n, "custom contractible loop weight");
   }

   bool is_custom() const { return point == "custom"; }

   LatticeCouplings couplings() const
   {
      if (!is_custom()) return closed_form_couplings(parse_point(point));
      if (!p || (has_K && !K) || !tau)
         throw ValidationError(has_K ? "--point custom needs --p, --K and --tau" : "--point custom needs --p and --tau");
      LatticeCouplings c;
      c.p = *p;
      c.K = K.value_or(0.0);
      c.tau = *tau;
      return c;
   }

   VertexWeights weights() const
   {
      if (!is_custom()) return named_point(parse_point(point)).weights;
      auto c = couplings();
      return weights_from_couplings(c.p, c.K, c.tau, n.value_or(0.0));
   }
};

struct Output
{
   std::string dir;
   void add(CLI::App* a, std::string const& def = "")
   {
      dir = def;
      a->add_option("--out", dir, "artifact directory (manifest, CSV, JSON)");
   }
};

struct Context
{
   std::string command_line;
   CLI::App* app = nullptr;
   CLI::App* sub = nullptr;
   std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
   io::RunManifest manifest;

   void init()
   {
      manifest.command_line = command_line;
      manifest.version = io::version();
      manifest.threads = configure_threads();
      // resolved values of every option, defaults included; unset optionals are omitted
      manifest.config = json::object();
      for (auto const& [k, v] : io::parse_config(sub->config_to_str(true, false)))
      {
         if (v == "\"\"") continue;
         bool quoted = v.size() >= 2 && v.front() == '"' && v.back() == '"';
         manifest.config[k] = quoted ? v.substr(1, v.size() - 2) : v;
      }
      manifest.config["subcommand"] = sub->get_name();
   }

   // writes run.conf, result.json and the manifest when an output directory is set
   void finish(std::string const& dir, json const& result)
   {
      if (dir.empty()) return;
      manifest.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      // explicitly given values only; replay with: thetalab --config run.conf
      io::emit(dir, "run.conf", app->config_to_str(false, false), manifest);
      io::emit(dir, "result.json", result.dump(2) + "\n", manifest);
      io::write_manifest(dir, manifest);
   }
};

void print(json const& j)
{
   std::cout << j.dump(2) << "\n";
}

json values_json(std::vector<cplx> const& v)
{
   json a = json::array();
   for (auto z : v)
      a.push_back({z.real(), z.imag()});
   return a;
}

std::vector<int> parse_sizes(std::vector<std::string> const& s)
{
   // accepts "4..14", "4..14:2" and plain numbers
   std::vector<int> out;
   for (auto const& t : s)
   {
      auto dots = t.find("..");
      if (dots == std::string::npos)
      {
         out.push_back(std::stoi(t));
         continue;
      }
      int a = std::stoi(t.substr(0, dots));
      auto rest = t.substr(dots + 2);
      int step = 1;
      auto colon = rest.find(':');
      if (colon != std::string::npos)
      {
         step = std::stoi(rest.substr(colon + 1));
         rest = rest.substr(0, colon);
      }
      int b = std::stoi(rest);
      if (step <= 0 || b < a) throw ValidationError("bad size range '" + t + "'");
      for (int L = a; L <= b; L += step)
         out.push_back(L);
   }
   return out;
}

std::string error_type(std::exception const& e)
{
   if (dynamic_cast<DomainError const*>(&e)) return "DomainError";
   if (dynamic_cast<SingularParametrization const*>(&e)) return "SingularParametrization";
   if (dynamic_cast<ValidationError const*>(&e)) return "ValidationError";
   if (dynamic_cast<ResourceError const*>(&e)) return "ResourceError";
   if (dynamic_cast<MissingDataError const*>(&e)) return "MissingDataError";
   if (dynamic_cast<std::invalid_argument const*>(&e)) return "ValidationError";
   return "Error";
}

int error_code(std::string const& type)
{
   if (type == "UsageError") return 2;
   if (type == "DomainError" || type == "SingularParametrization") return 3;
   if (type == "ValidationError") return 4;
   if (type == "MissingDataError") return 5;
   if (type == "ResourceError") return 6;
   return 1;
}

int fail(std::string const& type, std::string const& msg)
{
   json j = {{"error", {{"type", type}, {"message", msg}}}};
   std::cerr << j.dump() << "\n";
   return error_code(type);
}

} // namespace

int main(int argc, char** argv)
{
   CLI::App app{"dilute loop model and theta-point polymer toolkit"};
   app.require_subcommand(1);
   Context ctx;
   ctx.app = &app;
   for (int i = 0; i < argc; ++i)
      ctx.command_line += (i ? " " : "") + std::string(argv[i]);

   std::function<void()> run;

   // weights
   auto* weights = app.add_subcommand("weights", "vertex weights and lattice couplings");
   std::string w_point;
   std::optional<double> w_gamma;
   std::string w_branch = "plus";
   weights->add_option("--point", w_point, "named integrable point");
   weights->add_option("--gamma", w_gamma, "crossing parameter, isotropic point of --branch");
   weights->add_option("--branch", w_branch, "plus | minus")->capture_default_str();
   Output w_out;
   w_out.add(weights);
   weights->callback([&] {
      run = [&] {
         ojson j;
         VertexWeights vw;
         LatticeCouplings c;
         if (!w_point.empty())
         {
            auto np = named_point(parse_point(w_point));
            vw = np.weights;
            c = np.couplings;
         }
         else if (w_gamma)
         {
            Branch b = w_branch == "plus" ? Branch::Plus : w_branch == "minus" ? Branch::Minus : Branch::None;
            if (b == Branch::None) throw ValidationError("--branch must be plus or minus");
            auto iso = isotropic_points(*w_gamma);
            vw = zb_weights(CrossingParameter(*w_gamma), b == Branch::Plus ? iso.first : iso.second);
            c = LatticeCouplings::from_weights(vw);
         }
         else
            throw ValidationError("weights needs --point or --gamma");
         j["p"] = c.p;
         j["K"] = c.K;
         j["tau"] = c.tau;
         j["w"] = c.w;
         j["n"] = vw.n;
         j["rho"] = vw.rho;
         std::cout << j.dump() << "\n";
         ctx.finish(w_out.dir, json::parse(j.dump()));
      };
   });

   // basis
   auto* basis = app.add_subcommand("basis", "link-pattern sector dimensions");
   int b_L = 0;
   std::string b_topo = "disk";
   bool b_table = false, b_list = false;
   int b_ell = 0;
   basis->add_option("--L", b_L, "width")->required()->check(CLI::Range(1, max_sites - 2));
   basis->add_option("--topology", b_topo, "disk | annulus")->capture_default_str();
   basis->add_flag("--table", b_table, "all widths up to L");
   basis->add_flag("--list", b_list, "print the patterns of sector --ell");
   basis->add_option("--ell", b_ell, "sector for --list")->capture_default_str();
   Output b_out;
   b_out.add(basis);
   basis->callback([&] {
      run = [&] {
         Topology t = b_topo == "disk" ? Topology::Disk : b_topo == "annulus" ? Topology::Annulus
                                                                               : throw ValidationError("bad topology");
         if (b_list)
         {
            auto sb = enumerate(b_L, b_ell, t);
            for (std::size_t i = 0; i < sb.size(); ++i)
               std::cout << sb.pattern(i).str() << "\n";
            return;
         }
         io::Table tab;
         tab.header = {"L"};
         for (int l = 0; l <= b_L; ++l)
            tab.header.push_back("ell" + std::to_string(l));
         auto d = dimension_table(b_L, t);
         std::string text = "L";
         for (int l = 0; l <= b_L; ++l)
            text += ",ell" + std::to_string(l);
         text += "\n";
         for (int L = b_table ? 1 : b_L; L <= b_L; ++L)
         {
            std::string row = std::to_string(L);
            for (int l = 0; l <= L; ++l)
               row += "," + std::to_string(d[L][l]);
            text += row + "\n";
         }
         std::cout << text;
         if (!b_out.dir.empty())
         {
            io::emit(b_out.dir, "basis.csv", text, ctx.manifest);
            ctx.finish(b_out.dir, json{{"L", b_L}, {"topology", b_topo}});
         }
      };
   });

   // spectrum
   auto* spectrum = app.add_subcommand("spectrum", "leading loop transfer-matrix eigenvalues");
   PointArgs s_pt;
   s_pt.add(spectrum);
   std::vector<std::string> s_L;
   int s_ell = 0, s_k = 4;
   std::string s_twist = "loop", s_topo;
   bool s_allmom = false;
   spectrum->add_option("--L", s_L, "widths, e.g. 6 or 4..12 or 4..12:2")->required();
   spectrum->add_option("--ell", s_ell, "number of through-lines")->capture_default_str();
   spectrum->add_option("--twist", s_twist, "loop (weight n) | none (weight 2) | phi=X | nt=X")->capture_default_str();
   spectrum->add_option("--count,--k", s_k, "number of eigenvalues")->capture_default_str();
   spectrum->add_flag("--all-momenta", s_allmom, "do not project onto zero momentum");
   spectrum->add_option("--topology", s_topo, "force disk | annulus");
   Output s_out;
   s_out.add(spectrum);
   spectrum->callback([&] {
      run = [&] {
         auto w = s_pt.weights();
         TwistSetting tw;
         if (s_twist == "loop") tw = TwistSetting::from_weight(w.n);
         else if (s_twist == "none") tw = TwistSetting::from_phi(0.0);
         else if (s_twist.rfind("phi=", 0) == 0) tw = TwistSetting::from_phi(std::stod(s_twist.substr(4)));
         else if (s_twist.rfind("nt=", 0) == 0) tw = TwistSetting::from_weight(std::stod(s_twist.substr(3)));
         else throw ValidationError("bad --twist '" + s_twist + "'");
         Topology topo = s_topo.empty() ? RowOperator::natural_topology(s_ell, w.n, tw.n_noncontractible)
                         : s_topo == "disk" ? Topology::Disk
                         : s_topo == "annulus" ? Topology::Annulus
                                               : throw ValidationError("bad topology");
         io::Table t;
         t.header = {"L", "ell", "rank", "re", "im", "residual"};
         json runs = json::array();
         for (int L : parse_sizes(s_L))
         {
            if (L < 1 || L > max_sites - 2) throw DomainError("L out of range");
            RowOperator op(w, L, s_ell, tw, topo);
            auto ep = leading_eigenvalues(op, s_k, !s_allmom);
            for (std::size_t r = 0; r < ep.values.size(); ++r)
               t.rows.push_back({double(L), double(s_ell), double(r), ep.values[r].real(), ep.values[r].imag(),
                                 ep.residuals[r]});
            runs.push_back({{"L", L}, {"dim", op.dim()}, {"matvecs", ep.matvecs}, {"converged", ep.converged},
                            {"complex_leading", ep.complex_leading}});
         }
         std::string csv = io::to_csv(t);
         std::cout << csv;
         json j = {{"ell", s_ell}, {"n_tilde", tw.n_noncontractible}, {"phi", tw.phi},
                   {"topology", topo == Topology::Disk ? "disk" : "annulus"}, {"runs", runs}};
         if (!s_out.dir.empty()) io::emit(s_out.dir, "spectrum.csv", csv, ctx.manifest);
         ctx.finish(s_out.dir, j);
      };
   });

   // vertex-spectrum
   auto* vspec = app.add_subcommand("vertex-spectrum", "Izergin-Korepin vertex transfer-matrix eigenvalues");
   std::string v_point;
   std::optional<double> v_gamma;
   std::string v_branch = "minus";
   int v_L = 0, v_m = 0, v_k = -1;
   double v_phi = 0.0;
   vspec->add_option("--point", v_point, "named integrable point (instead of --gamma)");
   vspec->add_option("--gamma", v_gamma, "crossing parameter");
   vspec->add_option("--branch", v_branch, "plus | minus isotropic point")->capture_default_str();
   vspec->add_option("--L", v_L, "width")->required()->check(CLI::Range(1, 16));
   vspec->add_option("--m", v_m, "magnetisation")->capture_default_str();
   vspec->add_option("--phi", v_phi, "twist angle")->capture_default_str();
   vspec->add_option("--count,--k", v_k, "number of eigenvalues, -1 for the full dense spectrum")->capture_default_str();
   Output v_out;
   v_out.add(vspec);
   vspec->callback([&] {
      run = [&] {
         double gamma;
         Branch br;
         if (!v_point.empty())
         {
            auto ip = integrable_point(parse_point(v_point));
            gamma = ip.gamma;
            br = ip.branch;
         }
         else if (v_gamma)
         {
            gamma = *v_gamma;
            br = v_branch == "plus" ? Branch::Plus : v_branch == "minus" ? Branch::Minus : Branch::None;
         }
         else
            throw ValidationError("vertex-spectrum needs --point or --gamma");
         if (br == Branch::None) throw DomainError("no isotropic vertex-model branch for this input");
         auto ep = transfer_spectrum(v_L, v_m, v_phi, gamma, spectral_x(gamma, br), v_k);
         io::Table t;
         t.header = {"L", "m", "rank", "re", "im"};
         for (std::size_t r = 0; r < ep.values.size(); ++r)
            t.rows.push_back({double(v_L), double(v_m), double(r), ep.values[r].real(), ep.values[r].imag()});
         std::string csv = io::to_csv(t);
         std::cout << csv;
         json j = {{"L", v_L}, {"m", v_m}, {"phi", v_phi}, {"gamma", gamma},
                   {"regime", regime_name(regime_of(gamma, br))}, {"converged", ep.converged}};
         if (!v_out.dir.empty()) io::emit(v_out.dir, "vertex_spectrum.csv", csv, ctx.manifest);
         ctx.finish(v_out.dir, j);
      };
   });

   // crosscheck
   auto* cross = app.add_subcommand("crosscheck", "loop spectrum contained in the vertex spectrum");
   std::string c_point = "theta-bn";
   int c_L = 3;
   std::vector<int> c_ell = {0, 1, 2};
   std::optional<double> c_phi;
   cross->add_option("--point", c_point, "named integrable point")->capture_default_str();
   cross->add_option("--L", c_L, "width")->capture_default_str()->check(CLI::Range(1, 8));
   cross->add_option("--ell", c_ell, "sectors")->capture_default_str();
   cross->add_option("--phi", c_phi, "twist for ell = 0 (default pi/2)");
   Output c_out;
   c_out.add(cross);
   cross->callback([&] {
      run = [&] {
         auto ip = integrable_point(parse_point(c_point));
         if (ip.branch == Branch::None) throw DomainError("point '" + c_point + "' has no vertex-model description");
         json rows = json::array();
         double worst = 0;
         for (int ell : c_ell)
         {
            double phi = ell == 0 ? c_phi.value_or(pi / 2) : 0.0;
            auto r = loop_vertex_crosscheck(ip.gamma, ip.branch, c_L, ell, phi);
            worst = std::max(worst, r.max_mismatch);
            rows.push_back({{"ell", ell}, {"phi", phi}, {"max_mismatch", r.max_mismatch},
                            {"loop_levels", r.loop_levels}, {"vertex_levels", r.vertex_levels}});
         }
         json j = {{"L", c_L}, {"point", c_point}, {"sectors", rows}, {"max_mismatch", worst}};
         print(j);
         ctx.finish(c_out.dir, j);
      };
   });

   // predict
   auto* predict = app.add_subcommand("predict", "continuum predictions");
   std::string p_what;
   double p_gamma = pi / 4;
   int p_m = 0, p_j = 0;
   std::optional<double> p_L, p_B, p_phi;
   predict->add_option("--what", p_what,
                       "watermelon | watermelon-dense | c-discrete | A | gap | ceff | exponents-bn | exponents-ds | "
                       "virial | twist-c | coulomb-ds")
       ->required();
   predict->add_option("--gamma", p_gamma, "crossing parameter")->capture_default_str();
   predict->add_option("--m", p_m, "leg number / sector")->capture_default_str();
   predict->add_option("--j", p_j, "continuum level")->capture_default_str();
   predict->add_option("--L", p_L, "size, for ceff");
   predict->add_option("--B", p_B, "log offset, for ceff");
   predict->add_option("--phi", p_phi, "twist, for twist-c");
   Output p_out;
   p_out.add(predict);
   predict->callback([&] {
      run = [&] {
         json j;
         if (p_what == "watermelon") j["x_m"] = cft::watermelon(p_gamma, p_m);
         else if (p_what == "watermelon-dense") j["x_m"] = cft::watermelon_dense(p_gamma, p_m);
         else if (p_what == "c-discrete") j["c"] = cft::c_discrete(p_gamma);
         else if (p_what == "A") j["A"] = cft::A_of_gamma(p_gamma);
         else if (p_what == "gap") j["x_g"] = cft::continuum_gap(p_gamma);
         else if (p_what == "ceff")
         {
            if (p_L && p_B) j["ceff"] = cft::ceff_continuum(p_gamma, p_m, p_j, *p_L, *p_B);
            else j["ceff"] = cft::ceff_continuum_limit(p_gamma, p_m);
         }
         else if (p_what == "exponents-bn" || p_what == "exponents-ds")
         {
            auto e = p_what == "exponents-bn" ? cft::exponents_theta_bn() : cft::exponents_theta_ds();
            j = {{"nu", e.nu}, {"gamma", e.gamma_exp}, {"phi", e.phi}, {"nu_prime", e.nu_prime}};
         }
         else if (p_what == "virial")
         {
            auto [a1, a2] = cft::virial_prediction();
            j = {{"a1", a1}, {"a2", a2}};
         }
         else if (p_what == "twist-c")
         {
            if (!p_phi) throw ValidationError("twist-c needs --phi");
            j["c"] = cft::central_charge_twist(*p_phi);
         }
         else if (p_what == "coulomb-ds")
         {
            double g = cft::ThetaDSGas::g, e0 = cft::ThetaDSGas::e0;
            j = {{"g", g}, {"c", cft::coulomb_gas_c(g, e0)}, {"Delta_0_1", g / 2}, {"Delta_0_2", 2 * g}};
         }
         else
            throw ValidationError("unknown --what '" + p_what + "'");
         std::cout << j.dump() << "\n";
         ctx.finish(p_out.dir, j);
      };
   });

   // mc
   auto* mc = app.add_subcommand("mc", "grand-canonical VISAW Monte Carlo on the torus");
   PointArgs m_pt;
   m_pt.add(mc);
   mc::RunConfig m_rc;
   double m_alpha = 0.25;
   mc->add_option("--L", m_rc.L, "torus size")->required()->check(CLI::Range(2, 4096));
   mc->add_option("--sweeps", m_rc.measure_sweeps, "measurement sweeps (units of L^2 steps)")->capture_default_str();
   mc->add_option("--warmup", m_rc.warmup_sweeps, "warmup sweeps")->capture_default_str();
   mc->add_option("--replicas", m_rc.n_replicas, "independent chains")->capture_default_str()->check(CLI::Range(1, 1 << 16));
   mc->add_option("--seed", m_rc.seed, "Philox key")->capture_default_str();
   mc->add_option("--grow", m_rc.mix.grow, "move mix")->capture_default_str();
   mc->add_option("--retract", m_rc.mix.retract, "move mix")->capture_default_str();
   mc->add_option("--backbite", m_rc.mix.backbite, "move mix")->capture_default_str();
   mc->add_option("--special", m_rc.mix.special, "move mix")->capture_default_str();
   mc->add_option("--alpha", m_alpha, "report G1 at r = alpha L")->capture_default_str();
   Output m_out;
   m_out.add(mc, "mc-out");
   mc->callback([&] {
      run = [&] {
         if (m_pt.point == "theta-bn") m_rc.couplings = mc::theta_bn_couplings();
         else if (m_pt.point == "theta-ds") m_rc.couplings = mc::theta_ds_couplings();
         else if (m_pt.is_custom())
         {
            auto c = m_pt.couplings();
            m_rc.couplings = {c.p, c.K, c.tau};
         }
         else
            throw ValidationError("mc supports --point theta-bn | theta-ds | custom");
         auto h = mc::run_protocol(m_rc);
         json j = io::to_json(h);
         try
         {
            auto g = mc::g1_at_ratio(h, m_alpha);
            j["G1"] = {{"alpha", m_alpha}, {"r2", g.r2}, {"value", g.value}, {"error", g.error}};
         }
         catch (MissingDataError const& e)
         {
            j["G1"] = nullptr;
            j["warnings"].push_back(e.what());
         }
         for (int r = 0; r < m_rc.n_replicas; ++r)
            ctx.manifest.seeds.push_back(m_rc.seed);
         ctx.manifest.config["streams"] = "replica index";
         ctx.manifest.warnings = h.warnings;
         io::emit(m_out.dir, "histogram.csv", io::to_csv(io::histogram_table(h)), ctx.manifest);
         print(j);
         ctx.finish(m_out.dir, j);
      };
   });

   // fit
   auto* fitc = app.add_subcommand("fit", "finite-size fits of a CSV series");
   std::string f_model, f_input, f_x = "L", f_y, f_sigma;
   double f_gamma = pi / 4;
   int f_m = 0, f_j = 0;
   std::optional<double> f_A, f_x1;
   bool f_free = true, f_power = false;
   fitc->add_option("--model", f_model, "central-charge | ceff-log | ceff-power | g1-power | g1-log | g1-compare")
       ->required();
   fitc->add_option("--in,--input", f_input, "CSV with a header row")->required()->check(CLI::ExistingFile);
   fitc->add_option("--x", f_x, "size column")->capture_default_str();
   fitc->add_option("--y", f_y, "value column (default: f, ceff or logG by model)");
   fitc->add_option("--sigma", f_sigma, "error column");
   fitc->add_option("--gamma", f_gamma, "crossing parameter for ceff-log")->capture_default_str();
   fitc->add_option("--m", f_m, "sector for ceff-log")->capture_default_str();
   fitc->add_option("--j", f_j, "level for ceff-log")->capture_default_str();
   fitc->add_option("--A", f_A, "fix the log amplitude");
   fitc->add_flag("--free-intercept,!--closed-intercept", f_free, "fit the L -> infinity value")->capture_default_str();
   fitc->add_flag("--lattice-term", f_power, "add d/L^2 to ceff-log");
   fitc->add_option("--x1", f_x1, "fix x1 in the G1 models");
   Output f_out;
   f_out.add(fitc);
   fitc->callback([&] {
      run = [&] {
         auto tab = io::read_csv(f_input);
         std::string ycol = f_y;
         if (ycol.empty())
            ycol = f_model == "central-charge" ? "f" : f_model.rfind("ceff", 0) == 0 ? "ceff" : "logG";
         auto x = tab.col(f_x), y = tab.col(ycol);
         std::vector<double> s;
         if (!f_sigma.empty()) s = tab.col(f_sigma);
         json j;
         auto with_prov = [&](FitReport r) {
            r.provenance[f_input] = io::sha256_file(f_input);
            return io::to_json(r);
         };
         if (f_model == "central-charge") j = with_prov(fit_central_charge(x, y));
         else if (f_model == "ceff-log") j = with_prov(fit_ceff_log(x, y, f_gamma, f_m, f_j, {f_A, f_free, f_power}));
         else if (f_model == "ceff-power") j = with_prov(fit_ceff_power(x, y));
         else if (f_model == "g1-power") j = with_prov(fit_g1(x, y, s, {G1Model::PowerLaw, f_x1}));
         else if (f_model == "g1-log") j = with_prov(fit_g1(x, y, s, {G1Model::LogCorrected, f_x1}));
         else if (f_model == "g1-compare")
         {
            auto c = compare_g1(x, y, s, f_x1);
            j = {{"power", with_prov(c.power)}, {"logcorrected", with_prov(c.logc)},
                 {"delta_aic", c.delta_aic}, {"preferred", c.preferred}};
         }
         else
            throw ValidationError("unknown --model '" + f_model + "'");
         print(j);
         ctx.finish(f_out.dir, j);
      };
   });

   // density-sweep
   auto* dens = app.add_subcommand("density-sweep", "monomer density and level crossings across K");
   PointArgs d_pt;
   d_pt.add(dens, true, false);
   std::vector<std::string> d_L = {"6", "8", "10"};
   double d_lo = 0.9, d_hi = 1.1, d_step = 0.005;
   std::string d_K, d_twist = "loop";
   int d_levels = 3;
   dens->add_option("--L", d_L, "sizes, e.g. 6 8 10 or 4..12:2")->capture_default_str();
   dens->add_option("--kmin", d_lo, "lower end as a multiple of the point's K")->capture_default_str();
   dens->add_option("--kmax", d_hi, "upper end")->capture_default_str();
   dens->add_option("--kstep", d_step, "grid step")->capture_default_str();
   dens->add_option("--K", d_K, "absolute grid a:b:step (overrides --kmin/--kmax/--kstep)");
   dens->add_option("--twist", d_twist, "loop (weight n) | none (weight 2) | nt=X")->capture_default_str();
   dens->add_option("--levels", d_levels, "tracked levels")->capture_default_str();
   Output d_out;
   d_out.add(dens);
   dens->callback([&] {
      run = [&] {
         auto c = d_pt.couplings();
         if (d_pt.is_custom() && d_K.empty()) throw ValidationError("--point custom needs an absolute --K a:b:step grid");
         double lo = c.K * d_lo, hi = c.K * d_hi, step = c.K * d_step;
         if (!d_K.empty())
         {
            auto p1 = d_K.find(':'), p2 = d_K.rfind(':');
            if (p1 == std::string::npos || p1 == p2) throw ValidationError("--K expects a:b:step");
            lo = std::stod(d_K.substr(0, p1));
            hi = std::stod(d_K.substr(p1 + 1, p2 - p1 - 1));
            step = std::stod(d_K.substr(p2 + 1));
         }
         if (!(step > 0) || !(hi > lo)) throw ValidationError("bad K grid");
         std::vector<double> K;
         int nk = int(std::lround((hi - lo) / step));
         for (int i = 0; i <= nk; ++i)
            K.push_back(lo + step * i);
         double n = d_pt.is_custom() ? d_pt.n.value_or(0.0) : d_pt.weights().n;
         double d_nt = d_twist == "loop" ? n : d_twist == "none" ? 2.0
                       : d_twist.rfind("nt=", 0) == 0 ? std::stod(d_twist.substr(3))
                                                      : throw ValidationError("bad --twist '" + d_twist + "'");
         auto d = density_sweep(c.p, c.tau, n, d_nt, K, parse_sizes(d_L), d_levels);
         json j = io::to_json(d);
         print(j);
         ctx.finish(d_out.dir, j);
      };
   });

   // virial
   auto* vir = app.add_subcommand("virial", "expansion of L log Lambda_0 in the non-contractible weight");
   PointArgs r_pt;
   r_pt.add(vir);
   std::vector<std::string> r_L = {"4..12:2"};
   std::vector<double> r_nt = {-0.2, -0.1, 0.0, 0.1, 0.2};
   vir->add_option("--L", r_L, "sizes")->capture_default_str();
   vir->add_option("--nt", r_nt, "grid of non-contractible weights")->capture_default_str();
   Output r_out;
   r_out.add(vir);
   vir->callback([&] {
      run = [&] {
         auto v = virial_coefficients(r_pt.weights(), parse_sizes(r_L), r_nt);
         json j = io::to_json(v);
         j["a1"] = v.a1_inf.value;
         j["a2"] = v.a2_inf.value;
         print(j);
         ctx.finish(r_out.dir, j);
      };
   });

   // reproduce
   auto* rep = app.add_subcommand("reproduce", "run a pinned experiment end to end");
   std::string e_id;
   ExperimentOptions e_opt;
   std::vector<std::string> e_L;
   std::string e_dir;
   rep->add_option("id", e_id, "experiment id")->required()->check(CLI::IsMember(experiment_ids()));
   rep->add_option("--L", e_L, "override the pinned sizes");
   rep->add_option("--max-seconds", e_opt.max_seconds, "budget; 0 for none")->capture_default_str();
   rep->add_option("--seed", e_opt.seed, "Monte Carlo seed")->capture_default_str();
   rep->add_option("--sweeps", e_opt.measure_sweeps, "Monte Carlo measurement sweeps")->capture_default_str();
   rep->add_option("--warmup", e_opt.warmup_sweeps, "Monte Carlo warmup sweeps")->capture_default_str();
   rep->add_option("--replicas", e_opt.replicas, "Monte Carlo replicas")->capture_default_str();
   rep->add_option("--out", e_dir, "artifact directory (default reproduce/<id>)");
   rep->callback([&] {
      run = [&] {
         if (!e_L.empty()) e_opt.Ls = parse_sizes(e_L);
         std::string dir = e_dir.empty() ? "reproduce/" + e_id : e_dir;
         auto ex = reproduce(e_id, e_opt);
         for (auto const& [name, t] : ex.tables)
            io::emit(dir, name, io::to_csv(t), ctx.manifest);
         ctx.manifest.warnings = ex.warnings;
         if (e_id.rfind("g1-", 0) == 0) ctx.manifest.seeds = {e_opt.seed};
         ex.summary["id"] = e_id;
         ex.summary["sizes"] = e_opt.Ls.value_or(default_sizes(e_id));
         ex.summary["seconds"] = ex.seconds;
         print(ex.summary);
         ctx.finish(dir, ex.summary);
      };
   });

   app.set_config("--config", "", "key = value file ([subcommand] sections); flags override it");

   try
   {
      app.parse(argc, argv);
   }
   catch (CLI::CallForHelp const& e)
   {
      return app.exit(e);
   }
   catch (CLI::CallForAllHelp const& e)
   {
      return app.exit(e);
   }
   catch (CLI::CallForVersion const& e)
   {
      return app.exit(e);
   }
   catch (CLI::ParseError const& e)
   {
      return fail("UsageError", e.what());
   }

   try
   {
      for (auto* s : app.get_subcommands())
         ctx.sub = s;
      ctx.init();
      run();
   }
   catch (std::exception const& e)
   {
      return fail(error_type(e), e.what());
   }
   return 0;
}
