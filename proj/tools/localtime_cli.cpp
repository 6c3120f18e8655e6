// Command-line front end: path generation, quadratic variation, local-time
// fields, identity checks and Monte Carlo experiments.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "localtime/config.hpp"
#include "localtime/localtime.hpp"

namespace fs = std::filesystem;
using namespace loctime;

namespace {

constexpr int kOk = 0;
constexpr int kBadInput = 1;
constexpr int kViolation = 2;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string num(double v) { return detail::format_double(v); }

// Exactly one path source: a CSV file or a generator spec (JSON file or inline flags).
struct Source {
  std::string input;
  std::string generator;
  std::optional<std::uint64_t> seed;

  void add(CLI::App* app) {
    app->add_option("--input", input, "path CSV (t,x,jump,pre_x)");
    app->add_option("--generator", generator, "generator spec JSON");
    app->add_option("--seed", seed, "override the generator seed");
  }

  SampledCadlagPath load() const {
    if (input.empty() == generator.empty()) throw InputError("give exactly one of --input or --generator");
    if (!input.empty()) {
      std::ifstream in(input);
      if (!in) throw InputError("cannot open '" + input + "'");
      return read_csv(in);
    }
    auto spec = generator_from_json(load_json_file(generator));
    if (seed) spec.seed = *seed;
    return generate(spec);
  }
};

std::vector<double> eval_times(const std::vector<double>& requested, const SampledCadlagPath& path) {
  if (requested.empty()) return {path.horizon()};
  for (double t : requested)
    if (!(t > 0.0) || t > path.horizon()) throw InputError("time " + num(t) + " outside (0, T]");
  return requested;
}

// Output goes to a file when one is named, otherwise to stdout.
class Sink {
 public:
  explicit Sink(const std::string& file) {
    if (file.empty()) return;
    if (auto parent = fs::path(file).parent_path(); !parent.empty()) fs::create_directories(parent);
    file_.open(file);
    if (!file_) throw InputError("cannot write '" + file + "'");
  }
  std::ostream& out() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

void write_field(std::ostream& out, const LevelFunction& f, double t, const std::string& kind, const std::string& level) {
  for (std::size_t k = 0; k < f.size(); ++k)
    out << num(t) << ',' << num(f.grid.center(k)) << ',' << num(f[k]) << ',' << kind << ',' << level << '\n';
}

std::vector<std::size_t> partition_levels(const SampledCadlagPath& path, const std::vector<int>& levels,
                                          PartitionScheme& scheme) {
  std::size_t steps = path.size() - 1;
  std::vector<int> use = levels;
  if (use.empty()) {
    int n = 0;
    while ((std::size_t{1} << n) < steps) ++n;
    use = {n};
  }
  scheme = PartitionScheme::dyadic(path, use);
  std::vector<std::size_t> idx(use.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  return idx;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pathwise local times for sampled cadlag paths"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "simulate a path and write it as CSV");
  std::string gen_config, gen_out, gen_kind;
  GeneratorSpec flags;
  std::optional<std::uint64_t> gen_seed;
  gen->add_option("--config", gen_config, "generator spec JSON");
  gen->add_option("--kind", gen_kind, "brownian|brownian_drift|compound_poisson|jump_diffusion|deterministic_test");
  gen->add_option("--sigma", flags.sigma);
  gen->add_option("--mu", flags.mu);
  gen->add_option("--lambda", flags.lambda);
  gen->add_option("--jump-lo", flags.jump_lo);
  gen->add_option("--jump-hi", flags.jump_hi);
  gen->add_option("--horizon", flags.horizon);
  gen->add_option("--steps", flags.steps, "steps per unit time");
  gen->add_option("--seed", gen_seed);
  gen->add_option("--out", gen_out, "output CSV (default stdout)");

  // qv
  auto* qv = app.add_subcommand("qv", "quadratic variation along dyadic partitions");
  Source qv_src;
  qv_src.add(qv);
  std::vector<int> qv_levels;
  std::vector<double> qv_times;
  std::string qv_out;
  qv->add_option("--levels", qv_levels, "dyadic levels")->delimiter(',');
  qv->add_option("--times", qv_times, "evaluation times (default T)")->delimiter(',');
  qv->add_option("--out", qv_out);

  // localtime {occ|crossing|skorokhod}
  auto* lt = app.add_subcommand("localtime", "local-time fields on a level grid");
  lt->require_subcommand(1);
  struct FieldOpts {
    Source src;
    double du = 1.0 / 64.0;
    std::vector<double> times;
    std::string out;
  };
  FieldOpts occ_o, cr_o, sk_o;
  auto field_cmd = [&](const char* name, const char* help, FieldOpts& o) {
    auto* c = lt->add_subcommand(name, help);
    o.src.add(c);
    c->add_option("--grid-du", o.du, "level grid spacing");
    c->add_option("--times", o.times, "evaluation times (default T)")->delimiter(',');
    c->add_option("--out", o.out, "field CSV t,u,value,kind,level (default stdout)");
    return c;
  };
  auto* occ = field_cmd("occ", "occupation-density estimate", occ_o);
  double occ_eps = 0.0;
  occ->add_option("--eps", occ_eps, "bandwidth (default 4 grid cells)");
  auto* cr = field_cmd("crossing", "K, J, Kc and 2Kc along dyadic partitions", cr_o);
  std::vector<int> cr_levels;
  cr->add_option("--levels", cr_levels, "dyadic levels (default: the full grid)")->delimiter(',');
  auto* sk = field_cmd("skorokhod", "interval-crossing estimates c n^{z,c}", sk_o);
  std::vector<double> sk_widths{0.4, 0.2, 0.1, 0.05};
  std::string sk_table;
  sk->add_option("--widths", sk_widths, "decreasing crossing widths")->delimiter(',');
  sk->add_option("--table", sk_table, "Cauchy-distance table CSV (default stdout)");

  // tanaka-check
  auto* tc = app.add_subcommand("tanaka-check", "discrete Tanaka-Meyer residuals for a function suite");
  Source tc_src;
  tc_src.add(tc);
  std::vector<int> tc_levels;
  std::vector<double> tc_times;
  std::string tc_functions, tc_out;
  double tc_tol = 1e-9;
  tc->add_option("--levels", tc_levels, "dyadic levels (default 2,4,6,8 and the full grid)")->delimiter(',');
  tc->add_option("--times", tc_times, "evaluation times (default T/4, T/2, T)")->delimiter(',');
  tc->add_option("--functions", tc_functions, "JSON array of function descriptors (default built-in suite)");
  tc->add_option("--tol", tc_tol, "relative tolerance, scaled by 1 + TV");
  tc->add_option("--out", tc_out, "residual table CSV (default stdout)");

  // experiment
  auto* ex = app.add_subcommand("experiment", "Monte Carlo convergence experiment");
  std::string ex_config, ex_out;
  std::optional<std::uint64_t> ex_seed;
  ex->add_option("--config", ex_config, "experiment JSON")->required();
  ex->add_option("--seed", ex_seed);
  ex->add_option("--out", ex_out, "output directory for report.csv and long.csv");

  // q-stat
  auto* qs = app.add_subcommand("q-stat", "integral of |Q^{z,d}| for a ladder of widths");
  Source qs_src;
  qs_src.add(qs);
  std::vector<double> qs_widths{0.4, 0.2, 0.1, 0.05};
  double qs_du = 0.00625;
  double qs_t = -1.0;
  std::string qs_out;
  qs->add_option("--widths", qs_widths)->delimiter(',');
  qs->add_option("--grid-du", qs_du);
  qs->add_option("--t", qs_t, "evaluation time (default T)");
  qs->add_option("--out", qs_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kBadInput;
  }

  try {
    if (*gen) {
      GeneratorSpec spec = flags;
      if (!gen_config.empty()) spec = generator_from_json(load_json_file(gen_config));
      if (!gen_kind.empty()) spec.kind = generator_kind_from_string(gen_kind);
      if (gen_seed) spec.seed = *gen_seed;
      auto path = generate(spec);
      Sink sink(gen_out);
      write_csv(path, sink.out());
      if (!gen_out.empty())
        std::cout << "samples " << path.size() << " range [" << num(path.min_value()) << ", " << num(path.max_value())
                  << "] jumps " << path.jumps().size() << " tv " << num(total_variation(path)) << '\n';
      return kOk;
    }

    if (*qv) {
      auto path = qv_src.load();
      auto times = eval_times(qv_times, path);
      PartitionScheme scheme;
      auto idx = partition_levels(path, qv_levels, scheme);
      Sink sink(qv_out);
      auto& out = sink.out();
      out << "n,t,total,continuous,jump\n";
      for (std::size_t l : idx) {
        auto q = quadratic_variation(path, scheme.level(l), scheme.label(l));
        for (double t : times) {
          std::size_t i = path.index_at(t);
          out << scheme.label(l) << ',' << num(t) << ',' << num(q.total[i]) << ',' << num(q.continuous_part[i]) << ','
              << num(q.jump_part[i]) << '\n';
        }
      }
      return kOk;
    }

    if (*lt) {
      if (*occ) {
        auto path = occ_o.src.load();
        double eps = occ_eps > 0.0 ? occ_eps : 4.0 * occ_o.du;
        auto grid = LevelGrid::covering(path.min_value(), path.max_value(), occ_o.du, eps + occ_o.du);
        Sink sink(occ_o.out);
        sink.out() << "t,u,value,kind,level\n";
        for (double t : eval_times(occ_o.times, path))
          write_field(sink.out(), occupation_local_time(path, t, eps, grid), t, "L_occupation", num(eps));
        return kOk;
      }
      if (*cr) {
        auto path = cr_o.src.load();
        auto grid = LevelGrid::covering(path.min_value(), path.max_value(), cr_o.du, cr_o.du);
        PartitionScheme scheme;
        auto idx = partition_levels(path, cr_levels, scheme);
        Sink sink(cr_o.out);
        sink.out() << "t,u,value,kind,level\n";
        for (double t : eval_times(cr_o.times, path)) {
          auto j = j_pi(path, t, grid);
          write_field(sink.out(), j, t, "J", "");
          for (std::size_t l : idx) {
            auto k = k_pi(path, scheme.level(l), t, grid);
            auto split = split_kc_kd(k, j);
            std::string lv = std::to_string(scheme.label(l));
            write_field(sink.out(), k, t, "K", lv);
            write_field(sink.out(), split.kc, t, "Kc", lv);
            write_field(sink.out(), split.l, t, "L_interval", lv);
          }
        }
        return kOk;
      }
      if (*sk) {
        auto path = sk_o.src.load();
        for (std::size_t i = 0; i < sk_widths.size(); ++i)
          if (!(sk_widths[i] > 0.0) || (i > 0 && !(sk_widths[i] < sk_widths[i - 1])))
            throw InputError("--widths must be positive and strictly decreasing");
        double margin = sk_widths.front() / 2.0 + 2.0 * sk_o.du;
        auto grid = LevelGrid::covering(path.min_value(), path.max_value(), sk_o.du, margin);
        Sink sink(sk_o.out);
        sink.out() << "t,u,value,kind,level\n";
        std::ostringstream table;
        table << "t,width_a,width_b,l1_distance\n";
        for (double t : eval_times(sk_o.times, path)) {
          auto fields = interval_crossing_local_time(path, t, sk_widths, grid);
          for (std::size_t i = 0; i < fields.size(); ++i) {
            write_field(sink.out(), fields[i], t, "L_interval_crossing", num(sk_widths[i]));
            if (i > 0)
              table << num(t) << ',' << num(sk_widths[i - 1]) << ',' << num(sk_widths[i]) << ','
                    << num(lp_distance(fields[i - 1], fields[i], 1.0)) << '\n';
          }
        }
        Sink tsink(sk_table);
        tsink.out() << table.str();
        return kOk;
      }
    }

    if (*tc) {
      auto path = tc_src.load();
      std::vector<double> times = tc_times;
      if (times.empty()) times = {path.horizon() / 4.0, path.horizon() / 2.0, path.horizon()};
      times = eval_times(times, path);
      std::vector<DCFunction> suite;
      if (tc_functions.empty()) {
        suite = builtin_suite();
      } else {
        auto j = load_json_file(tc_functions);
        if (!j.is_array()) throw InputError("--functions must hold a JSON array");
        for (const auto& d : j) suite.push_back(function_from_json(d));
      }
      std::vector<int> levels = tc_levels.empty() ? std::vector<int>{2, 4, 6, 8} : tc_levels;
      auto scheme = PartitionScheme::dyadic(path, levels);
      std::vector<std::pair<std::string, Partition>> parts;
      for (std::size_t l = 0; l < scheme.size(); ++l) parts.emplace_back(std::to_string(scheme.label(l)), scheme.level(l));
      if (tc_levels.empty()) parts.emplace_back("full", PartitionScheme::full_grid(path).level(0));
      double bound = tc_tol * (1.0 + total_variation(path));
      Sink sink(tc_out);
      sink.out() << "function,level,t,residual,bound,ok\n";
      int bad = 0;
      for (const auto& f : suite)
        for (const auto& [label, p] : parts)
          for (double t : times) {
            double r = discrete_tanaka_residual(path, f, p, t);
            bool ok = std::abs(r) <= bound;
            bad += !ok;
            sink.out() << f.name << ',' << label << ',' << num(t) << ',' << num(r) << ',' << num(bound) << ','
                       << (ok ? 1 : 0) << '\n';
          }
      if (bad) {
        std::cerr << bad << " residual(s) above tolerance\n";
        return kViolation;
      }
      return kOk;
    }

    if (*ex) {
      auto cfg = experiment_from_json(load_json_file(ex_config));
      if (ex_seed) cfg.seed = *ex_seed;
      auto rep = run_convergence_experiment(cfg);
      std::ostringstream report, long_csv;
      report << "level,samples,mean,se\n";
      for (const auto& r : rep.rows)
        report << num(r.level) << ',' << r.samples << ',' << num(r.mean) << ',' << num(r.se) << '\n';
      long_csv << "estimator,distance,level,path,value\n";
      for (std::size_t l = 0; l < rep.values.size(); ++l)
        for (std::size_t i = 0; i < rep.values[l].size(); ++i)
          long_csv << rep.estimator << ',' << rep.distance << ',' << num(cfg.ladder[l]) << ',' << i << ','
                   << num(rep.values[l][i]) << '\n';
      if (!ex_out.empty()) {
        fs::create_directories(ex_out);
        Sink a((fs::path(ex_out) / "report.csv").string());
        a.out() << report.str();
        Sink b((fs::path(ex_out) / "long.csv").string());
        b.out() << long_csv.str();
      } else {
        std::cout << report.str();
      }
      for (const auto& r : rep.rows)
        std::cerr << rep.estimator << " level " << num(r.level) << ": mean " << num(r.mean) << " se " << num(r.se)
                  << " (" << r.wall_ms << " ms)\n";
      if (rep.violations) {
        std::cerr << rep.violations << " invariant violation(s) during the run\n";
        return kViolation;
      }
      return kOk;
    }

    if (*qs) {
      auto path = qs_src.load();
      double t = qs_t > 0.0 ? qs_t : path.horizon();
      eval_times({t}, path);
      double top = *std::max_element(qs_widths.begin(), qs_widths.end());
      auto grid = LevelGrid::covering(path.min_value(), path.max_value(), qs_du, top / 2.0 + 2.0 * qs_du);
      auto classical = classical_local_time(path, t, grid);
      Sink sink(qs_out);
      sink.out() << "d,q_integral\n";
      for (double d : qs_widths) sink.out() << num(d) << ',' << num(q_statistic(path, t, d, classical.field)) << '\n';
      return kOk;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kBadInput;
  }
  return kOk;
}
