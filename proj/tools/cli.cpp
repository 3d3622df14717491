#include "cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <map>
#include <memory>
#include <sstream>

#include "permuton/acceptance.hpp"
#include "permuton/core.hpp"
#include "permuton/densities.hpp"
#include "permuton/errors.hpp"
#include "permuton/gridcheck.hpp"
#include "permuton/io.hpp"
#include "permuton/lis.hpp"
#include "permuton/parallel.hpp"
#include "permuton/samplers.hpp"
#include "permuton/stats.hpp"

namespace permuton::cli {

namespace {

using json = nlohmann::ordered_json;

constexpr const char* kSeedRule =
    "Seeding: replicate r of a run with --seed S draws from the stream (S, r); the same configuration and seed "
    "always produce byte-identical output, whatever --threads is.";

std::string fmt(double v) { return io::format_real(v); }

// Output sink: standard output for "-", otherwise a file.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& stdout_stream) {
    if (path == "-" || path.empty()) {
      stream_ = &stdout_stream;
    } else {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw UsageError("--out: cannot open '" + path + "' for writing");
      stream_ = file_.get();
    }
  }
  std::ostream& operator*() { return *stream_; }
  void flush() { stream_->flush(); }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_ = nullptr;
};

void emit_json(std::ostream& os, const json& j) { os << j.dump() << '\n'; }

DensityFamily parse_family(const std::string& spec) {
  if (spec.empty()) throw UsageError("--family: required. Accepted grammar: " + std::string(kFamilyGrammar));
  try {
    return DensityFamily::parse(spec);
  } catch (const std::invalid_argument& e) {
    throw UsageError("--family '" + spec + "': " + e.what() + ". Accepted grammar: " + std::string(kFamilyGrammar));
  } catch (const ParameterOutOfRange& e) {
    throw UsageError("--family '" + spec + "': " + e.what());
  }
}

std::vector<std::uint64_t> sizes(const RunConfig& c) {
  if (c.n && !c.n_grid.empty()) throw UsageError("--n and --n-grid are mutually exclusive");
  if (c.n) {
    if (*c.n < 1) throw UsageError("--n: must be >= 1");
    return {*c.n};
  }
  if (!c.n_grid.empty()) return parse_n_grid(c.n_grid);
  throw UsageError("one of --n or --n-grid is required (grid grammar: start:stop:geometric[:points])");
}

unsigned threads(const RunConfig& c) { return c.threads == 0 ? default_thread_count() : c.threads; }

// ---------------------------------------------------------------- commands

int cmd_sample(const RunConfig& c, std::ostream& os) {
  const DensityFamily f = parse_family(c.family);
  if (!c.n) throw UsageError("--n: required for sample");
  if (*c.n < 1) throw UsageError("--n: must be >= 1");
  RngStream rng(c.seed, 0);
  const PointSet ps = sample_set(f, *c.n, rng);
  std::vector<std::uint8_t> on_chain;
  if (c.emit_witness) {
    on_chain.assign(ps.size(), 0);
    const LisResult lis = lis_points(ps, true);
    for (auto i : *lis.witness) on_chain[i] = 1;
  }
  if (c.json) {
    for (std::size_t i = 0; i < ps.size(); ++i) {
      json j{{"x", ps[i].x}, {"y", ps[i].y}};
      if (c.emit_witness) j["in_lis"] = on_chain[i] == 1;
      emit_json(os, j);
    }
  } else if (!c.emit_witness) {
    write_csv(os, ps);
  } else {
    os << "x,y,in_lis\n";
    for (std::size_t i = 0; i < ps.size(); ++i)
      os << io::format_real(ps[i].x, 17) << ',' << io::format_real(ps[i].y, 17) << ',' << int(on_chain[i]) << '\n';
  }
  return kOk;
}

void write_estimate(std::ostream& os, const EstimateRecord& r, bool as_json) {
  if (as_json) {
    emit_json(os, json{{"family", r.family.to_string()},
                       {"N", r.n},
                       {"replicates", r.replicates},
                       {"mean_lis", r.mean_lis},
                       {"std_lis", r.std_lis},
                       {"stderr", r.std_err},
                       {"seed", r.seed}});
    return;
  }
  os << io::csv_row({r.family.to_string(), std::to_string(r.n), std::to_string(r.replicates), fmt(r.mean_lis),
                     fmt(r.std_lis), fmt(r.std_err), std::to_string(r.seed)})
     << '\n';
}

std::vector<EstimateRecord> run_estimates(const RunConfig& c) {
  const DensityFamily f = parse_family(c.family);
  const auto ns = sizes(c);
  const std::uint64_t reps = c.replicates.value_or(64);
  if (reps < 2) throw UsageError("--replicates: must be >= 2");
  const Sampler sampler(f);
  std::vector<EstimateRecord> out;
  for (auto n : ns) out.push_back(estimate(sampler, n, reps, c.seed, threads(c)));
  return out;
}

int cmd_estimate(const RunConfig& c, std::ostream& os) {
  const auto records = run_estimates(c);
  if (!c.json) os << "family,N,replicates,mean_lis,std_lis,stderr,seed\n";
  for (const auto& r : records) write_estimate(os, r, c.json);
  return kOk;
}

std::vector<EstimateRecord> read_estimates(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("--in: cannot open '" + path + "'");
  std::string line;
  if (!io::next_line(in, line)) throw UsageError("--in: empty file");
  std::vector<EstimateRecord> out;
  const bool is_json = !line.empty() && line.front() == '{';
  auto from_fields = [&](const std::string& fam, const std::string& n, const std::string& reps,
                         const std::string& mean, const std::string& sd, const std::string& se,
                         const std::string& seed) {
    EstimateRecord r;
    r.family = parse_family(fam);
    r.n = io::parse_integer(n);
    r.replicates = io::parse_integer(reps);
    r.mean_lis = io::parse_real(mean);
    r.std_lis = io::parse_real(sd);
    r.std_err = io::parse_real(se);
    r.seed = io::parse_integer(seed);
    out.push_back(r);
  };
  try {
    if (is_json) {
      do {
        if (line.empty()) continue;
        const json j = json::parse(line);
        EstimateRecord r;
        r.family = parse_family(j.at("family").get<std::string>());
        r.n = j.at("N").get<std::uint64_t>();
        r.replicates = j.at("replicates").get<std::uint64_t>();
        r.mean_lis = j.at("mean_lis").get<double>();
        r.std_lis = j.at("std_lis").get<double>();
        r.std_err = j.at("stderr").get<double>();
        r.seed = j.at("seed").get<std::uint64_t>();
        out.push_back(r);
      } while (io::next_line(in, line));
    } else {
      if (line != "family,N,replicates,mean_lis,std_lis,stderr,seed")
        throw UsageError("--in: expected estimates CSV header, got '" + line + "'");
      while (io::next_line(in, line)) {
        if (line.empty()) continue;
        const auto f = io::parse_csv_row(line);
        if (f.size() != 7) throw UsageError("--in: expected 7 fields in '" + line + "'");
        from_fields(f[0], f[1], f[2], f[3], f[4], f[5], f[6]);
      }
    }
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception& e) {
    throw UsageError(std::string("--in: malformed estimates: ") + e.what());
  }
  return out;
}

int cmd_fit(const RunConfig& c, std::ostream& os) {
  const std::vector<EstimateRecord> records = c.in.empty() ? run_estimates(c) : read_estimates(c.in);
  if (records.empty()) throw UsageError("fit: no estimates");
  FitResult fit;
  try {
    fit = fit_exponent(records, c.with_log_correction);
  } catch (const DegenerateDesign& e) {
    throw UsageError(std::string("fit: ") + e.what());
  }
  const std::string fam = records.front().family.to_string();
  if (c.json) {
    emit_json(os, json{{"family", fam},
                       {"exponent", fit.exponent},
                       {"log_coeff", fit.log_coeff},
                       {"intercept", fit.intercept},
                       {"r_squared", fit.r_squared},
                       {"n_points", fit.n_points}});
  } else {
    os << "family,exponent,log_coeff,intercept,r_squared,n_points\n";
    os << io::csv_row({fam, fmt(fit.exponent), fmt(fit.log_coeff), fmt(fit.intercept), fmt(fit.r_squared),
                       std::to_string(fit.n_points)})
       << '\n';
  }
  return kOk;
}

int cmd_grid_check(const RunConfig& c, std::ostream& os, std::ostream& err) {
  const DensityFamily f = parse_family(c.family);
  const auto ns = sizes(c);
  double alpha = -0.5;
  if (const auto* d = std::get_if<family::DiagonalPower>(&f.params())) alpha = d->alpha;
  if (c.alpha) alpha = *c.alpha;
  if (!(alpha > -1.0 && alpha < 0.0)) throw UsageError("--alpha: must lie in (-1,0), got " + fmt(alpha));
  const std::uint64_t reps = c.replicates.value_or(1);
  if (reps < 1) throw UsageError("--replicates: must be >= 1");
  const Sampler sampler(f);
  if (!c.json) os << "N,alpha,b,lower,lis,upper,chain_cap,seed\n";
  for (auto n : ns) {
    for (std::uint64_t r = 0; r < reps; ++r) {
      RngStream rng(c.seed, r);
      const PointSet ps = sampler.sample_set(n, rng);
      SandwichReport rep;
      try {
        rep = sandwich_check(ps, alpha);
      } catch (const InvariantViolation& e) {
        os.flush();
        err << "invariant violation: " << e.what() << " (N=" << n << ", replicate " << r << ")\n";
        return kViolation;
      }
      if (c.json) {
        json j{{"N", rep.n},          {"alpha", rep.alpha}, {"b", rep.b},
               {"lower", rep.lower},  {"lis", rep.lis},     {"upper", rep.upper},
               {"chain_cap", rep.chain_cap}, {"seed", c.seed}};
        if (c.emit_witness) {
          json chain = json::array();
          for (const auto& cell : path_upper_bound(bin_points(ps, rep.b)).chain)
            chain.push_back({cell.i, cell.j, cell.count});
          j["chain"] = chain;
        }
        emit_json(os, j);
      } else {
        os << rep.n << ',' << fmt(rep.alpha) << ',' << rep.b << ',' << rep.lower << ',' << rep.lis << ','
           << rep.upper << ',' << rep.chain_cap << ',' << c.seed << '\n';
      }
    }
  }
  return kOk;
}

int cmd_concentration(const RunConfig& c, std::ostream& os, std::ostream& err) {
  const DensityFamily f = parse_family(c.family);
  const auto ns = sizes(c);
  const std::uint64_t reps = c.replicates.value_or(10000);
  if (reps < 2) throw UsageError("--replicates: must be >= 2");
  const Sampler sampler(f);
  if (!c.json) os << "family,N,lambda,empirical_tail,mcdiarmid,talagrand_up,talagrand_down,median\n";
  bool violated = false;
  for (auto n : ns) {
    const auto lambdas = c.lambda.empty() ? default_lambda_grid(n) : parse_real_list(c.lambda);
    const auto values = lis_replicates(sampler, n, reps, c.seed, threads(c));
    const ConcentrationReport rep = concentration_from_samples(f, n, values, lambdas);
    for (const auto& row : rep.rows) {
      if (c.json) {
        emit_json(os, json{{"family", f.to_string()},
                           {"N", n},
                           {"lambda", row.lambda},
                           {"empirical_tail", row.empirical_tail},
                           {"mcdiarmid", row.mcdiarmid},
                           {"talagrand_up", row.talagrand_up},
                           {"talagrand_down", row.talagrand_down},
                           {"median", rep.median},
                           {"empirical_upper", row.empirical_upper},
                           {"empirical_lower", row.empirical_lower},
                           {"mean", rep.mean},
                           {"stderr", rep.std_err},
                           {"replicates", rep.replicates},
                           {"mcdiarmid_violated", row.mcdiarmid_violated},
                           {"talagrand_violated", row.talagrand_violated}});
      } else {
        os << io::csv_row({f.to_string(), std::to_string(n), fmt(row.lambda), fmt(row.empirical_tail),
                           fmt(row.mcdiarmid), fmt(row.talagrand_up), fmt(row.talagrand_down), fmt(rep.median)})
           << '\n';
      }
      if (row.mcdiarmid_violated || row.talagrand_violated) {
        violated = true;
        err << "bound violation: N=" << n << " lambda=" << fmt(row.lambda)
            << (row.mcdiarmid_violated ? " (McDiarmid)" : "") << (row.talagrand_violated ? " (Talagrand)" : "")
            << '\n';
      }
    }
  }
  return violated ? kViolation : kOk;
}

int cmd_verify(const RunConfig& c, std::ostream& os) {
  if (c.suite != "primary") throw UsageError("--suite: only 'primary' is available, got '" + c.suite + "'");
  std::vector<int> ids;
  if (!c.criteria.empty()) {
    for (double v : parse_real_list(c.criteria)) {
      const int id = static_cast<int>(v);
      if (id != v || id < 1 || id > static_cast<int>(acceptance::criteria().size()))
        throw UsageError("--criteria: unknown criterion " + fmt(v));
      ids.push_back(id);
    }
  }
  acceptance::Options opts;
  opts.seed = c.seed;
  opts.threads = threads(c);
  const auto results = acceptance::run_suite(opts, ids, [&](const acceptance::CriterionResult& r) {
    if (c.json)
      emit_json(os, json{{"id", r.id},
                         {"title", r.title},
                         {"passed", r.passed},
                         {"detail", r.detail},
                         {"seconds", r.seconds}});
    else
      os << acceptance::format_line(r) << '\n';
    os.flush();
  });
  std::size_t passed = 0;
  for (const auto& r : results) passed += r.passed ? 1 : 0;
  if (!c.json) os << passed << "/" << results.size() << " criteria passed\n";
  return passed == results.size() ? kOk : kViolation;
}

// ---------------------------------------------------------------- config file

void apply_config(const std::string& path, RunConfig& c, const CLI::App& sub) {
  std::ifstream in(path);
  if (!in) throw UsageError("--config: cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const std::exception& e) {
    throw UsageError("--config '" + path + "': invalid JSON: " + e.what());
  }
  if (!j.is_object()) throw UsageError("--config: top level must be an object");
  auto given = [&](const std::string& flag) {
    const CLI::Option* o = sub.get_option_no_throw("--" + flag);
    return o != nullptr && o->count() > 0;
  };
  auto as_string = [](const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
  using Setter = std::function<void(const json&)>;
  const std::map<std::string, Setter> setters = {
      {"family", [&](const json& v) { c.family = as_string(v); }},
      {"n", [&](const json& v) { c.n = v.get<std::uint64_t>(); }},
      {"n-grid", [&](const json& v) { c.n_grid = as_string(v); }},
      {"replicates", [&](const json& v) { c.replicates = v.get<std::uint64_t>(); }},
      {"seed", [&](const json& v) { c.seed = v.get<std::uint64_t>(); }},
      {"lambda",
       [&](const json& v) {
         if (v.is_array()) {
           std::string s;
           for (const auto& x : v) s += (s.empty() ? "" : ",") + fmt(x.get<double>());
           c.lambda = s;
         } else {
           c.lambda = as_string(v);
         }
       }},
      {"out", [&](const json& v) { c.out = as_string(v); }},
      {"in", [&](const json& v) { c.in = as_string(v); }},
      {"json", [&](const json& v) { c.json = v.get<bool>(); }},
      {"threads", [&](const json& v) { c.threads = v.get<unsigned>(); }},
      {"with-log-correction", [&](const json& v) { c.with_log_correction = v.get<bool>(); }},
      {"emit-witness", [&](const json& v) { c.emit_witness = v.get<bool>(); }},
      {"alpha", [&](const json& v) { c.alpha = v.get<double>(); }},
      {"suite", [&](const json& v) { c.suite = as_string(v); }},
      {"criteria", [&](const json& v) { c.criteria = as_string(v); }},
  };
  for (const auto& [key, value] : j.items()) {
    if (key == "command") {
      if (as_string(value) != c.command)
        throw UsageError("--config: file is for command '" + as_string(value) + "', not '" + c.command + "'");
      continue;
    }
    auto it = setters.find(key);
    if (it == setters.end() || sub.get_option_no_throw("--" + key) == nullptr)
      throw UsageError("--config: key '" + key + "' is not an option of '" + c.command + "'");
    if (given(key)) continue;
    try {
      it->second(value);
    } catch (const json::exception& e) {
      throw UsageError("--config: bad value for '" + key + "': " + e.what());
    }
  }
}

}  // namespace

std::vector<std::uint64_t> parse_n_grid(std::string_view spec) {
  const std::string s(spec);
  std::vector<std::string> parts;
  std::stringstream ss(s);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  const std::string grammar = " (grammar: start:stop:geometric[:points])";
  if ((parts.size() != 3 && parts.size() != 4) || parts[2] != "geometric")
    throw UsageError("--n-grid '" + s + "': malformed" + grammar);
  std::uint64_t start = 0, stop = 0, points = 0;
  try {
    auto positive = [](const std::string& t) {
      const long long v = io::parse_integer(t);
      if (v < 1) throw std::invalid_argument("values must be positive integers");
      return static_cast<std::uint64_t>(v);
    };
    start = positive(parts[0]);
    stop = positive(parts[1]);
    if (parts.size() == 4) points = positive(parts[3]);
  } catch (const std::exception& e) {
    throw UsageError("--n-grid '" + s + "': " + e.what() + grammar);
  }
  if (start < 1 || stop < start) throw UsageError("--n-grid '" + s + "': need 1 <= start <= stop" + grammar);
  if (parts.size() == 3) {
    const double doublings = std::log2(static_cast<double>(stop) / static_cast<double>(start));
    points = static_cast<std::uint64_t>(std::llround(doublings)) + 1;
    if (start == stop) points = 1;
  }
  if (points < 1) throw UsageError("--n-grid '" + s + "': points must be >= 1" + grammar);
  if (start == stop && points > 1) throw UsageError("--n-grid '" + s + "': start == stop allows one point");
  try {
    return geometric_grid(start, stop, points);
  } catch (const std::invalid_argument& e) {
    throw UsageError("--n-grid '" + s + "': " + e.what());
  }
}

std::vector<double> parse_real_list(std::string_view spec) {
  std::vector<double> out;
  for (const auto& field : io::parse_csv_row(spec)) {
    double v = 0.0;
    try {
      v = io::parse_real(field);
    } catch (const std::exception& e) {
      throw UsageError("list '" + std::string(spec) + "': " + e.what());
    }
    if (!(v >= 0.0) || !std::isfinite(v))
      throw UsageError("list '" + std::string(spec) + "': values must be finite and >= 0");
    out.push_back(v);
  }
  if (out.empty()) throw UsageError("empty list");
  return out;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"permuton-lab: sample permuton-like densities and study the longest increasing subsequence"};
  app.footer(kSeedRule);
  app.require_subcommand(1);
  RunConfig c;
  std::string config_path;

  auto common = [&](CLI::App* sub, bool family, bool sizes_opt, bool reps, bool lambda) {
    if (family) sub->add_option("--family", c.family, std::string("density family: ") + std::string(kFamilyGrammar));
    if (sizes_opt) {
      sub->add_option("--n", c.n, "sample size N");
      sub->add_option("--n-grid", c.n_grid, "N grid start:stop:geometric[:points]");
    }
    if (reps) sub->add_option("--replicates", c.replicates, "independent replicates");
    if (lambda) sub->add_option("--lambda", c.lambda, "comma-separated deviations (default {0.05,0.1,0.25,0.5,1}·sqrt(N))");
    sub->add_option("--seed", c.seed, "base seed (default 1)");
    sub->add_option("--out", c.out, "output path, '-' for standard output (default)");
    sub->add_flag("--json", c.json, "JSON lines instead of CSV");
    sub->add_option("--threads", c.threads, "worker threads (default: PERMUTON_LAB_THREADS or all cores)");
    sub->add_option("--config", config_path, "JSON file with option values; command-line flags take precedence");
  };

  auto* sample = app.add_subcommand("sample", "draw N points and write them as x,y CSV");
  common(sample, true, true, false, false);
  sample->add_flag("--emit-witness", c.emit_witness, "add an in_lis column marking one longest chain");

  auto* est = app.add_subcommand("estimate", "Monte Carlo mean/std of LIS over replicates (default 64)");
  common(est, true, true, true, false);

  auto* fit = app.add_subcommand("fit", "fit log mean LIS against log N over an N grid or an estimates file");
  common(fit, true, true, true, false);
  fit->add_option("--in", c.in, "estimates CSV or JSON lines to fit instead of sampling");
  fit->add_flag("--with-log-correction", c.with_log_correction, "add a log log N regressor");

  auto* grid = app.add_subcommand("grid-check", "grid lower/upper bounds sandwiching LIS");
  common(grid, true, true, true, false);
  grid->add_option("--alpha", c.alpha, "grid exponent in (-1,0); b = floor(N^{1/(alpha+2)})");
  grid->add_flag("--emit-witness", c.emit_witness, "include the maximizing box chain (JSON mode)");

  auto* conc = app.add_subcommand("concentration", "empirical LIS tails against McDiarmid and Talagrand bounds");
  common(conc, true, true, true, true);

  auto* verify = app.add_subcommand("verify", "run the acceptance criteria");
  common(verify, false, false, false, false);
  verify->add_option("--suite", c.suite, "suite name (primary)");
  verify->add_option("--criteria", c.criteria, "comma-separated criterion ids (default: all)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << "run with --help for the accepted flags\n";
    return kUsage;
  }

  CLI::App* chosen = app.get_subcommands().front();
  c.command = chosen->get_name();
  try {
    if (!config_path.empty()) apply_config(config_path, c, *chosen);
    Sink sink(c.out, out);
    int code = kOk;
    if (c.command == "sample") code = cmd_sample(c, *sink);
    else if (c.command == "estimate") code = cmd_estimate(c, *sink);
    else if (c.command == "fit") code = cmd_fit(c, *sink);
    else if (c.command == "grid-check") code = cmd_grid_check(c, *sink, err);
    else if (c.command == "concentration") code = cmd_concentration(c, *sink, err);
    else if (c.command == "verify") code = cmd_verify(c, *sink);
    sink.flush();
    return code;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const InvariantViolation& e) {
    err << "invariant violation: " << e.what() << '\n';
    return kViolation;
  } catch (const SizeLimitExceeded& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const ParameterOutOfRange& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  }
}

}  // namespace permuton::cli
