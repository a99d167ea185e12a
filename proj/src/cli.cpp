// Copyright 2026 The mechtree Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mechtree/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "mechtree/bench.hpp"
#include "mechtree/dsl.hpp"
#include "mechtree/errors.hpp"
#include "mechtree/evaluator.hpp"
#include "mechtree/mechanisms.hpp"

namespace mechtree {
namespace {

Rational rational_arg(const std::string& text, const std::string& flag) {
  const auto value = parse_rational(text);
  if (!value) throw UsageError(flag + ": expected p/q or an integer, got '" + text + "'");
  return *value;
}

std::uint64_t count_arg(const std::string& text, const std::string& flag) {
  const Rational value = rational_arg(text, flag);
  if (value.get_den() != 1 || value < 0 || !value.get_num().fits_ulong_p()) {
    throw UsageError(flag + ": expected a nonnegative integer, got '" + text + "'");
  }
  return value.get_num().get_ui();
}

std::size_t required_count(const std::string& text, const std::string& flag) {
  if (text.empty()) throw UsageError(flag + " is required");
  return count_arg(text, flag);
}

std::uint64_t seed_arg(const std::string& text) {
  if (text.empty()) throw UsageError("--seed is required on randomized paths");
  return count_arg(text, "--seed");
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot write " + path);
  f << text;
}

std::string kind_name(const Mechanism& mech) {
  if (std::holds_alternative<DecisionTree>(mech)) return "deterministic";
  if (std::holds_alternative<RandomizedMechanism>(mech)) return "randomized";
  return "moulin";
}

std::string format_path(const EvalTrace& trace) {
  std::string out;
  for (const auto& step : trace.steps) out += step.id + (step.outcome ? ":yes " : ":no ");
  return out + "-> " + trace.leaf_id;
}

struct VerifyArgs {
  std::string file;
  bool exhaustive = false;
  bool sequential = false;
  bool shifted = false;
  std::string report;
  std::string threads;
};

struct VerifyOutcome {
  bool truthful = true;
  std::string text;
};

VerifyOutcome verify_once(const Mechanism& mech, const VerifierOptions& options,
                          const CliHooks& hooks) {
  VerificationReport report;
  if (const auto* tree = std::get_if<DecisionTree>(&mech)) {
    report = hooks.verify_tree(*tree, options);
  } else if (const auto* rand = std::get_if<RandomizedMechanism>(&mech)) {
    report = is_universally_truthful(*rand, options);
  } else {
    // Valid generalized-median schemes are strategyproof by characterization.
    require_valid(std::get<MoulinScheme>(mech));
    return {true, "verdict: truthful\nbasis: generalized median scheme\n"};
  }
  std::ostringstream os;
  if (report.verdict.truthful()) {
    os << "verdict: truthful\n";
  } else if (options.exhaustive) {
    os << "verdict: non-truthful\nwitnesses: " << report.witnesses.size() << "\n";
    for (const auto& w : report.witnesses) os << "\n" << format_witness(w);
  } else {
    os << format_witness(*report.verdict.witness);
  }
  os << "lp_calls: " << report.lp_calls << "\n";
  return {report.verdict.truthful(), os.str()};
}

int cmd_verify(const VerifyArgs& args, std::ostream& out, const CliHooks& hooks) {
  const Mechanism mech = load_mechanism(args.file);
  VerifierOptions options;
  options.exhaustive = args.exhaustive;
  options.sequential = args.sequential;
  if (!args.threads.empty()) options.threads = count_arg(args.threads, "--threads");
  const VerifyOutcome plain = verify_once(mech, options, hooks);
  std::string text = "mechanism: " + kind_name(mech) + ", agents " +
                     std::to_string(agent_count(mech)) + "\n" + plain.text;
  if (args.shifted) {
    options.shifted = true;
    const VerifyOutcome shifted = verify_once(mech, options, hooks);
    text += shifted.truthful == plain.truthful
                ? "shifted: agrees\n"
                : std::string("shifted: differs (shifted verdict ") +
                      (shifted.truthful ? "truthful" : "non-truthful") + ")\n";
  }
  out << text;
  if (!args.report.empty()) write_text(args.report, text);
  return plain.truthful ? kExitOk : kExitNonTruthful;
}

struct EvalArgs {
  std::string file;
  std::string profile;
  std::string seed;
  std::string trials;
  std::string threshold;
  std::string expect;
};

int cmd_eval(const EvalArgs& args, std::ostream& out) {
  const Mechanism mech = load_mechanism(args.file);
  const LocationProfile profile = load_profile(args.profile);
  if (profile.size() != agent_count(mech)) {
    throw UsageError("profile has " + std::to_string(profile.size()) +
                     " locations but the mechanism has " + std::to_string(agent_count(mech)) +
                     " agents");
  }
  if (!args.expect.empty()) {
    const Objective objective = parse_objective(args.expect);
    ExpectationOptions options;
    if (!args.trials.empty()) options.trials = count_arg(args.trials, "--trials");
    if (!args.threshold.empty()) {
      options.enumeration_threshold = count_arg(args.threshold, "--threshold");
    }
    if (!args.seed.empty()) options.seed = seed_arg(args.seed);
    const ExpectedObjective value = expected_objective(mech, profile, objective, options);
    const std::string name(objective_name(objective));
    if (const auto* exact = std::get_if<Rational>(&value)) {
      out << "expected_" << name << ": " << to_string(*exact) << " (" << to_decimal(*exact)
          << ")\n";
    } else {
      const auto& mc = std::get<MonteCarloEstimate>(value);
      char buf[128];
      std::snprintf(buf, sizeof buf, "%.12g (monte carlo, trials %llu, stddev %.12g)", mc.mean,
                    static_cast<unsigned long long>(mc.trials), mc.stddev);
      out << "expected_" << name << ": " << buf << "\n";
    }
    const OptimalPoint opt = opt_objective(objective, profile);
    out << "optimum: " << to_string(opt.value) << " at " << to_string(opt.location) << "\n";
    return kExitOk;
  }
  if (const auto* tree = std::get_if<DecisionTree>(&mech)) {
    const EvalTrace trace = eval(*tree, profile);
    out << "facility: " << to_string(trace.facility) << "\npath: " << format_path(trace) << "\n";
  } else if (const auto* scheme = std::get_if<MoulinScheme>(&mech)) {
    out << "facility: " << to_string(eval_moulin(*scheme, profile)) << "\n";
  } else {
    RngStream rng(seed_arg(args.seed), 0);
    const SampleOutcome s = sample_eval(std::get<RandomizedMechanism>(mech), profile, rng);
    out << "branch: " << s.branch << "\ntuple:";
    for (auto a : s.tuple) out << " " << a;
    out << "\nfacility: " << to_string(s.trace.facility)
        << "\npath: " << format_path(s.trace) << "\n";
  }
  return kExitOk;
}

struct GenArgs {
  std::string kind;
  std::string n, i, k, t, leaves;
  bool untampered = false;
  std::string max_median, max_leaves;
  std::string output;
};

int cmd_gen(const GenArgs& args, std::ostream& out) {
  GeneratorCaps caps;
  if (!args.max_median.empty()) caps.max_median_size = count_arg(args.max_median, "--max-median");
  if (!args.max_leaves.empty()) caps.max_leaves = count_arg(args.max_leaves, "--max-leaves");
  const std::string& kind = args.kind;
  std::optional<Mechanism> mech;
  if (kind == "dictator") {
    mech = gen_dictator(required_count(args.n, "--n"),
                        args.i.empty() ? 1 : count_arg(args.i, "--i"));
  } else if (kind == "average") {
    mech = gen_average(required_count(args.n, "--n"));
  } else if (kind == "median_k") {
    mech = gen_median_tree(required_count(args.k, "--k"), caps);
  } else if (kind == "median_first_k") {
    mech = gen_median_first_k(required_count(args.n, "--n"), required_count(args.k, "--k"), caps);
  } else if (kind == "random_dictator") {
    mech = gen_random_dictator(required_count(args.n, "--n"));
  } else if (kind == "sampled_median") {
    mech = gen_sampled_median(required_count(args.n, "--n"), required_count(args.t, "--t"), caps);
  } else if (kind == "tampered_dictator") {
    mech = gen_tampered_dictator(required_count(args.n, "--n"),
                                 required_count(args.leaves, "--leaves"), !args.untampered, caps);
  } else if (kind == "moulin_median") {
    mech = gen_moulin_median3();
  } else {
    throw UsageError("unknown --kind '" + kind + "'");
  }
  const std::string text = serialize(*mech);
  if (args.output.empty()) {
    out << text;
  } else {
    write_text(args.output, text);
  }
  return kExitOk;
}

struct ProfileArgs {
  std::string kind;
  std::string n, a, k, eps;
  std::string output;
};

int cmd_profile(const ProfileArgs& args, std::ostream& out) {
  WorstCaseParams params;
  if (!args.a.empty()) params.offset = rational_arg(args.a, "--a");
  if (!args.k.empty()) params.cluster_size = count_arg(args.k, "--k");
  if (!args.eps.empty()) params.spread = rational_arg(args.eps, "--eps");
  const LocationProfile p =
      gen_worstcase_profile(parse_worstcase_kind(args.kind), required_count(args.n, "--n"), params);
  const std::string text = format_profile(p);
  if (args.output.empty()) {
    out << text;
  } else {
    write_text(args.output, text);
  }
  return kExitOk;
}

struct BenchArgs {
  std::string file;
  std::string objective = "sc";
  std::string trials, seed, csv;
  // ratio
  std::string dist = "uniform";
  std::string lo, hi, k, eps, profile_kind = "outlier", a, profiles;
  std::string mc_trials, threshold;
  // worstcase
  std::string budget;
  // lemma1
  std::string n, delta;
  // oracle
  std::string step = "1/2", max = "2";
  // moulin
  std::vector<std::string> schemes;
};

ProfileDistribution ratio_distribution(const BenchArgs& args, std::size_t n) {
  ProfileDistribution dist;
  dist.agent_count = n;
  if (args.dist == "uniform") {
    dist.kind = DistributionKind::kUniformBox;
    if (!args.lo.empty()) dist.low = rational_arg(args.lo, "--lo");
    if (!args.hi.empty()) dist.high = rational_arg(args.hi, "--hi");
  } else if (args.dist == "two_cluster") {
    dist.kind = DistributionKind::kTwoCluster;
    dist.cluster_size = required_count(args.k, "--k");
    if (!args.eps.empty()) dist.spread = rational_arg(args.eps, "--eps");
  } else if (args.dist == "worstcase") {
    dist.kind = DistributionKind::kWorstCase;
    dist.worst = parse_worstcase_kind(args.profile_kind);
    if (!args.a.empty()) dist.worst_params.offset = rational_arg(args.a, "--a");
    if (!args.k.empty()) dist.worst_params.cluster_size = count_arg(args.k, "--k");
    if (!args.eps.empty()) dist.worst_params.spread = rational_arg(args.eps, "--eps");
  } else if (args.dist == "file") {
    if (args.profiles.empty()) throw UsageError("--profiles is required with --dist file");
    dist = file_distribution(args.profiles);
    if (dist.agent_count != n) throw UsageError("profile length does not match the mechanism");
  } else {
    throw UsageError("unknown --dist '" + args.dist + "'");
  }
  return dist;
}

RatioOptions ratio_options(const BenchArgs& args) {
  RatioOptions options;
  if (!args.mc_trials.empty()) options.expectation.trials = count_arg(args.mc_trials, "--mc-trials");
  if (!args.threshold.empty()) {
    options.expectation.enumeration_threshold = count_arg(args.threshold, "--threshold");
  }
  return options;
}

std::string stem(const std::string& path) { return std::filesystem::path(path).stem().string(); }

int finish_csv(const std::string& text, const BenchArgs& args, std::ostream& out) {
  out << text;
  if (!args.csv.empty()) write_text(args.csv, text);
  return kExitOk;
}

int cmd_bench(const std::string& which, const BenchArgs& args, std::ostream& out,
              const CliHooks& hooks) {
  if (which == "lemma1") {
    const EpsMedianReport r = lemma1_experiment(
        required_count(args.n, "--n"), rational_arg(args.eps.empty() ? "1/10" : args.eps, "--eps"),
        rational_arg(args.delta.empty() ? "1/20" : args.delta, "--delta"),
        required_count(args.trials, "--trials"), seed_arg(args.seed));
    return finish_csv(eps_median_csv({r}), args, out);
  }
  if (which == "moulin") {
    if (args.schemes.empty()) throw UsageError("at least one --scheme p:file is required");
    std::vector<WeightedScheme> mixture;
    for (const auto& spec : args.schemes) {
      const auto colon = spec.find(':');
      if (colon == std::string::npos) throw UsageError("--scheme expects p:file, got '" + spec + "'");
      const Mechanism m = load_mechanism(spec.substr(colon + 1));
      const auto* scheme = std::get_if<MoulinScheme>(&m);
      if (!scheme) throw UsageError(spec.substr(colon + 1) + " is not a moulin scheme");
      mixture.push_back({rational_arg(spec.substr(0, colon), "--scheme"), *scheme});
    }
    const RatioReport r =
        moulin_mixture_ratio(mixture, rational_arg(args.eps.empty() ? "1/10" : args.eps, "--eps"));
    return finish_csv(ratio_csv({r}), args, out);
  }

  if (args.file.empty()) throw UsageError("a mechanism file is required");
  const Mechanism mech = load_mechanism(args.file);
  if (which == "oracle") {
    const Verdict oracle = brute_force_truthfulness_oracle(mech, rational_arg(args.step, "--step"),
                                                           rational_arg(args.max, "--max"));
    if (oracle.truthful()) {
      out << "oracle: no manipulation on the grid\n";
    } else {
      out << "oracle: manipulation found\n" << format_witness(*oracle.witness);
    }
    if (const auto* tree = std::get_if<DecisionTree>(&mech)) {
      VerifierOptions options;
      const VerificationReport report = hooks.verify_tree(*tree, options);
      out << "verifier: " << (report.verdict.truthful() ? "truthful" : "non-truthful") << "\n";
      if (!oracle.truthful() && report.verdict.truthful()) {
        throw InvariantError("grid oracle found a manipulation the verifier missed");
      }
    }
    return oracle.truthful() ? kExitOk : kExitNonTruthful;
  }

  const Objective objective = parse_objective(args.objective);
  const std::uint64_t seed = seed_arg(args.seed);
  if (which == "ratio") {
    const RatioReport r =
        estimate_ratio(mech, stem(args.file), ratio_distribution(args, agent_count(mech)), objective,
                       required_count(args.trials, "--trials"), seed, ratio_options(args));
    return finish_csv(ratio_csv({r}), args, out);
  }
  if (which == "worstcase") {
    const RatioReport r =
        worst_case_search(mech, stem(args.file), objective, agent_count(mech),
                          required_count(args.budget, "--budget"), seed, ratio_options(args));
    return finish_csv(ratio_csv({r}), args, out);
  }
  throw UsageError("unknown bench subcommand '" + which + "'");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            const CliHooks& hooks) {
  CLI::App app{"Decision-tree facility-location mechanisms: verify, evaluate, generate, bench",
               "mechtree"};
  app.require_subcommand(1);

  VerifyArgs verify;
  auto* verify_cmd = app.add_subcommand("verify", "Decide (universal) truthfulness");
  verify_cmd->add_option("file", verify.file, "Mechanism file (.mech)")->required();
  verify_cmd->add_flag("--exhaustive", verify.exhaustive, "Collect every witness");
  verify_cmd->add_flag("--sequential", verify.sequential, "Single worker; first witness in order");
  verify_cmd->add_flag("--shifted", verify.shifted, "Re-run with translated variables");
  verify_cmd->add_option("--report", verify.report, "Write the verdict report to a file");
  verify_cmd->add_option("--threads", verify.threads, "Worker count (0 = auto)");

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a mechanism on a profile");
  eval_cmd->add_option("file", eval_args.file, "Mechanism file (.mech)")->required();
  eval_cmd->add_option("profile", eval_args.profile, "Profile file (.prof)")->required();
  eval_cmd->add_option("--seed", eval_args.seed, "Seed for sampling");
  eval_cmd->add_option("--trials", eval_args.trials, "Monte-Carlo trials");
  eval_cmd->add_option("--threshold", eval_args.threshold, "Largest support enumerated exactly");
  eval_cmd->add_option("--expect", eval_args.expect, "Expected objective: sc or mc");

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a mechanism file");
  gen_cmd->add_option("--kind", gen.kind,
                      "dictator | average | median_k | median_first_k | random_dictator | "
                      "sampled_median | tampered_dictator | moulin_median")
      ->required();
  gen_cmd->add_option("--n", gen.n, "Agent count");
  gen_cmd->add_option("--i", gen.i, "Dictator agent");
  gen_cmd->add_option("--k", gen.k, "Median size");
  gen_cmd->add_option("--t", gen.t, "Sample size");
  gen_cmd->add_option("--leaves", gen.leaves, "Leaf count");
  gen_cmd->add_flag("--untampered", gen.untampered, "Keep every leaf a dictator leaf");
  gen_cmd->add_option("--max-median", gen.max_median, "Largest materialized median tree");
  gen_cmd->add_option("--max-leaves", gen.max_leaves, "Leaf cap");
  gen_cmd->add_option("-o,--output", gen.output, "Output file (default stdout)");

  ProfileArgs prof;
  auto* prof_cmd = app.add_subcommand("profile", "Generate an adversarial profile");
  prof_cmd->add_option("--kind", prof.kind, "outlier | cluster")->required();
  prof_cmd->add_option("--n", prof.n, "Agent count");
  prof_cmd->add_option("--a", prof.a, "Offset for outlier profiles");
  prof_cmd->add_option("--k", prof.k, "Cluster size");
  prof_cmd->add_option("--eps", prof.eps, "Cluster spread");
  prof_cmd->add_option("-o,--output", prof.output, "Output file (default stdout)");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Benchmarks and oracles");
  bench_cmd->require_subcommand(1);
  auto add_common = [&](CLI::App* c) {
    c->add_option("--seed", bench.seed, "Seed");
    c->add_option("--csv", bench.csv, "Also write the CSV here");
  };
  auto* ratio_cmd = bench_cmd->add_subcommand("ratio", "Approximation ratio over a distribution");
  ratio_cmd->add_option("file", bench.file, "Mechanism file")->required();
  ratio_cmd->add_option("--objective", bench.objective, "sc or mc");
  ratio_cmd->add_option("--trials", bench.trials, "Profiles drawn");
  ratio_cmd->add_option("--dist", bench.dist, "uniform | two_cluster | worstcase | file");
  ratio_cmd->add_option("--lo", bench.lo, "Uniform box lower end");
  ratio_cmd->add_option("--hi", bench.hi, "Uniform box upper end");
  ratio_cmd->add_option("--k", bench.k, "Cluster size");
  ratio_cmd->add_option("--eps", bench.eps, "Cluster spread");
  ratio_cmd->add_option("--profile-kind", bench.profile_kind, "outlier | cluster");
  ratio_cmd->add_option("--a", bench.a, "Outlier offset");
  ratio_cmd->add_option("--profiles", bench.profiles, "Profile file for --dist file");
  ratio_cmd->add_option("--mc-trials", bench.mc_trials, "Monte-Carlo trials per profile");
  ratio_cmd->add_option("--threshold", bench.threshold, "Largest support enumerated exactly");
  add_common(ratio_cmd);
  auto* worst_cmd = bench_cmd->add_subcommand("worstcase", "Hill-climbing worst-case search");
  worst_cmd->add_option("file", bench.file, "Mechanism file")->required();
  worst_cmd->add_option("--objective", bench.objective, "sc or mc");
  worst_cmd->add_option("--budget", bench.budget, "Profiles evaluated");
  worst_cmd->add_option("--mc-trials", bench.mc_trials, "Monte-Carlo trials per profile");
  add_common(worst_cmd);
  auto* lemma_cmd = bench_cmd->add_subcommand("lemma1", "Sample-median eps-median frequency");
  lemma_cmd->add_option("--n", bench.n, "Set size");
  lemma_cmd->add_option("--eps", bench.eps, "eps (default 1/10)");
  lemma_cmd->add_option("--delta", bench.delta, "delta (default 1/20)");
  lemma_cmd->add_option("--trials", bench.trials, "Repetitions");
  add_common(lemma_cmd);
  auto* oracle_cmd = bench_cmd->add_subcommand("oracle", "Grid brute-force truthfulness check");
  oracle_cmd->add_option("file", bench.file, "Mechanism file")->required();
  oracle_cmd->add_option("--step", bench.step, "Grid step (default 1/2)");
  oracle_cmd->add_option("--max", bench.max, "Grid maximum (default 2)");
  auto* moulin_cmd = bench_cmd->add_subcommand("moulin", "Max-cost ratio of a scheme mixture");
  moulin_cmd->add_option("--scheme", bench.schemes, "p:file, repeatable");
  moulin_cmd->add_option("--eps", bench.eps, "eps (default 1/10)");
  add_common(moulin_cmd);

  std::vector<std::string> storage{"mechtree"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());

  try {
    try {
      app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out, err);
      return code == 0 ? kExitOk : kExitUsageError;
    }
    if (verify_cmd->parsed()) return cmd_verify(verify, out, hooks);
    if (eval_cmd->parsed()) return cmd_eval(eval_args, out);
    if (gen_cmd->parsed()) return cmd_gen(gen, out);
    if (prof_cmd->parsed()) return cmd_profile(prof, out);
    for (auto* sub : {ratio_cmd, worst_cmd, lemma_cmd, oracle_cmd, moulin_cmd}) {
      if (sub->parsed()) return cmd_bench(sub->get_name(), bench, out, hooks);
    }
    throw UsageError("no subcommand given");
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    for (const auto& v : e.violations()) err << "  " << v << "\n";
    return kExitInputError;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsageError;
  } catch (const InvariantError& e) {
    err << "invariant failure: " << e.what() << "\n";
    return kExitInternalError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternalError;
  }
}

}  // namespace mechtree
