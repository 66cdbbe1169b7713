// finita command-line front end.
//
// Distributions and mappings travel as JSON on stdin/stdout unless --input
// or --out name a file. Every run emits a manifest: next to --out as
// <out>.manifest.json, at --manifest, or on stderr.

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "finita/branch_bound.hpp"
#include "finita/coding.hpp"
#include "finita/constrained.hpp"
#include "finita/exact_recovery.hpp"
#include "finita/generators.hpp"
#include "finita/io.hpp"
#include "finita/parallel.hpp"
#include "finita/plr.hpp"
#include "finita/qary.hpp"

using namespace finita;
using nlohmann::json;

namespace {

struct Common {
  std::string input = "-";
  std::string out = "-";
  std::string manifest;
  std::uint64_t seed = 1;
  bool renormalize = false;
};

struct Run {
  json result;
  json stats = json::object();
  std::vector<std::string> summary;
};

std::string fmt(double x) {
  std::ostringstream s;
  s.precision(10);
  s << x;
  return s.str();
}

JointDistribution load(const Common& c) {
  if (c.input == "-") return read_distribution(std::cin, c.renormalize);
  return read_distribution(std::filesystem::path(c.input), c.renormalize);
}

void emit(const std::string& path, const std::string& body) {
  if (path == "-" || path.empty()) {
    std::cout << body;
    std::cout.flush();
  } else {
    write_file_atomic(path, body);
  }
}

void write_csv(const std::string& path, const std::string& header, const std::vector<std::vector<double>>& rows) {
  std::ostringstream s;
  s.precision(17);
  s << header << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) s << (i ? "," : "") << row[i];
    s << '\n';
  }
  write_file_atomic(path, s.str());
}

// Before/after figures every solver reports.
void report(Run& run, const JointDistribution& before, const JointDistribution& after) {
  const double h = entropy(before.probs());
  const double m0 = sum_marginal_entropies(before);
  const double m1 = sum_marginal_entropies(after);
  run.result["report"] = {{"joint_entropy", h},
                          {"sum_marginals_initial", m0},
                          {"sum_marginals_final", m1},
                          {"total_correlation_before", m0 - h},
                          {"total_correlation_after", m1 - h}};
  run.summary.push_back("joint entropy        " + fmt(h));
  run.summary.push_back("sum marginals before " + fmt(m0));
  run.summary.push_back("sum marginals after  " + fmt(m1));
  run.summary.push_back("total correlation    " + fmt(m0 - h) + " -> " + fmt(m1 - h));
}

void put_mapping(Run& run, const JointDistribution& joint, const WordMapping& m) {
  run.result["mapping"] = to_json(m, joint.n(), joint.q());
}

json parameters_of(const CLI::App* sub) {
  json p = json::object();
  for (const CLI::Option* opt : sub->get_options()) {
    if (opt->get_name() == "--help" || opt->get_name() == "-h") continue;
    const auto& results = opt->results();
    std::string key = opt->get_name();
    while (!key.empty() && key.front() == '-') key.erase(key.begin());
    if (results.empty()) {
      p[key] = opt->get_default_str();
    } else if (results.size() == 1) {
      p[key] = results.front();
    } else {
      p[key] = results;
    }
  }
  return p;
}

void add_common(CLI::App* sub, Common& c, bool input, bool seed) {
  if (input) {
    sub->add_option("--input,-i", c.input, "distribution JSON, - for stdin")->capture_default_str();
    sub->add_flag("--renormalize", c.renormalize, "rescale input probabilities to sum to one");
  }
  sub->add_option("--out,-o", c.out, "output path, - for stdout")->capture_default_str();
  sub->add_option("--manifest", c.manifest, "manifest path (default <out>.manifest.json or stderr)");
  if (seed) sub->add_option("--seed", c.seed, "random seed")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Minimum-redundancy decompositions of finite-alphabet distributions", "finita"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (default FINITA_THREADS or 1)")->check(CLI::PositiveNumber);
  app.set_version_flag("--version", FINITA_VERSION);

  Common c;

  // gen
  CLI::App* gen = app.add_subcommand("gen", "generate a distribution or samples");
  gen->require_subcommand(1);
  struct {
    double s = 1.4;
    int bits = 0;
    int q = 0;
    std::size_t samples = 0;
  } zipf_opts;
  CLI::App* g_zipf = gen->add_subcommand("zipf", "Zipf law over 2^bits binary words or q symbols");
  g_zipf->add_option("--s", zipf_opts.s, "exponent")->capture_default_str();
  auto* bits_opt = g_zipf->add_option("--bits", zipf_opts.bits, "binary word length")->check(CLI::Range(1, 30));
  g_zipf->add_option("--q", zipf_opts.q, "single q-ary symbol")->check(CLI::Range(2, 1 << 24))->excludes(bits_opt);
  g_zipf->add_option("--samples", zipf_opts.samples, "draw this many samples instead (needs --bits and --out)");
  add_common(g_zipf, c, false, true);

  MarkovSpec markov;
  CLI::App* g_markov = gen->add_subcommand("markov", "stationary symmetric binary Markov chain");
  g_markov->add_option("--n", markov.n, "positions")->required()->check(CLI::Range(1, 28));
  g_markov->add_option("--flip", markov.flip, "transition probability")->capture_default_str();
  add_common(g_markov, c, false, false);

  struct {
    int n = 0;
    int r = 1;
    std::vector<double> block;
  } biid;
  CLI::App* g_biid = gen->add_subcommand("block-iid", "independent copies of one block distribution");
  g_biid->add_option("--n", biid.n, "components")->required()->check(CLI::Range(1, 28));
  g_biid->add_option("--r", biid.r, "block length")->capture_default_str()->check(CLI::Range(1, 20));
  g_biid->add_option("--block", biid.block, "2^r block probabilities (default: random from --seed)");
  add_common(g_biid, c, false, true);

  int sp_n = 0;
  CLI::App* g_sp = gen->add_subcommand("scrambled-product", "independent bits behind a random word permutation");
  g_sp->add_option("--n", sp_n, "components")->required()->check(CLI::Range(1, 24));
  add_common(g_sp, c, false, true);

  // solve
  CLI::App* solve = app.add_subcommand("solve", "search for a low-redundancy word mapping");
  solve->require_subcommand(1);
  CLI::App* s_prod = solve->add_subcommand("exact-product", "recover the parameters of a scrambled product");
  double prod_tol = 1e-9;
  s_prod->add_option("--tol", prod_tol, "reconstruction tolerance")->capture_default_str();
  add_common(s_prod, c, true, false);

  BranchBoundOptions bb;
  bool bb_no_prune = false;
  bool bb_no_symmetry = false;
  CLI::App* s_bb = solve->add_subcommand("bb", "exact binary search tree");
  s_bb->add_option("--max-nodes", bb.max_nodes, "node budget")->capture_default_str();
  s_bb->add_option("--max-n", bb.max_n, "largest accepted n")->capture_default_str();
  s_bb->add_flag("--no-prune", bb_no_prune, "disable bound pruning");
  s_bb->add_flag("--no-symmetry", bb_no_symmetry, "disable bit-symmetry pruning");
  add_common(s_bb, c, true, false);

  int plr_k = 8;
  bool plr_matrix = false;
  std::string schedule = "nested";
  std::string plr_curve;
  CLI::App* s_plr = solve->add_subcommand("plr", "piecewise-linear relaxation (binary)");
  s_plr->add_option("--k", plr_k, "tangent count")->capture_default_str()->check(CLI::Range(1, 4096));
  s_plr->add_flag("--matrix-form", plr_matrix, "evaluate every placement as one matrix-vector product");
  s_plr->add_option("--schedule", schedule, "tangent points")->capture_default_str()->check(
      CLI::IsMember({"nested", "midpoint"}));
  s_plr->add_option("--emit-curve", plr_curve, "CSV of k, ub_value, true_objective, joint_entropy for 1..k");
  add_common(s_plr, c, true, false);

  int qk = 8;
  std::size_t inits = 1000;
  bool exhaustive = false;
  std::uint64_t max_assign = QaryOptions{}.max_assignments;
  std::string q_trace;
  CLI::App* s_q = solve->add_subcommand("qary", "relaxation over alphabets of size q");
  s_q->add_option("--k", qk, "regions")->capture_default_str()->check(CLI::Range(1, 4096));
  s_q->add_option("--inits", inits, "descent initializations")->capture_default_str();
  s_q->add_flag("--exhaustive", exhaustive, "enumerate every cell assignment");
  s_q->add_option("--max-assignments", max_assign, "exhaustive work cap")->capture_default_str();
  s_q->add_option("--schedule", schedule, "tangent points")->capture_default_str()->check(
      CLI::IsMember({"nested", "midpoint"}));
  s_q->add_option("--emit-trace", q_trace, "descent CSV of init_index, steps, final_value");
  add_common(s_q, c, true, true);

  ImmuneConfig immune;
  bool use_immune = false;
  std::string history_csv;
  CLI::App* s_c = solve->add_subcommand("constrained", "linear GF(2) maps with bounded row weight");
  s_c->add_option("--r", immune.r, "row weight bound")->capture_default_str();
  s_c->add_flag("--immune", use_immune, "clonal search instead of the banded enumeration");
  s_c->add_option("--pop", immune.population, "population")->capture_default_str();
  s_c->add_option("--gens", immune.generations, "generations")->capture_default_str();
  s_c->add_option("--clones", immune.clones, "clones per parent")->capture_default_str();
  s_c->add_option("--beta", immune.beta, "mutation scale")->capture_default_str();
  s_c->add_option("--fresh", immune.fresh, "random newcomers per generation")->capture_default_str();
  s_c->add_option("--emit-history", history_csv, "CSV of generation, best_value");
  add_common(s_c, c, true, true);

  // app
  CLI::App* apps = app.add_subcommand("app", "experiments");
  apps->require_subcommand(1);
  struct {
    int q = 4;
    double s = 1.6;
    int k = 8;
    std::size_t inits = 100;
    std::string method = "exhaustive";
  } bss;
  CLI::App* a_bss = apps->add_subcommand("bss", "separate a modular sum of two Zipf sources");
  a_bss->add_option("--q", bss.q, "alphabet")->capture_default_str()->check(CLI::Range(2, 64));
  a_bss->add_option("--s", bss.s, "Zipf exponent")->capture_default_str();
  a_bss->add_option("--k", bss.k, "regions")->capture_default_str();
  a_bss->add_option("--inits", bss.inits, "descent initializations")->capture_default_str();
  a_bss->add_option("--method", bss.method, "solver")->capture_default_str()->check(
      CLI::IsMember({"exhaustive", "descent"}));
  add_common(a_bss, c, false, true);

  struct {
    std::string samples;
    Algorithm2Options opts;
    std::size_t naive = 0;
    std::string trace;
  } bc;
  CLI::App* a_bc = apps->add_subcommand("block-coding", "iterative block-wise relabeling of samples");
  a_bc->add_option("--samples", bc.samples, "sample file")->required();
  a_bc->add_option("--blocks", bc.opts.B, "blocks")->capture_default_str();
  a_bc->add_option("--iters", bc.opts.iterations, "iterations")->capture_default_str();
  a_bc->add_option("--k", bc.opts.k, "tangent count")->capture_default_str();
  a_bc->add_option("--naive-trials", bc.naive, "also run a naive partition search");
  a_bc->add_option("--emit-trace", bc.trace, "CSV of iter, H_m, H_b, accepted");
  add_common(a_bc, c, false, true);

  std::string freqs_path;
  int cb_k = 8;
  CLI::App* a_cb = apps->add_subcommand("codebook", "relabel a 256-symbol frequency table");
  a_cb->add_option("--freqs", freqs_path, "JSON array or whitespace list of 256 frequencies")->required();
  a_cb->add_option("--k", cb_k, "tangent count")->capture_default_str();
  add_common(a_cb, c, false, false);

  // verify
  CLI::App* verify = app.add_subcommand("verify", "check counting identities and bounds");
  verify->require_subcommand(1);
  int v_max = 10;
  CLI::App* v_counts = verify->add_subcommand("counts", "banded matrices, Markov and block-iid unique counts");
  v_counts->add_option("--max-n", v_max, "largest n")->capture_default_str()->check(CLI::Range(2, 16));
  add_common(v_counts, c, false, false);
  int vb_k = 8;
  CLI::App* v_bounds = verify->add_subcommand("bounds", "tangent envelope against the binary entropy");
  v_bounds->add_option("--k", vb_k, "tangent count")->capture_default_str()->check(CLI::Range(1, 4096));
  v_bounds->add_option("--schedule", schedule, "tangent points")->capture_default_str()->check(
      CLI::IsMember({"nested", "midpoint"}));
  add_common(v_bounds, c, false, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (threads > 0) set_thread_count(threads);
  const TangentSchedule sched = schedule == "midpoint" ? TangentSchedule::Midpoint : TangentSchedule::Nested;

  const CLI::App* group = app.get_subcommands().front();
  const CLI::App* leaf = group->get_subcommands().front();
  const auto t0 = std::chrono::steady_clock::now();
  Run run;

  try {
    if (leaf == g_zipf) {
      if (zipf_opts.samples > 0) {
        if (zipf_opts.bits == 0 || c.out == "-") throw CLI::ValidationError("--samples", "needs --bits and --out");
        const SampleSet s = sample_zipf(zipf_opts.samples, zipf_opts.s, zipf_opts.bits, c.seed);
        write_samples(c.out, s);
        run.stats["empirical_entropy"] = empirical_entropy(s);
        run.summary.push_back("wrote " + std::to_string(s.N) + " samples");
      } else {
        if ((zipf_opts.bits == 0) == (zipf_opts.q == 0)) throw CLI::ValidationError("zipf", "give one of --bits or --q");
        const int q = zipf_opts.bits > 0 ? 1 << zipf_opts.bits : zipf_opts.q;
        const Eigen::VectorXd p = zipf(q, zipf_opts.s);
        run.result = zipf_opts.bits > 0 ? to_json(JointDistribution(zipf_opts.bits, 2, p)) : to_json(JointDistribution(1, q, p));
      }
    } else if (leaf == g_markov) {
      run.result = to_json(markov_joint(markov));
    } else if (leaf == g_biid) {
      Eigen::VectorXd block;
      if (biid.block.empty()) {
        block = random_joint(biid.r, 2, c.seed).probs();
      } else {
        block = Eigen::Map<const Eigen::VectorXd>(biid.block.data(), static_cast<Eigen::Index>(biid.block.size()));
      }
      run.result = to_json(block_iid_joint(biid.n, biid.r, block));
    } else if (leaf == g_sp) {
      const ScrambledProduct s = random_product_scrambled(sp_n, c.seed);
      run.result = to_json(s.joint);
      run.result["pi"] = std::vector<double>(s.pi.data(), s.pi.data() + s.pi.size());
    } else if (leaf == s_prod) {
      const JointDistribution j = load(c);
      const RecoveryResult r = recover_product_params(j, prod_tol);
      put_mapping(run, j, r.mapping);
      const Eigen::VectorXd pi = r.params.zero_probs();
      run.result["pi"] = std::vector<double>(pi.data(), pi.data() + pi.size());
      run.result["residual"] = r.residual;
      run.stats["comparisons"] = r.comparisons;
      report(run, j, apply_mapping(j, r.mapping));
    } else if (leaf == s_bb) {
      const JointDistribution j = load(c);
      bb.prune = !bb_no_prune;
      bb.symmetry = !bb_no_symmetry;
      const BranchBoundResult r = solve_exact(j, bb);
      put_mapping(run, j, r.mapping);
      run.result["value"] = r.value;
      run.result["optimal"] = r.optimal;
      run.stats = {{"nodes_expanded", r.stats.nodes_expanded},
                   {"pruned", r.stats.pruned},
                   {"symmetric_skipped", r.stats.symmetric_skipped},
                   {"leaves", r.stats.leaves}};
      run.result["stats"] = run.stats;
      report(run, j, apply_mapping(j, r.mapping));
    } else if (leaf == s_plr) {
      const JointDistribution j = load(c);
      PlrOptions opts;
      opts.schedule = sched;
      opts.matrix_form = plr_matrix;
      const PlrResult r = solve_plr(j, plr_k, opts);
      put_mapping(run, j, r.best_true_mapping);
      run.result["ub_value"] = r.ub_value;
      run.result["ub_true_objective"] = r.true_objective;
      run.result["value"] = r.best_true_objective;
      run.result["placement"] = r.placement.counts;
      run.stats = {{"placements", r.placements}, {"feasible_placements", r.feasible_placements_visited}};
      if (!plr_curve.empty()) {
        std::vector<std::vector<double>> rows;
        const double h = entropy(j.probs());
        for (int k = 1; k <= plr_k; ++k) {
          const PlrResult rk = solve_plr(j, k, opts);
          rows.push_back({static_cast<double>(k), rk.ub_value, rk.true_objective, h});
        }
        write_csv(plr_curve, "k,ub_value,true_objective,joint_entropy", rows);
      }
      report(run, j, apply_mapping(j, r.best_true_mapping));
    } else if (leaf == s_q) {
      const JointDistribution j = load(c);
      QaryOptions opts;
      opts.schedule = sched;
      opts.max_assignments = max_assign;
      if (exhaustive) {
        const QaryResult r = solve_exhaustive_qary(j, qk, opts);
        put_mapping(run, j, r.best_true_mapping);
        run.result["ub_value"] = r.ub_value;
        run.result["value"] = r.best_true_objective;
        run.stats = {{"assignments", r.assignments}, {"feasible_assignments", r.feasible_assignments}};
        report(run, j, apply_mapping(j, r.best_true_mapping));
      } else {
        const DescentResult r = objective_descent(j, qk, inits, c.seed, opts);
        put_mapping(run, j, r.mapping);
        run.result["surrogate_value"] = r.value;
        run.result["value"] = r.true_objective;
        std::size_t feasible = 0;
        std::vector<std::vector<double>> rows;
        for (const DescentTrace& t : r.trace) {
          feasible += t.feasible ? 1 : 0;
          rows.push_back({static_cast<double>(t.init_index), static_cast<double>(t.steps), t.final_value});
        }
        run.stats = {{"inits", r.trace.size()}, {"feasible_walks", feasible}};
        if (!q_trace.empty()) write_csv(q_trace, "init_index,steps,final_value", rows);
        report(run, j, apply_mapping(j, r.mapping));
      }
    } else if (leaf == s_c) {
      const JointDistribution j = load(c);
      Gf2Matrix m = Gf2Matrix::identity(1);
      if (use_immune) {
        immune.seed = c.seed;
        const ImmuneResult r = immune_search(j, immune);
        m = r.matrix;
        run.result["value"] = r.value;
        if (!history_csv.empty()) {
          std::vector<std::vector<double>> rows;
          for (std::size_t g = 0; g < r.history.size(); ++g) rows.push_back({static_cast<double>(g + 1), r.history[g]});
          write_csv(history_csv, "generation,best_value", rows);
        }
        run.stats["generations"] = r.history.size();
      } else {
        if (immune.r != 2) throw Error(Errc::InvalidArgument, "the exhaustive linear search covers r = 2; use --immune");
        const LinearResult r = search_r2(j);
        m = r.matrix;
        run.result["value"] = r.value;
      }
      run.result["matrix"] = m.rows();
      put_mapping(run, j, linear_mapping(m));
      report(run, j, apply_linear_map(j, m));
    } else if (leaf == a_bss) {
      const QarySolver method = bss.method == "descent" ? QarySolver::Descent : QarySolver::Exhaustive;
      const BssReport r = bss_experiment(bss.q, bss.s, method, bss.k, bss.inits, c.seed);
      run.result = {{"q", bss.q},
                    {"s", bss.s},
                    {"method", bss.method},
                    {"joint_entropy", r.joint_entropy},
                    {"sum_marginals_input", r.sum_marginals_input},
                    {"sum_marginals_found", r.sum_marginals_found},
                    {"gap", r.gap},
                    {"mapping", to_json(r.mapping, 2, bss.q)}};
      run.summary.push_back("joint entropy        " + fmt(r.joint_entropy));
      run.summary.push_back("sum marginals before " + fmt(r.sum_marginals_input));
      run.summary.push_back("sum marginals after  " + fmt(r.sum_marginals_found));
      run.summary.push_back("gap                  " + fmt(r.gap));
    } else if (leaf == a_bc) {
      const SampleSet s = read_samples(bc.samples);
      bc.opts.seed = c.seed;
      const Algorithm2Trace t = algorithm2(s, bc.opts);
      const CodingCostModel model{s.N, s.q, s.n, s.n / bc.opts.B, bc.opts.B};
      const TotalCost best = best_total_cost(t, model);
      double min_hb = t.steps.front().H_b;
      for (const auto& st : t.steps) min_hb = std::min(min_hb, st.H_b);
      const SingleBlockCost single = single_block_cost(s);
      run.result = {{"N", s.N},
                    {"n", s.n},
                    {"B", bc.opts.B},
                    {"H_whole", t.H_whole},
                    {"H_m_final", t.steps.back().H_m},
                    {"H_b_min", min_hb},
                    {"single_block_cost", single.bits},
                    {"single_block_regime_warning", single.regime_warning},
                    {"best_total_cost", best.bits},
                    {"best_I0", best.I0}};
      if (bc.naive > 0) {
        const NaiveSearchResult naive = naive_block_search(s, bc.opts.B, bc.naive, c.seed);
        run.result["naive_best"] = naive.best;
      }
      if (!bc.trace.empty()) {
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < t.steps.size(); ++i) {
          rows.push_back({static_cast<double>(i), t.steps[i].H_m, t.steps[i].H_b, t.steps[i].accepted ? 1.0 : 0.0});
        }
        write_csv(bc.trace, "iter,H_m,H_b,accepted", rows);
      }
      run.summary.push_back("empirical entropy    " + fmt(t.H_whole));
      run.summary.push_back("sum marginals before " + fmt(t.steps.front().H_m));
      run.summary.push_back("sum marginals after  " + fmt(t.steps.back().H_m));
      run.summary.push_back("min block entropy    " + fmt(min_hb));
      run.summary.push_back("best total cost      " + fmt(best.bits) + " at I0 = " + std::to_string(best.I0));
    } else if (leaf == a_cb) {
      std::ifstream in(freqs_path);
      if (!in) throw Error(Errc::Io, "cannot open " + freqs_path);
      std::vector<double> freqs;
      if (in.peek() == '[') {
        try {
          freqs = json::parse(in).get<std::vector<double>>();
        } catch (const json::exception& e) {
          throw Error(Errc::Io, std::string("malformed frequency table: ") + e.what());
        }
      } else {
        double f = 0.0;
        while (in >> f) freqs.push_back(f);
        if (!in.eof()) throw Error(Errc::Io, "malformed frequency table " + freqs_path);
      }
      const CodebookReport r = codebook(freqs, cb_k);
      run.result = {{"joint_entropy", r.joint_entropy},
                    {"sum_marginals_input", r.sum_marginals_input},
                    {"sum_marginals_output", r.sum_marginals_output},
                    {"mapping", to_json(r.mapping, 8, 2)}};
      run.summary.push_back("joint entropy        " + fmt(r.joint_entropy));
      run.summary.push_back("sum marginals before " + fmt(r.sum_marginals_input));
      run.summary.push_back("sum marginals after  " + fmt(r.sum_marginals_output));
    } else if (leaf == v_counts) {
      json rows = json::array();
      bool ok = true;
      for (int n = 2; n <= v_max; ++n) {
        const std::size_t banded = enumerate_banded_invertible(n).size();
        const std::size_t banded_expect = (std::size_t{1} << (n + 1)) - 2;
        const std::size_t markov_count = count_unique_probs(markov_joint({n, 0.2}));
        const std::size_t markov_bound = static_cast<std::size_t>(n * (n - 1) + 2);
        const std::size_t iid = count_unique_probs(block_iid_joint(n, 1, Eigen::Vector2d(0.3, 0.7)));
        ok = ok && banded == banded_expect && markov_count <= markov_bound && iid == static_cast<std::size_t>(n + 1);
        rows.push_back({{"n", n},
                        {"banded_invertible", banded},
                        {"banded_formula", banded_expect},
                        {"markov_unique", markov_count},
                        {"markov_bound", markov_bound},
                        {"iid_unique", iid}});
        run.summary.push_back("n=" + std::to_string(n) + " banded " + std::to_string(banded) + "/" +
                              std::to_string(banded_expect) + " markov " + std::to_string(markov_count) + " (bound " +
                              std::to_string(markov_bound) + ")");
      }
      run.result = {{"rows", rows}, {"consistent", ok}};
      if (!ok) {
        emit(c.out, run.result.dump(2) + "\n");
        throw Error(Errc::InvalidArgument, "a counting identity failed");
      }
    } else if (leaf == v_bounds) {
      const PiecewiseLinearBound b = build_tangent_bound(vb_k, sched);
      double gap = 0.0;
      double violation = 0.0;
      for (int i = 0; i <= 100000; ++i) {
        const double x = 0.5 * i / 100000;
        const double d = b(x) - binary_entropy(x);
        gap = std::max(gap, d);
        violation = std::min(violation, d);
      }
      double tangency = 0.0;
      for (const LinearPiece& p : b.pieces()) tangency = std::max(tangency, std::abs(p(p.tangent) - binary_entropy(p.tangent)));
      run.result = {{"k", vb_k}, {"max_gap", gap}, {"min_gap", violation}, {"tangency_error", tangency}};
      run.summary.push_back("max gap " + fmt(gap) + ", min gap " + fmt(violation) + ", tangency error " + fmt(tangency));
    }

    const bool file_output = leaf != g_zipf || zipf_opts.samples == 0;
    if (file_output) emit(c.out, run.result.dump(2) + "\n");
    for (const std::string& line : run.summary) std::cerr << line << '\n';

    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const json manifest = {{"subcommand", group->get_name() + " " + leaf->get_name()},
                           {"parameters", parameters_of(leaf)},
                           {"seed", c.seed},
                           {"input", c.input},
                           {"output", c.out},
                           {"threads", thread_count()},
                           {"version", FINITA_VERSION},
                           {"wall_clock_s", wall},
                           {"stats", run.stats}};
    if (!c.manifest.empty()) {
      write_file_atomic(c.manifest, manifest.dump(2) + "\n");
    } else if (c.out != "-") {
      write_file_atomic(c.out + ".manifest.json", manifest.dump(2) + "\n");
    } else {
      std::cerr << manifest.dump() << '\n';
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << '\n' << leaf->help();
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
