#include "expcs/cli.hpp"

#include <cstdint>
#include <ostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "expcs/channel.hpp"
#include "expcs/error.hpp"
#include "expcs/experiment.hpp"
#include "expcs/expander.hpp"
#include "expcs/io.hpp"
#include "expcs/recon.hpp"
#include "expcs/suite.hpp"
#include "expcs/tv.hpp"

namespace expcs {

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kFailed = 2;

struct GenArgs {
  std::size_t n = 0, m = 0, d = 0, k = 1;
  double epsilon = 0.25;
  std::uint64_t seed = 0;
  std::string out;
};

struct VerifyArgs {
  std::string graph, mode = "exact", out;
  std::size_t k = 1;
  double epsilon = 0.25;
  std::uint64_t budget = 1'000'000, seed = 0;
};

struct CoverArgs {
  std::string graph, out;
};

struct SenseArgs {
  std::string graph, signal, out;
  std::uint64_t seed = 0;
};

struct RecoverArgs {
  std::string graph, y, lambda = "auto", penalty = "l1:1", out;
  std::size_t k = 0, max_iters = 2000;
  double tol = 1e-8;
};

struct BoundsArgs {
  bool suite = false, quick = false;
  std::uint64_t seed = 1;
};

struct TvArgs {
  std::string image;
  bool isotropic = false;
};

struct ExperimentArgs {
  std::string config, out_dir;
};

int do_gen(const GenArgs& a, std::ostream&) {
  const ExpanderParams p{a.n, a.m, a.d, a.epsilon, a.k};
  p.validate();
  save_graph(a.out, generate_graph(p, a.seed));
  return kOk;
}

int do_verify(const VerifyArgs& a, std::ostream& out) {
  const auto g = load_graph(a.graph);
  const auto cert = verify_expansion(g, a.k, a.epsilon, verify_mode_from_string(a.mode),
                                     a.budget, a.seed);
  const auto text = certificate_json(cert);
  if (!a.out.empty()) write_file(a.out, text + "\n");
  out << text << '\n';
  return cert.pass ? kOk : kFailed;
}

int do_cover(const CoverArgs& a, std::ostream& out) {
  const auto g = load_graph(a.graph);
  const auto c = cover_set(g);
  nlohmann::ordered_json j;
  j["size"] = c.indices.size();
  j["indices"] = c.indices;
  const auto text = j.dump();
  if (!a.out.empty()) write_file(a.out, text + "\n");
  out << text << '\n';
  return kOk;
}

int do_sense(const SenseArgs& a, std::ostream&) {
  const SensingMatrix phi(load_graph(a.graph));
  const auto x = load_vector(a.signal);
  save_counts(a.out, sample_poisson(phi.apply(x), a.seed));
  return kOk;
}

int do_recover(const RecoverArgs& a, std::ostream&, std::ostream& err) {
  const SensingMatrix phi(load_graph(a.graph));
  const auto y = load_counts(a.y);
  if (y.size() != phi.m()) {
    throw DimensionError("measurement has " + std::to_string(y.size()) + " entries, graph has m=" +
                         std::to_string(phi.m()));
  }
  ReconConfig cfg;
  if (a.lambda == "auto") {
    cfg.lambda = default_lambda(a.k, phi.n());
  } else {
    std::size_t used = 0;
    try {
      cfg.lambda = std::stod(a.lambda, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != a.lambda.size()) throw ParameterError("--lambda expects 'auto' or a number");
  }
  if (!lambda_in_regime(cfg.lambda, a.k, phi.n())) {
    err << "warning: lambda=" << format_double(cfg.lambda)
        << " is outside the small-shift regime lambda k ln n < 0.1\n";
  }
  cfg.penalty = parse_penalty(a.penalty);
  cfg.max_iters = a.max_iters;
  cfg.tol = a.tol;
  const auto result = solve_map(phi, y, cfg, cover_set(phi.graph()));
  save_result(a.out, result);
  return kOk;
}

int do_bounds(const BoundsArgs& a, std::ostream& out, std::ostream& err) {
  if (!a.suite) {
    err << "bounds: --suite is required\n";
    return kUsage;
  }
  SuiteOptions o;
  o.seed = a.seed;
  if (a.quick) {
    o.rip_vectors = 50;
    o.theorem1_triples = 50;
    o.lemma_instances = 50;
    o.mc_trials = 200;
    o.kraft_max_n = 6;
  }
  bool ok = true;
  for (const auto& f : run_bounds_suite(o)) {
    out << family_json(f) << '\n';
    ok = ok && f.pass();
  }
  return ok ? kOk : kFailed;
}

int do_tv(const TvArgs& a, std::ostream& out) {
  const auto img = load_image(a.image);
  out << format_double(tv_norm(img, a.isotropic ? TvVariant::isotropic : TvVariant::global_root))
      << '\n';
  return kOk;
}

int do_experiment(const ExperimentArgs& a, std::ostream& out) {
  auto cfg = ExperimentConfig::from_json(read_file(a.config));
  if (!a.out_dir.empty()) cfg.out_dir = a.out_dir;
  cfg.validate();
  const auto result = run_experiment(cfg);
  write_experiment(cfg.out_dir, cfg, result);
  out << summary_csv(result);
  return kOk;
}

}  // namespace

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Compressed sensing with expander graphs under Poisson noise", "expcs"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "generate a random left-regular graph (.exg)");
  gen_cmd->add_option("--n", gen.n, "left nodes")->required();
  gen_cmd->add_option("--m", gen.m, "right nodes")->required();
  gen_cmd->add_option("--d", gen.d, "left degree")->required();
  gen_cmd->add_option("--k", gen.k, "intended expansion order");
  gen_cmd->add_option("--epsilon", gen.epsilon, "intended expansion slack");
  gen_cmd->add_option("--seed", gen.seed, "RNG seed");
  gen_cmd->add_option("--out", gen.out, "output .exg file")->required();

  VerifyArgs ver;
  auto* ver_cmd = app.add_subcommand("verify", "certify (k, epsilon)-expansion");
  ver_cmd->add_option("--graph", ver.graph)->required();
  ver_cmd->add_option("--k", ver.k)->required();
  ver_cmd->add_option("--epsilon", ver.epsilon)->required();
  ver_cmd->add_option("--mode", ver.mode)->check(CLI::IsMember({"exact", "sampled"}));
  ver_cmd->add_option("--budget", ver.budget, "subset cap (exact) or samples per size (sampled)");
  ver_cmd->add_option("--seed", ver.seed);
  ver_cmd->add_option("--out", ver.out, "also write the certificate here");

  CoverArgs cov;
  auto* cov_cmd = app.add_subcommand("cover", "greedy cover set of the right nodes");
  cov_cmd->add_option("--graph", cov.graph)->required();
  cov_cmd->add_option("--out", cov.out);

  SenseArgs sen;
  auto* sen_cmd = app.add_subcommand("sense", "draw Poisson measurements of a signal");
  sen_cmd->add_option("--graph", sen.graph)->required();
  sen_cmd->add_option("--signal", sen.signal)->required();
  sen_cmd->add_option("--seed", sen.seed);
  sen_cmd->add_option("--out", sen.out)->required();

  RecoverArgs rec;
  auto* rec_cmd = app.add_subcommand("recover", "penalised MAP reconstruction");
  rec_cmd->add_option("--graph", rec.graph)->required();
  rec_cmd->add_option("--y", rec.y)->required();
  rec_cmd->add_option("--lambda", rec.lambda, "'auto' or a positive value");
  rec_cmd->add_option("--penalty", rec.penalty, "l1:<tau>");
  rec_cmd->add_option("--k", rec.k, "sparsity used by --lambda auto");
  rec_cmd->add_option("--max-iters", rec.max_iters);
  rec_cmd->add_option("--tol", rec.tol);
  rec_cmd->add_option("--out", rec.out, "output directory")->required();

  BoundsArgs bnd;
  auto* bnd_cmd = app.add_subcommand("bounds", "run the inequality battery");
  bnd_cmd->add_flag("--suite", bnd.suite, "run every family");
  bnd_cmd->add_flag("--quick", bnd.quick, "reduced trial counts");
  bnd_cmd->add_option("--seed", bnd.seed);

  TvArgs tv;
  auto* tv_cmd = app.add_subcommand("tvnorm", "total variation of an image");
  tv_cmd->add_option("--image", tv.image)->required();
  tv_cmd->add_flag("--isotropic", tv.isotropic, "sum of local gradient magnitudes");

  ExperimentArgs exp;
  auto* exp_cmd = app.add_subcommand("experiment", "sparsity/intensity sweep");
  exp_cmd->add_option("--config", exp.config)->required();
  exp_cmd->add_option("--out-dir", exp.out_dir, "overrides out_dir from the config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*gen_cmd) return do_gen(gen, out);
    if (*ver_cmd) return do_verify(ver, out);
    if (*cov_cmd) return do_cover(cov, out);
    if (*sen_cmd) return do_sense(sen, out);
    if (*rec_cmd) return do_recover(rec, out, err);
    if (*bnd_cmd) return do_bounds(bnd, out, err);
    if (*tv_cmd) return do_tv(tv, out);
    if (*exp_cmd) return do_experiment(exp, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace expcs
