// bifactor: robust PCA and matrix completion by bilinear factor matrix norm
// minimization. Subcommands: rpca, complete, inpaint, phase, table3, rankest.
#include "bifactor/bench.hpp"
#include "bifactor/completion.hpp"
#include "bifactor/pnm.hpp"
#include "bifactor/rank.hpp"
#include "bifactor/rng.hpp"
#include "bifactor/solvers.hpp"
#include "bifactor/synthetic.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace bifactor;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Observation mask encoded as a 0/1 matrix file.
ObservationMask load_mask_file(const std::string& path, Index rows,
                               Index cols) {
  const LoadedMatrix lm = load_matrix(path);
  if (lm.values.rows() != rows || lm.values.cols() != cols)
    throw std::runtime_error("mask file shape does not match input matrix");
  std::vector<Index> observed;
  const double* ptr = lm.values.data();
  for (Index idx = 0; idx < lm.values.size(); ++idx) {
    if (!lm.mask.observed(idx / cols, idx % cols)) continue;  // nan -> drop
    if (ptr[idx] == 1.0) {
      observed.push_back(idx);
    } else if (ptr[idx] != 0.0) {
      throw std::runtime_error("mask file entries must be 0 or 1");
    }
  }
  return ObservationMask(rows, cols, std::move(observed));
}

// Intersection of two masks over the same shape.
ObservationMask intersect(const ObservationMask& a, const ObservationMask& b) {
  std::vector<Index> out;
  for (Index idx : a.linear())
    if (b.observed(idx / a.cols(), idx % a.cols())) out.push_back(idx);
  return ObservationMask(a.rows(), a.cols(), std::move(out));
}

void write_trace_csv(const std::string& path, const std::string& method,
                     Index m, Index n, const SolverReport& rep) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trace file: " + path);
  out << "rng,method,m,n,d,lambda,mu0,rho,mu_max,epsilon,max_iters,"
         "iter,mu,objective,residual,stop_metric,yu_norm,yv_norm\n";
  const SolverOptions& o = rep.opts;
  for (int k = 0; k < rep.iterations; ++k) {
    out << RngStream::kIdentity << ',' << method << ',' << m << ',' << n << ','
        << o.d << ',' << fmt(o.lambda) << ',' << fmt(o.mu0) << ','
        << fmt(o.rho) << ',' << fmt(o.mu_max) << ',' << fmt(o.epsilon) << ','
        << o.max_iters << ',' << k + 1 << ',' << fmt(rep.mu_trace[k]) << ','
        << fmt(rep.objective_trace[k]) << ',' << fmt(rep.residual_trace[k])
        << ',' << fmt(rep.stop_metric_trace[k]) << ','
        << (k < static_cast<int>(rep.yu_norm_trace.size())
                ? fmt(rep.yu_norm_trace[k])
                : "")
        << ','
        << (k < static_cast<int>(rep.yv_norm_trace.size())
                ? fmt(rep.yv_norm_trace[k])
                : "")
        << '\n';
  }
}

// "start:stop:step" (stop included when it lands on the grid) or a comma
// separated list.
std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    double start = 0, stop = 0, step = 0;
    char c1 = 0, c2 = 0;
    std::istringstream in(text);
    if (!(in >> start >> c1 >> stop >> c2 >> step) || c1 != ':' || c2 != ':' ||
        step <= 0 || stop < start)
      throw std::runtime_error("bad range '" + text + "' (want start:stop:step)");
    for (double v = start; v <= stop + 1e-9 * std::max(1.0, std::abs(stop));
         v += step)
      out.push_back(v);
    return out;
  }
  std::istringstream in(text);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    if (tok.empty()) continue;
    out.push_back(std::stod(tok));
  }
  if (out.empty()) throw std::runtime_error("empty grid '" + text + "'");
  return out;
}

struct CommonTail {
  std::string input, mask_path, out_l, out_s, trace;
  Index rank = 0;
  bool estimate = false;
  double lambda = 0.0;
  double epsilon = 0.0;
  int max_iters = 0;
};

void add_tail(CLI::App* cmd, CommonTail& t, bool mask_required) {
  cmd->add_option("--input", t.input, "matrix file (nan = unobserved)")
      ->required();
  auto* mask = cmd->add_option("--mask", t.mask_path, "0/1 mask matrix file");
  if (mask_required) mask->required();
  auto* rank = cmd->add_option("--rank", t.rank, "factorization rank d");
  cmd->add_flag("--estimate-rank", t.estimate,
                "estimate d from the observed data (default when --rank "
                "is absent)")
      ->excludes(rank);
  cmd->add_option("--lambda", t.lambda, "regularization weight");
  cmd->add_option("--epsilon", t.epsilon, "stopping tolerance");
  cmd->add_option("--max-iters", t.max_iters, "iteration cap");
  cmd->add_option("--out-l", t.out_l, "output file for L")->required();
  cmd->add_option("--out-s", t.out_s, "output file for S");
  cmd->add_option("--trace", t.trace, "per-iteration trace CSV");
}

SolverOptions tail_options(const CommonTail& t, const DenseMatrix& d,
                           const ObservationMask& mask) {
  SolverOptions opts;
  if (t.rank > 0) {
    opts.d = t.rank;
  } else {
    opts.d = estimate_rank(d, mask).rank;
  }
  if (t.lambda > 0.0) opts.lambda = t.lambda;
  if (t.epsilon > 0.0) opts.epsilon = t.epsilon;
  if (t.max_iters > 0) opts.max_iters = t.max_iters;
  return opts;
}

int run(int argc, char** argv) {
  CLI::App app{"bilinear factor matrix norm minimization for robust PCA "
               "and matrix completion"};
  app.require_subcommand(1);

  // --- rpca ---------------------------------------------------------------
  auto* rpca = app.add_subcommand("rpca", "low-rank + sparse decomposition");
  std::string rpca_method;
  CommonTail rpca_tail;
  rpca->add_option("--method", rpca_method, "sl-half | sl-two-thirds | nuclear")
      ->required()
      ->check(CLI::IsMember({"sl-half", "sl-two-thirds", "nuclear"}));
  add_tail(rpca, rpca_tail, false);
  rpca->callback([&] {
    const LoadedMatrix lm = load_matrix(rpca_tail.input);
    ObservationMask mask = lm.mask;
    if (!rpca_tail.mask_path.empty())
      mask = intersect(load_mask_file(rpca_tail.mask_path, lm.values.rows(),
                                      lm.values.cols()),
                       mask);
    const DenseMatrix d = project(mask, lm.values);
    const SolverOptions opts = tail_options(rpca_tail, d, mask);
    const SolverReport rep =
        solve_rpca(rpca_method_from_string(rpca_method), d, mask, opts);
    write_matrix(rpca_tail.out_l, rep.L);
    if (!rpca_tail.out_s.empty()) write_matrix(rpca_tail.out_s, rep.S);
    if (!rpca_tail.trace.empty())
      write_trace_csv(rpca_tail.trace, rpca_method, d.rows(), d.cols(), rep);
    std::cout << "method=" << rpca_method << " d=" << rep.opts.d
              << " iterations=" << rep.iterations << " termination="
              << (rep.termination == Termination::Converged ? "converged"
                                                            : "max-iters")
              << "\n";
  });

  // --- complete -----------------------------------------------------------
  auto* comp = app.add_subcommand("complete", "matrix completion");
  std::string comp_method;
  CommonTail comp_tail;
  comp->add_option("--method", comp_method, "dn | fn")
      ->required()
      ->check(CLI::IsMember({"dn", "fn"}));
  add_tail(comp, comp_tail, true);
  comp->callback([&] {
    const LoadedMatrix lm = load_matrix(comp_tail.input);
    ObservationMask mask = intersect(
        load_mask_file(comp_tail.mask_path, lm.values.rows(), lm.values.cols()),
        lm.mask);
    const DenseMatrix d = project(mask, lm.values);
    SolverOptions opts = tail_options(comp_tail, d, mask);
    const SolverReport rep =
        complete(completion_method_from_string(comp_method), d, mask, opts);
    write_matrix(comp_tail.out_l, rep.L);
    if (!comp_tail.out_s.empty()) write_matrix(comp_tail.out_s, rep.S);
    if (!comp_tail.trace.empty())
      write_trace_csv(comp_tail.trace, comp_method, d.rows(), d.cols(), rep);
    std::cout << "method=" << comp_method << " d=" << rep.opts.d
              << " iterations=" << rep.iterations << " termination="
              << (rep.termination == Termination::Converged ? "converged"
                                                            : "max-iters")
              << "\n";
  });

  // --- inpaint ------------------------------------------------------------
  auto* inp = app.add_subcommand("inpaint", "drop pixels and recover an image");
  std::string inp_method, inp_image, inp_out, inp_report;
  double inp_missing = 0.0;
  std::uint64_t inp_seed = 0;
  Index inp_rank = 9;
  double inp_lambda = 0.0, inp_epsilon = 1e-4;
  int inp_max_iters = 500;
  inp->add_option("--method", inp_method, "dn | fn")
      ->required()
      ->check(CLI::IsMember({"dn", "fn"}));
  inp->add_option("--image", inp_image, "input image (P2/P3/P5/P6)")
      ->required();
  inp->add_option("--missing-ratio", inp_missing, "fraction of pixels dropped")
      ->required()
      ->check(CLI::Range(0.0, 0.999));
  inp->add_option("--seed", inp_seed, "rng seed")->required();
  inp->add_option("--out", inp_out, "recovered image file")->required();
  inp->add_option("--report", inp_report, "per-channel PSNR report CSV");
  inp->add_option("--rank", inp_rank, "factorization rank d (default 9)");
  inp->add_option("--lambda", inp_lambda, "regularization weight");
  inp->add_option("--epsilon", inp_epsilon, "stopping tolerance");
  inp->add_option("--max-iters", inp_max_iters, "iteration cap");
  inp->callback([&] {
    const PortableImage original = read_pnm(inp_image);
    // One pixel mask shared by all channels.
    RngStream rng(inp_seed);
    const std::size_t total = static_cast<std::size_t>(original.width) *
                              static_cast<std::size_t>(original.height);
    const std::size_t missing =
        static_cast<std::size_t>(std::llround(inp_missing * total));
    std::vector<Index> all(total);
    for (std::size_t t = 0; t < total; ++t) all[t] = static_cast<Index>(t);
    for (std::size_t t = 0; t + missing < total; ++t) {
      const std::size_t j =
          t + static_cast<std::size_t>(rng.below(total - t));
      std::swap(all[t], all[j]);
    }
    all.resize(total - missing);
    ObservationMask mask(original.height, original.width, std::move(all));

    PortableImage recovered = original;
    const CompletionMethod method = completion_method_from_string(inp_method);
    std::ofstream report;
    if (!inp_report.empty()) {
      report.open(inp_report);
      if (!report)
        throw std::runtime_error("cannot write report: " + inp_report);
      report << "rng,method,image,width,height,channels,missing_ratio,seed,"
                "d,lambda,epsilon,max_iters,channel,iterations,termination,"
                "psnr_zero_fill,psnr_recovered\n";
    }
    double mse_rec = 0.0, mse_zero = 0.0;
    for (int c = 0; c < original.channels; ++c) {
      const DenseMatrix truth = channel_to_matrix(original, c);
      const DenseMatrix observed = project(mask, truth);
      SolverOptions opts;
      opts.d = inp_rank;
      if (inp_lambda > 0.0) opts.lambda = inp_lambda;
      opts.epsilon = inp_epsilon;
      opts.max_iters = inp_max_iters;
      const SolverReport rep = complete(method, observed, mask, opts);
      DenseMatrix rounded = rep.L.unaryExpr([](double v) {
        return std::min(255.0, std::max(0.0, std::round(v)));
      });
      matrix_to_channel(rounded, recovered, c);
      mse_rec += (rounded - truth).squaredNorm();
      mse_zero += (observed - truth).squaredNorm();
      if (report.is_open()) {
        report << RngStream::kIdentity << ',' << inp_method << ','
               << csv_field(inp_image) << ',' << original.width << ','
               << original.height << ',' << original.channels << ','
               << fmt(inp_missing) << ',' << inp_seed << ',' << rep.opts.d
               << ',' << fmt(rep.opts.lambda) << ',' << fmt(rep.opts.epsilon)
               << ',' << rep.opts.max_iters << ',' << c << ','
               << rep.iterations << ','
               << (rep.termination == Termination::Converged ? "converged"
                                                             : "max-iters")
               << ',' << fmt(psnr(observed, truth)) << ','
               << fmt(psnr(rounded, truth)) << '\n';
      }
    }
    write_pnm(inp_out, recovered);
    const double denom = static_cast<double>(total) * original.channels;
    const double psnr_rec = 10.0 * std::log10(255.0 * 255.0 /
                                              std::max(mse_rec / denom, 1e-300));
    const double psnr_zero = 10.0 * std::log10(
                                 255.0 * 255.0 /
                                 std::max(mse_zero / denom, 1e-300));
    std::cout << "psnr_zero_fill=" << fmt(psnr_zero)
              << " psnr_recovered=" << fmt(psnr_rec) << "\n";
  });

  // --- phase --------------------------------------------------------------
  auto* phase = app.add_subcommand("phase", "phase-transition success grid");
  std::string ph_method, ph_ranks = "5:50:5", ph_corr = "0:0.35:0.05", ph_out;
  Index ph_size = 200;
  int ph_trials = 10, ph_jobs = 0;
  std::uint64_t ph_seed = 0;
  phase->add_option("--method", ph_method, "sl-half | sl-two-thirds | nuclear")
      ->required()
      ->check(CLI::IsMember({"sl-half", "sl-two-thirds", "nuclear"}));
  phase->add_option("--size", ph_size, "square matrix size")->required();
  phase->add_option("--ranks", ph_ranks, "rank grid start:stop:step");
  phase->add_option("--corruptions", ph_corr, "corruption grid start:stop:step");
  phase->add_option("--trials", ph_trials, "trials per cell")->required();
  phase->add_option("--seed", ph_seed, "rng seed")->required();
  phase->add_option("--out", ph_out, "output CSV")->required();
  phase->add_option("--jobs", ph_jobs,
                    "parallel trials (default: BIFACTOR_JOBS or cores)");
  phase->callback([&] {
    std::vector<Index> ranks;
    for (double v : parse_grid(ph_ranks))
      ranks.push_back(static_cast<Index>(std::llround(v)));
    const PhaseGrid grid =
        phase_transition(rpca_method_from_string(ph_method), ranks,
                         parse_grid(ph_corr), ph_size, ph_trials, ph_seed,
                         ph_jobs);
    std::ofstream out(ph_out);
    if (!out) throw std::runtime_error("cannot write " + ph_out);
    write_phase_csv(out, grid);
    std::cout << "wrote " << ph_out << " (" << grid.ratios.size()
              << " cells)\n";
  });

  // --- table3 -------------------------------------------------------------
  auto* t3 = app.add_subcommand(
      "table3", "average RSE / F-measure on corrupted matrices");
  std::string t3_sizes = "200,500", t3_out;
  int t3_trials = 10, t3_jobs = 0;
  std::uint64_t t3_seed = 0;
  t3->add_option("--sizes", t3_sizes, "comma separated sizes");
  t3->add_option("--trials", t3_trials, "independent runs per size");
  t3->add_option("--seed", t3_seed, "rng seed")->required();
  t3->add_option("--out", t3_out, "output CSV")->required();
  t3->add_option("--jobs", t3_jobs,
                 "parallel trials (default: BIFACTOR_JOBS or cores)");
  t3->callback([&] {
    std::vector<Index> sizes;
    for (double v : parse_grid(t3_sizes))
      sizes.push_back(static_cast<Index>(std::llround(v)));
    const auto rows = table3_experiment(sizes, t3_trials, t3_seed, t3_jobs);
    std::ofstream out(t3_out);
    if (!out) throw std::runtime_error("cannot write " + t3_out);
    write_table3_csv(out, rows);
    for (const Table3Row& row : rows)
      std::cout << row.size << " " << to_string(row.method)
                << " rse=" << fmt(row.rse_mean) << " fm=" << fmt(row.fm_mean)
                << " seconds=" << fmt(row.seconds) << "\n";
  });

  // --- rankest ------------------------------------------------------------
  auto* rk = app.add_subcommand("rankest", "estimate the factorization rank");
  std::string rk_input, rk_mask;
  Index rk_k = 0;
  rk->add_option("--input", rk_input, "matrix file (nan = unobserved)")
      ->required();
  rk->add_option("--mask", rk_mask, "0/1 mask matrix file");
  rk->add_option("--k", rk_k, "number of leading singular values");
  rk->callback([&] {
    const LoadedMatrix lm = load_matrix(rk_input);
    ObservationMask mask = lm.mask;
    if (!rk_mask.empty())
      mask = intersect(load_mask_file(rk_mask, lm.values.rows(),
                                      lm.values.cols()),
                       mask);
    const RankEstimate est =
        estimate_rank(project(mask, lm.values), mask, rk_k);
    std::cout << est.rank << "\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
