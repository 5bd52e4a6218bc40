#include "logdyn/cli.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "logdyn/attractor.hpp"
#include "logdyn/error.hpp"
#include "logdyn/ltrj.hpp"
#include "logdyn/mechanics.hpp"
#include "logdyn/report.hpp"
#include "logdyn/steering.hpp"
#include "logdyn/toy_model.hpp"

namespace logdyn::cli {
namespace {

std::string read_file(const path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot open '" + p.string() + "' for writing");
  out << text;
  if (!out) fail(ErrorKind::Io, "write to '" + p.string() + "' failed");
}

template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
  }
  return 1;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void print_steer(std::ostream& out, const SteerResult& r) {
  out << "p_initial " << format_real(r.p_initial) << "\n";
  for (std::size_t k = 0; k < r.path.size(); ++k)
    out << "step " << k + 1 << " p_target " << format_real(r.path[k].p_target) << " alpha "
        << format_real(r.path[k].step_length) << "\n";
  out << "steps_taken " << r.steps_taken << "\n"
      << "p_final " << format_real(r.p_final) << "\n"
      << "converged " << (r.converged ? "true" : "false") << "\n"
      << "displacement " << format_real(r.total_displacement) << "\n";
}

}  // namespace

int cmd_gen(const GenOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    toy::ModelConfig cfg = toy::load_config(opts.config);
    if (opts.seed) cfg.seed = *opts.seed;
    const std::string text = read_file(opts.prompt);
    if (text.empty()) fail(ErrorKind::InvalidArgument, "prompt file '" + opts.prompt.string() + "' is empty");
    const toy::Model model = toy::init_model(cfg);
    const Trajectory traj = toy::generate_greedy(model, toy::encode_bytes(text), opts.steps);
    save_trajectory(traj, opts.out);
    out << "T " << traj.steps() << "\n";
    if (traj.steps() >= 2) {
      const Series s = trajectory_mechanics(traj);
      const MechanicsSummary sum = summarize(std::span<const Series>(&s, 1));
      out << "mean_H " << format_real(sum.mean_logE) << "\n"
          << "global_cv " << format_real(sum.global_cv) << "\n";
    }
    return 0;
  });
}

int cmd_analyze(const AnalyzeOptions& opts, std::ostream& out, std::ostream& err) {
  if (opts.trajectories.empty()) {
    err << "usage: logdyn analyze <trajectory.ltrj>... [--per-step FILE] [--summary FILE] "
           "[--step-cv FILE]\n";
    return 2;
  }
  return guarded(err, [&] {
    std::vector<Trajectory> trajs;
    std::vector<Series> series;
    for (const auto& p : opts.trajectories) {
      trajs.push_back(load_trajectory(p));
      try {
        series.push_back(trajectory_mechanics(trajs.back()));
      } catch (const Error& e) {
        throw Error(e.kind(), p.string() + ": " + e.what());
      }
    }
    const Analysis a = analyze(trajs);
    const std::string summary = emit_report(a.summary, std::nullopt, ReportFormat::SummaryJson);
    if (opts.summary)
      write_file(*opts.summary, summary);
    else
      out << summary;
    if (opts.per_step) {
      // One block per input file, in argument order; t restarts at 1.
      std::string csv = "t,K,V,L,H,E\n";
      for (const auto& s : a.series) {
        const std::string block =
            emit_report(a.summary, std::span<const StepMechanics>(s), ReportFormat::PerStepCsv);
        csv += block.substr(block.find('\n') + 1);
      }
      write_file(*opts.per_step, csv);
    }
    if (opts.step_cv) write_file(*opts.step_cv, emit_step_index_csv(step_index_cv(a.series)));
    return 0;
  });
}

int cmd_steer(const SteerOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Trajectory traj = load_trajectory(opts.trajectory);
    if (!traj.head)
      fail(ErrorKind::InvalidArgument, opts.trajectory.string() + ": trajectory has no head; cannot steer");
    if (opts.target >= traj.head->vocab_size())
      fail(ErrorKind::InvalidArgument, "target " + std::to_string(opts.target) +
                                           " out of range for vocab " +
                                           std::to_string(traj.head->vocab_size()));
    if (opts.step >= traj.steps())
      fail(ErrorKind::InvalidArgument, "step " + std::to_string(opts.step) +
                                           " out of range for T = " + std::to_string(traj.steps()));
    SteerParams params;
    params.eta = opts.eta;
    params.max_steps = opts.max_steps;
    try {
      if (opts.continue_steps == 0) {
        print_steer(out, steer(*traj.head, to_vec(traj.state(opts.step)), opts.target, params));
        return 0;
      }
      const auto [cfg, prompt] = toy::parse_generator_notes(traj.notes);
      const toy::Model model = toy::init_model(cfg);
      const SteerContinuation res =
          steer_and_continue(model, traj, opts.step, opts.target, params, opts.continue_steps);
      print_steer(out, res.steer);
      out << "continuation";
      for (std::uint32_t id : res.continuation->token_ids) out << ' ' << id;
      out << "\n";
      if (opts.out) save_trajectory(*res.continuation, *opts.out);
      return 0;
    } catch (const SteeringStalled& e) {
      print_steer(out, e.partial());
      throw;
    }
  });
}

int cmd_probe(const ProbeOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Trajectory traj = load_trajectory(opts.trajectory);
    if (!traj.head)
      fail(ErrorKind::InvalidArgument, opts.trajectory.string() + ": trajectory has no head; cannot probe");
    const ProbeResult r = probe_trajectory(traj, opts.grid);
    out << "mean_unique " << format_real(r.mean_unique) << " +- " << format_real(r.std_unique)
        << " over " << r.per_pair_counts.size() << " pairs\n";
    if (opts.per_pair) {
      std::string csv = "pair,unique\n";
      for (std::size_t k = 0; k < r.per_pair_counts.size(); ++k)
        csv += std::to_string(k) + ',' + std::to_string(r.per_pair_counts[k]) + '\n';
      write_file(*opts.per_pair, csv);
    }
    return 0;
  });
}

int cmd_batch(const BatchOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    namespace fs = std::filesystem;
    if (!fs::is_directory(opts.dir))
      fail(ErrorKind::Io, "'" + opts.dir.string() + "' is not a directory");
    std::vector<path> files;
    for (const auto& entry : fs::directory_iterator(opts.dir))
      if (entry.is_regular_file() && entry.path().extension() == ".ltrj")
        files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty())
      fail(ErrorKind::InvalidArgument, "no .ltrj files in '" + opts.dir.string() + "'");

    std::vector<Trajectory> trajs(files.size());
    std::vector<Series> series(files.size());
    std::vector<std::string> errors(files.size());
    const auto n = static_cast<std::int64_t>(files.size());
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < n; ++i) {
      try {
        trajs[i] = load_trajectory(files[i]);
        series[i] = trajectory_mechanics(trajs[i]);
      } catch (const std::exception& e) {
        errors[i] = files[i].string() + ": " + e.what();
      }
    }
    for (const auto& e : errors)
      if (!e.empty()) fail(ErrorKind::InvalidArgument, e);

    // model_id -> indices in file-name order
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < files.size(); ++i) groups[trajs[i].model_id].push_back(i);

    const char* kColumns[] = {"global_cv", "avg_traj_cv", "mean_logE", "kv_ratio",
                              "mean_drift", "mean_abs_jump", "drift_ratio", "mean_entropy"};
    std::string csv = "model_id,n_trajectories,n_steps";
    for (const char* c : kColumns) csv += std::string(",") + c;
    csv += '\n';

    std::vector<std::vector<double>> columns(std::size(kColumns));
    for (const auto& [model_id, idx] : groups) {
      const std::size_t dim = trajs[idx.front()].dim;
      for (std::size_t i : idx)
        if (trajs[i].dim != dim)
          fail(ErrorKind::DimensionMismatch, "model '" + model_id + "' mixes hidden dims (" +
                                                 files[i].string() + " has d=" +
                                                 std::to_string(trajs[i].dim) + ", expected " +
                                                 std::to_string(dim) + ")");
      std::vector<Trajectory> group;
      for (std::size_t i : idx) group.push_back(trajs[i]);
      const MechanicsSummary s = analyze(group).summary;
      const double vals[] = {s.global_cv, s.avg_traj_cv, s.mean_logE, s.kv_ratio,
                             s.mean_drift, s.mean_abs_jump, s.drift_ratio};
      csv += model_id + ',' + std::to_string(s.n_trajectories) + ',' + std::to_string(s.n_steps);
      for (std::size_t c = 0; c < std::size(vals); ++c) {
        csv += ',' + format_real(vals[c]);
        columns[c].push_back(vals[c]);
      }
      csv += ',';
      if (s.mean_entropy) {
        csv += format_real(*s.mean_entropy);
        columns.back().push_back(*s.mean_entropy);
      }
      csv += '\n';
    }
    csv += "Median (all),,";
    for (const auto& col : columns) {
      csv += ',';
      if (!col.empty()) csv += format_real(median(col));
    }
    csv += '\n';
    write_file(opts.summary, csv);
    out << "models " << groups.size() << " trajectories " << files.size() << "\n";
    return 0;
  });
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Log-Lagrangian mechanics of transformer hidden-state trajectories", "logdyn"};
  app.require_subcommand(1);

  GenOptions gen;
  std::uint64_t seed = 0;
  auto* g = app.add_subcommand("gen", "Generate a greedy trajectory with the toy transformer");
  g->add_option("--config", gen.config, "Model config (JSON)")->required();
  auto* seed_opt = g->add_option("--seed", seed, "Override the config seed");
  g->add_option("--prompt", gen.prompt, "Prompt text file (raw bytes)")->required();
  g->add_option("--steps", gen.steps, "Tokens to generate")->required();
  g->add_option("--out", gen.out, "Output LTRJ file")->required();

  AnalyzeOptions an;
  std::string per_step, summary, step_cv;
  auto* a = app.add_subcommand("analyze", "Per-step mechanics and conservation summary");
  a->add_option("trajectories", an.trajectories, "LTRJ files");
  auto* per_step_opt = a->add_option("--per-step", per_step, "Per-step CSV output");
  auto* summary_opt = a->add_option("--summary", summary, "Summary JSON output (default: stdout)");
  auto* step_cv_opt = a->add_option("--step-cv", step_cv, "Per-step-index CV CSV output");

  SteerOptions st;
  std::string steer_out;
  auto* s = app.add_subcommand("steer", "Minimal-action Jacobian steering of one hidden state");
  s->add_option("trajectory", st.trajectory, "LTRJ file with head")->required();
  s->add_option("--step", st.step, "Step index to steer")->required();
  s->add_option("--target", st.target, "Target token id")->required();
  s->add_option("--eta", st.eta, "Target probability threshold")->capture_default_str();
  s->add_option("--max-steps", st.max_steps, "Maximum steering iterations")->capture_default_str();
  s->add_option("--continue", st.continue_steps, "Greedy tokens to regenerate after steering")
      ->capture_default_str();
  auto* steer_out_opt = s->add_option("--out", steer_out, "Write the continuation trajectory");

  ProbeOptions pr;
  std::string per_pair;
  auto* p = app.add_subcommand("probe", "Neighboring-attractor interpolation probe");
  p->add_option("trajectory", pr.trajectory, "LTRJ file with head")->required();
  p->add_option("--grid", pr.grid, "Interpolation grid points")->capture_default_str();
  auto* per_pair_opt = p->add_option("--per-pair", per_pair, "Per-pair counts CSV output");

  BatchOptions ba;
  auto* b = app.add_subcommand("batch", "Per-model summary table over a directory of LTRJ files");
  b->add_option("dir", ba.dir, "Directory of .ltrj files")->required();
  b->add_option("--summary", ba.summary, "Summary CSV output")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  if (g->parsed()) {
    if (*seed_opt) gen.seed = seed;
    return cmd_gen(gen, out, err);
  }
  if (a->parsed()) {
    if (*per_step_opt) an.per_step = per_step;
    if (*summary_opt) an.summary = summary;
    if (*step_cv_opt) an.step_cv = step_cv;
    return cmd_analyze(an, out, err);
  }
  if (s->parsed()) {
    if (*steer_out_opt) st.out = steer_out;
    return cmd_steer(st, out, err);
  }
  if (p->parsed()) {
    if (*per_pair_opt) pr.per_pair = per_pair;
    return cmd_probe(pr, out, err);
  }
  return cmd_batch(ba, out, err);
}

}  // namespace logdyn::cli
