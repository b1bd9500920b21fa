#include "qhmc/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "qhmc/potentials.hpp"

namespace qhmc {

namespace {

namespace fs = std::filesystem;

std::string fmt(double v, const char* spec = "%.17g") {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return std::string(buf);
}

// Table cells: nan ESS/efficiency print as "nan", undefined IAT as "N/A".
std::string fmt_or(double v, const char* spec, const char* marker) {
  return std::isnan(v) ? std::string(marker) : fmt(v, spec);
}

std::ofstream open_csv(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void write_series_csv(const fs::path& path, const std::string& header,
                      std::span<const double> values) {
  auto out = open_csv(path);
  out << "index," << header << "\n";
  for (std::size_t i = 0; i < values.size(); ++i)
    out << i << ',' << fmt(values[i]) << "\n";
}

void write_acf_csv(const fs::path& path, std::span<const double> acf) {
  auto out = open_csv(path);
  out << "lag,rho\n";
  for (std::size_t k = 0; k < acf.size(); ++k)
    out << k << ',' << fmt(acf[k]) << "\n";
}

void write_histogram_csv(const fs::path& path, std::span<const double> values,
                         std::size_t bins) {
  auto out = open_csv(path);
  out << "bin_center,density\n";
  if (values.empty()) return;
  const auto [mn_it, mx_it] = std::minmax_element(values.begin(), values.end());
  double lo = *mn_it, hi = *mx_it;
  if (!(hi > lo)) hi = lo + 1.0;
  const double w = (hi - lo) / static_cast<double>(bins);
  std::vector<std::size_t> counts(bins, 0);
  for (double v : values) {
    auto b = static_cast<std::size_t>((v - lo) / w);
    if (b >= bins) b = bins - 1;
    ++counts[b];
  }
  const double norm = 1.0 / (static_cast<double>(values.size()) * w);
  for (std::size_t b = 0; b < bins; ++b)
    out << fmt(lo + (static_cast<double>(b) + 0.5) * w) << ','
        << fmt(static_cast<double>(counts[b]) * norm) << "\n";
}

void write_metadata(const fs::path& dir, const ExperimentConfig& cfg,
                    const nlohmann::json& results) {
  nlohmann::json doc{{"config", config_to_json(cfg)}, {"results", results}};
  std::ofstream out(dir / "metadata.json");
  if (!out) throw std::runtime_error("cannot write metadata.json");
  out << doc.dump(2) << "\n";
}

fs::path prepare_dir(const ExperimentConfig& cfg) {
  fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  return dir;
}

SamplerConfig sampler_config(const ExperimentConfig& cfg, double q,
                             std::uint64_t seed) {
  SamplerConfig sc;
  sc.integrator.dt = cfg.dt;
  sc.integrator.steps = cfg.steps;
  sc.integrator.dp.q = q;
  sc.integrator.track_jacobian = cfg.track_jacobian;
  sc.n_samples = cfg.n_samples;
  sc.burn_in = cfg.burn_in;
  sc.seed = seed;
  sc.adapt = cfg.adapt;
  return sc;
}

SweepRun execute_sweep_run(const NamedPotential& pot, const ExperimentConfig& cfg,
                           double q, std::uint64_t seed) {
  const HamiltonianSpec H = hamiltonian_for(pot);
  const std::vector<double>& x0 = cfg.x0.empty() ? pot.default_x0 : cfg.x0;
  if (x0.size() != pot.dim)
    throw std::invalid_argument("x0 dimension does not match target '" + pot.name + "'");

  SweepRun run;
  run.q = q;
  run.seed = seed;
  run.chain = run_chain(x0, H, sampler_config(cfg, q, seed));
  run.report = summarize(run.chain, static_cast<std::size_t>(cfg.burn_in),
                         run.chain.wall_time_s, cfg.analyzed_coordinate);
  return run;
}

void write_sweep_outputs(const fs::path& dir, const ExperimentConfig& cfg,
                         const std::vector<SweepRun>& runs) {
  auto table = open_csv(dir / "sweep.csv");
  table << "q,time_s,accept_rate,ess,iat,ess_per_time\n";
  nlohmann::json per_q = nlohmann::json::array();
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const SweepRun& run = runs[i];
    const MixingReport& rep = run.report;
    table << fmt(run.q, "%.6g") << ',' << fmt(run.chain.wall_time_s, "%.4f") << ','
          << fmt(rep.accept_rate, "%.4f") << ',' << fmt_or(rep.ess, "%.2f", "nan")
          << ',' << fmt_or(rep.iat, "%.2f", "N/A") << ','
          << fmt_or(rep.ess_per_second, "%.2f", "nan") << "\n";

    std::ostringstream stem;
    stem << "q_" << i;
    const std::vector<double> coord = run.chain.coordinate(cfg.analyzed_coordinate);
    write_series_csv(dir / (stem.str() + "_trace.csv"), "value", coord);
    if (rep.valid) write_acf_csv(dir / (stem.str() + "_acf.csv"), rep.acf);
    const std::span<const double> post(coord.data() + cfg.burn_in,
                                       coord.size() - cfg.burn_in);
    write_histogram_csv(dir / (stem.str() + "_hist.csv"), post, 50);

    per_q.push_back({{"index", i},
                     {"q", run.q},
                     {"seed", run.seed},
                     {"accept_rate", rep.accept_rate},
                     {"ess", rep.valid ? nlohmann::json(rep.ess) : nlohmann::json()},
                     {"iat", rep.valid ? nlohmann::json(rep.iat) : nlohmann::json()},
                     {"time_s", run.chain.wall_time_s},
                     {"final_dt", run.chain.final_dt}});
  }
  write_metadata(dir, cfg, {{"per_q", per_q}});
}

double pearson(std::span<const double> a, std::span<const double> b) {
  const auto n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

double histogram_mode(std::span<const double> values, std::size_t bins) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  const auto [mn_it, mx_it] = std::minmax_element(values.begin(), values.end());
  double lo = *mn_it, hi = *mx_it;
  if (!(hi > lo)) return lo;
  const double w = (hi - lo) / static_cast<double>(bins);
  std::vector<std::size_t> counts(bins, 0);
  for (double v : values) {
    auto b = static_cast<std::size_t>((v - lo) / w);
    if (b >= bins) b = bins - 1;
    ++counts[b];
  }
  const auto best = static_cast<std::size_t>(
      std::max_element(counts.begin(), counts.end()) - counts.begin());
  return lo + (static_cast<double>(best) + 0.5) * w;
}

SweepResult run_sweep(const ExperimentConfig& cfg) {
  const NamedPotential pot = make_potential(cfg.target);
  ExperimentConfig resolved = cfg;
  if (resolved.q_values.empty()) resolved.q_values = default_q_grid(pot.dim);
  if (resolved.x0.empty()) resolved.x0 = pot.default_x0;

  SweepResult result;
  result.runs.resize(resolved.q_values.size());

  const int jobs = std::max(1, resolved.jobs);
  if (jobs == 1) {
    for (std::size_t i = 0; i < resolved.q_values.size(); ++i)
      result.runs[i] = execute_sweep_run(pot, resolved, resolved.q_values[i],
                                         resolved.seed ^ i);
  } else {
    std::vector<std::future<SweepRun>> futures;
    futures.reserve(resolved.q_values.size());
    for (std::size_t i = 0; i < resolved.q_values.size(); ++i)
      futures.push_back(std::async(std::launch::async, [&, i] {
        return execute_sweep_run(pot, resolved, resolved.q_values[i],
                                 resolved.seed ^ i);
      }));
    for (std::size_t i = 0; i < futures.size(); ++i) result.runs[i] = futures[i].get();
  }

  result.dir = prepare_dir(resolved);
  write_sweep_outputs(result.dir, resolved, result.runs);
  return result;
}

SweepResult run_single_chain(const ExperimentConfig& cfg) {
  const NamedPotential pot = make_potential(cfg.target);
  ExperimentConfig resolved = cfg;
  if (resolved.q_values.empty()) resolved.q_values = {1.0};
  resolved.q_values.resize(1);
  if (resolved.x0.empty()) resolved.x0 = pot.default_x0;

  SweepResult result;
  result.runs.push_back(
      execute_sweep_run(pot, resolved, resolved.q_values[0], resolved.seed));
  result.dir = prepare_dir(resolved);
  write_sweep_outputs(result.dir, resolved, result.runs);
  return result;
}

std::vector<ForceTableRow> force_table_rows(double x,
                                            std::span<const double> q_values) {
  const NamedPotential pot = octic();
  const std::vector<double> at{x};
  std::vector<ForceTableRow> rows;
  rows.reserve(q_values.size());
  for (double q : q_values) {
    DeformationParameter dp;
    dp.q = q;
    ForceTableRow row;
    row.q = q;
    row.reference_point = q == 1.0 ? std::numeric_limits<double>::quiet_NaN()
                                   : q * q * x;
    row.jackson_derivative = jackson_dx(pot.field, at, 0, dp);
    row.force_magnitude = std::abs(std::sqrt(q) * row.jackson_derivative);
    rows.push_back(row);
  }
  return rows;
}

std::vector<ForceTableRow> run_force_table(const ExperimentConfig& cfg) {
  std::vector<double> qs = cfg.q_values;
  if (qs.empty()) qs = {0.9, 1.0, 1.1};
  const auto rows = force_table_rows(cfg.force_x, qs);

  const fs::path dir = prepare_dir(cfg);
  auto out = open_csv(dir / "force_table.csv");
  out << "q,reference_point,jackson_derivative,force_magnitude\n";
  for (const auto& row : rows)
    out << fmt(row.q, "%.6g") << ',' << fmt_or(row.reference_point, "%.6g", "N/A")
        << ',' << fmt(row.jackson_derivative, "%.6g") << ','
        << fmt(row.force_magnitude, "%.6g") << "\n";
  write_metadata(dir, cfg, {{"rows", rows.size()}});
  return rows;
}

GravityResult run_gravity(const ExperimentConfig& cfg) {
  ExperimentConfig resolved = cfg;
  if (resolved.q_values.empty()) resolved.q_values = {0.9999, 1.0};

  GravityResult result;
  result.true_depth = resolved.gravity.true_depth;
  result.model = make_synthetic_gravity(
      resolved.gravity.true_depth, resolved.gravity.x_f, resolved.gravity.sensors,
      resolved.gravity.sigma, resolved.gravity.prior_mean,
      resolved.gravity.prior_std, resolved.gravity.data_seed);

  // The posterior is orders of magnitude narrower than the prior, so chains
  // start at the potential minimizer from a coarse deterministic scan; a tail
  // start would reject every proposal at these step settings.
  if (resolved.x0.empty()) {
    double best_h = 0.5, best_u = std::numeric_limits<double>::infinity();
    for (int i = 1; i < 1000; ++i) {
      const double h = static_cast<double>(i) / 1000.0;
      const double u = gravity_potential(h, result.model);
      if (u < best_u) {
        best_u = u;
        best_h = h;
      }
    }
    resolved.x0 = {best_h};
  }

  HamiltonianSpec H{.potential = gravity_potential_field(result.model),
                    .mass = {1.0},
                    .separable = true,
                    .kinetic = std::nullopt};

  result.dir = prepare_dir(resolved);

  // Replayable record of the synthetic observations.
  {
    nlohmann::json data_doc{{"true_depth", result.true_depth},
                            {"x_f", result.model.x_f},
                            {"sensors", result.model.sensors},
                            {"sigma", result.model.sigma},
                            {"data", result.model.data},
                            {"noise_seed", resolved.gravity.data_seed}};
    std::ofstream out(result.dir / "data.json");
    out << data_doc.dump(2) << "\n";
  }

  nlohmann::json per_q = nlohmann::json::array();
  for (std::size_t i = 0; i < resolved.q_values.size(); ++i) {
    const double q = resolved.q_values[i];
    GravityRun run;
    run.q = q;
    run.chain = run_chain(resolved.x0, H, sampler_config(resolved, q, resolved.seed ^ i));
    run.accept_rate = run.chain.accept_rate();

    const std::vector<double> full = run.chain.coordinate(0);
    const std::span<const double> post(full.data() + resolved.burn_in,
                                       full.size() - resolved.burn_in);
    double mean = 0.0;
    for (double v : post) mean += v;
    mean /= static_cast<double>(post.size());
    double var = 0.0;
    for (double v : post) var += (v - mean) * (v - mean);
    var /= static_cast<double>(post.size());
    run.post_mean = mean;
    run.post_std = std::sqrt(var);
    run.post_mode = histogram_mode(post, 50);

    std::ostringstream stem;
    stem << "q_" << i;
    write_series_csv(result.dir / (stem.str() + "_samples.csv"), "depth", full);
    write_histogram_csv(result.dir / (stem.str() + "_hist.csv"), post, 50);
    std::vector<double> potential_trace(full.size());
    for (std::size_t k = 0; k < full.size(); ++k)
      potential_trace[k] = gravity_potential(full[k], result.model);
    write_series_csv(result.dir / (stem.str() + "_potential.csv"), "potential",
                     potential_trace);

    per_q.push_back({{"index", i},
                     {"q", q},
                     {"accept_rate", run.accept_rate},
                     {"post_mean", run.post_mean},
                     {"post_std", run.post_std},
                     {"post_mode", run.post_mode},
                     {"time_s", run.chain.wall_time_s}});
    result.runs.push_back(std::move(run));
  }
  write_metadata(result.dir, resolved, {{"per_q", per_q}});
  return result;
}

DiffusionResult run_diffusion(const ExperimentConfig& cfg) {
  ExperimentConfig resolved = cfg;
  if (resolved.q_values.empty()) resolved.q_values = {0.9999};

  DiffusionResult result;
  result.q = resolved.q_values[0];
  result.problem = make_synthetic_diffusion(
      resolved.diffusion.grid_n, resolved.diffusion.n_modes,
      resolved.diffusion.smoothness, resolved.diffusion.n_obs,
      resolved.diffusion.sigma, resolved.diffusion.data_seed,
      [](double) { return 1.0; },
      [](double x) {
        return 0.15 * std::sin(2.0 * std::numbers::pi * x) +
               0.05 * std::sin(4.0 * std::numbers::pi * x);
      });
  const DiffusionModel& model = result.problem.model;

  const GradientTarget target = diffusion_target(model);
  const std::vector<double> theta0(model.kl.n_modes, 0.0);
  const std::vector<double>& x0 = resolved.x0.empty() ? theta0 : resolved.x0;

  result.chain = run_chain(x0, target, sampler_config(resolved, result.q, resolved.seed));
  result.accept_rate = result.chain.accept_rate();
  result.final_dt = result.chain.final_dt;

  const std::size_t n = result.chain.size();
  const auto burn = static_cast<std::size_t>(resolved.burn_in);
  std::size_t post_adapt_from = burn;
  if (resolved.adapt)
    post_adapt_from = std::min<std::size_t>(
        n, static_cast<std::size_t>(resolved.adapt->adapt_steps));
  std::size_t kept = 0, acc = 0;
  for (std::size_t i = post_adapt_from; i < n; ++i) {
    ++kept;
    acc += result.chain.accepted[i];
  }
  result.post_adapt_accept_rate =
      kept > 0 ? static_cast<double>(acc) / static_cast<double>(kept) : 0.0;

  // Posterior mean/sd of the coefficient field over retained samples.
  const std::size_t m = model.grid.nodes.size();
  const std::size_t n_kept = n - burn;
  std::vector<double> mean(m, 0.0), sq(m, 0.0);
  result.theta_mean.assign(model.kl.n_modes, 0.0);
  std::vector<double> theta(model.kl.n_modes);
  for (std::size_t i = burn; i < n; ++i) {
    for (std::size_t k = 0; k < theta.size(); ++k) theta[k] = result.chain.sample(i, k);
    const std::vector<double> alpha = kl_expand(theta, model.kl, model.grid);
    for (std::size_t g = 0; g < m; ++g) {
      mean[g] += alpha[g];
      sq[g] += alpha[g] * alpha[g];
    }
    for (std::size_t k = 0; k < theta.size(); ++k) result.theta_mean[k] += theta[k];
  }
  for (std::size_t g = 0; g < m; ++g) {
    mean[g] /= static_cast<double>(n_kept);
    const double v = sq[g] / static_cast<double>(n_kept) - mean[g] * mean[g];
    sq[g] = std::sqrt(std::max(0.0, v));
  }
  for (double& t : result.theta_mean) t /= static_cast<double>(n_kept);
  result.alpha_mean = mean;
  result.alpha_sd = sq;

  double rmse = 0.0;
  for (std::size_t g = 0; g < m; ++g) {
    const double d = result.alpha_mean[g] - result.problem.truth.alpha[g];
    rmse += d * d;
  }
  result.rmse = std::sqrt(rmse / static_cast<double>(m));
  result.correlation = pearson(result.alpha_mean, result.problem.truth.alpha);

  result.dir = prepare_dir(resolved);
  {
    nlohmann::json data_doc{{"grid_n", model.grid.n},
                            {"n_modes", model.kl.n_modes},
                            {"smoothness", model.kl.smoothness},
                            {"sigma", model.sigma},
                            {"obs_x", model.obs_x},
                            {"obs_nodes", model.obs_nodes},
                            {"data", model.data},
                            {"truth_alpha", result.problem.truth.alpha},
                            {"noise_seed", resolved.diffusion.data_seed}};
    std::ofstream out(result.dir / "data.json");
    out << data_doc.dump(2) << "\n";
  }

  {
    auto out = open_csv(result.dir / "reconstruction.csv");
    out << "x,alpha_true,alpha_mean,alpha_sd\n";
    for (std::size_t g = 0; g < m; ++g)
      out << fmt(model.grid.nodes[g]) << ',' << fmt(result.problem.truth.alpha[g])
          << ',' << fmt(result.alpha_mean[g]) << ',' << fmt(result.alpha_sd[g]) << "\n";
  }
  {
    std::vector<double> potential_trace(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < theta.size(); ++k) theta[k] = result.chain.sample(i, k);
      potential_trace[i] = diffusion_potential_value(theta, model);
    }
    write_series_csv(result.dir / "potential.csv", "potential", potential_trace);
  }

  write_metadata(result.dir, resolved,
                 {{"q", result.q},
                  {"accept_rate", result.accept_rate},
                  {"post_adapt_accept_rate", result.post_adapt_accept_rate},
                  {"final_dt", result.final_dt},
                  {"rmse", result.rmse},
                  {"correlation", result.correlation},
                  {"theta_mean", result.theta_mean},
                  {"time_s", result.chain.wall_time_s}});
  return result;
}

void run_inverse(const ExperimentConfig& cfg) {
  if (cfg.target == "gravity") {
    run_gravity(cfg);
  } else if (cfg.target == "diffusion") {
    run_diffusion(cfg);
  } else {
    throw std::invalid_argument("inverse problem must be 'gravity' or 'diffusion', got '" +
                                cfg.target + "'");
  }
}

void run_experiment(const ExperimentConfig& cfg) {
  if (cfg.kind == "sweep") run_sweep(cfg);
  else if (cfg.kind == "chain") run_single_chain(cfg);
  else if (cfg.kind == "force-table") run_force_table(cfg);
  else if (cfg.kind == "inverse") run_inverse(cfg);
  else
    throw std::invalid_argument("unknown experiment kind '" + cfg.kind +
                                "' (expected sweep, chain, force-table, inverse)");
}

}  // namespace qhmc
