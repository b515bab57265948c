#include "disslab/experiments.hpp"
#include "disslab/lp.hpp"
#include "disslab/mixing.hpp"
#include "disslab/storage.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <thread>

namespace disslab {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

CheckRow check(std::string name, double measured, double tol, std::string detail = "", std::string rel = "<=") {
  CheckRow r;
  r.name = std::move(name);
  r.measured = measured;
  r.tolerance = tol;
  r.relation = rel;
  r.pass = rel == ">=" ? measured >= tol : measured <= tol;
  r.detail = std::move(detail);
  return r;
}

RunReport start(const std::string &command, const Config &cfg) {
  RunReport rep;
  rep.command = command;
  rep.config_hash = cfg.hash();
  rep.version = version_string();
  return rep;
}

void save(RunReport &rep, const std::string &out, const std::string &name, const Csv &csv) {
  csv.write(out + "/" + name);
  rep.artifacts.push_back(name);
}

} // namespace

Construction1Options c1_options(const Config &cfg, bool variant) {
  const auto &s = cfg.construction1;
  Construction1Options o;
  o.grid_max = variant ? s.variant_grid_max : s.grid_max;
  o.resolution_factor = s.resolution_factor;
  o.tail_tol = s.tail_tol;
  o.cfl = s.cfl;
  return o;
}

Construction2Options c2_options(const Config &cfg, double beta) {
  const auto &s = cfg.construction2;
  Construction2Options o;
  o.blocks.beta = beta;
  o.blocks.N = s.N;
  o.blocks.n_max = s.n_max;
  o.blocks.tmpl.iterations = s.template_iterations;
  o.blocks.tmpl.seed = cfg.seed;
  o.eps = s.eps;
  o.h_values = s.h_values;
  o.r_list = s.r_list;
  o.m_values = s.m_list;
  o.test_fields = s.test_fields;
  o.seed = cfg.seed;
  o.onsager = beta == 0.0;
  return o;
}

MixingProfile mixing_profile(const Config &cfg) {
  MixingProfile p = MixingProfile::standard();
  p.tail_tol = cfg.mixing.tail_tol;
  p.linf_cap = cfg.mixing.linf_cap;
  return p;
}

CheckRow from_verdict(const VerdictRow &v) {
  CheckRow r;
  r.name = v.name;
  r.pass = v.pass;
  r.measured = v.measured;
  r.tolerance = v.tolerance;
  r.relation = v.relation;
  r.detail = v.detail;
  return r;
}

CheckRow aggregate(int id, std::string name, std::vector<CheckRow> sub, std::string detail) {
  CheckRow r;
  r.id = id;
  r.name = std::move(name);
  r.sub = std::move(sub);
  int bad = 0;
  for (const auto &c : r.sub)
    bad += !c.pass;
  r.pass = bad == 0 && !r.sub.empty();
  r.measured = r.sub.empty() ? NAN : bad;
  r.tolerance = 0;
  r.relation = "failed<=";
  r.detail = std::move(detail);
  return r;
}

// ---------------------------------------------------------------- lp-analyze

RunReport cmd_lp_analyze(const Config &cfg, const std::string &out, const std::string &snapshot) {
  auto t0 = std::chrono::steady_clock::now();
  RunReport rep = start("lp-analyze", cfg);
  std::string path = snapshot.empty() ? cfg.lp.snapshot : snapshot;
  if (path.empty())
    fail_config("missing_snapshot", "lp-analyze needs a snapshot (--snapshot or lp.snapshot)");
  SpectralField u = read_snapshot(path);
  LPBank bank(cfg.lp.base);
  ensure_dir(out);
  ShellSpectrum sp = shell_spectrum(u, cfg.lp.s, cfg.lp.p, bank);
  Csv spec({"q", "lambda", "value"});
  for (std::size_t i = 0; i < sp.value.size(); ++i)
    spec.row({Csv::num(long(i) - 1), Csv::num(sp.lambda[i]), Csv::num(sp.value[i])});
  save(rep, out, "shell_spectrum.csv", spec);

  const auto a = WeightSequence::inverse_square();
  Csv bes({"norm", "value"});
  const double binf = besov_norm(sp, INFINITY);
  bes.row({"besov_r_inf", Csv::num(binf)});
  bes.row({"besov_r_1", Csv::num(besov_norm(sp, 1.0))});
  bes.row({"besov_r_2", Csv::num(besov_norm(sp, 2.0))});
  const double w = weighted_besov_norm(sp, a);
  bes.row({"weighted_inverse_square", Csv::num(w)});
  bes.row({"c0_tail_top3", Csv::num(sp.running_max_top3())});
  save(rep, out, "besov.csv", bes);

  rep.metrics["besov_inf"] = binf;
  rep.metrics["weighted"] = w;
  // the first inclusion holds for any input
  rep.rows.push_back(check("weighted_le_besov_times_sum", w - binf * a.sum(), 1e-12 * std::max(1.0, binf),
                           "weighted " + fmt(w) + ", B^s_{p,inf} " + fmt(binf)));
  rep.wall_seconds = seconds_since(t0);
  return rep;
}

// ---------------------------------------------------------------------- mix

RunReport cmd_mix(const Config &cfg, const std::string &out) {
  auto t0 = std::chrono::steady_clock::now();
  RunReport rep = start("mix", cfg);
  const auto &m = cfg.mixing;
  Grid g(2, m.grid);
  g.validate();
  MixingProfile prof = mixing_profile(cfg);
  ensure_dir(out);
  SpectralField rho = checkerboard(static_cast<int>(std::lround(std::pow(m.base, m.first_stage))), g);
  Csv stages({"stage", "lambda", "contraction", "l2_drift", "max_linf", "max_tail", "resolved"});
  Csv hist({"stage", "t", "l2", "linf", "grad_linf", "hm1"});
  double worst_c = 0, worst_l = 0, worst_d = 0;
  std::string dc;
  for (int n = m.first_stage; n <= m.last_stage; ++n) {
    MixerStage st = build_stage(n, m.base, g, prof);
    MixerResult r = run_stage(st, rho, prof, false);
    stages.row({Csv::num(long(n)), Csv::num(st.lambda), Csv::num(r.contraction), Csv::num(r.l2_drift),
                Csv::num(r.max_linf), Csv::num(r.max_tail), r.resolved ? "1" : "0"});
    for (const auto &h : r.history)
      hist.row({Csv::num(long(n)), Csv::num(h.t), Csv::num(h.l2), Csv::num(h.linf), Csv::num(h.grad_linf),
                Csv::num(h.hm1)});
    worst_c = std::max(worst_c, r.contraction);
    worst_l = std::max(worst_l, r.max_linf);
    worst_d = std::max(worst_d, r.l2_drift);
    rep.metrics["contraction_stage" + std::to_string(n)] = r.contraction;
    dc += (dc.empty() ? "" : ",") + fmt(r.contraction);
    if (!r.resolved)
      rep.warnings.push_back("stage " + std::to_string(n) + " leaves the resolved band (tail " + fmt(r.max_tail) + ")");
    rho = r.rho;
  }
  save(rep, out, "mixing_stages.csv", stages);
  save(rep, out, "mixing_history.csv", hist);
  rep.rows.push_back(check("hm1_contraction_per_stage", worst_c, 0.5, "per stage " + dc));
  rep.rows.push_back(check("linf_bound", worst_l, m.linf_cap));
  rep.rows.push_back(check("l2_drift_per_stage", worst_d, 1e-4));
  rep.metrics["max_linf"] = worst_l;
  rep.metrics["max_l2_drift"] = worst_d;
  rep.wall_seconds = seconds_since(t0);
  return rep;
}

// ------------------------------------------------------------ construction1

namespace {

void member_rows(const MemberResult &r, Csv &fam) {
  fam.row({Csv::num(long(r.m)), Csv::num(long(r.grid_n)), r.aborted ? "1" : "0", Csv::num(r.abort_time),
           Csv::num(r.total_dissipation), Csv::num(r.final_energy), Csv::num(r.low_mode), Csv::num(r.high_mode2),
           Csv::num(r.budget_residual), Csv::num(r.stability.lhs), Csv::num(r.stability.rhs), Csv::num(r.work),
           Csv::num(r.v_dissipation), Csv::num(r.force_gap), Csv::num(r.schedule.tau), Csv::num(r.schedule.nu),
           Csv::num(r.schedule.Lambda)});
}

Csv family_csv() {
  return Csv({"m", "grid", "aborted", "abort_time", "total_dissipation", "final_energy", "low_mode", "high_mode2",
              "budget_residual", "stability_lhs", "stability_rhs", "work", "v_dissipation", "force_gap", "tau", "nu",
              "Lambda"});
}

Csv shells_csv() { return Csv({"m", "q", "onsager_v", "mixed"}); }

void shell_rows(const MemberResult &r, Csv &c) {
  for (std::size_t i = 0; i < r.shells.size(); ++i)
    c.row({Csv::num(long(r.m)), Csv::num(long(r.shells[i])), Csv::num(r.onsager_v[i]), Csv::num(r.mixed[i])});
}

} // namespace

RunReport cmd_construction1(const Config &cfg, const std::string &out) {
  auto t0 = std::chrono::steady_clock::now();
  RunReport rep = start("construction1", cfg);
  const auto &s = cfg.construction1;
  WeightSequence a = WeightSequence::parse(s.weights);
  Construction1Options opt = c1_options(cfg);
  if (cfg.construction1.snapshots)
    opt.snapshot_dir = out + "/snapshots";
  ensure_dir(out);
  // schedules first, so an invalid one fails before any integration
  for (int m : s.m_list)
    make_schedule(m, a, s.base, true);
  std::vector<MemberResult> fam;
  Csv famcsv = family_csv(), shells = shells_csv();
  for (int m : s.m_list) {
    fam.push_back(run_family_member(m, a, s.base, opt));
    const auto &r = fam.back();
    member_rows(r, famcsv);
    shell_rows(r, shells);
    Csv b({"t", "E", "D", "W", "residual"});
    for (std::size_t i = 0; i < r.budget.t.size(); ++i)
      b.row({Csv::num(r.budget.t[i]), Csv::num(r.budget.E[i]), Csv::num(r.budget.D[i]), Csv::num(r.budget.W[i]),
             Csv::num(r.budget.residual[i])});
    save(rep, out, "budget_m" + std::to_string(m) + ".csv", b);
    if (r.aborted)
      rep.warnings.push_back("m=" + std::to_string(m) + " aborted at t=" + fmt(r.abort_time) + ": " + r.abort_reason);
    rep.metrics["dissipation_m" + std::to_string(m)] = r.total_dissipation;
    rep.metrics["total_dissipation"] = r.total_dissipation;
  }
  save(rep, out, "family.csv", famcsv);
  save(rep, out, "shells.csv", shells);
  if (fam.size() >= 3) {
    for (const auto &v : verdict(fam))
      rep.rows.push_back(from_verdict(v));
  } else {
    for (const auto &r : fam) {
      rep.rows.push_back(check("budget_residual_m" + std::to_string(r.m), r.budget_residual, 1e-6,
                               r.aborted ? "aborted: " + r.abort_reason : ""));
      rep.rows.push_back(check("high_mode_m" + std::to_string(r.m), r.high_mode2, std::exp(-2.0 * r.m)));
    }
  }
  rep.wall_seconds = seconds_since(t0);
  return rep;
}

// ------------------------------------------------------------ construction2

namespace {

void c2_artifacts(RunReport &rep, const std::string &out, const std::string &prefix, const Construction2Result &r) {
  Csv cert({"n", "theta", "width", "l2", "divergence", "flux", "normalized_flux", "target_met", "lr_1", "lr_3",
            "lr_inf"});
  Csv cross({"n", "q", "shell_flux"});
  for (const auto &c : r.family.certificates) {
    auto lr = [&](double p) {
      auto it = c.lr.find(p);
      return it == c.lr.end() ? std::string("") : Csv::num(it->second);
    };
    cert.row({Csv::num(long(c.n)), Csv::num(c.theta), Csv::num(c.width), Csv::num(c.l2), Csv::num(c.divergence),
              Csv::num(c.flux), Csv::num(c.normalized_flux), c.target_met ? "1" : "0", lr(1.0), lr(3.0),
              lr(double(INFINITY))});
    for (auto &[q, v] : c.shell_flux)
      cross.row({Csv::num(long(c.n)), Csv::num(long(q)), Csv::num(v)});
  }
  save(rep, out, prefix + "certificates.csv", cert);
  save(rep, out, prefix + "cross_shell.csv", cross);
  {
    std::ofstream txt(out + "/" + prefix + "certificates.txt");
    for (const auto &c : r.family.certificates)
      txt << c.text() << "\n";
    rep.artifacts.push_back(prefix + "certificates.txt");
  }

  Csv sh({"q", "h", "pi", "phi", "su_start"});
  for (const auto &s : r.shells)
    sh.row({Csv::num(long(s.q)), Csv::num(s.h), Csv::num(s.pi), Csv::num(s.phi), Csv::num(s.su_start)});
  save(rep, out, prefix + "shells.csv", sh);

  std::vector<std::string> head{"m", "nu", "nu_scaled", "dissipation_residual", "zero_work_residual", "energy_start",
                                "linf_l2", "l2_l2"};
  for (double p : r.options.r_list)
    head.push_back("force_L1_L" + fmt(p));
  Csv tr(head);
  for (const auto &t : r.truncations) {
    std::vector<std::string> row{Csv::num(long(t.m)), Csv::num(t.nu), Csv::num(t.nu_scaled),
                                 Csv::num(t.dissipation_residual), Csv::num(t.zero_work_residual),
                                 Csv::num(t.energy_start), Csv::num(t.linf_l2), Csv::num(t.l2_l2)};
    for (double p : r.options.r_list) {
      auto it = t.force_lr.find(p);
      row.push_back(it == t.force_lr.end() ? "" : Csv::num(it->second));
    }
    tr.row(row);
  }
  save(rep, out, prefix + "truncations.csv", tr);

  Csv misc({"quantity", "value"});
  misc.row({"T", Csv::num(r.cutoffs.T)});
  misc.row({"c_eps", Csv::num(r.cutoffs.c_eps)});
  misc.row({"sum_sq_defect", Csv::num(r.sum_sq_defect)});
  misc.row({"sum_sq_at_T", Csv::num(r.sum_sq_at_T)});
  misc.row({"orthogonality", Csv::num(r.orthogonality)});
  misc.row({"weak_l1", Csv::num(r.weak_l1)});
  misc.row({"weak_l1_refined", Csv::num(r.weak_l1_refined)});
  misc.row({"template_flux", Csv::num(r.family.template_flux)});
  save(rep, out, prefix + "summary.csv", misc);

  if (!r.onsager.empty()) {
    Csv on({"q", "onsager"});
    for (auto &[q, v] : r.onsager)
      on.row({Csv::num(long(q)), Csv::num(v)});
    save(rep, out, prefix + "onsager.csv", on);
  }
  Csv wk({"field", "residual"});
  for (std::size_t i = 0; i < r.weak_residuals.size(); ++i)
    wk.row({Csv::num(long(i)), Csv::num(r.weak_residuals[i])});
  save(rep, out, prefix + "weak_residuals.csv", wk);
}

} // namespace

RunReport cmd_construction2(const Config &cfg, const std::string &out) {
  auto t0 = std::chrono::steady_clock::now();
  RunReport rep = start("construction2", cfg);
  const auto &s = cfg.construction2;
  ensure_dir(out);
  Construction2Result r = run_construction2(c2_options(cfg, s.beta));
  c2_artifacts(rep, out, "c2_", r);
  std::optional<Construction2Result> trend;
  if (s.trend_beta >= 0 && s.trend_beta != s.beta) {
    Construction2Options o = c2_options(cfg, s.trend_beta);
    o.onsager = false;
    trend = run_construction2(o);
    c2_artifacts(rep, out, "c2_trend_", *trend);
  }
  for (const auto &v : verdict(r, trend ? &*trend : nullptr))
    rep.rows.push_back(from_verdict(v));
  double wmax = 0;
  for (double w : r.weak_residuals)
    wmax = std::max(wmax, w);
  rep.rows.push_back(check("weak_residual", r.weak_residuals.empty() ? NAN : wmax, 1e-8,
                           std::to_string(r.weak_residuals.size()) + " test fields"));
  for (const auto &row : r.shells)
    if (row.q == r.top_shell) {
      rep.metrics["pi_top_h" + fmt(row.h)] = row.pi;
      rep.metrics["phi_top_h" + fmt(row.h)] = row.phi;
    }
  rep.metrics["weak_l1"] = r.weak_l1;
  rep.metrics["seconds"] = r.seconds;
  rep.wall_seconds = seconds_since(t0);
  return rep;
}

// -------------------------------------------------------------------- sweep

Config sweep_config(const Config &cfg, const std::string &axis, double value, const std::string &command) {
  Config c = cfg;
  const int iv = static_cast<int>(std::lround(value));
  const bool integral = std::abs(value - iv) == 0.0;
  if (!std::isfinite(value))
    fail_config("bad_sweep", "sweep values must be finite");
  if ((axis == "m" || axis == "n" || axis == "grid") && !integral)
    fail_config("bad_sweep", "sweep over " + axis + " needs integer values");
  if (command == "construction1" && axis == "m")
    c.construction1.m_list = {iv};
  else if (command == "construction1" && axis == "grid")
    c.construction1.grid_max = iv;
  else if (command == "construction2" && axis == "m")
    c.construction2.m_list = {iv};
  else if (command == "construction2" && axis == "n")
    c.construction2.n_max = iv;
  else if (command == "mix" && axis == "n")
    c.mixing.first_stage = c.mixing.last_stage = iv;
  else if (command == "mix" && axis == "grid")
    c.mixing.grid = iv;
  else
    fail_config("bad_sweep", "cannot sweep " + axis + " for command " + command);
  return c;
}

RunReport cmd_sweep(const Config &cfg, const std::string &out, const SweepSpec &spec) {
  auto t0 = std::chrono::steady_clock::now();
  RunReport rep = start("sweep", cfg);
  if (spec.axis != "m" && spec.axis != "n" && spec.axis != "grid")
    fail_config("bad_sweep", "sweep axis must be m, n or grid");
  std::vector<double> values = spec.values;
  std::sort(values.begin(), values.end());
  auto last = std::unique(values.begin(), values.end());
  if (last != values.end()) {
    rep.warnings.push_back("duplicate sweep values removed");
    values.erase(last, values.end());
  }
  ensure_dir(out);
  // validate every value before spending any compute
  std::vector<Config> cfgs;
  for (double v : values)
    cfgs.push_back(sweep_config(cfg, spec.axis, v, spec.command));

  struct Slot {
    RunReport rep;
    int exit_code = 0;
    std::string error;
  };
  std::vector<Slot> slots(values.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < values.size();) {
      std::string dir = out + "/" + spec.axis + "_" + Csv::num(values[i]);
      Slot &s = slots[i];
      try {
        if (spec.command == "mix")
          s.rep = cmd_mix(cfgs[i], dir);
        else if (spec.command == "construction1")
          s.rep = cmd_construction1(cfgs[i], dir);
        else if (spec.command == "construction2")
          s.rep = cmd_construction2(cfgs[i], dir);
        else
          s.rep = cmd_lp_analyze(cfgs[i], dir, spec.snapshot);
        s.rep.write(dir);
        s.exit_code = s.rep.all_pass() ? 0 : 1;
      } catch (const Error &e) {
        s.exit_code = e.exit_code();
        s.error = e.code() + ": " + e.what();
        ensure_dir(dir);
        std::ofstream(dir + "/error.json") << error_record(e).dump(2) << "\n";
      } catch (const std::exception &e) {
        s.exit_code = 3;
        s.error = std::string("unexpected: ") + e.what();
        ensure_dir(dir);
        std::ofstream(dir + "/error.json") << error_record(e).dump(2) << "\n";
      }
    }
  };
  const int nw = std::max(1, std::min<int>(cfg.workers, static_cast<int>(values.size())));
  std::vector<std::thread> pool;
  for (int w = 1; w < nw; ++w)
    pool.emplace_back(worker);
  worker();
  for (auto &t : pool)
    t.join();

  // aggregation in value order, independent of scheduling
  std::vector<std::string> keys;
  for (const auto &s : slots)
    for (auto &[k, v] : s.rep.metrics)
      if (k != "seconds" && std::find(keys.begin(), keys.end(), k) == keys.end())
        keys.push_back(k);
  std::sort(keys.begin(), keys.end());
  std::vector<std::string> head{spec.axis, "exit_code", "pass"};
  head.insert(head.end(), keys.begin(), keys.end());
  Csv agg(head);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const Slot &s = slots[i];
    std::vector<std::string> row{Csv::num(values[i]), Csv::num(long(s.exit_code)), s.exit_code == 0 ? "1" : "0"};
    for (const auto &k : keys) {
      auto it = s.rep.metrics.find(k);
      row.push_back(it == s.rep.metrics.end() ? "" : Csv::num(it->second));
    }
    agg.row(row);
    CheckRow r;
    r.name = spec.command + " " + spec.axis + "=" + fmt(values[i]);
    r.sub = s.rep.rows;
    r.pass = s.exit_code == 0;
    r.measured = s.exit_code;
    r.tolerance = 0;
    r.relation = "exit<=";
    r.detail = s.error;
    rep.rows.push_back(r);
  }
  save(rep, out, "sweep.csv", agg);
  rep.wall_seconds = seconds_since(t0);
  return rep;
}

} // namespace disslab
