//! Acceptance suite. Each criterion prints one PASS or FAIL line; the process
//! exits non-zero if any criterion fails.

use std::time::{Duration, Instant};

use channel_purity::covariance::{covariance_test, CovarianceVerdict};
use channel_purity::optim::{brute_force_oracle, OracleObjective};
use channel_purity::random::{derive_seed, rng_from_seed};
use channel_purity::verify::{self, Verdict, VerificationReport, COLLAPSE_TOL, PRODUCT_TOL, RANK_ONE_TOL};
use channel_purity::zoo::{self, QubitChannelParams, ShiftedDepolarisingParams};
use channel_purity::{maximize_output_pnorm, minimize_output_entropy, Channel, OptimizerConfig, PureState, SchattenP};
use rand::Rng;

const MASTER_SEED: u64 = 2024;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_s: f64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit_s, || format!("took {:.1} s, limit {limit_s} s", elapsed.as_secs_f64()))
}

fn binary_entropy(q: f64) -> f64 {
    -q * q.ln() - (1.0 - q) * (1.0 - q).ln()
}

fn cli_value(args: &[&str]) -> Result<f64, String> {
    let mut full = vec!["channel-purity"];
    full.extend_from_slice(args);
    let out = channel_purity_cli::run(full);
    let report = out.report.ok_or_else(|| format!("no report: {}", out.stderr))?;
    if out.exit_code != 0 {
        return Err(format!("exit {} for {args:?}: {}", out.exit_code, out.stderr));
    }
    report.results["value"].as_f64().ok_or_else(|| "report has no value".to_string())
}

fn closed_form_purity() -> Check {
    let mut worst = 0.0f64;
    for lambda in [0.3, 0.5, 0.7] {
        let started = Instant::now();
        let spec = format!(r#"{{"family":"depolarising","params":{{"d":2,"lambda":{lambda}}}}}"#);
        let q = (1.0 + lambda) / 2.0;
        let (s_exact, n_exact) = (binary_entropy(q), (q * q + (1.0 - q) * (1.0 - q)).sqrt());
        let s = cli_value(&["opt", "smin", "--channel", &spec, "--seed", "1"])?;
        let n = cli_value(&["opt", "nup", "--channel", &spec, "--p", "2", "--seed", "1"])?;
        let ch = zoo::depolarising(2, lambda).map_err(|e| e.to_string())?;
        let mut rng = rng_from_seed(1);
        let s_grid = brute_force_oracle(&ch, OracleObjective::EntropyMin, 0, false, &mut rng).map_err(|e| e.to_string())?;
        let n_grid =
            brute_force_oracle(&ch, OracleObjective::PNormMax(SchattenP::Finite(2.0)), 0, false, &mut rng).map_err(|e| e.to_string())?;
        for (got, want, what) in [(s, s_exact, "smin"), (n, n_exact, "nup"), (s_grid, s_exact, "grid smin"), (n_grid, n_exact, "grid nup")]
        {
            ensure((got - want).abs() <= 1e-6, || format!("lambda {lambda} {what}: {got} vs {want}"))?;
            worst = worst.max((got - want).abs());
        }
        within(started.elapsed(), 5.0)?;
    }
    Ok(format!("max deviation {worst:.2e}"))
}

fn cptp_equivalence() -> Check {
    let started = Instant::now();
    let mut rng = rng_from_seed(derive_seed(MASTER_SEED, 2));
    let (mut compared, mut disagreements, mut cptp_count) = (0, 0, 0);
    while compared < 1000 {
        let x3: f64 = rng.random_range(-1.0..1.0);
        let t = if rng.random_bool(0.5) { rng.random_range(-1.0..1.0) * (1.0 - x3.abs()) } else { rng.random_range(-1.0..1.0) };
        let p = QubitChannelParams::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), x3, t).canonical();
        let closed = zoo::qubit_cptp_condition(&p);
        let choi_min = *zoo::upsilon(&p).to_choi().eigenvalues().last().unwrap();
        if closed.min_slack().abs() < 1e-9 || choi_min.abs() < 1e-9 {
            continue;
        }
        compared += 1;
        cptp_count += closed.cptp as usize;
        if closed.cptp != (choi_min >= 0.0) {
            disagreements += 1;
        }
    }
    ensure(disagreements == 0, || format!("{disagreements} disagreements"))?;
    within(started.elapsed(), 30.0)?;
    Ok(format!("{compared} draws ({cptp_count} CPTP), 0 disagreements"))
}

fn extreme_point_certificate() -> Check {
    let cfg = OptimizerConfig::default().with_seed(derive_seed(MASTER_SEED, 3));
    let mut rng = rng_from_seed(derive_seed(MASTER_SEED, 30));
    let mut pairs: Vec<(f64, f64, f64)> = (0..50)
        .map(|_| {
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            (rng.random_range(-0.95..0.95), rng.random_range(-0.95..0.95), sign)
        })
        .collect();
    // Amplitude damping and its mirror image.
    pairs.extend([(0.6, 0.6, 1.0), (0.3, -0.3, 1.0), (-0.8, -0.8, -1.0)]);
    let mut worst_residual = 0.0f64;
    for (x1, x2, sign) in pairs {
        let p = zoo::extreme_point_channel(x1, x2, sign).map_err(|e| e.to_string())?;
        let v = zoo::qubit_cptp_condition(&p);
        ensure(v.plus_slack.abs() <= 1e-12 && v.minus_slack.abs() <= 1e-12, || format!("({x1}, {x2}): slacks {v:?}"))?;
        let ch = zoo::upsilon(&p);
        let rank = ch.to_choi().rank(1e-8);
        ensure(rank == 2, || format!("({x1}, {x2}): Choi rank {rank}"))?;
        let search = verify::find_rank_one_output(&ch, &cfg).map_err(|e| e.to_string())?;
        ensure(search.residual <= RANK_ONE_TOL, || format!("({x1}, {x2}): residual {:.3e}", search.residual))?;
        let expected = if x1.abs() == x2.abs() { 1 } else { 2 };
        ensure(search.witnesses.len() == expected, || format!("({x1}, {x2}): {} witnesses, expected {expected}", search.witnesses.len()))?;
        for w in &search.witnesses {
            let out = ch.apply_state(w).map_err(|e| e.to_string())?;
            worst_residual = worst_residual.max(out.spectrum().values()[1].abs());
        }
    }
    ensure(worst_residual <= RANK_ONE_TOL, || format!("witness residual {worst_residual:.3e}"))?;
    Ok(format!("53 channels, worst witness residual {worst_residual:.1e}"))
}

fn norm_collapse() -> Check {
    let started = Instant::now();
    let cfg = OptimizerConfig::default().with_seed(derive_seed(MASTER_SEED, 4));
    let e = |r: channel_purity::Result<Channel>| r.map_err(|e| e.to_string());
    let psis = vec![
        e(zoo::depolarising(2, 0.5))?,
        e(zoo::depolarising(3, 0.4))?,
        e(zoo::transpose_depolarising(3, 0.2))?,
        e(zoo::werner_holevo(3))?,
    ];
    let ms = [
        e(zoo::shift_channel(0.5, 0.5, &PureState::basis(2, 0)))?,
        e(zoo::shift_channel(0.5, 0.5, &PureState::basis(3, 0)))?,
        e(zoo::amplitude_damping(0.3))?,
        zoo::upsilon(&zoo::example_d_channel(0.5, 0.25).map_err(|e| e.to_string())?),
    ];
    let (mut checks, mut worst) = (0, 0.0f64);
    for psi in &psis {
        for m in ms.iter().filter(|m| m.dim_out() == psi.dim_in()) {
            for p in [SchattenP::Finite(1.5), SchattenP::Finite(2.0), SchattenP::Infinity] {
                let r = verify::verify_norm_collapse(psi, m, p, &cfg, COLLAPSE_TOL).map_err(|e| e.to_string())?;
                ensure(r.verdict == Verdict::Confirmed, || {
                    format!("{} o {} at p = {p}: {:?} gap {:.3e} {:?}", psi.label(), m.label(), r.verdict, r.gap, r.note)
                })?;
                worst = worst.max(r.gap.abs());
                checks += 1;
            }
        }
    }
    within(started.elapsed(), 60.0)?;
    Ok(format!("{checks} checks, max |gap| {worst:.2e}"))
}

fn desk_scale_run() -> Result<Vec<VerificationReport>, String> {
    let e = |r: channel_purity::Result<Channel>| r.map_err(|e| e.to_string());
    let shifted = ShiftedDepolarisingParams::new(2, 0.4, 0.3, 0.3, None).map_err(|e| e.to_string())?;
    let ex_e = zoo::example_e_params([0.3, 0.5, 0.9], 0.6, 0.36).map_err(|e| e.to_string())?;
    let phis = vec![e(zoo::shifted_depolarising(&shifted))?, e(zoo::example_d_lifted(0.8, 0.5, 0.25))?, zoo::upsilon(&ex_e)];
    let mut rng = rng_from_seed(derive_seed(MASTER_SEED, 50));
    let omegas: Vec<Channel> = (0..5).map(|_| zoo::random_qubit_channel(&mut rng)).collect();
    let cfg = OptimizerConfig::default().with_seed(derive_seed(MASTER_SEED, 5)).with_starts(128);
    let mut reports = Vec::new();
    for phi in &phis {
        for omega in &omegas {
            for p in [1.2, 1.5, 2.0] {
                reports
                    .push(verify::verify_multiplicativity(phi, omega, SchattenP::Finite(p), &cfg, PRODUCT_TOL).map_err(|e| e.to_string())?);
            }
            reports.push(verify::verify_additivity(phi, omega, &cfg, PRODUCT_TOL).map_err(|e| e.to_string())?);
        }
    }
    Ok(reports)
}

fn desk_scale(reports: &[VerificationReport], elapsed: Duration) -> Check {
    let mut worst = 0.0f64;
    for r in reports {
        // Multiplicativity can only gain on the product seed, additivity only lose.
        let proven_side = match r.kind {
            verify::VerificationKind::Multiplicativity => r.gap,
            _ => -r.gap,
        };
        ensure(proven_side >= -1e-10, || format!("product seed lost: {:?} p = {:?} gap {:.3e}", r.kind, r.p, r.gap))?;
        ensure(r.verdict == Verdict::Confirmed && r.gap.abs() <= 1e-4, || {
            format!("{:?} p = {:?}: {:?} gap {:.3e} {:?}", r.kind, r.p, r.verdict, r.gap, r.note)
        })?;
        worst = worst.max(r.gap.abs());
    }
    within(elapsed, 600.0)?;
    Ok(format!("{} checks, max |gap| {worst:.2e}, {:.1} s", reports.len(), elapsed.as_secs_f64()))
}

fn covariance_falsification() -> Check {
    let started = Instant::now();
    let mut rng = rng_from_seed(derive_seed(MASTER_SEED, 6));
    let shifted = ShiftedDepolarisingParams::new(2, 0.3, 0.5, 0.2, None).map_err(|e| e.to_string())?;
    let ch = zoo::shifted_depolarising(&shifted).map_err(|e| e.to_string())?;
    let r = covariance_test(&ch, 200, 1e-9, &mut rng).map_err(|e| e.to_string())?;
    ensure(r.verdict == CovarianceVerdict::Falsified, || "shifted depolarising not falsified".into())?;
    let first = r.first_violation.unwrap_or(usize::MAX);
    let mut worst = 0.0f64;
    let mut covariant = Vec::new();
    for d in [2, 3] {
        covariant.push(zoo::depolarising(d, 0.6).map_err(|e| e.to_string())?);
        covariant.push(zoo::transpose_depolarising(d, 1.0 / (d as f64 + 1.0) - 0.05).map_err(|e| e.to_string())?);
        covariant.push(zoo::werner_holevo(d).map_err(|e| e.to_string())?);
    }
    for ch in &covariant {
        let r = covariance_test(ch, 200, 1e-10, &mut rng).map_err(|e| e.to_string())?;
        ensure(r.verdict == CovarianceVerdict::Consistent && r.max_spectral_deviation < 1e-10, || {
            format!("{}: deviation {:.3e}", ch.label(), r.max_spectral_deviation)
        })?;
        worst = worst.max(r.max_spectral_deviation);
    }
    within(started.elapsed(), 10.0)?;
    Ok(format!("falsified at sample {first}; covariant max deviation {worst:.1e}"))
}

fn oracle_equivalence() -> Check {
    let started = Instant::now();
    let mut rng = rng_from_seed(derive_seed(MASTER_SEED, 7));
    let cfg = OptimizerConfig::default().with_seed(derive_seed(MASTER_SEED, 70));
    let mut worst = 0.0f64;
    for k in 0..20 {
        let ch = zoo::random_qubit_channel(&mut rng);
        let s = minimize_output_entropy(&ch, &cfg).map_err(|e| e.to_string())?.value;
        let n = maximize_output_pnorm(&ch, SchattenP::Finite(2.0), &cfg).map_err(|e| e.to_string())?.value;
        let s_o = brute_force_oracle(&ch, OracleObjective::EntropyMin, 200, true, &mut rng).map_err(|e| e.to_string())?;
        let n_o =
            brute_force_oracle(&ch, OracleObjective::PNormMax(SchattenP::Finite(2.0)), 200, true, &mut rng).map_err(|e| e.to_string())?;
        ensure((s - s_o).abs() <= 1e-4 && (n - n_o).abs() <= 1e-4, || format!("channel {k}: smin {s} vs {s_o}, nu2 {n} vs {n_o}"))?;
        worst = worst.max((s - s_o).abs()).max((n - n_o).abs());
    }
    within(started.elapsed(), 120.0)?;
    Ok(format!("20 channels, max deviation {worst:.2e}"))
}

fn determinism(first: &[VerificationReport]) -> Check {
    let second = desk_scale_run()?;
    let a = serde_json::to_string(first).map_err(|e| e.to_string())?;
    let b = serde_json::to_string(&second).map_err(|e| e.to_string())?;
    ensure(a == b, || "repeated run differs".into())?;
    Ok(format!("{} reports, {} bytes identical", second.len(), a.len()))
}

fn main() {
    let mut failures = 0;
    let mut report = |name: &str, result: Check| match &result {
        Ok(detail) => println!("PASS  {name}: {detail}"),
        Err(why) => {
            failures += 1;
            println!("FAIL  {name}: {why}");
        }
    };
    report("1 closed-form purity of qubit depolarising", closed_form_purity());
    report("2 closed-form CPTP condition vs Choi test", cptp_equivalence());
    report("3 extreme-point certificate and rank-one witnesses", extreme_point_certificate());
    report("4 norm collapse for covariant outer channels", norm_collapse());
    let started = Instant::now();
    let desk = desk_scale_run();
    let elapsed = started.elapsed();
    match &desk {
        Ok(reports) => report("5 desk-scale multiplicativity and additivity", desk_scale(reports, elapsed)),
        Err(e) => report("5 desk-scale multiplicativity and additivity", Err(e.clone())),
    }
    report("6 covariance falsification", covariance_falsification());
    report("7 optimizer vs brute-force oracle", oracle_equivalence());
    match &desk {
        Ok(reports) => report("8 determinism of the desk-scale run", determinism(reports)),
        Err(_) => report("8 determinism of the desk-scale run", Err("criterion 5 did not run".into())),
    }
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
    println!("all 8 criteria passed");
}
