//! Acceptance suite. Runs without the libtest harness so that every criterion
//! prints exactly one PASS/FAIL line; exits non-zero if any fails.

mod common;

use std::process::Command;
use std::time::{Duration, Instant};

use brwlab::brw::{advance, enumerate_exact, BranchingLaw, Mode, ParticleMeasure, StepConfig};
use brwlab::gaussian::{clt_uniformity_scan, nu, nu_n_of_set, SrwRow};
use brwlab::ldp::{
    concentration_probe, enumerated_forced_probability, enumerated_target_probability, ldp_lower_bound, ln_rational,
    log_frequency_slope, strategy_prefix_logprob, Simulation, StrategySpec,
};
use brwlab::rate::{classify, i_tilde, interpolation_cost_exponent, j_tilde, Regime};
use brwlab::rng::stream;
use brwlab::stats::NeumaierSum;
use brwlab::IntervalSet;
use common::{brute_i_tilde, brute_j_tilde, gauss_mass, oracle_nu, random_set, rng};
use num_rational::BigRational;
use rand::Rng;
use statrs::distribution::{ContinuousCDF, Normal};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn set(s: &str) -> IntervalSet {
    s.parse().unwrap()
}

fn probit(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

fn gaussian_kernel() -> Outcome {
    let mut g = rng(1);
    let sets: Vec<IntervalSet> = (0..1000).map(|_| random_set(&mut g, 5, 9.0, 0.3, 1e-6)).collect();
    let t = Instant::now();
    let ours: Vec<f64> = sets.iter().map(nu).collect();
    let elapsed = t.elapsed();
    let worst = sets.iter().zip(&ours).map(|(s, v)| (v - oracle_nu(s, 0.0, 1.0)).abs()).fold(0.0, f64::max);
    // The oracle itself: reference values of erfc to 20 digits, and statrs as a coarse cross-check.
    let reference = [
        (0.5, 0.479_500_122_186_953_5),
        (1.0, 0.157_299_207_050_285_1),
        (3.0, 2.209_049_699_858_544e-5),
        (8.0, 1.122_429_717_298_292_7e-29),
    ];
    let oracle_ok = reference.iter().all(|&(x, v)| ((common::erfc(x) - v) / v).abs() < 1e-14)
        && (-60..=60).all(|i| {
            let x = i as f64 / 10.0;
            (common::erfc(x) - statrs::function::erf::erfc(x)).abs() < 1e-9
        });
    check(
        oracle_ok && worst <= 1e-12 && elapsed < Duration::from_secs(1),
        format!("max |nu - erfc oracle| = {worst:.2e} over 1000 sets in {elapsed:.2?}; oracle self-check {oracle_ok}"),
    )
}

fn srw_law() -> Outcome {
    const SAMPLES: u64 = 1_000_000;
    let mut g = rng(2);
    let sets: Vec<IntervalSet> = (0..20).map(|_| random_set(&mut g, 3, 11.0, 0.3, 0.5)).collect();
    let mut counts = [0u64; 21];
    for _ in 0..SAMPLES {
        let ups = (g.random::<u16>() & 0x3ff).count_ones() as usize;
        counts[2 * ups] += 1;
    }
    let mut worst_z = 0.0f64;
    for s in &sets {
        let hits: u64 = (0..=20).filter(|&i| s.contains(i as f64 - 10.0)).map(|i| counts[i]).sum();
        let exact = nu_n_of_set(10, s);
        let sd = (exact * (1.0 - exact) / SAMPLES as f64).sqrt();
        let diff = (hits as f64 / SAMPLES as f64 - exact).abs();
        let z = if sd > 0.0 {
            diff / sd
        } else if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        worst_z = worst_z.max(z);
    }
    let mut worst_row = 0.0f64;
    for n in (1..=200).chain([999, 1000, 4097, 9999, 10_000]) {
        let row = SrwRow::new(n);
        let sum: NeumaierSum = (-(n as i64)..=n as i64).map(|k| row.pmf(k)).collect();
        worst_row = worst_row.max((sum.value() - 1.0).abs());
    }
    check(
        worst_z <= 4.0 && worst_row <= 1e-12,
        format!("max MC deviation {worst_z:.2} sd over 20 sets; max |row sum - 1| = {worst_row:.1e} up to n = 1e4"),
    )
}

fn rate_oracles() -> Outcome {
    const STEP: f64 = 1e-4;
    let t = Instant::now();
    let mut g = rng(3);
    let mut worst = 0.0f64;
    let mut cases = 0;
    let mut mismatch = Vec::new();
    while cases < 20 {
        let bounded = cases % 2 == 1;
        let a = random_set(&mut g, 3, 3.0, if bounded { 0.0 } else { 0.5 }, 0.2);
        if a.is_real_line() || nu(&a) > 0.95 {
            continue;
        }
        let p = g.random_range(nu(&a) + 0.02..0.97);
        // Keep away from the shift-feasibility boundary, where a 1e-4 grid cannot decide.
        let sup = if bounded { common::brute_dilated_sup(&a, 1.0, STEP) } else { 1.0 };
        if (sup - p).abs() < 0.01 {
            continue;
        }
        cases += 1;
        let ours = i_tilde(&a, p).map_err(|e| e.to_string())?.value;
        match brute_i_tilde(&a, p, STEP) {
            Some(v) => worst = worst.max((ours - v).abs()),
            None if ours.is_infinite() => {}
            None => mismatch.push(format!("{a} p={p:.3}: i_tilde {ours} vs none")),
        }
        if bounded {
            let ours = j_tilde(&a, p).map_err(|e| e.to_string())?.value;
            let brute =
                brute_j_tilde(&a, p, STEP).ok_or_else(|| format!("brute j_tilde found no crossing for {a} p={p}"))?;
            worst = worst.max((ours - brute).abs());
        }
    }
    let closed_i = i_tilde(&set("(-inf,0]"), 0.8).unwrap().value;
    let closed_j = j_tilde(&IntervalSet::closed(-0.6745, 0.6745).unwrap(), 0.9).unwrap().value;
    let oracle_i = probit(0.8);
    let oracle_j = 1.0 - (0.6745 / probit(0.95)).powi(2);
    let elapsed = t.elapsed();
    check(
        worst <= 1e-3
            && mismatch.is_empty()
            && (closed_i - 0.841_621_2).abs() <= 1e-4
            && (closed_i - oracle_i).abs() <= 1e-6
            && (closed_j - 0.831_842).abs() <= 1e-3
            && (closed_j - oracle_j).abs() <= 1e-6
            && elapsed < Duration::from_secs(30),
        format!(
            "max grid gap {worst:.1e} on 20 cases{}; I(0.8) = {closed_i:.7}, J(0.9) = {closed_j:.7} \
             (inverse-CDF {oracle_j:.7}); {elapsed:.1?} including the brute force",
            if mismatch.is_empty() { String::new() } else { format!(", mismatches: {mismatch:?}") }
        ),
    )
}

fn dichotomy() -> Outcome {
    let mut g = rng(4);
    let mut violations = Vec::new();
    let (mut shift, mut dilation) = (0, 0);
    let mut cases = 0;
    while cases < 200 {
        let a = random_set(&mut g, 4, 4.0, 0.25, 0.05);
        let nu_a = nu(&a);
        if nu_a > 0.999 {
            continue;
        }
        cases += 1;
        let p = nu_a + (1.0 - nu_a) * g.random_range(0.001..0.999);
        let i = i_tilde(&a, p).map_err(|e| e.to_string())?.value;
        if i > 0.0 && i.is_finite() {
            shift += 1;
            continue;
        }
        let j = j_tilde(&a, p).map_err(|e| e.to_string())?.value;
        if i.is_infinite() && j > 0.0 && j < 1.0 {
            dilation += 1;
        } else {
            violations.push(format!("{a} p={p}: i={i} j={j}"));
        }
    }
    check(violations.is_empty(), format!("{shift} shift + {dilation} dilation cases, violations: {violations:?}"))
}

fn enumeration_oracle() -> Outcome {
    const REPLICAS: u64 = 1_000_000;
    let law = BranchingLaw::deterministic(2).unwrap();
    let a = set("(-inf,0]");
    let exact = enumerate_exact(2, &law, &a, 1.0).map_err(|e| e.to_string())?;
    let target = BigRational::new(25.into(), 64.into());
    let cfg = StepConfig::default();
    let mut hits = 0u64;
    for i in 0..REPLICAS {
        let mut r = stream(5, "acceptance/enumeration", i);
        let z = advance(&ParticleMeasure::root(), &law, 2, Mode::Exact, &cfg, &mut r).unwrap();
        hits += u64::from(z.max_position() <= 0);
    }
    let p = 25.0 / 64.0;
    let z = (hits as f64 / REPLICAS as f64 - p).abs() / (p * (1.0 - p) / REPLICAS as f64).sqrt();
    check(exact == target && z <= 4.0, format!("enumeration = {exact}; MC {hits}/{REPLICAS} at {z:.2} sd"))
}

fn strategy_pricing() -> Outcome {
    let mut worst = 0.0f64;
    let mut checked = 0;
    for law in ["2:1", "2:0.5,3:0.5", "2:0.25,3:0.75", "2:0.6,4:0.4"] {
        let law: BranchingLaw = law.parse().unwrap();
        // n = 16: w = floor(4|x|), so x in {0, +-0.25, +-0.5} gives s <= 2.
        let specs = [-0.5, -0.25, 0.0, 0.25, 0.5]
            .iter()
            .map(|&x| StrategySpec::shift(x, 16))
            .chain([StrategySpec::dilation(0.0, 2.0 / 16.0, 16), StrategySpec::dilation(0.25, 1.0 / 16.0, 16)]);
        for spec in specs {
            let spec = spec.map_err(|e| e.to_string())?;
            if spec.s > 2 {
                continue;
            }
            let closed = strategy_prefix_logprob(&spec, &law).to_f64();
            let exact = ln_rational(&enumerated_forced_probability(&spec, &law).map_err(|e| e.to_string())?);
            worst = worst.max((closed - exact).abs());
            if spec.q == 0 {
                // For shifts the forced event is the only route to b^s particles at w.
                let measure = ln_rational(&enumerated_target_probability(&spec, &law).map_err(|e| e.to_string())?);
                worst = worst.max((closed - measure).abs());
            }
            checked += 1;
        }
    }
    check(worst <= 1e-12, format!("{checked} strategies with s <= 2, max |log diff| = {worst:.1e}"))
}

fn shift_trend() -> Outcome {
    let t = Instant::now();
    let a = set("(-inf,0]");
    let law = BranchingLaw::binary_ternary();
    let report = classify(&a, 0.8, 2).map_err(|e| e.to_string())?;
    let x = report.x_star.ok_or("no shift witness")?;
    let sim = Simulation::new(Mode::Hybrid { cap: 10_000 }, 2024);
    let mut rows = Vec::new();
    for n in [100u64, 400, 900] {
        let spec = StrategySpec::shift(x, n).map_err(|e| e.to_string())?;
        let e = ldp_lower_bound(&spec, &a, 0.8, &law, 1000, &sim).map_err(|e| e.to_string())?;
        let scale = (n as f64).sqrt() * e.theory_rate;
        let band = ((e.log_neg_log_band.0 / scale - 1.0).abs(), (e.log_neg_log_band.1 / scale - 1.0).abs());
        rows.push((n, e.log_neg_log / scale, e.relative_gap, (band.0 - band.1).abs()));
    }
    let elapsed = t.elapsed();
    // Non-increasing gap up to the interval width of the later point; one larger rise is tolerated.
    let violations = rows.windows(2).filter(|w| w[1].2 - w[0].2 > w[1].3).count();
    let rises_ok = violations <= 1;
    let last = rows.last().unwrap();
    check(
        last.2 <= 0.15 && rises_ok && elapsed < Duration::from_secs(600),
        format!(
            "ratio to ln2*I: {} (gaps {}, CI widths {}, {violations} violation(s)); {elapsed:.0?}",
            rows.iter().map(|r| format!("n={}:{:.3}", r.0, r.1)).collect::<Vec<_>>().join(" "),
            rows.iter().map(|r| format!("{:.3}", r.2)).collect::<Vec<_>>().join("/"),
            rows.iter().map(|r| format!("{:.3}", r.3)).collect::<Vec<_>>().join("/"),
        ),
    )
}

fn dilation_trend() -> Outcome {
    let half = probit(0.75);
    let a = IntervalSet::closed(-half, half).unwrap();
    let law = BranchingLaw::binary_ternary();
    let report = classify(&a, 0.9, 2).map_err(|e| e.to_string())?;
    if report.regime != Regime::Dilation {
        return Err(format!("expected the dilation regime, got {}", report.regime));
    }
    let sim = Simulation::new(Mode::Hybrid { cap: 10_000 }, 2024);
    let mut ratios = Vec::new();
    let mut gap = f64::NAN;
    for n in [60u64, 120, 240] {
        let spec = StrategySpec::dilation(report.x_star_dilation, report.r_star, n).map_err(|e| e.to_string())?;
        let e = ldp_lower_bound(&spec, &a, 0.9, &law, 1000, &sim).map_err(|e| e.to_string())?;
        ratios.push(format!("n={n}:{:.3}", e.log_neg_log / n as f64 / e.theory_rate));
        gap = e.relative_gap;
    }
    check(gap <= 0.2, format!("J = {:.6}, ratio to ln2*J: {}; gap at n=240 {gap:.3}", report.j_tilde, ratios.join(" ")))
}

fn interpolation_exponent() -> Outcome {
    let t = Instant::now();
    let fit = interpolation_cost_exponent(0.75, 0.5, 0.05, 2, &[100, 1_000, 10_000, 100_000], 2, 0.0)
        .map_err(|e| e.to_string())?;
    let elapsed = t.elapsed();
    check(
        (0.70..=0.80).contains(&fit.alpha_hat) && elapsed < Duration::from_secs(60),
        format!(
            "alpha_hat = {:.4} (k = {:?}); {elapsed:.2?}",
            fit.alpha_hat,
            fit.rows.iter().map(|r| r.k).collect::<Vec<_>>()
        ),
    )
}

fn concentration() -> Outcome {
    let law: BranchingLaw = "2:0.999,2000:0.001".parse().unwrap();
    let a = set("(0,inf)");
    let mut sim = Simulation::new(Mode::Aggregated, 10);
    sim.step = StepConfig::exact_in_law();
    let mut points = Vec::new();
    for roots in [100u64, 400, 1600] {
        let r = concentration_probe(roots, &a, 0.05, 16, &law, 10_000, &sim).map_err(|e| e.to_string())?;
        points.push((roots as f64, r));
    }
    let decreasing = points.windows(2).all(|w| w[1].1.frequency < w[0].1.frequency);
    let slope = log_frequency_slope(&points).map_err(|e| e.to_string())?;
    // One-sided 99% normal quantile.
    let upper = slope.upper(2.326_347_874_040_841);
    check(
        decreasing && upper < 0.0,
        format!(
            "frequencies {}; slope {:.3e}, 99% upper bound {upper:.3e}",
            points.iter().map(|(_, r)| format!("{:.4}", r.frequency)).collect::<Vec<_>>().join(" > "),
            slope.slope
        ),
    )
}

fn clt_uniformity() -> Outcome {
    let a = set("(-inf,0]");
    let s25 = clt_uniformity_scan(&a, 2.0, 25, 41).map_err(|e| e.to_string())?.sup_error;
    let s400 = clt_uniformity_scan(&a, 2.0, 400, 41).map_err(|e| e.to_string())?.sup_error;
    // Independent check of one term: at rho = 1, xi = 0 the error is half the central atom.
    let atom = nu_n_of_set(400, &a) - gauss_mass(f64::NEG_INFINITY, 0.0);
    check(
        s400 < s25 && s400 <= 0.05 && s400 >= atom.abs() - 1e-15,
        format!("sup error {s25:.4} at n=25, {s400:.4} at n=400"),
    )
}

fn reproducibility() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_brwlab");
    let runs: [&[&str]; 4] = [
        &["simulate", "--n", "40", "--replicas", "12"],
        &["ldp", "--set", "(-inf,0]", "--p", "0.8", "--n-grid", "36,64,100", "--replicas", "100"],
        &["probe-concentration", "--roots", "50,200", "--replicas", "200"],
        &["probe-typical", "--n-grid", "16,36", "--replicas", "100"],
    ];
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut compared = 0;
    for args in runs {
        let mut outputs = Vec::new();
        for (k, threads) in ["1", "2", "1", "2"].iter().enumerate() {
            let path = dir.path().join(format!("run{k}.csv"));
            let out = Command::new(bin)
                .args(["--seed", "77", "--threads", threads, "--out"])
                .arg(&path)
                .args(args)
                .output()
                .map_err(|e| e.to_string())?;
            if !out.status.success() {
                return Err(format!("{args:?} failed: {}", String::from_utf8_lossy(&out.stderr)));
            }
            outputs.push(std::fs::read(&path).map_err(|e| e.to_string())?);
        }
        if outputs.iter().any(|o| o != &outputs[0] || o.is_empty()) {
            return Err(format!("{} output differs across runs or thread counts", args[0]));
        }
        compared += 1;
    }
    Ok(format!("{compared} subcommands byte-identical over 2 runs x threads 1/2"))
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("gaussian kernel", gaussian_kernel),
        ("simple random walk law", srw_law),
        ("rate-function oracles", rate_oracles),
        ("dichotomy", dichotomy),
        ("exact enumeration", enumeration_oracle),
        ("strategy pricing", strategy_pricing),
        ("shift-regime trend", shift_trend),
        ("dilation-regime trend", dilation_trend),
        ("interpolation exponent", interpolation_exponent),
        ("concentration probe", concentration),
        ("CLT uniformity", clt_uniformity),
        ("reproducibility", reproducibility),
    ];
    // Optional criterion numbers on the command line restrict the run.
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    let mut ran = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        if !only.is_empty() && !only.contains(&(i + 1)) {
            continue;
        }
        ran += 1;
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("criterion {:>2} PASS  {name}: {d} [{secs:.1}s]", i + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {d} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
