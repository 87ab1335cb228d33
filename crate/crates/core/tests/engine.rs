//! Statistical and structural properties of the simulator.

use brwlab::brw::{
    advance, empirical_fraction, enumerate_exact, evolve, step_aggregated, step_exact, BranchingLaw, Mode,
    ParticleMeasure, StepConfig,
};
use brwlab::rng::stream;
use brwlab::stats::ks_two_sample;
use brwlab::IntervalSet;
use num_traits::ToPrimitive;
use proptest::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn set(s: &str) -> IntervalSet {
    s.parse().unwrap()
}

fn total(z: &ParticleMeasure) -> u64 {
    z.total_u64().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn parity_and_support_in_every_mode(seed in any::<u64>(), n in 0u64..40, mode in 0usize..3) {
        let mode = [Mode::Exact, Mode::Aggregated, Mode::Hybrid { cap: 300 }][mode];
        let law = BranchingLaw::binary_ternary();
        let mut rng = stream(seed, "parity", 0);
        let cfg = StepConfig { particle_cap: 1 << 40, ..StepConfig::default() };
        let mode = if n > 12 && mode == Mode::Exact { Mode::Hybrid { cap: 10_000 } } else { mode };
        let z = advance(&ParticleMeasure::root(), &law, n, mode, &cfg, &mut rng).unwrap();
        prop_assert_eq!(z.generation(), n);
        prop_assert!(z.iter().all(|(x, _)| (x - n as i64) % 2 == 0 && x.unsigned_abs() <= n));
        prop_assert!(z.ln_total() >= n as f64 * 2f64.ln() - 1e-9);
    }

    #[test]
    fn single_step_support(seed in any::<u64>(), c in 1u64..200, x in -5i64..5) {
        let law: BranchingLaw = "2:0.3,4:0.7".parse().unwrap();
        let zeta = ParticleMeasure::delta(x, c, 3).unwrap();
        let mut rng = stream(seed, "support", 0);
        for z in [
            step_exact(&zeta, &law, &StepConfig::default(), &mut rng).unwrap(),
            step_aggregated(&zeta, &law, &StepConfig::default(), &mut rng),
        ] {
            prop_assert_eq!(z.generation(), 4);
            prop_assert!(z.min_position() >= x - 1 && z.max_position() <= x + 1);
            let t = total(&z);
            prop_assert!(t >= 2 * c && t <= 4 * c);
        }
        // Below the aggregation threshold the offspring sum is exact, hence even.
        if c <= StepConfig::default().offspring_exact_max {
            let z = step_aggregated(&zeta, &law, &StepConfig::default(), &mut rng);
            prop_assert_eq!(total(&z) % 2, 0);
        }
    }
}

#[test]
fn deterministic_binary_examples() {
    let law = BranchingLaw::deterministic(2).unwrap();
    let mut rng = stream(1, "binary", 0);
    let z = step_exact(&ParticleMeasure::root(), &law, &StepConfig::default(), &mut rng).unwrap();
    assert_eq!(total(&z), 2);
    assert!(z.iter().all(|(x, _)| x == -1 || x == 1));
    for mode in [Mode::Exact, Mode::Aggregated, Mode::Hybrid { cap: 100 }] {
        let z = advance(&ParticleMeasure::root(), &law, 10, mode, &StepConfig::default(), &mut rng).unwrap();
        assert_eq!(total(&z), 1024, "{mode}");
    }
    // Doubling is exact far beyond the normal-approximation thresholds.
    let big = ParticleMeasure::delta(0, 10u64.pow(12), 0).unwrap();
    let z = step_aggregated(&big, &law, &StepConfig::default(), &mut rng);
    assert_eq!(total(&z), 2 * 10u64.pow(12));
}

#[test]
fn aggregated_matches_exact_for_small_counts() {
    // Totals after one step from 40 particles; chi-square homogeneity over shared bins.
    const REPLICAS: u64 = 10_000;
    let law = BranchingLaw::binary_ternary();
    let zeta = ParticleMeasure::delta(0, 40u64, 0).unwrap();
    let cfg = StepConfig::default();
    let mut exact = vec![0u64; 41];
    let mut agg = vec![0u64; 41];
    for i in 0..REPLICAS {
        let mut r = stream(3, "chi/exact", i);
        exact[(total(&step_exact(&zeta, &law, &cfg, &mut r).unwrap()) - 80) as usize] += 1;
        let mut r = stream(3, "chi/aggregated", i);
        agg[(total(&step_aggregated(&zeta, &law, &cfg, &mut r)) - 80) as usize] += 1;
    }
    // Pool sparse tails so that every bin expects at least five counts.
    let mut bins = Vec::new();
    let (mut e, mut a) = (0u64, 0u64);
    for k in 0..=40 {
        e += exact[k];
        a += agg[k];
        if e + a >= 20 {
            bins.push((e, a));
            e = 0;
            a = 0;
        }
    }
    if let Some(last) = bins.last_mut() {
        last.0 += e;
        last.1 += a;
    }
    let stat: f64 = bins
        .iter()
        .map(|&(e, a)| {
            let expect = (e + a) as f64 / 2.0;
            ((e as f64 - expect).powi(2) + (a as f64 - expect).powi(2)) / expect
        })
        .sum();
    let df = (bins.len() - 1) as f64;
    let pvalue = 1.0 - ChiSquared::new(df).unwrap().cdf(stat);
    assert!(pvalue > 0.01, "chi-square {stat:.2} on {df} df, p = {pvalue:.4}");
}

#[test]
fn normalized_total_is_a_martingale() {
    const REPLICAS: u64 = 10_000;
    let law = BranchingLaw::binary_ternary();
    let cfg = StepConfig::default();
    let mut paths = Vec::with_capacity(REPLICAS as usize);
    for i in 0..REPLICAS {
        let mut r = stream(4, "martingale", i);
        let t = evolve(&ParticleMeasure::root(), &law, 10, Mode::Exact, &cfg, None, &mut r).unwrap();
        paths.push(t.stats.iter().map(|s| s.normalized_total).collect::<Vec<_>>());
    }
    let n = REPLICAS as f64;
    let moments = |g: usize| {
        let mean = paths.iter().map(|p| p[g]).sum::<f64>() / n;
        let var = paths.iter().map(|p| (p[g] - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, var)
    };
    let (mean, var) = moments(10);
    let se = (var / n).sqrt();
    assert!((mean - 1.0).abs() <= 3.0 * se, "mean {mean} se {se}");
    // Var W_{g+1} - Var W_g = E Var(W_{g+1} | F_g) > 0; check each step up to three standard errors.
    for g in 0..10 {
        let d: Vec<f64> = paths.iter().map(|p| p[g + 1].powi(2) - p[g].powi(2)).collect();
        let dm = d.iter().sum::<f64>() / n;
        let dse = (d.iter().map(|v| (v - dm).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt();
        let diff = moments(g + 1).1 - moments(g).1;
        assert!(diff >= -3.0 * dse, "variance fell at generation {g}: {diff:e} (se {dse:e})");
    }
    // Closed form: Var W_n = sigma^2 / (beta^2 - beta) (1 - beta^-n) = 0.25/3.75 (1 - 2.5^-10).
    let theory = 0.25 / 3.75 * (1.0 - 2.5f64.powi(-10));
    assert!((var - theory).abs() < 0.1 * theory, "variance {var} vs {theory}");
}

#[test]
fn exact_and_hybrid_fractions_agree() {
    const REPLICAS: u64 = 5_000;
    let law = BranchingLaw::binary_ternary();
    let a = set("(-inf,0]");
    let cfg = StepConfig::default();
    let run = |mode: Mode, domain: &str| -> Vec<f64> {
        (0..REPLICAS)
            .map(|i| {
                let mut r = stream(5, domain, i);
                let z = advance(&ParticleMeasure::root(), &law, 8, mode, &cfg, &mut r).unwrap();
                empirical_fraction(&z, 8, &a)
            })
            .collect()
    };
    let (d, p) = ks_two_sample(&run(Mode::Exact, "ks/exact"), &run(Mode::Hybrid { cap: 500 }, "ks/hybrid"));
    assert!(p > 0.01, "KS D = {d:.4}, p = {p:.4}");
}

#[test]
fn law_of_large_numbers_at_400() {
    // Half of the atom at the origin is counted, which removes the lattice bias
    // of the closed half-line. Single runs fluctuate on the 1/sqrt(n) scale, so
    // the check is on the replica mean and on how the spread scales.
    let law = BranchingLaw::binary_ternary();
    let closed = set("(-inf,0]");
    let open = set("(-inf,0)");
    let sample = |n: u64| -> (f64, f64) {
        let v: Vec<f64> = (0..100)
            .map(|i| {
                let mut r = stream(6, &format!("lln/{n}"), i);
                let z = advance(&ParticleMeasure::root(), &law, n, Mode::Aggregated, &StepConfig::default(), &mut r)
                    .unwrap();
                let f = empirical_fraction(&z, n, &closed);
                let g = empirical_fraction(&z, n, &open);
                assert!(f >= g);
                0.5 * (f + g)
            })
            .collect();
        let m = v.iter().sum::<f64>() / v.len() as f64;
        let sd = (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt();
        (m, sd)
    };
    let (m400, sd400) = sample(400);
    let (_, sd100) = sample(100);
    assert!((m400 - 0.5).abs() <= 0.02, "mean fraction {m400}");
    assert!((m400 - 0.5).abs() <= 3.0 * sd400 / 10.0, "mean fraction {m400}, sd {sd400}");
    let ratio = sd100 / sd400;
    assert!((1.5..2.7).contains(&ratio), "spread ratio n=100/n=400 is {ratio}, expected about 2");
}

#[test]
fn enumeration_matches_monte_carlo() {
    const REPLICAS: u64 = 1_000_000;
    let cases = [
        (2u64, "2:1", "(-inf,0]", 1.0),
        (2, "2:0.5,3:0.5", "(0,inf)", 0.5),
        (1, "2:0.25,5:0.75", "[-0.5,0.5] U [1,inf)", 0.6),
        (2, "2:0.5,3:0.5", "(-inf,-1]", 0.25),
    ];
    for (n, law, a, p) in cases {
        let law: BranchingLaw = law.parse().unwrap();
        let a = set(a);
        let exact = enumerate_exact(n, &law, &a, p).unwrap().to_f64().unwrap();
        let hits = (0..REPLICAS)
            .filter(|&i| {
                let mut r = stream(7, "enumeration", i);
                let z =
                    advance(&ParticleMeasure::root(), &law, n, Mode::Exact, &StepConfig::default(), &mut r).unwrap();
                empirical_fraction(&z, n, &a) >= p
            })
            .count();
        let sd = (exact * (1.0 - exact) / REPLICAS as f64).sqrt();
        let freq = hits as f64 / REPLICAS as f64;
        assert!((freq - exact).abs() <= 4.0 * sd, "n={n} {a} p={p}: MC {freq} vs exact {exact}");
    }
}

#[test]
fn snapshot_round_trip_after_simulation() {
    let law = BranchingLaw::binary_ternary();
    let mut r = stream(8, "snapshot", 0);
    let z = advance(&ParticleMeasure::root(), &law, 30, Mode::Aggregated, &StepConfig::default(), &mut r).unwrap();
    let back = ParticleMeasure::parse_snapshot(&z.snapshot(), 30).unwrap();
    assert_eq!(back, z);
}
