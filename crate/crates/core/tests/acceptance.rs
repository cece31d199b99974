//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::time::{Duration, Instant};

use cloneprob::feasibility::{brute_region, feasible_any_flags, SearchConfig};
use cloneprob::gram::gram_of;
use cloneprob::symmetric::{
    build_family, family_overlap, gap_certificate, scenario1_lower, z_max, GapInstance,
};
use cloneprob::twostate::{
    decompose, gamma_totmax_2, ray_boundary, region_feasible, Region2, TwoStateProblem,
};
use cloneprob::{GramMatrix, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

/// Equal-prior optimum vs (1−|αβ|)/(1−|α|^m), 1e−9, under 5 s.
fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0_f64;
    let mut cases = 0;
    for ia in 1..=9 {
        for ib in 1..=9 {
            for m in 2..=4u32 {
                let (a, b) = (ia as f64 / 10.0, ib as f64 / 10.0);
                if a * b <= a.powi(m as i32) {
                    continue;
                }
                let p = TwoStateProblem::equal_priors(a, b, m).unwrap();
                let closed = (1.0 - a * b) / (1.0 - a.powi(m as i32));
                worst = worst.max((gamma_totmax_2(&p).0 - closed).abs());
                cases += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-9 && elapsed < Duration::from_secs(5),
        format!("{cases} cases, max error {worst:.3e}, {elapsed:.2?}"),
    )
}

/// Region inequality vs the PSD existence test with optimal flags on a 0.02 grid, 20 random (η_in, η_out).
fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let cfg = SearchConfig::default();
    let slack_band = 1e-9;
    let mut disagreements = 0;
    let mut checked = 0;
    for _ in 0..20 {
        let (ei, eo): (f64, f64) = (rng.random(), rng.random());
        let region = Region2::new(ei, eo).unwrap();
        let x = GramMatrix::uniform_real(2, ei).unwrap();
        let y = GramMatrix::uniform_real(2, eo).unwrap();
        let brute = brute_region(&x, &y, 0.02, &cfg).unwrap();
        let mut inside = vec![false; 51 * 51];
        for p in &brute {
            let (i, j) = ((p[0] * 50.0).round() as usize, (p[1] * 50.0).round() as usize);
            inside[i * 51 + j] = true;
        }
        for i in 0..=50 {
            for j in 0..=50 {
                let (g1, g2) = (i as f64 / 50.0, j as f64 / 50.0);
                let slack = region.slack(g1, g2);
                let closed = region_feasible(&region, g1, g2).unwrap();
                let oracle = inside[i * 51 + j];
                checked += 1;
                if closed != oracle && slack.abs() > slack_band {
                    disagreements += 1;
                }
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        disagreements == 0 && elapsed < Duration::from_secs(60),
        format!("{checked} grid points, {disagreements} disagreements, {elapsed:.2?}"),
    )
}

/// Two-step decomposition of 200 random achievable points.
fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut failures = 0;
    let mut count = 0;
    let mut worst_slack = f64::INFINITY;
    let mut worst_margin = f64::INFINITY;
    while count < 200 {
        let a: f64 = rng.random_range(0.01..0.95);
        let b: f64 = rng.random_range(0.0..=1.0);
        let m: u32 = rng.random_range(2..=6);
        let p = TwoStateProblem::equal_priors(a, b, m).unwrap();
        let region = p.region();
        let (mut g1, mut g2): (f64, f64) = (rng.random(), rng.random());
        if count % 2 == 1 {
            // push every other sample onto the boundary along its ray
            let t = ray_boundary(&region, [g1, g2]);
            g1 = (t * g1).min(1.0);
            g2 = (t * g2).min(1.0);
        }
        if !region_feasible(&region, g1, g2).unwrap() {
            continue;
        }
        count += 1;
        match decompose(&p, g1, g2) {
            Ok(d) => {
                let bob_ok = d.slack_b >= -1e-9;
                let alice_ok = d.slack_a >= -1e-9;
                let reached = d.achieved[0] >= g1 - 1e-9 && d.achieved[1] >= g2 - 1e-9;
                let in_range = d
                    .gamma_a
                    .iter()
                    .chain(&d.gamma_b)
                    .all(|v| (0.0..=1.0).contains(v));
                worst_slack = worst_slack.min(d.slack_a).min(d.slack_b);
                worst_margin = worst_margin.min(d.margin);
                if !(bob_ok && alice_ok && reached && in_range) {
                    failures += 1;
                }
            }
            Err(_) => failures += 1,
        }
    }
    outcome(
        failures == 0,
        format!(
            "200 instances, {failures} failures, min component slack {worst_slack:.3e}, min margin {worst_margin:.3e}"
        ),
    )
}

/// Scenario I witnesses over the n × m × |α| grid.
fn criterion_4() -> Outcome {
    let mut failures = Vec::new();
    let mut worst = f64::INFINITY;
    for n in 3..=5 {
        for m in 2..=5u32 {
            for a in [0.01, 0.05, 0.1] {
                let inst = GapInstance::new(n, m, a).unwrap();
                match scenario1_lower(&inst) {
                    Ok(w) => {
                        let bound = (n as f64 - 1.0 - a) / (n as f64 - 1.0 - a.powi(m as i32));
                        worst = worst.min(w.total - bound);
                        if !(w.report.feasible && w.total >= bound - 1e-12) {
                            failures.push(format!("({n},{m},{a})"));
                        }
                    }
                    Err(e) => failures.push(format!("({n},{m},{a}): {e}")),
                }
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!("36 witnesses, min total − bound {worst:.3e}, failures {failures:?}"),
    )
}

/// n=3, m=2, |α|=0.1 gap reproduction.
fn criterion_5() -> Outcome {
    // evaluated independently of the crate before the build
    let (lower, upper, gap) = (0.954_773_869_346_733_6, 0.918_367_346_938_775_5, 0.036_406_522_407_958_16);
    let c = gap_certificate(&GapInstance::new(3, 2, 0.1).unwrap()).unwrap();
    let errs = [
        (c.lower_i - lower).abs(),
        (c.upper_ii - upper).abs(),
        (c.gap_lower_bound - gap).abs(),
    ];
    let identity = ((c.lower_i - c.upper_ii) - c.gap_lower_bound).abs();
    outcome(
        errs.iter().all(|e| *e <= 1e-9) && identity <= 1e-12 && c.positive,
        format!(
            "lower {:.6} upper {:.6} gap {:.6}, identity residual {identity:.3e}",
            c.lower_i, c.upper_ii, c.gap_lower_bound
        ),
    )
}

/// Support obstruction for the dependent supplements, n = 3..8, k = 1..3.
fn criterion_6() -> Outcome {
    let cfg = SearchConfig::default();
    let mut failures = Vec::new();
    let mut probes = 0;
    for n in 3..=8usize {
        let beta = -1.0 / (n as f64 - 1.0);
        let (_, phi) = build_family(n, beta).unwrap();
        let x = gram_of(&phi);
        let inst = GapInstance::new(n, 2, 0.5 / (n as f64 - 1.0)).unwrap();
        for k in 1..=3u32 {
            let y = inst.copies_gram(k);
            let killed = cloneprob::feasibility::killed_support(&x, &y, 1e-9).unwrap();
            if killed.len() != n {
                failures.push(format!("n={n} k={k}: killed {killed:?}"));
            }
            for j in 0..n {
                let mut gammas = vec![0.0; n];
                gammas[j] = 1e-3;
                probes += 1;
                if feasible_any_flags(&x, &y, &gammas, &cfg).unwrap().feasible {
                    failures.push(format!("n={n} k={k}: gamma_{j} = 1e-3 accepted"));
                }
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!("18 (n,k) pairs, {probes} single-index probes, failures {failures:?}"),
    )
}

/// Overlap-curve endpoints and family Gram accuracy up to n = 50.
fn criterion_7() -> Outcome {
    let mut worst_end = 0.0_f64;
    let mut worst_gram = 0.0_f64;
    let mut errors = Vec::new();
    for n in 2..=50usize {
        let floor = -1.0 / (n as f64 - 1.0);
        worst_end = worst_end
            .max(family_overlap(n, 0.0).abs())
            .max((family_overlap(n, z_max(n)) - floor).abs());
        for frac in [0.0, 0.25, 0.5, 0.9, 1.0] {
            let target = frac * floor;
            match build_family(n, target) {
                Ok((_, states)) => {
                    let g = gram_of(&states);
                    for i in 0..n {
                        for j in 0..n {
                            if i != j {
                                worst_gram = worst_gram
                                    .max((g.entry(i, j) - C64::new(target, 0.0)).norm());
                            }
                        }
                    }
                }
                Err(e) => errors.push(format!("n={n} target={target}: {e}")),
            }
        }
    }
    outcome(
        worst_end <= 1e-12 && worst_gram <= 1e-10 && errors.is_empty(),
        format!("endpoint error {worst_end:.3e}, Gram error {worst_gram:.3e}, errors {errors:?}"),
    )
}

/// m = 60 equal-prior optimum vs the discrimination value 1 − |αβ|.
fn criterion_8() -> Outcome {
    let mut worst = 0.0_f64;
    for ia in 1..=6 {
        for b in [0.2, 0.5, 0.8, 1.0] {
            let a = ia as f64 / 10.0;
            let p = TwoStateProblem::equal_priors(a, b, 60).unwrap();
            worst = worst.max((gamma_totmax_2(&p).0 - (1.0 - a * b)).abs());
        }
    }
    outcome(worst <= 1e-12, format!("|alpha| in 0.1..0.6, max error {worst:.3e}"))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 equal-prior two-state optimum", criterion_1),
        ("2 region inequality vs flag-optimized PSD test", criterion_2),
        ("3 two-step decomposition", criterion_3),
        ("4 scenario I witnesses", criterion_4),
        ("5 gap reproduction n=3 m=2 |alpha|=0.1", criterion_5),
        ("6 support obstruction", criterion_6),
        ("7 symmetric family endpoints", criterion_7),
        ("8 discrimination limit", criterion_8),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let o = run();
        println!("[{}] criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
