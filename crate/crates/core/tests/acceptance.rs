//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line.

use std::io::Write;
use std::path::Path;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use pibo_core::acquisition::{ei, pi, pick_maximizer, PriorBinning};
use pibo_core::harness::{run_experiment, run_repetitions, ExperimentConfig};
use pibo_core::optimizer::{run, FnObjective, InitMode, OptimizerConfig};
use pibo_core::surrogate::{fit_surrogate, GpPosterior, KernelFamily, KernelSpec, ObservationSet};
use pibo_core::theory::{bound_grid, c_from_ratio, c_pi_n, verify_sandwich, BoundConvention, BoundQuery};
use pibo_core::{
    AcquisitionKind, AcquisitionSpec, Benchmark, DecaySchedule, Prior, PriorComponent, PriorWeighting,
    RegretTrace, SearchSpace, SurrogateConfig, SurrogateKind,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

static SERIAL: Mutex<()> = Mutex::new(());

fn report(id: u32, name: &str, pass: bool, detail: &str, elapsed: Duration, limit: Duration) {
    let ok = pass && elapsed <= limit;
    // Written to the raw handle so the line shows without --nocapture.
    let _ = writeln!(
        std::io::stderr(),
        "{} [{id}] {name}: {detail} ({:.2}s, limit {:.0}s)",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        limit.as_secs_f64()
    );
    assert!(ok, "criterion {id} failed: {detail}");
}

fn lock() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

// ---------- independent oracles ----------

fn oracle_kernel(family: KernelFamily, ls: &[f64], sigma: f64, a: &[f64], b: &[f64]) -> f64 {
    let r2: f64 = a.iter().zip(b).zip(ls).map(|((x, y), l)| ((x - y) / l) * ((x - y) / l)).sum();
    let r = r2.sqrt();
    let rho = match family {
        KernelFamily::Matern52 => (1.0 + 5f64.sqrt() * r + 5.0 * r2 / 3.0) * (-(5f64.sqrt()) * r).exp(),
        KernelFamily::Gaussian => (-r2 / 2.0).exp(),
    };
    sigma * sigma * rho
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

fn rand_points(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..d).map(|_| rng.random::<f64>()).collect()).collect()
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn log10_regret(r: f64) -> f64 {
    (r.max(0.0) + 1e-12).log10()
}

// ---------- 1 ----------

#[test]
fn c01_gp_matches_dense_oracle() {
    let _g = lock();
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    let mut checked = 0;
    for inst in 0..50 {
        let n = rng.random_range(1..=20);
        let d = rng.random_range(1..=4);
        let family = if inst % 2 == 0 { KernelFamily::Matern52 } else { KernelFamily::Gaussian };
        let ls: Vec<f64> = (0..d).map(|_| rng.random_range(0.1..1.0)).collect();
        let sigma = rng.random_range(0.5..2.0);
        let noise = 10f64.powf(rng.random_range(-4.0..-2.0));
        let xs = rand_points(&mut rng, n, d);
        let ys: Vec<f64> = (0..n).map(|_| normal(&mut rng)).collect();
        let gp = GpPosterior::fit(
            &ObservationSet::new(xs.clone(), ys.clone()).unwrap(),
            KernelSpec::new(family, ls.clone(), sigma).unwrap(),
            noise,
        )
        .unwrap();
        let shift = noise + gp.jitter();
        let k: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| oracle_kernel(family, &ls, sigma, &xs[i], &xs[j]) + if i == j { shift } else { 0.0 })
                    .collect()
            })
            .collect();
        let alpha = gauss_solve(k.clone(), ys.clone());
        for x in rand_points(&mut rng, 10, d) {
            let ks: Vec<f64> = xs.iter().map(|p| oracle_kernel(family, &ls, sigma, p, &x)).collect();
            let m: f64 = ks.iter().zip(&alpha).map(|(a, b)| a * b).sum();
            let v_solve = gauss_solve(k.clone(), ks.clone());
            let v = sigma * sigma - ks.iter().zip(&v_solve).map(|(a, b)| a * b).sum::<f64>();
            let (gm, gv) = gp.predict(&x);
            worst = worst
                .max((gm - m).abs() / m.abs().max(1e-12))
                .max((gv - v).abs() / v.abs().max(1e-12));
            checked += 1;
        }
    }
    report(
        1,
        "GP posterior vs dense-solve oracle",
        worst < 1e-8,
        &format!("{checked} predictions, max relative error {worst:.2e} (tol 1e-8)"),
        t.elapsed(),
        Duration::from_secs(5),
    );
}

// ---------- 2 ----------

/// Composite Simpson on E[(inc - Y)+] over y in [mean - 12 sd, inc].
fn quad_ei(m: f64, sd: f64, inc: f64) -> f64 {
    let lo = m - 12.0 * sd;
    if inc <= lo {
        return 0.0;
    }
    let k = 200_000;
    let h = (inc - lo) / k as f64;
    let f = |y: f64| (inc - y) * (-0.5 * ((y - m) / sd).powi(2)).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt());
    let mut s = f(lo) + f(inc);
    for i in 1..k {
        s += f(lo + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn c02_ei_matches_monte_carlo() {
    let _g = lock();
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst_z = 0.0f64;
    let mut worst_quad = 0.0f64;
    for _ in 0..20 {
        let m = rng.random_range(-2.0..2.0);
        let sd = rng.random_range(0.1..3.0);
        let inc = m + sd * rng.random_range(-3.0..3.0);
        let draws = 1_000_000;
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..draws {
            let y = m + sd * normal(&mut rng);
            let g = (inc - y).max(0.0);
            s += g;
            s2 += g * g;
        }
        let est = s / draws as f64;
        let var = (s2 / draws as f64 - est * est) * draws as f64 / (draws - 1) as f64;
        let se = (var / draws as f64).sqrt();
        worst_quad = worst_quad.max((ei(m, sd, inc) - quad_ei(m, sd, inc)).abs());
        worst_z = worst_z.max((ei(m, sd, inc) - est).abs() / se);
    }
    report(
        2,
        "closed-form EI vs Monte Carlo",
        worst_z <= 3.0,
        &format!("20 triples x 1e6 draws, max |error| = {worst_z:.2} SE (tol 3); quadrature gap {worst_quad:.1e}"),
        t.elapsed(),
        Duration::from_secs(10),
    );
}

// ---------- 3 ----------

#[test]
fn c03_sandwich_property_fuzz() {
    let _g = lock();
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut violations = 0;
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let d = rng.random_range(1..=3);
        let n = rng.random_range(1..=15);
        let family = if rng.random::<bool>() { KernelFamily::Matern52 } else { KernelFamily::Gaussian };
        let xs = rand_points(&mut rng, n, d);
        let ys: Vec<f64> = (0..n).map(|_| normal(&mut rng)).collect();
        let incumbent = ys.iter().copied().fold(f64::INFINITY, f64::min);
        let ls = rng.random_range(0.05..1.0);
        let gp = GpPosterior::fit(
            &ObservationSet::new(xs, ys).unwrap(),
            KernelSpec::isotropic(family, d, ls, 1.0).unwrap(),
            1e-6,
        )
        .unwrap();
        let comps = (0..d)
            .map(|_| {
                if rng.random::<f64>() < 0.2 {
                    PriorComponent::Uniform
                } else {
                    PriorComponent::TruncatedGaussian {
                        mu: rng.random_range(-0.2..1.2),
                        sigma: 10f64.powf(rng.random_range(-2.0..0.5)),
                    }
                }
            })
            .collect();
        let prior = Prior::new(SearchSpace::unit(d), comps).unwrap();
        let schedule = DecaySchedule::new(rng.random_range(0.1..50.0)).unwrap();
        let iter = rng.random_range(1..=100);
        let grid = rand_points(&mut rng, 256, d);
        let r = verify_sandwich(&gp, &prior, schedule, iter, &grid, incumbent).unwrap();
        violations += r.violations;
        worst = worst.max(r.max_relative_violation);
    }
    report(
        3,
        "sandwich min pi_n EI <= EI_pi <= max pi_n EI",
        violations == 0,
        &format!("100 states x 256 points, {violations} violations, worst {worst:.1e} (tol 1e-12)"),
        t.elapsed(),
        Duration::from_secs(30),
    );
}

// ---------- 4 ----------

#[test]
fn c04_bound_constant_properties() {
    let _g = lock();
    let t = Instant::now();
    let mut fails = Vec::new();

    let flat = Prior::uniform(SearchSpace::unit(2));
    let c_flat = c_pi_n(&BoundQuery { prior: &flat, beta: 10.0, n: 7, grid_resolution: None }).unwrap();
    if c_flat != 1.0 {
        fails.push(format!("uniform prior gives {c_flat}"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(404);
    for _ in 0..200 {
        let ratio = 10f64.powf(rng.random_range(0.0..6.0));
        let beta_cap = if ratio > 1.0 { (690.0 / ratio.ln()).min(100.0) } else { 100.0 };
        let beta = rng.random_range(0.1..beta_cap);
        let n = rng.random_range(1..500u64);
        let c = c_from_ratio(ratio, beta, n);
        let direct = ratio.powf(beta / n as f64);
        if (c - direct).abs() > 1e-12 * direct {
            fails.push(format!("exponentiation mismatch at ratio {ratio}"));
        }
        let root = c_from_ratio(ratio, beta, 1).powf(1.0 / n as f64);
        if (c - root).abs() > 1e-9 * c {
            fails.push(format!("C(beta,n) != C(beta,1)^(1/n) at ratio {ratio}, beta {beta}, n {n}"));
        }
    }

    let betas: Vec<f64> = (1..=20).map(|i| i as f64 * 2.5).collect();
    let ns: Vec<u64> = (1..=20).map(|i| i * 5).collect();
    let ratios = [1.5, 10.0, 1e3];
    for (ri, &ratio) in ratios.iter().enumerate() {
        for (bi, &b) in betas.iter().enumerate() {
            for (ni, &n) in ns.iter().enumerate() {
                let c = c_from_ratio(ratio, b, n);
                if ni > 0 && c > c_from_ratio(ratio, b, ns[ni - 1]) {
                    fails.push(format!("not non-increasing in n at beta {b}, n {n}"));
                }
                if bi > 0 && c < c_from_ratio(ratio, betas[bi - 1], n) {
                    fails.push(format!("not non-decreasing in beta at beta {b}, n {n}"));
                }
                if ri > 0 && c < c_from_ratio(ratios[ri - 1], b, n) {
                    fails.push(format!("not non-decreasing in ratio at {ratio}"));
                }
            }
        }
    }

    let sharp = Prior::gaussian(SearchSpace::unit(1), &[0.5], &[0.05]).unwrap();
    let c_far = c_pi_n(&BoundQuery { prior: &sharp, beta: 10.0, n: 1_000_000_000, grid_resolution: None }).unwrap();
    if !(c_far - 1.0 < 1e-6) {
        fails.push(format!("C at n = 1e9 is {c_far}"));
    }

    report(
        4,
        "bound constant C_pi,n",
        fails.is_empty(),
        &if fails.is_empty() {
            format!("uniform C = 1, 200 random identities, 3x20x20 monotonicity grid, C(n=1e9) - 1 = {:.1e}", c_far - 1.0)
        } else {
            format!("{} problems, first: {}", fails.len(), fails[0])
        },
        t.elapsed(),
        Duration::from_secs(5),
    );
}

// ---------- 5 ----------

#[test]
fn c05_bound_grid_region() {
    let _g = lock();
    let t = Instant::now();
    let sigmas: Vec<f64> = (1..=50).map(|i| i as f64 / 100.0).collect();
    let betas: Vec<f64> = (1..=50).map(f64::from).collect();
    let grid = bound_grid(&sigmas, &betas, 50).unwrap();
    let frac = grid.fraction_at_most(1.25, BoundConvention::Normalized);
    let frac_u = grid.fraction_at_most(1.25, BoundConvention::Unnormalized);
    report(
        5,
        "share of (sigma, beta) cells with C <= 1.25 at n = 50",
        frac >= 0.40,
        &format!(
            "normalized {:.1}%, unnormalized {:.1}% of 50x50 cells (need >= 40%)",
            100.0 * frac,
            100.0 * frac_u
        ),
        t.elapsed(),
        Duration::from_secs(5),
    );
}

// ---------- 6 ----------

fn quick_config(m: usize, n: usize, kind: AcquisitionKind, seed: u64) -> OptimizerConfig {
    let mut c = OptimizerConfig::new(m, n);
    c.seed = seed;
    c.acquisition = AcquisitionSpec::new(kind);
    c.surrogate.mle.restarts = 3;
    c.surrogate.mle.evals_per_restart = 80;
    c
}

fn max_point_gap(a: &RegretTrace, b: &RegretTrace) -> f64 {
    assert_eq!(a.records.len(), b.records.len());
    a.records
        .iter()
        .zip(&b.records)
        .flat_map(|(r, s)| r.point.iter().zip(&s.point).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max)
}

#[test]
fn c06_invariances() {
    let _g = lock();
    let t = Instant::now();
    let branin = Benchmark::by_name("branin").unwrap();
    let mut notes = Vec::new();
    let mut ok = true;

    // (a) uniform prior reproduces vanilla BO exactly.
    let mut a_exact = true;
    for (kind, seed) in [(AcquisitionKind::Ei, 1), (AcquisitionKind::Ts, 2), (AcquisitionKind::Ucb, 3)] {
        let vanilla = quick_config(3, 8, kind, seed);
        let mut weighted = vanilla.clone();
        let flat = Prior::uniform(branin.space().clone());
        weighted.acquisition = weighted.acquisition.with_prior(PriorWeighting::new(flat.clone(), 10.0).unwrap());
        let a = run(&vanilla, None, &branin).unwrap();
        let b = run(&weighted, Some(&flat), &branin).unwrap();
        a_exact &= a.records == b.records;
    }
    ok &= a_exact;
    notes.push(format!("(a) identical={a_exact}"));

    // (b) UCB and TS selections under y + c.
    let mut b_gap = 0.0f64;
    for kind in [AcquisitionKind::Ucb, AcquisitionKind::Ts] {
        let cfg = quick_config(3, 8, kind, 11);
        let base = run(&cfg, None, &branin).unwrap();
        for c in [100.0, -100.0] {
            let shifted = FnObjective {
                space: branin.space().clone(),
                f: |x: &[f64]| branin.value_unchecked(x) + c,
                known_minimum: None,
            };
            let s = run(&cfg, None, &shifted).unwrap();
            b_gap = b_gap.max(max_point_gap(&base, &s));
        }
    }
    ok &= b_gap <= 1e-9;
    notes.push(format!("(b) max coordinate gap {b_gap:.1e}"));

    // (c) EI/PI unchanged by augmentation.
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut c_worst = 0.0f64;
    let cfg = SurrogateConfig { kind: SurrogateKind::GpFixed, ..SurrogateConfig::default() };
    for _ in 0..20 {
        let d = rng.random_range(1..=3);
        let n = rng.random_range(2..=15);
        let xs = rand_points(&mut rng, n, d);
        let ys: Vec<f64> = (0..n).map(|_| 5.0 * normal(&mut rng) + 3.0).collect();
        let best = ys.iter().copied().fold(f64::INFINITY, f64::min);
        let aug: Vec<f64> = ys.iter().map(|y| y - best).collect();
        let raw = fit_surrogate(&cfg, &xs, &ys, &mut rng).unwrap();
        let shifted = fit_surrogate(&cfg, &xs, &aug, &mut rng).unwrap();
        for x in rand_points(&mut rng, 50, d) {
            let (m, v) = raw.predict(&x);
            let (ma, va) = shifted.predict(&x);
            c_worst = c_worst
                .max((ei(m, v.sqrt(), best) - ei(ma, va.sqrt(), 0.0)).abs())
                .max((pi(m, v.sqrt(), best) - pi(ma, va.sqrt(), 0.0)).abs());
        }
    }
    ok &= c_worst <= 1e-9;
    notes.push(format!("(c) max EI/PI change {c_worst:.1e}"));

    report(
        6,
        "invariance suite",
        ok,
        &notes.join(", "),
        t.elapsed(),
        Duration::from_secs(30),
    );
}

// ---------- 7 ----------

fn regret_study_config(strategy: &str, quality: &str, iterations: usize, init_mode: Option<&str>) -> ExperimentConfig {
    let mut text = format!(
        "[experiment]\nbenchmark = \"branin\"\nstrategy = \"{strategy}\"\nrepetitions = 20\nseed = 2024\noutput_dir = \"unused\"\n\n\
         [optimizer]\ninitial_design = 3\niterations = {iterations}\nbeta = 10.0\n"
    );
    if let Some(m) = init_mode {
        text.push_str(&format!("init_mode = \"{m}\"\n"));
    }
    if !quality.is_empty() {
        text.push_str(&format!("\n[prior]\nquality = \"{quality}\"\n"));
    }
    ExperimentConfig::from_toml_str(&text, &[]).unwrap()
}

fn traces(config: &ExperimentConfig) -> Vec<RegretTrace> {
    run_repetitions(config)
        .unwrap()
        .into_iter()
        .map(|o| o.result.unwrap())
        .collect()
}

fn log_regret_at(ts: &[RegretTrace], bo_iter: usize) -> Vec<f64> {
    ts.iter()
        .map(|t| log10_regret(t.after_bo_iterations(bo_iter).unwrap().regret.unwrap()))
        .collect()
}

fn win_rate(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).filter(|(x, y)| x < y).count() as f64 / a.len() as f64
}

#[test]
fn c07_regret_study() {
    let _g = lock();
    let t = Instant::now();
    let strong = traces(&regret_study_config("pibo", "strong", 50, None));
    let vanilla_mode = traces(&regret_study_config("vanilla_bo", "strong", 25, Some("uniform_with_mode")));
    let prior_sampling = traces(&regret_study_config("prior_sampling", "strong", 50, None));
    let wrong = traces(&regret_study_config("pibo", "wrong", 100, None));
    let vanilla = traces(&regret_study_config("vanilla_bo", "", 100, Some("uniform")));

    let (s25, v25) = (log_regret_at(&strong, 25), log_regret_at(&vanilla_mode, 25));
    let w1 = win_rate(&s25, &v25);
    let (s50, p50) = (log_regret_at(&strong, 50), log_regret_at(&prior_sampling, 50));
    let w2 = win_rate(&s50, &p50);
    let (wr, va) = (mean(&log_regret_at(&wrong, 100)), mean(&log_regret_at(&vanilla, 100)));
    let ok1 = w1 >= 0.7 && mean(&s25) < mean(&v25);
    let ok2 = w2 >= 0.7 && mean(&s50) < mean(&p50);
    let ok3 = (wr - va).abs() <= 1.0;
    report(
        7,
        "Branin regret study (20 seeds)",
        ok1 && ok2 && ok3,
        &format!(
            "(i) strong vs mode-init EI @25: win {w1:.2}, mean {:.2} vs {:.2}; \
             (ii) strong vs prior sampling @50: win {w2:.2}, mean {:.2} vs {:.2}; \
             (iii) wrong vs vanilla @100: {wr:.2} vs {va:.2}",
            mean(&s25),
            mean(&v25),
            mean(&s50),
            mean(&p50)
        ),
        t.elapsed(),
        Duration::from_secs(15 * 60),
    );
}

// ---------- 8 ----------

#[test]
fn c08_proposals_leave_the_prior() {
    let _g = lock();
    let t = Instant::now();
    let bench = Benchmark::by_name("log_branin_1d").unwrap();
    let mode = 0.0;
    let prior = Prior::gaussian(bench.space().clone(), &[mode], &[1.5]).unwrap();
    let (mut early, mut late) = (Vec::new(), Vec::new());
    for seed in 0..20 {
        let mut c = OptimizerConfig::new(2, 9);
        c.seed = 800 + seed;
        c.init_mode = InitMode::Uniform;
        c.acquisition = AcquisitionSpec::new(AcquisitionKind::Ei).with_prior(PriorWeighting::new(prior.clone(), 2.0).unwrap());
        let tr = run(&c, Some(&prior), &bench).unwrap();
        let bo: Vec<f64> = tr.records[2..].iter().map(|r| (r.point[0] - mode).abs()).collect();
        early.extend_from_slice(&bo[0..3]);
        late.extend_from_slice(&bo[6..9]);
    }
    let (e, l) = (mean(&early), mean(&late));
    report(
        8,
        "1-D log-Branin proposals drift away from the prior mode",
        l > e,
        &format!("mean |x - mode|: iterations 1-3 {e:.3}, iterations 7-9 {l:.3}"),
        t.elapsed(),
        Duration::from_secs(120),
    );
}

// ---------- 9 ----------

#[test]
fn c09_binning_and_tie_breaking() {
    let _g = lock();
    let t = Instant::now();
    let space = SearchSpace::unit(1);
    let prior = Prior::gaussian(space, &[0.5], &[0.1]).unwrap();
    let binning = PriorBinning::new(&prior, PriorBinning::DEFAULT_BINS).unwrap();
    let schedule = DecaySchedule::new(10.0).unwrap();
    let grid: Vec<f64> = (0..10_000).map(|i| i as f64 / 9_999.0).collect();
    let logs: Vec<f64> = grid.iter().map(|x| prior.log_density(&[*x]).unwrap()).collect();
    let mut ok = true;
    let mut prev_k = u32::MAX;
    let mut ks = Vec::new();
    for n in 1..=100 {
        let gamma = schedule.gamma(n);
        let mut vals: Vec<f64> = logs.iter().map(|l| binning.binned_log(*l, gamma)).collect();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        let k = binning.level_count(gamma);
        ok &= vals.len() as u32 <= k && k <= prev_k;
        prev_k = k;
        if [1, 10, 100].contains(&n) {
            ks.push(format!("K_{n}={k} (seen {})", vals.len()));
        }
    }

    // Tied maxima: the top bin of the binned prior under a flat acquisition.
    let gamma = schedule.gamma(5);
    let scores: Vec<f64> = logs.iter().map(|l| binning.binned_log(*l, gamma)).collect();
    let top = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tied: Vec<usize> = (0..scores.len()).filter(|&i| scores[i] == top).collect();
    const BUCKETS: usize = 10;
    let mut counts = [0usize; BUCKETS];
    let draws = 10_000;
    for s in 0..draws {
        let mut rng = ChaCha8Rng::seed_from_u64(9_000 + s as u64);
        let (pick, n_ties) = pick_maximizer(&scores, &mut rng);
        assert_eq!(n_ties, tied.len());
        let pos = tied.binary_search(&pick).expect("pick is a maximizer");
        counts[pos * BUCKETS / tied.len()] += 1;
    }
    let expected: Vec<f64> = (0..BUCKETS)
        .map(|b| {
            let size = (0..tied.len()).filter(|p| p * BUCKETS / tied.len() == b).count();
            draws as f64 * size as f64 / tied.len() as f64
        })
        .collect();
    let chi2: f64 = counts.iter().zip(&expected).map(|(o, e)| (*o as f64 - e).powi(2) / e).sum();
    // 99.9% quantile of chi-square with 9 degrees of freedom.
    let critical = 27.877;
    ok &= chi2 < critical && tied.len() >= BUCKETS;
    report(
        9,
        "forest prior binning and uniform tie-breaking",
        ok,
        &format!(
            "{}; {} tied maxima, chi2 = {chi2:.2} over {BUCKETS} buckets (p > 0.001 needs < {critical})",
            ks.join(", "),
            tied.len()
        ),
        t.elapsed(),
        Duration::from_secs(60),
    );
}

// ---------- 10 ----------

fn read_csv(path: &Path) -> (csv::StringRecord, Vec<csv::StringRecord>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let h = r.headers().unwrap().clone();
    (h, r.records().map(|x| x.unwrap()).collect())
}

#[test]
fn c10_determinism_and_schema() {
    let _g = lock();
    let t = Instant::now();
    let tmp = tempfile::tempdir().unwrap();
    let mk = |dir: &str| {
        let text = format!(
            "[experiment]\nbenchmark = \"branin\"\nstrategy = \"pibo\"\nrepetitions = 4\nseed = 99\noutput_dir = \"{}\"\n\n\
             [optimizer]\niterations = 6\nmle_restarts = 2\nmle_evals = 60\n\n\
             [candidates]\nuniform = 256\nprior = 128\n\n[prior]\nquality = \"weak\"\n",
            tmp.path().join(dir).display()
        );
        ExperimentConfig::from_toml_str(&text, &[]).unwrap()
    };
    let a = run_experiment(&mk("a")).unwrap();
    let b = run_experiment(&mk("b")).unwrap();
    let mut identical = a.files.len() == b.files.len();
    for (fa, fb) in a.files.iter().zip(&b.files) {
        identical &= fa.file_name() == fb.file_name() && std::fs::read(fa).unwrap() == std::fs::read(fb).unwrap();
    }

    // Recompute aggregate.csv from the per-run files.
    let dir = tmp.path().join("a");
    let mut by_iter: std::collections::BTreeMap<usize, Vec<f64>> = Default::default();
    for run_id in 0..4 {
        let (h, rows) = read_csv(&dir.join(format!("run_{run_id:03}.csv")));
        let ii = h.iter().position(|c| c == "iter").unwrap();
        let ri = h.iter().position(|c| c == "regret").unwrap();
        for r in rows {
            by_iter
                .entry(r[ii].parse().unwrap())
                .or_default()
                .push(log10_regret(r[ri].parse().unwrap()));
        }
    }
    let (h, rows) = read_csv(&dir.join("aggregate.csv"));
    let schema_ok = h.iter().collect::<Vec<_>>() == ["iter", "phase", "mean_log10_regret", "stderr", "runs"];
    let mut worst = 0.0f64;
    for r in &rows {
        let vals = &by_iter[&r[0].parse::<usize>().unwrap()];
        let m = mean(vals);
        let sd = (vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (vals.len() - 1) as f64).sqrt();
        let se = sd / (vals.len() as f64).sqrt();
        worst = worst
            .max((r[2].parse::<f64>().unwrap() - m).abs())
            .max((r[3].parse::<f64>().unwrap() - se).abs());
    }
    let complete = rows.len() == by_iter.len() && rows.len() == 3 + 6;
    report(
        10,
        "determinism and aggregate recomputation",
        identical && schema_ok && complete && worst <= 1e-12,
        &format!(
            "{} files byte-identical={identical}, schema ok={schema_ok}, {} aggregate rows, max deviation {worst:.1e}",
            a.files.len(),
            rows.len()
        ),
        t.elapsed(),
        Duration::from_secs(120),
    );
}
