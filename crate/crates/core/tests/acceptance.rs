//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero when any criterion fails.

use std::fs::File;
use std::panic::{self, AssertUnwindSafe};
use std::time::Instant;

use phylolink::evaluate::{
    cross_validate, elementary_score, mann_whitney_auc, roc_auc, top_x_recovery, wilcoxon_paired_one_sided,
    CrossValConfig, FoldPredictions, ModelKind, RocThresholds,
};
use phylolink::interactions::{build_matrix, read_records_csv, LabelNormalization};
use phylolink::model::{
    delta_weight, gumbel_zero_inflated_logpdf, interaction_prob_unchecked, sample_truncated_gumbel,
    truncated_gumbel_cdf,
};
use phylolink::newick::{pairwise_depths, parse_newick, PairwiseMrcaDepths, PhyloTree};
use phylolink::sampler::{
    draw_affinities, generate_synthetic, run_mcmc_observed, ConjugateSite, RowAveraging, SyntheticParams,
    UpdateObserver,
};
use phylolink::transforms::{eb_segment, transformed_distance, DistanceMatrix, TransformSpec};
use phylolink::{posterior_predict, run_mcmc, Hyperparams, InteractionMatrix, ModelFlags, SamplerConfig};
use proptest::prelude::*;
use proptest::test_runner::{Config as PropConfig, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Composite Simpson on `[a, b]` with `n` (even) intervals.
fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

// 1. Posterior mean of γ against quadrature.

/// Unnormalized marginal posterior of γ for a single host, with each ρ_j
/// integrated out analytically against its Gamma prior.
fn gamma_marginal(row: &[bool], hyper: Hyperparams) -> impl Fn(f64) -> f64 + '_ {
    move |g: f64| {
        if g <= 0.0 {
            return 0.0;
        }
        let mut log = (hyper.alpha_gamma - 1.0) * g.ln() - hyper.rate_gamma * g;
        let none = (hyper.rate_rho / (hyper.rate_rho + g)).powf(hyper.alpha_rho);
        for &z in row {
            log += if z { (1.0 - none).ln() } else { none.ln() };
        }
        log.exp()
    }
}

fn criterion_1() -> Outcome {
    let hyper = Hyperparams {
        alpha_gamma: 2.0,
        rate_gamma: 1.5,
        alpha_rho: 1.5,
        rate_rho: 1.0,
    };
    let mut lines = Vec::new();
    let mut ok = true;
    for (k, row) in [vec![1u8], vec![1, 0, 1]].into_iter().enumerate() {
        let z = InteractionMatrix::from_bits(&[row.clone()]).unwrap();
        let bits: Vec<bool> = row.iter().map(|&b| b == 1).collect();
        let f = gamma_marginal(&bits, hyper);
        let upper = 80.0;
        let norm = simpson(&f, 0.0, upper, 400_000);
        let exact = simpson(|g| g * f(g), 0.0, upper, 400_000) / norm;
        let config = SamplerConfig {
            iterations: 400_000,
            burn_in: 5_000,
            seed: 100 + k as u64,
            fix_eta: true,
            flags: ModelFlags::affinity_only(),
            hyper,
            ..SamplerConfig::default()
        };
        let trace = run_mcmc(&z, None, &config).map_err(|e| e.to_string())?;
        let est = mean(trace.gamma_draws());
        let rel = (est - exact).abs() / exact;
        ok &= rel < 0.02;
        lines.push(format!("1x{}: mcmc {est:.4} vs quadrature {exact:.4} (rel {rel:.4})", row.len()));
    }
    check(ok, lines.join("; "))
}

// 2. Truncated Gumbel sampler.

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let n = 100_000;
    let mut ok = true;
    let mut parts = Vec::new();
    for log_tau in [-2.0, 0.0, 2.0] {
        let mut s: Vec<f64> = (0..n).map(|_| sample_truncated_gumbel(log_tau, &mut rng)).collect();
        s.sort_by(f64::total_cmp);
        let mut d: f64 = 0.0;
        for (i, &x) in s.iter().enumerate() {
            let f = truncated_gumbel_cdf(x, log_tau);
            d = d.max((f - i as f64 / n as f64).abs()).max(((i + 1) as f64 / n as f64 - f).abs());
        }
        ok &= d < 0.005;
        parts.push(format!("KS(logτ={log_tau})={d:.4}"));
    }
    for tau in [0.1, 1.0, 10.0] {
        let dens = |s: f64| gumbel_zero_inflated_logpdf(s, tau).exp();
        let integral = adaptive_simpson(&dens, 1e-300, 60.0, 1e-14);
        let target = -(-tau as f64).exp_m1();
        let err = (integral - target).abs();
        ok &= err < 1e-10;
        parts.push(format!("tail(τ={tau}) err {err:.1e}"));
    }
    check(ok, parts.join(", "))
}

// 3. Joint existence for a single column of three hosts.

/// Eq. (2) conditional `P(z_h = 1 | z_{-h})` on one column.
fn conditional(h: usize, col: &[bool], gamma: &[f64], rho: f64, dist: &DistanceMatrix) -> f64 {
    let delta = delta_weight(h, col, dist, 1.0).unwrap();
    interaction_prob_unchecked(gamma[h] * rho * delta)
}

fn bits(state: usize, n: usize) -> Vec<bool> {
    (0..n).map(|h| state >> h & 1 == 1).collect()
}

/// Joint over the `2^n` states from the Hammersley-Clifford ratio, taking
/// the empty column as reference and switching hosts on in index order.
fn hc_joint(n: usize, gamma: &[f64], rho: f64, dist: &DistanceMatrix) -> Vec<f64> {
    let mut w: Vec<f64> = (0..1usize << n)
        .map(|s| {
            let target = bits(s, n);
            let mut cur = vec![false; n];
            let mut ratio = 1.0;
            for h in 0..n {
                if target[h] {
                    let p = conditional(h, &cur, gamma, rho, dist);
                    ratio *= p / (1.0 - p);
                    cur[h] = true;
                }
            }
            ratio
        })
        .collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    w
}

fn criterion_3() -> Outcome {
    let tree = parse_newick("(a:1,b:1,c:1);").unwrap();
    let depths = pairwise_depths(&tree).unwrap();
    let dist = DistanceMatrix::from_transform(&depths, &TransformSpec::Identity).unwrap();
    let gamma = [0.8, 0.8, 0.8];
    let rho = 0.9;
    let n = 3;
    let joint = hc_joint(n, &gamma, rho, &dist);
    let mut max_err: f64 = 0.0;
    for s in 0..1usize << n {
        let col = bits(s, n);
        for h in 0..n {
            let on = s | 1 << h;
            let off = s & !(1 << h);
            let from_joint = joint[on] / (joint[on] + joint[off]);
            max_err = max_err.max((from_joint - conditional(h, &col, &gamma, rho, &dist)).abs());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut col = vec![false; n];
    let mut counts = vec![0u64; 1 << n];
    let sweeps = 1_000_000;
    for _ in 0..sweeps {
        for h in 0..n {
            col[h] = rng.random::<f64>() < conditional(h, &col, &gamma, rho, &dist);
        }
        let s: usize = col.iter().enumerate().map(|(h, &b)| usize::from(b) << h).sum();
        counts[s] += 1;
    }
    let tv = 0.5
        * counts
            .iter()
            .zip(&joint)
            .map(|(&c, &p)| (c as f64 / sweeps as f64 - p).abs())
            .sum::<f64>();

    // Unequal affinities break the symmetry the joint relies on.
    let skewed = hc_joint(n, &[0.3, 0.8, 1.6], rho, &dist);
    let mut skew_err: f64 = 0.0;
    for s in 0..1usize << n {
        let col = bits(s, n);
        for h in 0..n {
            let (on, off) = (s | 1 << h, s & !(1 << h));
            let p = skewed[on] / (skewed[on] + skewed[off]);
            skew_err = skew_err.max((p - conditional(h, &col, &[0.3, 0.8, 1.6], rho, &dist)).abs());
        }
    }
    check(
        max_err < 1e-10 && tv < 0.02,
        format!(
            "equidistant, equal γ: max conditional error {max_err:.1e}, Gibbs TV {tv:.4} over {sweeps} sweeps \
             (unequal γ: HC joint misses the conditionals by {skew_err:.3})"
        ),
    )
}

// 4. Conjugate shape audit.

struct ShapeAudit<'a> {
    z: &'a InteractionMatrix,
    hyper: Hyperparams,
    checked: usize,
    violations: usize,
}

impl UpdateObserver for ShapeAudit<'_> {
    fn on_gamma_draw(&mut self, site: ConjugateSite, shape: f64, _rate: f64) {
        let expected = match site {
            ConjugateSite::Gamma { h } => self.hyper.alpha_gamma + self.z.row_sum(h) as f64,
            ConjugateSite::Rho { h: Some(h), j } => self.hyper.alpha_rho + f64::from(u8::from(self.z.get(h, j))),
            ConjugateSite::Rho { h: None, j } => self.hyper.alpha_rho + self.z.col_sum(j) as f64,
        };
        self.checked += 1;
        if shape != expected {
            self.violations += 1;
        }
    }
}

fn synthetic(
    h: usize,
    j: usize,
    shape: f64,
    rate: f64,
    eta: f64,
    seed: u64,
) -> (InteractionMatrix, PairwiseMrcaDepths, SyntheticParams) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tree = PhyloTree::random_coalescent(h, &mut rng).unwrap();
    let depths = pairwise_depths(&tree).unwrap();
    let params = SyntheticParams {
        gamma: draw_affinities(h, shape, rate, &mut rng).unwrap(),
        rho: draw_affinities(j, shape, rate, &mut rng).unwrap(),
        eta: Some(eta),
        default_delta: 1.0,
    };
    let z = generate_synthetic(Some(&depths), &params, 1000, &mut rng).unwrap();
    (z, depths, params)
}

fn criterion_4() -> Outcome {
    let (z, depths, _) = synthetic(15, 25, 2.0, 8.0, 1.0, 4);
    let hyper = Hyperparams {
        alpha_gamma: 2.0,
        rate_gamma: 8.0,
        alpha_rho: 2.0,
        rate_rho: 8.0,
    };
    let mut parts = Vec::new();
    let mut ok = true;
    for averaging in [RowAveraging::Literal, RowAveraging::SingleDraw] {
        let mut audit = ShapeAudit {
            z: &z,
            hyper,
            checked: 0,
            violations: 0,
        };
        let config = SamplerConfig {
            iterations: 1000,
            burn_in: 500,
            seed: 4,
            hyper,
            averaging,
            ..SamplerConfig::default()
        };
        run_mcmc_observed(&z, Some(&depths), &config, &mut audit).map_err(|e| e.to_string())?;
        ok &= audit.violations == 0 && audit.checked > 0;
        parts.push(format!("{averaging:?}: {} draws, {} violations", audit.checked, audit.violations));
    }
    check(ok, parts.join("; "))
}

// 5. Parameter recovery.

fn recovery(averaging: RowAveraging) -> Result<(f64, bool, f64, f64), String> {
    let true_eta = 1.0;
    let (z, depths, params) = synthetic(50, 100, 2.0, 8.0, true_eta, 5);
    let hyper = Hyperparams {
        alpha_gamma: 2.0,
        rate_gamma: 8.0,
        alpha_rho: 2.0,
        rate_rho: 8.0,
    };
    let config = SamplerConfig {
        iterations: 20_000,
        burn_in: 20_000,
        seed: 5,
        hyper,
        averaging,
        ..SamplerConfig::default()
    };
    let start = Instant::now();
    let trace = run_mcmc(&z, Some(&depths), &config).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let summary = trace.summary().map_err(|e| e.to_string())?;
    let covered = summary
        .gamma
        .iter()
        .zip(&params.gamma)
        .filter(|(s, &g)| s.covers(g))
        .count() as f64
        / params.gamma.len() as f64;
    let eta = summary.eta.expect("full model records eta");
    Ok((covered, eta.covers(true_eta), eta.mean, secs))
}

fn criterion_5() -> Outcome {
    let (cov, eta_ok, eta_mean, secs) = recovery(RowAveraging::SingleDraw)?;
    let (lcov, leta_ok, leta_mean, _) = recovery(RowAveraging::Literal)?;
    check(
        cov >= 0.8 && eta_ok && secs < 900.0,
        format!(
            "single-draw (default): γ coverage {:.0}%, η covered {eta_ok} (mean {eta_mean:.3}), {secs:.0} s; \
             literal averaging for reference: γ coverage {:.0}%, η covered {leta_ok} (mean {leta_mean:.3})",
            100.0 * cov,
            100.0 * lcov
        ),
    )
}

// 6. Submodel ordering.

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (h, j) = (40, 80);
    let tree = PhyloTree::random_coalescent(h, &mut rng).unwrap();
    let depths = pairwise_depths(&tree).unwrap();
    let params = SyntheticParams {
        gamma: draw_affinities(h, 2.0, 8.0, &mut rng).unwrap(),
        rho: draw_affinities(j, 2.0, 8.0, &mut rng).unwrap(),
        eta: Some(2.0),
        default_delta: 1.0,
    };
    let z = generate_synthetic(Some(&depths), &params, 1000, &mut rng).unwrap();
    let z = phylolink::interactions::drop_single_host_parasites(&z).map_err(|e| e.to_string())?;
    let depths = depths.select(z.hosts()).unwrap();
    let config = CrossValConfig {
        folds: 5,
        floor: 2,
        seed: 6,
        sampler: SamplerConfig {
            iterations: 3000,
            burn_in: 3000,
            seed: 6,
            hyper: Hyperparams {
                alpha_gamma: 2.0,
                rate_gamma: 8.0,
                alpha_rho: 2.0,
                rate_rho: 8.0,
            },
            ..SamplerConfig::default()
        },
        ..CrossValConfig::default()
    };
    let models = [ModelKind::Full, ModelKind::Affinity, ModelKind::Phylogeny];
    let (_, evals) = cross_validate(&z, Some(&depths), &models, &config).map_err(|e| e.to_string())?;
    let full = &evals[0];
    let mut ok = true;
    let mut parts = vec![format!("{}x{} data, full AUC {:.4}", z.n_hosts(), z.n_parasites(), full.roc.auc)];
    for sub in &evals[1..] {
        let below = full.murphy.fraction_at_or_below(&sub.murphy);
        ok &= full.roc.auc > sub.roc.auc && below >= 0.9;
        parts.push(format!("{} AUC {:.4}, Murphy ≤ at {:.0}%", sub.model, sub.roc.auc, 100.0 * below));
    }
    check(ok, parts.join(", "))
}

// 7. Recovery of deleted interactions with and without g.

fn criterion_7() -> Outcome {
    let (full_z, depths, _) = synthetic(30, 60, 2.0, 8.0, 0.0, 7);
    let density = full_z.total_ones() as f64 / (30 * 60) as f64;
    let mut parts = vec![format!("density {density:.2}")];
    let mut ok = true;
    let mut g_means = Vec::new();
    for (k, d) in [0.1, 0.3].into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(70 + k as u64);
        let deleted: Vec<(usize, usize)> = full_z.ones().into_iter().filter(|_| rng.random_bool(d)).collect();
        let thinned = full_z.with_cleared(&deleted);
        let cols: Vec<usize> = (0..thinned.n_parasites()).filter(|&j| thinned.col_sum(j) > 0).collect();
        let rows: Vec<usize> = (0..thinned.n_hosts()).collect();
        let train = thinned.submatrix(&rows, &cols);
        let truth = full_z.submatrix(&rows, &cols);
        let mut cells = Vec::new();
        let mut t = Vec::new();
        for h in 0..train.n_hosts() {
            for j in 0..train.n_parasites() {
                if !train.get(h, j) {
                    cells.push((h, j));
                    t.push(truth.get(h, j));
                }
            }
        }
        let x = t.iter().filter(|&&b| b).count();
        let mut recovered = Vec::new();
        for with_g in [true, false] {
            let config = SamplerConfig {
                iterations: 5000,
                burn_in: 5000,
                seed: 7,
                hyper: Hyperparams {
                    alpha_gamma: 2.0,
                    rate_gamma: 8.0,
                    alpha_rho: 2.0,
                    rate_rho: 8.0,
                },
                flags: ModelFlags::full().with_uncertainty(with_g),
                ..SamplerConfig::default()
            };
            let trace = run_mcmc(&train, Some(&depths), &config).map_err(|e| e.to_string())?;
            if with_g {
                g_means.push(mean(trace.g_draws()));
            }
            let pred = posterior_predict(&trace, &train, Some(&depths), config.delta_default).map_err(|e| e.to_string())?;
            let p: Vec<f64> = cells.iter().map(|&(h, j)| pred.get(h, j)).collect();
            let curve = top_x_recovery(&p, &t, x).map_err(|e| e.to_string())?;
            recovered.push(*curve.last().unwrap_or(&0));
        }
        ok &= recovered[0] > recovered[1];
        parts.push(format!(
            "d={d}: {x} deleted, g mean {:.3}, top-x with g {} vs without {}",
            g_means[k], recovered[0], recovered[1]
        ));
    }
    ok &= g_means[0] < g_means[1];
    check(ok, parts.join("; "))
}

// 8. Early-burst transform properties on random trees.

fn criterion_8() -> Outcome {
    let mut runner = TestRunner::new(PropConfig {
        cases: 100,
        failure_persistence: None,
        rng_algorithm: proptest::test_runner::RngAlgorithm::ChaCha,
        ..PropConfig::default()
    });
    let strategy = (3usize..25, any::<u64>(), -6.0f64..6.0);
    let result = runner.run(&strategy, |(n, seed, eta)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tree = PhyloTree::random_coalescent(n, &mut rng).unwrap();
        let d = pairwise_depths(&tree).unwrap();
        let eb0 = TransformSpec::EarlyBurst { eta: 0.0 };
        let eb = TransformSpec::EarlyBurst { eta };
        for h in 0..n {
            for i in 0..n {
                let id = transformed_distance(&d, h, i, &TransformSpec::Identity);
                prop_assert!((transformed_distance(&d, h, i, &eb0) - id).abs() <= 1e-12);
                // Continuity in η at 0.
                let near = transformed_distance(&d, h, i, &TransformSpec::EarlyBurst { eta: 1e-9 });
                prop_assert!((near - id).abs() <= 1e-8);
                // Additivity through the MRCA and along any split point.
                let (th, tk) = (d.tip_depth(h), d.mrca_depth(h, i));
                let mid = 0.5 * (th + tk);
                let whole = eb_segment(th, tk, eta);
                let split = eb_segment(th, mid, eta) + eb_segment(mid, tk, eta);
                prop_assert!((whole - split).abs() <= 1e-12 * whole.abs().max(1.0));
                let sum = eb_segment(th, tk, eta) + eb_segment(d.tip_depth(i), tk, eta);
                prop_assert!((transformed_distance(&d, h, i, &eb) - sum).abs() <= 1e-12 * sum.max(1.0));
                // Positive off the diagonal and symmetric.
                let v = transformed_distance(&d, h, i, &eb);
                prop_assert!((v - transformed_distance(&d, i, h, &eb)).abs() <= 1e-12 * v.max(1.0));
                if h != i {
                    prop_assert!(v > 0.0);
                }
            }
        }
        Ok(())
    });
    match result {
        Ok(()) => Ok("100 random trees: identity at η=0, continuity, additivity, symmetry".into()),
        Err(e) => Err(e.to_string()),
    }
}

// 9. Scoring oracles.

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut auc_err: f64 = 0.0;
    for _ in 0..20 {
        let n = rng.random_range(20..400);
        let pred: Vec<f64> = (0..n).map(|_| (rng.random::<f64>() * 30.0).round() / 30.0).collect();
        let mut truth: Vec<bool> = pred.iter().map(|&p| rng.random_bool(0.15 + 0.7 * p)).collect();
        truth[0] = true;
        truth[1] = false;
        let pairs = brute_force_auc(&pred, &truth);
        let roc = roc_auc(&[FoldPredictions::new(pred.clone(), truth.clone()).unwrap()], &RocThresholds::Exact).unwrap();
        let mw = mann_whitney_auc(&pred, &truth).unwrap();
        auc_err = auc_err.max((roc.auc - pairs).abs()).max((mw - pairs).abs());
    }
    let mut score_err: f64 = 0.0;
    let grid: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
    for &x in &grid {
        for y in [false, true] {
            for &theta in &grid {
                let expected = match (y, x) {
                    (true, x) if x <= theta && theta < 1.0 => 1.0 - theta,
                    (false, x) if 0.0 <= theta && theta < x => theta,
                    _ => 0.0,
                };
                score_err = score_err.max((elementary_score(x, y, theta) - expected).abs());
            }
        }
    }
    let p = wilcoxon_paired_one_sided(&[0.9, 0.8, 0.85, 0.7, 0.95], &[0.5, 0.6, 0.4, 0.65, 0.3]).unwrap();
    check(
        auc_err < 1e-9 && score_err == 0.0 && (p - 0.03125).abs() < 1e-15,
        format!("AUC vs pairwise {auc_err:.1e}, elementary score max error {score_err}, Wilcoxon n=5 p={p}"),
    )
}

fn brute_force_auc(pred: &[f64], truth: &[bool]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for (a, &ta) in pred.iter().zip(truth) {
        for (b, &tb) in pred.iter().zip(truth) {
            if ta && !tb {
                den += 1.0;
                num += if a > b { 1.0 } else if a == b { 0.5 } else { 0.0 };
            }
        }
    }
    num / den
}

// 10. Optional reproduction on user-supplied data.

enum Gated {
    Skipped(String),
    Ran(Outcome),
}

fn criterion_10() -> Gated {
    let (Ok(edges), Ok(tree)) = (std::env::var("PHYLOLINK_GMPD_EDGES"), std::env::var("PHYLOLINK_GMPD_TREE")) else {
        return Gated::Skipped("set PHYLOLINK_GMPD_EDGES and PHYLOLINK_GMPD_TREE to run".into());
    };
    Gated::Ran(gmpd(&edges, &tree))
}

fn gmpd(edges: &str, tree: &str) -> Outcome {
    let records = read_records_csv(File::open(edges).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let z = build_matrix(&records).map_err(|e| e.to_string())?;
    let text = std::fs::read_to_string(tree).map_err(|e| e.to_string())?;
    let tree = parse_newick(&text).map_err(|e| e.to_string())?;
    let norm = LabelNormalization::default();
    let tips: std::collections::HashMap<String, String> =
        tree.leaf_labels().iter().map(|t| (norm.apply(t), t.to_string())).collect();
    let rows: Vec<usize> = (0..z.n_hosts()).filter(|&h| tips.contains_key(&norm.apply(&z.hosts()[h]))).collect();
    let z = z.submatrix(&rows, &(0..z.n_parasites()).collect::<Vec<_>>());
    let cols: Vec<usize> = (0..z.n_parasites()).filter(|&j| z.col_sum(j) > 0).collect();
    let z = z.submatrix(&(0..z.n_hosts()).collect::<Vec<_>>(), &cols);
    let mapping = z.hosts().iter().map(|h| (tips[&norm.apply(h)].clone(), h.clone())).collect();
    let keep: Vec<String> = z.hosts().iter().map(|h| tips[&norm.apply(h)].clone()).collect();
    let pruned = tree.prune_to(&keep).and_then(|t| t.relabel(&mapping)).map_err(|e| e.to_string())?;
    let depths = pairwise_depths(&pruned).and_then(|d| d.select(z.hosts())).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let config = CrossValConfig {
        folds: 5,
        floor: 1,
        seed: 10,
        with_g: true,
        sampler: SamplerConfig {
            seed: 10,
            ..SamplerConfig::default()
        },
        ..CrossValConfig::default()
    };
    let (_, evals) = cross_validate(&z, Some(&depths), &[ModelKind::Full], &config).map_err(|e| e.to_string())?;
    let roc = &evals[0].roc;
    let full = SamplerConfig {
        seed: 10,
        flags: ModelFlags::full().with_uncertainty(true),
        ..SamplerConfig::default()
    };
    let trace = run_mcmc(&z, Some(&depths), &full).map_err(|e| e.to_string())?;
    let eta = mean(trace.eta_draws());
    let g = mean(trace.g_draws());
    let hours = start.elapsed().as_secs_f64() / 3600.0;
    check(
        (roc.auc - 0.944).abs() <= 0.02
            && (roc.pct_ones_recovered - 90.90).abs() <= 2.0
            && (0.391..=5.805).contains(&eta)
            && (g - 0.232).abs() <= 0.05
            && hours <= 4.0,
        format!(
            "AUC {:.3}, ones recovered {:.2}%, η mean {eta:.3}, g mean {g:.3}, {hours:.2} h",
            roc.auc, roc.pct_ones_recovered
        ),
    )
}

fn run<F: FnOnce() -> Outcome>(n: usize, f: F) -> bool {
    let start = Instant::now();
    let result = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        Err(p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panicked".into()))
    });
    let secs = start.elapsed().as_secs_f64();
    match result {
        Ok(d) => {
            println!("criterion {n:>2}: PASS ({secs:.1} s) {d}");
            true
        }
        Err(d) => {
            println!("criterion {n:>2}: FAIL ({secs:.1} s) {d}");
            false
        }
    }
}

fn main() {
    let only: Option<Vec<usize>> = std::env::var("PHYLOLINK_CRITERIA")
        .ok()
        .map(|s| s.split(',').filter_map(|v| v.trim().parse().ok()).collect());
    let selected = |n: usize| only.as_ref().is_none_or(|o| o.contains(&n));
    let criteria: [(usize, fn() -> Outcome); 9] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
    ];
    let mut failed = Vec::new();
    for (n, f) in criteria {
        if selected(n) && !run(n, f) {
            failed.push(n);
        }
    }
    if selected(10) {
        match criterion_10() {
            Gated::Skipped(why) => println!("criterion 10: SKIP {why}"),
            Gated::Ran(outcome) => {
                if !run(10, move || outcome) {
                    failed.push(10);
                }
            }
        }
    }
    if failed.is_empty() {
        println!("acceptance: all selected criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
