//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line per
//! criterion and exits nonzero if any fails.

mod common;

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

use rand::Rng;
use rand_distr::StandardNormal;

use common::{
    ar1_autocovariance, ar2_autocovariance, ar_autocovariance, cholesky, cofactor_det, flatten,
    forward_solve, generate_ar, random_ar_from_reflections, random_spd, random_stable_ar, rng,
    toeplitz_rows,
};
use klasr::dictionary::{dictionary_from_bytes, dictionary_to_bytes};
use klasr::divergence::{kl_gaussian, stat_filter, stat_spectral};
use klasr::eval::{
    add_noise, derive_seed, figure_grid, parse_experiment, run_experiment, run_trials,
    with_parameter, CorpusConfig, TrialConfig, TrialSource,
};
use klasr::features::{fit_ar_burg_detailed, Psd};
use klasr::linalg::{levinson_durbin, log_det, lu_decompose, toeplitz, SquareMatrix};
use klasr::{
    build_dictionary, load_dictionary, recognize, save_dictionary, Method, MethodParams,
    PreprocessConfig, Signal,
};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn matrix(rows: &[Vec<f64>]) -> SquareMatrix {
    SquareMatrix::from_row_major(rows.len(), flatten(rows)).unwrap()
}

/// Random AR(1) or AR(2) autocovariance, closed form.
fn random_low_order_cov(rng: &mut rand_chacha::ChaCha8Rng, n: usize) -> (String, Vec<f64>) {
    if rng.random_bool(0.5) {
        let a: f64 = rng.random_range(-0.9..0.9);
        (format!("AR(1) a={a:.3}"), ar1_autocovariance(a, n - 1))
    } else {
        let r: f64 = rng.random_range(0.3..0.9);
        let th: f64 = rng.random_range(0.1..3.0);
        let (a1, a2) = (2.0 * r * th.cos(), -r * r);
        (
            format!("AR(2) a=({a1:.3},{a2:.3})"),
            ar2_autocovariance(a1, a2, n - 1),
        )
    }
}

fn criterion_1() -> Outcome {
    const SAMPLES: usize = 1_000_000;
    let start = Instant::now();
    let mut rng_pairs = rng(101);
    let mut worst = 0.0f64;
    for pair in 0..10 {
        let mut draw = rng(rng_pairs.random());
        let (dx, cx) = random_low_order_cov(&mut draw, 16);
        let (dr, cr) = random_low_order_cov(&mut draw, 16);
        for n in [4usize, 8, 16] {
            let kx = toeplitz_rows(&cx, n);
            let kr = toeplitz_rows(&cr, n);
            let kl = kl_gaussian(&matrix(&kx), &matrix(&kr)).map_err(|e| e.to_string())?;

            let lx = cholesky(&kx);
            let lr = cholesky(&kr);
            let ld = |l: &[Vec<f64>]| 2.0 * (0..n).map(|i| l[i][i].ln()).sum::<f64>();
            let offset = 0.5 * (ld(&lr) - ld(&lx));
            let mut mc = rng(derive_seed(7, &[pair, n as u64]));
            let (mut sum, mut sum2) = (0.0, 0.0);
            let mut z = vec![0.0; n];
            let mut x = vec![0.0; n];
            for _ in 0..SAMPLES {
                for v in z.iter_mut() {
                    *v = mc.sample(StandardNormal);
                }
                for i in 0..n {
                    x[i] = (0..=i).map(|k| lx[i][k] * z[k]).sum();
                }
                let y = forward_solve(&lr, &x);
                let qx: f64 = z.iter().map(|v| v * v).sum();
                let qr: f64 = y.iter().map(|v| v * v).sum();
                let term = 0.5 * (qr - qx) + offset;
                sum += term;
                sum2 += term * term;
            }
            let mean = sum / SAMPLES as f64;
            let var = (sum2 / SAMPLES as f64 - mean * mean).max(0.0);
            let se = (var / SAMPLES as f64).sqrt();
            let z_score = (kl - mean).abs() / se.max(f64::MIN_POSITIVE);
            worst = worst.max(z_score);
            check(
                z_score <= 3.0,
                format!(
                    "pair {pair} ({dx} vs {dr}), n={n}: closed form {kl:.6}, Monte Carlo {mean:.6} ± {se:.2e} ({z_score:.2} SE)"
                ),
            )?;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(secs < 60.0, format!("runtime {secs:.1} s exceeds 60 s"))?;
    Ok(format!(
        "30 cases, worst deviation {worst:.2} SE, {secs:.1} s"
    ))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut r = rng(202);
    let log_uniform = |r: &mut rand_chacha::ChaCha8Rng| 10f64.powf(r.random_range(-3.0..3.0));
    for i in 0..10_000 {
        let bins_x: Vec<f64> = (0..32).map(|_| log_uniform(&mut r)).collect();
        let bins_r: Vec<f64> = (0..32).map(|_| log_uniform(&mut r)).collect();
        let gx = Psd {
            bins: bins_x,
            window_len: 64,
            sample_rate_hz: 8000,
        };
        let gr = Psd {
            bins: bins_r,
            window_len: 64,
            sample_rate_hz: 8000,
        };
        let s = stat_spectral(&gx, &gr).map_err(|e| e.to_string())?;
        check(s >= 1.0, format!("stat_spectral {s} < 1 on input {i}"))?;
        let same = stat_spectral(&gx, &gx).map_err(|e| e.to_string())?;
        check(
            (same - 1.0).abs() <= 1e-12,
            format!("stat_spectral self value {same}"),
        )?;

        let (a, b) = (log_uniform(&mut r), log_uniform(&mut r));
        let f = stat_filter(a, b).map_err(|e| e.to_string())?;
        check(f >= 1.0, format!("stat_filter({a}, {b}) = {f} < 1"))?;
        let same = stat_filter(a, a).map_err(|e| e.to_string())?;
        check(
            (same - 1.0).abs() <= 1e-12,
            format!("stat_filter self value {same}"),
        )?;
    }
    for i in 0..200 {
        let n = 2 + i % 15;
        let a = matrix(&random_spd(&mut r, n));
        let b = matrix(&random_spd(&mut r, n));
        let kl = kl_gaussian(&a, &b).map_err(|e| e.to_string())?;
        check(kl >= 0.0, format!("kl_gaussian {kl} < 0 at order {n}"))?;
        let own = kl_gaussian(&a, &a).map_err(|e| e.to_string())?;
        check(
            own.abs() <= 1e-9,
            format!("self-divergence {own} at order {n}"),
        )?;
    }
    let secs = start.elapsed().as_secs_f64();
    check(secs < 30.0, format!("runtime {secs:.1} s exceeds 30 s"))?;
    Ok(format!("10000 statistic draws, 200 SPD pairs, {secs:.1} s"))
}

fn criterion_3() -> Outcome {
    let mut r = rng(303);
    let mut worst_solve = 0.0f64;
    for i in 0..100 {
        let order = 1 + i % 32;
        let coeffs = random_ar_from_reflections(&mut r, order, 0.7);
        let acov = ar_autocovariance(&coeffs, order, 4000);
        let lev = levinson_durbin(&acov, order).map_err(|e| e.to_string())?;
        let t = toeplitz(&acov[..order]).map_err(|e| e.to_string())?;
        let lu = lu_decompose(&t).map_err(|e| e.to_string())?;
        let direct = lu.solve(&acov[1..=order]).map_err(|e| e.to_string())?;
        let diff = lev
            .coeffs
            .iter()
            .zip(&direct)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        worst_solve = worst_solve.max(diff);
        check(
            diff <= 1e-10,
            format!("order {order}: Levinson and LU differ by {diff:.3e}"),
        )?;
    }
    let mut worst_det = 0.0f64;
    for n in 1..=6usize {
        for _ in 0..50 {
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..n).map(|_| r.random_range(-1.0..1.0)).collect())
                .collect();
            let oracle = cofactor_det(&rows);
            let lu = lu_decompose(&matrix(&rows)).map_err(|e| e.to_string())?;
            let got = log_det(&lu).value();
            let rel = (got - oracle).abs() / oracle.abs();
            worst_det = worst_det.max(rel);
            check(
                rel <= 1e-8,
                format!("order {n}: LU det {got} vs cofactor {oracle}"),
            )?;
        }
    }
    Ok(format!(
        "100 Toeplitz systems (max diff {worst_solve:.1e}), 300 determinants (max rel {worst_det:.1e})"
    ))
}

fn criterion_4() -> Outcome {
    let mut r = rng(404);
    let mut worst_coeff = 0.0f64;
    let mut worst_var = 0.0f64;
    for p in 1..=10usize {
        let coeffs = random_stable_ar(&mut r, p, (0.3, 0.9));
        let sigma2 = r.random_range(0.5..2.0);
        let x = generate_ar(&coeffs, sigma2, 100_000, derive_seed(44, &[p as u64]));
        let signal = Signal::new(x, 8000).map_err(|e| e.to_string())?;
        let fit = fit_ar_burg_detailed(&signal, p).map_err(|e| e.to_string())?;
        let dc = fit
            .model
            .coeffs()
            .iter()
            .zip(&coeffs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let dv = (fit.model.residual_variance() / sigma2 - 1.0).abs();
        worst_coeff = worst_coeff.max(dc);
        worst_var = worst_var.max(dv);
        check(dc <= 0.02, format!("AR({p}): coefficient error {dc:.4}"))?;
        check(
            dv <= 0.05,
            format!("AR({p}): residual variance off by {:.2} %", 100.0 * dv),
        )?;

        let deep = fit_ar_burg_detailed(&signal, 2 * p + 10).map_err(|e| e.to_string())?;
        for powers in [&fit.error_powers, &deep.error_powers] {
            check(
                powers.windows(2).all(|w| w[1] <= w[0]),
                format!("AR({p}): error powers increase with order: {powers:?}"),
            )?;
        }
    }
    Ok(format!(
        "orders 1-10, max coefficient error {worst_coeff:.4}, max variance error {:.2} %",
        100.0 * worst_var
    ))
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    for m in Method::ALL {
        let mut cfg = TrialConfig::reference(m);
        cfg.source = TrialSource::Prototypes;
        cfg.snr_db = f64::INFINITY;
        cfg.trials_per_word = 1;
        let rep = run_trials(&cfg).map_err(|e| e.to_string())?;
        check(rep.w == 1.0, format!("{m}: self-recognition w = {}", rep.w))?;
    }
    let mut parts = Vec::new();
    for m in Method::ALL.into_iter().filter(|m| m.is_divergence()) {
        let rep = run_trials(&TrialConfig::reference(m)).map_err(|e| e.to_string())?;
        parts.push(format!("{m} {:.3}", rep.w));
        check(rep.w >= 0.9, format!("{m}: w = {} < 0.9 at 18 dB", rep.w))?;
    }
    let secs = start.elapsed().as_secs_f64();
    check(secs < 300.0, format!("runtime {secs:.1} s exceeds 5 min"))?;
    Ok(format!(
        "prototypes w = 1.0 for all methods; 18 dB: {}; {secs:.1} s",
        parts.join(", ")
    ))
}

/// Mean w over seeds 1-3 at every value of each method's figure grid.
type Curves = BTreeMap<Method, Vec<(f64, f64)>>;

fn sweep_curves() -> Result<Curves, String> {
    let mut curves = Curves::new();
    for m in Method::ALL {
        let (param, grid) = figure_grid(m);
        let mut curve = Vec::with_capacity(grid.len());
        for &v in &grid {
            let mut total = 0.0;
            for seed in 1..=3 {
                let mut cfg = TrialConfig::reference(m);
                cfg.rng_seed = seed;
                let cfg = with_parameter(&cfg, param, v).map_err(|e| e.to_string())?;
                total += run_trials(&cfg).map_err(|e| e.to_string())?.w;
            }
            curve.push((v, total / 3.0));
        }
        curves.insert(m, curve);
    }
    Ok(curves)
}

fn render(curve: &[(f64, f64)]) -> String {
    curve
        .iter()
        .map(|(v, w)| format!("{v}:{w:.3}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn best(curve: &[(f64, f64)]) -> (f64, f64) {
    curve
        .iter()
        .copied()
        .fold((f64::NAN, f64::NEG_INFINITY), |acc, p| {
            if p.1 > acc.1 {
                p
            } else {
                acc
            }
        })
}

fn interior_maximum(curve: &[(f64, f64)]) -> bool {
    let max = best(curve).1;
    curve[0].1 < max && curve[curve.len() - 1].1 < max
}

/// Largest drop allowed between consecutive orders of a non-decreasing
/// curve, and the largest spread allowed over the flat region.
const STEP_TOLERANCE: f64 = 0.01;
const FLAT_TOLERANCE: f64 = 0.02;

fn criterion_6(curves: &Curves) -> Outcome {
    let corr = &curves[&Method::Correlation];
    check(
        interior_maximum(corr),
        format!("correlation has no interior maximum: {}", render(corr)),
    )?;
    let spec = &curves[&Method::Spectral];
    check(
        interior_maximum(spec),
        format!("spectral has no interior maximum: {}", render(spec)),
    )?;
    let filt = &curves[&Method::Filter];
    check(
        filt.windows(2).all(|w| w[1].1 >= w[0].1 - STEP_TOLERANCE),
        format!("filter curve decreases: {}", render(filt)),
    )?;
    let tail: Vec<f64> = filt
        .iter()
        .filter(|(v, _)| *v >= 40.0)
        .map(|p| p.1)
        .collect();
    let spread = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - tail.iter().cloned().fold(f64::INFINITY, f64::min);
    check(
        spread <= FLAT_TOLERANCE,
        format!("filter not flat above 40: {}", render(filt)),
    )?;
    Ok(format!(
        "correlation [{}]; spectral [{}]; filter [{}]",
        render(corr),
        render(spec),
        render(filt)
    ))
}

fn criterion_7(curves: &Curves) -> Outcome {
    let optimum: BTreeMap<Method, (f64, f64)> = curves.iter().map(|(&m, c)| (m, best(c))).collect();
    let summary = optimum
        .iter()
        .map(|(m, (v, w))| format!("{m} {w:.3}@{v}"))
        .collect::<Vec<_>>()
        .join(", ");
    let mut failures = Vec::new();
    for lid in Method::ALL.into_iter().filter(|m| m.is_divergence()) {
        for base in Method::ALL.into_iter().filter(|m| !m.is_divergence()) {
            if optimum[&lid].1 < optimum[&base].1 {
                failures.push(format!("{lid} < {base}"));
            }
        }
    }
    let top = optimum
        .values()
        .map(|p| p.1)
        .fold(f64::NEG_INFINITY, f64::max);
    if optimum[&Method::Correlation].1 < top {
        failures.push("correlation is not the best method".to_string());
    }
    if failures.is_empty() {
        Ok(format!("optima: {summary}"))
    } else {
        Err(format!("{}; optima: {summary}", failures.join(", ")))
    }
}

fn criterion_8() -> Outcome {
    let configs = [
        "method = spectral\ntrials_per_word = 5\nseed = 9\n",
        "method = correlation\ntrials_per_word = 4\nsweep_param = order\nsweep_values = 5, 10, 20\n",
        "method = msfb\ntrials_per_word = 2\nsweep_param = comparison\n",
    ];
    for text in configs {
        let cfg = parse_experiment(text).map_err(|e| e.to_string())?;
        let a = run_experiment(&cfg).map_err(|e| e.to_string())?.csv();
        let b = run_experiment(&cfg).map_err(|e| e.to_string())?.csv();
        check(a == b, format!("reports differ between runs of:\n{text}"))?;
    }

    let corpus = CorpusConfig::default();
    let prototypes = corpus.prototypes(5).map_err(|e| e.to_string())?;
    let vocab = corpus.vocabulary();
    let inputs: Vec<Signal> = vocab
        .iter()
        .enumerate()
        .flat_map(|(w, word)| (0..3).map(move |t| (w, word, t)))
        .map(|(w, word, t)| {
            let seed = derive_seed(77, &[w as u64, t as u64]);
            let clean = word.utterance(3600 + 200 * t, 8000, 0.0, seed)?;
            add_noise(&clean, 18.0, seed)
        })
        .collect::<klasr::Result<_>>()
        .map_err(|e| e.to_string())?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    for m in Method::ALL {
        let dict = build_dictionary(
            &prototypes,
            &MethodParams::default_for(m),
            &PreprocessConfig::default(),
        )
        .map_err(|e| e.to_string())?;
        let path = dir.path().join(format!("{m}.kldb"));
        save_dictionary(&dict, &path).map_err(|e| e.to_string())?;
        let loaded = load_dictionary(&path).map_err(|e| e.to_string())?;
        let bytes = std::fs::read(&path).map_err(|e| e.to_string())?;
        check(loaded == dict, format!("{m}: loaded dictionary differs"))?;
        check(
            dictionary_to_bytes(&loaded).map_err(|e| e.to_string())? == bytes,
            format!("{m}: re-encoded bytes differ"),
        )?;
        check(
            dictionary_from_bytes(&bytes).map_err(|e| e.to_string())? == dict,
            format!("{m}: decoding differs"),
        )?;
        for (i, x) in inputs.iter().enumerate() {
            let a = recognize(x, &dict).map_err(|e| e.to_string())?;
            let b = recognize(x, &loaded).map_err(|e| e.to_string())?;
            let same_bits = a
                .scores
                .iter()
                .zip(&b.scores)
                .all(|(p, q)| p.to_bits() == q.to_bits());
            check(
                a.winner_index == b.winner_index && same_bits,
                format!("{m}: decision {i} changed after reload"),
            )?;
        }
    }
    Ok(format!(
        "3 configs reproduced byte-identically; 5 dictionaries round-trip, {} decisions preserved",
        5 * inputs.len()
    ))
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |id: usize, name: &str, outcome: Outcome| match outcome {
        Ok(detail) => println!("[PASS] criterion {id} {name}: {detail}"),
        Err(detail) => {
            failed += 1;
            println!("[FAIL] criterion {id} {name}: {detail}");
        }
    };
    report(1, "KL oracle equivalence", criterion_1());
    report(2, "statistic floors", criterion_2());
    report(3, "linear-algebra cross-checks", criterion_3());
    report(4, "AR recovery", criterion_4());
    report(5, "self-recognition", criterion_5());
    match sweep_curves() {
        Ok(curves) => {
            report(6, "shape reproduction", criterion_6(&curves));
            report(7, "method ordering", criterion_7(&curves));
        }
        Err(e) => {
            report(6, "shape reproduction", Err(e.clone()));
            report(7, "method ordering", Err(e));
        }
    }
    report(8, "determinism and persistence", criterion_8());
    if failed == 0 {
        println!("acceptance: all 8 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} of 8 criteria failed");
        ExitCode::FAILURE
    }
}
