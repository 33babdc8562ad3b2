//! Acceptance suite. Runs with a custom harness and prints one line per
//! criterion: `PASS`, `FAIL` or `NOT RUN` (the last only for the real-data
//! check when the dataset file is absent). Any `FAIL` makes the target fail.
//!
//! Passing `--ignored` or `--include-ignored` turns a missing dataset into a
//! failure instead of `NOT RUN`.

mod common;

use std::panic::{self, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use fairpipe_core::dataset::ProtectedColumn;
use fairpipe_core::fairness::{self, confusion_by_group, Side};
use fairpipe_core::learners::{train_gbm, GbmHyper, LogisticObjective, Standardization};
use fairpipe_core::pipeline;
use fairpipe_core::posthoc::{self, CostKind};
use fairpipe_core::reweigh;
use fairpipe_core::{EncodedDataset, FeatureMatrix, PipelineConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

enum Outcome {
    Pass(String),
    Fail(String),
    NotRun(String),
}

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_budget(detail: String, elapsed: Duration, budget: Duration) -> Check {
    if elapsed <= budget {
        Ok(format!("{detail} in {:.2}s (budget {}s)", elapsed.as_secs_f64(), budget.as_secs()))
    } else {
        Err(format!("{detail} but took {:.2}s, over the {}s budget", elapsed.as_secs_f64(), budget.as_secs()))
    }
}

fn random_binary(rng: &mut ChaCha8Rng, n: usize) -> Vec<u8> {
    (0..n).map(|_| u8::from(rng.random::<bool>())).collect()
}

fn single_spec_dataset(labels: Vec<u8>, group: Vec<u8>, mask: Vec<bool>, favorable: u8) -> EncodedDataset {
    let n = labels.len();
    let protected = ProtectedColumn { name: "g".into(), favorable_label: favorable, values: group, missing: mask };
    EncodedDataset::new(FeatureMatrix::zeros(n, 0), labels, vec![protected]).expect("valid dataset")
}

fn criterion_1() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut done = 0;
    let mut worst_di = 0.0f64;
    while done < 1000 {
        let n = rng.random_range(4..=200);
        let labels = random_binary(&mut rng, n);
        let group = random_binary(&mut rng, n);
        let mut cells = [0usize; 4];
        for i in 0..n {
            cells[usize::from(group[i]) * 2 + usize::from(labels[i])] += 1;
        }
        if cells.contains(&0) {
            continue;
        }
        let favorable = u8::from(rng.random::<bool>());
        let data = single_spec_dataset(labels, group, vec![false; n], favorable);
        let rw = reweigh::compute_weights(&data, "g").map_err(|e| e.to_string())?;
        let out = reweigh::apply_weights(&data, &rw).map_err(|e| e.to_string())?;
        let p = &out.protected[0];
        let di = fairness::weighted_disparate_impact(&out.labels, &p.values, &p.missing, favorable, Some(&out.weights))
            .map_err(|e| e.to_string())?;
        let sum: f64 = out.weights.iter().sum();
        worst_di = worst_di.max((di.value - 1.0).abs());
        ensure((di.value - 1.0).abs() <= 1e-9, || format!("dataset {done}: weighted DI {}", di.value))?;
        ensure((sum - n as f64).abs() <= 1e-9 * n as f64, || format!("dataset {done}: sum of weights {sum} for n = {n}"))?;
        done += 1;
    }
    within_budget(format!("1000 datasets, max |DI - 1| = {worst_di:.2e}"), start.elapsed(), Duration::from_secs(5))
}

struct OracleCounts {
    n: [u32; 2],
    fav: [u32; 2],
    tp: [u32; 2],
    fp: [u32; 2],
    tn: [u32; 2],
    fn_: [u32; 2],
}

fn oracle_counts(outcomes: &[u8], y: &[u8], y_hat: &[u8], group: &[u8], mask: &[bool], favorable: u8) -> OracleCounts {
    let mut c = OracleCounts { n: [0; 2], fav: [0; 2], tp: [0; 2], fp: [0; 2], tn: [0; 2], fn_: [0; 2] };
    for i in 0..y.len() {
        if mask[i] {
            continue;
        }
        let g = usize::from(group[i]);
        c.n[g] += 1;
        c.fav[g] += u32::from(outcomes[i] == favorable);
        match (y[i], y_hat[i]) {
            (1, 1) => c.tp[g] += 1,
            (0, 1) => c.fp[g] += 1,
            (0, 0) => c.tn[g] += 1,
            _ => c.fn_[g] += 1,
        }
    }
    c
}

fn ratio(a: u32, b: u32) -> Option<f64> {
    (b > 0).then(|| f64::from(a) / f64::from(b))
}

fn criterion_2() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut compared = [0usize; 4];
    for case in 0..1000 {
        let n = rng.random_range(1..=20);
        let outcomes = random_binary(&mut rng, n);
        let y = random_binary(&mut rng, n);
        let y_hat = random_binary(&mut rng, n);
        let group = random_binary(&mut rng, n);
        let mask: Vec<bool> = (0..n).map(|_| rng.random::<f64>() < 0.15).collect();
        let favorable = u8::from(rng.random::<bool>());
        let o = oracle_counts(&outcomes, &y, &y_hat, &group, &mask, favorable);
        let (u, p) = (0, 1);

        let di = fairness::disparate_impact(&outcomes, &group, &mask, favorable);
        match (ratio(o.fav[u], o.n[u]), ratio(o.fav[p], o.n[p])) {
            (Some(ru), Some(rp)) => {
                let expected = if rp == 0.0 { f64::INFINITY } else { ru / rp };
                let got = di.map_err(|e| format!("case {case}: DI error {e}"))?.value;
                ensure(got == expected, || format!("case {case}: DI {got} vs oracle {expected}"))?;
                compared[0] += 1;
            }
            _ => ensure(di.is_err(), || format!("case {case}: DI defined on an empty group"))?,
        }

        let confusion = confusion_by_group(&y, &y_hat, &group, &mask, None);
        let tpr = |g: usize| ratio(o.tp[g], o.tp[g] + o.fn_[g]);
        let fpr = |g: usize| ratio(o.fp[g], o.fp[g] + o.tn[g]);
        let expected_aod = match (fpr(u), fpr(p), tpr(u), tpr(p)) {
            (Some(fu), Some(fp), Some(tu), Some(tp)) if o.n[u] > 0 && o.n[p] > 0 => Some(0.5 * ((fu - fp) + (tu - tp))),
            _ => None,
        };
        let expected_eod = match (tpr(u), tpr(p)) {
            (Some(tu), Some(tp)) if o.n[u] > 0 && o.n[p] > 0 => Some(tu - tp),
            _ => None,
        };
        let aod = confusion.as_ref().ok().and_then(|c| fairness::average_odds_difference(c).ok());
        let eod = confusion.as_ref().ok().and_then(|c| fairness::equal_opportunity_difference(c).ok());
        ensure(aod == expected_aod, || format!("case {case}: avg_odd {aod:?} vs oracle {expected_aod:?}"))?;
        ensure(eod == expected_eod, || format!("case {case}: eq_opp {eod:?} vs oracle {expected_eod:?}"))?;
        compared[1] += usize::from(aod.is_some());
        compared[2] += usize::from(eod.is_some());

        let (mut tp, mut fp, mut tn, mut fn_) = (0u32, 0u32, 0u32, 0u32);
        for i in 0..n {
            match (y[i], y_hat[i]) {
                (1, 1) => tp += 1,
                (0, 1) => fp += 1,
                (0, 0) => tn += 1,
                _ => fn_ += 1,
            }
        }
        let expected_bacc = match (ratio(tp, tp + fn_), ratio(tn, tn + fp)) {
            (Some(a), Some(b)) => Some(0.5 * (a + b)),
            _ => None,
        };
        let bacc = fairness::balanced_accuracy(&y, &y_hat).ok();
        ensure(bacc == expected_bacc, || format!("case {case}: balanced accuracy {bacc:?} vs oracle {expected_bacc:?}"))?;
        compared[3] += usize::from(bacc.is_some());
    }
    within_budget(
        format!(
            "1000 datasets; defined values compared exactly: DI {}, avg_odd {}, eq_opp {}, balanced_acc {}",
            compared[0], compared[1], compared[2], compared[3]
        ),
        start.elapsed(),
        Duration::from_secs(5),
    )
}

fn criterion_3() -> Check {
    let labels = vec![1, 1, 1, 1, 0, 0, 1, 0, 0, 0];
    let group = vec![1, 1, 1, 1, 1, 1, 0, 0, 0, 0];
    let mask = vec![false; 10];
    let a = fairness::audit(&labels, &group, &mask, "g", 1, 0.8).map_err(|e| e.to_string())?;
    let r4 = |x: f64| (x * 1e4).round() / 1e4;
    ensure(r4(a.di) == 0.375 && r4(a.di_score) == 0.625 && a.biased, || {
        format!("DI {}, di_score {}, biased {}", a.di, a.di_score, a.biased)
    })?;
    let data = single_spec_dataset(labels, group, mask, 1);
    let rw = reweigh::compute_weights(&data, "g").map_err(|e| e.to_string())?;
    let got = [rw.w_priv_fav, rw.w_priv_unfav, rw.w_unpriv_fav, rw.w_unpriv_unfav].map(r4);
    ensure(got == [0.75, 1.5, 2.0, 0.6667], || format!("weights {got:?}"))?;
    let out = reweigh::apply_weights(&data, &rw).map_err(|e| e.to_string())?;
    let p = &out.protected[0];
    let di = fairness::weighted_disparate_impact(&out.labels, &p.values, &p.missing, 1, Some(&out.weights))
        .map_err(|e| e.to_string())?;
    ensure(r4(di.value) == 1.0, || format!("post-weights DI {}", di.value))?;
    Ok(format!(
        "DI {:.4}, di_score {:.4}, biased {}, weights {:?}, post-weights DI {:.4}",
        a.di, a.di_score, a.biased, got, di.value
    ))
}

fn criterion_4() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for case in 0..100 {
        let n = rng.random_range(2..=50);
        let d = rng.random_range(1..=10);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| if rng.random::<f64>() < 0.3 { 0.0 } else { rng.random_range(-3.0..3.0) }).collect())
            .collect();
        let x = FeatureMatrix::from_rows(&rows).map_err(|e| e.to_string())?;
        let y = random_binary(&mut rng, n);
        let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..3.0)).collect();
        let standardization = if rng.random::<bool>() { Standardization::fit(&x) } else { Standardization::identity(d) };
        let obj = LogisticObjective { x: &x, y: &y, w: &w, l2: rng.random_range(0.0..1.0), standardization: &standardization };
        let coef: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
        let b = rng.random_range(-1.0..1.0);
        let (grad, grad_b) = obj.gradient(&coef, b);
        let rel = |a: f64, fd: f64| (a - fd).abs() / a.abs().max(fd.abs()).max(1e-3);
        for j in 0..=d {
            let h = 1e-5;
            let (plus, minus) = if j < d {
                let mut cp = coef.clone();
                let mut cm = coef.clone();
                cp[j] += h;
                cm[j] -= h;
                (obj.loss(&cp, b), obj.loss(&cm, b))
            } else {
                (obj.loss(&coef, b + h), obj.loss(&coef, b - h))
            };
            let fd = (plus - minus) / (2.0 * h);
            let analytic = if j < d { grad[j] } else { grad_b };
            let e = rel(analytic, fd);
            worst = worst.max(e);
            ensure(e < 1e-5, || format!("case {case}, parameter {j}: analytic {analytic} vs finite difference {fd}"))?;
        }
    }
    within_budget(format!("100 instances, max relative error {worst:.2e}"), start.elapsed(), Duration::from_secs(10))
}

fn random_gbm_data(rng: &mut ChaCha8Rng, n: usize, d: usize) -> EncodedDataset {
    let rows: Vec<Vec<f64>> =
        (0..n).map(|_| (0..d).map(|_| f64::from(rng.random_range(0..6u8)) * 0.5).collect()).collect();
    let labels: Vec<u8> = rows.iter().map(|r| u8::from(r[0] + rng.random_range(-1.0..1.0) > 1.2)).collect();
    let mut labels = labels;
    labels[0] = 0;
    labels[1] = 1;
    EncodedDataset::new(FeatureMatrix::from_rows(&rows).unwrap(), labels, vec![]).unwrap()
}

fn criterion_5() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let hyper = GbmHyper { n_trees: 20, ..GbmHyper::default() };
    let mut rounds = 0;
    for case in 0..50 {
        let n = rng.random_range(10..=120);
        let d = rng.random_range(1..=6);
        let data = random_gbm_data(&mut rng, n, d);
        let model = train_gbm(&data, &hyper).map_err(|e| format!("case {case}: {e}"))?;
        for (r, pair) in model.round_losses.windows(2).enumerate() {
            ensure(pair[1] <= pair[0] + 1e-9, || format!("case {case}: loss rose from {} to {} at round {r}", pair[0], pair[1]))?;
            rounds += 1;
        }
    }
    for case in 0..20 {
        let n = rng.random_range(8..=60);
        let d = rng.random_range(1..=5);
        let mut weighted = random_gbm_data(&mut rng, n, d);
        let counts: Vec<usize> = (0..n).map(|_| rng.random_range(1..=4)).collect();
        weighted.weights = counts.iter().map(|&c| c as f64).collect();
        let dup_idx: Vec<usize> = (0..n).flat_map(|i| std::iter::repeat_n(i, counts[i])).collect();
        let duplicated = weighted.subset(&dup_idx).with_unit_weights();
        let a = train_gbm(&weighted, &hyper).map_err(|e| e.to_string())?;
        let b = train_gbm(&duplicated, &hyper).map_err(|e| e.to_string())?;
        ensure(a.base_score.to_bits() == b.base_score.to_bits(), || format!("case {case}: base scores differ"))?;
        ensure(a.trees == b.trees, || {
            let k = a.trees.iter().zip(&b.trees).position(|(x, y)| x != y).unwrap_or(usize::MAX);
            format!("case {case}: trees differ at {k}: {:?} vs {:?}", a.trees.get(k), b.trees.get(k))
        })?;
        let sa = a.predict_scores(&weighted.features).unwrap();
        let sb = b.predict_scores(&weighted.features).unwrap();
        ensure(sa.iter().zip(&sb).all(|(p, q)| p.to_bits() == q.to_bits()), || format!("case {case}: scores differ"))?;
    }
    Ok(format!("50 datasets, {rounds} rounds non-increasing; 20 weight/duplication pairs bit-identical"))
}

fn dataset_path() -> PathBuf {
    std::env::var_os("DIABETES_CSV")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/diabetic_data.csv"))
}

fn criterion_6(required: bool) -> Outcome {
    let path = dataset_path();
    if !path.is_file() {
        let msg = format!("dataset not found at {} (set DIABETES_CSV to the UCI diabetic_data.csv)", path.display());
        return if required { Outcome::Fail(msg) } else { Outcome::NotRun(msg) };
    }
    match criterion_6_on(&path) {
        Ok(s) => Outcome::Pass(s),
        Err(s) => Outcome::Fail(s),
    }
}

fn criterion_6_on(path: &std::path::Path) -> Check {
    let start = Instant::now();
    let table = fairpipe::load_csv(path).map_err(|e| e.to_string())?;
    let config = PipelineConfig { data_path: path.to_string_lossy().into_owned(), ..PipelineConfig::default() };
    let report = pipeline::run(&table, &config).report;
    if let Some(e) = &report.error {
        return Err(format!("pipeline failed at stage {}: {}", e.stage, e.message));
    }
    let mut notes = Vec::new();
    let mut failures = Vec::new();

    // (a) either orientation: flipping the favorable label maps each group rate r to 1 - r.
    let mut best: Option<(String, u8, f64)> = None;
    for a in &report.dataset_audit {
        let spec = config.group_specs.iter().find(|s| s.name == a.spec_name).unwrap();
        let flipped = fairness::di_score((1.0 - a.favorable_rate_unpriv) / (1.0 - a.favorable_rate_priv));
        for (fav, score) in [(spec.favorable_label, a.di_score), (1 - spec.favorable_label, flipped)] {
            let gap = (score - 0.4498).abs();
            if best.as_ref().is_none_or(|b| gap < (b.2 - 0.4498).abs()) {
                best = Some((a.spec_name.clone(), fav, score));
            }
        }
    }
    let (attr, fav, score) = best.ok_or("no dataset audit")?;
    let logged = report.decision_log.iter().any(|l| l.contains(&format!("dataset audit [{attr}]")));
    notes.push(format!("(a) closest di_score {score:.4} for {attr} with favorable label {fav}"));
    if (score - 0.4498).abs() > 0.15 || !logged {
        failures.push(format!("(a) di_score {score:.4} not within 0.15 of 0.4498 or not logged"));
    }

    let spec = &config.mitigation_spec;
    let gbm = report.learners.iter().find(|l| l.name == "GBM").ok_or("no GBM learner")?;
    let (orig, trans) = (gbm.original_for(spec).unwrap(), gbm.transformed_for(spec).unwrap());
    let (acc_o, acc_t) = (orig.balanced_acc.unwrap_or(f64::NAN), trans.balanced_acc.unwrap_or(f64::NAN));
    notes.push(format!("(b) GBM balanced accuracy {acc_o:.4} / {acc_t:.4}"));
    if !((acc_o - 0.7510).abs() <= 0.05 && (acc_t - 0.7031).abs() <= 0.05) {
        failures.push(format!("(b) balanced accuracy {acc_o:.4} / {acc_t:.4} vs 0.7510 / 0.7031 (tolerance 0.05)"));
    }
    for l in &report.learners {
        let (o, t) = (l.original_for(spec).unwrap(), l.transformed_for(spec).unwrap());
        if !(t.di_score < o.di_score) {
            failures.push(format!("(c) {}: transformed di_score {:.4} >= original {:.4}", l.name, t.di_score, o.di_score));
        }
        let (ao, at) = (o.balanced_acc.unwrap_or(f64::NAN), t.balanced_acc.unwrap_or(f64::NAN));
        if !(at <= ao + 0.01) {
            failures.push(format!("(d) {}: transformed accuracy {at:.4} > original {ao:.4} + 0.01", l.name));
        }
    }
    notes.push(format!("(c) GBM di_score {:.4} -> {:.4}", orig.di_score, trans.di_score));
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(600) {
        failures.push(format!("runtime {:.0}s over 600s", elapsed.as_secs_f64()));
    }
    notes.push(format!("{} rows in {:.1}s", report.n_rows, elapsed.as_secs_f64()));
    if failures.is_empty() {
        Ok(notes.join("; "))
    } else {
        Err(format!("{}; observed: {}", failures.join("; "), notes.join("; ")))
    }
}

/// Scores with `P(y = 1 | s) = s`, drawn as `s = u^a`.
fn calibrated(rng: &mut ChaCha8Rng, n: usize, a: f64) -> (Vec<f64>, Vec<u8>) {
    let s: Vec<f64> = (0..n).map(|_| rng.random::<f64>().powf(a)).collect();
    let y = s.iter().map(|&p| u8::from(rng.random::<f64>() < p)).collect();
    (s, y)
}

fn criterion_7() -> Check {
    let start = Instant::now();
    let n = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (s_priv, y_priv) = calibrated(&mut rng, n, 1.0);
    let (s_unpriv, y_unpriv) = calibrated(&mut rng, n, 1.5);
    let scores: Vec<f64> = s_priv.iter().chain(&s_unpriv).copied().collect();
    let y: Vec<u8> = y_priv.iter().chain(&y_unpriv).copied().collect();
    let group: Vec<u8> = (0..2 * n).map(|i| u8::from(i < n)).collect();
    let mask = vec![false; 2 * n];
    let mixer = posthoc::fit_mixer(&scores, &y, &group, &mask, CostKind::Gfpr, None).map_err(|e| e.to_string())?;
    let mixed = posthoc::apply_mixer(&mixer, &scores, &group, &mask, 42);
    let cost = |s: &[f64], side| posthoc::generalized_cost(s, &y, &group, &mask, side, CostKind::Gfpr).unwrap();
    let gap_before = (cost(&scores, Side::Privileged) - cost(&scores, Side::Unprivileged)).abs();
    let gap_after = (cost(&mixed, Side::Privileged) - cost(&mixed, Side::Unprivileged)).abs();
    ensure(gap_after <= 0.02, || format!("post-mix cost gap {gap_after:.4} (before {gap_before:.4})"))?;
    let target = u8::from(mixer.target_group == Side::Privileged);
    let untouched = (0..2 * n).filter(|&i| group[i] != target).all(|i| mixed[i].to_bits() == scores[i].to_bits());
    ensure(untouched, || "non-target scores changed".into())?;

    let (s_same, y_same) = calibrated(&mut rng, n, 1.0);
    let scores_eq: Vec<f64> = s_same.iter().chain(&s_same).copied().collect();
    let y_eq: Vec<u8> = y_same.iter().chain(&y_same).copied().collect();
    let equal = posthoc::fit_mixer(&scores_eq, &y_eq, &group, &mask, CostKind::Gfpr, None).map_err(|e| e.to_string())?;
    ensure(equal.mix_probability == 0.0, || format!("equal costs gave p = {}", equal.mix_probability))?;
    within_budget(
        format!(
            "gap {gap_before:.4} -> {gap_after:.4} with p = {:.4} on the {} group; equal costs give p = 0; non-target bit-identical",
            mixer.mix_probability, mixer.target_group
        ),
        start.elapsed(),
        Duration::from_secs(5),
    )
}

fn criterion_8() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    std::fs::write(dir.path().join("data.csv"), common::synthetic_uci_csv(3000, 8)).map_err(|e| e.to_string())?;
    std::fs::write(
        dir.path().join("config.toml"),
        "data_path = \"data.csv\"\n[posthoc]\nenabled = true\n",
    )
    .map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for (run, threads) in [(0, "1"), (1, "8")] {
        let out = dir.path().join(format!("out{run}"));
        let status = Command::new(env!("CARGO_BIN_EXE_fairpipe"))
            .args(["run", "--config"])
            .arg(dir.path().join("config.toml"))
            .arg("--out")
            .arg(&out)
            .env("RAYON_NUM_THREADS", threads)
            .stderr(std::process::Stdio::null())
            .status()
            .map_err(|e| e.to_string())?;
        ensure(status.code() == Some(0), || format!("run {run} exited with {status}"))?;
        outputs.push(std::fs::read(out.join("report.json")).map_err(|e| e.to_string())?);
    }
    ensure(outputs[0] == outputs[1], || "report JSON differs between runs".into())?;
    let report: serde_json::Value = serde_json::from_slice(&outputs[0]).map_err(|e| e.to_string())?;
    ensure(report["error"].is_null(), || format!("run reported error {}", report["error"]))?;
    Ok(format!("two `run` invocations on 3000 synthetic rows wrote identical {}-byte reports", outputs[0].len()))
}

fn criterion_9() -> Check {
    let check = |fav_u: usize, fav_p: usize, di_expected: f64, biased_expected: bool| -> Check {
        let n = 10;
        let mut outcomes = Vec::new();
        let mut group = Vec::new();
        for (g, fav) in [(0u8, fav_u), (1u8, fav_p)] {
            for i in 0..n {
                outcomes.push(u8::from(i < fav));
                group.push(g);
            }
        }
        let a = fairness::audit(&outcomes, &group, &vec![false; 2 * n], "g", 1, 0.8).map_err(|e| e.to_string())?;
        ensure((a.di * 1e4).round() / 1e4 == di_expected && a.biased == biased_expected, || {
            format!("rates {}/{}: DI {} biased {}", fav_u, fav_p, a.di, a.biased)
        })?;
        Ok(format!("rates 0.{fav_u} vs 0.{fav_p}: DI {:.4}, biased={}", a.di, a.biased))
    };
    Ok(format!("{}; {}", check(6, 9, 0.6667, true)?, check(8, 9, 0.8889, false)?))
}

fn run_check(f: impl FnOnce() -> Check) -> Outcome {
    match panic::catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => Outcome::Pass(s),
        Ok(Err(s)) => Outcome::Fail(s),
        Err(p) => Outcome::Fail(format!(
            "panicked: {}",
            p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default()
        )),
    }
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        return;
    }
    let require_data = args.iter().any(|a| a == "--ignored" || a == "--include-ignored");
    // Keep panic messages out of the report lines.
    panic::set_hook(Box::new(|_| {}));

    let criteria: Vec<(u32, &str, Box<dyn FnOnce() -> Outcome>)> = vec![
        (1, "exact weighted parity", Box::new(|| run_check(criterion_1))),
        (2, "metric oracle equivalence", Box::new(|| run_check(criterion_2))),
        (3, "T10 golden values", Box::new(|| run_check(criterion_3))),
        (4, "logistic gradient check", Box::new(|| run_check(criterion_4))),
        (5, "boosting sanity", Box::new(|| run_check(criterion_5))),
        (6, "real-data table reproduction", Box::new(move || criterion_6(require_data))),
        (7, "equalized-odds mixer", Box::new(|| run_check(criterion_7))),
        (8, "determinism", Box::new(|| run_check(criterion_8))),
        (9, "four-fifths audit", Box::new(|| run_check(criterion_9))),
    ];
    let mut failed = 0;
    let mut verdicts = Vec::new();
    for (n, name, f) in criteria {
        let (tag, detail) = match f() {
            Outcome::Pass(s) => ("PASS", s),
            Outcome::Fail(s) => {
                failed += 1;
                ("FAIL", s)
            }
            Outcome::NotRun(s) => ("NOT RUN", s),
        };
        println!("acceptance criterion {n} ({name}): {tag}: {detail}");
        verdicts.push(tag);
    }
    println!(
        "acceptance summary: {} passed, {} failed, {} not run",
        verdicts.iter().filter(|t| **t == "PASS").count(),
        failed,
        verdicts.iter().filter(|t| **t == "NOT RUN").count()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
