//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Runs under `cargo test` and exits 0 even when a criterion fails, so the
//! printed lines are the verdict. Set `GWSHM_ACCEPTANCE_STRICT=1` to exit 1 on
//! any failure.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use gwshm::checkpoint::{load_checkpoint, MODEL_FILE, SPLIT_FILE, WEIGHTS_FILE};
use gwshm::table::read_features_csv;
use gwshm_core::augment::{add_noise_at_snr, copy_seed, mean_power, normalize, pink_noise, NoiseSpec};
use gwshm_core::autoencoder::{build_model, reconstruction_mse, Activation, Architecture, DenseAutoencoder, LayerSpec};
use gwshm_core::detector::fit_threshold;
use gwshm_core::edge::{self, edge_infer, InferenceScratch};
use gwshm_core::features::{extract_features, BaselineReference};
use gwshm_core::signal::{hanning_tone_burst, propagate, DamageSpec, EnvCondition, PathSpec, PropagationParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use tempfile::TempDir;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

// 1

fn parameter_accounting() -> Verdict {
    let m = build_model(0);
    let per_layer = m.layer_parameter_counts();
    let total = m.parameter_count();
    let ok = total == 9696 && per_layer == [272, 544, 2112, 0, 4160, 2080, 528];
    verdict(ok, format!("total {total}, per layer {per_layer:?}"))
}

// 2

/// Independent transcription of the 16 features.
fn feature_oracle(f: &[f64], b: &[f64]) -> [f64; 16] {
    let n = f.len() as f64;
    let mean = f.iter().sum::<f64>() / n;
    let mut s = f.to_vec();
    s.sort_by(f64::total_cmp);
    let median = if s.len() % 2 == 1 { s[s.len() / 2] } else { 0.5 * (s[s.len() / 2 - 1] + s[s.len() / 2]) };
    let mad = f.iter().map(|v| (v - mean).abs()).sum::<f64>() / n;
    let var = f.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let sd = var.sqrt();
    let rms = (f.iter().map(|v| v * v).sum::<f64>() / n).sqrt();
    let kurt = f.iter().map(|v| ((v - mean) / sd).powi(4)).sum::<f64>() / n;
    let peak = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mean_abs = f.iter().map(|v| v.abs()).sum::<f64>() / n;
    let p2p = |x: &[f64]| x.iter().cloned().fold(f64::MIN, f64::max) - x.iter().cloned().fold(f64::MAX, f64::min);
    let ef: f64 = f.iter().map(|v| v * v).sum();
    let eb: f64 = b.iter().map(|v| v * v).sum();
    let di = f.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / eb;
    [
        mean,
        median,
        mad,
        var,
        sd,
        rms,
        di.sqrt(),
        kurt,
        3.0 * (mean - median) / sd,
        peak / rms,
        peak / mean_abs,
        rms / mean_abs,
        p2p(f) - p2p(b),
        ef / eb,
        di,
        ef / eb - 1.0,
    ]
}

fn feature_identities() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut worst_oracle, mut worst_identity) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let n = rng.random_range(8..600);
        let scale = 10f64.powf(rng.random_range(-3.0..2.0));
        let mut window = || -> Vec<f64> {
            let offset = rng.random_range(-0.5..0.5);
            (0..n).map(|_| scale * (offset + rng.random_range(-1.0..1.0) + rng.random_range(-1.0..1.0))).collect()
        };
        let f = window();
        let b = window();
        let got = extract_features(&f, &BaselineReference::new(&b).unwrap()).unwrap().to_array();
        let want = feature_oracle(&f, &b);
        for (g, w) in got.iter().zip(&want) {
            worst_oracle = worst_oracle.max(rel(*g, *w));
        }
        worst_identity = worst_identity.max(rel(got[6] * got[6], got[14])).max(rel(got[15], got[13] - 1.0));
    }
    let ok = worst_oracle < 1e-9 && worst_identity < 1e-9;
    verdict(ok, format!("max relative error vs oracle {worst_oracle:.2e}, identities {worst_identity:.2e}"))
}

// 3

fn gradient_correctness() -> Verdict {
    let h = 1e-4;
    let mut worst = 0.0f64;
    let mut cases = 0;
    for pass_through in [false, true] {
        let mut layers = vec![LayerSpec::dense(8, Activation::Relu)];
        if pass_through {
            layers.push(LayerSpec::pass_through(8, Activation::Relu));
        }
        layers.push(LayerSpec::dense(4, Activation::Linear));
        let arch = Architecture { input_width: 4, layers };
        for seed in 0..20u64 {
            let mut model = DenseAutoencoder::new(&arch, seed).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed + 100);
            for p in model.params_mut() {
                *p += rng.random_range(-0.1..0.1);
            }
            let samples: Vec<Vec<f64>> =
                (0..6).map(|_| (0..4).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
            let loss = |m: &DenseAutoencoder| {
                samples.iter().map(|x| m.reconstruction_error(x).unwrap()).sum::<f64>() / samples.len() as f64
            };
            let mut grad = vec![0.0; model.parameter_count()];
            model.loss_and_gradient(&samples, &mut grad).unwrap();
            let mut diff = 0.0;
            let mut norm_a = 0.0;
            let mut norm_n = 0.0;
            for i in 0..grad.len() {
                let mut p = model.clone();
                p.params_mut()[i] += h;
                let mut q = model.clone();
                q.params_mut()[i] -= h;
                let num = (loss(&p) - loss(&q)) / (2.0 * h);
                diff += (grad[i] - num).powi(2);
                norm_a += grad[i] * grad[i];
                norm_n += num * num;
            }
            worst = worst.max(diff.sqrt() / f64::max(norm_a, norm_n).sqrt());
            cases += 1;
        }
    }
    verdict(worst < 1e-4, format!("{cases} fixture/seed cases, max relative error {worst:.2e}"))
}

// 4

/// Welch periodogram slope by direct DFT of the bins inside the band.
fn welch_slope(x: &[f64], fs: f64, seg: usize, f_lo: f64, f_hi: f64) -> f64 {
    let k_lo = (f_lo * seg as f64 / fs).ceil() as usize;
    let k_hi = (f_hi * seg as f64 / fs).floor() as usize;
    let win: Vec<f64> =
        (0..seg).map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / seg as f64).cos()).collect();
    let mut psd = vec![0.0; k_hi + 1];
    let mut start = 0;
    while start + seg <= x.len() {
        for (k, p) in psd.iter_mut().enumerate().skip(k_lo) {
            let w = -2.0 * std::f64::consts::PI * k as f64 / seg as f64;
            let (mut re, mut im) = (0.0, 0.0);
            for i in 0..seg {
                let v = x[start + i] * win[i];
                re += v * (w * i as f64).cos();
                im += v * (w * i as f64).sin();
            }
            *p += re * re + im * im;
        }
        start += seg / 2;
    }
    let pts: Vec<(f64, f64)> =
        (k_lo.max(1)..=k_hi).map(|k| ((k as f64 * fs / seg as f64).log10(), psd[k].log10())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

fn noise_contract() -> Verdict {
    let burst = hanning_tone_burst(75e3, 5, 10e6).unwrap();
    let spec = NoiseSpec::default();
    let (mut lo, mut hi) = (f64::MAX, f64::MIN);
    for (i, t) in [0.0, 45.0, 90.0].into_iter().enumerate() {
        let r = propagate(
            &burst,
            &PathSpec::new("P1", 180.0),
            EnvCondition { temperature_c: t },
            DamageSpec::NONE,
            &PropagationParams::default(),
            4096,
        )
        .unwrap();
        let clean = normalize(&r).unwrap();
        for c in 1..=50 {
            let noisy = add_noise_at_snr(&clean, &spec, copy_seed(7, i, c), c).unwrap();
            let noise: Vec<f64> = noisy.samples.iter().zip(&clean.samples).map(|(a, b)| a - b).collect();
            let snr = 10.0 * (mean_power(&clean.samples) / mean_power(&noise)).log10();
            lo = lo.min(snr);
            hi = hi.max(snr);
        }
    }
    let slopes: Vec<f64> =
        (0..3).map(|seed| welch_slope(&pink_noise(1 << 16, 1.0, seed).unwrap(), 10e6, 8192, 1e3, 1e5)).collect();
    let ok = lo >= 19.5 && hi <= 20.5 && slopes.iter().all(|s| (-1.15..=-0.85).contains(s));
    verdict(
        ok,
        format!(
            "SNR over 150 records in [{lo:.3}, {hi:.3}] dB, pink slopes [{}]",
            slopes.iter().map(|s| format!("{s:.3}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

// 5

fn threshold_exactness() -> Verdict {
    let x = [0.5, -1.25, 2.0, 0.0];
    let y = [0.25, -1.0, 1.5, 0.5];
    let hand =
        ((0.5f64 - 0.25).powi(2) + (-1.25f64 + 1.0).powi(2) + (2.0f64 - 1.5).powi(2) + (0.0f64 - 0.5).powi(2)) / 4.0;
    let mse = reconstruction_mse(&x, &y).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let n = rng.random_range(2..500);
        let errors: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0f64).powi(3)).collect();
        let mean = errors.iter().sum::<f64>() / n as f64;
        let sd = (errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
        let fit = fit_threshold(&errors).unwrap();
        worst = worst.max(rel(fit.threshold, mean + sd)).max(rel(fit.mean, mean)).max(rel(fit.std, sd));
    }
    let ok = mse == hand && hand == 0.15625 && worst <= 1e-12;
    verdict(ok, format!("mse {mse} vs hand {hand}, threshold max relative error {worst:.2e}"))
}

// Pipeline runs for 6, 7, 8 and 9.

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn gwshm(args: &[&str]) -> Result<(), String> {
    let o = Command::new(env!("CARGO_BIN_EXE_gwshm")).args(args).output().map_err(|e| e.to_string())?;
    if o.status.success() {
        Ok(())
    } else {
        Err(format!("gwshm {} failed: {}", args[0], String::from_utf8_lossy(&o.stderr).trim()))
    }
}

struct Run {
    dir: PathBuf,
}

impl Run {
    fn p(&self, s: &str) -> PathBuf {
        self.dir.join(s)
    }

    fn report(&self) -> Result<Value, String> {
        let bytes = std::fs::read(self.p("ev/report.json")).map_err(|e| e.to_string())?;
        serde_json::from_slice(&bytes).map_err(|e| e.to_string())
    }
}

/// synth --augment, features, train, eval, export with the given config.
fn pipeline(config: &Path, dir: &Path) -> Result<Run, String> {
    let c = config.to_str().unwrap();
    let run = Run { dir: dir.to_path_buf() };
    let p = |s: &str| run.p(s).to_str().unwrap().to_string();
    gwshm(&["synth", "--config", c, "--augment", "--out", &p("ds")])?;
    gwshm(&["features", "--config", c, "--dataset", &p("ds"), "--out", &p("f")])?;
    gwshm(&["train", "--config", c, "--features", &p("f/features.csv"), "--out", &p("ck")])?;
    gwshm(&["eval", "--config", c, "--checkpoint", &p("ck"), "--features", &p("f/features.csv"), "--out", &p("ev")])?;
    gwshm(&["export", "--config", c, "--checkpoint", &p("ck"), "--out", &p("ex")])?;
    Ok(run)
}

fn case<'a>(report: &'a Value, condition: &str, size: Option<f64>) -> Option<&'a Value> {
    report["cases"].as_array()?.iter().find(|c| c["condition"] == condition && c["size_mm"].as_f64() == size)
}

fn protocol_reproduction(run: &Result<Run, String>) -> Verdict {
    let report = match run.as_ref().map_err(Clone::clone).and_then(Run::report) {
        Ok(r) => r,
        Err(e) => return verdict(false, e),
    };
    let mut ok = true;
    let mut parts = Vec::new();
    if let Some(b) = case(&report, "baseline", None) {
        let acc = b["accuracy_pct"].as_f64().unwrap_or(0.0);
        ok &= acc >= 97.0;
        parts.push(format!("baseline acc {acc:.1}% (need >= 97)"));
    } else {
        ok = false;
    }
    for kind in ["trf", "lfa"] {
        match case(&report, kind, Some(20.0)) {
            Some(c) => {
                let acc = c["accuracy_pct"].as_f64().unwrap_or(0.0);
                let f1 = c["f1_pct"].as_f64().unwrap_or(0.0);
                ok &= acc >= 90.0 && f1 >= 80.0;
                parts.push(format!("{kind} acc {acc:.1}% f1 {f1:.1}% (need >= 90 / 80)"));
            }
            None => {
                ok = false;
                parts.push(format!("{kind} 20 mm case missing"));
            }
        }
    }
    verdict(ok, parts.join(", "))
}

fn size_trend(run: &Result<Run, String>) -> Verdict {
    let report = match run.as_ref().map_err(Clone::clone).and_then(Run::report) {
        Ok(r) => r,
        Err(e) => return verdict(false, e),
    };
    let sizes = [5.0, 10.0, 15.0, 20.0];
    let mut ok = true;
    let mut parts = Vec::new();
    for kind in ["trf", "lfa"] {
        let mut medians = Vec::new();
        let mut accs = Vec::new();
        for s in sizes {
            let median = report["distributions"]
                .as_array()
                .and_then(|d| d.iter().find(|x| x["condition"] == kind && x["size_mm"].as_f64() == Some(s)))
                .and_then(|x| x["median"].as_f64());
            let acc = case(&report, kind, Some(s)).and_then(|c| c["accuracy_pct"].as_f64());
            match (median, acc) {
                (Some(m), Some(a)) => {
                    medians.push(m);
                    accs.push(a);
                }
                _ => return verdict(false, format!("{kind} {s} mm missing from the report")),
            }
        }
        let increasing = medians.windows(2).all(|w| w[1] > w[0]);
        let accurate = accs[1..].iter().all(|a| *a >= 85.0);
        ok &= increasing && accurate;
        parts.push(format!(
            "{kind} medians [{}] {}, acc [{}]",
            medians.iter().map(|m| format!("{m:.3e}")).collect::<Vec<_>>().join(", "),
            if increasing { "increasing" } else { "NOT increasing" },
            accs.iter().map(|a| format!("{a:.1}")).collect::<Vec<_>>().join(", ")
        ));
    }
    verdict(ok, parts.join("; ") + " (sizes 5/10/15/20 mm; need >= 85% from 10 mm)")
}

fn edge_parity(run: &Result<Run, String>) -> Verdict {
    let run = match run {
        Ok(r) => r,
        Err(e) => return verdict(false, e.clone()),
    };
    let inner = || -> Result<Verdict, String> {
        let ck = load_checkpoint(&run.p("ck")).map_err(|e| e.render())?;
        let bytes = std::fs::read(run.p("ex/model.gwae")).map_err(|e| e.to_string())?;
        let model = edge::load(&bytes).map_err(|e| e.to_string())?;
        let round_trip =
            model.to_bytes() == bytes && edge::serialize(&ck.detector).map_err(|e| e.to_string())? == bytes;

        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut crashes = 0;
        let mut accepted = 0;
        for i in 0..10_000 {
            let mut b = bytes.clone();
            match i % 4 {
                0 => {
                    let k = rng.random_range(0..b.len());
                    b[k] ^= 1 << rng.random_range(0..8);
                }
                1 => {
                    for _ in 0..rng.random_range(2..16) {
                        let k = rng.random_range(0..b.len());
                        b[k] = rng.random();
                    }
                }
                2 => b.truncate(rng.random_range(0..b.len())),
                _ => {
                    let k = rng.random_range(0..=b.len());
                    b.insert(k, rng.random());
                }
            }
            match catch_unwind(AssertUnwindSafe(|| edge::load(&b).is_err())) {
                Ok(true) => {}
                Ok(false) => accepted += 1,
                Err(_) => crashes += 1,
            }
        }

        let rows = read_features_csv(&run.p("f/features.csv")).map_err(|e| e.render())?;
        let mut scratch = InferenceScratch::new();
        let mut worst = 0.0f64;
        let mut slowest = Duration::ZERO;
        for _ in 0..1000 {
            let r = &rows[rng.random_range(0..rows.len())];
            let want = ck.detector.classify_raw(&r.features).map_err(|e| e.to_string())?.error;
            let input = r.features.map(|v| v as f32);
            let t = Instant::now();
            let (got, _) = edge_infer(&model, std::hint::black_box(&input), &mut scratch);
            slowest = slowest.max(t.elapsed());
            worst = worst.max((got as f64 - want).abs());
        }
        let ok = round_trip && crashes == 0 && accepted == 0 && worst < 1e-5 && slowest < Duration::from_millis(1);
        Ok(verdict(
            ok,
            format!(
                "image {} bytes, round trip {}, 10000 corruptions: {accepted} accepted {crashes} panics, \
                 max |d error| {worst:.2e} over 1000 vectors, slowest inference {:.1} us",
                bytes.len(),
                if round_trip { "identical" } else { "DIFFERS" },
                slowest.as_secs_f64() * 1e6
            ),
        ))
    };
    inner().unwrap_or_else(|e| verdict(false, e))
}

fn determinism(first: &Result<Run, String>, config: &Path, scratch: &Path) -> Verdict {
    let first = match first {
        Ok(r) => r,
        Err(e) => return verdict(false, e.clone()),
    };
    let second = match pipeline(config, scratch) {
        Ok(r) => r,
        Err(e) => return verdict(false, e),
    };
    let files = [
        "f/features.csv".to_string(),
        format!("ck/{MODEL_FILE}"),
        format!("ck/{WEIGHTS_FILE}"),
        format!("ck/{SPLIT_FILE}"),
        "ex/model.gwae".to_string(),
    ];
    let differing: Vec<&str> = files
        .iter()
        .filter(|f| std::fs::read(first.p(f)).ok() != std::fs::read(second.p(f)).ok() || !first.p(f).exists())
        .map(String::as_str)
        .collect();
    if differing.is_empty() {
        verdict(true, "features CSV, checkpoint (model, weights, split) and edge image byte-identical across two runs")
    } else {
        verdict(false, format!("differing: {}", differing.join(", ")))
    }
}

fn main() {
    let tmp = TempDir::new().expect("temp dir");
    let experimental = configs_dir().join("experimental.json");
    let simulation = configs_dir().join("simulation.json");
    let mut results: Vec<(u32, &str, Verdict, Duration)> = Vec::new();
    let mut timed = |id: u32, name: &'static str, f: &mut dyn FnMut() -> Verdict| {
        let t = Instant::now();
        let v = f();
        let d = t.elapsed();
        println!(
            "criterion {id} {} {name}: {} [{:.1} s]",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail,
            d.as_secs_f64()
        );
        results.push((id, name, v, d));
    };

    timed(1, "parameter accounting", &mut parameter_accounting);
    timed(2, "feature identities", &mut feature_identities);
    timed(3, "gradient correctness", &mut gradient_correctness);
    timed(4, "noise contract", &mut noise_contract);
    timed(5, "reconstruction error and threshold", &mut threshold_exactness);

    let mut exp = Err("not run".to_string());
    timed(6, "experimental-style protocol", &mut || {
        exp = pipeline(&experimental, &tmp.path().join("exp1"));
        protocol_reproduction(&exp)
    });
    timed(7, "simulation-style size trend", &mut || size_trend(&pipeline(&simulation, &tmp.path().join("sim"))));
    timed(8, "edge parity and latency", &mut || edge_parity(&exp));
    timed(9, "determinism", &mut || determinism(&exp, &experimental, &tmp.path().join("exp2")));

    let failed: Vec<u32> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!(
        "acceptance: {} of {} criteria pass{}",
        results.len() - failed.len(),
        results.len(),
        if failed.is_empty() { String::new() } else { format!("; failing: {failed:?}") }
    );
    if !failed.is_empty() && std::env::var_os("GWSHM_ACCEPTANCE_STRICT").is_some_and(|v| v != "0") {
        std::process::exit(1);
    }
}
