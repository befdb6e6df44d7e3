//! Acceptance suite. Each test prints one `PASS`/`FAIL` line for its
//! criterion before asserting, so `cargo test --test acceptance -- --nocapture`
//! reads as a checklist.

use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use featopt::dataset::{load_builtin, stratified_kfold};
use featopt::gafs::{fitness, parse_convergence_csv, FeatureMask, GenerationLog};
use featopt::harness::{run_experiment, ArmDetail, ExperimentConfig, ExperimentReport};
use featopt::mlp::{init, loss_and_grad, Activation, MlpConfig, MlpModel};
use featopt::numerics::{sym_eigen, Matrix, RandomStream};
use featopt::pca::{self, PcaMode};

// criterion 1
const IRIS_TRAIN_MIN: f64 = 0.98;
const IRIS_PCA_TRAIN_MIN: f64 = 0.90;
const IRIS_RUNTIME: Duration = Duration::from_secs(120);
// criterion 2
const HEART_PCA_SLACK: f64 = 0.02;
const HEART_TRAIN_RANGE: (f64, f64) = (0.80, 1.00);
const HEART_RUNTIME: Duration = Duration::from_secs(15 * 60);
// criterion 3
const SYNTH_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];
const SYNTH_GA_MARGIN: f64 = 0.02;
const SYNTH_GA_MIN_WINS: usize = 3;
const SYNTH_PCA_K: usize = 5;
const SYNTH_PCA_MIN_WINS: usize = 4;
const SYNTH_GA_POPULATION: usize = 16;
const SYNTH_GA_GENERATIONS: usize = 8;
// criterion 4
const GRAD_STEP: f64 = 1e-5;
const GRAD_REL_TOL: f64 = 1e-4;
// criterion 5
const EIGEN_TOL: f64 = 1e-8;
// criterion 6
const PCA_ROUND_TRIP_TOL: f64 = 1e-6;
const PCA_DIAG_TOL: f64 = 1e-8;

fn report_line(id: u32, pass: bool, summary: &str) {
    println!("{} [criterion {id}] {summary}", if pass { "PASS" } else { "FAIL" });
}

fn heart_config() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.set("dataset", "heart").unwrap();
    cfg.set("seed", "42").unwrap();
    cfg
}

struct HeartRun {
    report: ExperimentReport,
    elapsed: Duration,
    convergence_csv: String,
}

/// The default-config heart experiment, shared by several criteria.
fn heart_run() -> &'static HeartRun {
    static RUN: OnceLock<HeartRun> = OnceLock::new();
    RUN.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = heart_config();
        cfg.out_dir = Some(dir.path().to_path_buf());
        let start = Instant::now();
        let report = run_experiment(&cfg).expect("heart experiment");
        let elapsed = start.elapsed();
        let convergence_csv = std::fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
        HeartRun {
            report,
            elapsed,
            convergence_csv,
        }
    })
}

fn log_monotone(log: &[GenerationLog]) -> bool {
    log.windows(2).all(|w| w[1].best_fitness >= w[0].best_fitness)
}

#[test]
fn criterion_01_iris_train_accuracy() {
    let dir = tempfile::tempdir().unwrap();
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_featopt"))
        .args(["experiment", "--dataset", "iris", "--arms", "default,ga,pca", "--seed", "42", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    let elapsed = start.elapsed();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    let report: ExperimentReport = serde_json::from_str(&json).unwrap();
    let acc = |arm: &str| report.arm(arm).unwrap().train_accuracy;
    let (d, g, p) = (acc("default"), acc("ga"), acc("pca"));
    let pass = d >= IRIS_TRAIN_MIN && g >= IRIS_TRAIN_MIN && p >= IRIS_PCA_TRAIN_MIN && elapsed < IRIS_RUNTIME;
    report_line(
        1,
        pass,
        &format!(
            "iris train accuracy default {d:.4} (>= {IRIS_TRAIN_MIN}), ga {g:.4} (>= {IRIS_TRAIN_MIN}), pca {p:.4} (>= {IRIS_PCA_TRAIN_MIN}); {:.1}s",
            elapsed.as_secs_f64()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_02_heart_ordering() {
    let run = heart_run();
    let r = &run.report;
    let cv = |arm: &str| r.arm(arm).unwrap().cv_accuracy_mean;
    let (g, d, p) = (cv("ga"), cv("default"), cv("pca"));
    let train = r.arm("default").unwrap().train_accuracy;
    let pass = g >= d
        && d >= p - HEART_PCA_SLACK
        && (HEART_TRAIN_RANGE.0..=HEART_TRAIN_RANGE.1).contains(&train)
        && run.elapsed < HEART_RUNTIME;
    report_line(
        2,
        pass,
        &format!(
            "heart cv ga {g:.4} >= default {d:.4} >= pca {p:.4} - {HEART_PCA_SLACK}; default train {train:.4}; {:.1}s",
            run.elapsed.as_secs_f64()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_03_synthetic_pattern() {
    let mut ga_wins = 0;
    let mut pca_wins = 0;
    let mut rows = Vec::new();
    for seed in SYNTH_SEEDS {
        let mut cfg = ExperimentConfig::default();
        cfg.set("dataset", "synthetic:300,200,10,2.0").unwrap();
        cfg.set("seed", &seed.to_string()).unwrap();
        cfg.set("pca_k", &SYNTH_PCA_K.to_string()).unwrap();
        cfg.ga.population_size = SYNTH_GA_POPULATION;
        cfg.ga.generations = SYNTH_GA_GENERATIONS;
        let r = run_experiment(&cfg).unwrap();
        let cv = |arm: &str| r.arm(arm).unwrap().cv_accuracy_mean;
        let (d, g, p) = (cv("default"), cv("ga"), cv("pca"));
        if g >= d + SYNTH_GA_MARGIN {
            ga_wins += 1;
        }
        if p < d {
            pca_wins += 1;
        }
        rows.push(format!("seed {seed}: ga {g:.4} default {d:.4} pca {p:.4}"));
    }
    let pass = ga_wins >= SYNTH_GA_MIN_WINS && pca_wins >= SYNTH_PCA_MIN_WINS;
    report_line(
        3,
        pass,
        &format!(
            "synthetic(300,200,10,2.0): ga >= default + {SYNTH_GA_MARGIN} in {ga_wins}/5 (need {SYNTH_GA_MIN_WINS}), pca k={SYNTH_PCA_K} < default in {pca_wins}/5 (need {SYNTH_PCA_MIN_WINS}) [{}]",
            rows.join("; ")
        ),
    );
    assert!(pass);
}

fn shifted(model: &MlpModel, layer: usize, bias: bool, idx: usize, delta: f64) -> MlpModel {
    let mut layers = model.layers().to_vec();
    if bias {
        layers[layer].bias[idx] += delta;
    } else {
        let (r, c) = layers[layer].weights.shape();
        let mut w = layers[layer].weights.as_slice().to_vec();
        w[idx] += delta;
        layers[layer].weights = Matrix::from_vec(r, c, w).unwrap();
    }
    MlpModel::from_parts(
        layers,
        model.config().clone(),
        model.input_shift().to_vec(),
        model.input_scale().to_vec(),
    )
    .unwrap()
}

#[test]
fn criterion_04_gradient_oracle() {
    let mut worst: f64 = 0.0;
    for seed in [1u64, 2, 3] {
        let cfg = MlpConfig {
            hidden_sizes: vec![4],
            activation: Activation::Tanh,
            seed,
            ..MlpConfig::default()
        };
        let model = init(2, 3, &cfg).unwrap();
        let mut rng = RandomStream::new(seed, 17);
        let rows: Vec<Vec<f64>> = (0..6).map(|_| vec![rng.normal(), rng.normal()]).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let y = [0, 1, 2, 2, 1, 0];
        let (_, grads) = loss_and_grad(&model, &x, &y).unwrap();
        for (l, g) in grads.layers.iter().enumerate() {
            for (bias, values) in [(false, g.weights.as_slice()), (true, g.bias.as_slice())] {
                for (i, &analytic) in values.iter().enumerate() {
                    let up = loss_and_grad(&shifted(&model, l, bias, i, GRAD_STEP), &x, &y).unwrap().0;
                    let down = loss_and_grad(&shifted(&model, l, bias, i, -GRAD_STEP), &x, &y).unwrap().0;
                    let numeric = (up - down) / (2.0 * GRAD_STEP);
                    let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8);
                    worst = worst.max(rel);
                }
            }
        }
    }
    let pass = worst < GRAD_REL_TOL;
    report_line(4, pass, &format!("2-4-3 tanh, 3 seeds: max relative gradient error {worst:.2e} (< {GRAD_REL_TOL:e})"));
    assert!(pass);
}

#[test]
fn criterion_05_eigensolver_oracle() {
    let n = 20;
    let mut rng = RandomStream::new(555, 0);
    let (mut residual, mut ortho, mut recon): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..20 {
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = rng.uniform(-1.0, 1.0);
                a[i * n + j] = v;
                a[j * n + i] = v;
            }
        }
        let a = Matrix::from_vec(n, n, a).unwrap();
        let eig = sym_eigen(&a).unwrap();
        let v = &eig.eigenvectors;
        for c in 0..n {
            for i in 0..n {
                let av: f64 = (0..n).map(|j| a[(i, j)] * v[(j, c)]).sum();
                residual = residual.max((av - eig.eigenvalues[c] * v[(i, c)]).abs());
            }
        }
        for i in 0..n {
            for j in 0..n {
                let dot: f64 = (0..n).map(|k| v[(k, i)] * v[(k, j)]).sum();
                ortho = ortho.max((dot - if i == j { 1.0 } else { 0.0 }).abs());
                let r: f64 = (0..n).map(|k| v[(i, k)] * eig.eigenvalues[k] * v[(j, k)]).sum();
                recon = recon.max((r - a[(i, j)]).abs());
            }
        }
    }
    let pass = residual < EIGEN_TOL && ortho < EIGEN_TOL && recon < EIGEN_TOL;
    report_line(
        5,
        pass,
        &format!("20 random 20x20: |Av-lv| {residual:.1e}, |VtV-I| {ortho:.1e}, |A-VLVt| {recon:.1e} (< {EIGEN_TOL:e})"),
    );
    assert!(pass);
}

#[test]
fn criterion_06_pca_properties() {
    let ds = load_builtin("iris").unwrap();
    let x = ds.x();
    let mut errors = Vec::new();
    let mut round_trip = 0.0;
    let mut off_diag: f64 = 0.0;
    for k in 1..=4 {
        let m = pca::fit(x, PcaMode::FixedK(k), false).unwrap();
        let z = m.transform(x).unwrap();
        let back = m.inverse_transform(&z).unwrap();
        let sq: f64 = x.as_slice().iter().zip(back.as_slice()).map(|(a, b)| (a - b) * (a - b)).sum();
        errors.push(sq);
        if k == 4 {
            round_trip = x
                .as_slice()
                .iter()
                .zip(back.as_slice())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
        }
        let n = z.rows();
        for a in 0..k {
            for b in 0..k {
                if a != b {
                    let c: f64 = (0..n).map(|i| z[(i, a)] * z[(i, b)]).sum::<f64>() / (n - 1) as f64;
                    off_diag = off_diag.max(c.abs());
                }
            }
        }
    }
    let monotone = errors.windows(2).all(|w| w[1] <= w[0]);
    let pass = round_trip < PCA_ROUND_TRIP_TOL && monotone && off_diag < PCA_DIAG_TOL;
    report_line(
        6,
        pass,
        &format!(
            "iris: full-rank round trip {round_trip:.1e} (< {PCA_ROUND_TRIP_TOL:e}), reconstruction error non-increasing {monotone}, score covariance off-diagonal {off_diag:.1e} (< {PCA_DIAG_TOL:e})"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_07_ga_properties() {
    let heart = heart_run();
    let heart_cfg = heart_config();
    let heart_ds = load_builtin("heart").unwrap();
    let heart_full = fitness(&FeatureMask::full(heart_ds.n_features()), &heart_ds, &heart_cfg.ga_config()).unwrap();
    let ArmDetail::Ga(heart_ga) = &heart.report.arm("ga").unwrap().detail else {
        panic!("ga detail missing")
    };
    let heart_log = parse_convergence_csv(&heart.convergence_csv).unwrap();

    let mut iris_cfg = ExperimentConfig::default();
    iris_cfg.set("arms", "default,ga,pca").unwrap();
    let first = run_experiment(&iris_cfg).unwrap();
    let second = run_experiment(&iris_cfg).unwrap();
    let identical = first.to_json() == second.to_json();
    let iris_ds = load_builtin("iris").unwrap();
    let iris_full = fitness(&FeatureMask::full(4), &iris_ds, &iris_cfg.ga_config()).unwrap();
    let ArmDetail::Ga(iris_ga) = &first.arm("ga").unwrap().detail else {
        panic!("ga detail missing")
    };
    let iris_log = first.convergence.clone().unwrap();

    let monotone = log_monotone(&heart_log) && log_monotone(&iris_log);
    let dominance = heart_ga.best_fitness >= heart_full && iris_ga.best_fitness >= iris_full;
    let pass = monotone && dominance && identical;
    report_line(
        7,
        pass,
        &format!(
            "best-fitness logs non-decreasing {monotone}; best >= all-ones: heart {:.4} >= {heart_full:.4}, iris {:.4} >= {iris_full:.4}; identical report JSON {identical}",
            heart_ga.best_fitness, iris_ga.best_fitness
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_08_stratification() {
    let ds = load_builtin("heart").unwrap();
    let k = 5;
    let folds = stratified_kfold(&ds, k, 42).unwrap();
    let counts = ds.class_counts();
    let mut worst: f64 = 0.0;
    let mut covered = vec![0usize; ds.n_samples()];
    for f in 0..k {
        let test = folds.test_indices(f);
        for &i in &test {
            covered[i] += 1;
        }
        for (c, &total) in counts.iter().enumerate() {
            let n = test.iter().filter(|&&i| ds.y()[i] == c).count() as f64;
            worst = worst.max((n - total as f64 / k as f64).abs());
        }
    }
    let partition = covered.iter().all(|&c| c == 1);
    let pass = worst <= 1.0 && partition;
    report_line(
        8,
        pass,
        &format!("heart 5-fold: max deviation from proportional class share {worst:.2} (<= 1), folds partition all rows {partition}"),
    );
    assert!(pass);
}

#[test]
fn criterion_09_convergence_trace() {
    let run = heart_run();
    let log = parse_convergence_csv(&run.convergence_csv).unwrap();
    let generations = heart_config().ga.generations;
    let rows_ok = log.len() == generations;
    let best_ge_mean = log.iter().all(|g| g.best_fitness >= g.mean_fitness);
    let monotone = log_monotone(&log);
    let pass = rows_ok && best_ge_mean && monotone;
    report_line(
        9,
        pass,
        &format!(
            "heart convergence.csv: {} rows (expected {generations}), best >= mean {best_ge_mean}, best non-decreasing {monotone}",
            log.len()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_10_bundled_data() {
    let iris = load_builtin("iris").unwrap();
    let heart = load_builtin("heart").unwrap();
    let iris_ok = iris.x().shape() == (150, 4) && iris.class_counts() == [50, 50, 50];
    let heart_ok = heart.x().shape() == (303, 13) && heart.n_classes() == 2;
    let pass = iris_ok && heart_ok;
    report_line(
        10,
        pass,
        &format!(
            "iris {:?} classes {:?}; heart {:?} classes {:?}",
            iris.x().shape(),
            iris.class_counts(),
            heart.x().shape(),
            heart.class_counts()
        ),
    );
    assert!(pass);
}
