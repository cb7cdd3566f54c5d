#![allow(dead_code)]

use std::path::Path;

use rgp::dataset::rng::SplitMix64;
use rgp::dataset::{write_manifest, DatasetId, ManifestEntry};
use rgp::imaging::io::save_png;
use rgp::imaging::RasterImage;

/// Fundus-like photograph: a reddish disc on black with a brighter optic
/// disc, a few dark vessels, and (when `lesions`) bright exudate spots at
/// fixed positions relative to the disc.
pub fn synthetic_fundus(width: usize, height: usize, lesions: bool, seed: u64) -> RasterImage {
    let mut rng = SplitMix64::new(seed);
    let jitter = |rng: &mut SplitMix64, span: u64| rng.below(span) as f64 - span as f64 / 2.0;
    let gain = 1.0 + jitter(&mut rng, 20) / 100.0;
    let (cx, cy) = ((width as f64 - 1.0) / 2.0, (height as f64 - 1.0) / 2.0);
    let r = 0.45 * width.min(height) as f64;
    let (odx, ody) = (cx + 0.45 * r, cy - 0.1 * r);
    let spots: [(f64, f64); 6] = [
        (-0.5, -0.3),
        (-0.3, 0.4),
        (0.1, 0.5),
        (-0.6, 0.1),
        (0.3, -0.45),
        (0.0, 0.0),
    ];

    RasterImage::from_fn_rgb(width, height, |x, y| {
        let (fx, fy) = (x as f64, y as f64);
        let d = ((fx - cx).powi(2) + (fy - cy).powi(2)).sqrt();
        if d > r {
            return [3, 2, 2];
        }
        let shade = 1.0 - 0.35 * (d / r).powi(2);
        let (mut red, mut green, mut blue) = (170.0 * shade, 80.0 * shade, 40.0 * shade);
        let od = ((fx - odx).powi(2) + (fy - ody).powi(2)).sqrt();
        if od < 0.18 * r {
            red += 60.0;
            green += 70.0;
            blue += 40.0;
        }
        let vessel =
            ((fy - cy) - 0.3 * (fx - cx)).abs() < 1.5 || ((fx - cx) + 0.5 * (fy - cy)).abs() < 1.2;
        if vessel {
            red *= 0.6;
            green *= 0.5;
            blue *= 0.5;
        }
        if lesions {
            for (sx, sy) in spots {
                let (px, py) = (cx + sx * r, cy + sy * r);
                if ((fx - px).powi(2) + (fy - py).powi(2)).sqrt() < 0.07 * r {
                    red = 250.0;
                    green = 230.0;
                    blue = 120.0;
                }
            }
        }
        let q = |v: f64| (v * gain).round().clamp(0.0, 255.0) as u8;
        [q(red), q(green), q(blue)]
    })
    .unwrap()
}

pub struct Fixture {
    pub manifest: std::path::PathBuf,
    pub images: std::path::PathBuf,
    pub entries: Vec<ManifestEntry>,
}

/// `n` Messidor-style images, every fourth at Lariboisière; odd indices are
/// abnormal (grades 1..=3) and carry lesions.
pub fn messidor_fixture(dir: &Path, n: usize, size: (usize, usize)) -> Fixture {
    let images = dir.join("images");
    std::fs::create_dir_all(&images).unwrap();
    let sites = [
        "Lariboisière",
        "CHU de St Etienne",
        "LaTIM - CHU de BREST",
        "CHU de St Etienne",
    ];
    let mut entries = Vec::new();
    for i in 0..n {
        let abnormal = i % 2 == 1;
        let grade = if abnormal { 1 + (i / 2 % 3) as u8 } else { 0 };
        let id = format!("fundus_{i:03}");
        let img = synthetic_fundus(size.0, size.1, abnormal, 1000 + i as u64);
        save_png(&img, &images.join(format!("{id}.png"))).unwrap();
        entries.push(
            ManifestEntry::new(id, DatasetId::Messidor, grade)
                .unwrap()
                .with_site(sites[i / 2 % 4]),
        );
    }
    let manifest = dir.join("manifest.csv");
    write_manifest(&entries, &manifest).unwrap();
    Fixture {
        manifest,
        images,
        entries,
    }
}

/// Mann-Whitney statistic by explicit pair counting.
pub fn mann_whitney(scores: &[f64], labels: &[bool]) -> f64 {
    let mut concordant = 0.0;
    let (mut p, mut n) = (0.0, 0.0);
    for (i, &li) in labels.iter().enumerate() {
        if li {
            p += 1.0;
        } else {
            n += 1.0;
        }
        if !li {
            continue;
        }
        for (j, &lj) in labels.iter().enumerate() {
            if lj {
                continue;
            }
            if scores[i] > scores[j] {
                concordant += 1.0;
            } else if scores[i] == scores[j] {
                concordant += 0.5;
            }
        }
    }
    concordant / (p * n)
}

/// Argmax of the between-class variance over all 256 thresholds computed
/// from scratch for each candidate; smallest threshold wins ties.
pub fn otsu_oracle(bins: &[u64; 256]) -> u8 {
    let n: u64 = bins.iter().sum();
    let mut best_t = 0u8;
    let mut best = f64::NEG_INFINITY;
    for t in 0..256usize {
        let n0: u64 = bins[..=t].iter().sum();
        let s0: u64 = bins[..=t]
            .iter()
            .enumerate()
            .map(|(v, &c)| v as u64 * c)
            .sum();
        let n1: u64 = bins[t + 1..].iter().sum();
        let s1: u64 = bins[t + 1..]
            .iter()
            .enumerate()
            .map(|(v, &c)| (v + t + 1) as u64 * c)
            .sum();
        let var = if n0 == 0 || n1 == 0 {
            0.0
        } else {
            let w0 = n0 as f64 / n as f64;
            let w1 = n1 as f64 / n as f64;
            let d = s0 as f64 / n0 as f64 - s1 as f64 / n1 as f64;
            w0 * w1 * d * d
        };
        if var > best {
            best = var;
            best_t = t as u8;
        }
    }
    best_t
}

/// Norm-wise relative error between the analytic gradient and central
/// finite differences at a random model and batch drawn from `seed`.
pub fn gradient_check(seed: u64) -> f64 {
    use rgp::classifier::{objective, SoftmaxModel};
    use rgp::dataset::Task;

    let mut rng = SplitMix64::new(seed);
    let mut unit = move || rng.next_u64() as f64 / u64::MAX as f64;
    let task =
        [Task::BinaryReferable, Task::Ternary, Task::Quaternary][(unit() * 3.0) as usize % 3];
    let (k, dim, n) = (task.class_count(), 6, 9);
    let mut model = SoftmaxModel::zeros(task, dim);
    for row in model.weights.iter_mut() {
        row.iter_mut().for_each(|w| *w = 2.0 * unit() - 1.0);
    }
    model.bias.iter_mut().for_each(|b| *b = unit() - 0.5);
    let xs: Vec<Vec<f64>> = (0..n).map(|_| (0..dim).map(|_| unit()).collect()).collect();
    let ys: Vec<usize> = (0..n).map(|i| i % k).collect();
    let refs: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
    let l2 = 0.1;

    let analytic = objective(&model, &refs, &ys, l2).unwrap();
    let h = 1e-5;
    let mut diff2 = 0.0;
    let mut norm2 = 0.0;
    let mut probe =
        |model: &mut SoftmaxModel, get: &dyn Fn(&mut SoftmaxModel) -> &mut f64, a: f64| {
            let orig = *get(model);
            *get(model) = orig + h;
            let up = objective(model, &refs, &ys, l2).unwrap().loss;
            *get(model) = orig - h;
            let down = objective(model, &refs, &ys, l2).unwrap().loss;
            *get(model) = orig;
            let numeric = (up - down) / (2.0 * h);
            diff2 += (a - numeric).powi(2);
            norm2 += a.powi(2).max(numeric.powi(2));
        };
    for c in 0..k {
        for j in 0..dim {
            probe(
                &mut model,
                &|m| &mut m.weights[c][j],
                analytic.grad_weights[c][j],
            );
        }
        probe(&mut model, &|m| &mut m.bias[c], analytic.grad_bias[c]);
    }
    (diff2 / norm2).sqrt()
}

/// Operating point by brute force: every distinct score (and +inf) as a
/// `score >= cut` threshold; best sensitivity with specificity >= target,
/// then best specificity. Returns (sensitivity, specificity).
pub fn operating_point_oracle(scores: &[f64], labels: &[bool], target: f64) -> (f64, f64) {
    let mut cuts: Vec<f64> = scores.to_vec();
    cuts.push(f64::INFINITY);
    let p = labels.iter().filter(|&&l| l).count() as f64;
    let n = labels.len() as f64 - p;
    let mut best = (-1.0, -1.0);
    for cut in cuts {
        let tp = scores
            .iter()
            .zip(labels)
            .filter(|(s, &l)| l && **s >= cut)
            .count() as f64;
        let tn = scores
            .iter()
            .zip(labels)
            .filter(|(s, &l)| !l && **s < cut)
            .count() as f64;
        let (sens, spec) = (tp / p, tn / n);
        if spec >= target && (sens > best.0 || (sens == best.0 && spec > best.1)) {
            best = (sens, spec);
        }
    }
    best
}

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Runs the `rgp` binary with `args`.
pub fn rgp(args: &[&str]) -> Run {
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_rgp"))
        .args(args)
        .env("RGP_LOG", "warn")
        .output()
        .expect("spawn rgp");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

pub fn write_config(path: &Path, value: &serde_json::Value) {
    std::fs::write(path, serde_json::to_string_pretty(value).unwrap()).unwrap();
}

/// Every regular file under `dir` with its bytes, keyed by relative path.
pub fn snapshot(dir: &Path) -> std::collections::BTreeMap<String, Vec<u8>> {
    let mut out = std::collections::BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.insert(rel, std::fs::read(&p).unwrap());
            }
        }
    }
    out
}
