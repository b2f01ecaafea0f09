//! Size sweeps over the enclosure methods.

use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::gen::{generate, Family, GenSpec};
use super::metrics::{containment_rate, mean_r, ratio_vs};
use crate::baseline::{sample_solutions, SampleMode, SampleSet, DEFAULT_CAP};
use crate::enclosure::{Enclosure, Method};
use crate::error::{Error, Result};
use crate::solve::{solve, SolveOptions};
use crate::system::System;

pub const EXIT_OK: i32 = 0;
pub const EXIT_UNVERIFIED: i32 = 2;
pub const EXIT_UNSOUND: i32 = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub family: Family,
    pub sizes: Vec<usize>,
    pub alpha: f64,
    pub seed: u64,
    pub methods: Vec<Method>,
    /// Sampled member solutions per size; zero disables the check.
    pub samples: usize,
    pub repeats: usize,
    pub solve: SolveOptions,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            family: Family::Kyc31,
            sizes: vec![10, 20],
            alpha: 1e-6,
            seed: 0,
            methods: vec![Method::Mkw, Method::Itr],
            samples: 50,
            repeats: 3,
            solve: SolveOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CellStatus {
    Ok,
    Unverified,
    SizeCap,
    Error,
    SoundnessViolation,
}

impl CellStatus {
    fn as_str(self) -> &'static str {
        match self {
            CellStatus::Ok => "ok",
            CellStatus::Unverified => "unverified",
            CellStatus::SizeCap => "size-cap",
            CellStatus::Error => "error",
            CellStatus::SoundnessViolation => "soundness-violation",
        }
    }
}

/// One (size, method) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub family: Family,
    pub m: usize,
    pub n: usize,
    pub seed: u64,
    pub method: Method,
    /// Median wall time in seconds.
    pub time_s: Option<f64>,
    pub verified: bool,
    #[serde(rename = "meanR")]
    pub mean_r: Option<f64>,
    pub ratio_vs_mkw: Option<f64>,
    pub sample_containment_rate: Option<f64>,
    pub iterations: usize,
    pub status: CellStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BenchReport {
    pub methods: Vec<Method>,
    pub records: Vec<BenchRecord>,
}

/// Generator seed of the cell with row size `m`.
pub fn cell_seed(seed: u64, m: usize) -> u64 {
    seed.wrapping_add(m as u64)
}

/// Median of the elapsed times of `repeats` runs, with the first result.
fn timed<T>(repeats: usize, mut f: impl FnMut() -> Result<T>) -> Result<(T, f64)> {
    let mut times = Vec::with_capacity(repeats.max(1));
    let mut first = None;
    for _ in 0..repeats.max(1) {
        let start = Instant::now();
        let out = f()?;
        times.push(start.elapsed().as_secs_f64());
        first.get_or_insert(out);
    }
    times.sort_by(f64::total_cmp);
    Ok((first.unwrap(), times[times.len() / 2]))
}

fn samples_for(sys: &System, count: usize, seed: u64) -> Result<Option<SampleSet>> {
    if count == 0 || sys.m() * sys.n() > DEFAULT_CAP {
        return Ok(None);
    }
    sample_solutions(sys, count, SampleMode::Mixed, seed).map(Some)
}

fn record_for(
    spec: &GenSpec,
    method: Method,
    outcome: Result<(Enclosure, f64)>,
    mkw: Option<&Enclosure>,
    samples: Option<&SampleSet>,
) -> Result<BenchRecord> {
    let mut rec = BenchRecord {
        family: spec.family,
        m: spec.m,
        n: spec.n,
        seed: spec.seed,
        method,
        time_s: None,
        verified: false,
        mean_r: None,
        ratio_vs_mkw: None,
        sample_containment_rate: None,
        iterations: 0,
        status: CellStatus::Error,
        message: None,
    };
    let (enc, time) = match outcome {
        Ok(v) => v,
        Err(Error::BaselineSizeCap { size, cap }) => {
            rec.status = CellStatus::SizeCap;
            rec.message = Some(Error::BaselineSizeCap { size, cap }.to_string());
            return Ok(rec);
        }
        Err(e) => {
            rec.message = Some(e.to_string());
            return Ok(rec);
        }
    };
    rec.time_s = Some(time);
    rec.iterations = enc.iterations;
    rec.message = enc.message.clone();
    if !enc.verified {
        rec.status = CellStatus::Unverified;
        return Ok(rec);
    }
    rec.verified = true;
    rec.status = CellStatus::Ok;
    rec.mean_r = Some(mean_r(&enc.evaluated));
    rec.ratio_vs_mkw = if method == Method::Mkw { Some(1.0) } else { ratio_vs(&enc, mkw)? };
    if let Some(s) = samples {
        let rate = containment_rate(&enc, s);
        rec.sample_containment_rate = Some(rate);
        if rate < 1.0 {
            rec.verified = false;
            rec.status = CellStatus::SoundnessViolation;
        }
    }
    Ok(rec)
}

/// Runs every method on every size. Cells run one after another.
pub fn run_benchmark(cfg: &BenchConfig) -> Result<BenchReport> {
    if cfg.methods.is_empty() || cfg.sizes.is_empty() {
        return Err(Error::InvalidInput("need at least one size and one method".into()));
    }
    let mut report = BenchReport {
        methods: cfg.methods.clone(),
        records: Vec::new(),
    };
    for &m in &cfg.sizes {
        let spec = GenSpec::square(cfg.family, m, cfg.alpha, cell_seed(cfg.seed, m));
        let sys = generate(&spec)?;
        let samples = samples_for(&sys, cfg.samples, spec.seed)?;
        let mut mkw: Option<Enclosure> = None;
        let mut row = Vec::new();
        for &method in &cfg.methods {
            let outcome = timed(cfg.repeats, || solve(&sys, method, &cfg.solve));
            if method == Method::Mkw {
                mkw = outcome.as_ref().ok().map(|(e, _)| e.clone());
            }
            row.push((method, outcome));
        }
        if mkw.is_none() && cfg.methods.iter().any(|&x| x != Method::Mkw) {
            mkw = solve(&sys, Method::Mkw, &cfg.solve).ok();
        }
        for (method, outcome) in row {
            report
                .records
                .push(record_for(&spec, method, outcome, mkw.as_ref(), samples.as_ref())?);
        }
    }
    Ok(report)
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x}"))
}

impl BenchReport {
    /// Distinct sizes in order of appearance.
    fn sizes(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = Vec::new();
        for r in &self.records {
            if !out.contains(&(r.m, r.n)) {
                out.push((r.m, r.n));
            }
        }
        out
    }

    fn cell(&self, mn: (usize, usize), method: Method) -> Option<&BenchRecord> {
        self.records.iter().find(|r| (r.m, r.n) == mn && r.method == method)
    }

    /// One row per size; time, ratio, verified and containment columns per
    /// method.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,n");
        for col in ["time", "ratio", "verified", "containment"] {
            for m in &self.methods {
                write!(out, ",{col}_{m}").unwrap();
            }
        }
        out.push('\n');
        for mn in self.sizes() {
            write!(out, "{},{}", mn.0, mn.1).unwrap();
            let cells: Vec<Option<&BenchRecord>> = self.methods.iter().map(|&m| self.cell(mn, m)).collect();
            for c in &cells {
                let v = match c {
                    Some(r) if r.status == CellStatus::SizeCap => "size-cap".to_string(),
                    Some(r) => opt(r.time_s),
                    None => "NA".to_string(),
                };
                write!(out, ",{v}").unwrap();
            }
            for c in &cells {
                write!(out, ",{}", opt(c.and_then(|r| r.ratio_vs_mkw))).unwrap();
            }
            for c in &cells {
                let v = c.map_or("NA", |r| if r.verified { "true" } else { r.status.as_str() });
                write!(out, ",{v}").unwrap();
            }
            for c in &cells {
                write!(out, ",{}", opt(c.and_then(|r| r.sample_containment_rate))).unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r)?);
            out.push('\n');
        }
        Ok(out)
    }

    pub fn has_soundness_violation(&self) -> bool {
        self.records.iter().any(|r| r.status == CellStatus::SoundnessViolation)
    }

    /// Size-capped baseline cells do not count as failures.
    pub fn exit_code(&self) -> i32 {
        if self.has_soundness_violation() {
            EXIT_UNSOUND
        } else if self
            .records
            .iter()
            .any(|r| matches!(r.status, CellStatus::Unverified | CellStatus::Error))
        {
            EXIT_UNVERIFIED
        } else {
            EXIT_OK
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> BenchConfig {
        BenchConfig {
            sizes: vec![2, 3],
            samples: 20,
            repeats: 1,
            seed: 7,
            ..Default::default()
        }
    }

    #[test]
    fn two_sizes_two_methods() {
        let report = run_benchmark(&small()).unwrap();
        assert_eq!(report.records.len(), 4);
        let csv = report.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(
            lines[0],
            "m,n,time_MKW,time_ITR,ratio_MKW,ratio_ITR,verified_MKW,verified_ITR,containment_MKW,containment_ITR"
        );
        assert!(lines.iter().skip(1).all(|l| l.split(',').count() == 10));
        assert_eq!(report.exit_code(), EXIT_OK);
    }

    #[test]
    fn mkw_ratio_is_one_and_rates_in_range() {
        let report = run_benchmark(&small()).unwrap();
        for r in &report.records {
            assert!(r.verified);
            if r.method == Method::Mkw {
                assert_eq!(r.ratio_vs_mkw, Some(1.0));
            }
            let rate = r.sample_containment_rate.unwrap();
            assert!((0.0..=1.0).contains(&rate));
        }
    }

    #[test]
    fn baseline_above_cap_is_marked() {
        let cfg = BenchConfig {
            sizes: vec![3],
            methods: vec![Method::Ver],
            samples: 0,
            repeats: 1,
            solve: SolveOptions {
                baseline_cap: 4,
                ..Default::default()
            },
            ..Default::default()
        };
        let report = run_benchmark(&cfg).unwrap();
        assert_eq!(report.records[0].status, CellStatus::SizeCap);
        assert!(report.to_csv().lines().nth(1).unwrap().contains("size-cap"));
        assert_eq!(report.exit_code(), EXIT_OK);
    }

    #[test]
    fn jsonl_is_deterministic_apart_from_time() {
        let strip = |r: &BenchReport| {
            r.records
                .iter()
                .map(|x| BenchRecord { time_s: None, ..x.clone() })
                .collect::<Vec<_>>()
        };
        let a = run_benchmark(&small()).unwrap();
        let b = run_benchmark(&small()).unwrap();
        assert_eq!(strip(&a), strip(&b));
        assert_eq!(a.to_jsonl().unwrap().lines().count(), 4);
    }

    #[test]
    fn median_of_three() {
        let mut k = 0;
        let (v, t) = timed(3, || {
            k += 1;
            Ok(k)
        })
        .unwrap();
        assert_eq!(v, 1);
        assert!(t >= 0.0);
        assert_eq!(k, 3);
    }
}
