//! Acceptance criteria, one pass/fail line each.
//!
//! Runs without the libtest harness so every line reaches stdout. Exits
//! nonzero when any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sylvenc::baseline::{
    build_q_kron, full_krawczyk_solve, residual_membership, sample_solutions, BaselineOptions, SampleMode, Variant,
    DEFAULT_CAP,
};
use sylvenc::blockdiag::mkw_block_solve;
use sylvenc::dense::{kron, vec};
use sylvenc::dense::PMatrix;
use sylvenc::harness::{generate, Family, GenSpec};
use sylvenc::interval::{im_kron, Disk, IMatrix, RoundingPolicy};
use sylvenc::itr::{gamma_iterate, itr_solve, ItrOptions};
use sylvenc::mkw::{mkw_solve, recheck};
use sylvenc::precond::transform_enclose;
use sylvenc::{solve, Enclosure, Method, SolveOptions, System};

const SOAK_SIZES: [usize; 3] = [2, 4, 8];
const SOAK_ALPHAS: [f64; 2] = [1e-6, 1e-2];
const SOAK_SEEDS: u64 = 5;
const SOAK_SAMPLES: usize = 200;
const ORACLE_SIZES: [usize; 3] = [2, 3, 4];
const ORACLE_SAMPLES: usize = 200;
const ITR_SIZES: [usize; 3] = [10, 20, 50];
const ITR_RATIO_BAND: (f64, f64) = (0.95, 1.05);
const ANALYTIC_WIDTH: f64 = 0.2 * (1.0 + 1e-6) + 1e-9;
const MKW_TIME_LIMIT: Duration = Duration::from_secs(60);
const TIMING_MKW_SIZE: usize = 200;
const TIMING_BASELINE_SIZE: usize = 32;
const GAMMA_TRAJECTORIES: usize = 100;
const RESCUE_FACTOR: f64 = 10.0;
const VEC_TOL: f64 = 1e-12;
const VEC_TRIPLES: usize = 100;
const KRON_SYSTEMS: usize = 50;
const KRON_SLACK: f64 = 1e-14;
const ISOTONE_CASES: usize = 10_000;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

/// One system of the soak corpus with its samples and enclosures.
struct Case {
    label: String,
    sys: System,
    samples: Vec<PMatrix>,
    mkw: Enclosure,
    itr: Enclosure,
}

fn soak_corpus() -> Vec<Case> {
    let mut out = Vec::new();
    for family in Family::GENERATED {
        for m in SOAK_SIZES {
            for alpha in SOAK_ALPHAS {
                for seed in 0..SOAK_SEEDS {
                    let sys = generate(&GenSpec::square(family, m, alpha, seed)).unwrap();
                    let samples = sample_solutions(&sys, SOAK_SAMPLES, SampleMode::Mixed, seed + 100)
                        .unwrap()
                        .solutions;
                    // a singular preconditioner is an error, counted as unverified
                    let run = |method| {
                        solve(&sys, method, &SolveOptions::default())
                            .unwrap_or_else(|e| Enclosure::failed(method, m, m, 0, e.to_string()))
                    };
                    out.push(Case {
                        label: format!("{family} m={m} alpha={alpha:e} seed={seed}"),
                        mkw: run(Method::Mkw),
                        itr: run(Method::Itr),
                        sys,
                        samples,
                    });
                }
            }
        }
    }
    out
}

fn all_inside(enc: &Enclosure, samples: &[PMatrix]) -> usize {
    samples.iter().filter(|x| enc.evaluated.contains_point(x)).count()
}

fn criterion_1(corpus: &[Case]) -> Outcome {
    let (mut verified, mut checked) = (0, 0);
    for case in corpus {
        for enc in [&case.mkw, &case.itr] {
            if !enc.verified {
                continue;
            }
            verified += 1;
            checked += case.samples.len();
            let inside = all_inside(enc, &case.samples);
            ensure!(
                inside == case.samples.len(),
                "{} {}: {inside}/{} inside",
                case.label,
                enc.method,
                case.samples.len()
            );
        }
    }
    ensure!(verified > 0, "no verified runs");
    Ok(format!("{verified}/{} runs verified, {checked} samples all contained", 2 * corpus.len()))
}

/// Componentwise real hull of the samples as `(lo, hi)` per entry.
fn sample_hull(samples: &[PMatrix]) -> Vec<(f64, f64)> {
    let len = samples[0].data().len();
    (0..len)
        .map(|k| {
            samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
                let v = x.data()[k].re;
                (lo.min(v), hi.max(v))
            })
        })
        .collect()
}

fn hull_inside(hull: &[(f64, f64)], enc: &Enclosure) -> bool {
    enc.evaluated
        .entries()
        .iter()
        .zip(hull)
        .all(|(d, &(lo, hi))| d.contains(Complex64::new(lo, 0.0)) && d.contains(Complex64::new(hi, 0.0)))
}

fn criterion_2() -> Outcome {
    let mut runs = 0;
    for m in ORACLE_SIZES {
        for seed in 0..2 {
            let sys = generate(&GenSpec::square(Family::Kyc31, m, 1e-3, seed)).unwrap();
            let samples = sample_solutions(&sys, ORACLE_SAMPLES, SampleMode::Mixed, seed).unwrap().solutions;
            let hull = sample_hull(&samples);
            let ver = full_krawczyk_solve(&sys, &BaselineOptions::default()).unwrap();
            let mkw = mkw_solve(&sys).unwrap();
            for enc in [&ver, &mkw] {
                ensure!(enc.verified, "m={m} seed={seed} {} not verified", enc.method);
                ensure!(all_inside(enc, &samples) == samples.len(), "m={m} {} misses a sample", enc.method);
                ensure!(hull_inside(&hull, enc), "m={m} {} misses the sample hull", enc.method);
                runs += 1;
            }
        }
    }
    Ok(format!("{runs} runs verified with samples and hull contained"))
}

fn criterion_3() -> Outcome {
    let mut ratios = Vec::new();
    for m in ITR_SIZES {
        let sys = generate(&GenSpec::square(Family::Kyc31, m, 1e-6, 0)).unwrap();
        let mkw = mkw_solve(&sys).unwrap();
        let itr = itr_solve(&sys, &ItrOptions::default()).unwrap();
        ensure!(mkw.verified && itr.verified, "m={m} not verified");
        let ratio = itr.evaluated.sum_rad() / mkw.evaluated.sum_rad();
        ensure!(
            (ITR_RATIO_BAND.0..=ITR_RATIO_BAND.1).contains(&ratio),
            "m={m} ratio {ratio}"
        );
        let nested = itr
            .preconditioned_box()
            .unwrap()
            .subset_of(&mkw.preconditioned_box().unwrap());
        ensure!(nested, "m={m} ITR box not nested in MKW box");
        ratios.push(format!("m={m}: {ratio:.6}"));
    }
    Ok(ratios.join(", "))
}

fn criterion_4() -> Outcome {
    let one = |v: f64, r: f64| IMatrix::from_fn(1, 1, |_, _| Disk::real(v, r));
    let sys = System::new(one(2.0, 0.0), one(1.0, 0.0), one(1.0, 0.0), one(1.0, 0.0), one(6.0, 0.3)).unwrap();
    let mut widths = Vec::new();
    for method in Method::ALL {
        let enc = solve(&sys, method, &SolveOptions::default()).unwrap();
        ensure!(enc.verified, "{method} not verified");
        let d = enc.evaluated.get(0, 0);
        let w = d.sup() - d.inf();
        ensure!(d.inf() <= 1.9 && d.sup() >= 2.1, "{method} misses [1.9, 2.1]");
        ensure!(w <= ANALYTIC_WIDTH, "{method} width {w:.17}");
        widths.push(format!("{method} {w:.12}"));
    }
    Ok(format!("widths {}", widths.join(", ")))
}

fn criterion_5() -> Outcome {
    let big = generate(&GenSpec::square(Family::Kyc31, TIMING_MKW_SIZE, 1e-6, 0)).unwrap();
    let start = Instant::now();
    let enc = mkw_solve(&big).unwrap();
    let t_mkw = start.elapsed();
    ensure!(enc.verified, "MKW at m={TIMING_MKW_SIZE} not verified");
    ensure!(t_mkw <= MKW_TIME_LIMIT, "MKW took {t_mkw:?}");
    let small = generate(&GenSpec::square(Family::Kyc31, TIMING_BASELINE_SIZE, 1e-6, 0)).unwrap();
    let start = Instant::now();
    let ver = full_krawczyk_solve(&small, &BaselineOptions::default()).unwrap();
    let t_ver = start.elapsed();
    ensure!(
        t_ver > t_mkw,
        "baseline at m={TIMING_BASELINE_SIZE} took {t_ver:?}, MKW at m={TIMING_MKW_SIZE} {t_mkw:?}"
    );
    Ok(format!(
        "MKW m={TIMING_MKW_SIZE} {:.3}s, baseline m={TIMING_BASELINE_SIZE} {:.3}s (verified={}), ratio {:.1}",
        t_mkw.as_secs_f64(),
        t_ver.as_secs_f64(),
        ver.verified,
        t_ver.as_secs_f64() / t_mkw.as_secs_f64()
    ))
}

fn criterion_6(corpus: &[Case]) -> Outcome {
    let mut n = 0;
    for case in corpus.iter().filter(|c| c.mkw.verified) {
        let ps = transform_enclose(&case.sys).unwrap();
        ensure!(recheck(&ps, &case.mkw.factored.xbox).unwrap(), "{}: recheck failed", case.label);
        n += 1;
    }
    ensure!(n > 0, "no verified runs");
    Ok(format!("{n}/{n} verified runs recheck"))
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut trajectories, mut steps) = (0, 0);
    let mut attempts = 0;
    while trajectories < GAMMA_TRAJECTORIES {
        attempts += 1;
        ensure!(attempts <= 4 * GAMMA_TRAJECTORIES, "too few verified starts");
        let family = Family::GENERATED[rng.gen_range(0..2)];
        let m = rng.gen_range(1..=6);
        let n = rng.gen_range(1..=6);
        let alpha = 10f64.powf(rng.gen_range(-8.0..-2.0));
        let sys = generate(&GenSpec {
            family,
            m,
            n,
            alpha,
            seed: rng.gen(),
        })
        .unwrap();
        let Ok(ps) = transform_enclose(&sys) else { continue };
        let mkw = mkw_solve(&sys).unwrap();
        if !mkw.verified {
            continue;
        }
        let y0 = mkw.preconditioned_box().unwrap();
        let mut ok = true;
        let mut local = 0;
        gamma_iterate(&ps, &y0, 1e-12, 100, |prev, next| {
            ok &= next.subset_of(prev) && next.sum_rad() <= prev.sum_rad();
            local += 1;
        })
        .unwrap();
        ensure!(ok, "trajectory {trajectories} ({family} {m}x{n}) not nested");
        trajectories += 1;
        steps += local;
    }
    Ok(format!("{trajectories} trajectories, {steps} steps nested"))
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let m = 4;
    let r = 1e-8;
    let mut ac = PMatrix::identity(m);
    ac.set(0, 1, Complex64::new(1.0, 0.0));
    ac.set(2, 2, Complex64::new(3.0, 0.0));
    ac.set(3, 3, Complex64::new(-2.0, 0.0));
    let sys = System::new(
        IMatrix::from_fn(m, m, |i, j| Disk::real(ac.get(i, j).re, r)),
        IMatrix::from_fn(2, 2, |i, j| Disk::real(if i == j { 2.0 + i as f64 } else { rng.gen() }, r)),
        IMatrix::identity(m),
        IMatrix::identity(2),
        IMatrix::from_fn(m, 2, |_, _| Disk::real(rng.gen::<f64>() + 0.5, r)),
    )
    .unwrap();
    let samples = sample_solutions(&sys, 200, SampleMode::Mixed, 8).unwrap().solutions;
    let hull_width: f64 = sample_hull(&samples).iter().map(|(lo, hi)| hi - lo).sum();
    let mkw = mkw_solve(&sys).unwrap();
    let mkw_width = 2.0 * mkw.evaluated.sum_rad();
    ensure!(
        !mkw.verified || mkw_width > RESCUE_FACTOR * hull_width,
        "MKW verified with width {mkw_width:e} against hull {hull_width:e}"
    );
    let blk = mkw_block_solve(&sys).unwrap();
    ensure!(blk.verified, "block variant not verified: {:?}", blk.message);
    ensure!(all_inside(&blk, &samples) == samples.len(), "block variant misses a sample");
    Ok(format!(
        "MKW verified={} width {mkw_width:.3e}; BLK width {:.3e}; hull {hull_width:.3e}",
        mkw.verified,
        2.0 * blk.evaluated.sum_rad()
    ))
}

fn random_pmatrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> PMatrix {
    PMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0)
    })
}

fn random_imatrix(rng: &mut ChaCha8Rng, n: usize) -> IMatrix {
    IMatrix::from_fn(n, n, |_, _| Disk::real(rng.gen::<f64>() * 4.0 - 2.0, rng.gen::<f64>() * 0.1))
}

fn random_disk(rng: &mut ChaCha8Rng) -> Disk {
    let mid = if rng.gen::<bool>() {
        Complex64::new(rng.gen::<f64>() * 10.0 - 5.0, 0.0)
    } else {
        Complex64::new(rng.gen::<f64>() * 10.0 - 5.0, rng.gen::<f64>() * 10.0 - 5.0)
    };
    Disk::new(mid, rng.gen::<f64>() * 2.0).unwrap()
}

/// A random disk inside `d`.
fn inner_disk(rng: &mut ChaCha8Rng, d: Disk) -> Disk {
    let rad = d.rad * rng.gen::<f64>() * 0.5;
    let room = (d.rad - rad) * 0.99 * rng.gen::<f64>();
    let dir = if d.is_real() {
        Complex64::new(if rng.gen() { 1.0 } else { -1.0 }, 0.0)
    } else {
        Complex64::from_polar(1.0, rng.gen::<f64>() * std::f64::consts::TAU)
    };
    Disk::new(d.mid + dir * room, rad).unwrap()
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    for _ in 0..VEC_TRIPLES {
        let (m, n) = (rng.gen_range(1..=5), rng.gen_range(1..=5));
        let a = random_pmatrix(&mut rng, m, m);
        let x = random_pmatrix(&mut rng, m, n);
        let b = random_pmatrix(&mut rng, n, n);
        let left = vec(&a.matmul(&x).unwrap().matmul(&b).unwrap());
        let right = kron(&b.transpose(), &a).unwrap().matmul(&vec(&x)).unwrap();
        let err = left.sub(&right).unwrap().max_abs() / (1.0 + left.max_abs());
        worst = worst.max(err);
    }
    ensure!(worst <= VEC_TOL, "vec identity error {worst:e}");

    for k in 0..KRON_SYSTEMS {
        let n = 2;
        let sys = System::new(
            random_imatrix(&mut rng, n),
            random_imatrix(&mut rng, n),
            random_imatrix(&mut rng, n),
            random_imatrix(&mut rng, n),
            random_imatrix(&mut rng, n),
        )
        .unwrap();
        let q = build_q_kron(&sys, DEFAULT_CAP).unwrap().q;
        let direct = im_kron(&sys.b.transpose(), &sys.a)
            .unwrap()
            .add(&im_kron(&sys.d.transpose(), &sys.c).unwrap())
            .unwrap();
        for (x, y) in q.entries().iter().zip(direct.entries()) {
            let scale = 1.0 + x.mag().max(y.mag());
            ensure!(
                (x.mid - y.mid).norm() <= KRON_SLACK * scale && (x.rad - y.rad).abs() <= KRON_SLACK * scale,
                "system {k}: {x:?} vs {y:?}"
            );
        }
    }

    let pol = RoundingPolicy::default();
    let mut violations = 0;
    for _ in 0..ISOTONE_CASES {
        let (xo, yo) = (random_disk(&mut rng), random_disk(&mut rng));
        let (xi, yi) = (inner_disk(&mut rng, xo), inner_disk(&mut rng, yo));
        let mut check = |outer: sylvenc::Result<Disk>, inner: sylvenc::Result<Disk>| {
            if let (Ok(o), Ok(i)) = (outer, inner) {
                if !i.subset_of(&o) {
                    violations += 1;
                }
            }
        };
        check(pol.add(xo, yo), pol.add(xi, yi));
        check(pol.sub(xo, yo), pol.sub(xi, yi));
        check(pol.mul(xo, yo), pol.mul(xi, yi));
        check(pol.div(xo, yo), pol.div(xi, yi));
    }
    ensure!(violations == 0, "{violations} isotonicity violations");
    Ok(format!(
        "vec error {worst:.2e}; {KRON_SYSTEMS} Kronecker systems agree; {ISOTONE_CASES} isotonicity cases clean"
    ))
}

fn criterion_10(corpus: &[Case]) -> Outcome {
    let mut n = 0;
    for case in corpus {
        for x in &case.samples {
            for v in Variant::ALL {
                ensure!(
                    residual_membership(&case.sys, x, v).unwrap(),
                    "{}: sample rejected by {v:?}",
                    case.label
                );
            }
            n += 1;
        }
    }
    Ok(format!("{n} samples pass all four variants"))
}

fn run(id: u32, name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    });
    let secs = start.elapsed().as_secs_f64();
    let (tag, detail) = match &outcome {
        Ok(d) => ("PASS", d),
        Err(d) => ("FAIL", d),
    };
    println!("criterion {id:>2} {tag} {name} [{secs:.2}s]: {detail}");
    outcome.is_ok()
}

fn main() -> ExitCode {
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    if filter.iter().any(|f| !"acceptance".contains(f.as_str())) {
        return ExitCode::SUCCESS;
    }
    let corpus = soak_corpus();
    let results = [
        run(1, "soundness soak", || criterion_1(&corpus)),
        run(2, "oracle agreement", criterion_2),
        run(3, "ITR ratio", criterion_3),
        run(4, "1x1 analytic case", criterion_4),
        run(5, "complexity scaling", criterion_5),
        run(6, "inflation recheck", || criterion_6(&corpus)),
        run(7, "gamma nesting", criterion_7),
        run(8, "block-diagonal rescue", criterion_8),
        run(9, "identity suite", criterion_9),
        run(10, "residual predicate", || criterion_10(&corpus)),
    ];
    let passed = results.iter().filter(|&&ok| ok).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
