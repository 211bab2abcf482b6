//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.

use std::collections::BTreeMap;
use std::process::Command;
use std::time::{Duration, Instant};

use eulerzeta_core::constants::{derivative_at_one, laurent_check};
use eulerzeta_core::exact::ExactRational;
use eulerzeta_core::transform::telescope_check;
use eulerzeta_core::zeta::{default_depth, zeta_c_derivative, zeta_c_derivative_k1, zeta_planned, zeta_with};
use eulerzeta_core::{
    apply_delta, bernoulli_oracle, delta_power, sondow_neg_int, tail_bound, verify_identity, weight_vector,
    zeta_neg_int, Complex64, EvalPlan, IdentityId, Modulus,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn modulus(c: u32) -> Modulus {
    Modulus::new(c).unwrap()
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn zeta_two() -> Outcome {
    let exact = std::f64::consts::PI.powi(2) / 6.0;
    let s = re(2.0);
    let start = Instant::now();
    let eval = zeta_with(s, Modulus::TWO, 3, 1e-10).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let err = (eval.value.re - exact).abs();
    ensure(eval.plan.k >= 3 && eval.plan.c == Modulus::TWO, || format!("plan {:?}", eval.plan))?;
    ensure(eval.plan.blocks <= 1000, || format!("N = {}", eval.plan.blocks))?;
    ensure(err <= 1e-10, || format!("|error| = {err:e}"))?;
    ensure(elapsed < Duration::from_millis(50), || format!("took {elapsed:?}"))?;
    Ok(format!("N = {}, |error| = {err:.2e}, {:.3} ms", eval.plan.blocks, elapsed.as_secs_f64() * 1e3))
}

fn anchors_at_zero() -> Outcome {
    let blocks = 100_000;
    let s = re(0.0);
    let z0 = zeta_planned(s, EvalPlan::new(Modulus::TWO, 1, blocks, 1e-4).unwrap()).map_err(|e| e.to_string())?;
    let err0 = (z0.value.re + 0.5).abs().max(z0.value.im.abs());
    ensure(err0 <= 1e-4, || format!("zeta(0) error {err0:e}"))?;

    let closed = (2.0 * std::f64::consts::PI / 3f64.powf(1.5)).ln();
    let explicit = zeta_c_derivative_k1(s, Modulus::THREE, blocks).map_err(|e| e.to_string())?;
    let transformed =
        zeta_c_derivative(s, EvalPlan::new(Modulus::THREE, 1, blocks, 1e-4).unwrap()).map_err(|e| e.to_string())?;
    let err1 = (explicit.re - closed).abs();
    let err2 = (transformed.value.re - closed).abs();
    ensure(err1 <= 1e-4 && err2 <= 1e-4, || format!("derivative errors {err1:e}, {err2:e}"))?;
    Ok(format!("|zeta(0) + 1/2| = {err0:.2e}, derivative errors {err1:.2e} / {err2:.2e}"))
}

/// `ζ(-m) = -B⁺_{m+1}/(m+1)` with Bernoulli numbers from the Akiyama-Tanigawa table.
fn akiyama_tanigawa(m: u32) -> ExactRational {
    let n = m as usize + 1;
    let mut row: Vec<BigRational> = (0..=n).map(|j| BigRational::new(1.into(), BigInt::from(j + 1))).collect();
    for len in (1..=n).rev() {
        for j in 0..len {
            row[j] = (&row[j] - &row[j + 1]) * BigRational::from_integer(BigInt::from(j + 1));
        }
    }
    ExactRational::from(-(&row[0]) / BigRational::from_integer(BigInt::from(n)))
}

fn exact_suite() -> Outcome {
    for m in 0..=20 {
        let oracle = akiyama_tanigawa(m);
        let sondow = sondow_neg_int(m);
        let bernoulli = bernoulli_oracle(m);
        ensure(sondow == oracle && bernoulli == oracle, || format!("m = {m}: {sondow} / {bernoulli} vs {oracle}"))?;
        for c in 2..=6 {
            let v = zeta_neg_int(m, modulus(c));
            ensure(v == oracle, || format!("m = {m}, c = {c}: {v} vs {oracle}"))?;
        }
    }
    for t in 1..=10 {
        for c in 2..=6 {
            ensure(zeta_neg_int(2 * t, modulus(c)).is_zero(), || format!("zeta(-{}) != 0 at c = {c}", 2 * t))?;
        }
    }
    Ok("m = 0..20, c = 2..6 identical; zeta(-2t) = 0 for t = 1..10".into())
}

fn cross_consistency() -> Outcome {
    let tol = 1e-8;
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_917);
    let mut worst_ratio: f64 = 0.0;
    let mut worst_est: f64 = 0.0;
    let mut samples = 0;
    while samples < 200 {
        let s = Complex64::new(rng.gen_range(-3.0..4.0), rng.gen_range(-20.0..=20.0));
        if (s - re(1.0)).norm() < 1e-6 {
            continue;
        }
        samples += 1;
        let k0 = default_depth(s);
        let mut evals = Vec::with_capacity(4);
        for c in [Modulus::TWO, Modulus::THREE] {
            for k in [k0, k0 + 1] {
                let e = zeta_with(s, c, k, tol).map_err(|e| format!("s = {s}, c = {c}, k = {k}: {e}"))?;
                ensure(e.est_error <= tol, || format!("s = {s}, c = {c}, k = {k}: est_error {:e}", e.est_error))?;
                worst_est = worst_est.max(e.est_error);
                evals.push(e);
            }
        }
        for (i, a) in evals.iter().enumerate() {
            for b in &evals[i + 1..] {
                let gap = (a.value - b.value).norm();
                let budget = a.est_error + b.est_error;
                worst_ratio = worst_ratio.max(gap / budget);
                ensure(gap <= budget, || {
                    format!("s = {s}: {:?} vs {:?} differ by {gap:e} > {budget:e}", a.plan, b.plan)
                })?;
            }
        }
    }
    Ok(format!("200 points, tol {tol:e}, max est_error {worst_est:.2e}, max gap/budget {worst_ratio:.3}"))
}

fn laurent_slopes() -> Outcome {
    let mut worst: f64 = 0.0;
    for c in 2..=6 {
        let slope = laurent_check(modulus(c), 1e-3).map_err(|e| e.to_string())?;
        let l = (c as f64).ln();
        let closed = l * (0.577_215_664_901_532_9 - l / 2.0);
        ensure((derivative_at_one(modulus(c)) - closed).abs() < 1e-15, || format!("c = {c}: closed form"))?;
        let err = (slope - closed).abs();
        worst = worst.max(err);
        ensure(err <= 1e-6, || format!("c = {c}: slope {slope} vs {closed}"))?;
    }
    Ok(format!("c = 2..6, max |slope - closed form| = {worst:.2e}"))
}

fn identity_catalogue() -> Outcome {
    let mut lines = Vec::new();
    for id in IdentityId::ALL {
        let tol = id.default_tol();
        let v = verify_identity(id, 100_000, tol).map_err(|e| e.to_string())?;
        let rate = v.report.rate.map(|r| format!("{r:.2}")).unwrap_or_else(|| "n/a".into());
        ensure(v.pass, || {
            format!("{id}: gap {:e} (tol {tol:e}), closed-form gap {:e}", v.report.abs_gap, v.closed_form_gap)
        })?;
        ensure(v.closed_form_gap <= 1e-9, || format!("{id}: closed-form gap {:e}", v.closed_form_gap))?;
        lines.push(format!(
            "{id}: gap {:.2e} < {tol:e}, rate {rate}, closed-form gap {:.1e}",
            v.report.abs_gap, v.closed_form_gap
        ));
    }
    Ok(format!("\n    {}", lines.join("\n    ")))
}

fn convolve(a: &BTreeMap<u64, BigInt>, b: &BTreeMap<u64, BigInt>) -> BTreeMap<u64, BigInt> {
    let mut out: BTreeMap<u64, BigInt> = BTreeMap::new();
    for (i, x) in a {
        for (j, y) in b {
            *out.entry(i + j).or_default() += x * y;
        }
    }
    out.retain(|_, w| !w.is_zero());
    out
}

fn operator_suite() -> Outcome {
    for c in 2..=6 {
        let base = weight_vector(modulus(c), 1).to_map();
        for k in 0..=10 {
            let wv = weight_vector(modulus(c), k);
            if k > 0 {
                ensure(wv.sum().is_zero(), || format!("weights of c = {c}, k = {k} do not sum to zero"))?;
            }
            let next = convolve(&wv.to_map(), &base);
            ensure(weight_vector(modulus(c), k + 1).to_map() == next, || format!("convolution at c = {c}, k = {k}"))?;
        }
        for m in 0..=6u32 {
            for k in m + 1..=m + 2 {
                let wv = weight_vector(modulus(c), k).to_map();
                for n in 1..=30u64 {
                    let exact: BigInt = wv.iter().map(|(j, w)| w * BigInt::from(n + j).pow(m)).sum();
                    ensure(exact.is_zero(), || format!("n^{m} survives c = {c}, k = {k}"))?;
                    let float = apply_delta(modulus(c), k, |i| Ok::<_, ()>(re((i as f64).powi(m as i32))), n).unwrap();
                    let mass: f64 = wv.values().map(|w| w.abs().to_string().parse::<f64>().unwrap()).sum();
                    let scale = mass * ((n + (c * k) as u64) as f64).powi(m as i32);
                    ensure(float.norm() <= 1e-9 * scale, || format!("float n^{m} at c = {c}, k = {k}, n = {n}"))?;
                }
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1000 {
        let c = rng.gen_range(2..=6);
        let k = rng.gen_range(0..=6u32);
        let n = rng.gen_range(1..=100u64);
        let s = Complex64::new(-(k as f64) + rng.gen_range(0.0..=1.0) * (4.0 + k as f64), rng.gen_range(-10.0..=10.0));
        let d = delta_power(modulus(c), k, n, s).norm();
        let bound = tail_bound(modulus(c), k, n, s).map_err(|e| e.to_string())?;
        ensure(d <= bound * (1.0 + 1e-12), || format!("bound fails at c = {c}, k = {k}, n = {n}, s = {s}"))?;
    }

    let mut worst: f64 = 0.0;
    for _ in 0..300 {
        let c = rng.gen_range(2..=5);
        let k = rng.gen_range(0..=4u32);
        let s = Complex64::new(1.0 - k as f64 + 1e-3 + 4.0 * rng.gen::<f64>(), rng.gen_range(-10.0..10.0));
        let blocks = rng.gen_range(2..=20);
        let (lhs, rhs) = telescope_check(modulus(c), k, s, blocks).map_err(|e| e.to_string())?;
        let rel = (lhs - rhs).norm() / lhs.norm().max(rhs.norm()).max(f64::MIN_POSITIVE);
        worst = worst.max(rel);
        ensure(rel <= 1e-11, || format!("telescoping at c = {c}, k = {k}, s = {s}, N = {blocks}: {rel:e}"))?;
    }
    Ok(format!("zero-sum, convolution, annihilation, 1000 bound samples, telescoping max rel {worst:.1e}"))
}

fn run_binary(args: &[&str], threads: &str) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_eulerzeta"))
        .args(args)
        .env("RAYON_NUM_THREADS", threads)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || format!("{args:?} exited with {:?}", out.status.code()))?;
    Ok(out.stdout)
}

fn determinism() -> Outcome {
    let invocations: [&[&str]; 6] = [
        &["zeta", "--s", "-2.5,13", "--tol", "1e-9"],
        &["exact", "--m", "18", "--c", "5", "--check"],
        &["verify", "--identity", "gen2", "--N", "5000", "--csv"],
        &["study", "--s", "0.5", "--c", "2,3", "--k", "2..6", "--N", "10,100,1000"],
        &["study", "--s", "-1.25,4", "--c", "2..5", "--k", "1..5", "--N", "16,64,256,1024", "--format", "text"],
        &["study", "--s", "3", "--c", "2,3", "--k", "1..4", "--N", "50,500", "--csv"],
    ];
    for args in invocations {
        let first = run_binary(args, "8")?;
        let second = run_binary(args, "8")?;
        let serial = run_binary(args, "1")?;
        ensure(!first.is_empty(), || format!("{args:?} printed nothing"))?;
        ensure(first == second && first == serial, || format!("{args:?} output differs between runs"))?;
    }
    Ok(format!("{} invocations byte-identical across repeats and thread counts", invocations.len()))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("zeta(2) at c = 2, k >= 3, N <= 1000", zeta_two),
        ("zeta(0) and zeta'_3(0) by the k = 1 continuation", anchors_at_zero),
        ("exact zeta(-m) suite", exact_suite),
        ("cross-modulus and depth consistency", cross_consistency),
        ("Laurent slope at s = 1", laurent_slopes),
        ("product identity catalogue", identity_catalogue),
        ("operator property suite", operator_suite),
        ("CLI determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
