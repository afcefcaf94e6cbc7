//! Acceptance suite. Each criterion prints one PASS/FAIL line; the process
//! exits non-zero if any criterion fails.

use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rdiscord_core::discord::{renyi_discord, vn_discord};
use rdiscord_core::dynamics::{
    bath_degeneracy, evolve, evolve_bruteforce, partition_function, BathParams, DimerParams,
};
use rdiscord_core::experiment::{detect_plateau, run_timeseries, ExperimentConfig};
use rdiscord_core::matfun::{self, CMatrix, HermitianOperator, C64};
use rdiscord_core::states::{
    ci_state, sci_params, sci_state, x_state, CIStateParams, XStateParams,
};
use rdiscord_core::{DensityMatrix, Error, OptimizerSettings, RenyiOrder};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn order(alpha: f64) -> RenyiOrder {
    RenyiOrder::new(alpha).unwrap()
}

fn d_alpha(rho: &DensityMatrix, alpha: f64) -> f64 {
    renyi_discord(rho, order(alpha), &OptimizerSettings::default())
        .unwrap()
        .value
}

fn fixture(name: &str) -> ExperimentConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name);
    ExperimentConfig::from_json(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

fn random_density(rng: &mut impl Rng, n: usize, rank: usize, dims: Vec<usize>) -> DensityMatrix {
    let a = random_matrix(rng, n, rank);
    let rho = &a * a.adjoint();
    let tr = rho.trace();
    DensityMatrix::new(rho.map(|z| z / tr), dims).unwrap()
}

fn random_unitary(rng: &mut impl Rng, n: usize) -> CMatrix {
    let a = random_matrix(rng, n, n);
    let h = HermitianOperator::hermitized(&(&a + a.adjoint()), vec![n]).unwrap();
    matfun::unitary_exp(&h, 2.0).unwrap()
}

fn random_x_state(rng: &mut impl Rng) -> DensityMatrix {
    let w: Vec<f64> = (0..4).map(|_| rng.random_range(0.05..1.0)).collect();
    let s: f64 = w.iter().sum();
    let [a, b, c, d] = [w[0] / s, w[1] / s, w[2] / s, w[3] / s];
    let phase = |rng: &mut dyn rand::RngCore| {
        C64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU))
    };
    let delta = phase(rng) * (a * d).sqrt() * rng.random_range(0.0..1.0);
    let beta_off = phase(rng) * (b * c).sqrt() * rng.random_range(0.0..1.0);
    x_state(&XStateParams {
        a,
        b,
        c,
        d,
        delta,
        beta_off,
    })
    .unwrap()
}

fn pauli() -> [CMatrix; 3] {
    let z = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    [
        CMatrix::from_row_slice(2, 2, &[z, one, one, z]),
        CMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        CMatrix::from_row_slice(2, 2, &[one, z, z, -one]),
    ]
}

/// `(I + Σ c_i σ_i ⊗ σ_i) / 4`.
fn bell_diagonal(c: [f64; 3]) -> DensityMatrix {
    let mut m = CMatrix::identity(4, 4);
    for (ci, s) in c.iter().zip(pauli()) {
        m += s.kronecker(&s).map(|z| z * *ci);
    }
    DensityMatrix::new(m.map(|z| z / 4.0), vec![2, 2]).unwrap()
}

/// Closed-form discord of a Bell-diagonal state: mutual information minus
/// the classical correlation `1 - h((1 + c)/2)` with `c = max|c_i|`.
fn bell_diagonal_discord(c: [f64; 3]) -> f64 {
    let [c1, c2, c3] = c;
    let lambdas = [
        (1.0 - c1 - c2 - c3) / 4.0,
        (1.0 - c1 + c2 + c3) / 4.0,
        (1.0 + c1 - c2 + c3) / 4.0,
        (1.0 + c1 + c2 - c3) / 4.0,
    ];
    let xlogx = |x: f64| if x > 0.0 { x * x.log2() } else { 0.0 };
    let mutual = 2.0 + lambdas.iter().map(|&l| xlogx(l)).sum::<f64>();
    let cmax = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let classical = xlogx(1.0 - cmax) / 2.0 + xlogx(1.0 + cmax) / 2.0;
    mutual - classical
}

fn reference_dimer() -> DimerParams {
    DimerParams {
        eps: [20.0, 10.0, 22.0, 12.0],
        j1: 10.0,
        j2: 12.0,
        gamma: [1.0, 1.1, 0.9, 1.2],
    }
}

fn reference_bath() -> BathParams {
    BathParams {
        n1: 20,
        n2: 22,
        alpha1: 250.0,
        alpha2: 200.0,
        q: 30.0,
        temperature: 77.0,
    }
}

fn degeneracy_sum_rule() -> Outcome {
    for n in (2..=24u32).step_by(2) {
        let mut total: u128 = 0;
        for two_j in (0..=n).step_by(2) {
            total += bath_degeneracy(n, two_j).map_err(|e| e.to_string())? * (two_j as u128 + 1);
        }
        ensure(total == 1u128 << n, || {
            format!("N = {n}: sum {total} != 2^{n}")
        })?;
    }
    Ok("sum_j nu(N,j)(2j+1) = 2^N for every even N in 2..=24".into())
}

fn partition_limits() -> Outcome {
    let mut hot = reference_bath();
    hot.temperature = f64::INFINITY;
    let z = partition_function(&hot).unwrap();
    let expected = 2f64.powi(42);
    let rel_hot = (z - expected).abs() / expected;
    ensure(rel_hot <= 1e-12, || {
        format!("Z(beta=0) relative error {rel_hot:.3e}")
    })?;

    let mut free = reference_bath();
    free.q = 0.0;
    let beta = free.beta();
    let single = |n: u32, alpha: f64| (2.0 * (beta * alpha / 2.0).cosh()).powi(n as i32);
    let z = partition_function(&free).unwrap();
    let expected = single(20, 250.0) * single(22, 200.0);
    let rel_free = (z - expected).abs() / expected;
    ensure(rel_free <= 1e-10, || {
        format!("Z(q=0) relative error {rel_free:.3e}")
    })?;
    Ok(format!(
        "Z(beta=0) rel err {rel_hot:.1e}, Z(q=0) rel err {rel_free:.1e}"
    ))
}

fn dynamics_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let mut range = |lo: f64, hi: f64| rng.random_range(lo..hi);
        let d = DimerParams {
            eps: [
                range(0.0, 25.0),
                range(0.0, 25.0),
                range(0.0, 25.0),
                range(0.0, 25.0),
            ],
            j1: range(0.0, 12.0),
            j2: range(0.0, 12.0),
            gamma: [
                range(0.0, 2.0),
                range(0.0, 2.0),
                range(0.0, 2.0),
                range(0.0, 2.0),
            ],
        };
        let bath = BathParams {
            n1: 2,
            n2: 2,
            alpha1: range(0.0, 5.0),
            alpha2: range(0.0, 5.0),
            q: range(-3.0, 3.0),
            temperature: range(0.5, 10.0),
        };
        let rho0 = random_density(&mut rng, 4, 4, vec![2, 2]);
        for t in [0.1, 1.0, 5.0] {
            let a = evolve(&rho0, &d, &bath, t).unwrap();
            let b = evolve_bruteforce(&rho0, &d, &bath, t).unwrap();
            worst = worst.max(matfun::max_abs_diff(a.matrix(), b.matrix()));
        }
    }
    ensure(worst <= 1e-10, || {
        format!("max entrywise deviation {worst:.3e}")
    })?;
    Ok(format!("max entrywise deviation {worst:.1e}"))
}

fn von_neumann_limit() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let settings = OptimizerSettings::default();
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let rho = random_x_state(&mut rng);
        let vn = vn_discord(&rho, &settings).unwrap().value;
        for alpha in [1.0 - 1e-4, 1.0 + 1e-4] {
            worst = worst.max((d_alpha(&rho, alpha) - vn).abs());
        }
    }
    ensure(worst < 1e-2, || format!("|D_(1+-1e-4) - D| = {worst:.3e}"))?;

    let mut worst_closed = 0.0f64;
    for c in [
        [0.5, -0.3, 0.3],
        [0.9, -0.1, 0.1],
        [-0.2, 0.6, 0.4],
        [0.3, 0.3, -0.8],
        [-1.0, 1.0, 1.0],
    ] {
        let vn = vn_discord(&bell_diagonal(c), &settings).unwrap().value;
        worst_closed = worst_closed.max((vn - bell_diagonal_discord(c)).abs());
    }
    ensure(worst_closed < 1e-4, || {
        format!("Bell-diagonal closed form off by {worst_closed:.3e}")
    })?;
    Ok(format!(
        "alpha -> 1 gap {worst:.1e}, Bell-diagonal closed form gap {worst_closed:.1e}"
    ))
}

fn zero_discord() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut states = Vec::new();
    for rank in [1, 2] {
        let a = random_density(&mut rng, 2, rank, vec![2]);
        let b = random_density(&mut rng, 2, 2, vec![2]);
        states.push(a.tensor(&b));
    }
    for _ in 0..3 {
        // Σ p_ij |u_i⟩⟨u_i| ⊗ |v_j⟩⟨v_j| in random local bases.
        let p: Vec<f64> = (0..4).map(|_| rng.random_range(0.0..1.0)).collect();
        let s: f64 = p.iter().sum();
        let diag = HermitianOperator::diagonal(&p.iter().map(|v| v / s).collect::<Vec<_>>());
        let u = random_unitary(&mut rng, 2).kronecker(&random_unitary(&mut rng, 2));
        let rho = DensityMatrix::from_operator(diag)
            .unwrap()
            .evolve_by(&u)
            .unwrap();
        states.push(DensityMatrix::new(rho.matrix().clone(), vec![2, 2]).unwrap());
    }
    let mut worst = 0.0f64;
    for rho in &states {
        for alpha in [0.5, 0.9, 1.5, 2.0] {
            worst = worst.max(d_alpha(rho, alpha).abs());
        }
    }
    ensure(worst < 1e-6, || format!("max |D_alpha| = {worst:.3e}"))?;
    Ok(format!(
        "2 product + 3 classical-classical states, max |D_alpha| {worst:.1e}"
    ))
}

fn local_unitary_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let states = [
        random_x_state(&mut rng),
        sci_state(0.5, 0.2, 0.4).unwrap(),
        random_density(&mut rng, 4, 3, vec![2, 2]),
    ];
    let mut worst = 0.0f64;
    for rho in &states {
        for alpha in [0.9, 1.5] {
            let base = d_alpha(rho, alpha);
            for _ in 0..10 {
                let u = random_unitary(&mut rng, 2).kronecker(&random_unitary(&mut rng, 2));
                let rotated = rho.evolve_by(&u).unwrap();
                worst = worst.max((d_alpha(&rotated, alpha) - base).abs());
            }
        }
    }
    ensure(worst < 1e-4, || format!("max change {worst:.3e}"))?;
    Ok(format!(
        "3 states x 10 unitaries x alpha in {{0.9, 1.5}}, max change {worst:.1e}"
    ))
}

fn monotone_in_alpha() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let states = [
        random_x_state(&mut rng),
        random_x_state(&mut rng),
        random_x_state(&mut rng),
        sci_state(0.5, 0.2, 0.4).unwrap(),
        sci_state(-0.3, 0.4, 0.6).unwrap(),
    ];
    let alphas = [0.3, 0.6, 0.9, 1.2, 1.5, 1.8, 2.0];
    let mut worst_drop = f64::NEG_INFINITY;
    for (k, rho) in states.iter().enumerate() {
        let values: Vec<f64> = alphas.iter().map(|&a| d_alpha(rho, a)).collect();
        for w in values.windows(2) {
            worst_drop = worst_drop.max(w[0] - w[1]);
        }
        ensure(values.windows(2).all(|w| w[1] >= w[0] - 1e-3), || {
            format!("state {k} not monotone: {values:?}")
        })?;
    }
    Ok(format!(
        "5 states x 7 orders, largest decrease {worst_drop:.1e}"
    ))
}

fn frozen_without_coupling() -> Outcome {
    let cfg = fixture("decoupled.json");
    ensure(
        cfg.dimer.gamma == [0.0; 4] && cfg.time_grid.n_points == 100,
        || "decoupled fixture changed".into(),
    )?;
    let rows = run_timeseries(&cfg).map_err(|e| e.to_string())?;
    let (lo, hi) = rows
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
            (lo.min(r.d_alpha), hi.max(r.d_alpha))
        });
    ensure(hi - lo <= 1e-4, || format!("spread {:.3e}", hi - lo))?;
    Ok(format!(
        "100 points, D_alpha = {lo:.6} with spread {:.1e}",
        hi - lo
    ))
}

fn freezing_plateaus() -> Outcome {
    let mut cfg = fixture("freezing.json");
    cfg.time_grid.n_points = 100;
    ensure(
        cfg.bath == reference_bath() && cfg.dimer == reference_dimer() && cfg.renyi_alpha == 0.9,
        || "freezing fixture no longer matches the reference parameters".into(),
    )?;
    let count = |q: f64| -> Result<usize, String> {
        let mut c = cfg.clone();
        c.bath.q = q;
        let rows = run_timeseries(&c).map_err(|e| e.to_string())?;
        let series: Vec<(f64, f64)> = rows.iter().map(|r| (r.t, r.d_alpha)).collect();
        let report = detect_plateau(&series, 1e-3, 10).map_err(|e| e.to_string())?;
        Ok(report.intervals.len())
    };
    let (n10, n30, n90) = (count(10.0)?, count(30.0)?, count(90.0)?);
    ensure(n30 >= 1, || {
        format!("no plateau at q = 30 (q=10: {n10}, q=90: {n90})")
    })?;
    ensure(n10 != n90, || {
        format!("q = 10 and q = 90 both give {n10} plateaus")
    })?;
    Ok(format!("plateaus at q = 10/30/90: {n10}/{n30}/{n90}"))
}

fn validation_suite() -> Outcome {
    let expect = |result: rdiscord_core::Result<DensityMatrix>, name: &str| -> Result<(), String> {
        match result {
            Err(Error::Constraint { constraint, .. }) if constraint == name => Ok(()),
            other => Err(format!("expected `{name}` violation, got {other:?}")),
        }
    };
    let x = |a, b, c, d, delta: f64, beta: f64| {
        x_state(&XStateParams {
            a,
            b,
            c,
            d,
            delta: C64::new(0.0, delta),
            beta_off: C64::new(beta, 0.0),
        })
    };
    expect(x(0.1, 0.4, 0.4, 0.1, 0.11, 0.0), "|delta|^2 <= a*d")?;
    expect(x(0.4, 0.1, 0.1, 0.4, 0.0, 0.2), "|beta|^2 <= b*c")?;
    expect(x(0.4, 0.1, 0.1, 0.3, 0.0, 0.0), "a + b + c + d = 1")?;
    expect(x(0.6, -0.1, 0.1, 0.4, 0.0, 0.0), "a, b, c, d >= 0")?;
    expect(sci_state(1.0, 1.0, 0.0), "C33^2 + C01^2 <= 1")?;
    expect(sci_state(0.8, 0.7, 0.0), "C33^2 + C01^2 <= 1")?;
    expect(sci_state(0.0, 0.0, 1.5), "CI matrix positive semidefinite")?;
    let mut p: CIStateParams = sci_params(0.0, 0.0, 0.0);
    (p.c11, p.c22, p.c33) = (1.0, 1.0, 0.5);
    expect(ci_state(&p), "CI matrix positive semidefinite")?;
    Ok("8 constraint violations rejected with their names".into())
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("degeneracy sum rule", degeneracy_sum_rule),
        ("partition function limits", partition_limits),
        ("dynamics oracle equivalence", dynamics_oracle),
        ("alpha -> 1 limit", von_neumann_limit),
        ("zero-discord certificates", zero_discord),
        ("local-unitary invariance", local_unitary_invariance),
        ("monotonicity in alpha", monotone_in_alpha),
        (
            "frozen dynamics without bath coupling",
            frozen_without_coupling,
        ),
        ("freezing phenomenology", freezing_plateaus),
        ("validation suite", validation_suite),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    panic::set_hook(Box::new(|_| {}));
    let mut failures = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|payload| {
            let msg = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{secs:.1}s]", k + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {:>2} FAIL  {name}: {detail} [{secs:.1}s]", k + 1);
            }
        }
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
