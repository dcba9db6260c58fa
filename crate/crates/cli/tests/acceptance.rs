//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
//!
//! Runs with `cargo test -p cpinf-cli --test acceptance`.

// NaN must fail a criterion, so `ensure!` negates the comparison.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};

use cpinf_core::clusters::{decompose, orthogonality_defect, ClusterPartition};
use cpinf_core::integrals::{fit_multiplier, grad_hamiltonian, reduced_integral_map, residual_from_gradient};
use cpinf_core::linalg::{self, Mat3};
use cpinf_core::relative_equilibria::effective_potential_derivative;
use cpinf_core::sequences::{diagnose, ClassifyOptions, SmallSequenceOutcome};
use cpinf_core::state::{angular_momentum, inertia, kinetic};
use cpinf_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

type Check = std::result::Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn rel(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn rel3(a: [f64; 3], b: [f64; 3]) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    let scale = linalg::norm(&a).max(linalg::norm(&b));
    if scale == 0.0 {
        0.0
    } else {
        linalg::norm(&d) / scale
    }
}

/// Least-squares slope of `log y` against `log x`.
fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

fn bifurcation_via_cli(system: &str) -> std::result::Result<Vec<Value>, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("system.json");
    std::fs::write(&path, system).map_err(|e| e.to_string())?;
    let out = Command::new(env!("CARGO_BIN_EXE_cpinf"))
        .args(["bifurcation", "--system", path.to_str().unwrap()])
        .output()
        .map_err(|e| e.to_string())?;
    ensure!(out.status.success(), "cpinf failed: {}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    v.as_array().cloned().ok_or_else(|| "output is not a list".into())
}

fn nu_of(entry: &Value) -> f64 {
    entry["nu"].as_f64().unwrap_or(f64::NAN)
}

fn pair_of(entry: &Value) -> (u64, u64) {
    (entry["pair"][0].as_u64().unwrap_or(0), entry["pair"][1].as_u64().unwrap_or(0))
}

fn criterion_1() -> Check {
    let m = [1.0f64, 2.0, 3.0];
    let list = bifurcation_via_cli(r#"{"masses": [1, 2, 3], "interaction": "gravitational"}"#)?;
    ensure!(list.len() == 3, "expected 3 values, got {}", list.len());
    let expected = [4.0 / 3.0, 27.0 / 8.0, 108.0 / 5.0];
    for (entry, want) in list.iter().zip(expected) {
        let (i, j) = pair_of(entry);
        let (mi, mj) = (m[i as usize - 1], m[j as usize - 1]);
        let formula = (mi * mj).powi(3) / (2.0 * (mi + mj));
        ensure!(rel(formula, want) < 1e-15, "formula for pair {i},{j} gives {formula}, expected {want}");
        ensure!(rel(nu_of(entry), want) < 1e-12, "pair {i},{j}: nu = {} vs {want}", nu_of(entry));
    }
    Ok(())
}

fn criterion_2() -> Check {
    let list = bifurcation_via_cli(r#"{"masses": [1, 1, 1], "charges": [1, 1, -1], "interaction": "coulomb"}"#)?;
    ensure!(list.len() == 2, "expected 2 values, got {}", list.len());
    for entry in &list {
        ensure!(pair_of(entry) != (1, 2), "repelling pair 1,2 listed");
        ensure!(nu_of(entry) == 0.25, "nu = {} for pair {:?}", nu_of(entry), pair_of(entry));
    }
    Ok(())
}

fn criterion_3() -> Check {
    let sys = System::gravitational(vec![1.0, 1.0]).map_err(|e| e.to_string())?;
    let red = reduce_two_body(&sys, (0, 1)).map_err(|e| e.to_string())?;
    ensure!(red.mu == 0.5 && red.gamma == -1.0, "mu = {}, gamma = {}", red.mu, red.gamma);
    let re = solve_relative_equilibrium(&red, 1.0).map_err(|e| e.to_string())?;
    ensure!(rel(re.r_star, 2.0) < 1e-12, "r* = {}", re.r_star);
    ensure!(rel(re.h, -0.25) < 1e-12, "h = {}", re.h);
    ensure!(rel(re.nu, 0.25) < 1e-12, "nu = {}", re.nu);
    // U(r) = l^2 / (2 mu r^2) + gamma / r, written out independently
    let u = |r: f64| 1.0 / (2.0 * 0.5 * r * r) - 1.0 / r;
    let du = |r: f64| -1.0 / (0.5 * r.powi(3)) + 1.0 / (r * r);
    ensure!(du(re.r_star).abs() < 1e-12, "U'(r*) = {}", du(re.r_star));
    let lib = effective_potential_derivative(&red, 1.0, re.r_star);
    ensure!(lib.abs() < 1e-12, "library U'(r*) = {lib}");
    let h = 1e-4;
    let r = re.r_star;
    let fd1 = (u(r + h) - u(r - h)) / (2.0 * h);
    let fd2 = (u(r + h) - 2.0 * u(r) + u(r - h)) / (h * h);
    ensure!(fd1.abs() < 1e-8, "finite-difference U'(r*) = {fd1}");
    ensure!(fd2 > 0.0, "finite-difference U''(r*) = {fd2}");
    Ok(())
}

fn criterion_4() -> Check {
    let systems = [
        System::gravitational(vec![1.0, 1.0]),
        System::gravitational(vec![0.3, 2.5]),
        System::coulomb(vec![1.0, 2.0], vec![1.0, -1.5]),
    ];
    for sys in systems {
        let sys = sys.map_err(|e| e.to_string())?;
        for (ell, phase) in [(1.0, 0.0), (-0.7, 1.1), (3.0, 2.5)] {
            let re = solve_relative_equilibrium(&reduce_two_body(&sys, (0, 1)).map_err(|e| e.to_string())?, ell)
                .map_err(|e| e.to_string())?;
            let s = embed_re(&sys, (0, 1), None, &re, phase).map_err(|e| e.to_string())?;
            let lambda = Multiplier::about_z(re.omega);
            let res = lagrange_residual(&s, &sys.potential(), &lambda).map_err(|e| e.to_string())?;
            ensure!(res.norm < 1e-10, "residual {:e} at ell = {ell}", res.norm);
            let best = best_multiplier(&s, &sys.potential()).map_err(|e| e.to_string())?;
            let err = linalg::norm(&[best.lambda[0], best.lambda[1], best.lambda[2] - re.omega]);
            ensure!(err < 1e-10, "best multiplier off by {err:e} at ell = {ell}");
        }
    }
    Ok(())
}

fn horizontal(masses: Vec<f64>) -> std::result::Result<StateSequence<f64>, String> {
    let sys = System::gravitational(masses).map_err(|e| e.to_string())?;
    generate_horizontal(&sys, (0, 1), 2, 1.0, &Schedule { z0: 20.0, rho: 2.0, count: 14 }).map_err(|e| e.to_string())
}

fn criterion_5() -> Check {
    for masses in [vec![1.0, 1.0, 1.0], vec![1.0, 2.0, 3.0]] {
        let seq = horizontal(masses.clone())?;
        ensure!(seq.len() == 14, "sequence has {} terms", seq.len());
        let d = diagnose(&seq).map_err(|e| e.to_string())?;
        let z = seq.abscissa().unwrap();
        let slope = loglog_slope(z, &d.column(|r| r.residual_norm));
        ensure!((slope + 2.0).abs() <= 0.3, "masses {masses:?}: residual slope {slope}");
        let ratio = d.column(|r| r.ratio_kplusv);
        ensure!(ratio.windows(2).all(|w| w[1] < w[0]), "masses {masses:?}: ratio not decreasing");
        let (first, last) = (ratio[0], ratio[13]);
        ensure!(last < 1e-6 * first, "masses {masses:?}: ratio {last:e} vs initial {first:e}");
    }
    Ok(())
}

fn criterion_6() -> Check {
    for masses in [vec![1.0, 1.0, 1.0], vec![1.0, 2.0, 3.0], vec![0.3, 5.0, 1.7]] {
        let seq = horizontal(masses.clone())?;
        let part = ClusterPartition::new(vec![vec![0, 1], vec![2]], 3).map_err(|e| e.to_string())?;
        let d = diagnose(&seq).map_err(|e| e.to_string())?;
        for (k, (s, lambda)) in seq.states().iter().zip(seq.multipliers().unwrap()).enumerate() {
            let frame = to_multiplier_coordinates(s, lambda).map_err(|e| e.to_string())?;
            let r = frame.state.r().norm();
            ensure!(r == 0.0 && d.rows[k].r_norm == 0.0, "k = {k}: |R| = {r:e}");
            let pair = &decompose(&frame.state, &part).map_err(|e| e.to_string())?.cluster_states[0];
            let ik = iz_kz(pair);
            let lz = angular_momentum(pair)[2];
            let est_ii = (ik.kz.sqrt() - frame.lambda_norm * ik.iz.sqrt()).abs();
            let est_iii = (ik.kz.sqrt() - lz.abs() / ik.iz.sqrt()).abs();
            ensure!(est_ii < 1e-8, "masses {masses:?}, k = {k}: |sqrt Kz - |lambda| sqrt Iz| = {est_ii:e}");
            ensure!(est_iii < 1e-8, "masses {masses:?}, k = {k}: |sqrt Kz - |Lz|/sqrt Iz| = {est_iii:e}");
            ensure!(d.rows[k].est_ii < 1e-8 && d.rows[k].est_iii < 1e-8, "k = {k}: diagnostics disagree");
        }
    }
    Ok(())
}

fn criterion_7() -> Check {
    for masses in [vec![1.0, 1.0], vec![1.0, 3.0]] {
        let sys = System::gravitational(masses.clone()).map_err(|e| e.to_string())?;
        let seq = generate_shrinking_pair(&sys, 1.0, &ShrinkSchedule::default()).map_err(|e| e.to_string())?;
        let r = verify_small_sequence(&seq).map_err(|e| e.to_string())?;
        ensure!(r.outcome == SmallSequenceOutcome::Confirmed, "masses {masses:?}: {:?}", r.outcome);
        let hs = r.h_slope.unwrap_or(0.0);
        let ls = r.lambda_slope.unwrap_or(0.0);
        ensure!(r.h_to_minus_infinity && hs > 0.5, "masses {masses:?}: |H| slope {hs}");
        ensure!(r.lambda_to_infinity && ls > 0.5, "masses {masses:?}: |lambda| slope {ls}");
    }
    let sys = System::coulomb(vec![1.0, 1.0], vec![1.0, 1.0]).map_err(|e| e.to_string())?;
    let base = to_albouy(
        &CartesianState { positions: vec![[0.5, 0.0, 0.0], [-0.5, 0.0, 0.0]], velocities: vec![[0.0, 0.5, 0.0], [0.0, -0.5, 0.0]] },
        &sys,
    )
    .map_err(|e| e.to_string())?;
    let seq = generate_shrinking(&sys, &base, None, &ShrinkSchedule::default()).map_err(|e| e.to_string())?;
    let pot = sys.potential();
    let residuals: Vec<f64> = seq
        .states()
        .iter()
        .map(|s| {
            // collinear two-body states have a rank-deficient Gram matrix: least-norm fit
            let g = grad_hamiltonian(s, &pot)?;
            let l = fit_multiplier(&g, s, true)?;
            Ok(residual_from_gradient(&g, s, &l).norm)
        })
        .collect::<Result<_>>()
        .map_err(|e| e.to_string())?;
    let floor = residuals.iter().copied().fold(f64::INFINITY, f64::min);
    ensure!(floor >= 0.1 * residuals[0], "repelling residual fell to {floor:e} from {:e}", residuals[0]);
    let r = verify_small_sequence(&seq).map_err(|e| e.to_string())?;
    ensure!(r.outcome == SmallSequenceOutcome::NotCritical, "repelling family: {:?}", r.outcome);
    Ok(())
}

fn random_state(rng: &mut ChaCha8Rng, n: usize, coulomb: bool) -> (System, State) {
    loop {
        let m: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..3.0)).collect();
        let c: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let sys = if coulomb { System::coulomb(m, c) } else { System::gravitational(m) }.unwrap();
        let positions: Vec<[f64; 3]> = (0..n).map(|_| [0; 3].map(|_| rng.random_range(-5.0..5.0))).collect();
        let velocities: Vec<[f64; 3]> = (0..n).map(|_| [0; 3].map(|_| rng.random_range(-2.0..2.0))).collect();
        let close = (0..n).any(|i| {
            (i + 1..n).any(|j| (0..3).map(|k| (positions[i][k] - positions[j][k]).powi(2)).sum::<f64>() < 0.25)
        });
        if !close {
            let s = to_albouy(&CartesianState { positions, velocities }, &sys).unwrap();
            return (sys, s);
        }
    }
}

fn random_rotation(rng: &mut ChaCha8Rng) -> Mat3<f64> {
    loop {
        let axis = [0; 3].map(|_| rng.random_range(-1.0..1.0));
        if linalg::norm(&axis) > 0.1 {
            return linalg::axis_angle(&axis, rng.random_range(-3.1..3.1));
        }
    }
}

fn criterion_8() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let tol = 1e-12;
    for case in 0..100 {
        let n = 3 + case % 3;
        let (sys, s) = random_state(&mut rng, n, case % 2 == 1);
        let pot = sys.potential();
        let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
        let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, &b) in labels.iter().enumerate() {
            blocks[b].push(i);
        }
        let part = ClusterPartition::new(blocks.into_iter().filter(|b| !b.is_empty()).collect(), n).unwrap();
        let d = decompose(&s, &part).map_err(|e| e.to_string())?;
        let scale = s.norm_sq();

        let ortho = orthogonality_defect(&d).map_err(|e| e.to_string())?;
        ensure!(ortho <= tol * scale, "case {case}: orthogonality defect {ortho:e}");
        let sum_k: f64 = d.pieces().map(kinetic).sum();
        let sum_i: f64 = d.pieces().map(inertia).sum();
        let sum_l = d.pieces().map(angular_momentum).fold([0.0; 3], |a, l| [a[0] + l[0], a[1] + l[1], a[2] + l[2]]);
        ensure!(rel(sum_k, kinetic(&s)) <= tol, "case {case}: K additivity");
        ensure!(rel(sum_i, inertia(&s)) <= tol, "case {case}: I additivity");
        let l = angular_momentum(&s);
        let l_scale = (kinetic(&s) * inertia(&s)).sqrt();
        ensure!(rel3(sum_l, l) * linalg::norm(&l) <= tol * l_scale, "case {case}: L additivity");
        let back = d.reconstruct();
        ensure!(back.sub(&s).norm() <= tol * s.norm(), "case {case}: reconstruction");

        let g = random_rotation(&mut rng);
        let f = reduced_integral_map(&s, &pot).map_err(|e| e.to_string())?;
        let rs = rotate(&g, &s).map_err(|e| e.to_string())?;
        let fr = reduced_integral_map(&rs, &pot).map_err(|e| e.to_string())?;
        ensure!(rel(fr.h, f.h) <= tol * (1.0 + kinetic(&s) / f.h.abs()), "case {case}: H under rotation");
        let gl = linalg::mat_vec(&g, &f.l);
        ensure!(linalg::norm(&[fr.l[0] - gl[0], fr.l[1] - gl[1], fr.l[2] - gl[2]]) <= tol * l_scale, "case {case}: L under rotation");

        let sd = rng.random_range(-2.0..2.0);
        let ds = dilate(sd, &s, -1.0);
        let fd = reduced_integral_map(&ds, &pot).map_err(|e| e.to_string())?;
        ensure!(rel(fd.h, (-2.0 * sd).exp() * f.h) <= tol * (1.0 + kinetic(&s) / f.h.abs()), "case {case}: h under dilation");
        let el = f.l.map(|x| sd.exp() * x);
        ensure!(
            linalg::norm(&[fd.l[0] - el[0], fd.l[1] - el[1], fd.l[2] - el[2]]) <= tol * sd.exp() * l_scale,
            "case {case}: l under dilation"
        );
        let (nu, nu_d) = (bifurcation_parameter(&f), bifurcation_parameter(&fd));
        let nu_scale = (kinetic(&s) / 2.0 + f.h.abs()) * l_scale * l_scale;
        ensure!((nu - nu_d).abs() <= tol * nu_scale, "case {case}: nu under dilation {nu} vs {nu_d}");
    }
    Ok(())
}

fn criterion_9() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let h = 1e-5;
    for n in [3, 4, 5] {
        for case in 0..50 {
            let (sys, s) = random_state(&mut rng, n, case % 2 == 1);
            let pc = sys.pair_coefficients();
            let q: Vec<[f64; 3]> = (0..n).map(|i| s.position(i)).collect();
            // the potential straight from Cartesian positions
            let v = |q: &[[f64; 3]]| {
                let mut v = 0.0;
                for i in 0..n {
                    for j in i + 1..n {
                        let d = (0..3).map(|k| (q[i][k] - q[j][k]).powi(2)).sum::<f64>().sqrt();
                        v += pc.get(i, j) / d;
                    }
                }
                v
            };
            let g = sys.potential().gradient(&s).map_err(|e| e.to_string())?;
            let mut diff = 0.0f64;
            for i in 0..n {
                for k in 0..3 {
                    let (mut a, mut b) = (q.clone(), q.clone());
                    a[i][k] += h;
                    b[i][k] -= h;
                    let fd = (v(&a) - v(&b)) / (2.0 * h) / sys.masses()[i];
                    diff += sys.masses()[i] * (fd - g.components()[k].entries()[i]).powi(2);
                }
            }
            let err = diff.sqrt() / g.norm();
            ensure!(err <= 1e-6, "n = {n}, case {case}: relative gradient error {err:e}");
        }
    }
    Ok(())
}

fn criterion_10() -> Check {
    let opts = ClassifyOptions::default();
    let verdict = |seq: &StateSequence<f64>| -> std::result::Result<Verdict, String> {
        let d = diagnose(seq).map_err(|e| e.to_string())?;
        classify(seq, &d, &opts).map(|c| c.verdict).map_err(|e| e.to_string())
    };
    let eq3 = System::gravitational(vec![1.0, 1.0, 1.0]).map_err(|e| e.to_string())?;
    let eq2 = System::gravitational(vec![1.0, 1.0]).map_err(|e| e.to_string())?;
    let sched = Schedule { z0: 20.0, rho: 2.0, count: 14 };

    let h = generate_horizontal(&eq3, (0, 1), 2, 1.0, &sched).map_err(|e| e.to_string())?;
    let v = verdict(&h)?;
    ensure!(v == Verdict::CriticalPointAtInfinity, "horizontal family: {v:?}");

    let shrink = generate_shrinking_pair(&eq2, 1.0, &ShrinkSchedule::default()).map_err(|e| e.to_string())?;
    let v = verdict(&shrink)?;
    ensure!(v == Verdict::Collision, "shrinking pair: {v:?}");

    let spectator = generate_re_with_spectator(&eq3, (0, 1), 2, 1.0, [0.0, 0.0, 6.0], 8).map_err(|e| e.to_string())?;
    let v = verdict(&spectator)?;
    ensure!(v == Verdict::NotCritical, "relative equilibrium with spectator: {v:?}");

    let planar = generate_planar(&eq3, (0, 1), 2, 1.0, &sched).map_err(|e| e.to_string())?;
    let d = diagnose(&planar).map_err(|e| e.to_string())?;
    let res = d.column(|r| r.residual_norm);
    let floor = res.iter().copied().fold(f64::INFINITY, f64::min);
    ensure!(!d.trends.residual.to_zero, "planar residual reported as vanishing");
    ensure!(floor >= 0.1 * res[0], "planar residual fell to {floor:e} from {:e}", res[0]);
    let v = verdict(&planar)?;
    ensure!(v == Verdict::NotCritical, "planar family: {v:?}");
    Ok(())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("bifurcation values, gravitational masses (1, 2, 3)", criterion_1),
        ("bifurcation values, Coulomb charges (1, 1, -1)", criterion_2),
        ("closed-form two-body relative equilibrium", criterion_3),
        ("embedded relative equilibrium is critical", criterion_4),
        ("horizontal-sequence asymptotics", criterion_5),
        ("pair-block estimates along the horizontal sequence", criterion_6),
        ("small sequences", criterion_7),
        ("structural exactness on 100 seeded states", criterion_8),
        ("gradient against central differences", criterion_9),
        ("classifier trichotomy and planar residual floor", criterion_10),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match outcome {
            Ok(()) => println!("PASS  {:>2}  {name}", k + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL  {:>2}  {name}: {why}", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
