//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::time::{Duration, Instant};

use num_complex::Complex64 as c64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use qjc_core::closed_form::{
    compare_with_numeric, doublet_eigenvalues, doublet_eigenvectors, level_value, normalize,
    Branch, DoubletBlock, LevelLabel, MixingAngle,
};
use qjc_core::flow::{default_levels, qes_theta_sweep, sweep, EventKind, SweepParam, SweepSpec};
use qjc_core::fock::{sigma3_operator, ParityOperator, SpinFockOperator, TruncatedFockSpace};
use qjc_core::linalg;
use qjc_core::models::{build_extended, build_h12, build_ht, build_jcm, build_mandal, ModelKind};
use qjc_core::params::{ModelParams, Phi, QesCoupling};
use qjc_core::polyrep::{gauge_transform_ht, gauge_transform_mandal};
use qjc_core::qes::{algebraic_spectrum, build_subspace, certify_in_full_space};
use qjc_core::recurrence::{reconstruct_eigenvector, truncation_spectrum};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn space(d: usize, g: usize) -> TruncatedFockSpace {
    TruncatedFockSpace::new(d, g).unwrap()
}

/// Lower-left couplings carrying the sign φ: ĉ = φc and ρ̂₁ = φρ₁.
fn phi_consistent(mut p: ModelParams, phi: Phi) -> ModelParams {
    let (c, _) = p.qes_couplings();
    let (rho1, _) = p.linear_couplings();
    p.phi = phi;
    p.qes = QesCoupling::Explicit {
        c,
        c_hat: phi.sign() * c,
    };
    p.linear = Some((rho1, phi.sign() * rho1));
    p
}

fn structure() -> Outcome {
    let start = Instant::now();
    let sp = space(32, 8);
    let mut worst = 0.0f64;
    let mut models: Vec<(String, SpinFockOperator, Phi)> = Vec::new();
    for phi in [Phi::Plus, Phi::Minus] {
        for k in 1..=3 {
            let p = ModelParams::extended(k, phi, 0.7, 0.45).with_p(vec![0.0, 0.0, 0.1]);
            models.push((
                format!("extended k={k}"),
                build_extended(&p, &sp).unwrap(),
                phi,
            ));
        }
        let q = phi_consistent(ModelParams::qes(2, 0.7, 0.45, 1.2), phi);
        models.push(("h12".into(), build_h12(&q, &sp).unwrap(), phi));
        models.push(("ht".into(), build_ht(&q, &sp).unwrap(), phi));
    }
    let base = ModelParams::extended(1, Phi::Plus, 0.7, 0.45);
    models.push((
        "mandal".into(),
        build_mandal(&base, &sp).unwrap(),
        Phi::Minus,
    ));
    models.push(("jcm".into(), build_jcm(&base, &sp).unwrap(), Phi::Plus));

    let s3 = sigma3_operator(sp);
    for (_, h, phi) in &models {
        let dev = match phi {
            Phi::Minus => s3.mul(h).mul(&s3).max_abs_diff(&h.adjoint()),
            Phi::Plus => h.max_abs_diff(&h.adjoint()),
        };
        worst = worst.max(dev);
    }
    let mandal = &models.iter().find(|m| m.0 == "mandal").unwrap().1;
    let parity = ParityOperator::new(sp)
        .conjugate(mandal)
        .max_abs_diff(&mandal.adjoint());
    worst = worst.max(parity);
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-13 && elapsed < Duration::from_secs(1),
        format!(
            "max deviation {worst:e} over {} models, {elapsed:.2?}",
            models.len()
        ),
    )
}

fn closed_form_vs_numeric() -> Outcome {
    let start = Instant::now();
    let sp = space(32, 8);
    let mut worst = 0.0f64;
    let mut cases = 0;
    for k in 1..=3 {
        for phi in [Phi::Plus, Phi::Minus] {
            for rho in [0.0, 0.3, 1.0] {
                for eps in [0.5, 1.0] {
                    for p_coeffs in [vec![], vec![0.0, 0.0, 1.0]] {
                        let p = ModelParams::extended(k, phi, eps, rho).with_p(p_coeffs);
                        let h = build_extended(&p, &sp).unwrap();
                        let cmp = compare_with_numeric(&p, &h).unwrap();
                        if cmp.max_deviation() > 1e-9 {
                            eprintln!(
                                "k={k} phi={phi:?} rho={rho} eps={eps} P={:?}: {} / {}",
                                p.p_coeffs, cmp.numeric_to_closed, cmp.closed_to_numeric
                            );
                        }
                        worst = worst.max(cmp.max_deviation());
                        cases += 1;
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-9 && elapsed < Duration::from_secs(10),
        format!("{cases} cases, worst deviation {worst:e}, {elapsed:.2?}"),
    )
}

fn mixing_angles() -> Outcome {
    let mut rng = StdRng::seed_from_u64(20260115);
    let (mut res, mut orth, mut overlap) = (0.0f64, 0.0f64, 0.0f64);
    for draw in 0..100 {
        let k = rng.gen_range(1..=3);
        let n = rng.gen_range(0..6);
        let eps = rng.gen_range(0.1..3.0);
        let phi = if draw % 2 == 0 { Phi::Plus } else { Phi::Minus };
        let mut p = ModelParams::extended(k, phi, eps, 0.0);
        if rng.gen_bool(0.3) {
            p = p.with_p(vec![0.0, 0.0, rng.gen_range(-0.2..0.2)]);
        }
        let probe = DoubletBlock::new(
            &ModelParams {
                rho: 1.0,
                ..p.clone()
            },
            n,
        );
        let delta = probe.detuning();
        let unit = probe.coupling();
        p.rho = match phi {
            // keep |2ρ√((n+1)…(n+k))| inside |Δ|
            Phi::Minus => rng.gen_range(-0.49..0.49) * delta.abs() / unit,
            Phi::Plus => rng.gen_range(-2.0..2.0),
        };
        let block = DoubletBlock::new(&p, n);
        let angle = MixingAngle::for_block(&block).unwrap();
        let v = doublet_eigenvectors(&block, angle).unwrap();
        for (psi, lambda) in [(v.psi_1, v.lambda_1), (v.psi_2, v.lambda_2)] {
            let u = normalize(psi);
            let hu = block.apply(u);
            let r = (hu[0] - lambda * u[0]).hypot(hu[1] - lambda * u[1]);
            res = res.max(r);
        }
        let (l1, l2) = doublet_eigenvalues(&block);
        let angle_form = [c64::new(v.lambda_1, 0.0), c64::new(v.lambda_2, 0.0)];
        res = res.max(linalg::match_into(&angle_form, &[l1, l2]).unwrap_or(f64::INFINITY));
        let (a, b) = (normalize(v.psi_1), normalize(v.psi_2));
        let dot = a[0] * b[0] + a[1] * b[1];
        match phi {
            Phi::Plus => orth = orth.max(dot.abs()),
            Phi::Minus => overlap = overlap.max((dot - angle.theta.sin()).abs()),
        }
    }
    outcome(
        res <= 1e-12 && orth <= 1e-12 && overlap <= 1e-12,
        format!("residual {res:e}, phi=+1 overlap {orth:e}, phi=-1 overlap-sin error {overlap:e}"),
    )
}

fn qes_exactness() -> Outcome {
    let mut rng = StdRng::seed_from_u64(7);
    let (mut leak, mut res, mut drift) = (0.0f64, 0.0f64, 0.0f64);
    let mut pairs = 0;
    for n_upper in 0..=5 {
        for draw in 0..4 {
            let phi = if draw % 2 == 0 { Phi::Plus } else { Phi::Minus };
            let p = ModelParams::qes(
                n_upper,
                rng.gen_range(0.2..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-3.0..3.0),
            )
            .with_phi(phi);
            let small = space(n_upper + 13, 8);
            let large = space(2 * (n_upper + 13), 8);
            let sub = build_subspace(&p, &small).unwrap();
            leak = leak.max(sub.invariance_leak(&build_ht(&p, &small).unwrap()).unwrap());
            leak = leak.max(sub.invariance_leak(&build_ht(&p, &large).unwrap()).unwrap());
            let spec = algebraic_spectrum(&p, &small).unwrap();
            if spec.pairs.len() != 2 * n_upper + 4 {
                return outcome(
                    false,
                    format!("N={n_upper}: {} eigenpairs", spec.pairs.len()),
                );
            }
            for pair in &spec.pairs {
                let Some(v) = &pair.vector else {
                    return outcome(
                        false,
                        format!("N={n_upper}: defective cluster at {}", pair.energy),
                    );
                };
                let r1 = certify_in_full_space(&sub, pair.energy, v, &p, &small).unwrap();
                let r2 = certify_in_full_space(&sub, pair.energy, v, &p, &large).unwrap();
                res = res.max(r1).max(r2);
                drift = drift.max((r1 - r2).abs());
                pairs += 1;
            }
        }
    }
    outcome(
        leak <= 1e-13 && res <= 1e-10,
        format!("{pairs} eigenpairs, leak {leak:e}, residual {res:e}, D vs 2D drift {drift:e}"),
    )
}

fn rho_zero_list() -> Outcome {
    let sp = space(16, 8);
    let mut worst = 0.0f64;
    for theta in [0.25, 1.0, 1.5, 3.0] {
        let s2 = 2f64.sqrt();
        let want: Vec<c64> = [
            -0.5,
            (3.0 - 4.0 * theta) / 6.0,
            (3.0 + 4.0 * theta) / 6.0,
            (9.0 - 2.0 * s2 * theta) / 6.0,
            (9.0 + 2.0 * s2 * theta) / 6.0,
            2.5,
        ]
        .iter()
        .map(|&x| c64::new(x, 0.0))
        .collect();
        let got = algebraic_spectrum(&ModelParams::qes(1, 1.0, 0.0, theta), &sp)
            .unwrap()
            .energies();
        if got.len() != 6 {
            return outcome(false, format!("theta={theta}: {} values", got.len()));
        }
        worst = worst.max(linalg::match_into(&want, &got).unwrap());
    }
    outcome(worst <= 1e-12, format!("worst deviation {worst:e}"))
}

fn theta_crossing() -> Outcome {
    let spec = SweepSpec {
        model: ModelKind::Ht,
        params: ModelParams::qes(1, 1.0, 1.0, 0.0),
        param: SweepParam::Theta,
        lo: 0.0,
        hi: 3.0,
        steps: 301,
        levels: Vec::new(),
        strict: false,
    };
    let s = qes_theta_sweep(&spec).unwrap();
    let hit = s
        .events
        .iter()
        .filter(|e| e.kind == EventKind::Crossing && (e.energy + 0.5).abs() <= 1e-6)
        .find(|e| (1.4..=1.6).contains(&e.param));
    match hit {
        Some(e) => outcome(
            true,
            format!("theta* = {:.9}, E = {:.9}", e.param, e.energy),
        ),
        None => outcome(
            false,
            format!(
                "no crossing at E = -1/2 in [1.4, 1.6]; events {:?}",
                s.events
            ),
        ),
    }
}

fn ground_state_migration() -> Outcome {
    let lower = |rho: f64| {
        level_value(
            &ModelParams::extended(2, Phi::Plus, 1.0, rho),
            LevelLabel::Doublet {
                n: 0,
                branch: Branch::II,
            },
        )
        .re + 0.5
    };
    let (mut a, mut b) = (0.5, 1.5);
    while b - a > 1e-10 {
        let m = 0.5 * (a + b);
        if lower(m) > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    let rho = 0.5 * (a + b);
    let spec = SweepSpec {
        model: ModelKind::Extended,
        params: ModelParams::extended(2, Phi::Plus, 1.0, 0.0),
        param: SweepParam::Rho,
        lo: 0.0,
        hi: 2.0,
        steps: 201,
        levels: default_levels(2, 2),
        strict: false,
    };
    let event = sweep(&spec).unwrap().events.into_iter().find(|e| {
        e.labels.contains(&"singlet0".to_string()) && e.labels.contains(&"doublet0II".to_string())
    });
    let event_ok = event
        .as_ref()
        .is_some_and(|e| (e.param - 1.0).abs() <= 1e-8);
    outcome(
        (rho - 1.0).abs() <= 1e-10 && event_ok,
        format!(
            "bisection rho = {rho:.12}, sweep event {:?}",
            event.map(|e| e.param)
        ),
    )
}

fn exceptional_points() -> Outcome {
    let spec = SweepSpec {
        model: ModelKind::Extended,
        params: ModelParams::extended(2, Phi::Minus, 1.0, 0.0),
        param: SweepParam::Rho,
        lo: 0.0,
        hi: 1.0,
        steps: 201,
        levels: default_levels(2, 2),
        strict: false,
    };
    let s = sweep(&spec).unwrap();
    let co: Vec<(f64, String)> = s
        .events
        .iter()
        .filter(|e| e.kind == EventKind::Coalescence)
        .map(|e| (e.param, e.labels[0].clone()))
        .collect();
    let find = |label: &str| co.iter().find(|c| c.1 == label).map(|c| c.0);
    let (Some(r0), Some(r1)) = (find("doublet0I"), find("doublet1I")) else {
        return outcome(false, format!("coalescences {co:?}"));
    };
    let mut pair_err = 0.0f64;
    for (n, r) in [(0, r0), (1, r1)] {
        let a = &s.trajectory(&format!("doublet{n}I")).unwrap().values;
        let b = &s.trajectory(&format!("doublet{n}II")).unwrap().values;
        for (i, &x) in s.grid.iter().enumerate() {
            if x > r {
                pair_err = pair_err.max((a[i] - b[i].conj()).norm());
                if a[i].im == 0.0 {
                    pair_err = f64::INFINITY;
                }
            }
        }
    }
    outcome(
        (r0 - 0.3535534).abs() <= 1e-6 && (r1 - 0.2041241).abs() <= 1e-6 && pair_err <= 1e-10,
        format!("rho*_0 = {r0:.9}, rho*_1 = {r1:.9}, conjugate-pair error {pair_err:e}"),
    )
}

/// |cos| between `v` and its projection on span(`basis`).
fn projected_overlap(v: &[c64], basis: &[Vec<c64>]) -> f64 {
    let mut ortho: Vec<Vec<c64>> = Vec::new();
    for b in basis {
        let mut w = b.clone();
        for o in &ortho {
            let dot: c64 = o.iter().zip(&w).map(|(x, y)| x.conj() * y).sum();
            w.iter_mut().zip(o).for_each(|(x, y)| *x -= dot * y);
        }
        let n = linalg::vec_norm(&w);
        if n > 1e-8 {
            w.iter_mut().for_each(|x| *x /= n);
            ortho.push(w);
        }
    }
    let proj: f64 = ortho
        .iter()
        .map(|o| {
            o.iter()
                .zip(v)
                .map(|(x, y)| x.conj() * y)
                .sum::<c64>()
                .norm_sqr()
        })
        .sum();
    proj.sqrt() / linalg::vec_norm(v)
}

fn recurrence_oracle() -> Outcome {
    let (mut root_err, mut min_overlap) = (0.0f64, 1.0f64);
    let mut roots = 0;
    for n_upper in 1..=4 {
        let sp = space(n_upper + 13, 8);
        for rho in [0.0, 0.5, 1.0] {
            for theta in [0.0, 0.5, 1.0] {
                let p = ModelParams::qes(n_upper, 1.0, rho, theta);
                let alg = algebraic_spectrum(&p, &sp).unwrap();
                let energies = alg.energies();
                let t = match truncation_spectrum(&p) {
                    Ok(t) => t,
                    Err(e) => {
                        return outcome(false, format!("N={n_upper} rho={rho} theta={theta}: {e}"))
                    }
                };
                for r in &t.roots {
                    let d = linalg::nearest_distance(r.value, &energies);
                    root_err = root_err.max(d);
                    let rec = match reconstruct_eigenvector(&t.state, r.value, &sp) {
                        Ok(rec) => rec,
                        Err(e) => {
                            return outcome(
                                false,
                                format!("N={n_upper} rho={rho} theta={theta}: {e}"),
                            )
                        }
                    };
                    let span: Vec<Vec<c64>> = alg
                        .pairs
                        .iter()
                        .filter(|a| (a.energy - r.value).norm() <= 1e-8)
                        .filter_map(|a| a.vector.clone())
                        .collect();
                    min_overlap = min_overlap.min(projected_overlap(&rec.coeffs, &span));
                    roots += 1;
                }
            }
        }
    }
    outcome(
        root_err <= 1e-8 && min_overlap >= 1.0 - 1e-8,
        format!(
            "{roots} roots, worst root error {root_err:e}, min overlap 1 - {:e}",
            1.0 - min_overlap
        ),
    )
}

fn cross_representation() -> Outcome {
    let sp = space(32, 8);
    let mut worst = 0.0f64;
    for (eps, rho) in [(0.5, 0.3), (1.0, 0.3), (0.7, 1.1)] {
        let p = ModelParams::extended(1, Phi::Minus, eps, rho);
        let fock = linalg::eigenvalues(build_mandal(&p, &sp).unwrap().matrix()).unwrap();
        for n in 1..=10 {
            let op = gauge_transform_mandal(&p, n, 1.0).unwrap();
            if op.leak() != 0.0 {
                return outcome(false, format!("mandal cap {n} leaks {}", op.leak()));
            }
            let ev = op.restriction_eigenvalues().unwrap();
            worst = worst.max(linalg::match_into(&ev, &fock).unwrap_or(f64::INFINITY));
        }
    }
    for n_upper in 0..=4 {
        for phi in [Phi::Plus, Phi::Minus] {
            let p = ModelParams::qes(n_upper, 1.0, 0.6, 1.3).with_phi(phi);
            let fock = linalg::eigenvalues(build_ht(&p, &sp).unwrap().matrix()).unwrap();
            let op = gauge_transform_ht(&p, 1.0).unwrap();
            let ev = op.restriction_eigenvalues().unwrap();
            worst = worst.max(linalg::match_into(&ev, &fock).unwrap_or(f64::INFINITY));
        }
    }
    outcome(worst <= 1e-9, format!("worst deviation {worst:e}"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("exact structure", structure),
        ("closed form vs numeric", closed_form_vs_numeric),
        ("mixing-angle eigenvectors", mixing_angles),
        ("QES exactness", qes_exactness),
        ("rho=0 N=1 algebraic list", rho_zero_list),
        ("theta crossing at E=-1/2", theta_crossing),
        ("ground-state migration", ground_state_migration),
        ("exceptional points", exceptional_points),
        ("recurrence oracle", recurrence_oracle),
        ("cross-representation", cross_representation),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} [{tag}] {name}: {}", i + 1, o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
