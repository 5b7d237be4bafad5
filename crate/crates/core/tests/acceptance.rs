//! Acceptance suite: one PASS/FAIL line per criterion.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::Rng;

use polydisc::dynamics::{
    builtin_intro_example, builtin_remark5_example, classify_selfmap, disc_base_point,
    estimate_divergence_rate, estimate_step, ClassifyOptions, HoloSelfMap,
};
use polydisc::funceq::{
    abel_for_auto, check_valiron_conditions, surjectivity_witness, target_grid, valiron_for_auto,
    verify_abel, verify_valiron, SamplingOptions,
};
use polydisc::geometry::{cayley, cayley_inv, dist_halfplane, dist_poly, PolyPoint};
use polydisc::normalform::{normal_form_cycle, verify_conjugacy};
use polydisc::polyauto::{AutoKind, CycleAuto};
use polydisc::sampling;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut out = f();
    let took = start.elapsed();
    out.detail = format!("{}; {:.3}s", out.detail, took.as_secs_f64());
    if let Some(limit) = limit {
        if took > limit {
            out.pass = false;
            out.detail = format!("{} (limit {}s)", out.detail, limit.as_secs_f64());
        }
    }
    out
}

fn normal_form_conjugacy() -> Outcome {
    let mut rng = sampling::rng(101);
    let mut worst = 0.0f64;
    for i in 0..200 {
        let k = rng.gen_range(1..=5);
        let cycle = sampling::cycle_entries(&mut rng, k, 3.0);
        let nf = normal_form_cycle(&cycle);
        match verify_conjugacy(&nf, &cycle, 50, 1000 + i) {
            Ok(r) => worst = worst.max(r),
            Err(e) => return check(false, format!("cycle {i}: {e}")),
        }
    }
    check(
        worst < 1e-8,
        format!("max residual {worst:.3e} over 200 cycles (tol 1e-8)"),
    )
}

fn divergence_rate_formula() -> Outcome {
    let mut rng = sampling::rng(202);
    let mut worst = 0.0f64;
    for i in 0..50 {
        let q = rng.gen_range(1..=5);
        let tau = sampling::auto_with(&mut rng, q, |r| sampling::moebius_entries(r, 3.0));
        let exact = tau.classify().divergence_rate;
        let f = HoloSelfMap::from_auto(&tau);
        match estimate_divergence_rate(&f, &PolyPoint::center(q), 2000) {
            Ok(st) => worst = worst.max((st.c_estimate - exact).abs()),
            Err(e) => return check(false, format!("automorphism {i}: {e}")),
        }
    }
    check(
        worst < 5e-3,
        format!("max |c - c_est| {worst:.3e} over 50 automorphisms (tol 5e-3)"),
    )
}

fn valiron_identity() -> Outcome {
    let mut rng = sampling::rng(303);
    let opts = SamplingOptions {
        samples: 100,
        seed: 0,
        companion_horizon: 2000,
        ..Default::default()
    };
    let grid = target_grid();
    let (mut res, mut cond, mut surj) = (0.0f64, 0.0f64, 0.0f64);
    let mut bound_ok = true;
    for i in 0..50 {
        let q = rng.gen_range(1..=5);
        let tau = sampling::auto_of_kind(&mut rng, q, AutoKind::Hyperbolic);
        let mut run = || -> Result<(), String> {
            let v = valiron_for_auto(&tau).map_err(|e| e.to_string())?;
            let f = HoloSelfMap::from_auto(&tau);
            let rep = verify_valiron(
                &|z| v.eval(z),
                &f,
                v.lambda,
                &SamplingOptions {
                    seed: i,
                    ..opts.clone()
                },
            )
            .map_err(|e| e.to_string())?;
            res = res.max(rep.residual);
            bound_ok &= rep
                .companion_checks
                .values()
                .all(|c| c.holds != Some(false));
            let c = check_valiron_conditions(&|z| v.eval(z), &tau, 100, i)
                .map_err(|e| e.to_string())?;
            cond = cond.max(c.homogeneity.max(c.sigma_invariance));
            let s = surjectivity_witness(&v, &tau, &grid).map_err(|e| e.to_string())?;
            surj = surj.max(s.max_error);
            Ok(())
        };
        if let Err(e) = run() {
            return check(false, format!("automorphism {i}: {e}"));
        }
    }
    check(
        res < 1e-9 && cond < 1e-9 && surj < 1e-8 && bound_ok,
        format!(
            "residual {res:.3e} (tol 1e-9), conditions {cond:.3e} (tol 1e-9), \
             surjectivity {surj:.3e} (tol 1e-8), rate bound {}",
            if bound_ok { "holds" } else { "violated" }
        ),
    )
}

fn abel_identity() -> Outcome {
    let mut rng = sampling::rng(404);
    let opts = SamplingOptions {
        samples: 100,
        companion_horizon: 200,
        ..Default::default()
    };
    let (mut res, mut shortfall) = (0.0f64, 0.0f64);
    let mut sign_stable = true;
    for i in 0..20 {
        let q = rng.gen_range(1..=5);
        let tau = sampling::auto_of_kind(&mut rng, q, AutoKind::Parabolic);
        let mut run = || -> Result<(), String> {
            let a = abel_for_auto(&tau).map_err(|e| e.to_string())?;
            let f = HoloSelfMap::from_auto(&tau);
            let rep = verify_abel(
                &|z| a.eval(z),
                &f,
                a.alpha as f64,
                &SamplingOptions {
                    seed: i,
                    ..opts.clone()
                },
            )
            .map_err(|e| e.to_string())?;
            res = res.max(rep.residual);
            shortfall = shortfall.max(
                rep.companion_checks["step_lower_bound"]
                    .value
                    .unwrap_or(f64::INFINITY),
            );
            let dec = tau.cycle_decompose();
            let block = dec
                .blocks
                .iter()
                .find(|b| b.cycle.classify().kind == AutoKind::Parabolic)
                .ok_or("no parabolic cycle")?;
            for shift in 0..block.cycle.len() {
                let again: CycleAuto = block.cycle.reanchored(shift);
                sign_stable &= normal_form_cycle(&again).sign == Some(a.alpha);
            }
            Ok(())
        };
        if let Err(e) = run() {
            return check(false, format!("automorphism {i}: {e}"));
        }
    }
    check(
        res < 1e-9 && sign_stable && shortfall <= 5e-3,
        format!(
            "residual {res:.3e} (tol 1e-9), sign {}, step shortfall {shortfall:.3e} (tol 5e-3)",
            if sign_stable { "stable" } else { "unstable" }
        ),
    )
}

fn intro_map() -> Outcome {
    let run = || -> Result<Outcome, String> {
        let f = builtin_intro_example(Complex64::i()).map_err(|e| e.to_string())?;
        let cls = classify_selfmap(&f, &ClassifyOptions::default()).map_err(|e| e.to_string())?;
        let p0 = disc_base_point(&[Complex64::new(0.0, 0.0); 2]).map_err(|e| e.to_string())?;
        let p1 = disc_base_point(&[Complex64::new(0.5, 0.0), Complex64::new(0.0, 0.0)])
            .map_err(|e| e.to_string())?;
        let st0 = estimate_step(&f, &p0, 10_000).map_err(|e| e.to_string())?;
        let st1 = estimate_step(&f, &p1, 10_000).map_err(|e| e.to_string())?;
        let pass = cls.kind == AutoKind::Parabolic
            && cls.c_estimate < 1e-2
            && st0.c_estimate < 1e-2
            && st0.s_estimate < 1e-2
            && st1.s_estimate > 0.5;
        Ok(check(
            pass,
            format!(
                "kind {}, c_est {:.3e}, step at (0,0) {:.3e}, step at (1/2,0) {:.4}",
                cls.kind, st0.c_estimate, st0.s_estimate, st1.s_estimate
            ),
        ))
    };
    run().unwrap_or_else(|e| check(false, e))
}

fn remark5_map() -> Outcome {
    let run = || -> Result<Outcome, String> {
        let f = builtin_remark5_example(0.3).map_err(|e| e.to_string())?;
        let opts = ClassifyOptions {
            m: 5000,
            ..Default::default()
        };
        let cls = classify_selfmap(&f, &opts).map_err(|e| e.to_string())?;
        let st =
            estimate_divergence_rate(&f, &PolyPoint::center(2), 5000).map_err(|e| e.to_string())?;
        let err = (st.c_estimate - 0.3 * PI).abs();
        Ok(check(
            cls.kind == AutoKind::Hyperbolic && err < 2e-2,
            format!(
                "kind {}, c_est {:.5} vs 0.3pi, error {err:.3e} (tol 2e-2)",
                cls.kind, st.c_estimate
            ),
        ))
    };
    run().unwrap_or_else(|e| check(false, e))
}

fn orbit_oracle(cycle: &CycleAuto) -> Result<AutoKind, String> {
    let m = 10_000;
    let f = HoloSelfMap::from_auto(&cycle.to_auto());
    let st = estimate_divergence_rate(&f, &PolyPoint::center(cycle.len()), m)
        .map_err(|e| e.to_string())?;
    let d = &st.dist_to_start;
    let s1 = d[..=m / 2].iter().copied().fold(0.0, f64::max);
    let s2 = d[m / 2..].iter().copied().fold(0.0, f64::max);
    Ok(if s2 - s1 < 0.5 {
        AutoKind::Elliptic
    } else if st.c_estimate > 5e-3 {
        AutoKind::Hyperbolic
    } else {
        AutoKind::Parabolic
    })
}

fn oracle_equivalence() -> Outcome {
    let mut rng = sampling::rng(707);
    let kinds = [
        AutoKind::Elliptic,
        AutoKind::Parabolic,
        AutoKind::Hyperbolic,
    ];
    let mut mismatches = Vec::new();
    for i in 0..20 {
        let k = rng.gen_range(1..=5);
        let cycle = sampling::cycle_of_kind(&mut rng, k, kinds[i % 3]);
        let by_trace = cycle.classify().kind;
        match orbit_oracle(&cycle) {
            Ok(by_orbit) if by_orbit == by_trace => {}
            Ok(by_orbit) => mismatches.push(format!("#{i}: trace {by_trace}, orbit {by_orbit}")),
            Err(e) => mismatches.push(format!("#{i}: {e}")),
        }
    }
    check(
        mismatches.is_empty(),
        if mismatches.is_empty() {
            "20/20 cycles agree".to_string()
        } else {
            mismatches.join(", ")
        },
    )
}

fn geometry_suite() -> Outcome {
    let mut rng = sampling::rng(808);
    let mut conformal = 0.0f64;
    for _ in 0..1000 {
        let m = sampling::moebius_entries(&mut rng, 3.0);
        let (z, w) = (sampling::point_h(&mut rng), sampling::point_h(&mut rng));
        let (mz, mw) = match (m.apply(&z), m.apply(&w)) {
            (Ok(a), Ok(b)) => (a, b),
            _ => return check(false, "Möbius image left the half-plane".into()),
        };
        conformal = conformal.max((dist_halfplane(&mz, &mw) - dist_halfplane(&z, &w)).abs());
    }
    let mut round_trip = 0.0f64;
    for _ in 0..1000 {
        let z = sampling::point_h(&mut rng);
        let back = cayley(&z).and_then(|w| cayley_inv(&w)).map(|p| p.value());
        match back {
            Ok(b) => round_trip = round_trip.max((b - z.value()).norm()),
            Err(e) => return check(false, format!("Cayley round trip failed: {e}")),
        }
    }
    let mut product_exact = true;
    for _ in 0..1000 {
        let q = rng.gen_range(1..=6);
        let (z, w) = (
            sampling::poly_point(&mut rng, q),
            sampling::poly_point(&mut rng, q),
        );
        let max = z
            .coords()
            .iter()
            .zip(w.coords())
            .map(|(a, b)| dist_halfplane(a, b))
            .fold(0.0, f64::max);
        product_exact &= dist_poly(&z, &w).map(|d| d == max).unwrap_or(false);
    }
    check(
        conformal < 1e-10 && round_trip < 1e-14 && product_exact,
        format!(
            "conformal {conformal:.3e} (tol 1e-10), Cayley round trip {round_trip:.3e} (tol 1e-14), product max {}",
            if product_exact { "exact" } else { "inexact" }
        ),
    )
}

type Criterion = (&'static str, Option<Duration>, fn() -> Outcome);

fn main() -> ExitCode {
    let secs = |s| Some(Duration::from_secs(s));
    let criteria: Vec<Criterion> = vec![
        ("normal-form conjugacy", secs(5), normal_form_conjugacy),
        ("divergence-rate formula", secs(10), divergence_rate_formula),
        ("Valiron identity", None, valiron_identity),
        ("Abel identity", None, abel_identity),
        ("intro map is parabolic", secs(2), intro_map),
        ("remark5 map is hyperbolic", secs(2), remark5_map),
        ("trace vs orbit oracle", None, oracle_equivalence),
        ("geometry suite", None, geometry_suite),
    ];
    let mut failed = 0;
    for (i, (name, limit, f)) in criteria.into_iter().enumerate() {
        let out = timed(limit, f);
        if !out.pass {
            failed += 1;
        }
        println!(
            "criterion {} {:<30} {}  {}",
            i + 1,
            name,
            if out.pass { "PASS" } else { "FAIL" },
            out.detail
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
