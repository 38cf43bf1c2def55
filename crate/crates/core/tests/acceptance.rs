//! One line per acceptance criterion; exits non-zero if any fails.

use std::f64::consts::PI;
use std::time::Instant;

use conetorsion::bessel::{modified_bessel, uniform_expansion, BesselKind};
use conetorsion::spectra::brute::brute_force_form_laplacian;
use conetorsion::spectra::{coclosed_spectrum, cutoff_for_tolerance, CrossSection};
use conetorsion::torsion::{
    large_lambda_constant, log_torsion_cone, log_torsion_truncated, res_term, t_eta_lambda, tors_scaling_profile,
    tors_term, torsion_difference, TorsionOptions,
};
use conetorsion::verify::{self, Check};
use conetorsion::zeta::oracle::first_order_shifted;
use conetorsion::zeta::{shifted_zeta0, shifted_zeta_prime0, Sign, DEFAULT_K_TOL};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn within(name: &str, worst: f64, tol: f64) -> Result<String, String> {
    if worst <= tol {
        Ok(format!("{name} {worst:.2e} ≤ {tol:.0e}"))
    } else {
        Err(format!("{name} {worst:.2e} > {tol:.0e}"))
    }
}

/// Re-pins a library check to the criterion's own tolerance.
fn pinned(c: &Check, tol: f64) -> Result<String, String> {
    within(&c.name, c.worst, tol).map_err(|e| format!("{e} ({})", c.detail))
}

fn join(parts: Vec<Result<String, String>>) -> Outcome {
    let mut ok = Vec::new();
    let mut bad = Vec::new();
    for p in parts {
        match p {
            Ok(s) => ok.push(s),
            Err(s) => bad.push(s),
        }
    }
    if bad.is_empty() {
        Ok(ok.join("; "))
    } else {
        Err(bad.join("; "))
    }
}

fn unit(n: usize) -> CrossSection {
    CrossSection::square_torus(n, 1.0, 1).unwrap()
}

fn flat_torus_anomaly() -> Outcome {
    let mut parts = Vec::new();
    for &l in &[1.0, 2.0 * PI, 3.0] {
        let cs = CrossSection::square_torus(2, l, 1).map_err(|e| e.to_string())?;
        let t = Instant::now();
        let (_, a) = res_term(&cs).map_err(|e| e.to_string())?;
        log_torsion_cone(&cs, &TorsionOptions::default()).map_err(|e| e.to_string())?;
        let secs = t.elapsed().as_secs_f64();
        parts.push(within(&format!("L={l:.4} rel"), (a / (-l * l / (8.0 * PI)) - 1.0).abs(), 1e-10));
        parts.push(within(&format!("L={l:.4} seconds"), secs, 10.0));
    }
    join(parts)
}

fn exact_identities() -> Outcome {
    let checks = [verify::dm_identity(), verify::zrb_identity(), verify::m2_table()];
    join(
        checks
            .iter()
            .map(|c| {
                if c.passed && c.worst == 0.0 {
                    Ok(format!("{} exact", c.name))
                } else {
                    Err(format!("{}: {}", c.name, c.detail))
                }
            })
            .collect(),
    )
}

fn bessel_layer() -> Outcome {
    let w = verify::wronskian(verify::WRONSKIAN_SEED);
    let mut worst_ratio = 0.0f64;
    for &nu in &[30.0, 50.0, 100.0] {
        for &z in &[0.1, 0.5, 1.0, 2.5, 6.0] {
            let d = modified_bessel(nu, nu * z, true).map_err(|e| e.to_string())?;
            let ex = (nu * z).exp();
            for (kind, direct) in [
                (BesselKind::I, d.i_val * ex),
                (BesselKind::IPrime, d.i_prime * ex),
                (BesselKind::K, d.k_val / ex),
                (BesselKind::KPrime, d.k_prime / ex),
            ] {
                for terms in 2..=6 {
                    let u = uniform_expansion(kind, nu, z, terms).map_err(|e| e.to_string())?;
                    let slack = u.truncation + 1e-13 * direct.abs();
                    worst_ratio = worst_ratio.max((u.value - direct).abs() / slack);
                }
            }
        }
    }
    join(vec![pinned(&w, 1e-12), within("uniform error / reported bound", worst_ratio, 1.0)])
}

fn determinant_ratios() -> Outcome {
    join(vec![
        pinned(&verify::det_ratio_grid(), 1e-6),
        pinned(&verify::harmonic_vs_oracle(), 1e-6),
        pinned(&verify::ratios_near_zero(), 1e-8),
    ])
}

fn zeta_layer() -> Outcome {
    let cs = unit(2);
    let (mut oracle, mut doubling, mut order) = (0.0f64, 0.0f64, 0.0f64);
    for k in 0..2 {
        let run = || -> conetorsion::Result<(f64, f64, f64)> {
            let cut = cutoff_for_tolerance(&cs, k, 1e-15)?;
            let s = coclosed_spectrum(&cs, k, cut)?;
            let s2 = coclosed_spectrum(&cs, k, 2.0 * cut)?;
            let (mut o, mut d, mut r) = (0.0f64, 0.0f64, 0.0f64);
            for sign in [Sign::Plus, Sign::Minus] {
                let (o0, o1) = first_order_shifted(&cs, k, sign)?;
                let z0 = shifted_zeta0(&s, sign)?.value;
                let z1 = shifted_zeta_prime0(&s, sign, 2, DEFAULT_K_TOL)?.value;
                o = o.max((z0 - o0.value).abs()).max((z1 - o1.value).abs());
                d = d.max((shifted_zeta0(&s2, sign)?.value - z0).abs());
                d = d.max((shifted_zeta_prime0(&s2, sign, 2, DEFAULT_K_TOL)?.value - z1).abs());
                r = r.max((shifted_zeta_prime0(&s, sign, 4, DEFAULT_K_TOL)?.value - z1).abs());
            }
            Ok((o, d, r))
        };
        let (o, d, r) = run().map_err(|e| format!("k={k}: {e}"))?;
        oracle = oracle.max(o);
        doubling = doubling.max(d);
        order = order.max(r);
    }
    join(vec![
        within("vs first-order oracle", oracle, 1e-7),
        within("cutoff doubling", doubling, 1e-8),
        within("order n → n+2", order, 1e-8),
    ])
}

fn regularization_surface() -> Outcome {
    let mut parts = Vec::new();
    for &(nu, a, eps) in &verify::REGULARIZATION_TRIPLES {
        let small = t_eta_lambda(nu, a, eps, -1e-8, 2).map_err(|e| e.to_string())?;
        let big = t_eta_lambda(nu, a, eps, -1e6, 2).map_err(|e| e.to_string())?;
        let b = large_lambda_constant(nu, a, 2);
        parts.push(within(&format!("|p(−1e−8)| ({nu},{a},{eps})"), small.p.abs(), 1e-6));
        parts.push(within(&format!("|p(−1e6)−b| ({nu},{a},{eps})"), (big.p - b).abs(), 1e-4));
    }
    join(parts)
}

fn cross_route() -> Outcome {
    let cs = unit(2);
    let opts = TorsionOptions::default();
    let cone = log_torsion_cone(&cs, &opts).map_err(|e| e.to_string())?.log_t;
    let mut worst = 0.0f64;
    for &eps in &[0.1, 0.25, 0.5] {
        let d = torsion_difference(&cs, eps, &opts).map_err(|e| e.to_string())?;
        let tr = log_torsion_truncated(&cs, eps).map_err(|e| e.to_string())?;
        worst = worst.max((d.total - (tr - cone)).abs());
    }
    join(vec![within("ε ∈ {0.1, 0.25, 0.5}", worst, 1e-8)])
}

fn duality_and_scaling() -> Outcome {
    let opts = TorsionOptions::default();
    let mut parts = Vec::new();
    for n in [2, 4] {
        let t = tors_term(&unit(n), &opts).map_err(|e| e.to_string())?;
        parts.push(within(&format!("T{n} duality"), t.residual.abs(), 1e-8));
    }
    let mus = [2.0, 4.0, 8.0, 16.0, 32.0, 64.0];
    let t = Instant::now();
    let prof = tors_scaling_profile(&unit(2), &mus, &opts).map_err(|e| e.to_string())?;
    let secs = t.elapsed().as_secs_f64();
    let ratios: Vec<f64> = prof.rows.iter().filter_map(|r| r.bound_ratio).collect();
    let tail: Vec<f64> = prof.rows.iter().filter(|r| r.mu >= 8.0).filter_map(|r| r.bound_ratio).collect();
    let finite = ratios.len() == mus.len() && ratios.iter().all(|r| r.is_finite());
    let monotone = tail.windows(2).all(|w| w[1] <= w[0]);
    parts.push(if finite && monotone {
        Ok(format!("max |Tors|μ/log μ = {:.4} over μ = 2..64, non-increasing from μ = 8", prof.bound_constant))
    } else {
        Err(format!("ratios {ratios:?}"))
    });
    parts.push(within("scaling seconds", secs, 60.0));
    join(parts)
}

fn spectra_oracle() -> Outcome {
    let mut worst = 0.0f64;
    for (n, shells) in [(2, 4), (4, 2)] {
        let cs = unit(n);
        for k in 0..n {
            let o = brute_force_form_laplacian(&cs, k, shells).map_err(|e| e.to_string())?;
            let s = coclosed_spectrum(&cs, k, o.complete_below).map_err(|e| e.to_string())?;
            let a: Vec<_> = s.levels.iter().filter(|l| l.eta < o.complete_below).collect();
            let b: Vec<_> = o.levels.iter().filter(|l| l.eta < o.complete_below).collect();
            if a.len() != b.len() {
                return Err(format!("T{n} k={k}: {} levels vs {}", a.len(), b.len()));
            }
            for (x, y) in a.iter().zip(&b) {
                if x.mult != y.mult {
                    return Err(format!("T{n} k={k}: multiplicity {} vs {} at η={}", x.mult, y.mult, x.eta));
                }
                worst = worst.max((x.eta - y.eta).abs() / x.eta);
            }
        }
    }
    join(vec![within("multiplicities exact, η relative", worst, 1e-9)])
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("flat-torus anomaly", flat_torus_anomaly),
        ("exact identity suite", exact_identities),
        ("Bessel layer", bessel_layer),
        ("determinant ratios", determinant_ratios),
        ("zeta layer", zeta_layer),
        ("regularization surface", regularization_surface),
        ("cross-route consistency", cross_route),
        ("Tors duality and scaling", duality_and_scaling),
        ("spectra oracle", spectra_oracle),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(d) => println!("criterion {}: PASS {name}: {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {d}", i + 1);
            }
        }
    }
    println!("acceptance: {} of 9 criteria passed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
