//! Self-check suites run by `chgeo verify`.
//!
//! Each suite evaluates one family of identities on seeded random samples
//! and reports the largest absolute residual against its tolerance.

use rand::Rng;
use serde::Serialize;

use crate::catalog::{self, Family, NonHopfLabels, TubeBase};
use crate::classifier::{self, CaseTwo};
use crate::curvature::{CurvatureModel, HypersurfacePointData};
use crate::error::Result;
use crate::jacobi::{self, JacobiPropagator, JacobiSolution};
use crate::rng::{gaussian_vector, seeded, unit_in_span, unit_vector};
use crate::solvable::{self, RuledSpec, SolvableAlgebra, A, Z};
use crate::{linalg, Vector};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub name: &'static str,
    pub checks: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    /// Discrete checks (counts, flags) that failed.
    pub failures: usize,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub seed: u64,
    pub suites: Vec<SuiteResult>,
    pub passed: bool,
}

/// Running maximum of residuals plus a count of failed discrete checks.
#[derive(Debug, Default)]
struct Tally {
    checks: usize,
    worst: f64,
    failures: usize,
}

impl Tally {
    fn residual(&mut self, r: f64) {
        self.checks += 1;
        // NaN must fail
        self.worst = if r.is_nan() { f64::INFINITY } else { self.worst.max(r) };
    }

    fn flag(&mut self, ok: bool) {
        self.checks += 1;
        if !ok {
            self.failures += 1;
        }
    }
}

type SuiteFn = fn(u64) -> Result<Tally>;

fn suites() -> Vec<(&'static str, f64, SuiteFn)> {
    vec![
        ("curvature-identities", 1e-12, curvature_identities),
        ("curvature-cross-model", 1e-10, cross_model),
        ("gauss-codazzi", 1e-10, gauss_codazzi),
        ("ruled-second-fundamental-form", 1e-12, ruled_sff),
        ("jacobi-oracle", 1e-8, jacobi_oracle),
        ("jacobi-ode", 1e-6, jacobi_ode),
        ("focal-case-one", 1e-12, focal_case_one),
        ("focal-case-two", 1e-9, focal_case_two),
        ("classifier", 1e-10, classifier_suite),
        ("structural", 1e-10, structural),
        ("catalog", 1e-10, catalog_suite),
        ("cross-consistency", 1e-10, cross_consistency),
    ]
}

pub fn suite_names() -> Vec<&'static str> {
    suites().into_iter().map(|(n, _, _)| n).collect()
}

/// Runs every suite; `tolerance` overrides all suite tolerances.
pub fn run(seed: u64, tolerance: Option<f64>) -> Report {
    let results: Vec<SuiteResult> = suites()
        .into_iter()
        .map(|(name, tol, f)| {
            let tolerance = tolerance.unwrap_or(tol);
            match f(seed) {
                Ok(t) => SuiteResult {
                    name,
                    checks: t.checks,
                    max_residual: t.worst,
                    tolerance,
                    failures: t.failures,
                    passed: t.worst <= tolerance && t.failures == 0,
                },
                Err(_) => SuiteResult {
                    name,
                    checks: 0,
                    max_residual: f64::INFINITY,
                    tolerance,
                    failures: 1,
                    passed: false,
                },
            }
        })
        .collect();
    let passed = results.iter().all(|s| s.passed);
    Report {
        seed,
        suites: results,
        passed,
    }
}

fn curvature_identities(seed: u64) -> Result<Tally> {
    let mut rng = seeded(seed);
    let mut t = Tally::default();
    for n in [2, 3, 4] {
        let m = CurvatureModel::new(n)?;
        let d = m.dim();
        for _ in 0..100 {
            let [x, y, z, w] = [0; 4].map(|_| gaussian_vector(&mut rng, d));
            t.residual((m.j(&m.j(&x)) + &x).amax());
            t.residual((m.j(&x).dot(&m.j(&y)) - x.dot(&y)).abs());
            t.residual((m.curvature_form(&x, &y, &z, &w)? - m.curvature_form(&z, &w, &x, &y)?).abs());
            let bianchi = m.curvature(&x, &y, &z)? + m.curvature(&y, &z, &x)? + m.curvature(&z, &x, &y)?;
            t.residual(bianchi.amax());
            t.residual((m.curvature(&m.j(&x), &m.j(&y), &z)? - m.curvature(&x, &y, &z)?).amax());
        }
        for _ in 0..1000 {
            let (x, y) = (gaussian_vector(&mut rng, d), gaussian_vector(&mut rng, d));
            let k = m.sectional_curvature(&x, &y)?;
            t.residual((k + 0.25).max(-1.0 - k).max(0.0));
        }
    }
    Ok(t)
}

fn cross_model(seed: u64) -> Result<Tally> {
    let mut rng = seeded(seed);
    let mut t = Tally::default();
    for n in [2, 3, 4] {
        let alg = SolvableAlgebra::new(n)?;
        let m = alg.curvature_model();
        for _ in 0..500 {
            let [x, y, z] = [0; 3].map(|_| unit_vector(&mut rng, alg.dim()));
            t.residual((alg.algebra_curvature(&x, &y, &z)? - m.curvature(&x, &y, &z)?).amax());
        }
        t.residual(alg.jacobi_defect());
        t.residual(alg.center_defect());
    }
    Ok(t)
}

fn gauss_codazzi(seed: u64) -> Result<Tally> {
    let mut rng = seeded(seed);
    let mut t = Tally::default();
    for n in [2, 3, 4] {
        let alg = SolvableAlgebra::new(n)?;
        let m = alg.curvature_model();
        let w = solvable::build_ruled(&alg, &RuledSpec::canonical(n, 1)?)?;
        let horo = solvable::horosphere(&alg);
        let horo_shape = catalog::horosphere_shape(n, 0.0)?;
        let models: Vec<(HypersurfacePointData, &[Vector])> = vec![
            (w.hypersurface_data(&alg.v(1))?, w.tangent()),
            (
                HypersurfacePointData::new(
                    horo_shape.normal.clone(),
                    horo_shape.shape.clone(),
                    Some(horo.connection_sample()),
                )?,
                horo.tangent(),
            ),
        ];
        for (data, tangent) in &models {
            for _ in 0..50 {
                let [x, y, z, u] = [0; 4].map(|_| unit_in_span(&mut rng, tangent));
                t.residual(m.gauss_residual(data, &x, &y, &z, &u)?);
                t.residual(m.codazzi_residual(data, &x, &y, &z)?);
            }
        }
        // principal-direction forms on W^{2n-1}
        let data = &models[0].0;
        let spaces = catalog_shape(&m, data).eigenspaces();
        for _ in 0..30 {
            for (li, si) in &spaces {
                for (lj, sj) in &spaces {
                    for (lk, sk) in &spaces {
                        let x = unit_in_span(&mut rng, si);
                        let y = unit_in_span(&mut rng, sj);
                        let z = unit_in_span(&mut rng, sk);
                        t.residual(m.three_eigen_residual(data, (&x, *li), (&y, *lj), (&z, *lk))?);
                    }
                    if (li - lj).abs() > 1e-9 {
                        let x = unit_in_span(&mut rng, si);
                        let y = unit_in_span(&mut rng, si);
                        let z = unit_in_span(&mut rng, sj);
                        t.residual(m.two_eigen_residual(data, (&x, &y, *li), (&z, *lj))?);
                    }
                }
            }
        }
    }
    Ok(t)
}

fn catalog_shape(m: &CurvatureModel, data: &HypersurfacePointData) -> jacobi::HypersurfaceShape {
    jacobi::HypersurfaceShape::new(*m, data.normal.clone(), data.shape.clone())
}

fn ruled_sff(seed: u64) -> Result<Tally> {
    let mut rng = seeded(seed);
    let mut t = Tally::default();
    for n in [3, 4, 5] {
        let alg = SolvableAlgebra::new(n)?;
        for k in 1..n {
            let spec = RuledSpec::canonical(n, k)?;
            t.residual(spec.decomposition_defect());
            let w = solvable::build_ruled(&alg, &spec)?;
            let z = alg.basis(Z);
            let iperp = spec.i_w_perp();
            let mut frame = vec![alg.basis(A), z.clone()];
            frame.extend(spec.w_complex());
            frame.extend(iperp.iter().cloned());
            for (a, x) in frame.iter().enumerate() {
                for (b, y) in frame.iter().enumerate() {
                    let h = w.second_fundamental_form(x, y);
                    let expect = match (a, b) {
                        (1, b) if b >= frame.len() - k => spec.w_perp()[b - (frame.len() - k)].clone() * 0.5,
                        (a, 1) if a >= frame.len() - k => spec.w_perp()[a - (frame.len() - k)].clone() * 0.5,
                        _ => Vector::zeros(alg.dim()),
                    };
                    t.residual((h - expect).amax());
                }
            }
            for _ in 0..5 {
                let xi = unit_in_span(&mut rng, spec.w_perp());
                let ixi = alg.complex_structure_v(&xi);
                t.residual((w.second_fundamental_form(&z, &ixi) * 2.0 - &xi).norm());
                let pcs = w.principal_curvatures(&xi);
                let mut expect = vec![0.0; 2 * n - k - 2];
                expect.insert(0, -0.5);
                expect.push(0.5);
                for (p, e) in pcs.iter().zip(&expect) {
                    t.residual((p - e).abs());
                }
                t.flag(pcs.len() == expect.len());
                let s = w.shape_operator(&xi);
                for sign in [1.0, -1.0] {
                    let v = (&z + &ixi * sign) / 2.0_f64.sqrt();
                    t.residual((&s * &v - &v * (0.5 * sign)).amax());
                }
            }
        }
    }
    Ok(t)
}

fn jacobi_oracle(seed: u64) -> Result<Tally> {
    let mut rng = seeded(seed);
    let mut t = Tally::default();
    for _ in 0..200 {
        let (m, xi, jxi, v, lambda, time) = jacobi_sample(&mut rng)?;
        let exact = JacobiSolution::closed_form(lambda, &v, &jxi, time);
        let (z, dz) = jacobi::jacobi_numeric(&v, &(-&v * lambda), &jxi, time, 1e-3)?;
        t.residual((z - &exact.value).amax().max((dz - &exact.derivative).amax()));
        let prop = JacobiPropagator::new(&m, &xi)?;
        let (z, _) = prop.propagate(&v, &(-&v * lambda), time);
        t.residual((z - exact.value).amax());
    }
    Ok(t)
}

type Sample = (CurvatureModel, Vector, Vector, Vector, f64, f64);

fn jacobi_sample<R: Rng>(rng: &mut R) -> Result<Sample> {
    let n = rng.random_range(2..=4);
    let m = CurvatureModel::new(n)?;
    let xi = unit_vector(rng, m.dim());
    let jxi = m.j(&xi);
    let rest = linalg::complement(std::slice::from_ref(&xi), m.dim());
    let v = unit_in_span(rng, &rest);
    Ok((m, xi, jxi, v, rng.random_range(-1.0..1.0), rng.random_range(0.0..3.0)))
}

fn jacobi_ode(seed: u64) -> Result<Tally> {
    let mut rng = seeded(seed ^ 0x5eed);
    let mut t = Tally::default();
    for _ in 0..200 {
        let (_, _, jxi, v, lambda, time) = jacobi_sample(&mut rng)?;
        let z = |s: f64| JacobiSolution::closed_form(lambda, &v, &jxi, s).value;
        let z0 = z(time);
        // Richardson step pair: a single step of 1e-4 sits on the round-off floor
        let central = |h: f64| (z(time + h) - &z0 * 2.0 + z(time - h)) / (h * h);
        let second = (central(1e-3) * 4.0 - central(2e-3)) / 3.0;
        let res = second * 4.0 - &z0 - &jxi * (3.0 * z0.dot(&jxi));
        t.residual(res.amax());
    }
    Ok(t)
}

fn sqrt(x: f64) -> f64 {
    x.sqrt()
}

fn focal_case_one(_seed: u64) -> Result<Tally> {
    let mut t = Tally::default();
    let r = catalog::special_radius();
    let branch = classifier::solve_case_one();
    for (n, m1) in [(3, 2), (4, 2), (4, 3), (5, 4)] {
        let data = branch.to_non_hopf(n, m1)?;
        let focal = jacobi::transversal_map(&data, r)?;
        let expected = [4.0, sqrt(2.0), 4.0 * sqrt(2.0) - 2.0 * sqrt(3.0), 2.0 + 4.0 * sqrt(6.0)];
        for (i, e) in expected.iter().enumerate() {
            t.residual((9.0 * focal.d[(i / 2, i % 2)] - e).abs());
        }
        let a = &focal.source.a;
        t.residual((9.0 * focal.push_forward(a).dot(a) - 3.0 * sqrt(6.0)).abs());
        t.flag(focal.kernel_dim == m1 - 1);
        t.flag(focal.image_codim == m1);
        t.flag(focal.gap_ok);
        for w in focal.source.w1() {
            t.residual(focal.push_forward(&w).norm());
        }
        let shape = jacobi::image_shape_operator(&focal);
        let block = [4.0 * sqrt(2.0), -7.0, -7.0, -4.0 * sqrt(2.0)];
        for (i, e) in block.iter().enumerate() {
            t.residual((shape.u_block[(i / 2, i % 2)] - e / 18.0).abs());
        }
        let c = focal.c_matrix()?;
        t.residual((c.trace()).abs().max((c.determinant() + 0.25).abs()));
        t.residual(shape.apply(&focal, a)?.norm());
    }
    Ok(t)
}

/// 97 values of `lambda3` in `(-1/2, 1/2)`, avoiding `0`.
pub fn case_two_grid() -> Vec<f64> {
    (0..97).map(|i| -0.49 + 0.98 * (i as f64 + 0.25) / 97.0).collect()
}

fn focal_case_two(_seed: u64) -> Result<Tally> {
    let mut t = Tally::default();
    for l3 in case_two_grid() {
        let Some(branch) = classifier::solve_case_two(l3).branch().cloned() else {
            t.flag(false);
            continue;
        };
        let r = 2.0 * (2.0 * l3).atanh();
        let focal = jacobi::transversal_map(&branch.to_non_hopf(3, 1)?, r)?;
        t.residual((focal.d.determinant() - (r / 2.0).cosh().powi(-3)).abs());
        let c = focal.c_matrix()?;
        t.residual(c.trace().abs());
        t.residual((c.determinant() + 0.25).abs());
        let half_gap = (c.trace() * c.trace() / 4.0 - c.determinant()).max(0.0).sqrt();
        t.residual((half_gap - 0.5).abs());
        let spectrum = &focal.image_spectrum;
        t.flag(spectrum.len() == 3);
        t.residual(
            spectrum
                .iter()
                .map(|(l, _)| (l.abs() - 0.5).abs().min(l.abs()))
                .fold(0.0, f64::max),
        );
    }
    Ok(t)
}

fn classifier_suite(seed: u64) -> Result<Tally> {
    let mut t = Tally::default();
    let one = classifier::solve_case_one();
    t.residual(one.max_residual());
    for l3 in case_two_grid() {
        match classifier::solve_case_two(l3) {
            CaseTwo::Branch(b) => {
                t.residual(b.max_residual());
                t.flag(b.b1sq > 0.0 && b.b1sq < 1.0 && b.b2sq > 0.0 && b.b2sq < 1.0);
            }
            CaseTwo::Empty(_) => t.flag(false),
        }
    }
    for l3 in [0.55, 0.56, 0.57, -0.55] {
        t.flag(matches!(
            classifier::solve_case_two(l3),
            CaseTwo::Empty(classifier::EmptyReason::EllipseExclusion)
        ));
    }
    for l3 in [0.5, 1.0 / 3.0_f64.sqrt()] {
        t.flag(matches!(
            classifier::solve_case_two(l3),
            CaseTwo::Empty(classifier::EmptyReason::CoincidentEigenvalues)
        ));
    }
    for l3 in [-0.4, -0.1, 0.0, 0.25, 0.55] {
        let rep = classifier::newton_validation(l3, 20, seed);
        t.flag(rep.anomalies.is_empty());
    }
    Ok(t)
}

fn structural(_seed: u64) -> Result<Tally> {
    let mut t = Tally::default();
    for n in [3, 4] {
        let alg = SolvableAlgebra::new(n)?;
        let w = solvable::build_ruled(&alg, &RuledSpec::canonical(n, 1)?)?;
        let rep = catalog::structural_residuals(&w, &alg.v(1))?;
        t.residual(rep.max_connection_residual());
        t.residual(rep.b_identity);
        for s in [-1.0, -0.4, 0.6, 1.5] {
            let orbit = solvable::equidistant_orbit(&alg, s);
            let xi = orbit.normal()[0].clone();
            let rep = catalog::structural_residuals(&orbit, &xi)?;
            t.residual(rep.max_connection_residual());
            t.residual(rep.b_identity);
        }
    }
    Ok(t)
}

fn catalog_suite(_seed: u64) -> Result<Tally> {
    let mut t = Tally::default();
    let special = catalog::special_radius();
    t.flag(catalog::tube_spectrum(TubeBase::Ruled(2), 3, 1.0)?.g() == 4);
    t.flag(catalog::tube_spectrum(TubeBase::Ruled(2), 3, special)?.g() == 3);
    for r in [0.5, 1.0, special, 2.0] {
        let g = catalog::tube_spectrum(TubeBase::RealHyperbolic, 3, r)?.g();
        t.flag(g == if r == special { 2 } else { 3 });
        t.flag(catalog::tube_spectrum(TubeBase::Point, 3, r)?.g() == 2);
    }
    t.flag(catalog::horosphere_shape(3, 1.0)?.profile().g() == 2);
    for n in [3, 4] {
        for e in catalog::catalog_three(n, 1.0)? {
            t.flag(e.g() == 3);
            let non_hopf = matches!(
                e.family,
                Family::RuledW | Family::EquidistantW | Family::TubeWk
            );
            t.flag(e.hopf != non_hopf);
        }
        for e in catalog::catalog_two(n, 1.0)? {
            t.flag(e.g() == 2);
        }
    }
    for r in [-2.0, -1.0, -0.5, 0.5, 1.0, 2.0] {
        let shape = catalog::equidistant_shape(3, r)?;
        t.residual(((r / 2.0).tanh() / 2.0 - third_curvature(&shape)?).abs());
    }
    Ok(t)
}

fn third_curvature(shape: &jacobi::HypersurfaceShape) -> Result<f64> {
    let m = CurvatureModel::new(shape.normal.len() / 2)?;
    Ok(NonHopfLabels::from_shape(shape, &m)?.lambda[2])
}

fn cross_consistency(_seed: u64) -> Result<Tally> {
    let mut t = Tally::default();
    let m = CurvatureModel::new(3)?;
    for r in [-2.0, -1.0, -0.5, 0.5, 1.0, 2.0] {
        let labels = NonHopfLabels::from_shape(&catalog::equidistant_shape(3, r)?, &m)?;
        let Some(b) = classifier::solve_case_two((r / 2.0).tanh() / 2.0).branch().cloned() else {
            t.flag(false);
            continue;
        };
        let got = [labels.lambda[0], labels.lambda[1], labels.lambda[2], labels.b[0].powi(2), labels.b[1].powi(2)];
        let want = [b.lambda1, b.lambda2, b.lambda3, b.b1sq, b.b2sq];
        for (g, w) in got.iter().zip(&want) {
            t.residual((g - w).abs());
        }
    }
    t.residual(((catalog::special_radius() / 2.0).tanh() - 1.0 / 3.0_f64.sqrt()).abs());
    Ok(t)
}
