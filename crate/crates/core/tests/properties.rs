use approx::assert_abs_diff_eq;
use nalgebra::DVector;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};

use chgeo::catalog::{self, CatalogEntry, Family};
use chgeo::classifier::{self, CaseTwo, SolutionBranch};
use chgeo::curvature::CurvatureModel;
use chgeo::jacobi::{self, JacobiSolution};
use chgeo::solvable::{self, AlgebraDocument, RuledSpec, SolvableAlgebra};

type V = DVector<f64>;

fn config(cases: u32) -> Config {
    Config {
        cases,
        rng_seed: RngSeed::Fixed(20070101),
        failure_persistence: None,
        ..Config::default()
    }
}

fn vec_of(d: usize) -> impl Strategy<Value = V> {
    prop::collection::vec(-1.0..1.0_f64, d).prop_map(V::from_vec)
}

fn quad(n: usize) -> impl Strategy<Value = (V, V, V, V)> {
    let d = 2 * n;
    (vec_of(d), vec_of(d), vec_of(d), vec_of(d))
}

fn dim_and_quad() -> impl Strategy<Value = (usize, (V, V, V, V))> {
    (2usize..=4).prop_flat_map(|n| (Just(n), quad(n)))
}

proptest! {
    #![proptest_config(config(100))]

    #[test]
    fn curvature_symmetries((n, (x, y, z, w)) in dim_and_quad()) {
        let m = CurvatureModel::new(n).unwrap();
        let pair = m.curvature_form(&x, &y, &z, &w).unwrap() - m.curvature_form(&z, &w, &x, &y).unwrap();
        prop_assert!(pair.abs() <= 1e-12);
        let bianchi = m.curvature(&x, &y, &z).unwrap() + m.curvature(&y, &z, &x).unwrap() + m.curvature(&z, &x, &y).unwrap();
        prop_assert!(bianchi.amax() <= 1e-12);
        let jinv = m.curvature(&m.j(&x), &m.j(&y), &z).unwrap() - m.curvature(&x, &y, &z).unwrap();
        prop_assert!(jinv.amax() <= 1e-12);
    }

    #[test]
    fn levi_civita_is_metric_and_torsion_free((n, (x, y, w, _)) in dim_and_quad()) {
        let alg = SolvableAlgebra::new(n).unwrap();
        let nabla = |a: &V, b: &V| alg.levi_civita(a, b).unwrap();
        prop_assert!((nabla(&x, &y).dot(&w) + y.dot(&nabla(&x, &w))).abs() <= 1e-14);
        prop_assert!((nabla(&x, &y) - nabla(&y, &x) - alg.bracket(&x, &y)).amax() <= 1e-14);
    }

    #[test]
    fn cross_model_curvature((n, (x, y, z, _)) in dim_and_quad()) {
        let alg = SolvableAlgebra::new(n).unwrap();
        let diff = alg.algebra_curvature(&x, &y, &z).unwrap() - alg.curvature_model().curvature(&x, &y, &z).unwrap();
        prop_assert!(diff.amax() <= 1e-10);
    }
}

proptest! {
    #![proptest_config(config(1000))]

    #[test]
    fn sectional_curvature_is_pinched((n, (x, y, _, _)) in dim_and_quad()) {
        let m = CurvatureModel::new(n).unwrap();
        if let Ok(k) = m.sectional_curvature(&x, &y) {
            prop_assert!((-1.0 - 1e-12..=-0.25 + 1e-12).contains(&k), "K = {k}");
        }
    }
}

/// Orthonormal and totally real: Gram-Schmidt against the vectors and their
/// `J`-images.
fn totally_real(m: &CurvatureModel, raw: &[V]) -> Vec<V> {
    let mut out: Vec<V> = Vec::new();
    for v in raw {
        let mut u = v.clone();
        u[0] = 0.0;
        u[1] = 0.0;
        for b in &out {
            let jb = m.j(b);
            u -= b * b.dot(&u) + &jb * jb.dot(&u);
        }
        out.push(u.normalize());
    }
    out
}

fn ruled_case() -> impl Strategy<Value = (usize, usize, Vec<V>, V)> {
    (3usize..=5)
        .prop_flat_map(|n| (Just(n), 1..n))
        .prop_flat_map(|(n, k)| {
            (
                Just(n),
                Just(k),
                prop::collection::vec(vec_of(2 * n), k),
                prop::collection::vec(-1.0..1.0_f64, k).prop_map(V::from_vec),
            )
        })
        .prop_filter("nondegenerate", |(_, _, raw, c)| {
            c.norm() > 0.1 && raw.iter().all(|v| v.rows(2, v.len() - 2).norm() > 0.3)
        })
}

proptest! {
    #![proptest_config(config(60))]

    #[test]
    fn ruled_second_fundamental_form((n, k, raw, coeffs) in ruled_case()) {
        let alg = SolvableAlgebra::new(n).unwrap();
        let m = alg.curvature_model();
        let w_perp = totally_real(&m, &raw);
        prop_assume!(w_perp.iter().all(|v| v.iter().all(|x| x.is_finite())));
        let spec = match RuledSpec::new(n, w_perp.clone()) {
            Ok(s) => s,
            Err(_) => return Err(TestCaseError::reject("near-degenerate span")),
        };
        prop_assert_eq!(spec.k(), k);
        let orbit = solvable::build_ruled(&alg, &spec).unwrap();
        let xi = spec.w_perp().iter().zip(coeffs.iter()).fold(V::zeros(2 * n), |acc, (b, c)| acc + b * *c).normalize();
        let z = alg.basis(solvable::Z);
        let ixi = m.j(&xi);
        prop_assert!((orbit.second_fundamental_form(&z, &ixi) * 2.0 - &xi).norm() <= 1e-12);
        // vanishing on w_C x s and on (a + i w_perp) x (a + i w_perp) apart from (Z, i w_perp)
        let a = alg.basis(solvable::A);
        for wc in spec.w_complex() {
            for s in orbit.tangent() {
                prop_assert!(orbit.second_fundamental_form(&wc, s).norm() <= 1e-12);
            }
        }
        let iw = spec.i_w_perp();
        for x in iw.iter().chain(std::iter::once(&a)) {
            for y in iw.iter().chain(std::iter::once(&a)) {
                prop_assert!(orbit.second_fundamental_form(x, y).norm() <= 1e-12);
            }
        }
        let pcs = orbit.principal_curvatures(&xi);
        let mut expect = vec![0.0; 2 * n - k - 2];
        expect.extend([-0.5, 0.5]);
        expect.sort_by(f64::total_cmp);
        prop_assert_eq!(pcs.len(), expect.len());
        for (p, e) in pcs.iter().zip(&expect) {
            prop_assert!((p - e).abs() <= 1e-12);
        }
    }
}

fn jacobi_case() -> impl Strategy<Value = (usize, V, V, f64, f64)> {
    (2usize..=4)
        .prop_flat_map(|n| (Just(n), vec_of(2 * n), vec_of(2 * n), -1.0..1.0_f64, 0.0..3.0_f64))
        .prop_filter("nonzero", |(_, xi, v, _, _)| xi.norm() > 0.1 && v.norm() > 0.1)
}

proptest! {
    #![proptest_config(config(200))]

    // Central differences at h = 1e-4 carry a round-off error of about
    // 16 eps |zeta| / h^2, so the bound is taken relative to |zeta|.
    #[test]
    fn closed_form_solves_the_jacobi_equation((n, xi, v, lambda, t) in jacobi_case()) {
        let m = CurvatureModel::new(n).unwrap();
        let xi = xi.normalize();
        let jxi = m.j(&xi);
        let v = (&v - &xi * xi.dot(&v)).normalize();
        let at = |s: f64| JacobiSolution::closed_form(lambda, &v, &jxi, s).value;
        let h = 1e-4;
        let z = at(t);
        let second = (at(t + h) - &z * 2.0 + at(t - h)) / (h * h);
        let res = second * 4.0 - &z - &jxi * (3.0 * z.dot(&jxi));
        prop_assert!(res.amax() <= 1e-6 * z.amax().max(1.0), "residual {:e}, |zeta| {}", res.amax(), z.amax());
    }

    #[test]
    fn closed_form_matches_integrator((n, xi, v, lambda, t) in jacobi_case()) {
        let m = CurvatureModel::new(n).unwrap();
        let xi = xi.normalize();
        let jxi = m.j(&xi);
        let v = (&v - &xi * xi.dot(&v)).normalize();
        let exact = JacobiSolution::closed_form(lambda, &v, &jxi, t);
        let (z, dz) = jacobi::jacobi_numeric(&v, &(-&v * lambda), &jxi, t, 1e-3).unwrap();
        prop_assert!((z - exact.value).amax() <= 1e-8);
        prop_assert!((dz - exact.derivative).amax() <= 1e-8);
    }
}

fn spec_grid() -> Vec<f64> {
    (1..=9).flat_map(|i| [0.05 * i as f64, -0.05 * i as f64]).collect()
}

fn case_two_focal(l3: f64, r: f64) -> jacobi::FocalMapData {
    let b = classifier::solve_case_two(l3).branch().cloned().unwrap();
    jacobi::transversal_map(&b.to_non_hopf(3, 1).unwrap(), r).unwrap()
}

#[test]
fn det_d_is_sech_cubed_on_grid() {
    for l3 in spec_grid() {
        let r = 2.0 * (2.0 * l3).atanh();
        let d = case_two_focal(l3, r).d.determinant();
        assert_abs_diff_eq!(d, (r / 2.0).cosh().powi(-3), epsilon = 1e-10);
    }
}

#[test]
fn det_d_is_stationary_at_the_equidistant_radius() {
    // for the fixed hypersurface, tr C = -(det D)'/det D vanishes at
    // 2 lambda3 = tanh(r/2)
    for l3 in spec_grid() {
        let r = 2.0 * (2.0 * l3).atanh();
        let h = 1e-5;
        let plus = case_two_focal(l3, r + h).d.determinant();
        let minus = case_two_focal(l3, r - h).d.determinant();
        let fd = (plus - minus) / (2.0 * h);
        assert!(fd.abs() <= 1e-6, "lambda3 {l3}: (det D)' = {fd}");
        let c = case_two_focal(l3, r).c_matrix().unwrap();
        assert!(c.trace().abs() <= 1e-10);
    }
}

#[test]
fn case_one_focal_collapse() {
    let branch = classifier::solve_case_one();
    let r = catalog::special_radius();
    for (n, m1) in [(3, 2), (4, 3), (5, 2)] {
        let focal = jacobi::transversal_map(&branch.to_non_hopf(n, m1).unwrap(), r).unwrap();
        for w in focal.source.w1() {
            assert!(focal.push_forward(&w).norm() <= 1e-12);
        }
        let small = focal.singular_values.iter().filter(|s| **s <= 1e-12).count();
        assert_eq!(small, m1 - 1);
        assert!(focal.singular_values.iter().all(|s| *s <= 1e-12 || *s >= 0.1));
    }
    let t = (catalog::special_radius() / 2.0).tanh();
    assert_abs_diff_eq!(t, 1.0 / 3.0_f64.sqrt(), epsilon = 1e-14);
    assert_abs_diff_eq!(t, 2.0 * branch.lambda3, epsilon = 1e-14);
}

#[test]
fn hopf_flags_by_family() {
    for n in [3, 4] {
        for e in catalog::catalog_three(n, 1.0).unwrap() {
            let shape = match e.family {
                Family::TubeCHk => catalog::tube_shape(catalog::TubeBase::ComplexHyperbolic(e.k.unwrap()), n, 1.0),
                Family::TubeRHn => catalog::tube_shape(catalog::TubeBase::RealHyperbolic, n, 1.0),
                Family::RuledW => catalog::equidistant_shape(n, 0.0),
                Family::EquidistantW => catalog::equidistant_shape(n, 1.0),
                Family::TubeWk => catalog::tube_shape(catalog::TubeBase::Ruled(e.k.unwrap()), n, catalog::special_radius()),
                _ => unreachable!(),
            }
            .unwrap();
            let res = shape.hopf_residual();
            match e.family {
                Family::TubeCHk | Family::TubeRHn => assert!(res <= 1e-12, "{}: {res}", e.family),
                _ => assert!(res >= 0.01, "{}: {res}", e.family),
            }
            assert_eq!(e.hopf, matches!(e.family, Family::TubeCHk | Family::TubeRHn));
        }
    }
}

#[test]
fn non_hopf_families_have_a_simple_curvature_on_j_nu() {
    for n in [3, 4, 5] {
        let m = CurvatureModel::new(n).unwrap();
        for e in catalog::catalog_three(n, 0.7).unwrap() {
            if e.hopf {
                continue;
            }
            let shape = match e.family {
                Family::RuledW => catalog::equidistant_shape(n, 0.0),
                Family::EquidistantW => catalog::equidistant_shape(n, 0.7),
                _ => catalog::tube_shape(catalog::TubeBase::Ruled(e.k.unwrap()), n, catalog::special_radius()),
            }
            .unwrap();
            let labels = catalog::NonHopfLabels::from_shape(&shape, &m).unwrap();
            assert_eq!(labels.mult[1], 1, "{} n={n}", e.family);
            assert_eq!(labels.mult.iter().sum::<usize>(), 2 * n - 1);
        }
    }
}

#[test]
fn two_curvature_list_has_four_families() {
    for n in [2, 3, 4] {
        let two = catalog::catalog_two(n, 0.8).unwrap();
        assert_eq!(two.len(), 4);
        assert!(two.iter().all(|e| e.g() == 2));
    }
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn equidistants_match_classifier(n in 3usize..=5, r in -3.0..3.0_f64) {
        prop_assume!(r.abs() > 0.05);
        let profile = catalog::equidistant_profile(n, r).unwrap();
        let l3 = (r / 2.0).tanh() / 2.0;
        let b = classifier::solve_case_two(l3).branch().cloned().unwrap();
        let mut want = vec![(b.lambda1, 1), (b.lambda2, 1), (b.lambda3, 2 * n - 3)];
        want.sort_by(|a, b| a.0.total_cmp(&b.0));
        prop_assert_eq!(profile.entries.len(), 3);
        for ((l, m), (wl, wm)) in profile.entries.iter().zip(&want) {
            prop_assert!((l - wl).abs() <= 1e-10);
            prop_assert_eq!(m, wm);
        }
    }

    #[test]
    fn case_two_residuals(l3 in -0.499..0.499_f64) {
        prop_assume!(l3.abs() > 1e-3);
        let CaseTwo::Branch(b) = classifier::solve_case_two(l3) else {
            return Err(TestCaseError::fail("empty branch inside the window"));
        };
        prop_assert!(b.max_residual() <= 1e-10);
        prop_assert!(classifier::residual_hyperbola(b.lambda1, b.lambda2, l3) <= 1e-10);
        prop_assert!(classifier::residual_circle(b.lambda1, b.lambda2, l3) <= 1e-10);
        prop_assert!((b.b1sq + b.b2sq - 1.0).abs() <= 1e-12);
        prop_assert!(b.b1sq > 0.0 && b.b2sq > 0.0);
    }

    #[test]
    fn exclusion_window_is_empty(l3 in 0.5001..0.5773_f64, sign in prop::bool::ANY) {
        let l3 = if sign { l3 } else { -l3 };
        prop_assert!(classifier::solve_case_two(l3).branch().is_none());
    }
}

#[test]
fn documents_round_trip() {
    for n in [2, 3, 4] {
        let alg = SolvableAlgebra::new(n).unwrap();
        let json = serde_json::to_string(&alg.to_document()).unwrap();
        let doc: AlgebraDocument = serde_json::from_str(&json).unwrap();
        let back = SolvableAlgebra::from_document(&doc).unwrap();
        assert_eq!(back.to_document(), alg.to_document());
        for k in 1..n {
            let spec = RuledSpec::canonical(n, k).unwrap();
            let json = serde_json::to_string(&spec.to_document()).unwrap();
            let back = RuledSpec::from_document(&serde_json::from_str(&json).unwrap()).unwrap();
            assert_eq!(back.to_document(), spec.to_document());
        }
    }
    let entries = catalog::catalog_three(3, 1.0).unwrap();
    let json = serde_json::to_string(&entries).unwrap();
    let back: Vec<CatalogEntry> = serde_json::from_str(&json).unwrap();
    assert_eq!(back, entries);
    let b = classifier::solve_case_one();
    let back: SolutionBranch = serde_json::from_str(&serde_json::to_string(&b).unwrap()).unwrap();
    assert_eq!(back, b);
}
