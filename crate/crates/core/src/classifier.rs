//! Constraint system on `(lambda_1, lambda_2, lambda_3, b_1^2, b_2^2)` for
//! non-Hopf hypersurfaces with three constant principal curvatures, and its
//! solution branches.
//!
//! Branches come from closed forms and are then checked against the raw
//! equations; an independent damped Newton solve from random starts looks
//! for roots the closed forms miss.

use nalgebra::{Matrix4, Vector4};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};
use crate::jacobi::{HopfFrame, NonHopfData};
use crate::profile::MERGE_GAP;
use crate::rng;

const SQRT3: f64 = 1.732_050_807_568_877_2;

fn check_distinct(l1: f64, l2: f64, l3: f64) -> Result<()> {
    if (l1 - l2).abs() < MERGE_GAP || (l1 - l3).abs() < MERGE_GAP || (l2 - l3).abs() < MERGE_GAP {
        return Err(GeoError::CoincidentEigenvalues(format!("({l1}, {l2}, {l3})")));
    }
    Ok(())
}

fn corollary49(l1: f64, l2: f64, l3: f64, b1sq: f64, b2sq: f64) -> f64 {
    let (d1, d2) = (l3 - l1, l3 - l2);
    3.0 * (d2 * d2 * b1sq + d1 * d1 * b2sq) + d1 * d2 * (1.0 + 4.0 * l2 * d1 + 4.0 * l1 * d2)
}

/// `|3((l3-l2)^2 b1^2 + (l3-l1)^2 b2^2) + (l3-l1)(l3-l2)(1 + 4 l2 (l3-l1) + 4 l1 (l3-l2))|`.
pub fn residual_corollary49(l1: f64, l2: f64, l3: f64, b1sq: f64, b2sq: f64) -> Result<f64> {
    check_distinct(l1, l2, l3)?;
    Ok(corollary49(l1, l2, l3, b1sq, b2sq).abs())
}

fn linear_b(l1: f64, l2: f64, l3: f64, b1sq: f64, b2sq: f64) -> f64 {
    (l3 - l2) * b1sq + (l3 - l1) * b2sq + 4.0 * l3 * (l3 - l1) * (l3 - l2)
}

/// `|(l3-l2) b1^2 + (l3-l1) b2^2 + 4 l3 (l3-l1)(l3-l2)|`.
pub fn residual_linear_b(l1: f64, l2: f64, l3: f64, b1sq: f64, b2sq: f64) -> f64 {
    linear_b(l1, l2, l3, b1sq, b2sq).abs()
}

/// `b_i^2 = (l3 - li)/(lj - li) (1 + 4 l3 (l3 - lj))`.
pub fn b_squared(l1: f64, l2: f64, l3: f64) -> Result<(f64, f64)> {
    check_distinct(l1, l2, l3)?;
    let b1 = (l3 - l1) / (l2 - l1) * (1.0 + 4.0 * l3 * (l3 - l2));
    let b2 = (l3 - l2) / (l1 - l2) * (1.0 + 4.0 * l3 * (l3 - l1));
    Ok((b1, b2))
}

/// `|(l1-l2)^2 - (l1+l2-4 l3)^2 - (1 - 4 l3^2)|`.
pub fn residual_hyperbola(l1: f64, l2: f64, l3: f64) -> f64 {
    let (x, y) = (l1 - l2, l1 + l2 - 4.0 * l3);
    (x * x - y * y - (1.0 - 4.0 * l3 * l3)).abs()
}

fn circle_relation(l1: f64, l2: f64, l3: f64) -> f64 {
    l3 * (1.0 + 4.0 * l1 * l1 + 4.0 * l2 * l2) - (l1 + l2) * (1.0 + 4.0 * l3 * l3)
}

/// `|l3 (1 + 4 l1^2 + 4 l2^2) - (l1 + l2)(1 + 4 l3^2)|`, the circle
/// [`circle_xy`] written in the principal curvatures.
pub fn residual_circle(l1: f64, l2: f64, l3: f64) -> f64 {
    circle_relation(l1, l2, l3).abs()
}

/// Conic forms in `x = l1 - l2`, `y = l1 + l2 - 4 l3`:
/// `x^2 - y^2 = 1 - 4 l3^2`.
pub fn hyperbola_xy(x: f64, y: f64, l3: f64) -> f64 {
    (x * x - y * y - (1.0 - 4.0 * l3 * l3)).abs()
}

/// `x^2 + (y - (1 - 12 l3^2)/(4 l3))^2 = (1 + 16 l3^4)/(16 l3^2)`.
pub fn circle_xy(x: f64, y: f64, l3: f64) -> f64 {
    let c = (1.0 - 12.0 * l3 * l3) / (4.0 * l3);
    let rhs = (1.0 + 16.0 * l3.powi(4)) / (16.0 * l3 * l3);
    (x * x + (y - c).powi(2) - rhs).abs()
}

/// First quadratic of the `m_1 > 1` case.
pub fn q1(l2: f64, b2sq: f64) -> f64 {
    12.0 * (3.0 * b2sq - 1.0) * l2 * l2 + 4.0 * SQRT3 * (2.0 - 9.0 * b2sq) * l2 + 3.0 * (9.0 * b2sq - 1.0)
}

/// Second quadratic of the `m_1 > 1` case (the scalar identity at
/// `l1 = sqrt3/2`, `l3 = sqrt3/6`, `b1^2 = 1 - b2^2`).
pub fn q2(l2: f64, b2sq: f64) -> f64 {
    12.0 * (9.0 * b2sq + 1.0) * l2 * l2 - 4.0 * SQRT3 * (2.0 + 9.0 * b2sq) * l2 - 3.0 * (9.0 * b2sq - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CaseTag {
    I,
    Ii,
}

/// Multiplicity pattern of a branch, e.g. `("1", "1", "2n-3")`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mults {
    pub m1: String,
    pub m2: String,
    pub m3: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionBranch {
    pub case: CaseTag,
    pub lambda3: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub b1sq: f64,
    pub b2sq: f64,
    pub mults: Mults,
    pub window: String,
}

impl SolutionBranch {
    /// Largest of the residuals that apply to the branch.
    pub fn max_residual(&self) -> f64 {
        let (l1, l2, l3) = (self.lambda1, self.lambda2, self.lambda3);
        let mut worst = corollary49(l1, l2, l3, self.b1sq, self.b2sq)
            .abs()
            .max((self.b1sq + self.b2sq - 1.0).abs());
        if self.case == CaseTag::Ii {
            worst = worst
                .max(residual_linear_b(l1, l2, l3, self.b1sq, self.b2sq))
                .max(residual_hyperbola(l1, l2, l3))
                .max(residual_circle(l1, l2, l3));
        } else {
            worst = worst
                .max(q1(l2, self.b2sq).abs())
                .max(q2(l2, self.b2sq).abs())
                .max((4.0 * l1 * l3 - 1.0).abs())
                .max((2.0 * l1 * (l1 - l3) - 1.0).abs());
        }
        worst
    }

    /// Multiplicities `[m1, m2, m3]` in `CH^n`; `m1` is only free in case (i).
    pub fn multiplicities(&self, n: usize, m1: usize) -> Result<[usize; 3]> {
        if n < 3 {
            return Err(GeoError::OpenCase { n });
        }
        let m1 = match self.case {
            CaseTag::Ii => 1,
            CaseTag::I if m1 >= 2 && m1 < n => m1,
            CaseTag::I => {
                return Err(GeoError::InvalidInput(format!(
                    "case (i) needs 2 <= m1 <= {}, got {m1}",
                    n - 1
                )))
            }
        };
        Ok([m1, 1, 2 * n - 2 - m1])
    }

    /// Pointwise data for the Jacobi engine.
    pub fn to_non_hopf(&self, n: usize, m1: usize) -> Result<NonHopfData> {
        let [m1, _, _] = self.multiplicities(n, m1)?;
        NonHopfData::new(
            n,
            [self.lambda1, self.lambda2, self.lambda3],
            m1,
            HopfFrame::from_squares(self.b1sq, self.b2sq)?,
        )
    }
}

/// Why a value of `lambda3` admits no case-(ii) branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EmptyReason {
    /// `|lambda3| = 1/2` or `1/sqrt 3`.
    #[serde(rename = "coincident eigenvalues")]
    CoincidentEigenvalues,
    /// `1/2 < |lambda3| < 1/sqrt 3`: the `b`-constraint is an ellipse inside
    /// the unit circle.
    #[serde(rename = "ellipse exclusion")]
    EllipseExclusion,
    /// `|lambda3| > 1/sqrt 3`: the conics have no admissible common point.
    #[serde(rename = "no real intersection")]
    NoRealIntersection,
}

impl EmptyReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            EmptyReason::CoincidentEigenvalues => "coincident eigenvalues",
            EmptyReason::EllipseExclusion => "ellipse exclusion",
            EmptyReason::NoRealIntersection => "no real intersection",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CaseTwo {
    Branch(SolutionBranch),
    Empty(EmptyReason),
}

impl CaseTwo {
    pub fn branch(&self) -> Option<&SolutionBranch> {
        match self {
            CaseTwo::Branch(b) => Some(b),
            CaseTwo::Empty(_) => None,
        }
    }
}

/// Semi-axes `2 l3 (l3 -+ sqrt(1 - 3 l3^2))` of the ellipse in `(b1^2, b2^2)`.
pub fn ellipse_axes(l3: f64) -> Option<(f64, f64)> {
    let disc = 1.0 - 3.0 * l3 * l3;
    (disc >= 0.0).then(|| {
        let s = disc.sqrt();
        (2.0 * l3 * (l3 - s), 2.0 * l3 * (l3 + s))
    })
}

/// Case (ii) branch at `lambda3`.
pub fn solve_case_two(l3: f64) -> CaseTwo {
    let a = l3.abs();
    let edge = 1.0 / SQRT3;
    if (a - 0.5).abs() < MERGE_GAP || (a - edge).abs() < MERGE_GAP {
        return CaseTwo::Empty(EmptyReason::CoincidentEigenvalues);
    }
    if a > edge {
        return CaseTwo::Empty(EmptyReason::NoRealIntersection);
    }
    let s = (1.0 - 3.0 * l3 * l3).sqrt();
    let (l1, l2) = ((3.0 * l3 - s) / 2.0, (3.0 * l3 + s) / 2.0);
    let (b1sq, b2sq) = match b_squared(l1, l2, l3) {
        Ok(b) => b,
        Err(_) => return CaseTwo::Empty(EmptyReason::CoincidentEigenvalues),
    };
    if a > 0.5 || b1sq <= 0.0 || b2sq <= 0.0 {
        return CaseTwo::Empty(EmptyReason::EllipseExclusion);
    }
    CaseTwo::Branch(SolutionBranch {
        case: CaseTag::Ii,
        lambda3: l3,
        lambda1: l1,
        lambda2: l2,
        b1sq,
        b2sq,
        mults: Mults {
            m1: "1".into(),
            m2: "1".into(),
            m3: "2n-3".into(),
        },
        window: "-1/2 < lambda3 < 1/2".into(),
    })
}

/// A common point of the hyperbola and the circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConicPoint {
    pub x: f64,
    pub y: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    /// True when one of `lambda1, lambda2` equals `lambda3`.
    pub degenerate: bool,
}

impl ConicPoint {
    fn new(x: f64, y: f64, l3: f64) -> Self {
        let l1 = (x + y + 4.0 * l3) / 2.0;
        let l2 = (y + 4.0 * l3 - x) / 2.0;
        Self {
            x,
            y,
            lambda1: l1,
            lambda2: l2,
            degenerate: (l1 - l3).abs() < MERGE_GAP || (l2 - l3).abs() < MERGE_GAP,
        }
    }
}

/// All real common points of the two conics, degenerate ones flagged.
/// `lambda3 = 0` is handled by [`solve_case_two`] directly.
pub fn intersect_hyperbola_circle(l3: f64) -> Result<Vec<ConicPoint>> {
    if l3.abs() < 1e-12 {
        return Err(GeoError::InvalidInput(
            "lambda3 = 0 has no circle form; use the direct branch".into(),
        ));
    }
    let mut out = Vec::with_capacity(4);
    let disc = 1.0 - 3.0 * l3 * l3;
    if disc >= 0.0 {
        let s = disc.sqrt();
        out.push(ConicPoint::new(s, -l3, l3));
        if s > 0.0 {
            out.push(ConicPoint::new(-s, -l3, l3));
        }
    }
    let y = (1.0 - 8.0 * l3 * l3) / (4.0 * l3);
    out.push(ConicPoint::new(1.0 / (4.0 * l3), y, l3));
    out.push(ConicPoint::new(-1.0 / (4.0 * l3), y, l3));
    Ok(out)
}

/// Intermediate values of the `m_1 > 1` derivation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CaseOneDerivation {
    pub lambda1: f64,
    pub lambda3: f64,
    /// Roots of `Q1 + Q2 = 72 b2^2 lambda2 (2 lambda2 - sqrt3)`.
    pub lambda2_roots: [f64; 2],
    /// Root discarded because it coincides with `lambda1`.
    pub rejected: f64,
    pub lambda2: f64,
    pub b2sq: f64,
}

/// `4 l1 l3 = 1` and `2 l1 (l1 - l3) = 1` give `l1^2 = 3/4`; the positive
/// root is taken (the orientation of `xi` is free). Then `Q1 + Q2 = 0`
/// forces `l2 in {0, sqrt3/2}`, and `Q1 = 0` is linear in `b2^2`.
pub fn case_one_derivation() -> CaseOneDerivation {
    let l1 = (0.75_f64).sqrt();
    let l3 = 1.0 / (4.0 * l1);
    let roots = [0.0, SQRT3 / 2.0];
    let (kept, rejected): (Vec<f64>, Vec<f64>) = roots.iter().partition(|r| (*r - l1).abs() >= MERGE_GAP);
    let l2 = kept[0];
    let b2sq = (12.0 * l2 * l2 - 8.0 * SQRT3 * l2 + 3.0) / (36.0 * l2 * l2 - 36.0 * SQRT3 * l2 + 27.0);
    CaseOneDerivation {
        lambda1: l1,
        lambda3: l3,
        lambda2_roots: roots,
        rejected: rejected[0],
        lambda2: l2,
        b2sq,
    }
}

pub fn solve_case_one() -> SolutionBranch {
    let d = case_one_derivation();
    SolutionBranch {
        case: CaseTag::I,
        lambda3: d.lambda3,
        lambda1: d.lambda1,
        lambda2: d.lambda2,
        b1sq: 1.0 - d.b2sq,
        b2sq: d.b2sq,
        mults: Mults {
            m1: ">1".into(),
            m2: "1".into(),
            m3: "2n-2-m1".into(),
        },
        window: "isolated point".into(),
    }
}

/// Outcome of the randomized Newton search on the raw system.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NewtonReport {
    pub lambda3: f64,
    pub seeds: usize,
    pub converged: usize,
    /// Admissible roots matching the closed-form branch.
    pub matched: usize,
    /// Admissible roots `(l1, l2, b1^2, b2^2)` not explained by the closed form.
    pub anomalies: Vec<[f64; 4]>,
}

/// Newton roots whose curvatures are closer than this are counted as
/// degenerate: the equations are quadratic in the gaps, so a residual of
/// `1e-13` cannot resolve smaller separations.
pub const NEWTON_GAP: f64 = 1e-5;

fn raw_system(l3: f64, u: &Vector4<f64>) -> Vector4<f64> {
    let (l1, l2, p, q) = (u[0], u[1], u[2], u[3]);
    Vector4::new(
        corollary49(l1, l2, l3, p, q),
        linear_b(l1, l2, l3, p, q),
        p + q - 1.0,
        circle_relation(l1, l2, l3),
    )
}

fn jacobian(l3: f64, u: &Vector4<f64>) -> Matrix4<f64> {
    let h = 1e-7;
    let mut j = Matrix4::zeros();
    for c in 0..4 {
        let mut up = *u;
        let mut dn = *u;
        up[c] += h;
        dn[c] -= h;
        j.set_column(c, &((raw_system(l3, &up) - raw_system(l3, &dn)) / (2.0 * h)));
    }
    j
}

fn newton(l3: f64, start: Vector4<f64>) -> Option<Vector4<f64>> {
    let mut u = start;
    let mut f = raw_system(l3, &u);
    for _ in 0..200 {
        if f.norm() <= 1e-13 {
            return Some(u);
        }
        let step = jacobian(l3, &u).lu().solve(&-f)?;
        let mut t = 1.0;
        loop {
            let cand = u + step * t;
            let fc = raw_system(l3, &cand);
            if fc.norm() < f.norm() || t < 1e-6 {
                u = cand;
                f = fc;
                break;
            }
            t *= 0.5;
        }
        if !u.iter().all(|x| x.is_finite()) {
            return None;
        }
    }
    (f.norm() <= 1e-11).then_some(u)
}

/// Damped Newton on the raw equations at fixed `lambda3` from `seeds`
/// random starts. Roots are put in the order `lambda1 < lambda2`; roots with
/// coincident curvatures or `b_i^2` outside `(0, 1)` are inadmissible.
pub fn newton_validation(l3: f64, seeds: usize, seed: u64) -> NewtonReport {
    let mut rng = rng::seeded(seed);
    let expected = solve_case_two(l3);
    let mut report = NewtonReport {
        lambda3: l3,
        seeds,
        converged: 0,
        matched: 0,
        anomalies: Vec::new(),
    };
    for _ in 0..seeds {
        let p: f64 = rng.random_range(0.0..1.0);
        let start = Vector4::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), p, 1.0 - p);
        let Some(mut u) = newton(l3, start) else { continue };
        report.converged += 1;
        if u[0] > u[1] {
            u = Vector4::new(u[1], u[0], u[3], u[2]);
        }
        let (l1, l2, b1, b2) = (u[0], u[1], u[2], u[3]);
        let gap = (l1 - l2).abs().min((l1 - l3).abs()).min((l2 - l3).abs());
        let admissible = gap >= NEWTON_GAP
            && b1 > 1e-9
            && b2 > 1e-9
            && b1 < 1.0 - 1e-9
            && b2 < 1.0 - 1e-9;
        if !admissible {
            continue;
        }
        let matches = expected.branch().is_some_and(|br| {
            (br.lambda1 - l1).abs() <= 1e-8
                && (br.lambda2 - l2).abs() <= 1e-8
                && (br.b1sq - b1).abs() <= 1e-8
                && (br.b2sq - b2).abs() <= 1e-8
        });
        if matches {
            report.matched += 1;
        } else {
            report.anomalies.push([l1, l2, b1, b2]);
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepEmpty {
    pub lambda3: f64,
    pub reason: EmptyReason,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    /// Case (ii) branches in grid order, followed by the case (i) point.
    pub branches: Vec<SolutionBranch>,
    pub empty: Vec<SweepEmpty>,
    /// Largest `|d lambda1 / d lambda3|` between consecutive admissible
    /// grid points.
    pub max_slope: f64,
}

/// Runs [`solve_case_two`] over a grid and appends [`solve_case_one`].
pub fn sweep(grid: &[f64]) -> Result<SweepResult> {
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(GeoError::InvalidInput("grid values must be finite".into()));
    }
    let mut branches = Vec::new();
    let mut empty = Vec::new();
    for &l3 in grid {
        match solve_case_two(l3) {
            CaseTwo::Branch(b) => branches.push(b),
            CaseTwo::Empty(reason) => empty.push(SweepEmpty { lambda3: l3, reason }),
        }
    }
    let mut sorted: Vec<&SolutionBranch> = branches.iter().collect();
    sorted.sort_by(|a, b| a.lambda3.total_cmp(&b.lambda3));
    let max_slope = sorted
        .windows(2)
        .filter(|w| w[1].lambda3 - w[0].lambda3 > 1e-12)
        .map(|w| ((w[1].lambda1 - w[0].lambda1) / (w[1].lambda3 - w[0].lambda3)).abs())
        .fold(0.0, f64::max);
    branches.push(solve_case_one());
    Ok(SweepResult {
        branches,
        empty,
        max_slope,
    })
}
