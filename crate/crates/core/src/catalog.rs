//! Hypersurfaces of `CH^n` with two or three distinct constant principal
//! curvatures, with every spectrum recomputed through the tube engine.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::curvature::CurvatureModel;
use crate::error::{GeoError, Result};
use crate::jacobi::{HypersurfaceShape, SubmanifoldPoint};
use crate::profile::PrincipalProfile;
use crate::solvable::{self, OrbitModel, RuledSpec, SolvableAlgebra, A};
use crate::symbolic;
use crate::Vector;

/// `ln(2 + sqrt 3)`, the radius at which two principal curvatures of the
/// tubes around `RH^n` and `W^{2n-k}` coincide.
pub fn special_radius() -> f64 {
    (2.0 + 3.0_f64.sqrt()).ln()
}

/// Below this `|S J nu - <S J nu, J nu> J nu|` the hypersurface is Hopf.
pub const HOPF_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Horosphere,
    GeodesicSphere,
    #[serde(rename = "tube-CHk")]
    TubeCHk,
    #[serde(rename = "tube-RHn")]
    TubeRHn,
    #[serde(rename = "ruled-W")]
    RuledW,
    #[serde(rename = "equidistant-W")]
    EquidistantW,
    #[serde(rename = "tube-Wk")]
    TubeWk,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::Horosphere => "horosphere",
            Family::GeodesicSphere => "geodesic-sphere",
            Family::TubeCHk => "tube-CHk",
            Family::TubeRHn => "tube-RHn",
            Family::RuledW => "ruled-W",
            Family::EquidistantW => "equidistant-W",
            Family::TubeWk => "tube-Wk",
        };
        f.write_str(s)
    }
}

/// Base submanifold of a tube.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TubeBase {
    /// Geodesic spheres.
    Point,
    /// Totally geodesic `CH^k`, `1 <= k <= n - 1`.
    ComplexHyperbolic(usize),
    /// Totally geodesic `RH^n`.
    RealHyperbolic,
    /// Ruled minimal `W^{2n-k}`, `2 <= k <= n - 1`.
    Ruled(usize),
}

fn base_point(base: TubeBase, n: usize) -> Result<SubmanifoldPoint> {
    let alg = SolvableAlgebra::new(n)?;
    let (orbit, xi) = match base {
        TubeBase::Point => (solvable::complex_hyperbolic(&alg, 0)?, alg.basis(A)),
        TubeBase::ComplexHyperbolic(k) => {
            if k == 0 || k >= n {
                return Err(GeoError::InvalidInput(format!(
                    "tube around CH^k needs 1 <= k <= {}, got {k}",
                    n - 1
                )));
            }
            let orbit = solvable::complex_hyperbolic(&alg, k)?;
            let xi = orbit.normal()[0].clone();
            (orbit, xi)
        }
        TubeBase::RealHyperbolic => {
            let orbit = solvable::real_hyperbolic(&alg);
            let xi = orbit.normal()[0].clone();
            (orbit, xi)
        }
        TubeBase::Ruled(k) => {
            if k < 2 || k >= n {
                return Err(GeoError::InvalidInput(format!(
                    "tube around W^(2n-k) needs 2 <= k <= {}, got {k}",
                    n.saturating_sub(1)
                )));
            }
            let spec = RuledSpec::canonical(n, k)?;
            let orbit = solvable::build_ruled(&alg, &spec)?;
            (orbit, alg.v(1))
        }
    };
    orbit.point(&xi)
}

/// Shape operator of the tube of radius `r` around `base`.
pub fn tube_shape(base: TubeBase, n: usize, r: f64) -> Result<HypersurfaceShape> {
    base_point(base, n)?.tube(r)
}

pub fn tube_spectrum(base: TubeBase, n: usize, r: f64) -> Result<PrincipalProfile> {
    Ok(tube_shape(base, n, r)?.profile())
}

/// Horosphere shape, obtained by moving the orbit of `z + v` a signed
/// distance `r` along its normal; horospheres are carried to horospheres.
pub fn horosphere_shape(n: usize, r: f64) -> Result<HypersurfaceShape> {
    let alg = SolvableAlgebra::new(n)?;
    solvable::horosphere(&alg).point(&alg.basis(A))?.equidistant(r)
}

/// Equidistant hypersurface at signed distance `r` from `W^{2n-1}`, computed
/// by propagating the second fundamental form of `W^{2n-1}` along its normal.
pub fn equidistant_shape(n: usize, r: f64) -> Result<HypersurfaceShape> {
    let alg = SolvableAlgebra::new(n)?;
    let spec = RuledSpec::canonical(n, 1)?;
    solvable::build_ruled(&alg, &spec)?.point(&alg.v(1))?.equidistant(r)
}

pub fn equidistant_profile(n: usize, r: f64) -> Result<PrincipalProfile> {
    Ok(equidistant_shape(n, r)?.profile())
}

/// Principal data of a non-Hopf hypersurface with three principal
/// curvatures where `J nu` meets exactly two principal spaces.
///
/// Labels: `lambda[2]` is the curvature whose space is orthogonal to
/// `J nu`; of the other two, `lambda[1]` is the one of multiplicity one
/// (the larger value if both are simple).
#[derive(Debug, Clone)]
pub struct NonHopfLabels {
    pub lambda: [f64; 3],
    pub mult: [usize; 3],
    pub b: [f64; 2],
    /// Unit projections `U_1, U_2` of `J nu`.
    pub u: [Vector; 2],
    /// `A = -J(b_2 U_1 - b_1 U_2)`.
    pub a: Vector,
}

impl NonHopfLabels {
    pub fn from_shape(shape: &HypersurfaceShape, model: &CurvatureModel) -> Result<Self> {
        let spaces = shape.eigenspaces();
        if spaces.len() != 3 {
            return Err(GeoError::Unsupported(format!(
                "expected three principal curvatures, found {}",
                spaces.len()
            )));
        }
        let jn = model.j(&shape.normal);
        let proj: Vec<Vector> = spaces
            .iter()
            .map(|(_, basis)| basis.iter().fold(Vector::zeros(jn.len()), |acc, e| acc + e * e.dot(&jn)))
            .collect();
        let touching: Vec<usize> = (0..3).filter(|&i| proj[i].norm() > HOPF_TOL).collect();
        if touching.len() != 2 {
            return Err(GeoError::Unsupported(format!(
                "the Hopf vector meets {} principal spaces, need exactly two",
                touching.len()
            )));
        }
        let third = (0..3).find(|i| !touching.contains(i)).expect("three spaces");
        let (p, q) = (touching[0], touching[1]);
        let simple = |i: usize| spaces[i].1.len() == 1;
        let (i1, i2) = if simple(q) { (p, q) } else if simple(p) { (q, p) } else { (p, q) };
        let b = [proj[i1].norm(), proj[i2].norm()];
        let u = [&proj[i1] / b[0], &proj[i2] / b[1]];
        let a = -model.j(&(&u[0] * b[1] - &u[1] * b[0]));
        Ok(Self {
            lambda: [spaces[i1].0, spaces[i2].0, spaces[third].0],
            mult: [spaces[i1].1.len(), spaces[i2].1.len(), spaces[third].1.len()],
            b,
            u,
            a,
        })
    }
}

/// Absolute residuals of the connection identities for the non-Hopf frame
/// `U_1, U_2, A` of a homogeneous hypersurface.
#[derive(Debug, Clone, Serialize)]
pub struct StructuralReport {
    pub lambda: [f64; 3],
    pub b: [f64; 2],
    /// `nabla_{U_i} U_i`.
    pub nabla_ui_ui: f64,
    /// `nabla_{U_i} U_j`.
    pub nabla_ui_uj: f64,
    /// `nabla_{U_i} A`.
    pub nabla_ui_a: f64,
    /// `nabla_A U_i`.
    pub nabla_a_ui: f64,
    /// `|nabla_A A|`.
    pub nabla_a_a: f64,
    /// Scalar identity relating `b_1, b_2` to the principal curvatures.
    pub b_identity: f64,
    /// `|A - (unit) e_A|`: the frame vector `A` lies in `T_{lambda_3}`.
    pub a_in_t3: f64,
}

impl StructuralReport {
    pub fn max_connection_residual(&self) -> f64 {
        [
            self.nabla_ui_ui,
            self.nabla_ui_uj,
            self.nabla_ui_a,
            self.nabla_a_ui,
            self.nabla_a_a,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Checks the identities for `nabla_{U_i} U_i`, `nabla_{U_i} U_j`,
/// `nabla_{U_i} A`, `nabla_A U_i` and `nabla_A A` on a homogeneous orbit
/// hypersurface with unit normal `xi`, using the left-invariant frame.
pub fn structural_residuals(orbit: &OrbitModel, xi: &Vector) -> Result<StructuralReport> {
    let data = orbit.hypersurface_data(xi)?;
    let model = orbit.algebra().curvature_model();
    let shape = HypersurfaceShape::new(model, data.normal.clone(), data.shape.clone());
    if shape.hopf_residual() <= HOPF_TOL {
        return Err(GeoError::Unsupported(
            "Hopf hypersurface: no non-Hopf frame U_1, U_2, A".into(),
        ));
    }
    let labels = NonHopfLabels::from_shape(&shape, &model)?;
    let [l1, l2, l3] = labels.lambda;
    let [b1, b2] = labels.b;
    let lam = [l1, l2];
    let bs = [b1, b2];
    let a = &labels.a;
    let nabla = |x: &Vector, y: &Vector| orbit.induced_connection(x, y);
    let sign = |i: usize| if i == 0 { -1.0 } else { 1.0 };
    let (mut r5, mut r6, mut r7, mut r8) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    for i in 0..2 {
        let j = 1 - i;
        let (ui, uj) = (&labels.u[i], &labels.u[j]);
        let mixed = 3.0 * b1 * b2 / (4.0 * (l3 - lam[i]));
        let coef = lam[i] + 3.0 * bs[i] * bs[i] / (4.0 * (l3 - lam[i]));
        r5 = r5.max((nabla(ui, ui) - a * (sign(i) * mixed)).norm());
        r6 = r6.max((nabla(ui, uj) - a * (sign(j) * coef)).norm());
        r7 = r7.max((nabla(ui, a) - ui * (sign(j) * mixed) - uj * (sign(i) * coef)).norm());
        let rhs8 = sign(j) / (lam[i] - lam[j])
            * ((bs[i] * bs[i] - 2.0 * bs[j] * bs[j]) / 4.0 + (lam[j] - l3) * coef);
        r8 = r8.max((nabla(a, ui) - uj * rhs8).norm());
    }
    let sa = &data.shape * a;
    Ok(StructuralReport {
        lambda: labels.lambda,
        b: labels.b,
        nabla_ui_ui: r5,
        nabla_ui_uj: r6,
        nabla_ui_a: r7,
        nabla_a_ui: r8,
        nabla_a_a: nabla(a, a).norm(),
        b_identity: crate::classifier::residual_corollary49(l1, l2, l3, b1 * b1, b2 * b2)?.abs(),
        a_in_t3: (sa - a * l3).norm(),
    })
}

/// One hypersurface of the catalog with its recomputed invariants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub family: Family,
    pub n: usize,
    pub k: Option<usize>,
    pub r: Option<f64>,
    /// `[[lambda, multiplicity], ...]` ascending.
    pub profile: Vec<(f64, usize)>,
    pub hopf: bool,
    /// Hopf projections `(b_1, b_2)` in the labelling of [`NonHopfLabels`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub symbolic: BTreeMap<String, String>,
}

impl CatalogEntry {
    fn from_shape(
        family: Family,
        n: usize,
        k: Option<usize>,
        r: Option<f64>,
        shape: &HypersurfaceShape,
    ) -> Result<Self> {
        let model = CurvatureModel::new(n)?;
        let profile = shape.profile();
        let hopf = shape.hopf_residual() <= HOPF_TOL;
        let b = if hopf {
            None
        } else {
            NonHopfLabels::from_shape(shape, &model).ok().map(|l| l.b)
        };
        let mut fields: Vec<(String, f64)> = Vec::new();
        if let Some(r) = r {
            fields.push(("r".into(), r));
        }
        for (i, (l, _)) in profile.entries.iter().enumerate() {
            fields.push((format!("profile[{i}]"), *l));
        }
        if let Some([b1, b2]) = b {
            fields.push(("b[0]".into(), b1));
            fields.push(("b[1]".into(), b2));
        }
        Ok(Self {
            family,
            n,
            k,
            r,
            profile: profile.entries,
            hopf,
            b,
            symbolic: symbolic::tags(fields),
        })
    }

    pub fn g(&self) -> usize {
        self.profile.len()
    }

    pub fn principal_profile(&self) -> PrincipalProfile {
        PrincipalProfile {
            entries: self.profile.clone(),
            hopf: self.b,
        }
    }
}

/// Builds one entry, recomputing its spectrum through the tube engine.
pub fn entry(family: Family, n: usize, k: Option<usize>, r: Option<f64>) -> Result<CatalogEntry> {
    let need_r = || r.ok_or_else(|| GeoError::InvalidInput(format!("{family} needs a radius")));
    let need_k = || k.ok_or_else(|| GeoError::InvalidInput(format!("{family} needs k")));
    let shape = match family {
        Family::Horosphere => horosphere_shape(n, r.unwrap_or(0.0))?,
        Family::GeodesicSphere => tube_shape(TubeBase::Point, n, need_r()?)?,
        Family::TubeCHk => tube_shape(TubeBase::ComplexHyperbolic(need_k()?), n, need_r()?)?,
        Family::TubeRHn => tube_shape(TubeBase::RealHyperbolic, n, need_r()?)?,
        Family::RuledW => equidistant_shape(n, 0.0)?,
        Family::EquidistantW => equidistant_shape(n, need_r()?)?,
        Family::TubeWk => tube_shape(TubeBase::Ruled(need_k()?), n, need_r()?)?,
    };
    let r = match family {
        Family::RuledW => Some(0.0),
        Family::Horosphere => None,
        _ => r,
    };
    CatalogEntry::from_shape(family, n, k, r, &shape)
}

/// Hypersurfaces with two distinct principal curvatures, `n >= 2`:
/// geodesic spheres and tubes around `CH^{n-1}` (radius `r`), horospheres,
/// and the tube of radius `ln(2 + sqrt 3)` around `RH^n`.
pub fn catalog_two(n: usize, r: f64) -> Result<Vec<CatalogEntry>> {
    check_n(n)?;
    Ok(vec![
        entry(Family::Horosphere, n, None, None)?,
        entry(Family::GeodesicSphere, n, None, Some(r))?,
        entry(Family::TubeCHk, n, Some(n - 1), Some(r))?,
        entry(Family::TubeRHn, n, None, Some(special_radius()))?,
    ])
}

/// Hypersurfaces with three distinct constant principal curvatures,
/// `n >= 3`, sampled at radius (or signed distance) `r`. Tubes around `RH^n`
/// at `r = ln(2 + sqrt 3)` belong to [`catalog_two`] and are left out.
pub fn catalog_three(n: usize, r: f64) -> Result<Vec<CatalogEntry>> {
    check_n(n)?;
    if n == 2 {
        return Err(GeoError::OpenCase { n });
    }
    let mut out = Vec::new();
    for k in 1..=n - 2 {
        out.push(entry(Family::TubeCHk, n, Some(k), Some(r))?);
    }
    if (r - special_radius()).abs() > 1e-9 {
        out.push(entry(Family::TubeRHn, n, None, Some(r))?);
    }
    out.push(entry(Family::RuledW, n, Some(1), None)?);
    out.push(entry(Family::EquidistantW, n, Some(1), Some(r))?);
    for k in 2..n {
        out.push(entry(Family::TubeWk, n, Some(k), Some(special_radius()))?);
    }
    Ok(out)
}

/// Full catalog for `n`: the two-curvature list, and the three-curvature
/// list when `n >= 3` (for `n = 2` the latter is an open problem and is
/// reported as [`GeoError::OpenCase`]).
pub struct Catalog {
    pub n: usize,
    pub two: Vec<CatalogEntry>,
    pub three: Result<Vec<CatalogEntry>>,
}

pub fn catalog(n: usize, r: f64) -> Result<Catalog> {
    Ok(Catalog {
        n,
        two: catalog_two(n, r)?,
        three: catalog_three(n, r),
    })
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(GeoError::InvalidInput(format!(
            "complex dimension must be at least 2, got {n}"
        )));
    }
    Ok(())
}
