//! Solvable group model `a + z + v` of complex hyperbolic space.
//!
//! Basis order: `A, Z, V_1, ..., V_{2n-2}` with `V_{2i} = i V_{2i-1}`. This is
//! the same J-adapted basis the curvature module uses, with `J A = Z`,
//! `J Z = -A` and `J = i` on `v`. Brackets:
//!
//! ```text
//! [A, Z] = Z,   [A, V] = V / 2,   [U, V] = <iU, V> Z   (U, V in v)
//! ```
//!
//! Everything is evaluated at the identity with left-invariant fields.

use serde::{Deserialize, Serialize};

use crate::curvature::{ConnectionSample, CurvatureModel, HypersurfacePointData};
use crate::error::{GeoError, Result};
use crate::jacobi::SubmanifoldPoint;
use crate::linalg::{self, orthonormalize};
use crate::{Matrix, Vector};

/// Index of the `a` generator.
pub const A: usize = 0;
/// Index of the `z` generator.
pub const Z: usize = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct SolvableAlgebra {
    n: usize,
    /// `structure[(i * d + j) * d + k]` is the `e_k` coefficient of `[e_i, e_j]`.
    structure: Vec<f64>,
    /// `nabla[i * d + j] = nabla_{e_i} e_j`.
    nabla: Vec<Vector>,
}

impl SolvableAlgebra {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(GeoError::InvalidInput(format!(
                "complex dimension must be at least 2, got {n}"
            )));
        }
        let d = 2 * n;
        let mut structure = vec![0.0; d * d * d];
        let mut set = |i: usize, j: usize, k: usize, c: f64| {
            structure[(i * d + j) * d + k] = c;
            structure[(j * d + i) * d + k] = -c;
        };
        set(A, Z, Z, 1.0);
        for v in 2..d {
            set(A, v, v, 0.5);
        }
        // <i V_{2m-1}, V_{2m}> = 1 in 1-based labels
        for m in 0..n - 1 {
            set(2 + 2 * m, 3 + 2 * m, Z, 1.0);
        }
        Self::from_structure(n, structure)
    }

    fn from_structure(n: usize, structure: Vec<f64>) -> Result<Self> {
        let d = 2 * n;
        GeoError::check_dim(d * d * d, structure.len())?;
        let mut alg = Self {
            n,
            structure,
            nabla: Vec::new(),
        };
        alg.nabla = (0..d * d)
            .map(|ij| {
                let (i, j) = (ij / d, ij % d);
                Vector::from_fn(d, |w, _| {
                    0.5 * (alg.c(i, j, w) - alg.c(j, w, i) + alg.c(w, i, j))
                })
            })
            .collect();
        Ok(alg)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    fn c(&self, i: usize, j: usize, k: usize) -> f64 {
        let d = self.dim();
        self.structure[(i * d + j) * d + k]
    }

    pub fn basis(&self, i: usize) -> Vector {
        Vector::from_fn(self.dim(), |r, _| if r == i { 1.0 } else { 0.0 })
    }

    /// Basis vector `V_m` with the 1-based label used in the literature.
    pub fn v(&self, m: usize) -> Vector {
        assert!((1..=2 * self.n - 2).contains(&m), "V index out of range");
        self.basis(m + 1)
    }

    pub fn labels(&self) -> Vec<String> {
        let mut out = vec!["A".to_string(), "Z".to_string()];
        out.extend((1..=2 * self.n - 2).map(|m| format!("V{m}")));
        out
    }

    /// Ambient curvature model under the basis identification.
    pub fn curvature_model(&self) -> CurvatureModel {
        CurvatureModel::new(self.n).expect("n >= 2 checked at construction")
    }

    /// Complex structure `i` on `v`, zero on `a + z`.
    pub fn complex_structure_v(&self, x: &Vector) -> Vector {
        let mut out = self.curvature_model().j(x);
        out[A] = 0.0;
        out[Z] = 0.0;
        out
    }

    /// Orthogonal projection onto `v`.
    pub fn v_part(&self, x: &Vector) -> Vector {
        let mut out = x.clone();
        out[A] = 0.0;
        out[Z] = 0.0;
        out
    }

    pub fn bracket(&self, x: &Vector, y: &Vector) -> Vector {
        let d = self.dim();
        let mut out = Vector::zeros(d);
        for i in 0..d {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..d {
                if y[j] == 0.0 {
                    continue;
                }
                for (k, o) in out.iter_mut().enumerate() {
                    *o += x[i] * y[j] * self.c(i, j, k);
                }
            }
        }
        out
    }

    /// Levi-Civita connection `nabla_X Y` of left-invariant fields, from the
    /// Koszul formula `2<nabla_X Y, W> = <[X,Y],W> - <[Y,W],X> + <[W,X],Y>`.
    pub fn levi_civita(&self, x: &Vector, y: &Vector) -> Result<Vector> {
        GeoError::check_dim(self.dim(), x.len())?;
        GeoError::check_dim(self.dim(), y.len())?;
        Ok(self.nabla(x, y))
    }

    pub(crate) fn nabla(&self, x: &Vector, y: &Vector) -> Vector {
        let d = self.dim();
        let mut out = Vector::zeros(d);
        for i in 0..d {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..d {
                if y[j] == 0.0 {
                    continue;
                }
                out += &self.nabla[i * d + j] * (x[i] * y[j]);
            }
        }
        out
    }

    /// `R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_{[X,Y]} Z`.
    pub fn algebra_curvature(&self, x: &Vector, y: &Vector, z: &Vector) -> Result<Vector> {
        for v in [x, y, z] {
            GeoError::check_dim(self.dim(), v.len())?;
        }
        Ok(self.nabla(x, &self.nabla(y, z))
            - self.nabla(y, &self.nabla(x, z))
            - self.nabla(&self.bracket(x, y), z))
    }

    /// Largest entry of the Jacobi identity defect over basis triples.
    pub fn jacobi_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0_f64;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let (x, y, z) = (self.basis(i), self.basis(j), self.basis(k));
                    let s = self.bracket(&x, &self.bracket(&y, &z))
                        + self.bracket(&y, &self.bracket(&z, &x))
                        + self.bracket(&z, &self.bracket(&x, &y));
                    worst = worst.max(s.amax());
                }
            }
        }
        worst
    }

    /// Largest bracket of `Z` against `n = z + v`.
    pub fn center_defect(&self) -> f64 {
        (1..self.dim())
            .map(|i| self.bracket(&self.basis(Z), &self.basis(i)).amax())
            .fold(0.0, f64::max)
    }

    pub fn to_document(&self) -> AlgebraDocument {
        let d = self.dim();
        let mut brackets = Vec::new();
        for i in 0..d {
            for j in i + 1..d {
                for k in 0..d {
                    let c = self.c(i, j, k);
                    if c != 0.0 {
                        brackets.push(BracketEntry { i, j, k, c });
                    }
                }
            }
        }
        AlgebraDocument {
            n: self.n,
            labels: self.labels(),
            brackets,
        }
    }

    pub fn from_document(doc: &AlgebraDocument) -> Result<Self> {
        if doc.n < 2 {
            return Err(GeoError::InvalidInput("n must be at least 2".into()));
        }
        let d = 2 * doc.n;
        let mut structure = vec![0.0; d * d * d];
        for e in &doc.brackets {
            if e.i >= d || e.j >= d || e.k >= d {
                return Err(GeoError::InvalidInput(format!("bracket index out of range: {e:?}")));
            }
            structure[(e.i * d + e.j) * d + e.k] = e.c;
            structure[(e.j * d + e.i) * d + e.k] = -e.c;
        }
        Self::from_structure(doc.n, structure)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketEntry {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub c: f64,
}

/// JSON form of the algebra: basis labels and the nonzero `[e_i, e_j]`
/// coefficients with `i < j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgebraDocument {
    pub n: usize,
    pub labels: Vec<String>,
    pub brackets: Vec<BracketEntry>,
}

/// Choice of a `k`-dimensional totally real subspace `w_perp` of `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct RuledSpec {
    n: usize,
    w_perp: Vec<Vector>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuledSpecDocument {
    pub n: usize,
    pub k: usize,
    pub w_perp: Vec<Vec<f64>>,
}

impl RuledSpec {
    /// `w_perp = span{V_1, V_3, ..., V_{2k-1}}`.
    pub fn canonical(n: usize, k: usize) -> Result<Self> {
        if n < 2 || k == 0 || k > n - 1 {
            return Err(GeoError::InvalidInput(format!(
                "corank k must satisfy 1 <= k <= n - 1, got n = {n}, k = {k}"
            )));
        }
        let d = 2 * n;
        let w_perp = (0..k)
            .map(|m| Vector::from_fn(d, |r, _| if r == 2 + 2 * m { 1.0 } else { 0.0 }))
            .collect();
        Self::new(n, w_perp)
    }

    /// Validates and orthonormalizes an arbitrary spanning set of `w_perp`.
    pub fn new(n: usize, spanning: Vec<Vector>) -> Result<Self> {
        if n < 2 {
            return Err(GeoError::InvalidInput("n must be at least 2".into()));
        }
        let d = 2 * n;
        for v in &spanning {
            GeoError::check_dim(d, v.len())?;
            if v[A].abs() > 1e-14 || v[Z].abs() > 1e-14 {
                return Err(GeoError::Validation("w_perp must lie in v".into()));
            }
        }
        let w_perp = orthonormalize(&spanning, 1e-10);
        let k = w_perp.len();
        if k == 0 || k > n - 1 {
            return Err(GeoError::Validation(format!(
                "w_perp has dimension {k}, expected 1..={}",
                n - 1
            )));
        }
        let model = CurvatureModel::new(n)?;
        for u in &w_perp {
            for v in &w_perp {
                let c = model.j(u).dot(v);
                if c.abs() > 1e-14 {
                    return Err(GeoError::Validation(format!(
                        "w_perp is not totally real: <iu, v> = {c:e}"
                    )));
                }
            }
        }
        Ok(Self { n, w_perp })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.w_perp.len()
    }

    pub fn w_perp(&self) -> &[Vector] {
        &self.w_perp
    }

    /// `i w_perp`.
    pub fn i_w_perp(&self) -> Vec<Vector> {
        let model = CurvatureModel::new(self.n).expect("validated");
        self.w_perp.iter().map(|u| model.j(u)).collect()
    }

    /// Orthonormal basis of `w = v - w_perp`.
    pub fn w(&self) -> Vec<Vector> {
        let v_basis: Vec<Vector> = (2..2 * self.n).map(|i| unit(2 * self.n, i)).collect();
        let mut all = self.w_perp.clone();
        let k = all.len();
        all.extend(v_basis);
        orthonormalize(&all, 1e-8).split_off(k)
    }

    /// Orthonormal basis of the maximal complex subspace `w_C = w - i w_perp`.
    pub fn w_complex(&self) -> Vec<Vector> {
        let mut all = self.w_perp.clone();
        all.extend(self.i_w_perp());
        let k = all.len();
        all.extend((2..2 * self.n).map(|i| unit(2 * self.n, i)));
        orthonormalize(&all, 1e-8).split_off(k)
    }

    /// Orthonormal basis of `s = a + z + w`.
    pub fn subalgebra(&self) -> Vec<Vector> {
        let d = 2 * self.n;
        let mut out = vec![unit(d, A), unit(d, Z)];
        out.extend(self.w());
        out
    }

    /// Largest deviation of `P_w = P_{w_C} + P_{i w_perp}`.
    pub fn decomposition_defect(&self) -> f64 {
        let d = 2 * self.n;
        let pw = linalg::projector(&self.w(), d);
        let split = linalg::projector(&self.w_complex(), d) + linalg::projector(&self.i_w_perp(), d);
        linalg::max_abs(&(pw - split))
    }

    pub fn to_document(&self) -> RuledSpecDocument {
        RuledSpecDocument {
            n: self.n,
            k: self.k(),
            w_perp: self.w_perp.iter().map(|v| v.iter().copied().collect()).collect(),
        }
    }

    pub fn from_document(doc: &RuledSpecDocument) -> Result<Self> {
        let vectors = doc.w_perp.iter().map(|v| Vector::from_vec(v.clone())).collect();
        let spec = Self::new(doc.n, vectors)?;
        if spec.k() != doc.k {
            return Err(GeoError::Validation(format!(
                "declared k = {} but w_perp has dimension {}",
                doc.k,
                spec.k()
            )));
        }
        Ok(spec)
    }
}

fn unit(d: usize, i: usize) -> Vector {
    Vector::from_fn(d, |r, _| if r == i { 1.0 } else { 0.0 })
}

/// Orbit through the identity of the connected subgroup generated by a
/// subalgebra, described at the identity by its tangent and normal spaces.
#[derive(Debug, Clone)]
pub struct OrbitModel {
    algebra: SolvableAlgebra,
    tangent: Vec<Vector>,
    normal: Vec<Vector>,
}

impl OrbitModel {
    /// Builds the orbit of the subalgebra spanned by `span`. Fails when the
    /// span is not closed under the bracket.
    pub fn new(algebra: &SolvableAlgebra, span: &[Vector]) -> Result<Self> {
        let d = algebra.dim();
        for v in span {
            GeoError::check_dim(d, v.len())?;
        }
        let tangent = orthonormalize(span, 1e-10);
        let normal = linalg::complement(&tangent, d);
        let model = Self {
            algebra: algebra.clone(),
            tangent,
            normal,
        };
        let defect = model.closure_defect();
        if defect > 1e-12 {
            return Err(GeoError::Validation(format!(
                "span is not a subalgebra (bracket leaves it by {defect:e})"
            )));
        }
        Ok(model)
    }

    pub fn algebra(&self) -> &SolvableAlgebra {
        &self.algebra
    }

    pub fn tangent(&self) -> &[Vector] {
        &self.tangent
    }

    pub fn normal(&self) -> &[Vector] {
        &self.normal
    }

    pub fn dim(&self) -> usize {
        self.tangent.len()
    }

    pub fn normal_part(&self, v: &Vector) -> Vector {
        self.normal
            .iter()
            .fold(Vector::zeros(v.len()), |acc, e| acc + e * e.dot(v))
    }

    pub fn tangent_part(&self, v: &Vector) -> Vector {
        self.tangent
            .iter()
            .fold(Vector::zeros(v.len()), |acc, e| acc + e * e.dot(v))
    }

    /// Largest normal component of a bracket of tangent basis vectors.
    pub fn closure_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for x in &self.tangent {
            for y in &self.tangent {
                worst = worst.max(self.normal_part(&self.algebra.bracket(x, y)).amax());
            }
        }
        worst
    }

    /// Second fundamental form: normal part of the ambient connection.
    pub fn second_fundamental_form(&self, x: &Vector, y: &Vector) -> Vector {
        self.normal_part(&self.algebra.nabla(x, y))
    }

    /// Induced connection on tangent left-invariant fields.
    pub fn induced_connection(&self, x: &Vector, y: &Vector) -> Vector {
        self.tangent_part(&self.algebra.nabla(x, y))
    }

    /// Shape operator `S_xi` as an ambient matrix vanishing on the normal space.
    pub fn shape_operator(&self, xi: &Vector) -> Matrix {
        let d = self.algebra.dim();
        let mut s = Matrix::zeros(d, d);
        for ea in &self.tangent {
            for eb in &self.tangent {
                let h = self.second_fundamental_form(ea, eb).dot(xi);
                s += ea * eb.transpose() * h;
            }
        }
        (&s + s.transpose()) * 0.5
    }

    /// Eigenvalues of `S_xi` on the tangent space, ascending.
    pub fn principal_curvatures(&self, xi: &Vector) -> Vec<f64> {
        let q = linalg::columns(&self.tangent, self.algebra.dim());
        let restricted = q.transpose() * self.shape_operator(xi) * q;
        linalg::sorted_eigen(&restricted).0
    }

    pub fn connection_sample(&self) -> ConnectionSample {
        let m = self.tangent.len();
        let mut gamma = vec![0.0; m * m * m];
        for (a, ea) in self.tangent.iter().enumerate() {
            for (b, eb) in self.tangent.iter().enumerate() {
                let nab = self.algebra.nabla(ea, eb);
                for (c, ec) in self.tangent.iter().enumerate() {
                    gamma[(a * m + b) * m + c] = nab.dot(ec);
                }
            }
        }
        ConnectionSample::new(self.tangent.clone(), gamma).expect("orthonormal frame")
    }

    /// Hypersurface data with respect to the unit normal `xi`.
    pub fn hypersurface_data(&self, xi: &Vector) -> Result<HypersurfacePointData> {
        if self.normal.len() != 1 {
            return Err(GeoError::Unsupported(format!(
                "orbit has codimension {}, not a hypersurface",
                self.normal.len()
            )));
        }
        self.check_normal(xi)?;
        HypersurfacePointData::new(xi.clone(), self.shape_operator(xi), Some(self.connection_sample()))
    }

    fn check_normal(&self, xi: &Vector) -> Result<()> {
        GeoError::check_dim(self.algebra.dim(), xi.len())?;
        if (xi.norm() - 1.0).abs() > 1e-12 || self.tangent_part(xi).amax() > 1e-12 {
            return Err(GeoError::InvalidInput("xi must be a unit normal vector".into()));
        }
        Ok(())
    }

    /// Pointwise data consumed by the tube engine.
    pub fn point(&self, xi: &Vector) -> Result<SubmanifoldPoint> {
        self.check_normal(xi)?;
        SubmanifoldPoint::new(
            self.algebra.n(),
            self.tangent.clone(),
            self.normal.clone(),
            xi.clone(),
            self.shape_operator(xi),
        )
    }
}

/// Ruled minimal submanifold `W^{2n-k}`: the orbit of `a + z + w`.
pub fn build_ruled(algebra: &SolvableAlgebra, spec: &RuledSpec) -> Result<OrbitModel> {
    GeoError::check_dim(algebra.n(), spec.n())?;
    OrbitModel::new(algebra, &spec.subalgebra())
}

/// Horosphere: the orbit of the nilpotent part `n = z + v`.
pub fn horosphere(algebra: &SolvableAlgebra) -> OrbitModel {
    let span: Vec<Vector> = (1..algebra.dim()).map(|i| algebra.basis(i)).collect();
    OrbitModel::new(algebra, &span).expect("n is a subalgebra")
}

/// Totally geodesic `CH^k` through the identity, `0 <= k <= n - 1`
/// (`k = 0` is the point itself).
pub fn complex_hyperbolic(algebra: &SolvableAlgebra, k: usize) -> Result<OrbitModel> {
    if k >= algebra.n() {
        return Err(GeoError::InvalidInput(format!(
            "CH^k needs k < n = {}, got {k}",
            algebra.n()
        )));
    }
    if k == 0 {
        return OrbitModel::new(algebra, &[]);
    }
    let mut span = vec![algebra.basis(A), algebra.basis(Z)];
    span.extend((2..2 * k).map(|i| algebra.basis(i)));
    OrbitModel::new(algebra, &span)
}

/// Totally geodesic `RH^n`: the orbit of `a + span{V_1, V_3, ..., V_{2n-3}}`.
pub fn real_hyperbolic(algebra: &SolvableAlgebra) -> OrbitModel {
    let mut span = vec![algebra.basis(A)];
    span.extend((0..algebra.n() - 1).map(|m| algebra.basis(2 + 2 * m)));
    OrbitModel::new(algebra, &span).expect("a + real form of v is a subalgebra")
}

/// Orbit through the identity of the conjugate of `a + z + w` by
/// `exp(t V_1)`, where `w_perp = R V_1`. Its Lie algebra is
/// `span{A - (t/2) V_1} + z + w`; these orbits are the hypersurfaces
/// equidistant to `W^{2n-1}`, with `t = 0` giving `W^{2n-1}` itself.
pub fn equidistant_orbit(algebra: &SolvableAlgebra, t: f64) -> OrbitModel {
    let spec = RuledSpec::canonical(algebra.n(), 1).expect("n >= 2");
    let mut span = vec![algebra.basis(A) - algebra.v(1) * (t / 2.0), algebra.basis(Z)];
    span.extend(spec.w());
    OrbitModel::new(algebra, &span).expect("conjugate subalgebra")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{gaussian_vector, seeded, unit_in_span};
    use approx::assert_abs_diff_eq;

    #[test]
    fn dimensions_and_center() {
        let alg = SolvableAlgebra::new(2).unwrap();
        assert_eq!(alg.dim(), 4);
        assert_eq!(alg.bracket(&alg.basis(Z), &alg.v(1)).amax(), 0.0);
        assert_eq!(alg.center_defect(), 0.0);
        assert_eq!(alg.labels(), ["A", "Z", "V1", "V2"]);
        assert!(SolvableAlgebra::new(1).is_err());
    }

    #[test]
    fn jacobi_identity_holds() {
        for n in 2..6 {
            assert!(SolvableAlgebra::new(n).unwrap().jacobi_defect() <= 1e-14);
        }
    }

    #[test]
    fn sectional_curvatures_from_koszul() {
        let alg = SolvableAlgebra::new(3).unwrap();
        let sec = |x: &Vector, y: &Vector| alg.algebra_curvature(x, y, y).unwrap().dot(x);
        let (a, z, v1) = (alg.basis(A), alg.basis(Z), alg.v(1));
        assert_abs_diff_eq!(sec(&a, &z), -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(sec(&v1, &a), -0.25, epsilon = 1e-14);
        let r = alg.algebra_curvature(&a, &z, &z).unwrap();
        assert!((r + &a).amax() <= 1e-14);
        let x = alg.v(2);
        assert_eq!(alg.algebra_curvature(&x, &x, &z).unwrap().amax(), 0.0);
    }

    #[test]
    fn connection_examples() {
        let alg = SolvableAlgebra::new(3).unwrap();
        let a = alg.basis(A);
        assert!(alg.levi_civita(&a, &a).unwrap().amax() <= 1e-15);
        let mut rng = seeded(5);
        let x = unit_in_span(&mut rng, &(2..6).map(|i| alg.basis(i)).collect::<Vec<_>>());
        let nxx = alg.levi_civita(&x, &x).unwrap();
        assert_abs_diff_eq!(nxx[A], 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(nxx.norm(), 0.5, epsilon = 1e-14);
    }

    #[test]
    fn metric_compatible_and_torsion_free() {
        let alg = SolvableAlgebra::new(4).unwrap();
        let mut rng = seeded(6);
        for _ in 0..100 {
            let [x, y, w] = [0; 3].map(|_| gaussian_vector(&mut rng, 8));
            let compat = alg.nabla(&x, &y).dot(&w) + y.dot(&alg.nabla(&x, &w));
            assert!(compat.abs() <= 1e-14 * (1.0 + x.norm() * y.norm() * w.norm()));
            let torsion = alg.nabla(&x, &y) - alg.nabla(&y, &x) - alg.bracket(&x, &y);
            assert!(torsion.amax() <= 1e-14 * (1.0 + x.norm() * y.norm()));
        }
    }

    #[test]
    fn curvature_matches_closed_form() {
        for n in 2..5 {
            let alg = SolvableAlgebra::new(n).unwrap();
            let model = alg.curvature_model();
            let mut rng = seeded(n as u64);
            for _ in 0..50 {
                let [x, y, z] = [0; 3].map(|_| gaussian_vector(&mut rng, 2 * n));
                let diff = alg.algebra_curvature(&x, &y, &z).unwrap() - model.curvature(&x, &y, &z).unwrap();
                assert!(diff.amax() <= 1e-10);
            }
        }
    }

    #[test]
    fn complex_structure_identification() {
        let alg = SolvableAlgebra::new(3).unwrap();
        let j = alg.curvature_model();
        assert_eq!(j.j(&alg.basis(A)), alg.basis(Z));
        assert_eq!(j.j(&alg.basis(Z)), -alg.basis(A));
        assert_eq!(j.j(&alg.v(1)), alg.v(2));
    }

    #[test]
    fn ruled_spec_validation() {
        let n = 4;
        let alg = SolvableAlgebra::new(n).unwrap();
        let spec = RuledSpec::canonical(n, 2).unwrap();
        assert_eq!(spec.k(), 2);
        assert!(spec.decomposition_defect() <= 1e-14);
        assert_eq!(spec.w().len(), 2 * n - 2 - 2);
        assert_eq!(spec.w_complex().len(), 2 * n - 2 - 4);
        // complex line is not totally real
        assert!(RuledSpec::new(n, vec![alg.v(1), alg.v(2)]).is_err());
        // outside v
        assert!(RuledSpec::new(n, vec![alg.basis(Z)]).is_err());
        assert!(RuledSpec::canonical(n, n).is_err());
        assert!(RuledSpec::canonical(n, 0).is_err());
    }

    #[test]
    fn non_subalgebra_is_rejected() {
        let alg = SolvableAlgebra::new(3).unwrap();
        // [V1, V2] = Z leaves span{V1, V2}
        assert!(matches!(
            OrbitModel::new(&alg, &[alg.v(1), alg.v(2)]),
            Err(GeoError::Validation(_))
        ));
    }

    #[test]
    fn ruled_second_fundamental_form() {
        let n = 3;
        let alg = SolvableAlgebra::new(n).unwrap();
        let spec = RuledSpec::canonical(n, 1).unwrap();
        let w = build_ruled(&alg, &spec).unwrap();
        let xi = alg.v(1);
        let ixi = alg.v(2);
        let ii = w.second_fundamental_form(&alg.basis(Z), &ixi);
        assert!((ii * 2.0 - &xi).amax() <= 1e-12);
        let trace: f64 = w.principal_curvatures(&xi).iter().sum();
        assert!(trace.abs() <= 1e-12);
    }

    #[test]
    fn ruled_spectrum_corank_two() {
        let n = 3;
        let alg = SolvableAlgebra::new(n).unwrap();
        let spec = RuledSpec::canonical(n, 2).unwrap();
        let w = build_ruled(&alg, &spec).unwrap();
        let xi = spec.w_perp()[0].clone();
        let pcs = w.principal_curvatures(&xi);
        let expect = [-0.5, 0.0, 0.0, 0.5];
        for (p, e) in pcs.iter().zip(expect) {
            assert_abs_diff_eq!(*p, e, epsilon = 1e-12);
        }
        let s = w.shape_operator(&xi);
        let ixi = alg.curvature_model().j(&xi);
        for sign in [1.0, -1.0] {
            let e = alg.basis(Z) + &ixi * sign;
            assert!((&s * &e - &e * (0.5 * sign)).amax() <= 1e-12);
        }
    }

    #[test]
    fn totally_geodesic_orbits() {
        let alg = SolvableAlgebra::new(4).unwrap();
        for orbit in [
            complex_hyperbolic(&alg, 2).unwrap(),
            complex_hyperbolic(&alg, 3).unwrap(),
            real_hyperbolic(&alg),
        ] {
            for x in orbit.tangent() {
                for y in orbit.tangent() {
                    assert!(orbit.second_fundamental_form(x, y).amax() <= 1e-14);
                }
            }
        }
        assert_eq!(real_hyperbolic(&alg).dim(), 4);
        assert_eq!(complex_hyperbolic(&alg, 0).unwrap().dim(), 0);
        assert!(complex_hyperbolic(&alg, 4).is_err());
    }

    #[test]
    fn horosphere_spectrum() {
        let alg = SolvableAlgebra::new(3).unwrap();
        let h = horosphere(&alg);
        // normal A; J A = Z is the Hopf direction
        let pcs = h.principal_curvatures(&alg.basis(A));
        for (p, e) in pcs.iter().zip([0.5, 0.5, 0.5, 0.5, 1.0]) {
            assert_abs_diff_eq!(*p, e, epsilon = 1e-14);
        }
    }

    #[test]
    fn equidistant_orbit_at_zero_is_ruled() {
        let alg = SolvableAlgebra::new(3).unwrap();
        let e = equidistant_orbit(&alg, 0.0);
        let w = build_ruled(&alg, &RuledSpec::canonical(3, 1).unwrap()).unwrap();
        assert!((linalg::projector(e.tangent(), 6) - linalg::projector(w.tangent(), 6)).amax() <= 1e-14);
    }

    #[test]
    fn documents_round_trip() {
        let alg = SolvableAlgebra::new(3).unwrap();
        let json = serde_json::to_string(&alg.to_document()).unwrap();
        let back: AlgebraDocument = serde_json::from_str(&json).unwrap();
        assert_eq!(SolvableAlgebra::from_document(&back).unwrap(), alg);

        let spec = RuledSpec::canonical(4, 3).unwrap();
        let json = serde_json::to_string(&spec.to_document()).unwrap();
        let back: RuledSpecDocument = serde_json::from_str(&json).unwrap();
        assert_eq!(RuledSpec::from_document(&back).unwrap(), spec);
    }
}
