//! Jacobi fields along normal geodesics.
//!
//! All vectors are expressed in a parallel orthonormal frame along the
//! geodesic `c(t) = exp(t xi)`. Since `J` is parallel, `c'` and `J c'` have
//! constant coordinates `xi` and `J xi`, and the Jacobi equation becomes the
//! constant-coefficient system `4 zeta'' = zeta + 3 <zeta, J xi> J xi` on
//! `xi^perp`.
//!
//! Two independent routes are provided: the closed form in terms of
//! [`JacobiCoefficients`] and a matrix propagator built from the spectrum of
//! the Jacobi operator `R(., xi) xi` ([`JacobiPropagator`]). A fourth-order
//! Runge-Kutta integrator ([`jacobi_numeric`]) serves as an oracle for both.

use nalgebra::Matrix2;

use crate::curvature::{CurvatureModel, HypersurfacePointData};
use crate::error::{GeoError, Result};
use crate::linalg::{self, orthonormalize};
use crate::profile::{PrincipalProfile, MERGE_GAP};
use crate::{Matrix, Vector};

/// Singular values at or below this are treated as zero.
pub const KERNEL_THRESHOLD: f64 = 1e-10;
/// Smallest admissible nonzero singular value when a kernel is reported.
pub const SPECTRAL_GAP: f64 = 0.1;
/// Determinant guard for inverting `D(r)`.
pub const DET_GUARD: f64 = 1e-12;

/// `f(t) = cosh(t/2) - 2 lambda sinh(t/2)`,
/// `g(t) = (cosh(t/2) - 1)(1 + 2 cosh(t/2) - 2 lambda sinh(t/2))`
/// and their first derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiCoefficients {
    pub f: f64,
    pub g: f64,
    pub df: f64,
    pub dg: f64,
}

impl JacobiCoefficients {
    pub fn at(lambda: f64, t: f64) -> Self {
        let (s, c) = ((t / 2.0).sinh(), (t / 2.0).cosh());
        let f = c - 2.0 * lambda * s;
        let h = 1.0 + 2.0 * c - 2.0 * lambda * s;
        let g = (c - 1.0) * h;
        let df = s / 2.0 - lambda * c;
        let dg = s / 2.0 * h + (c - 1.0) * (s - lambda * c);
        Self { f, g, df, dg }
    }
}

/// Jacobi field with `zeta(0) = v`, `zeta'(0) = -lambda v` for `v` in the
/// principal space of `lambda`, evaluated at `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiSolution {
    pub lambda: f64,
    pub t: f64,
    pub value: Vector,
    pub derivative: Vector,
}

impl JacobiSolution {
    /// `zeta(t) = f(t) B_v(t) + <v, J xi> g(t) J c'(t)`.
    pub fn closed_form(lambda: f64, v: &Vector, j_xi: &Vector, t: f64) -> Self {
        let k = JacobiCoefficients::at(lambda, t);
        let hopf = v.dot(j_xi);
        Self {
            lambda,
            t,
            value: v * k.f + j_xi * (hopf * k.g),
            derivative: v * k.df + j_xi * (hopf * k.dg),
        }
    }
}

/// Closed-form Jacobi field for a vector given by its principal components
/// `(lambda_i, v_i)`. Returns `(zeta(t), zeta'(t))`.
pub fn jacobi_closed_form(components: &[(f64, Vector)], j_xi: &Vector, t: f64) -> (Vector, Vector) {
    let dim = j_xi.len();
    components.iter().fold(
        (Vector::zeros(dim), Vector::zeros(dim)),
        |(val, der), (lambda, v)| {
            let sol = JacobiSolution::closed_form(*lambda, v, j_xi, t);
            (val + sol.value, der + sol.derivative)
        },
    )
}

/// Integrates `4 zeta'' = zeta + 3 <zeta, jc> jc` from `t = 0` to `t` with
/// classical RK4 and step at most `step`. Negative `t` integrates backwards.
pub fn jacobi_numeric(
    v0: &Vector,
    v0_prime: &Vector,
    jc: &Vector,
    t: f64,
    step: f64,
) -> Result<(Vector, Vector)> {
    if step.is_nan() || step <= 0.0 {
        return Err(GeoError::InvalidInput(format!("step must be positive, got {step}")));
    }
    GeoError::check_dim(v0.len(), v0_prime.len())?;
    GeoError::check_dim(v0.len(), jc.len())?;
    if t == 0.0 {
        return Ok((v0.clone(), v0_prime.clone()));
    }
    let accel = |z: &Vector| (z + jc * (3.0 * z.dot(jc))) * 0.25;
    let steps = (t.abs() / step).ceil() as usize;
    let h = t / steps as f64;
    let (mut z, mut p) = (v0.clone(), v0_prime.clone());
    for _ in 0..steps {
        let k1z = p.clone();
        let k1p = accel(&z);
        let k2z = &p + &k1p * (h / 2.0);
        let k2p = accel(&(&z + &k1z * (h / 2.0)));
        let k3z = &p + &k2p * (h / 2.0);
        let k3p = accel(&(&z + &k2z * (h / 2.0)));
        let k4z = &p + &k3p * h;
        let k4p = accel(&(&z + &k3z * h));
        z += (k1z + &k2z * 2.0 + &k3z * 2.0 + k4z) * (h / 6.0);
        p += (k1p + &k2p * 2.0 + &k3p * 2.0 + k4p) * (h / 6.0);
    }
    Ok((z, p))
}

/// Fundamental solution of `zeta'' = -K zeta` with `K = R(., xi) xi`,
/// assembled from the spectral decomposition of `K` (eigenvalues `-kappa^2`).
#[derive(Debug, Clone)]
pub struct JacobiPropagator {
    rates: Vec<f64>,
    modes: Vec<Vector>,
}

impl JacobiPropagator {
    pub fn new(model: &CurvatureModel, xi: &Vector) -> Result<Self> {
        let k = model.jacobi_operator(xi)?;
        let (values, modes) = linalg::sorted_eigen(&k);
        let rates = values.iter().map(|mu| (-mu).max(0.0).sqrt()).collect();
        Ok(Self { rates, modes })
    }

    /// Distinct rates `kappa` of the Jacobi operator with multiplicities.
    pub fn rates(&self) -> Vec<(f64, usize)> {
        let mut r = self.rates.clone();
        r.sort_by(f64::total_cmp);
        linalg::cluster(&r, 1e-9)
    }

    fn combine(&self, weight: impl Fn(f64) -> f64) -> Matrix {
        let d = self.modes.len();
        self.rates
            .iter()
            .zip(&self.modes)
            .fold(Matrix::zeros(d, d), |acc, (k, e)| acc + e * e.transpose() * weight(*k))
    }

    /// Returns `(zeta(t), zeta'(t))` for the given initial data.
    pub fn propagate(&self, v0: &Vector, v0_prime: &Vector, t: f64) -> (Vector, Vector) {
        let c = self.combine(|k| (k * t).cosh());
        let s = self.combine(|k| if k < 1e-12 { t } else { (k * t).sinh() / k });
        let dc = self.combine(|k| k * (k * t).sinh());
        (&c * v0 + &s * v0_prime, &dc * v0 + &c * v0_prime)
    }
}

/// Pointwise data of a submanifold: orthonormal tangent and normal bases, a
/// unit normal `xi` and the shape operator `S_xi` as an ambient matrix.
#[derive(Debug, Clone)]
pub struct SubmanifoldPoint {
    model: CurvatureModel,
    tangent: Vec<Vector>,
    normal: Vec<Vector>,
    xi: Vector,
    shape: Matrix,
}

impl SubmanifoldPoint {
    pub fn new(
        n: usize,
        tangent: Vec<Vector>,
        normal: Vec<Vector>,
        xi: Vector,
        shape: Matrix,
    ) -> Result<Self> {
        let model = CurvatureModel::new(n)?;
        let d = model.dim();
        GeoError::check_dim(d, tangent.len() + normal.len())?;
        let all: Vec<Vector> = tangent.iter().chain(&normal).cloned().collect();
        for v in all.iter().chain(std::iter::once(&xi)) {
            GeoError::check_dim(d, v.len())?;
        }
        let gram = linalg::columns(&all, d);
        if linalg::max_abs(&(gram.transpose() * &gram - Matrix::identity(d, d))) > 1e-10 {
            return Err(GeoError::Validation("tangent and normal bases are not orthonormal".into()));
        }
        let normal_proj = linalg::projector(&normal, d);
        if (xi.norm() - 1.0).abs() > 1e-12 || (&normal_proj * &xi - &xi).amax() > 1e-12 {
            return Err(GeoError::Validation("xi must be a unit normal vector".into()));
        }
        Ok(Self {
            model,
            tangent,
            normal,
            xi,
            shape,
        })
    }

    pub fn model(&self) -> &CurvatureModel {
        &self.model
    }

    pub fn xi(&self) -> &Vector {
        &self.xi
    }

    pub fn codimension(&self) -> usize {
        self.normal.len()
    }

    /// Orthonormal basis of `normal - R xi`.
    fn normal_rest(&self) -> Vec<Vector> {
        let mut all = vec![self.xi.clone()];
        all.extend(self.normal.iter().cloned());
        orthonormalize(&all, 1e-8).split_off(1)
    }

    /// Shape operator of the parallel hypersurface at parameter `t` along
    /// `c(t) = exp(t xi)`, with respect to `c'(t)`:
    /// `S = -zeta'(t) zeta(t)^{-1}` on `xi^perp`.
    pub fn parallel_shape(&self, t: f64) -> Result<Matrix> {
        let prop = JacobiPropagator::new(&self.model, &self.xi)?;
        let rest = self.normal_rest();
        let d = self.model.dim();
        let mut frame = Vec::with_capacity(d - 1);
        let mut values = Vec::with_capacity(d - 1);
        let mut derivs = Vec::with_capacity(d - 1);
        for v in &self.tangent {
            let (z, dz) = prop.propagate(v, &-(&self.shape * v), t);
            frame.push(v.clone());
            values.push(z);
            derivs.push(dz);
        }
        for w in &rest {
            let (z, dz) = prop.propagate(&Vector::zeros(d), w, t);
            frame.push(w.clone());
            values.push(z);
            derivs.push(dz);
        }
        let q = linalg::columns(&frame, d);
        let y = q.transpose() * linalg::columns(&values, d);
        let dy = q.transpose() * linalg::columns(&derivs, d);
        let smallest = linalg::singular_values(&y).last().copied().unwrap_or(0.0);
        if smallest <= KERNEL_THRESHOLD {
            return Err(GeoError::FocalRadius { r: t });
        }
        let inv = y.try_inverse().ok_or(GeoError::FocalRadius { r: t })?;
        let s = -(dy * inv);
        let ambient = &q * s * q.transpose();
        Ok((&ambient + ambient.transpose()) * 0.5)
    }

    /// Tube of radius `r > 0`, oriented by the unit normal pointing back
    /// towards the base (`-c'(r)`).
    pub fn tube(&self, r: f64) -> Result<HypersurfaceShape> {
        if !r.is_finite() || r <= 0.0 {
            return Err(GeoError::InvalidInput(format!("tube radius must be positive, got {r}")));
        }
        let s = self.parallel_shape(r)?;
        Ok(HypersurfaceShape {
            model: self.model,
            normal: -self.xi.clone(),
            shape: -s,
        })
    }

    /// Equidistant hypersurface at signed distance `r` of a hypersurface,
    /// reached by travelling `-r` along `xi` and oriented by the transported
    /// `xi`. With this orientation a principal curvature `0` of the base
    /// becomes `tanh(r/2)/2`.
    pub fn equidistant(&self, r: f64) -> Result<HypersurfaceShape> {
        if self.codimension() != 1 {
            return Err(GeoError::Unsupported(format!(
                "equidistants need a hypersurface, got codimension {}",
                self.codimension()
            )));
        }
        if !r.is_finite() {
            return Err(GeoError::InvalidInput("distance must be finite".into()));
        }
        let shape = self.parallel_shape(-r)?;
        Ok(HypersurfaceShape {
            model: self.model,
            normal: self.xi.clone(),
            shape,
        })
    }
}

/// Shape operator of a real hypersurface at one point.
#[derive(Debug, Clone)]
pub struct HypersurfaceShape {
    model: CurvatureModel,
    pub normal: Vector,
    pub shape: Matrix,
}

impl HypersurfaceShape {
    pub fn new(model: CurvatureModel, normal: Vector, shape: Matrix) -> Self {
        Self { model, normal, shape }
    }

    fn tangent_basis(&self) -> Vec<Vector> {
        linalg::complement(std::slice::from_ref(&self.normal), self.model.dim())
    }

    /// Principal spaces `(lambda, basis)` in ascending order of `lambda`.
    pub fn eigenspaces(&self) -> Vec<(f64, Vec<Vector>)> {
        let q = linalg::columns(&self.tangent_basis(), self.model.dim());
        let restricted = q.transpose() * &self.shape * &q;
        let (values, vectors) = linalg::sorted_eigen(&restricted);
        let mut out: Vec<(f64, Vec<Vector>)> = Vec::new();
        let mut members: Vec<f64> = Vec::new();
        for (value, vec) in values.into_iter().zip(vectors) {
            let ambient = &q * vec;
            match out.last_mut() {
                Some((_, basis)) if value - members.last().copied().unwrap_or(value) < MERGE_GAP => {
                    basis.push(ambient);
                    members.push(value);
                }
                _ => {
                    if let Some((lambda, _)) = out.last_mut() {
                        *lambda = linalg::mean(&members);
                    }
                    members.clear();
                    members.push(value);
                    out.push((value, vec![ambient]));
                }
            }
        }
        if let Some((lambda, _)) = out.last_mut() {
            *lambda = linalg::mean(&members);
        }
        out
    }

    pub fn principal_curvatures(&self) -> Vec<f64> {
        let q = linalg::columns(&self.tangent_basis(), self.model.dim());
        linalg::sorted_eigen(&(q.transpose() * &self.shape * &q)).0
    }

    /// Profile with Hopf projections attached when `J normal` meets exactly
    /// two principal spaces.
    pub fn profile(&self) -> PrincipalProfile {
        let spaces = self.eigenspaces();
        let jn = self.model.j(&self.normal);
        let proj: Vec<f64> = spaces
            .iter()
            .map(|(_, basis)| basis.iter().map(|e| e.dot(&jn).powi(2)).sum::<f64>().sqrt())
            .collect();
        let touching: Vec<f64> = proj.iter().copied().filter(|p| *p > 1e-9).collect();
        PrincipalProfile {
            entries: spaces.iter().map(|(l, b)| (*l, b.len())).collect(),
            hopf: (touching.len() == 2).then(|| [touching[0], touching[1]]),
        }
    }

    /// `|S J nu - <S J nu, J nu> J nu|`; zero exactly for Hopf hypersurfaces.
    pub fn hopf_residual(&self) -> f64 {
        let jn = self.model.j(&self.normal);
        let sj = &self.shape * &jn;
        (&sj - &jn * sj.dot(&jn)).norm()
    }

    pub fn point_data(
        &self,
        connection: Option<crate::curvature::ConnectionSample>,
    ) -> Result<HypersurfacePointData> {
        HypersurfacePointData::new(self.normal.clone(), self.shape.clone(), connection)
    }
}

/// Lengths of the projections of `J xi` onto `T_{lambda_1}` and
/// `T_{lambda_2}`; `b1^2 + b2^2 = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopfFrame {
    pub b1: f64,
    pub b2: f64,
}

impl HopfFrame {
    pub fn new(b1: f64, b2: f64) -> Result<Self> {
        if b1 < 0.0 || b2 < 0.0 || (b1 * b1 + b2 * b2 - 1.0).abs() > 1e-14 {
            return Err(GeoError::InvalidInput(format!(
                "Hopf projections must be nonnegative with b1^2 + b2^2 = 1, got ({b1}, {b2})"
            )));
        }
        Ok(Self { b1, b2 })
    }

    pub fn from_squares(b1_sq: f64, b2_sq: f64) -> Result<Self> {
        if b1_sq < 0.0 || b2_sq < 0.0 {
            return Err(GeoError::InvalidInput("squared projections must be nonnegative".into()));
        }
        let norm = (b1_sq + b2_sq).sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(GeoError::InvalidInput(format!(
                "b1^2 + b2^2 = {} instead of 1",
                b1_sq + b2_sq
            )));
        }
        Self::new(b1_sq.sqrt() / norm, b2_sq.sqrt() / norm)
    }
}

/// Non-Hopf hypersurface data with three principal curvatures: `J xi` meets
/// `T_{lambda_1}` and `T_{lambda_2}` only, `m_2 = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct NonHopfData {
    pub n: usize,
    pub lambda: [f64; 3],
    pub mult: [usize; 3],
    pub hopf: HopfFrame,
}

impl NonHopfData {
    pub fn new(n: usize, lambda: [f64; 3], m1: usize, hopf: HopfFrame) -> Result<Self> {
        if n < 2 {
            return Err(GeoError::InvalidInput("n must be at least 2".into()));
        }
        if m1 == 0 || m1 > n - 1 {
            return Err(GeoError::InvalidInput(format!(
                "m1 must lie in 1..={} for n = {n}, got {m1}",
                n - 1
            )));
        }
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            if (lambda[i] - lambda[j]).abs() < MERGE_GAP {
                return Err(GeoError::CoincidentEigenvalues(format!("{lambda:?}")));
            }
        }
        Ok(Self {
            n,
            lambda,
            mult: [m1, 1, 2 * n - 2 - m1],
            hopf,
        })
    }

    /// Profile in label order `lambda_1, lambda_2, lambda_3`.
    pub fn profile(&self) -> PrincipalProfile {
        PrincipalProfile {
            entries: (0..3).map(|i| (self.lambda[i], self.mult[i])).collect(),
            hopf: Some([self.hopf.b1, self.hopf.b2]),
        }
    }

    /// Concrete orthonormal frame realizing the data in the J-adapted basis:
    /// `xi = e_0`, `A = e_2`, `u_1 = b_1 J xi + b_2 J A`,
    /// `u_2 = b_2 J xi - b_1 J A`, then `m_1 - 1` pairs `(W, JW)` with
    /// `W in T_{lambda_1}`, `JW in T_{lambda_3}`, and the remaining complex
    /// pairs in `T_{lambda_3}`.
    pub fn realize(&self) -> RealizedFrame {
        let model = CurvatureModel::new(self.n).expect("validated");
        let e = |i| model.basis(i);
        let (b1, b2) = (self.hopf.b1, self.hopf.b2);
        let xi = e(0);
        let j_xi = e(1);
        let a = e(2);
        let j_a = e(3);
        let u1 = &j_xi * b1 + &j_a * b2;
        let u2 = &j_xi * b2 - &j_a * b1;
        let mut frame = vec![(0, u1.clone()), (1, u2.clone()), (2, a.clone())];
        for pair in 2..self.n {
            let (w, jw) = (e(2 * pair), e(2 * pair + 1));
            if pair - 2 < self.mult[0] - 1 {
                frame.push((0, w));
                frame.push((2, jw));
            } else {
                frame.push((2, w));
                frame.push((2, jw));
            }
        }
        RealizedFrame {
            model,
            lambda: self.lambda,
            xi,
            j_xi,
            u1,
            u2,
            a,
            frame,
        }
    }
}

/// Orthonormal principal frame of a [`NonHopfData`] point. Each frame entry
/// carries the index (0, 1, 2) of its principal curvature.
#[derive(Debug, Clone)]
pub struct RealizedFrame {
    pub model: CurvatureModel,
    pub lambda: [f64; 3],
    pub xi: Vector,
    pub j_xi: Vector,
    pub u1: Vector,
    pub u2: Vector,
    pub a: Vector,
    pub frame: Vec<(usize, Vector)>,
}

impl RealizedFrame {
    pub fn shape(&self) -> Matrix {
        let d = self.model.dim();
        self.frame
            .iter()
            .fold(Matrix::zeros(d, d), |acc, (i, v)| acc + v * v.transpose() * self.lambda[*i])
    }

    /// Unit vectors of `T_{lambda_1}` orthogonal to `u_1`.
    pub fn w1(&self) -> Vec<Vector> {
        self.frame
            .iter()
            .skip(3)
            .filter(|(i, _)| *i == 0)
            .map(|(_, v)| v.clone())
            .collect()
    }

    pub fn hypersurface(&self) -> HypersurfaceShape {
        HypersurfaceShape::new(self.model, self.xi.clone(), self.shape())
    }
}

/// Differential of the map `p -> exp_p(r xi_p)` at one point together with
/// the derived quantities.
#[derive(Debug, Clone)]
pub struct FocalMapData {
    pub r: f64,
    /// `(u_1, u_2)`-block: rows `Phi_* u_i` in the basis `B_{u_1}, B_{u_2}`.
    pub d: Matrix2<f64>,
    pub d_prime: Matrix2<f64>,
    /// Columns `zeta_v(r)` and `zeta_v'(r)` for the source frame vectors.
    pub phi: Matrix,
    pub phi_prime: Matrix,
    pub source: RealizedFrame,
    /// Singular values of the differential, descending.
    pub singular_values: Vec<f64>,
    pub kernel_dim: usize,
    pub rank: usize,
    /// Codimension `2n - rank` of the image.
    pub image_codim: usize,
    /// True when every singular value is either `<= KERNEL_THRESHOLD` or
    /// `>= SPECTRAL_GAP`.
    pub gap_ok: bool,
    /// Parallel-translated unit normal `eta^r = c'(r)`.
    pub eta: Vector,
    pub image_spectrum: Vec<(f64, usize)>,
}

impl FocalMapData {
    /// `C(r) = -D'(r) D(r)^{-1}`.
    pub fn c_matrix(&self) -> Result<Matrix2<f64>> {
        let det = self.d.determinant();
        if det.abs() <= DET_GUARD {
            return Err(GeoError::FocalPoint {
                r: self.r,
                kernel_dim: self.kernel_dim.max(1),
            });
        }
        let inv = self.d.try_inverse().ok_or(GeoError::FocalPoint {
            r: self.r,
            kernel_dim: self.kernel_dim.max(1),
        })?;
        Ok(-self.d_prime * inv)
    }

    /// Orthonormal basis (in ambient coordinates at `p`) of the kernel of the
    /// differential.
    pub fn kernel(&self) -> Vec<Vector> {
        let d = self.source.model.dim();
        let (_, kernel) = linalg::range_and_kernel(&self.phi, KERNEL_THRESHOLD);
        let frame = linalg::columns(
            &self.source.frame.iter().map(|(_, v)| v.clone()).collect::<Vec<_>>(),
            d,
        );
        kernel.iter().map(|k| &frame * k).collect()
    }

    /// Frame coefficients of a tangent vector at `p`.
    fn coefficients(&self, v: &Vector) -> Vector {
        Vector::from_iterator(
            self.source.frame.len(),
            self.source.frame.iter().map(|(_, e)| e.dot(v)),
        )
    }

    /// `Phi^r_* v = zeta_v(r)`.
    pub fn push_forward(&self, v: &Vector) -> Vector {
        &self.phi * self.coefficients(v)
    }
}

/// Differential of the map travelling the distance `r` along the normal
/// geodesics, for the non-Hopf point described by `data`.
pub fn transversal_map(data: &NonHopfData, r: f64) -> Result<FocalMapData> {
    if !r.is_finite() {
        return Err(GeoError::InvalidInput("r must be finite".into()));
    }
    let source = data.realize();
    let d = source.model.dim();
    let mut values = Vec::with_capacity(d - 1);
    let mut derivs = Vec::with_capacity(d - 1);
    for (i, v) in &source.frame {
        let sol = JacobiSolution::closed_form(data.lambda[*i], v, &source.j_xi, r);
        values.push(sol.value);
        derivs.push(sol.derivative);
    }
    let phi = linalg::columns(&values, d);
    let phi_prime = linalg::columns(&derivs, d);

    let (b1, b2) = (data.hopf.b1, data.hopf.b2);
    let k1 = JacobiCoefficients::at(data.lambda[0], r);
    let k2 = JacobiCoefficients::at(data.lambda[1], r);
    let dmat = Matrix2::new(
        k1.f + b1 * b1 * k1.g,
        b1 * b2 * k1.g,
        b1 * b2 * k2.g,
        k2.f + b2 * b2 * k2.g,
    );
    let dprime = Matrix2::new(
        k1.df + b1 * b1 * k1.dg,
        b1 * b2 * k1.dg,
        b1 * b2 * k2.dg,
        k2.df + b2 * b2 * k2.dg,
    );

    let singular_values = linalg::singular_values(&phi);
    let kernel_dim = singular_values.iter().filter(|s| **s <= KERNEL_THRESHOLD).count();
    let rank = singular_values.len() - kernel_dim;
    let gap_ok = singular_values
        .iter()
        .all(|s| *s <= KERNEL_THRESHOLD || *s >= SPECTRAL_GAP);
    let mut focal = FocalMapData {
        r,
        d: dmat,
        d_prime: dprime,
        phi,
        phi_prime,
        eta: source.xi.clone(),
        source,
        singular_values,
        kernel_dim,
        rank,
        image_codim: d - rank,
        gap_ok,
        image_spectrum: Vec::new(),
    };
    focal.image_spectrum = image_shape_operator(&focal).spectrum;
    Ok(focal)
}

/// Shape operator of the image of the travelling map with respect to
/// `eta^r`, from `S(Phi_* v) = -(zeta_v'(r))^T`.
#[derive(Debug, Clone)]
pub struct ImageShape {
    /// Orthonormal basis of the image tangent space.
    pub tangent: Vec<Vector>,
    /// Ambient matrix of the shape operator, zero on the normal space.
    pub shape: Matrix,
    pub spectrum: Vec<(f64, usize)>,
    /// Block on `B_{u_1}(r), B_{u_2}(r)`.
    pub u_block: Matrix2<f64>,
    /// `|S - S^T|` before symmetrization.
    pub asymmetry: f64,
}

impl ImageShape {
    /// `S(Phi_* v)`, failing for directions in the kernel.
    pub fn apply(&self, focal: &FocalMapData, v: &Vector) -> Result<Vector> {
        let image = focal.push_forward(v);
        if image.norm() <= KERNEL_THRESHOLD * v.norm().max(1.0) {
            return Err(GeoError::FocalPoint {
                r: focal.r,
                kernel_dim: focal.kernel_dim,
            });
        }
        Ok(&self.shape * image)
    }
}

pub fn image_shape_operator(focal: &FocalMapData) -> ImageShape {
    let d = focal.source.model.dim();
    let (range, _) = linalg::range_and_kernel(&focal.phi, KERNEL_THRESHOLD);
    let p = linalg::projector(&range, d);
    let pinv = linalg::pseudo_inverse(&focal.phi, KERNEL_THRESHOLD);
    let raw = -(&p * &focal.phi_prime * pinv * &p);
    let asymmetry = linalg::max_abs(&(&raw - raw.transpose()));
    let shape = (&raw + raw.transpose()) * 0.5;
    let q = linalg::columns(&range, d);
    let (values, _) = linalg::sorted_eigen(&(q.transpose() * &shape * &q));
    let spectrum = linalg::cluster(&values, MERGE_GAP);
    let (u1, u2) = (&focal.source.u1, &focal.source.u2);
    let u_block = Matrix2::new(
        u1.dot(&(&shape * u1)),
        u1.dot(&(&shape * u2)),
        u2.dot(&(&shape * u1)),
        u2.dot(&(&shape * u2)),
    );
    ImageShape {
        tangent: range,
        shape,
        spectrum,
        u_block,
        asymmetry,
    }
}
