//! Ambient geometry of complex hyperbolic space at a point.
//!
//! Vectors live in the J-adapted orthonormal basis where
//! `J e_{2i} = e_{2i+1}` and `J e_{2i+1} = -e_{2i}`. The curvature tensor
//! uses the sign convention `R_{XY} = [nabla_X, nabla_Y] - nabla_{[X,Y]}`.

use crate::error::{GeoError, Result};
use crate::{Matrix, Vector};

/// Tolerance for the Gram determinant below which a plane is degenerate.
pub const DEGENERATE_PLANE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CurvatureModel {
    n: usize,
}

impl CurvatureModel {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(GeoError::InvalidInput(format!(
                "complex dimension must be at least 2, got {n}"
            )));
        }
        Ok(Self { n })
    }

    /// Complex dimension.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Real dimension `2n`.
    pub fn dim(&self) -> usize {
        2 * self.n
    }

    fn check(&self, v: &Vector) -> Result<()> {
        GeoError::check_dim(self.dim(), v.len())
    }

    /// Basis vector `e_i`.
    pub fn basis(&self, i: usize) -> Vector {
        Vector::from_fn(self.dim(), |r, _| if r == i { 1.0 } else { 0.0 })
    }

    pub fn j(&self, v: &Vector) -> Vector {
        let mut out = Vector::zeros(v.len());
        for i in 0..v.len() / 2 {
            out[2 * i + 1] = v[2 * i];
            out[2 * i] = -v[2 * i + 1];
        }
        out
    }

    pub fn j_matrix(&self) -> Matrix {
        let d = self.dim();
        let mut m = Matrix::zeros(d, d);
        for i in 0..self.n {
            m[(2 * i + 1, 2 * i)] = 1.0;
            m[(2 * i, 2 * i + 1)] = -1.0;
        }
        m
    }

    /// `R(X,Y)Z` for holomorphic sectional curvature `-1`.
    pub fn curvature(&self, x: &Vector, y: &Vector, z: &Vector) -> Result<Vector> {
        self.check(x)?;
        self.check(y)?;
        self.check(z)?;
        Ok(self.curvature_unchecked(x, y, z))
    }

    pub(crate) fn curvature_unchecked(&self, x: &Vector, y: &Vector, z: &Vector) -> Vector {
        let jx = self.j(x);
        let jy = self.j(y);
        let jz = self.j(z);
        let inner = y.dot(z) * x - x.dot(z) * y + jy.dot(z) * &jx - jx.dot(z) * &jy
            - 2.0 * jx.dot(y) * &jz;
        inner * -0.25
    }

    /// `<R(X,Y)Z, W>`.
    pub fn curvature_form(&self, x: &Vector, y: &Vector, z: &Vector, w: &Vector) -> Result<f64> {
        self.check(w)?;
        Ok(self.curvature(x, y, z)?.dot(w))
    }

    pub fn sectional_curvature(&self, x: &Vector, y: &Vector) -> Result<f64> {
        self.check(x)?;
        self.check(y)?;
        let gram = x.norm_squared() * y.norm_squared() - x.dot(y).powi(2);
        if gram < DEGENERATE_PLANE {
            return Err(GeoError::Degenerate(format!(
                "plane spanned by the vectors has Gram determinant {gram:e}"
            )));
        }
        Ok(self.curvature_unchecked(x, y, y).dot(x) / gram)
    }

    /// Matrix of the Jacobi operator `X -> R(X, xi) xi`.
    pub fn jacobi_operator(&self, xi: &Vector) -> Result<Matrix> {
        self.check(xi)?;
        let d = self.dim();
        let cols: Vec<Vector> = (0..d)
            .map(|a| self.curvature_unchecked(&self.basis(a), xi, xi))
            .collect();
        Ok(Matrix::from_columns(&cols))
    }

    /// `|R_{XYZW} - (R^M_{XYZW} - <SY,Z><SX,W> + <SX,Z><SY,W>)|` where `R^M` is
    /// the intrinsic curvature carried by the connection sample.
    pub fn gauss_residual(
        &self,
        data: &HypersurfacePointData,
        x: &Vector,
        y: &Vector,
        z: &Vector,
        w: &Vector,
    ) -> Result<f64> {
        let conn = data.connection()?;
        for v in [x, y, z, w] {
            self.check(v)?;
        }
        let s = &data.shape;
        let sx = s * x;
        let sy = s * y;
        let intrinsic = conn.curvature(x, y, z).dot(w);
        let lhs = self.curvature_unchecked(x, y, z).dot(w);
        let rhs = intrinsic - sy.dot(z) * sx.dot(w) + sx.dot(z) * sy.dot(w);
        Ok((lhs - rhs).abs())
    }

    /// `|R_{XYZ xi} - <(nabla_X S)Y - (nabla_Y S)X, Z>|`.
    pub fn codazzi_residual(
        &self,
        data: &HypersurfacePointData,
        x: &Vector,
        y: &Vector,
        z: &Vector,
    ) -> Result<f64> {
        let conn = data.connection()?;
        for v in [x, y, z] {
            self.check(v)?;
        }
        let lhs = self.curvature_unchecked(x, y, z).dot(&data.normal);
        let rhs = (conn.shape_derivative(&data.shape, x, y)
            - conn.shape_derivative(&data.shape, y, x))
        .dot(z);
        Ok((lhs - rhs).abs())
    }

    /// Codazzi equation specialised to principal directions
    /// `X in T_{li}`, `Y in T_{lj}`, `Z in T_{lk}`:
    /// `R_{XYZ xi} = (lj - lk)<nabla_X Y, Z> - (li - lk)<nabla_Y X, Z>`.
    #[allow(clippy::too_many_arguments)]
    pub fn three_eigen_residual(
        &self,
        data: &HypersurfacePointData,
        (x, li): (&Vector, f64),
        (y, lj): (&Vector, f64),
        (z, lk): (&Vector, f64),
    ) -> Result<f64> {
        let conn = data.connection()?;
        let lhs = self.curvature(x, y, z)?.dot(&data.normal);
        let rhs = (lj - lk) * conn.nabla(x, y).dot(z) - (li - lk) * conn.nabla(y, x).dot(z);
        Ok((lhs - rhs).abs())
    }

    /// Two-eigenvalue form for `X, Y in T_{li}`, `Z in T_{lj}`:
    /// `4(lj - li)<nabla_X Y, Z> = <JY,Z><X,J xi> + <JX,Y><Z,J xi> + 2<JX,Z><Y,J xi>`.
    pub fn two_eigen_residual(
        &self,
        data: &HypersurfacePointData,
        (x, y, li): (&Vector, &Vector, f64),
        (z, lj): (&Vector, f64),
    ) -> Result<f64> {
        let conn = data.connection()?;
        for v in [x, y, z] {
            self.check(v)?;
        }
        let jxi = self.j(&data.normal);
        let jx = self.j(x);
        let jy = self.j(y);
        let lhs = 4.0 * (lj - li) * conn.nabla(x, y).dot(z);
        let rhs = jy.dot(z) * x.dot(&jxi) + jx.dot(y) * z.dot(&jxi) + 2.0 * jx.dot(z) * y.dot(&jxi);
        Ok((lhs - rhs).abs())
    }
}

/// Levi-Civita data of a hypersurface on an orthonormal tangent frame whose
/// connection coefficients are constant (the case for left-invariant frames
/// on homogeneous hypersurfaces).
///
/// `gamma[(a * m + b) * m + c] = <nabla_{E_a} E_b, E_c>`.
#[derive(Debug, Clone)]
pub struct ConnectionSample {
    frame: Vec<Vector>,
    gamma: Vec<f64>,
}

impl ConnectionSample {
    pub fn new(frame: Vec<Vector>, gamma: Vec<f64>) -> Result<Self> {
        let m = frame.len();
        GeoError::check_dim(m * m * m, gamma.len())?;
        for (a, ea) in frame.iter().enumerate() {
            for (b, eb) in frame.iter().enumerate() {
                let expect = if a == b { 1.0 } else { 0.0 };
                if (ea.dot(eb) - expect).abs() > 1e-10 {
                    return Err(GeoError::Validation("connection frame is not orthonormal".into()));
                }
            }
        }
        Ok(Self { frame, gamma })
    }

    pub fn frame(&self) -> &[Vector] {
        &self.frame
    }

    fn m(&self) -> usize {
        self.frame.len()
    }

    fn gamma(&self, a: usize, b: usize, c: usize) -> f64 {
        let m = self.m();
        self.gamma[(a * m + b) * m + c]
    }

    fn coords(&self, v: &Vector) -> Vec<f64> {
        self.frame.iter().map(|e| e.dot(v)).collect()
    }

    fn ambient(&self, coeffs: &[f64]) -> Vector {
        let dim = self.frame.first().map_or(0, |e| e.len());
        self.frame
            .iter()
            .zip(coeffs)
            .fold(Vector::zeros(dim), |acc, (e, c)| acc + e * *c)
    }

    /// Frame coefficients of `nabla_X Y` where `Y` is extended with constant
    /// frame coefficients.
    fn nabla_coeffs(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let m = self.m();
        let mut out = vec![0.0; m];
        for (a, &xa) in x.iter().enumerate().take(m) {
            if xa == 0.0 {
                continue;
            }
            for (b, &yb) in y.iter().enumerate().take(m) {
                if yb == 0.0 {
                    continue;
                }
                for (c, o) in out.iter_mut().enumerate() {
                    *o += xa * yb * self.gamma(a, b, c);
                }
            }
        }
        out
    }

    /// `nabla_X Y` for `Y` extended with constant frame coefficients.
    pub fn nabla(&self, x: &Vector, y: &Vector) -> Vector {
        self.ambient(&self.nabla_coeffs(&self.coords(x), &self.coords(y)))
    }

    /// Intrinsic `R(X,Y)Z` of the hypersurface.
    pub fn curvature(&self, x: &Vector, y: &Vector, z: &Vector) -> Vector {
        let (x, y, z) = (self.coords(x), self.coords(y), self.coords(z));
        let m = self.m();
        let nyz = self.nabla_coeffs(&y, &z);
        let nxz = self.nabla_coeffs(&x, &z);
        let first = self.nabla_coeffs(&x, &nyz);
        let second = self.nabla_coeffs(&y, &nxz);
        let nxy = self.nabla_coeffs(&x, &y);
        let nyx = self.nabla_coeffs(&y, &x);
        let bracket: Vec<f64> = (0..m).map(|c| nxy[c] - nyx[c]).collect();
        let third = self.nabla_coeffs(&bracket, &z);
        let coeffs: Vec<f64> = (0..m).map(|c| first[c] - second[c] - third[c]).collect();
        self.ambient(&coeffs)
    }

    /// `(nabla_X S) Y` for a shape operator with constant frame coefficients.
    pub fn shape_derivative(&self, shape: &Matrix, x: &Vector, y: &Vector) -> Vector {
        let xc = self.coords(x);
        let yc = self.coords(y);
        let sy = self.coords(&(shape * self.ambient(&yc)));
        let nabla_sy = self.nabla_coeffs(&xc, &sy);
        let nabla_y = self.ambient(&self.nabla_coeffs(&xc, &yc));
        self.ambient(&nabla_sy) - shape * nabla_y
    }
}

/// Pointwise data of a real hypersurface: unit normal, shape operator as an
/// ambient matrix (symmetric, annihilating the normal), and optionally the
/// intrinsic connection on a tangent frame.
#[derive(Debug, Clone)]
pub struct HypersurfacePointData {
    pub normal: Vector,
    pub shape: Matrix,
    pub connection: Option<ConnectionSample>,
}

impl HypersurfacePointData {
    pub fn new(normal: Vector, shape: Matrix, connection: Option<ConnectionSample>) -> Result<Self> {
        GeoError::check_dim(normal.len(), shape.nrows())?;
        GeoError::check_dim(normal.len(), shape.ncols())?;
        if (normal.norm() - 1.0).abs() > 1e-12 {
            return Err(GeoError::Validation(format!(
                "normal has length {}, expected 1",
                normal.norm()
            )));
        }
        let asym = crate::linalg::max_abs(&(&shape - shape.transpose()));
        if asym > 1e-12 {
            return Err(GeoError::Validation(format!(
                "shape operator is not symmetric (deviation {asym:e})"
            )));
        }
        Ok(Self {
            normal,
            shape,
            connection,
        })
    }

    fn connection(&self) -> Result<&ConnectionSample> {
        self.connection.as_ref().ok_or_else(|| {
            GeoError::Unsupported("hypersurface data carries no connection sample".into())
        })
    }

    /// Projection of a vector onto the tangent space.
    pub fn tangent_part(&self, v: &Vector) -> Vector {
        v - &self.normal * self.normal.dot(v)
    }
}
