//! Piecewise-constant fields on uniform rectangular grids.
//!
//! Cell `(i, j)` covers `[i dx, (i+1) dx) x [j dy, (j+1) dy)` and is stored at
//! `data[i * ny + j]`, so `i` (the x axis) is the slow index.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::SparseOp;

/// Geometry of a uniform grid, without values.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridShape {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
}

impl GridShape {
    pub fn new(nx: usize, ny: usize, dx: f64, dy: f64) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidGrid(format!("empty grid {nx}x{ny}")));
        }
        if !(dx.is_finite() && dx > 0.0 && dy.is_finite() && dy > 0.0) {
            return Err(Error::InvalidGrid(format!("non-positive spacing ({dx}, {dy})")));
        }
        Ok(Self { nx, ny, dx, dy })
    }

    /// `n x n` grid covering the unit square.
    pub fn unit_square(n: usize) -> Result<Self> {
        Self::new(n, n, 1.0 / n as f64, 1.0 / n as f64)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_area(&self) -> f64 {
        self.dx * self.dy
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.ny + j
    }

    pub fn center(&self, i: usize, j: usize) -> (f64, f64) {
        ((i as f64 + 0.5) * self.dx, (j as f64 + 0.5) * self.dy)
    }

    /// Diameter of the covered rectangle.
    pub fn diameter(&self) -> f64 {
        (self.nx as f64 * self.dx).hypot(self.ny as f64 * self.dy)
    }

    fn same_as(&self, other: &GridShape) -> bool {
        self.nx == other.nx
            && self.ny == other.ny
            && rel_close(self.dx, other.dx)
            && rel_close(self.dy, other.dy)
    }

    pub fn check_same(&self, other: &GridShape) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "{}x{} (dx {}, dy {}) vs {}x{} (dx {}, dy {})",
                self.nx, self.ny, self.dx, self.dy, other.nx, other.ny, other.dx, other.dy
            )))
        }
    }
}

fn rel_close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

#[derive(Deserialize)]
struct RawGridFn {
    nx: usize,
    ny: usize,
    dx: f64,
    dy: f64,
    data: Vec<f64>,
}

/// Values on a uniform grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGridFn")]
pub struct GridFn {
    nx: usize,
    ny: usize,
    dx: f64,
    dy: f64,
    data: Vec<f64>,
}

impl TryFrom<RawGridFn> for GridFn {
    type Error = Error;

    fn try_from(r: RawGridFn) -> Result<Self> {
        GridFn::new(GridShape::new(r.nx, r.ny, r.dx, r.dy)?, r.data)
    }
}

impl GridFn {
    pub fn new(shape: GridShape, data: Vec<f64>) -> Result<Self> {
        if data.len() != shape.len() {
            return Err(Error::InvalidGrid(format!(
                "{} values for a {}x{} grid",
                data.len(),
                shape.nx,
                shape.ny
            )));
        }
        if let Some(k) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid(format!("non-finite value at cell {k}")));
        }
        Ok(Self { nx: shape.nx, ny: shape.ny, dx: shape.dx, dy: shape.dy, data })
    }

    pub fn zeros(shape: GridShape) -> Self {
        Self::constant(shape, 0.0)
    }

    pub fn constant(shape: GridShape, value: f64) -> Self {
        Self { nx: shape.nx, ny: shape.ny, dx: shape.dx, dy: shape.dy, data: vec![value; shape.len()] }
    }

    /// Samples `f` at cell centres.
    pub fn from_fn(shape: GridShape, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(shape.len());
        for i in 0..shape.nx {
            for j in 0..shape.ny {
                let (x, y) = shape.center(i, j);
                data.push(f(x, y));
            }
        }
        Self::new(shape, data)
    }

    pub fn shape(&self) -> GridShape {
        GridShape { nx: self.nx, ny: self.ny, dx: self.dx, dy: self.dy }
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dy(&self) -> f64 {
        self.dy
    }

    pub fn cell_area(&self) -> f64 {
        self.dx * self.dy
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.ny + j]
    }

    /// Same grid, new values.
    pub fn with_data(&self, data: Vec<f64>) -> Result<Self> {
        Self::new(self.shape(), data)
    }

    pub fn check_same_grid(&self, other: &GridFn) -> Result<()> {
        self.shape().check_same(&other.shape())
    }

    /// Integral over the domain.
    pub fn integral(&self) -> f64 {
        self.data.iter().sum::<f64>() * self.cell_area()
    }

    /// Mean value; all cells have equal area.
    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { data: self.data.iter().map(|&v| f(v)).collect(), ..self.clone() }
    }

    pub fn zip_with(&self, other: &GridFn, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_same_grid(other)?;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self { data, ..self.clone() })
    }

    pub fn sub(&self, other: &GridFn) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &GridFn) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }
}

#[derive(Deserialize)]
struct RawFluxField {
    nx: usize,
    ny: usize,
    dx: f64,
    dy: f64,
    mx: Vec<f64>,
    my: Vec<f64>,
}

/// Face-centred flux on a staggered grid.
///
/// `mx[i * ny + j]` is the x-flux (per unit face length) through the left face of
/// cell `(i, j)`, `my[i * ny + j]` the y-flux through its bottom face. Faces on the
/// outer boundary carry no flux, so `mx` vanishes for `i = 0` and `my` for `j = 0`;
/// right and top boundary faces are implicit zeros.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFluxField")]
pub struct FluxField {
    nx: usize,
    ny: usize,
    dx: f64,
    dy: f64,
    mx: Vec<f64>,
    my: Vec<f64>,
}

impl TryFrom<RawFluxField> for FluxField {
    type Error = Error;

    fn try_from(r: RawFluxField) -> Result<Self> {
        FluxField::new(GridShape::new(r.nx, r.ny, r.dx, r.dy)?, r.mx, r.my)
    }
}

impl FluxField {
    pub fn new(shape: GridShape, mx: Vec<f64>, my: Vec<f64>) -> Result<Self> {
        let n = shape.len();
        if mx.len() != n || my.len() != n {
            return Err(Error::InvalidGrid(format!(
                "flux components of length {} and {} for {n} cells",
                mx.len(),
                my.len()
            )));
        }
        if mx.iter().chain(&my).any(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid("non-finite flux".into()));
        }
        let leaks_x = (0..shape.ny).any(|j| mx[j] != 0.0);
        let leaks_y = (0..shape.nx).any(|i| my[i * shape.ny] != 0.0);
        if leaks_x || leaks_y {
            return Err(Error::InvalidGrid("non-zero flux through the boundary".into()));
        }
        Ok(Self { nx: shape.nx, ny: shape.ny, dx: shape.dx, dy: shape.dy, mx, my })
    }

    pub fn zeros(shape: GridShape) -> Self {
        let n = shape.len();
        Self { nx: shape.nx, ny: shape.ny, dx: shape.dx, dy: shape.dy, mx: vec![0.0; n], my: vec![0.0; n] }
    }

    pub fn shape(&self) -> GridShape {
        GridShape { nx: self.nx, ny: self.ny, dx: self.dx, dy: self.dy }
    }

    pub fn mx(&self) -> &[f64] {
        &self.mx
    }

    pub fn my(&self) -> &[f64] {
        &self.my
    }

    /// Interleaved `[mx_0, my_0, mx_1, my_1, ...]`, the layout produced by
    /// [`discrete_gradient_matrix`].
    pub fn interleaved(&self) -> Vec<f64> {
        self.mx.iter().zip(&self.my).flat_map(|(&a, &b)| [a, b]).collect()
    }

    /// Total transport `sum over faces |m| * face length * cell spacing`.
    pub fn transport_cost(&self) -> f64 {
        let a = self.dx * self.dy;
        a * (self.mx.iter().map(|v| v.abs()).sum::<f64>() + self.my.iter().map(|v| v.abs()).sum::<f64>())
    }

    /// Cell-centred vector for plotting: averages of the two faces along each axis.
    pub fn cell_vectors(&self) -> (Vec<f64>, Vec<f64>) {
        let (nx, ny) = (self.nx, self.ny);
        let mut vx = vec![0.0; nx * ny];
        let mut vy = vec![0.0; nx * ny];
        for i in 0..nx {
            for j in 0..ny {
                let k = i * ny + j;
                let right = if i + 1 < nx { self.mx[k + ny] } else { 0.0 };
                let top = if j + 1 < ny { self.my[k + 1] } else { 0.0 };
                vx[k] = 0.5 * (self.mx[k] + right);
                vy[k] = 0.5 * (self.my[k] + top);
            }
        }
        (vx, vy)
    }
}

/// Splits `f` into positive and negative parts of `f - mean(f)`.
///
/// Returns `(mu, plus, minus)` with `f - mu = plus - minus` up to rounding; both parts carry the
/// same mass up to rounding.
pub fn mean_split(f: &GridFn) -> (f64, GridFn, GridFn) {
    // Second pass removes most of the rounding left in the mean, and
    // deviations at rounding level are treated as zero so that constant
    // fields split into two empty parts.
    let mu0 = f.mean();
    let dev = f.map(|v| v - mu0);
    let mu = mu0 + dev.mean();
    let scale = f.data().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = 16.0 * f64::EPSILON * scale;
    let cut = |d: f64| if d > tol { d } else { 0.0 };
    let plus = f.map(|v| cut(v - mu));
    let minus = f.map(|v| cut(mu - v));
    (mu, plus, minus)
}

/// Discrete divergence of a face flux, with zero flux beyond the grid.
pub fn divergence(m: &FluxField) -> GridFn {
    let (nx, ny) = (m.nx, m.ny);
    let mut out = vec![0.0; nx * ny];
    for i in 0..nx {
        for j in 0..ny {
            let k = i * ny + j;
            let right = if i + 1 < nx { m.mx[k + ny] } else { 0.0 };
            let top = if j + 1 < ny { m.my[k + 1] } else { 0.0 };
            out[k] = (right - m.mx[k]) / m.dx + (top - m.my[k]) / m.dy;
        }
    }
    GridFn { nx, ny, dx: m.dx, dy: m.dy, data: out }
}

/// Backward-difference gradient with `2 * nx * ny` interleaved rows.
///
/// Row `2k` holds `(v[i,j] - v[i-1,j]) / dx` and row `2k + 1` holds
/// `(v[i,j] - v[i,j-1]) / dy` for cell `k = i * ny + j`. Rows whose stencil would
/// leave the grid are empty, which makes the operator the negative adjoint of
/// [`divergence`].
pub fn discrete_gradient_matrix(shape: GridShape) -> SparseOp {
    let (nx, ny) = (shape.nx, shape.ny);
    let mut t = Vec::with_capacity(4 * nx * ny);
    for i in 0..nx {
        for j in 0..ny {
            let k = i * ny + j;
            if i > 0 {
                t.push((2 * k, k, 1.0 / shape.dx));
                t.push((2 * k, k - ny, -1.0 / shape.dx));
            }
            if j > 0 {
                t.push((2 * k + 1, k, 1.0 / shape.dy));
                t.push((2 * k + 1, k - 1, -1.0 / shape.dy));
            }
        }
    }
    SparseOp::from_triplets(2 * nx * ny, nx * ny, t).expect("indices are in range by construction")
}

/// `||z||_1 = dx dy sum |z|`.
pub fn norm_l1(z: &GridFn) -> f64 {
    z.cell_area() * z.data.iter().map(|v| v.abs()).sum::<f64>()
}

/// `||z||_2 = sqrt(dx dy sum z^2)`.
pub fn norm_l2(z: &GridFn) -> f64 {
    (z.cell_area() * z.data.iter().map(|v| v * v).sum::<f64>()).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape(nx: usize, ny: usize) -> GridShape {
        GridShape::new(nx, ny, 1.0 / nx as f64, 0.5 / ny as f64).unwrap()
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(GridShape::new(0, 3, 0.1, 0.1).is_err());
        assert!(GridShape::new(2, 3, -0.1, 0.1).is_err());
        assert!(GridFn::new(shape(2, 2), vec![0.0; 3]).is_err());
        assert!(GridFn::new(shape(1, 1), vec![f64::NAN]).is_err());
    }

    #[test]
    fn indexing_is_x_major() {
        let g = GridFn::from_fn(shape(3, 2), |x, y| 10.0 * x + y).unwrap();
        let (x, y) = g.shape().center(2, 1);
        assert_eq!(g.get(2, 1), 10.0 * x + y);
        assert_eq!(g.data()[2 * 2 + 1], g.get(2, 1));
    }

    #[test]
    fn mean_split_of_constant_is_empty() {
        let g = GridFn::constant(shape(4, 4), 3.5);
        let (mu, p, m) = mean_split(&g);
        assert_eq!(mu, 3.5);
        assert!(p.data().iter().chain(m.data()).all(|&v| v == 0.0));
    }

    #[test]
    fn mean_split_balances_mass() {
        let g = GridFn::new(shape(2, 2), vec![1.0, 2.0, 3.0, 6.0]).unwrap();
        let (mu, p, m) = mean_split(&g);
        assert_eq!(mu, 3.0);
        assert_eq!(p.data(), &[0.0, 0.0, 0.0, 3.0]);
        assert_eq!(m.data(), &[2.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn norms_of_constant() {
        let g = GridFn::constant(GridShape::unit_square(8).unwrap(), -2.0);
        assert!((norm_l1(&g) - 2.0).abs() < 1e-14);
        assert!((norm_l2(&g) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn gradient_of_linear_ramp() {
        let s = shape(5, 4);
        let v = GridFn::from_fn(s, |x, y| 3.0 * x - 2.0 * y).unwrap();
        let c = discrete_gradient_matrix(s);
        let g = c.apply(v.data()).unwrap();
        for i in 0..5 {
            for j in 0..4 {
                let k = s.index(i, j);
                let ex = if i > 0 { 3.0 } else { 0.0 };
                let ey = if j > 0 { -2.0 } else { 0.0 };
                assert!((g[2 * k] - ex).abs() < 1e-12);
                assert!((g[2 * k + 1] - ey).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gradient_is_negative_adjoint_of_divergence() {
        let s = shape(4, 3);
        let u: Vec<f64> = (0..12).map(|k| ((k * 7) % 5) as f64 - 1.3).collect();
        let mut mx: Vec<f64> = (0..12).map(|k| ((k * 3) % 7) as f64 * 0.4 - 1.0).collect();
        let mut my: Vec<f64> = (0..12).map(|k| ((k * 5) % 4) as f64 * 0.7 - 0.9).collect();
        for j in 0..3 {
            mx[j] = 0.0;
        }
        for i in 0..4 {
            my[i * 3] = 0.0;
        }
        let m = FluxField::new(s, mx, my).unwrap();
        let cu = discrete_gradient_matrix(s).apply(&u).unwrap();
        let lhs: f64 = cu.iter().zip(m.interleaved()).map(|(a, b)| a * b).sum();
        let div = divergence(&m);
        let rhs: f64 = -u.iter().zip(div.data()).map(|(a, b)| a * b).sum::<f64>();
        assert!((lhs - rhs).abs() < 1e-12 * lhs.abs().max(1.0));
    }

    #[test]
    fn flux_rejects_boundary_leak() {
        let s = shape(2, 2);
        assert!(FluxField::new(s, vec![1.0, 0.0, 0.0, 0.0], vec![0.0; 4]).is_err());
        assert!(FluxField::new(s, vec![0.0; 4], vec![0.0, 0.0, 1.0, 0.0]).is_err());
        assert!(FluxField::new(s, vec![0.0, 0.0, 1.0, 0.0], vec![0.0, 1.0, 0.0, 0.0]).is_ok());
    }

    #[test]
    fn json_round_trip_validates() {
        let g = GridFn::from_fn(shape(2, 3), |x, y| x * y).unwrap();
        let s = serde_json::to_string(&g).unwrap();
        let back: GridFn = serde_json::from_str(&s).unwrap();
        assert_eq!(g, back);
        let bad = r#"{"nx":2,"ny":2,"dx":0.5,"dy":0.5,"data":[1,2,3]}"#;
        assert!(serde_json::from_str::<GridFn>(bad).is_err());
    }
}
