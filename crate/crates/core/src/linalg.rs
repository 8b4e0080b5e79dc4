//! Small dense complex linear algebra helpers on top of `nalgebra`.

use crate::prelude::*;

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn inverse(m: &CMat) -> Option<CMat> {
    if m.nrows() != m.ncols() {
        return None;
    }
    let inv = m.clone().lu().try_inverse()?;
    if inv.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Some(inv)
    } else {
        None
    }
}

/// `a · b⁻¹`, computed by solving `bᴴ xᴴ = aᴴ`.
pub fn right_divide(a: &CMat, b: &CMat) -> Option<CMat> {
    let lu = b.adjoint().lu();
    let x = lu.solve(&a.adjoint())?;
    Some(x.adjoint())
}

pub fn singular_values(m: &CMat) -> Vec<f64> {
    m.clone().svd(false, false).singular_values.iter().copied().collect()
}

pub fn min_singular_value(m: &CMat) -> f64 {
    singular_values(m).into_iter().fold(f64::INFINITY, f64::min)
}

pub fn spectral_norm(m: &CMat) -> f64 {
    singular_values(m).into_iter().fold(0.0, f64::max)
}

/// 2-norm condition number; `∞` for singular input.
pub fn condition_number(m: &CMat) -> f64 {
    let s = singular_values(m);
    let max = s.iter().copied().fold(0.0, f64::max);
    let min = s.iter().copied().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

pub fn commutator_norm(a: &CMat, b: &CMat) -> f64 {
    spectral_norm(&(a * b - b * a))
}

/// `‖u uᴴ − I‖₂`.
pub fn unitarity_defect(u: &CMat) -> f64 {
    let n = u.nrows();
    spectral_norm(&(u * u.adjoint() - identity(n)))
}

/// Block diagonal `diag(a, Id_extra)`.
pub fn stabilize(a: &CMat, extra: usize) -> CMat {
    let n = a.nrows();
    let mut out = CMat::zeros(n + extra, n + extra);
    out.view_mut((0, 0), (n, n)).copy_from(a);
    for i in 0..extra {
        out[(n + i, n + i)] = ONE;
    }
    out
}

pub fn real_determinant(rows: usize, entries: Vec<f64>) -> f64 {
    DMatrix::from_row_slice(rows, rows, &entries).determinant()
}

pub fn is_finite(m: &CMat) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Compensated (Neumaier) accumulator for complex sums.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    re: f64,
    re_c: f64,
    im: f64,
    im_c: f64,
    abs: f64,
}

fn neumaier(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}

impl CompensatedSum {
    pub fn add(&mut self, z: C64) {
        neumaier(&mut self.re, &mut self.re_c, z.re);
        neumaier(&mut self.im, &mut self.im_c, z.im);
        self.abs += z.norm();
    }

    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.value());
        // `add` counted |other| once more; replace it by the true absolute mass.
        self.abs += other.abs - other.value().norm();
    }

    pub fn value(&self) -> C64 {
        C64::new(self.re + self.re_c, self.im + self.im_c)
    }

    /// Σ|terms|, used for round-off floors.
    pub fn absolute_mass(&self) -> f64 {
        self.abs
    }
}
