//! Closed-form arithmetic on 2x2 Hermitian matrices.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

/// Hermitian matrix `[[a, re + i·im], [re − i·im, d]]`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Herm2 {
    pub a: f64,
    pub d: f64,
    pub re: f64,
    pub im: f64,
}

/// Eigen-decomposition of a [`Herm2`]; `vectors[k]` belongs to `values[k]`, ascending.
#[derive(Clone, Copy, Debug)]
pub struct Eigen2 {
    pub values: [f64; 2],
    pub vectors: [[Complex64; 2]; 2],
}

impl Herm2 {
    pub const ZERO: Herm2 = Herm2 { a: 0.0, d: 0.0, re: 0.0, im: 0.0 };
    pub const IDENTITY: Herm2 = Herm2 { a: 1.0, d: 1.0, re: 0.0, im: 0.0 };

    pub fn new(a: f64, d: f64, off: Complex64) -> Self {
        Herm2 { a, d, re: off.re, im: off.im }
    }

    pub fn diag(a: f64, d: f64) -> Self {
        Herm2 { a, d, re: 0.0, im: 0.0 }
    }

    pub fn scaled_identity(s: f64) -> Self {
        Herm2::diag(s, s)
    }

    /// Projector `|v⟩⟨v|` (not normalized).
    pub fn outer(v: [Complex64; 2]) -> Self {
        let off = v[0] * v[1].conj();
        Herm2::new(v[0].norm_sqr(), v[1].norm_sqr(), off)
    }

    /// Builds from a full complex matrix, keeping the Hermitian part.
    pub fn from_complex(m: [[Complex64; 2]; 2]) -> Self {
        let off = (m[0][1] + m[1][0].conj()) * 0.5;
        Herm2::new(m[0][0].re, m[1][1].re, off)
    }

    pub fn off(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    pub fn to_complex(&self) -> [[Complex64; 2]; 2] {
        [
            [Complex64::new(self.a, 0.0), self.off()],
            [self.off().conj(), Complex64::new(self.d, 0.0)],
        ]
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.re * self.re - self.im * self.im
    }

    /// `tr(self · other)`, which is real for Hermitian arguments.
    pub fn dot(&self, other: &Herm2) -> f64 {
        self.a * other.a + self.d * other.d + 2.0 * (self.re * other.re + self.im * other.im)
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn max_abs(&self) -> f64 {
        self.a.abs().max(self.d.abs()).max(self.re.abs()).max(self.im.abs())
    }

    pub fn eigenvalues(&self) -> [f64; 2] {
        let mean = 0.5 * (self.a + self.d);
        let half = 0.5 * (self.a - self.d);
        let r = (half * half + self.re * self.re + self.im * self.im).sqrt();
        [mean - r, mean + r]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues()[1]
    }

    /// Operator norm: largest eigenvalue magnitude.
    pub fn norm_inf(&self) -> f64 {
        let [l0, l1] = self.eigenvalues();
        l0.abs().max(l1.abs())
    }

    pub fn eigen(&self) -> Eigen2 {
        let values = self.eigenvalues();
        let half = 0.5 * (self.a - self.d);
        let off = self.off();
        let r = values[1] - 0.5 * (self.a + self.d);
        if off.norm() <= 1e-300 {
            let e0 = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
            let e1 = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
            return if self.a <= self.d {
                Eigen2 { values, vectors: [e0, e1] }
            } else {
                Eigen2 { values, vectors: [e1, e0] }
            };
        }
        // Upper eigenvector is (off, r − half) or (r + half, conj(off)); pick the better conditioned.
        let upper = if half >= 0.0 {
            [Complex64::new(r + half, 0.0), off.conj()]
        } else {
            [off, Complex64::new(r - half, 0.0)]
        };
        let n = (upper[0].norm_sqr() + upper[1].norm_sqr()).sqrt();
        let u = [upper[0] / n, upper[1] / n];
        let lower = [-u[1].conj(), u[0].conj()];
        Eigen2 { values, vectors: [lower, u] }
    }

    /// Spectral map `f(self)`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Herm2 {
        let e = self.eigen();
        let mut out = Herm2::ZERO;
        for k in 0..2 {
            out += Herm2::outer(e.vectors[k]) * f(e.values[k]);
        }
        out
    }

    /// Positive part (nearest PSD matrix in Frobenius norm).
    pub fn positive_part(&self) -> Herm2 {
        psd_project_2x2(self)
    }

    /// Negative part `(|H| − H)/2`, itself PSD.
    pub fn negative_part(&self) -> Herm2 {
        psd_project_2x2(&-*self)
    }

    pub fn inverse(&self) -> Option<Herm2> {
        let det = self.det();
        if det.abs() < 1e-300 {
            return None;
        }
        Some(Herm2 { a: self.d / det, d: self.a / det, re: -self.re / det, im: -self.im / det })
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        self.min_eigenvalue() >= -tol
    }

    /// Conjugation `U H U†`.
    pub fn conjugate_by(&self, u: &Mat2) -> Herm2 {
        Herm2::from_complex(u.mul(&Mat2::from(*self)).mul(&u.adjoint()).0)
    }
}

/// Closed-form Frobenius projection onto the PSD cone.
pub fn psd_project_2x2(h: &Herm2) -> Herm2 {
    let [l0, l1] = h.eigenvalues();
    if l0 >= 0.0 {
        return *h;
    }
    if l1 <= 0.0 {
        return Herm2::ZERO;
    }
    // One negative eigenvalue: keep λ₁ P₁ with P₁ = (H − λ₀)/(λ₁ − λ₀).
    let s = l1 / (l1 - l0);
    (*h - Herm2::scaled_identity(l0)) * s
}

/// Largest step `α ≤ cap` with `x + α·dx` PSD, for PSD `x` (exact root of the determinant quadratic).
pub fn max_psd_step(x: &Herm2, dx: &Herm2, cap: f64) -> f64 {
    let c0 = x.det();
    let c1 = x.a * dx.d + x.d * dx.a - 2.0 * (x.re * dx.re + x.im * dx.im);
    let c2 = dx.det();
    let tr0 = x.trace();
    let tr1 = dx.trace();
    let mut best = cap;
    let mut consider = |t: f64| {
        if t > 0.0 && t < best {
            best = t;
        }
    };
    if c2.abs() < 1e-300 {
        if c1 < 0.0 {
            consider(-c0 / c1);
        }
    } else {
        let disc = c1 * c1 - 4.0 * c2 * c0;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            let q = -0.5 * (c1 + c1.signum() * sq);
            if q != 0.0 {
                consider(q / c2);
                consider(c0 / q);
            } else {
                consider(0.0);
            }
        }
    }
    if tr1 < 0.0 {
        consider(-tr0 / tr1);
    }
    best
}

impl Add for Herm2 {
    type Output = Herm2;
    fn add(self, o: Herm2) -> Herm2 {
        Herm2 { a: self.a + o.a, d: self.d + o.d, re: self.re + o.re, im: self.im + o.im }
    }
}

impl Sub for Herm2 {
    type Output = Herm2;
    fn sub(self, o: Herm2) -> Herm2 {
        Herm2 { a: self.a - o.a, d: self.d - o.d, re: self.re - o.re, im: self.im - o.im }
    }
}

impl Neg for Herm2 {
    type Output = Herm2;
    fn neg(self) -> Herm2 {
        Herm2 { a: -self.a, d: -self.d, re: -self.re, im: -self.im }
    }
}

impl Mul<f64> for Herm2 {
    type Output = Herm2;
    fn mul(self, s: f64) -> Herm2 {
        Herm2 { a: self.a * s, d: self.d * s, re: self.re * s, im: self.im * s }
    }
}

impl AddAssign for Herm2 {
    fn add_assign(&mut self, o: Herm2) {
        *self = *self + o;
    }
}

impl SubAssign for Herm2 {
    fn sub_assign(&mut self, o: Herm2) {
        *self = *self - o;
    }
}

/// General complex 2x2 matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

impl Mat2 {
    pub fn identity() -> Self {
        let o = Complex64::new(1.0, 0.0);
        let z = Complex64::new(0.0, 0.0);
        Mat2([[o, z], [z, o]])
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        let a = &self.0;
        let b = &o.0;
        let mut c = [[Complex64::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Mat2(c)
    }

    pub fn adjoint(&self) -> Mat2 {
        let a = &self.0;
        Mat2([[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]])
    }

    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1]
    }

    /// Hermitian part `(M + M†)/2`.
    pub fn hermitian_part(&self) -> Herm2 {
        Herm2::from_complex(self.0)
    }
}

impl From<Herm2> for Mat2 {
    fn from(h: Herm2) -> Mat2 {
        Mat2(h.to_complex())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(a: f64, d: f64, re: f64, im: f64) -> Herm2 {
        Herm2 { a, d, re, im }
    }

    fn close(x: &Herm2, y: &Herm2, tol: f64) -> bool {
        (*x - *y).max_abs() < tol
    }

    #[test]
    fn projection_examples() {
        let p = h(0.7, 0.3, 0.1, -0.2);
        assert_eq!(psd_project_2x2(&p), p);
        assert!(close(&psd_project_2x2(&Herm2::diag(1.0, -1.0)), &Herm2::diag(1.0, 0.0), 1e-15));
        assert_eq!(psd_project_2x2(&Herm2::diag(-1.0, -2.0)), Herm2::ZERO);
    }

    #[test]
    fn eigenvectors_reconstruct() {
        for m in [h(1.0, -2.0, 0.3, 0.4), h(-0.5, 2.0, -1.0, 0.0), h(0.2, 0.2, 0.0, 1e-3), h(3.0, 1.0, 0.0, 0.0)] {
            let back = m.map_spectrum(|x| x);
            assert!(close(&m, &back, 1e-12), "{m:?} vs {back:?}");
        }
    }

    #[test]
    fn negative_part_of_diagonal() {
        let v = Herm2::diag(-0.3, 0.0);
        assert!((v.negative_part().norm_inf() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn step_length_hits_boundary() {
        let x = Herm2::IDENTITY;
        let dx = Herm2::diag(-2.0, 1.0);
        assert!((max_psd_step(&x, &dx, 10.0) - 0.5).abs() < 1e-15);
        assert_eq!(max_psd_step(&x, &Herm2::IDENTITY, 10.0), 10.0);
        let dx = h(0.0, 0.0, 1.0, 1.0);
        let t = max_psd_step(&x, &dx, 10.0);
        assert!((x + dx * t).min_eigenvalue().abs() < 1e-12);
    }
}
