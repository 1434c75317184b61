//! Reference evaluator for 2×2 real matrices in 200-bit floating point
//! (about 60 significant digits). Matrix functions use the two-eigenvalue
//! interpolation formula `f(M) = f(λ₂) I + (f(λ₁) - f(λ₂)) / (λ₁ - λ₂) (M - λ₂ I)`,
//! which needs no eigenvectors and works for any 2×2 matrix with real spectrum.

#![allow(dead_code)]

use std::ops::{Add, Div, Mul, Neg, Sub};

use dashu_float::round::mode::HalfEven;
use dashu_float::{Context, FBig, Repr};

pub const BITS: usize = 200;

#[derive(Clone, Debug, PartialEq, PartialOrd)]
pub struct H(FBig<HalfEven>);

fn ctx() -> Context<HalfEven> {
    Context::new(BITS)
}

impl H {
    pub fn from_f64(x: f64) -> H {
        H(FBig::from_repr(Repr::try_from(x).expect("finite"), ctx()))
    }

    pub fn zero() -> H {
        H::from_f64(0.0)
    }

    pub fn one() -> H {
        H::from_f64(1.0)
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().value()
    }

    pub fn sqrt(&self) -> H {
        assert!(self.0 >= FBig::<HalfEven>::ZERO, "square root of a negative number");
        H(ctx().sqrt(self.0.repr()).value())
    }

    pub fn ln(&self) -> H {
        H(self.0.ln())
    }

    pub fn exp(&self) -> H {
        H(self.0.exp())
    }

    pub fn powf(&self, p: &H) -> H {
        (p * &self.ln()).exp()
    }

    pub fn abs(&self) -> H {
        if self.0 < FBig::<HalfEven>::ZERO {
            -self
        } else {
            self.clone()
        }
    }

    pub fn max(self, other: H) -> H {
        if self >= other {
            self
        } else {
            other
        }
    }
}

macro_rules! binop {
    ($tr:ident, $f:ident, $op:tt) => {
        impl $tr<&H> for &H {
            type Output = H;
            fn $f(self, rhs: &H) -> H {
                H(&self.0 $op &rhs.0)
            }
        }
        impl $tr<H> for H {
            type Output = H;
            fn $f(self, rhs: H) -> H {
                H(self.0 $op rhs.0)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);
binop!(Div, div, /);

impl Neg for &H {
    type Output = H;
    fn neg(self) -> H {
        H(-self.0.clone())
    }
}

/// `[[a, b], [c, d]]`.
#[derive(Clone, Debug)]
pub struct M2 {
    pub a: H,
    pub b: H,
    pub c: H,
    pub d: H,
}

impl M2 {
    pub fn new(rows: [f64; 4]) -> M2 {
        let [a, b, c, d] = rows.map(H::from_f64);
        M2 { a, b, c, d }
    }

    pub fn diag(x: H, y: H) -> M2 {
        M2 { a: x, b: H::zero(), c: H::zero(), d: y }
    }

    pub fn scalar(x: H) -> M2 {
        M2::diag(x.clone(), x)
    }

    pub fn identity() -> M2 {
        M2::scalar(H::one())
    }

    pub fn zero() -> M2 {
        M2::scalar(H::zero())
    }

    pub fn to_f64(&self) -> [f64; 4] {
        [self.a.to_f64(), self.b.to_f64(), self.c.to_f64(), self.d.to_f64()]
    }

    pub fn add(&self, o: &M2) -> M2 {
        M2 { a: &self.a + &o.a, b: &self.b + &o.b, c: &self.c + &o.c, d: &self.d + &o.d }
    }

    pub fn sub(&self, o: &M2) -> M2 {
        M2 { a: &self.a - &o.a, b: &self.b - &o.b, c: &self.c - &o.c, d: &self.d - &o.d }
    }

    pub fn scale(&self, s: &H) -> M2 {
        M2 { a: &self.a * s, b: &self.b * s, c: &self.c * s, d: &self.d * s }
    }

    pub fn mul(&self, o: &M2) -> M2 {
        M2 {
            a: &self.a * &o.a + &self.b * &o.c,
            b: &self.a * &o.b + &self.b * &o.d,
            c: &self.c * &o.a + &self.d * &o.c,
            d: &self.c * &o.b + &self.d * &o.d,
        }
    }

    pub fn transpose(&self) -> M2 {
        M2 { a: self.a.clone(), b: self.c.clone(), c: self.b.clone(), d: self.d.clone() }
    }

    pub fn trace(&self) -> H {
        &self.a + &self.d
    }

    pub fn det(&self) -> H {
        &self.a * &self.d - &self.b * &self.c
    }

    pub fn inv(&self) -> M2 {
        let det = self.det();
        M2 { a: &self.d / &det, b: -&self.b / det.clone(), c: -&self.c / det.clone(), d: &self.a / &det }
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> H {
        self.a.abs().max(self.b.abs()).max(self.c.abs()).max(self.d.abs())
    }

    /// Eigenvalues `(λ₁, λ₂)`, `λ₁ >= λ₂`; panics on a complex pair.
    pub fn eigenvalues(&self) -> (H, H) {
        let half = H::from_f64(0.5);
        let mid = &self.trace() * &half;
        let disc = &mid * &mid - self.det();
        let disc = if disc < H::zero() {
            assert!(disc.abs() <= self.max_abs() * self.max_abs() * H::from_f64(1e-50), "complex spectrum");
            H::zero()
        } else {
            disc
        };
        let r = disc.sqrt();
        (&mid + &r, &mid - &r)
    }

    pub fn func(&self, f: impl Fn(&H) -> H) -> M2 {
        let (l1, l2) = self.eigenvalues();
        let gap = &l1 - &l2;
        if gap <= self.max_abs() * H::from_f64(1e-45) {
            // A 2×2 matrix with a repeated real eigenvalue that we evaluate here is scalar.
            return M2::scalar(f(&l1));
        }
        let slope = (f(&l1) - f(&l2)) / gap;
        M2::scalar(f(&l2)).add(&self.sub(&M2::scalar(l2)).scale(&slope))
    }

    pub fn sqrt(&self) -> M2 {
        self.func(H::sqrt)
    }

    pub fn ln(&self) -> M2 {
        self.func(H::ln)
    }

    pub fn exp(&self) -> M2 {
        self.func(H::exp)
    }

    pub fn pow(&self, p: f64) -> M2 {
        let p = H::from_f64(p);
        self.func(|x| x.powf(&p))
    }

    pub fn frobenius(&self) -> H {
        (&self.a * &self.a + &self.b * &self.b + &self.c * &self.c + &self.d * &self.d).sqrt()
    }

    pub fn dist(&self, o: &M2) -> H {
        self.sub(o).frobenius()
    }
}

fn weighted_sum(w: &[f64], xs: &[M2]) -> M2 {
    w.iter().zip(xs).fold(M2::zero(), |acc, (wj, x)| acc.add(&x.scale(&H::from_f64(*wj))))
}

/// `d_BW(A,B)² = tr A + tr B - 2 tr (A^{1/2} B A^{1/2})^{1/2}`.
pub fn bw_distance(a: &M2, b: &M2) -> H {
    let ra = a.sqrt();
    let cross = ra.mul(b).mul(&ra).sqrt().trace();
    let d2 = a.trace() + b.trace() - H::from_f64(2.0) * cross;
    d2.max(H::zero()).sqrt()
}

/// `A ◊_t B = (1-t)² A + t² B + t(1-t) [(AB)^{1/2} + (BA)^{1/2}]`.
pub fn wasserstein_geodesic(a: &M2, b: &M2, t: f64) -> M2 {
    let (s, t) = (H::from_f64(1.0 - t), H::from_f64(t));
    let cross = a.mul(b).sqrt().add(&b.mul(a).sqrt());
    a.scale(&(&s * &s)).add(&b.scale(&(&t * &t))).add(&cross.scale(&(&t * &s)))
}

/// `A #_t B = A^{1/2} (A^{-1/2} B A^{-1/2})^t A^{1/2}`.
pub fn geometric_geodesic(a: &M2, b: &M2, t: f64) -> M2 {
    let ra = a.sqrt();
    let ria = ra.inv();
    ra.mul(&ria.mul(b).mul(&ria).pow(t)).mul(&ra)
}

pub fn cartan_distance(a: &M2, b: &M2) -> H {
    let ria = a.sqrt().inv();
    let (l1, l2) = ria.mul(b).mul(&ria).eigenvalues();
    let (x, y) = (l1.ln(), l2.ln());
    (&x * &x + &y * &y).sqrt()
}

pub fn log_euclidean_mean(w: &[f64], xs: &[M2]) -> M2 {
    let logs: Vec<M2> = xs.iter().map(M2::ln).collect();
    weighted_sum(w, &logs).exp()
}

/// `Q_p = (Σ w_j A_j^p)^{1/p}`.
pub fn power_mean(w: &[f64], xs: &[M2], p: f64) -> M2 {
    let powers: Vec<M2> = xs.iter().map(|x| x.pow(p)).collect();
    weighted_sum(w, &powers).pow(1.0 / p)
}

/// `P_{1/2}` of an equally weighted pair: `(A + B + 2 A#B) / 4`.
pub fn lim_palfia_half_pair(a: &M2, b: &M2) -> M2 {
    let g = geometric_geodesic(a, b, 0.5);
    a.add(b).add(&g.scale(&H::from_f64(2.0))).scale(&H::from_f64(0.25))
}

/// `Σ w_j (X^{1/2} A_j X^{1/2})^{1/2} - X`.
pub fn wasserstein_equation(w: &[f64], xs: &[M2], x: &M2) -> M2 {
    let rx = x.sqrt();
    let terms: Vec<M2> = xs.iter().map(|a| rx.mul(a).mul(&rx).sqrt()).collect();
    weighted_sum(w, &terms).sub(x)
}

/// `Σ w_j log(X^{-1/2} A_j X^{-1/2})`.
pub fn karcher_equation(w: &[f64], xs: &[M2], x: &M2) -> M2 {
    let rix = x.sqrt().inv();
    let terms: Vec<M2> = xs.iter().map(|a| rix.mul(a).mul(&rix).ln()).collect();
    weighted_sum(w, &terms)
}

/// `Σ w_j X #_t A_j - X`.
pub fn lim_palfia_equation(w: &[f64], xs: &[M2], t: f64, x: &M2) -> M2 {
    let terms: Vec<M2> = xs.iter().map(|a| geometric_geodesic(x, a, t)).collect();
    weighted_sum(w, &terms).sub(x)
}

/// Iterates `step` from `x0` until successive iterates agree to `1e-45` relative.
fn fixed_point(x0: M2, step: impl Fn(&M2) -> M2) -> M2 {
    let tol = H::from_f64(1e-45);
    let mut x = x0;
    for _ in 0..5000 {
        let next = step(&x);
        let done = next.dist(&x) <= &tol * &next.frobenius();
        x = next;
        if done {
            return x;
        }
    }
    panic!("reference iteration did not settle");
}

/// Wasserstein barycenter by `X ← X^{-1/2} (Σ w_j (X^{1/2} A_j X^{1/2})^{1/2})² X^{-1/2}`.
pub fn wasserstein_barycenter(w: &[f64], xs: &[M2]) -> M2 {
    fixed_point(weighted_sum(w, xs), |x| {
        let rx = x.sqrt();
        let rix = rx.inv();
        let terms: Vec<M2> = xs.iter().map(|a| rx.mul(a).mul(&rx).sqrt()).collect();
        let s = weighted_sum(w, &terms);
        rix.mul(&s.mul(&s)).mul(&rix)
    })
}

/// Karcher mean by `X ← X^{1/2} exp(Σ w_j log(X^{-1/2} A_j X^{-1/2})) X^{1/2}`.
pub fn karcher_mean(w: &[f64], xs: &[M2]) -> M2 {
    fixed_point(log_euclidean_mean(w, xs), |x| {
        let rx = x.sqrt();
        rx.mul(&karcher_equation(w, xs, x).exp()).mul(&rx)
    })
}

/// Lim–Palfia mean by `X ← Σ w_j X #_t A_j`.
pub fn lim_palfia_mean(w: &[f64], xs: &[M2], t: f64) -> M2 {
    fixed_point(weighted_sum(w, xs), |x| {
        let terms: Vec<M2> = xs.iter().map(|a| geometric_geodesic(x, a, t)).collect();
        weighted_sum(w, &terms)
    })
}
