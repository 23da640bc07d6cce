//! Orthogonal-polynomial evaluation (Legendre, associated Legendre,
//! Gegenbauer, Jacobi) and Gauss–Legendre node/weight generation.
//!
//! All recurrences run in the scalar's native precision. Degrees are capped
//! at [`MAX_DEGREE`]; the tools shipped with this crate never get close to
//! the cap, and asymptotic large-degree expansions are out of scope.

use crate::error::{Error, Result};
use crate::numeric::KahanSum;
use crate::scalar::Real;

/// Hard cap on polynomial degrees accepted by the recurrences.
pub const MAX_DEGREE: usize = 200;

fn check_degree(requested: usize) -> Result<()> {
    if requested > MAX_DEGREE {
        return Err(Error::DegreeCap {
            requested,
            cap: MAX_DEGREE,
        });
    }
    Ok(())
}

/// Legendre polynomial P_l(x) by the three-term recurrence
/// `(n+1) P_{n+1} = (2n+1) x P_n - n P_{n-1}`.
pub fn legendre_p<T: Real>(l: usize, x: T) -> T {
    assert!(l <= MAX_DEGREE, "degree {l} exceeds cap {MAX_DEGREE}");
    match l {
        0 => T::one(),
        1 => x,
        _ => {
            let mut prev = T::one();
            let mut cur = x;
            for n in 1..l {
                let nf = T::of_usize(n);
                let next = ((T::of(2.0) * nf + T::one()) * x * cur - nf * prev)
                    / (nf + T::one());
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// P_l(x) together with its derivative, via
/// `(1 - x^2) P_l' = l (P_{l-1} - x P_l)`. Endpoints use the closed form
/// `P_l'(±1) = (±1)^{l+1} l (l+1) / 2`.
pub(crate) fn legendre_p_with_derivative<T: Real>(l: usize, x: T) -> (T, T) {
    assert!(l >= 1);
    let mut prev = T::one();
    let mut cur = x;
    for n in 1..l {
        let nf = T::of_usize(n);
        let next = ((T::of(2.0) * nf + T::one()) * x * cur - nf * prev) / (nf + T::one());
        prev = cur;
        cur = next;
    }
    let denom = T::one() - x * x;
    let lf = T::of_usize(l);
    let dp = if denom.abs() > T::epsilon() {
        lf * (prev - x * cur) / denom
    } else {
        let sign = if x > T::zero() { T::one() } else { -T::one() };
        let parity = if l.is_multiple_of(2) { sign } else { T::one() };
        parity * lf * (lf + T::one()) / T::of(2.0)
    };
    (cur, dp)
}

/// Fully normalized associated Legendre value: the polar factor of the real
/// orthonormal spherical harmonics on S^2, so that
/// `Y = q_{l0}(z)` for `m = 0` and `Y = q_{lm}(z) {cos,sin}(m phi)` for
/// `m >= 1` form an L2(S^2)-orthonormal family. Condon–Shortley-free.
///
/// Computed by the stable normalized recurrences: a running diagonal product
/// for `q_{mm}` followed by an upward sweep in `l`.
pub fn assoc_legendre_normalized<T: Real>(l: usize, m: usize, x: T) -> T {
    assert!(m <= l, "order m = {m} exceeds degree l = {l}");
    assert!(l <= MAX_DEGREE, "degree {l} exceeds cap {MAX_DEGREE}");
    let s = (T::one() - x * x).max(T::zero()).sqrt();
    let mut diag = (T::of(4.0) * T::PI()).sqrt().recip();
    for i in 1..=m {
        let i2 = T::of_usize(2 * i);
        diag = diag * ((i2 + T::one()) / i2).sqrt() * s;
    }
    if m >= 1 {
        diag *= T::of(2.0).sqrt();
    }
    if l == m {
        return diag;
    }
    let mut prev = diag;
    let mut cur = T::of_usize(2 * m + 3).sqrt() * x * prev;
    for ll in (m + 2)..=l {
        let (lf, mf) = (T::of_usize(ll), T::of_usize(m));
        let two_l = T::of(2.0) * lf;
        let a = ((two_l + T::one()) * (two_l - T::one()) / ((lf - mf) * (lf + mf))).sqrt();
        let b = ((two_l + T::one()) * (lf - T::one() - mf) * (lf - T::one() + mf)
            / ((two_l - T::of(3.0)) * (lf - mf) * (lf + mf)))
            .sqrt();
        let next = a * x * cur - b * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Gegenbauer polynomial C_l^alpha(x).
pub fn gegenbauer_c<T: Real>(l: usize, alpha: T, x: T) -> T {
    assert!(alpha > T::zero(), "Gegenbauer index must be positive");
    assert!(l <= MAX_DEGREE, "degree {l} exceeds cap {MAX_DEGREE}");
    match l {
        0 => T::one(),
        1 => T::of(2.0) * alpha * x,
        _ => {
            let mut prev = T::one();
            let mut cur = T::of(2.0) * alpha * x;
            for n in 2..=l {
                let nf = T::of_usize(n);
                let next = (T::of(2.0) * x * (nf + alpha - T::one()) * cur
                    - (nf + T::of(2.0) * alpha - T::of(2.0)) * prev)
                    / nf;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// Jacobi polynomial P_n^{(alpha,beta)}(x).
pub fn jacobi_p<T: Real>(n: usize, alpha: T, beta: T, x: T) -> T {
    assert!(
        alpha > -T::one() && beta > -T::one(),
        "Jacobi indices must exceed -1"
    );
    assert!(n <= MAX_DEGREE, "degree {n} exceeds cap {MAX_DEGREE}");
    if n == 0 {
        return T::one();
    }
    let two = T::of(2.0);
    let p1 = (alpha + T::one()) + (alpha + beta + two) * (x - T::one()) / two;
    if n == 1 {
        return p1;
    }
    let mut prev = T::one();
    let mut cur = p1;
    for k in 2..=n {
        let kf = T::of_usize(k);
        let ab = alpha + beta;
        let c1 = two * kf * (kf + ab) * (two * kf + ab - two);
        let c2 = (two * kf + ab - T::one())
            * ((two * kf + ab) * (two * kf + ab - two) * x + alpha * alpha - beta * beta);
        let c3 = two * (kf + alpha - T::one()) * (kf + beta - T::one()) * (two * kf + ab);
        let next = (c2 * cur - c3 * prev) / c1;
        prev = cur;
        cur = next;
    }
    cur
}

/// Pochhammer symbol (rising factorial): `(a)_0 = 1`,
/// `(a)_l = a (a+1) ... (a+l-1)`.
pub fn pochhammer<T: Real>(a: T, l: usize) -> T {
    let mut acc = T::one();
    for i in 0..l {
        acc *= a + T::of_usize(i);
    }
    acc
}

/// A one-dimensional quadrature rule on (-1, 1) with positive weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadrature1D<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> Quadrature1D<T> {
    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn count(&self) -> usize {
        self.nodes.len()
    }

    /// Integrates `f` over [-1, 1].
    pub fn integrate(&self, mut f: impl FnMut(T) -> T) -> T {
        let mut acc = KahanSum::new();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc.add(w * f(x));
        }
        acc.value()
    }

    #[allow(clippy::neg_cmp_op_on_partial_ord)] // negated forms reject NaN
    fn validate(&self) -> Result<()> {
        if self.nodes.len() != self.weights.len() {
            return Err(Error::InvalidRule(
                "node/weight length mismatch".to_string(),
            ));
        }
        let mut prev = -T::one();
        for &x in &self.nodes {
            if !(x > prev && x < T::one()) {
                return Err(Error::InvalidRule(
                    "nodes must be strictly increasing inside (-1, 1)".to_string(),
                ));
            }
            prev = x;
        }
        if self.weights.iter().any(|&w| !(w > T::zero())) {
            return Err(Error::InvalidRule("weights must be positive".to_string()));
        }
        let sum = crate::numeric::kahan_sum(self.weights.iter().copied());
        let tol = T::of(1e-13).max(T::epsilon() * T::of_usize(8 * self.nodes.len()));
        if (sum - T::of(2.0)).abs() > tol {
            return Err(Error::InvalidRule(format!(
                "weights sum to {} instead of 2",
                sum.as_f64()
            )));
        }
        Ok(())
    }
}

const NEWTON_MAX_ITERATIONS: usize = 100;

/// m-point Gauss–Legendre rule on [-1, 1], exact for polynomials of degree
/// `2m - 1`. Roots of P_m are found by Newton iteration started from the
/// Chebyshev-angle guesses; construction is deterministic.
pub fn gauss_legendre<T: Real>(m: usize) -> Result<Quadrature1D<T>> {
    assert!(m >= 1, "a quadrature rule needs at least one point");
    check_degree(m)?;
    let step_tol = T::of(1e-15).max(T::epsilon() * T::of(2.0));
    let mut nodes = vec![T::zero(); m];
    let mut weights = vec![T::zero(); m];
    for i in 0..m {
        // Chebyshev-angle initial guess for the i-th root (descending order).
        let theta = T::PI() * (T::of_usize(i) + T::of(0.75))
            / (T::of_usize(m) + T::of(0.5));
        let mut x = theta.cos();
        let mut converged = false;
        for _ in 0..NEWTON_MAX_ITERATIONS {
            let (p, d) = legendre_p_with_derivative(m, x);
            let delta = p / d;
            x -= delta;
            if delta.abs() <= step_tol {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NonConvergence {
                m,
                iterations: NEWTON_MAX_ITERATIONS,
            });
        }
        let (_, dp) = legendre_p_with_derivative(m, x);
        nodes[m - 1 - i] = x;
        weights[m - 1 - i] = T::of(2.0) / ((T::one() - x * x) * dp * dp);
    }
    // Enforce exact symmetry of the node set; the midpoint of an odd rule
    // is pinned to zero.
    for i in 0..m / 2 {
        let avg = (nodes[i] - nodes[m - 1 - i]) / T::of(2.0);
        nodes[i] = avg;
        nodes[m - 1 - i] = -avg;
        let w = (weights[i] + weights[m - 1 - i]) / T::of(2.0);
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    if m % 2 == 1 {
        nodes[m / 2] = T::zero();
    }
    let rule = Quadrature1D { nodes, weights };
    rule.validate()?;
    Ok(rule)
}
