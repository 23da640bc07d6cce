//! Geometry and harmonics on the unit sphere: dimension bookkeeping,
//! surface areas, pointwise real spherical harmonics on S^2 and the
//! reproducing kernels of the harmonic and polynomial spaces for general d.
//!
//! Pointwise basis evaluation is deliberately restricted to d = 2; higher
//! dimensions are served through the kernels only, and asking for a basis
//! value there is an error rather than a silent approximation.

use crate::error::{Error, Result};
use crate::numeric::KahanSum;
use crate::scalar::Real;
use crate::special::{
    assoc_legendre_normalized, gegenbauer_c, jacobi_p, pochhammer, MAX_DEGREE,
};

/// A point on S^d, stored as its d+1 Cartesian coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint<T> {
    coords: Vec<T>,
}

impl<T: Real> SpherePoint<T> {
    /// Wraps coordinates that already lie on the unit sphere.
    pub fn new(coords: Vec<T>) -> Result<Self> {
        assert!(coords.len() >= 2, "a sphere point needs at least 2 coordinates");
        let norm2: T = coords.iter().map(|&c| c * c).sum();
        let defect = (norm2.sqrt() - T::one()).abs();
        let tol = T::of(1e-12).max(T::epsilon() * T::of(32.0));
        if defect > tol {
            return Err(Error::NotOnSphere {
                defect: defect.as_f64(),
            });
        }
        Ok(SpherePoint { coords })
    }

    /// Projects arbitrary nonzero coordinates onto the sphere.
    pub fn from_unnormalized(coords: Vec<T>) -> Self {
        let norm: T = coords.iter().map(|&c| c * c).sum::<T>().sqrt();
        assert!(norm > T::zero(), "cannot normalize the zero vector");
        SpherePoint {
            coords: coords.into_iter().map(|c| c / norm).collect(),
        }
    }

    /// Point on S^2 with polar cosine `t` and azimuth `phi`.
    pub fn from_polar(t: T, phi: T) -> Self {
        let s = (T::one() - t * t).max(T::zero()).sqrt();
        SpherePoint {
            coords: vec![s * phi.cos(), s * phi.sin(), t],
        }
    }

    pub fn north_pole(dim_d: usize) -> Self {
        let mut coords = vec![T::zero(); dim_d + 1];
        coords[dim_d] = T::one();
        SpherePoint { coords }
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    /// The sphere dimension d (ambient dimension minus one).
    pub fn dim_d(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn dot(&self, other: &Self) -> T {
        assert_eq!(self.coords.len(), other.coords.len());
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(&a, &b)| a * b)
            .sum()
    }

    /// Last Cartesian coordinate; the polar cosine on S^2.
    pub fn polar_cos(&self) -> T {
        *self.coords.last().unwrap()
    }
}

/// Index of one real spherical harmonic: degree `l` and position `k`
/// (1-based) inside the degree-l block.
///
/// On S^2 the block ordering is fixed as: k = 1 is the zonal (m = 0)
/// harmonic, then for m = 1..l the pair k = 2m (cos m phi) and
/// k = 2m + 1 (sin m phi).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HarmonicIndex {
    pub degree: usize,
    pub k: usize,
}

impl HarmonicIndex {
    pub fn new(degree: usize, k: usize) -> Self {
        HarmonicIndex { degree, k }
    }
}

fn checked_binomial(n: usize, k: usize) -> Result<u128> {
    let k = k.min(n - k.min(n));
    let mut acc: u128 = 1;
    for i in 1..=k {
        acc = acc
            .checked_mul((n - k + i) as u128)
            .ok_or(Error::IntegerOverflow {
                context: "binomial coefficient",
            })?
            / i as u128;
    }
    Ok(acc)
}

/// Dimension Z(d, l) of the space of degree-l spherical harmonics on S^d,
/// computed in exact integer arithmetic as
/// `C(d + l, l) - C(d + l - 2, l - 2)`.
pub fn harmonic_dimension(d: usize, l: usize) -> Result<usize> {
    assert!(d >= 1, "sphere dimension must be positive");
    if l == 0 {
        return Ok(1);
    }
    let lead = checked_binomial(d + l, l)?;
    let trail = if l >= 2 {
        checked_binomial(d + l - 2, l - 2)?
    } else {
        0
    };
    let z = lead - trail;
    usize::try_from(z).map_err(|_| Error::IntegerOverflow {
        context: "harmonic space dimension",
    })
}

/// Dimension d_n of the spherical polynomials of degree at most n on S^d;
/// equals the harmonic dimension Z(d + 1, n).
pub fn space_dimension(d: usize, n: usize) -> Result<usize> {
    harmonic_dimension(d + 1, n)
}

/// Surface area of S^d: `2 pi^{(d+1)/2} / Gamma((d+1)/2)`.
pub fn surface_area<T: Real>(d: usize) -> T {
    assert!(d >= 1);
    let half = (d + 1) as f64 / 2.0;
    let gamma = if (d + 1).is_multiple_of(2) {
        // Integer argument: ordinary factorial.
        let mut acc = T::one();
        for i in 1..d.div_ceil(2) {
            acc *= T::of_usize(i);
        }
        acc
    } else {
        // Half-integer argument: Gamma(k + 1/2) = sqrt(pi) prod (i - 1/2).
        let k = d / 2;
        let mut acc = T::PI().sqrt();
        for i in 1..=k {
            acc *= T::of_usize(i) - T::of(0.5);
        }
        acc
    };
    T::of(2.0) * T::PI().powf(T::of(half)) / gamma
}

/// Evaluates all real spherical harmonics on S^2 of degree at most `n` at
/// `x`, in degree-major order with the fixed block ordering of
/// [`HarmonicIndex`]. The output has `(n + 1)^2` entries and position
/// `l^2 + (k - 1)` holds Y_{l k}(x).
pub fn eval_harmonics_upto<T: Real>(n: usize, x: &SpherePoint<T>) -> Result<Vec<T>> {
    if x.dim_d() != 2 {
        return Err(Error::UnsupportedDimension { dim_d: x.dim_d() });
    }
    if n > MAX_DEGREE {
        return Err(Error::DegreeCap {
            requested: n,
            cap: MAX_DEGREE,
        });
    }
    let c = x.coords();
    let (px, py, z) = (c[0], c[1], c[2]);
    let s = (px * px + py * py).sqrt();
    let (cos_phi, sin_phi) = if s > T::zero() {
        (px / s, py / s)
    } else {
        (T::one(), T::zero())
    };

    let mut out = vec![T::zero(); (n + 1) * (n + 1)];

    // m = 0 column straight down the degrees.
    let mut prev = (T::of(4.0) * T::PI()).sqrt().recip();
    out[0] = prev;
    if n >= 1 {
        let mut cur = T::of(3.0).sqrt() * z * prev;
        out[1] = cur;
        for l in 2..=n {
            let lf = T::of_usize(l);
            let two_l = T::of(2.0) * lf;
            let a = ((two_l + T::one()) * (two_l - T::one())).sqrt() / lf;
            let b = ((two_l + T::one()) / (two_l - T::of(3.0))).sqrt() * (lf - T::one()) / lf;
            let next = a * z * cur - b * prev;
            prev = cur;
            cur = next;
            out[l * l] = cur;
        }
    }

    // Sectoral seed, then upward in degree for each order m >= 1.
    let sqrt2 = T::of(2.0).sqrt();
    let mut diag = (T::of(4.0) * T::PI()).sqrt().recip();
    let (mut cos_m, mut sin_m) = (T::one(), T::zero());
    for m in 1..=n {
        let m2 = T::of_usize(2 * m);
        diag = diag * ((m2 + T::one()) / m2).sqrt() * s;
        let (c_next, s_next) = (
            cos_m * cos_phi - sin_m * sin_phi,
            sin_m * cos_phi + cos_m * sin_phi,
        );
        cos_m = c_next;
        sin_m = s_next;

        let mut prev = diag * sqrt2;
        out[m * m + 2 * m - 1] = prev * cos_m;
        out[m * m + 2 * m] = prev * sin_m;
        if m == n {
            break;
        }
        let mut cur = T::of_usize(2 * m + 3).sqrt() * z * prev;
        out[(m + 1) * (m + 1) + 2 * m - 1] = cur * cos_m;
        out[(m + 1) * (m + 1) + 2 * m] = cur * sin_m;
        for l in (m + 2)..=n {
            let (lf, mf) = (T::of_usize(l), T::of_usize(m));
            let two_l = T::of(2.0) * lf;
            let a =
                ((two_l + T::one()) * (two_l - T::one()) / ((lf - mf) * (lf + mf))).sqrt();
            let b = ((two_l + T::one()) * (lf - T::one() - mf) * (lf - T::one() + mf)
                / ((two_l - T::of(3.0)) * (lf - mf) * (lf + mf)))
                .sqrt();
            let next = a * z * cur - b * prev;
            prev = cur;
            cur = next;
            out[l * l + 2 * m - 1] = cur * cos_m;
            out[l * l + 2 * m] = cur * sin_m;
        }
    }
    Ok(out)
}

/// Value of the real orthonormal spherical harmonic Y_{l k} at `x` (S^2).
pub fn eval_harmonic<T: Real>(index: HarmonicIndex, x: &SpherePoint<T>) -> Result<T> {
    if x.dim_d() != 2 {
        return Err(Error::UnsupportedDimension { dim_d: x.dim_d() });
    }
    let z_dim = harmonic_dimension(2, index.degree)?;
    assert!(
        index.k >= 1 && index.k <= z_dim,
        "harmonic index k = {} out of range 1..={z_dim} for degree {}",
        index.k,
        index.degree
    );
    let c = x.coords();
    let (px, py, z) = (c[0], c[1], c[2]);
    if index.k == 1 {
        return Ok(assoc_legendre_normalized(index.degree, 0, z));
    }
    let m = index.k / 2;
    let q = assoc_legendre_normalized(index.degree, m, z);
    let phi = py.atan2(px);
    let mf = T::of_usize(m);
    if index.k.is_multiple_of(2) {
        Ok(q * (mf * phi).cos())
    } else {
        Ok(q * (mf * phi).sin())
    }
}

/// Reproducing kernel G_l of the degree-l harmonics on S^d as a function of
/// the inner product t = x . y:
/// `G_l(t) = (2l + d - 1) / ((d - 1) omega_d) * C_l^{(d-1)/2}(t)`.
pub fn kernel_g<T: Real>(l: usize, d: usize, t: T) -> T {
    assert!(d >= 2, "kernels need d >= 2");
    let alpha = T::of_usize(d - 1) / T::of(2.0);
    let scale = T::of_usize(2 * l + d - 1)
        / (T::of_usize(d - 1) * surface_area::<T>(d));
    scale * gegenbauer_c(l, alpha, t)
}

/// Reproducing kernel E_n of the degree-n polynomial space on S^d:
/// `E_n(t) = (1 / omega_d) ((d)_n / ((d/2))_n) P_n^{(d/2, (d-2)/2)}(t)`,
/// which also equals the sum of G_0 .. G_n.
pub fn kernel_e<T: Real>(n: usize, d: usize, t: T) -> T {
    assert!(d >= 2, "kernels need d >= 2");
    let df = T::of_usize(d);
    let ratio = pochhammer(df, n) / pochhammer(df / T::of(2.0), n);
    let jac = jacobi_p(n, df / T::of(2.0), (df - T::of(2.0)) / T::of(2.0), t);
    ratio * jac / surface_area::<T>(d)
}

/// Kahan-compensated dot product of a basis table with coefficients.
pub(crate) fn compensated_dot<T: Real>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = KahanSum::new();
    for (&x, &y) in a.iter().zip(b) {
        acc.add(x * y);
    }
    acc.value()
}

/// Equiangular evaluation grid on S^2 (`n_theta` colatitude rings times
/// `n_phi` azimuths) used for sup-norm estimates.
pub fn evaluation_grid<T: Real>(n_theta: usize, n_phi: usize) -> Vec<SpherePoint<T>> {
    let mut points = Vec::with_capacity(n_theta * n_phi);
    for i in 0..n_theta {
        let theta = T::PI() * (T::of_usize(i) + T::of(0.5)) / T::of_usize(n_theta);
        let t = theta.cos();
        for j in 0..n_phi {
            let phi = T::of(2.0) * T::PI() * T::of_usize(j) / T::of_usize(n_phi);
            points.push(SpherePoint::from_polar(t, phi));
        }
    }
    points
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_point(rng: &mut ChaCha8Rng) -> SpherePoint<f64> {
        loop {
            let v = [
                rng.random_range(-1.0..=1.0),
                rng.random_range(-1.0..=1.0),
                rng.random_range(-1.0..=1.0),
            ];
            let n2: f64 = v.iter().map(|x| x * x).sum();
            if n2 > 1e-3 {
                return SpherePoint::from_unnormalized(v.to_vec());
            }
        }
    }

    #[test]
    fn sphere_point_invariants() {
        assert!(SpherePoint::new(vec![0.0, 0.0, 1.0]).is_ok());
        assert!(matches!(
            SpherePoint::new(vec![0.0, 0.0, 1.5]),
            Err(Error::NotOnSphere { .. })
        ));
        let p = SpherePoint::<f64>::from_unnormalized(vec![3.0, 4.0, 0.0]);
        assert!((p.coords()[0] - 0.6).abs() < 1e-15);
        assert_eq!(p.dim_d(), 2);
    }

    #[test]
    fn harmonic_dimension_reference_values() {
        assert_eq!(harmonic_dimension(2, 0).unwrap(), 1);
        assert_eq!(harmonic_dimension(2, 3).unwrap(), 7);
        assert_eq!(harmonic_dimension(3, 2).unwrap(), 9);
    }

    #[test]
    fn harmonic_dimension_matches_factorial_formula() {
        // Direct formula (2l + d - 1)(l + d - 2)! / ((d - 1)! l!) as an
        // exact oracle, evaluated in u128 while the factorials fit.
        fn fact(n: usize) -> u128 {
            (1..=n as u128).product::<u128>().max(1)
        }
        for d in 2..=6 {
            for l in 1..=20 {
                let oracle =
                    (2 * l + d - 1) as u128 * fact(l + d - 2) / (fact(d - 1) * fact(l));
                assert_eq!(
                    harmonic_dimension(d, l).unwrap() as u128,
                    oracle,
                    "d = {d}, l = {l}"
                );
            }
        }
    }

    #[test]
    fn space_dimension_reference_values() {
        assert_eq!(space_dimension(2, 0).unwrap(), 1);
        assert_eq!(space_dimension(2, 3).unwrap(), 16);
        assert_eq!(space_dimension(3, 2).unwrap(), 14);
    }

    #[test]
    fn dimensions_sum_to_space_dimension() {
        for d in 2..=6 {
            for n in 0..=40 {
                let total: usize = (0..=n)
                    .map(|l| harmonic_dimension(d, l).unwrap())
                    .sum();
                assert_eq!(total, space_dimension(d, n).unwrap(), "d = {d}, n = {n}");
            }
        }
    }

    #[test]
    fn surface_area_reference_values() {
        let pi = std::f64::consts::PI;
        assert!((surface_area::<f64>(1) - 2.0 * pi).abs() < 1e-12);
        assert!((surface_area::<f64>(2) - 4.0 * pi).abs() < 1e-12);
        assert!((surface_area::<f64>(3) - 2.0 * pi * pi).abs() < 1e-12);
    }

    #[test]
    fn constant_harmonic_value() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let expect = 1.0 / (4.0 * std::f64::consts::PI).sqrt();
        for _ in 0..10 {
            let x = random_point(&mut rng);
            let y = eval_harmonic(HarmonicIndex::new(0, 1), &x).unwrap();
            assert!((y - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn zonal_harmonic_at_pole() {
        let pole = SpherePoint::<f64>::north_pole(2);
        let y = eval_harmonic(HarmonicIndex::new(1, 1), &pole).unwrap();
        let expect = (3.0 / (4.0 * std::f64::consts::PI)).sqrt();
        assert!((y - expect).abs() < 1e-14);
    }

    #[test]
    fn degree_block_sums_to_kernel_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let x = random_point(&mut rng);
            let sum: f64 = (1..=5)
                .map(|k| {
                    eval_harmonic(HarmonicIndex::new(2, k), &x)
                        .unwrap()
                        .powi(2)
                })
                .sum();
            let expect = kernel_g(2, 2, 1.0);
            assert!((sum - expect).abs() < 1e-12, "{sum} vs {expect}");
        }
    }

    #[test]
    fn addition_theorem() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let x = random_point(&mut rng);
            let y = random_point(&mut rng);
            let yx = eval_harmonics_upto(25, &x).unwrap();
            let yy = eval_harmonics_upto(25, &y).unwrap();
            let t = x.dot(&y);
            for l in 0..=25usize {
                let sum: f64 = (0..2 * l + 1).map(|i| yx[l * l + i] * yy[l * l + i]).sum();
                let g = kernel_g(l, 2, t);
                assert!(
                    (sum - g).abs() <= 1e-10,
                    "l = {l}, t = {t}: sum {sum} vs kernel {g}"
                );
            }
        }
    }

    #[test]
    fn batch_evaluation_matches_single() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let x = random_point(&mut rng);
            let table = eval_harmonics_upto(8, &x).unwrap();
            for l in 0..=8usize {
                for k in 1..=(2 * l + 1) {
                    let single = eval_harmonic(HarmonicIndex::new(l, k), &x).unwrap();
                    let batch = table[l * l + k - 1];
                    assert!(
                        (single - batch).abs() < 1e-13,
                        "(l, k) = ({l}, {k}): {single} vs {batch}"
                    );
                }
            }
        }
    }

    #[test]
    fn kernel_g_reference_values() {
        let pi = std::f64::consts::PI;
        assert!((kernel_g(0, 2, 0.5) - 1.0 / (4.0 * pi)).abs() < 1e-15);
        for t in [-0.9, -0.2, 0.0, 0.4, 1.0] {
            assert!((kernel_g(1, 2, t) - 3.0 * t / (4.0 * pi)).abs() < 1e-14);
        }
    }

    #[test]
    fn kernel_e_is_partial_sum_of_g() {
        for d in 2..=4usize {
            for n in 0..=25usize {
                for i in 0..=16 {
                    let t = -1.0 + 2.0 * i as f64 / 16.0;
                    let e = kernel_e(n, d, t);
                    let sum: f64 = (0..=n).map(|l| kernel_g(l, d, t)).sum();
                    let scale = e.abs().max(1.0);
                    assert!(
                        (e - sum).abs() <= 1e-9 * scale,
                        "d = {d}, n = {n}, t = {t}: {e} vs {sum}"
                    );
                }
            }
        }
    }

    #[test]
    fn kernel_e_single_term() {
        let pi = std::f64::consts::PI;
        assert!((kernel_e(0, 2, 0.9) - 1.0 / (4.0 * pi)).abs() < 1e-15);
    }

    #[test]
    fn general_dimension_basis_is_refused() {
        let p = SpherePoint::<f64>::north_pole(3);
        assert!(matches!(
            eval_harmonic(HarmonicIndex::new(1, 1), &p),
            Err(Error::UnsupportedDimension { dim_d: 3 })
        ));
    }

    #[test]
    fn evaluation_grid_size_and_membership() {
        let grid = evaluation_grid::<f64>(8, 16);
        assert_eq!(grid.len(), 128);
        for p in &grid {
            let n2: f64 = p.coords().iter().map(|c| c * c).sum();
            assert!((n2 - 1.0).abs() < 1e-12);
        }
    }
}
