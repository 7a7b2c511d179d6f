//! The Lobachevsky function `Л(θ) = -∫₀^θ log|2 sin t| dt`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Terms of the Clausen series kept; at `|x| = π` each term shrinks by
/// roughly a factor of four, so this is far below double precision.
const TERMS: usize = 40;

/// Exact Bernoulli numbers `B_0 … B_m` (with `B_1 = -1/2`).
fn bernoulli(m: usize) -> Vec<BigRational> {
    let mut b: Vec<BigRational> = Vec::with_capacity(m + 1);
    let mut binom: Vec<BigInt> = vec![BigInt::one()];
    for k in 0..=m {
        // binom holds C(k+1, j) for j = 0..=k+1.
        let mut next = vec![BigInt::one(); k + 2];
        for j in 1..=k {
            next[j] = &binom[j - 1] + &binom[j];
        }
        binom = next;
        if k == 0 {
            b.push(BigRational::one());
            continue;
        }
        let mut acc = BigRational::zero();
        for (j, bj) in b.iter().enumerate() {
            acc += BigRational::from_integer(binom[j].clone()) * bj;
        }
        b.push(-acc / BigRational::from_integer(BigInt::from(k + 1)));
    }
    b
}

/// `|B_2k| / (2k (2k+1) (2k)!)` for `k = 1..=TERMS`.
fn coefficients() -> &'static [f64] {
    static COEFFS: OnceLock<Vec<f64>> = OnceLock::new();
    COEFFS.get_or_init(|| {
        let b = bernoulli(2 * TERMS);
        let mut factorial = BigInt::one();
        let mut out = Vec::with_capacity(TERMS);
        for m in 1..=2 * TERMS {
            factorial *= m;
            if m % 2 == 0 {
                let denom = BigInt::from(m * (m + 1)) * &factorial;
                let c = b[m].abs() / BigRational::from_integer(denom);
                out.push(c.to_f64().unwrap_or(0.0));
            }
        }
        out
    })
}

/// Clausen's `Cl₂(x)` for `x ∈ (-π, π]`.
fn clausen_reduced(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let x2 = x * x;
    let mut power = x * x2;
    let mut sum = 0.0;
    for &c in coefficients() {
        let term = c * power;
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
        power *= x2;
    }
    x - x * x.abs().ln() + sum
}

/// `Л(θ)`; odd and π-periodic.
pub fn lobachevsky(theta: f64) -> f64 {
    let mut x = (2.0 * theta).rem_euclid(2.0 * PI);
    if x > PI {
        x -= 2.0 * PI;
    }
    0.5 * clausen_reduced(x)
}

/// `Л'(θ) = -log|2 sin θ|`.
pub fn lobachevsky_derivative(theta: f64) -> f64 {
    -(2.0 * theta.sin()).abs().ln()
}

/// Volume of the regular ideal tetrahedron, `3Л(π/3)`.
pub fn v3() -> f64 {
    3.0 * lobachevsky(PI / 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `-∫₀^θ log(2 sin t) dt` by composite Gauss–Legendre on the smooth
    /// remainder after subtracting `log(2t)`.
    fn quadrature(theta: f64) -> f64 {
        const NODES: [(f64, f64); 5] = [
            (0.0, 0.568_888_888_888_888_9),
            (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
            (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
            (-0.906_179_845_938_664, 0.236_926_885_056_189_08),
            (0.906_179_845_938_664, 0.236_926_885_056_189_08),
        ];
        let panels = 400;
        let h = theta / panels as f64;
        let mut smooth = 0.0;
        for p in 0..panels {
            let mid = (p as f64 + 0.5) * h;
            for (x, w) in NODES {
                let t = mid + 0.5 * h * x;
                smooth += 0.5 * h * w * -(t.sin() / t).ln();
            }
        }
        -theta * (2.0 * theta).ln() + theta + smooth
    }

    #[test]
    fn bernoulli_small() {
        let b = bernoulli(8);
        let r = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        assert_eq!(b[1], r(-1, 2));
        assert_eq!(b[2], r(1, 6));
        assert_eq!(b[3], r(0, 1));
        assert_eq!(b[4], r(-1, 30));
        assert_eq!(b[6], r(1, 42));
        assert_eq!(b[8], r(-1, 30));
    }

    #[test]
    fn special_values() {
        assert_eq!(lobachevsky(0.0), 0.0);
        assert!(lobachevsky(PI / 2.0).abs() < 1e-15);
        assert!((v3() - 1.014_941_606_409_653_6).abs() < 1e-15);
        assert!((v3() - 2.0 * lobachevsky(PI / 6.0)).abs() < 1e-15);
    }

    #[test]
    fn matches_quadrature() {
        for i in 1..=30 {
            let theta = i as f64 * (PI / 2.0) / 30.0;
            let q = quadrature(theta);
            assert!((lobachevsky(theta) - q).abs() < 1e-13, "θ = {theta}");
        }
    }

    #[test]
    fn odd_and_periodic() {
        for i in 0..50 {
            let t = -3.0 + 0.13 * i as f64;
            assert!((lobachevsky(-t) + lobachevsky(t)).abs() < 1e-15);
            assert!((lobachevsky(t + PI) - lobachevsky(t)).abs() < 1e-14);
        }
    }

    #[test]
    fn derivative_matches_difference() {
        let h = 1e-5;
        for i in 1..20 {
            let t = i as f64 * 0.15;
            let fd = (lobachevsky(t + h) - lobachevsky(t - h)) / (2.0 * h);
            assert!((fd - lobachevsky_derivative(t)).abs() < 1e-8);
        }
    }
}
