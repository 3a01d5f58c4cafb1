use std::fmt;

use super::PrimeModulus;

/// Dense univariate polynomial over Z_p, coefficients in ascending degree.
///
/// Trailing zeros are always trimmed, so the zero polynomial has no
/// coefficients and every other polynomial has a nonzero leading coefficient.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct ZpPoly {
    coeffs: Vec<u64>,
}

impl ZpPoly {
    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self { coeffs: vec![1] }
    }

    /// `X`
    pub fn x() -> Self {
        Self { coeffs: vec![0, 1] }
    }

    /// Builds a polynomial from ascending coefficients; values must already be reduced.
    pub fn from_coeffs(mut coeffs: Vec<u64>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    /// `prod (X - r)` over the given roots (a multiset).
    pub fn from_roots(roots: &[u64], p: PrimeModulus) -> Self {
        let mut coeffs = vec![1u64];
        for &r in roots {
            let r = p.reduce(r);
            coeffs.push(0);
            for k in (0..coeffs.len()).rev() {
                let shifted = if k > 0 { coeffs[k - 1] } else { 0 };
                coeffs[k] = p.sub(shifted, p.mul(r, coeffs[k]));
            }
        }
        Self::from_coeffs(coeffs)
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<u64> {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the zero polynomial reported as `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> u64 {
        self.coeffs.last().copied().unwrap_or(0)
    }

    pub fn coeff(&self, k: usize) -> u64 {
        self.coeffs.get(k).copied().unwrap_or(0)
    }

    pub fn is_monic(&self) -> bool {
        self.leading() == 1
    }

    pub fn monic(&self, p: PrimeModulus) -> Self {
        match self.coeffs.last() {
            None | Some(1) => self.clone(),
            Some(&lc) => {
                let inv = p.inv(lc).expect("leading coefficient is nonzero");
                Self::from_coeffs(self.coeffs.iter().map(|&c| p.mul(c, inv)).collect())
            }
        }
    }

    pub fn eval(&self, x: u64, p: PrimeModulus) -> u64 {
        let x = p.reduce(x);
        self.coeffs
            .iter()
            .rev()
            .fold(0, |acc, &c| p.add(p.mul(acc, x), c))
    }

    pub fn add(&self, other: &Self, p: PrimeModulus) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::from_coeffs(
            (0..n)
                .map(|k| p.add(self.coeff(k), other.coeff(k)))
                .collect(),
        )
    }

    pub fn sub(&self, other: &Self, p: PrimeModulus) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::from_coeffs(
            (0..n)
                .map(|k| p.sub(self.coeff(k), other.coeff(k)))
                .collect(),
        )
    }

    pub fn mul(&self, other: &Self, p: PrimeModulus) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![0u64; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = p.add(out[i + j], p.mul(a, b));
            }
        }
        Self::from_coeffs(out)
    }

    /// Quotient and remainder. Panics on a zero divisor.
    pub fn div_rem(&self, divisor: &Self, p: PrimeModulus) -> (Self, Self) {
        let d = divisor.degree().expect("division by the zero polynomial");
        if self.coeffs.len() <= d {
            return (Self::zero(), self.clone());
        }
        let lc_inv = if divisor.is_monic() {
            1
        } else {
            p.inv(divisor.leading()).expect("nonzero leading")
        };
        let mut rem = self.coeffs.clone();
        let mut quot = vec![0u64; rem.len() - d];
        for k in (d..rem.len()).rev() {
            let c = rem[k];
            if c == 0 {
                continue;
            }
            let q = if lc_inv == 1 { c } else { p.mul(c, lc_inv) };
            quot[k - d] = q;
            for (j, &dc) in divisor.coeffs.iter().enumerate() {
                rem[k - d + j] = p.sub(rem[k - d + j], p.mul(q, dc));
            }
        }
        rem.truncate(d);
        (Self::from_coeffs(quot), Self::from_coeffs(rem))
    }

    pub fn rem(&self, divisor: &Self, p: PrimeModulus) -> Self {
        self.div_rem(divisor, p).1
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Self, p: PrimeModulus) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b, p);
            a = b;
            b = r;
        }
        a.monic(p)
    }

    /// `self^exp mod modulus`.
    pub fn pow_mod(&self, mut exp: u64, modulus: &Self, p: PrimeModulus) -> Self {
        let mut result = Self::one().rem(modulus, p);
        let mut base = self.rem(modulus, p);
        while exp > 0 {
            if exp & 1 == 1 {
                result = result.mul(&base, p).rem(modulus, p);
            }
            exp >>= 1;
            if exp > 0 {
                base = base.mul(&base, p).rem(modulus, p);
            }
        }
        result
    }

    /// Divides out every factor of `X`.
    pub fn strip_x_factors(&self) -> Self {
        let zeros = self.coeffs.iter().take_while(|&&c| c == 0).count();
        if zeros == self.coeffs.len() {
            return self.clone();
        }
        Self {
            coeffs: self.coeffs[zeros..].to_vec(),
        }
    }
}

impl fmt::Debug for ZpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}*X")?,
                _ => write!(f, "{c}*X^{k}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> PrimeModulus {
        PrimeModulus::new(65537).unwrap()
    }

    #[test]
    fn from_roots_expands() {
        // (X-1)(X-2) = X^2 - 3X + 2
        let f = ZpPoly::from_roots(&[1, 2], p());
        assert_eq!(f.coeffs(), &[2, 65537 - 3, 1]);
        assert_eq!(ZpPoly::from_roots(&[], p()), ZpPoly::one());
    }

    #[test]
    fn div_rem_reconstructs() {
        let p = p();
        let a = ZpPoly::from_coeffs(vec![5, 0, 3, 9, 1, 77]);
        let b = ZpPoly::from_coeffs(vec![2, 11, 4]);
        let (q, r) = a.div_rem(&b, p);
        assert!(r.degree().unwrap_or(0) < 2);
        assert_eq!(q.mul(&b, p).add(&r, p), a);
    }

    #[test]
    fn gcd_of_products() {
        let p = p();
        let a = ZpPoly::from_roots(&[3, 5, 7], p);
        let b = ZpPoly::from_roots(&[5, 7, 11, 13], p);
        assert_eq!(a.gcd(&b, p), ZpPoly::from_roots(&[5, 7], p));
    }

    #[test]
    fn pow_mod_matches_repeated_multiplication() {
        let p = p();
        let m = ZpPoly::from_coeffs(vec![3, 1, 4, 1]);
        let x = ZpPoly::from_coeffs(vec![1, 1]);
        let mut naive = ZpPoly::one();
        for _ in 0..13 {
            naive = naive.mul(&x, p).rem(&m, p);
        }
        assert_eq!(x.pow_mod(13, &m, p), naive);
    }

    #[test]
    fn strip_x() {
        let f = ZpPoly::from_coeffs(vec![0, 0, 2, 1]);
        assert_eq!(f.strip_x_factors().coeffs(), &[2, 1]);
        assert_eq!(ZpPoly::zero().strip_x_factors(), ZpPoly::zero());
    }
}
