use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Num, One, ToPrimitive, Zero};

/// Number type the plurality-vote recall formulas are evaluated in.
///
/// Floats give the fast path; [`BigRational`] evaluates the same formulas
/// without rounding, which is what separates "equal" from "within 1e-16".
pub trait ProbabilityField: Num + Clone + PartialOrd + std::fmt::Debug {
    fn from_biguint(n: &BigUint) -> Self;
    fn from_ratio(num: u64, den: u64) -> Self;
    fn to_f64_lossy(&self) -> f64;

    fn half() -> Self {
        Self::one() / (Self::one() + Self::one())
    }
}

macro_rules! float_field {
    ($t:ty) => {
        impl ProbabilityField for $t {
            fn from_biguint(n: &BigUint) -> Self {
                // Exact below 2^53 (every C(N, k) with N <= 50); rounded beyond.
                n.to_f64().map(|v| v as $t).unwrap_or(<$t>::INFINITY)
            }

            fn from_ratio(num: u64, den: u64) -> Self {
                (num as f64 / den as f64) as $t
            }

            fn to_f64_lossy(&self) -> f64 {
                *self as f64
            }
        }
    };
}

float_field!(f32);
float_field!(f64);

impl ProbabilityField for BigRational {
    fn from_biguint(n: &BigUint) -> Self {
        BigRational::from_integer(BigInt::from(n.clone()))
    }

    fn from_ratio(num: u64, den: u64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn to_f64_lossy(&self) -> f64 {
        let (n, d) = (self.numer(), self.denom());
        match (n.to_f64(), d.to_f64()) {
            (Some(a), Some(b)) if a.is_finite() && b.is_finite() => a / b,
            // Huge numerators/denominators: shift both down before dividing.
            _ => {
                let shift = n.bits().max(d.bits()).saturating_sub(1000) as usize;
                (n >> shift).to_f64().unwrap_or(0.0) / (d >> shift).to_f64().unwrap_or(1.0)
            }
        }
    }
}

/// Exact binomial coefficient `C(n, k)`.
pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut c = BigUint::one();
    for i in 0..k {
        // c * (n - i) is divisible by (i + 1) at every step.
        c = c * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), BigUint::from(10u32));
        assert_eq!(binomial(50, 25), BigUint::from(126_410_606_437_752u64));
        assert_eq!(binomial(3, 4), BigUint::zero());
        let row: BigUint = (0..=30).map(|k| binomial(30, k)).sum();
        assert_eq!(row, BigUint::one() << 30);
        assert_eq!(f64::from_biguint(&binomial(50, 25)), 126_410_606_437_752.0);
    }

    #[test]
    fn rational_conversion() {
        assert_eq!(BigRational::from_ratio(3, 5).to_f64_lossy(), 0.6);
        assert_eq!(BigRational::half(), BigRational::from_ratio(1, 2));
    }
}
