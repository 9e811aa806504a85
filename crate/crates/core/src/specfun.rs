//! Modified Bessel functions `I₀, I₁, K₀, K₁` and harmonic numbers, summed
//! directly from their ascending power series.
//!
//! For small arguments the series is summed in `f64`. Beyond
//! [`F64_SERIES_LIMIT`] the logarithmic terms of `K₀`/`K₁` cancel against
//! terms of size `~I₀(z)²`, so the same series is summed in 256-bit binary
//! floating point and rounded back to `f64` at the end.

use std::sync::Once;

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;

use crate::error::{Error, Result};

/// Euler–Mascheroni constant `C`.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `C` to enough digits for the extended-precision path.
const EULER_GAMMA_DIGITS: &str =
    "0.57721566490153286060651209008240243104215933593992359880576723488486772677766467";

/// Relative truncation tolerance of the `f64` series.
pub const SERIES_REL_TOL: f64 = 1e-15;
/// Hard cap on the number of series terms in the `f64` path.
pub const SERIES_TERM_CAP: usize = 60;
/// Largest argument for which accuracy has been validated.
pub const VALIDATED_MAX: f64 = 30.0;
/// Above this argument `K₀`/`K₁` switch to the extended-precision summation.
pub const F64_SERIES_LIMIT: f64 = 4.0;

const WIDE_BITS: usize = 256;
const WIDE_REL_TOL: f64 = 1e-70;
const WIDE_TERM_CAP: usize = 400;

static RANGE_WARNING: Once = Once::new();

/// Order of a modified Bessel function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    Zero,
    One,
}

/// All four modified Bessel functions at one argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselSet {
    pub i0: f64,
    pub i1: f64,
    pub k0: f64,
    pub k1: f64,
}

/// Harmonic number `ψ(n) = Σ_{m=1}^{n} 1/m`, with `ψ(0) = 0`.
pub fn psi(n: usize) -> f64 {
    (1..=n).map(|m| 1.0 / m as f64).sum()
}

/// `I₀(z)` or `I₁(z)` for `z ≥ 0`.
pub fn bessel_i(order: Order, z: f64) -> Result<f64> {
    if !(z >= 0.0) || !z.is_finite() {
        return Err(Error::Domain {
            function: "bessel_i",
            value: z,
        });
    }
    warn_if_out_of_range(z);
    let (i0, i1) = i_series(z);
    Ok(match order {
        Order::Zero => i0,
        Order::One => i1,
    })
}

/// `K₀(z)` or `K₁(z)` for `z > 0`.
pub fn bessel_k(order: Order, z: f64) -> Result<f64> {
    let set = bessel_set(z)?;
    Ok(match order {
        Order::Zero => set.k0,
        Order::One => set.k1,
    })
}

/// Evaluates `I₀, I₁, K₀, K₁` together, sharing the series terms.
pub fn bessel_set(z: f64) -> Result<BesselSet> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::Domain {
            function: "bessel_k",
            value: z,
        });
    }
    warn_if_out_of_range(z);
    if z <= F64_SERIES_LIMIT {
        Ok(series_f64(z))
    } else {
        Ok(series_wide(z))
    }
}

/// `(I₀(z), I₁(z))`; also valid at `z = 0`.
pub(crate) fn i_series(z: f64) -> (f64, f64) {
    let half = 0.5 * z;
    let q = half * half;
    let mut t = 1.0;
    let mut i0 = 1.0;
    let mut i1 = half;
    for n in 1..SERIES_TERM_CAP {
        let nf = n as f64;
        t *= q / (nf * nf);
        let t1 = t * half / (nf + 1.0);
        i0 += t;
        i1 += t1;
        if t < SERIES_REL_TOL * i0 && t1 <= SERIES_REL_TOL * i1 {
            break;
        }
    }
    (i0, i1)
}

fn series_f64(z: f64) -> BesselSet {
    let half = 0.5 * z;
    let q = half * half;
    let log_term = half.ln() + EULER_GAMMA;

    // n = 0 terms
    let mut t = 1.0;
    let mut i0 = 1.0;
    let mut i1 = half;
    let mut s0 = 0.0; // Σ ψ(n) t_n
    let mut s1 = half; // Σ (ψ(n+1) + ψ(n)) t_n (z/2)/(n+1)
    let mut h = 0.0; // ψ(n)
    for n in 1..SERIES_TERM_CAP {
        let nf = n as f64;
        t *= q / (nf * nf);
        let h_next = h + 1.0 / nf;
        let h_next2 = h_next + 1.0 / (nf + 1.0);
        let t1 = t * half / (nf + 1.0);
        i0 += t;
        i1 += t1;
        s0 += h_next * t;
        s1 += (h_next2 + h_next) * t1;
        h = h_next;
        if t < SERIES_REL_TOL * i0
            && t1 <= SERIES_REL_TOL * i1
            && h_next * t < SERIES_REL_TOL * s0
            && (h_next2 + h_next) * t1 < SERIES_REL_TOL * s1
        {
            break;
        }
    }
    BesselSet {
        i0,
        i1,
        k0: -log_term * i0 + s0,
        k1: 1.0 / z + log_term * i1 - 0.5 * s1,
    }
}

type Wide = FBig<HalfEven, 2>;

fn wide(x: f64) -> Wide {
    Wide::try_from(x)
        .expect("finite f64 converts exactly")
        .with_precision(WIDE_BITS)
        .value()
}

fn wide_int(n: usize) -> Wide {
    Wide::from(n as u64).with_precision(WIDE_BITS).value()
}

fn wide_euler() -> Wide {
    let dec: FBig<HalfEven, 10> = EULER_GAMMA_DIGITS.parse().expect("valid decimal literal");
    dec.with_base_and_precision::<2>(WIDE_BITS).value()
}

fn series_wide(z: f64) -> BesselSet {
    let one = wide_int(1);
    let zw = wide(z);
    let half = &zw / wide_int(2);
    let q = &half * &half;
    let log_term = half.ln() + wide_euler();

    let mut t = one.clone();
    let mut i0 = one.clone();
    let mut i1 = half.clone();
    let mut s0 = wide_int(0);
    let mut s1 = half.clone();
    let mut h = wide_int(0);
    for n in 1..WIDE_TERM_CAP {
        let nw = wide_int(n);
        t = &t * &q / (&nw * &nw);
        let h_next = &h + &one / &nw;
        let h_next2 = &h_next + &one / wide_int(n + 1);
        let t1 = &t * &half / wide_int(n + 1);
        let c0 = &h_next * &t;
        let c1 = (&h_next2 + &h_next) * &t1;
        i0 = &i0 + &t;
        i1 = &i1 + &t1;
        s0 = &s0 + &c0;
        s1 = &s1 + &c1;
        h = h_next;
        let small = |term: &Wide, sum: &Wide| {
            term.to_f64().value().abs() < WIDE_REL_TOL * sum.to_f64().value().abs()
        };
        if small(&t, &i0) && small(&t1, &i1) && small(&c0, &s0) && small(&c1, &s1) {
            break;
        }
    }
    let k0 = &s0 - &log_term * &i0;
    let k1 = &one / &zw + &log_term * &i1 - &s1 / wide_int(2);
    BesselSet {
        i0: i0.to_f64().value(),
        i1: i1.to_f64().value(),
        k0: k0.to_f64().value(),
        k1: k1.to_f64().value(),
    }
}

fn warn_if_out_of_range(z: f64) {
    if z > VALIDATED_MAX {
        RANGE_WARNING.call_once(|| {
            log::warn!(
                "Bessel series evaluated at z = {z} > {VALIDATED_MAX}; accuracy is not validated there"
            );
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wronskian(z: f64) -> f64 {
        let b = bessel_set(z).unwrap();
        z * (b.i0 * b.k1 + b.i1 * b.k0) - 1.0
    }

    #[test]
    fn psi_values() {
        assert_eq!(psi(0), 0.0);
        assert_eq!(psi(1), 1.0);
        assert!((psi(3) - 11.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn i_at_zero() {
        assert_eq!(bessel_i(Order::Zero, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_i(Order::One, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn i0_at_one_matches_independent_sum() {
        // Σ (1/(n!)²)(1/2)^{2n}, 40 terms, computed term by term from factorials
        let mut expected = 0.0;
        let mut fact = 1.0;
        for n in 0..40 {
            if n > 0 {
                fact *= n as f64;
            }
            expected += 0.25f64.powi(n) / (fact * fact);
        }
        let got = bessel_i(Order::Zero, 1.0).unwrap();
        assert!((got - expected).abs() < 1e-15);
        assert!((got - 1.266_065_877_752_008_4).abs() < 1e-15);
    }

    #[test]
    fn reference_values() {
        // Abramowitz & Stegun table values
        let b = bessel_set(1.0).unwrap();
        assert!((b.i1 - 0.565_159_103_992_485).abs() < 1e-15);
        assert!((b.k0 - 0.421_024_438_240_708_3).abs() < 1e-14);
        assert!((b.k1 - 0.601_907_230_197_234_6).abs() < 1e-14);
        let b = bessel_set(10.0).unwrap();
        assert!((b.k0 / 1.778_006_231_616_917e-5 - 1.0).abs() < 1e-12);
        assert!((b.k1 / 1.864_877_345_382_558e-5 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn k1_leading_term() {
        let z = 1e-8;
        let k1 = bessel_k(Order::One, z).unwrap();
        assert!((z * k1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn k0_small_argument() {
        let z = 1e-6;
        let k0 = bessel_k(Order::Zero, z).unwrap();
        assert!((k0 + ((z / 2.0).ln() + EULER_GAMMA)).abs() < 1e-9);
    }

    #[test]
    fn wronskian_at_one() {
        assert!(wronskian(1.0).abs() < 1e-12);
    }

    #[test]
    fn wronskian_both_paths() {
        for &z in &[0.05, 0.5, 2.0, 3.999, 4.001, 8.0, 17.0, 30.0] {
            assert!(wronskian(z).abs() < 1e-10, "z = {z}: {}", wronskian(z));
        }
    }

    #[test]
    fn k_domain_error() {
        assert!(bessel_k(Order::Zero, 0.0).is_err());
        assert!(bessel_k(Order::One, -1.0).is_err());
        assert!(bessel_i(Order::Zero, -0.1).is_err());
        assert!(bessel_set(f64::NAN).is_err());
    }

    #[test]
    fn deterministic() {
        let a = bessel_set(12.345).unwrap();
        let b = bessel_set(12.345).unwrap();
        assert_eq!(a.k0.to_bits(), b.k0.to_bits());
        assert_eq!(a.k1.to_bits(), b.k1.to_bits());
    }
}
