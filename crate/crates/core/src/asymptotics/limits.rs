//! Pointwise limits of the scaled kernel as `d -> infinity`.

use statrs::function::gamma::ln_gamma;

use crate::error::{KssError, Result};
use crate::numerics::PowerSeries;
use crate::scalar::Scalar;

/// Below this `t` both limits are evaluated from their series in `u = t^2`.
pub const T_SERIES: f64 = 0.05;

const SERIES_LEN: usize = 10;

fn check_t<T: Scalar>(t: T) -> Result<()> {
    if !(t > T::zero()) || t.is_nan() {
        return Err(KssError::OutOfRange {
            name: "t",
            value: t.to_f64_lossy(),
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    Ok(())
}

fn factorial<T: Scalar>(k: usize) -> T {
    (1..=k).fold(T::one(), |a, i| a * T::of_u64(i as u64))
}

/// `sigma_bar^2(t) = 1 - t^2 e^{-t^2} / (1 - e^{-t^2})`.
pub fn sigma_bar_sq<T: Scalar>(t: T) -> Result<T> {
    check_t(t)?;
    let u = t * t;
    if t.to_f64_lossy() < T_SERIES {
        // 1 - u / (e^u - 1) = -sum_{n>=1} B_n u^n / n!, summed without the
        // leading 1 so the small result keeps full relative precision.
        let b = [
            T::zero(),
            T::of(0.5),
            T::of(-1.0 / 12.0),
            T::zero(),
            T::of(1.0 / 720.0),
            T::zero(),
            T::of(-1.0 / 30240.0),
            T::zero(),
            T::of(1.0 / 1209600.0),
        ];
        return Ok(PowerSeries::new(b.to_vec()).eval(u));
    }
    let e = (-u).exp();
    Ok(T::one() - u * e / -(-u).exp_m1())
}

/// `rho_bar(t) = (1 - t^2 - e^{-t^2}) e^{-t^2/2} / (1 - (1 + t^2) e^{-t^2})`.
pub fn rho_bar<T: Scalar>(t: T) -> Result<T> {
    check_t(t)?;
    let u = t * t;
    let half = T::of(0.5);
    if t.to_f64_lossy() < T_SERIES {
        // Numerator and denominator both start at u^2:
        //   1 - u - e^{-u}       = -sum_{k>=2} (-u)^k / k!
        //   1 - (1 + u) e^{-u}   =  sum_{k>=2} (-1)^k (k - 1) u^k / k!
        let num: Vec<T> = (2..2 + SERIES_LEN)
            .map(|k| {
                let s = if k % 2 == 0 { -T::one() } else { T::one() };
                s / factorial::<T>(k)
            })
            .collect();
        let den: Vec<T> = (2..2 + SERIES_LEN)
            .map(|k| {
                let s = if k % 2 == 0 { T::one() } else { -T::one() };
                s * T::of_u64(k as u64 - 1) / factorial::<T>(k)
            })
            .collect();
        let ratio = PowerSeries::new(num).div(&PowerSeries::new(den));
        return Ok((-half * u).exp() * ratio.eval(u));
    }
    let em1 = (-u).exp_m1();
    let e = em1 + T::one();
    let num = -u - em1;
    let den = -em1 - u * e;
    Ok(num * (-half * u).exp() / den)
}

/// `m_{k,j} = E ||xi_k||^j = 2^{j/2} Gamma((j + k) / 2) / Gamma(k / 2)` for a
/// standard Gaussian `xi_k` in `R^k`.
pub fn m_kj(k: usize, j: u32) -> Result<f64> {
    if k == 0 {
        return Err(KssError::InvalidDimension { got: 0, min: 1 });
    }
    let (kf, jf) = (k as f64, j as f64);
    Ok((0.5 * jf * std::f64::consts::LN_2 + ln_gamma((jf + kf) / 2.0) - ln_gamma(kf / 2.0)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_and_closed_forms_meet() {
        let t = T_SERIES;
        let u: f64 = t * t;
        let e = (-u).exp();
        let s_direct = 1.0 - u * e / (1.0 - e);
        let r_direct = (1.0 - u - e) * (-u / 2.0).exp() / (1.0 - (1.0 + u) * e);
        let s = sigma_bar_sq(t * (1.0 - 1e-15)).unwrap();
        let r = rho_bar(t * (1.0 - 1e-15)).unwrap();
        assert!((s - s_direct).abs() < 1e-12);
        // The direct rho loses about 8 digits to cancellation at t = 0.05.
        assert!((r - r_direct).abs() < 1e-7, "{r} {r_direct}");
    }

    #[test]
    fn limits_at_the_ends() {
        assert!(sigma_bar_sq(1e-4f64).unwrap() < 1e-8);
        assert!((rho_bar(1e-4f64).unwrap() + 1.0).abs() < 1e-7);
        assert!((sigma_bar_sq(12.0f64).unwrap() - 1.0).abs() < 1e-15);
        assert!(rho_bar(12.0f64).unwrap().abs() < 1e-28);
        assert!(sigma_bar_sq(0.0f64).is_err());
    }

    #[test]
    fn chi_moments() {
        assert!((m_kj(1, 1).unwrap() - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-14);
        assert!((m_kj(3, 1).unwrap() - 2.0 * (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-13);
        for k in 1..10 {
            assert!((m_kj(k, 2).unwrap() - k as f64).abs() < 1e-12);
        }
    }
}
