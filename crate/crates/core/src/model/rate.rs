use crate::error::{Error, Result};

/// Achievable rate `log2(|s|^2 / (P_MUI + sigma_w^2))` in bits per channel use.
///
/// The noise power sits in the denominator next to the MUI power, so the
/// rate stays finite when the interference vanishes.
pub fn per_user_rate(mui_power: f64, symbol_power: f64, noise_power: f64) -> Result<f64> {
    if mui_power < 0.0 || mui_power.is_nan() {
        return Err(Error::NegativeMuiPower(mui_power));
    }
    if symbol_power.is_nan() || symbol_power <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "symbol power {symbol_power} must be > 0"
        )));
    }
    if noise_power.is_nan() || noise_power <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "noise power {noise_power} must be > 0"
        )));
    }
    Ok((symbol_power / (mui_power + noise_power)).log2())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interference_free_closed_form() {
        let r = per_user_rate(0.0, 1.0, 1e-3).unwrap();
        assert!((r - 1000f64.log2()).abs() < 1e-12);
        assert!((r - 9.965_784_284_662_087).abs() < 1e-12);
    }

    #[test]
    fn unity_argument() {
        assert_eq!(per_user_rate(0.75, 1.0, 0.25).unwrap(), 0.0);
    }

    #[test]
    fn rejects_negative_power() {
        assert!(matches!(
            per_user_rate(-1e-9, 1.0, 1e-3),
            Err(Error::NegativeMuiPower(_))
        ));
        assert!(per_user_rate(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn strictly_decreasing_in_mui() {
        let mut prev = f64::INFINITY;
        for k in 0..50 {
            let r = per_user_rate(k as f64 * 0.1, 1.0, 1e-3).unwrap();
            assert!(r < prev);
            prev = r;
        }
    }
}
