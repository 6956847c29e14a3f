use core::fmt;


use crate::{Error, Result};

/// Asymmetry constant used whenever the caller does not pick one.
pub const DEFAULT_C: f64 = 0.8;

/// The four free parameters in the order used by every inference routine:
/// `(A, B or log B, g, k-or-h)`.
pub type Theta = [f64; 4];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// g-and-k: tails elongated by `(1 + z^2)^k`.
    GK,
    /// Generalised g-and-h: tails elongated by `exp(h z^2 / 2)`.
    GH,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::GK => f.write_str("gk"),
            Family::GH => f.write_str("gh"),
        }
    }
}

impl core::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gk" | "GK" | "g-and-k" => Ok(Family::GK),
            "gh" | "GH" | "g-and-h" => Ok(Family::GH),
            _ => Err(Error::Config("family must be `gk` or `gh`")),
        }
    }
}

/// Parameters of a g-and-k or g-and-h distribution.
///
/// Construction checks that every value is finite and `B > 0`. Whether the
/// quantile function is actually increasing is *not* checked here; see
/// [`crate::validity`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QdParams {
    family: Family,
    a: f64,
    b: f64,
    g: f64,
    kh: f64,
    c: f64,
}

impl QdParams {
    pub fn new(family: Family, a: f64, b: f64, g: f64, kh: f64) -> Result<Self> {
        Self::with_c(family, a, b, g, kh, DEFAULT_C)
    }

    pub fn with_c(family: Family, a: f64, b: f64, g: f64, kh: f64, c: f64) -> Result<Self> {
        for (what, v) in [("A", a), ("B", b), ("g", g), ("k/h", kh), ("c", c)] {
            if !v.is_finite() {
                return Err(Error::NonFinite { what });
            }
        }
        if b <= 0.0 {
            return Err(Error::NonPositiveScale(b));
        }
        Ok(Self {
            family,
            a,
            b,
            g,
            kh,
            c,
        })
    }

    /// Builds parameters from an inference state vector, exponentiating the
    /// second component when `log_b` is set.
    pub fn from_theta(family: Family, theta: &Theta, log_b: bool, c: f64) -> Result<Self> {
        let b = if log_b { theta[1].exp() } else { theta[1] };
        Self::with_c(family, theta[0], b, theta[2], theta[3], c)
    }

    pub fn family(&self) -> Family {
        self.family
    }
    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn g(&self) -> f64 {
        self.g
    }
    /// `k` for g-and-k, `h` for g-and-h.
    pub fn kh(&self) -> f64 {
        self.kh
    }
    pub fn c(&self) -> f64 {
        self.c
    }

    /// State vector `(A, B, g, kh)`, or `(A, log B, g, kh)` when `log_b` is set.
    pub fn theta(&self, log_b: bool) -> Theta {
        let b = if log_b { self.b.ln() } else { self.b };
        [self.a, b, self.g, self.kh]
    }

    /// The same distribution written with `(-g, -c)`.
    pub fn mirrored(&self) -> Self {
        Self {
            g: -self.g,
            c: -self.c,
            ..*self
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_scale_and_non_finite() {
        assert_eq!(
            QdParams::new(Family::GK, 0.0, 0.0, 0.0, 0.0),
            Err(Error::NonPositiveScale(0.0))
        );
        assert!(QdParams::new(Family::GK, 0.0, -1.0, 0.0, 0.0).is_err());
        assert_eq!(
            QdParams::new(Family::GH, f64::NAN, 1.0, 0.0, 0.0),
            Err(Error::NonFinite { what: "A" })
        );
        assert!(QdParams::with_c(Family::GH, 0.0, 1.0, 0.0, f64::INFINITY, 0.8).is_err());
    }

    #[test]
    fn theta_round_trip_with_log_b() {
        let p = QdParams::new(Family::GK, 3.0, 2.5, 2.0, 0.5).unwrap();
        let t = p.theta(true);
        let q = QdParams::from_theta(Family::GK, &t, true, DEFAULT_C).unwrap();
        assert!((q.b() - 2.5).abs() < 1e-14);
        assert_eq!(p.c(), 0.8);
    }
}
