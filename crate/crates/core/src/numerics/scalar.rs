//! The two arithmetic backends: exact rationals and binary64 floats.
//!
//! Every matrix carries a single scalar type, so the backend is uniform by
//! construction. Kernel routines whose algorithms differ between backends
//! (elimination, rank, semidefiniteness) dispatch through [`Scalar`].

use std::fmt::{Debug, Display};
use std::ops::{Add, AddAssign, Div, Mul, Sub, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

use super::{exact, float, Matrix, NumericsError, PsdVerdict, Tolerances};

/// Exact rational scalar: arbitrary-precision numerator over a positive
/// denominator, always in lowest terms.
pub type Rational = BigRational;

/// Which arithmetic a computation runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Rational,
    Float,
}

impl Display for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Backend::Rational => f.write_str("rational"),
            Backend::Float => f.write_str("float"),
        }
    }
}

impl std::str::FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rational" | "exact" => Ok(Backend::Rational),
            "float" | "f64" => Ok(Backend::Float),
            other => Err(format!("unknown backend `{other}` (expected rational or float)")),
        }
    }
}

pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialOrd
    + Num
    + Signed
    + Send
    + Sync
    + 'static
    + for<'a> Add<&'a Self, Output = Self>
    + for<'a> Sub<&'a Self, Output = Self>
    + for<'a> Mul<&'a Self, Output = Self>
    + for<'a> Div<&'a Self, Output = Self>
    + for<'a> AddAssign<&'a Self>
    + for<'a> SubAssign<&'a Self>
{
    const BACKEND: Backend;

    fn from_rational(value: &Rational) -> Self;

    fn from_i64(value: i64) -> Self;

    fn to_f64(&self) -> f64;

    /// Exact conversion to a rational where one exists (always for rationals,
    /// for every finite float).
    fn to_rational(&self) -> Option<Rational>;

    /// `false` only for floats that overflowed or became NaN.
    fn is_finite(&self) -> bool {
        true
    }

    /// Bit length of the stored representation: the larger of numerator and
    /// denominator for rationals, zero for floats.
    fn size_bits(&self) -> u64 {
        0
    }

    /// `|self| <= tol * scale` on floats; exact comparison with zero on
    /// rationals.
    fn is_negligible(&self, scale: f64, tol: f64) -> bool;

    fn solve_square(
        m: &Matrix<Self>,
        b: &[Self],
        tol: &Tolerances,
    ) -> Result<Vec<Self>, NumericsError>;

    fn rank(m: &Matrix<Self>, tol: &Tolerances) -> usize;

    fn psd_check(m: &Matrix<Self>, tol: &Tolerances) -> Result<PsdVerdict, NumericsError>;

    /// PSD verdict and rank of a symmetric matrix from one factorization.
    fn psd_and_rank(m: &Matrix<Self>, tol: &Tolerances) -> Result<(PsdVerdict, usize), NumericsError>;

    /// Solves a possibly non-square but consistent system. `None` when the
    /// system has no solution (up to tolerance on floats).
    fn solve_consistent(m: &Matrix<Self>, b: &[Self], tol: &Tolerances) -> Option<Vec<Self>>;

    /// Symmetry of a single entry pair.
    fn symmetric_pair(a: &Self, b: &Self, scale: f64, tol: &Tolerances) -> bool;
}

impl Scalar for Rational {
    const BACKEND: Backend = Backend::Rational;

    fn from_rational(value: &Rational) -> Self {
        value.clone()
    }

    fn from_i64(value: i64) -> Self {
        Rational::from_integer(BigInt::from(value))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn to_rational(&self) -> Option<Rational> {
        Some(self.clone())
    }

    fn size_bits(&self) -> u64 {
        self.numer().bits().max(self.denom().bits())
    }

    fn is_negligible(&self, _scale: f64, _tol: f64) -> bool {
        self.is_zero()
    }

    fn solve_square(
        m: &Matrix<Self>,
        b: &[Self],
        _tol: &Tolerances,
    ) -> Result<Vec<Self>, NumericsError> {
        exact::solve_square(m, b)
    }

    fn rank(m: &Matrix<Self>, _tol: &Tolerances) -> usize {
        exact::rank(m)
    }

    fn psd_check(m: &Matrix<Self>, tol: &Tolerances) -> Result<PsdVerdict, NumericsError> {
        m.require_symmetric(tol)?;
        Ok(exact::psd_check(m))
    }

    fn psd_and_rank(m: &Matrix<Self>, tol: &Tolerances) -> Result<(PsdVerdict, usize), NumericsError> {
        m.require_symmetric(tol)?;
        Ok(exact::psd_and_rank(m))
    }

    fn solve_consistent(m: &Matrix<Self>, b: &[Self], _tol: &Tolerances) -> Option<Vec<Self>> {
        exact::solve_consistent(m, b)
    }

    fn symmetric_pair(a: &Self, b: &Self, _scale: f64, _tol: &Tolerances) -> bool {
        a == b
    }
}

impl Scalar for f64 {
    const BACKEND: Backend = Backend::Float;

    fn from_rational(value: &Rational) -> Self {
        ToPrimitive::to_f64(value).unwrap_or(f64::NAN)
    }

    fn from_i64(value: i64) -> Self {
        value as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn to_rational(&self) -> Option<Rational> {
        Rational::from_float(*self)
    }

    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }

    fn is_negligible(&self, scale: f64, tol: f64) -> bool {
        self.abs() <= tol * scale
    }

    fn solve_square(
        m: &Matrix<Self>,
        b: &[Self],
        tol: &Tolerances,
    ) -> Result<Vec<Self>, NumericsError> {
        float::solve_square(m, b, tol)
    }

    fn rank(m: &Matrix<Self>, tol: &Tolerances) -> usize {
        float::rank(m, tol)
    }

    fn psd_check(m: &Matrix<Self>, tol: &Tolerances) -> Result<PsdVerdict, NumericsError> {
        m.require_symmetric(tol)?;
        float::psd_check(m, tol)
    }

    fn psd_and_rank(m: &Matrix<Self>, tol: &Tolerances) -> Result<(PsdVerdict, usize), NumericsError> {
        m.require_symmetric(tol)?;
        float::psd_and_rank(m, tol)
    }

    fn solve_consistent(m: &Matrix<Self>, b: &[Self], tol: &Tolerances) -> Option<Vec<Self>> {
        float::solve_consistent(m, b, tol)
    }

    fn symmetric_pair(a: &Self, b: &Self, scale: f64, tol: &Tolerances) -> bool {
        (a - b).abs() <= tol.sym * scale.max(1.0)
    }
}

/// Parses `p/q`, integers, and decimal literals (with optional exponent) into
/// an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational, String> {
    let text = text.trim();
    if text.is_empty() {
        return Err("empty number".into());
    }
    if let Some((num, den)) = text.split_once('/') {
        let num: BigInt = num
            .trim()
            .parse()
            .map_err(|_| format!("bad numerator in `{text}`"))?;
        let den: BigInt = den
            .trim()
            .parse()
            .map_err(|_| format!("bad denominator in `{text}`"))?;
        if den.is_zero() {
            return Err(format!("zero denominator in `{text}`"));
        }
        return Ok(Rational::new(num, den));
    }
    parse_decimal(text).ok_or_else(|| format!("not a number: `{text}`"))
}

fn parse_decimal(text: &str) -> Option<Rational> {
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (&text[..pos], text[pos + 1..].parse::<i64>().ok()?),
        None => (text, 0),
    };
    let (negative, digits) = match mantissa.as_bytes().first()? {
        b'-' => (true, &mantissa[1..]),
        b'+' => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut value = Rational::from_integer(BigInt::from_str_radix(&all_digits, 10).ok()?);
    let scale = exponent - frac_part.len() as i64;
    if scale.unsigned_abs() > 4096 {
        return None;
    }
    let ten = Rational::from_integer(BigInt::from(10));
    let power = num_traits::pow(ten, scale.unsigned_abs() as usize);
    if scale >= 0 {
        value *= power;
    } else {
        value /= power;
    }
    Some(if negative { -value } else { value })
}

/// Canonical text form: plain integers stay integers, everything else is
/// written as `p/q`.
pub fn format_rational(value: &Rational) -> String {
    if value.is_integer() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

/// Exact decimal text when the denominator has only factors 2 and 5.
pub fn terminating_decimal(value: &Rational) -> Option<String> {
    if value.is_integer() {
        return Some(value.numer().to_string());
    }
    let mut den = value.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let (mut twos, mut fives) = (0usize, 0usize);
    while (&den % &two).is_zero() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if !den.is_one() {
        return None;
    }
    let places = twos.max(fives);
    let scaled = value * Rational::from_integer(num_traits::pow(BigInt::from(10), places));
    debug_assert!(scaled.is_integer());
    let digits = scaled.numer().abs().to_string();
    let digits = format!("{digits:0>width$}", width = places + 1);
    let (int_part, frac_part) = digits.split_at(digits.len() - places);
    let sign = if value.is_negative() { "-" } else { "" };
    Some(format!("{sign}{int_part}.{frac_part}"))
}

/// Rounds half away from zero to `places` decimals, exactly.
pub fn round_decimal(value: &Rational, places: u32) -> Rational {
    let factor = Rational::from_integer(num_traits::pow(BigInt::from(10), places as usize));
    let scaled = value * &factor;
    scaled.round() / factor
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn parses_all_numeral_forms() {
        assert_eq!(parse_rational("3").unwrap(), q(3, 1));
        assert_eq!(parse_rational("-0.5").unwrap(), q(-1, 2));
        assert_eq!(parse_rational("6/4").unwrap(), q(3, 2));
        assert_eq!(parse_rational("1.25e2").unwrap(), q(125, 1));
        assert_eq!(parse_rational("25E-3").unwrap(), q(1, 40));
        assert_eq!(parse_rational(".5").unwrap(), q(1, 2));
    }

    #[test]
    fn rejects_malformed_numerals() {
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1.2.3").is_err());
        assert!(parse_rational("").is_err());
        assert!(parse_rational("-").is_err());
    }

    #[test]
    fn lowest_terms_positive_denominator() {
        let r = parse_rational("4/-6").unwrap();
        assert_eq!(r.numer(), &BigInt::from(-2));
        assert_eq!(r.denom(), &BigInt::from(3));
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(terminating_decimal(&q(-1, 8)).unwrap(), "-0.125");
        assert_eq!(terminating_decimal(&q(7, 1)).unwrap(), "7");
        assert_eq!(terminating_decimal(&q(1, 3)), None);
        assert_eq!(format_rational(&q(1, 3)), "1/3");
    }

    #[test]
    fn rounding_is_half_away_from_zero() {
        assert_eq!(round_decimal(&q(-1640625, 100000), 4), q(-164063, 10000));
        assert_eq!(round_decimal(&q(278125, 100000), 4), q(27813, 10000));
    }
}
