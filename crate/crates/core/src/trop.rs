//! Points of the tropical torus ℝⁿ/ℝ𝟙 and the distances defined on it.

use std::fmt;
use std::ops::Index;

use crate::error::{Error, Result};
use crate::scalar::{sum, Scalar};

/// Relative tolerance for torus equality in float mode.
pub const TORUS_EQ_TOLERANCE: f64 = 1e-8;

/// A representative of a point in the tropical torus. Two representatives
/// describe the same point iff they differ by a constant vector.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusPoint<S>(Vec<S>);

impl<S: Scalar> TorusPoint<S> {
    pub fn new(coords: Vec<S>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "torus points need at least 2 coordinates, got {}",
                coords.len()
            )));
        }
        Ok(TorusPoint(coords))
    }

    pub fn from_ints(coords: &[i64]) -> Self {
        TorusPoint::new(coords.iter().map(|&v| S::from_int(v)).collect())
            .expect("at least two coordinates")
    }

    pub fn zeros(n: usize) -> Self {
        TorusPoint(vec![S::zero(); n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn coords(&self) -> &[S] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<S> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, S> {
        self.0.iter()
    }

    /// `self + λ𝟙`.
    pub fn shifted(&self, lambda: &S) -> Self {
        TorusPoint(self.0.iter().map(|v| v.clone() + lambda.clone()).collect())
    }

    pub fn max_coord(&self) -> S {
        self.0
            .iter()
            .skip(1)
            .fold(self.0[0].clone(), |m, v| S::max_of(m, v.clone()))
    }

    pub fn min_coord(&self) -> S {
        self.0
            .iter()
            .skip(1)
            .fold(self.0[0].clone(), |m, v| S::min_of(m, v.clone()))
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(|v| v.to_f64_lossy()).collect()
    }
}

impl<S> Index<usize> for TorusPoint<S> {
    type Output = S;

    fn index(&self, i: usize) -> &S {
        &self.0[i]
    }
}

impl<S: fmt::Display> fmt::Display for TorusPoint<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

fn check_len<S>(x: &TorusPoint<S>, y: &TorusPoint<S>) -> Result<()> {
    if x.0.len() != y.0.len() {
        return Err(Error::DimensionMismatch {
            expected: x.0.len(),
            got: y.0.len(),
        });
    }
    Ok(())
}

/// Asymmetric tropical distance `Σᵢ(yᵢ − xᵢ) + n·maxᵢ(xᵢ − yᵢ)`.
///
/// The first argument is the site, the second the centroid or median it is
/// measured against.
pub fn asym_dist<S: Scalar>(x: &TorusPoint<S>, y: &TorusPoint<S>) -> Result<S> {
    check_len(x, y)?;
    Ok(asym_dist_unchecked(x.coords(), y.coords()))
}

pub(crate) fn asym_dist_unchecked<S: Scalar>(x: &[S], y: &[S]) -> S {
    let n = S::from_int(x.len() as i64);
    let mut total = S::zero();
    let mut worst: Option<S> = None;
    for (a, b) in x.iter().zip(y) {
        let diff = a.clone() - b.clone();
        total = total - diff.clone();
        worst = Some(match worst {
            None => diff,
            Some(w) => S::max_of(w, diff),
        });
    }
    total + n * worst.expect("nonempty")
}

/// Symmetric tropical distance `maxᵢ(xᵢ − yᵢ) − minⱼ(xⱼ − yⱼ)`.
pub fn sym_dist<S: Scalar>(x: &TorusPoint<S>, y: &TorusPoint<S>) -> Result<S> {
    check_len(x, y)?;
    let diff: Vec<S> = x.iter().zip(y.iter()).map(|(a, b)| a.clone() - b.clone()).collect();
    let diff = TorusPoint(diff);
    Ok(diff.max_coord() - diff.min_coord())
}

/// Tropical linear combination `max_k(point_k + coeff_k·𝟙)`, coordinatewise.
pub fn trop_combine<S: Scalar>(points: &[TorusPoint<S>], coeffs: &[S]) -> Result<TorusPoint<S>> {
    let first = points.first().ok_or(Error::EmptyInput("no points to combine"))?;
    if points.len() != coeffs.len() {
        return Err(Error::DimensionMismatch {
            expected: points.len(),
            got: coeffs.len(),
        });
    }
    let mut out = first.shifted(&coeffs[0]);
    for (p, c) in points.iter().zip(coeffs).skip(1) {
        check_len(first, p)?;
        for (o, v) in out.0.iter_mut().zip(p.iter()) {
            let cand = v.clone() + c.clone();
            if cand > *o {
                *o = cand;
            }
        }
    }
    Ok(out)
}

/// Coordinatewise maximum of a set of points.
pub fn pointwise_max<S: Scalar>(points: &[TorusPoint<S>]) -> Result<TorusPoint<S>> {
    trop_combine(points, &vec![S::zero(); points.len()])
}

#[derive(Debug, Clone, PartialEq)]
pub struct HullMembership<S> {
    pub member: bool,
    /// `λ_k = minᵢ(xᵢ − g_{k,i})`; when `member`, `max_k(g_k + λ_k𝟙)` torus-equals `x`.
    pub coeffs: Vec<S>,
}

pub fn trop_hull_member<S: Scalar>(
    x: &TorusPoint<S>,
    gens: &[TorusPoint<S>],
) -> Result<HullMembership<S>> {
    if gens.is_empty() {
        return Err(Error::EmptyInput("no generators"));
    }
    let mut coeffs = Vec::with_capacity(gens.len());
    for g in gens {
        check_len(x, g)?;
        let diff: Vec<S> = x.iter().zip(g.iter()).map(|(a, b)| a.clone() - b.clone()).collect();
        coeffs.push(TorusPoint(diff).min_coord());
    }
    let projection = trop_combine(gens, &coeffs)?;
    Ok(HullMembership {
        member: torus_eq(&projection, x),
        coeffs,
    })
}

/// Representative with last coordinate zero.
pub fn canonicalize<S: Scalar>(x: &TorusPoint<S>) -> TorusPoint<S> {
    let last = x.0.last().cloned().unwrap_or_else(S::zero);
    x.shifted(&-last)
}

/// Whether `x` and `y` differ by a constant vector. Float mode accepts
/// `max|Δᵢ − mean Δ| ≤ 1e-8·(1 + max|coords|)`.
pub fn torus_eq<S: Scalar>(x: &TorusPoint<S>, y: &TorusPoint<S>) -> bool {
    if x.len() != y.len() {
        return false;
    }
    let diff: Vec<S> = x.iter().zip(y.iter()).map(|(a, b)| a.clone() - b.clone()).collect();
    match S::MODE {
        crate::scalar::Arithmetic::Exact => diff.iter().all(|d| *d == diff[0]),
        crate::scalar::Arithmetic::Float => {
            let n = S::from_int(diff.len() as i64);
            let mean = sum(diff.iter().cloned()) / n;
            let scale = x
                .iter()
                .chain(y.iter())
                .map(|v| v.abs().to_f64_lossy())
                .fold(0.0, f64::max);
            let spread = diff
                .iter()
                .map(|d| (d.clone() - mean.clone()).abs().to_f64_lossy())
                .fold(0.0, f64::max);
            spread <= TORUS_EQ_TOLERANCE * (1.0 + scale)
        }
    }
}

/// Skewness `n − 1` of the asymmetric distance on ℝⁿ/ℝ𝟙.
pub fn skewness_bound<S: Scalar>(n: usize) -> Result<S> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "skewness needs n >= 2, got {n}"
        )));
    }
    Ok(S::from_int(n as i64 - 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    type P = TorusPoint<Rational>;

    fn q(v: i64) -> Rational {
        Rational::from_int(v)
    }

    #[test]
    fn asym_dist_examples() {
        let v1 = P::from_ints(&[1, 3, 0]);
        let v2 = P::from_ints(&[0, 3, 1]);
        let v3 = P::from_ints(&[0, 0, 1]);
        assert_eq!(asym_dist(&v1, &v2).unwrap(), q(3));
        assert_eq!(asym_dist(&v1, &v3).unwrap(), q(6));
        let x = P::from_ints(&[5, 5, 5]);
        assert_eq!(asym_dist(&x, &x).unwrap(), q(0));
        let zero = P::from_ints(&[0, 0, 0]);
        let e1 = P::from_ints(&[-1, 0, 0]);
        assert_eq!(asym_dist(&zero, &e1).unwrap(), q(2));
        assert_eq!(asym_dist(&e1, &zero).unwrap(), q(1));
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let a = P::from_ints(&[0, 0]);
        let b = P::from_ints(&[0, 0, 0]);
        assert!(matches!(asym_dist(&a, &b), Err(Error::DimensionMismatch { .. })));
        assert!(sym_dist(&a, &b).is_err());
        assert!(TorusPoint::<f64>::new(vec![1.0]).is_err());
    }

    #[test]
    fn sym_dist_examples() {
        let x = P::from_ints(&[1, 3, 0]);
        let y = P::from_ints(&[0, 0, 1]);
        assert_eq!(sym_dist(&x, &y).unwrap(), q(4));
        assert_eq!(sym_dist(&x, &x).unwrap(), q(0));
        let z = P::from_ints(&[0, 0, 0, 0]);
        let e = P::from_ints(&[-1, 0, 0, 0]);
        assert_eq!(sym_dist(&z, &e).unwrap(), q(1));
    }

    #[test]
    fn combine_examples() {
        let pts = [P::from_ints(&[0, 0]), P::from_ints(&[1, 0])];
        assert_eq!(
            trop_combine(&pts, &[q(0), q(0)]).unwrap(),
            P::from_ints(&[1, 0])
        );
        let single = [P::from_ints(&[2, 7, 1])];
        let c = trop_combine(&single, &[q(4)]).unwrap();
        assert!(torus_eq(&c, &single[0]));
        let pts = [P::from_ints(&[1, 3, 0]), P::from_ints(&[0, 3, 1])];
        assert_eq!(
            trop_combine(&pts, &[q(0), q(1)]).unwrap(),
            P::from_ints(&[1, 4, 2])
        );
        assert!(trop_combine::<Rational>(&[], &[]).is_err());
        assert!(trop_combine(&pts, &[q(0)]).is_err());
    }

    #[test]
    fn hull_membership_examples() {
        let gens = [P::from_ints(&[0, 0, 0]), P::from_ints(&[0, 2, 0])];
        let inside = P::from_ints(&[0, 1, 0]);
        let m = trop_hull_member(&inside, &gens).unwrap();
        assert!(m.member);
        assert_eq!(trop_combine(&gens, &m.coeffs).unwrap(), inside);
        assert_eq!(m.coeffs, vec![q(0), q(-1)]);

        let outside = P::from_ints(&[0, 0, 1]);
        assert!(!trop_hull_member(&outside, &gens).unwrap().member);

        let own = trop_hull_member(&gens[1], &gens).unwrap();
        assert!(own.member);
        assert_eq!(own.coeffs[1], q(0));

        assert!(trop_hull_member(&inside, &[]).is_err());
    }

    #[test]
    fn canonical_forms() {
        assert_eq!(canonicalize(&P::from_ints(&[1, 2, 3])), P::from_ints(&[-2, -1, 0]));
        assert_eq!(canonicalize(&P::from_ints(&[0, 0, 0])), P::from_ints(&[0, 0, 0]));
        assert_eq!(canonicalize(&P::from_ints(&[5, 5, 6])), P::from_ints(&[-1, -1, 0]));
    }

    #[test]
    fn skewness_values() {
        assert_eq!(skewness_bound::<Rational>(3).unwrap(), q(2));
        assert_eq!(skewness_bound::<Rational>(2).unwrap(), q(1));
        assert_eq!(skewness_bound::<Rational>(28).unwrap(), q(27));
        assert!(skewness_bound::<Rational>(1).is_err());
    }

    #[test]
    fn float_torus_equality_tolerates_rounding() {
        let a = TorusPoint::new(vec![0.1 + 0.2, 1.0, 2.0]).unwrap();
        let b = TorusPoint::new(vec![1.3, 2.0, 3.0]).unwrap();
        assert!(torus_eq(&a, &b));
        let c = TorusPoint::new(vec![1.3001, 2.0, 3.0]).unwrap();
        assert!(!torus_eq(&a, &c));
    }
}
