use std::fmt;

use serde::{Deserialize, Serialize};

use super::Realisation;
use crate::error::{Error, Result};

/// The closed set of weight-function families.
///
/// `Constant` and `PiecewiseSign` depend only on the cause (simple linkages);
/// the two intermediate families implement side-linkage modulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Constant,
    PiecewiseSign,
    ScaledByIntermediate,
    AffineInIntermediate,
}

impl Family {
    pub fn needs_intermediate(self) -> bool {
        matches!(
            self,
            Family::ScaledByIntermediate | Family::AffineInIntermediate
        )
    }

    pub fn arity(self) -> usize {
        match self {
            Family::Constant | Family::ScaledByIntermediate => 1,
            Family::PiecewiseSign | Family::AffineInIntermediate => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Constant => "constant",
            Family::PiecewiseSign => "piecewise_sign",
            Family::ScaledByIntermediate => "scaled_by_intermediate",
            Family::AffineInIntermediate => "affine_in_intermediate",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Constant { w: f64 },
    PiecewiseSign { w_minus: f64, w_plus: f64 },
    ScaledByIntermediate { w_base: f64 },
    AffineInIntermediate { w0: f64, w1: f64 },
}

/// A parameterised weight function whose output is guaranteed to lie in
/// [-1, 1] for any arguments in [-1, 1]. Parameters are checked once, at
/// construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightFunction(Kind);

fn unit(family: Family, params: &[f64]) -> Result<()> {
    for &p in params {
        if !p.is_finite() || p.abs() > 1.0 {
            return Err(Error::InvalidWeightParams {
                family: family.as_str(),
                params: params.to_vec(),
                reason: "every parameter must lie in [-1, 1]".into(),
            });
        }
    }
    Ok(())
}

impl WeightFunction {
    pub fn constant(w: f64) -> Result<Self> {
        unit(Family::Constant, &[w])?;
        Ok(Self(Kind::Constant { w }))
    }

    pub fn piecewise_sign(w_minus: f64, w_plus: f64) -> Result<Self> {
        unit(Family::PiecewiseSign, &[w_minus, w_plus])?;
        Ok(Self(Kind::PiecewiseSign { w_minus, w_plus }))
    }

    pub fn scaled_by_intermediate(w_base: f64) -> Result<Self> {
        unit(Family::ScaledByIntermediate, &[w_base])?;
        Ok(Self(Kind::ScaledByIntermediate { w_base }))
    }

    pub fn affine_in_intermediate(w0: f64, w1: f64) -> Result<Self> {
        unit(Family::AffineInIntermediate, &[w0, w1])?;
        if w0.abs() + w1.abs() > 1.0 + 1e-12 {
            return Err(Error::InvalidWeightParams {
                family: Family::AffineInIntermediate.as_str(),
                params: vec![w0, w1],
                reason: "|w0| + |w1| must not exceed 1".into(),
            });
        }
        Ok(Self(Kind::AffineInIntermediate { w0, w1 }))
    }

    pub fn from_parts(family: Family, params: &[f64]) -> Result<Self> {
        if params.len() != family.arity() {
            return Err(Error::InvalidWeightParams {
                family: family.as_str(),
                params: params.to_vec(),
                reason: format!("expected {} parameter(s)", family.arity()),
            });
        }
        match family {
            Family::Constant => Self::constant(params[0]),
            Family::PiecewiseSign => Self::piecewise_sign(params[0], params[1]),
            Family::ScaledByIntermediate => Self::scaled_by_intermediate(params[0]),
            Family::AffineInIntermediate => Self::affine_in_intermediate(params[0], params[1]),
        }
    }

    pub fn family(&self) -> Family {
        match self.0 {
            Kind::Constant { .. } => Family::Constant,
            Kind::PiecewiseSign { .. } => Family::PiecewiseSign,
            Kind::ScaledByIntermediate { .. } => Family::ScaledByIntermediate,
            Kind::AffineInIntermediate { .. } => Family::AffineInIntermediate,
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match self.0 {
            Kind::Constant { w } => vec![w],
            Kind::PiecewiseSign { w_minus, w_plus } => vec![w_minus, w_plus],
            Kind::ScaledByIntermediate { w_base } => vec![w_base],
            Kind::AffineInIntermediate { w0, w1 } => vec![w0, w1],
        }
    }

    /// Weight for the current step. `intermediate` must be present exactly
    /// when the family is an intermediate family.
    pub fn evaluate(
        &self,
        cause: Realisation,
        _effect: Realisation,
        intermediate: Option<Realisation>,
    ) -> Result<f64> {
        match (self.family().needs_intermediate(), intermediate) {
            (true, None) => Err(Error::WeightContract(format!(
                "{} requires an intermediate realisation",
                self.family()
            ))),
            (false, Some(_)) => Err(Error::WeightContract(format!(
                "{} does not take an intermediate realisation",
                self.family()
            ))),
            _ => Ok(self.eval_unchecked(cause.value(), intermediate.map(Realisation::value))),
        }
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, cause: f64, intermediate: Option<f64>) -> f64 {
        match self.0 {
            Kind::Constant { w } => w,
            Kind::PiecewiseSign { w_minus, w_plus } => {
                if cause < 0.0 {
                    w_minus
                } else if cause > 0.0 {
                    w_plus
                } else {
                    0.0
                }
            }
            Kind::ScaledByIntermediate { w_base } => w_base * intermediate.unwrap_or(0.0),
            Kind::AffineInIntermediate { w0, w1 } => w0 + w1 * intermediate.unwrap_or(0.0),
        }
    }
}

/// Free-function form of [`WeightFunction::evaluate`].
pub fn evaluate_weight(
    weight: &WeightFunction,
    cause: Realisation,
    effect: Realisation,
    intermediate: Option<Realisation>,
) -> Result<f64> {
    weight.evaluate(cause, effect, intermediate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(x: f64) -> Realisation {
        Realisation::new(x).unwrap()
    }

    #[test]
    fn piecewise_sign_branches() {
        let f = WeightFunction::piecewise_sign(0.5, 0.1).unwrap();
        assert_eq!(f.evaluate(r(-0.5), r(0.0), None).unwrap(), 0.5);
        assert_eq!(f.evaluate(r(0.0), r(0.0), None).unwrap(), 0.0);
        assert_eq!(f.evaluate(r(-0.0), r(0.0), None).unwrap(), 0.0);
        assert_eq!(f.evaluate(r(1e-300), r(0.0), None).unwrap(), 0.1);
        assert_eq!(f.evaluate(r(-1e-300), r(0.0), None).unwrap(), 0.5);
    }

    #[test]
    fn constant_ignores_state() {
        let f = WeightFunction::constant(0.7).unwrap();
        for (a, b) in [(-1.0, 1.0), (0.0, 0.0), (0.3, -0.2)] {
            assert_eq!(f.evaluate(r(a), r(b), None).unwrap(), 0.7);
        }
    }

    #[test]
    fn scaled_by_zero_intermediate_is_zero() {
        let g = WeightFunction::scaled_by_intermediate(0.8).unwrap();
        assert_eq!(g.evaluate(r(0.9), r(0.1), Some(r(0.0))).unwrap(), 0.0);
        assert_eq!(g.evaluate(r(0.9), r(0.1), Some(r(-0.5))).unwrap(), -0.4);
    }

    #[test]
    fn affine_range() {
        let g = WeightFunction::affine_in_intermediate(0.4, 0.4).unwrap();
        assert_eq!(g.evaluate(r(1.0), r(0.0), Some(r(-1.0))).unwrap(), 0.0);
        assert_eq!(g.evaluate(r(1.0), r(0.0), Some(r(1.0))).unwrap(), 0.8);
        assert!(WeightFunction::affine_in_intermediate(0.6, 0.5).is_err());
    }

    #[test]
    fn intermediate_contract() {
        let f = WeightFunction::constant(0.2).unwrap();
        let g = WeightFunction::scaled_by_intermediate(0.2).unwrap();
        assert!(matches!(
            f.evaluate(r(0.1), r(0.1), Some(r(0.1))),
            Err(Error::WeightContract(_))
        ));
        assert!(matches!(
            g.evaluate(r(0.1), r(0.1), None),
            Err(Error::WeightContract(_))
        ));
    }

    #[test]
    fn construction_rejects_out_of_range() {
        assert!(WeightFunction::constant(1.5).is_err());
        assert!(WeightFunction::piecewise_sign(0.5, -1.01).is_err());
        assert!(WeightFunction::scaled_by_intermediate(f64::NAN).is_err());
        assert!(WeightFunction::from_parts(Family::Constant, &[0.1, 0.2]).is_err());
    }

    fn any_fn() -> impl Strategy<Value = WeightFunction> {
        prop_oneof![
            (-1.0..=1.0f64).prop_map(|w| WeightFunction::constant(w).unwrap()),
            (-1.0..=1.0f64, -1.0..=1.0f64)
                .prop_map(|(a, b)| WeightFunction::piecewise_sign(a, b).unwrap()),
            (-1.0..=1.0f64).prop_map(|w| WeightFunction::scaled_by_intermediate(w).unwrap()),
            (-1.0..=1.0f64, 0.0..=1.0f64).prop_map(|(w0, t)| {
                let w1 = (1.0 - w0.abs()) * t;
                WeightFunction::affine_in_intermediate(w0, w1).unwrap()
            }),
        ]
    }

    proptest! {
        #[test]
        fn output_stays_in_unit_interval(f in any_fn(), a in -1.0..=1.0f64, l in -1.0..=1.0f64) {
            let inter = f.family().needs_intermediate().then(|| r(l));
            let w = f.evaluate(r(a), r(0.0), inter).unwrap();
            prop_assert!((-1.0..=1.0).contains(&w));
        }

        #[test]
        fn piecewise_matches_three_branches(wm in -1.0..=1.0f64, wp in -1.0..=1.0f64, a in -1.0..=1.0f64) {
            let f = WeightFunction::piecewise_sign(wm, wp).unwrap();
            let expected = if a < 0.0 { wm } else if a > 0.0 { wp } else { 0.0 };
            prop_assert_eq!(f.evaluate(r(a), r(0.0), None).unwrap(), expected);
        }
    }
}
