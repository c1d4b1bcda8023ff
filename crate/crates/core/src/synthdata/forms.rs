//! Response functions of the three synthetic families.
//!
//! Each family is a sum of ten weighted terms. The categorical-gated variant
//! switches groups of terms on per segment (terms 1–3 for segment 1, 4–6 for
//! segment 2, 7–10 for segment 3) and the grouped variant evaluates the ten
//! terms on three disjoint feature blocks and mixes the block sums with
//! coefficients 31–33.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

use super::CoefficientSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Linear,
    GamGlobal,
    JumpyGamLocal,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Linear, Family::GamGlobal, Family::JumpyGamLocal];

    /// Features consumed by one copy of the ten-term base function.
    pub fn block_width(self) -> usize {
        match self {
            Family::Linear | Family::JumpyGamLocal => 10,
            Family::GamGlobal => 5,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Linear => "linear",
            Family::GamGlobal => "gam_global",
            Family::JumpyGamLocal => "jumpy_gam_local",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Base,
    CategoricalGated,
    Grouped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FunctionalForm {
    pub family: Family,
    pub variant: Variant,
}

pub const TERMS: usize = 10;
const GROUPS: usize = 3;

/// Segment that switches each term on in the gated variant.
const GATE_OF_TERM: [u32; TERMS] = [1, 1, 1, 2, 2, 2, 3, 3, 3, 3];

impl FunctionalForm {
    pub fn new(family: Family, variant: Variant) -> Self {
        Self { family, variant }
    }

    pub fn n_coefficients(self) -> usize {
        match self.variant {
            Variant::Grouped => GROUPS * TERMS + GROUPS,
            _ => TERMS,
        }
    }

    /// Number of signal features the form reads.
    pub fn n_features(self) -> usize {
        match self.variant {
            Variant::Grouped => GROUPS * self.family.block_width(),
            _ => self.family.block_width(),
        }
    }
}

fn indicator(cond: bool) -> f64 {
    if cond {
        1.0
    } else {
        0.0
    }
}

/// The ten weighted terms of one base function evaluated on `x`.
pub fn terms(family: Family, b: &[f64], x: &[f64]) -> [f64; TERMS] {
    match family {
        Family::Linear => std::array::from_fn(|i| b[i] * x[i]),
        Family::GamGlobal => {
            let (x1, x2, x3, x4, x5) = (x[0], x[1], x[2], x[3], x[4]);
            [
                b[0] * x1.abs(),
                b[1] * x2 * x2,
                b[2] * (x3.abs() + 1.0).ln(),
                (b[3] * x4).exp(),
                1.0 / (b[4] * x5.abs() + 1.0),
                b[5] * x1 * x2,
                b[6] * (x1 * x2 * x3).abs(),
                b[7] * ((x3 + x4 + x5).abs() + 1.0).ln(),
                b[8] * x4.max(x5),
                (b[9] * (x5 - x3)).exp(),
            ]
        }
        Family::JumpyGamLocal => [
            b[0] * x[0].abs() * indicator(x[0].abs() < 2.0),
            b[1] * x[1] * x[1] * indicator(x[1] > 1.0),
            b[2] * (x[2].abs() + 1.0).ln() * indicator(x[2].abs() > 1.0),
            (b[3] * x[3]).exp() * indicator(x[3] < 0.0),
            1.0 / (b[4] * x[4].abs() + 1.0),
            b[5] * 1.0f64.max(x[5] + x[6]),
            b[6] * indicator(x[6] < 1.0),
            b[7] * indicator(x[7].abs() > 2.0),
            b[8] * x[8] * indicator(x[8] < -1.0),
            b[9] * 0.0f64.max(x[9]),
        ],
    }
}

/// Latent score of a single row.
pub fn eval_row(form: FunctionalForm, b: &[f64], x: &[f64], segment: Option<u32>) -> f64 {
    match form.variant {
        Variant::Base => terms(form.family, b, x).iter().sum(),
        Variant::CategoricalGated => {
            let seg = segment.unwrap_or(0);
            terms(form.family, b, x)
                .iter()
                .zip(GATE_OF_TERM)
                .filter(|(_, gate)| *gate == seg)
                .map(|(t, _)| t)
                .sum()
        }
        Variant::Grouped => {
            let w = form.family.block_width();
            (0..GROUPS)
                .map(|g| {
                    let block: f64 = terms(form.family, &b[g * TERMS..(g + 1) * TERMS], &x[g * w..(g + 1) * w])
                        .iter()
                        .sum();
                    b[GROUPS * TERMS + g] * block
                })
                .sum()
        }
    }
}

fn check_shapes(form: FunctionalForm, n_coefficients: usize, features: &Matrix) -> Result<()> {
    if n_coefficients != form.n_coefficients() {
        return Err(Error::InvalidSpec(format!(
            "{:?}/{:?} needs {} coefficients, got {n_coefficients}",
            form.family,
            form.variant,
            form.n_coefficients()
        )));
    }
    if features.n_cols() != form.n_features() {
        return Err(Error::InvalidSpec(format!(
            "{:?}/{:?} reads {} features, got {}",
            form.family,
            form.variant,
            form.n_features(),
            features.n_cols()
        )));
    }
    Ok(())
}

/// Latent score `f(x)` for every row of `features`.
///
/// `categorical` holds segment ids (1-based) and is required by the gated
/// variant, which needs at least three segments.
pub fn eval_form(
    form: FunctionalForm,
    coeffs: &CoefficientSet,
    features: &Matrix,
    categorical: Option<&[u32]>,
) -> Result<Vec<f64>> {
    check_shapes(form, coeffs.len(), features)?;
    if form.variant == Variant::CategoricalGated {
        let cats = categorical
            .ok_or_else(|| Error::InvalidSpec("categorical-gated form needs a categorical column".into()))?;
        if cats.len() != features.n_rows() {
            return Err(Error::InvalidSpec("categorical column length mismatch".into()));
        }
        let distinct = cats.iter().copied().max().unwrap_or(0);
        if distinct < 3 {
            return Err(Error::InvalidSpec(
                "categorical-gated form needs at least three segments".into(),
            ));
        }
    }
    let mut row = vec![0.0; features.n_cols()];
    Ok((0..features.n_rows())
        .map(|i| {
            for (j, v) in row.iter_mut().enumerate() {
                *v = features.get(i, j);
            }
            eval_row(form, coeffs.values(), &row, categorical.map(|c| c[i]))
        })
        .collect())
}

/// Base form with one coefficient set per segment: row `i` is scored with the
/// set of its segment `categorical[i]`.
pub fn eval_segmented(
    form: FunctionalForm,
    coeffs: &[CoefficientSet],
    features: &Matrix,
    categorical: &[u32],
) -> Result<Vec<f64>> {
    if form.variant != Variant::Base {
        return Err(Error::InvalidSpec(
            "per-segment coefficients apply to base forms only".into(),
        ));
    }
    for c in coeffs {
        check_shapes(form, c.len(), features)?;
    }
    let mut row = vec![0.0; features.n_cols()];
    (0..features.n_rows())
        .map(|i| {
            let seg = categorical[i] as usize;
            let set = seg
                .checked_sub(1)
                .and_then(|s| coeffs.get(s))
                .ok_or_else(|| Error::InvalidSpec(format!("row {i}: no coefficients for segment {seg}")))?;
            for (j, v) in row.iter_mut().enumerate() {
                *v = features.get(i, j);
            }
            Ok(eval_row(form, set.values(), &row, None))
        })
        .collect()
}
