use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

use super::{nested, AnalysisError};
use crate::optics::{overlap, FieldGrid};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrosstalkKind {
    /// `d×d`, rows sum to 1.
    MubLike,
    /// `d²×d²`, rows sum to `d`.
    SicLike,
}

impl CrosstalkKind {
    pub fn row_target(self, dim: usize) -> f64 {
        match self {
            CrosstalkKind::MubLike => 1.0,
            CrosstalkKind::SicLike => dim as f64,
        }
    }

    /// Dimension implied by a matrix with `rows` rows.
    pub fn dim_for(self, rows: usize) -> Result<usize, AnalysisError> {
        match self {
            CrosstalkKind::MubLike if rows >= 2 => Ok(rows),
            CrosstalkKind::MubLike => Err(AnalysisError::BadShape {
                rows,
                cols: rows,
                expected: 2,
            }),
            CrosstalkKind::SicLike => {
                let d = (rows as f64).sqrt().round() as usize;
                if d >= 2 && d * d == rows {
                    Ok(d)
                } else {
                    Err(AnalysisError::InvalidSicSize(rows))
                }
            }
        }
    }
}

/// How realizations are combined.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AveragingOrder {
    /// Cellwise mean of raw matrices, then one row normalization.
    #[default]
    AverageThenNormalize,
    /// Each realization row-normalized, then averaged.
    NormalizeThenAverage,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrosstalkMatrix {
    pub label: String,
    pub dim: usize,
    pub kind: CrosstalkKind,
    #[serde(with = "nested")]
    pub values: Array2<f64>,
    /// Cellwise population standard deviation across realizations, in the units of `values`.
    #[serde(with = "nested")]
    pub stddev: Array2<f64>,
    pub realizations: usize,
    pub averaging: AveragingOrder,
}

impl CrosstalkMatrix {
    pub fn row_sums(&self) -> Vec<f64> {
        self.values.sum_axis(Axis(1)).to_vec()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.values.diag().to_vec()
    }
}

/// Entry `[s, t] = |⟨detect_t|sent_s⟩|²`.
pub fn raw_projection_matrix(sent: &[FieldGrid], detect: &[FieldGrid]) -> Result<Array2<f64>, AnalysisError> {
    let mut out = Array2::zeros((sent.len(), detect.len()));
    for (s, sf) in sent.iter().enumerate() {
        for (t, df) in detect.iter().enumerate() {
            out[[s, t]] = overlap(df, sf)?.norm_sqr();
        }
    }
    Ok(out)
}

fn check_square(raw: &Array2<f64>, kind: CrosstalkKind) -> Result<usize, AnalysisError> {
    let (rows, cols) = raw.dim();
    let dim = kind.dim_for(rows)?;
    if rows != cols {
        return Err(AnalysisError::BadShape {
            rows,
            cols,
            expected: rows,
        });
    }
    Ok(dim)
}

fn row_factors(m: &Array2<f64>, target: f64, label: &str) -> Result<Vec<f64>, AnalysisError> {
    m.rows()
        .into_iter()
        .enumerate()
        .map(|(row, r)| {
            let s: f64 = r.sum();
            if s > 0.0 && s.is_finite() {
                Ok(target / s)
            } else {
                Err(AnalysisError::DegenerateRow {
                    row,
                    label: label.to_string(),
                })
            }
        })
        .collect()
}

fn scale_rows(m: &mut Array2<f64>, factors: &[f64]) {
    for (mut row, &f) in m.rows_mut().into_iter().zip(factors) {
        row.mapv_inplace(|v| v * f);
    }
}

pub fn normalize_crosstalk(raw: &Array2<f64>, kind: CrosstalkKind, label: &str) -> Result<CrosstalkMatrix, AnalysisError> {
    ensemble_average(std::slice::from_ref(raw), kind, label)
}

/// Mean of raw matrices, then row normalization; the per-cell spread is taken over the raw
/// realizations and scaled by the same row factors.
pub fn ensemble_average(
    per_realization: &[Array2<f64>],
    kind: CrosstalkKind,
    label: &str,
) -> Result<CrosstalkMatrix, AnalysisError> {
    ensemble_average_with(per_realization, kind, label, AveragingOrder::AverageThenNormalize)
}

pub fn ensemble_average_with(
    per_realization: &[Array2<f64>],
    kind: CrosstalkKind,
    label: &str,
    order: AveragingOrder,
) -> Result<CrosstalkMatrix, AnalysisError> {
    let first = per_realization.first().ok_or(AnalysisError::Empty)?;
    let dim = check_square(first, kind)?;
    for m in per_realization {
        if m.dim() != first.dim() {
            return Err(AnalysisError::BadShape {
                rows: m.nrows(),
                cols: m.ncols(),
                expected: first.nrows(),
            });
        }
    }
    let target = kind.row_target(dim);
    let normalized_each;
    let inputs: &[Array2<f64>] = match order {
        AveragingOrder::AverageThenNormalize => per_realization,
        AveragingOrder::NormalizeThenAverage => {
            normalized_each = per_realization
                .iter()
                .map(|m| {
                    let mut m = m.clone();
                    let f = row_factors(&m, target, label)?;
                    scale_rows(&mut m, &f);
                    Ok(m)
                })
                .collect::<Result<Vec<_>, AnalysisError>>()?;
            &normalized_each
        }
    };
    let count = inputs.len() as f64;
    let mut mean = Array2::<f64>::zeros(first.dim());
    for m in inputs {
        mean += m;
    }
    mean /= count;
    let mut var = Array2::<f64>::zeros(first.dim());
    for m in inputs {
        var.zip_mut_with(&(m - &mean), |v, d| *v += d * d);
    }
    let mut stddev = var.mapv(|v| (v / count).sqrt());

    let factors = row_factors(&mean, target, label)?;
    scale_rows(&mut mean, &factors);
    scale_rows(&mut stddev, &factors);
    Ok(CrosstalkMatrix {
        label: label.to_string(),
        dim,
        kind,
        values: mean,
        stddev,
        realizations: per_realization.len(),
        averaging: order,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    #[test]
    fn identity_and_uniform() {
        let id = Array2::<f64>::eye(4);
        let c = normalize_crosstalk(&id, CrosstalkKind::MubLike, "id").unwrap();
        assert_eq!(c.values, id);
        let u = Array2::from_elem((4, 4), 3.7);
        let c = normalize_crosstalk(&u, CrosstalkKind::MubLike, "u").unwrap();
        assert!(c.values.iter().all(|&v| (v - 0.25).abs() < 1e-15));
        let s = Array2::from_elem((4, 4), 0.1);
        let c = normalize_crosstalk(&s, CrosstalkKind::SicLike, "sic").unwrap();
        assert_eq!(c.dim, 2);
        assert!(c.values.iter().all(|&v| (v - 0.5).abs() < 1e-15));
    }

    #[test]
    fn zero_row_is_reported() {
        let m = array![[1.0, 0.0], [0.0, 0.0]];
        match normalize_crosstalk(&m, CrosstalkKind::MubLike, "probe") {
            Err(AnalysisError::DegenerateRow { row, label }) => {
                assert_eq!(row, 1);
                assert_eq!(label, "probe");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn shape_errors() {
        assert!(matches!(
            normalize_crosstalk(&Array2::eye(3), CrosstalkKind::SicLike, "x"),
            Err(AnalysisError::InvalidSicSize(3))
        ));
        assert!(normalize_crosstalk(&Array2::zeros((2, 3)), CrosstalkKind::MubLike, "x").is_err());
        assert!(matches!(ensemble_average(&[], CrosstalkKind::MubLike, "x"), Err(AnalysisError::Empty)));
        assert!(ensemble_average(&[Array2::eye(2), Array2::eye(3)], CrosstalkKind::MubLike, "x").is_err());
    }

    #[test]
    fn identical_realizations_have_no_spread() {
        let m = array![[0.8, 0.1], [0.3, 0.9]];
        let c = ensemble_average(&vec![m.clone(); 5], CrosstalkKind::MubLike, "x").unwrap();
        assert!(c.stddev.iter().all(|&v| v == 0.0));
        assert_eq!(c.realizations, 5);
        assert_eq!(c.values, normalize_crosstalk(&m, CrosstalkKind::MubLike, "x").unwrap().values);
    }

    #[test]
    fn spread_is_scaled_by_row_factor() {
        let a = array![[1.0, 0.0], [0.0, 2.0]];
        let b = array![[3.0, 0.0], [0.0, 2.0]];
        let c = ensemble_average(&[a, b], CrosstalkKind::MubLike, "x").unwrap();
        // Row 0 mean [2, 0] (factor 1/2), raw spread [1, 0].
        assert_eq!(c.stddev[[0, 0]], 0.5);
        assert_eq!(c.stddev[[1, 1]], 0.0);
    }

    #[test]
    fn averaging_orders_differ_when_row_totals_vary() {
        let a = array![[1.0, 0.0], [0.5, 0.5]];
        let b = array![[0.0, 3.0], [0.5, 0.5]];
        let at = ensemble_average_with(&[a.clone(), b.clone()], CrosstalkKind::MubLike, "x", AveragingOrder::AverageThenNormalize)
            .unwrap();
        let na = ensemble_average_with(&[a, b], CrosstalkKind::MubLike, "x", AveragingOrder::NormalizeThenAverage).unwrap();
        assert_eq!(at.values[[0, 0]], 0.25);
        assert_eq!(na.values[[0, 0]], 0.5);
        assert_eq!(na.averaging, AveragingOrder::NormalizeThenAverage);
    }

    fn raw_matrix(r: usize) -> impl Strategy<Value = Array2<f64>> {
        prop::collection::vec(1e-6f64..1.0, r * r).prop_map(move |v| Array2::from_shape_vec((r, r), v).unwrap())
    }

    proptest! {
        #[test]
        fn rows_meet_kind_contract(ms in prop::collection::vec(raw_matrix(4), 1..6)) {
            for (kind, target) in [(CrosstalkKind::MubLike, 1.0), (CrosstalkKind::SicLike, 2.0)] {
                for order in [AveragingOrder::AverageThenNormalize, AveragingOrder::NormalizeThenAverage] {
                    let c = ensemble_average_with(&ms, kind, "p", order).unwrap();
                    for s in c.row_sums() {
                        prop_assert!((s - target).abs() < 1e-9);
                    }
                    prop_assert!(c.values.iter().all(|&v| v >= 0.0));
                    prop_assert!(c.stddev.iter().all(|&v| v >= 0.0));
                }
            }
        }

        #[test]
        fn reduction_ignores_scale_of_realization_list(m in raw_matrix(3), k in 1usize..5) {
            let once = ensemble_average(std::slice::from_ref(&m), CrosstalkKind::MubLike, "p").unwrap();
            let many = ensemble_average(&vec![m; k], CrosstalkKind::MubLike, "p").unwrap();
            for (a, b) in once.values.iter().zip(&many.values) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
