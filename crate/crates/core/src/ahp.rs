//! Analytic hierarchy process: priority weights from reciprocal pairwise
//! judgment matrices, Saaty consistency checks, and the product / square-root
//! rules used to derive compound and quadratic interdependency coefficients
//! from layered-AHP base weights.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance on `a[j][i] * a[i][j] == 1`.
pub const RECIPROCAL_TOLERANCE: f64 = 1e-9;
/// Judgments are acceptable when CR is at or below this value.
pub const CR_THRESHOLD: f64 = 0.10;
/// Slack for the CR comparison; `(3.116 - 3) / 2 / 0.58` is 0.10000000000000009 in f64.
const CR_SLACK: f64 = 1e-12;

/// Saaty random consistency index for n = 1..=15.
const RANDOM_INDEX: [f64; 15] = [
    0.00, 0.00, 0.58, 0.90, 1.12, 1.24, 1.32, 1.41, 1.45, 1.49, 1.51, 1.48, 1.56, 1.57, 1.59,
];

/// Power iteration settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerIteration {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for PowerIteration {
    fn default() -> Self {
        Self {
            tolerance: 1e-12,
            max_iterations: 10_000,
        }
    }
}

/// Square, positive, reciprocal judgment matrix with a unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl PairwiseMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::validation(
                "pairwise matrix must have at least one row",
            ));
        }
        let mut entries = Vec::with_capacity(n * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::validation(format!(
                    "row {} has {} entries, expected {n}",
                    i + 1,
                    row.len()
                )));
            }
            entries.extend(row);
        }
        let m = Self { n, entries };
        m.validate()?;
        Ok(m)
    }

    /// Perfectly consistent matrix `a[i][j] = w[i] / w[j]`.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::validation(
                "generating weights must be positive and finite",
            ));
        }
        let rows = weights
            .iter()
            .map(|wi| weights.iter().map(|wj| wi / wj).collect())
            .collect();
        Self::new(rows)
    }

    /// Parses the plain-text matrix format: the first non-blank line holds `n`,
    /// followed by `n` whitespace-separated rows. Entries may be written as
    /// fractions (`1/3`). Lines starting with `#` are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let (dim_line, dim_text) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "empty matrix file, expected the dimension n".into(),
        })?;
        let n: usize = dim_text.parse().map_err(|_| Error::Parse {
            line: dim_line,
            message: format!("expected matrix dimension, found `{dim_text}`"),
        })?;
        if n == 0 {
            return Err(Error::Parse {
                line: dim_line,
                message: "matrix dimension must be at least 1".into(),
            });
        }

        let mut rows = Vec::with_capacity(n);
        let mut last_line = dim_line;
        for (line, text) in lines {
            if rows.len() == n {
                return Err(Error::Parse {
                    line,
                    message: format!("unexpected extra row, matrix has {n} rows"),
                });
            }
            let row = text
                .split_whitespace()
                .map(|tok| {
                    parse_entry(tok).ok_or_else(|| Error::Parse {
                        line,
                        message: format!("invalid entry `{tok}`"),
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            if row.len() != n {
                return Err(Error::Parse {
                    line,
                    message: format!("row has {} entries, expected {n}", row.len()),
                });
            }
            rows.push(row);
            last_line = line;
        }
        if rows.len() != n {
            return Err(Error::Parse {
                line: last_line + 1,
                message: format!("expected {n} rows, found {}", rows.len()),
            });
        }
        Self::new(rows)
    }

    fn validate(&self) -> Result<()> {
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                let a = self.get(i, j);
                if !(a.is_finite() && a > 0.0) {
                    return Err(Error::validation(format!(
                        "entry ({}, {}) = {a} is not strictly positive",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        for i in 0..n {
            if (self.get(i, i) - 1.0).abs() > RECIPROCAL_TOLERANCE {
                return Err(Error::validation(format!(
                    "diagonal entry ({0}, {0}) must be 1",
                    i + 1
                )));
            }
            for j in (i + 1)..n {
                let prod = self.get(i, j) * self.get(j, i);
                if (prod - 1.0).abs() > RECIPROCAL_TOLERANCE {
                    return Err(Error::validation(format!(
                        "entries ({}, {}) and ({}, {}) are not reciprocal",
                        i + 1,
                        j + 1,
                        j + 1,
                        i + 1
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.entries.chunks(self.n)
    }

    fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        self.rows()
            .map(|row| row.iter().zip(v).map(|(a, x)| a * x).sum())
            .collect()
    }
}

fn parse_entry(tok: &str) -> Option<f64> {
    let value = match tok.split_once('/') {
        Some((num, den)) => {
            let num: f64 = num.trim().parse().ok()?;
            let den: f64 = den.trim().parse().ok()?;
            num / den
        }
        None => tok.parse().ok()?,
    };
    value.is_finite().then_some(value)
}

/// Normalised priority weights (sum to one).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub lambda_max: f64,
    pub ci: f64,
    pub ri: f64,
    pub cr: f64,
    pub acceptable: bool,
}

impl ConsistencyReport {
    /// Evaluates CI = (λ_max − n)/(n − 1) and CR = CI/RI. For n ≤ 2 the
    /// matrix is consistent by construction and CR is 0.
    pub fn from_lambda(n: usize, lambda_max: f64) -> Result<Self> {
        let ri = random_index(n)?;
        let (ci, cr) = if n <= 2 {
            (0.0, 0.0)
        } else {
            let ci = (lambda_max - n as f64) / (n as f64 - 1.0);
            (ci, ci / ri)
        };
        Ok(Self {
            lambda_max,
            ci,
            ri,
            cr,
            acceptable: cr <= CR_THRESHOLD + CR_SLACK,
        })
    }
}

pub fn random_index(n: usize) -> Result<f64> {
    match n {
        1..=15 => Ok(RANDOM_INDEX[n - 1]),
        _ => Err(Error::validation(format!(
            "no random consistency index tabulated for n = {n}"
        ))),
    }
}

/// Principal eigenvector (normalised to sum one) and dominant eigenvalue.
pub fn priority_vector(m: &PairwiseMatrix) -> Result<(WeightVector, f64)> {
    priority_vector_with(m, PowerIteration::default())
}

pub fn priority_vector_with(
    m: &PairwiseMatrix,
    settings: PowerIteration,
) -> Result<(WeightVector, f64)> {
    let n = m.dim();
    if n == 1 {
        return Ok((WeightVector(vec![1.0]), 1.0));
    }
    let mut w = vec![1.0 / n as f64; n];
    for _ in 0..settings.max_iterations {
        let aw = m.mul_vec(&w);
        let total: f64 = aw.iter().sum();
        let next: Vec<f64> = aw.iter().map(|x| x / total).collect();
        let delta = next
            .iter()
            .zip(&w)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        w = next;
        if delta < settings.tolerance {
            // w sums to one, so Σ(Aw) = λ Σw = λ.
            let lambda = m.mul_vec(&w).iter().sum();
            return Ok((WeightVector(w), lambda));
        }
    }
    Err(Error::Convergence {
        what: "AHP power iteration",
        iterations: settings.max_iterations,
    })
}

pub fn consistency_ratio(m: &PairwiseMatrix) -> Result<ConsistencyReport> {
    let (_, lambda_max) = priority_vector(m)?;
    ConsistencyReport::from_lambda(m.dim(), lambda_max)
}

/// JSON shape emitted by the `weights` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightReport {
    pub weights: WeightVector,
    pub lambda_max: f64,
    pub ci: f64,
    pub cr: f64,
}

pub fn weight_report(m: &PairwiseMatrix) -> Result<(WeightReport, ConsistencyReport)> {
    let (weights, lambda_max) = priority_vector(m)?;
    let consistency = ConsistencyReport::from_lambda(m.dim(), lambda_max)?;
    Ok((
        WeightReport {
            weights,
            lambda_max,
            ci: consistency.ci,
            cr: consistency.cr,
        },
        consistency,
    ))
}

/// Compound interdependency coefficient: `a₂₃ = a₂ · a₃`.
pub fn derive_compound(ci: f64, cj: f64) -> f64 {
    ci * cj
}

/// Quadratic interdependency coefficient: `a'₃ = √a₃`.
pub fn derive_squared(ci: f64) -> Result<f64> {
    if ci < 0.0 || !ci.is_finite() {
        return Err(Error::validation(format!(
            "cannot derive a quadratic coefficient from {ci}"
        )));
    }
    Ok(ci.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn uniform_judgments() {
        let m = PairwiseMatrix::new(vec![vec![1.0; 3]; 3]).unwrap();
        let (w, lambda) = priority_vector(&m).unwrap();
        for x in w.as_slice() {
            assert_close(*x, 1.0 / 3.0, 1e-14);
        }
        assert_close(lambda, 3.0, 1e-12);
    }

    #[test]
    fn consistent_three_by_three() {
        let m = PairwiseMatrix::new(vec![
            vec![1.0, 2.0, 4.0],
            vec![0.5, 1.0, 2.0],
            vec![0.25, 0.5, 1.0],
        ])
        .unwrap();
        let (w, lambda) = priority_vector(&m).unwrap();
        for (x, e) in w.as_slice().iter().zip([4.0 / 7.0, 2.0 / 7.0, 1.0 / 7.0]) {
            assert_close(*x, e, 1e-14);
        }
        assert_close(lambda, 3.0, 1e-12);
        let report = consistency_ratio(&m).unwrap();
        assert!(report.cr.abs() < 1e-10);
        assert!(report.acceptable);
    }

    #[test]
    fn consistency_from_lambda() {
        let r = ConsistencyReport::from_lambda(3, 3.116).unwrap();
        assert_close(r.ci, 0.058, 1e-12);
        assert_eq!(r.ri, 0.58);
        assert_close(r.cr, 0.100, 1e-12);
        assert!(r.acceptable);

        let r = ConsistencyReport::from_lambda(3, 3.2).unwrap();
        assert!(!r.acceptable);
    }

    #[test]
    fn two_by_two_is_always_consistent() {
        let m = PairwiseMatrix::new(vec![vec![1.0, 7.0], vec![1.0 / 7.0, 1.0]]).unwrap();
        let r = consistency_ratio(&m).unwrap();
        assert_eq!(r.cr, 0.0);
        assert!(r.acceptable);
        let (w, _) = priority_vector(&m).unwrap();
        assert_close(w.as_slice()[0], 7.0 / 8.0, 1e-12);
    }

    #[test]
    fn one_by_one() {
        let m = PairwiseMatrix::new(vec![vec![1.0]]).unwrap();
        let (w, lambda) = priority_vector(&m).unwrap();
        assert_eq!(w.as_slice(), &[1.0]);
        assert_eq!(lambda, 1.0);
        assert_eq!(consistency_ratio(&m).unwrap().cr, 0.0);
    }

    #[test]
    fn rejects_invalid_matrices() {
        assert!(PairwiseMatrix::new(vec![vec![1.0, 2.0], vec![2.0, 1.0]]).is_err());
        assert!(PairwiseMatrix::new(vec![vec![1.0, -1.0], vec![-1.0, 1.0]]).is_err());
        assert!(PairwiseMatrix::new(vec![vec![2.0, 1.0], vec![1.0, 0.5]]).is_err());
        assert!(PairwiseMatrix::new(vec![vec![1.0, 1.0]]).is_err());
        assert!(PairwiseMatrix::new(vec![]).is_err());
    }

    #[test]
    fn parses_fractions() {
        let m = PairwiseMatrix::parse("3\n1 3 5\n1/3 1 2\n1/5 1/2 1\n").unwrap();
        assert_eq!(m.dim(), 3);
        assert_close(m.get(1, 0), 1.0 / 3.0, 1e-15);
        assert_close(m.get(2, 1), 0.5, 1e-15);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        match PairwiseMatrix::parse("") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("unexpected {other:?}"),
        }
        match PairwiseMatrix::parse("2\n1 2\n1/2 x\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        match PairwiseMatrix::parse("3\n1 1 1\n1 1\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            PairwiseMatrix::parse("2\n1 1\n"),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn derivation_rules() {
        assert_close(derive_compound(0.10473, 0.25828), 0.02705, 5e-5);
        assert_eq!(derive_compound(0.25, 0.75), 0.1875);
        assert_eq!(derive_compound(0.0, 0.3), 0.0);
        assert_close(derive_squared(0.63699).unwrap(), 0.798117, 5e-5);
        assert_close(derive_squared(0.75).unwrap(), 0.866025, 5e-5);
        assert_eq!(derive_squared(1.0).unwrap(), 1.0);
        assert!(derive_squared(-0.1).is_err());
    }

    #[test]
    fn random_index_bounds() {
        assert_eq!(random_index(10).unwrap(), 1.49);
        assert!(random_index(0).is_err());
        assert!(random_index(16).is_err());
    }
}
