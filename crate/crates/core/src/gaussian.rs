//! Joint Gaussian statistics of the relay channel variables.
//!
//! The four variables are the source input `Xs`, the relay input `Xr`, the
//! relay observation `Yr = sqrt(g_sr) Xs + Zr` and the destination
//! observation `Yd = sqrt(g_sd) Xs + sqrt(g_rd) Xr + Zd`. Their covariance is
//! assembled directly from those equations and every conditional covariance,
//! determinant and mutual information is computed from it by Schur
//! complements. Nothing here uses the closed-form capacity expressions, so
//! this module serves as an independent check on them.
//!
//! All matrix arithmetic runs in double-double precision. With unit signal
//! power and noise near 1e-9 the noise-only residual of a Schur complement
//! sits nine orders of magnitude below the entries it is computed from, and
//! plain `f64` would lose most of its digits.

use std::f64::consts::LN_2;
use std::fmt;

use nalgebra::DMatrix;
use twofloat::TwoFloat;

use crate::error::{check_nonnegative, check_positive, Error, Result};
use crate::link::LinkGains;

/// Largest condition number accepted for a conditioning block.
pub const MAX_CONDITION: f64 = 1e12;

/// Identifier of one of the four channel variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    Xs,
    Xr,
    Yr,
    Yd,
}

impl Var {
    pub const ALL: [Var; 4] = [Var::Xs, Var::Xr, Var::Yr, Var::Yd];
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Var::Xs => "Xs",
            Var::Xr => "Xr",
            Var::Yr => "Yr",
            Var::Yd => "Yd",
        };
        f.write_str(name)
    }
}

/// Full statistical description of `(Xs, Xr, Yr, Yd)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointGaussianSystem {
    pub gamma_sr: f64,
    pub gamma_rd: f64,
    pub gamma_sd: f64,
    /// Source transmit power `E[Xs^2]`, watts.
    pub p_s: f64,
    /// Relay transmit power `E[Xr^2]`, watts.
    pub p_r: f64,
    /// Correlation coefficient between `Xs` and `Xr`.
    pub rho: f64,
    /// Noise variance at both receivers, watts.
    pub noise: f64,
}

impl JointGaussianSystem {
    pub fn new(gains: &LinkGains, p_s: f64, p_r: f64, rho: f64, noise: f64) -> Result<Self> {
        let sys = Self {
            gamma_sr: gains.gamma_sr,
            gamma_rd: gains.gamma_rd,
            gamma_sd: gains.gamma_sd,
            p_s,
            p_r,
            rho,
            noise,
        };
        sys.validate()?;
        Ok(sys)
    }

    pub fn validate(&self) -> Result<()> {
        check_nonnegative("gamma_sr", self.gamma_sr)?;
        check_nonnegative("gamma_rd", self.gamma_rd)?;
        check_nonnegative("gamma_sd", self.gamma_sd)?;
        check_nonnegative("p_s", self.p_s)?;
        check_nonnegative("p_r", self.p_r)?;
        check_positive("noise", self.noise)?;
        if !(-1.0..=1.0).contains(&self.rho) {
            return Err(Error::Domain {
                name: "rho",
                value: self.rho,
                expected: "in [-1, 1]",
            });
        }
        Ok(())
    }
}

/// Dense square matrix in double-double precision, row-major.
#[derive(Debug, Clone, PartialEq)]
struct Matrix {
    n_rows: usize,
    n_cols: usize,
    data: Vec<TwoFloat>,
}

fn dd(x: f64) -> TwoFloat {
    TwoFloat::from(x)
}

/// Double-double quotient by long division.
///
/// `TwoFloat`'s own `/` is only accurate to about one `f64` ulp, which is not
/// enough for the Schur complements here.
fn div(num: TwoFloat, den: TwoFloat) -> TwoFloat {
    let q1 = num.hi() / den.hi();
    let r1 = num - den * q1;
    let q2 = r1.hi() / den.hi();
    let r2 = r1 - den * q2;
    let q3 = r2.hi() / den.hi();
    dd(q1) + q2 + q3
}

impl Matrix {
    fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            data: vec![dd(0.0); n_rows * n_cols],
        }
    }

    fn at(&self, i: usize, j: usize) -> TwoFloat {
        self.data[i * self.n_cols + j]
    }

    fn set(&mut self, i: usize, j: usize, v: TwoFloat) {
        self.data[i * self.n_cols + j] = v;
    }

    fn mul(&self, rhs: &Matrix) -> Matrix {
        debug_assert_eq!(self.n_cols, rhs.n_rows);
        let mut out = Matrix::zeros(self.n_rows, rhs.n_cols);
        for i in 0..self.n_rows {
            for j in 0..rhs.n_cols {
                let mut acc = dd(0.0);
                for k in 0..self.n_cols {
                    acc += self.at(i, k) * rhs.at(k, j);
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    fn one_norm(&self) -> f64 {
        (0..self.n_cols)
            .map(|j| {
                (0..self.n_rows)
                    .map(|i| self.at(i, j).hi().abs())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Determinant by LU with partial pivoting; closed form up to 2x2.
    fn determinant(&self) -> TwoFloat {
        debug_assert_eq!(self.n_rows, self.n_cols);
        match self.n_rows {
            0 => dd(1.0),
            1 => self.at(0, 0),
            2 => self.at(0, 0) * self.at(1, 1) - self.at(0, 1) * self.at(1, 0),
            n => {
                let mut a = self.clone();
                let mut det = dd(1.0);
                for col in 0..n {
                    let pivot = (col..n)
                        .max_by(|&p, &q| {
                            a.at(p, col).hi().abs().total_cmp(&a.at(q, col).hi().abs())
                        })
                        .unwrap_or(col);
                    if a.at(pivot, col) == 0.0 {
                        return dd(0.0);
                    }
                    if pivot != col {
                        for j in 0..n {
                            a.data.swap(pivot * n + j, col * n + j);
                        }
                        det = -det;
                    }
                    let p = a.at(col, col);
                    det *= p;
                    for i in col + 1..n {
                        let factor = div(a.at(i, col), p);
                        for j in col..n {
                            let v = a.at(i, j) - factor * a.at(col, j);
                            a.set(i, j, v);
                        }
                    }
                }
                det
            }
        }
    }

    /// Inverse of a symmetric positive definite block together with its
    /// condition number. Returns `None` when the block is singular.
    fn inverse_spd(&self) -> Option<(Matrix, f64)> {
        let n = self.n_rows;
        match n {
            0 => Some((Matrix::zeros(0, 0), 1.0)),
            1 => {
                let a = self.at(0, 0);
                if !(a > 0.0) {
                    return None;
                }
                let mut inv = Matrix::zeros(1, 1);
                inv.set(0, 0, div(dd(1.0), a));
                Some((inv, 1.0))
            }
            2 => {
                let (a, b, d) = (self.at(0, 0), self.at(0, 1), self.at(1, 1));
                let det = a * d - b * b;
                if !(det > 0.0) || !(a > 0.0) {
                    return None;
                }
                let half_trace = (a + d) * 0.5;
                let spread = ((a - d) * 0.5).hypot(b);
                let lambda_max = half_trace + spread;
                let lambda_min = div(det, lambda_max);
                let mut inv = Matrix::zeros(2, 2);
                inv.set(0, 0, div(d, det));
                inv.set(0, 1, -div(b, det));
                inv.set(1, 0, -div(b, det));
                inv.set(1, 1, div(a, det));
                Some((inv, (lambda_max / lambda_min).hi()))
            }
            _ => {
                // Gauss-Jordan with partial pivoting on [A | I].
                let mut a = self.clone();
                let mut inv = Matrix::zeros(n, n);
                for i in 0..n {
                    inv.set(i, i, dd(1.0));
                }
                for col in 0..n {
                    let pivot = (col..n)
                        .max_by(|&p, &q| {
                            a.at(p, col).hi().abs().total_cmp(&a.at(q, col).hi().abs())
                        })
                        .unwrap_or(col);
                    if a.at(pivot, col) == 0.0 {
                        return None;
                    }
                    for j in 0..n {
                        a.data.swap(pivot * n + j, col * n + j);
                        inv.data.swap(pivot * n + j, col * n + j);
                    }
                    let p = a.at(col, col);
                    for j in 0..n {
                        a.set(col, j, div(a.at(col, j), p));
                        inv.set(col, j, div(inv.at(col, j), p));
                    }
                    for i in 0..n {
                        if i == col {
                            continue;
                        }
                        let factor = a.at(i, col);
                        for j in 0..n {
                            a.set(i, j, a.at(i, j) - factor * a.at(col, j));
                            inv.set(i, j, inv.at(i, j) - factor * inv.at(col, j));
                        }
                    }
                }
                let condition = self.one_norm() * inv.one_norm();
                Some((inv, condition))
            }
        }
    }
}

/// Covariance matrix of a labeled subset of the channel variables, watts.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledCovariance {
    labels: Vec<Var>,
    matrix: Matrix,
}

impl LabeledCovariance {
    /// Builds a covariance from `f64` rows, checking symmetry (1e-12 relative)
    /// and positive semidefiniteness (eigenvalues >= -1e-9 * trace).
    pub fn new(labels: Vec<Var>, rows: &[Vec<f64>]) -> Result<Self> {
        let n = labels.len();
        check_distinct(&labels)?;
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidCovariance(format!(
                "expected a {n}x{n} matrix for labels {labels:?}"
            )));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidCovariance("non-finite entry".into()));
        }
        let scale = rows.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..n {
            for j in 0..i {
                if (rows[i][j] - rows[j][i]).abs() > 1e-12 * scale {
                    return Err(Error::InvalidCovariance(format!(
                        "entries ({i},{j}) and ({j},{i}) differ"
                    )));
                }
            }
        }
        if n > 0 {
            let m = DMatrix::from_fn(n, n, |i, j| 0.5 * (rows[i][j] + rows[j][i]));
            let trace = m.trace();
            let min_eigen = m.symmetric_eigenvalues().min();
            if min_eigen < -1e-9 * trace.abs() {
                return Err(Error::InvalidCovariance(format!(
                    "not positive semidefinite (eigenvalue {min_eigen:e})"
                )));
            }
        }
        let mut matrix = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                matrix.set(i, j, dd(rows[i.max(j)][i.min(j)]));
            }
        }
        Ok(Self { labels, matrix })
    }

    pub fn labels(&self) -> &[Var] {
        &self.labels
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    /// Covariance between two labeled variables, if both are present.
    pub fn get(&self, a: Var, b: Var) -> Option<f64> {
        let i = self.index_of(a)?;
        let j = self.index_of(b)?;
        Some(self.matrix.at(i, j).hi())
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|j| self.matrix.at(i, j).hi()).collect())
            .collect()
    }

    pub fn determinant(&self) -> f64 {
        self.matrix.determinant().hi()
    }

    fn index_of(&self, v: Var) -> Option<usize> {
        self.labels.iter().position(|&l| l == v)
    }

    fn indices(&self, vars: &[Var]) -> Result<Vec<usize>> {
        vars.iter()
            .map(|&v| {
                self.index_of(v)
                    .ok_or_else(|| Error::Labels(format!("{v} is not in {:?}", self.labels)))
            })
            .collect()
    }

    fn block(&self, rows: &[usize], cols: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(rows.len(), cols.len());
        for (i, &r) in rows.iter().enumerate() {
            for (j, &c) in cols.iter().enumerate() {
                out.set(i, j, self.matrix.at(r, c));
            }
        }
        out
    }
}

fn check_distinct(vars: &[Var]) -> Result<()> {
    for (i, v) in vars.iter().enumerate() {
        if vars[..i].contains(v) {
            return Err(Error::Labels(format!("{v} appears twice in {vars:?}")));
        }
    }
    Ok(())
}

fn check_disjoint(a: &[Var], b: &[Var]) -> Result<()> {
    match a.iter().find(|v| b.contains(v)) {
        Some(v) => Err(Error::Labels(format!(
            "{v} appears in both {a:?} and {b:?}"
        ))),
        None => Ok(()),
    }
}

/// Covariance of `(Xs, Xr, Yr, Yd)` implied by the signal model.
pub fn assemble_covariance(sys: &JointGaussianSystem) -> Result<LabeledCovariance> {
    sys.validate()?;
    let root_sd = dd(sys.gamma_sd).sqrt();
    let root_rd = dd(sys.gamma_rd).sqrt();
    let root_sr = dd(sys.gamma_sr).sqrt();
    let p_s = dd(sys.p_s);
    let p_r = dd(sys.p_r);
    let noise = dd(sys.noise);
    // E[Xs Xr]
    let cross = dd(sys.rho) * (p_s * p_r).sqrt();

    let var_xs = p_s;
    let var_xr = p_r;
    let cov_xs_yr = root_sr * p_s;
    let cov_xr_yr = root_sr * cross;
    let cov_xs_yd = root_sd * p_s + root_rd * cross;
    let cov_xr_yd = root_sd * cross + root_rd * p_r;
    let var_yr = dd(sys.gamma_sr) * p_s + noise;
    let cov_yr_yd = root_sr * cov_xs_yd;
    let var_yd = dd(sys.gamma_sd) * p_s
        + dd(sys.gamma_rd) * p_r
        + dd(2.0) * root_sd * root_rd * cross
        + noise;

    let upper = [
        [var_xs, cross, cov_xs_yr, cov_xs_yd],
        [cross, var_xr, cov_xr_yr, cov_xr_yd],
        [cov_xs_yr, cov_xr_yr, var_yr, cov_yr_yd],
        [cov_xs_yd, cov_xr_yd, cov_yr_yd, var_yd],
    ];
    let mut matrix = Matrix::zeros(4, 4);
    for i in 0..4 {
        for j in 0..4 {
            // Mirror the upper triangle so the result is exactly symmetric.
            matrix.set(i, j, upper[i.min(j)][i.max(j)]);
        }
    }
    Ok(LabeledCovariance {
        labels: Var::ALL.to_vec(),
        matrix,
    })
}

/// `Sigma_{A|B} = Sigma_AA - Sigma_AB Sigma_BB^-1 Sigma_BA`.
pub fn conditional_covariance(
    cov: &LabeledCovariance,
    targets: &[Var],
    given: &[Var],
) -> Result<LabeledCovariance> {
    check_distinct(targets)?;
    check_distinct(given)?;
    check_disjoint(targets, given)?;
    let a = cov.indices(targets)?;
    let b = cov.indices(given)?;

    let aa = cov.block(&a, &a);
    if b.is_empty() {
        return Ok(LabeledCovariance {
            labels: targets.to_vec(),
            matrix: aa,
        });
    }
    let degenerate = |condition: f64| Error::DegenerateConditioning {
        given: given.to_vec(),
        condition,
    };
    let (inv_bb, condition) = cov
        .block(&b, &b)
        .inverse_spd()
        .ok_or(degenerate(f64::INFINITY))?;
    if !condition.is_finite() || condition > MAX_CONDITION {
        return Err(degenerate(condition));
    }
    let ab = cov.block(&a, &b);
    let ba = cov.block(&b, &a);
    let correction = ab.mul(&inv_bb).mul(&ba);

    let n = a.len();
    let mut matrix = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = aa.at(i, j) - (correction.at(i, j) + correction.at(j, i)) * 0.5;
            matrix.set(i, j, v);
            matrix.set(j, i, v);
        }
    }
    Ok(LabeledCovariance {
        labels: targets.to_vec(),
        matrix,
    })
}

/// `I(A; B | C) = 0.5 log2(det Sigma_{A|C} / det Sigma_{A|B,C})` in bits.
pub fn gaussian_mutual_information(
    cov: &LabeledCovariance,
    a: &[Var],
    b: &[Var],
    given: &[Var],
) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Labels(
            "mutual information needs non-empty sets".into(),
        ));
    }
    check_disjoint(a, b)?;
    check_disjoint(b, given)?;
    let b_and_given: Vec<Var> = b.iter().chain(given).copied().collect();

    let outer = conditional_covariance(cov, a, given)?.matrix.determinant();
    let inner = conditional_covariance(cov, a, &b_and_given)?
        .matrix
        .determinant();
    if !(inner > 0.0) {
        return Err(Error::DegenerateConditioning {
            given: b_and_given,
            condition: f64::INFINITY,
        });
    }
    // ln(ratio) = ln_1p(ratio - 1); the subtraction is exact in double-double.
    let excess = (div(outer, inner) - 1.0).hi();
    Ok((0.5 * excess.ln_1p() / LN_2).max(0.0))
}
