//! Exact rational feasibility for `A x = b, x ≥ 0` by the phase-one simplex
//! method with Bland's rule.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpResult {
    Feasible(Vec<BigRational>),
    /// Farkas vector `y` with `yᵀA ≤ 0` and `yᵀb > 0`.
    Infeasible(Vec<BigRational>),
}

pub fn feasible(a: &[Vec<BigRational>], b: &[BigRational], n: usize) -> LpResult {
    let m = a.len();
    let width = n + m + 1;
    let rhs = n + m;
    let sign: Vec<BigRational> = b
        .iter()
        .map(|v| if v.is_negative() { -BigRational::one() } else { BigRational::one() })
        .collect();
    let mut t: Vec<Vec<BigRational>> = (0..m)
        .map(|i| {
            let mut row = vec![BigRational::zero(); width];
            for (j, v) in a[i].iter().enumerate() {
                row[j] = v * &sign[i];
            }
            row[n + i] = BigRational::one();
            row[rhs] = &b[i] * &sign[i];
            row
        })
        .collect();
    let mut basis: Vec<usize> = (n..n + m).collect();
    // reduced costs of the phase-one objective Σ artificials
    let mut obj = vec![BigRational::zero(); width];
    obj[n..n + m].fill(BigRational::one());
    for row in &t {
        for j in 0..width {
            obj[j] -= &row[j];
        }
    }
    while let Some(enter) = (0..n + m).find(|&j| obj[j].is_negative()) {
        let mut leave: Option<usize> = None;
        for i in 0..m {
            if !t[i][enter].is_positive() {
                continue;
            }
            let better = match leave {
                None => true,
                Some(l) => {
                    let ri = &t[i][rhs] / &t[i][enter];
                    let rl = &t[l][rhs] / &t[l][enter];
                    ri < rl || (ri == rl && basis[i] < basis[l])
                }
            };
            if better {
                leave = Some(i);
            }
        }
        let Some(r) = leave else {
            // phase one is bounded below by zero
            unreachable!("unbounded phase-one objective");
        };
        let p = t[r][enter].clone();
        for v in t[r].iter_mut() {
            *v /= &p;
        }
        let prow = t[r].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i != r && !row[enter].is_zero() {
                let f = row[enter].clone();
                for j in 0..width {
                    if !prow[j].is_zero() {
                        row[j] -= &f * &prow[j];
                    }
                }
            }
        }
        let f = obj[enter].clone();
        for j in 0..width {
            if !prow[j].is_zero() {
                obj[j] -= &f * &prow[j];
            }
        }
        basis[r] = enter;
    }
    let residual = -obj[rhs].clone();
    if residual.is_zero() {
        let mut x = vec![BigRational::zero(); n];
        for (i, &bj) in basis.iter().enumerate() {
            if bj < n {
                x[bj] = t[i][rhs].clone();
            }
        }
        LpResult::Feasible(x)
    } else {
        let y = (0..m)
            .map(|i| (BigRational::one() - &obj[n + i]) * &sign[i])
            .collect();
        LpResult::Infeasible(y)
    }
}

/// `A x = b` and `x ≥ 0`.
pub fn check_solution(a: &[Vec<BigRational>], b: &[BigRational], x: &[BigRational]) -> bool {
    x.iter().all(|v| !v.is_negative())
        && a.iter().zip(b).all(|(row, bi)| {
            let s: BigRational = row.iter().zip(x).map(|(u, v)| u * v).sum();
            s == *bi
        })
}

/// `yᵀA ≤ 0` and `yᵀb > 0`.
pub fn check_farkas(a: &[Vec<BigRational>], b: &[BigRational], n: usize, y: &[BigRational]) -> bool {
    let yb: BigRational = y.iter().zip(b).map(|(u, v)| u * v).sum();
    yb.is_positive()
        && (0..n).all(|j| {
            let s: BigRational = a.iter().zip(y).map(|(row, yi)| &row[j] * yi).sum();
            !s.is_positive()
        })
}
