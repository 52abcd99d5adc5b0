//! Brute-force vertex enumeration for bounded polyhedra in a few
//! dimensions; the reference optimum for LP and Farkas checks.

#![allow(dead_code)]

use lexrsm::linear::Rat;
use num::Zero;

/// Row `a·x ≤ b`.
pub type Row = (Vec<Rat>, Rat);

/// Unique solution of the square system, if any.
pub fn solve_square(rows: &[&Row]) -> Option<Vec<Rat>> {
    let n = rows.len();
    let mut m: Vec<Vec<Rat>> = rows
        .iter()
        .map(|(a, b)| {
            let mut r = a.clone();
            r.push(b.clone());
            r
        })
        .collect();
    for col in 0..n {
        let p = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, p);
        let piv = m[col][col].clone();
        for k in col..=n {
            m[col][k] = &m[col][k] / &piv;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for k in col..=n {
                    let d = &f * &m[col][k];
                    m[r][k] -= d;
                }
            }
        }
    }
    Some(m.into_iter().map(|r| r[n].clone()).collect())
}

pub fn dot(a: &[Rat], x: &[Rat]) -> Rat {
    a.iter().zip(x).map(|(p, q)| p * q).sum()
}

/// All vertices of a bounded polyhedron in `n` dimensions.
pub fn vertices(n: usize, rows: &[Row]) -> Vec<Vec<Rat>> {
    let mut out: Vec<Vec<Rat>> = Vec::new();
    let mut pick = vec![0usize; n];
    fn rec(n: usize, rows: &[Row], start: usize, depth: usize, pick: &mut Vec<usize>, out: &mut Vec<Vec<Rat>>) {
        if depth == n {
            let sel: Vec<&Row> = pick.iter().map(|&i| &rows[i]).collect();
            if let Some(x) = solve_square(&sel) {
                if rows.iter().all(|(a, b)| dot(a, &x) <= *b) && !out.contains(&x) {
                    out.push(x);
                }
            }
            return;
        }
        for i in start..rows.len() {
            pick[depth] = i;
            rec(n, rows, i + 1, depth + 1, pick, out);
        }
    }
    rec(n, rows, 0, 0, &mut pick, &mut out);
    out
}
