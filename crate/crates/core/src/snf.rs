//! Smith normal form over the integers, used for cellular homology and the
//! coker(M − I) cross-checks.

use serde::Serialize;
use std::fmt;

/// Dense integer matrix, row-major. Entries are widened to i128 internally
/// so chains of row operations cannot overflow on the sizes this crate sees.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<i128>,
}

impl IntMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMat {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut m = IntMat::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = v as i128;
            }
        }
        m
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1;
        }
        m
    }
}

impl std::ops::Index<(usize, usize)> for IntMat {
    type Output = i128;
    fn index(&self, (i, j): (usize, usize)) -> &i128 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut i128 {
        &mut self.data[i * self.cols + j]
    }
}

/// Diagonal of the Smith normal form: nonzero entries d₁ | d₂ | ..., all
/// positive, followed implicitly by zeros.
pub fn smith_diagonal(m: &IntMat) -> Vec<i128> {
    let mut a = m.clone();
    let (rows, cols) = (a.rows, a.cols);
    let mut diag = Vec::new();
    let mut k = 0;
    while k < rows.min(cols) {
        // locate a nonzero pivot of least absolute value in the trailing block
        let mut pivot: Option<(usize, usize)> = None;
        for i in k..rows {
            for j in k..cols {
                if a[(i, j)] != 0
                    && pivot.is_none_or(|(pi, pj)| a[(i, j)].abs() < a[(pi, pj)].abs())
                {
                    pivot = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = pivot else { break };
        swap_rows(&mut a, k, pi);
        swap_cols(&mut a, k, pj);
        // clear row and column k; restart if a remainder creates a smaller entry
        let mut clean = true;
        for i in k + 1..rows {
            let q = a[(i, k)].div_euclid(a[(k, k)]);
            if q != 0 {
                for j in k..cols {
                    a[(i, j)] -= q * a[(k, j)];
                }
            }
            if a[(i, k)] != 0 {
                clean = false;
            }
        }
        for j in k + 1..cols {
            let q = a[(k, j)].div_euclid(a[(k, k)]);
            if q != 0 {
                for i in k..rows {
                    a[(i, j)] -= q * a[(i, k)];
                }
            }
            if a[(k, j)] != 0 {
                clean = false;
            }
        }
        if !clean {
            continue;
        }
        // enforce divisibility into the remaining block
        let mut divides_all = true;
        'scan: for i in k + 1..rows {
            for j in k + 1..cols {
                if a[(i, j)] % a[(k, k)] != 0 {
                    // add row i to row k and restart the pivot step
                    for jj in k..cols {
                        let v = a[(i, jj)];
                        a[(k, jj)] += v;
                    }
                    divides_all = false;
                    break 'scan;
                }
            }
        }
        if !divides_all {
            continue;
        }
        diag.push(a[(k, k)].abs());
        k += 1;
    }
    diag
}

fn swap_rows(a: &mut IntMat, i: usize, j: usize) {
    if i != j {
        for col in 0..a.cols {
            let (x, y) = (a[(i, col)], a[(j, col)]);
            a[(i, col)] = y;
            a[(j, col)] = x;
        }
    }
}

fn swap_cols(a: &mut IntMat, i: usize, j: usize) {
    if i != j {
        for row in 0..a.rows {
            let (x, y) = (a[(row, i)], a[(row, j)]);
            a[(row, i)] = y;
            a[(row, j)] = x;
        }
    }
}

/// A finitely generated abelian group as free rank plus torsion factors
/// (each > 1, in divisibility order).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AbelianInvariants {
    pub free_rank: usize,
    pub torsion: Vec<i128>,
}

impl AbelianInvariants {
    /// Cokernel of the map with the given matrix: Z^rows / im(M).
    pub fn cokernel(m: &IntMat) -> Self {
        let diag = smith_diagonal(m);
        let torsion: Vec<i128> = diag.iter().copied().filter(|&d| d > 1).collect();
        AbelianInvariants {
            free_rank: m.rows - diag.len(),
            torsion,
        }
    }

    pub fn free(rank: usize) -> Self {
        AbelianInvariants {
            free_rank: rank,
            torsion: Vec::new(),
        }
    }
}

impl fmt::Display for AbelianInvariants {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            r => parts.push(format!("Z^{r}")),
        }
        for t in &self.torsion {
            parts.push(format!("Z/{t}"));
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}
