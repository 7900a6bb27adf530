//! Decomposition of infinite-order GL2(Z) matrices into the semigroup
//! generated by -I, F, L and R, up to conjugacy, and translation of the
//! result into an automorphism word.
//!
//! The conjugator is built from explicit moves (conjugation by F, by
//! diag(-1,1), by R or L and their inverses) so the certificate can be
//! replayed; the defining identity `C·(ε·F^δ·g)·C⁻¹ = (∏ lr_word)·terminal`
//! is checked exactly before a decomposition is returned.

use crate::freegroup::{self, compose, Endomorphism};
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MatError {
    #[error("matrix must have determinant ±1, got {0}")]
    NotUnimodular(i64),
    #[error("matrix has finite order {0}; only infinite-order matrices decompose")]
    FiniteOrder(u32),
    #[error("no row subtraction applies: matrix is I or F")]
    NoStep,
    #[error("row subtraction requires non-negative entries")]
    NotNonNegative,
    #[error("normalization did not terminate within its step budget")]
    StepBudgetExceeded,
}

/// 2×2 integer matrix of determinant ±1, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Mat2Z {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

pub const IDENT: Mat2Z = Mat2Z {
    a: 1,
    b: 0,
    c: 0,
    d: 1,
};
/// F swaps the generators: antidiagonal ones.
pub const FLIP: Mat2Z = Mat2Z {
    a: 0,
    b: 1,
    c: 1,
    d: 0,
};
/// R = [[1,1],[0,1]].
pub const R: Mat2Z = Mat2Z {
    a: 1,
    b: 1,
    c: 0,
    d: 1,
};
/// L = [[1,0],[1,1]].
pub const L: Mat2Z = Mat2Z {
    a: 1,
    b: 0,
    c: 1,
    d: 1,
};
/// diag(-1, 1); conjugation by it flips the signs of b and c.
pub const DIAG_NEG: Mat2Z = Mat2Z {
    a: -1,
    b: 0,
    c: 0,
    d: 1,
};

impl Mat2Z {
    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<Self, MatError> {
        let det = a * d - b * c;
        if det.abs() != 1 {
            return Err(MatError::NotUnimodular(det));
        }
        Ok(Mat2Z { a, b, c, d })
    }

    pub fn det(&self) -> i64 {
        self.a * self.d - self.b * self.c
    }

    pub fn mul(&self, o: &Mat2Z) -> Mat2Z {
        Mat2Z {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    pub fn neg(&self) -> Mat2Z {
        Mat2Z {
            a: -self.a,
            b: -self.b,
            c: -self.c,
            d: -self.d,
        }
    }

    /// Exact inverse; integral because the determinant is ±1.
    pub fn inverse(&self) -> Mat2Z {
        let det = self.det();
        debug_assert!(det.abs() == 1);
        Mat2Z {
            a: self.d * det,
            b: -self.b * det,
            c: -self.c * det,
            d: self.a * det,
        }
    }

    pub fn conjugate_by(&self, x: &Mat2Z) -> Mat2Z {
        x.mul(self).mul(&x.inverse())
    }

    pub fn pow(&self, n: u32) -> Mat2Z {
        let mut out = IDENT;
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    /// Smallest k ≤ 12 with g^k = I, if any. Orders of finite-order elements
    /// of GL2(Z) divide 12, so powering to 12 is exhaustive. Powers are
    /// taken in 128-bit arithmetic: the powers of a finite-order matrix stay
    /// within a small multiple of the cube of its entries, so an overflow
    /// can only come from an infinite-order matrix.
    pub fn finite_order(&self) -> Option<u32> {
        let g = [
            self.a as i128,
            self.b as i128,
            self.c as i128,
            self.d as i128,
        ];
        let mut p = g;
        for k in 1..=12 {
            if p == [1, 0, 0, 1] {
                return Some(k);
            }
            let next = [
                p[0].checked_mul(g[0])?
                    .checked_add(p[1].checked_mul(g[2])?)?,
                p[0].checked_mul(g[1])?
                    .checked_add(p[1].checked_mul(g[3])?)?,
                p[2].checked_mul(g[0])?
                    .checked_add(p[3].checked_mul(g[2])?)?,
                p[2].checked_mul(g[1])?
                    .checked_add(p[3].checked_mul(g[3])?)?,
            ];
            p = next;
        }
        None
    }

    pub fn is_nonnegative(&self) -> bool {
        self.a >= 0 && self.b >= 0 && self.c >= 0 && self.d >= 0
    }

    pub fn entry_abs_sum(&self) -> i64 {
        self.a.abs() + self.b.abs() + self.c.abs() + self.d.abs()
    }

    fn has_zero_entry(&self) -> bool {
        self.a == 0 || self.b == 0 || self.c == 0 || self.d == 0
    }
}

impl fmt::Display for Mat2Z {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{},{}],[{},{}]]", self.a, self.b, self.c, self.d)
    }
}

impl Serialize for Mat2Z {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [[self.a, self.b], [self.c, self.d]].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Mat2Z {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let m = <[[i64; 2]; 2]>::deserialize(d)?;
        Mat2Z::new(m[0][0], m[0][1], m[1][0], m[1][1]).map_err(serde::de::Error::custom)
    }
}

/// One letter of the non-negative word: L or R.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LrLetter {
    L,
    R,
}

impl LrLetter {
    pub fn matrix(&self) -> Mat2Z {
        match self {
            LrLetter::L => L,
            LrLetter::R => R,
        }
    }

    /// λ for L, ρ for R.
    pub fn automorphism(&self) -> Endomorphism {
        match self {
            LrLetter::L => freegroup::lambda(),
            LrLetter::R => freegroup::rho(),
        }
    }
}

/// Terminal of the row-subtraction sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Terminal {
    I,
    F,
}

impl Terminal {
    pub fn matrix(&self) -> Mat2Z {
        match self {
            Terminal::I => IDENT,
            Terminal::F => FLIP,
        }
    }
}

/// The four finite-order tail automorphisms. On the wire they are named
/// psi1..psi4 in the order: identity, invert both generators, swap them,
/// swap and invert.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Tail {
    #[serde(rename = "psi1")]
    Identity,
    #[serde(rename = "psi2")]
    InvertBoth,
    #[serde(rename = "psi3")]
    Swap,
    #[serde(rename = "psi4")]
    SwapInvert,
}

pub const ALL_TAILS: [Tail; 4] = [
    Tail::Identity,
    Tail::InvertBoth,
    Tail::Swap,
    Tail::SwapInvert,
];

impl Tail {
    pub fn automorphism(&self) -> Endomorphism {
        match self {
            Tail::Identity => Endomorphism::identity(2),
            Tail::InvertBoth => freegroup::invert_generators(),
            Tail::Swap => freegroup::swap_generators(),
            Tail::SwapInvert => freegroup::swap_and_invert(),
        }
    }

    pub fn matrix(&self) -> Mat2Z {
        match self {
            Tail::Identity => IDENT,
            Tail::InvertBoth => IDENT.neg(),
            Tail::Swap => FLIP,
            Tail::SwapInvert => FLIP.neg(),
        }
    }

    /// True when the tail maps each generator class to itself (possibly
    /// inverted); false when it swaps the two classes.
    pub fn preserves_classes(&self) -> bool {
        matches!(self, Tail::Identity | Tail::InvertBoth)
    }

    /// Image of generator class `c` (0 = a, 1 = b) as (class, inverted).
    pub fn class_image(&self, c: usize) -> (usize, bool) {
        match self {
            Tail::Identity => (c, false),
            Tail::InvertBoth => (c, true),
            Tail::Swap => (1 - c, false),
            Tail::SwapInvert => (1 - c, true),
        }
    }

    pub fn wire_name(&self) -> &'static str {
        match self {
            Tail::Identity => "psi1",
            Tail::InvertBoth => "psi2",
            Tail::Swap => "psi3",
            Tail::SwapInvert => "psi4",
        }
    }

    pub fn from_wire(name: &str) -> Option<Tail> {
        match name {
            "psi1" => Some(Tail::Identity),
            "psi2" => Some(Tail::InvertBoth),
            "psi3" => Some(Tail::Swap),
            "psi4" => Some(Tail::SwapInvert),
            _ => None,
        }
    }
}

/// Automorphism normal form: a nonempty body over {λ, ρ} followed by one
/// finite-order tail.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AutWord {
    pub body: Vec<LrLetter>,
    pub tail: Tail,
}

impl AutWord {
    pub fn new(body: Vec<LrLetter>, tail: Tail) -> Self {
        AutWord { body, tail }
    }

    /// The automorphism η₀∘η₁∘···∘η_{n−1}∘tail (tail applied first).
    pub fn realize(&self) -> Endomorphism {
        let mut out = self.tail.automorphism();
        for eta in self.body.iter().rev() {
            out = compose(&eta.automorphism(), &out).expect("rank 2 throughout");
        }
        out
    }

    /// Product of the body letters' matrices times the signed tail matrix;
    /// equals the abelianization of [`Self::realize`].
    pub fn abelianization_matrix(&self) -> Mat2Z {
        let mut m = IDENT;
        for eta in &self.body {
            m = m.mul(&eta.matrix());
        }
        m.mul(&self.tail.matrix())
    }

    /// Compact text form, e.g. `LLR.psi2`.
    pub fn compact(&self) -> String {
        let body: String = self
            .body
            .iter()
            .map(|l| match l {
                LrLetter::L => 'L',
                LrLetter::R => 'R',
            })
            .collect();
        format!("{}.{}", body, self.tail.wire_name())
    }

    pub fn parse_compact(text: &str) -> Option<AutWord> {
        let (body_txt, tail_txt) = text.split_once('.')?;
        let body = body_txt
            .chars()
            .map(|c| match c {
                'L' | 'l' => Some(LrLetter::L),
                'R' | 'r' => Some(LrLetter::R),
                _ => None,
            })
            .collect::<Option<Vec<_>>>()?;
        if body.is_empty() {
            return None;
        }
        Some(AutWord {
            body,
            tail: Tail::from_wire(tail_txt)?,
        })
    }
}

impl fmt::Display for AutWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.compact())
    }
}

/// Certified conjugation of `ε·F^δ·g` to a non-negative word in L and R
/// times a terminal I or F.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixDecomposition {
    /// ε = ±1.
    pub sign: i64,
    /// δ ∈ {0, 1}: whether F multiplies g before conjugating.
    pub flip: u8,
    pub conjugator: Mat2Z,
    pub lr_word: Vec<LrLetter>,
    pub terminal: Terminal,
}

impl MatrixDecomposition {
    /// Product of the lr word and the terminal.
    pub fn word_product(&self) -> Mat2Z {
        let mut m = IDENT;
        for l in &self.lr_word {
            m = m.mul(&l.matrix());
        }
        m.mul(&self.terminal.matrix())
    }

    /// Exact check of `C·(ε·F^δ·g)·C⁻¹ = (∏ lr_word)·terminal`.
    pub fn verifies(&self, g: &Mat2Z) -> bool {
        let mut base = *g;
        if self.flip == 1 {
            base = FLIP.mul(&base);
        }
        if self.sign == -1 {
            base = base.neg();
        }
        base.conjugate_by(&self.conjugator) == self.word_product()
    }
}

/// Non-negative normal form: (C, ε, δ, N) with `C·(ε·F^δ·g)·C⁻¹ = N ≥ 0`.
///
/// Follows the lemma's moves: choose among g, −g, Fg, −Fg; position the
/// largest entry with conjugation by F; fix signs with conjugation by
/// diag(−1,1); conjugate by R⁻¹ in the mixed-sign case. Anti-triangular
/// matrices get one extra R- or L-conjugation to clear the zero entries.
pub fn normalize_to_nonneg(g: &Mat2Z) -> Result<(Mat2Z, i64, u8, Mat2Z), MatError> {
    if let Some(order) = g.finite_order() {
        return Err(MatError::FiniteOrder(order));
    }
    for (flip, sign) in [(0u8, 1i64), (0, -1), (1, 1), (1, -1)] {
        let mut base = *g;
        if flip == 1 {
            base = FLIP.mul(&base);
        }
        if sign == -1 {
            base = base.neg();
        }
        if base.finite_order().is_some() {
            continue;
        }
        if let Some((c, n)) = conjugate_to_nonneg(&base) {
            debug_assert!(n.is_nonnegative());
            debug_assert_eq!(base.conjugate_by(&c), n);
            return Ok((c, sign, flip, n));
        }
    }
    // The lemma guarantees one of the four candidates works.
    Err(MatError::StepBudgetExceeded)
}

/// Runs the lemma's conjugation moves on a fixed infinite-order base matrix.
/// Returns None when the base needs a different sign or flip choice; a
/// wrong choice can send the moves into a cycle with a growing conjugator,
/// so the attempt also bails once entries leave a safe range.
fn conjugate_to_nonneg(base: &Mat2Z) -> Option<(Mat2Z, Mat2Z)> {
    const ENTRY_LIMIT: i64 = 1 << 30;
    let mut n = *base;
    let mut c = IDENT;
    let mut budget = 64 * base.entry_abs_sum() + 64;
    let conj = |n: &mut Mat2Z, c: &mut Mat2Z, x: &Mat2Z| {
        *n = n.conjugate_by(x);
        *c = x.mul(c);
    };
    loop {
        if n.is_nonnegative() {
            return Some((c, n));
        }
        budget -= 1;
        if budget <= 0 || n.entry_max_abs() > ENTRY_LIMIT || c.entry_max_abs() > ENTRY_LIMIT {
            return None;
        }
        if n.has_zero_entry() {
            // Triangular forms are powers of R or L up to the moves we have;
            // anti-triangular forms need their zeros cleared first.
            if n.b == 0 || n.c == 0 {
                // Diagonal entries are ±1. The order-2 shapes were excluded
                // by the finite-order guard on the base.
                if n.a == 1 && n.d == 1 {
                    conj(&mut n, &mut c, &DIAG_NEG);
                } else {
                    return None; // needs a sign flip: wrong candidate
                }
            } else {
                // a == 0 or d == 0; move the zero to the top-left first.
                if n.d == 0 {
                    conj(&mut n, &mut c, &FLIP);
                    continue;
                }
                if n.b < 0 {
                    conj(&mut n, &mut c, &R);
                } else {
                    conj(&mut n, &mut c, &L.inverse());
                }
            }
            continue;
        }
        // No zero entries: the lemma's main case.
        let max = n.entry_max_abs();
        if n.d.abs() == max && n.a.abs() < max {
            conj(&mut n, &mut c, &FLIP);
            continue;
        }
        if n.a.abs() < max {
            return None; // largest entry is off-diagonal: wrong flip choice
        }
        if n.a < 0 {
            return None; // wrong sign choice
        }
        if n.c < 0 {
            conj(&mut n, &mut c, &DIAG_NEG);
            continue;
        }
        if n.b < 0 && n.d < 0 {
            conj(&mut n, &mut c, &R.inverse());
            continue;
        }
        // Mixed signs of b and d with a, c > 0 contradict |det| = 1.
        return None;
    }
}

impl Mat2Z {
    fn entry_max_abs(&self) -> i64 {
        self.a
            .abs()
            .max(self.b.abs())
            .max(self.c.abs())
            .max(self.d.abs())
    }
}

/// The unique entry-sum-reducing row subtraction on a non-negative,
/// non-diagonal, non-antidiagonal matrix: `N = letter · N'`.
pub fn row_subtraction_step(n: &Mat2Z) -> Result<(LrLetter, Mat2Z), MatError> {
    if !n.is_nonnegative() {
        return Err(MatError::NotNonNegative);
    }
    // N = R·N' means N' = N with the second row subtracted from the first;
    // N = L·N' subtracts the first row from the second.
    let r_step = Mat2Z {
        a: n.a - n.c,
        b: n.b - n.d,
        c: n.c,
        d: n.d,
    };
    let l_step = Mat2Z {
        a: n.a,
        b: n.b,
        c: n.c - n.a,
        d: n.d - n.b,
    };
    let r_ok = r_step.is_nonnegative() && r_step.entry_abs_sum() < n.entry_abs_sum();
    let l_ok = l_step.is_nonnegative() && l_step.entry_abs_sum() < n.entry_abs_sum();
    debug_assert!(!(r_ok && l_ok), "both subtractions valid would force det 0");
    if r_ok {
        Ok((LrLetter::R, r_step))
    } else if l_ok {
        Ok((LrLetter::L, l_step))
    } else {
        Err(MatError::NoStep)
    }
}

/// Full decomposition pipeline; the returned value satisfies its defining
/// identity exactly (asserted before returning).
pub fn decompose(g: &Mat2Z) -> Result<MatrixDecomposition, MatError> {
    let (conjugator, sign, flip, mut n) = normalize_to_nonneg(g)?;
    let mut lr_word = Vec::new();
    let mut prev_sum = n.entry_abs_sum();
    loop {
        if n == IDENT || n == FLIP {
            break;
        }
        let (letter, next) = row_subtraction_step(&n)?;
        assert!(
            next.entry_abs_sum() < prev_sum,
            "entry sums must strictly decrease"
        );
        prev_sum = next.entry_abs_sum();
        lr_word.push(letter);
        n = next;
    }
    let terminal = if n == IDENT { Terminal::I } else { Terminal::F };
    let dec = MatrixDecomposition {
        sign,
        flip,
        conjugator,
        lr_word,
        terminal,
    };
    assert!(
        !dec.lr_word.is_empty(),
        "infinite order forces a nonempty word"
    );
    assert!(dec.verifies(g), "decomposition identity must hold exactly");
    Ok(dec)
}

/// Maps a decomposition to the automorphism normal form: L ↦ λ, R ↦ ρ and
/// (ε, terminal) to the tail with abelianization ε·terminal.
pub fn to_aut_word(dec: &MatrixDecomposition) -> AutWord {
    let tail = match (dec.sign, dec.terminal) {
        (1, Terminal::I) => Tail::Identity,
        (-1, Terminal::I) => Tail::InvertBoth,
        (1, Terminal::F) => Tail::Swap,
        (-1, Terminal::F) => Tail::SwapInvert,
        _ => unreachable!("sign is ±1"),
    };
    AutWord::new(dec.lr_word.clone(), tail)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(a: i64, b: i64, c: i64, d: i64) -> Mat2Z {
        Mat2Z::new(a, b, c, d).unwrap()
    }

    #[test]
    fn finite_order_examples() {
        assert_eq!(FLIP.finite_order(), Some(2));
        assert_eq!(R.finite_order(), None);
        assert_eq!(m(0, -1, 1, 0).finite_order(), Some(4));
        assert_eq!(IDENT.neg().finite_order(), Some(2));
        assert_eq!(m(0, -1, 1, -1).finite_order(), Some(3));
    }

    #[test]
    fn normalize_r_inverse() {
        // conjugation by diag(-1,1) turns R⁻¹ into R
        let (c, sign, flip, n) = normalize_to_nonneg(&m(1, -1, 0, 1)).unwrap();
        assert_eq!((sign, flip), (1, 0));
        assert_eq!(c, DIAG_NEG);
        assert_eq!(n, R);
    }

    #[test]
    fn normalize_already_nonneg() {
        let g = m(2, 1, 1, 1);
        let (c, sign, flip, n) = normalize_to_nonneg(&g).unwrap();
        assert_eq!((c, sign, flip, n), (IDENT, 1, 0, g));
    }

    #[test]
    fn normalize_global_sign() {
        let g = m(-2, -1, -1, -1);
        let (c, sign, flip, n) = normalize_to_nonneg(&g).unwrap();
        assert_eq!((c, sign, flip), (IDENT, -1, 0));
        assert_eq!(n, m(2, 1, 1, 1));
    }

    #[test]
    fn normalize_needs_flip() {
        let g = m(1, -2, -1, 1);
        let (c, sign, flip, n) = normalize_to_nonneg(&g).unwrap();
        assert!(n.is_nonnegative());
        let mut base = g;
        if flip == 1 {
            base = FLIP.mul(&base);
        }
        if sign == -1 {
            base = base.neg();
        }
        assert_eq!(base.conjugate_by(&c), n);
    }

    #[test]
    fn normalize_anti_triangular_hyperbolic() {
        // infinite order, and Fg has order 2, so the zero entries must be
        // cleared by conjugation
        let g = m(0, -1, 1, 3);
        let (c, sign, flip, n) = normalize_to_nonneg(&g).unwrap();
        assert!(n.is_nonnegative());
        let mut base = g;
        if flip == 1 {
            base = FLIP.mul(&base);
        }
        if sign == -1 {
            base = base.neg();
        }
        assert_eq!(base.conjugate_by(&c), n);
    }

    #[test]
    fn row_step_examples() {
        assert_eq!(
            row_subtraction_step(&m(2, 1, 1, 1)).unwrap(),
            (LrLetter::R, L)
        );
        assert_eq!(row_subtraction_step(&L).unwrap(), (LrLetter::L, IDENT));
        assert_eq!(row_subtraction_step(&R).unwrap(), (LrLetter::R, IDENT));
        assert_eq!(row_subtraction_step(&IDENT), Err(MatError::NoStep));
        assert_eq!(row_subtraction_step(&FLIP), Err(MatError::NoStep));
    }

    #[test]
    fn decompose_r() {
        let dec = decompose(&R).unwrap();
        assert_eq!(dec.sign, 1);
        assert_eq!(dec.flip, 0);
        assert_eq!(dec.conjugator, IDENT);
        assert_eq!(dec.lr_word, vec![LrLetter::R]);
        assert_eq!(dec.terminal, Terminal::I);
    }

    #[test]
    fn decompose_rl() {
        let dec = decompose(&m(2, 1, 1, 1)).unwrap();
        assert_eq!(dec.lr_word, vec![LrLetter::R, LrLetter::L]);
        assert_eq!(dec.terminal, Terminal::I);
        assert_eq!((dec.sign, dec.flip, dec.conjugator), (1, 0, IDENT));
    }

    #[test]
    fn decompose_rejects_finite_order() {
        assert_eq!(decompose(&FLIP), Err(MatError::FiniteOrder(2)));
    }

    #[test]
    fn aut_word_tails() {
        let dec = decompose(&m(2, 1, 1, 1)).unwrap();
        let word = to_aut_word(&dec);
        assert_eq!(word.tail, Tail::Identity);
        assert_eq!(word.compact(), "RL.psi1");
    }

    #[test]
    fn aut_word_abelianization_matches_realized() {
        for word in [
            AutWord::new(vec![LrLetter::R, LrLetter::L], Tail::Identity),
            AutWord::new(vec![LrLetter::L], Tail::Swap),
            AutWord::new(vec![LrLetter::R], Tail::InvertBoth),
            AutWord::new(
                vec![LrLetter::L, LrLetter::L, LrLetter::R],
                Tail::SwapInvert,
            ),
        ] {
            let ab = word.realize().abelianization();
            let m = word.abelianization_matrix();
            assert_eq!(ab, vec![vec![m.a, m.b], vec![m.c, m.d]]);
        }
    }

    #[test]
    fn realized_class_conjugate_to_input() {
        // C⁻¹ · ab(realize(to_aut_word(dec))) · C = F^δ · g, exactly
        for g in [
            m(2, 1, 1, 1),
            m(1, -1, 0, 1),
            m(3, 2, 4, 3),
            m(-2, -1, -1, -1),
        ] {
            let dec = decompose(&g).unwrap();
            let word = to_aut_word(&dec);
            let realized = word.abelianization_matrix();
            let lhs = realized.conjugate_by(&dec.conjugator.inverse());
            let mut rhs = g;
            if dec.flip == 1 {
                rhs = FLIP.mul(&rhs);
            }
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn psi4_is_composite_of_psi2_psi3() {
        let direct = Tail::SwapInvert.automorphism();
        let composite =
            compose(&Tail::InvertBoth.automorphism(), &Tail::Swap.automorphism()).unwrap();
        assert_eq!(direct, composite);
    }

    #[test]
    fn swap_tail_commutes_past_body_letters() {
        // ρ∘σ = σ∘λ: the identity that lets a single tail sit at the end of
        // the normal form
        let lhs = compose(&freegroup::rho(), &freegroup::swap_generators()).unwrap();
        let rhs = compose(&freegroup::swap_generators(), &freegroup::lambda()).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn matrix_json_roundtrip() {
        let g = m(2, 1, 1, 1);
        let js = serde_json::to_string(&g).unwrap();
        assert_eq!(js, "[[2,1],[1,1]]");
        let back: Mat2Z = serde_json::from_str(&js).unwrap();
        assert_eq!(back, g);
        assert!(serde_json::from_str::<Mat2Z>("[[2,0],[0,2]]").is_err());
    }

    #[test]
    fn compact_parse_roundtrip() {
        let w = AutWord::parse_compact("LLR.psi3").unwrap();
        assert_eq!(w.body, vec![LrLetter::L, LrLetter::L, LrLetter::R]);
        assert_eq!(w.tail, Tail::Swap);
        assert_eq!(AutWord::parse_compact(&w.compact()).unwrap(), w);
        assert!(AutWord::parse_compact(".psi1").is_none());
        assert!(AutWord::parse_compact("LR.psi9").is_none());
    }
}
