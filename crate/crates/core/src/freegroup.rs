//! Exact word arithmetic in finite-rank free groups.
//!
//! Words are stored freely reduced; every constructor reduces eagerly, so a
//! [`ReducedWord`] is reduced by construction and operations never have to
//! re-check. Generators print as `a, b, c, ...` and their inverses as
//! `A, B, C, ...`; the empty string is the identity.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FreeGroupError {
    #[error("rank mismatch: {0} vs {1}")]
    RankMismatch(usize, usize),
    #[error("generator index {index} out of range for rank {rank}")]
    GeneratorOutOfRange { index: usize, rank: usize },
    #[error("rank must be positive")]
    ZeroRank,
    #[error("word is not cyclically reduced")]
    NotCyclicallyReduced,
    #[error("cannot parse letter {0:?}: expected a-z or A-Z within rank")]
    BadLetter(char),
    #[error("text format supports rank at most 26, got {0}")]
    RankBeyondAlphabet(usize),
    #[error("endomorphism needs one image per generator: rank {rank}, {given} images")]
    WrongImageCount { rank: usize, given: usize },
}

/// A signed generator: `index` names the generator, `inverse` flips it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub index: u16,
    pub inverse: bool,
}

impl Letter {
    pub fn new(index: usize, inverse: bool) -> Self {
        Letter {
            index: index as u16,
            inverse,
        }
    }

    pub fn inverted(self) -> Self {
        Letter {
            index: self.index,
            inverse: !self.inverse,
        }
    }

    pub fn cancels(self, other: Letter) -> bool {
        self.index == other.index && self.inverse != other.inverse
    }

    fn to_char(self) -> char {
        let base = if self.inverse { b'A' } else { b'a' };
        (base + self.index as u8) as char
    }

    fn from_char(c: char) -> Result<Self, FreeGroupError> {
        match c {
            'a'..='z' => Ok(Letter {
                index: c as u16 - 'a' as u16,
                inverse: false,
            }),
            'A'..='Z' => Ok(Letter {
                index: c as u16 - 'A' as u16,
                inverse: true,
            }),
            _ => Err(FreeGroupError::BadLetter(c)),
        }
    }
}

/// A freely reduced word in the free group of the stated rank.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ReducedWord {
    rank: usize,
    letters: Vec<Letter>,
}

impl ReducedWord {
    /// Reduces `letters` and wraps the result. Adjacent inverse pairs are
    /// cancelled until none remain.
    pub fn new(
        rank: usize,
        letters: impl IntoIterator<Item = Letter>,
    ) -> Result<Self, FreeGroupError> {
        if rank == 0 {
            return Err(FreeGroupError::ZeroRank);
        }
        let mut stack: Vec<Letter> = Vec::new();
        for l in letters {
            if (l.index as usize) >= rank {
                return Err(FreeGroupError::GeneratorOutOfRange {
                    index: l.index as usize,
                    rank,
                });
            }
            match stack.last() {
                Some(&top) if top.cancels(l) => {
                    stack.pop();
                }
                _ => stack.push(l),
            }
        }
        Ok(ReducedWord {
            rank,
            letters: stack,
        })
    }

    pub fn identity(rank: usize) -> Self {
        assert!(rank > 0, "rank must be positive");
        ReducedWord {
            rank,
            letters: Vec::new(),
        }
    }

    /// Single-letter word `x_index^{±1}`.
    pub fn generator(rank: usize, index: usize, inverse: bool) -> Result<Self, FreeGroupError> {
        ReducedWord::new(rank, [Letter::new(index, inverse)])
    }

    /// Parses the text format: `ab` means a·b, `aB` means a·b⁻¹, `""` is the
    /// identity.
    pub fn parse(rank: usize, text: &str) -> Result<Self, FreeGroupError> {
        if rank > 26 {
            return Err(FreeGroupError::RankBeyondAlphabet(rank));
        }
        let letters = text
            .chars()
            .map(Letter::from_char)
            .collect::<Result<Vec<_>, _>>()?;
        ReducedWord::new(rank, letters)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn first(&self) -> Option<Letter> {
        self.letters.first().copied()
    }

    pub fn last(&self) -> Option<Letter> {
        self.letters.last().copied()
    }

    pub fn inverse(&self) -> Self {
        let letters = self.letters.iter().rev().map(|l| l.inverted()).collect();
        ReducedWord {
            rank: self.rank,
            letters,
        }
    }

    /// w^n for n ≥ 0.
    pub fn power(&self, n: usize) -> Self {
        let mut out = ReducedWord::identity(self.rank);
        for _ in 0..n {
            out = concat_reduce(&out, self).expect("same rank");
        }
        out
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.first(), self.last()) {
            (Some(f), Some(l)) => self.len() == 1 || !f.cancels(l),
            _ => true,
        }
    }

    /// Rotation by `k`: moves the first `k` letters to the end. Only
    /// meaningful for cyclically reduced words, where the result stays
    /// reduced.
    pub fn rotate(&self, k: usize) -> Self {
        if self.letters.is_empty() {
            return self.clone();
        }
        let k = k % self.letters.len();
        let mut letters = self.letters[k..].to_vec();
        letters.extend_from_slice(&self.letters[..k]);
        ReducedWord {
            rank: self.rank,
            letters,
        }
    }

    /// Lexicographically least cyclic rotation; canonical representative of
    /// the rotation class of a cyclically reduced word.
    pub fn least_rotation(&self) -> Self {
        (0..self.len().max(1))
            .map(|k| self.rotate(k))
            .min_by(|u, v| u.letters.cmp(&v.letters))
            .unwrap_or_else(|| self.clone())
    }
}

impl fmt::Display for ReducedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.letters {
            write!(f, "{}", l.to_char())?;
        }
        Ok(())
    }
}

/// Freely reduced product u·v.
pub fn concat_reduce(u: &ReducedWord, v: &ReducedWord) -> Result<ReducedWord, FreeGroupError> {
    if u.rank != v.rank {
        return Err(FreeGroupError::RankMismatch(u.rank, v.rank));
    }
    let mut stack = u.letters.clone();
    for &l in &v.letters {
        match stack.last() {
            Some(&top) if top.cancels(l) => {
                stack.pop();
            }
            _ => stack.push(l),
        }
    }
    Ok(ReducedWord {
        rank: u.rank,
        letters: stack,
    })
}

/// Strips conjugating layers: returns `(core, conjugator)` with
/// `w = conjugator · core · conjugator⁻¹` and `core` cyclically reduced.
pub fn cyclically_reduce(w: &ReducedWord) -> (ReducedWord, ReducedWord) {
    let mut letters = w.letters.clone();
    let mut conj: Vec<Letter> = Vec::new();
    while letters.len() >= 2 {
        let first = letters[0];
        let last = *letters.last().unwrap();
        if first.cancels(last) {
            conj.push(first);
            letters.remove(0);
            letters.pop();
        } else {
            break;
        }
    }
    let core = ReducedWord {
        rank: w.rank,
        letters,
    };
    let conjugator = ReducedWord {
        rank: w.rank,
        letters: conj,
    };
    (core, conjugator)
}

/// Conjugacy test for cyclically reduced words: true iff `v` is a cyclic
/// rotation of `u`.
pub fn is_conjugate_cyclic(u: &ReducedWord, v: &ReducedWord) -> Result<bool, FreeGroupError> {
    if u.rank != v.rank {
        return Err(FreeGroupError::RankMismatch(u.rank, v.rank));
    }
    if !u.is_cyclically_reduced() || !v.is_cyclically_reduced() {
        return Err(FreeGroupError::NotCyclicallyReduced);
    }
    if u.len() != v.len() {
        return Ok(false);
    }
    Ok((0..u.len().max(1)).any(|k| u.rotate(k).letters == v.letters))
}

/// An endomorphism of the free group, given by generator images.
///
/// Surjectivity is never assumed; `is_automorphism` (in [`crate::endo`])
/// computes it by Stallings folding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Endomorphism {
    rank: usize,
    images: Vec<ReducedWord>,
}

impl Endomorphism {
    pub fn new(rank: usize, images: Vec<ReducedWord>) -> Result<Self, FreeGroupError> {
        if rank == 0 {
            return Err(FreeGroupError::ZeroRank);
        }
        if images.len() != rank {
            return Err(FreeGroupError::WrongImageCount {
                rank,
                given: images.len(),
            });
        }
        for im in &images {
            if im.rank() != rank {
                return Err(FreeGroupError::RankMismatch(rank, im.rank()));
            }
        }
        Ok(Endomorphism { rank, images })
    }

    /// Parses images from the text word format.
    pub fn parse(rank: usize, images: &[&str]) -> Result<Self, FreeGroupError> {
        let images = images
            .iter()
            .map(|s| ReducedWord::parse(rank, s))
            .collect::<Result<Vec<_>, _>>()?;
        Endomorphism::new(rank, images)
    }

    pub fn identity(rank: usize) -> Self {
        let images = (0..rank)
            .map(|i| ReducedWord::generator(rank, i, false).unwrap())
            .collect();
        Endomorphism { rank, images }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn images(&self) -> &[ReducedWord] {
        &self.images
    }

    pub fn image(&self, index: usize) -> &ReducedWord {
        &self.images[index]
    }

    /// Image of a single signed letter.
    pub fn image_of_letter(&self, l: Letter) -> ReducedWord {
        let im = &self.images[l.index as usize];
        if l.inverse {
            im.inverse()
        } else {
            im.clone()
        }
    }

    /// Column `j` is the exponent vector of the image of generator `j`.
    pub fn abelianization(&self) -> Vec<Vec<i64>> {
        let mut m = vec![vec![0i64; self.rank]; self.rank];
        for (j, im) in self.images.iter().enumerate() {
            for (i, e) in exponent_vector(im).into_iter().enumerate() {
                m[i][j] = e;
            }
        }
        m
    }
}

/// θ(w) = θ(x₁)···θ(xₙ), freely reduced.
pub fn apply_endo(theta: &Endomorphism, w: &ReducedWord) -> Result<ReducedWord, FreeGroupError> {
    if theta.rank() != w.rank() {
        return Err(FreeGroupError::RankMismatch(theta.rank(), w.rank()));
    }
    let mut out = ReducedWord::identity(w.rank());
    for &l in w.letters() {
        out = concat_reduce(&out, &theta.image_of_letter(l))?;
    }
    Ok(out)
}

/// Composition with the right factor applied first:
/// `compose(f, g)(x) = f(g(x))`.
pub fn compose(f: &Endomorphism, g: &Endomorphism) -> Result<Endomorphism, FreeGroupError> {
    if f.rank() != g.rank() {
        return Err(FreeGroupError::RankMismatch(f.rank(), g.rank()));
    }
    let images = g
        .images
        .iter()
        .map(|im| apply_endo(f, im))
        .collect::<Result<Vec<_>, _>>()?;
    Endomorphism::new(f.rank(), images)
}

/// Signed count of each generator in `w`.
pub fn exponent_vector(w: &ReducedWord) -> Vec<i64> {
    let mut v = vec![0i64; w.rank()];
    for l in w.letters() {
        v[l.index as usize] += if l.inverse { -1 } else { 1 };
    }
    v
}

/// Unsigned count of each generator in `w`.
pub fn letter_count_vector(w: &ReducedWord) -> Vec<u64> {
    let mut v = vec![0u64; w.rank()];
    for l in w.letters() {
        v[l.index as usize] += 1;
    }
    v
}

// The rank-2 generators of the semigroup realising all F2-by-Z groups, plus
// the four finite-order tails.

/// λ: a ↦ ba, b ↦ b. Abelianizes to L.
pub fn lambda() -> Endomorphism {
    Endomorphism::parse(2, &["ba", "b"]).unwrap()
}

/// ρ: a ↦ a, b ↦ ab. Abelianizes to R.
pub fn rho() -> Endomorphism {
    Endomorphism::parse(2, &["a", "ab"]).unwrap()
}

/// ι: a ↦ a⁻¹, b ↦ b⁻¹. Abelianizes to −I.
pub fn invert_generators() -> Endomorphism {
    Endomorphism::parse(2, &["A", "B"]).unwrap()
}

/// σ: a ↦ b, b ↦ a. Abelianizes to F.
pub fn swap_generators() -> Endomorphism {
    Endomorphism::parse(2, &["b", "a"]).unwrap()
}

/// a ↦ b⁻¹, b ↦ a⁻¹ (the composite of the two above). Abelianizes to −F.
pub fn swap_and_invert() -> Endomorphism {
    Endomorphism::parse(2, &["B", "A"]).unwrap()
}

// Serde: words as strings, endomorphisms as {"rank": k, "images": [...]}.

impl Serialize for ReducedWord {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Serialize, Deserialize)]
struct EndoWire {
    rank: usize,
    images: Vec<String>,
}

impl Serialize for Endomorphism {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let wire = EndoWire {
            rank: self.rank,
            images: self.images.iter().map(|w| w.to_string()).collect(),
        };
        wire.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Endomorphism {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let wire = EndoWire::deserialize(d)?;
        let images = wire
            .images
            .iter()
            .map(|s| ReducedWord::parse(wire.rank, s))
            .collect::<Result<Vec<_>, _>>()
            .map_err(D::Error::custom)?;
        Endomorphism::new(wire.rank, images).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(s: &str) -> ReducedWord {
        ReducedWord::parse(2, s).unwrap()
    }

    #[test]
    fn concat_cancels_one_pair() {
        assert_eq!(concat_reduce(&w("abB"), &w("a")).unwrap(), w("aa"));
    }

    #[test]
    fn concat_identity() {
        let u = w("aBab");
        assert_eq!(concat_reduce(&u, &w("")).unwrap(), u);
    }

    #[test]
    fn concat_full_cancellation() {
        assert_eq!(concat_reduce(&w("ab"), &w("BA")).unwrap(), w(""));
    }

    #[test]
    fn concat_rank_mismatch() {
        let u = ReducedWord::parse(2, "a").unwrap();
        let v = ReducedWord::parse(3, "c").unwrap();
        assert_eq!(
            concat_reduce(&u, &v),
            Err(FreeGroupError::RankMismatch(2, 3))
        );
    }

    #[test]
    fn parse_rejects_out_of_range() {
        assert!(ReducedWord::parse(2, "c").is_err());
    }

    #[test]
    fn cyclic_reduce_single_layer() {
        let (core, conj) = cyclically_reduce(&w("baB"));
        assert_eq!(core, w("a"));
        assert_eq!(conj, w("b"));
    }

    #[test]
    fn cyclic_reduce_already_reduced() {
        let (core, conj) = cyclically_reduce(&w("ab"));
        assert_eq!(core, w("ab"));
        assert_eq!(conj, w(""));
    }

    #[test]
    fn cyclic_reduce_two_layers_roundtrip() {
        let word = w("bbaBB");
        let (core, conj) = cyclically_reduce(&word);
        assert_eq!(core, w("a"));
        assert_eq!(conj, w("bb"));
        let back = concat_reduce(&concat_reduce(&conj, &core).unwrap(), &conj.inverse()).unwrap();
        assert_eq!(back, word);
    }

    #[test]
    fn conjugate_rotation() {
        assert!(is_conjugate_cyclic(&w("ab"), &w("ba")).unwrap());
    }

    #[test]
    fn conjugate_different_multiset() {
        assert!(!is_conjugate_cyclic(&w("ab"), &w("aB")).unwrap());
    }

    #[test]
    fn conjugate_longer_rotation() {
        // all rotations of abab² include b²aba
        assert!(is_conjugate_cyclic(&w("ababb"), &w("bbaba")).unwrap());
    }

    #[test]
    fn conjugate_rejects_unreduced() {
        assert_eq!(
            is_conjugate_cyclic(&w("baB"), &w("a")),
            Err(FreeGroupError::NotCyclicallyReduced)
        );
    }

    #[test]
    fn apply_interlocking_images() {
        let theta = Endomorphism::parse(2, &["ab", "ba"]).unwrap();
        assert_eq!(apply_endo(&theta, &w("ab")).unwrap(), w("abba"));
    }

    #[test]
    fn apply_identity() {
        let id = Endomorphism::identity(2);
        let word = w("aBab");
        assert_eq!(apply_endo(&id, &word).unwrap(), word);
    }

    #[test]
    fn apply_inverse_letter() {
        let theta = Endomorphism::parse(2, &["ab", "ba"]).unwrap();
        assert_eq!(apply_endo(&theta, &w("A")).unwrap(), w("BA"));
    }

    #[test]
    fn compose_lambda_rho_on_b() {
        let c = compose(&lambda(), &rho()).unwrap();
        // (λ∘ρ)(b) = λ(ab) = ba·b
        assert_eq!(c.image(1), &w("bab"));
    }

    #[test]
    fn compose_with_identity() {
        let theta = Endomorphism::parse(2, &["ab", "ba"]).unwrap();
        assert_eq!(compose(&Endomorphism::identity(2), &theta).unwrap(), theta);
    }

    #[test]
    fn invert_generators_is_involution() {
        let i = invert_generators();
        assert_eq!(compose(&i, &i).unwrap(), Endomorphism::identity(2));
    }

    #[test]
    fn exponent_vector_examples() {
        assert_eq!(exponent_vector(&w("abA")), vec![0, 1]);
        assert_eq!(exponent_vector(&w("ab")), vec![1, 1]);
        assert_eq!(exponent_vector(&w("abba").power(3)), vec![6, 6]);
    }

    #[test]
    fn letter_count_examples() {
        assert_eq!(letter_count_vector(&w("aBa")), vec![2, 1]);
        // components sum to the length, so odd words cannot balance
        for text in ["a", "aab", "Babab", "bAbAb"] {
            let counts = letter_count_vector(&w(text));
            assert_ne!(counts[0], counts[1], "{text}");
        }
    }

    #[test]
    fn abelianization_of_semigroup_generators() {
        assert_eq!(lambda().abelianization(), vec![vec![1, 0], vec![1, 1]]);
        assert_eq!(rho().abelianization(), vec![vec![1, 1], vec![0, 1]]);
        assert_eq!(
            swap_generators().abelianization(),
            vec![vec![0, 1], vec![1, 0]]
        );
        assert_eq!(
            invert_generators().abelianization(),
            vec![vec![-1, 0], vec![0, -1]]
        );
        assert_eq!(
            Endomorphism::identity(2).abelianization(),
            vec![vec![1, 0], vec![0, 1]]
        );
    }

    #[test]
    fn abelianization_is_functorial_on_generators() {
        let lr = compose(&lambda(), &rho()).unwrap();
        // L·R = [[1,1],[1,2]]
        assert_eq!(lr.abelianization(), vec![vec![1, 1], vec![1, 2]]);
    }

    #[test]
    fn display_roundtrip() {
        let word = w("aBbA");
        assert_eq!(word, w("")); // aB·bA reduces fully? a B b A -> a A -> empty
        let word = w("aBaB");
        assert_eq!(ReducedWord::parse(2, &word.to_string()).unwrap(), word);
    }

    #[test]
    fn endomorphism_json_roundtrip() {
        let theta = Endomorphism::parse(2, &["ab", "ba"]).unwrap();
        let js = serde_json::to_string(&theta).unwrap();
        assert_eq!(js, r#"{"rank":2,"images":["ab","ba"]}"#);
        let back: Endomorphism = serde_json::from_str(&js).unwrap();
        assert_eq!(back, theta);
    }

    fn arb_word(max_len: usize) -> impl Strategy<Value = ReducedWord> {
        prop::collection::vec((0usize..2, any::<bool>()), 0..=max_len).prop_map(|ls| {
            ReducedWord::new(2, ls.into_iter().map(|(i, s)| Letter::new(i, s))).unwrap()
        })
    }

    fn arb_endo(max_len: usize) -> impl Strategy<Value = Endomorphism> {
        prop::collection::vec(arb_word(max_len), 2)
            .prop_map(|images| Endomorphism::new(2, images).unwrap())
    }

    proptest! {
        #[test]
        fn concat_associative(u in arb_word(8), v in arb_word(8), t in arb_word(8)) {
            let left = concat_reduce(&concat_reduce(&u, &v).unwrap(), &t).unwrap();
            let right = concat_reduce(&u, &concat_reduce(&v, &t).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn concat_inverse_gives_identity(u in arb_word(10)) {
            prop_assert!(concat_reduce(&u, &u.inverse()).unwrap().is_empty());
        }

        #[test]
        fn concat_parity(u in arb_word(8), v in arb_word(8)) {
            let r = concat_reduce(&u, &v).unwrap();
            prop_assert_eq!(r.len() % 2, (u.len() + v.len()) % 2);
        }

        #[test]
        fn compose_agrees_with_application(f in arb_endo(4), g in arb_endo(4), u in arb_word(10)) {
            let fg = compose(&f, &g).unwrap();
            let via_compose = apply_endo(&fg, &u).unwrap();
            let via_steps = apply_endo(&f, &apply_endo(&g, &u).unwrap()).unwrap();
            prop_assert_eq!(via_compose, via_steps);
        }

        #[test]
        fn abelianization_functorial(f in arb_endo(4), g in arb_endo(4)) {
            let fg = compose(&f, &g).unwrap();
            let (af, ag) = (f.abelianization(), g.abelianization());
            let mut prod = vec![vec![0i64; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    for (k, row) in ag.iter().enumerate() {
                        prod[i][j] += af[i][k] * row[j];
                    }
                }
            }
            prop_assert_eq!(fg.abelianization(), prod);
        }

        #[test]
        fn exponent_vector_transforms_linearly(f in arb_endo(4), u in arb_word(10)) {
            let img = apply_endo(&f, &u).unwrap();
            let m = f.abelianization();
            let e = exponent_vector(&u);
            let expected: Vec<i64> = (0..2).map(|i| m[i][0] * e[0] + m[i][1] * e[1]).collect();
            prop_assert_eq!(exponent_vector(&img), expected);
        }

        #[test]
        fn cyclic_reduce_conjugation_roundtrip(u in arb_word(12)) {
            let (core, conj) = cyclically_reduce(&u);
            prop_assert!(core.is_cyclically_reduced());
            let back = concat_reduce(&concat_reduce(&conj, &core).unwrap(), &conj.inverse()).unwrap();
            prop_assert_eq!(back, u);
        }

        #[test]
        fn parse_display_roundtrip(u in arb_word(12)) {
            prop_assert_eq!(ReducedWord::parse(2, &u.to_string()).unwrap(), u);
        }
    }
}
