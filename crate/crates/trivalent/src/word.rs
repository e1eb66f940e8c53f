//! The noncommutative word algebra on three strands.
//!
//! Elements are rational combinations of monomials `z^k · w`, where `w` is a
//! word over the generators `c1 c2 c3 s1 s2 d1 d2 y l<n>`. The letter `z`
//! is central and is normalized to a power carried on the word; `l1` is not a
//! letter — it multiplies out as `c1 c2` on construction, while `l<n>` for
//! n ≥ 2 stays opaque. The symmetric-group generators τ₁, τ₂, τ₄, τ₅ and the
//! mirror μ act at the word level; τ₃ deliberately has no word-level action
//! (it exists only through realization as diagrams).

use crate::sparse::SparseVector;
use std::fmt;

/// A single non-`z` generator letter.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Letter {
    C1,
    C2,
    C3,
    S1,
    S2,
    D1,
    D2,
    Y,
    /// Opaque ladder letter, length parameter ≥ 2 (`l1` never survives
    /// construction).
    L(u32),
}

impl Letter {
    pub fn is_mirror_symmetric(self) -> bool {
        // Every generator letter equals its own mirror; mirroring a word is
        // therefore plain reversal.
        true
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Letter::C1 => write!(f, "c1"),
            Letter::C2 => write!(f, "c2"),
            Letter::C3 => write!(f, "c3"),
            Letter::S1 => write!(f, "s1"),
            Letter::S2 => write!(f, "s2"),
            Letter::D1 => write!(f, "d1"),
            Letter::D2 => write!(f, "d2"),
            Letter::Y => write!(f, "y"),
            Letter::L(n) => write!(f, "l{n}"),
        }
    }
}

/// A monomial `z^k · letters`, the basis element of the word algebra.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Word {
    pub z_pow: u32,
    pub letters: Vec<Letter>,
}

impl Word {
    /// The empty word (multiplicative identity).
    pub fn one() -> Self {
        Word::default()
    }

    /// Builds a word, expanding any `l1` into `c1 c2`.
    pub fn new(z_pow: u32, letters: impl IntoIterator<Item = Letter>) -> Self {
        let mut out = Vec::new();
        for l in letters {
            if l == Letter::L(1) {
                out.push(Letter::C1);
                out.push(Letter::C2);
            } else {
                out.push(l);
            }
        }
        Word { z_pow, letters: out }
    }

    pub fn from_letters(letters: impl IntoIterator<Item = Letter>) -> Self {
        Word::new(0, letters)
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty() && self.z_pow == 0
    }

    /// Concatenation; `z`-powers add (z is central).
    pub fn concat(&self, rhs: &Word) -> Word {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&rhs.letters);
        Word { z_pow: self.z_pow + rhs.z_pow, letters }
    }

    /// The mirror image: letters reversed (each generator is its own mirror).
    pub fn reversed(&self) -> Word {
        let mut letters = self.letters.clone();
        letters.reverse();
        Word { z_pow: self.z_pow, letters }
    }

    pub fn is_palindrome(&self) -> bool {
        self.letters.iter().eq(self.letters.iter().rev())
    }

    /// True when every letter is `c1`, `c2` or `d2` (the alphabet of the
    /// bracket triviality classes and the reduction rules A–F).
    pub fn is_reduction_alphabet(&self) -> bool {
        self.letters
            .iter()
            .all(|l| matches!(l, Letter::C1 | Letter::C2 | Letter::D2))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "1");
        }
        let mut parts: Vec<String> = Vec::new();
        if self.z_pow == 1 {
            parts.push("z".to_string());
        } else if self.z_pow > 1 {
            parts.push(format!("z^{}", self.z_pow));
        }
        // Group consecutive equal letters into powers.
        let mut i = 0;
        while i < self.letters.len() {
            let l = self.letters[i];
            let mut run = 1;
            while i + run < self.letters.len() && self.letters[i + run] == l {
                run += 1;
            }
            if run == 1 {
                parts.push(l.to_string());
            } else {
                parts.push(format!("{l}^{run}"));
            }
            i += run;
        }
        write!(f, "{}", parts.join(" "))
    }
}

/// A rational combination of words: an element of the word algebra.
pub type WordVector = SparseVector<Word>;

/// Bilinear multiplication of word vectors.
pub fn multiply(a: &WordVector, b: &WordVector) -> WordVector {
    let mut out = WordVector::new();
    for (wa, ca) in a.iter() {
        for (wb, cb) in b.iter() {
            out.add(wa.concat(wb), ca * cb);
        }
    }
    out
}

pub fn word_vec(word: Word) -> WordVector {
    WordVector::unit(word)
}

/// Generators of the symmetric-group action available at the word level.
///
/// τ₁, τ₂ multiply by `s1`, `s2` on the left; τ₄, τ₅ by `s2`, `s1` on the
/// right; μ mirrors. τ₃ is listed so requests for it fail loudly instead of
/// silently picking a wrong action.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum S6Gen {
    Tau1,
    Tau2,
    Tau3,
    Tau4,
    Tau5,
    Mu,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WordError {
    #[error("tau3 has no word-level action; use the diagram realization")]
    Tau3Unsupported,
    #[error("unknown token `{0}` in word expression")]
    UnknownToken(String),
    #[error("malformed power in `{0}`")]
    BadPower(String),
}

/// Applies a symmetric-group generator to a word vector.
pub fn s6_act(g: S6Gen, v: &WordVector) -> Result<WordVector, WordError> {
    let mut out = WordVector::new();
    match g {
        S6Gen::Tau3 => return Err(WordError::Tau3Unsupported),
        S6Gen::Mu => {
            for (w, c) in v.iter() {
                out.add(w.reversed(), c.clone());
            }
        }
        S6Gen::Tau1 | S6Gen::Tau2 => {
            let s = if g == S6Gen::Tau1 { Letter::S1 } else { Letter::S2 };
            for (w, c) in v.iter() {
                let mut letters = vec![s];
                letters.extend_from_slice(&w.letters);
                out.add(Word { z_pow: w.z_pow, letters }, c.clone());
            }
        }
        S6Gen::Tau4 | S6Gen::Tau5 => {
            let s = if g == S6Gen::Tau4 { Letter::S2 } else { Letter::S1 };
            for (w, c) in v.iter() {
                let mut letters = w.letters.clone();
                letters.push(s);
                out.add(Word { z_pow: w.z_pow, letters }, c.clone());
            }
        }
    }
    Ok(out)
}

/// Parses a word in the expression grammar: whitespace-separated tokens from
/// `c1 c2 c3 s1 s2 d1 d2 y z l<n>`, each with an optional `^<k>` power;
/// `1` denotes the empty word.
pub fn parse_word(s: &str) -> Result<Word, WordError> {
    let mut z_pow: u32 = 0;
    let mut letters = Vec::new();
    for token in s.split_whitespace() {
        if token == "1" {
            continue;
        }
        let (base, pow) = match token.split_once('^') {
            Some((b, p)) => {
                let pow: u32 = p
                    .parse()
                    .map_err(|_| WordError::BadPower(token.to_string()))?;
                (b, pow)
            }
            None => (token, 1),
        };
        if base == "z" {
            z_pow += pow;
            continue;
        }
        let letter = match base {
            "c1" => Letter::C1,
            "c2" => Letter::C2,
            "c3" => Letter::C3,
            "s1" => Letter::S1,
            "s2" => Letter::S2,
            "d1" => Letter::D1,
            "d2" => Letter::D2,
            "y" => Letter::Y,
            _ => {
                if let Some(n) = base.strip_prefix('l') {
                    let n: u32 = n
                        .parse()
                        .map_err(|_| WordError::UnknownToken(token.to_string()))?;
                    Letter::L(n)
                } else {
                    return Err(WordError::UnknownToken(token.to_string()));
                }
            }
        };
        for _ in 0..pow {
            letters.push(letter);
        }
    }
    Ok(Word::new(z_pow, letters))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        parse_word(s).unwrap()
    }

    #[test]
    fn empty_word_is_identity() {
        let e = word_vec(Word::one());
        let v = word_vec(w("d2 c1 c2"));
        assert_eq!(multiply(&e, &v), v);
        assert_eq!(multiply(&v, &e), v);
    }

    #[test]
    fn z_is_normalized_to_a_prefix_power() {
        assert_eq!(w("z c1"), w("c1 z"));
        assert_eq!(w("z^2 c1 z"), Word::new(3, [Letter::C1]));
        let zw = multiply(&word_vec(w("z")), &word_vec(w("d2")));
        let wz = multiply(&word_vec(w("d2")), &word_vec(w("z")));
        assert_eq!(zw, wz);
    }

    #[test]
    fn multiplication_is_associative() {
        let a = word_vec(w("c1 c2"));
        let b = word_vec(w("c1"));
        let c = word_vec(w("z d2"));
        let left = multiply(&multiply(&a, &b), &c);
        let right = multiply(&a, &multiply(&b, &c));
        assert_eq!(left, right);
        assert_eq!(
            multiply(&word_vec(w("c1 c2")), &word_vec(w("c1"))),
            multiply(&word_vec(w("c1")), &word_vec(w("c2 c1")))
        );
    }

    #[test]
    fn l1_expands_on_construction() {
        assert_eq!(w("l1"), w("c1 c2"));
        assert_eq!(w("l2"), Word::new(0, [Letter::L(2)]));
        assert_eq!(Word::new(0, [Letter::L(1), Letter::D2]), w("c1 c2 d2"));
    }

    #[test]
    fn mu_reverses_words() {
        let p = word_vec(w("d2 c1^2 d2"));
        assert_eq!(s6_act(S6Gen::Mu, &p).unwrap(), p);
        assert!(w("d2 c1^2 d2").is_palindrome());
        let v = word_vec(w("c1 y c1^3"));
        let expected = word_vec(w("c1^3 y c1"));
        assert_eq!(s6_act(S6Gen::Mu, &v).unwrap(), expected);
    }

    #[test]
    fn taus_act_by_one_sided_multiplication() {
        let v = word_vec(w("c2"));
        assert_eq!(s6_act(S6Gen::Tau1, &v).unwrap(), word_vec(w("s1 c2")));
        assert_eq!(s6_act(S6Gen::Tau2, &v).unwrap(), word_vec(w("s2 c2")));
        assert_eq!(s6_act(S6Gen::Tau4, &v).unwrap(), word_vec(w("c2 s2")));
        assert_eq!(s6_act(S6Gen::Tau5, &v).unwrap(), word_vec(w("c2 s1")));
        assert_eq!(s6_act(S6Gen::Tau3, &v), Err(WordError::Tau3Unsupported));
    }

    #[test]
    fn display_round_trips_through_parse() {
        for s in ["1", "z^2 d2 c1^2 c2", "c2^5", "z d2 c1 c2", "l3 y s1"] {
            let word = w(s);
            assert_eq!(w(&word.to_string()), word);
            assert_eq!(word.to_string(), s);
        }
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(parse_word("c4").is_err());
        assert!(parse_word("c1^x").is_err());
        assert!(parse_word("lx").is_err());
        assert!(parse_word("q").is_err());
    }
}
