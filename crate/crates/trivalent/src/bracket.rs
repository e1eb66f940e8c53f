//! Bracket symbols `[z^k w]_i^j` and their reduction calculus: triviality
//! classes a–f, the rewrite rules (A)–(F), the symmetrization identities
//! symrel1–3, and deterministic reduction to a named basis.
//!
//! A bracket with a monomial body is the working object of the bundled
//! derivation scripts; linear combinations of brackets are handled as sparse
//! vectors keyed by [`BracketKey`]. The mirror rule (symrel1) makes
//! `[z^k w]_i^j` and `-[z^k w̃]_j^i` the same element, so every lookup here
//! checks both forms.

use crate::rat::Rat;
use crate::sparse::SparseVector;
use crate::word::{parse_word, Letter, Word, WordError};
use std::fmt;

/// The symbol `[z^k w]_i^j` (body `z^k w` monomial, `c1`-powers `i`, `j`).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct BracketKey {
    pub word: Word,
    pub i: u32,
    pub j: u32,
}

impl BracketKey {
    /// Builds a key in normal form: boundary `c1` letters are absorbed into
    /// the indices (`[c1 w]_i^j = [w]_(i+1)^j`, and symmetrically on the
    /// right), so `[c1 d2]_0^3` and `[d2]_1^3` are the same key.
    pub fn new(word: Word, i: u32, j: u32) -> Self {
        let mut key = BracketKey { word, i, j };
        while key.word.letters.first() == Some(&Letter::C1) {
            key.word.letters.remove(0);
            key.i += 1;
        }
        while key.word.letters.last() == Some(&Letter::C1) {
            key.word.letters.pop();
            key.j += 1;
        }
        key
    }

    /// The mirror form: `[z^k w]_i^j = -[z^k w̃]_j^i` (symrel1).
    pub fn reversed(&self) -> BracketKey {
        BracketKey { word: self.word.reversed(), i: self.j, j: self.i }
    }

    fn with(&self, dz: u32, letters: Vec<Letter>, di: u32, dj: u32) -> BracketKey {
        BracketKey::new(
            Word { z_pow: self.word.z_pow + dz, letters },
            self.i + di,
            self.j + dj,
        )
    }
}

impl fmt::Display for BracketKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]_{}^{}", self.word, self.i, self.j)
    }
}

/// A rational combination of bracket symbols.
pub type BracketExpr = SparseVector<BracketKey>;

/// Renders an expression with explicit signs, e.g. `2 [z d2]_0^3 - [d2]_0^4`.
pub fn format_bracket_expr(expr: &BracketExpr) -> String {
    if expr.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (n, (key, coeff)) in expr.iter().enumerate() {
        let mag = coeff.abs();
        if n == 0 {
            if coeff.is_negative() {
                out.push('-');
            }
        } else if coeff.is_negative() {
            out.push_str(" - ");
        } else {
            out.push_str(" + ");
        }
        if !mag.is_one() {
            out.push_str(&format!("{mag} "));
        }
        out.push_str(&key.to_string());
    }
    out
}

// ---------------------------------------------------------------------------
// Triviality classes
// ---------------------------------------------------------------------------

/// The six conditions under which a bracket vanishes outright.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum TrivClass {
    A,
    B,
    C,
    D,
    E,
    F,
}

impl fmt::Display for TrivClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            TrivClass::A => 'a',
            TrivClass::B => 'b',
            TrivClass::C => 'c',
            TrivClass::D => 'd',
            TrivClass::E => 'e',
            TrivClass::F => 'f',
        };
        write!(f, "{c}")
    }
}

use Letter::{C1, C2, D2};

fn contains_seq(w: &[Letter], seq: &[Letter]) -> bool {
    w.windows(seq.len()).any(|win| win == seq)
}

/// Leftmost occurrence of `seq` in `w`.
fn find_seq(w: &[Letter], seq: &[Letter]) -> Option<usize> {
    if seq.len() > w.len() {
        return None;
    }
    (0..=w.len() - seq.len()).find(|&p| &w[p..p + seq.len()] == seq)
}

fn class_matches(class: TrivClass, k: u32, w: &[Letter], i: u32, j: u32) -> bool {
    match class {
        TrivClass::A => {
            contains_seq(w, &[D2, C2]) || contains_seq(w, &[C2, D2]) || contains_seq(w, &[D2, C1, D2])
        }
        TrivClass::B => w == [C2],
        TrivClass::C => {
            k >= 2
                && (w == [D2]
                    || (w.len() >= 2
                        && w[0] == D2
                        && w[1] == C1
                        && w[2..].iter().all(|&l| l == C2)))
        }
        TrivClass::D => w == [D2, C1, C2, C1, D2],
        TrivClass::E => k >= 1 && w == [D2, C1, C1, D2],
        TrivClass::F => i == j && w.iter().eq(w.iter().rev()),
    }
}

/// Returns the first matching triviality class, checking the word and its
/// mirror (with `i`, `j` swapped) for each class in order a–f.
///
/// Classes a–e are only defined on the `c1/c2/d2` alphabet; class f (mirror
/// palindrome with `i = j`) holds for any body.
pub fn triviality_class(key: &BracketKey) -> Option<TrivClass> {
    let k = key.word.z_pow;
    let w = &key.word.letters;
    let rev: Vec<Letter> = w.iter().rev().copied().collect();
    let reduction_alphabet = key.word.is_reduction_alphabet();
    for class in [
        TrivClass::A,
        TrivClass::B,
        TrivClass::C,
        TrivClass::D,
        TrivClass::E,
        TrivClass::F,
    ] {
        if class != TrivClass::F && !reduction_alphabet {
            continue;
        }
        if class_matches(class, k, w, key.i, key.j)
            || class_matches(class, k, &rev, key.j, key.i)
        {
            return Some(class);
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Rewrite rules (A)–(F)
// ---------------------------------------------------------------------------

/// The eight end-reduction rules of the bracket calculus.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Rule {
    A,
    B,
    C,
    /// (C′), the inverse reading of (C): trades two right `c1`-powers.
    Cp,
    D,
    /// (D′), the inverse reading of (D).
    Dp,
    E,
    F,
}

impl Rule {
    pub fn parse(s: &str) -> Option<Rule> {
        match s {
            "A" => Some(Rule::A),
            "B" => Some(Rule::B),
            "C" => Some(Rule::C),
            "C'" => Some(Rule::Cp),
            "D" => Some(Rule::D),
            "D'" => Some(Rule::Dp),
            "E" => Some(Rule::E),
            "F" => Some(Rule::F),
            _ => None,
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Rule::A => "A",
            Rule::B => "B",
            Rule::C => "C",
            Rule::Cp => "C'",
            Rule::D => "D",
            Rule::Dp => "D'",
            Rule::E => "E",
            Rule::F => "F",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RuleError {
    #[error("rule ({rule}) does not match {key}")]
    PatternMismatch { rule: Rule, key: String },
}

fn mismatch(rule: Rule, key: &BracketKey) -> RuleError {
    RuleError::PatternMismatch { rule, key: key.to_string() }
}

fn strip_suffix(w: &[Letter], suffix: &[Letter]) -> Option<Vec<Letter>> {
    w.strip_suffix(suffix).map(|u| u.to_vec())
}

fn join(u: &[Letter], mid: &[Letter], v: &[Letter]) -> Vec<Letter> {
    let mut out = Vec::with_capacity(u.len() + mid.len() + v.len());
    out.extend_from_slice(u);
    out.extend_from_slice(mid);
    out.extend_from_slice(v);
    out
}

/// Applies one rule to a bracket, returning the replacement terms in the
/// rule's stated order. The pattern is matched at the word's right end for
/// (A)–(C′) and at the leftmost occurrence for (D), (D′), (E).
pub fn apply_rule(rule: Rule, key: &BracketKey) -> Result<Vec<(Rat, BracketKey)>, RuleError> {
    let w = &key.word.letters;
    let half = || Rat::new(1, 2);
    let err = || mismatch(rule, key);
    match rule {
        // [u c1^2 c2]_i^j = 1/2 [z u]_i^(j+2) - 1/2 [u]_i^(j+3)
        Rule::A => {
            let u = strip_suffix(w, &[C1, C1, C2]).ok_or_else(err)?;
            Ok(vec![
                (half(), key.with(1, u.clone(), 0, 2)),
                (-half(), key.with(0, u, 0, 3)),
            ])
        }
        // [u d2 c1 c2]_i^j = [z u d2]_i^(j+1) - 1/2 [u d2]_i^(j+2)
        Rule::B => {
            let u = strip_suffix(w, &[D2, C1, C2]).ok_or_else(err)?;
            let ud2 = join(&u, &[D2], &[]);
            Ok(vec![
                (Rat::one(), key.with(1, ud2.clone(), 0, 1)),
                (-half(), key.with(0, ud2, 0, 2)),
            ])
        }
        // [u c2 c1 c2]_i^j = 1/2 [z u c2]_i^(j+1) - 1/2 [u c2]_i^(j+2)
        //                    + 1/2 [u c1 d2]_i^(j+1)
        Rule::C => {
            let u = strip_suffix(w, &[C2, C1, C2]).ok_or_else(err)?;
            let uc2 = join(&u, &[C2], &[]);
            let uc1d2 = join(&u, &[C1, D2], &[]);
            Ok(vec![
                (half(), key.with(1, uc2.clone(), 0, 1)),
                (-half(), key.with(0, uc2, 0, 2)),
                (half(), key.with(0, uc1d2, 0, 1)),
            ])
        }
        // [u c2]_i^(j+2) = [z u c2]_i^(j+1) - 2 [u c2 c1 c2]_i^j
        //                  + [u c1 d2]_i^(j+1)
        Rule::Cp => {
            if key.j < 2 {
                return Err(err());
            }
            let u = strip_suffix(w, &[C2]).ok_or_else(err)?;
            let uc2 = w.to_vec();
            let uc2c1c2 = join(&u, &[C2, C1, C2], &[]);
            let uc1d2 = join(&u, &[C1, D2], &[]);
            let base = BracketKey { word: Word { z_pow: key.word.z_pow, letters: Vec::new() }, i: key.i, j: key.j - 2 };
            Ok(vec![
                (Rat::one(), base.with(1, uc2, 0, 1)),
                (Rat::from_int(-2), base.with(0, uc2c1c2, 0, 0)),
                (Rat::one(), base.with(0, uc1d2, 0, 1)),
            ])
        }
        // [u c2^3 v]_i^j = [z u c2^2 v]_i^j - 2 [u c2 c1 c2 v]_i^j
        //                  + [u d2 c1 c2 v]_i^j + [u c2 c1 d2 v]_i^j
        Rule::D => {
            let p = find_seq(w, &[C2, C2, C2]).ok_or_else(err)?;
            let (u, v) = (&w[..p], &w[p + 3..]);
            Ok(vec![
                (Rat::one(), key.with(1, join(u, &[C2, C2], v), 0, 0)),
                (Rat::from_int(-2), key.with(0, join(u, &[C2, C1, C2], v), 0, 0)),
                (Rat::one(), key.with(0, join(u, &[D2, C1, C2], v), 0, 0)),
                (Rat::one(), key.with(0, join(u, &[C2, C1, D2], v), 0, 0)),
            ])
        }
        // [u c2 c1 c2 v]_i^j = 1/2 [z u c2^2 v]_i^j - 1/2 [u c2^3 v]_i^j
        //                      + 1/2 [u d2 c1 c2 v]_i^j + 1/2 [u c2 c1 d2 v]_i^j
        Rule::Dp => {
            let p = find_seq(w, &[C2, C1, C2]).ok_or_else(err)?;
            let (u, v) = (&w[..p], &w[p + 3..]);
            Ok(vec![
                (half(), key.with(1, join(u, &[C2, C2], v), 0, 0)),
                (-half(), key.with(0, join(u, &[C2, C2, C2], v), 0, 0)),
                (half(), key.with(0, join(u, &[D2, C1, C2], v), 0, 0)),
                (half(), key.with(0, join(u, &[C2, C1, D2], v), 0, 0)),
            ])
        }
        // [u c2^2 c1 d2 v]_i^j = 2 [z u c2 c1 d2 v]_i^j - 2 [u c2 c1^2 d2 v]_i^j
        //                        + [u d2 c1^2 d2 v]_i^j
        Rule::E => {
            let p = find_seq(w, &[C2, C2, C1, D2]).ok_or_else(err)?;
            let (u, v) = (&w[..p], &w[p + 4..]);
            Ok(vec![
                (Rat::from_int(2), key.with(1, join(u, &[C2, C1, D2], v), 0, 0)),
                (Rat::from_int(-2), key.with(0, join(u, &[C2, C1, C1, D2], v), 0, 0)),
                (Rat::one(), key.with(0, join(u, &[D2, C1, C1, D2], v), 0, 0)),
            ])
        }
        // [z c2^2]_i^j = 1/2 [d2]_(i+1)^(j+1); matches z-power 1 exactly.
        Rule::F => {
            if key.word.z_pow != 1 || w != &[C2, C2] {
                return Err(err());
            }
            Ok(vec![(
                half(),
                BracketKey { word: Word::from_letters([D2]), i: key.i + 1, j: key.j + 1 },
            )])
        }
    }
}

// ---------------------------------------------------------------------------
// Symmetrization identities
// ---------------------------------------------------------------------------

/// symrel2: `c1 [w]_i^j c1 = [w]_(i+1)^(j+1)`.
pub fn symrel2_shift(expr: &BracketExpr) -> BracketExpr {
    expr.map_keys(|k| BracketKey { word: k.word.clone(), i: k.i + 1, j: k.j + 1 })
}

/// symrel3: `c1 [w]_i^j + [w]_i^j c1 = [w]_(i+1)^j + [w]_i^(j+1)`, extended
/// linearly: returns the right-hand side for `c1·expr + expr·c1`.
pub fn symrel3_expand(expr: &BracketExpr) -> BracketExpr {
    let mut out = BracketExpr::new();
    for (k, c) in expr.iter() {
        out.add(BracketKey { word: k.word.clone(), i: k.i + 1, j: k.j }, c.clone());
        out.add(BracketKey { word: k.word.clone(), i: k.i, j: k.j + 1 }, c.clone());
    }
    out
}

/// Drops every term whose key falls into a triviality class; returns the
/// surviving expression and a note per dropped term.
pub fn drop_trivial(expr: &BracketExpr) -> (BracketExpr, Vec<String>) {
    let mut out = BracketExpr::new();
    let mut notes = Vec::new();
    for (k, c) in expr.iter() {
        match triviality_class(k) {
            Some(cls) => notes.push(format!("{k} = 0 (class {cls})")),
            None => out.add(k.clone(), c.clone()),
        }
    }
    (out, notes)
}

// ---------------------------------------------------------------------------
// Expression parsing
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseExprError {
    #[error("empty bracket expression")]
    Empty,
    #[error("expected '[' at `{0}`")]
    ExpectedBracket(String),
    #[error("unterminated bracket body in `{0}`")]
    Unterminated(String),
    #[error("expected `_<i>^<j>` after bracket in `{0}`")]
    BadIndices(String),
    #[error("bad coefficient `{0}`")]
    BadCoefficient(String),
    #[error(transparent)]
    Word(#[from] WordError),
}

/// Parses a linear combination of brackets, e.g.
/// `3*[d2]_1^2 - 6*[z c2^2]_0^1` or `1/2 [d2]_1^3`. The `*` after a
/// coefficient is optional.
pub fn parse_bracket_expr(s: &str) -> Result<BracketExpr, ParseExprError> {
    Ok(parse_bracket_terms(s)?.into_iter().map(|(c, k)| (k, c)).collect())
}

/// Like [`parse_bracket_expr`] but keeps the written term order, for callers
/// that pair terms with citations positionally.
pub fn parse_bracket_terms(s: &str) -> Result<Vec<(Rat, BracketKey)>, ParseExprError> {
    let mut terms = Vec::new();
    let mut rest = s.trim();
    if rest.is_empty() {
        return Err(ParseExprError::Empty);
    }
    let mut first = true;
    while !rest.is_empty() {
        // Sign / separator.
        let mut sign = Rat::one();
        rest = rest.trim_start();
        if let Some(r) = rest.strip_prefix('+') {
            rest = r.trim_start();
        } else if let Some(r) = rest.strip_prefix('-') {
            sign = -Rat::one();
            rest = r.trim_start();
        } else if !first {
            return Err(ParseExprError::ExpectedBracket(rest.to_string()));
        }
        first = false;
        // Optional coefficient up to '[' or '*'.
        let coeff = if rest.starts_with('[') {
            sign
        } else {
            let end = rest
                .find(['[', '*'])
                .ok_or_else(|| ParseExprError::ExpectedBracket(rest.to_string()))?;
            let lit = rest[..end].trim();
            let c: Rat = lit
                .parse()
                .map_err(|_| ParseExprError::BadCoefficient(lit.to_string()))?;
            rest = rest[end..].trim_start_matches('*').trim_start();
            sign * c
        };
        // Bracket body.
        if !rest.starts_with('[') {
            return Err(ParseExprError::ExpectedBracket(rest.to_string()));
        }
        let close = rest
            .find(']')
            .ok_or_else(|| ParseExprError::Unterminated(rest.to_string()))?;
        let body = &rest[1..close];
        rest = &rest[close + 1..];
        // Indices `_<i>^<j>`.
        let r = rest
            .strip_prefix('_')
            .ok_or_else(|| ParseExprError::BadIndices(rest.to_string()))?;
        let caret = r
            .find('^')
            .ok_or_else(|| ParseExprError::BadIndices(rest.to_string()))?;
        let i: u32 = r[..caret]
            .trim()
            .parse()
            .map_err(|_| ParseExprError::BadIndices(rest.to_string()))?;
        let after = &r[caret + 1..];
        let digits: String = after.chars().take_while(|c| c.is_ascii_digit()).collect();
        if digits.is_empty() {
            return Err(ParseExprError::BadIndices(rest.to_string()));
        }
        let j: u32 = digits.parse().map_err(|_| ParseExprError::BadIndices(rest.to_string()))?;
        rest = after[digits.len()..].trim_start();
        terms.push((coeff, BracketKey::new(parse_word(body)?, i, j)));
    }
    Ok(terms)
}

// ---------------------------------------------------------------------------
// Named bases and reduction
// ---------------------------------------------------------------------------

/// One basis element `e<n>`, with an optional second form it equals up to a
/// factor (`vec(alt_key) = alt_mult · e`).
#[derive(Clone, Debug)]
pub struct BasisElement {
    pub id: String,
    pub key: BracketKey,
    pub alt: Option<(BracketKey, Rat)>,
}

/// An ordered bracket basis (`e1 … ek`) that reductions target.
#[derive(Clone, Debug, Default)]
pub struct Basis {
    pub elements: Vec<BasisElement>,
}

impl Basis {
    /// Resolves a key against the basis, honoring the mirror rule: returns
    /// `(index, m)` with `vec(key) = m · e_index`.
    pub fn resolve(&self, key: &BracketKey) -> Option<(usize, Rat)> {
        let rev = key.reversed();
        for (n, e) in self.elements.iter().enumerate() {
            if *key == e.key {
                return Some((n, Rat::one()));
            }
            if rev == e.key && *key != e.key {
                return Some((n, -Rat::one()));
            }
            if let Some((alt, mult)) = &e.alt {
                if key == alt {
                    return Some((n, mult.clone()));
                }
                if rev == *alt && key != alt {
                    return Some((n, -mult.clone()));
                }
            }
        }
        None
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReduceError {
    #[error("irreducible bracket {key}; partial form: {attempt}")]
    Irreducible { key: String, attempt: String },
    #[error("reduction step budget exhausted at {0}")]
    BudgetExhausted(String),
}

/// Deterministic reduction discipline for free-form expressions: triviality
/// classes first, then basis lookup, then the named bracket identities, then
/// rules (A)–(E) and the primed variants at their leftmost site, with (F)
/// last. Scripts do not use this — they replay their recorded rule per line.
pub struct Reducer<'a> {
    basis: Option<&'a Basis>,
    pub trace: Vec<String>,
    steps: usize,
    budget: usize,
}

/// Bracket-level identities beyond (A)–(F) used by free-form reduction:
/// rewrites of a single bracket into an expression.
fn named_bracket_rule(key: &BracketKey) -> Option<(&'static str, Vec<(Rat, BracketKey)>)> {
    let w = &key.word.letters;
    let k = key.word.z_pow;
    // yzdrel: [y]_i^j = 2 [z d2]_i^j for i, j >= 1.
    if w == &[Letter::Y] && k == 0 && key.i >= 1 && key.j >= 1 {
        return Some((
            "yzdrel",
            vec![(
                Rat::from_int(2),
                BracketKey::new(Word { z_pow: 1, letters: vec![D2] }, key.i, key.j),
            )],
        ));
    }
    // zzdw0rel: [z^k d2 w]_i^j = 0 for k >= 2 and w over {c1, c2}.
    if k >= 2
        && w.first() == Some(&D2)
        && w[1..].iter().all(|&l| matches!(l, C1 | C2))
        && !w[1..].is_empty()
    {
        return Some(("zzdw0rel", vec![]));
    }
    // cycccrel: [z d2]_1^3 = 0 (and its mirror), the derived assembly result.
    if k == 1 && w == &[D2] && ((key.i, key.j) == (1, 3) || (key.i, key.j) == (3, 1)) {
        return Some(("cycccrel", vec![]));
    }
    // r2rel: [d2 c1^2 d2]_0^1 = 3/2 [z d2]_0^3.
    if k == 0 && w == &[D2, C1, C1, D2] {
        let target = |i, j| BracketKey::new(Word { z_pow: 1, letters: vec![D2] }, i, j);
        if (key.i, key.j) == (0, 1) || (key.i, key.j) == (1, 0) {
            return Some(("r2rel", vec![(Rat::new(3, 2), target(0, 3))]));
        }
        // r3rel: [d2 c1^2 d2]_0^2 = 3/2 [z d2]_0^4.
        if (key.i, key.j) == (0, 2) || (key.i, key.j) == (2, 0) {
            return Some(("r3rel", vec![(Rat::new(3, 2), target(0, 4))]));
        }
    }
    None
}

impl<'a> Reducer<'a> {
    pub fn new(basis: Option<&'a Basis>) -> Self {
        Reducer { basis, trace: Vec::new(), steps: 0, budget: 10_000 }
    }

    /// Reduces an expression to a coefficient vector over the basis (when one
    /// is set) plus an irreducible-free check; without a basis the expression
    /// must reduce to zero or the residual is reported irreducible.
    pub fn reduce(
        &mut self,
        expr: &BracketExpr,
    ) -> Result<SparseVector<usize>, ReduceError> {
        let mut out = SparseVector::new();
        for (key, coeff) in expr.iter() {
            let mut in_progress = Vec::new();
            let v = self.reduce_key(key, &mut in_progress)?;
            out.add_scaled(coeff, &v);
        }
        Ok(out)
    }

    fn reduce_key(
        &mut self,
        key: &BracketKey,
        in_progress: &mut Vec<BracketKey>,
    ) -> Result<SparseVector<usize>, ReduceError> {
        self.steps += 1;
        if self.steps > self.budget {
            return Err(ReduceError::BudgetExhausted(key.to_string()));
        }
        if let Some(class) = triviality_class(key) {
            self.trace.push(format!("{key} = 0 (class {class})"));
            return Ok(SparseVector::new());
        }
        if let Some(basis) = self.basis {
            if let Some((n, m)) = basis.resolve(key) {
                let e = &basis.elements[n];
                if m.is_one() {
                    self.trace.push(format!("{key} = {}", e.id));
                } else {
                    self.trace.push(format!("{key} = {m} {}", e.id));
                }
                let mut v = SparseVector::new();
                v.add(n, m);
                return Ok(v);
            }
        }
        if in_progress.contains(key) {
            return Err(ReduceError::Irreducible {
                key: key.to_string(),
                attempt: "cyclic reduction".to_string(),
            });
        }
        in_progress.push(key.clone());
        let result = self.reduce_via_rules(key, in_progress);
        in_progress.pop();
        result
    }

    fn reduce_via_rules(
        &mut self,
        key: &BracketKey,
        in_progress: &mut Vec<BracketKey>,
    ) -> Result<SparseVector<usize>, ReduceError> {
        if let Some((name, terms)) = named_bracket_rule(key) {
            let expr: BracketExpr =
                terms.iter().map(|(c, k)| (k.clone(), c.clone())).collect();
            self.trace
                .push(format!("{key} = ({name}) {}", format_bracket_expr(&expr)));
            let mut out = SparseVector::new();
            for (c, k) in &terms {
                let v = self.reduce_key(k, in_progress)?;
                out.add_scaled(c, &v);
            }
            return Ok(out);
        }
        for rule in [Rule::A, Rule::B, Rule::C, Rule::D, Rule::E, Rule::Cp, Rule::Dp, Rule::F] {
            let Ok(terms) = apply_rule(rule, key) else { continue };
            let expr: BracketExpr =
                terms.iter().map(|(c, k)| (k.clone(), c.clone())).collect();
            self.trace
                .push(format!("{key} = ({rule}) {}", format_bracket_expr(&expr)));
            let mut out = SparseVector::new();
            let mut failed = false;
            let trace_mark = self.trace.len();
            for (c, k) in &terms {
                match self.reduce_key(k, in_progress) {
                    Ok(v) => out.add_scaled(c, &v),
                    Err(ReduceError::Irreducible { .. }) => {
                        failed = true;
                        break;
                    }
                    Err(e) => return Err(e),
                }
            }
            if failed {
                // This rule led into a dead end; roll the trace back and try
                // the next one.
                self.trace.truncate(trace_mark.saturating_sub(1));
                continue;
            }
            return Ok(out);
        }
        Err(ReduceError::Irreducible {
            key: key.to_string(),
            attempt: key.to_string(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key(s: &str) -> BracketKey {
        let expr = parse_bracket_expr(s).unwrap();
        assert_eq!(expr.len(), 1);
        let k = expr.iter().next().unwrap().0.clone();
        k
    }

    #[test]
    fn parse_and_display_round_trip() {
        for s in [
            "[d2 c1^2 c2]_0^0",
            "[z c2^2]_0^1",
            "[y]_1^3",
            "[z^2 d2]_0^3",
        ] {
            assert_eq!(key(s).to_string(), s);
        }
        let e = parse_bracket_expr("3*[d2]_1^2 - 6*[z c2^2]_0^1").unwrap();
        assert_eq!(e.len(), 2);
        assert_eq!(e.coeff(&key("[d2]_1^2")), Rat::from_int(3));
        assert_eq!(e.coeff(&key("[z c2^2]_0^1")), Rat::from_int(-6));
        let f = parse_bracket_expr("1/2 [d2]_1^3").unwrap();
        assert_eq!(f.coeff(&key("[d2]_1^3")), Rat::new(1, 2));
        // Boundary c1 letters normalize into the indices.
        assert_eq!(key("[c1 d2]_0^3"), key("[d2]_1^3"));
        assert_eq!(key("[c1 d2 c1^2]_1^0"), key("[d2]_2^2"));
    }

    #[test]
    fn triviality_classes_match_their_definitions() {
        assert_eq!(triviality_class(&key("[z^2 d2]_0^3")), Some(TrivClass::C));
        assert_eq!(triviality_class(&key("[d2 c1^2 d2]_0^0")), Some(TrivClass::F));
        assert_eq!(triviality_class(&key("[z d2 c1^2 d2]_1^0")), Some(TrivClass::E));
        assert_eq!(triviality_class(&key("[c2]_0^5")), Some(TrivClass::B));
        assert_eq!(triviality_class(&key("[z c2]_2^1")), Some(TrivClass::B));
        assert_eq!(triviality_class(&key("[c2 d2]_0^1")), Some(TrivClass::A));
        assert_eq!(triviality_class(&key("[d2 c1 c2 c1 d2]_1^2")), Some(TrivClass::D));
        assert_eq!(triviality_class(&key("[z^2 d2 c1 c2^3]_0^1")), Some(TrivClass::C));
        // Mirror check: reversed class-c word.
        assert_eq!(triviality_class(&key("[z^2 c2^2 c1 d2]_0^0")), Some(TrivClass::C));
        // Palindrome needs i = j.
        assert_eq!(triviality_class(&key("[z d2]_2^2")), Some(TrivClass::F));
        assert_eq!(triviality_class(&key("[z d2]_1^3")), None);
        assert_eq!(triviality_class(&key("[z c2^2]_0^1")), None);
        assert_eq!(triviality_class(&key("[d2 c1 c2]_0^1")), None);
        // Class f applies beyond the reduction alphabet.
        assert_eq!(triviality_class(&key("[y]_2^2")), Some(TrivClass::F));
        assert_eq!(triviality_class(&key("[y]_1^3")), None);
    }

    fn apply(rule: Rule, k: &str) -> Vec<(Rat, String)> {
        apply_rule(rule, &key(k))
            .unwrap()
            .into_iter()
            .map(|(c, k)| (c, k.to_string()))
            .collect()
    }

    #[test]
    fn rule_a_on_r1_line_1() {
        assert_eq!(
            apply(Rule::A, "[d2 c1^2 c2]_0^0"),
            vec![
                (Rat::new(1, 2), "[z d2]_0^2".to_string()),
                (Rat::new(-1, 2), "[d2]_0^3".to_string()),
            ]
        );
    }

    #[test]
    fn rule_b_keeps_the_d2() {
        assert_eq!(
            apply(Rule::B, "[z d2 c1 c2]_0^0"),
            vec![
                (Rat::one(), "[z^2 d2]_0^1".to_string()),
                (Rat::new(-1, 2), "[z d2]_0^2".to_string()),
            ]
        );
    }

    #[test]
    fn rule_c_and_c_prime() {
        assert_eq!(
            apply(Rule::C, "[c2 c1 c2]_0^1"),
            vec![
                (Rat::new(1, 2), "[z c2]_0^2".to_string()),
                (Rat::new(-1, 2), "[c2]_0^3".to_string()),
                // The leading c1 of `c1 d2` is absorbed into the left index.
                (Rat::new(1, 2), "[d2]_1^2".to_string()),
            ]
        );
        assert_eq!(
            apply(Rule::Cp, "[c2^2]_0^2"),
            vec![
                (Rat::one(), "[z c2^2]_0^1".to_string()),
                (Rat::from_int(-2), "[c2^2 c1 c2]_0^0".to_string()),
                (Rat::one(), "[c2 c1 d2]_0^1".to_string()),
            ]
        );
        assert!(apply_rule(Rule::Cp, &key("[c2^2]_0^1")).is_err());
    }

    #[test]
    fn rule_d_uses_leftmost_site() {
        assert_eq!(
            apply(Rule::D, "[c2^5]_0^1"),
            vec![
                (Rat::one(), "[z c2^4]_0^1".to_string()),
                (Rat::from_int(-2), "[c2 c1 c2^3]_0^1".to_string()),
                (Rat::one(), "[d2 c1 c2^3]_0^1".to_string()),
                (Rat::one(), "[c2 c1 d2 c2^2]_0^1".to_string()),
            ]
        );
    }

    #[test]
    fn rule_e_and_f() {
        assert_eq!(
            apply(Rule::E, "[c2^2 c1 d2]_0^0"),
            vec![
                (Rat::from_int(2), "[z c2 c1 d2]_0^0".to_string()),
                (Rat::from_int(-2), "[c2 c1^2 d2]_0^0".to_string()),
                (Rat::one(), "[d2 c1^2 d2]_0^0".to_string()),
            ]
        );
        assert_eq!(
            apply(Rule::F, "[z c2^2]_0^2"),
            vec![(Rat::new(1, 2), "[d2]_1^3".to_string())]
        );
        // (F) matches z-power exactly one.
        assert!(apply_rule(Rule::F, &key("[z^2 c2^2]_0^1")).is_err());
        assert!(apply_rule(Rule::F, &key("[c2^2]_0^1")).is_err());
    }

    #[test]
    fn symrel_helpers() {
        let r2 = parse_bracket_expr("2*[d2 c1^2 d2]_0^1 - 3*[z d2]_0^3").unwrap();
        let shifted = symrel2_shift(&r2);
        assert_eq!(
            shifted,
            parse_bracket_expr("2*[d2 c1^2 d2]_1^2 - 3*[z d2]_1^4").unwrap()
        );
        let expanded = symrel3_expand(&r2);
        assert_eq!(
            expanded,
            parse_bracket_expr(
                "2*[d2 c1^2 d2]_1^1 + 2*[d2 c1^2 d2]_0^2 - 3*[z d2]_1^3 - 3*[z d2]_0^4"
            )
            .unwrap()
        );
        let (kept, notes) = drop_trivial(&expanded);
        assert_eq!(
            kept,
            parse_bracket_expr("2*[d2 c1^2 d2]_0^2 - 3*[z d2]_1^3 - 3*[z d2]_0^4").unwrap()
        );
        assert_eq!(notes.len(), 1);
        assert!(notes[0].contains("class f"));
    }

    fn r1_basis() -> Basis {
        Basis {
            elements: vec![
                BasisElement { id: "e1".into(), key: key("[z c2^2]_0^1"), alt: None },
                BasisElement { id: "e2".into(), key: key("[d2]_0^3"), alt: None },
                BasisElement { id: "e3".into(), key: key("[d2]_1^2"), alt: None },
                BasisElement { id: "e4".into(), key: key("[z d2]_0^2"), alt: None },
            ],
        }
    }

    #[test]
    fn basis_resolution_honors_mirror_sign() {
        let basis = r1_basis();
        assert_eq!(basis.resolve(&key("[z c2^2]_0^1")), Some((0, Rat::one())));
        // Mirror of e1: [z c2^2]_1^0 = -e1.
        assert_eq!(basis.resolve(&key("[z c2^2]_1^0")), Some((0, -Rat::one())));
        // Mirror of e2 ([d2]_0^3): [d2]_3^0 = -e2.
        assert_eq!(basis.resolve(&key("[d2]_3^0")), Some((1, -Rat::one())));
        assert_eq!(basis.resolve(&key("[d2]_0^4")), None);
    }

    #[test]
    fn basis_alt_form_resolution() {
        let basis = Basis {
            elements: vec![BasisElement {
                id: "e1".into(),
                key: key("[z c2^2]_1^2"),
                // vec([d2]_2^3) = 2 e1
                alt: Some((key("[d2]_2^3"), Rat::from_int(2))),
            }],
        };
        assert_eq!(basis.resolve(&key("[d2]_2^3")), Some((0, Rat::from_int(2))));
        assert_eq!(basis.resolve(&key("[d2]_3^2")), Some((0, Rat::from_int(-2))));
    }

    #[test]
    fn reduce_r1_line_1_to_basis_vector() {
        let basis = r1_basis();
        let mut reducer = Reducer::new(Some(&basis));
        let expr = parse_bracket_expr("[d2 c1^2 c2]_0^0").unwrap();
        let v = reducer.reduce(&expr).unwrap();
        // (0, -1/2, 0, 1/2) over (e1..e4)
        assert_eq!(v.coeff(&1), Rat::new(-1, 2));
        assert_eq!(v.coeff(&3), Rat::new(1, 2));
        assert_eq!(v.len(), 2);
    }

    #[test]
    fn reduce_class_trivial_bracket_to_zero() {
        let mut reducer = Reducer::new(None);
        let v = reducer.reduce(&parse_bracket_expr("[z^2 d2]_0^3").unwrap()).unwrap();
        assert!(v.is_zero());
        assert_eq!(reducer.trace, vec!["[z^2 d2]_0^3 = 0 (class c)"]);
    }

    #[test]
    fn reduce_y13_to_zero_via_named_rules() {
        let mut reducer = Reducer::new(None);
        let v = reducer.reduce(&parse_bracket_expr("[y]_1^3").unwrap()).unwrap();
        assert!(v.is_zero());
        assert_eq!(
            reducer.trace,
            vec![
                "[y]_1^3 = (yzdrel) 2 [z d2]_1^3",
                "[z d2]_1^3 = (cycccrel) 0",
            ]
        );
    }
}
