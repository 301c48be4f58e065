//! Pauli strings and weighted sums of Pauli strings.
//!
//! Sites are numbered from 1. A string on `L` sites is stored as a pair of
//! bit masks (`x`, `z`) with site `i` at bit `i - 1`, so `X = (1, 0)`,
//! `Y = (1, 1)` and `Z = (0, 1)`. Strings carry a phase in `{1, i, -1, -i}`;
//! sums fold that phase into complex coefficients.

use num_complex::Complex64;
use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::PauliError;

/// Largest chain length representable by the bit-mask encoding.
pub const MAX_SITES: usize = 64;

/// Coefficients below this magnitude are removed during canonicalization.
pub const DROP_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    /// Digit used for the canonical base-4 ordering.
    fn digit(self) -> u128 {
        match self {
            Pauli::I => 0,
            Pauli::X => 1,
            Pauli::Y => 2,
            Pauli::Z => 3,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' | 'i' => Some(Pauli::I),
            'X' | 'x' => Some(Pauli::X),
            'Y' | 'y' => Some(Pauli::Y),
            'Z' | 'z' => Some(Pauli::Z),
            _ => None,
        }
    }

    /// Single-site product `self * other = phase * result`.
    pub fn product(self, other: Pauli) -> (Phase, Pauli) {
        use Pauli::*;
        match (self, other) {
            (I, p) | (p, I) => (Phase::ONE, p),
            (a, b) if a == b => (Phase::ONE, I),
            (X, Y) => (Phase::I, Z),
            (Y, Z) => (Phase::I, X),
            (Z, X) => (Phase::I, Y),
            (Y, X) => (Phase::MINUS_I, Z),
            (Z, Y) => (Phase::MINUS_I, X),
            (X, Z) => (Phase::MINUS_I, Y),
            _ => unreachable!(),
        }
    }
}

/// Spin axis, used for spin-flip operators, observables and sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn pauli(self) -> Pauli {
        match self {
            Axis::X => Pauli::X,
            Axis::Y => Pauli::Y,
            Axis::Z => Pauli::Z,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Axis {
    type Err = PauliError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "x" | "X" => Ok(Axis::X),
            "y" | "Y" => Ok(Axis::Y),
            "z" | "Z" => Ok(Axis::Z),
            other => Err(PauliError::Parse(format!("unknown axis '{other}'"))),
        }
    }
}

/// Element `i^k` of the phase group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_power(k: u32) -> Self {
        Phase((k % 4) as u8)
    }

    pub fn power(self) -> u32 {
        self.0 as u32
    }

    pub fn value(self) -> Complex64 {
        match self.0 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }

    pub fn is_real(self) -> bool {
        self.0 % 2 == 0
    }
}

impl std::ops::Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

/// A phase times a tensor product of single-site Pauli matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    len: usize,
    x: u64,
    z: u64,
    phase: Phase,
}

fn check_len(len: usize) -> Result<(), PauliError> {
    if len == 0 || len > MAX_SITES {
        Err(PauliError::Length(len))
    } else {
        Ok(())
    }
}

fn check_site(len: usize, site: usize) -> Result<(), PauliError> {
    if site == 0 || site > len {
        Err(PauliError::Site { site, len })
    } else {
        Ok(())
    }
}

impl PauliString {
    pub fn identity(len: usize) -> Result<Self, PauliError> {
        check_len(len)?;
        Ok(Self { len, x: 0, z: 0, phase: Phase::ONE })
    }

    /// Builds a string from `(site, letter)` pairs; unlisted sites carry `I`.
    /// Repeated sites are multiplied together in the order given.
    pub fn from_sites(len: usize, sites: &[(usize, Pauli)]) -> Result<Self, PauliError> {
        let mut s = Self::identity(len)?;
        for &(site, p) in sites {
            check_site(len, site)?;
            s = s.multiply(&Self::single(len, site, p)?)?;
        }
        Ok(s)
    }

    pub fn single(len: usize, site: usize, p: Pauli) -> Result<Self, PauliError> {
        check_len(len)?;
        check_site(len, site)?;
        let (bx, bz) = p.bits();
        let bit = 1u64 << (site - 1);
        Ok(Self {
            len,
            x: if bx { bit } else { 0 },
            z: if bz { bit } else { 0 },
            phase: Phase::ONE,
        })
    }

    /// Parses a letter string such as `"XIZY"`, site 1 leftmost.
    pub fn from_letters(letters: &str) -> Result<Self, PauliError> {
        let chars: Vec<char> = letters.trim().chars().collect();
        check_len(chars.len())?;
        let mut x = 0u64;
        let mut z = 0u64;
        for (i, c) in chars.iter().enumerate() {
            let p = Pauli::from_char(*c)
                .ok_or_else(|| PauliError::Parse(format!("invalid Pauli letter '{c}'")))?;
            let (bx, bz) = p.bits();
            if bx {
                x |= 1 << i;
            }
            if bz {
                z |= 1 << i;
            }
        }
        Ok(Self { len: chars.len(), x, z, phase: Phase::ONE })
    }

    pub fn from_masks(len: usize, x: u64, z: u64) -> Result<Self, PauliError> {
        check_len(len)?;
        let valid = if len == 64 { u64::MAX } else { (1u64 << len) - 1 };
        if (x | z) & !valid != 0 {
            return Err(PauliError::Parse("mask has bits beyond the chain length".into()));
        }
        Ok(Self { len, x, z, phase: Phase::ONE })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn with_phase(mut self, phase: Phase) -> Self {
        self.phase = phase;
        self
    }

    pub fn letter(&self, site: usize) -> Pauli {
        let bit = 1u64 << (site - 1);
        Pauli::from_bits(self.x & bit != 0, self.z & bit != 0)
    }

    pub fn letters(&self) -> String {
        (1..=self.len).map(|i| self.letter(i).as_char()).collect()
    }

    /// Number of `Y` letters.
    pub fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    /// Number of non-identity sites.
    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn is_hermitian(&self) -> bool {
        self.phase.is_real()
    }

    /// Sort key: letters read as a base-4 number, site 1 most significant.
    pub fn canonical_key(&self) -> u128 {
        (1..=self.len).fold(0u128, |acc, i| acc * 4 + self.letter(i).digit())
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()) % 2 == 0
    }

    /// Group product `self * other` with accumulated phase.
    pub fn multiply(&self, other: &PauliString) -> Result<PauliString, PauliError> {
        if self.len != other.len {
            return Err(PauliError::LengthMismatch(self.len, other.len));
        }
        let mut phase = self.phase * other.phase;
        let mut overlap = (self.x | self.z) & (other.x | other.z);
        while overlap != 0 {
            let site = overlap.trailing_zeros() as usize + 1;
            let (p, _) = self.letter(site).product(other.letter(site));
            phase = phase * p;
            overlap &= overlap - 1;
        }
        Ok(PauliString {
            len: self.len,
            x: self.x ^ other.x,
            z: self.z ^ other.z,
            phase,
        })
    }

    /// Action on a computational basis state: `P|b> = factor |b'>`.
    ///
    /// Bit `i - 1` of `b` equal to 0 means site `i` is spin up.
    #[inline]
    pub fn apply_to_basis(&self, b: usize) -> (Complex64, usize) {
        let sign_flips = (b as u64 & self.z).count_ones();
        let k = self.phase.power() + self.y_count() + 2 * sign_flips;
        (Phase::from_power(k).value(), b ^ self.x as usize)
    }

    /// Letter substitution applied sitewise; the phase is kept.
    pub fn map_letters(&self, f: impl Fn(Pauli) -> Pauli) -> PauliString {
        let mut x = 0u64;
        let mut z = 0u64;
        for i in 1..=self.len {
            let (bx, bz) = f(self.letter(i)).bits();
            if bx {
                x |= 1 << (i - 1);
            }
            if bz {
                z |= 1 << (i - 1);
            }
        }
        PauliString { len: self.len, x, z, phase: self.phase }
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = match self.phase.power() {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        write!(f, "{p}{}", self.letters())
    }
}

/// `prod_k sigma^D_k` over all sites, phase +1.
pub fn build_spin_flip(axis: Axis, len: usize) -> Result<PauliString, PauliError> {
    check_len(len)?;
    let sites: Vec<(usize, Pauli)> = (1..=len).map(|i| (i, axis.pauli())).collect();
    PauliString::from_sites(len, &sites)
}

/// A complex-weighted sum of phase-free Pauli strings in canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    len: usize,
    terms: Vec<(Complex64, PauliString)>,
}

impl PauliSum {
    pub fn zero(len: usize) -> Result<Self, PauliError> {
        check_len(len)?;
        Ok(Self { len, terms: Vec::new() })
    }

    pub fn identity(len: usize) -> Result<Self, PauliError> {
        Self::from_string(Complex64::new(1.0, 0.0), PauliString::identity(len)?)
    }

    pub fn from_string(coeff: Complex64, s: PauliString) -> Result<Self, PauliError> {
        Self::from_terms(s.len(), [(coeff, s)])
    }

    /// Collects terms, folding string phases into the coefficients.
    pub fn from_terms(
        len: usize,
        terms: impl IntoIterator<Item = (Complex64, PauliString)>,
    ) -> Result<Self, PauliError> {
        check_len(len)?;
        let mut out = Vec::new();
        for (c, s) in terms {
            if s.len() != len {
                return Err(PauliError::LengthMismatch(len, s.len()));
            }
            out.push((c * s.phase().value(), s.with_phase(Phase::ONE)));
        }
        let mut sum = Self { len, terms: out };
        sum.canonicalize();
        Ok(sum)
    }

    /// Real-coefficient term built from `(site, letter)` pairs.
    pub fn term(len: usize, coeff: f64, sites: &[(usize, Pauli)]) -> Result<Self, PauliError> {
        Self::from_string(Complex64::new(coeff, 0.0), PauliString::from_sites(len, sites)?)
    }

    fn canonicalize(&mut self) {
        let mut keyed: Vec<(u128, Complex64, PauliString)> =
            self.terms.drain(..).map(|(c, s)| (s.canonical_key(), c, s)).collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(Complex64, PauliString)> = Vec::with_capacity(keyed.len());
        let mut last_key = None;
        for (k, c, s) in keyed {
            if last_key == Some(k) {
                merged.last_mut().unwrap().0 += c;
            } else {
                merged.push((c, s));
                last_key = Some(k);
            }
        }
        merged.retain(|(c, _)| c.norm() >= DROP_TOL);
        self.terms = merged;
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[(Complex64, PauliString)] {
        &self.terms
    }

    /// Hermitian iff every canonical coefficient is real.
    pub fn is_hermitian(&self) -> bool {
        self.terms.iter().all(|(c, _)| c.im.abs() < DROP_TOL)
    }

    /// Coefficient of the identity string, i.e. `Tr(P) / 2^L`.
    pub fn identity_coefficient(&self) -> Complex64 {
        self.terms
            .iter()
            .find(|(_, s)| s.is_identity())
            .map(|(c, _)| *c)
            .unwrap_or_default()
    }

    pub fn coefficient_of(&self, s: &PauliString) -> Complex64 {
        let key = s.canonical_key();
        self.terms
            .binary_search_by(|(_, t)| t.canonical_key().cmp(&key))
            .map(|i| self.terms[i].0 * s.phase().value().conj())
            .unwrap_or_default()
    }

    /// Sum of coefficient magnitudes, an upper bound on the operator norm.
    pub fn coefficient_l1(&self) -> f64 {
        self.terms.iter().map(|(c, _)| c.norm()).sum()
    }

    /// `sqrt(Tr(P^dag P)) = sqrt(2^L * sum |c|^2)`.
    pub fn frobenius_norm(&self) -> f64 {
        let s: f64 = self.terms.iter().map(|(c, _)| c.norm_sqr()).sum();
        (2f64.powi(self.len as i32) * s).sqrt()
    }

    pub fn scale(&self, a: Complex64) -> PauliSum {
        let mut out = Self {
            len: self.len,
            terms: self.terms.iter().map(|(c, s)| (c * a, *s)).collect(),
        };
        out.canonicalize();
        out
    }

    pub fn scale_real(&self, a: f64) -> PauliSum {
        self.scale(Complex64::new(a, 0.0))
    }

    pub fn add(&self, other: &PauliSum) -> Result<PauliSum, PauliError> {
        if self.len != other.len {
            return Err(PauliError::LengthMismatch(self.len, other.len));
        }
        let mut out = Self {
            len: self.len,
            terms: self.terms.iter().chain(other.terms.iter()).copied().collect(),
        };
        out.canonicalize();
        Ok(out)
    }

    pub fn sub(&self, other: &PauliSum) -> Result<PauliSum, PauliError> {
        self.add(&other.scale_real(-1.0))
    }

    /// Operator product `self * other`.
    pub fn mul(&self, other: &PauliSum) -> Result<PauliSum, PauliError> {
        if self.len != other.len {
            return Err(PauliError::LengthMismatch(self.len, other.len));
        }
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (ca, sa) in &self.terms {
            for (cb, sb) in &other.terms {
                let p = sa.multiply(sb)?;
                terms.push((ca * cb * p.phase().value(), p.with_phase(Phase::ONE)));
            }
        }
        let mut out = Self { len: self.len, terms };
        out.canonicalize();
        Ok(out)
    }

    /// `[a, b] = ab - ba`, evaluated term by term: only anticommuting pairs survive.
    pub fn commutator(&self, other: &PauliSum) -> Result<PauliSum, PauliError> {
        self.bracket(other, false)
    }

    /// `{a, b} = ab + ba`: only commuting pairs survive.
    pub fn anticommutator(&self, other: &PauliSum) -> Result<PauliSum, PauliError> {
        self.bracket(other, true)
    }

    fn bracket(&self, other: &PauliSum, anti: bool) -> Result<PauliSum, PauliError> {
        if self.len != other.len {
            return Err(PauliError::LengthMismatch(self.len, other.len));
        }
        let mut terms = Vec::new();
        for (ca, sa) in &self.terms {
            for (cb, sb) in &other.terms {
                if sa.commutes_with(sb) == anti {
                    let p = sa.multiply(sb)?;
                    terms.push((2.0 * ca * cb * p.phase().value(), p.with_phase(Phase::ONE)));
                }
            }
        }
        let mut out = Self { len: self.len, terms };
        out.canonicalize();
        Ok(out)
    }

    pub fn adjoint(&self) -> PauliSum {
        Self {
            len: self.len,
            terms: self.terms.iter().map(|(c, s)| (c.conj(), *s)).collect(),
        }
    }

    pub fn map_letters(&self, f: impl Fn(Pauli) -> Pauli + Copy) -> PauliSum {
        let mut out = Self {
            len: self.len,
            terms: self.terms.iter().map(|(c, s)| (*c, s.map_letters(f))).collect(),
        };
        out.canonicalize();
        out
    }

    /// True when both sums agree term by term within `tol`.
    pub fn approx_eq(&self, other: &PauliSum, tol: f64) -> bool {
        match self.sub(other) {
            Ok(d) => d.terms.iter().all(|(c, _)| c.norm() <= tol),
            Err(_) => false,
        }
    }

    /// Line-oriented text: `coeff_re coeff_im letters`, one term per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (c, s) in &self.terms {
            out.push_str(&format!("{:e} {:e} {}\n", c.re, c.im, s.letters()));
        }
        out
    }

    /// Parses the text format of [`PauliSum::to_text`]. Blank lines and
    /// lines starting with `#` are skipped. An empty input needs `len`.
    pub fn from_text(text: &str, len: Option<usize>) -> Result<PauliSum, PauliError> {
        let mut terms = Vec::new();
        let mut found_len = len;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(PauliError::Parse(format!(
                    "line {}: expected 'coeff_re coeff_im letters'",
                    lineno + 1
                )));
            }
            let parse = |f: &str| {
                f.parse::<f64>()
                    .map_err(|e| PauliError::Parse(format!("line {}: {e}", lineno + 1)))
            };
            let c = Complex64::new(parse(fields[0])?, parse(fields[1])?);
            let s = PauliString::from_letters(fields[2])?;
            match found_len {
                Some(l) if l != s.len() => return Err(PauliError::LengthMismatch(l, s.len())),
                _ => found_len = Some(s.len()),
            }
            terms.push((c, s));
        }
        let len = found_len.ok_or_else(|| PauliError::Parse("empty sum without length".into()))?;
        Self::from_terms(len, terms)
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (c, s)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({:.6}{:+.6}i) {}", c.re, c.im, s.letters())?;
        }
        Ok(())
    }
}

impl PartialOrd for PauliString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PauliString {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len
            .cmp(&other.len)
            .then(self.canonical_key().cmp(&other.canonical_key()))
            .then(self.phase.power().cmp(&other.phase.power()))
    }
}
