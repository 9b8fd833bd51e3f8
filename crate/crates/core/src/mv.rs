//! MV-chains, universes, subsets and valuations.
//!
//! Three chains are supported: the rational unit interval, the bounded
//! naturals `{0,…,k}` and the booleans. All arithmetic is exact.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use fixedbitset::FixedBitSet;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Exact rational numbers used throughout.
pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MvError {
    #[error("chain mismatch: {left} vs {right}")]
    ChainMismatch { left: Chain, right: Chain },
    #[error("value {0} lies outside [0,1]")]
    OutOfRange(String),
    #[error("bounded value {n} exceeds chain bound {k}")]
    ExceedsBound { n: u64, k: u32 },
    #[error("cannot parse {input:?} as a {chain} value")]
    Parse { input: String, chain: Chain },
    #[error("cannot parse {0:?} as a rational")]
    BadRational(String),
    #[error("unknown chain {0:?}")]
    BadChain(String),
    #[error("duplicate universe element {0:?}")]
    DuplicateElement(String),
    #[error("unknown universe element {0:?}")]
    UnknownElement(String),
    #[error("universe mismatch")]
    UniverseMismatch,
    #[error("expected {expected} values, got {got}")]
    Length { expected: usize, got: usize },
    #[error("operation needs the unit-interval chain, found {0}")]
    NeedsUnit(Chain),
}

/// The MV-chain a value lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Chain {
    Unit,
    Bounded(u32),
    Bool,
}

impl fmt::Display for Chain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Chain::Unit => write!(f, "unit"),
            Chain::Bounded(k) => write!(f, "bounded({k})"),
            Chain::Bool => write!(f, "bool"),
        }
    }
}

impl Chain {
    pub fn zero(self) -> MvValue {
        match self {
            Chain::Unit => MvValue::Unit(Rational::zero()),
            Chain::Bounded(k) => MvValue::Bounded { n: 0, k },
            Chain::Bool => MvValue::Bool(false),
        }
    }

    pub fn one(self) -> MvValue {
        match self {
            Chain::Unit => MvValue::Unit(Rational::one()),
            Chain::Bounded(k) => MvValue::Bounded { n: k, k },
            Chain::Bool => MvValue::Bool(true),
        }
    }

    pub fn contains(self, v: &MvValue) -> bool {
        v.chain() == self
    }

    /// Embeds `r ∈ [0,1]` into the chain; for bounded chains `r·k` must be integral.
    pub fn from_rational(self, r: &Rational) -> Result<MvValue, MvError> {
        if r.is_negative() || r > &Rational::one() {
            return Err(MvError::OutOfRange(r.to_string()));
        }
        match self {
            Chain::Unit => Ok(MvValue::Unit(r.clone())),
            Chain::Bounded(k) => {
                let scaled = r * Rational::from_integer(BigInt::from(k));
                if !scaled.is_integer() {
                    return Err(MvError::Parse { input: r.to_string(), chain: self });
                }
                let n: u32 = scaled.to_integer().try_into().map_err(|_| MvError::Parse {
                    input: r.to_string(),
                    chain: self,
                })?;
                Ok(MvValue::Bounded { n, k })
            }
            Chain::Bool => {
                if r.is_zero() {
                    Ok(MvValue::Bool(false))
                } else if r.is_one() {
                    Ok(MvValue::Bool(true))
                } else {
                    Err(MvError::Parse { input: r.to_string(), chain: self })
                }
            }
        }
    }

    /// Parses a value of this chain: `p/q` or an exact decimal for `unit`,
    /// a natural for `bounded`, `0/1/true/false` for `bool`.
    pub fn parse(self, s: &str) -> Result<MvValue, MvError> {
        let t = s.trim();
        let err = || MvError::Parse { input: s.to_string(), chain: self };
        match self {
            Chain::Unit => {
                let r = parse_rational(t)?;
                self.from_rational(&r)
            }
            Chain::Bounded(k) => {
                let n: u64 = t.parse().map_err(|_| err())?;
                if n > k as u64 {
                    return Err(MvError::ExceedsBound { n, k });
                }
                Ok(MvValue::Bounded { n: n as u32, k })
            }
            Chain::Bool => match t {
                "0" | "false" => Ok(MvValue::Bool(false)),
                "1" | "true" => Ok(MvValue::Bool(true)),
                _ => Err(err()),
            },
        }
    }

    /// Parses a chain header such as `unit`, `bool` or `bounded:4`.
    pub fn parse_header(s: &str) -> Result<Chain, MvError> {
        let t = s.trim();
        match t {
            "unit" => Ok(Chain::Unit),
            "bool" => Ok(Chain::Bool),
            _ => {
                let k = t
                    .strip_prefix("bounded:")
                    .or_else(|| t.strip_prefix("bounded(").and_then(|r| r.strip_suffix(')')))
                    .and_then(|k| k.parse::<u32>().ok())
                    .filter(|k| *k > 0)
                    .ok_or_else(|| MvError::BadChain(t.to_string()))?;
                Ok(Chain::Bounded(k))
            }
        }
    }
}

/// Parses `p/q`, an integer, or a finite decimal exactly.
pub fn parse_rational(s: &str) -> Result<Rational, MvError> {
    let t = s.trim();
    let bad = || MvError::BadRational(s.to_string());
    if let Some((p, q)) = t.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(p, q));
    }
    if let Some((int, frac)) = t.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = int.starts_with('-');
        let int_part: BigInt = if int.is_empty() || int == "-" {
            BigInt::zero()
        } else {
            int.parse().map_err(|_| bad())?
        };
        let frac_part: BigInt = frac.parse().map_err(|_| bad())?;
        let den = num_traits::pow(BigInt::from(10), frac.len());
        let mag = Rational::from_integer(int_part.abs()) + Rational::new(frac_part, den);
        return Ok(if neg { -mag } else { mag });
    }
    let p: BigInt = t.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(p))
}

/// Formats a rational as `p/q` (or `p` when integral).
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Shorthand for `p/q` in code and tests.
pub fn q(p: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(d))
}

/// An element of an MV-chain.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum MvValue {
    Unit(Rational),
    Bounded { n: u32, k: u32 },
    Bool(bool),
}

impl MvValue {
    /// A unit-interval value from an exact fraction; panics outside `[0,1]`.
    pub fn unit(p: i64, d: i64) -> MvValue {
        let r = q(p, d);
        assert!(!r.is_negative() && r <= Rational::one(), "{r} outside [0,1]");
        MvValue::Unit(r)
    }

    pub fn chain(&self) -> Chain {
        match self {
            MvValue::Unit(_) => Chain::Unit,
            MvValue::Bounded { k, .. } => Chain::Bounded(*k),
            MvValue::Bool(_) => Chain::Bool,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            MvValue::Unit(r) => r.is_zero(),
            MvValue::Bounded { n, .. } => *n == 0,
            MvValue::Bool(b) => !b,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            MvValue::Unit(r) => r.is_one(),
            MvValue::Bounded { n, k } => n == k,
            MvValue::Bool(b) => *b,
        }
    }

    /// The value as a rational in `[0,1]` (bounded values are scaled by `1/k`).
    pub fn to_rational(&self) -> Rational {
        match self {
            MvValue::Unit(r) => r.clone(),
            MvValue::Bounded { n, k } => q(*n as i64, *k as i64),
            MvValue::Bool(b) => Rational::from_integer(BigInt::from(*b as u8)),
        }
    }

    pub fn to_f64(&self) -> f64 {
        use num_traits::ToPrimitive;
        self.to_rational().to_f64().unwrap_or(f64::NAN)
    }

    fn mismatch(&self, other: &MvValue) -> MvError {
        MvError::ChainMismatch { left: self.chain(), right: other.chain() }
    }

    /// Truncated addition `x ⊕ y`.
    pub fn try_add(&self, other: &MvValue) -> Result<MvValue, MvError> {
        match (self, other) {
            (MvValue::Unit(x), MvValue::Unit(y)) => {
                let s = x + y;
                Ok(MvValue::Unit(if s > Rational::one() { Rational::one() } else { s }))
            }
            (MvValue::Bounded { n, k }, MvValue::Bounded { n: m, k: k2 }) if k == k2 => {
                Ok(MvValue::Bounded { n: (n + m).min(*k), k: *k })
            }
            (MvValue::Bool(a), MvValue::Bool(b)) => Ok(MvValue::Bool(*a || *b)),
            _ => Err(self.mismatch(other)),
        }
    }

    /// Truncated subtraction `x ⊖ y = x ⊗ comp(y)`.
    pub fn try_sub(&self, other: &MvValue) -> Result<MvValue, MvError> {
        match (self, other) {
            (MvValue::Unit(x), MvValue::Unit(y)) => {
                let d = x - y;
                Ok(MvValue::Unit(if d.is_negative() { Rational::zero() } else { d }))
            }
            (MvValue::Bounded { n, k }, MvValue::Bounded { n: m, k: k2 }) if k == k2 => {
                Ok(MvValue::Bounded { n: n.saturating_sub(*m), k: *k })
            }
            (MvValue::Bool(a), MvValue::Bool(b)) => Ok(MvValue::Bool(*a && !*b)),
            _ => Err(self.mismatch(other)),
        }
    }

    /// MV-multiplication `x ⊗ y = comp(comp(x) ⊕ comp(y))`.
    pub fn try_mul(&self, other: &MvValue) -> Result<MvValue, MvError> {
        match (self, other) {
            (MvValue::Unit(x), MvValue::Unit(y)) => {
                let s = x + y - Rational::one();
                Ok(MvValue::Unit(if s.is_negative() { Rational::zero() } else { s }))
            }
            (MvValue::Bounded { n, k }, MvValue::Bounded { n: m, k: k2 }) if k == k2 => {
                Ok(MvValue::Bounded { n: (n + m).saturating_sub(*k), k: *k })
            }
            (MvValue::Bool(a), MvValue::Bool(b)) => Ok(MvValue::Bool(*a && *b)),
            _ => Err(self.mismatch(other)),
        }
    }

    /// Complement `comp(x)`.
    pub fn comp(&self) -> MvValue {
        match self {
            MvValue::Unit(x) => MvValue::Unit(Rational::one() - x),
            MvValue::Bounded { n, k } => MvValue::Bounded { n: k - n, k: *k },
            MvValue::Bool(b) => MvValue::Bool(!b),
        }
    }

    /// The natural order `x ⊑ y`, i.e. `x ⊖ y = 0`.
    pub fn try_leq(&self, other: &MvValue) -> Result<bool, MvError> {
        Ok(self.try_sub(other)?.is_zero())
    }

    /// Rational scaling `r ⊙ x`, only on the unit interval.
    pub fn scale(&self, r: &Rational) -> Result<MvValue, MvError> {
        match self {
            MvValue::Unit(x) => Ok(MvValue::Unit(x * r)),
            _ => Err(MvError::NeedsUnit(self.chain())),
        }
    }

    /// `x ⊕ x`, used when doubling jump amounts.
    pub fn double(&self) -> MvValue {
        self + self
    }

    /// Largest chain element `h` with `h ⊕ h ⊑ x`, or `None` when it is 0.
    pub fn halve(&self) -> Option<MvValue> {
        let h = match self {
            MvValue::Unit(x) => MvValue::Unit(x / Rational::from_integer(BigInt::from(2))),
            MvValue::Bounded { n, k } => MvValue::Bounded { n: n / 2, k: *k },
            MvValue::Bool(_) => MvValue::Bool(false),
        };
        if h.is_zero() {
            None
        } else {
            Some(h)
        }
    }

    fn rank(&self) -> u8 {
        match self {
            MvValue::Unit(_) => 0,
            MvValue::Bounded { .. } => 1,
            MvValue::Bool(_) => 2,
        }
    }
}

impl fmt::Display for MvValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MvValue::Unit(r) => write!(f, "{}", format_rational(r)),
            MvValue::Bounded { n, .. } => write!(f, "{n}"),
            MvValue::Bool(b) => write!(f, "{}", *b as u8),
        }
    }
}

/// Within one chain this is the natural order. Values of different chains
/// are ordered by chain kind only so that sorting never panics.
impl Ord for MvValue {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (MvValue::Unit(x), MvValue::Unit(y)) => x.cmp(y),
            (MvValue::Bounded { n, k }, MvValue::Bounded { n: m, k: k2 }) => {
                k.cmp(k2).then(n.cmp(m))
            }
            (MvValue::Bool(a), MvValue::Bool(b)) => a.cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl PartialOrd for MvValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// Operator forms panic on chain mismatch; use the `try_*` methods for
// untrusted input.
impl std::ops::Add for &MvValue {
    type Output = MvValue;
    fn add(self, rhs: &MvValue) -> MvValue {
        self.try_add(rhs).expect("mixed MV-chains in ⊕")
    }
}

impl std::ops::Sub for &MvValue {
    type Output = MvValue;
    fn sub(self, rhs: &MvValue) -> MvValue {
        self.try_sub(rhs).expect("mixed MV-chains in ⊖")
    }
}

impl std::ops::Mul for &MvValue {
    type Output = MvValue;
    fn mul(self, rhs: &MvValue) -> MvValue {
        self.try_mul(rhs).expect("mixed MV-chains in ⊗")
    }
}

pub fn mv_add(x: &MvValue, y: &MvValue) -> Result<MvValue, MvError> {
    x.try_add(y)
}

pub fn mv_sub(x: &MvValue, y: &MvValue) -> Result<MvValue, MvError> {
    x.try_sub(y)
}

pub fn mv_mul(x: &MvValue, y: &MvValue) -> Result<MvValue, MvError> {
    x.try_mul(y)
}

pub fn mv_comp(x: &MvValue) -> MvValue {
    x.comp()
}

/// An ordered, interned list of element names.
#[derive(Debug, Clone)]
pub struct Universe {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl PartialEq for Universe {
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names
    }
}

impl Eq for Universe {}

impl Universe {
    pub fn new<I, S>(names: I) -> Result<Universe, MvError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        let mut index = HashMap::with_capacity(names.len());
        for (i, n) in names.iter().enumerate() {
            if index.insert(n.clone(), i).is_some() {
                return Err(MvError::DuplicateElement(n.clone()));
            }
        }
        Ok(Universe { names, index })
    }

    /// Like [`Universe::new`] but wrapped for sharing.
    pub fn shared<I, S>(names: I) -> Result<Arc<Universe>, MvError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Universe::new(names).map(Arc::new)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn require(&self, name: &str) -> Result<usize, MvError> {
        self.index_of(name).ok_or_else(|| MvError::UnknownElement(name.to_string()))
    }
}

/// True when both handles denote the same universe.
pub fn same_universe(a: &Arc<Universe>, b: &Arc<Universe>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// A subset of a universe as a bit vector of exactly `|Y|` bits.
#[derive(Debug, Clone)]
pub struct SubsetY {
    universe: Arc<Universe>,
    bits: FixedBitSet,
}

impl PartialEq for SubsetY {
    fn eq(&self, other: &Self) -> bool {
        same_universe(&self.universe, &other.universe) && self.bits == other.bits
    }
}

impl Eq for SubsetY {}

impl SubsetY {
    pub fn empty(universe: &Arc<Universe>) -> SubsetY {
        SubsetY { universe: universe.clone(), bits: FixedBitSet::with_capacity(universe.len()) }
    }

    pub fn full(universe: &Arc<Universe>) -> SubsetY {
        let mut s = SubsetY::empty(universe);
        s.bits.insert_range(..);
        s
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(universe: &Arc<Universe>, idx: I) -> SubsetY {
        let mut s = SubsetY::empty(universe);
        for i in idx {
            s.insert(i);
        }
        s
    }

    pub fn from_names<S: AsRef<str>>(universe: &Arc<Universe>, names: &[S]) -> Result<SubsetY, MvError> {
        let mut s = SubsetY::empty(universe);
        for n in names {
            s.insert(universe.require(n.as_ref())?);
        }
        Ok(s)
    }

    /// Subset given by the low `|Y|` bits of `mask`.
    pub fn from_mask(universe: &Arc<Universe>, mask: u64) -> SubsetY {
        SubsetY::from_indices(universe, (0..universe.len().min(64)).filter(|i| mask >> i & 1 == 1))
    }

    pub fn universe(&self) -> &Arc<Universe> {
        &self.universe
    }

    pub fn contains(&self, i: usize) -> bool {
        self.bits.contains(i)
    }

    /// Panics when `i` is outside the universe.
    pub fn insert(&mut self, i: usize) {
        assert!(i < self.universe.len(), "element {i} outside universe of size {}", self.universe.len());
        self.bits.insert(i);
    }

    pub fn remove(&mut self, i: usize) {
        self.bits.set(i, false);
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.ones()
    }

    pub fn names(&self) -> Vec<String> {
        self.iter().map(|i| self.universe.name(i).to_string()).collect()
    }

    fn check(&self, other: &SubsetY) {
        assert!(same_universe(&self.universe, &other.universe), "subsets of different universes");
    }

    pub fn union(&self, other: &SubsetY) -> SubsetY {
        self.check(other);
        let mut bits = self.bits.clone();
        bits.union_with(&other.bits);
        SubsetY { universe: self.universe.clone(), bits }
    }

    pub fn intersection(&self, other: &SubsetY) -> SubsetY {
        self.check(other);
        let mut bits = self.bits.clone();
        bits.intersect_with(&other.bits);
        SubsetY { universe: self.universe.clone(), bits }
    }

    pub fn difference(&self, other: &SubsetY) -> SubsetY {
        self.check(other);
        let mut bits = self.bits.clone();
        bits.difference_with(&other.bits);
        SubsetY { universe: self.universe.clone(), bits }
    }

    pub fn complement(&self) -> SubsetY {
        let mut bits = self.bits.clone();
        bits.toggle_range(..);
        SubsetY { universe: self.universe.clone(), bits }
    }

    pub fn is_subset(&self, other: &SubsetY) -> bool {
        self.check(other);
        self.bits.is_subset(&other.bits)
    }

    pub fn intersects(&self, other: &SubsetY) -> bool {
        self.check(other);
        !self.bits.is_disjoint(&other.bits)
    }
}

impl fmt::Display for SubsetY {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.names().join(", "))
    }
}

/// A dense map from a universe into one MV-chain.
#[derive(Debug, Clone)]
pub struct Valuation {
    universe: Arc<Universe>,
    chain: Chain,
    values: Vec<MvValue>,
}

impl PartialEq for Valuation {
    fn eq(&self, other: &Self) -> bool {
        same_universe(&self.universe, &other.universe) && self.chain == other.chain && self.values == other.values
    }
}

impl Eq for Valuation {}

impl Valuation {
    pub fn new(universe: &Arc<Universe>, chain: Chain, values: Vec<MvValue>) -> Result<Valuation, MvError> {
        if values.len() != universe.len() {
            return Err(MvError::Length { expected: universe.len(), got: values.len() });
        }
        if let Some(v) = values.iter().find(|v| v.chain() != chain) {
            return Err(MvError::ChainMismatch { left: chain, right: v.chain() });
        }
        Ok(Valuation { universe: universe.clone(), chain, values })
    }

    /// A unit-interval valuation from exact rationals.
    pub fn unit(universe: &Arc<Universe>, values: Vec<Rational>) -> Result<Valuation, MvError> {
        let vals = values.iter().map(|r| Chain::Unit.from_rational(r)).collect::<Result<Vec<_>, _>>()?;
        Valuation::new(universe, Chain::Unit, vals)
    }

    pub fn constant(universe: &Arc<Universe>, v: MvValue) -> Valuation {
        let chain = v.chain();
        Valuation { universe: universe.clone(), chain, values: vec![v; universe.len()] }
    }

    pub fn zero(universe: &Arc<Universe>, chain: Chain) -> Valuation {
        Valuation::constant(universe, chain.zero())
    }

    pub fn one(universe: &Arc<Universe>, chain: Chain) -> Valuation {
        Valuation::constant(universe, chain.one())
    }

    /// The valuation `δ_{Y′}`: `δ` on `Y′`, 0 elsewhere.
    pub fn indicator(subset: &SubsetY, delta: &MvValue) -> Valuation {
        let chain = delta.chain();
        let values = (0..subset.universe.len())
            .map(|i| if subset.contains(i) { delta.clone() } else { chain.zero() })
            .collect();
        Valuation { universe: subset.universe.clone(), chain, values }
    }

    pub fn from_fn(universe: &Arc<Universe>, chain: Chain, f: impl FnMut(usize) -> MvValue) -> Result<Valuation, MvError> {
        Valuation::new(universe, chain, (0..universe.len()).map(f).collect())
    }

    pub fn universe(&self) -> &Arc<Universe> {
        &self.universe
    }

    pub fn chain(&self) -> Chain {
        self.chain
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, i: usize) -> &MvValue {
        &self.values[i]
    }

    pub fn get_named(&self, name: &str) -> Result<&MvValue, MvError> {
        Ok(&self.values[self.universe.require(name)?])
    }

    pub fn values(&self) -> &[MvValue] {
        &self.values
    }

    pub fn to_rationals(&self) -> Vec<Rational> {
        self.values.iter().map(MvValue::to_rational).collect()
    }

    /// A copy with entry `i` replaced.
    pub fn with_value(&self, i: usize, v: MvValue) -> Result<Valuation, MvError> {
        if v.chain() != self.chain {
            return Err(MvError::ChainMismatch { left: self.chain, right: v.chain() });
        }
        let mut out = self.clone();
        out.values[i] = v;
        Ok(out)
    }

    fn compatible(&self, other: &Valuation) -> Result<(), MvError> {
        if !same_universe(&self.universe, &other.universe) {
            return Err(MvError::UniverseMismatch);
        }
        if self.chain != other.chain {
            return Err(MvError::ChainMismatch { left: self.chain, right: other.chain });
        }
        Ok(())
    }

    fn zip(&self, other: &Valuation, op: impl Fn(&MvValue, &MvValue) -> MvValue) -> Result<Valuation, MvError> {
        self.compatible(other)?;
        let values = self.values.iter().zip(&other.values).map(|(x, y)| op(x, y)).collect();
        Ok(Valuation { universe: self.universe.clone(), chain: self.chain, values })
    }

    pub fn try_add(&self, other: &Valuation) -> Result<Valuation, MvError> {
        self.zip(other, |x, y| x + y)
    }

    pub fn try_sub(&self, other: &Valuation) -> Result<Valuation, MvError> {
        self.zip(other, |x, y| x - y)
    }

    pub fn try_mul(&self, other: &Valuation) -> Result<Valuation, MvError> {
        self.zip(other, |x, y| x * y)
    }

    pub fn comp(&self) -> Valuation {
        Valuation { universe: self.universe.clone(), chain: self.chain, values: self.values.iter().map(MvValue::comp).collect() }
    }

    /// Pointwise `self ⊑ other`.
    pub fn try_leq(&self, other: &Valuation) -> Result<bool, MvError> {
        self.compatible(other)?;
        Ok(self.values.iter().zip(&other.values).all(|(x, y)| x <= y))
    }

    /// Pointwise order; false when the valuations are incompatible.
    pub fn leq(&self, other: &Valuation) -> bool {
        self.try_leq(other).unwrap_or(false)
    }

    /// `max_y a(y)`, 0 on the empty universe.
    pub fn norm(&self) -> MvValue {
        self.values.iter().max().cloned().unwrap_or_else(|| self.chain.zero())
    }

    /// `[Y]^a = {y | a(y) ≠ 1}`.
    pub fn support_floor(&self) -> SubsetY {
        SubsetY::from_indices(&self.universe, (0..self.len()).filter(|&i| !self.values[i].is_one()))
    }

    /// `δ_a = min {comp(a(y)) | y ∈ [Y]^a}`, 1 when the support is empty.
    pub fn delta_floor(&self) -> MvValue {
        self.delta_floor_on(&self.support_floor())
    }

    /// `min {comp(a(y)) | y ∈ Y′}`, 1 on the empty set.
    pub fn delta_floor_on(&self, subset: &SubsetY) -> MvValue {
        subset.iter().map(|i| self.values[i].comp()).min().unwrap_or_else(|| self.chain.one())
    }

    /// `[Y]_a = {y | a(y) ≠ 0}`.
    pub fn support_ceil(&self) -> SubsetY {
        SubsetY::from_indices(&self.universe, (0..self.len()).filter(|&i| !self.values[i].is_zero()))
    }

    /// `δ^a = min {a(y) | y ∈ [Y]_a}`, 1 when the support is empty.
    pub fn delta_ceil(&self) -> MvValue {
        self.delta_ceil_on(&self.support_ceil())
    }

    /// `min {a(y) | y ∈ Y′}`, 1 on the empty set.
    pub fn delta_ceil_on(&self, subset: &SubsetY) -> MvValue {
        subset.iter().map(|i| self.values[i].clone()).min().unwrap_or_else(|| self.chain.one())
    }

    /// `{y | a(y) = b(y)}`.
    pub fn agreement(&self, other: &Valuation) -> Result<SubsetY, MvError> {
        self.compatible(other)?;
        Ok(SubsetY::from_indices(&self.universe, (0..self.len()).filter(|&i| self.values[i] == other.values[i])))
    }

    /// Restriction along `map` (entry `j` of the result is `self[map[j]]`).
    pub fn pull(&self, target: &Arc<Universe>, map: &[usize]) -> Valuation {
        debug_assert_eq!(target.len(), map.len());
        Valuation {
            universe: target.clone(),
            chain: self.chain,
            values: map.iter().map(|&i| self.values[i].clone()).collect(),
        }
    }

    /// Entries as `name = value` pairs.
    pub fn entries(&self) -> impl Iterator<Item = (&str, &MvValue)> {
        self.universe.names.iter().map(String::as_str).zip(&self.values)
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.entries().map(|(n, v)| format!("{n}: {v}")).collect();
        write!(f, "({})", parts.join(", "))
    }
}

pub fn norm(a: &Valuation) -> MvValue {
    a.norm()
}

pub fn support_floor(a: &Valuation) -> SubsetY {
    a.support_floor()
}

pub fn delta_floor(a: &Valuation) -> MvValue {
    a.delta_floor()
}

pub fn support_ceil(a: &Valuation) -> SubsetY {
    a.support_ceil()
}

pub fn delta_ceil(a: &Valuation) -> MvValue {
    a.delta_ceil()
}
