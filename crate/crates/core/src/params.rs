//! Code parameters, their validation, and the closed-form corner points of
//! the storage/cross-rack-bandwidth tradeoff.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;
use crate::Rational;

/// One violated parameter constraint.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParamViolation {
    #[error("{0} must be positive")]
    NotPositive(&'static str),
    #[error("r = {r} does not divide n = {n}")]
    RacksDoNotDivideNodes { n: usize, r: usize },
    #[error("f = {f} does not divide e = {e}")]
    GroupDoesNotDivideFailures { e: usize, f: usize },
    #[error("m = floor(kr/n) = 0; need k >= n/r")]
    EmptyM,
    #[error("f = {f} does not divide m = {m}")]
    GroupDoesNotDivideM { f: usize, m: usize },
    #[error("d >= m violated ({d} < {m})")]
    HelpersBelowM { d: usize, m: usize },
    #[error("d <= r - f violated ({d} > {})", .r.saturating_sub(*.f))]
    HelpersAboveRacks { d: usize, r: usize, f: usize },
    #[error("k <= n violated ({k} > {n})")]
    CollectorTooLarge { k: usize, n: usize },
    #[error("f <= r violated ({f} > {r})")]
    GroupTooLarge { f: usize, r: usize },
    #[error("e/f <= n/r violated ({per_rack} > {nodes_per_rack})")]
    TooManyFailuresPerRack {
        per_rack: usize,
        nodes_per_rack: usize,
    },
}

/// All constraint violations found for a parameter tuple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamError {
    pub violations: Vec<ParamViolation>,
}

impl fmt::Display for ParamError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid parameters: ")?;
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ParamError {}

impl ParamError {
    pub fn contains(&self, pred: impl Fn(&ParamViolation) -> bool) -> bool {
        self.violations.iter().any(pred)
    }
}

/// A validated `(n, k, d, r, e, f)` tuple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct CodeParams {
    n: usize,
    k: usize,
    d: usize,
    r: usize,
    e: usize,
    f: usize,
    m: usize,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    n: usize,
    k: usize,
    d: usize,
    r: usize,
    e: usize,
    f: usize,
}

impl TryFrom<RawParams> for CodeParams {
    type Error = ParamError;
    fn try_from(p: RawParams) -> Result<Self, ParamError> {
        CodeParams::validate(p.n, p.k, p.d, p.r, p.e, p.f)
    }
}

impl From<CodeParams> for RawParams {
    fn from(p: CodeParams) -> Self {
        RawParams {
            n: p.n,
            k: p.k,
            d: p.d,
            r: p.r,
            e: p.e,
            f: p.f,
        }
    }
}

impl CodeParams {
    /// Check every constraint and report all violations together.
    pub fn validate(
        n: usize,
        k: usize,
        d: usize,
        r: usize,
        e: usize,
        f: usize,
    ) -> Result<CodeParams, ParamError> {
        use ParamViolation::*;
        let mut v = Vec::new();
        for (name, value) in [("n", n), ("k", k), ("d", d), ("r", r), ("e", e), ("f", f)] {
            if value == 0 {
                v.push(NotPositive(name));
            }
        }
        if !v.is_empty() {
            return Err(ParamError { violations: v });
        }
        if !n.is_multiple_of(r) {
            v.push(RacksDoNotDivideNodes { n, r });
        }
        if !e.is_multiple_of(f) {
            v.push(GroupDoesNotDivideFailures { e, f });
        }
        let m = k * r / n;
        if m == 0 {
            v.push(EmptyM);
        } else if !m.is_multiple_of(f) {
            v.push(GroupDoesNotDivideM { f, m });
        }
        if d < m {
            v.push(HelpersBelowM { d, m });
        }
        if d + f > r {
            v.push(HelpersAboveRacks { d, r, f });
        }
        if k > n {
            v.push(CollectorTooLarge { k, n });
        }
        if f > r {
            v.push(GroupTooLarge { f, r });
        }
        if n.is_multiple_of(r) && e.is_multiple_of(f) && e / f > n / r {
            v.push(TooManyFailuresPerRack {
                per_rack: e / f,
                nodes_per_rack: n / r,
            });
        }
        if v.is_empty() {
            Ok(CodeParams {
                n,
                k,
                d,
                r,
                e,
                f,
                m,
            })
        } else {
            Err(ParamError { violations: v })
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn k(&self) -> usize {
        self.k
    }
    pub fn d(&self) -> usize {
        self.d
    }
    pub fn r(&self) -> usize {
        self.r
    }
    pub fn e(&self) -> usize {
        self.e
    }
    pub fn f(&self) -> usize {
        self.f
    }
    /// `floor(kr/n)`: the number of whole racks a worst-case collector spans.
    pub fn m(&self) -> usize {
        self.m
    }
    pub fn nodes_per_rack(&self) -> usize {
        self.n / self.r
    }
    pub fn failures_per_rack(&self) -> usize {
        self.e / self.f
    }

    /// Parse `n,k,d,r,e,f`.
    pub fn parse(s: &str) -> Result<CodeParams, String> {
        let parts: Vec<usize> = s
            .split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}")))
            .collect::<Result<_, _>>()?;
        let [n, k, d, r, e, f] = parts[..] else {
            return Err(format!(
                "expected 6 comma-separated integers, got {}",
                parts.len()
            ));
        };
        CodeParams::validate(n, k, d, r, e, f).map_err(|e| e.to_string())
    }
}

impl fmt::Display for CodeParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(n={}, k={}, d={}, r={}, e={}, f={})",
            self.n, self.k, self.d, self.r, self.e, self.f
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PointRole {
    Msrcr,
    Mbrcr,
    Custom,
}

impl fmt::Display for PointRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PointRole::Msrcr => "msrcr",
            PointRole::Mbrcr => "mbrcr",
            PointRole::Custom => "custom",
        })
    }
}

/// `(α, β₁, β₂, γ, B)` with `γ = dβ₁ + (f−1)β₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct TradeoffPoint<S = Rational> {
    pub alpha: S,
    pub beta1: S,
    pub beta2: S,
    pub gamma: S,
    pub file_size: S,
    pub role: PointRole,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PointError {
    #[error("file size must be positive, got {0}")]
    NonPositiveFileSize(String),
}

/// `dβ₁ + (f−1)β₂`
pub fn cross_rack_bandwidth<S: Scalar>(p: &CodeParams, beta1: &S, beta2: &S) -> S {
    S::from_int(p.d as i64) * beta1.clone() + S::from_int(p.f as i64 - 1) * beta2.clone()
}

impl<S: Scalar> TradeoffPoint<S> {
    pub fn new(
        p: &CodeParams,
        alpha: S,
        beta1: S,
        beta2: S,
        file_size: S,
        role: PointRole,
    ) -> Self {
        let gamma = cross_rack_bandwidth(p, &beta1, &beta2);
        TradeoffPoint {
            alpha,
            beta1,
            beta2,
            gamma,
            file_size,
            role,
        }
    }
}

impl<S: fmt::Display> fmt::Display for TradeoffPoint<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: alpha={} beta1={} beta2={} gamma={} B={}",
            self.role, self.alpha, self.beta1, self.beta2, self.gamma, self.file_size
        )
    }
}

fn check_file_size<S: Scalar>(b: &S) -> Result<(), PointError> {
    if b.is_positive() {
        Ok(())
    } else {
        Err(PointError::NonPositiveFileSize(b.to_string()))
    }
}

fn int<S: Scalar>(v: usize) -> S {
    S::from_int(v as i64)
}

/// Minimum-storage point: `α = B/k`, `β₁ = β₂ = (B/k)(e/f)/(d−m+f)`.
pub fn msrcr_point<S: Scalar>(p: &CodeParams, b: &S) -> Result<TradeoffPoint<S>, PointError> {
    check_file_size(b)?;
    let alpha = b.div_by(&int(p.k));
    let per_rack = S::from_frac(p.e as i64, p.f as i64);
    let beta = (alpha.clone() * per_rack).div_by(&int(p.d - p.m + p.f));
    Ok(TradeoffPoint::new(
        p,
        alpha,
        beta.clone(),
        beta,
        b.clone(),
        PointRole::Msrcr,
    ))
}

/// Minimum-bandwidth point:
/// `β₁ = B / (k(f/e)(d + (f−1)/2) + (m − m²)/2)`, `β₂ = β₁/2`, `α = (f/e)γ`.
pub fn mbrcr_point<S: Scalar>(p: &CodeParams, b: &S) -> Result<TradeoffPoint<S>, PointError> {
    check_file_size(b)?;
    let two = int::<S>(2);
    let f_over_e = S::from_frac(p.f as i64, p.e as i64);
    let half_spread = int::<S>(p.f - 1).div_by(&two);
    let m = p.m as i64;
    let denom = int::<S>(p.k) * f_over_e.clone() * (int::<S>(p.d) + half_spread)
        + S::from_int(m - m * m).div_by(&two);
    let beta1 = b.div_by(&denom);
    let beta2 = beta1.div_by(&two);
    let gamma = cross_rack_bandwidth(p, &beta1, &beta2);
    let alpha = f_over_e * gamma;
    Ok(TradeoffPoint::new(
        p,
        alpha,
        beta1,
        beta2,
        b.clone(),
        PointRole::Mbrcr,
    ))
}

/// Integer parameters of the exact minimum-bandwidth construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstructionLayout {
    /// Symbols per node, `2d + f − 1`.
    pub alpha: usize,
    /// `2e/f`
    pub beta1: usize,
    /// `e/f`
    pub beta2: usize,
    /// Message symbols, `k(2d+f−1) + (e/f)(m − m²)`.
    pub file_size: usize,
    /// Length of the outer MDS code.
    pub global_symbols: usize,
    /// Global symbols placed directly on the last `n/r − e/f` nodes of all racks.
    pub direct_symbols: usize,
    /// Nonzero entries of each message matrix, `m(2d+f−m)`.
    pub matrix_symbols: usize,
}

impl ConstructionLayout {
    pub fn point(&self, p: &CodeParams) -> TradeoffPoint<Rational> {
        TradeoffPoint::new(
            p,
            Rational::from_int(self.alpha as i64),
            Rational::from_int(self.beta1 as i64),
            Rational::from_int(self.beta2 as i64),
            Rational::from_int(self.file_size as i64),
            PointRole::Mbrcr,
        )
    }

    pub fn gamma(&self, p: &CodeParams) -> usize {
        p.d * self.beta1 + (p.f - 1) * self.beta2
    }
}

pub fn construction_params(p: &CodeParams) -> ConstructionLayout {
    let (d, f, m, k) = (p.d, p.f, p.m, p.k);
    let ef = p.failures_per_rack();
    let alpha = 2 * d + f - 1;
    // k(2d+f−1) − (e/f)·m(m−1); positive because k ≥ m·(n/r) ≥ m·(e/f)
    let file_size = k * alpha - ef * m * (m - 1);
    let matrix_symbols = m * (2 * d + f - m);
    let direct_symbols = (p.n - p.r * ef) * alpha;
    ConstructionLayout {
        alpha,
        beta1: 2 * ef,
        beta2: ef,
        file_size,
        global_symbols: direct_symbols + ef * matrix_symbols,
        direct_symbols,
        matrix_symbols,
    }
}
