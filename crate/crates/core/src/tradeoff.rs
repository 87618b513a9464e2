//! The file-size bound over composition vectors and what follows from it:
//! feasibility of a `(α, β₁, β₂)` operating point and the minimum
//! cross-rack bandwidth achievable at a given per-node storage.
//!
//! For a composition `u = [u₁, …, u_g]` the bound reads
//!
//! ```text
//! B ≤ kα + Σᵢ uᵢ · min(0, (d − Σ_{j<i} uⱼ)β₁ − (e/f)α + (f − uᵢ)β₂)
//! ```
//!
//! and a point is feasible when `B` is at most the minimum of the right-hand
//! side over every composition.

use std::fmt;

use thiserror::Error;

use crate::params::{cross_rack_bandwidth, mbrcr_point, msrcr_point, CodeParams, PointRole};
use crate::scalar::Scalar;
use crate::Rational;

/// Stage-wise counts of collected racks: parts in `1..=f` summing to `m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Composition(Vec<usize>);

impl Composition {
    pub fn new(parts: Vec<usize>, m: usize, f: usize) -> Option<Composition> {
        let ok = !parts.is_empty()
            && parts.iter().all(|&u| (1..=f).contains(&u))
            && parts.iter().sum::<usize>() == m;
        ok.then_some(Composition(parts))
    }

    pub fn parts(&self) -> &[usize] {
        &self.0
    }

    pub fn stages(&self) -> usize {
        self.0.len()
    }

    /// `(uᵢ, Σ_{j<i} uⱼ)` for every stage.
    pub fn with_prefix(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.0.iter().scan(0usize, |acc, &u| {
            let pre = *acc;
            *acc += u;
            Some((u, pre))
        })
    }
}

impl fmt::Display for Composition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, u) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{u}")?;
        }
        write!(f, "]")
    }
}

/// All ordered compositions of `m` into parts of size at most `f`, largest
/// first part first.
pub fn compositions(m: usize, f: usize) -> Vec<Composition> {
    fn rec(rest: usize, f: usize, prefix: &mut Vec<usize>, out: &mut Vec<Composition>) {
        if rest == 0 {
            out.push(Composition(prefix.clone()));
            return;
        }
        for u in (1..=f.min(rest)).rev() {
            prefix.push(u);
            rec(rest - u, f, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if m > 0 && f > 0 {
        rec(m, f, &mut Vec::new(), &mut out);
    }
    out
}

fn int<S: Scalar>(v: usize) -> S {
    S::from_int(v as i64)
}

/// The stage-`i` affine term `(d − pre)β₁ − (e/f)α + (f − uᵢ)β₂`.
fn stage_term<S: Scalar>(
    p: &CodeParams,
    alpha: &S,
    beta1: &S,
    beta2: &S,
    u: usize,
    pre: usize,
) -> S {
    int::<S>(p.d() - pre) * beta1.clone() - S::from_frac(p.e() as i64, p.f() as i64) * alpha.clone()
        + int::<S>(p.f() - u) * beta2.clone()
}

/// Right-hand side of the bound for one composition.
pub fn bound_rhs<S: Scalar>(p: &CodeParams, alpha: &S, beta1: &S, beta2: &S, u: &Composition) -> S {
    u.with_prefix()
        .fold(int::<S>(p.k()) * alpha.clone(), |acc, (ui, pre)| {
            let term = stage_term(p, alpha, beta1, beta2, ui, pre);
            acc + int::<S>(ui) * S::min_of(S::zero(), term)
        })
}

/// The same bound written as a cut: every collected rack contributes
/// `min((n/r)α, (d − pre)β₁ + (n/r − e/f)α + (f − uᵢ)β₂)` and the
/// `k − m·n/r` remaining nodes contribute `α` each.
pub fn bound_rhs_cut_form<S: Scalar>(
    p: &CodeParams,
    alpha: &S,
    beta1: &S,
    beta2: &S,
    u: &Composition,
) -> S {
    let nr = p.nodes_per_rack();
    let rack_full = int::<S>(nr) * alpha.clone();
    let leftover = int::<S>(p.k() - p.m() * nr) * alpha.clone();
    u.with_prefix().fold(leftover, |acc, (ui, pre)| {
        let via_repair = int::<S>(p.d() - pre) * beta1.clone()
            + S::from_frac((nr * p.f() - p.e()) as i64, p.f() as i64) * alpha.clone()
            + int::<S>(p.f() - ui) * beta2.clone();
        acc + int::<S>(ui) * S::min_of(rack_full.clone(), via_repair)
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FileSizeBound<S = Rational> {
    pub value: S,
    /// Every composition attaining the minimum, in enumeration order.
    pub argmin: Vec<Composition>,
}

/// Largest file size the bound admits at `(α, β₁, β₂)`.
pub fn max_file_size<S: Scalar>(
    p: &CodeParams,
    alpha: &S,
    beta1: &S,
    beta2: &S,
) -> FileSizeBound<S> {
    let mut best: Option<FileSizeBound<S>> = None;
    for u in compositions(p.m(), p.f()) {
        let v = bound_rhs(p, alpha, beta1, beta2, &u);
        match &mut best {
            Some(b) if v == b.value => b.argmin.push(u),
            Some(b) if v > b.value => {}
            _ => {
                best = Some(FileSizeBound {
                    value: v,
                    argmin: vec![u],
                })
            }
        }
    }
    best.expect("validated parameters have m >= 1")
}

pub fn feasible<S: Scalar>(p: &CodeParams, file_size: &S, alpha: &S, beta1: &S, beta2: &S) -> bool {
    *file_size <= max_file_size(p, alpha, beta1, beta2).value
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TradeoffError {
    #[error("alpha = {alpha} is below the minimum B/k = {min}")]
    AlphaBelowMinimum { alpha: String, min: String },
    #[error(transparent)]
    Point(#[from] crate::params::PointError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GammaOptimum<S = Rational> {
    pub gamma: S,
    pub beta1: S,
    pub beta2: S,
}

/// A boundary line `a₁β₁ + a₂β₂ = c` of one linear piece of the bound.
#[derive(Debug, Clone, PartialEq)]
struct Line<S> {
    a1: S,
    a2: S,
    c: S,
}

/// Piece boundaries of the feasible region in the `(β₁, β₂)` plane.
///
/// `bound_rhs(u) ≥ B` is a sum of `min(0, ·)` terms, so it holds iff for every
/// subset `T` of stages of `u`, `kα + Σ_{i∈T} uᵢ·termᵢ ≥ B`. Each subset gives
/// one half-plane; the axes close the region.
fn piece_boundaries<S: Scalar>(p: &CodeParams, file_size: &S, alpha: &S) -> Vec<Line<S>> {
    let mut lines = vec![
        Line {
            a1: S::one(),
            a2: S::zero(),
            c: S::zero(),
        },
        Line {
            a1: S::zero(),
            a2: S::one(),
            c: S::zero(),
        },
    ];
    let ka = int::<S>(p.k()) * alpha.clone();
    let ef_alpha = S::from_frac(p.e() as i64, p.f() as i64) * alpha.clone();
    for u in compositions(p.m(), p.f()) {
        let stages: Vec<(usize, usize)> = u.with_prefix().collect();
        for mask in 1u32..(1 << stages.len()) {
            let mut a1 = S::zero();
            let mut a2 = S::zero();
            let mut c = file_size.clone() - ka.clone();
            for (i, &(ui, pre)) in stages.iter().enumerate() {
                if mask & (1 << i) == 0 {
                    continue;
                }
                a1 = a1 + int::<S>(ui * (p.d() - pre));
                a2 = a2 + int::<S>(ui * (p.f() - ui));
                c = c + int::<S>(ui) * ef_alpha.clone();
            }
            let line = Line { a1, a2, c };
            if !lines.contains(&line) {
                lines.push(line);
            }
        }
    }
    lines
}

/// Minimum `γ = dβ₁ + (f−1)β₂` over all `(β₁, β₂) ≥ 0` that keep the point
/// feasible at storage `α`.
///
/// The feasible region is a convex polygon bounded by the piece boundaries
/// above, so the optimum sits on a pairwise intersection of them. Candidates
/// are screened with [`feasible`] directly. Ties are broken towards the
/// smaller `β₂`, then the smaller `β₁`.
pub fn min_gamma_given_alpha<S: Scalar>(
    p: &CodeParams,
    file_size: &S,
    alpha: &S,
) -> Result<GammaOptimum<S>, TradeoffError> {
    let min_alpha = file_size.div_by(&int(p.k()));
    if *alpha < min_alpha {
        return Err(TradeoffError::AlphaBelowMinimum {
            alpha: alpha.to_string(),
            min: min_alpha.to_string(),
        });
    }
    let lines = piece_boundaries(p, file_size, alpha);
    let mut best: Option<GammaOptimum<S>> = None;
    for (i, l1) in lines.iter().enumerate() {
        for l2 in &lines[i + 1..] {
            let det = l1.a1.clone() * l2.a2.clone() - l1.a2.clone() * l2.a1.clone();
            let Some(inv) = det.try_inv() else { continue };
            let b1 = (l1.c.clone() * l2.a2.clone() - l1.a2.clone() * l2.c.clone()) * inv.clone();
            let b2 = (l1.a1.clone() * l2.c.clone() - l1.c.clone() * l2.a1.clone()) * inv;
            if b1.is_negative() || b2.is_negative() {
                continue;
            }
            if !feasible(p, file_size, alpha, &b1, &b2) {
                continue;
            }
            let gamma = cross_rack_bandwidth(p, &b1, &b2);
            let better = match &best {
                None => true,
                Some(cur) => {
                    gamma < cur.gamma
                        || (gamma == cur.gamma
                            && (b2 < cur.beta2 || (b2 == cur.beta2 && b1 < cur.beta1)))
                }
            };
            if better {
                best = Some(GammaOptimum {
                    gamma,
                    beta1: b1,
                    beta2: b2,
                });
            }
        }
    }
    Ok(best.expect("alpha >= B/k always admits a feasible vertex"))
}

/// One row of a tradeoff curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint<S = Rational> {
    pub alpha: S,
    pub gamma: S,
    pub role: PointRole,
}

/// The two corner points followed by `steps + 1` curve samples evenly spaced
/// in `α` from the minimum-storage to the minimum-bandwidth corner.
pub fn tradeoff_curve<S: Scalar>(
    p: &CodeParams,
    file_size: &S,
    steps: usize,
) -> Result<Vec<CurvePoint<S>>, TradeoffError> {
    let msr = msrcr_point(p, file_size)?;
    let mbr = mbrcr_point(p, file_size)?;
    let mut out = vec![
        CurvePoint {
            alpha: msr.alpha.clone(),
            gamma: msr.gamma,
            role: PointRole::Msrcr,
        },
        CurvePoint {
            alpha: mbr.alpha.clone(),
            gamma: mbr.gamma,
            role: PointRole::Mbrcr,
        },
    ];
    let span = mbr.alpha - msr.alpha.clone();
    let steps = steps.max(1);
    for i in 0..=steps {
        let alpha = msr.alpha.clone() + span.clone() * S::from_frac(i as i64, steps as i64);
        let opt = min_gamma_given_alpha(p, file_size, &alpha)?;
        out.push(CurvePoint {
            alpha,
            gamma: opt.gamma,
            role: PointRole::Custom,
        });
    }
    Ok(out)
}

pub const CURVE_CSV_HEADER: &str = "alpha_num,alpha_den,gamma_num,gamma_den,role";

pub fn curve_to_csv(points: &[CurvePoint<Rational>]) -> String {
    let mut out = String::from(CURVE_CSV_HEADER);
    out.push('\n');
    for pt in points {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            pt.alpha.numer(),
            pt.alpha.denom(),
            pt.gamma.numer(),
            pt.gamma.denom(),
            pt.role
        ));
    }
    out
}
