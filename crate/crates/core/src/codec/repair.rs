//! Two-round cooperative repair of `e` nodes spread over `f` racks.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::encode::{
    add, complete_projection, decode_rack_blocks, parity_block, strip_parities, sub,
};
use super::{ClusterState, CodeSpec, CodecError, NodeId};
use crate::field::FiniteField;
use crate::linalg::dot;

/// One cross-rack message: `symbols` field elements from rack `from` to
/// rack `to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transfer {
    pub from: usize,
    pub to: usize,
    pub symbols: usize,
}

/// Symbol counts of one repair, sorted by rack.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairTranscript {
    /// Helper rack to failed rack.
    pub round1: Vec<Transfer>,
    /// Failed rack to failed rack.
    pub round2: Vec<Transfer>,
    /// `(rack, symbols)` read or written inside the rack by its relayer.
    /// Not part of the cross-rack bandwidth.
    pub intra_rack: Vec<(usize, usize)>,
}

impl RepairTranscript {
    /// Cross-rack symbols downloaded by each failed rack.
    pub fn cross_rack_download(&self) -> BTreeMap<usize, usize> {
        let mut out = BTreeMap::new();
        for t in self.round1.iter().chain(&self.round2) {
            *out.entry(t.to).or_default() += t.symbols;
        }
        out
    }

    pub fn cross_rack_total(&self) -> usize {
        self.round1
            .iter()
            .chain(&self.round2)
            .map(|t| t.symbols)
            .sum()
    }

    pub fn intra_rack_total(&self) -> usize {
        self.intra_rack.iter().map(|(_, s)| s).sum()
    }
}

/// Copy of `state` with `nodes` erased.
pub fn erase<F: FiniteField>(state: &ClusterState<F>, nodes: &[NodeId]) -> ClusterState<F> {
    let mut out = state.clone();
    for n in nodes {
        out.set(*n, None);
    }
    out
}

/// Failed racks with their erased nodes; must be exactly `f` racks with
/// `e/f` erasures each.
fn failure_pattern<F: FiniteField>(
    spec: &CodeSpec<F>,
    state: &ClusterState<F>,
) -> Result<BTreeMap<usize, Vec<usize>>, CodecError> {
    let p = spec.params();
    let mut pattern: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for n in state.erased_nodes() {
        pattern.entry(n.rack).or_default().push(n.node);
    }
    if pattern.len() != p.f() {
        return Err(CodecError::ErasurePattern(format!(
            "erasures in {} racks, expected f = {}",
            pattern.len(),
            p.f()
        )));
    }
    for (rack, nodes) in &pattern {
        if nodes.len() != p.failures_per_rack() {
            return Err(CodecError::ErasurePattern(format!(
                "rack {} has {} erased nodes, expected e/f = {}",
                rack + 1,
                nodes.len(),
                p.failures_per_rack()
            )));
        }
    }
    Ok(pattern)
}

/// Per-matrix vectors `M_i v_l` and `M_iᵀ u_l` known to one rack.
struct Projections<F> {
    mv: Vec<Vec<F>>,
    mtu: Vec<Vec<F>>,
}

/// Repair every erased node of `state` with the help of the `d` intact
/// racks in `helpers`. Returns the restored state and the symbol counts of
/// all transfers.
pub fn repair<F: FiniteField>(
    spec: &CodeSpec<F>,
    state: &ClusterState<F>,
    helpers: &[usize],
) -> Result<(ClusterState<F>, RepairTranscript), CodecError> {
    let p = spec.params();
    let (d, ef, a) = (p.d(), p.failures_per_rack(), spec.alpha());
    state.check_shape(spec)?;
    let pattern = failure_pattern(spec, state)?;
    let failed: Vec<usize> = pattern.keys().copied().collect();

    let helper_set: BTreeSet<usize> = helpers.iter().copied().collect();
    if helpers.len() != d || helper_set.len() != d {
        return Err(CodecError::HelperCount {
            expected: d,
            got: helper_set.len(),
        });
    }
    for &j in &helper_set {
        if j >= p.r() {
            return Err(CodecError::BadHelper(j, "no such rack".into()));
        }
        if pattern.contains_key(&j) {
            return Err(CodecError::BadHelper(j, "rack is being repaired".into()));
        }
    }
    let helpers: Vec<usize> = helper_set.into_iter().collect();
    let nr = p.nodes_per_rack();
    let mut transcript = RepairTranscript::default();

    // Round 1: each helper relayer strips its parities and projects.
    // inbox1[l][h] = per matrix (u_lᵀ M_i v_j, v_lᵀ M_iᵀ u_j)
    let mut inbox1: BTreeMap<usize, Vec<Vec<(F, F)>>> = BTreeMap::new();
    for &j in &helpers {
        let clean =
            strip_parities(spec, j, state).map_err(|e| CodecError::BadHelper(j, e.to_string()))?;
        let full: Vec<Vec<F>> = clean
            .into_iter()
            .map(|c| {
                c.map(|c| complete_projection(spec, j, &c))
                    .ok_or_else(|| CodecError::BadHelper(j, "MBCR node erased".into()))
            })
            .collect::<Result<_, _>>()?;
        transcript.intra_rack.push((j, (nr - 1) * a));
        for &l in &failed {
            let (ul, vl) = (spec.u_col(l), spec.v_col(l));
            let payload: Vec<(F, F)> = full
                .iter()
                .map(|w| (dot(&ul, &w[..d]), dot(&vl, &w[d..])))
                .collect();
            transcript.round1.push(Transfer {
                from: j,
                to: l,
                symbols: 2 * payload.len(),
            });
            inbox1.entry(l).or_default().push(payload);
        }
    }

    // Each failed rack recovers M_i v_l from u_jᵀ M_i v_l over the helpers.
    let u_h = spec.u().select_columns(&helpers).transpose();
    let mut known: BTreeMap<usize, Projections<F>> = BTreeMap::new();
    for &l in &failed {
        let msgs = &inbox1[&l];
        let mv = (0..ef)
            .map(|i| {
                let rhs: Vec<F> = msgs.iter().map(|m| m[i].1).collect();
                u_h.solve(&rhs)
                    .map_err(|e| CodecError::Integrity(format!("helper U system: {e}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        known.insert(
            l,
            Projections {
                mv,
                mtu: Vec::new(),
            },
        );
    }

    // Round 2: failed racks exchange u_tᵀ M_i v_l.
    let mut inbox2: BTreeMap<usize, Vec<(usize, Vec<F>)>> = BTreeMap::new();
    for &l in &failed {
        for &t in failed.iter().filter(|&&t| t != l) {
            let ut = spec.u_col(t);
            let payload: Vec<F> = known[&l].mv.iter().map(|x| dot(&ut, x)).collect();
            transcript.round2.push(Transfer {
                from: l,
                to: t,
                symbols: payload.len(),
            });
            inbox2.entry(t).or_default().push((l, payload));
        }
    }

    // Each failed rack solves the V system over helpers, peers and itself.
    for &t in &failed {
        let ut = spec.u_col(t);
        let peers = inbox2.remove(&t).unwrap_or_default();
        let mut cols = helpers.clone();
        cols.extend(peers.iter().map(|(l, _)| *l));
        cols.push(t);
        let v_sys = spec.v().select_columns(&cols).transpose();
        let mtu = (0..ef)
            .map(|i| {
                let mut rhs: Vec<F> = inbox1[&t].iter().map(|m| m[i].0).collect();
                rhs.extend(peers.iter().map(|(_, pl)| pl[i]));
                rhs.push(dot(&ut, &known[&t].mv[i]));
                v_sys
                    .solve(&rhs)
                    .map_err(|e| CodecError::Integrity(format!("cooperative V system: {e}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        known.get_mut(&t).expect("inserted in round 1").mtu = mtu;
    }

    // In-rack restoration.
    let mut restored = state.clone();
    for (&l, lost) in &pattern {
        let proj = &known[&l];
        let w: Vec<Vec<F>> = (0..ef)
            .map(|i| {
                let mut w = proj.mv[i].clone();
                w.extend_from_slice(&proj.mtu[i]);
                w.truncate(a);
                w
            })
            .collect();
        let mut blocks = Vec::new();
        for b in (0..nr).filter(|b| !lost.contains(b)) {
            let stored = state.live(NodeId::new(l, b))?.to_vec();
            if b < ef {
                blocks.push((b, sub(&stored, &w[b])));
            } else {
                blocks.push((b, stored));
            }
        }
        let live_others = blocks.iter().filter(|(b, _)| *b != 0).count();
        let c = decode_rack_blocks(spec, l, &blocks)?;
        for &b in lost {
            let content = if b < ef {
                add(&w[b], &parity_block(spec, l, b, &c))
            } else {
                let t = b - ef;
                c[t * a..(t + 1) * a].to_vec()
            };
            restored.set(NodeId::new(l, b), Some(content));
        }
        transcript
            .intra_rack
            .push((l, live_others * a + lost.len() * a));
    }

    transcript.round1.sort_by_key(|t| (t.to, t.from));
    transcript.round2.sort_by_key(|t| (t.to, t.from));
    transcript.intra_rack.sort();
    Ok((restored, transcript))
}
