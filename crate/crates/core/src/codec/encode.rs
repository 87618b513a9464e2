use std::collections::HashSet;

use super::build::block_map;
use super::{ClusterState, CodeSpec, CodecError, NodeId};
use crate::field::FiniteField;
use crate::linalg::{dot, Matrix};
use crate::params::CodeParams;

/// A `d × (d+f)` product-matrix message
///
/// ```text
/// [ A  B ]    A: m × m,  B: m × (d+f−m)
/// [ C  0 ]    C: (d−m) × m
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct MessageMatrix<F> {
    m: Matrix<F>,
}

impl<F: FiniteField> MessageMatrix<F> {
    /// Fill `A`, then `B`, then `C`, each row-major. `symbols` must hold
    /// exactly `m(2d+f−m)` entries.
    pub fn from_symbols(p: &CodeParams, symbols: &[F]) -> Self {
        let (d, f, m) = (p.d(), p.f(), p.m());
        assert_eq!(
            symbols.len(),
            m * (2 * d + f - m),
            "message matrix symbol count"
        );
        let mut out = Matrix::zeros(d, d + f);
        let mut it = symbols.iter().copied();
        let blocks = [(0..m, 0..m), (0..m, m..d + f), (m..d, 0..m)];
        for (rows, cols) in blocks {
            for i in rows {
                for j in cols.clone() {
                    out[(i, j)] = it.next().expect("counted above");
                }
            }
        }
        MessageMatrix { m: out }
    }

    pub fn matrix(&self) -> &Matrix<F> {
        &self.m
    }

    pub fn nonzero_count(&self) -> usize {
        self.m.entries().iter().filter(|x| !x.is_zero()).count()
    }

    /// `[M v_l ; Mᵀ u_l]`, all `2d + f` entries.
    pub fn projections(&self, spec: &CodeSpec<F>, rack: usize) -> Vec<F> {
        let mut out = self.m.mul_vec(&spec.v_col(rack)).expect("V has d+f rows");
        out.extend(self.m.vec_mul(&spec.u_col(rack)).expect("U has d rows"));
        out
    }
}

pub(crate) fn global_symbols<F: FiniteField>(
    spec: &CodeSpec<F>,
    message: &[F],
) -> Result<Vec<F>, CodecError> {
    if message.len() != spec.file_size() {
        return Err(CodecError::MessageLength {
            expected: spec.file_size(),
            got: message.len(),
        });
    }
    Ok(spec.generator().vec_mul(message)?)
}

pub(crate) fn message_matrices<F: FiniteField>(
    spec: &CodeSpec<F>,
    globals: &[F],
) -> Vec<MessageMatrix<F>> {
    let lay = spec.layout();
    (0..spec.params().failures_per_rack())
        .map(|i| {
            let start = lay.direct_symbols + i * lay.matrix_symbols;
            MessageMatrix::from_symbols(spec.params(), &globals[start..start + lay.matrix_symbols])
        })
        .collect()
}

/// First `α` entries of `P_{i,l} c`.
pub(crate) fn parity_block<F: FiniteField>(
    spec: &CodeSpec<F>,
    rack: usize,
    i: usize,
    c: &[F],
) -> Vec<F> {
    let mut out = spec
        .parity(rack, i)
        .mul_vec(c)
        .expect("c spans the rack's global nodes");
    out.truncate(spec.alpha());
    out
}

pub(crate) fn add<F: FiniteField>(a: &[F], b: &[F]) -> Vec<F> {
    a.iter().zip(b).map(|(x, y)| *x + *y).collect()
}

pub(crate) fn sub<F: FiniteField>(a: &[F], b: &[F]) -> Vec<F> {
    a.iter().zip(b).map(|(x, y)| *x - *y).collect()
}

/// Rebuild the unstored last entry of `Mᵀ u_l` from the first `2d+f−1`
/// clean entries, using `u_lᵀ M v_l = v_lᵀ Mᵀ u_l`.
pub(crate) fn complete_projection<F: FiniteField>(
    spec: &CodeSpec<F>,
    rack: usize,
    clean: &[F],
) -> Vec<F> {
    let d = spec.params().d();
    let u = spec.u_col(rack);
    let v = spec.v_col(rack);
    let (mv, mtu) = clean.split_at(d);
    let lhs = dot(&u, mv);
    let last_v = *v.last().expect("V has at least one row");
    let partial = dot(&v[..v.len() - 1], mtu);
    let last = (lhs - partial) * last_v.try_inv().expect("rack points are nonzero");
    let mut out = clean.to_vec();
    out.push(last);
    out
}

pub fn encode<F: FiniteField>(
    spec: &CodeSpec<F>,
    message: &[F],
) -> Result<ClusterState<F>, CodecError> {
    let p = spec.params();
    let a = spec.alpha();
    let (nr, ef) = (p.nodes_per_rack(), p.failures_per_rack());
    let gn = spec.global_nodes();
    let globals = global_symbols(spec, message)?;
    let matrices = message_matrices(spec, &globals);
    let mut racks = Vec::with_capacity(p.r());
    for l in 0..p.r() {
        let c = &globals[l * gn * a..(l + 1) * gn * a];
        let mut rack: Vec<Option<Vec<F>>> = Vec::with_capacity(nr);
        for (i, mm) in matrices.iter().enumerate() {
            let w = mm.projections(spec, l);
            rack.push(Some(add(&w[..a], &parity_block(spec, l, i, c))));
        }
        debug_assert_eq!(rack.len(), ef);
        rack.extend(c.chunks(a).map(|chunk| Some(chunk.to_vec())));
        racks.push(rack);
    }
    Ok(ClusterState::from_racks(racks))
}

/// Concatenated contents of rack `l`'s global-symbol nodes.
pub(crate) fn rack_globals<F: FiniteField>(
    spec: &CodeSpec<F>,
    state: &ClusterState<F>,
    rack: usize,
) -> Result<Vec<F>, CodecError> {
    let ef = spec.params().failures_per_rack();
    let mut c = Vec::with_capacity(spec.global_nodes() * spec.alpha());
    for t in 0..spec.global_nodes() {
        c.extend_from_slice(state.live(NodeId::new(rack, ef + t))?);
    }
    Ok(c)
}

/// Remove local parities from the live MBCR nodes of rack `l`, giving the
/// stored `2d+f−1` entries of `[M_i v_l ; M_iᵀ u_l]` (`None` for erased
/// nodes). All global nodes of the rack must be live.
pub fn strip_parities<F: FiniteField>(
    spec: &CodeSpec<F>,
    rack: usize,
    state: &ClusterState<F>,
) -> Result<Vec<Option<Vec<F>>>, CodecError> {
    let c = rack_globals(spec, state, rack)?;
    (0..spec.params().failures_per_rack())
        .map(|i| match state.get(NodeId::new(rack, i)) {
            None => Ok(None),
            Some(stored) => Ok(Some(sub(stored, &parity_block(spec, rack, i, &c)))),
        })
        .collect()
}

/// Recover rack `l`'s global blocks from any `n/r − e/f` of its blocks.
/// `known` pairs a block index (node index within the rack) with its
/// content: the stored symbols of a global node, or the parity part of an
/// MBCR node.
pub(crate) fn decode_rack_blocks<F: FiniteField>(
    spec: &CodeSpec<F>,
    rack: usize,
    known: &[(usize, Vec<F>)],
) -> Result<Vec<F>, CodecError> {
    let blocks: Vec<usize> = known.iter().map(|(b, _)| *b).collect();
    let rhs: Vec<F> = known.iter().flat_map(|(_, c)| c.iter().copied()).collect();
    block_map(spec, rack, &blocks)
        .solve_full_column_rank(&rhs)
        .map_err(|e| CodecError::Integrity(format!("rack {} blocks {:?}: {e}", rack + 1, blocks)))
}

/// Recover the message from exactly `k` live nodes.
pub fn collect<F: FiniteField>(
    spec: &CodeSpec<F>,
    state: &ClusterState<F>,
    nodes: &[NodeId],
) -> Result<Vec<F>, CodecError> {
    let k = spec.params().k();
    let distinct: HashSet<_> = nodes.iter().collect();
    if nodes.len() != k || distinct.len() != k {
        return Err(CodecError::CollectorSize {
            expected: k,
            got: distinct.len(),
        });
    }
    let mut values = Vec::with_capacity(k * spec.alpha());
    for n in nodes {
        spec.check_node(*n)?;
        values.extend_from_slice(state.live(*n)?);
    }
    if nodes.iter().all(|n| !spec.is_mbcr_node(*n)) {
        return mds_decode(spec, nodes, &values);
    }
    spec.collector_matrix(nodes)
        .solve_full_column_rank(&values)
        .map_err(|e| CodecError::Integrity(format!("collector matrix: {e}")))
}

/// Global-only collectors: pick `B` of the observed global symbols and
/// invert the corresponding columns of the outer generator.
fn mds_decode<F: FiniteField>(
    spec: &CodeSpec<F>,
    nodes: &[NodeId],
    values: &[F],
) -> Result<Vec<F>, CodecError> {
    let a = spec.alpha();
    let (ef, gn) = (spec.params().failures_per_rack(), spec.global_nodes());
    let b = spec.file_size();
    let positions: Vec<usize> = nodes
        .iter()
        .flat_map(|n| {
            let base = (n.rack * gn + n.node - ef) * a;
            base..base + a
        })
        .take(b)
        .collect();
    let system = spec.generator().select_columns(&positions).transpose();
    system
        .solve(&values[..b])
        .map_err(|e| CodecError::Integrity(format!("outer code: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::build_code;
    use crate::field::Gf256;
    use itertools::Itertools;
    use num_traits::Zero;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn spec() -> CodeSpec<Gf256> {
        build_code(&CodeParams::parse("8,4,2,4,2,2").unwrap(), 7).unwrap()
    }

    fn random_message(spec: &CodeSpec<Gf256>, seed: u64) -> Vec<Gf256> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..spec.file_size())
            .map(|_| Gf256::random(&mut rng))
            .collect()
    }

    #[test]
    fn message_matrix_layout() {
        let p = CodeParams::parse("8,4,2,4,2,2").unwrap();
        // m = 2, d = 2, f = 2: A is 2x2, B is 2x2, C is empty
        let syms: Vec<Gf256> = (1..=8).map(Gf256::element).collect();
        let mm = MessageMatrix::from_symbols(&p, &syms);
        let rows: Vec<Vec<u64>> = (0..2)
            .map(|i| mm.matrix().row(i).iter().map(|x| x.value()).collect())
            .collect();
        assert_eq!(rows, vec![vec![1, 2, 5, 6], vec![3, 4, 7, 8]]);

        let p = CodeParams::parse("12,4,3,6,2,1").unwrap();
        // m = 2, d = 3, f = 1: zero block is 1x2
        assert_eq!(p.m(), 2);
        let syms: Vec<Gf256> = (1..=10).map(Gf256::element).collect();
        let mm = MessageMatrix::from_symbols(&p, &syms);
        assert_eq!(mm.nonzero_count(), 10);
        assert!(mm.matrix()[(2, 2)].is_zero() && mm.matrix()[(2, 3)].is_zero());
        assert_eq!(mm.matrix()[(2, 0)].value(), 9);
    }

    #[test]
    fn zero_message_gives_zero_cluster() {
        let s = spec();
        let state = encode(&s, &[Gf256::zero(); 18]).unwrap();
        for n in s.nodes() {
            assert!(state.get(n).unwrap().iter().all(|x| x.is_zero()));
        }
    }

    #[test]
    fn wrong_length_rejected() {
        let s = spec();
        assert_eq!(
            encode(&s, &[Gf256::zero(); 17]).unwrap_err(),
            CodecError::MessageLength {
                expected: 18,
                got: 17
            }
        );
    }

    #[test]
    fn encoding_is_linear() {
        let s = spec();
        let x = random_message(&s, 1);
        let y = random_message(&s, 2);
        let sum: Vec<Gf256> = x.iter().zip(&y).map(|(a, b)| *a + *b).collect();
        let (ex, ey, es) = (
            encode(&s, &x).unwrap(),
            encode(&s, &y).unwrap(),
            encode(&s, &sum).unwrap(),
        );
        for n in s.nodes() {
            assert_eq!(
                add(ex.get(n).unwrap(), ey.get(n).unwrap()),
                es.get(n).unwrap()
            );
        }
    }

    #[test]
    fn every_node_stores_alpha_symbols() {
        let s = spec();
        let state = encode(&s, &random_message(&s, 3)).unwrap();
        state.check_shape(&s).unwrap();
        assert_eq!(s.nodes().count() * s.alpha(), 8 * 5);
    }

    #[test]
    fn strip_matches_plaintext_projections() {
        let s = spec();
        for seed in 0..10 {
            let msg = random_message(&s, seed);
            let state = encode(&s, &msg).unwrap();
            let mats = message_matrices(&s, &global_symbols(&s, &msg).unwrap());
            for l in 0..4 {
                let clean = strip_parities(&s, l, &state).unwrap();
                for (i, c) in clean.iter().enumerate() {
                    let direct = mats[i].projections(&s, l);
                    let c = c.as_ref().unwrap();
                    assert_eq!(c[..], direct[..s.alpha()]);
                    assert_eq!(complete_projection(&s, l, c), direct);
                }
            }
        }
    }

    #[test]
    fn strip_without_parities_is_identity() {
        let s = spec().without_parities();
        let state = encode(&s, &random_message(&s, 4)).unwrap();
        for l in 0..4 {
            let clean = strip_parities(&s, l, &state).unwrap();
            assert_eq!(clean[0].as_deref(), state.get(NodeId::new(l, 0)));
        }
    }

    #[test]
    fn strip_needs_global_nodes() {
        let s = spec();
        let mut state = encode(&s, &random_message(&s, 5)).unwrap();
        state.set(NodeId::new(2, 1), None);
        assert_eq!(
            strip_parities(&s, 2, &state).unwrap_err(),
            CodecError::Erased(NodeId::new(2, 1))
        );
    }

    #[test]
    fn all_collectors_recover() {
        let s = spec();
        let msg = random_message(&s, 6);
        let state = encode(&s, &msg).unwrap();
        let all: Vec<NodeId> = s.nodes().collect();
        let mut count = 0;
        for set in all.into_iter().combinations(4) {
            assert_eq!(collect(&s, &state, &set).unwrap(), msg, "{set:?}");
            count += 1;
        }
        assert_eq!(count, 70);
    }

    #[test]
    fn global_only_collector_uses_outer_code() {
        let s = spec();
        let msg = random_message(&s, 8);
        let state = encode(&s, &msg).unwrap();
        let set: Vec<NodeId> = (0..4).map(|l| NodeId::new(l, 1)).collect();
        assert_eq!(
            mds_decode(
                &s,
                &set,
                &set.iter()
                    .flat_map(|n| state.get(*n).unwrap().to_vec())
                    .collect_vec()
            )
            .unwrap(),
            msg
        );
    }

    #[test]
    fn fewer_than_k_nodes_lose_information() {
        let s = spec();
        let all: Vec<NodeId> = s.nodes().collect();
        for set in all.into_iter().combinations(3) {
            assert!(s.collector_matrix(&set).rank() < s.file_size());
        }
    }

    #[test]
    fn collector_errors() {
        let s = spec();
        let mut state = encode(&s, &random_message(&s, 9)).unwrap();
        let set = [
            NodeId::new(0, 0),
            NodeId::new(1, 0),
            NodeId::new(2, 0),
            NodeId::new(3, 0),
        ];
        state.set(NodeId::new(3, 0), None);
        assert_eq!(
            collect(&s, &state, &set).unwrap_err(),
            CodecError::Erased(NodeId::new(3, 0))
        );
        assert!(matches!(
            collect(&s, &state, &set[..3]),
            Err(CodecError::CollectorSize { .. })
        ));
        let dup = [set[0], set[0], set[1], set[2]];
        assert!(matches!(
            collect(&s, &state, &dup),
            Err(CodecError::CollectorSize { .. })
        ));
    }

    #[test]
    fn vector_mds_every_subset() {
        let s = spec();
        let msg = random_message(&s, 10);
        let state = encode(&s, &msg).unwrap();
        let mats = message_matrices(&s, &global_symbols(&s, &msg).unwrap());
        let a = s.alpha();
        for l in 0..4 {
            let c = rack_globals(&s, &state, l).unwrap();
            let block = |b: usize| -> Vec<Gf256> {
                if b == 0 {
                    sub(
                        state.get(NodeId::new(l, 0)).unwrap(),
                        &mats[0].projections(&s, l)[..a],
                    )
                } else {
                    c[(b - 1) * a..b * a].to_vec()
                }
            };
            for b in 0..2 {
                assert_eq!(decode_rack_blocks(&s, l, &[(b, block(b))]).unwrap(), c);
            }
        }
    }
}
