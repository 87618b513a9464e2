use itertools::Itertools;
use num_integer::binomial;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{encode, CodeSpec, CodecError, NodeId};
use crate::field::FiniteField;
use crate::linalg::{
    all_column_subsets_invertible, check_u_property, check_v_property, mds_generator_on,
    vandermonde, Matrix,
};
use crate::params::{construction_params, CodeParams};

/// Coefficient draws tried after the structured choice fails verification.
pub const MAX_RESAMPLES: usize = 24;

const EXHAUSTIVE_COLLECTORS: u64 = 10_000;
const SAMPLED_COLLECTORS: usize = 1000;

struct Coefficients<F> {
    g_points: Vec<F>,
    uv_points: Vec<F>,
    cauchy_x: Vec<F>,
    cauchy_y: Vec<F>,
    /// Per-rack row scaling of the Cauchy matrix; distinct racks must see
    /// distinct parity combinations.
    rack_scale: Vec<F>,
}

fn structured<F: FiniteField>(global: usize, r: usize, ef: usize, nr: usize) -> Coefficients<F> {
    Coefficients {
        g_points: (1..=global as u64).map(F::element).collect(),
        uv_points: (1..=r as u64).map(F::element).collect(),
        cauchy_x: (0..ef as u64).map(F::element).collect(),
        cauchy_y: (ef as u64..nr as u64).map(F::element).collect(),
        rack_scale: (1..=r as u64).map(F::element).collect(),
    }
}

fn drawn<F: FiniteField>(
    seed: u64,
    attempt: usize,
    global: usize,
    r: usize,
    ef: usize,
    nr: usize,
) -> Coefficients<F> {
    let mut rng =
        ChaCha8Rng::seed_from_u64(seed ^ (attempt as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let nonzero = |rng: &mut ChaCha8Rng, count: usize| -> Vec<F> {
        sample(rng, (F::ORDER - 1) as usize, count)
            .into_iter()
            .map(|v| F::element(v as u64 + 1))
            .collect()
    };
    let g_points = nonzero(&mut rng, global);
    let uv_points = nonzero(&mut rng, r);
    let rack_scale = nonzero(&mut rng, r);
    let cauchy: Vec<F> = sample(&mut rng, F::ORDER as usize, nr)
        .into_iter()
        .map(|v| F::element(v as u64))
        .collect();
    Coefficients {
        g_points,
        uv_points,
        cauchy_x: cauchy[..ef].to_vec(),
        cauchy_y: cauchy[ef..].to_vec(),
        rack_scale,
    }
}

/// Generate and verify the code for `p` over `F`.
///
/// The first attempt uses fixed evaluation points; if any verification fails
/// the points and parity coefficients are redrawn from a generator seeded by
/// `seed`, up to [`MAX_RESAMPLES`] times.
pub fn build_code<F: FiniteField>(p: &CodeParams, seed: u64) -> Result<CodeSpec<F>, CodecError> {
    let nr = p.nodes_per_rack();
    let ef = p.failures_per_rack();
    if ef == nr {
        return Err(CodecError::NoGlobalNodes);
    }
    let layout = construction_params(p);
    if let Some((nodes, bound)) = deficient_collector(p) {
        return Err(CodecError::CollectorDeficit {
            collector: nodes.iter().join(", "),
            bound,
            file_size: layout.file_size,
        });
    }
    let usable = F::ORDER - 1;
    let too_small = |what: String| CodecError::FieldTooSmall {
        order: F::ORDER,
        what,
    };
    if layout.global_symbols as u64 > usable {
        return Err(too_small(format!(
            "{} distinct nonzero points needed for the outer code",
            layout.global_symbols
        )));
    }
    if p.r() as u64 > usable {
        return Err(too_small(format!(
            "{} distinct nonzero rack points needed",
            p.r()
        )));
    }
    if nr as u64 > F::ORDER {
        return Err(too_small(format!("{nr} distinct parity points needed")));
    }

    let mut last_reason = String::new();
    for attempt in 0..=MAX_RESAMPLES {
        let coeffs = if attempt == 0 {
            structured::<F>(layout.global_symbols, p.r(), ef, nr)
        } else {
            drawn::<F>(seed, attempt, layout.global_symbols, p.r(), ef, nr)
        };
        let spec = assemble(p, seed, attempt, coeffs)?;
        match verify(&spec) {
            Ok(()) => return Ok(spec),
            Err(reason) => last_reason = reason,
        }
    }
    Err(CodecError::VerificationExhausted {
        attempts: MAX_RESAMPLES + 1,
        reason: last_reason,
    })
}

/// Upper bound on the rank of the collector `nodes`, valid for every choice
/// of field and coefficients.
///
/// Symbols of rack `l` depend on the message only through the rack's
/// `(n/r − e/f)α` global symbols and the message matrices. The projections
/// of `M_i` seen by `j` racks share two symbols per pair of racks, so they
/// span at most `jα − j(j−1)` dimensions, which is all `m(2d+f−m)` entries
/// once `j = m`.
pub fn collector_rank_bound(p: &CodeParams, nodes: &[NodeId]) -> usize {
    let ef = p.failures_per_rack();
    let lay = construction_params(p);
    let a = lay.alpha;
    let gn = p.nodes_per_rack() - ef;
    let mut per_rack = vec![0usize; p.r()];
    let mut per_matrix = vec![0usize; ef];
    for n in nodes {
        per_rack[n.rack] += 1;
        if n.node < ef {
            per_matrix[n.node] += 1;
        }
    }
    let globals: usize = per_rack.iter().map(|&s| s.min(gn) * a).sum();
    let matrices: usize = per_matrix
        .iter()
        .map(|&j| {
            // Racks holding the same matrix share u_l' M v_l cross terms.
            let j = j.min(p.m());
            j * a - j * j.saturating_sub(1)
        })
        .sum();
    globals + matrices
}

/// A `k`-node collector whose [`collector_rank_bound`] is below `B`, with
/// that bound. Only the per-rack counts of parity and global nodes matter,
/// so racks are enumerated as a multiset of `(parity, global)` shapes with
/// parity nodes packed onto the lowest indices.
pub fn deficient_collector(p: &CodeParams) -> Option<(Vec<NodeId>, usize)> {
    let ef = p.failures_per_rack();
    let gn = p.nodes_per_rack() - ef;
    let b = construction_params(p).file_size;
    let shapes: Vec<(usize, usize)> = (0..=ef)
        .cartesian_product(0..=gn)
        .filter(|(x, y)| x + y > 0)
        .collect();

    fn realize(shapes: &[(usize, usize)], ef: usize) -> Vec<NodeId> {
        shapes
            .iter()
            .enumerate()
            .flat_map(|(l, &(x, y))| (0..x).chain(ef..ef + y).map(move |i| NodeId::new(l, i)))
            .collect()
    }

    fn search(
        p: &CodeParams,
        shapes: &[(usize, usize)],
        from: usize,
        left: usize,
        chosen: &mut Vec<(usize, usize)>,
        b: usize,
    ) -> Option<(Vec<NodeId>, usize)> {
        let ef = p.failures_per_rack();
        if left == 0 {
            let nodes = realize(chosen, ef);
            let bound = collector_rank_bound(p, &nodes);
            return (bound < b).then_some((nodes, bound));
        }
        if chosen.len() == p.r() {
            return None;
        }
        for (idx, &(x, y)) in shapes.iter().enumerate().skip(from) {
            if x + y > left {
                continue;
            }
            chosen.push((x, y));
            let found = search(p, shapes, idx, left - x - y, chosen, b);
            chosen.pop();
            if found.is_some() {
                return found;
            }
        }
        None
    }

    search(p, &shapes, 0, p.k(), &mut Vec::new(), b)
}

fn cauchy<F: FiniteField>(xs: &[F], ys: &[F]) -> Matrix<F> {
    Matrix::from_fn(xs.len(), ys.len(), |i, t| {
        (xs[i] - ys[t])
            .try_inv()
            .expect("Cauchy points must be distinct")
    })
}

/// Block-scalar parity map: block `t` of `c` scaled by `λ[i][t]`, summed
/// position-wise into the first `α` rows. The last row stays zero.
fn block_scalar<F: FiniteField>(lambda: &Matrix<F>, i: usize, alpha: usize) -> Matrix<F> {
    let blocks = lambda.cols();
    Matrix::from_fn(alpha + 1, blocks * alpha, |row, col| {
        if row < alpha && col % alpha == row {
            lambda[(i, col / alpha)]
        } else {
            F::zero()
        }
    })
}

fn assemble<F: FiniteField>(
    p: &CodeParams,
    seed: u64,
    attempt: usize,
    c: Coefficients<F>,
) -> Result<CodeSpec<F>, CodecError> {
    let layout = construction_params(p);
    let ef = p.failures_per_rack();
    let g = mds_generator_on(layout.file_size, &c.g_points)?;
    let u = vandermonde(p.d(), &c.uv_points)?;
    let v = vandermonde(p.d() + p.f(), &c.uv_points)?;
    let base = cauchy(&c.cauchy_x, &c.cauchy_y);
    // Row scaling keeps every square submatrix nonsingular.
    let lambda: Vec<Matrix<F>> = c
        .rack_scale
        .iter()
        .map(|th| Matrix::from_fn(ef, base.cols(), |i, t| th.pow(i as u64) * base[(i, t)]))
        .collect();
    let parity = lambda
        .iter()
        .map(|lam| {
            (0..ef)
                .map(|i| block_scalar(lam, i, layout.alpha))
                .collect()
        })
        .collect();
    let mut spec = CodeSpec {
        params: *p,
        seed,
        attempt,
        layout,
        g,
        u,
        v,
        lambda,
        parity,
        functionals: Matrix::zeros(0, 0),
    };
    spec.functionals = functionals(&spec);
    Ok(spec)
}

/// Node contents as functionals of the message, obtained by encoding unit
/// vectors.
pub(super) fn functionals<F: FiniteField>(spec: &CodeSpec<F>) -> Matrix<F> {
    let b = spec.file_size();
    let a = spec.alpha();
    let n = spec.params.n();
    let mut out = Matrix::zeros(n * a, b);
    for col in 0..b {
        let mut msg = vec![F::zero(); b];
        msg[col] = F::one();
        let state = encode(spec, &msg).expect("unit message has length B");
        for node in spec.nodes() {
            let content = state.get(node).expect("fresh encoding has no erasures");
            let base = spec.node_index(node) * a;
            for (pos, x) in content.iter().enumerate() {
                out[(base + pos, col)] = *x;
            }
        }
    }
    out
}

/// Every construction-time property; returns a human-readable reason on the
/// first failure.
fn verify<F: FiniteField>(spec: &CodeSpec<F>) -> Result<(), String> {
    let p = &spec.params;
    let (m, d, f) = (p.m(), p.d(), p.f());
    if !all_column_subsets_invertible(&spec.g, spec.file_size()) {
        return Err("outer generator is not MDS".into());
    }
    if !check_u_property(&spec.u, m, d).map_err(|e| e.to_string())? {
        return Err("U lacks the required invertible submatrices".into());
    }
    if !check_v_property(&spec.v, m, d, f).map_err(|e| e.to_string())? {
        return Err("V lacks the required invertible submatrices".into());
    }
    for (l, rack) in spec.parity.iter().enumerate() {
        for (i, pm) in rack.iter().enumerate() {
            if pm.row(pm.rows() - 1).iter().any(|x| !x.is_zero()) {
                return Err(format!(
                    "parity matrix ({}, {}) has a nonzero last row",
                    i + 1,
                    l + 1
                ));
            }
        }
        if let Some(blocks) = vector_mds_failure(spec, l) {
            return Err(format!(
                "rack {}: blocks {:?} do not determine the rest",
                l + 1,
                blocks.iter().map(|b| b + 1).collect_vec()
            ));
        }
    }
    if let Some(nodes) = collector_failure(spec) {
        return Err(format!(
            "collector {{{}}} has rank below B = {}",
            nodes.iter().join(", "),
            spec.file_size()
        ));
    }
    Ok(())
}

/// Stacks the maps from rack `l`'s global blocks to the listed blocks
/// (block `b < e/f` is parity `b`, otherwise global block `b − e/f`).
pub(super) fn block_map<F: FiniteField>(
    spec: &CodeSpec<F>,
    l: usize,
    blocks: &[usize],
) -> Matrix<F> {
    let ef = spec.params.failures_per_rack();
    let a = spec.alpha();
    let width = spec.global_nodes() * a;
    let mut rows: Vec<Vec<F>> = Vec::with_capacity(blocks.len() * a);
    for &b in blocks {
        if b < ef {
            let pm = &spec.parity[l][b];
            rows.extend((0..a).map(|r| pm.row(r).to_vec()));
        } else {
            let t = b - ef;
            rows.extend((0..a).map(|pos| {
                let mut row = vec![F::zero(); width];
                row[t * a + pos] = F::one();
                row
            }));
        }
    }
    Matrix::from_rows(rows).expect("rows share the block width")
}

fn vector_mds_failure<F: FiniteField>(spec: &CodeSpec<F>, l: usize) -> Option<Vec<usize>> {
    let nr = spec.params.nodes_per_rack();
    let need = spec.global_nodes();
    (0..nr)
        .combinations(need)
        .find(|blocks| block_map(spec, l, blocks).rank() < need * spec.alpha())
}

fn collector_failure<F: FiniteField>(spec: &CodeSpec<F>) -> Option<Vec<NodeId>> {
    let p = &spec.params;
    let all: Vec<NodeId> = spec.nodes().collect();
    let b = spec.file_size();
    let full_rank = |set: &[NodeId]| spec.collector_matrix(set).rank() == b;
    if binomial(p.n() as u64, p.k() as u64) <= EXHAUSTIVE_COLLECTORS {
        all.iter()
            .copied()
            .combinations(p.k())
            .find(|set| !full_rank(set))
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0xc011_ec70);
        (0..SAMPLED_COLLECTORS).find_map(|_| {
            let mut idx = sample(&mut rng, all.len(), p.k()).into_vec();
            idx.sort_unstable();
            let set: Vec<NodeId> = idx.into_iter().map(|i| all[i]).collect();
            (!full_rank(&set)).then_some(set)
        })
    }
}
