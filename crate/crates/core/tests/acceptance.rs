//! End-to-end acceptance checks. Runs without the libtest harness so every
//! criterion prints one PASS/FAIL line; exits non-zero if any fails.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::process::ExitCode;

use itertools::Itertools;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rackcoop::codec::{
    build_code, collect, encode, erase, repair, strip_parities, CodeSpec, MessageMatrix, NodeId,
};
use rackcoop::field::{FiniteField, Gf256};
use rackcoop::harness::cli;
use rackcoop::ifg::worst_case_mincut;
use rackcoop::linalg::{dot, Matrix};
use rackcoop::params::{construction_params, mbrcr_point, msrcr_point, CodeParams};
use rackcoop::scalar::Field;
use rackcoop::tradeoff::{compositions, max_file_size, min_gamma_given_alpha};
use rackcoop::Rational;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn q(n: i128, d: i128) -> Rational {
    Rational::new(n, d)
}

fn qi(n: usize) -> Rational {
    q(n as i128, 1)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Every valid tuple with `n ≤ max_n` and `r ≤ max_r`.
fn valid_tuples(max_n: usize, max_r: usize) -> Vec<CodeParams> {
    let mut out = Vec::new();
    for n in 1..=max_n {
        for r in (1..=max_r).filter(|r| n % r == 0) {
            for (k, d, f) in (1..=n)
                .cartesian_product(1..=r)
                .cartesian_product(1..=r)
                .map(|((k, d), f)| (k, d, f))
            {
                for e in (f..=n).step_by(f) {
                    if let Ok(p) = CodeParams::validate(n, k, d, r, e, f) {
                        out.push(p);
                    }
                }
            }
        }
    }
    out
}

fn reference() -> CodeParams {
    CodeParams::validate(8, 4, 2, 4, 2, 2).unwrap()
}

fn construction_point_identity() -> Check {
    let tuples = valid_tuples(24, 8);
    for p in &tuples {
        let ef = p.failures_per_rack();
        let (k, d, f, m) = (p.k(), p.d(), p.f(), p.m());
        let alpha = 2 * d + f - 1;
        let b = k * alpha - ef * m * (m - 1);
        let lay = construction_params(p);
        ensure(
            (lay.file_size, lay.alpha, lay.beta1, lay.beta2) == (b, alpha, 2 * ef, ef),
            || format!("{p}: layout {lay:?}"),
        )?;
        let pt = mbrcr_point(p, &qi(b)).map_err(|e| e.to_string())?;
        ensure(
            (pt.alpha, pt.beta1, pt.beta2) == (qi(alpha), qi(2 * ef), qi(ef)),
            || format!("{p}: B = {b} gives {pt}"),
        )?;
    }
    ensure(tuples.len() >= 50, || {
        format!("only {} tuples", tuples.len())
    })?;
    Ok(format!("{} tuples", tuples.len()))
}

fn corner_reductions() -> Check {
    let mut checked = 0;
    for b in [1i128, 7, 18, 60] {
        let bq = q(b, 1);
        for p in valid_tuples(12, 12) {
            let (n, k, d, r, e, f, m) = (p.n(), p.k(), p.d(), p.r(), p.e(), p.f(), p.m());
            let (k, d, e, m) = (k as i128, d as i128, e as i128, m as i128);
            if n == r && e as usize == f {
                // cooperative codes without racks
                let mbr = mbrcr_point(&p, &bq).unwrap();
                let want = q(b * (2 * d + e - 1), k * (2 * d + e - k));
                ensure(mbr.alpha == want && mbr.gamma == want, || {
                    format!("{p}: {mbr}")
                })?;
                let msr = msrcr_point(&p, &bq).unwrap();
                let want = q(b * (d + e - 1), k * (d + e - k));
                ensure(msr.gamma == want, || format!("{p}: {msr}"))?;
                checked += 1;
            }
            if e == 1 && f == 1 {
                // rack-aware codes with single failures
                let msr = msrcr_point(&p, &bq).unwrap();
                ensure(
                    msr.alpha == q(b, k) && msr.gamma == q(b * d, k * (d - m + 1)),
                    || format!("{p}: {msr}"),
                )?;
                let mbr = mbrcr_point(&p, &bq).unwrap();
                let want = q(2 * b * d, 2 * (k - m) * d + m * (2 * d - m + 1));
                ensure(mbr.gamma == want && mbr.alpha == want, || {
                    format!("{p}: {mbr}")
                })?;
                checked += 1;
            }
        }
    }
    ensure(checked > 0, || "no tuples".into())?;
    Ok(format!("{checked} (tuple, B) pairs"))
}

/// Tuples whose partial rack in the canonical collector has no more nodes
/// than the rack's global nodes.
const BOUND_TUPLES: [&str; 7] = [
    "8,4,2,4,2,2",
    "8,5,2,4,2,2",
    "10,4,3,5,4,2",
    "10,5,3,5,2,2",
    "6,3,3,6,3,3",
    "6,4,4,6,2,2",
    "8,4,4,8,4,4",
];

fn bound_oracle_agreement() -> Check {
    let mut points = 0;
    for t in BOUND_TUPLES {
        let p = CodeParams::parse(t).map_err(|e| format!("{t}: {e}"))?;
        let b = qi(construction_params(&p).file_size);
        let msr = msrcr_point(&p, &b).unwrap();
        let mbr = mbrcr_point(&p, &b).unwrap();
        let corners = [
            (msr.alpha, msr.beta1, msr.beta2),
            (mbr.alpha, mbr.beta1, mbr.beta2),
        ];
        let mut grid = corners.to_vec();
        for t in 1..6 {
            let alpha = msr.alpha + (mbr.alpha - msr.alpha) * q(t, 6);
            let opt = min_gamma_given_alpha(&p, &b, &alpha).map_err(|e| e.to_string())?;
            grid.push((alpha, opt.beta1, opt.beta2));
        }
        for (a, b1, b2) in corners {
            grid.push((a, b1 * q(3, 2), b2 * q(3, 2)));
            grid.push((a * q(2, 1), b1, b2));
            grid.push((a, b1 / q(2, 1), b2));
        }
        for (a, b1, b2) in [(1, 0, 0), (2, 1, 1), (3, 1, 0), (4, 2, 1), (5, 2, 1)] {
            grid.push((q(a, 1), q(b1, 1), q(b2, 1)));
        }
        let halved: Vec<_> = corners
            .iter()
            .map(|(a, b1, b2)| (*a, *b1, *b2 / q(2, 1)))
            .collect();
        grid.extend(halved.iter().cloned());

        for (a, b1, b2) in &grid {
            let oracle = worst_case_mincut(&p, a, b1, b2, p.m()).map_err(|e| e.to_string())?;
            let bound = max_file_size(&p, a, b1, b2).value;
            ensure(oracle.value == bound, || {
                format!(
                    "{p} at ({a}, {b1}, {b2}): oracle {} bound {bound}\n{}",
                    oracle.value, oracle.scenario
                )
            })?;
        }
        for (a, b1, b2) in &halved {
            if p.f() > 1 {
                let v = max_file_size(&p, a, b1, b2).value;
                ensure(v < b, || {
                    format!("{p}: halving beta2 at alpha = {a} keeps {v} >= {b}")
                })?;
            }
        }
        points += grid.len();
    }
    Ok(format!("{} tuples, {points} points", BOUND_TUPLES.len()))
}

fn random_message<F: FiniteField>(spec: &CodeSpec<F>, seed: u64) -> Vec<F> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..spec.file_size()).map(|_| F::random(&mut rng)).collect()
}

fn reference_code() -> CodeSpec<Gf256> {
    build_code::<Gf256>(&reference(), 2024).unwrap()
}

fn collect_roundtrip() -> Check {
    let spec = reference_code();
    let msg = random_message(&spec, 1);
    let state = encode(&spec, &msg).map_err(|e| e.to_string())?;
    let nodes: Vec<NodeId> = spec.nodes().collect();
    let mut count = 0;
    for subset in nodes.iter().copied().combinations(4) {
        let got = collect(&spec, &state, &subset).map_err(|e| format!("{subset:?}: {e}"))?;
        ensure(got == msg, || format!("{subset:?}: wrong message"))?;
        count += 1;
    }
    ensure(count == 70, || format!("{count} collectors"))?;
    Ok(format!("{count} collectors, B = {}", msg.len()))
}

fn exact_repair_bandwidth() -> Check {
    let spec = reference_code();
    let msg = random_message(&spec, 2);
    let state = encode(&spec, &msg).map_err(|e| e.to_string())?;
    let mut patterns = 0;
    for racks in (0..4).combinations(2) {
        let helpers: Vec<usize> = (0..4).filter(|l| !racks.contains(l)).collect();
        for (a, b) in (0..2).cartesian_product(0..2) {
            let failed = [NodeId::new(racks[0], a), NodeId::new(racks[1], b)];
            let broken = erase(&state, &failed);
            let (fixed, t) =
                repair(&spec, &broken, &helpers).map_err(|e| format!("{failed:?}: {e}"))?;
            ensure(fixed == state, || format!("{failed:?}: state differs"))?;
            for &l in &racks {
                ensure(t.cross_rack_download().get(&l) == Some(&5), || {
                    format!("{failed:?}: {t:?}")
                })?;
            }
            for tr in &t.round1 {
                ensure(
                    helpers.contains(&tr.from) && racks.contains(&tr.to) && tr.symbols == 2,
                    || format!("{failed:?}: round 1 {tr:?}"),
                )?;
            }
            for tr in &t.round2 {
                ensure(
                    racks.contains(&tr.from) && racks.contains(&tr.to) && tr.symbols == 1,
                    || format!("{failed:?}: round 2 {tr:?}"),
                )?;
            }
            ensure(t.round1.len() == 4 && t.round2.len() == 2, || {
                format!("{failed:?}: {t:?}")
            })?;
            patterns += 1;
        }
    }
    ensure(patterns == 24, || format!("{patterns} patterns"))?;
    Ok(format!("{patterns} patterns"))
}

/// The message matrices, computed straight from the generator.
fn message_matrices(spec: &CodeSpec<Gf256>, msg: &[Gf256]) -> Vec<MessageMatrix<Gf256>> {
    let globals = spec.generator().vec_mul(msg).unwrap();
    let lay = spec.layout();
    (0..spec.params().failures_per_rack())
        .map(|i| {
            let start = lay.direct_symbols + i * lay.matrix_symbols;
            MessageMatrix::from_symbols(spec.params(), &globals[start..start + lay.matrix_symbols])
        })
        .collect()
}

fn dependence_relation() -> Check {
    let spec = reference_code();
    let (d, a) = (spec.params().d(), spec.alpha());
    let mut checks = 0;
    for seed in 0..100 {
        let msg = random_message(&spec, 1000 + seed);
        let state = encode(&spec, &msg).map_err(|e| e.to_string())?;
        let mats = message_matrices(&spec, &msg);
        for l in 0..spec.params().r() {
            let clean = strip_parities(&spec, l, &state).map_err(|e| e.to_string())?;
            let (u, v) = (spec.u_col(l), spec.v_col(l));
            for (i, c) in clean.iter().enumerate() {
                let c = c.as_ref().ok_or("unexpected erasure")?;
                let direct = mats[i].projections(&spec, l);
                ensure(c[..] == direct[..a], || {
                    format!("rack {l} matrix {i}: stored part")
                })?;
                // u_l . (M v_l) = v_l . (M^T u_l), solved for the last term
                let (mv, mtu) = c.split_at(d);
                let last =
                    (dot(&u, mv) - dot(&v[..v.len() - 1], mtu)) * v[v.len() - 1].try_inv().unwrap();
                ensure(last == direct[a], || {
                    format!("rack {l} matrix {i}: dropped symbol")
                })?;
                checks += 1;
            }
        }
    }
    Ok(format!("{checks} reconstructions"))
}

fn vector_mds() -> Check {
    let mut subsets = 0;
    for t in ["8,4,2,4,2,2", "6,3,2,3,1,1", "16,8,2,4,4,2"] {
        let p = CodeParams::parse(t).unwrap();
        let spec = build_code::<Gf256>(&p, 5).map_err(|e| e.to_string())?;
        let msg = random_message(&spec, 3);
        let state = encode(&spec, &msg).map_err(|e| e.to_string())?;
        let mats = message_matrices(&spec, &msg);
        let (nr, ef, a) = (p.nodes_per_rack(), p.failures_per_rack(), spec.alpha());
        let gn = nr - ef;
        for l in 0..p.r() {
            let stored = |i: usize| state.get(NodeId::new(l, i)).unwrap().to_vec();
            let block = |b: usize| -> Vec<Gf256> {
                if b < ef {
                    let proj = mats[b].projections(&spec, l);
                    stored(b).iter().zip(&proj).map(|(s, x)| *s - *x).collect()
                } else {
                    stored(b)
                }
            };
            let blocks: Vec<Vec<Gf256>> = (0..nr).map(block).collect();
            // linear map from the rack's global symbols to each block
            let map = |b: usize| -> Matrix<Gf256> {
                if b < ef {
                    spec.parity(l, b).top_rows(a)
                } else {
                    Matrix::from_fn(a, gn * a, |r, c| {
                        if c == (b - ef) * a + r {
                            Gf256::one()
                        } else {
                            Gf256::zero()
                        }
                    })
                }
            };
            for subset in (0..nr).combinations(gn) {
                let stacked = subset
                    .iter()
                    .skip(1)
                    .fold(map(subset[0]), |acc, &b| acc.vstack(&map(b)).unwrap());
                let rhs: Vec<Gf256> = subset.iter().flat_map(|&b| blocks[b].clone()).collect();
                let c = stacked
                    .solve_full_column_rank(&rhs)
                    .map_err(|e| format!("{p} rack {l} blocks {subset:?}: {e}"))?;
                for (b, want) in blocks.iter().enumerate() {
                    ensure(map(b).mul_vec(&c).unwrap() == *want, || {
                        format!("{p} rack {l} blocks {subset:?}: block {b} differs")
                    })?;
                }
                subsets += 1;
            }
        }
    }
    Ok(format!("{subsets} block subsets"))
}

fn brute_compositions(m: usize, f: usize) -> BTreeSet<Vec<usize>> {
    if m == 0 {
        return BTreeSet::from([vec![]]);
    }
    let mut out = BTreeSet::new();
    for first in 1..=f.min(m) {
        for rest in brute_compositions(m - first, f) {
            let mut v = vec![first];
            v.extend(rest);
            out.insert(v);
        }
    }
    out
}

fn composition_enumeration() -> Check {
    let mut counts = Vec::new();
    for (m, f) in [(2, 2), (3, 2), (4, 2), (4, 4), (6, 3)] {
        let listed: Vec<Vec<usize>> = compositions(m, f)
            .iter()
            .map(|c| c.parts().to_vec())
            .collect();
        let unique: BTreeSet<Vec<usize>> = listed.iter().cloned().collect();
        let want = brute_compositions(m, f);
        ensure(unique.len() == listed.len() && unique == want, || {
            format!(
                "(m, f) = ({m}, {f}): {} listed, {} expected",
                listed.len(),
                want.len()
            )
        })?;
        counts.push(format!("({m},{f})={}", listed.len()));
    }
    Ok(counts.join(" "))
}

fn lp_corners() -> Check {
    let tuples = valid_tuples(24, 8);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..20 {
        let p = &tuples[rng.gen_range(0..tuples.len())];
        let b = q(rng.gen_range(1..500), rng.gen_range(1..7));
        let msr = msrcr_point(p, &b).unwrap();
        let mbr = mbrcr_point(p, &b).unwrap();
        let g1 = min_gamma_given_alpha(p, &b, &msr.alpha)
            .map_err(|e| e.to_string())?
            .gamma;
        let g2 = min_gamma_given_alpha(p, &b, &mbr.alpha)
            .map_err(|e| e.to_string())?
            .gamma;
        ensure(g1 == msr.gamma && g2 == mbr.gamma, || {
            format!(
                "{p} B = {b}: LP gives {g1}, {g2}; corners {}, {}",
                msr.gamma, mbr.gamma
            )
        })?;
    }
    Ok("20 tuples".into())
}

/// Run the CLI, returning its exit code and combined output.
fn cli_run(args: &[&str]) -> (i32, Vec<u8>) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("rackcoop").chain(args.iter().copied());
    let code = cli::run_to(argv, &mut out, &mut err);
    out.extend(err);
    (code, out)
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let name = path.strip_prefix(dir).unwrap().display().to_string();
                files.push((name, fs::read(&path).unwrap()));
            }
        }
    }
    files.sort();
    files
}

fn pipeline(work: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let input = work.join("input.bin");
    let cluster = work.join("cluster");
    fs::write(&input, b"two racks").unwrap();
    let (s_in, s_cl) = (input.to_str().unwrap(), cluster.to_str().unwrap());
    let mut outputs = Vec::new();
    let steps: [&[&str]; 3] = [
        &[
            "encode",
            "--params",
            "8,4,2,4,2,2",
            "--seed",
            "7",
            "--in",
            s_in,
            "--out",
            s_cl,
        ],
        &[
            "repair",
            "--dir",
            s_cl,
            "--racks",
            "1,3",
            "--nodes",
            "1",
            "--helpers",
            "2,4",
        ],
        &[
            "verify-mincut",
            "--params",
            "8,4,2,4,2,2",
            "--alpha",
            "5",
            "--beta1",
            "2",
            "--beta2",
            "1",
            "--seed",
            "7",
        ],
    ];
    for step in steps {
        let (code, out) = cli_run(step);
        ensure(code == 0, || {
            format!(
                "{} exited {code}: {}",
                step[0],
                String::from_utf8_lossy(&out)
            )
        })?;
        outputs.push((format!("stdout of {}", step[0]), out));
    }
    outputs.extend(snapshot(&cluster));
    Ok(outputs)
}

fn determinism() -> Check {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = pipeline(a.path())?;
    let second = pipeline(b.path())?;
    ensure(first.len() == second.len(), || "different file sets".into())?;
    for ((na, ba), (nb, bb)) in first.iter().zip(&second) {
        ensure(na == nb && ba == bb, || format!("{na} differs"))?;
    }
    Ok(format!("{} artifacts identical", first.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("construction point identity", construction_point_identity),
        ("corner point reductions", corner_reductions),
        ("bound and oracle agree", bound_oracle_agreement),
        ("collect from every k-subset", collect_roundtrip),
        ("exact repair and bandwidth", exact_repair_bandwidth),
        ("dropped symbol dependence", dependence_relation),
        ("per-rack vector MDS", vector_mds),
        ("composition enumeration", composition_enumeration),
        ("LP reproduces corners", lp_corners),
        ("deterministic artifacts", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
