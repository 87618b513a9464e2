//! Seeded failure/repair scenarios with a bandwidth ledger.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::codec::{collect, erase, repair, ClusterState, CodeSpec, NodeId, RepairTranscript};
use crate::field::FiniteField;
use crate::params::{mbrcr_point, CodeParams};
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Round {
    pub failed: Vec<NodeId>,
    pub helpers: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    pub seed: u64,
    pub rounds: Vec<Round>,
    pub probes: Vec<Vec<NodeId>>,
}

impl Scenario {
    /// `rounds` admissible failure patterns and `probes` random `k`-subsets.
    pub fn random(p: &CodeParams, seed: u64, rounds: usize, probes: usize) -> Scenario {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nr = p.nodes_per_rack();
        let rounds = (0..rounds)
            .map(|_| {
                let mut racks: Vec<usize> = (0..p.r()).collect();
                racks.shuffle(&mut rng);
                let (failed_racks, rest) = racks.split_at(p.f());
                let mut helpers = rest[..p.d()].to_vec();
                helpers.sort_unstable();
                let mut failed: Vec<NodeId> = failed_racks
                    .iter()
                    .flat_map(|&l| {
                        rand::seq::index::sample(&mut rng, nr, p.failures_per_rack())
                            .into_iter()
                            .map(move |i| NodeId::new(l, i))
                            .collect::<Vec<_>>()
                    })
                    .collect();
                failed.sort_unstable();
                Round { failed, helpers }
            })
            .collect();
        let all: Vec<NodeId> = (0..p.r())
            .flat_map(|l| (0..nr).map(move |i| NodeId::new(l, i)))
            .collect();
        let probes = (0..probes)
            .map(|_| {
                let mut set: Vec<NodeId> = all.choose_multiple(&mut rng, p.k()).copied().collect();
                set.sort_unstable();
                set
            })
            .collect();
        Scenario {
            seed,
            rounds,
            probes,
        }
    }

    /// Reject rounds outside the repair model before touching any state.
    pub fn validate(&self, p: &CodeParams) -> Result<(), HarnessError> {
        for (idx, round) in self.rounds.iter().enumerate() {
            let bad = |msg: String| HarnessError::Validation(format!("round {}: {msg}", idx + 1));
            let mut per_rack: BTreeMap<usize, usize> = BTreeMap::new();
            for n in &round.failed {
                if n.rack >= p.r() || n.node >= p.nodes_per_rack() {
                    return Err(bad(format!("no node {n}")));
                }
                *per_rack.entry(n.rack).or_default() += 1;
            }
            if per_rack.len() != p.f() || per_rack.values().any(|&c| c != p.failures_per_rack()) {
                return Err(bad(format!(
                    "need e/f = {} failures in each of f = {} racks",
                    p.failures_per_rack(),
                    p.f()
                )));
            }
            let mut helpers = round.helpers.clone();
            helpers.sort_unstable();
            helpers.dedup();
            if helpers.len() != round.helpers.len() || helpers.len() != p.d() {
                return Err(bad(format!("need d = {} distinct helper racks", p.d())));
            }
            if let Some(h) = helpers
                .iter()
                .find(|h| **h >= p.r() || per_rack.contains_key(h))
            {
                return Err(bad(format!("rack {} cannot help", h + 1)));
            }
        }
        for probe in &self.probes {
            if probe.len() != p.k() {
                return Err(HarnessError::Validation(format!(
                    "probe with {} nodes, need k = {}",
                    probe.len(),
                    p.k()
                )));
            }
        }
        Ok(())
    }
}

/// Symbols moved in one round, by edge class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundLedger {
    pub round: usize,
    /// Cross-rack symbols downloaded per failed rack (0-based rack id).
    pub per_rack: BTreeMap<usize, usize>,
    pub helper_sent: usize,
    pub helper_received: usize,
    pub peer_sent: usize,
    pub peer_received: usize,
    pub intra_rack: usize,
}

impl RoundLedger {
    fn from_transcript(round: usize, t: &RepairTranscript) -> Self {
        let sum_by = |ts: &[crate::codec::Transfer], key: fn(&crate::codec::Transfer) -> usize| {
            let mut m: BTreeMap<usize, usize> = BTreeMap::new();
            for x in ts {
                *m.entry(key(x)).or_default() += x.symbols;
            }
            m.values().sum::<usize>()
        };
        RoundLedger {
            round,
            per_rack: t.cross_rack_download(),
            helper_sent: sum_by(&t.round1, |x| x.from),
            helper_received: sum_by(&t.round1, |x| x.to),
            peer_sent: sum_by(&t.round2, |x| x.from),
            peer_received: sum_by(&t.round2, |x| x.to),
            intra_rack: t.intra_rack_total(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub params: CodeParams,
    pub file_size: usize,
    pub gamma: usize,
    /// γ of the minimum-bandwidth point for this `B`.
    pub gamma_mbrcr: Rational,
    pub rounds: Vec<RoundLedger>,
    pub probes_passed: usize,
}

impl Report {
    pub fn cross_rack_total(&self) -> usize {
        self.rounds
            .iter()
            .map(|r| r.per_rack.values().sum::<usize>())
            .sum()
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let p = &self.params;
        let _ = writeln!(s, "params {p}  B = {}", self.file_size);
        for r in &self.rounds {
            let racks: Vec<String> = r
                .per_rack
                .iter()
                .map(|(l, c)| format!("rack {}: {c}", l + 1))
                .collect();
            let _ = writeln!(
                s,
                "round {}: cross-rack {} | helper->failed {} | failed->failed {} | intra-rack {}",
                r.round,
                racks.join(", "),
                r.helper_sent,
                r.peer_sent,
                r.intra_rack
            );
        }
        let _ = writeln!(s, "cross-rack total: {}", self.cross_rack_total());
        let _ = writeln!(s, "probes recovered: {}", self.probes_passed);
        let _ = writeln!(
            s,
            "gamma per failed rack: {} (minimum-bandwidth point at B = {}: {})",
            self.gamma, self.file_size, self.gamma_mbrcr
        );
        s
    }
}

/// Apply every round to `state`, checking exact repair, per-rack bandwidth
/// and ledger conservation, then run the collector probes against
/// `message`. The first violated assertion aborts with
/// [`HarnessError::Assertion`].
pub fn run_scenario<F: FiniteField>(
    spec: &CodeSpec<F>,
    state: &mut ClusterState<F>,
    message: &[F],
    scenario: &Scenario,
) -> Result<Report, HarnessError> {
    let p = spec.params();
    scenario.validate(p)?;
    let gamma = spec.layout().gamma(p);
    let b = Rational::from_integer(spec.file_size() as i128);
    let gamma_mbrcr = mbrcr_point(p, &b)
        .map_err(|e| HarnessError::Validation(e.to_string()))?
        .gamma;
    let mut ledgers = Vec::new();
    for (idx, round) in scenario.rounds.iter().enumerate() {
        let fail = |msg: String| HarnessError::Assertion(format!("round {}: {msg}", idx + 1));
        let before = state.clone();
        let (after, transcript) = repair(spec, &erase(state, &round.failed), &round.helpers)?;
        if after != before {
            let diff: Vec<String> = spec
                .nodes()
                .filter(|n| after.get(*n) != before.get(*n))
                .map(|n| n.to_string())
                .collect();
            return Err(fail(format!("repaired nodes differ: {}", diff.join(", "))));
        }
        let ledger = RoundLedger::from_transcript(idx + 1, &transcript);
        if let Some((l, c)) = ledger.per_rack.iter().find(|(_, c)| **c != gamma) {
            return Err(fail(format!(
                "rack {} downloaded {c} symbols, expected {gamma}",
                l + 1
            )));
        }
        if ledger.per_rack.len() != p.f() {
            return Err(fail(format!(
                "{} racks downloaded data, expected {}",
                ledger.per_rack.len(),
                p.f()
            )));
        }
        if ledger.helper_sent != ledger.helper_received || ledger.peer_sent != ledger.peer_received
        {
            return Err(fail("ledger does not balance".into()));
        }
        *state = after;
        ledgers.push(ledger);
    }
    let mut passed = 0;
    for probe in &scenario.probes {
        let got = collect(spec, state, probe)?;
        if got != message {
            let nodes: Vec<String> = probe.iter().map(|n| n.to_string()).collect();
            return Err(HarnessError::Assertion(format!(
                "probe {{{}}} returned a different message",
                nodes.join(", ")
            )));
        }
        passed += 1;
    }
    Ok(Report {
        params: *p,
        file_size: spec.file_size(),
        gamma,
        gamma_mbrcr,
        rounds: ledgers,
        probes_passed: passed,
    })
}
