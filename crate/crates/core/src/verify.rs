//! Randomised property suites over the whole library, summarised per
//! invariant with pass counts, worst slack and a reproducer for the first
//! failure.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore};
use rayon::prelude::*;

use crate::bounds::{
    check_lemma1, check_lemma2, check_lemma3, evaluate_all, majorization_records, sigma1_oracle,
    BoundRecord,
};
use crate::channels::{remix_kraus, Channel, Validation};
use crate::entropy::{exchange_entropy, map_entropy, povm_entropy, receiver_entropy};
use crate::error::{Error, Result};
use crate::matcore::{
    identity, kron, partial_trace_first, partial_trace_second, reorder, reshuffle, ComplexMatrix,
    Order, PermutationMap, C64,
};
use crate::separability::{classify_region, ppt_test, realignment_test};
use crate::zoo::{self, split_seed, RngStream};

pub const ORDERS: [Order; 5] = [
    Order::Finite(1.0),
    Order::Finite(1.5),
    Order::Finite(2.0),
    Order::Finite(3.0),
    Order::Infinity,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Suite {
    Bounds,
    Lemmas,
    Separability,
    Zoo,
}

impl Suite {
    pub const ALL: [Suite; 4] = [
        Suite::Bounds,
        Suite::Lemmas,
        Suite::Separability,
        Suite::Zoo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Bounds => "bounds",
            Suite::Lemmas => "lemmas",
            Suite::Separability => "separability",
            Suite::Zoo => "zoo",
        }
    }

    /// Parses a suite name; `all` expands to every suite.
    pub fn parse_selection(s: &str) -> Result<Vec<Suite>> {
        if s == "all" {
            return Ok(Suite::ALL.to_vec());
        }
        Ok(vec![s.parse()?])
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| {
                Error::Parse(format!(
                    "unknown suite `{s}` (expected all, bounds, lemmas, separability or zoo)"
                ))
            })
    }
}

/// One checked instance of an invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub invariant: String,
    pub slack: f64,
    pub satisfied: bool,
}

impl Observation {
    fn at_least(invariant: &str, slack: f64, tol: f64) -> Self {
        Observation {
            invariant: invariant.to_string(),
            slack,
            satisfied: slack.is_finite() && slack >= -tol,
        }
    }

    fn from_record(prefix: &str, r: &BoundRecord) -> Self {
        Observation {
            invariant: format!("{prefix}{}", r.id),
            slack: r.slack,
            satisfied: r.satisfied,
        }
    }

    fn error(invariant: &str, err: &Error) -> Self {
        let _ = err;
        Observation {
            invariant: format!("{invariant}:evaluation"),
            slack: f64::NAN,
            satisfied: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tally {
    pub passed: usize,
    pub failed: usize,
    pub worst_slack: f64,
    /// Index of the first failing instance.
    pub first_failure: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteSummary {
    pub suite: Suite,
    pub seed: u64,
    pub n: usize,
    pub tallies: BTreeMap<String, Tally>,
}

impl SuiteSummary {
    pub fn passed(&self) -> bool {
        self.tallies.values().all(|t| t.failed == 0)
    }

    pub fn render(&self) -> String {
        let mut s = format!(
            "suite {} (n = {}, seed = {})\n",
            self.suite.name(),
            self.n,
            self.seed
        );
        for (name, t) in &self.tallies {
            let _ = writeln!(
                s,
                "  {name:<36} pass {:>7}  fail {:>5}  worst slack {:+.3e}",
                t.passed, t.failed, t.worst_slack
            );
            if let Some(i) = t.first_failure {
                let _ = writeln!(
                    s,
                    "    reproduce: suite={} seed={} index={i}",
                    self.suite.name(),
                    self.seed
                );
            }
        }
        s
    }
}

/// Runs a suite over `n` random instances, `threads` at a time. The
/// summary does not depend on the thread count.
pub fn run_suite(
    suite: Suite,
    n: usize,
    seed: u64,
    inject_invalid: bool,
    threads: usize,
) -> Result<SuiteSummary> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
    let suite_seed = split_seed(seed, suite as u64);
    let per_instance: Vec<Vec<Observation>> = pool.install(|| {
        (0..n)
            .into_par_iter()
            .map(|i| {
                let mut rng = RngStream::new(split_seed(suite_seed, i as u64));
                match suite {
                    Suite::Bounds => bounds_instance(i, &mut rng),
                    Suite::Lemmas => lemmas_instance(&mut rng),
                    Suite::Separability => separability_instance(&mut rng),
                    Suite::Zoo => zoo_instance(&mut rng),
                }
            })
            .collect()
    });

    let mut tallies: BTreeMap<String, Tally> = BTreeMap::new();
    let mut add = |i: usize, obs: Observation| {
        let t = tallies.entry(obs.invariant).or_insert(Tally {
            passed: 0,
            failed: 0,
            worst_slack: f64::INFINITY,
            first_failure: None,
        });
        if obs.satisfied {
            t.passed += 1;
        } else {
            t.failed += 1;
            t.first_failure.get_or_insert(i);
        }
        if obs.slack.is_nan() {
            t.worst_slack = f64::NAN;
        } else if !t.worst_slack.is_nan() {
            t.worst_slack = t.worst_slack.min(obs.slack);
        }
    };
    for (i, obs) in per_instance.into_iter().enumerate() {
        for o in obs {
            add(i, o);
        }
    }
    if inject_invalid && suite == Suite::Bounds {
        // Negative control: a non-trace-preserving "channel" must break bounds.
        let bad = Channel::from_superoperator_with(
            identity(4) * C64::new(2.0, 0.0),
            2,
            Validation::Permissive,
        )?;
        for r in &evaluate_all(&bad, Order::ONE).records {
            add(n, Observation::from_record("", r));
        }
    }
    Ok(SuiteSummary {
        suite,
        seed,
        n,
        tallies,
    })
}

fn random_channel(i: usize, rng: &mut RngStream) -> Result<Channel> {
    let n = 2 + i % 2;
    if i.is_multiple_of(3) {
        let k = rng.random_range(1..=n * n);
        zoo::random_bistochastic(n, k, rng)
    } else {
        let d = rng.random_range(1..=n * n);
        zoo::random_cptp(n, d, rng)
    }
}

fn bounds_instance(i: usize, rng: &mut RngStream) -> Vec<Observation> {
    let ch = match random_channel(i, rng) {
        Ok(c) => c,
        Err(e) => return vec![Observation::error("sample", &e)],
    };
    let mut out = Vec::new();
    for q in ORDERS {
        for r in &evaluate_all(&ch, q).records {
            out.push(Observation::from_record("", r));
        }
    }
    let extra = (|| -> Result<Vec<Observation>> {
        let mut v = Vec::new();
        let n = ch.dim() as f64;
        let sigma = ch.sigma1()?;
        let oracle = sigma1_oracle(&ch, 20, rng.next_u64())?;
        v.push(Observation::at_least(
            "sigma1_oracle_below_sigma1",
            sigma - oracle,
            1e-9,
        ));

        let top = 2.0 * n.ln() + 1e-9;
        let mut prev: Option<(f64, f64)> = None;
        for q in [
            Order::Finite(0.5),
            Order::ONE,
            Order::TWO,
            Order::Finite(5.0),
            Order::Infinity,
        ] {
            let (m, r) = (map_entropy(&ch, q)?, receiver_entropy(&ch, q)?);
            v.push(Observation::at_least(
                "entropy_range",
                (top - m.max(r)).min(m.min(r)),
                1e-12,
            ));
            if let Some((pm, pr)) = prev {
                v.push(Observation::at_least(
                    "entropy_monotone_in_q",
                    (pm - m).min(pr - r),
                    1e-10,
                ));
            }
            prev = Some((m, r));
        }

        let mixed = identity(ch.dim()) * C64::new(1.0 / n, 0.0);
        let ex = exchange_entropy(&ch, &mixed)?;
        v.push(Observation::at_least(
            "exchange_equals_map",
            -(ex - map_entropy(&ch, Order::ONE)?).abs(),
            1e-10,
        ));

        let canonical = ch.canonical_kraus()?;
        let k = canonical.len();
        let m = rng.random_range(k..=k + 3);
        let remixed = remix_kraus(&canonical, &zoo::random_isometry(m, k, rng))?;
        for q in [Order::ONE, Order::TWO] {
            let s_map = map_entropy(&ch, q)?;
            v.push(Observation::at_least(
                "povm_at_least_map",
                povm_entropy(&remixed, q)? - s_map,
                1e-9,
            ));
            v.push(Observation::at_least(
                "povm_canonical_equals_map",
                -(povm_entropy(&canonical, q)? - s_map).abs(),
                1e-9,
            ));
        }
        let lambda = ch.choi_spectrum()?;
        for r in majorization_records(&remixed.kappas(), lambda.values())? {
            v.push(Observation::at_least("povm_majorization", r.slack, 1e-10));
        }
        Ok(v)
    })();
    match extra {
        Ok(v) => out.extend(v),
        Err(e) => out.push(Observation::error("channel_extras", &e)),
    }
    out
}

fn random_complex(rows: usize, cols: usize, rng: &mut RngStream) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

fn random_permutation(size: usize, rng: &mut RngStream) -> PermutationMap {
    let mut m: Vec<usize> = (0..size).collect();
    m.shuffle(rng);
    PermutationMap::new(m).expect("shuffle is a bijection")
}

fn lemmas_instance(rng: &mut RngStream) -> Vec<Observation> {
    let side = rng.random_range(4..=9);
    let x = random_complex(side, side, rng);
    let pi = random_permutation(side * side, rng);
    let vector: Vec<f64> = (0..side).map(|_| rng.random_range(0.0..1.0)).collect();
    let mut out = Vec::new();
    let run = || -> Result<Vec<Observation>> {
        let mut v = Vec::new();
        for q in [Order::Finite(1.5), Order::TWO, Order::Finite(4.0)] {
            v.push(Observation::from_record("", &check_lemma1(&vector, q)?));
            for r in check_lemma2(&x, q)? {
                v.push(Observation::from_record("", &r));
            }
            for r in check_lemma3(&x, &pi, q)? {
                v.push(Observation::from_record("", &r));
            }
        }
        let y = reorder(&x, &pi)?;
        v.push(Observation::at_least(
            "reorder_preserves_hs_norm",
            -(y.norm() - x.norm()).abs() / x.norm(),
            1e-12,
        ));
        if side == 4 || side == 9 {
            let n = if side == 4 { 2 } else { 3 };
            let back = reshuffle(&reshuffle(&x, n)?, n)?;
            v.push(Observation::at_least(
                "reshuffle_involution",
                if back == x { 0.0 } else { -1.0 },
                0.0,
            ));
        }
        Ok(v)
    };
    match run() {
        Ok(v) => out.extend(v),
        Err(e) => out.push(Observation::error("lemmas", &e)),
    }
    out
}

fn separability_instance(rng: &mut RngStream) -> Vec<Observation> {
    let mut run = || -> Result<Vec<Observation>> {
        let d = rng.random_range(1..=4);
        let ch = zoo::random_cptp(2, d, rng)?;
        let mut v = Vec::new();
        let (_, ppt) = ppt_test(&ch)?;
        if ppt {
            for q in [Order::Finite(1.5), Order::TWO] {
                let verdict = classify_region(&ch, q)?;
                for r in &verdict.criteria {
                    v.push(Observation::from_record("ppt_implies_", r));
                }
            }
            let (value, _) = realignment_test(&ch)?;
            v.push(Observation::at_least(
                "ppt_implies_realignment",
                1.0 - value,
                1e-9,
            ));
        }
        Ok(v)
    };
    run().unwrap_or_else(|e| vec![Observation::error("separability", &e)])
}

fn zoo_instance(rng: &mut RngStream) -> Vec<Observation> {
    let mut run = || -> Result<Vec<Observation>> {
        let mut v = Vec::new();
        let n = rng.random_range(2..=3);
        let d = rng.random_range(n..=n * n);
        let ch = zoo::random_cptp(n, d, rng)?;
        let omega = ch.choi().state();
        let nf = n as f64;
        let a = (partial_trace_first(&omega, n)? - identity(n) * C64::new(1.0 / nf, 0.0)).norm();
        let b = (partial_trace_second(&omega, n)? - ch.output_of_maximally_mixed()?).norm();
        v.push(Observation::at_least("choi_marginals", -(a.max(b)), 1e-9));

        let back = Channel::from_kraus(&ch.canonical_kraus()?)?;
        let diff = (back.superoperator().matrix() - ch.superoperator().matrix()).norm();
        v.push(Observation::at_least("kraus_round_trip", -diff, 1e-10));

        let eta = zoo::random_probability(3, rng);
        let u = zoo::haar_unitary(2, rng);
        let rinv = zoo::reshuffle_invariant([eta[0], eta[1], eta[2]], &u)?;
        let gap = (rinv.choi().matrix() - rinv.superoperator().matrix()).norm();
        v.push(Observation::at_least(
            "reshuffle_invariant_d_equals_phi",
            -gap,
            1e-10,
        ));
        let s2 = map_entropy(&rinv, Order::TWO)? - receiver_entropy(&rinv, Order::TWO)?;
        v.push(Observation::at_least(
            "reshuffle_invariant_s2_equal",
            -s2.abs(),
            1e-10,
        ));

        let pauli = zoo::pauli_channel(&zoo::random_probability(4, rng))?;
        v.push(Observation::at_least(
            "pauli_unital",
            if pauli.flags().unital { 0.0 } else { -1.0 },
            0.0,
        ));

        let bist = zoo::random_bistochastic(n, rng.random_range(1..=4), rng)?;
        v.push(Observation::at_least(
            "bistochastic_sigma1_one",
            -(bist.sigma1()? - 1.0).abs(),
            1e-9,
        ));

        let interval =
            zoo::interval_channel(&zoo::random_density(2, rng), &zoo::random_density(2, rng))?;
        for r in crate::bounds::interval_check(&interval)? {
            v.push(Observation::from_record("", &r));
        }

        let alpha: f64 = rng.random_range(0.0..=1.0);
        let (s_map, s_rec) = zoo::curve_ab_point(alpha)?;
        let depol = zoo::depolarizing(2, alpha)?;
        let err = (s_map - map_entropy(&depol, Order::ONE)?)
            .abs()
            .max((s_rec - receiver_entropy(&depol, Order::ONE)?).abs());
        v.push(Observation::at_least(
            "curve_ab_matches_channel",
            -err,
            1e-10,
        ));

        // [(X¹⊗X²) Y (X³⊗X⁴)]^R = (X¹⊗(X³)ᵀ) Y^R ((X²)ᵀ⊗X⁴)
        let xs: Vec<ComplexMatrix> = (0..4).map(|_| random_complex(n, n, rng)).collect();
        let y = random_complex(n * n, n * n, rng);
        let lhs = reshuffle(&(kron(&xs[0], &xs[1]) * &y * kron(&xs[2], &xs[3])), n)?;
        let rhs =
            kron(&xs[0], &xs[2].transpose()) * reshuffle(&y, n)? * kron(&xs[1].transpose(), &xs[3]);
        v.push(Observation::at_least(
            "reshuffle_conjugation_rule",
            -(lhs - &rhs).norm() / (1.0 + rhs.norm()),
            1e-12,
        ));
        Ok(v)
    };
    run().unwrap_or_else(|e| vec![Observation::error("zoo", &e)])
}
