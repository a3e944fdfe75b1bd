use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::bounds::{check_bound_uniformity, BoundKind, BoundWeight, MIN_REFERENCE_H};
use super::{barrier, lemma, BoundCheckReport};
use crate::calculus::{layer_integral, LayerKind};
use crate::error::{Error, Result};
use crate::map_cells;
use crate::problem::{scenario, ScenarioKind};

pub const DEFAULT_SEED: u64 = 42;

/// Diffusion scale for the randomized integral-inequality tuples.
pub const LEMMA_EPS0: f64 = 1e-3;

/// Randomized tuples per scenario.
pub const LEMMA_TUPLES: usize = 100;

const BARRIER_SAMPLES: usize = 10_000;
const BARRIER_EPS0: [f64; 3] = [1e-3, 1e-5, 1e-7];
const BOUND_EPS0: [f64; 3] = [1e-3, 1e-5, 1e-7];
const TRANSFORMED_EPS0: [f64; 2] = [1e-3, 1e-5];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Lemmas,
    Barriers,
    Bounds,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Lemmas => "lemmas",
            Suite::Barriers => "barriers",
            Suite::Bounds => "bounds",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Suite::Lemmas, Suite::Barriers, Suite::Bounds, Suite::All]
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown suite '{s}'")))
    }
}

/// Runs the named suite. Randomized parts draw from a ChaCha8 stream seeded
/// with `seed`, so the output is reproducible.
pub fn run_suite(suite: Suite, seed: u64) -> Result<Vec<BoundCheckReport>> {
    let mut out = Vec::new();
    if matches!(suite, Suite::Lemmas | Suite::All) {
        out.extend(lemma_suite(seed)?);
    }
    if matches!(suite, Suite::Barriers | Suite::All) {
        out.extend(barrier_suite()?);
    }
    if matches!(suite, Suite::Bounds | Suite::All) {
        out.extend(bound_suite()?);
    }
    Ok(out)
}

type Tuple = (f64, f64, u32, f64);

fn random_tuples(rng: &mut ChaCha8Rng) -> Vec<Tuple> {
    (0..LEMMA_TUPLES)
        .map(|_| {
            let a: f64 = rng.gen_range(0.0..1.0);
            // x in (a, 1]
            let x = 1.0 - rng.gen_range(0.0..1.0) * (1.0 - a);
            let ell = rng.gen_range(0..=1u32);
            // gamma in (0, 3]
            let gamma = 3.0 - rng.gen_range(0.0..3.0);
            (a, x, ell, gamma)
        })
        .filter(|&(a, x, _, _)| a < x)
        .collect()
}

fn lemma_suite(seed: u64) -> Result<Vec<BoundCheckReport>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Draw all tuples up front so the stream does not depend on scheduling.
    let jobs: Vec<(ScenarioKind, Vec<Tuple>)> =
        ScenarioKind::ALL.into_iter().map(|k| (k, random_tuples(&mut rng))).collect();
    let mut reports = map_cells(jobs, |(kind, tuples)| -> Result<BoundCheckReport> {
        let s = scenario(kind, LEMMA_EPS0)?;
        let e = layer_integral(&s.coeffs, LayerKind::E)?;
        let (mut worst, mut at, mut passed) = (f64::INFINITY, 0.0, true);
        for &(a, x, ell, gamma) in &tuples {
            let r = lemma::check_integral_lemma_with(&s.coeffs, &e, a, x, ell, gamma)?;
            passed &= r.passed;
            if r.worst_margin < worst {
                worst = r.worst_margin;
                at = r.worst_point;
            }
        }
        Ok(BoundCheckReport {
            name: format!("integral-lemma[{kind}]"),
            sample_count: tuples.len(),
            worst_margin: worst,
            worst_point: at,
            passed,
            statistic: None,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    // Equality case: constant diffusion turns the inequality into an identity.
    let s = scenario(ScenarioKind::EpsConst, LEMMA_EPS0)?;
    let mut eq = lemma::check_integral_lemma(&s.coeffs, 0.25, 0.75, 0, 1.0)?;
    eq.name = "integral-lemma-equality[eps-const]".into();
    eq.passed = eq.worst_margin.abs() <= lemma::LEMMA_TOL;
    reports.push(eq);
    Ok(reports)
}

fn barrier_suite() -> Result<Vec<BoundCheckReport>> {
    let cells: Vec<(ScenarioKind, f64)> = ScenarioKind::ALL
        .into_iter()
        .flat_map(|k| BARRIER_EPS0.into_iter().map(move |e| (k, e)))
        .collect();
    map_cells(cells, |(kind, eps0)| {
        let s = scenario(kind, eps0)?;
        let e = layer_integral(&s.coeffs, LayerKind::E)?;
        let mut r = barrier::check_barrier_operator(&s.coeffs, &e, 1.0, BARRIER_SAMPLES)?;
        r.name = format!("barrier-operator[{kind},eps0={eps0:e}]");
        Ok(r)
    })
    .into_iter()
    .collect()
}

fn bound_suite() -> Result<Vec<BoundCheckReport>> {
    let mut cells: Vec<(ScenarioKind, BoundKind, &[f64])> = Vec::new();
    for kind in ScenarioKind::ALL {
        cells.push((kind, BoundKind::U0, &BOUND_EPS0));
        cells.push((kind, BoundKind::U1, &BOUND_EPS0));
        cells.push((kind, BoundKind::T0, &TRANSFORMED_EPS0));
        cells.push((kind, BoundKind::T1, &TRANSFORMED_EPS0));
    }
    let mut reports = cells
        .into_iter()
        .map(|(kind, bound, eps0)| check_bound_uniformity(kind, eps0, bound, BoundWeight::Standard, MIN_REFERENCE_H))
        .collect::<Result<Vec<_>>>()?;

    // Negative control: with the exponent doubled the U1 bound no longer
    // dominates a layer decaying at rate beta, so uniformity must break for
    // at least one scenario.
    let controls = ScenarioKind::ALL
        .into_iter()
        .map(|kind| check_bound_uniformity(kind, &BOUND_EPS0, BoundKind::U1, BoundWeight::DoubledBeta, MIN_REFERENCE_H))
        .collect::<Result<Vec<_>>>()?;
    let worst = controls
        .iter()
        .min_by(|a, b| a.worst_margin.total_cmp(&b.worst_margin))
        .expect("one control per scenario");
    reports.push(BoundCheckReport {
        name: "U1-negative-control[doubled-beta]".into(),
        sample_count: controls.iter().map(|r| r.sample_count).sum(),
        // Sign flipped: the control succeeds when some check fails.
        worst_margin: -worst.worst_margin,
        worst_point: worst.worst_point,
        passed: controls.iter().any(|r| !r.passed),
        statistic: worst.statistic,
    });
    Ok(reports)
}
