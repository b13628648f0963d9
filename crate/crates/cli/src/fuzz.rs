//! Randomized property suites. Trial `i` draws from its own generator seeded
//! with `seed + i`, so any failure can be replayed on its own.

use std::collections::HashMap;

use clap::ValueEnum;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use affclan::correspondence::to_clan_matrix;
use affclan::{
    classify, enumerate, flag_to_clan, invariant_table, matrix_to_flag, random_b, random_gl, random_k, AffineClan,
    FlagInvariants, MatrixF,
};

use crate::{CliError, Format, RunConfig};

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    /// clan -> clan matrix -> flag -> clan, and reduction of K-B translates.
    Roundtrip,
    /// Invariance of the clan and the invariant table under K and B.
    Coset,
    /// Reduction and the flag procedure give the same clan.
    Agree,
}

impl Suite {
    fn name(self) -> &'static str {
        match self {
            Suite::Roundtrip => "roundtrip",
            Suite::Coset => "coset",
            Suite::Agree => "agree",
        }
    }
}

/// Shapes cycled through when `--p`/`--q` are not given.
const SHAPES: [(usize, usize); 4] = [(1, 1), (2, 1), (1, 2), (2, 2)];
const VALS: std::ops::RangeInclusive<i64> = -2..=2;

struct Failure {
    trial: u64,
    p: usize,
    q: usize,
    reason: String,
    data: Value,
    size: usize,
}

fn size_of(ms: &[&MatrixF]) -> usize {
    ms.iter().map(|m| m.to_string().len()).sum()
}

fn shape(cfg: &RunConfig, trial: u64) -> (usize, usize) {
    match (cfg.p, cfg.q) {
        (Some(p), Some(q)) => (p, q),
        (Some(p), None) => (p, 1),
        (None, Some(q)) => (1, q),
        (None, None) => SHAPES[(trial % SHAPES.len() as u64) as usize],
    }
}

fn roundtrip_trial(rng: &mut ChaCha8Rng, p: usize, q: usize, clans: &[AffineClan]) -> Result<(), (String, Value, usize)> {
    let c = &clans[rng.gen_range(0..clans.len())];
    let cm = to_clan_matrix(c);
    let g = cm.matrix();
    let data = json!({ "clan": c.to_string(), "matrix": g.to_string() });
    let size = c.to_string().len();
    let fail = |why: String| (why, data.clone(), size);
    let flag = matrix_to_flag(p, q, g).map_err(|e| fail(e.to_string()))?;
    let back = flag_to_clan(&flag).map_err(|e| fail(e.to_string()))?;
    if &back != c {
        return Err(fail(format!("flag procedure gives {back}")));
    }
    let k = random_k(rng, p, q, VALS);
    let b = random_b(rng, p + q, 2);
    let moved = k.mul(g).mul(&b);
    let got = classify(p, q, &moved).map_err(|e| fail(e.to_string()))?;
    if &got != c {
        let data = json!({ "clan": c.to_string(), "k": k.to_string(), "b": b.to_string() });
        return Err((format!("reduction of k*g*b gives {got}"), data, size));
    }
    Ok(())
}

fn coset_trial(rng: &mut ChaCha8Rng, p: usize, q: usize) -> Result<(), (String, Value, usize)> {
    let n = p + q;
    let g = random_gl(rng, n, VALS);
    let k = random_k(rng, p, q, VALS);
    let b = random_b(rng, n, 2);
    let data = json!({ "g": g.to_string(), "k": k.to_string(), "b": b.to_string() });
    let size = size_of(&[&g, &k, &b]);
    let fail = |why: String| (why, data.clone(), size);
    let c0 = classify(p, q, &g).map_err(|e| fail(e.to_string()))?;
    let c1 = classify(p, q, &k.mul(&g).mul(&b)).map_err(|e| fail(e.to_string()))?;
    if c0 != c1 {
        return Err(fail(format!("g gives {c0} but k*g*b gives {c1}")));
    }
    let flag = matrix_to_flag(p, q, &g).map_err(|e| fail(e.to_string()))?;
    let moved = flag.left_mul(&k).map_err(|e| fail(e.to_string()))?;
    let j_max = FlagInvariants::new(&flag).stabilization_index() + n as i64;
    if invariant_table(&flag, Some(j_max)) != invariant_table(&moved, Some(j_max)) {
        return Err(fail("invariant tables of the flag and its K-translate differ".into()));
    }
    Ok(())
}

fn agree_trial(rng: &mut ChaCha8Rng, p: usize, q: usize) -> Result<(), (String, Value, usize)> {
    let g = random_gl(rng, p + q, VALS);
    let data = json!({ "g": g.to_string() });
    let size = size_of(&[&g]);
    let fail = |why: String| (why, data.clone(), size);
    let by_reduction = classify(p, q, &g).map_err(|e| fail(e.to_string()))?;
    let flag = matrix_to_flag(p, q, &g).map_err(|e| fail(e.to_string()))?;
    let by_flag = flag_to_clan(&flag).map_err(|e| fail(e.to_string()))?;
    if by_reduction != by_flag {
        return Err(fail(format!("reduction gives {by_reduction}, flag procedure gives {by_flag}")));
    }
    Ok(())
}

pub fn run(cfg: &RunConfig, suite: Suite, trials: u64, depth: u32) -> Result<(), CliError> {
    let mut clans: HashMap<(usize, usize), Vec<AffineClan>> = HashMap::new();
    let mut failures = Vec::new();
    for trial in 0..trials {
        let (p, q) = shape(cfg, trial);
        if p + q == 0 {
            return Err(CliError::Parse("p + q must be at least 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(trial));
        let outcome = match suite {
            Suite::Roundtrip => {
                let list = clans.entry((p, q)).or_insert_with(|| enumerate(p, q, depth));
                roundtrip_trial(&mut rng, p, q, list)
            }
            Suite::Coset => coset_trial(&mut rng, p, q),
            Suite::Agree => agree_trial(&mut rng, p, q),
        };
        if let Err((reason, data, size)) = outcome {
            failures.push(Failure { trial, p, q, reason, data, size });
        }
    }
    // Smallest failing input by printed size.
    let smallest = failures.iter().min_by_key(|f| (f.size, f.trial));
    let counterexample = smallest.map(|f| {
        json!({
            "trial": f.trial,
            "seed": cfg.seed.wrapping_add(f.trial),
            "p": f.p,
            "q": f.q,
            "reason": f.reason,
            "input": f.data,
        })
    });
    match cfg.format {
        Format::Text => {
            println!(
                "fuzz {}: {} trials, {} passed, {} failed (seed {})",
                suite.name(),
                trials,
                trials - failures.len() as u64,
                failures.len(),
                cfg.seed
            );
            if let Some(ce) = &counterexample {
                println!("smallest counterexample: {ce}");
            }
        }
        Format::Json => {
            let v = json!({
                "suite": suite.name(),
                "seed": cfg.seed,
                "trials": trials,
                "passed": trials - failures.len() as u64,
                "failed": failures.len(),
                "counterexample": counterexample,
            });
            println!("{}", serde_json::to_string_pretty(&v).expect("JSON values serialize"));
        }
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Property(format!("{} of {trials} trials failed", failures.len())))
    }
}
