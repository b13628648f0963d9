//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::HashSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::thread;
use std::time::Instant;

use affclan::correspondence::to_clan_matrix;
use affclan::reference_tables::FOUR_BY_FOUR;
use affclan::{
    classify, enumerate, flag_to_clan, invariant_table, matrix_to_flag, random_b, random_gl, random_k,
    reduce_to_clan_matrix, AffineClan, AffineFlag, ClanSymbol, FieldElem, FlagInvariants, MatrixF,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn mat(text: &str) -> MatrixF {
    MatrixF::parse(text).expect("test matrix parses")
}

fn flag(p: usize, q: usize, g: &MatrixF) -> AffineFlag {
    matrix_to_flag(p, q, g).expect("test matrix is invertible")
}

fn clan(p: usize, q: usize, text: &str) -> AffineClan {
    AffineClan::parse(p, q, text).expect("test clan parses")
}

/// Exact valuation of a nonzero entry that is a pure power of `t`.
fn t_power(x: &FieldElem) -> Option<i64> {
    if x.is_zero() {
        return None;
    }
    let v = x.val().finite()?;
    (x == &FieldElem::t_pow(v)).then_some(v)
}

/// Independent Iwahori test: integral, strictly lower part divisible by `t`,
/// unit diagonal.
fn iwahori_by_entries(b: &MatrixF) -> bool {
    let n = b.rows();
    (0..n).all(|r| {
        (0..n).all(|c| {
            let x = b.get(r, c);
            let v = x.val().finite();
            match r.cmp(&c) {
                std::cmp::Ordering::Equal => v == Some(0),
                std::cmp::Ordering::Greater => v.map_or(true, |v| v >= 1),
                std::cmp::Ordering::Less => v.map_or(true, |v| v >= 0),
            }
        })
    })
}

fn block_diagonal_invertible(k: &MatrixF, p: usize) -> bool {
    let n = k.rows();
    let blocks_ok = (0..n).all(|r| (0..n).all(|c| (r < p) == (c < p) || k.get(r, c).is_zero()));
    blocks_ok && k.det().map_or(false, |d| !d.is_zero())
}

/// The four normal forms for `n = 2`.
fn two_by_two_family(m: &MatrixF) -> Option<String> {
    let one = FieldElem::one();
    let (a, b, c, d) = (m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1));
    if a == &one && b.is_zero() && d == &one {
        if c.is_zero() {
            return Some("I".into());
        }
        return t_power(c).filter(|&e| e <= 0).map(|e| format!("(1,0;t^{e},1)"));
    }
    if a.is_zero() && b == &one && c == &one {
        if d.is_zero() {
            return Some("(0,1;1,0)".into());
        }
        return t_power(d).filter(|&e| e < 0).map(|e| format!("(0,1;1,t^{e})"));
    }
    None
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut seen = HashSet::new();
    for trial in 0..500 {
        let g = random_gl(&mut rng, 2, -3..=3);
        let (cm, w) = reduce_to_clan_matrix(1, 1, &g).map_err(|e| format!("trial {trial}: {e}"))?;
        let family = two_by_two_family(cm.matrix())
            .ok_or_else(|| format!("trial {trial}: {:?} is not a normal form", cm.matrix().to_string_rows()))?;
        ensure(&w.k.mul(&g).mul(&w.b) == cm.matrix(), || format!("trial {trial}: witness mismatch"))?;
        ensure(block_diagonal_invertible(&w.k, 1) && iwahori_by_entries(&w.b), || {
            format!("trial {trial}: witness outside K or B")
        })?;
        seen.insert(family.split("t^").next().unwrap_or_default().to_string());
    }
    Ok(format!("500 reductions, {} of the 4 families seen", seen.len()))
}

fn criterion_2() -> Outcome {
    // (1;+), (1;-), (2;+), (2;-) for each of the four families, at a = -1.
    let cases = [
        ("1,0;0,1", [0, 1, 1, 0]),
        ("0,1;1,0", [1, 0, 0, 1]),
        ("1,0;t^-1,1", [1, 1, 0, 0]),
        ("0,1;1,t^-1", [0, 0, 1, 1]),
    ];
    for (m, expected) in cases {
        let f = flag(1, 1, &mat(m));
        let inv = FlagInvariants::new(&f);
        let got = [inv.plus(1), inv.minus(1), inv.plus(2), inv.minus(2)];
        ensure(got == expected, || format!("({m}): got {got:?}, expected {expected:?}"))?;
    }
    Ok("four families".into())
}

fn criterion_3() -> Outcome {
    let cases = [("1,0;t^-2,1", [4, 4, 3, 3, 2, 2, 2, 2]), ("0,1;1,t^-2", [4, 3, 3, 2, 2, 2, 2, 2])];
    for (m, expected) in cases {
        let f = flag(1, 1, &mat(m));
        let inv = FlagInvariants::new(&f);
        let got: Vec<u64> = (1..=8).map(|j| inv.ij(1, j)).collect();
        ensure(got == expected, || format!("({m}): got {got:?}, expected {expected:?}"))?;
    }
    Ok("j = 1..8".into())
}

fn criterion_4() -> Outcome {
    let expected: [(&[u64], i64); 3] = [
        (&[7, 6, 6, 6, 5, 4, 4, 4, 4, 4, 4, 4, 4, 4, 4], 6),
        (&[8, 7, 7, 7, 6, 6, 6, 6, 5, 5, 5, 5, 4, 4, 4], 13),
        (&[7, 6, 6, 6, 5, 4, 4, 4, 4, 4, 4, 4, 4, 4, 4], 6),
    ];
    for ((name, m), (seq, stable)) in FOUR_BY_FOUR.iter().zip(expected) {
        let f = flag(2, 2, &mat(m));
        let inv = FlagInvariants::new(&f);
        let got: Vec<u64> = (1..=15).map(|j| inv.ij(1, j)).collect();
        ensure(got == seq, || format!("{name}: got {got:?}, expected {seq:?}"))?;
        let s = inv.row_stabilization(1);
        ensure(s == stable, || format!("{name}: first j with (1;j) = 4 is {s}, expected {stable}"))?;
    }
    Ok("three sequences and their stabilization points".into())
}

fn criterion_5() -> Outcome {
    // a = b = -1.
    let cases = [
        ("1,0,0;0,1,0;0,0,1", "(-,+,+)"),
        ("1,0,0;0,0,1;0,1,0", "(+,-,+)"),
        ("0,1,0;0,0,1;1,0,0", "(+,+,-)"),
        ("1,0,0;0,1,0;0,t^-1,1", "(1,1-3,+)"),
        ("1,0,0;0,0,1;0,1,t^-1", "(1,1+3,+)"),
        ("1,0,0;0,0,1;t^-1,1,0", "(+,1,1-3)"),
        ("0,1,0;0,0,1;1,t^-1,0", "(+,1,1+3)"),
        ("1,0,0;0,1,0;t^-1,0,1", "(1,+,1-3)"),
        ("0,1,0;0,0,1;1,0,t^-1", "(1,+,1+3)"),
    ];
    for (m, c) in cases {
        let g = mat(m);
        let expected = clan(2, 1, c);
        let got = classify(2, 1, &g).map_err(|e| format!("({m}): {e}"))?;
        ensure(got == expected, || format!("({m}): reduction gives {got}, expected {expected}"))?;
        let via_flag = flag_to_clan(&flag(2, 1, &g)).map_err(|e| format!("({m}): {e}"))?;
        ensure(via_flag == expected, || format!("({m}): flag gives {via_flag}, expected {expected}"))?;
    }
    Ok("nine matrices".into())
}

fn criterion_6() -> Outcome {
    let mut total = 0;
    for (p, q) in [(1, 1), (2, 1), (2, 2), (3, 1)] {
        let clans = enumerate(p, q, 2);
        let flags: Vec<AffineFlag> = clans.iter().map(|c| flag(p, q, to_clan_matrix(c).matrix())).collect();
        for (c, f) in clans.iter().zip(&flags) {
            let back = flag_to_clan(f).map_err(|e| format!("{c}: {e}"))?;
            ensure(&back == c, || format!("({p},{q}) {c}: flag gives {back}"))?;
        }
        let invs: Vec<FlagInvariants> = flags.iter().map(FlagInvariants::new).collect();
        let bound = invs.iter().map(|i| i.stabilization_index()).max().unwrap_or(0) + (p + q) as i64;
        let mut tables = HashSet::new();
        for (c, inv) in clans.iter().zip(&invs) {
            let t = inv.table(Some(bound)).to_json().to_string();
            ensure(tables.insert(t), || format!("({p},{q}) {c}: invariant table coincides with another clan"))?;
        }
        total += clans.len();
    }
    Ok(format!("{total} clans, tables pairwise distinct"))
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (p, q) in [(1, 1), (2, 1), (2, 2)] {
        let n = p + q;
        for trial in 0..200 {
            let g = random_gl(&mut rng, n, -2..=2);
            let k = random_k(&mut rng, p, q, -2..=2);
            let b = random_b(&mut rng, n, 2);
            let moved = k.mul(&g).mul(&b);
            let c0 = classify(p, q, &g).map_err(|e| e.to_string())?;
            let c1 = classify(p, q, &moved).map_err(|e| e.to_string())?;
            ensure(c0 == c1, || format!("({p},{q}) trial {trial}: {c0} vs {c1}"))?;
            let f = flag(p, q, &g);
            let kf = f.left_mul(&k).map_err(|e| e.to_string())?;
            let j_max = FlagInvariants::new(&f).stabilization_index() + n as i64;
            let t0 = invariant_table(&f, Some(j_max));
            let t1 = invariant_table(&kf, Some(j_max));
            ensure(t0 == t1, || format!("({p},{q}) trial {trial}: invariant tables differ"))?;
        }
    }
    Ok("600 triples".into())
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let shapes = [(1, 1), (2, 1), (1, 2), (2, 2), (3, 1), (0, 2), (2, 0)];
    for trial in 0..1000 {
        let (p, q) = shapes[rng.gen_range(0..shapes.len())];
        let n = p + q;
        let g = random_gl(&mut rng, n, -2..=2);
        let f = flag(p, q, &g);
        let inv = FlagInvariants::new(&f);
        let t = inv.table(Some(n as i64 + 1));
        t.check().map_err(|e| format!("({p},{q}) trial {trial}: {e}"))?;
        for i in 1..=n as i64 + 1 {
            let (a, b) = (inv.crossing(i), inv.crossing_by_projection(i));
            ensure(a == b, || format!("({p},{q}) trial {trial}: (i;N) formulas differ at i={i}: {a} vs {b}"))?;
        }
    }
    Ok("1000 flags".into())
}

/// Pairs `x < y` of the Z-indexed sequence that meet the window, read off the
/// window symbols directly.
fn arcs_near(c: &AffineClan, lo: i64, hi: i64) -> Vec<(i64, i64)> {
    let n = c.n() as i64;
    let mut base = Vec::new();
    for i in 1..=c.n() {
        if let ClanSymbol::Paired { partner, shift } = c.symbol(i) {
            let (x, y) = (i as i64, partner as i64 + shift * n);
            if x < y {
                base.push((x, y));
            }
        }
    }
    let reach = (hi - lo).abs() / n + 4 * n + 2;
    let mut out = Vec::new();
    for (x, y) in base {
        for r in -reach..=reach {
            let (a, b) = (x + r * n, y + r * n);
            if b >= lo && a <= hi {
                out.push((a, b));
            }
        }
    }
    out
}

fn criterion_9() -> Outcome {
    let (p, q) = (2, 2);
    let n = 4i64;
    let clans = enumerate(p, q, 2);
    for c in &clans {
        let f = flag(p, q, to_clan_matrix(c).matrix());
        let inv = FlagInvariants::new(&f);
        let j_max = inv.stabilization_index() + n;
        let arcs = arcs_near(c, 1 - 4 * n, j_max + 4 * n);
        for i in 1..=n {
            let crossing = arcs.iter().filter(|&&(x, y)| x < i && i <= y).count() as u64;
            ensure(inv.crossing(i) == crossing, || format!("{c}: (i;N) at i={i}"))?;
            let (plus, minus) = match c.symbol(i as usize) {
                ClanSymbol::Plus => (1, 0),
                ClanSymbol::Minus => (0, 1),
                ClanSymbol::Paired { .. } => {
                    if arcs.iter().any(|&(x, _)| x == i) {
                        (1, 1)
                    } else {
                        (0, 0)
                    }
                }
            };
            ensure((inv.plus(i), inv.minus(i)) == (plus, minus), || format!("{c}: (i;+),(i;-) at i={i}"))?;
            for j in i + 1..=j_max {
                let expected = (n + 1 - i) as u64 + arcs.iter().filter(|&&(x, y)| x < i && j <= y).count() as u64;
                let got = inv.ij(i, j);
                ensure(got == expected, || format!("{c}: ({i};{j}) = {got}, counting gives {expected}"))?;
            }
        }
    }
    Ok(format!("{} clans", clans.len()))
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let shapes = [(1, 1), (2, 1), (1, 2), (2, 2), (3, 1), (1, 3)];
    for trial in 0..1000 {
        let (p, q) = shapes[rng.gen_range(0..shapes.len())];
        let g = random_gl(&mut rng, p + q, -3..=3);
        let (cm, w) = reduce_to_clan_matrix(p, q, &g).map_err(|e| format!("trial {trial}: {e}"))?;
        ensure(&w.k.mul(&g).mul(&w.b) == cm.matrix(), || format!("({p},{q}) trial {trial}: k*g*b differs"))?;
        ensure(block_diagonal_invertible(&w.k, p), || format!("({p},{q}) trial {trial}: k not in K"))?;
        ensure(iwahori_by_entries(&w.b), || format!("({p},{q}) trial {trial}: b not in B"))?;
    }
    Ok("1000 reductions".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("n=2 reductions land in the four normal forms", criterion_1),
        ("(i;+) and (i;-) of the n=2 families", criterion_2),
        ("(1;j) of the n=2 monomial families at a=-2", criterion_3),
        ("(1;j) of three (2,2) clan matrices", criterion_4),
        ("nine (2,1) matrices and their clans", criterion_5),
        ("clan -> matrix -> flag -> clan roundtrip", criterion_6),
        ("invariance under K and B", criterion_7),
        ("structural identities on random flags", criterion_8),
        ("counting formulas on (2,2) clans", criterion_9),
        ("reduction witnesses", criterion_10),
    ];
    let start = Instant::now();
    let handles: Vec<_> = criteria
        .iter()
        .map(|&(_, f)| thread::spawn(move || catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()))))
        .collect();
    let mut failed = 0;
    for (idx, ((name, _), h)) in criteria.iter().zip(handles).enumerate() {
        let outcome = h.join().unwrap_or_else(|_| Err("thread panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {:>2}: PASS  {name} ({detail})", idx + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2}: FAIL  {name}: {why}", idx + 1);
            }
        }
    }
    println!("{} of {} criteria passed in {:.1}s", criteria.len() - failed, criteria.len(), start.elapsed().as_secs_f64());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
