//! Regenerates the invariant tables for the standard small examples:
//! `(i;+)`/`(i;-)` of the four `(1,1)` families, `(1;j)` for the two
//! families with monomial entries, and `(1;j)` for three `(2,2)` clan
//! matrices.

use std::fmt::Write as _;

use crate::correspondence::matrix_to_flag;
use crate::dvr_linalg::MatrixF;
use crate::invariants::FlagInvariants;

/// The three `(2,2)` matrices compared in the third table.
pub const FOUR_BY_FOUR: [(&str, &str); 3] = [
    ("g", "1,0,0,0;0,0,0,1;0,1,0,t^-2;t^-1,0,1,0"),
    ("h", "1,0,0,0;0,0,0,1;0,1,0,t^-1;t^-3,0,1,0"),
    ("g'", "1,0,0,0;0,0,0,1;t^-1,1,0,0;0,0,1,t^-2"),
];

fn flag_of(p: usize, q: usize, text: &str) -> crate::correspondence::AffineFlag {
    let g = MatrixF::parse(text).expect("built-in matrix parses");
    matrix_to_flag(p, q, &g).expect("built-in matrix is invertible")
}

/// Right-aligned grid with a left label column.
fn grid(title: &str, headers: &[String], rows: &[(String, Vec<String>)]) -> String {
    let label_w = rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
    let widths: Vec<usize> = (0..headers.len())
        .map(|c| rows.iter().map(|r| r.1[c].len()).chain([headers[c].len()]).max().unwrap_or(1))
        .collect();
    let mut out = String::new();
    writeln!(out, "# {title}").unwrap();
    let line = |out: &mut String, label: &str, cells: &[String]| {
        let mut s = format!("{label:<label_w$}");
        for (c, cell) in cells.iter().enumerate() {
            write!(s, "  {cell:>w$}", w = widths[c]).unwrap();
        }
        writeln!(out, "{}", s.trim_end()).unwrap();
    };
    line(&mut out, "", headers);
    for (label, cells) in rows {
        line(&mut out, label, cells);
    }
    out
}

/// `(i;+)` and `(i;-)` for `i = 1, 2` on the four `(1,1)` families at exponent `a`.
pub fn sign_table(a: i64) -> String {
    let mats = [
        "1,0;0,1".to_string(),
        "0,1;1,0".to_string(),
        format!("1,0;t^{a},1"),
        format!("0,1;1,t^{a}"),
    ];
    let flags: Vec<_> = mats.iter().map(|m| flag_of(1, 1, m)).collect();
    let invs: Vec<_> = flags.iter().map(FlagInvariants::new).collect();
    let mut rows = Vec::new();
    for i in 1..=2 {
        rows.push((format!("({i};+)"), invs.iter().map(|f| f.plus(i).to_string()).collect()));
        rows.push((format!("({i};-)"), invs.iter().map(|f| f.minus(i).to_string()).collect()));
    }
    let headers: Vec<String> = mats.iter().map(|m| format!("({m})")).collect();
    grid(&format!("(i;+) and (i;-), p=1 q=1, a={a}"), &headers, &rows)
}

/// `(1;j)` for `j = 1..=j_max` on the two `(1,1)` families with a monomial entry.
pub fn first_row_table(a: i64, j_max: i64) -> String {
    let mats = [format!("1,0;t^{a},1"), format!("0,1;1,t^{a}")];
    let flags: Vec<_> = mats.iter().map(|m| flag_of(1, 1, m)).collect();
    let invs: Vec<_> = flags.iter().map(FlagInvariants::new).collect();
    let rows: Vec<(String, Vec<String>)> =
        (1..=j_max).map(|j| (format!("(1;{j})"), invs.iter().map(|f| f.ij(1, j).to_string()).collect())).collect();
    let headers: Vec<String> = mats.iter().map(|m| format!("({m})")).collect();
    grid(&format!("(1;j), p=1 q=1, a={a}"), &headers, &rows)
}

/// `(1;j)` for `j = 1..=j_max` on the three `(2,2)` matrices, followed by the
/// first `j` with `(1;j) = n`.
pub fn four_by_four_table(j_max: i64) -> String {
    let flags: Vec<_> = FOUR_BY_FOUR.iter().map(|(_, m)| flag_of(2, 2, m)).collect();
    let invs: Vec<_> = flags.iter().map(FlagInvariants::new).collect();
    let mut rows: Vec<(String, Vec<String>)> =
        (1..=j_max).map(|j| (format!("(1;{j})"), invs.iter().map(|f| f.ij(1, j).to_string()).collect())).collect();
    rows.push(("stable".to_string(), invs.iter().map(|f| f.row_stabilization(1).to_string()).collect()));
    let headers: Vec<String> = FOUR_BY_FOUR.iter().map(|(name, _)| name.to_string()).collect();
    let mut out = grid("(1;j), p=2 q=2", &headers, &rows);
    for (name, m) in FOUR_BY_FOUR {
        writeln!(out, "# {name} = ({m})").unwrap();
    }
    out
}

/// The three tables with the parameters used by the checked-in fixtures.
pub fn all_tables() -> [(&'static str, String); 3] {
    [
        ("table1.txt", sign_table(-1)),
        ("table2.txt", first_row_table(-2, 8)),
        ("table3.txt", four_by_four_table(15)),
    ]
}
