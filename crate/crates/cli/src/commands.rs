use std::fs;
use std::io::Read;
use std::path::Path;

use serde_json::{json, Value};

use affclan::correspondence::to_clan_matrix;
use affclan::io::{clan_matrix_json, parse_matrix_input, witness_json, MatrixInput};
use affclan::reference_tables::all_tables;
use affclan::{enumerate as enumerate_clans, matrix_to_flag, reduce_to_clan_matrix, FlagInvariants};

use crate::{CliError, Format, Render, RunConfig};

pub fn read_input(path: Option<&Path>) -> Result<String, CliError> {
    match path {
        Some(p) if p != Path::new("-") => Ok(fs::read_to_string(p)?),
        _ => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s)?;
            Ok(s)
        }
    }
}

/// Block sizes from the flags, falling back to the input envelope; a single
/// given size determines the other from the matrix size.
fn resolve_shape(cfg: &RunConfig, input: &MatrixInput) -> Result<(usize, usize), CliError> {
    let n = input.matrix.rows();
    let p = cfg.p.or(input.p);
    let q = cfg.q.or(input.q);
    let (p, q) = match (p, q) {
        (Some(p), Some(q)) => (p, q),
        (Some(p), None) if p <= n => (p, n - p),
        (None, Some(q)) if q <= n => (n - q, q),
        _ => return Err(CliError::Parse("block sizes are missing: pass --p and --q".into())),
    };
    if p + q != n || input.matrix.cols() != n {
        return Err(CliError::Parse(format!(
            "matrix is {}x{} but p + q = {}",
            input.matrix.rows(),
            input.matrix.cols(),
            p + q
        )));
    }
    Ok((p, q))
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("JSON values serialize"));
}

pub fn classify(cfg: &RunConfig, path: Option<&Path>, witness: bool) -> Result<(), CliError> {
    let input = parse_matrix_input(&read_input(path)?)?;
    let (p, q) = resolve_shape(cfg, &input)?;
    let (cm, w) = reduce_to_clan_matrix(p, q, &input.matrix)?;
    let clan = cm.to_clan();
    match cfg.format {
        Format::Text => {
            println!("{clan}");
            println!("matrix {}", cm.matrix());
            if witness {
                println!("k {}", w.k);
                println!("b {}", w.b);
            }
        }
        Format::Json => {
            let mut v = json!({
                "p": p,
                "q": q,
                "clan": clan.to_string(),
                "matrix": clan_matrix_json(&cm)["matrix"],
            });
            if witness {
                v["witness"] = witness_json(&w);
            }
            print_json(&v);
        }
    }
    Ok(())
}

pub fn invariants(cfg: &RunConfig, path: Option<&Path>, jmax: Option<i64>) -> Result<(), CliError> {
    let input = parse_matrix_input(&read_input(path)?)?;
    let (p, q) = resolve_shape(cfg, &input)?;
    let flag = matrix_to_flag(p, q, &input.matrix)?;
    if let Some(j) = jmax.filter(|&j| j < 1) {
        return Err(CliError::Parse(format!("--jmax must be positive, got {j}")));
    }
    let table = FlagInvariants::new(&flag).table(jmax);
    match cfg.format {
        Format::Text => print!("{}", table.to_text()),
        Format::Json => {
            let mut v = table.to_json();
            v["p"] = json!(p);
            v["q"] = json!(q);
            v["jmax"] = json!(table.j_max);
            print_json(&v);
        }
    }
    Ok(())
}

pub fn paper_tables(cfg: &RunConfig, out: Option<&Path>) -> Result<(), CliError> {
    let tables = all_tables();
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        for (name, body) in &tables {
            fs::write(dir.join(name), body)?;
        }
        return Ok(());
    }
    match cfg.format {
        Format::Text => {
            let parts: Vec<String> = tables.iter().map(|(name, body)| format!("==> {name} <==\n{body}")).collect();
            print!("{}", parts.join("\n"));
        }
        Format::Json => {
            let map: serde_json::Map<String, Value> =
                tables.into_iter().map(|(name, body)| (name.to_string(), json!(body))).collect();
            print_json(&Value::Object(map));
        }
    }
    Ok(())
}

pub fn enumerate(cfg: &RunConfig, depth: u32, with_matrices: bool, render: Option<Render>) -> Result<(), CliError> {
    let (Some(p), Some(q)) = (cfg.p, cfg.q) else {
        return Err(CliError::Parse("enumerate needs --p and --q".into()));
    };
    let clans = enumerate_clans(p, q, depth);
    let diagram = |c: &affclan::AffineClan, r: Render| {
        c.render_winding(r.name()).map_err(|e| CliError::Parse(e.to_string()))
    };
    match cfg.format {
        Format::Text => {
            for c in &clans {
                if with_matrices {
                    println!("{c}  {}", to_clan_matrix(c).matrix());
                } else {
                    println!("{c}");
                }
                if let Some(r) = render {
                    print!("{}", diagram(c, r)?);
                }
            }
        }
        Format::Json => {
            let mut items = Vec::with_capacity(clans.len());
            for c in &clans {
                let mut item = json!({ "clan": c.to_string() });
                if with_matrices {
                    item["matrix"] = clan_matrix_json(&to_clan_matrix(c))["matrix"].clone();
                }
                if let Some(r) = render {
                    item["diagram"] = json!(diagram(c, r)?);
                }
                items.push(item);
            }
            print_json(&json!({ "p": p, "q": q, "depth": depth, "count": clans.len(), "clans": items }));
        }
    }
    Ok(())
}
