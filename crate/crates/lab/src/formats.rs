//! File formats: frame specs and dumps, flags, cell coordinates, roots, Serre
//! constants and the bound CSV.

use std::io::{Read, Write};
use std::path::Path;

use anyhow::{bail, Context};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use period_core::big_cell::{CellCoordinate, Membership, MembershipReport};
use period_core::exact::{Gq, QMat, Rational};
use period_core::hodge::HodgeFrame;
use period_core::numeric::CMat;
use period_core::orbit::BoundRow;
use period_core::roots::RootSystem;

use crate::config::FrameSpec;

pub const BOUND_HEADER: [&str; 10] = [
    "sample_id",
    "t",
    "i",
    "lambda_i",
    "coord_re",
    "coord_im",
    "coord_abs",
    "tanh_pred",
    "d_E",
    "in_big_cell",
];

pub fn read_frame_spec(path: &Path) -> anyhow::Result<FrameSpec> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading frame spec {}", path.display()))?;
    let spec: FrameSpec =
        serde_json::from_str(&text).with_context(|| format!("malformed frame spec {}", path.display()))?;
    spec.numbers().with_context(|| format!("invalid frame spec {}", path.display()))?;
    Ok(spec)
}

pub fn rational_string(x: &Rational) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// `"a"`, `"bi"`, `"a+bi"` with rational parts; `"i"` and `"-i"` for unit imaginary parts.
pub fn gaussian_string(z: &Gq) -> String {
    let zero = Rational::from_integer(0);
    let one = Rational::from_integer(1);
    let im = if z.im == one {
        "i".to_string()
    } else if z.im == -one {
        "-i".to_string()
    } else {
        format!("{}i", rational_string(&z.im))
    };
    match (z.re == zero, z.im == zero) {
        (_, true) => rational_string(&z.re),
        (true, false) => im,
        (false, false) => {
            let sep = if im.starts_with('-') { "" } else { "+" };
            format!("{}{sep}{im}", rational_string(&z.re))
        }
    }
}

fn parse_rational(s: &str) -> anyhow::Result<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let d: i64 = d.parse().with_context(|| format!("bad denominator in `{s}`"))?;
            if d == 0 {
                bail!("zero denominator in `{s}`");
            }
            Ok(Rational::new(n.parse().with_context(|| format!("bad numerator in `{s}`"))?, d))
        }
        None => Ok(Rational::from_integer(s.parse().with_context(|| format!("bad integer `{s}`"))?)),
    }
}

/// Inverse of [`gaussian_string`].
pub fn parse_gaussian(s: &str) -> anyhow::Result<Gq> {
    let s = s.trim();
    let zero = Rational::from_integer(0);
    let Some(body) = s.strip_suffix('i') else {
        return Ok(Gq::new(parse_rational(s)?, zero));
    };
    // Split at the last sign that is not the leading one.
    let split = body.char_indices().skip(1).filter(|(_, c)| *c == '+' || *c == '-').map(|(k, _)| k).last();
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => Rational::from_integer(1),
        "-" => Rational::from_integer(-1),
        other => parse_rational(other.trim_start_matches('+'))?,
    };
    Ok(Gq::new(parse_rational(re)?, im))
}

fn exact_rows(m: &QMat) -> Vec<Vec<String>> {
    (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| gaussian_string(&m[(r, c)])).collect()).collect()
}

pub fn frame_dump(frame: &HodgeFrame) -> Value {
    let nums = frame.numbers();
    let blocks: Vec<[usize; 2]> = (0..nums.num_blocks())
        .map(|a| {
            let b = nums.block(a);
            [b.start, b.end]
        })
        .collect();
    json!({
        "weight": nums.weight(),
        "hodge_numbers": nums.h(),
        "dim": nums.dim(),
        "filtration_dims": nums.f_list(),
        "blocks": blocks,
        "Q": exact_rows(frame.q()),
        "C": exact_rows(frame.weil()),
        "conj": exact_rows(&frame.conj_matrix()),
        "hermitian_form": exact_rows(&frame.hermitian_form()),
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct FlagJson {
    dim: usize,
    /// Row-major `(re, im)` pairs.
    entries: Vec<[f64; 2]>,
}

pub fn flag_from_json(text: &str) -> anyhow::Result<CMat> {
    let f: FlagJson = serde_json::from_str(text).context("malformed flag JSON")?;
    if f.entries.len() != f.dim * f.dim {
        bail!("flag JSON: expected {} entries for dim {}, found {}", f.dim * f.dim, f.dim, f.entries.len());
    }
    Ok(CMat::from_row_iterator(f.dim, f.dim, f.entries.iter().map(|[re, im]| Complex64::new(*re, *im))))
}

pub fn flag_to_json(a: &CMat) -> String {
    let entries: Vec<[f64; 2]> = (0..a.nrows())
        .flat_map(|r| (0..a.ncols()).map(move |c| (r, c)))
        .map(|rc| [a[rc].re, a[rc].im])
        .collect();
    serde_json::to_string(&FlagJson { dim: a.nrows(), entries }).expect("flag serializes")
}

/// One matrix row per record, `re, im` pairs; no header.
pub fn flag_from_csv<R: Read>(reader: R) -> anyhow::Result<CMat> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(reader);
    let mut rows: Vec<Vec<Complex64>> = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.with_context(|| format!("flag CSV row {}", k + 1))?;
        let vals: Vec<f64> = rec
            .iter()
            .map(|s| s.parse::<f64>().with_context(|| format!("flag CSV row {}: bad number `{s}`", k + 1)))
            .collect::<anyhow::Result<_>>()?;
        if vals.len() % 2 != 0 {
            bail!("flag CSV row {}: odd number of columns", k + 1);
        }
        rows.push(vals.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect());
    }
    let m = rows.len();
    if m == 0 || rows.iter().any(|r| r.len() != m) {
        bail!("flag CSV must be square with 2m columns per row");
    }
    Ok(CMat::from_fn(m, m, |r, c| rows[r][c]))
}

pub fn read_flag(path: &Path) -> anyhow::Result<CMat> {
    let ctx = || format!("reading flag {}", path.display());
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => flag_from_csv(std::fs::File::open(path).with_context(ctx)?).with_context(ctx),
        _ => flag_from_json(&std::fs::read_to_string(path).with_context(ctx)?).with_context(ctx),
    }
}

fn matrix_pairs(m: &CMat) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect()).collect()
}

pub fn membership_json(rep: &MembershipReport) -> Value {
    let (status, block) = match rep.status {
        Membership::Member => ("member", None),
        Membership::NonMember { block } => ("non-member", Some(block)),
        Membership::Indeterminate { block } => ("indeterminate", Some(block)),
    };
    json!({
        "status": status,
        "block": block,
        "ratios": rep.ratios,
        "minors": rep.minors.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
    })
}

pub fn cell_coordinate_json(coord: &CellCoordinate) -> Value {
    json!({ "L": matrix_pairs(&coord.l), "log_L": matrix_pairs(&coord.log_l) })
}

pub fn roots_json(rs: &RootSystem) -> Value {
    let roots: Vec<Value> = rs
        .roots
        .iter()
        .enumerate()
        .map(|(i, r)| {
            json!({
                "id": i,
                "coords": r.coords.iter().map(rational_string).collect::<Vec<_>>(),
                "hodge_degree": r.hodge_degree,
                "compact": r.compact,
                "positive": r.positive,
                "negative": r.negative,
                "simple": rs.simple.contains(&i),
            })
        })
        .collect();
    json!({
        "rank": rs.rank,
        "count": rs.len(),
        "order_basis": rs.order_basis,
        "central_direction": rs.central_direction.as_ref().map(|z| z.iter().map(rational_string).collect::<Vec<_>>()),
        "simple": rs.simple,
        "normalized": rs.normalized,
        "roots": roots,
    })
}

pub fn write_serre_csv<W: Write>(rs: &RootSystem, out: W) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["alpha", "beta", "sum", "value_re", "value_im"])?;
    for s in &rs.serre_constants {
        w.write_record([
            s.alpha.to_string(),
            s.beta.to_string(),
            s.sum.to_string(),
            s.value.re.to_string(),
            s.value.im.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_bound_csv<W: Write>(rows: &[BoundRow], out: W) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(BOUND_HEADER)?;
    for r in rows {
        w.write_record([
            r.sample_id.to_string(),
            r.t.to_string(),
            r.i.to_string(),
            r.lambda_i.to_string(),
            r.coord.re.to_string(),
            r.coord.im.to_string(),
            r.coord.norm().to_string(),
            r.tanh_pred.to_string(),
            r.d_e.to_string(),
            r.in_big_cell.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundSummary {
    pub max_abs_coord: f64,
    #[serde(rename = "max_d_E")]
    pub max_d_e: f64,
    pub violations: usize,
    pub config_hash: String,
}
