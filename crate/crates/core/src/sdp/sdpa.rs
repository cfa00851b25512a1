//! SDPA sparse (`.dat-s`) text format.
//!
//! Our primal `min <C, X> s.t. <A_k, X> = b_k` is SDPA's dual form with
//! `F_k = A_k`, `c = b` and `F_0 = -C` (`F_0 = C` for maximization). Free
//! blocks are written as diagonal blocks of twice the size holding the
//! positive and negative parts; a comment line records the split.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use super::problem::{BlockKind, BlockSdpProblem, Coef, Sense};
use super::SdpError;

const TAG: &str = "* sosinterp:";

/// Writes the problem in SDPA sparse format.
pub fn export_sdpa<W: Write>(p: &BlockSdpProblem, mut w: W) -> Result<(), SdpError> {
    let mut s = String::new();
    let sense = match p.sense() {
        Sense::Min => "min",
        Sense::Max => "max",
    };
    writeln!(s, "{TAG} sense={sense}").unwrap();
    for (bi, kind) in p.blocks().iter().enumerate() {
        if let BlockKind::Free(n) = kind {
            writeln!(s, "{TAG} free block={} size={n}", bi + 1).unwrap();
        }
    }
    writeln!(s, "{}", p.num_constraints()).unwrap();
    writeln!(s, "{}", p.blocks().len()).unwrap();
    let sizes: Vec<String> = p
        .blocks()
        .iter()
        .map(|k| match *k {
            BlockKind::Psd(n) => format!("{n}"),
            BlockKind::Nonneg(n) => format!("-{n}"),
            BlockKind::Free(n) => format!("-{}", 2 * n),
        })
        .collect();
    writeln!(s, "{}", sizes.join(" ")).unwrap();
    let rhs: Vec<String> = p.rhs().iter().map(|v| format!("{v:e}")).collect();
    writeln!(s, "{}", rhs.join(" ")).unwrap();
    let f0_sign = match p.sense() {
        Sense::Min => -1.0,
        Sense::Max => 1.0,
    };
    let emit = |s: &mut String, matno: usize, scale: f64, entries: Vec<(usize, usize, f64)>, bi: usize| {
        let kind = p.blocks()[bi];
        for (i, j, v) in entries {
            let v = scale * v;
            writeln!(s, "{matno} {} {} {} {v:e}", bi + 1, i + 1, j + 1).unwrap();
            if let BlockKind::Free(n) = kind {
                writeln!(s, "{matno} {} {} {} {:e}", bi + 1, n + i + 1, n + j + 1, -v).unwrap();
            }
        }
    };
    for bi in 0..p.blocks().len() {
        emit(&mut s, 0, f0_sign, p.entries(None, bi), bi);
    }
    for k in 0..p.num_constraints() {
        for bi in 0..p.blocks().len() {
            emit(&mut s, k + 1, 1.0, p.entries(Some(k), bi), bi);
        }
    }
    w.write_all(s.as_bytes())?;
    Ok(())
}

fn parse_err(line: usize, msg: impl Into<String>) -> SdpError {
    SdpError::Parse {
        line,
        msg: msg.into(),
    }
}

/// Reads an SDPA sparse file. Without our metadata comments the problem is
/// taken as a minimization with no free blocks.
pub fn import_sdpa<R: BufRead>(r: R) -> Result<BlockSdpProblem, SdpError> {
    let mut sense = Sense::Min;
    let mut free: Vec<(usize, usize)> = Vec::new();
    // header tokens are collected across lines until complete
    let mut header: Vec<(usize, String)> = Vec::new();
    let mut prob: Option<BlockSdpProblem> = None;
    let mut kinds: Vec<BlockKind> = Vec::new();

    for (idx, line) in r.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if let Some(rest) = trimmed.strip_prefix(TAG) {
            let rest = rest.trim();
            if let Some(v) = rest.strip_prefix("sense=") {
                sense = match v.trim() {
                    "min" => Sense::Min,
                    "max" => Sense::Max,
                    o => return Err(parse_err(lineno, format!("unknown sense {o}"))),
                };
            } else if let Some(v) = rest.strip_prefix("free ") {
                let mut block = None;
                let mut size = None;
                for kv in v.split_whitespace() {
                    match kv.split_once('=') {
                        Some(("block", b)) => block = b.parse::<usize>().ok(),
                        Some(("size", n)) => size = n.parse::<usize>().ok(),
                        _ => {}
                    }
                }
                match (block, size) {
                    (Some(b), Some(n)) if b >= 1 => free.push((b - 1, n)),
                    _ => return Err(parse_err(lineno, "malformed free-block comment")),
                }
            }
            continue;
        }
        if trimmed.is_empty() || trimmed.starts_with('*') || trimmed.starts_with('"') {
            continue;
        }
        if prob.is_none() {
            let cleaned: String = trimmed
                .chars()
                .map(|c| if ",{}()".contains(c) { ' ' } else { c })
                .collect();
            for tok in cleaned.split_whitespace() {
                header.push((lineno, tok.to_string()));
            }
            if let Some(pb) = build_header(&header, sense, &free)? {
                kinds = pb.blocks().to_vec();
                prob = Some(pb);
            }
            continue;
        }
        let pb = prob.as_mut().unwrap();
        let toks: Vec<&str> = trimmed.split_whitespace().collect();
        if toks.len() != 5 {
            return Err(parse_err(lineno, format!("expected 5 fields, found {}", toks.len())));
        }
        let int = |s: &str| s.parse::<usize>().map_err(|_| parse_err(lineno, format!("bad index {s}")));
        let matno = int(toks[0])?;
        let blk = int(toks[1])?;
        let (mut i, mut j) = (int(toks[2])?, int(toks[3])?);
        let v: f64 = toks[4]
            .parse()
            .map_err(|_| parse_err(lineno, format!("bad value {}", toks[4])))?;
        if matno > pb.num_constraints() {
            return Err(parse_err(lineno, format!("matrix number {matno} out of range")));
        }
        if blk == 0 || blk > kinds.len() {
            return Err(parse_err(lineno, format!("block number {blk} out of range")));
        }
        if i == 0 || j == 0 {
            return Err(parse_err(lineno, "indices are 1-based"));
        }
        if i > j {
            std::mem::swap(&mut i, &mut j);
        }
        let bi = blk - 1;
        let kind = kinds[bi];
        let side = match kind {
            BlockKind::Free(n) => 2 * n,
            k => k.size(),
        };
        if j > side {
            return Err(parse_err(lineno, format!("index {j} exceeds block size {side}")));
        }
        if !kind.is_matrix() && i != j {
            return Err(parse_err(lineno, "off-diagonal entry in a diagonal block"));
        }
        let (i, j) = (i - 1, j - 1);
        // the negative half of a split free block mirrors the positive one
        if matches!(kind, BlockKind::Free(n) if i >= n) {
            continue;
        }
        let coef = Coef::Entries(vec![(i, j, v)]);
        if matno == 0 {
            let c = match sense {
                Sense::Min => -v,
                Sense::Max => v,
            };
            pb.set_objective(bi, Coef::Entries(vec![(i, j, c)]))
                .map_err(|e| parse_err(lineno, e.to_string()))?;
        } else {
            pb.set_coef(matno - 1, bi, coef)
                .map_err(|e| parse_err(lineno, e.to_string()))?;
        }
    }
    prob.ok_or_else(|| parse_err(0, "incomplete header"))
}

// Parses the accumulated header tokens; `None` while incomplete.
fn build_header(
    toks: &[(usize, String)],
    sense: Sense,
    free: &[(usize, usize)],
) -> Result<Option<BlockSdpProblem>, SdpError> {
    let parse_usize = |k: usize, what: &str| -> Result<Option<usize>, SdpError> {
        match toks.get(k) {
            None => Ok(None),
            Some((l, t)) => t
                .parse::<usize>()
                .map(Some)
                .map_err(|_| parse_err(*l, format!("bad {what} {t}"))),
        }
    };
    let Some(m) = parse_usize(0, "constraint count")? else { return Ok(None) };
    let Some(nb) = parse_usize(1, "block count")? else { return Ok(None) };
    if toks.len() < 2 + nb + m {
        return Ok(None);
    }
    if toks.len() > 2 + nb + m {
        let (l, t) = &toks[2 + nb + m];
        return Err(parse_err(*l, format!("unexpected token {t} after header")));
    }
    let mut pb = BlockSdpProblem::new(sense);
    for (bi, (l, t)) in toks[2..2 + nb].iter().enumerate() {
        let sz: i64 = t.parse().map_err(|_| parse_err(*l, format!("bad block size {t}")))?;
        if sz == 0 {
            return Err(parse_err(*l, "zero block size"));
        }
        let n = sz.unsigned_abs() as usize;
        let kind = if let Some(&(_, fsz)) = free.iter().find(|f| f.0 == bi) {
            if sz > 0 || n != 2 * fsz {
                return Err(parse_err(*l, format!("free block {} has size {sz}", bi + 1)));
            }
            BlockKind::Free(fsz)
        } else if sz > 0 {
            BlockKind::Psd(n)
        } else {
            BlockKind::Nonneg(n)
        };
        pb.add_block(kind);
    }
    for (l, t) in &toks[2 + nb..] {
        let v: f64 = t.parse().map_err(|_| parse_err(*l, format!("bad right-hand side {t}")))?;
        pb.add_constraint(v);
    }
    Ok(Some(pb))
}
