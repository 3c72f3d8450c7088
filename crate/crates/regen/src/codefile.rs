//! Plain-text description of a linear storage code.
//!
//! ```text
//! # comments and blank lines are ignored
//! n k d alpha beta B field=<spec>
//! <vector 1> | <vector 2> | ... | <vector alpha>     (one line per node)
//! ```
//!
//! Each vector is `B` space-separated integers in `0..q`; `field` is
//! `prime:<p>` or `gf2:<m>`.

use std::fmt::Write as _;

use regen_core::{Field, FieldSpec, LinearStorageCode, NodeId};

pub fn parse(text: &str) -> Result<LinearStorageCode, String> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(no, l)| (no + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (hno, header) = lines.next().ok_or("empty code description")?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 7 {
        return Err(format!("line {hno}: header must be `n k d alpha beta B field=<spec>`"));
    }
    let mut nums = [0usize; 6];
    for (slot, (name, raw)) in nums
        .iter_mut()
        .zip(["n", "k", "d", "alpha", "beta", "B"].iter().zip(&fields))
    {
        *slot = raw.parse().map_err(|_| format!("line {hno}: bad {name} `{raw}`"))?;
    }
    let [n, k, d, alpha, beta, b] = nums;
    let spec: FieldSpec = fields[6]
        .strip_prefix("field=")
        .ok_or_else(|| format!("line {hno}: expected field=<spec>"))?
        .parse()
        .map_err(|e| format!("line {hno}: {e}"))?;
    let field = Field::new(spec);

    let mut nodes = Vec::with_capacity(n);
    for (no, line) in lines {
        let vectors = line
            .split('|')
            .map(|v| {
                v.split_whitespace()
                    .map(|x| x.parse::<u16>().map_err(|_| format!("line {no}: bad entry `{x}`")))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        nodes.push(vectors);
    }
    LinearStorageCode::new(&field, n, k, d, alpha, beta, b, nodes).map_err(|e| e.to_string())
}

pub fn format(code: &LinearStorageCode) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} {} {} {} {} {} field={}",
        code.n,
        code.k,
        code.d,
        code.alpha,
        code.beta,
        code.b,
        code.field().spec()
    );
    for i in 0..code.n {
        let line: Vec<String> = code
            .node_vectors(NodeId::from_index(i))
            .iter()
            .map(|v| v.iter().map(u16::to_string).collect::<Vec<_>>().join(" "))
            .collect();
        let _ = writeln!(out, "{}", line.join(" | "));
    }
    out
}
