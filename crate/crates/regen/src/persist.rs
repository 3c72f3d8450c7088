//! Cluster directories on disk.
//!
//! ```text
//! <root>/manifest.txt            key=value lines
//! <root>/vectors.txt             MBR with a custom family: θ lines of B symbols
//! <root>/node_<id>/chunk_<c>.sym α packed symbols of chunk c (0-based)
//! <root>/node_<id>/aux.txt       MSR: `version=<v>` then the node's k aux symbols
//! ```
//!
//! A node whose directory, chunk files or aux file are missing or malformed
//! loads as failed.

use std::fs;
use std::path::{Path, PathBuf};

use regen_core::mds::VectorFamily;
use regen_core::{AuxInit, Construction, Field, MbrCodeSpec, MsrCodeSpec, MsrParams, NodeId, Symbol};

use crate::cluster::{Cluster, Code};
use crate::error::{Result, SimError};
use crate::manifest::{CodeKind, Manifest};
use crate::packing;

pub const MANIFEST: &str = "manifest.txt";
pub const VECTORS: &str = "vectors.txt";
pub const AUX: &str = "aux.txt";

pub fn node_dir(root: &Path, id: NodeId) -> PathBuf {
    root.join(format!("node_{id}"))
}

pub fn chunk_path(root: &Path, id: NodeId, chunk: usize) -> PathBuf {
    node_dir(root, id).join(format!("chunk_{chunk}.sym"))
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|e| SimError::io(path, e))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| SimError::io(path, e))
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| SimError::io(path, e))
}

fn remove_dir(path: &Path) -> Result<()> {
    match fs::remove_dir_all(path) {
        Err(e) if e.kind() != std::io::ErrorKind::NotFound => Err(SimError::io(path, e)),
        _ => Ok(()),
    }
}

fn rename(from: &Path, to: &Path) -> Result<()> {
    fs::rename(from, to).map_err(|e| SimError::io(to, e))
}

/// Runs `fill` on a fresh staging directory and moves it to `target` only
/// if it succeeds.
fn staged(staging: &Path, target: &Path, fill: impl FnOnce(&Path) -> Result<()>) -> Result<()> {
    remove_dir(staging)?;
    create_dir(staging)?;
    let result = fill(staging).and_then(|()| {
        remove_dir(target)?;
        rename(staging, target)
    });
    if result.is_err() {
        let _ = fs::remove_dir_all(staging);
    }
    result
}

fn symbols_line(symbols: &[Symbol]) -> String {
    symbols.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" ")
}

fn write_node(cluster: &Cluster, dir: &Path, id: NodeId) -> Result<()> {
    create_dir(dir)?;
    let spec = cluster.manifest().field;
    for c in 0..cluster.manifest().chunks {
        let symbols = cluster.chunk(id, c).ok_or(regen_core::Error::DeadNode(id))?;
        write(
            &dir.join(format!("chunk_{c}.sym")),
            packing::encode_chunk(spec, symbols),
        )?;
    }
    if let Code::Msr(msr) = cluster.code() {
        let text = format!("version={}\n{}\n", msr.aux_version(), symbols_line(msr.aux_vector(id)?));
        write(&dir.join(AUX), text)?;
    }
    Ok(())
}

/// Writes the whole cluster to `root`, replacing an earlier cluster there.
/// Nothing is left behind on failure.
pub fn save(cluster: &Cluster, root: &Path) -> Result<()> {
    if root.exists() && !root.join(MANIFEST).exists() {
        let empty = fs::read_dir(root).map_err(|e| SimError::io(root, e))?.next().is_none();
        if !empty {
            return Err(SimError::format(root, "exists and is not a cluster directory"));
        }
    }
    let name = root.file_name().and_then(|n| n.to_str()).unwrap_or("cluster");
    let staging = root.with_file_name(format!(".{name}.partial"));
    staged(&staging, root, |dir| {
        write(&dir.join(MANIFEST), cluster.manifest().to_string())?;
        if let Code::Mbr(mbr) = cluster.code() {
            if mbr.family().construction() == Construction::Custom {
                let text: String = mbr.family().vectors().iter().map(|v| symbols_line(v) + "\n").collect();
                write(&dir.join(VECTORS), text)?;
            }
        }
        for id in cluster.live_nodes() {
            write_node(cluster, &node_dir(dir, id), id)?;
        }
        Ok(())
    })
}

/// Rewrites one node's directory and nothing else.
pub fn save_node(cluster: &Cluster, root: &Path, id: NodeId) -> Result<()> {
    let staging = root.join(format!(".node_{id}.partial"));
    staged(&staging, &node_dir(root, id), |dir| write_node(cluster, dir, id))
}

fn parse_symbols(line: &str, path: &Path, len: usize, field: &Field) -> Result<Vec<Symbol>> {
    let v = line
        .split_whitespace()
        .map(|x| {
            x.parse::<Symbol>()
                .ok()
                .filter(|&s| field.contains(u64::from(s)))
                .ok_or_else(|| SimError::format(path, format!("bad symbol `{x}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    if v.len() != len {
        return Err(SimError::format(
            path,
            format!("expected {len} symbols, found {}", v.len()),
        ));
    }
    Ok(v)
}

fn read_vectors(root: &Path, manifest: &Manifest, field: &Field) -> Result<VectorFamily> {
    let path = root.join(VECTORS);
    let text = read_text(&path)?;
    let vectors = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| parse_symbols(l, &path, manifest.b, field))
        .collect::<Result<Vec<_>>>()?;
    if vectors.len() != manifest.theta {
        return Err(SimError::format(
            &path,
            format!("expected {} vectors, found {}", manifest.theta, vectors.len()),
        ));
    }
    VectorFamily::custom(field, manifest.b, vectors).map_err(|e| SimError::format(&path, e.to_string()))
}

fn read_node(root: &Path, manifest: &Manifest, id: NodeId) -> Option<Vec<Symbol>> {
    let mut out = Vec::with_capacity(manifest.chunks * manifest.alpha);
    for c in 0..manifest.chunks {
        let bytes = fs::read(chunk_path(root, id, c)).ok()?;
        out.extend(packing::decode_chunk(manifest.field, &bytes, manifest.alpha)?);
    }
    Some(out)
}

fn read_aux(root: &Path, id: NodeId, k: usize, field: &Field) -> Option<(u64, Vec<Symbol>)> {
    let path = node_dir(root, id).join(AUX);
    let text = fs::read_to_string(&path).ok()?;
    let mut lines = text.lines();
    let version = lines.next()?.strip_prefix("version=")?.trim().parse().ok()?;
    let aux = parse_symbols(lines.next()?, &path, k, field).ok()?;
    Some((version, aux))
}

/// Loads the cluster at `root`; `seed` drives later random choices.
pub fn load(root: &Path, seed: u64) -> Result<Cluster> {
    let manifest_path = root.join(MANIFEST);
    let mut manifest = Manifest::parse(&read_text(&manifest_path)?, &manifest_path)?;
    let field = Field::new(manifest.field);
    let mismatch = |e: regen_core::Error| SimError::format(&manifest_path, e.to_string());

    let mut nodes: Vec<Option<Vec<Symbol>>> = (1..=manifest.n)
        .map(|i| read_node(root, &manifest, NodeId(i)))
        .collect();
    let code = match manifest.code {
        CodeKind::Mbr => {
            let family = match manifest.construction {
                Construction::Custom => read_vectors(root, &manifest, &field)?,
                tag => VectorFamily::from_construction(tag, &field, manifest.theta, manifest.b).map_err(mismatch)?,
            };
            Code::Mbr(MbrCodeSpec::with_family(manifest.n, manifest.k, family).map_err(mismatch)?)
        }
        CodeKind::Msr => {
            let params = MsrParams::derive(manifest.n, manifest.k).map_err(mismatch)?;
            let mut version = manifest.aux_version.unwrap_or(0);
            let mut table = Vec::with_capacity(manifest.n);
            for (i, node) in nodes.iter_mut().enumerate() {
                match read_aux(root, NodeId::from_index(i), manifest.k, &field) {
                    Some((v, aux)) if node.is_some() => {
                        version = version.max(v);
                        table.push(aux);
                    }
                    // Without its aux vector a node cannot help in a repair.
                    _ => {
                        *node = None;
                        table.push(vec![0; manifest.k]);
                    }
                }
            }
            manifest.aux_version = Some(version);
            let spec = MsrCodeSpec::build(params, &field, AuxInit::Zero)
                .and_then(|s| s.with_aux_table(table, version))
                .map_err(mismatch)?;
            Code::Msr(spec)
        }
    };
    Cluster::from_parts(code, manifest, nodes, seed).map_err(|e| match e {
        SimError::Infeasible(msg) => SimError::format(&manifest_path, msg),
        other => other,
    })
}
