use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regen::packing;
use regen::{run_trial, Cluster, Code, CodeConfig, CodeKind, Explicit, FailureModel, LowestIds, SimError, TrialConfig};
use regen_core::{FieldSpec, NodeId, Symbol};

fn random_bytes(len: usize, seed: u64) -> Vec<u8> {
    let mut v = vec![0u8; len];
    ChaCha8Rng::seed_from_u64(seed).fill_bytes(&mut v);
    v
}

fn field(s: &str) -> Option<FieldSpec> {
    Some(s.parse().unwrap())
}

fn config(kind: CodeKind, n: usize, k: usize, f: Option<FieldSpec>) -> CodeConfig {
    CodeConfig {
        field: f,
        aux_seed: 7,
        ..CodeConfig::new(kind, n, k)
    }
}

fn ids(v: &[usize]) -> Vec<NodeId> {
    v.iter().copied().map(NodeId).collect()
}

#[test]
fn chunk_counts_and_padding() {
    // 18 one-byte symbols at B = 9
    let c = Cluster::ingest(&[5u8; 18], &config(CodeKind::Mbr, 5, 3, field("gf2:8")), 0).unwrap();
    assert_eq!((c.manifest().chunks, c.manifest().padding, c.manifest().b), (2, 0, 9));
    // exactly one chunk
    let c = Cluster::ingest(&[1u8; 9], &config(CodeKind::Mbr, 5, 3, field("gf2:8")), 0).unwrap();
    assert_eq!((c.manifest().chunks, c.manifest().padding), (1, 0));
    let c = Cluster::ingest(&[1u8], &config(CodeKind::Mbr, 5, 3, None), 0).unwrap();
    assert_eq!((c.manifest().chunks, c.manifest().padding), (1, 1));
    let c = Cluster::ingest(&[1u8; 10], &config(CodeKind::Msr, 5, 3, field("gf2:8")), 0).unwrap();
    assert_eq!((c.manifest().chunks, c.manifest().padding), (2, 2));
    for live in 1..=5 {
        assert_eq!(c.node_symbols(NodeId(live)).unwrap().len(), 2 * 2);
    }
}

#[test]
fn ingest_rejects_bad_input() {
    assert!(matches!(
        Cluster::ingest(&[], &config(CodeKind::Mbr, 5, 3, None), 0),
        Err(SimError::EmptyInput)
    ));
    assert!(Cluster::ingest(b"x", &config(CodeKind::Mbr, 3, 3, None), 0).is_err());
    assert!(Cluster::ingest(b"x", &config(CodeKind::Msr, 4, 3, None), 0).is_err());
    // MSR needs q >= n
    assert!(Cluster::ingest(b"x", &config(CodeKind::Msr, 6, 3, field("prime:5")), 0).is_err());
    let sys = CodeConfig {
        systematic: Some(ids(&[1, 2, 3])),
        ..config(CodeKind::Msr, 5, 3, None)
    };
    assert!(matches!(Cluster::ingest(b"x", &sys, 0), Err(SimError::Infeasible(_))));
}

#[test]
fn round_trip_from_every_subset() {
    let data = random_bytes(300, 1);
    for (kind, n, k, f) in [
        (CodeKind::Mbr, 5, 3, None),
        (CodeKind::Mbr, 6, 2, field("prime:17")),
        (CodeKind::Msr, 5, 3, field("prime:7")),
        (CodeKind::Msr, 6, 4, field("gf2:8")),
    ] {
        let c = Cluster::ingest(&data, &config(kind, n, k, f), 0).unwrap();
        for subset in regen_core::subsets::combinations(n, k) {
            let nodes: Vec<NodeId> = subset.iter().map(|&i| NodeId::from_index(i)).collect();
            assert_eq!(c.collect(&nodes).unwrap(), data, "{kind} n={n} k={k} {nodes:?}");
        }
    }
}

#[test]
fn mbr_repair_is_exact_and_costs_n_minus_one() {
    let data = random_bytes(200, 2);
    let mut c = Cluster::ingest(&data, &config(CodeKind::Mbr, 5, 3, None), 0).unwrap();
    for id in ids(&[1, 2, 3, 4, 5]) {
        let before = c.node_symbols(id).unwrap().to_vec();
        c.fail(id).unwrap();
        assert!(c.node_symbols(id).is_none());
        let t = c.repair(id, &LowestIds).unwrap();
        assert_eq!(t.symbols_per_chunk(), 4);
        assert!(t.helpers.iter().all(|h| h.symbols_per_chunk == 1));
        assert_eq!(t.total_symbols(), 4 * c.manifest().chunks);
        assert_eq!(c.node_symbols(id).unwrap(), &before[..]);
    }
}

/// `f·p_i` with `p_i = (1, x, ..., x^(k-1))`, `x = i - 1`, in GF(p).
fn main_symbol(f: &[Symbol], node: usize, p: u64) -> Symbol {
    let x = (node as u64 - 1) % p;
    let mut acc = 0u64;
    let mut pow = 1u64;
    for &c in f {
        acc = (acc + u64::from(c) * pow) % p;
        pow = pow * x % p;
    }
    acc as Symbol
}

#[test]
fn msr_repair_keeps_main_symbols() {
    let data = random_bytes(120, 3);
    let (n, k, p) = (6, 3, 7u64);
    let mut c = Cluster::ingest(&data, &config(CodeKind::Msr, n, k, field("prime:7")), 0).unwrap();
    let mut source = packing::bytes_to_symbols("prime:7".parse().unwrap(), &data);
    source.resize(c.manifest().chunks * 6, 0);
    for (round, failed) in [3, 1, 6, 3, 2].into_iter().enumerate() {
        c.fail(NodeId(failed)).unwrap();
        let t = c.repair(NodeId(failed), &LowestIds).unwrap();
        assert_eq!(t.symbols_per_chunk(), 4, "round {round}");
        for chunk in 0..c.manifest().chunks {
            let f = &source[chunk * 6..chunk * 6 + k];
            assert_eq!(c.chunk(NodeId(failed), chunk).unwrap()[0], main_symbol(f, failed, p));
        }
        let Code::Msr(spec) = c.code() else { unreachable!() };
        assert_eq!(spec.aux_version(), round as u64 + 1);
        assert_eq!(c.manifest().aux_version, Some(round as u64 + 1));
        assert_eq!(c.collect(&ids(&[1, 2, failed.max(3)])).unwrap(), data);
    }
}

#[test]
fn survivors_limit_repair_and_collection() {
    let data = random_bytes(50, 4);
    let mut c = Cluster::ingest(&data, &config(CodeKind::Msr, 5, 3, None), 0).unwrap();
    c.fail(NodeId(2)).unwrap();
    c.fail(NodeId(4)).unwrap();
    assert!(matches!(
        c.repair(NodeId(2), &LowestIds),
        Err(SimError::RepairImpossible { live: 3, d: 4 })
    ));
    assert_eq!(c.collect(&ids(&[1, 3, 5])).unwrap(), data);
    let (picked, bytes) = c.collect_random().unwrap();
    assert_eq!((picked, bytes), (ids(&[1, 3, 5]), data.clone()));
    c.fail(NodeId(5)).unwrap();
    assert!(matches!(
        c.collect(&ids(&[1, 3])),
        Err(SimError::DataLoss { live: 2, k: 3 })
    ));
    assert!(matches!(c.collect_random(), Err(SimError::DataLoss { .. })));
    assert!(matches!(
        c.repair(NodeId(2), &LowestIds),
        Err(SimError::RepairImpossible { live: 2, d: 4 })
    ));
}

#[test]
fn lifecycle_errors() {
    let mut c = Cluster::ingest(b"abc", &config(CodeKind::Mbr, 4, 2, None), 0).unwrap();
    assert!(matches!(c.repair(NodeId(1), &LowestIds), Err(SimError::NotFailed(_))));
    c.fail(NodeId(1)).unwrap();
    assert!(matches!(c.fail(NodeId(1)), Err(SimError::AlreadyFailed(_))));
    assert!(c.fail(NodeId(9)).is_err());
    assert!(c.fail(NodeId(0)).is_err());
    // a dead node cannot be read
    assert!(matches!(
        c.collect(&ids(&[1, 2])),
        Err(SimError::Code(regen_core::Error::DeadNode(NodeId(1))))
    ));
    // MBR repair needs all other nodes
    assert!(c.repair(NodeId(1), &Explicit(ids(&[2, 3]))).is_err());
    assert!(c.repair(NodeId(1), &Explicit(ids(&[2, 3, 3]))).is_err());
    c.repair(NodeId(1), &Explicit(ids(&[4, 3, 2]))).unwrap();
    assert_eq!(c.collect(&ids(&[1, 4])).unwrap(), b"abc");

    let mut m = Cluster::ingest(b"abc", &config(CodeKind::Msr, 6, 3, None), 0).unwrap();
    m.fail(NodeId(2)).unwrap();
    assert!(m.repair(NodeId(2), &Explicit(ids(&[1, 3, 4]))).is_err());
    assert!(m.repair(NodeId(2), &Explicit(ids(&[1, 2, 3, 4]))).is_err());
    m.repair(NodeId(2), &Explicit(ids(&[6, 5, 4, 3]))).unwrap();
    assert_eq!(m.collect(&ids(&[2, 5, 6])).unwrap(), b"abc");
}

#[test]
fn systematic_nodes_hold_source_uncoded() {
    let data = random_bytes(40, 5);
    let cfg = CodeConfig {
        systematic: Some(ids(&[1, 2, 3])),
        ..config(CodeKind::Mbr, 5, 3, field("prime:11"))
    };
    let c = Cluster::ingest(&data, &cfg, 0).unwrap();
    let Code::Mbr(spec) = c.code() else { unreachable!() };
    let mut source = packing::bytes_to_symbols("prime:11".parse().unwrap(), &data);
    source.resize(c.manifest().chunks * 9, 0);
    let mut seen = [false; 9];
    for id in ids(&[1, 2, 3]) {
        for (pos, v) in spec.node_vectors(id).unwrap().iter().enumerate() {
            let hot: Vec<usize> = (0..9).filter(|&j| v[j] != 0).collect();
            assert_eq!(hot.len(), 1, "node {id} position {pos} is coded");
            assert_eq!(v[hot[0]], 1);
            seen[hot[0]] = true;
            for chunk in 0..c.manifest().chunks {
                assert_eq!(c.chunk(id, chunk).unwrap()[pos], source[chunk * 9 + hot[0]]);
            }
        }
    }
    assert!(seen.iter().all(|&s| s));
    for subset in regen_core::subsets::combinations(5, 3) {
        let nodes: Vec<NodeId> = subset.iter().map(|&i| NodeId::from_index(i)).collect();
        assert_eq!(c.collect(&nodes).unwrap(), data);
    }
}

#[test]
fn serial_and_parallel_decoding_agree() {
    let data = random_bytes(20_000, 6);
    for (kind, n, k) in [(CodeKind::Mbr, 5, 3), (CodeKind::Msr, 5, 3)] {
        let c = Cluster::ingest(&data, &config(kind, n, k, None), 0).unwrap();
        assert!(c.manifest().chunks > 1000);
        let nodes = ids(&[2, 4, 5]);
        let serial = c.decode_symbols(&nodes, false).unwrap();
        assert_eq!(serial, c.decode_symbols(&nodes, true).unwrap());
        assert_eq!(c.collect_with(&nodes, false).unwrap(), data);
        assert_eq!(c.collect_with(&nodes, true).unwrap(), data);
    }
}

#[test]
fn consistency_check_finds_tampering() {
    let data = random_bytes(64, 7);
    let c = Cluster::ingest(&data, &config(CodeKind::Mbr, 5, 3, None), 0).unwrap();
    assert!(c.consistency_failures().unwrap().is_empty());
    let mut nodes: Vec<Option<Vec<Symbol>>> = (1..=5).map(|i| c.node_symbols(NodeId(i)).map(<[_]>::to_vec)).collect();
    let v = nodes[4].as_mut().unwrap();
    v[10] ^= 1;
    let bad = Cluster::from_parts(c.code().clone(), c.manifest().clone(), nodes, 0).unwrap();
    let problems = bad.consistency_failures().unwrap();
    assert_eq!(problems.len(), 1, "{problems:?}");
    assert!(problems[0].contains("node 5"));
}

#[test]
fn soak_mbr_and_msr() {
    for (kind, n, k, f) in [(CodeKind::Mbr, 5, 3, None), (CodeKind::Msr, 6, 3, field("prime:7"))] {
        let data = random_bytes(64, 8);
        let mut c = Cluster::ingest(&data, &config(kind, n, k, f), 42).unwrap();
        for cycle in 0..1000 {
            let id = c.fail_random().unwrap();
            c.repair(id, &LowestIds).unwrap();
            let (_, bytes) = c.collect_random().unwrap();
            assert_eq!(bytes, data, "{kind} cycle {cycle}");
        }
        assert_eq!(c.log().len(), 1 + 2 * 1000);
    }
}

#[test]
fn trial_accounting_and_optima() {
    let m = run_trial(&TrialConfig::new(CodeKind::Mbr, 5, 3, 100, 9)).unwrap();
    assert_eq!(m.per_repair_range(), Some((4, 4)));
    assert_eq!(m.total_repair_symbols(), 100 * 4 * m.chunks);
    assert_eq!((m.reconstructions_ok, m.reconstructions_failed), (100, 0));
    let text = m.to_string();
    assert!(text.contains("per_repair_symbols_per_chunk=4\n"));
    assert!(text.contains("optimal_repair_symbols_per_chunk=4\n"));
    assert!(text.contains("optimal_alpha=4\noptimal_beta=1\n"));

    let m = run_trial(&TrialConfig::new(CodeKind::Msr, 6, 3, 100, 9)).unwrap();
    assert_eq!(m.per_repair_range(), Some((4, 4)));
    assert_eq!(m.naive_repair_symbols(), 6);
    assert_eq!(m.total_repair_symbols(), 100 * 4 * m.chunks);
    let text = m.to_string();
    assert!(text.contains("naive_repair_symbols_per_chunk=6\n"));
    assert!(text.contains("optimal_alpha=2\noptimal_beta=1\n"));

    let burst = TrialConfig {
        model: FailureModel::Burst(2),
        ..TrialConfig::new(CodeKind::Msr, 6, 3, 50, 9)
    };
    let m = run_trial(&burst).unwrap();
    assert_eq!(m.rows.len(), 100);
    assert_eq!(m.total_repair_symbols(), 100 * 4 * m.chunks);
    assert_eq!(m.reconstructions_failed, 0);
}

#[test]
fn trial_configs_that_cannot_run() {
    for model in [FailureModel::Burst(0), FailureModel::Burst(3)] {
        let cfg = TrialConfig {
            model,
            ..TrialConfig::new(CodeKind::Msr, 6, 3, 5, 0)
        };
        assert!(matches!(run_trial(&cfg), Err(SimError::Infeasible(_))));
    }
    let cfg = TrialConfig {
        model: FailureModel::Burst(2),
        ..TrialConfig::new(CodeKind::Mbr, 5, 3, 5, 0)
    };
    assert!(run_trial(&cfg).is_err());
    let cfg = TrialConfig {
        payload_bytes: 0,
        ..TrialConfig::new(CodeKind::Mbr, 5, 3, 5, 0)
    };
    assert!(run_trial(&cfg).is_err());
}

#[test]
fn zero_cycles_only_reconstructs() {
    let m = run_trial(&TrialConfig::new(CodeKind::Msr, 5, 3, 0, 1)).unwrap();
    assert!(m.rows.is_empty());
    assert_eq!(m.total_repair_symbols(), 0);
    assert_eq!((m.reconstructions_ok, m.reconstructions_failed), (1, 0));
    assert!(m.to_string().contains("per_repair_symbols_per_chunk=none\n"));
}

#[test]
fn trials_are_deterministic() {
    for kind in [CodeKind::Mbr, CodeKind::Msr] {
        let cfg = TrialConfig::new(kind, 6, 3, 60, 123);
        let a = run_trial(&cfg).unwrap();
        let b = run_trial(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_string(), b.to_string());
        let (mut ca, mut cb) = (Vec::new(), Vec::new());
        a.write_csv(&mut ca).unwrap();
        b.write_csv(&mut cb).unwrap();
        assert_eq!(ca, cb);
        let other = run_trial(&TrialConfig::new(kind, 6, 3, 60, 124)).unwrap();
        assert_ne!(a.log, other.log);
    }
}

#[test]
fn csv_has_one_row_per_repair() {
    let m = run_trial(&TrialConfig::new(CodeKind::Msr, 5, 3, 7, 2)).unwrap();
    let mut buf = Vec::new();
    m.write_csv(&mut buf).unwrap();
    let mut reader = csv::Reader::from_reader(&buf[..]);
    let header = reader.headers().unwrap().clone();
    assert_eq!(&header[0], "cycle");
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 7);
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r[0].parse::<usize>().unwrap(), i);
        assert_eq!(&r[3], "4");
        assert_eq!(r[2].split(',').count(), 4);
    }
}
