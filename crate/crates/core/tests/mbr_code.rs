use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regen_core::mds::verify_mds;
use regen_core::subsets::{binomial, combinations};
use regen_core::{
    Construction, Error, Field, FieldSpec, IncidenceMatrix, MbrCodeSpec, MbrParams, NodeId, NodeState, VectorFamily,
};

const TABLE_5: [[u8; 10]; 5] = [
    [1, 1, 1, 1, 0, 0, 0, 0, 0, 0],
    [1, 0, 0, 0, 1, 1, 1, 0, 0, 0],
    [0, 1, 0, 0, 1, 0, 0, 1, 1, 0],
    [0, 0, 1, 0, 0, 1, 0, 1, 0, 1],
    [0, 0, 0, 1, 0, 0, 1, 0, 1, 1],
];

fn random_source(spec: &MbrCodeSpec, rng: &mut ChaCha8Rng) -> Vec<u16> {
    let q = spec.field().order();
    (0..spec.params().b).map(|_| rng.gen_range(0..q) as u16).collect()
}

fn ids(v: &[usize]) -> Vec<NodeId> {
    v.iter().map(|&i| NodeId(i)).collect()
}

#[test]
fn five_three_parameters() {
    let p = MbrParams::derive(5, 3).unwrap();
    assert_eq!((p.d, p.alpha, p.beta, p.b, p.theta), (4, 4, 1, 9, 10));
    let p = MbrParams::derive(2, 1).unwrap();
    assert_eq!((p.d, p.alpha, p.b, p.theta), (1, 1, 1, 1));
    let p = MbrParams::derive(6, 3).unwrap();
    assert_eq!((p.b, p.theta), (12, 15));
    assert!(MbrParams::derive(3, 3).is_err());
    assert!(MbrParams::derive(3, 0).is_err());
}

#[test]
fn incidence_matches_printed_table() {
    let v = IncidenceMatrix::complete_graph(5).unwrap();
    let rows = v.to_rows();
    for (j, row) in TABLE_5.iter().enumerate() {
        assert_eq!(rows[j], row.to_vec(), "row n{}", j + 1);
    }
    assert_eq!(
        IncidenceMatrix::complete_graph(2).unwrap().to_rows(),
        vec![vec![1], vec![1]]
    );
}

#[test]
fn incidence_properties_up_to_twelve() {
    for n in 2..=12 {
        let v = IncidenceMatrix::complete_graph(n).unwrap();
        let rows = v.to_rows();
        let theta = n * (n - 1) / 2;
        assert_eq!(v.theta(), theta);
        for row in &rows {
            assert_eq!(row.iter().filter(|&&x| x == 1).count(), n - 1);
        }
        for c in 0..theta {
            assert_eq!(rows.iter().filter(|r| r[c] == 1).count(), 2);
        }
        for a in 0..n {
            for b in a + 1..n {
                let shared: Vec<usize> = (0..theta).filter(|&c| rows[a][c] == 1 && rows[b][c] == 1).collect();
                assert_eq!(shared.len(), 1);
                assert_eq!(shared[0], v.column_between(a, b));
            }
        }
        let edges = v.edges();
        assert!(edges.windows(2).all(|w| w[0] < w[1]));
    }
}

#[test]
fn node_symbols_follow_incidence() {
    let spec = MbrCodeSpec::new(5, 3).unwrap();
    assert_eq!(spec.node_columns(NodeId(1)).unwrap(), &[0, 1, 2, 3]);
    assert_eq!(spec.node_columns(NodeId(3)).unwrap(), &[1, 4, 7, 8]);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let source = random_source(&spec, &mut rng);
    let nodes = spec.encode(&source).unwrap();
    let f = spec.field();
    for node in &nodes {
        for (pos, &col) in spec.node_columns(node.id).unwrap().iter().enumerate() {
            assert_eq!(node.symbols[pos], f.dot(&source, spec.family().vector(col)));
        }
    }
    let zeros = spec.encode(&[0; 9]).unwrap();
    assert!(zeros.iter().all(|n| n.symbols.iter().all(|&s| s == 0)));
}

#[test]
fn single_parity_check_by_hand() {
    let gf2 = Field::new(FieldSpec::gf2(1).unwrap());
    let spec = MbrCodeSpec::with_field(5, 3, &gf2).unwrap();
    assert_eq!(spec.family().construction(), Construction::SingleParityCheck);
    let mut e0 = vec![0; 9];
    e0[0] = 1;
    // v_1 = e_0 and v_10 = all ones see f = e_0; every other edge is 0.
    let expected = [[1, 0, 0, 0], [1, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 1], [0, 0, 0, 1]];
    let nodes = spec.encode(&e0).unwrap();
    for (node, want) in nodes.iter().zip(expected) {
        assert_eq!(node.symbols, want.to_vec());
    }
}

#[test]
fn node_three_repair_plan() {
    let spec = MbrCodeSpec::new(5, 3).unwrap();
    let plan = spec.repair_plan(NodeId(3)).unwrap();
    let got: Vec<(usize, usize)> = plan
        .iter()
        .map(|s| (s.helper.0, spec.node_columns(s.helper).unwrap()[s.helper_position]))
        .collect();
    // v2 from node 1, v5 from node 2, v8 from node 4, v9 from node 5
    assert_eq!(got, vec![(1, 1), (2, 4), (4, 7), (5, 8)]);
}

#[test]
fn reconstruction_from_first_three_nodes() {
    let spec = MbrCodeSpec::new(5, 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let source = random_source(&spec, &mut rng);
    let nodes = spec.encode(&source).unwrap();
    assert_eq!(
        spec.distinct_edges(&ids(&[1, 2, 3])).unwrap(),
        (0..9).collect::<Vec<_>>()
    );
    assert_eq!(spec.reconstruct(&nodes[..3]).unwrap(), source);
}

fn sweep_reconstruction(spec: &MbrCodeSpec, rng: &mut ChaCha8Rng) {
    let p = *spec.params();
    let source = random_source(spec, rng);
    let nodes = spec.encode(&source).unwrap();
    for subset in combinations(p.n, p.k) {
        let chosen: Vec<NodeState> = subset.iter().map(|&i| nodes[i].clone()).collect();
        let ids: Vec<NodeId> = chosen.iter().map(|n| n.id).collect();
        assert_eq!(spec.decoder(&ids).unwrap().repeat_count(), binomial(p.k, 2));
        assert_eq!(
            spec.reconstruct(&chosen).unwrap(),
            source,
            "n={} k={} {:?}",
            p.n,
            p.k,
            subset
        );
    }
}

fn sweep_regeneration(spec: &MbrCodeSpec, rng: &mut ChaCha8Rng) {
    let p = *spec.params();
    let source = random_source(spec, rng);
    let nodes = spec.encode(&source).unwrap();
    for failed in 0..p.n {
        let helpers: Vec<NodeState> = nodes.iter().filter(|s| s.id.index() != failed).cloned().collect();
        let (new, transcript) = spec.regenerate(NodeId::from_index(failed), &helpers).unwrap();
        assert_eq!(new, nodes[failed]);
        assert_eq!(transcript.total_symbols(), p.n - 1);
        assert_eq!(transcript.helpers.len(), p.d);
    }
}

#[test]
fn reconstruction_universality_up_to_seven() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in 2..=7 {
        for k in 1..n {
            let spec = MbrCodeSpec::new(n, k).unwrap();
            assert!(verify_mds(spec.family(), spec.params().b));
            sweep_reconstruction(&spec, &mut rng);
        }
    }
}

#[test]
fn exact_regeneration_up_to_eight() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for n in 2..=8 {
        for k in 1..n {
            sweep_regeneration(&MbrCodeSpec::new(n, k).unwrap(), &mut rng);
        }
    }
}

#[test]
fn gf2_single_parity_check_code() {
    let gf2 = Field::new(FieldSpec::gf2(1).unwrap());
    let spec = MbrCodeSpec::with_field(5, 3, &gf2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..8 {
        sweep_reconstruction(&spec, &mut rng);
        sweep_regeneration(&spec, &mut rng);
    }
}

#[test]
fn vandermonde_needs_big_enough_field() {
    let gf7 = Field::new(FieldSpec::prime(7).unwrap());
    // (5,2): theta = 10, B = 7, neither special case applies
    assert!(matches!(
        MbrCodeSpec::with_field(5, 2, &gf7),
        Err(Error::FieldTooSmall { .. })
    ));
    let gf16 = Field::new(FieldSpec::gf2(4).unwrap());
    let spec = MbrCodeSpec::with_field(5, 2, &gf16).unwrap();
    assert_eq!(spec.family().construction(), Construction::Vandermonde);
    sweep_reconstruction(&spec, &mut ChaCha8Rng::seed_from_u64(6));
}

#[test]
fn soak_keeps_every_subset_decodable() {
    let spec = MbrCodeSpec::new(6, 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let source = random_source(&spec, &mut rng);
    let original = spec.encode(&source).unwrap();
    let mut nodes = original.clone();
    for cycle in 0..1000 {
        let failed = rng.gen_range(0..6);
        nodes[failed].symbols.iter_mut().for_each(|s| *s = 0);
        nodes[failed].live = false;
        let helpers: Vec<NodeState> = nodes.iter().filter(|s| s.live).cloned().collect();
        let (new, _) = spec.regenerate(NodeId::from_index(failed), &helpers).unwrap();
        nodes[failed] = new;
        if cycle % 100 == 99 {
            for subset in combinations(6, 3) {
                let chosen: Vec<NodeState> = subset.iter().map(|&i| nodes[i].clone()).collect();
                assert_eq!(spec.reconstruct(&chosen).unwrap(), source);
            }
        }
    }
    assert_eq!(nodes, original);
}

#[test]
fn corrupted_duplicate_is_rejected() {
    let spec = MbrCodeSpec::new(5, 3).unwrap();
    let mut nodes = spec.encode(&[1, 0, 1, 1, 0, 1, 0, 1, 1]).unwrap();
    let q = spec.field().order() as u16;
    nodes[1].symbols[0] = (nodes[1].symbols[0] + 1) % q;
    assert!(matches!(
        spec.reconstruct(&nodes[..3]),
        Err(Error::InconsistentSymbols(_, _))
    ));
}

#[test]
fn reconstruct_input_errors() {
    let spec = MbrCodeSpec::new(5, 3).unwrap();
    let nodes = spec.encode(&[0; 9]).unwrap();
    let dup = vec![nodes[0].clone(), nodes[0].clone(), nodes[1].clone()];
    assert!(matches!(spec.reconstruct(&dup), Err(Error::DuplicateNode(_))));
    assert!(matches!(
        spec.reconstruct(&nodes[..2]),
        Err(Error::WrongNodeCount { .. })
    ));
    let mut dead = nodes[..3].to_vec();
    dead[2].live = false;
    assert!(matches!(spec.reconstruct(&dead), Err(Error::DeadNode(_))));
    assert!(spec.encode(&[0; 8]).is_err());
    let helpers: Vec<NodeState> = nodes[1..4].to_vec();
    assert!(matches!(
        spec.regenerate(NodeId(1), &helpers),
        Err(Error::MissingHelper(NodeId(5)))
    ));
}

#[test]
fn family_shape_is_checked() {
    let gf7 = Field::new(FieldSpec::prime(7).unwrap());
    let fam = VectorFamily::identity(&gf7, 9);
    assert!(MbrCodeSpec::with_family(5, 3, fam).is_err());
}
