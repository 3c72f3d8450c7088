use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regen_core::mds::{make_mds, select_field, systematize, verify_mds};
use regen_core::subsets::combinations;
use regen_core::{Construction, Field, FieldSpec, MbrCodeSpec, MbrParams, NodeId, NodeState, VectorFamily};

fn det3(f: &Field, m: [&[u16]; 3]) -> u16 {
    let minor = |a: usize, b: usize| f.sub(f.mul(m[1][a], m[2][b]), f.mul(m[1][b], m[2][a]));
    let t0 = f.mul(m[0][0], minor(1, 2));
    let t1 = f.mul(m[0][1], minor(0, 2));
    let t2 = f.mul(m[0][2], minor(0, 1));
    f.add(f.sub(t0, t1), t2)
}

#[test]
fn vandermonde_six_by_three_over_gf7() {
    let f = Field::new(FieldSpec::prime(7).unwrap());
    let fam = make_mds(6, 3, &f).unwrap();
    assert_eq!(fam.construction(), Construction::Vandermonde);
    let mut triples = 0;
    for t in combinations(6, 3) {
        let d = det3(&f, [fam.vector(t[0]), fam.vector(t[1]), fam.vector(t[2])]);
        assert_ne!(d, 0, "{t:?}");
        triples += 1;
    }
    assert_eq!(triples, 20);
    assert!(verify_mds(&fam, 3));
}

#[test]
fn determinant_oracle_catches_dependence() {
    let f = Field::new(FieldSpec::prime(7).unwrap());
    // (1,0,1) + (0,1,1) = (1,1,2)
    let fam = VectorFamily::custom(&f, 3, vec![vec![1, 0, 1], vec![0, 1, 1], vec![1, 1, 2], vec![0, 0, 1]]).unwrap();
    assert_eq!(det3(&f, [fam.vector(0), fam.vector(1), fam.vector(2)]), 0);
    assert!(!verify_mds(&fam, 3));
    assert!(verify_mds(&fam, 2));
}

#[test]
fn generated_families_are_mds() {
    for count in 1..=20 {
        for dim in 1..=count {
            let spec = select_field(count, dim).unwrap();
            let fam = make_mds(count, dim, &Field::new(spec)).unwrap();
            assert_eq!((fam.count(), fam.dim()), (count, dim));
            assert!(verify_mds(&fam, dim), "count={count} dim={dim} {spec}");
        }
    }
}

#[test]
fn auto_field_for_mbr_codes() {
    let cases = [
        ((5, 3), "gf2:1"),
        ((4, 2), "gf2:1"),
        ((5, 4), "gf2:1"),
        ((6, 3), "gf2:4"),
        ((7, 3), "prime:23"),
    ];
    for ((n, k), want) in cases {
        let spec = MbrCodeSpec::new(n, k).unwrap();
        assert_eq!(spec.field().spec().to_string(), want, "({n},{k})");
        let p = MbrParams::derive(n, k).unwrap();
        assert_eq!(p.theta - p.b, (n - k) * (n - k - 1) / 2);
    }
}

fn sweep(spec: &MbrCodeSpec, source: &[u16]) {
    let p = *spec.params();
    let nodes = spec.encode(source).unwrap();
    for subset in combinations(p.n, p.k) {
        let chosen: Vec<NodeState> = subset.iter().map(|&i| nodes[i].clone()).collect();
        assert_eq!(spec.reconstruct(&chosen).unwrap(), source);
    }
    for failed in 0..p.n {
        let helpers: Vec<NodeState> = nodes.iter().filter(|s| s.id.index() != failed).cloned().collect();
        assert_eq!(
            spec.regenerate(NodeId::from_index(failed), &helpers).unwrap().0,
            nodes[failed]
        );
    }
}

fn check_systematic(spec: &MbrCodeSpec, chosen: &[NodeId], seed: u64) {
    let sys = systematize(spec, chosen).unwrap();
    assert_eq!(sys.family().construction(), Construction::Custom);
    let q = sys.field().order();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let source: Vec<u16> = (0..sys.params().b).map(|_| rng.gen_range(0..q) as u16).collect();
    let nodes = sys.encode(&source).unwrap();

    // read the distinct edges of the chosen nodes straight off their storage
    let mut seen = vec![None; sys.params().theta];
    for id in chosen {
        for (pos, &col) in sys.node_columns(*id).unwrap().iter().enumerate() {
            seen[col] = Some(nodes[id.index()].symbols[pos]);
        }
    }
    let plain: Vec<u16> = seen.into_iter().flatten().collect();
    assert_eq!(plain, source);
    assert!(sys.decoder(chosen).unwrap().is_systematic());
    assert!(verify_mds(sys.family(), sys.params().b));
    sweep(&sys, &source);
}

#[test]
fn systematize_five_three() {
    let first: Vec<NodeId> = (1..=3).map(NodeId).collect();
    let gf16 = Field::new(FieldSpec::gf2(4).unwrap());
    check_systematic(&MbrCodeSpec::with_field(5, 3, &gf16).unwrap(), &first, 1);
    check_systematic(&MbrCodeSpec::new(5, 3).unwrap(), &first, 2);
    let gf11 = Field::new(FieldSpec::prime(11).unwrap());
    check_systematic(
        &MbrCodeSpec::with_field(5, 3, &gf11).unwrap(),
        &[NodeId(2), NodeId(4), NodeId(5)],
        3,
    );
}

#[test]
fn systematize_other_sizes() {
    for (n, k) in [(6, 3), (7, 2), (4, 1), (6, 5)] {
        let spec = MbrCodeSpec::new(n, k).unwrap();
        let chosen: Vec<NodeId> = (n - k + 1..=n).map(NodeId).collect();
        check_systematic(&spec, &chosen, n as u64);
    }
}

#[test]
fn systematic_spec_is_a_fixed_point() {
    // over GF(2) nodes 1..3 already hold e_0..e_8
    let spec = MbrCodeSpec::new(5, 3).unwrap();
    let chosen: Vec<NodeId> = (1..=3).map(NodeId).collect();
    assert!(spec.decoder(&chosen).unwrap().is_systematic());
    let again = systematize(&spec, &chosen).unwrap();
    assert_eq!(again.family().vectors(), spec.family().vectors());

    let gf17 = Field::new(FieldSpec::prime(17).unwrap());
    let once = systematize(&MbrCodeSpec::with_field(6, 3, &gf17).unwrap(), &chosen).unwrap();
    let twice = systematize(&once, &chosen).unwrap();
    assert_eq!(once.family().vectors(), twice.family().vectors());
}

#[test]
fn systematize_rejects_bad_sets() {
    let spec = MbrCodeSpec::new(5, 3).unwrap();
    assert!(systematize(&spec, &[NodeId(1), NodeId(2)]).is_err());
    assert!(systematize(&spec, &[NodeId(1), NodeId(1), NodeId(2)]).is_err());
    assert!(systematize(&spec, &[NodeId(1), NodeId(2), NodeId(9)]).is_err());
}

#[test]
fn construction_tags_rebuild_families() {
    let f = Field::new(FieldSpec::prime(11).unwrap());
    for (tag, count, dim) in [
        (Construction::Vandermonde, 8, 5),
        (Construction::SingleParityCheck, 6, 5),
        (Construction::Identity, 4, 4),
    ] {
        let fam = VectorFamily::from_construction(tag, &f, count, dim).unwrap();
        assert_eq!(fam, make_mds(count, dim, &f).unwrap());
        assert_eq!(tag.to_string().parse::<Construction>().unwrap(), tag);
    }
    assert!(VectorFamily::from_construction(Construction::Custom, &f, 4, 4).is_err());
}
