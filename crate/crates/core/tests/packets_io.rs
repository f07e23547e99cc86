use fiolab::packets::{
    make_knapp_sum, make_packet, make_tube, packet_grid, random_shell_field, read_mask, Envelope,
    GridPolicy, KnappSpec, WavePacketSpec,
};
use fiolab::symbols::{Cone, PhaseSpec};
use fiolab::{Field, GridSpec};

#[test]
fn knapp_manifest_lists_every_member() {
    let axis = [1.0, 0.0];
    let spec = KnappSpec::new(6, Cone::new(&axis, 30f64.to_radians()).unwrap());
    let (members, _) = fiolab::packets::knapp_members(&spec).unwrap();
    let dirs: Vec<[f64; 3]> = members.iter().map(|m| m.direction).collect();
    let grid = packet_grid(2, 6, &dirs, &axis, &Envelope::default(), 0.0, &GridPolicy::default()).unwrap();
    let sum = make_knapp_sum(&grid, &spec).unwrap();
    let mut buf = Vec::new();
    sum.write_manifest(&mut buf).unwrap();
    let mut rdr = csv::Reader::from_reader(buf.as_slice());
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), sum.members.len());
    for row in &rows {
        assert_eq!(&row[0], "6");
        let l2: f64 = row[8].parse().unwrap();
        assert!(l2 > 0.0);
    }
}

#[test]
fn packets_and_masks_round_trip_through_files() {
    let nu = [1.0, 0.0];
    let grid = packet_grid(2, 5, &[[1.0, 0.0, 0.0]], &nu, &Envelope::default(), 0.5, &GridPolicy::default()).unwrap();
    let f = make_packet(&grid, &WavePacketSpec::new(2, 5, &nu).unwrap()).unwrap();
    let dir = tempfile::tempdir().unwrap();

    // the header has no room for a carrier
    assert!(f.write_binary(Vec::new()).is_err());
    let plain = random_shell_field(&GridSpec::new(2, 32, 8.0).unwrap(), 1, 4).unwrap();
    let path = dir.path().join("field.bin");
    plain.write_binary(std::fs::File::create(&path).unwrap()).unwrap();
    let back = Field::read_binary(std::fs::File::open(&path).unwrap()).unwrap();
    assert_eq!(back.samples(), plain.samples());
    assert_eq!(back.grid(), plain.grid());

    let tube = make_tube(&grid, 5, &PhaseSpec::euclidean(2).unwrap(), 0.5, None).unwrap();
    let path = dir.path().join("tube.mask");
    tube.write_mask(std::fs::File::create(&path).unwrap()).unwrap();
    let (g, mask) = read_mask(std::fs::File::open(&path).unwrap()).unwrap();
    assert_eq!(g.points(), grid.points());
    assert_eq!(mask.iter().filter(|&&b| b).count(), tube.points().len());
}

#[test]
fn random_fields_depend_only_on_the_seed() {
    let grid = GridSpec::new(2, 64, 8.0).unwrap();
    let a = random_shell_field(&grid, 2, 11).unwrap();
    let b = random_shell_field(&grid, 2, 11).unwrap();
    let c = random_shell_field(&grid, 2, 12).unwrap();
    assert_eq!(a.samples(), b.samples());
    assert_ne!(a.samples(), c.samples());
    assert!((a.lp_norm(2.0).unwrap() - 1.0).abs() < 1e-12);
}
