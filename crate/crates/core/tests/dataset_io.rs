use casekin::io::{parse_csv_reader, write_csv};
use casekin::{validate_dataset, Dataset, Error, FamilyRecord, Observation, RawRow, Role};
use proptest::prelude::*;

fn obs() -> impl Strategy<Value = Observation> {
    (0u64..120_000_000, any::<bool>()).prop_map(|(micro, e)| Observation::new(micro as f64 / 1e6, e))
}

fn dataset() -> impl Strategy<Value = Dataset> {
    (
        prop::collection::vec((obs(), prop::collection::vec(obs(), 0..5)), 0..30),
        obs(),
        obs(),
    )
        .prop_map(|(fams, a, b)| {
            let mut records: Vec<FamilyRecord> = fams
                .into_iter()
                .enumerate()
                .map(|(i, (p, r))| FamilyRecord::new(format!("f{i:04}"), p, r))
                .collect();
            records.push(FamilyRecord::new("zcase", Observation::event(a.time), vec![b]));
            records.push(FamilyRecord::new("zctrl", Observation::censored(b.time), vec![a]));
            Dataset::from_families(records).unwrap()
        })
}

proptest! {
    #[test]
    fn csv_round_trip_is_lossless(ds in dataset()) {
        let mut buf = Vec::new();
        write_csv(&ds, &mut buf).unwrap();
        let back = parse_csv_reader(buf.as_slice()).unwrap();
        prop_assert_eq!(back.families(), ds.families());
        prop_assert_eq!((back.n0(), back.n1()), (ds.n0(), ds.n1()));
    }

    #[test]
    fn dataset_invariants(ds in dataset()) {
        prop_assert_eq!(ds.n0() + ds.n1(), ds.len());
        prop_assert_eq!(ds.n_relatives(), ds.families().iter().map(|f| f.relatives.len()).sum::<usize>());
        let tau0 = ds.families().iter().map(|f| f.proband.time).fold(0.0, f64::max);
        prop_assert_eq!(ds.tau0(), tau0);
        prop_assert!(ds.families().iter().all(|f| f.group().index() == f.proband.status() as usize));
        let rebuilt = validate_dataset(ds.to_rows()).unwrap();
        prop_assert_eq!(rebuilt.families(), ds.families());
    }
}

#[test]
fn rows_must_name_exactly_one_proband() {
    let rows = vec![
        RawRow::new("a", Role::Relative, 3.0, 1),
        RawRow::new("b", Role::Proband, 3.0, 1),
    ];
    assert!(matches!(validate_dataset(rows), Err(Error::MissingProband(id)) if id == "a"));
    let rows = vec![
        RawRow::new("a", Role::Proband, 3.0, 1),
        RawRow::new("a", Role::Proband, 4.0, 0),
    ];
    assert!(matches!(validate_dataset(rows), Err(Error::DuplicateProband(_))));
}

#[test]
fn case_only_data_is_rejected() {
    let text = "family_id,role,time,status\nf1,P,64,1\nf1,R,50,1\n";
    assert!(matches!(parse_csv_reader(text.as_bytes()), Err(Error::EmptyDataset { n1: 1, n0: 0 })));
}

#[test]
fn negative_and_malformed_times() {
    let text = "family_id,role,time,status\nf1,P,64,1\nf2,P,-1,0\n";
    assert!(matches!(parse_csv_reader(text.as_bytes()), Err(Error::NegativeTime { .. })));
    let text = "family_id,role,time,status\nf1,P,abc,1\n";
    assert!(matches!(parse_csv_reader(text.as_bytes()), Err(Error::Parse { line: 2, .. })));
    let text = "family_id,role,time,status\nf1,X,3,1\n";
    assert!(matches!(parse_csv_reader(text.as_bytes()), Err(Error::Parse { line: 2, .. })));
}

#[test]
fn registry_sized_file_counts() {
    let mut text = String::from("family_id,role,time,status\n");
    let mut rel = 0;
    for i in 0..(730 + 693) {
        let case = i < 730;
        text.push_str(&format!("fam{i},P,{},{}\n", 50 + i % 15, u8::from(case)));
        let j = if i < 7316 % 1423 { 7316 / 1423 + 1 } else { 7316 / 1423 };
        for k in 0..j {
            text.push_str(&format!("fam{i},R,{},{}\n", 30 + (i + k) % 60, u8::from(k == 0 && i % 7 == 0)));
            rel += 1;
        }
    }
    let ds = parse_csv_reader(text.as_bytes()).unwrap();
    assert_eq!((ds.n1(), ds.n0(), ds.n_relatives()), (730, 693, 7316));
    assert_eq!(rel, 7316);
}
