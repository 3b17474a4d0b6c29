use interactionkit::formats::{read_estimates, read_soum, read_tabular, write_estimates, write_soum, write_tabular};
use interactionkit::GameSource;
use interactionkit_core::index::exact_cii;
use interactionkit_core::{Coalition, Game, IndexKind, SoumGame, TabularGame};
use proptest::prelude::*;

#[test]
fn soum_dumped_as_table_keeps_every_value() {
    let soum = SoumGame::generate(10, 30, 6).unwrap();
    let mut buf = Vec::new();
    write_tabular(&mut buf, &soum).unwrap();
    let table = read_tabular(buf.as_slice()).unwrap();
    for bits in 0..1u64 << 10 {
        let s = Coalition::from_bits_unchecked(bits);
        assert_eq!(table.value(s), soum.value(s));
    }
}

#[test]
fn table_rows_may_come_in_any_order() {
    let g = TabularGame::from_fn(3, |s| s.bits() as f64 * 0.5 - 1.0).unwrap();
    let mut buf = Vec::new();
    write_tabular(&mut buf, &g).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    lines[1..].reverse();
    assert_eq!(read_tabular(lines.join("\n").as_bytes()).unwrap(), g);
}

#[test]
fn loaded_games_give_the_same_ground_truth() {
    let dir = tempfile::tempdir().unwrap();
    let soum = SoumGame::generate(7, 15, 2).unwrap();
    let soum_path = dir.path().join("g.soum");
    let table_path = dir.path().join("g.txt");
    let mut buf = Vec::new();
    write_soum(&mut buf, &soum).unwrap();
    std::fs::write(&soum_path, &buf).unwrap();
    buf.clear();
    write_tabular(&mut buf, &soum).unwrap();
    std::fs::write(&table_path, &buf).unwrap();

    let a = GameSource::load(&soum_path).unwrap();
    let b = GameSource::load(&table_path).unwrap();
    assert!(a.as_soum().is_some() && b.as_soum().is_none());
    for kind in [IndexKind::Sii, IndexKind::Sti, IndexKind::Fsi, IndexKind::Bii] {
        let ta = a.ground_truth(kind, 3).unwrap();
        let tb = b.ground_truth(kind, 3).unwrap();
        assert!(ta.max_abs_diff(&tb).unwrap() < 1e-10, "{kind}");
        assert!(ta.max_abs_diff(&exact_cii(&soum, kind, 3).unwrap()).unwrap() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tabular_round_trip(n in 1usize..7, seed in any::<u64>()) {
        let g = TabularGame::from_fn(n, |s| {
            let x = (s.bits() ^ seed).wrapping_mul(0x9e37_79b9_7f4a_7c15);
            (x as i64) as f64 / 3.0e15
        }).unwrap();
        let mut buf = Vec::new();
        write_tabular(&mut buf, &g).unwrap();
        prop_assert_eq!(read_tabular(buf.as_slice()).unwrap(), g);
    }

    #[test]
    fn soum_round_trip(n in 1usize..20, terms in 0usize..30, seed in any::<u64>()) {
        let g = SoumGame::generate(n, terms, seed).unwrap();
        let mut buf = Vec::new();
        write_soum(&mut buf, &g).unwrap();
        prop_assert_eq!(read_soum(buf.as_slice()).unwrap(), g);
    }

    #[test]
    fn estimates_round_trip(n in 2usize..9, seed in any::<u64>()) {
        let k = 1 + (seed as usize) % n;
        let g = SoumGame::generate(n, 10, seed).unwrap();
        let map = exact_cii(&g, IndexKind::Bii, k).unwrap();
        let mut buf = Vec::new();
        write_estimates(&mut buf, &map).unwrap();
        prop_assert_eq!(read_estimates(buf.as_slice()).unwrap(), map);
    }
}
