use std::collections::BTreeMap;

use chartdesc::rankstats::{
    attention_filter, chi_square_sf, evaluate, friedman_exact_p, friedman_test,
    nemenyi_permutation, nemenyi_posthoc, parse_rankings_csv, rank_heatmap,
    studentized_range_quantile, threshold_regions, Item, RankError, RankingMatrix, RankingResponse,
    ReaderGroup,
};
use proptest::prelude::*;

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs().max(f64::MIN_POSITIVE)
}

// Oracles -----------------------------------------------------------------------

fn oracle_q(rows: &[Vec<u32>]) -> f64 {
    let n = rows.len() as f64;
    let k = rows[0].len();
    let centre = (k as f64 + 1.0) / 2.0;
    let spread: f64 = (0..k)
        .map(|j| {
            let mean = rows.iter().map(|r| r[j] as f64).sum::<f64>() / n;
            (mean - centre).powi(2)
        })
        .sum();
    12.0 * n / (k as f64 * (k as f64 + 1.0)) * spread
}

fn permutations(k: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for _ in 0..k {
        let mut next = Vec::new();
        for p in &out {
            for v in 1..=k {
                if !p.contains(&v) {
                    let mut q = p.clone();
                    q.push(v);
                    next.push(q);
                }
            }
        }
        out = next;
    }
    out
}

/// Enumerates every assignment of within-row permutations.
fn oracle_exact_p(rows: &[Vec<u32>]) -> f64 {
    let k = rows[0].len() as u32;
    let perms = permutations(k);
    let observed = oracle_q(rows);
    let total = perms.len().pow(rows.len() as u32);
    let mut hits = 0usize;
    let mut idx = vec![0usize; rows.len()];
    for _ in 0..total {
        let m: Vec<Vec<u32>> = idx.iter().map(|&i| perms[i].clone()).collect();
        if oracle_q(&m) >= observed - 1e-9 {
            hits += 1;
        }
        for slot in idx.iter_mut() {
            *slot += 1;
            if *slot < perms.len() {
                break;
            }
            *slot = 0;
        }
    }
    hits as f64 / total as f64
}

fn oracle_even_df_sf(x: f64, df: u32) -> f64 {
    let h = x / 2.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for i in 1..df / 2 {
        term *= h / i as f64;
        sum += term;
    }
    (-h).exp() * sum
}

type Cells = Vec<(usize, usize)>;

fn oracle_regions(counts: &[Vec<usize>]) -> (f64, Cells, Vec<Cells>) {
    let flat: Vec<f64> = counts.iter().flatten().map(|&c| c as f64).collect();
    let n = flat.len() as f64;
    let mean = flat.iter().sum::<f64>() / n;
    let var = flat.iter().map(|v| v * v).sum::<f64>() / n - mean * mean;
    let threshold = mean + var.max(0.0).sqrt() / 2.0;
    let cells: Vec<(usize, usize)> = (0..counts.len())
        .flat_map(|r| (0..counts[r].len()).map(move |c| (r, c)))
        .filter(|&(r, c)| counts[r][c] as f64 > threshold)
        .collect();
    // union-find over the above-threshold cells
    let mut parent: Vec<usize> = (0..cells.len()).collect();
    fn find(p: &mut Vec<usize>, i: usize) -> usize {
        if p[i] != i {
            let root = find(p, p[i]);
            p[i] = root;
        }
        p[i]
    }
    for i in 0..cells.len() {
        for j in 0..i {
            let (a, b) = (cells[i], cells[j]);
            if a.0.abs_diff(b.0) + a.1.abs_diff(b.1) == 1 {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                parent[ri] = rj;
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    for (i, &cell) in cells.iter().enumerate() {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(cell);
    }
    let mut regions: Vec<Vec<(usize, usize)>> = groups.into_values().collect();
    regions.sort();
    (threshold, cells, regions)
}

// Strategies ---------------------------------------------------------------------

fn shuffled_row(k: usize) -> impl Strategy<Value = Vec<u32>> {
    Just((1..=k as u32).collect::<Vec<_>>()).prop_shuffle()
}

fn matrix(
    k: std::ops::Range<usize>,
    n: std::ops::Range<usize>,
) -> impl Strategy<Value = Vec<Vec<u32>>> {
    (k, n).prop_flat_map(|(k, n)| prop::collection::vec(shuffled_row(k), n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn friedman_q_matches_mean_rank_form(rows in matrix(3..7, 2..40)) {
        let f = friedman_test(&RankingMatrix::from_rows(rows.clone()).unwrap()).unwrap();
        prop_assert!((f.q - oracle_q(&rows)).abs() < 1e-9);
        prop_assert_eq!(f.df, rows[0].len() - 1);
        prop_assert!((0.0..=1.0).contains(&f.p));
    }

    #[test]
    fn friedman_is_invariant_to_row_and_column_order(rows in matrix(3..6, 2..30), seed in any::<u64>()) {
        let base = friedman_test(&RankingMatrix::from_rows(rows.clone()).unwrap()).unwrap();
        let mut reordered = rows.clone();
        reordered.rotate_left(seed as usize % rows.len());
        let shift = seed as usize % rows[0].len();
        for r in reordered.iter_mut() {
            r.rotate_left(shift);
        }
        let moved = friedman_test(&RankingMatrix::from_rows(reordered).unwrap()).unwrap();
        prop_assert!((base.q - moved.q).abs() < 1e-9);
        prop_assert!((base.p - moved.p).abs() < 1e-12);
    }

    #[test]
    fn friedman_q_is_zero_iff_rank_sums_equal(rows in matrix(3..5, 2..8)) {
        let m = RankingMatrix::from_rows(rows).unwrap();
        let sums = m.rank_sums();
        let f = friedman_test(&m).unwrap();
        let equal = sums.iter().all(|&s| s == sums[0]);
        prop_assert_eq!(f.q == 0.0, equal);
        if equal {
            prop_assert_eq!(f.p, 1.0);
        }
    }

    #[test]
    fn heatmap_conserves_counts(rows in matrix(2..7, 1..60)) {
        let m = RankingMatrix::from_rows(rows.clone()).unwrap();
        let h = rank_heatmap(&m);
        for row in &h.counts {
            prop_assert_eq!(row.iter().sum::<usize>(), rows.len());
        }
        for rank in 0..m.k() {
            prop_assert_eq!(h.counts.iter().map(|r| r[rank]).sum::<usize>(), rows.len());
        }
    }

    #[test]
    fn threshold_regions_match_brute_force(counts in prop::collection::vec(prop::collection::vec(0usize..60, 4), 4)) {
        let got = threshold_regions(&counts).unwrap();
        let (threshold, cells, regions) = oracle_regions(&counts);
        prop_assert!((got.threshold - threshold).abs() < 1e-9);
        // cells that sit on the threshold within rounding are ambiguous
        prop_assume!(counts.iter().flatten().all(|&c| (c as f64 - threshold).abs() > 1e-9));
        prop_assert_eq!(&got.cells, &cells);
        let mut got_regions = got.regions.clone();
        got_regions.sort();
        prop_assert_eq!(got_regions, regions);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn nemenyi_pairs_are_symmetric_and_consistent(rows in matrix(3..7, 2..50)) {
        let m = RankingMatrix::from_rows(rows).unwrap();
        let t = nemenyi_posthoc(&m, 0.05).unwrap();
        prop_assert_eq!(t.pairs.len(), m.k() * (m.k() - 1) / 2);
        for p in &t.pairs {
            let back = t.pair(&p.b, &p.a).unwrap();
            prop_assert_eq!(back, p);
            prop_assert_eq!(p.significant, p.difference.abs() > t.critical_difference);
            prop_assert!((0.0..=1.0).contains(&p.p));
        }
    }

    #[test]
    fn exact_p_matches_enumeration(rows in matrix(3..4, 2..5)) {
        let got = friedman_exact_p(&RankingMatrix::from_rows(rows.clone()).unwrap()).unwrap();
        prop_assert!((got - oracle_exact_p(&rows)).abs() < 1e-12);
    }

    #[test]
    fn chi_square_matches_even_df_closed_form(x in 0.0f64..200.0, half in 1u32..30) {
        let df = 2 * half;
        let got = chi_square_sf(x, df as f64);
        let want = oracle_even_df_sf(x, df);
        prop_assume!(want > 1e-280);
        prop_assert!(close(got, want, 1e-10), "df {df} x {x}: {got} vs {want}");
    }
}

#[test]
fn chi_square_matches_high_precision_reference() {
    // mpmath gammainc(df/2, x/2, regularized=True) upper tail, rounded to f64
    let reference = [
        (1.0, 0.5, 0.479_500_122_186_953_5),
        (1.0, 3.84, 0.050_043_521_248_705_1),
        (3.0, 7.815, 0.049_993_902_974_883_89),
        (3.0, 0.35, 0.950_366_117_368_476),
        (5.0, 11.07, 0.050_009_618_622_405_48),
        (7.0, 2.0, 0.959_840_368_730_101_6),
        (9.0, 30.0, 4.387_217_709_794_795e-4),
        (3.0, 300.96, 6.165_903_453_947_343e-65),
        (1.0, 50.0, 1.537_459_794_428_035e-12),
    ];
    for (df, x, want) in reference {
        let got = chi_square_sf(x, df);
        assert!(close(got, want, 1e-10), "df {df} x {x}: {got} vs {want}");
    }
}

#[test]
fn studentized_range_table() {
    let table: [(f64, [f64; 9]); 3] = [
        (
            0.05,
            [
                1.96, 2.3437, 2.569, 2.7278, 2.8497, 2.9483, 3.0309, 3.1017, 3.1637,
            ],
        ),
        (
            0.01,
            [
                2.5758, 2.9135, 3.1133, 3.2547, 3.3637, 3.4522, 3.5265, 3.5903, 3.6463,
            ],
        ),
        (
            0.10,
            [
                1.6449, 2.0523, 2.2913, 2.4595, 2.5885, 2.6927, 2.7799, 2.8546, 2.9199,
            ],
        ),
    ];
    for (alpha, row) in table {
        for (i, want) in row.iter().enumerate() {
            let k = i + 2;
            let got = studentized_range_quantile(alpha, k) / std::f64::consts::SQRT_2;
            assert!(
                (got - want).abs() < 1e-3,
                "alpha {alpha} k {k}: {got} vs {want}"
            );
        }
    }
}

fn balanced(k: u32, n: usize) -> RankingMatrix {
    let perms = permutations(k);
    RankingMatrix::from_rows((0..n).map(|i| perms[i % perms.len()].clone()).collect()).unwrap()
}

#[test]
fn critical_difference_for_four_items_and_thirty_readers() {
    let t = nemenyi_posthoc(&balanced(4, 30), 0.05).unwrap();
    assert!(
        (t.critical_difference - 0.856).abs() < 1e-3,
        "{}",
        t.critical_difference
    );
    let strict = nemenyi_posthoc(&balanced(4, 30), 0.01).unwrap();
    assert!(strict.critical_difference > t.critical_difference);
}

#[test]
fn heatmap_mean_for_a_total_of_eighteen_hundred() {
    // 450 readers x 4 levels = 1800 counted ranks over 16 cells
    let h = rank_heatmap(&balanced(4, 450));
    assert_eq!(h.counts.iter().flatten().sum::<usize>(), 1800);
    let r = threshold_regions(&h.counts).unwrap();
    assert!((r.mean - 112.5).abs() < 1e-12);

    // every permutation equally often: uniform counts, nothing above threshold
    let uniform = threshold_regions(&rank_heatmap(&balanced(4, 48)).counts).unwrap();
    assert_eq!(uniform.stdev, 0.0);
    assert_eq!(uniform.threshold, uniform.mean);
    assert!(uniform.regions.is_empty());

    let big = rank_heatmap(&balanced(4, 1800));
    assert_eq!(big.counts.iter().flatten().sum::<usize>(), 7200);
    assert!(big
        .counts
        .iter()
        .all(|row| row.iter().sum::<usize>() == 1800));
}

fn response(id: &str, group: ReaderGroup, ranks: [u8; 5]) -> RankingResponse {
    let map: BTreeMap<Item, u8> = Item::ALL.into_iter().zip(ranks).collect();
    RankingResponse::new(id, group, "c1", map).unwrap()
}

#[test]
fn attention_filter_drops_failing_readers() {
    let mut batch = Vec::new();
    for i in 0..8 {
        let levels = if i % 2 == 0 {
            [2, 3, 4, 5, 1]
        } else {
            [3, 2, 5, 4, 1]
        };
        batch.push(response(&format!("r{i}"), ReaderGroup::Blind, levels));
    }
    batch.push(response("bad1", ReaderGroup::Blind, [1, 2, 3, 4, 5]));
    batch.push(response("bad2", ReaderGroup::Blind, [2, 1, 3, 5, 4]));
    let (m, rejected) = attention_filter(&batch).unwrap();
    assert_eq!(m.n(), 8);
    assert_eq!(rejected, 2);
    assert_eq!(m.rows()[0], vec![1, 2, 3, 4]);
    let reports = evaluate(&batch, 0.05).unwrap();
    assert_eq!(reports[0].rejected, 2);
    assert_eq!(reports[0].friedman.n, 8);
}

#[test]
fn nobody_passing_is_an_error() {
    let batch = vec![response("x", ReaderGroup::Sighted, [1, 2, 3, 5, 4])];
    assert_eq!(
        attention_filter(&batch).unwrap_err(),
        RankError::NoResponses
    );
    assert_eq!(evaluate(&batch, 0.05).unwrap_err(), RankError::NoResponses);
}

#[test]
fn malformed_rankings_are_rejected() {
    let map: BTreeMap<Item, u8> = Item::ALL.into_iter().zip([1, 1, 2, 3, 4]).collect();
    assert!(RankingResponse::new("x", ReaderGroup::Blind, "c", map).is_err());
    assert!(RankingMatrix::from_rows(vec![vec![1, 2, 2]]).is_err());
    let bad_row = "reader_id,group,chart_id,item,rank\nr1,blind,c1,L1,two\n";
    assert!(matches!(
        parse_rankings_csv(bad_row),
        Err(RankError::Csv { row: 2, .. })
    ));
    let bad_header = "reader,group,chart,item,rank\n";
    assert!(matches!(
        parse_rankings_csv(bad_header),
        Err(RankError::Csv { row: 1, .. })
    ));
}

#[test]
fn permutation_fallback_is_seeded_and_agrees_on_strong_effects() {
    let rows: Vec<Vec<u32>> = (0..12)
        .map(|i| {
            if i % 4 == 0 {
                vec![2, 1, 3, 4]
            } else {
                vec![1, 2, 3, 4]
            }
        })
        .collect();
    let m = RankingMatrix::from_rows(rows).unwrap();
    let a = nemenyi_permutation(&m, 0.05, 2000, 7).unwrap();
    let b = nemenyi_permutation(&m, 0.05, 2000, 7).unwrap();
    assert_eq!(a, b);
    let asymptotic = nemenyi_posthoc(&m, 0.05).unwrap();
    assert!(a.pair("L1", "L4").unwrap().significant);
    assert!(asymptotic.pair("L1", "L4").unwrap().significant);
    assert!(!a.pair("L1", "L2").unwrap().significant);
}

#[test]
fn bundled_rankings_reproduce_both_group_patterns() {
    let text = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../fixtures/rankings/reader-pattern.csv"
    ))
    .unwrap();
    let reports = evaluate(&parse_rankings_csv(&text).unwrap(), 0.05).unwrap();
    let blind = &reports[0];
    assert_eq!(blind.group, ReaderGroup::Blind);
    assert!(blind.friedman.p < 0.05);
    assert!(blind.nemenyi.pair("L2", "L1").unwrap().significant);
    assert!(blind.nemenyi.pair("L3", "L4").unwrap().significant);
    assert!(!blind.nemenyi.pair("L2", "L3").unwrap().significant);
    assert!(!blind.nemenyi.pair("L1", "L4").unwrap().significant);
    let sighted = &reports[1];
    assert!(sighted.nemenyi.pair("L1", "L2").unwrap().significant);
    assert!(sighted.nemenyi.pair("L2", "L3").unwrap().significant);
    assert!(!sighted.nemenyi.pair("L3", "L4").unwrap().significant);
}
