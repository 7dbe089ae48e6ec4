//! Reader ranking analysis: attention-check filtering, rank heatmaps with
//! threshold regions, the Friedman test and Nemenyi post-hoc comparisons.
//!
//! Rank 1 means least useful. Each response ranks the four level
//! descriptions plus a decoy; attentive readers put the decoy at rank 1.

pub mod distributions;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use distributions::{chi_square_sf, studentized_range_cdf, studentized_range_quantile};

#[derive(Debug, Error, PartialEq)]
pub enum RankError {
    #[error("row {row}: {message}")]
    Csv { row: usize, message: String },
    #[error("malformed ranking: {0}")]
    Malformed(String),
    #[error("no responses survive filtering")]
    NoResponses,
    #[error("need at least {need_rows} rows and {need_cols} columns, got {rows}x{cols}")]
    TooSmall {
        need_rows: usize,
        need_cols: usize,
        rows: usize,
        cols: usize,
    },
    #[error("alpha must lie strictly between 0 and 1, got {0}")]
    UnsupportedAlpha(f64),
    #[error("critical values are available for 2 to {max} groups, got {k}")]
    UnsupportedGroups { k: usize, max: usize },
    #[error("exact enumeration over {0} assignments is too large")]
    TooLargeForExact(f64),
    #[error("count matrix must be non-empty and rectangular")]
    BadCounts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReaderGroup {
    Blind,
    Sighted,
}

impl ReaderGroup {
    pub fn as_str(self) -> &'static str {
        match self {
            ReaderGroup::Blind => "blind",
            ReaderGroup::Sighted => "sighted",
        }
    }
}

impl fmt::Display for ReaderGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Item {
    L1,
    L2,
    L3,
    L4,
    #[serde(rename = "decoy")]
    Decoy,
}

impl Item {
    pub const ALL: [Item; 5] = [Item::L1, Item::L2, Item::L3, Item::L4, Item::Decoy];
    pub const LEVELS: [Item; 4] = [Item::L1, Item::L2, Item::L3, Item::L4];

    pub fn as_str(self) -> &'static str {
        match self {
            Item::L1 => "L1",
            Item::L2 => "L2",
            Item::L3 => "L3",
            Item::L4 => "L4",
            Item::Decoy => "decoy",
        }
    }

    fn parse(s: &str) -> Option<Item> {
        Item::ALL.into_iter().find(|i| i.as_str() == s)
    }
}

/// One reader's ranking of the five descriptions of one chart.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankingResponse {
    pub reader_id: String,
    pub group: ReaderGroup,
    pub chart_id: String,
    ranks: BTreeMap<Item, u8>,
}

impl RankingResponse {
    /// Fails unless the ranks are a permutation of 1..=5 over all five items.
    pub fn new(
        reader_id: impl Into<String>,
        group: ReaderGroup,
        chart_id: impl Into<String>,
        ranks: BTreeMap<Item, u8>,
    ) -> Result<RankingResponse, RankError> {
        let mut seen: Vec<u8> = ranks.values().copied().collect();
        seen.sort_unstable();
        if ranks.len() != 5 || seen != [1, 2, 3, 4, 5] {
            return Err(RankError::Malformed(format!(
                "ranks must be a permutation of 1..5 over L1, L2, L3, L4 and decoy, got {:?}",
                ranks
                    .iter()
                    .map(|(i, r)| (i.as_str(), *r))
                    .collect::<Vec<_>>()
            )));
        }
        Ok(RankingResponse {
            reader_id: reader_id.into(),
            group,
            chart_id: chart_id.into(),
            ranks,
        })
    }

    pub fn rank(&self, item: Item) -> u8 {
        self.ranks[&item]
    }

    pub fn ranks(&self) -> &BTreeMap<Item, u8> {
        &self.ranks
    }
}

/// Parses `reader_id,group,chart_id,item,rank` rows (header required), one
/// row per ranked item. Responses come out in first-appearance order.
pub fn parse_rankings_csv(text: &str) -> Result<Vec<RankingResponse>, RankError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| RankError::Csv {
            row: 1,
            message: e.to_string(),
        })?
        .clone();
    let expected = ["reader_id", "group", "chart_id", "item", "rank"];
    if header.iter().collect::<Vec<_>>() != expected {
        return Err(RankError::Csv {
            row: 1,
            message: format!("header must be {}", expected.join(",")),
        });
    }
    struct Pending {
        first_row: usize,
        group: ReaderGroup,
        ranks: BTreeMap<Item, u8>,
    }
    let mut order: Vec<(String, String)> = Vec::new();
    let mut pending: HashMap<(String, String), Pending> = HashMap::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2;
        let bad = |message: String| RankError::Csv { row, message };
        let record = record.map_err(|e| bad(e.to_string()))?;
        let group = match &record[1] {
            "blind" => ReaderGroup::Blind,
            "sighted" => ReaderGroup::Sighted,
            other => return Err(bad(format!("unknown group {other:?}"))),
        };
        let item =
            Item::parse(&record[3]).ok_or_else(|| bad(format!("unknown item {:?}", &record[3])))?;
        let rank: u8 = record[4]
            .parse()
            .ok()
            .filter(|r| (1..=5).contains(r))
            .ok_or_else(|| bad(format!("rank must be 1-5, got {:?}", &record[4])))?;
        let key = (record[0].to_string(), record[2].to_string());
        let entry = pending.entry(key.clone()).or_insert_with(|| {
            order.push(key);
            Pending {
                first_row: row,
                group,
                ranks: BTreeMap::new(),
            }
        });
        if entry.group != group {
            return Err(bad("reader changes group within a response".into()));
        }
        if entry.ranks.insert(item, rank).is_some() {
            return Err(bad(format!("item {} ranked twice", item.as_str())));
        }
    }
    order
        .into_iter()
        .map(|key| {
            let p = pending.remove(&key).expect("recorded response");
            RankingResponse::new(key.0, p.group, key.1, p.ranks).map_err(|e| RankError::Csv {
                row: p.first_row,
                message: e.to_string(),
            })
        })
        .collect()
}

/// Blocks × treatments matrix of within-block ranks 1..=k.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RankingMatrix {
    columns: Vec<String>,
    rows: Vec<Vec<u32>>,
}

impl RankingMatrix {
    /// Every row must be a permutation of 1..=k, k = number of columns.
    pub fn new(columns: Vec<String>, rows: Vec<Vec<u32>>) -> Result<RankingMatrix, RankError> {
        let k = columns.len();
        let want: Vec<u32> = (1..=k as u32).collect();
        for (i, row) in rows.iter().enumerate() {
            let mut sorted = row.clone();
            sorted.sort_unstable();
            if sorted != want {
                return Err(RankError::Malformed(format!(
                    "row {} is not a permutation of 1..{k}: {row:?}",
                    i + 1
                )));
            }
        }
        Ok(RankingMatrix { columns, rows })
    }

    /// Matrix with columns named L1..Lk... or C1..Ck for k != 4.
    pub fn from_rows(rows: Vec<Vec<u32>>) -> Result<RankingMatrix, RankError> {
        let k = rows.first().map_or(0, Vec::len);
        let prefix = if k == 4 { "L" } else { "C" };
        RankingMatrix::new((1..=k).map(|j| format!("{prefix}{j}")).collect(), rows)
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn k(&self) -> usize {
        self.columns.len()
    }

    pub fn rank_sums(&self) -> Vec<u64> {
        let mut sums = vec![0u64; self.k()];
        for row in &self.rows {
            for (s, &r) in sums.iter_mut().zip(row) {
                *s += r as u64;
            }
        }
        sums
    }

    pub fn mean_ranks(&self) -> Vec<f64> {
        let n = self.n() as f64;
        self.rank_sums().into_iter().map(|s| s as f64 / n).collect()
    }

    fn require(&self, rows: usize, cols: usize) -> Result<(), RankError> {
        if self.n() < rows || self.k() < cols {
            return Err(RankError::TooSmall {
                need_rows: rows,
                need_cols: cols,
                rows: self.n(),
                cols: self.k(),
            });
        }
        Ok(())
    }
}

/// Keeps responses that rank the decoy least useful, drops the decoy and
/// shifts the remaining ranks down by one. Returns the matrix (columns
/// L1..L4) and the number of rejected responses.
pub fn attention_filter(
    responses: &[RankingResponse],
) -> Result<(RankingMatrix, usize), RankError> {
    let mut rows = Vec::new();
    let mut rejected = 0;
    for r in responses {
        if r.rank(Item::Decoy) != 1 {
            rejected += 1;
            continue;
        }
        rows.push(Item::LEVELS.iter().map(|&i| r.rank(i) as u32 - 1).collect());
    }
    if rows.is_empty() {
        return Err(RankError::NoResponses);
    }
    let columns = Item::LEVELS
        .iter()
        .map(|i| i.as_str().to_string())
        .collect();
    Ok((RankingMatrix::new(columns, rows)?, rejected))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Friedman {
    pub n: usize,
    pub k: usize,
    pub q: f64,
    pub df: usize,
    pub p: f64,
}

fn friedman_q(sums: &[u64], n: usize, k: usize) -> f64 {
    let (n, kf) = (n as f64, k as f64);
    let ss: f64 = sums.iter().map(|&s| (s as f64).powi(2)).sum();
    let q = 12.0 / (n * kf * (kf + 1.0)) * ss - 3.0 * n * (kf + 1.0);
    // exact zero when all rank sums agree
    if sums.iter().all(|&s| s == sums[0]) {
        0.0
    } else {
        q.max(0.0)
    }
}

/// Friedman's test with the chi-square approximation (df = k - 1).
pub fn friedman_test(m: &RankingMatrix) -> Result<Friedman, RankError> {
    m.require(2, 3)?;
    let q = friedman_q(&m.rank_sums(), m.n(), m.k());
    let df = m.k() - 1;
    Ok(Friedman {
        n: m.n(),
        k: m.k(),
        q,
        df,
        p: chi_square_sf(q, df as f64),
    })
}

fn permutations(k: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut items: Vec<u32> = (1..=k as u32).collect();
    fn heap(n: usize, items: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if n <= 1 {
            out.push(items.clone());
            return;
        }
        for i in 0..n - 1 {
            heap(n - 1, items, out);
            let j = if n.is_multiple_of(2) { i } else { 0 };
            items.swap(j, n - 1);
        }
        heap(n - 1, items, out);
    }
    heap(k, &mut items, &mut out);
    out
}

/// Exact permutation p-value of Friedman's Q: the share of all (k!)^n
/// within-row rank assignments whose Q is at least the observed one.
pub fn friedman_exact_p(m: &RankingMatrix) -> Result<f64, RankError> {
    m.require(2, 3)?;
    let (n, k) = (m.n(), m.k());
    let perms = permutations(k);
    let space = (perms.len() as f64).powi(n as i32);
    if space > 1e9 {
        return Err(RankError::TooLargeForExact(space));
    }
    let observed = friedman_q(&m.rank_sums(), n, k);
    let mut dist: HashMap<Vec<u64>, u64> = HashMap::from([(vec![0; k], 1)]);
    for _ in 0..n {
        let mut next: HashMap<Vec<u64>, u64> = HashMap::new();
        for (sums, count) in &dist {
            for p in &perms {
                let s: Vec<u64> = sums.iter().zip(p).map(|(a, &b)| a + b as u64).collect();
                *next.entry(s).or_default() += count;
            }
        }
        dist = next;
    }
    let tol = 1e-9 * observed.abs().max(1.0);
    let hits: u64 = dist
        .iter()
        .filter(|(sums, _)| friedman_q(sums, n, k) >= observed - tol)
        .map(|(_, c)| c)
        .sum();
    Ok(hits as f64 / space)
}

/// Largest group count with supported critical values.
pub const MAX_GROUPS: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairComparison {
    pub a: String,
    pub b: String,
    /// Mean rank of `a` minus mean rank of `b`.
    pub difference: f64,
    pub p: f64,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Nemenyi {
    pub alpha: f64,
    pub n: usize,
    pub k: usize,
    /// Studentized-range critical value divided by sqrt(2).
    pub q: f64,
    pub critical_difference: f64,
    pub mean_ranks: Vec<f64>,
    /// Each unordered pair once, in column order.
    pub pairs: Vec<PairComparison>,
}

impl Nemenyi {
    /// Comparison of two columns in either order.
    pub fn pair(&self, a: &str, b: &str) -> Option<&PairComparison> {
        self.pairs
            .iter()
            .find(|p| (p.a == a && p.b == b) || (p.a == b && p.b == a))
    }
}

fn check_alpha(alpha: f64) -> Result<(), RankError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(RankError::UnsupportedAlpha(alpha));
    }
    Ok(())
}

fn build_pairs(
    m: &RankingMatrix,
    mean_ranks: &[f64],
    p_of: impl Fn(f64) -> f64,
    cd: f64,
) -> Vec<PairComparison> {
    let mut pairs = Vec::new();
    for i in 0..m.k() {
        for j in i + 1..m.k() {
            let difference = mean_ranks[i] - mean_ranks[j];
            pairs.push(PairComparison {
                a: m.columns[i].clone(),
                b: m.columns[j].clone(),
                difference,
                p: p_of(difference.abs()),
                significant: difference.abs() > cd,
            });
        }
    }
    pairs
}

/// Nemenyi post-hoc test: CD = q_(alpha,k) * sqrt(k(k+1) / 6n), with q the
/// studentized-range quantile (infinite df) over sqrt(2).
pub fn nemenyi_posthoc(m: &RankingMatrix, alpha: f64) -> Result<Nemenyi, RankError> {
    m.require(2, 2)?;
    check_alpha(alpha)?;
    let k = m.k();
    if k > MAX_GROUPS {
        return Err(RankError::UnsupportedGroups { k, max: MAX_GROUPS });
    }
    let se = ((k * (k + 1)) as f64 / (6.0 * m.n() as f64)).sqrt();
    let q = studentized_range_quantile(alpha, k) / std::f64::consts::SQRT_2;
    let cd = q * se;
    let mean_ranks = m.mean_ranks();
    let p_of = |d: f64| 1.0 - studentized_range_cdf(d * std::f64::consts::SQRT_2 / se, k);
    Ok(Nemenyi {
        alpha,
        n: m.n(),
        k,
        q,
        critical_difference: cd,
        pairs: build_pairs(m, &mean_ranks, p_of, cd),
        mean_ranks,
    })
}

/// Permutation version of [`nemenyi_posthoc`] for small samples.
///
/// Each resample shuffles every row independently; the statistic is the
/// largest pairwise mean-rank difference. The critical difference is the
/// resampled (1 - alpha) quantile and p = (hits + 1) / (resamples + 1).
/// `q` is reported as the implied CD / sqrt(k(k+1) / 6n).
pub fn nemenyi_permutation(
    m: &RankingMatrix,
    alpha: f64,
    resamples: usize,
    seed: u64,
) -> Result<Nemenyi, RankError> {
    m.require(2, 2)?;
    check_alpha(alpha)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n, k) = (m.n() as f64, m.k());
    let mut maxima = Vec::with_capacity(resamples);
    let mut row = Vec::with_capacity(k);
    for _ in 0..resamples {
        let mut sums = vec![0u64; k];
        for r in &m.rows {
            row.clear();
            row.extend_from_slice(r);
            row.shuffle(&mut rng);
            for (s, &v) in sums.iter_mut().zip(&row) {
                *s += v as u64;
            }
        }
        let hi = *sums.iter().max().expect("k >= 2");
        let lo = *sums.iter().min().expect("k >= 2");
        maxima.push((hi - lo) as f64 / n);
    }
    maxima.sort_by(f64::total_cmp);
    let cd = if maxima.is_empty() {
        f64::INFINITY
    } else {
        let idx =
            (((1.0 - alpha) * maxima.len() as f64).ceil() as usize).clamp(1, maxima.len()) - 1;
        maxima[idx]
    };
    let mean_ranks = m.mean_ranks();
    let p_of = |d: f64| {
        let tol = 1e-12;
        let hits = maxima.len() - maxima.partition_point(|&x| x < d - tol);
        (hits + 1) as f64 / (maxima.len() + 1) as f64
    };
    let pairs = build_pairs(m, &mean_ranks, p_of, cd);
    let se = ((k * (k + 1)) as f64 / (6.0 * n)).sqrt();
    Ok(Nemenyi {
        alpha,
        n: m.n(),
        k,
        q: cd / se,
        critical_difference: cd,
        mean_ranks,
        pairs,
    })
}

/// Counts of each rank per column: `counts[level][rank - 1]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Heatmap {
    pub columns: Vec<String>,
    pub n: usize,
    pub counts: Vec<Vec<usize>>,
}

pub fn rank_heatmap(m: &RankingMatrix) -> Heatmap {
    let k = m.k();
    let mut counts = vec![vec![0usize; k]; k];
    for row in &m.rows {
        for (j, &r) in row.iter().enumerate() {
            counts[j][r as usize - 1] += 1;
        }
    }
    Heatmap {
        columns: m.columns.clone(),
        n: m.n(),
        counts,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Regions {
    pub mean: f64,
    /// Population standard deviation over all cells.
    pub stdev: f64,
    pub threshold: f64,
    /// Cells strictly above the threshold as (row, column), row-major.
    pub cells: Vec<(usize, usize)>,
    /// 4-connected groups of `cells`, ordered by their first cell.
    pub regions: Vec<Vec<(usize, usize)>>,
}

/// Cells above mean + stdev / 2 of a count matrix, grouped into regions.
pub fn threshold_regions(counts: &[Vec<usize>]) -> Result<Regions, RankError> {
    let cols = counts.first().map_or(0, Vec::len);
    if cols == 0 || counts.iter().any(|r| r.len() != cols) {
        return Err(RankError::BadCounts);
    }
    let values: Vec<f64> = counts.iter().flatten().map(|&c| c as f64).collect();
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let stdev =
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / values.len() as f64).sqrt();
    let threshold = mean + stdev / 2.0;
    let above = |r: usize, c: usize| counts[r][c] as f64 > threshold;
    let mut cells = Vec::new();
    for (r, row) in counts.iter().enumerate() {
        for c in 0..row.len() {
            if above(r, c) {
                cells.push((r, c));
            }
        }
    }
    let mut seen = vec![vec![false; cols]; counts.len()];
    let mut regions = Vec::new();
    for &start in &cells {
        if seen[start.0][start.1] {
            continue;
        }
        seen[start.0][start.1] = true;
        let mut region = Vec::new();
        let mut stack = vec![start];
        while let Some((r, c)) = stack.pop() {
            region.push((r, c));
            let neighbours = [
                (r.wrapping_sub(1), c),
                (r + 1, c),
                (r, c.wrapping_sub(1)),
                (r, c + 1),
            ];
            for (nr, nc) in neighbours {
                if nr < counts.len() && nc < cols && !seen[nr][nc] && above(nr, nc) {
                    seen[nr][nc] = true;
                    stack.push((nr, nc));
                }
            }
        }
        region.sort_unstable();
        regions.push(region);
    }
    Ok(Regions {
        mean,
        stdev,
        threshold,
        cells,
        regions,
    })
}

/// Full analysis of one reader group.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupReport {
    pub group: ReaderGroup,
    pub responses: usize,
    pub rejected: usize,
    pub friedman: Friedman,
    pub nemenyi: Nemenyi,
    pub heatmap: Heatmap,
    pub regions: Regions,
}

/// Filters, tests and summarises each reader group present in `responses`
/// (blind before sighted). Groups where nobody passes the attention check
/// are skipped; if that leaves nothing, the result is an error.
pub fn evaluate(responses: &[RankingResponse], alpha: f64) -> Result<Vec<GroupReport>, RankError> {
    check_alpha(alpha)?;
    let mut by_group: BTreeMap<ReaderGroup, Vec<RankingResponse>> = BTreeMap::new();
    for r in responses {
        by_group.entry(r.group).or_default().push(r.clone());
    }
    let mut reports = Vec::new();
    for (group, rs) in by_group {
        let (matrix, rejected) = match attention_filter(&rs) {
            Ok(ok) => ok,
            Err(RankError::NoResponses) => continue,
            Err(e) => return Err(e),
        };
        let heatmap = rank_heatmap(&matrix);
        reports.push(GroupReport {
            group,
            responses: rs.len(),
            rejected,
            friedman: friedman_test(&matrix)?,
            nemenyi: nemenyi_posthoc(&matrix, alpha)?,
            regions: threshold_regions(&heatmap.counts)?,
            heatmap,
        });
    }
    if reports.is_empty() {
        return Err(RankError::NoResponses);
    }
    Ok(reports)
}
