//! Discrete datasets, CSV I/O and sufficient statistics.
//!
//! The CSV layout is a header row of variable names, an optional
//! cardinality row whose first cell starts with `#card:`, then one row of
//! non-negative integers per case:
//!
//! ```text
//! A,B,C
//! #card:3,3,3
//! 0,1,2
//! ```
//!
//! Without a `#card:` row each cardinality is one more than the largest
//! value observed in its column.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{Read, Write};
use std::sync::{Arc, RwLock};

use crate::error::{Error, Result};

const CARD_PREFIX: &str = "#card:";

/// `N` cases over `n` discrete variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscreteDataset {
    names: Vec<String>,
    cardinalities: Vec<u32>,
    cases: Vec<Vec<u32>>,
}

impl DiscreteDataset {
    pub fn new(names: Vec<String>, cardinalities: Vec<u32>, cases: Vec<Vec<u32>>) -> Result<Self> {
        if names.len() != cardinalities.len() {
            return Err(Error::InvalidQuery(format!(
                "{} names but {} cardinalities",
                names.len(),
                cardinalities.len()
            )));
        }
        let mut seen = HashSet::new();
        for name in &names {
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidQuery(format!("duplicate variable name {name:?}")));
            }
        }
        if let Some(i) = cardinalities.iter().position(|&c| c == 0) {
            return Err(Error::InvalidQuery(format!("variable {} has cardinality 0", names[i])));
        }
        for (r, case) in cases.iter().enumerate() {
            if case.len() != names.len() {
                return Err(Error::InvalidQuery(format!(
                    "case {r} has {} values, expected {}",
                    case.len(),
                    names.len()
                )));
            }
            for (i, (&v, &card)) in case.iter().zip(&cardinalities).enumerate() {
                if v >= card {
                    return Err(Error::InvalidQuery(format!(
                        "case {r}: value {v} of {} is outside 0..{card}",
                        names[i]
                    )));
                }
            }
        }
        Ok(DiscreteDataset {
            names,
            cardinalities,
            cases,
        })
    }

    /// Builds a dataset whose cardinalities are inferred from the data.
    pub fn from_cases(names: Vec<String>, cases: Vec<Vec<u32>>) -> Result<Self> {
        let cardinalities = inferred_cardinalities(names.len(), &cases);
        Self::new(names, cardinalities, cases)
    }

    pub fn variable_count(&self) -> usize {
        self.names.len()
    }

    /// `N`.
    pub fn case_count(&self) -> usize {
        self.cases.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn cardinalities(&self) -> &[u32] {
        &self.cardinalities
    }

    pub fn cases(&self) -> &[Vec<u32>] {
        &self.cases
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

fn inferred_cardinalities(n: usize, cases: &[Vec<u32>]) -> Vec<u32> {
    let mut card = vec![1u32; n];
    for case in cases {
        for (c, &v) in card.iter_mut().zip(case) {
            *c = (*c).max(v.saturating_add(1));
        }
    }
    card
}

/// Reads a dataset from CSV. Errors name the offending row and column.
pub fn load_dataset<R: Read>(source: R) -> Result<DiscreteDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(source);

    let mut records = reader.records();
    let header = match records.next() {
        None => return Err(Error::parse(1, 0, "empty file")),
        Some(rec) => rec.map_err(csv_error)?,
    };
    let names: Vec<String> = header.iter().map(str::to_owned).collect();
    let mut seen = HashSet::new();
    for (c, name) in names.iter().enumerate() {
        if name.is_empty() {
            return Err(Error::parse(1, c + 1, "empty variable name"));
        }
        if !seen.insert(name.as_str()) {
            return Err(Error::parse(1, c + 1, format!("duplicate variable name {name:?}")));
        }
    }
    let n = names.len();

    let mut declared: Option<Vec<u32>> = None;
    let mut cases = Vec::new();
    for rec in records {
        let rec = rec.map_err(csv_error)?;
        let row = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() == 1 && rec.get(0) == Some("") {
            // blank line
            continue;
        }
        let first = rec.get(0).unwrap_or("");
        if let Some(rest) = first.strip_prefix(CARD_PREFIX) {
            if declared.is_some() || !cases.is_empty() {
                return Err(Error::parse(row, 1, "#card: row must directly follow the header"));
            }
            if rec.len() != n {
                return Err(Error::parse(row, 0, format!("expected {n} cells, found {}", rec.len())));
            }
            let mut card = Vec::with_capacity(n);
            for (c, cell) in std::iter::once(rest.trim()).chain(rec.iter().skip(1)).enumerate() {
                match cell.parse::<u32>() {
                    Ok(v) if v > 0 => card.push(v),
                    _ => {
                        return Err(Error::parse(
                            row,
                            c + 1,
                            format!("cardinality {cell:?} is not a positive integer"),
                        ))
                    }
                }
            }
            declared = Some(card);
            continue;
        }
        if rec.len() != n {
            return Err(Error::parse(row, 0, format!("expected {n} cells, found {}", rec.len())));
        }
        let mut case = Vec::with_capacity(n);
        for (c, cell) in rec.iter().enumerate() {
            let v = cell.parse::<u32>().map_err(|_| {
                Error::parse(row, c + 1, format!("{cell:?} is not a non-negative integer"))
            })?;
            if let Some(card) = &declared {
                if v >= card[c] {
                    return Err(Error::parse(
                        row,
                        c + 1,
                        format!("value {v} exceeds declared cardinality {}", card[c]),
                    ));
                }
            }
            case.push(v);
        }
        cases.push(case);
    }

    let cardinalities = declared.unwrap_or_else(|| inferred_cardinalities(n, &cases));
    DiscreteDataset::new(names, cardinalities, cases)
}

fn csv_error(e: csv::Error) -> Error {
    let row = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        kind => Error::parse(row, 0, format!("{kind:?}")),
    }
}

/// Writes `data` as CSV. The `#card:` row is emitted only when the stored
/// cardinalities differ from what [`load_dataset`] would infer, so that
/// loading the output reproduces `data` exactly.
pub fn write_dataset<W: Write>(data: &DiscreteDataset, sink: W) -> Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .flexible(true)
        .from_writer(sink);
    let io = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        kind => Error::Io(std::io::Error::other(format!("{kind:?}"))),
    };
    writer.write_record(&data.names).map_err(io)?;
    if data.cardinalities != inferred_cardinalities(data.variable_count(), &data.cases) {
        let cells: Vec<String> = data
            .cardinalities
            .iter()
            .enumerate()
            .map(|(i, c)| if i == 0 { format!("{CARD_PREFIX}{c}") } else { c.to_string() })
            .collect();
        writer.write_record(&cells).map_err(io)?;
    }
    let mut cells = Vec::with_capacity(data.variable_count());
    for case in &data.cases {
        cells.clear();
        cells.extend(case.iter().map(u32::to_string));
        writer.write_record(&cells).map_err(io)?;
    }
    writer.flush()?;
    Ok(())
}

/// Counts `N(x_i, pa(x_i))` and `N(pa(x_i))` for one target and parent set.
///
/// Only observed parent configurations are stored; every accessor reports 0
/// for an absent configuration. With no parents there is exactly one
/// configuration, the empty tuple, holding all `N` cases.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SufficientStats {
    target: usize,
    target_cardinality: u32,
    parents: Vec<usize>,
    /// parent configuration -> histogram over target values
    table: BTreeMap<Vec<u32>, Vec<u64>>,
    total: u64,
}

impl SufficientStats {
    pub fn target(&self) -> usize {
        self.target
    }

    pub fn parents(&self) -> &[usize] {
        &self.parents
    }

    pub fn target_cardinality(&self) -> u32 {
        self.target_cardinality
    }

    pub fn case_count(&self) -> u64 {
        self.total
    }

    pub fn joint_count(&self, value: u32, config: &[u32]) -> u64 {
        self.table
            .get(config)
            .and_then(|h| h.get(value as usize))
            .copied()
            .unwrap_or(0)
    }

    pub fn parent_count(&self, config: &[u32]) -> u64 {
        self.table.get(config).map_or(0, |h| h.iter().sum())
    }

    /// Observed parent configurations in lexicographic order, each with its
    /// histogram of target values (indexed by value).
    pub fn configurations(&self) -> impl Iterator<Item = (&[u32], &[u64])> {
        self.table.iter().map(|(k, v)| (k.as_slice(), v.as_slice()))
    }
}

/// Tallies the counts for `target` given `parents` (in the given order).
pub fn compute_stats(data: &DiscreteDataset, target: usize, parents: &[usize]) -> Result<SufficientStats> {
    let n = data.variable_count();
    if target >= n {
        return Err(Error::InvalidQuery(format!("target {target} out of range (n = {n})")));
    }
    for (k, &p) in parents.iter().enumerate() {
        if p >= n {
            return Err(Error::InvalidQuery(format!("parent {p} out of range (n = {n})")));
        }
        if p == target {
            return Err(Error::InvalidQuery(format!("target {target} listed among its own parents")));
        }
        if parents[..k].contains(&p) {
            return Err(Error::InvalidQuery(format!("parent {p} listed twice")));
        }
    }

    let r = data.cardinalities[target] as usize;
    let mut table: BTreeMap<Vec<u32>, Vec<u64>> = BTreeMap::new();
    let mut key = Vec::with_capacity(parents.len());
    for case in &data.cases {
        key.clear();
        key.extend(parents.iter().map(|&p| case[p]));
        let hist = match table.get_mut(key.as_slice()) {
            Some(h) => h,
            None => table.entry(key.clone()).or_insert_with(|| vec![0; r]),
        };
        hist[case[target] as usize] += 1;
    }
    Ok(SufficientStats {
        target,
        target_cardinality: data.cardinalities[target],
        parents: parents.to_vec(),
        table,
        total: data.case_count() as u64,
    })
}

type StatsKey = (usize, Vec<usize>);

/// Memoizes [`compute_stats`] per `(target, sorted parents)`. Safe to share
/// between threads.
#[derive(Debug)]
pub struct StatsCache<'a> {
    data: &'a DiscreteDataset,
    entries: RwLock<HashMap<StatsKey, Arc<SufficientStats>>>,
}

impl<'a> StatsCache<'a> {
    pub fn new(data: &'a DiscreteDataset) -> Self {
        StatsCache {
            data,
            entries: RwLock::new(HashMap::new()),
        }
    }

    pub fn data(&self) -> &'a DiscreteDataset {
        self.data
    }

    /// Stats for `target` given `parents`; the parents are sorted first, so
    /// the returned stats always list them in increasing index order.
    pub fn get(&self, target: usize, parents: &[usize]) -> Result<Arc<SufficientStats>> {
        let mut sorted = parents.to_vec();
        sorted.sort_unstable();
        let key = (target, sorted);
        if let Some(hit) = self.entries.read().unwrap_or_else(|e| e.into_inner()).get(&key) {
            return Ok(Arc::clone(hit));
        }
        let stats = Arc::new(compute_stats(self.data, target, &key.1)?);
        let mut entries = self.entries.write().unwrap_or_else(|e| e.into_inner());
        Ok(Arc::clone(entries.entry(key).or_insert(stats)))
    }

    pub fn len(&self) -> usize {
        self.entries.read().unwrap_or_else(|e| e.into_inner()).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(s: &str) -> Result<DiscreteDataset> {
        load_dataset(s.as_bytes())
    }

    fn to_string(d: &DiscreteDataset) -> String {
        let mut buf = Vec::new();
        write_dataset(d, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn minimal_two_case_file() {
        let d = load("A,B\n0,1\n1,0\n").unwrap();
        assert_eq!(d.case_count(), 2);
        assert_eq!(d.cardinalities(), &[2, 2]);
        assert_eq!(d.names(), &["A".to_string(), "B".to_string()]);
    }

    #[test]
    fn crlf_and_card_row() {
        let d = load("A,B\r\n#card:3,4\r\n0,1\r\n").unwrap();
        assert_eq!(d.cardinalities(), &[3, 4]);
        assert_eq!(d.cases(), &[vec![0, 1]]);
    }

    #[test]
    fn fractional_cell_is_rejected_at_its_position() {
        match load("A,B\n0,1\n1,2.5\n") {
            Err(Error::Parse { row, column, .. }) => assert_eq!((row, column), (3, 2)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(load(""), Err(Error::Parse { .. })));
        assert!(matches!(load("A,A\n0,0\n"), Err(Error::Parse { row: 1, column: 2, .. })));
        assert!(matches!(load("A,B\n0,1\n0\n"), Err(Error::Parse { row: 3, .. })));
        assert!(matches!(load("A\n-1\n"), Err(Error::Parse { row: 2, column: 1, .. })));
        assert!(matches!(load("A,B\n#card:2,2\n0,2\n"), Err(Error::Parse { row: 3, column: 2, .. })));
        assert!(matches!(load("A,B\n#card:0,2\n"), Err(Error::Parse { row: 2, column: 1, .. })));
    }

    #[test]
    fn empty_dataset_writes_header_only() {
        let d = load("A,B\n").unwrap();
        assert_eq!(d.case_count(), 0);
        assert_eq!(to_string(&d), "A,B\n");
        assert_eq!(load(&to_string(&d)).unwrap(), d);
    }

    #[test]
    fn declared_cardinality_survives_round_trip() {
        let d = DiscreteDataset::new(
            vec!["X".into(), "Y".into()],
            vec![3, 2],
            vec![vec![0, 1], vec![1, 1]],
        )
        .unwrap();
        let text = to_string(&d);
        assert_eq!(text, "X,Y\n#card:3,2\n0,1\n1,1\n");
        assert_eq!(load(&text).unwrap(), d);
    }

    #[test]
    fn stats_queries() {
        let d = load("A,B,C\n0,0,1\n1,0,1\n1,1,0\n1,1,1\n").unwrap();
        let s = compute_stats(&d, 0, &[]).unwrap();
        assert_eq!(s.parent_count(&[]), 4);
        assert_eq!(s.joint_count(1, &[]), 3);
        let s = compute_stats(&d, 0, &[2, 1]).unwrap();
        assert_eq!(s.joint_count(1, &[1, 1]), 1);
        assert_eq!(s.parent_count(&[1, 0]), 2);
        assert_eq!(s.parent_count(&[0, 1]), 1);
        assert_eq!(s.parent_count(&[0, 0]), 0);
        assert!(matches!(compute_stats(&d, 0, &[0]), Err(Error::InvalidQuery(_))));
        assert!(matches!(compute_stats(&d, 0, &[1, 1]), Err(Error::InvalidQuery(_))));
        assert!(matches!(compute_stats(&d, 3, &[]), Err(Error::InvalidQuery(_))));
    }

    #[test]
    fn cache_canonicalizes_parent_order() {
        let d = load("A,B,C\n0,0,1\n1,0,1\n1,1,0\n").unwrap();
        let cache = StatsCache::new(&d);
        let a = cache.get(0, &[2, 1]).unwrap();
        let b = cache.get(0, &[1, 2]).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        assert_eq!(a.parents(), &[1, 2]);
        assert_eq!(cache.len(), 1);
        assert_eq!(*a, compute_stats(&d, 0, &[1, 2]).unwrap());
    }
}
