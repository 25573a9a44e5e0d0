//! Categorical datasets and contingency counting.

use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A categorical variable and its ordered domain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableMeta {
    pub name: String,
    pub states: Vec<String>,
}

impl VariableMeta {
    pub fn new(name: impl Into<String>, states: Vec<String>) -> Self {
        VariableMeta {
            name: name.into(),
            states,
        }
    }

    /// Variable with states `"0"`, `"1"`, ... `card - 1`.
    pub fn with_cardinality(name: impl Into<String>, card: usize) -> Self {
        VariableMeta::new(name, (0..card).map(|s| s.to_string()).collect())
    }

    pub fn cardinality(&self) -> usize {
        self.states.len()
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.states.len() < 2 {
            return Err(Error::SingleState(self.name.clone()));
        }
        let distinct: BTreeSet<&String> = self.states.iter().collect();
        if distinct.len() != self.states.len() {
            return Err(Error::InvalidDataset(format!(
                "variable `{}` has duplicate state labels",
                self.name
            )));
        }
        Ok(())
    }
}

/// Column-major table of state indices.
///
/// Immutable once built: every column has `n_rows` entries and every entry is
/// a valid index into its variable's `states`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    variables: Vec<VariableMeta>,
    columns: Vec<Vec<u16>>,
    n_rows: usize,
}

impl Dataset {
    pub fn new(variables: Vec<VariableMeta>, columns: Vec<Vec<u16>>) -> Result<Self> {
        if variables.len() != columns.len() {
            return Err(Error::InvalidDataset(format!(
                "{} variables but {} columns",
                variables.len(),
                columns.len()
            )));
        }
        let n_rows = columns.first().map_or(0, Vec::len);
        let mut names = BTreeSet::new();
        for (var, col) in variables.iter().zip(&columns) {
            var.validate()?;
            if var.states.len() > u16::MAX as usize {
                return Err(Error::InvalidDataset(format!(
                    "variable `{}` has too many states",
                    var.name
                )));
            }
            if !names.insert(var.name.as_str()) {
                return Err(Error::InvalidDataset(format!(
                    "duplicate variable name `{}`",
                    var.name
                )));
            }
            if col.len() != n_rows {
                return Err(Error::InvalidDataset(format!(
                    "column `{}` has {} rows, expected {}",
                    var.name,
                    col.len(),
                    n_rows
                )));
            }
            let card = var.cardinality() as u16;
            if let Some(bad) = col.iter().find(|&&s| s >= card) {
                return Err(Error::InvalidDataset(format!(
                    "state index {bad} out of range for `{}`",
                    var.name
                )));
            }
        }
        Ok(Dataset {
            variables,
            columns,
            n_rows,
        })
    }

    /// Builds a dataset from string cells, inferring each domain as the sorted
    /// set of distinct labels of its column.
    pub fn from_labels(names: Vec<String>, rows: &[Vec<String>]) -> Result<Self> {
        let width = names.len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(Error::RaggedRow {
                    row: i + 1,
                    expected: width,
                    found: row.len(),
                });
            }
            if let Some(j) = row.iter().position(|c| c.trim().is_empty()) {
                return Err(Error::MissingValue {
                    row: i + 1,
                    column: names[j].clone(),
                });
            }
        }
        let mut variables = Vec::with_capacity(width);
        let mut columns = Vec::with_capacity(width);
        for (j, name) in names.into_iter().enumerate() {
            let domain: BTreeSet<&str> = rows.iter().map(|r| r[j].as_str()).collect();
            let index: HashMap<&str, u16> = domain
                .iter()
                .enumerate()
                .map(|(i, s)| (*s, i as u16))
                .collect();
            columns.push(rows.iter().map(|r| index[r[j].as_str()]).collect());
            let states = domain.into_iter().map(str::to_owned).collect();
            variables.push(VariableMeta::new(name, states));
        }
        Dataset::new(variables, columns)
    }

    pub fn variables(&self) -> &[VariableMeta] {
        &self.variables
    }

    pub fn variable(&self, id: usize) -> Result<&VariableMeta> {
        self.variables.get(id).ok_or(Error::UnknownVariable(id))
    }

    pub fn n_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn column(&self, id: usize) -> &[u16] {
        &self.columns[id]
    }

    pub fn cardinality(&self, id: usize) -> usize {
        self.variables[id].cardinality()
    }

    pub fn names(&self) -> Vec<String> {
        self.variables.iter().map(|v| v.name.clone()).collect()
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.variables
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| Error::UnknownName(name.to_owned()))
    }

    pub(crate) fn check_id(&self, id: usize) -> Result<()> {
        if id < self.variables.len() {
            Ok(())
        } else {
            Err(Error::UnknownVariable(id))
        }
    }

    /// Restricts the dataset to the variables in `keep`. Kept variables are
    /// renumbered in increasing order of their original id; rows are untouched.
    pub fn project(&self, keep: &BTreeSet<usize>) -> Result<Dataset> {
        for &id in keep {
            self.check_id(id)?;
        }
        Ok(Dataset {
            variables: keep.iter().map(|&i| self.variables[i].clone()).collect(),
            columns: keep.iter().map(|&i| self.columns[i].clone()).collect(),
            n_rows: self.n_rows,
        })
    }

    /// Projection by variable names, keeping the order of this dataset.
    pub fn project_names<S: AsRef<str>>(&self, keep: &[S]) -> Result<Dataset> {
        let ids = keep
            .iter()
            .map(|n| self.index_of(n.as_ref()))
            .collect::<Result<BTreeSet<_>>>()?;
        self.project(&ids)
    }

    /// Contingency counts of `child` against the configurations of `parents`.
    pub fn count(&self, child: usize, parents: &[usize]) -> Result<ContingencyTable> {
        self.check_id(child)?;
        let mut sorted = parents.to_vec();
        sorted.sort_unstable();
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                return Err(Error::DuplicateVariable(w[0]));
            }
        }
        for &p in &sorted {
            self.check_id(p)?;
            if p == child {
                return Err(Error::ChildInParents(child));
            }
        }
        let parent_cards: Vec<usize> = sorted.iter().map(|&p| self.cardinality(p)).collect();
        let n_configs: usize = parent_cards.iter().product();
        let child_card = self.cardinality(child);
        let mut counts = vec![0u64; n_configs * child_card];
        let child_col = &self.columns[child];
        for row in 0..self.n_rows {
            let mut z = 0usize;
            for (&p, &card) in sorted.iter().zip(&parent_cards) {
                z = z * card + self.columns[p][row] as usize;
            }
            counts[z * child_card + child_col[row] as usize] += 1;
        }
        let marginals = counts
            .chunks(child_card)
            .map(|c| c.iter().sum())
            .collect();
        Ok(ContingencyTable {
            child,
            parents: sorted,
            child_card,
            parent_cards,
            counts,
            marginals,
        })
    }

    /// Reads a delimited file with a header row. Every cell must be non-empty.
    pub fn load(path: impl AsRef<Path>, delimiter: u8) -> Result<Dataset> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(file, delimiter)
    }

    pub fn read<R: std::io::Read>(reader: R, delimiter: u8) -> Result<Dataset> {
        let mut rdr = csv::ReaderBuilder::new()
            .delimiter(delimiter)
            .has_headers(true)
            .flexible(true)
            .from_reader(reader);
        let names: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_owned()).collect();
        if names.is_empty() || names.iter().any(String::is_empty) {
            return Err(Error::InvalidDataset("missing or empty header".into()));
        }
        let mut rows = Vec::new();
        for record in rdr.records() {
            let record = record?;
            rows.push(record.iter().map(|c| c.trim().to_owned()).collect());
        }
        Dataset::from_labels(names, &rows)
    }

    pub fn write(&self, path: impl AsRef<Path>, delimiter: u8) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut wtr = csv::WriterBuilder::new()
            .delimiter(delimiter)
            .from_writer(std::io::BufWriter::new(file));
        wtr.write_record(self.variables.iter().map(|v| v.name.as_str()))?;
        let mut record = Vec::with_capacity(self.variables.len());
        for row in 0..self.n_rows {
            record.clear();
            for (var, col) in self.variables.iter().zip(&self.columns) {
                record.push(var.states[col[row] as usize].as_str());
            }
            wtr.write_record(&record)?;
        }
        wtr.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    /// Per-row joint configuration codes of `vars`, densely renumbered when the
    /// full Cartesian product would exceed `COMPACT_LIMIT` cells.
    ///
    /// Returns the codes and an exclusive upper bound on them.
    pub(crate) fn joint_codes(&self, vars: &[usize]) -> (Vec<u32>, usize) {
        let mut codes = vec![0u32; self.n_rows];
        let mut range = 1usize;
        for &v in vars {
            let card = self.cardinality(v);
            if range * card > COMPACT_LIMIT {
                range = compact(&mut codes);
            }
            let col = &self.columns[v];
            for (c, &s) in codes.iter_mut().zip(col) {
                *c = *c * card as u32 + s as u32;
            }
            range *= card;
        }
        (codes, range)
    }

    /// `Σ_cells N ln(N / |D|)` over the joint configurations of `vars`
    /// (0 ln 0 = 0). This is `Σ N ln N` shifted by the constant `|D| ln |D|`,
    /// which cancels in every score and test; the shift keeps the terms small.
    pub(crate) fn n_log_n(&self, vars: &[usize]) -> f64 {
        if vars.is_empty() {
            return 0.0;
        }
        let (mut codes, mut range) = self.joint_codes(vars);
        if range > 4 * self.n_rows + 1024 {
            range = compact(&mut codes);
        }
        let mut counts = vec![0u32; range];
        for &c in &codes {
            counts[c as usize] += 1;
        }
        let total = self.n_rows as f64;
        neumaier_sum(counts.iter().filter(|&&n| n > 0).map(|&n| {
            let x = n as f64;
            x * (x / total).ln()
        }))
    }
}

/// Compensated summation.
fn neumaier_sum(xs: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for x in xs {
        let t = sum + x;
        comp += if sum.abs() >= x.abs() { (sum - t) + x } else { (x - t) + sum };
        sum = t;
    }
    sum + comp
}

const COMPACT_LIMIT: usize = 1 << 22;

/// Renumbers codes densely in order of first appearance; returns the new range.
fn compact(codes: &mut [u32]) -> usize {
    let mut map: HashMap<u32, u32> = HashMap::new();
    for c in codes.iter_mut() {
        let next = map.len() as u32;
        *c = *map.entry(*c).or_insert(next);
    }
    map.len().max(1)
}

#[cfg(test)]
fn xlogx(n: u64) -> f64 {
    if n == 0 {
        0.0
    } else {
        let x = n as f64;
        x * x.ln()
    }
}

/// Counts `N_{x,z}` of a child against its parents' configurations.
///
/// Parents are sorted by variable id and configurations enumerate their full
/// Cartesian product lexicographically, the first parent varying slowest.
/// `counts[z * child_card + x]` holds `N_{x,z}`; `marginals[z]` holds `N_z`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    pub child: usize,
    pub parents: Vec<usize>,
    pub child_card: usize,
    pub parent_cards: Vec<usize>,
    pub counts: Vec<u64>,
    pub marginals: Vec<u64>,
}

impl ContingencyTable {
    pub fn n_configs(&self) -> usize {
        self.marginals.len()
    }

    pub fn get(&self, x: usize, z: usize) -> u64 {
        self.counts[z * self.child_card + x]
    }

    pub fn total(&self) -> u64 {
        self.marginals.iter().sum()
    }
}
