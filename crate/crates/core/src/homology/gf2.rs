//! Sparse linear algebra over the two-element field.

/// Sparse GF(2) vector: sorted indices of the nonzero entries.
pub type Column = Vec<usize>;

/// `a += b`, i.e. the symmetric difference of the supports.
pub fn add_assign(a: &mut Column, b: &[usize]) {
    if b.is_empty() {
        return;
    }
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    *a = out;
}

/// Builds a column from unsorted indices, cancelling repeated entries in pairs.
pub fn from_indices(mut idx: Vec<usize>) -> Column {
    idx.sort_unstable();
    let mut out = Vec::with_capacity(idx.len());
    for i in idx {
        if out.last() == Some(&i) {
            out.pop();
        } else {
            out.push(i);
        }
    }
    out
}

pub fn low(c: &[usize]) -> Option<usize> {
    c.last().copied()
}

/// Inner product of two sparse vectors.
pub fn dot(a: &[usize], b: &[usize]) -> bool {
    let (mut i, mut j, mut parity) = (0, 0, false);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                parity = !parity;
                i += 1;
                j += 1;
            }
        }
    }
    parity
}

/// Transpose of a matrix given by columns, with `rows` rows.
pub fn transpose(columns: &[Column], rows: usize) -> Vec<Column> {
    let mut out = vec![Vec::new(); rows];
    for (j, col) in columns.iter().enumerate() {
        for &i in col {
            out[i].push(j);
        }
    }
    out
}

/// Left-to-right column reduction `R = D V` with `V` upper unitriangular.
#[derive(Debug, Clone)]
pub struct Reduction {
    pub reduced: Vec<Column>,
    pub transform: Vec<Column>,
    /// Column whose reduced low is the given row.
    pub pivot_of_row: Vec<Option<usize>>,
}

impl Reduction {
    pub fn new(columns: &[Column], rows: usize) -> Self {
        let mut reduced: Vec<Column> = Vec::with_capacity(columns.len());
        let mut transform: Vec<Column> = Vec::with_capacity(columns.len());
        let mut pivot_of_row: Vec<Option<usize>> = vec![None; rows];
        for (j, col) in columns.iter().enumerate() {
            let mut r = col.clone();
            let mut v = vec![j];
            while let Some(l) = low(&r) {
                match pivot_of_row[l] {
                    Some(k) => {
                        add_assign(&mut r, &reduced[k]);
                        add_assign(&mut v, &transform[k]);
                    }
                    None => {
                        pivot_of_row[l] = Some(j);
                        break;
                    }
                }
            }
            reduced.push(r);
            transform.push(v);
        }
        Self { reduced, transform, pivot_of_row }
    }

    pub fn rank(&self) -> usize {
        self.reduced.iter().filter(|c| !c.is_empty()).count()
    }
}

/// Incrementally built echelon basis whose rows remember which labelled generators
/// they combine, so membership queries also return coordinates.
#[derive(Debug, Clone, Default)]
pub struct Echelon {
    rows: Vec<(Column, Column)>,
    pivot: std::collections::HashMap<usize, usize>,
}

impl Echelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `v` against the basis; returns the residual and the label combination used.
    pub fn reduce(&self, v: &[usize]) -> (Column, Column) {
        let mut r = v.to_vec();
        let mut labels = Vec::new();
        while let Some(l) = low(&r) {
            match self.pivot.get(&l) {
                Some(&k) => {
                    add_assign(&mut r, &self.rows[k].0);
                    add_assign(&mut labels, &self.rows[k].1);
                }
                None => break,
            }
        }
        (r, labels)
    }

    /// Adds `v` carrying `label` (use `None` for unlabelled generators).
    /// Returns whether `v` was independent of the current span.
    pub fn insert(&mut self, v: &[usize], label: Option<usize>) -> bool {
        let (r, mut labels) = self.reduce(v);
        match low(&r) {
            Some(l) => {
                if let Some(id) = label {
                    add_assign(&mut labels, &[id]);
                }
                self.pivot.insert(l, self.rows.len());
                self.rows.push((r, labels));
                true
            }
            None => false,
        }
    }

    pub fn contains(&self, v: &[usize]) -> bool {
        self.reduce(v).0.is_empty()
    }

    /// Labels whose sum, together with unlabelled generators, equals `v`; `None` if
    /// `v` is outside the span.
    pub fn solve(&self, v: &[usize]) -> Option<Column> {
        let (r, labels) = self.reduce(v);
        r.is_empty().then_some(labels)
    }
}

/// Rank of a set of vectors.
pub fn rank(vectors: &[Column]) -> usize {
    let mut e = Echelon::new();
    vectors.iter().filter(|v| e.insert(v, None)).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dense(c: &[usize], n: usize) -> Vec<bool> {
        let mut d = vec![false; n];
        for &i in c {
            d[i] = true;
        }
        d
    }

    #[test]
    fn symmetric_difference() {
        let mut a = vec![1, 3, 5];
        add_assign(&mut a, &[3, 4]);
        assert_eq!(a, vec![1, 4, 5]);
        assert_eq!(from_indices(vec![4, 1, 4, 2, 4]), vec![1, 2, 4]);
    }

    #[test]
    fn reduction_of_triangle_boundary() {
        // ∂ of the 2-simplex [0,1,2] on edges 01, 02, 12 (indices 0, 1, 2)
        let d = vec![vec![0, 1], vec![0, 2], vec![1, 2]];
        let r = Reduction::new(&d, 3);
        assert_eq!(r.rank(), 2);
        assert!(r.reduced[2].is_empty());
        assert_eq!(r.transform[2], vec![0, 1, 2]);
    }

    proptest! {
        #[test]
        fn reduction_factorizes(cols in prop::collection::vec(prop::collection::btree_set(0usize..12, 0..6), 1..14)) {
            let cols: Vec<Column> = cols.into_iter().map(|s| s.into_iter().collect()).collect();
            let r = Reduction::new(&cols, 12);
            // R = D V column by column
            for (j, v) in r.transform.iter().enumerate() {
                let mut acc = Vec::new();
                for &k in v {
                    add_assign(&mut acc, &cols[k]);
                }
                prop_assert_eq!(&acc, &r.reduced[j]);
                prop_assert_eq!(v.last().copied(), Some(j));
            }
            // nonzero lows are distinct
            let mut lows: Vec<usize> = r.reduced.iter().filter_map(|c| low(c)).collect();
            let n = lows.len();
            lows.sort_unstable();
            lows.dedup();
            prop_assert_eq!(n, lows.len());
            prop_assert_eq!(rank(&cols), r.rank());
        }

        #[test]
        fn echelon_solutions_reconstruct(cols in prop::collection::vec(prop::collection::btree_set(0usize..10, 1..5), 1..8),
                                         pick in prop::collection::vec(any::<bool>(), 8)) {
            let cols: Vec<Column> = cols.into_iter().map(|s| s.into_iter().collect()).collect();
            let mut e = Echelon::new();
            for (i, c) in cols.iter().enumerate() {
                e.insert(c, Some(i));
            }
            let mut target = Vec::new();
            for (i, c) in cols.iter().enumerate() {
                if pick[i] {
                    add_assign(&mut target, c);
                }
            }
            let labels = e.solve(&target).expect("target lies in the span");
            let mut acc = Vec::new();
            for &i in &labels {
                add_assign(&mut acc, &cols[i]);
            }
            prop_assert_eq!(dense(&acc, 10), dense(&target, 10));
        }
    }
}
