//! Labelled sample collections, loaders, splits, and class centroids.

mod csv;
mod idx;

pub use self::csv::{load_csv, CsvOptions, LabelColumn};
pub use self::idx::{load_idx, read_idx_images, read_idx_labels, write_idx_images, write_idx_labels, IdxImages};

use crate::error::{Error, Result};
use crate::numerics::{Matrix, SeededRng};

/// Sample matrix with integer class labels `0..M`.
///
/// `class_index_sets()[j]` lists, in ascending order, the rows labelled `j`.
/// Loaders never produce an empty class; subsets taken from a dataset keep
/// the parent's label space, so a class may end up empty there.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    x: Matrix,
    labels: Vec<usize>,
    class_names: Vec<String>,
    class_index_sets: Vec<Vec<usize>>,
}

impl Dataset {
    /// Builds a dataset whose classes are named `"0"`, `"1"`, ...
    pub fn new(x: Matrix, labels: Vec<usize>) -> Result<Self> {
        let m = labels.iter().max().map_or(0, |&l| l + 1);
        let names = (0..m).map(|j| j.to_string()).collect();
        Self::with_class_names(x, labels, names)
    }

    pub fn with_class_names(x: Matrix, labels: Vec<usize>, class_names: Vec<String>) -> Result<Self> {
        if labels.len() != x.rows() {
            return Err(Error::contract(format!(
                "{} labels for {} samples",
                labels.len(),
                x.rows()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= class_names.len()) {
            return Err(Error::contract(format!(
                "label {bad} outside the {} known classes",
                class_names.len()
            )));
        }
        let mut sets = vec![Vec::new(); class_names.len()];
        for (i, &l) in labels.iter().enumerate() {
            sets[l].push(i);
        }
        Ok(Self {
            x,
            labels,
            class_names,
            class_index_sets: sets,
        })
    }

    pub fn x(&self) -> &Matrix {
        &self.x
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn class_index_sets(&self) -> &[Vec<usize>] {
        &self.class_index_sets
    }

    pub fn n_samples(&self) -> usize {
        self.x.rows()
    }

    pub fn n_features(&self) -> usize {
        self.x.cols()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        self.class_index_sets.iter().map(Vec::len).collect()
    }

    /// Rows `indices`, in order, with the parent's label space.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        Self::with_class_names(self.x.select_rows(indices), labels, self.class_names.clone())
            .expect("subset of a valid dataset")
    }

    /// Same labels, new feature matrix (for instance an embedding).
    pub fn with_features(&self, x: Matrix) -> Result<Dataset> {
        Self::with_class_names(x, self.labels.clone(), self.class_names.clone())
    }

    /// Concatenates two datasets over the same label space.
    pub fn concat(&self, other: &Dataset) -> Result<Dataset> {
        if self.class_names != other.class_names {
            return Err(Error::contract("cannot concatenate datasets with different classes"));
        }
        let x = self.x.vstack(&other.x)?;
        let mut labels = self.labels.clone();
        labels.extend_from_slice(&other.labels);
        Self::with_class_names(x, labels, self.class_names.clone())
    }

    /// Keeps only the named classes, relabelled `0..keep.len()` in the order given.
    pub fn filter_classes<S: AsRef<str>>(&self, keep: &[S]) -> Result<Dataset> {
        let mut remap = vec![None; self.n_classes()];
        let mut names = Vec::with_capacity(keep.len());
        for (new, name) in keep.iter().enumerate() {
            let name = name.as_ref();
            let old = self
                .class_names
                .iter()
                .position(|c| c == name)
                .ok_or_else(|| Error::Data(format!("class `{name}` not present")))?;
            if remap[old].is_some() {
                return Err(Error::Data(format!("class `{name}` listed twice")));
            }
            remap[old] = Some(new);
            names.push(name.to_string());
        }
        let rows: Vec<usize> = (0..self.n_samples()).filter(|&i| remap[self.labels[i]].is_some()).collect();
        let labels = rows.iter().map(|&i| remap[self.labels[i]].unwrap()).collect();
        Self::with_class_names(self.x.select_rows(&rows), labels, names)
    }

    /// Draws up to `per_class` rows from every class, returned in ascending row order.
    pub fn sample_per_class(&self, per_class: usize, rng: &mut SeededRng) -> Dataset {
        let mut rows = Vec::new();
        for set in &self.class_index_sets {
            let mut members = set.clone();
            rng.shuffle(&mut members);
            members.truncate(per_class);
            rows.extend(members);
        }
        rows.sort_unstable();
        self.subset(&rows)
    }
}

/// Per-class mean vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct CentroidSet {
    /// Row `j` is the centroid of class `j`.
    pub centroids: Matrix,
    pub class_counts: Vec<usize>,
}

impl CentroidSet {
    /// Class means of the rows of `x` grouped by `labels`.
    pub fn from_rows(x: &Matrix, labels: &[usize], n_classes: usize) -> Result<Self> {
        if labels.len() != x.rows() {
            return Err(Error::contract("one label per row required"));
        }
        let d = x.cols();
        let mut sums = Matrix::zeros(n_classes, d);
        let mut counts = vec![0usize; n_classes];
        for (row, &l) in x.row_iter().zip(labels) {
            if l >= n_classes {
                return Err(Error::contract(format!("label {l} outside {n_classes} classes")));
            }
            counts[l] += 1;
            for (s, &v) in sums.row_mut(l).iter_mut().zip(row) {
                *s += v;
            }
        }
        if let Some(j) = counts.iter().position(|&c| c == 0) {
            return Err(Error::Data(format!("class {j} has no samples")));
        }
        for (j, &c) in counts.iter().enumerate() {
            for s in sums.row_mut(j) {
                *s /= c as f64;
            }
        }
        Ok(Self {
            centroids: sums,
            class_counts: counts,
        })
    }

    pub fn n_classes(&self) -> usize {
        self.centroids.rows()
    }

    pub fn dim(&self) -> usize {
        self.centroids.cols()
    }

    pub fn centroid(&self, class: usize) -> &[f64] {
        self.centroids.row(class)
    }

    /// Index of the closest centroid; ties go to the lower class index.
    pub fn nearest(&self, point: &[f64]) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for j in 0..self.n_classes() {
            let d = squared_distance(point, self.centroid(j));
            if d < best_d {
                best_d = d;
                best = j;
            }
        }
        best
    }
}

/// `c_j = mean of the rows in class j`.
pub fn compute_centroids(ds: &Dataset) -> Result<CentroidSet> {
    CentroidSet::from_rows(ds.x(), ds.labels(), ds.n_classes())
}

/// Row `i` of the result is the centroid of the class of sample `i`.
pub fn build_targets(ds: &Dataset, cs: &CentroidSet) -> Result<Matrix> {
    if cs.dim() != ds.n_features() {
        return Err(Error::contract(format!(
            "centroids have dimension {}, samples {}",
            cs.dim(),
            ds.n_features()
        )));
    }
    if cs.n_classes() < ds.n_classes() {
        return Err(Error::contract("fewer centroids than classes"));
    }
    let rows: Vec<usize> = ds.labels().to_vec();
    Ok(cs.centroids.select_rows(&rows))
}

/// Autoencoder targets: every sample is its own target.
pub fn identity_targets(ds: &Dataset) -> Matrix {
    ds.x().clone()
}

/// Train/test (and optionally validation) row indices, each sorted ascending.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub validation: Vec<usize>,
}

/// Stratified train/test split over every row of `ds`.
///
/// Each class contributes `round(n_c * test_fraction)` test rows, clamped so
/// that both sides keep at least one member of every class.
pub fn stratified_split(ds: &Dataset, test_fraction: f64, rng: &mut SeededRng) -> Result<Split> {
    let all: Vec<usize> = (0..ds.n_samples()).collect();
    let (train, test) = stratified_partition(ds, &all, test_fraction, rng)?;
    Ok(Split {
        train,
        test,
        validation: Vec::new(),
    })
}

/// Splits `pool` into `(kept, held_out)` with per-class proportions preserved.
pub fn stratified_partition(
    ds: &Dataset,
    pool: &[usize],
    fraction: f64,
    rng: &mut SeededRng,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::config("test_fraction", format!("{fraction} is not in (0, 1)")));
    }
    let mut by_class = vec![Vec::new(); ds.n_classes()];
    for &i in pool {
        by_class[ds.labels()[i]].push(i);
    }
    let mut kept = Vec::new();
    let mut held = Vec::new();
    for (j, mut members) in by_class.into_iter().enumerate() {
        if members.is_empty() {
            continue;
        }
        if members.len() < 2 {
            return Err(Error::Data(format!(
                "class `{}` has {} sample(s); at least 2 are needed to split",
                ds.class_names()[j],
                members.len()
            )));
        }
        let n = members.len();
        let n_held = ((n as f64 * fraction).round() as usize).clamp(1, n - 1);
        members.sort_unstable();
        rng.shuffle(&mut members);
        held.extend_from_slice(&members[..n_held]);
        kept.extend_from_slice(&members[n_held..]);
    }
    kept.sort_unstable();
    held.sort_unstable();
    Ok((kept, held))
}

/// Per-feature affine map fitted on training rows.
#[derive(Clone, Debug, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    /// Population standard deviation; zero marks a constant feature.
    pub std: Vec<f64>,
}

impl Standardizer {
    /// Fits on the rows `indices` of `x`.
    pub fn fit(x: &Matrix, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::Data("cannot standardize on zero rows".into()));
        }
        let d = x.cols();
        let n = indices.len() as f64;
        let mut mean = vec![0.0; d];
        for &i in indices {
            for (m, &v) in mean.iter_mut().zip(x.row(i)) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; d];
        for &i in indices {
            for ((s, &v), &m) in var.iter_mut().zip(x.row(i)).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let std = var
            .into_iter()
            .map(|s| {
                let sd = (s / n).sqrt();
                if sd > 1e-12 {
                    sd
                } else {
                    0.0
                }
            })
            .collect();
        Ok(Self { mean, std })
    }

    pub fn apply(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.mean.len() {
            return Err(Error::contract(format!(
                "standardizer fitted on {} features, data has {}",
                self.mean.len(),
                x.cols()
            )));
        }
        let mut out = x.clone();
        for i in 0..out.rows() {
            for ((v, &m), &s) in out.row_mut(i).iter_mut().zip(&self.mean).zip(&self.std) {
                *v = if s > 0.0 { (*v - m) / s } else { 0.0 };
            }
        }
        Ok(out)
    }
}

/// Z-scores every row using statistics of the `stats_from` rows only.
pub fn standardize(ds: &Dataset, stats_from: &[usize]) -> Result<(Dataset, Standardizer)> {
    let st = Standardizer::fit(ds.x(), stats_from)?;
    let x = st.apply(ds.x())?;
    Ok((ds.with_features(x)?, st))
}

#[inline]
pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> Dataset {
        let x = Matrix::from_rows(&[[0.0, 0.0], [2.0, 2.0], [4.0, 0.0]]).unwrap();
        Dataset::new(x, vec![0, 0, 1]).unwrap()
    }

    fn blobs(per_class: &[usize]) -> Dataset {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for (j, &n) in per_class.iter().enumerate() {
            for i in 0..n {
                rows.push(vec![j as f64, i as f64]);
                labels.push(j);
            }
        }
        Dataset::new(Matrix::from_rows(&rows).unwrap(), labels).unwrap()
    }

    #[test]
    fn index_sets_partition_rows() {
        let ds = blobs(&[3, 2, 4]);
        let mut seen = vec![0; ds.n_samples()];
        for (j, set) in ds.class_index_sets().iter().enumerate() {
            for &i in set {
                seen[i] += 1;
                assert_eq!(ds.labels()[i], j);
            }
        }
        assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    fn centroids_by_hand() {
        let cs = compute_centroids(&toy()).unwrap();
        assert_eq!(cs.centroid(0), &[1.0, 1.0]);
        assert_eq!(cs.centroid(1), &[4.0, 0.0]);
        assert_eq!(cs.class_counts, vec![2, 1]);
    }

    #[test]
    fn single_point_classes() {
        let x = Matrix::from_rows(&[[1.5, -2.0], [3.0, 7.0]]).unwrap();
        let ds = Dataset::new(x.clone(), vec![0, 1]).unwrap();
        assert_eq!(compute_centroids(&ds).unwrap().centroids, x);
    }

    #[test]
    fn duplicated_rows_keep_centroids() {
        let ds = toy();
        let doubled = ds.concat(&ds).unwrap();
        let a = compute_centroids(&ds).unwrap();
        let b = compute_centroids(&doubled).unwrap();
        assert!(a.centroids.max_abs_diff(&b.centroids).unwrap() < 1e-12);
    }

    #[test]
    fn targets_look_up_class_centroids() {
        let ds = toy();
        let cs = compute_centroids(&ds).unwrap();
        let t = build_targets(&ds, &cs).unwrap();
        assert_eq!(t.as_slice(), &[1.0, 1.0, 1.0, 1.0, 4.0, 0.0]);
        // centroids of the targets are the same centroids
        let again = CentroidSet::from_rows(&t, ds.labels(), 2).unwrap();
        assert_eq!(again, cs);
    }

    #[test]
    fn one_class_targets_are_identical() {
        let x = Matrix::from_rows(&[[1.0], [2.0], [6.0]]).unwrap();
        let ds = Dataset::new(x, vec![0, 0, 0]).unwrap();
        let t = build_targets(&ds, &compute_centroids(&ds).unwrap()).unwrap();
        assert_eq!(t.as_slice(), &[3.0, 3.0, 3.0]);
    }

    #[test]
    fn autoencoder_targets_copy_inputs() {
        let ds = toy();
        assert_eq!(&identity_targets(&ds), ds.x());
    }

    #[test]
    fn target_dimension_mismatch() {
        let ds = toy();
        let cs = CentroidSet {
            centroids: Matrix::zeros(2, 3),
            class_counts: vec![1, 1],
        };
        assert!(matches!(build_targets(&ds, &cs), Err(Error::Contract(_))));
    }

    #[test]
    fn empty_class_has_no_centroid() {
        let ds = toy().subset(&[0, 1]);
        assert!(matches!(compute_centroids(&ds), Err(Error::Data(_))));
    }

    #[test]
    fn iris_sized_split() {
        let ds = blobs(&[50, 50, 50]);
        let split = stratified_split(&ds, 0.3, &mut SeededRng::new(1)).unwrap();
        assert_eq!((split.train.len(), split.test.len()), (105, 45));
        for j in 0..3 {
            let t = split.test.iter().filter(|&&i| ds.labels()[i] == j).count();
            assert_eq!(t, 15);
        }
    }

    #[test]
    fn sonar_sized_split() {
        let ds = blobs(&[111, 97]);
        let split = stratified_split(&ds, 0.3, &mut SeededRng::new(1)).unwrap();
        assert_eq!((split.train.len(), split.test.len()), (146, 62));
    }

    #[test]
    fn every_class_gets_a_test_sample() {
        let ds = blobs(&[2, 3, 10]);
        let split = stratified_split(&ds, 0.05, &mut SeededRng::new(4)).unwrap();
        for j in 0..3 {
            assert!(split.test.iter().any(|&i| ds.labels()[i] == j));
            assert!(split.train.iter().any(|&i| ds.labels()[i] == j));
        }
    }

    #[test]
    fn split_is_reproducible() {
        let ds = blobs(&[20, 30]);
        let a = stratified_split(&ds, 0.3, &mut SeededRng::new(8)).unwrap();
        let b = stratified_split(&ds, 0.3, &mut SeededRng::new(8)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn tiny_class_cannot_split() {
        let ds = blobs(&[1, 5]);
        assert!(matches!(
            stratified_split(&ds, 0.3, &mut SeededRng::new(1)),
            Err(Error::Data(_))
        ));
        assert!(stratified_split(&blobs(&[3, 3]), 1.0, &mut SeededRng::new(1)).is_err());
    }

    #[test]
    fn constant_feature_standardizes_to_zero() {
        let x = Matrix::from_rows(&[[5.0, 1.0], [5.0, 2.0], [5.0, 4.0]]).unwrap();
        let ds = Dataset::new(x, vec![0, 1, 0]).unwrap();
        let (z, _) = standardize(&ds, &[0, 1, 2]).unwrap();
        assert_eq!(z.x().column(0), vec![0.0; 3]);
    }

    #[test]
    fn train_statistics_after_standardizing() {
        let mut rng = SeededRng::new(3);
        let x = Matrix::new(40, 3, rng.uniform(-5.0, 9.0, 120)).unwrap();
        let ds = Dataset::new(x, vec![0; 40]).unwrap();
        let train: Vec<usize> = (0..30).collect();
        let (z, _) = standardize(&ds, &train).unwrap();
        let zt = z.x().select_rows(&train);
        for m in zt.column_means() {
            assert!(m.abs() < 1e-12);
        }
        // idempotent on already z-scored rows
        let (zz, _) = standardize(&z.subset(&train), &train).unwrap();
        assert!(zz.x().max_abs_diff(&zt).unwrap() < 1e-12);
    }

    #[test]
    fn class_filter_relabels_in_given_order() {
        let ds = blobs(&[2, 3, 4]);
        let f = ds.filter_classes(&["2", "0"]).unwrap();
        assert_eq!(f.n_samples(), 6);
        assert_eq!(f.class_names(), &["2".to_string(), "0".to_string()]);
        assert_eq!(f.labels(), &[1, 1, 0, 0, 0, 0]);
        assert!(ds.filter_classes(&["7"]).is_err());
    }

    #[test]
    fn per_class_sampling() {
        let ds = blobs(&[10, 3]);
        let s = ds.sample_per_class(4, &mut SeededRng::new(2));
        assert_eq!(s.class_counts(), vec![4, 3]);
    }
}
