//! Dataset ingestion, fold splitting, balanced sampling, and synthetic
//! population generation.
//!
//! On-disk formats:
//! - manifest: one `relative/path/to/matrix.txt,<integer label>` record per
//!   line, `#`-prefixed comment lines ignored, paths resolved relative to the
//!   manifest's directory;
//! - matrix file: `N` lines of `N` numbers separated by commas or whitespace,
//!   scientific notation accepted, blank lines ignored.

use crate::error::{Error, Result};
use crate::graph::AdjacencyMatrix;
use crate::matrix::DenseMatrix;
use crate::rng::RngStreams;
use crate::scalar::{cst, Scalar};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

/// Raw asymmetry up to this fraction of the largest entry is silently
/// symmetrized; anything larger is an ingestion error.
pub const ASYMMETRY_TOLERANCE: f64 = 1e-6;

/// Raw entries below this are rejected as negative; entries in
/// `[-NEGATIVE_TOLERANCE, 0)` are treated as roundoff and clamped to zero.
pub const NEGATIVE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct GraphSample<F> {
    pub id: String,
    pub adjacency: AdjacencyMatrix<F>,
    pub label: usize,
}

/// A labeled population of graphs sharing one node count.
#[derive(Debug, Clone)]
pub struct Dataset<F> {
    samples: Vec<GraphSample<F>>,
    n_classes: usize,
    class_counts: Vec<usize>,
    n_nodes: usize,
}

impl<F: Scalar> Dataset<F> {
    pub fn new(samples: Vec<GraphSample<F>>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("dataset must contain at least one sample"));
        }
        let n_nodes = samples[0].adjacency.n();
        for s in &samples {
            if s.adjacency.n() != n_nodes {
                return Err(Error::invalid(format!(
                    "sample '{}' has {} nodes but the dataset uses {}",
                    s.id,
                    s.adjacency.n(),
                    n_nodes
                )));
            }
        }
        let n_classes = samples.iter().map(|s| s.label).max().unwrap() + 1;
        if samples.len() < n_classes {
            return Err(Error::invalid(
                "dataset must contain at least one sample per class",
            ));
        }
        let mut class_counts = vec![0usize; n_classes];
        for s in &samples {
            class_counts[s.label] += 1;
        }
        Ok(Dataset {
            samples,
            n_classes,
            class_counts,
            n_nodes,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn class_counts(&self) -> &[usize] {
        &self.class_counts
    }

    pub fn sample(&self, i: usize) -> &GraphSample<F> {
        &self.samples[i]
    }

    pub fn samples(&self) -> &[GraphSample<F>] {
        &self.samples
    }

    pub fn labels(&self) -> Vec<usize> {
        self.samples.iter().map(|s| s.label).collect()
    }

    /// Share of the most frequent class; the accuracy of always predicting it.
    pub fn majority_baseline(&self) -> f64 {
        let max = self.class_counts.iter().max().copied().unwrap_or(0);
        max as f64 / self.samples.len() as f64
    }
}

#[derive(Debug, Clone)]
pub struct LoadedDataset<F> {
    pub dataset: Dataset<F>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    /// Replace every entry by its absolute value before validation, for
    /// connectivity measures that may be negative (e.g. correlations).
    pub absolute_value: bool,
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses a matrix file: rows of numbers split on commas and/or whitespace.
pub fn parse_matrix_file<F: Scalar>(path: &Path) -> Result<DenseMatrix<F>> {
    let text = read_to_string(path)?;
    let mut rows: Vec<Vec<F>> = Vec::new();
    let mut width: Option<usize> = None;
    for (idx, line) in text.lines().enumerate() {
        let cleaned = line.replace(',', " ");
        let trimmed = cleaned.trim();
        if trimmed.is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for token in trimmed.split_whitespace() {
            let value: f64 = token.parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: idx + 1,
                message: format!("'{token}' is not a number"),
            })?;
            row.push(cst::<F>(value));
        }
        if let Some(w) = width {
            if row.len() != w {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: idx + 1,
                    message: format!("expected {w} entries, found {}", row.len()),
                });
            }
        } else {
            width = Some(row.len());
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: "matrix file is empty".to_string(),
        });
    }
    DenseMatrix::from_rows(&rows)
}

/// Canonicalizes a raw matrix into a valid adjacency matrix: validates
/// squareness and negativity, checks asymmetry against the tolerance,
/// symmetrizes, zeroes the diagonal, and clamps roundoff negatives.
pub fn canonicalize_adjacency<F: Scalar>(
    raw: DenseMatrix<F>,
    origin: &str,
    opts: LoadOptions,
    warnings: &mut Vec<String>,
) -> Result<AdjacencyMatrix<F>> {
    if !raw.is_square() {
        return Err(Error::invalid(format!(
            "{origin}: matrix is {}x{}, not square",
            raw.rows(),
            raw.cols()
        )));
    }
    let mut m = raw;
    if opts.absolute_value {
        for v in m.data_mut() {
            *v = v.abs();
        }
    }
    let neg_tol = cst::<F>(NEGATIVE_TOLERANCE);
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let v = m[(i, j)];
            if !v.is_finite() {
                return Err(Error::invalid(format!(
                    "{origin}: entry ({i},{j}) is not finite"
                )));
            }
            if v < -neg_tol {
                return Err(Error::invalid(format!(
                    "{origin}: negative entry {v} at ({i},{j})"
                )));
            }
        }
    }
    let asym = m.max_asymmetry();
    let scale = m.max_abs();
    if asym > cst::<F>(ASYMMETRY_TOLERANCE) * scale {
        return Err(Error::invalid(format!(
            "{origin}: asymmetry {asym} exceeds tolerance"
        )));
    }
    let mut m = m.symmetrized();
    let mut zeroed_diagonal = false;
    for i in 0..m.rows() {
        if m[(i, i)] != F::zero() {
            zeroed_diagonal = true;
            m[(i, i)] = F::zero();
        }
    }
    if zeroed_diagonal {
        warnings.push(format!("{origin}: nonzero diagonal (self-loops) zeroed"));
    }
    for v in m.data_mut() {
        if *v < F::zero() {
            *v = F::zero();
        }
    }
    AdjacencyMatrix::try_new(m)
}

/// Loads one graph file through the standard canonicalization.
pub fn load_single_graph<F: Scalar>(
    path: &Path,
    opts: LoadOptions,
) -> Result<(AdjacencyMatrix<F>, Vec<String>)> {
    let raw = parse_matrix_file(path)?;
    let mut warnings = Vec::new();
    let adjacency = canonicalize_adjacency(raw, &path.display().to_string(), opts, &mut warnings)?;
    Ok((adjacency, warnings))
}

/// Loads a manifest and every matrix it references.
pub fn load_dataset<F: Scalar>(manifest: &Path, opts: LoadOptions) -> Result<LoadedDataset<F>> {
    let text = read_to_string(manifest)?;
    let base = manifest.parent().unwrap_or_else(|| Path::new("."));
    let mut samples = Vec::new();
    let mut warnings = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (rel_path, label_text) = trimmed.rsplit_once(',').ok_or_else(|| Error::Parse {
            path: manifest.to_path_buf(),
            line: idx + 1,
            message: "expected 'path,label'".to_string(),
        })?;
        let label: usize = label_text.trim().parse().map_err(|_| Error::Parse {
            path: manifest.to_path_buf(),
            line: idx + 1,
            message: format!("unknown label '{}'", label_text.trim()),
        })?;
        let path = base.join(rel_path.trim());
        let raw = parse_matrix_file::<F>(&path)?;
        let adjacency =
            canonicalize_adjacency(raw, &path.display().to_string(), opts, &mut warnings)?;
        samples.push(GraphSample {
            id: rel_path.trim().to_string(),
            adjacency,
            label,
        });
    }
    let dataset = Dataset::new(samples)?;
    Ok(LoadedDataset { dataset, warnings })
}

/// Writes a matrix in the format [`parse_matrix_file`] reads; floats use the
/// shortest round-trip representation, so a write/reload cycle is exact.
pub fn write_matrix<F: Scalar>(path: &Path, m: &DenseMatrix<F>) -> Result<()> {
    let mut text = String::new();
    for i in 0..m.rows() {
        let row = m.row(i);
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                text.push(',');
            }
            write!(text, "{v}").expect("string write");
        }
        text.push('\n');
    }
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes every sample plus a manifest into `dir`; returns the manifest path.
pub fn write_dataset<F: Scalar>(dir: &Path, dataset: &Dataset<F>) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut manifest_text = String::new();
    for (idx, sample) in dataset.samples().iter().enumerate() {
        let file_name = format!("g{idx:04}_c{}.txt", sample.label);
        write_matrix(&dir.join(&file_name), sample.adjacency.weights())?;
        writeln!(manifest_text, "{file_name},{}", sample.label).expect("string write");
    }
    let manifest_path = dir.join("manifest.txt");
    fs::write(&manifest_path, manifest_text).map_err(|source| Error::Io {
        path: manifest_path.clone(),
        source,
    })?;
    Ok(manifest_path)
}

/// Stratified fold assignment: class proportions per fold stay within one
/// sample of the global proportions, and folds partition the dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    pub k: usize,
    pub assignments: Vec<usize>,
    pub seed: u64,
}

impl FoldPlan {
    /// `(train, eval)` sample indices for one fold.
    pub fn split(&self, fold: usize) -> (Vec<usize>, Vec<usize>) {
        let mut train = Vec::new();
        let mut eval = Vec::new();
        for (i, f) in self.assignments.iter().enumerate() {
            if *f == fold {
                eval.push(i);
            } else {
                train.push(i);
            }
        }
        (train, eval)
    }
}

pub fn stratified_kfold<F: Scalar>(
    dataset: &Dataset<F>,
    k: usize,
    seed: u64,
) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::invalid("fold count must be at least 2"));
    }
    for (c, count) in dataset.class_counts().iter().enumerate() {
        if *count < k {
            return Err(Error::invalid(format!(
                "class {c} has {count} samples, fewer than {k} folds"
            )));
        }
    }
    let mut rng = RngStreams::new(seed).stream("folds");
    let mut assignments = vec![0usize; dataset.len()];
    for class in 0..dataset.n_classes() {
        let mut indices: Vec<usize> = (0..dataset.len())
            .filter(|i| dataset.sample(*i).label == class)
            .collect();
        indices.shuffle(&mut rng);
        for (pos, idx) in indices.into_iter().enumerate() {
            assignments[idx] = pos % k;
        }
    }
    Ok(FoldPlan {
        k,
        assignments,
        seed,
    })
}

/// Class-balanced batch stream, sampling uniformly with replacement within
/// each class. Every batch holds `floor(batch_size / L)` samples per class;
/// the remainder cells rotate round-robin across classes from batch to batch,
/// so per-class counts never differ from even by more than one.
#[derive(Debug, Clone)]
pub struct BalancedSampler {
    pools: Vec<Vec<usize>>,
    batch_size: usize,
    batch_index: usize,
}

impl BalancedSampler {
    pub fn new(labels: &[usize], subset: &[usize], batch_size: usize) -> Result<Self> {
        let n_classes = labels.iter().max().map_or(0, |m| m + 1);
        if batch_size < n_classes {
            return Err(Error::invalid(format!(
                "batch size {batch_size} is smaller than the class count {n_classes}"
            )));
        }
        let mut pools = vec![Vec::new(); n_classes];
        for idx in subset {
            pools[labels[*idx]].push(*idx);
        }
        for (c, pool) in pools.iter().enumerate() {
            if pool.is_empty() {
                return Err(Error::invalid(format!(
                    "class {c} has no samples in the training subset"
                )));
            }
        }
        Ok(BalancedSampler {
            pools,
            batch_size,
            batch_index: 0,
        })
    }

    pub fn next_batch(&mut self, rng: &mut ChaCha20Rng) -> Vec<usize> {
        let classes = self.pools.len();
        let base = self.batch_size / classes;
        let remainder = self.batch_size % classes;
        let mut batch = Vec::with_capacity(self.batch_size);
        for (c, pool) in self.pools.iter().enumerate() {
            let extra = (0..remainder)
                .any(|j| (self.batch_index * remainder + j) % classes == c)
                as usize;
            for _ in 0..base + extra {
                batch.push(pool[rng.gen_range(0..pool.len())]);
            }
        }
        self.batch_index += 1;
        batch
    }
}

/// Recipe for a synthetic graph population: one template adjacency per class
/// perturbed by symmetric Gaussian edge noise, clamped to stay nonnegative.
#[derive(Debug, Clone)]
pub struct SyntheticSpec<F> {
    pub n: usize,
    pub templates: Vec<DenseMatrix<F>>,
    pub sigma: F,
    pub counts: Vec<usize>,
    pub seed: u64,
}

impl<F: Scalar> SyntheticSpec<F> {
    pub fn validate(&self) -> Result<()> {
        if self.templates.is_empty() || self.templates.len() != self.counts.len() {
            return Err(Error::invalid(
                "one template and one count per class are required",
            ));
        }
        if !(self.sigma >= F::zero()) {
            return Err(Error::invalid("noise sigma must be nonnegative"));
        }
        for (c, t) in self.templates.iter().enumerate() {
            if t.rows() != self.n || t.cols() != self.n {
                return Err(Error::invalid(format!(
                    "template {c} is {}x{}, expected {}x{}",
                    t.rows(),
                    t.cols(),
                    self.n,
                    self.n
                )));
            }
            if !t.is_symmetric() {
                return Err(Error::invalid(format!("template {c} is not symmetric")));
            }
            for i in 0..self.n {
                if t[(i, i)] != F::zero() {
                    return Err(Error::invalid(format!(
                        "template {c} has a nonzero diagonal"
                    )));
                }
                for j in 0..self.n {
                    if t[(i, j)] < F::zero() {
                        return Err(Error::invalid(format!("template {c} has negative entries")));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Generates `counts[c]` samples per class: `clamp(template_c + E, 0, inf)`
/// with `E` symmetric Gaussian noise and a forced-zero diagonal.
pub fn generate_synthetic<F: Scalar>(spec: &SyntheticSpec<F>) -> Result<Dataset<F>> {
    spec.validate()?;
    let mut rng = RngStreams::new(spec.seed).stream("synth");
    let normal = Normal::new(0.0f64, 1.0).expect("unit normal");
    let sigma = spec.sigma;
    let mut samples = Vec::new();
    for (class, template) in spec.templates.iter().enumerate() {
        for idx in 0..spec.counts[class] {
            let mut m = DenseMatrix::zeros(spec.n, spec.n);
            for i in 0..spec.n {
                for j in (i + 1)..spec.n {
                    let noise = if sigma > F::zero() {
                        sigma * cst::<F>(normal.sample(&mut rng))
                    } else {
                        F::zero()
                    };
                    let v = (template[(i, j)] + noise).max(F::zero());
                    m[(i, j)] = v;
                    m[(j, i)] = v;
                }
            }
            samples.push(GraphSample {
                id: format!("synth-{class}-{idx}"),
                adjacency: AdjacencyMatrix::try_new(m)?,
                label: class,
            });
        }
    }
    Dataset::new(samples)
}

/// Two templates a fixed Frobenius distance apart: a weighted ring, and the
/// same ring with eight chord edges raised so that the difference has exactly
/// the requested norm. Used by the synthetic-classification tests.
pub fn separable_pair_templates<F: Scalar>(
    n: usize,
    fro_distance: F,
) -> Result<(DenseMatrix<F>, DenseMatrix<F>)> {
    if n < 18 {
        return Err(Error::invalid("separable templates require n >= 18"));
    }
    let half = cst::<F>(0.5);
    let mut base = DenseMatrix::zeros(n, n);
    for i in 0..n {
        let j = (i + 1) % n;
        base[(i, j)] = half;
        base[(j, i)] = half;
    }
    let mut shifted = base.clone();
    // Eight disjoint chords: the difference has 16 entries of size d, so its
    // Frobenius norm is 4d.
    let d = fro_distance / cst::<F>(4.0);
    for i in (0..16).step_by(2) {
        let j = i + 2;
        shifted[(i, j)] = shifted[(i, j)] + d;
        shifted[(j, i)] = shifted[(j, i)] + d;
    }
    Ok((base, shifted))
}

#[cfg(test)]
mod tests {
    use super::*;
    use self::tempdir::tempdir;
    use std::collections::HashMap;

    mod tempdir {
        use std::path::PathBuf;

        /// Minimal scoped temp directory for tests.
        pub struct TempDir(PathBuf);

        impl TempDir {
            pub fn path(&self) -> &std::path::Path {
                &self.0
            }
        }

        impl Drop for TempDir {
            fn drop(&mut self) {
                let _ = std::fs::remove_dir_all(&self.0);
            }
        }

        pub fn tempdir(tag: &str) -> TempDir {
            let dir = std::env::temp_dir().join(format!(
                "lapwave-data-test-{tag}-{}",
                std::process::id()
            ));
            std::fs::create_dir_all(&dir).unwrap();
            TempDir(dir)
        }
    }

    fn write(dir: &Path, name: &str, content: &str) -> PathBuf {
        let p = dir.join(name);
        fs::write(&p, content).unwrap();
        p
    }

    #[test]
    fn manifest_load_counts_classes() {
        let tmp = tempdir("manifest");
        let dir = tmp.path();
        write(dir, "a.txt", "0,1\n1,0\n");
        write(dir, "b.txt", "0,2\n2,0\n");
        write(dir, "c.txt", "0 0.5\n0.5 0\n");
        let manifest = write(dir, "manifest.txt", "# comment\na.txt,0\nb.txt,0\nc.txt,1\n");
        let loaded = load_dataset::<f64>(&manifest, LoadOptions::default()).unwrap();
        assert_eq!(loaded.dataset.len(), 3);
        assert_eq!(loaded.dataset.class_counts(), &[2, 1]);
        assert!(loaded.warnings.is_empty());
    }

    #[test]
    fn small_asymmetry_is_symmetrized() {
        let tmp = tempdir("asym");
        let dir = tmp.path();
        write(dir, "a.txt", "0,1\n0.999999998,0\n");
        write(dir, "b.txt", "0,1\n1,0\n");
        let manifest = write(dir, "m.txt", "a.txt,0\nb.txt,1\n");
        let loaded = load_dataset::<f64>(&manifest, LoadOptions::default()).unwrap();
        let w = loaded.dataset.sample(0).adjacency.weights();
        assert_eq!(w[(0, 1)], w[(1, 0)]);
    }

    #[test]
    fn large_asymmetry_rejected() {
        let tmp = tempdir("asym2");
        let dir = tmp.path();
        write(dir, "a.txt", "0,1\n0.9,0\n");
        write(dir, "b.txt", "0,1\n1,0\n");
        let manifest = write(dir, "m.txt", "a.txt,0\nb.txt,1\n");
        assert!(load_dataset::<f64>(&manifest, LoadOptions::default()).is_err());
    }

    #[test]
    fn negative_entry_rejected_unless_absolute_value() {
        let tmp = tempdir("neg");
        let dir = tmp.path();
        write(dir, "a.txt", "0,-0.5\n-0.5,0\n");
        write(dir, "b.txt", "0,1\n1,0\n");
        let manifest = write(dir, "m.txt", "a.txt,0\nb.txt,1\n");
        assert!(load_dataset::<f64>(&manifest, LoadOptions::default()).is_err());
        let loaded = load_dataset::<f64>(
            &manifest,
            LoadOptions {
                absolute_value: true,
            },
        )
        .unwrap();
        assert_eq!(loaded.dataset.sample(0).adjacency.weights()[(0, 1)], 0.5);
    }

    #[test]
    fn self_loops_zeroed_with_warning() {
        let tmp = tempdir("loops");
        let dir = tmp.path();
        write(dir, "a.txt", "0.7,1\n1,0\n");
        write(dir, "b.txt", "0,1\n1,0\n");
        let manifest = write(dir, "m.txt", "a.txt,0\nb.txt,1\n");
        let loaded = load_dataset::<f64>(&manifest, LoadOptions::default()).unwrap();
        assert_eq!(loaded.warnings.len(), 1);
        assert_eq!(loaded.dataset.sample(0).adjacency.weights()[(0, 0)], 0.0);
    }

    #[test]
    fn missing_file_and_bad_label_and_shape_errors() {
        let tmp = tempdir("errors");
        let dir = tmp.path();
        write(dir, "ok.txt", "0,1\n1,0\n");
        write(dir, "rect.txt", "0,1,2\n1,0,2\n");
        write(dir, "big.txt", "0,1,0\n1,0,0\n0,0,0\n");

        let m1 = write(dir, "m1.txt", "gone.txt,0\n");
        assert!(matches!(
            load_dataset::<f64>(&m1, LoadOptions::default()),
            Err(Error::Io { .. })
        ));

        let m2 = write(dir, "m2.txt", "ok.txt,zero\n");
        assert!(matches!(
            load_dataset::<f64>(&m2, LoadOptions::default()),
            Err(Error::Parse { .. })
        ));

        let m3 = write(dir, "m3.txt", "rect.txt,0\n");
        assert!(load_dataset::<f64>(&m3, LoadOptions::default()).is_err());

        let m4 = write(dir, "m4.txt", "ok.txt,0\nbig.txt,1\n");
        assert!(load_dataset::<f64>(&m4, LoadOptions::default()).is_err());
    }

    #[test]
    fn ingestion_is_idempotent() {
        let spec = SyntheticSpec {
            n: 20,
            templates: {
                let (a, b) = separable_pair_templates::<f64>(20, 5.0).unwrap();
                vec![a, b]
            },
            sigma: 0.05,
            counts: vec![4, 4],
            seed: 3,
        };
        let dataset = generate_synthetic(&spec).unwrap();
        let tmp = tempdir("idem");
        let manifest = write_dataset(tmp.path(), &dataset).unwrap();
        let reloaded = load_dataset::<f64>(&manifest, LoadOptions::default()).unwrap();
        assert!(reloaded.warnings.is_empty());
        let tmp2 = tempdir("idem2");
        let manifest2 = write_dataset(tmp2.path(), &reloaded.dataset).unwrap();
        let again = load_dataset::<f64>(&manifest2, LoadOptions::default()).unwrap();
        for (a, b) in dataset.samples().iter().zip(again.dataset.samples()) {
            assert_eq!(a.adjacency.weights(), b.adjacency.weights());
        }
    }

    #[test]
    fn kfold_exact_divisibility() {
        let (t0, t1) = separable_pair_templates::<f64>(20, 5.0).unwrap();
        let spec = SyntheticSpec {
            n: 20,
            templates: vec![t0, t1],
            sigma: 0.0,
            counts: vec![3, 3],
            seed: 0,
        };
        let dataset = generate_synthetic(&spec).unwrap();
        let plan = stratified_kfold(&dataset, 3, 9).unwrap();
        for fold in 0..3 {
            let (_, eval) = plan.split(fold);
            assert_eq!(eval.len(), 2);
            let labels: Vec<usize> = eval.iter().map(|i| dataset.sample(*i).label).collect();
            assert!(labels.contains(&0) && labels.contains(&1));
        }
    }

    #[test]
    fn kfold_is_deterministic_and_partitions() {
        let (t0, t1) = separable_pair_templates::<f64>(20, 5.0).unwrap();
        let spec = SyntheticSpec {
            n: 20,
            templates: vec![t0, t1],
            sigma: 0.01,
            counts: vec![10, 7],
            seed: 1,
        };
        let dataset = generate_synthetic(&spec).unwrap();
        let a = stratified_kfold(&dataset, 3, 5).unwrap();
        let b = stratified_kfold(&dataset, 3, 5).unwrap();
        assert_eq!(a, b);
        let mut seen = vec![false; dataset.len()];
        for fold in 0..3 {
            let (train, eval) = a.split(fold);
            assert_eq!(train.len() + eval.len(), dataset.len());
            for i in eval {
                assert!(!seen[i], "sample {i} evaluated twice");
                seen[i] = true;
            }
        }
        assert!(seen.iter().all(|s| *s));
    }

    #[test]
    fn kfold_stratification_on_skewed_counts() {
        // Class counts mirroring a real cohort: (487, 159, 110) over 3 folds.
        let n = 18;
        let (t0, t1) = separable_pair_templates::<f64>(n, 2.0).unwrap();
        let t2 = t0.clone();
        let spec = SyntheticSpec {
            n,
            templates: vec![t0, t1, t2],
            sigma: 0.01,
            counts: vec![487, 159, 110],
            seed: 2,
        };
        let dataset = generate_synthetic(&spec).unwrap();
        let plan = stratified_kfold(&dataset, 3, 11).unwrap();
        let expected = [487.0 / 3.0, 159.0 / 3.0, 110.0 / 3.0];
        for fold in 0..3 {
            let (_, eval) = plan.split(fold);
            let mut counts = [0usize; 3];
            for i in eval {
                counts[dataset.sample(i).label] += 1;
            }
            for c in 0..3 {
                assert!(
                    (counts[c] as f64 - expected[c]).abs() <= 1.0,
                    "fold {fold} class {c}: {} vs {}",
                    counts[c],
                    expected[c]
                );
            }
        }
    }

    #[test]
    fn kfold_rejects_small_classes() {
        let (t0, t1) = separable_pair_templates::<f64>(20, 5.0).unwrap();
        let spec = SyntheticSpec {
            n: 20,
            templates: vec![t0, t1],
            sigma: 0.0,
            counts: vec![5, 2],
            seed: 0,
        };
        let dataset = generate_synthetic(&spec).unwrap();
        assert!(stratified_kfold(&dataset, 3, 0).is_err());
        assert!(stratified_kfold(&dataset, 1, 0).is_err());
    }

    #[test]
    fn balanced_batches_exact_and_remainder() {
        let labels = vec![0, 0, 0, 1, 1, 1, 2, 2, 2];
        let subset: Vec<usize> = (0..9).collect();
        let mut rng = RngStreams::new(4).stream("sampling");

        let mut sampler = BalancedSampler::new(&labels, &subset, 9).unwrap();
        for _ in 0..5 {
            let batch = sampler.next_batch(&mut rng);
            let mut counts = [0usize; 3];
            for i in batch {
                counts[labels[i]] += 1;
            }
            assert_eq!(counts, [3, 3, 3]);
        }

        let mut sampler = BalancedSampler::new(&labels, &subset, 10).unwrap();
        for _ in 0..6 {
            let batch = sampler.next_batch(&mut rng);
            let mut counts = [0usize; 3];
            for i in batch {
                counts[labels[i]] += 1;
            }
            let mut sorted = counts;
            sorted.sort_unstable();
            assert_eq!(sorted, [3, 3, 4]);
        }
    }

    #[test]
    fn balanced_batches_uniform_within_class() {
        // Over many draws, each member of a class appears with frequency
        // within 3 sigma of uniform multinomial sampling.
        let labels = vec![0, 0, 0, 0, 1, 1, 1, 1];
        let subset: Vec<usize> = (0..8).collect();
        let mut rng = RngStreams::new(5).stream("sampling");
        let mut sampler = BalancedSampler::new(&labels, &subset, 8).unwrap();
        let mut counts: HashMap<usize, usize> = HashMap::new();
        let batches = 10_000;
        for _ in 0..batches {
            for i in sampler.next_batch(&mut rng) {
                *counts.entry(i).or_default() += 1;
            }
        }
        let draws_per_class = (batches * 4) as f64;
        let p: f64 = 1.0 / 4.0;
        let sigma = (draws_per_class * p * (1.0 - p)).sqrt();
        for idx in 0..8 {
            let got = *counts.get(&idx).unwrap_or(&0) as f64;
            assert!(
                (got - draws_per_class * p).abs() <= 3.0 * sigma,
                "sample {idx} drawn {got} times, expected {}",
                draws_per_class * p
            );
        }
    }

    #[test]
    fn balanced_batches_validation() {
        let labels = vec![0, 0, 1];
        assert!(BalancedSampler::new(&labels, &[0, 1, 2], 1).is_err());
        assert!(BalancedSampler::new(&labels, &[0, 1], 4).is_err());
    }

    #[test]
    fn synthetic_zero_noise_reproduces_templates() {
        let (t0, t1) = separable_pair_templates::<f64>(20, 5.0).unwrap();
        let spec = SyntheticSpec {
            n: 20,
            templates: vec![t0.clone(), t1.clone()],
            sigma: 0.0,
            counts: vec![2, 2],
            seed: 7,
        };
        let dataset = generate_synthetic(&spec).unwrap();
        assert_eq!(*dataset.sample(0).adjacency.weights(), t0);
        assert_eq!(*dataset.sample(2).adjacency.weights(), t1);
    }

    #[test]
    fn synthetic_is_reproducible_and_nonnegative() {
        let (t0, t1) = separable_pair_templates::<f64>(20, 5.0).unwrap();
        let spec = SyntheticSpec {
            n: 20,
            templates: vec![t0, t1],
            sigma: 0.3,
            counts: vec![5, 5],
            seed: 8,
        };
        let a = generate_synthetic(&spec).unwrap();
        let b = generate_synthetic(&spec).unwrap();
        for (x, y) in a.samples().iter().zip(b.samples()) {
            assert_eq!(x.adjacency.weights(), y.adjacency.weights());
            assert!(x.adjacency.weights().iter().all(|v| *v >= 0.0));
        }
    }

    #[test]
    fn nearest_template_classifies_noisy_population_perfectly() {
        let (t0, t1) = separable_pair_templates::<f64>(20, 5.0).unwrap();
        assert!((t0.frobenius_distance(&t1) - 5.0).abs() <= 1e-12);
        let spec = SyntheticSpec {
            n: 20,
            templates: vec![t0.clone(), t1.clone()],
            sigma: 0.05,
            counts: vec![60, 60],
            seed: 9,
        };
        let dataset = generate_synthetic(&spec).unwrap();
        for sample in dataset.samples() {
            let d0 = sample.adjacency.weights().frobenius_distance(&t0);
            let d1 = sample.adjacency.weights().frobenius_distance(&t1);
            let predicted = if d0 <= d1 { 0 } else { 1 };
            assert_eq!(predicted, sample.label);
        }
    }

    #[test]
    fn template_shape_mismatch_rejected() {
        let (t0, _) = separable_pair_templates::<f64>(20, 5.0).unwrap();
        let spec = SyntheticSpec {
            n: 19,
            templates: vec![t0],
            sigma: 0.0,
            counts: vec![2],
            seed: 0,
        };
        assert!(generate_synthetic(&spec).is_err());
    }
}
