use serde::Serialize;

/// Float eigenvalues grouped into numerically distinct values with multiplicities.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EigenClustering {
    /// Distinct values, ascending; each is the mean of its members.
    pub lambdas: Vec<f64>,
    pub mults: Vec<usize>,
    /// The sorted input.
    pub raw: Vec<f64>,
    pub tol: f64,
    /// Cluster index of every raw value.
    pub assignment: Vec<usize>,
}

impl EigenClustering {
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    /// Index of the cluster whose lambda is within `tol` of `x`.
    pub fn locate(&self, x: f64) -> Option<usize> {
        self.lambdas
            .iter()
            .enumerate()
            .filter(|(_, l)| (x - **l).abs() <= self.tol)
            .min_by(|a, b| (x - a.1).abs().total_cmp(&(x - b.1).abs()))
            .map(|(i, _)| i)
    }
}

/// `max(1e-8, 1e-8 · max|raw|)`.
pub fn default_cluster_tol(raw: &[f64]) -> f64 {
    let scale = raw.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    (1e-8 * scale).max(1e-8)
}

/// Single-linkage clustering of a sorted list: a new cluster opens whenever the gap to the
/// previous value exceeds `tol`.
pub fn cluster_eigenvalues(raw: &[f64], tol: f64) -> EigenClustering {
    debug_assert!(raw.windows(2).all(|w| w[0] <= w[1]), "input must be sorted");
    let mut lambdas = Vec::new();
    let mut mults = Vec::new();
    let mut assignment = Vec::with_capacity(raw.len());
    let mut sum = 0.0;
    for (i, &x) in raw.iter().enumerate() {
        if i == 0 || x - raw[i - 1] > tol {
            if i > 0 {
                lambdas.push(sum / *mults.last().unwrap() as f64);
            }
            mults.push(0);
            sum = 0.0;
        }
        sum += x;
        *mults.last_mut().unwrap() += 1;
        assignment.push(mults.len() - 1);
    }
    if let Some(&last) = mults.last() {
        lambdas.push(sum / last as f64);
    }
    EigenClustering {
        lambdas,
        mults,
        raw: raw.to_vec(),
        tol,
        assignment,
    }
}
