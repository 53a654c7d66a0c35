//! Trajectory-matrix construction.
//!
//! A scalar time series is lifted into an L×K Hankel matrix of lagged
//! windows (`entry(i, j) = samples[i + j]`, `K = N − L + 1`), with the
//! window length constrained to `2 ≤ L ≤ N/2`. A spatio-temporal field is
//! already two-dimensional and is used directly as a snapshot matrix, after
//! selecting a strided subset of its time rows.

use crate::matrix::Matrix;
use crate::systems::FieldSnapshotMatrix;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EmbedError {
    #[error("time series has {len} samples; at least 4 are required")]
    SeriesTooShort { len: usize },
    #[error("window length {window} outside 2 <= L <= N/2 for N = {len}")]
    WindowOutOfRange { window: usize, len: usize },
    #[error("cannot select {row_count} rows at stride {stride} from {available} snapshots")]
    InsufficientSnapshots {
        row_count: usize,
        stride: usize,
        available: usize,
    },
    #[error("time step must be positive and finite")]
    InvalidTimeStep,
}

/// Uniformly sampled scalar series with its sampling step.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    samples: Vec<f64>,
    dt: f64,
}

impl TimeSeries {
    /// At least 4 samples are required so a valid window `2 ≤ L ≤ N/2` exists.
    pub fn new(samples: Vec<f64>, dt: f64) -> Result<Self, EmbedError> {
        if samples.len() < 4 {
            return Err(EmbedError::SeriesTooShort { len: samples.len() });
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(EmbedError::InvalidTimeStep);
        }
        Ok(Self { samples, dt })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryKind {
    /// Lagged-window embedding of a scalar series; anti-diagonals constant.
    Hankel,
    /// Rows are time snapshots of a field, columns are grid points.
    Snapshot,
}

/// The embedded data matrix handed to PCA.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryMatrix {
    entries: Matrix,
    kind: TrajectoryKind,
}

impl TrajectoryMatrix {
    pub fn entries(&self) -> &Matrix {
        &self.entries
    }

    pub fn kind(&self) -> TrajectoryKind {
        self.kind
    }

    /// The matrix oriented with observations as rows, which is what the
    /// covariance step consumes. A Hankel matrix is stored window×lag
    /// (L rows, K columns), so its observations — the K lagged vectors —
    /// are its columns and the matrix is transposed here. A snapshot
    /// matrix already has observations (time rows) as rows.
    pub fn observations(&self) -> Matrix {
        match self.kind {
            TrajectoryKind::Hankel => self.entries.transpose(),
            TrajectoryKind::Snapshot => self.entries.clone(),
        }
    }
}

/// Hankel embedding: L×K matrix with `entry(i, j) = samples[i + j]`,
/// `K = N − L + 1`, valid for `2 ≤ L ≤ N/2`.
pub fn hankel_embed(series: &TimeSeries, window: usize) -> Result<TrajectoryMatrix, EmbedError> {
    let n = series.len();
    if window < 2 || 2 * window > n {
        return Err(EmbedError::WindowOutOfRange { window, len: n });
    }
    let k = n - window + 1;
    let samples = series.samples();
    let entries = Matrix::from_fn(window, k, |i, j| samples[i + j]);
    Ok(TrajectoryMatrix {
        entries,
        kind: TrajectoryKind::Hankel,
    })
}

/// Selects `row_count` snapshots at indices `0, stride, 2·stride, ...` from
/// a simulated field; rows are time, columns are grid points.
pub fn snapshot_embed(
    field: &FieldSnapshotMatrix,
    row_count: usize,
    stride: usize,
) -> Result<TrajectoryMatrix, EmbedError> {
    let available = field.values.rows();
    let reject = row_count < 2
        || stride == 0
        || (row_count - 1)
            .checked_mul(stride)
            .is_none_or(|last| last >= available);
    if reject {
        return Err(EmbedError::InsufficientSnapshots {
            row_count,
            stride,
            available,
        });
    }
    let entries = Matrix::from_fn(row_count, field.values.cols(), |i, j| {
        field.values[(i * stride, j)]
    });
    Ok(TrajectoryMatrix {
        entries,
        kind: TrajectoryKind::Snapshot,
    })
}

/// Largest stride spreading `row_count` selected snapshots evenly across
/// the whole run: `(total − 1) / (row_count − 1)`, at least 1.
pub fn even_stride(total_snapshots: usize, row_count: usize) -> usize {
    if row_count < 2 || total_snapshots < 2 {
        return 1;
    }
    ((total_snapshots - 1) / (row_count - 1)).max(1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{simulate_kdv, KdvParams};
    use proptest::prelude::*;

    fn series(samples: &[f64]) -> TimeSeries {
        TimeSeries::new(samples.to_vec(), 0.1).unwrap()
    }

    #[test]
    fn five_sample_window_two() {
        let traj = hankel_embed(&series(&[1.0, 2.0, 3.0, 4.0, 5.0]), 2).unwrap();
        let m = traj.entries();
        assert_eq!((m.rows(), m.cols()), (2, 4));
        assert_eq!(m.row(0), &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m.row(1), &[2.0, 3.0, 4.0, 5.0]);
        assert_eq!(traj.kind(), TrajectoryKind::Hankel);
    }

    #[test]
    fn constant_series_gives_constant_matrix() {
        let traj = hankel_embed(&series(&[7.0; 12]), 5).unwrap();
        assert!(traj.entries().data().iter().all(|&x| x == 7.0));
    }

    #[test]
    fn anti_diagonals_are_constant() {
        let traj = hankel_embed(&series(&[1.0, 2.0, 3.0, 4.0]), 2).unwrap();
        let m = traj.entries();
        assert_eq!(m.row(0), &[1.0, 2.0, 3.0]);
        assert_eq!(m.row(1), &[2.0, 3.0, 4.0]);
        for i in 0..m.rows() - 1 {
            for j in 1..m.cols() {
                assert_eq!(m[(i, j)], m[(i + 1, j - 1)]);
            }
        }
    }

    #[test]
    fn window_bounds_enforced() {
        let s = series(&[0.0; 10]);
        assert!(hankel_embed(&s, 2).is_ok());
        assert!(hankel_embed(&s, 5).is_ok());
        assert_eq!(
            hankel_embed(&s, 1),
            Err(EmbedError::WindowOutOfRange { window: 1, len: 10 })
        );
        assert_eq!(
            hankel_embed(&s, 6),
            Err(EmbedError::WindowOutOfRange { window: 6, len: 10 })
        );
        // Odd length: 2L <= N keeps L = N/2 rounded down valid.
        let odd = series(&[0.0; 11]);
        assert!(hankel_embed(&odd, 5).is_ok());
        assert!(hankel_embed(&odd, 6).is_err());
    }

    #[test]
    fn series_shorter_than_four_rejected() {
        assert_eq!(
            TimeSeries::new(vec![1.0, 2.0, 3.0], 0.1),
            Err(EmbedError::SeriesTooShort { len: 3 })
        );
        assert!(TimeSeries::new(vec![1.0; 4], 0.0).is_err());
    }

    #[test]
    fn embedding_is_lossless() {
        // First row plus last column recover the series.
        let data: Vec<f64> = (0..20).map(|i| (i as f64).sin()).collect();
        let traj = hankel_embed(&series(&data), 7).unwrap();
        let m = traj.entries();
        let mut recovered: Vec<f64> = m.row(0).to_vec();
        for i in 1..m.rows() {
            recovered.push(m[(i, m.cols() - 1)]);
        }
        assert_eq!(recovered, data);
    }

    #[test]
    fn observations_transposes_hankel_only() {
        let traj = hankel_embed(&series(&[1.0, 2.0, 3.0, 4.0, 5.0]), 2).unwrap();
        let obs = traj.observations();
        assert_eq!((obs.rows(), obs.cols()), (4, 2));
        assert_eq!(obs.row(0), &[1.0, 2.0]);
    }

    fn small_field() -> FieldSnapshotMatrix {
        let p = KdvParams::new(16, 9.0, 40).unwrap();
        simulate_kdv(&p).unwrap()
    }

    #[test]
    fn snapshot_full_selection_is_identity() {
        let field = small_field();
        let traj = snapshot_embed(&field, 41, 1).unwrap();
        assert_eq!(traj.entries(), &field.values);
        assert_eq!(traj.kind(), TrajectoryKind::Snapshot);
        // Snapshot observations are the rows themselves.
        assert_eq!(&traj.observations(), traj.entries());
    }

    #[test]
    fn snapshot_strided_selection() {
        let field = small_field();
        let traj = snapshot_embed(&field, 5, 10).unwrap();
        assert_eq!((traj.entries().rows(), traj.entries().cols()), (5, 16));
        assert_eq!(traj.entries().row(0), field.values.row(0));
        assert_eq!(traj.entries().row(4), field.values.row(40));
    }

    #[test]
    fn snapshot_first_and_last() {
        let field = small_field();
        let traj = snapshot_embed(&field, 2, 40).unwrap();
        assert_eq!(traj.entries().row(0), field.values.row(0));
        assert_eq!(traj.entries().row(1), field.values.row(40));
    }

    #[test]
    fn snapshot_rejects_overrun() {
        let field = small_field();
        assert!(snapshot_embed(&field, 2, 41).is_err());
        assert!(snapshot_embed(&field, 42, 1).is_err());
        assert!(snapshot_embed(&field, 1, 1).is_err());
        assert!(snapshot_embed(&field, 2, 0).is_err());
    }

    #[test]
    fn even_stride_spans_run() {
        assert_eq!(even_stride(1001, 26), 40);
        assert_eq!(even_stride(257, 26), 10);
        assert_eq!(even_stride(26, 26), 1);
        assert_eq!(even_stride(10, 26), 1);
    }

    proptest! {
        #[test]
        fn hankel_shape_and_structure(
            len in 4_usize..200,
            window_seed in 0_usize..100,
            scale in -5.0_f64..5.0,
        ) {
            let window = 2 + window_seed % (len / 2 - 1).max(1);
            let data: Vec<f64> = (0..len).map(|i| scale * ((i * i) as f64).sin()).collect();
            let result = hankel_embed(&series(&data), window);
            if window < 2 || 2 * window > len {
                prop_assert!(result.is_err());
            } else {
                let traj = result.unwrap();
                let m = traj.entries();
                // Shape law L + K = N + 1.
                prop_assert_eq!(m.rows() + m.cols(), len + 1);
                for i in 0..m.rows() - 1 {
                    for j in 1..m.cols() {
                        prop_assert_eq!(m[(i, j)], m[(i + 1, j - 1)]);
                    }
                }
            }
        }
    }
}
