use serde::Serialize;

use crate::error::{Error, Result};
use crate::qmat::{sigma_x, sigma_y, sigma_z, DensityMatrix};

/// Revival sum of a trace-distance series and where the revivals happen.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessReport {
    pub blp_value: f64,
    pub revival_intervals: Vec<(f64, f64)>,
}

/// Sums the positive increments of `distances` sampled at `times`.
/// Each maximal run of consecutive increases becomes one interval.
pub fn blp_witness(times: &[f64], distances: &[f64]) -> Result<WitnessReport> {
    if distances.len() < 2 || times.len() != distances.len() {
        return Err(Error::param(
            "d_series",
            "need at least two samples and one time per sample",
        ));
    }
    let mut blp_value = 0.0;
    let mut revival_intervals = Vec::new();
    let mut run_start: Option<usize> = None;
    for k in 0..distances.len() - 1 {
        let inc = distances[k + 1] - distances[k];
        if inc > 0.0 {
            blp_value += inc;
            run_start.get_or_insert(k);
        } else if let Some(s) = run_start.take() {
            revival_intervals.push((times[s], times[k]));
        }
    }
    if let Some(s) = run_start {
        revival_intervals.push((times[s], times[distances.len() - 1]));
    }
    Ok(WitnessReport {
        blp_value,
        revival_intervals,
    })
}

/// `(Tr ρσx, Tr ρσy, Tr ρσz)` for a qubit.
pub fn bloch_vector(rho: &DensityMatrix) -> Result<(f64, f64, f64)> {
    if rho.dim() != 2 {
        return Err(Error::Dimension(format!(
            "Bloch vector needs a qubit, got dimension {}",
            rho.dim()
        )));
    }
    Ok((
        rho.expect(&sigma_x()).re,
        rho.expect(&sigma_y()).re,
        rho.expect(&sigma_z()).re,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::c;

    fn grid(n: usize) -> Vec<f64> {
        (0..n).map(|k| k as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn monotone_series_has_no_revivals() {
        let d = [1.0, 0.8, 0.5, 0.5, 0.1];
        let w = blp_witness(&grid(5), &d).unwrap();
        assert_eq!(w.blp_value, 0.0);
        assert!(w.revival_intervals.is_empty());
    }

    #[test]
    fn single_revival() {
        let w = blp_witness(&[0.0, 1.0, 2.0], &[1.0, 0.0, 1.0]).unwrap();
        assert_eq!(w.blp_value, 1.0);
        assert_eq!(w.revival_intervals, vec![(1.0, 2.0)]);
    }

    #[test]
    fn piecewise_linear_revival() {
        // oracle: increments only on t > 0.5 and they telescope to D(1) - D(0.5)
        let t = grid(101);
        let d: Vec<f64> = t.iter().map(|x| (1.0 - 2.0 * x).abs()).collect();
        let w = blp_witness(&t, &d).unwrap();
        assert!((w.blp_value - 1.0).abs() <= 1e-12);
        assert_eq!(w.revival_intervals, vec![(0.5, 1.0)]);
    }

    #[test]
    fn separate_runs_are_separate_intervals() {
        let w = blp_witness(&[0.0, 1.0, 2.0, 3.0, 4.0], &[0.5, 0.6, 0.4, 0.45, 0.3]).unwrap();
        assert_eq!(w.revival_intervals, vec![(0.0, 1.0), (2.0, 3.0)]);
        assert!((w.blp_value - 0.15).abs() <= 1e-12);
    }

    #[test]
    fn too_short_series_is_rejected() {
        assert!(blp_witness(&[0.0], &[1.0]).is_err());
    }

    #[test]
    fn bloch_examples() {
        assert_eq!(
            bloch_vector(&DensityMatrix::basis(2, 0).unwrap()).unwrap(),
            (0.0, 0.0, 1.0)
        );
        assert_eq!(
            bloch_vector(&DensityMatrix::maximally_mixed(2).unwrap()).unwrap(),
            (0.0, 0.0, 0.0)
        );
        let s = 0.5f64.sqrt();
        let plus = DensityMatrix::pure(&[c(s, 0.0), c(s, 0.0)]).unwrap();
        let (x, y, z) = bloch_vector(&plus).unwrap();
        assert!((x - 1.0).abs() < 1e-15 && y.abs() < 1e-15 && z.abs() < 1e-15);
        assert!(bloch_vector(&DensityMatrix::basis(3, 0).unwrap()).is_err());
    }
}
