use std::io::Write;
use std::path::Path;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::geometry::{intensity_matrix, Scenario};

/// Sampled drift trajectory in rescaled time (the mu^{-1} factor of the
/// drift equation is normalized out).
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    pub potential: Vec<f64>,
}

impl Trajectory {
    /// Largest |V(x(t)) - V(x(0))| along the trajectory.
    pub fn potential_drift(&self) -> f64 {
        let v0 = self.potential[0];
        self.potential
            .iter()
            .map(|v| (v - v0).abs())
            .fold(0.0, f64::max)
    }

    /// CSV export with header "t,x1,...,xd,V".
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let io_err = |source| Error::Io {
            path: path.display().to_string(),
            source,
        };
        let mut file = std::fs::File::create(path).map_err(io_err)?;
        let d = self.points.first().map(|p| p.len()).unwrap_or(0);
        let header: Vec<String> = std::iter::once("t".to_string())
            .chain((1..=d).map(|j| format!("x{j}")))
            .chain(std::iter::once("V".into()))
            .collect();
        writeln!(file, "{}", header.join(",")).map_err(io_err)?;
        for ((t, x), v) in self.times.iter().zip(&self.points).zip(&self.potential) {
            let mut row = vec![format!("{t}")];
            row.extend(x.iter().map(|c| format!("{c}")));
            row.push(format!("{v}"));
            writeln!(file, "{}", row.join(",")).map_err(io_err)?;
        }
        Ok(())
    }
}

/// Integrates the drift equation dx_j/dt = sum_k (F^{-1})_{jk} dV/dx_k by a
/// fixed-step classical 4th-order Runge-Kutta scheme, valid for constant
/// metric and field scenarios. V is conserved along exact trajectories.
pub fn drift_flow(scenario: &Scenario, x0: &[f64], t_end: f64, dt: f64) -> Result<Trajectory> {
    if !scenario.is_constant_field() {
        return Err(Error::NonConstantField("drift_flow"));
    }
    let fi = intensity_matrix(scenario, &scenario.domain.center())?;
    let f_inv = fi
        .f_matrix
        .clone()
        .try_inverse()
        .ok_or(Error::SingularIntensity)?;
    let rhs = |x: &DVector<f64>| -> DVector<f64> {
        let grad = DVector::from_vec(scenario.potential_grad_at(x.as_slice()));
        &f_inv * grad
    };
    let steps = (t_end / dt).round() as usize;
    let mut x = DVector::from_column_slice(x0);
    let mut traj = Trajectory {
        times: Vec::with_capacity(steps + 1),
        points: Vec::with_capacity(steps + 1),
        potential: Vec::with_capacity(steps + 1),
    };
    let push = |t: f64, x: &DVector<f64>, traj: &mut Trajectory| {
        traj.times.push(t);
        traj.points.push(x.as_slice().to_vec());
        traj.potential.push(scenario.potential_at(x.as_slice()));
    };
    push(0.0, &x, &mut traj);
    for s in 0..steps {
        let k1 = rhs(&x);
        let k2 = rhs(&(&x + &k1 * (dt / 2.0)));
        let k3 = rhs(&(&x + &k2 * (dt / 2.0)));
        let k4 = rhs(&(&x + &k3 * dt));
        x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
        push((s + 1) as f64 * dt, &x, &mut traj);
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{registry, GaugeSpec, PotentialSpec};

    #[test]
    fn zero_gradient_is_stationary() {
        let s = registry("const2d").unwrap(); // V constant
        let traj = drift_flow(&s, &[0.3, 0.4], 1.0, 0.01).unwrap();
        for p in &traj.points {
            assert!((p[0] - 0.3).abs() < 1e-14 && (p[1] - 0.4).abs() < 1e-14);
        }
    }

    #[test]
    fn linear_potential_moves_straight_at_unit_speed() {
        // V = x2, F12 = 1: velocity is constant, unit length, orthogonal to
        // grad V, and V is exactly conserved by the linear flow.
        let mut s = registry("var2d").unwrap();
        s.potential = PotentialSpec::Affine {
            c: 0.0,
            grad: vec![0.0, 1.0],
        };
        s.domain.lo = vec![-10.0, -10.0];
        s.domain.hi = vec![10.0, 10.0];
        let traj = drift_flow(&s, &[0.0, 0.0], 1.0, 1e-3).unwrap();
        let end = traj.points.last().unwrap();
        let dist = (end[0].powi(2) + end[1].powi(2)).sqrt();
        assert!((dist - 1.0).abs() < 1e-10, "travelled {dist}");
        assert!(end[1].abs() < 1e-12, "moved along grad V");
        assert!(traj.potential_drift() < 1e-12);
    }

    #[test]
    fn quadratic_potential_circular_orbit_conserves_v() {
        let s = registry("quad2d").unwrap();
        let traj = drift_flow(&s, &[1.0, 0.0], 1.0, 1e-3).unwrap();
        assert!(
            traj.potential_drift() <= 1e-6,
            "drift {}",
            traj.potential_drift()
        );
        // Radius stays 1.
        for p in traj.points.iter().step_by(100) {
            let r = (p[0].powi(2) + p[1].powi(2)).sqrt();
            assert!((r - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn fourth_order_convergence_of_potential_drift() {
        let s = registry("quad2d").unwrap();
        let errs: Vec<f64> = [1e-2, 5e-3, 2.5e-3]
            .iter()
            .map(|&dt| {
                drift_flow(&s, &[1.0, 0.0], 1.0, dt)
                    .unwrap()
                    .potential_drift()
            })
            .collect();
        let s1 = (errs[0] / errs[1]).log2();
        let s2 = (errs[1] / errs[2]).log2();
        assert!(
            s1 > 3.5 && s2 > 3.5,
            "slopes {s1:.2}, {s2:.2} below 4th order"
        );
    }

    #[test]
    fn non_constant_field_rejected() {
        let s = registry("varfield2d").unwrap();
        assert!(matches!(
            drift_flow(&s, &[0.5, 0.5], 1.0, 0.01),
            Err(Error::NonConstantField(_))
        ));
        assert!(!matches!(
            registry("poly2d").unwrap().gauge,
            GaugeSpec::LinearConst(_)
        ));
    }

    #[test]
    fn csv_export_has_header_and_rows() {
        let s = registry("quad2d").unwrap();
        let traj = drift_flow(&s, &[1.0, 0.0], 0.01, 1e-2).unwrap();
        let dir = std::env::temp_dir().join("magweyl_drift_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("traj.csv");
        traj.write_csv(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,x1,x2,V");
        assert_eq!(lines.count(), 2);
    }
}
