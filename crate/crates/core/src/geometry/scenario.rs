use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-aligned box domain.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Domain {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Domain {
    pub fn unit(d: usize) -> Self {
        Domain {
            lo: vec![0.0; d],
            hi: vec![1.0; d],
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.lo.len()
            && x.iter()
                .zip(self.lo.iter().zip(self.hi.iter()))
                .all(|(xi, (lo, hi))| *xi >= lo - 1e-12 && *xi <= hi + 1e-12)
    }

    pub fn side(&self, axis: usize) -> f64 {
        self.hi[axis] - self.lo[axis]
    }

    pub fn diameter(&self) -> f64 {
        self.lo
            .iter()
            .zip(self.hi.iter())
            .map(|(lo, hi)| (hi - lo).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo
            .iter()
            .zip(self.hi.iter())
            .map(|(a, b)| 0.5 * (a + b))
            .collect()
    }

    /// Midpoint sampling grid with `n` points per axis.
    pub fn grid(&self, n: usize) -> Vec<Vec<f64>> {
        let d = self.dim();
        let total = n.pow(d as u32);
        let mut out = Vec::with_capacity(total);
        for flat in 0..total {
            let mut idx = flat;
            let mut x = vec![0.0; d];
            for a in (0..d).rev() {
                let i = idx % n;
                idx /= n;
                x[a] = self.lo[a] + (i as f64 + 0.5) * self.side(a) / n as f64;
            }
            out.push(x);
        }
        out
    }
}

/// Metric coefficient map g^{jk}(x). All registry entries are constant;
/// the general constant variant exists for scrambled-coordinate tests.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricSpec {
    Identity,
    DiagConst(Vec<f64>),
    Const(DMatrix<f64>),
}

/// Vector potential map (V_1..V_d)(x) together with what is known about
/// its derivatives. `LinearConst` keeps the exact Jacobian; `Poly2d` has
/// no registered derivative and exercises the central-difference fallback.
#[derive(Debug, Clone, PartialEq)]
pub enum GaugeSpec {
    /// V_j(x) = sum_k m[(j,k)] x_k; intensity F = m^T - m is constant.
    LinearConst(DMatrix<f64>),
    /// d=2, V = (0, lin*x1 + quad*x1^2); derivative left to finite differences.
    Poly2d { lin: f64, quad: f64 },
    /// d=2, V = (0, x1*(1 + a*x2)); f(x) = 1 + a*x2, analytic Jacobian.
    VarField2d { a: f64 },
}

/// Scalar potential map V(x) with exact gradient.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    Const(f64),
    /// c + grad . x
    Affine {
        c: f64,
        grad: Vec<f64>,
    },
    /// c + lin . x + 0.5 x^T quad x
    Quadratic {
        c: f64,
        lin: Vec<f64>,
        quad: DMatrix<f64>,
    },
}

/// Known exact answers for constant-coefficient entries, used by tests and
/// reported alongside numerical results.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct AnalyticAnswers {
    /// Characteristic frequencies, descending.
    pub frequencies: Vec<f64>,
    /// Minimum of V over the domain, when simple to state.
    pub potential_min: Option<f64>,
}

/// Bundled coefficient data for one operator instance.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub dim: usize,
    pub metric: MetricSpec,
    pub gauge: GaugeSpec,
    /// Constant added to the vector potential; pure gauge on the torus
    /// when mu c_a L_a / h is a multiple of 2 pi.
    pub gauge_offset: Vec<f64>,
    pub potential: PotentialSpec,
    pub domain: Domain,
    pub analytic: Option<AnalyticAnswers>,
}

impl Scenario {
    pub fn metric_at(&self, _x: &[f64]) -> DMatrix<f64> {
        match &self.metric {
            MetricSpec::Identity => DMatrix::identity(self.dim, self.dim),
            MetricSpec::DiagConst(d) => DMatrix::from_diagonal(&DVector::from_vec(d.clone())),
            MetricSpec::Const(m) => m.clone(),
        }
    }

    pub fn gauge_at(&self, x: &[f64]) -> Vec<f64> {
        let mut v = match &self.gauge {
            GaugeSpec::LinearConst(m) => {
                let xv = DVector::from_column_slice(x);
                (m * xv).iter().copied().collect()
            }
            GaugeSpec::Poly2d { lin, quad } => vec![0.0, lin * x[0] + quad * x[0] * x[0]],
            GaugeSpec::VarField2d { a } => vec![0.0, x[0] * (1.0 + a * x[1])],
        };
        for (vi, off) in v.iter_mut().zip(self.gauge_offset.iter()) {
            *vi += off;
        }
        v
    }

    /// Exact Jacobian J[(j,k)] = dV_j/dx_k when the registry knows it.
    pub fn gauge_jacobian_at(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        match &self.gauge {
            GaugeSpec::LinearConst(m) => Some(m.clone()),
            GaugeSpec::Poly2d { .. } => None,
            GaugeSpec::VarField2d { a } => {
                let mut j = DMatrix::zeros(2, 2);
                j[(1, 0)] = 1.0 + a * x[1];
                j[(1, 1)] = a * x[0];
                Some(j)
            }
        }
    }

    pub fn potential_at(&self, x: &[f64]) -> f64 {
        match &self.potential {
            PotentialSpec::Const(c) => *c,
            PotentialSpec::Affine { c, grad } => {
                c + grad.iter().zip(x.iter()).map(|(g, xi)| g * xi).sum::<f64>()
            }
            PotentialSpec::Quadratic { c, lin, quad } => {
                let xv = DVector::from_column_slice(x);
                c + lin.iter().zip(x.iter()).map(|(g, xi)| g * xi).sum::<f64>()
                    + 0.5 * (&xv.transpose() * quad * &xv)[(0, 0)]
            }
        }
    }

    pub fn potential_grad_at(&self, x: &[f64]) -> Vec<f64> {
        match &self.potential {
            PotentialSpec::Const(_) => vec![0.0; self.dim],
            PotentialSpec::Affine { grad, .. } => grad.clone(),
            PotentialSpec::Quadratic { lin, quad, .. } => {
                let xv = DVector::from_column_slice(x);
                let qx = quad * xv;
                lin.iter().zip(qx.iter()).map(|(l, q)| l + q).collect()
            }
        }
    }

    /// Scenario has constant metric and intensity coefficients.
    pub fn is_constant_field(&self) -> bool {
        matches!(self.gauge, GaugeSpec::LinearConst(_))
    }

    /// Sampling check of the uniform ellipticity bounds on the metric and
    /// totality (finiteness) of all coefficient maps.
    pub fn validate(&self, c_bound: f64, samples_per_axis: usize) -> Result<()> {
        if self.dim < 2 || !self.dim.is_multiple_of(2) {
            return Err(Error::invalid_config(
                "scenario.dim",
                format!("dimension must be an even integer >= 2, got {}", self.dim),
            ));
        }
        if self.domain.dim() != self.dim {
            return Err(Error::invalid_config(
                "scenario.domain",
                "domain/dimension mismatch",
            ));
        }
        for x in self.domain.grid(samples_per_axis) {
            let g = self.metric_at(&x);
            let sym_defect = (&g - g.transpose()).amax();
            if sym_defect > 1e-12 * g.amax().max(1.0) {
                return Err(Error::NotSpd(format!(
                    "asymmetry {sym_defect:.3e} at {x:?}"
                )));
            }
            let eig = g.clone().symmetric_eigen().eigenvalues;
            let (lo, hi) = (eig.min(), eig.max());
            if !(lo >= 1.0 / c_bound && hi <= c_bound) {
                return Err(Error::NotSpd(format!(
                    "metric eigenvalues [{lo:.3e},{hi:.3e}] out of [1/{c_bound},{c_bound}] at {x:?}"
                )));
            }
            let v = self.potential_at(&x);
            let a = self.gauge_at(&x);
            if !v.is_finite() || a.iter().any(|t| !t.is_finite()) {
                return Err(Error::invalid_config(
                    "scenario",
                    format!("non-finite coefficient at {x:?}"),
                ));
            }
        }
        Ok(())
    }
}

/// Built-in scenario registry. Arbitrary symbolic fields are deliberately
/// not parsed; entries are closed-form families with exact derivatives
/// wherever the verification path needs them.
pub fn registry(id: &str) -> Result<Scenario> {
    let landau_2d = |b: f64| {
        let mut m = DMatrix::zeros(2, 2);
        m[(1, 0)] = b;
        m
    };
    // V = (0, f1*x1, 0, f2*x3): two decoupled planes (1,2) and (3,4).
    let landau_4d = |f1: f64, f2: f64| {
        let mut m = DMatrix::zeros(4, 4);
        m[(1, 0)] = f1;
        m[(3, 2)] = f2;
        m
    };
    match id {
        "const2d" => Ok(Scenario {
            name: "const2d".into(),
            dim: 2,
            metric: MetricSpec::Identity,
            gauge: GaugeSpec::LinearConst(landau_2d(1.0)),
            gauge_offset: vec![0.0; 2],
            potential: PotentialSpec::Const(-1.0),
            domain: Domain::unit(2),
            analytic: Some(AnalyticAnswers { frequencies: vec![1.0], potential_min: Some(-1.0) }),
        }),
        "const4d" => Ok(Scenario {
            name: "const4d".into(),
            dim: 4,
            metric: MetricSpec::Identity,
            gauge: GaugeSpec::LinearConst(landau_4d(1.0, std::f64::consts::SQRT_2)),
            gauge_offset: vec![0.0; 4],
            potential: PotentialSpec::Const(-1.0),
            domain: Domain::unit(4),
            analytic: Some(AnalyticAnswers {
                frequencies: vec![std::f64::consts::SQRT_2, 1.0],
                potential_min: Some(-1.0),
            }),
        }),
        "res4d" => Ok(Scenario {
            name: "res4d".into(),
            dim: 4,
            metric: MetricSpec::Identity,
            gauge: GaugeSpec::LinearConst(landau_4d(1.0, 2.0)),
            gauge_offset: vec![0.0; 4],
            potential: PotentialSpec::Const(-1.0),
            domain: Domain::unit(4),
            analytic: Some(AnalyticAnswers { frequencies: vec![2.0, 1.0], potential_min: Some(-1.0) }),
        }),
        "var2d" => Ok(Scenario {
            name: "var2d".into(),
            dim: 2,
            metric: MetricSpec::Identity,
            gauge: GaugeSpec::LinearConst(landau_2d(1.0)),
            gauge_offset: vec![0.0; 2],
            potential: PotentialSpec::Affine { c: -1.0, grad: vec![0.0, 0.3] },
            domain: Domain::unit(2),
            analytic: Some(AnalyticAnswers { frequencies: vec![1.0], potential_min: Some(-1.0) }),
        }),
        "varfield2d" => Ok(Scenario {
            name: "varfield2d".into(),
            dim: 2,
            metric: MetricSpec::Identity,
            gauge: GaugeSpec::VarField2d { a: 0.1 },
            gauge_offset: vec![0.0; 2],
            potential: PotentialSpec::Const(-1.0),
            domain: Domain::unit(2),
            analytic: None,
        }),
        "poly2d" => Ok(Scenario {
            name: "poly2d".into(),
            dim: 2,
            metric: MetricSpec::Identity,
            gauge: GaugeSpec::Poly2d { lin: 1.0, quad: 0.1 },
            gauge_offset: vec![0.0; 2],
            potential: PotentialSpec::Const(-1.0),
            domain: Domain { lo: vec![0.0, 0.0], hi: vec![2.0, 2.0] },
            analytic: None,
        }),
        "quad2d" => Ok(Scenario {
            name: "quad2d".into(),
            dim: 2,
            metric: MetricSpec::Identity,
            gauge: GaugeSpec::LinearConst(landau_2d(1.0)),
            gauge_offset: vec![0.0; 2],
            potential: PotentialSpec::Quadratic {
                c: 0.0,
                lin: vec![0.0, 0.0],
                quad: DMatrix::identity(2, 2),
            },
            domain: Domain { lo: vec![-2.0, -2.0], hi: vec![2.0, 2.0] },
            analytic: Some(AnalyticAnswers { frequencies: vec![1.0], potential_min: Some(0.0) }),
        }),
        other => Err(Error::invalid_config(
            "scenario.id",
            format!(
                "unknown scenario '{other}'; known: const2d, const4d, res4d, var2d, varfield2d, poly2d, quad2d"
            ),
        )),
    }
}
