use alloc::format;
use alloc::string::ToString;
use alloc::sync::Arc;
use alloc::vec;

use super::{Expected, Oracle, Scenario, Start, System};
use crate::error::{Error, Result};
use crate::fiber::SkewSystem;
use crate::maps::{FnFiber, FnSequence};
use crate::metric::{grid_nodes, Point, Space};

/// Pointwise family `T_n(θ, v)` with closed-form partials.
pub trait GraphFamily {
    fn value(&self, n: usize, theta: f64, v: f64) -> f64;
    fn d_theta(&self, n: usize, theta: f64, v: f64) -> f64;
    fn d_v(&self, n: usize, theta: f64, v: f64) -> f64;
    /// Uniform bound on `|∂_v T_n|`.
    fn dv_bound(&self) -> f64;
}

/// `T_n(θ, v) = a·cos(v + k·θ) + c_n` with `c_n = 1 + 1/n`, or `c_n = 1`
/// when stationary.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CosineGraphFamily {
    pub amplitude: f64,
    pub theta_coupling: f64,
    pub stationary: bool,
}

impl Default for CosineGraphFamily {
    fn default() -> Self {
        CosineGraphFamily {
            amplitude: 0.5,
            theta_coupling: 1.0,
            stationary: false,
        }
    }
}

impl CosineGraphFamily {
    pub fn theta_free() -> Self {
        CosineGraphFamily {
            theta_coupling: 0.0,
            ..Self::default()
        }
    }

    pub fn stationary() -> Self {
        CosineGraphFamily {
            stationary: true,
            ..Self::default()
        }
    }

    fn offset(&self, n: usize) -> f64 {
        if self.stationary {
            1.0
        } else {
            1.0 + 1.0 / n as f64
        }
    }
}

impl GraphFamily for CosineGraphFamily {
    fn value(&self, n: usize, theta: f64, v: f64) -> f64 {
        self.amplitude * libm::cos(v + self.theta_coupling * theta) + self.offset(n)
    }

    fn d_theta(&self, _: usize, theta: f64, v: f64) -> f64 {
        -self.amplitude * self.theta_coupling * libm::sin(v + self.theta_coupling * theta)
    }

    fn d_v(&self, _: usize, theta: f64, v: f64) -> f64 {
        -self.amplitude * libm::sin(v + self.theta_coupling * theta)
    }

    fn dv_bound(&self) -> f64 {
        self.amplitude.abs()
    }
}

/// Largest `|v_i − (u_{i+1} − u_{i−1})/(2h)|` over interior grid nodes.
pub fn derivative_mismatch(u: &Point, v: &Point, lo: f64, hi: f64) -> f64 {
    let (u, v) = (u.coords(), v.coords());
    if u.len() < 3 || v.len() != u.len() {
        return f64::NAN;
    }
    let h = (hi - lo) / (u.len() - 1) as f64;
    (1..u.len() - 1)
        .map(|i| (v[i] - (u[i + 1] - u[i - 1]) / (2.0 * h)).abs())
        .fold(0.0, f64::max)
}

const MIN_GRID: usize = 16;

/// Sampled `|∂_v T_n|` over a coarse `(n, θ, v)` lattice; guards against a
/// family whose declared bound is wrong.
fn sampled_dv<F: GraphFamily>(family: &F, nodes: &[f64]) -> f64 {
    let mut worst = 0.0_f64;
    for n in 1..=8 {
        for &theta in nodes.iter().step_by(4) {
            for k in 0..=32 {
                let v = -4.0 + 0.25 * k as f64;
                worst = worst.max(family.d_v(n, theta, v).abs());
            }
        }
    }
    worst
}

/// Graph-transform demo on `[0, 1]`: `u` is a grid function, `v` its
/// candidate derivative, and the fiber map is the chain rule.
pub fn build_smooth_graph_demo<F>(grid_size: usize, family: F) -> Result<Scenario>
where
    F: GraphFamily + Send + Sync + 'static,
{
    if grid_size < MIN_GRID {
        return Err(Error::InvalidParameter(format!(
            "grid_size must be at least {MIN_GRID}, got {grid_size}"
        )));
    }
    let (lo, hi) = (0.0, 1.0);
    let nodes = Arc::new(grid_nodes(grid_size, lo, hi));
    let lambda = family.dv_bound().max(sampled_dv(&family, &nodes));
    if !(lambda < 1.0) {
        return Err(Error::Domain { rate: lambda });
    }
    let space = Space::grid(grid_size, lo, hi);
    let family = Arc::new(family);

    let (fam, th) = (family.clone(), nodes.clone());
    let base = FnSequence::new(space.clone(), move |n, u: &Point| {
        Point::new(th.iter().zip(u.coords()).map(|(&t, &ui)| fam.value(n, t, ui)).collect())
    })
    .with_declared_mu(lambda);
    let (fam, th) = (family, nodes);
    let fiber = FnFiber::new(space.clone(), space.clone(), move |n, u: &Point, v: &Point| {
        Point::new(
            th.iter()
                .zip(u.coords().iter().zip(v.coords()))
                .map(|(&t, (&ui, &vi))| fam.d_theta(n, t, ui) + fam.d_v(n, t, ui) * vi)
                .collect(),
        )
    })
    .with_declared_lambda(lambda);

    let zero = Point::constant(grid_size, 0.0);
    let system = SkewSystem::new(Arc::new(base), Arc::new(fiber), zero.clone(), zero.clone())?;
    Ok(Scenario {
        name: "smooth-graph".into(),
        system: System::Skew(system),
        x0: zero.clone(),
        start: Start::Skew((zero.clone(), zero)),
        oracle: Some(Oracle::DerivativeOfBase),
        oracle_note: "fiber limit equals the central finite difference of the base limit up to O(h²)".into(),
        expected: Expected::Converges(None),
        raw_cap: 400,
        notes: vec![
            ("grid".to_string(), format!("{space}")),
            (
                "grid spacing".to_string(),
                format!("{}", (hi - lo) / (grid_size - 1) as f64),
            ),
            ("declared rate".to_string(), format!("{lambda}")),
        ],
    })
}
