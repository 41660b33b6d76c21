//! Total generalized Ricci flow `Ġ = −2 Ric♯(G)` on quadratic Lie algebras,
//! in binary64.
//!
//! Over a point every operator is bilinear, so the exact pipeline
//! (canonical connection, divergence correction, total Ricci) is replayed
//! here with plain matrices. The divergence is held fixed along the flow.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use num_traits::ToPrimitive;

use crate::connection::DivergenceOp;
use crate::courant::CourantAlgebroid;
use crate::error::{Error, Result, Side};
use crate::linalg::RatMatrix;
use crate::metric::GenMetric;
use crate::polyalg::Rational;

/// Tolerance on the involution defect and on the Ricci symmetry residual.
pub const TOLERANCE: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostics {
    /// `‖G² − 1‖∞`
    pub involution: f64,
    /// `‖PG − (PG)ᵀ‖∞`
    pub pairing_symmetry: f64,
    /// Largest `|div([a∓, b±])|` over adapted pairs.
    pub compatibility: f64,
    /// `‖Ric − Ricᵀ‖∞`
    pub ricci_symmetry: f64,
}

#[derive(Clone, Debug)]
pub struct FlowState {
    pub t: f64,
    pub g: DMatrix<f64>,
    pub diagnostics: Diagnostics,
}

/// Trajectory of a run; `aborted` holds the reason if it stopped early.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub states: Vec<FlowState>,
    pub aborted: Option<Error>,
}

impl Trajectory {
    pub fn last(&self) -> &FlowState {
        self.states
            .last()
            .expect("trajectory holds the initial state")
    }
}

fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn mat(m: &RatMatrix) -> DMatrix<f64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| to_f64(&m[(i, j)]))
}

/// `‖M‖∞`, the maximum absolute row sum.
pub fn inf_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter()
        .map(|row| row.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Float image of a homogeneous algebroid with a fixed divergence.
#[derive(Clone, Debug)]
pub struct HomogeneousSystem {
    r: usize,
    p: DMatrix<f64>,
    pinv: DMatrix<f64>,
    /// `c[i * r + j] = [eᵢ, eⱼ]`
    c: Vec<DVector<f64>>,
    dv: DVector<f64>,
}

impl HomogeneousSystem {
    pub fn new(alg: &CourantAlgebroid, dv: &DivergenceOp) -> Result<Self> {
        if alg.dim_base() > 0 {
            return Err(Error::NotHomogeneous(alg.dim_base()));
        }
        let r = alg.rank();
        let constant = |p: &crate::Poly| p.as_constant().map(|c| to_f64(&c)).unwrap_or(f64::NAN);
        let c = alg
            .structure()
            .iter()
            .flatten()
            .map(|s| DVector::from_iterator(r, s.0.iter().map(constant)))
            .collect();
        Ok(HomogeneousSystem {
            r,
            p: mat(alg.pairing()),
            pinv: mat(alg.pairing_inv()),
            c,
            dv: DVector::from_iterator(r, dv.frame_values().iter().map(constant)),
        })
    }

    pub fn rank(&self) -> usize {
        self.r
    }

    pub fn pairing(&self) -> &DMatrix<f64> {
        &self.p
    }

    fn bracket(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.r);
        for i in 0..self.r {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..self.r {
                if y[j] != 0.0 {
                    out.axpy(x[i] * y[j], &self.c[i * self.r + j], 1.0);
                }
            }
        }
        out
    }

    fn projectors(g: &DMatrix<f64>) -> [DMatrix<f64>; 2] {
        let id = DMatrix::identity(g.nrows(), g.ncols());
        [(&id + g) * 0.5, (&id - g) * 0.5]
    }

    /// `Γ[i][j] = D_{eᵢ}eⱼ` for the canonical connection corrected to have
    /// divergence `dv`, stored as the columns of `gamma[i]`.
    fn connection(&self, g: &DMatrix<f64>) -> Result<Vec<DMatrix<f64>>> {
        let r = self.r;
        let proj = Self::projectors(g);
        let ranks = proj.clone().map(|m| m.trace().round() as usize);
        for (side, &n) in Side::BOTH.iter().zip(&ranks) {
            if n == 1 {
                return Err(Error::RankOneSide(*side));
            }
        }
        let e = |k: usize| DVector::from_fn(r, |i, _| if i == k { 1.0 } else { 0.0 });
        let mut gamma: Vec<DMatrix<f64>> = (0..r)
            .map(|i| {
                let mut m = DMatrix::zeros(r, r);
                for j in 0..r {
                    let mut col = DVector::zeros(r);
                    for pr in &proj {
                        col += pr * self.bracket(&e(i), &pr.column(j).into_owned());
                    }
                    m.set_column(j, &col);
                }
                m
            })
            .collect();
        // defect ε(eⱼ) = dv(eⱼ) − Σᵢ Γ[i][j]ⁱ
        let eps = DVector::from_fn(r, |j, _| {
            self.dv[j] - (0..r).map(|i| gamma[i][(i, j)]).sum::<f64>()
        });
        if eps.amax() == 0.0 {
            return Ok(gamma);
        }
        let raw = &self.pinv * &eps;
        for (pr, &n) in proj.iter().zip(&ranks) {
            if n == 0 {
                continue;
            }
            let sharp = pr * &raw;
            let k = 1.0 / (1.0 - n as f64);
            let gram = pr.transpose() * &self.p * pr;
            let eps_side = pr.transpose() * &eps;
            for (i, gi) in gamma.iter_mut().enumerate() {
                for j in 0..r {
                    let col = (&sharp * gram[(i, j)] - pr.column(i) * eps_side[j]) * k;
                    let mut c = gi.column_mut(j);
                    c += col;
                }
            }
        }
        Ok(gamma)
    }

    /// Matrix of `Ric(eⱼ, eₖ)` for the total curvature.
    pub fn ricci_matrix(&self, g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let r = self.r;
        let gamma = self.connection(g)?;
        let apply = |x: &DVector<f64>| -> DMatrix<f64> {
            let mut m = DMatrix::zeros(r, r);
            for (i, gi) in gamma.iter().enumerate() {
                if x[i] != 0.0 {
                    m += gi * x[i];
                }
            }
            m
        };
        let r0 = |x: &DVector<f64>, y: &DVector<f64>| -> DMatrix<f64> {
            let (ax, ay) = (apply(x), apply(y));
            &ax * &ay - &ay * &ax - apply(&self.bracket(x, y))
        };
        let [pp, pm] = Self::projectors(g);
        let mut ric = DMatrix::zeros(r, r);
        for j in 0..r {
            let ap = pp.column(j).into_owned();
            let am = pm.column(j).into_owned();
            for i in 0..r {
                let t = r0(&pp.column(i).into_owned(), &am) + r0(&pm.column(i).into_owned(), &ap);
                // ⟨v, ẽᵢ⟩ is the i-th component of v
                for k in 0..r {
                    ric[(j, k)] += t[(i, k)];
                }
            }
        }
        Ok(ric)
    }

    /// `Ric♯ = P⁻¹ Ric`, so that `Ric(a, b) = ⟨a, Ric♯ b⟩`.
    pub fn ricci_endomorphism(&self, g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        Ok(&self.pinv * self.ricci_matrix(g)?)
    }

    pub fn diagnostics(&self, g: &DMatrix<f64>) -> Result<Diagnostics> {
        let r = self.r;
        let id = DMatrix::<f64>::identity(r, r);
        let pg = &self.p * g;
        let ric = self.ricci_matrix(g)?;
        let [pp, pm] = Self::projectors(g);
        let mut compatibility = 0.0f64;
        for j in 0..r {
            for k in 0..r {
                let b = self.bracket(&pm.column(j).into_owned(), &pp.column(k).into_owned());
                compatibility = compatibility.max(self.dv.dot(&b).abs());
            }
        }
        Ok(Diagnostics {
            involution: inf_norm(&(g * g - id)),
            pairing_symmetry: inf_norm(&(&pg - pg.transpose())),
            compatibility,
            ricci_symmetry: inf_norm(&(&ric - ric.transpose())),
        })
    }

    /// `‖Ric♯G + GRic♯‖∞`
    pub fn anticommutator(&self, g: &DMatrix<f64>) -> Result<f64> {
        let s = self.ricci_endomorphism(g)?;
        Ok(inf_norm(&(&s * g + g * &s)))
    }

    fn velocity(&self, g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        Ok(self.ricci_endomorphism(g)? * -2.0)
    }

    pub fn state(&self, t: f64, g: DMatrix<f64>) -> Result<FlowState> {
        let diagnostics = self.diagnostics(&g)?;
        Ok(FlowState { t, g, diagnostics })
    }

    /// One RK4 step followed by retraction onto the involutions.
    pub fn step(&self, state: &FlowState, h: f64) -> Result<FlowState> {
        let g = &state.g;
        let k1 = self.velocity(g)?;
        let k2 = self.velocity(&(g + &k1 * (h / 2.0)))?;
        let k3 = self.velocity(&(g + &k2 * (h / 2.0)))?;
        let k4 = self.velocity(&(g + &k3 * h))?;
        let next = g + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        let t = state.t + h;
        let next = retract(&next).map_err(|reason| Error::StepRejected { t, reason })?;
        let out = self.state(t, next)?;
        if out.diagnostics.involution > TOLERANCE {
            return Err(Error::StepRejected {
                t,
                reason: format!(
                    "involution defect {:e} after retraction",
                    out.diagnostics.involution
                ),
            });
        }
        if out.diagnostics.ricci_symmetry > TOLERANCE {
            return Err(Error::SymmetryLost {
                t,
                residual: out.diagnostics.ricci_symmetry,
            });
        }
        Ok(out)
    }

    /// Runs `steps` steps from `g0`. Errors only if the initial state is
    /// unusable; mid-run failures end the trajectory with `aborted` set.
    pub fn run(&self, g0: DMatrix<f64>, h: f64, steps: usize) -> Result<Trajectory> {
        let s0 = self.state(0.0, g0)?;
        if s0.diagnostics.ricci_symmetry > TOLERANCE {
            return Err(Error::SymmetryLost {
                t: 0.0,
                residual: s0.diagnostics.ricci_symmetry,
            });
        }
        let mut states = vec![s0];
        let mut aborted = None;
        for _ in 0..steps {
            match self.step(states.last().unwrap(), h) {
                Ok(s) => states.push(s),
                Err(e) => {
                    aborted = Some(e);
                    break;
                }
            }
        }
        Ok(Trajectory { states, aborted })
    }
}

/// `G (G²)^(−1/2)`, the matrix sign of `G`, by Newton's iteration
/// `X ← ½(X + X⁻¹)`. Near an involution this converges quadratically.
pub fn retract(g: &DMatrix<f64>) -> std::result::Result<DMatrix<f64>, String> {
    let mut x = g.clone();
    for _ in 0..50 {
        let inv = x.clone().try_inverse().ok_or("singular iterate")?;
        let next = (&x + inv) * 0.5;
        let delta = inf_norm(&(&next - &x));
        x = next;
        if delta <= 1e-15 * inf_norm(&x).max(1.0) {
            return Ok(x);
        }
    }
    Err("sign iteration did not converge".into())
}

/// Ricci endomorphism of an exact metric, evaluated in floats.
pub fn ricci_endomorphism(
    alg: &CourantAlgebroid,
    metric: &GenMetric,
    dv: &DivergenceOp,
) -> Result<DMatrix<f64>> {
    HomogeneousSystem::new(alg, dv)?.ricci_endomorphism(&mat(metric.matrix()))
}

pub fn flow_run(
    alg: &CourantAlgebroid,
    metric: &GenMetric,
    dv: &DivergenceOp,
    h: f64,
    steps: usize,
) -> Result<Trajectory> {
    HomogeneousSystem::new(alg, dv)?.run(mat(metric.matrix()), h, steps)
}

pub fn metric_to_f64(metric: &GenMetric) -> DMatrix<f64> {
    mat(metric.matrix())
}

/// Columns `t`, `g_ij` row-major, then the four diagnostics.
pub fn write_csv<W: Write>(out: &mut W, states: &[FlowState]) -> std::io::Result<()> {
    let Some(first) = states.first() else {
        return Ok(());
    };
    let r = first.g.nrows();
    let mut header = vec!["t".to_string()];
    for i in 1..=r {
        for j in 1..=r {
            header.push(format!("g{i}_{j}"));
        }
    }
    header.extend(
        [
            "involution",
            "pairing_symmetry",
            "compatibility",
            "ricci_symmetry",
        ]
        .map(String::from),
    );
    writeln!(out, "{}", header.join(","))?;
    for s in states {
        let mut row = vec![format!("{}", s.t)];
        for i in 0..r {
            for j in 0..r {
                row.push(format!("{:e}", s.g[(i, j)]));
            }
        }
        let d = &s.diagnostics;
        for v in [
            d.involution,
            d.pairing_symmetry,
            d.compatibility,
            d.ricci_symmetry,
        ] {
            row.push(format!("{v:e}"));
        }
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}
